//! Numerical helpers shared by the channel model and the metrics.

use std::f64::consts::{LN_2, PI, SQRT_2};

/// Gaussian tail probability `Q(z) = P(N(0,1) > z)`.
pub fn q_function(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

/// Natural log of `Q(z)`, accurate far into the upper tail.
pub fn ln_q(z: f64) -> f64 {
    if z < 35.0 {
        q_function(z).ln()
    } else {
        // Asymptotic expansion of the Mills ratio.
        let z2 = z * z;
        let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
        -0.5 * z2 - z.ln() - 0.5 * (2.0 * PI).ln() + series.ln()
    }
}

/// `ln(1 - exp(x))` for `x <= 0`.
pub fn ln_1m_exp(x: f64) -> f64 {
    if x > -LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Log of the standard normal mass on `(lo, hi]`; either end may be infinite.
///
/// The evaluation is mirror-exact: `(lo, hi)` and `(-hi, -lo)` produce the
/// same bits.
pub fn ln_normal_interval(lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    if lo >= 0.0 {
        upper_tail_difference(lo, hi)
    } else if hi <= 0.0 {
        upper_tail_difference(-hi, -lo)
    } else {
        let outside = q_function(-lo) + q_function(hi);
        (-outside).ln_1p()
    }
}

// ln(Q(a) - Q(b)) for 0 <= a <= b.
fn upper_tail_difference(a: f64, b: f64) -> f64 {
    let la = ln_q(a);
    if b == f64::INFINITY {
        return la;
    }
    let lb = ln_q(b);
    la + ln_1m_exp(lb - la)
}

/// Numerically stable `ln Σ exp(x_i)`; `-inf` for an empty slice.
pub fn ln_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let s: f64 = xs.into_iter().map(|x| (x - max).exp()).sum();
    max + s.ln()
}

/// `log2(1 + exp(-x))` without overflow for large negative `x`.
pub fn log2_1p_exp_neg(x: f64) -> f64 {
    let nats = if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    };
    nats / LN_2
}

/// Inverse complementary error function on `(0, 2)`.
///
/// A rational initial guess is refined by Newton steps on `erfc`.
pub fn erfc_inv(y: f64) -> f64 {
    assert!(y > 0.0 && y < 2.0, "erfc_inv domain is (0, 2), got {y}");
    if y == 1.0 {
        return 0.0;
    }
    // Work on the half where the result is positive.
    let (p, sign) = if y < 1.0 { (y, 1.0) } else { (2.0 - y, -1.0) };
    let mut x = initial_erfc_inv(p);
    let two_over_sqrt_pi = 2.0 / PI.sqrt();
    for _ in 0..60 {
        let err = libm::erfc(x) - p;
        let deriv = -two_over_sqrt_pi * (-x * x).exp();
        if deriv == 0.0 {
            break;
        }
        // Halley correction; converges cubically from the rational guess.
        let newton = err / deriv;
        let step = newton / (1.0 + x * newton);
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1e-300) {
            break;
        }
    }
    sign * x
}

// Abramowitz & Stegun 26.2.23 rational approximation of the normal quantile,
// rescaled to erfc^-1.
fn initial_erfc_inv(p: f64) -> f64 {
    // Upper normal tail probability p/2, so the quantile z satisfies Q(z) = p/2.
    let tail = 0.5 * p;
    let t = (-2.0 * tail.ln()).sqrt();
    let (c0, c1, c2) = (2.515517, 0.802853, 0.010328);
    let (d1, d2, d3) = (1.432788, 0.189269, 0.001308);
    let z = t - (c0 + c1 * t + c2 * t * t) / (1.0 + d1 * t + d2 * t * t + d3 * t * t * t);
    (z / SQRT_2).max(1e-3)
}

/// Nodes and weights of `n`-point Gauss–Hermite quadrature for
/// `∫ exp(-x²) f(x) dx`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let pim4 = PI.powf(-0.25);
    let half = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..half {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            // Orthonormal Hermite recurrence.
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    if n % 2 == 1 {
        nodes[half - 1] = 0.0;
    }
    // Ascending order.
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Neumaier-compensated accumulator; merging is order-sensitive, so callers
/// merge in a fixed order to stay reproducible.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Standard normal CDF.
pub fn phi(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}
