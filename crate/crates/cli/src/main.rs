use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qfactor_core::{
    analyze_llr, find_threshold, run_sweep, DemapMode, Error, ExperimentConfig, LValueFormat,
    LValueFrame, Scheme,
};

#[derive(Parser)]
#[command(name = "qfactor", version, about = "Hard and soft Q-factors of coded-modulation links under mismatched demapping")]
struct Cli {
    /// Log verbosity: -v for progress, -vv for debug output.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate every point of an SNR grid and write one CSV row per point.
    Sweep(RunArgs),
    /// Search the SNR at which the post-FEC BER crosses the target.
    Threshold(RunArgs),
    /// Compute BER_pre, ASI and Q-factors of captured L-values.
    AnalyzeLlr {
        /// Rows of (bit_position, transmitted_bit, L), CSV or binary.
        input: PathBuf,
        /// `csv` or `binary`; inferred from the extension when omitted.
        #[arg(long)]
        format: Option<LValueFormat>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write points, priors and labels of the configured constellation.
    ExportConstellation {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Frames per grid point; for `threshold`, the per-probe frame cap.
    #[arg(long)]
    frames: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// exact-map or max-log.
    #[arg(long)]
    mode: Option<DemapMode>,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(frames) = self.frames {
            cfg.frames = frames;
            cfg.threshold.max_frames = frames;
            cfg.threshold.min_frames = cfg.threshold.min_frames.min(frames);
        }
        if let Some(workers) = self.workers {
            cfg.workers = workers;
        }
        if let Some(mode) = self.mode {
            cfg.scheme.demap_mode = mode;
        }
        if let Some(out) = &self.output {
            cfg.output = Some(out.clone());
        }
        Ok(cfg)
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn infer_format(path: &Path) -> LValueFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => LValueFormat::Csv,
        _ => LValueFormat::Binary,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Sweep(args) => {
            let cfg = args.load()?;
            let result = run_sweep(&cfg)?;
            result.write_csv(open_output(cfg.output.as_deref())?)?;
        }
        Command::Threshold(args) => {
            let cfg = args.load()?;
            if cfg.workers == 0 {
                return Err(Error::Config("workers must be at least 1".into()));
            }
            let result = find_threshold(&cfg.scheme, &cfg.threshold, cfg.seed, cfg.workers)?;
            println!(
                "{} snr_lim_db {:.3} bracket [{:.3}, {:.3}] probes {}",
                result.scheme,
                result.snr_lim_db,
                result.ci_low_db,
                result.ci_high_db,
                result.probes.len()
            );
            if let Some(path) = cfg.output.as_deref() {
                result.write_csv(open_output(Some(path))?)?;
            }
        }
        Command::AnalyzeLlr {
            input,
            format,
            output,
        } => {
            let format = format.unwrap_or_else(|| infer_format(&input));
            let frame = LValueFrame::read(BufReader::new(File::open(&input)?), format)?;
            let r = analyze_llr(&frame)?;
            let mut out = open_output(output.as_deref())?;
            writeln!(out, "bits,ber_pre,asi,q_ber_db,q_asi_db")?;
            writeln!(out, "{},{},{},{},{}", r.total_bits, r.ber_pre, r.asi, r.q_ber_db, r.q_asi_db)?;
            out.flush()?;
        }
        Command::ExportConstellation { config, output } => {
            let cfg = match config {
                Some(p) => ExperimentConfig::load(&p)?,
                None => ExperimentConfig::default(),
            };
            let scheme = Scheme::new(cfg.scheme)?;
            scheme.spec().write_csv(open_output(output.as_deref())?)?;
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        Error::Io(_) => 3,
        Error::Bracket(_) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
