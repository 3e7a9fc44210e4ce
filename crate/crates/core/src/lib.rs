//! Monte-Carlo simulation of coded-modulation links and bitwise receiver
//! metrics under matched and mismatched demapping.

pub mod channel;
pub mod constellation;
pub mod demapper;
pub mod error;
pub mod experiment;
pub mod fec;
pub mod math;
pub mod metrics;
pub mod schemes;
pub mod shaping;

pub use channel::{ChannelObservation, DmcModel, Quantizer};
pub use constellation::{ConstellationSpec, Labeling};
pub use demapper::{AuxChannel, DemapMode, LValueFormat, LValueFrame, LlrQuantizer, LlrTable};
pub use error::{Error, Result};
pub use experiment::{
    analyze_llr, find_threshold, run_sweep, ExperimentConfig, Scenario, SnrGrid, SweepResult,
    ThresholdConfig, ThresholdResult,
};
pub use fec::{CodeDefinition, CodeId, Decoder, DecoderMode};
pub use metrics::MetricsReport;
pub use schemes::{FrameCounts, FrameResult, Scheme, SchemeConfig, SchemeKind};
