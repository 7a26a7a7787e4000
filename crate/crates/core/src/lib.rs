//! Bilateral signal warping (BSW) for ECG heartbeat prototype libraries.
//!
//! The crate covers the whole pipeline: record ingestion, baseline removal
//! and beat averaging, heartbeat-variability screening, amplitude/time
//! warping of beat pairs, matching-driven prototype merging, and
//! prototype-matching diagnosis next to the Sokolow-Lyon and Modified
//! Cornell voltage criteria.

pub mod config;
pub mod diagnosis;
pub mod error;
pub mod io;
pub mod lead;
pub mod matching;
pub mod preprocess;
pub mod prototype;
pub mod record;
pub mod screening;
pub mod stats;
pub mod synth;
pub mod warp;

pub use config::{IoConfig, PipelineConfig, PreprocessConfig, PrototypeConfig, ScreeningConfig};
pub use diagnosis::{ConfusionMatrix, Decision, DiagnosisConfig, DiagnosisReport, Evaluation};
pub use error::{Error, Result};
pub use lead::{ClassLabel, Label, LeadId};

pub use matching::{AffinityMatrix, MatchingResult};
pub use preprocess::{BeatSet, MeanBeat};
pub use prototype::{LibraryBuild, LibrarySet, Prototype, PrototypeLibrary};

pub use record::EcgRecord;
pub use screening::VariabilityReport;
pub use warp::{WarpConfig, WarpResult};

/// Number of samples in every resampled heartbeat.
pub const BEAT_LEN: usize = 500;
