use std::path::PathBuf;

use crate::lead::LeadId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed WFDB header line {line}: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("missing companion signal file {0}")]
    MissingSignalFile(PathBuf),
    #[error("unsupported WFDB storage format {0} (only format 16 is read)")]
    UnsupportedFormat(String),
    #[error("expected 12 leads, found {0}")]
    LeadCountMismatch(usize),
    #[error("unknown lead name {0:?}")]
    UnknownLead(String),
    #[error("missing lead {0}")]
    MissingLead(LeadId),
    #[error("duplicate lead {0}")]
    DuplicateLead(LeadId),
    #[error("csv error: {0}")]
    Csv(String),
    #[error("non-numeric cell {value:?} at row {row}, column {column}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("ragged csv: row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("library format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("prototype has {found} samples, library declares beat_length {declared}")]
    BeatLengthMismatch { declared: usize, found: usize },
    #[error("prototype occurrence must be positive, found {0}")]
    InvalidOccurrence(i64),
    #[error("library parse error: {0}")]
    LibraryParse(String),
    #[error("nothing to plot: {0}")]
    EmptyPlot(String),
    #[error("curve length mismatch: expected {expected}, found {found}")]
    CurveLength { expected: usize, found: usize },
    #[error("cutoff {cutoff_hz} Hz outside (0, {nyquist_hz}) Hz")]
    CutoffOutOfRange { cutoff_hz: f64, nyquist_hz: f64 },
    #[error("signal of {len} samples is too short for filtering (need > {min})")]
    SignalTooShort { len: usize, min: usize },
    #[error("not enough beats: {0}")]
    NotEnoughBeats(String),
    #[error("all beats are flat; heartbeat variability is undefined")]
    DegenerateFlatBeats,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("non-finite input to warp")]
    NonFiniteInput,
    #[error("warp descent step underflowed on a non-finite loss")]
    StepUnderflow,
    #[error("amplitude ratio must be strictly positive (r[{index}] = {value})")]
    NonPositiveRatio { index: usize, value: f64 },
    #[error("library for {0} is empty")]
    EmptyLibrary(String),
    #[error("empty class pool for {0}")]
    EmptyClassPool(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
