//! Demographic fairness evaluation for biometric verification and
//! identification systems from precomputed comparison scores.

pub mod error;
pub mod fdr;
pub mod identification;
pub mod ingest;
pub mod rates;
pub mod score;
pub mod synthetic;

pub use error::{Error, Result};
pub use fdr::{
    alpha_sweep, area_under_fdr, evaluate_grid, fdr, fdr_curve, verdict, AlphaRow, FdrCurve,
    FdrPoint, OperatingPoint, Verdict, DEFAULT_ALPHA,
};
pub use rates::{calibrate_threshold, Calibrator, RateIndex, RateTable, Threshold};
pub use score::{
    ComparisonRecord, DemographicLabel, OperatingPointGrid, Polarity, ScoreKind, ScoreSet,
    SplitDataset,
};
