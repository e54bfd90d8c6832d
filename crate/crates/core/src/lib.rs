//! Amplitude-phase-quadrature spatial modulation over indoor visible-light
//! MIMO links: channel model, modulators, ML detectors, union-bound error
//! analysis, power-split optimization and Monte Carlo simulation.

pub mod apq;
pub mod baseline;
pub mod bounds;
pub mod codebook;
pub mod config;
pub mod detection;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod optimizer;
pub mod plot;
pub mod sim;

pub use apq::{ApqScheme, PowerVector};
pub use baseline::{MaSmScheme, SmPamScheme};
pub use bounds::{q_function, BoundReport, BoundTerms, DeltaTensor, PairDistances};
pub use codebook::Codebook;
pub use config::{preset, ExperimentConfig, PRESETS};
pub use detection::{Detector, DetectorKind};
pub use error::{Error, Result};
pub use experiment::{run_channel, run_compare, run_optimize, run_sweep, RunOptions, RunReport};
pub use geometry::{build_channel_matrix, ChannelMatrix, Geometry, SystemParams};
pub use optimizer::{scp_optimize, ScpConfig, ScpResult, ScpTrace};
pub use sim::{sigma_from_snr_db, SerCurve, SerPoint, Simulator, StopRule, Workers};
