//! Minimizers and the surrounding plumbing: configuration, traces, starting
//! points and warm starts.

mod config;
mod init;
mod minimize;
mod trace;
mod warm;

pub use config::{LineSearchConfig, Method, OptimizerConfig};
pub use init::{init_factors, interaction_seed, InitKind};
pub use minimize::{minimize, Minimum};
pub use trace::{ConvergenceTrace, Status, StepRecord};
pub use warm::{load_factors, save_factors, warm_start_factors, FactorMeta};
