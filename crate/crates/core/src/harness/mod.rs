//! Parameter sweeps, presets, convergence reports and CSV output.

pub mod config;
pub mod debug;
pub mod presets;
pub mod sweep;
pub mod verify;

pub use config::{Grid, Spacing, SweepConfig, SweepKind};
pub use presets::{preset, PRESETS};
pub use sweep::{m_convergence_report, run_sweep, Cell, MConvergenceRow, SweepOutput, SweepRow, SweepSummary};
pub use verify::{run_verification, Check};
