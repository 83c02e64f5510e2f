//! Event-triggered in-domain damping of the linear wave equation on
//! finite-difference grids, with a design pipeline for stability certificates
//! and checks that hold a recorded run to its certificate.
//!
//! The layers build on one another: [`grid`] provides fields, norms and the
//! discrete Laplacian; [`dynamics`] integrates the closed loop; [`trigger`]
//! decides when the held actuation is refreshed; [`design`] derives gains
//! and decay rates; [`lyapunov`] records runs and checks them.

// Comparisons are written as `!(x <= bound)` throughout so that NaN lands
// on the failing side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod lyapunov;
pub mod trigger;

pub use design::{build_certificate, DesignInput, StabilityCertificate};
pub use dynamics::{simulate, ControlMode, IntegratorConfig, Simulation, SimulationHook, WaveState};
pub use error::{Error, Result};
pub use grid::{Field, Grid, PoincareSource, Shape};
pub use lyapunov::{LyapunovWeights, RunEcho, RunRecord, TimeSeries};
pub use trigger::{Eta0Variant, EventCause, EventEntry, EventLog, TriggerParams};
