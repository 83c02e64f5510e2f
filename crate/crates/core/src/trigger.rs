//! Event-triggering mechanism: deviation, threshold, predicate, event log and
//! dwell-time diagnostics.
//!
//! The sample is refreshed at the first step end where
//! `|e|^2 - gamma0 |z|^2 - gamma1 |v|^2 - eta0(t) >= 0`, with `e = v - held`
//! and `eta0(t) = eta0_scale * exp(-theta t)`.

use serde::{Deserialize, Serialize};

use crate::design::StabilityCertificate;
use crate::dynamics::{ControlMode, WaveState};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::lyapunov::{LyapunovWeights, RunRecord, StateNorms};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerParams {
    pub gamma0: f64,
    pub gamma1: f64,
    pub theta: f64,
    pub eta0_scale: f64,
}

impl TriggerParams {
    pub fn new(gamma0: f64, gamma1: f64, theta: f64, eta0_scale: f64) -> Result<Self> {
        let p = Self { gamma0, gamma1, theta, eta0_scale };
        p.validate()?;
        Ok(p)
    }

    /// Gains and decay rate from a certificate.
    pub fn from_certificate(cert: &StabilityCertificate, eta0_scale: f64) -> Result<Self> {
        Self::new(cert.gamma0, cert.gamma1, cert.theta, eta0_scale)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("gamma0", self.gamma0),
            ("gamma1", self.gamma1),
            ("theta", self.theta),
            ("eta0_scale", self.eta0_scale),
        ] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::Config(format!("trigger parameter {name} must be positive, got {x}")));
            }
        }
        Ok(())
    }
}

/// Choice of the threshold amplitude `eta0(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Eta0Variant {
    /// Full `V(0)`.
    #[default]
    #[serde(rename = "v0")]
    V0,
    /// `|z1|^2/2 + |grad z0|^2/2 + epsilon <z0, z1>`, i.e. `V(0)` without
    /// the `(epsilon alpha / 2)|z0|^2` term.
    #[serde(rename = "energy-cross")]
    EnergyCross,
}

impl Eta0Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Eta0Variant::V0 => "v0",
            Eta0Variant::EnergyCross => "energy-cross",
        }
    }

    /// Threshold amplitude for initial data `(z0, z1)`. A (numerically)
    /// non-positive amplitude would make the trigger fire at every step and
    /// is reported as degenerate initial data.
    pub fn scale(self, grid: &Grid, z0: &Field, z1: &Field, weights: LyapunovWeights) -> Result<f64> {
        let state = WaveState::new(grid, z0.clone(), z1.clone())?;
        let n = StateNorms::of(grid, &state)?;
        let scale = match self {
            Eta0Variant::V0 => n.lyapunov(weights),
            Eta0Variant::EnergyCross => n.energy() + weights.epsilon * n.z_dot_v,
        };
        if !(scale > 1e-14 * grid.measure()) {
            return Err(Error::DegenerateInitialData { v0: scale });
        }
        Ok(scale)
    }
}

impl std::str::FromStr for Eta0Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v0" => Ok(Eta0Variant::V0),
            "energy-cross" => Ok(Eta0Variant::EnergyCross),
            other => Err(Error::Config(format!("unknown eta0 variant `{other}`"))),
        }
    }
}

/// `e_k = v - held`.
pub fn deviation(state: &WaveState) -> Result<Field> {
    state.v.sub(&state.held)
}

pub fn eta0(t: f64, p: &TriggerParams) -> f64 {
    p.eta0_scale * (-p.theta * t).exp()
}

/// Trigger predicate from already computed squared norms.
pub fn predicate(norm_e_sq: f64, norm_z_sq: f64, norm_v_sq: f64, eta0: f64, p: &TriggerParams) -> f64 {
    norm_e_sq - p.gamma0 * norm_z_sq - p.gamma1 * norm_v_sq - eta0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerEvaluation {
    pub norm_e_sq: f64,
    pub eta0: f64,
    pub value: f64,
}

impl TriggerEvaluation {
    pub fn fires(&self) -> bool {
        self.value >= 0.0
    }
}

pub(crate) fn evaluate_norms(n: &StateNorms, t: f64, p: &TriggerParams) -> TriggerEvaluation {
    let eta = eta0(t, p);
    TriggerEvaluation {
        norm_e_sq: n.e_sq,
        eta0: eta,
        value: predicate(n.e_sq, n.z_sq, n.v_sq, eta, p),
    }
}

pub fn evaluate(state: &WaveState, p: &TriggerParams, grid: &Grid) -> Result<TriggerEvaluation> {
    Ok(evaluate_norms(&StateNorms::of(grid, state)?, state.t, p))
}

/// Fires iff the returned value is non-negative.
pub fn trigger_value(state: &WaveState, p: &TriggerParams, grid: &Grid) -> Result<f64> {
    Ok(evaluate(state, p, grid)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventCause {
    Initial,
    Trigger,
    Schedule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventEntry {
    pub k: usize,
    pub step: usize,
    pub t: f64,
    pub cause: EventCause,
    /// Predicate value at the event step, before the refresh.
    pub predicate: f64,
    pub norm_e_sq: f64,
    pub eta0: f64,
    /// Predicate value one step earlier.
    pub previous_predicate: Option<f64>,
}

/// Append-only list of sampling instants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    dt: f64,
    entries: Vec<EventEntry>,
}

impl EventLog {
    pub fn new(dt: f64) -> Self {
        Self { dt, entries: Vec::new() }
    }

    pub fn push(&mut self, entry: EventEntry) -> Result<()> {
        match self.entries.last() {
            None if entry.t != 0.0 => {
                return Err(Error::Precondition("the first event must be at t = 0".into()));
            }
            Some(last) if entry.t <= last.t => {
                return Err(Error::Precondition(format!(
                    "event times must increase strictly ({} after {})",
                    entry.t, last.t
                )));
            }
            _ => {}
        }
        self.entries.push(entry);
        Ok(())
    }

    /// Rebuilds the log from a recorded series (event flags per row).
    pub fn from_record_rows(
        dt: f64,
        mode: ControlMode,
        t: &[f64],
        flags: &[bool],
        predicate: &[f64],
        norm_e_sq: &[f64],
        eta0: &[f64],
    ) -> Result<Self> {
        let mut log = Self::new(dt);
        for (i, _) in flags.iter().enumerate().filter(|(_, &f)| f) {
            log.push(EventEntry {
                k: log.len(),
                step: i,
                t: t[i],
                cause: if i == 0 { EventCause::Initial } else { mode.event_cause() },
                predicate: predicate[i],
                norm_e_sq: norm_e_sq[i],
                eta0: eta0[i],
                previous_predicate: i.checked_sub(1).map(|j| predicate[j]),
            })?;
        }
        Ok(log)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn entries(&self) -> &[EventEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn event_times(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.t).collect()
    }

    pub fn dwell_times(&self) -> Vec<f64> {
        self.entries.windows(2).map(|w| w[1].t - w[0].t).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Dwell-time summary of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwellStats {
    pub event_count: usize,
    /// Equal to the horizon when no event follows the initial one.
    pub min_dwell: f64,
    pub mean_dwell: f64,
    pub max_dwell: f64,
    pub histogram: Histogram,
    /// Trigger-driven events checked against `|e|^2 >= eta0`.
    pub floor_checked: usize,
    /// Indices (into the log) of events below the floor that fired with no
    /// negative predicate one step earlier.
    pub floor_violations: Vec<usize>,
    /// Events are resolved at step ends, so dwell times are multiples of `dt`.
    pub time_resolution: f64,
}

impl DwellStats {
    pub fn passed(&self) -> bool {
        self.floor_violations.is_empty() && self.min_dwell >= self.time_resolution * (1.0 - 1e-9)
    }
}

const HISTOGRAM_BINS: usize = 10;

pub fn zeno_report(log: &EventLog, horizon: f64) -> Result<DwellStats> {
    if log.is_empty() {
        return Err(Error::DegenerateRun("event log is empty".into()));
    }
    let dwell = log.dwell_times();
    let (min, mean, max) = if dwell.is_empty() {
        (horizon, horizon, horizon)
    } else {
        let min = dwell.iter().copied().fold(f64::INFINITY, f64::min);
        let max = dwell.iter().copied().fold(0.0, f64::max);
        (min, dwell.iter().sum::<f64>() / dwell.len() as f64, max)
    };

    let width = (max - min) / HISTOGRAM_BINS as f64;
    let edges: Vec<f64> = (0..=HISTOGRAM_BINS).map(|i| min + i as f64 * width).collect();
    let mut counts = vec![0; HISTOGRAM_BINS];
    for d in &dwell {
        let bin = if width > 0.0 { ((d - min) / width) as usize } else { 0 };
        counts[bin.min(HISTOGRAM_BINS - 1)] += 1;
    }

    let mut floor_checked = 0;
    let mut floor_violations = Vec::new();
    for (i, e) in log.entries().iter().enumerate() {
        if e.cause != EventCause::Trigger {
            continue;
        }
        floor_checked += 1;
        let first_crossing = e.previous_predicate.is_some_and(|p| p < 0.0);
        if e.norm_e_sq < e.eta0 && !first_crossing {
            floor_violations.push(i);
        }
    }

    Ok(DwellStats {
        event_count: log.len(),
        min_dwell: min,
        mean_dwell: mean,
        max_dwell: max,
        histogram: Histogram { edges, counts },
        floor_checked,
        floor_violations,
        time_resolution: log.dt(),
    })
}

/// Result of checking the trigger logic against a recorded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerInvariantReport {
    pub checked: usize,
    /// Steps strictly between events where the predicate was non-negative.
    pub inter_event_violations: Vec<usize>,
    /// Event steps whose predicate was negative.
    pub spurious_events: Vec<usize>,
}

impl TriggerInvariantReport {
    pub fn passed(&self) -> bool {
        self.inter_event_violations.is_empty() && self.spurious_events.is_empty()
    }
}

/// Every non-event step has a negative predicate and every triggered event a
/// non-negative one. Only meaningful for event-triggered runs.
pub fn check_trigger_invariant(record: &RunRecord) -> TriggerInvariantReport {
    let s = &record.series;
    let mut report = TriggerInvariantReport {
        checked: s.len().saturating_sub(1),
        inter_event_violations: Vec::new(),
        spurious_events: Vec::new(),
    };
    for i in 1..s.len() {
        match (s.event[i], s.trigger_value[i] >= 0.0) {
            (false, true) => report.inter_event_violations.push(i),
            (true, false) => report.spurious_events.push(i),
            _ => {}
        }
    }
    report
}
