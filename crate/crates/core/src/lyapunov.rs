//! Energy, the Lyapunov functional, recorded runs, and the a-posteriori checks
//! of a stability certificate against a recorded trajectory.

use serde::{Deserialize, Serialize};

use crate::design::StabilityCertificate;
use crate::dynamics::{ControlMode, WaveState};
use crate::error::{Error, Result};
use crate::grid::{Grid, Shape};
use crate::trigger::{EventLog, TriggerEvaluation, TriggerParams};

/// `(epsilon, alpha)` in `V = E + (epsilon alpha / 2)|z|^2 + epsilon <z, v>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovWeights {
    pub epsilon: f64,
    pub alpha: f64,
}

impl LyapunovWeights {
    pub fn from_certificate(cert: &StabilityCertificate) -> Self {
        Self { epsilon: cert.epsilon, alpha: cert.alpha() }
    }
}

/// Squared norms and inner products of one state, computed once per step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateNorms {
    pub z_sq: f64,
    pub v_sq: f64,
    pub grad_z_sq: f64,
    pub z_dot_v: f64,
    pub e_sq: f64,
}

impl StateNorms {
    pub fn of(grid: &Grid, state: &WaveState) -> Result<Self> {
        grid.check(&state.z)?;
        grid.check(&state.v)?;
        grid.check(&state.held)?;
        let w = grid.weight();
        let (z, v, held) = (state.z.values(), state.v.values(), state.held.values());
        let mut z_sq = 0.0;
        let mut v_sq = 0.0;
        let mut zv = 0.0;
        let mut e_sq = 0.0;
        for i in 0..z.len() {
            z_sq += z[i] * z[i];
            v_sq += v[i] * v[i];
            zv += z[i] * v[i];
            let e = v[i] - held[i];
            e_sq += e * e;
        }
        Ok(Self {
            z_sq: w * z_sq,
            v_sq: w * v_sq,
            grad_z_sq: grid.gradient_sq_unchecked(z),
            z_dot_v: w * zv,
            e_sq: w * e_sq,
        })
    }

    pub fn energy(&self) -> f64 {
        0.5 * (self.v_sq + self.grad_z_sq)
    }

    pub fn lyapunov(&self, w: LyapunovWeights) -> f64 {
        self.energy() + self.lyapunov_correction(w)
    }

    /// `V - E`.
    pub fn lyapunov_correction(&self, w: LyapunovWeights) -> f64 {
        0.5 * w.epsilon * w.alpha * self.z_sq + w.epsilon * self.z_dot_v
    }
}

/// `E = (|v|^2 + |grad z|^2) / 2`.
pub fn energy(grid: &Grid, state: &WaveState) -> Result<f64> {
    Ok(StateNorms::of(grid, state)?.energy())
}

pub fn lyapunov_v(grid: &Grid, state: &WaveState, epsilon: f64, alpha: f64) -> Result<f64> {
    Ok(StateNorms::of(grid, state)?.lyapunov(LyapunovWeights { epsilon, alpha }))
}

/// One row of a recorded run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub energy: f64,
    pub lyapunov: f64,
    pub norm_z_sq: f64,
    pub norm_v_sq: f64,
    pub norm_gradz_sq: f64,
    pub norm_e_sq: f64,
    pub eta0: f64,
    pub trigger_value: f64,
    pub event: bool,
}

impl SeriesRow {
    pub(crate) fn new(
        t: f64,
        n: &StateNorms,
        w: LyapunovWeights,
        eval: &TriggerEvaluation,
        event: bool,
    ) -> Self {
        Self {
            t,
            energy: n.energy(),
            lyapunov: n.lyapunov(w),
            norm_z_sq: n.z_sq,
            norm_v_sq: n.v_sq,
            norm_gradz_sq: n.grad_z_sq,
            norm_e_sq: eval.norm_e_sq,
            eta0: eval.eta0,
            trigger_value: eval.value,
            event,
        }
    }
}

/// Per-step series, column-wise. Row 0 is `t = 0`. Deviation and predicate
/// are recorded before any refresh taking place at that step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub energy: Vec<f64>,
    pub lyapunov: Vec<f64>,
    pub norm_z_sq: Vec<f64>,
    pub norm_v_sq: Vec<f64>,
    pub norm_gradz_sq: Vec<f64>,
    pub norm_e_sq: Vec<f64>,
    pub eta0: Vec<f64>,
    pub trigger_value: Vec<f64>,
    pub event: Vec<bool>,
}

impl TimeSeries {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            t: Vec::with_capacity(n),
            energy: Vec::with_capacity(n),
            lyapunov: Vec::with_capacity(n),
            norm_z_sq: Vec::with_capacity(n),
            norm_v_sq: Vec::with_capacity(n),
            norm_gradz_sq: Vec::with_capacity(n),
            norm_e_sq: Vec::with_capacity(n),
            eta0: Vec::with_capacity(n),
            trigger_value: Vec::with_capacity(n),
            event: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, r: SeriesRow) {
        self.t.push(r.t);
        self.energy.push(r.energy);
        self.lyapunov.push(r.lyapunov);
        self.norm_z_sq.push(r.norm_z_sq);
        self.norm_v_sq.push(r.norm_v_sq);
        self.norm_gradz_sq.push(r.norm_gradz_sq);
        self.norm_e_sq.push(r.norm_e_sq);
        self.eta0.push(r.eta0);
        self.trigger_value.push(r.trigger_value);
        self.event.push(r.event);
    }

    pub fn row(&self, i: usize) -> SeriesRow {
        SeriesRow {
            t: self.t[i],
            energy: self.energy[i],
            lyapunov: self.lyapunov[i],
            norm_z_sq: self.norm_z_sq[i],
            norm_v_sq: self.norm_v_sq[i],
            norm_gradz_sq: self.norm_gradz_sq[i],
            norm_e_sq: self.norm_e_sq[i],
            eta0: self.eta0[i],
            trigger_value: self.trigger_value[i],
            event: self.event[i],
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn is_consistent(&self) -> bool {
        let n = self.t.len();
        [
            self.energy.len(),
            self.lyapunov.len(),
            self.norm_z_sq.len(),
            self.norm_v_sq.len(),
            self.norm_gradz_sq.len(),
            self.norm_e_sq.len(),
            self.eta0.len(),
            self.trigger_value.len(),
            self.event.len(),
        ]
        .iter()
        .all(|&l| l == n)
    }
}

/// Configuration a run was produced with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunEcho {
    pub shape: Shape,
    /// Gain of the actuator (ignored in uncontrolled mode).
    pub alpha: f64,
    pub mode: ControlMode,
    pub dt: f64,
    pub t_end: f64,
    pub steps: usize,
    pub trigger: TriggerParams,
    pub weights: LyapunovWeights,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub series: TimeSeries,
    pub events: EventLog,
    pub certificate: Option<StabilityCertificate>,
    pub echo: RunEcho,
}

impl RunRecord {
    /// Reassembles a record from a persisted series; the event log is
    /// rebuilt from the per-row event flags.
    pub fn from_series(
        series: TimeSeries,
        echo: RunEcho,
        certificate: Option<StabilityCertificate>,
    ) -> Result<Self> {
        if !series.is_consistent() {
            return Err(Error::DegenerateRun("series columns differ in length".into()));
        }
        let events = EventLog::from_record_rows(
            echo.dt,
            echo.mode,
            &series.t,
            &series.event,
            &series.trigger_value,
            &series.norm_e_sq,
            &series.eta0,
        )?;
        Ok(Self { series, events, certificate, echo })
    }

    fn certificate(&self) -> Result<&StabilityCertificate> {
        self.certificate.as_ref().ok_or(Error::MissingCertificate)
    }

    fn require_rows(&self, min: usize) -> Result<()> {
        if self.series.len() < min {
            return Err(Error::DegenerateRun(format!(
                "series has {} rows, at least {min} needed",
                self.series.len()
            )));
        }
        Ok(())
    }
}

/// Maximum number of individual violations kept in a report.
const MAX_LISTED: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub t: f64,
    pub value: f64,
    pub bound: f64,
}

fn note(list: &mut Vec<Violation>, v: Violation) {
    if list.len() < MAX_LISTED {
        list.push(v);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub checked: usize,
    pub rel_tol: f64,
    pub violations: usize,
    pub first_violations: Vec<Violation>,
    /// `min (V - C1 E) / E` over the run.
    pub worst_lower_slack: f64,
    /// `min (C2 E - V) / E` over the run.
    pub worst_upper_slack: f64,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

pub const EQUIVALENCE_REL_TOL: f64 = 1e-9;

/// `C1 E <= V <= C2 E` at every step.
pub fn check_equivalence(r: &RunRecord, rel_tol: f64) -> Result<EquivalenceReport> {
    let cert = r.certificate()?;
    r.require_rows(1)?;
    let s = &r.series;
    let mut report = EquivalenceReport {
        checked: s.len(),
        rel_tol,
        violations: 0,
        first_violations: Vec::new(),
        worst_lower_slack: f64::INFINITY,
        worst_upper_slack: f64::INFINITY,
    };
    for i in 0..s.len() {
        let (e, v) = (s.energy[i], s.lyapunov[i]);
        let lower = cert.c1 * e;
        let upper = cert.c2 * e;
        if e > 0.0 {
            report.worst_lower_slack = report.worst_lower_slack.min((v - lower) / e);
            report.worst_upper_slack = report.worst_upper_slack.min((upper - v) / e);
        }
        let (bad, bound) = if v < lower - rel_tol * lower.abs() {
            (true, lower)
        } else if v > upper + rel_tol * upper.abs() {
            (true, upper)
        } else {
            (false, 0.0)
        };
        if bad {
            report.violations += 1;
            note(&mut report.first_violations, Violation { index: i, t: s.t[i], value: v, bound });
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VdotReport {
    pub checked: usize,
    pub excluded: usize,
    pub c_tol: f64,
    pub tolerance: f64,
    pub violations: usize,
    pub first_violations: Vec<Violation>,
    /// Largest `dV/dt - bound` over the checked steps.
    pub worst_margin: f64,
    /// `dV/dt - bound` per row; `None` where not checked.
    #[serde(skip)]
    pub margins: Vec<Option<f64>>,
}

impl VdotReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

pub const VDOT_C_TOL: f64 = 10.0;

/// Centered-difference `dV/dt` against the certified bound.
///
/// With sparse updates the held input jumps by O(1) at an event, so the
/// difference quotient is only first-order accurate there; each event step
/// and its two neighbours are skipped. Under continuous damping the jump is
/// O(dt) and nothing is skipped.
pub fn check_vdot(r: &RunRecord, c_tol: f64) -> Result<VdotReport> {
    let cert = r.certificate()?;
    r.require_rows(1)?;
    let s = &r.series;
    let n = s.len();
    let dt = r.echo.dt;
    let max_v = s.lyapunov.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tolerance = c_tol * dt * dt * max_v;

    let mut skip = vec![false; n];
    let sparse = !matches!(r.echo.mode, ControlMode::ContinuousDamping);
    for (i, _) in s.event.iter().enumerate().filter(|(_, &e)| e && sparse) {
        skip[i.saturating_sub(1)..=(i + 1).min(n - 1)].fill(true);
    }

    let mut report = VdotReport {
        checked: 0,
        excluded: 0,
        c_tol,
        tolerance,
        violations: 0,
        first_violations: Vec::new(),
        worst_margin: f64::NEG_INFINITY,
        margins: vec![None; n],
    };
    for (i, &skipped) in skip.iter().enumerate().take(n.saturating_sub(1)).skip(1) {
        if skipped {
            report.excluded += 1;
            continue;
        }
        let vdot = (s.lyapunov[i + 1] - s.lyapunov[i - 1]) / (2.0 * dt);
        let bound = cert.vdot_bound_rhs(s.energy[i], s.eta0[i]);
        let margin = vdot - bound;
        report.checked += 1;
        report.margins[i] = Some(margin);
        report.worst_margin = report.worst_margin.max(margin);
        if margin > tolerance {
            report.violations += 1;
            note(&mut report.first_violations, Violation { index: i, t: s.t[i], value: vdot, bound });
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub checked: usize,
    pub rel_tol: f64,
    pub violations: usize,
    pub first_violations: Vec<Violation>,
    /// `max E(t) / (K exp(-delta t) E(0))`.
    pub max_ratio: f64,
    pub delta: f64,
    /// Least-squares decay rate of `ln E` over the second half of the run.
    pub delta_emp: Option<f64>,
    /// `delta_emp / delta`; at least 1 when the certificate is conservative.
    pub rate_ratio: Option<f64>,
}

impl EnvelopeReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

pub const ENVELOPE_REL_TOL: f64 = 1e-9;

/// `E(t) <= K exp(-delta t) E(0)` at every step.
pub fn check_envelope(r: &RunRecord, rel_tol: f64) -> Result<EnvelopeReport> {
    let cert = r.certificate()?;
    r.require_rows(1)?;
    let s = &r.series;
    let e0 = s.energy[0];
    let mut report = EnvelopeReport {
        checked: s.len(),
        rel_tol,
        violations: 0,
        first_violations: Vec::new(),
        max_ratio: 0.0,
        delta: cert.delta,
        delta_emp: None,
        rate_ratio: None,
    };
    for i in 0..s.len() {
        let bound = cert.energy_envelope(s.t[i], e0);
        let e = s.energy[i];
        if bound > 0.0 {
            report.max_ratio = report.max_ratio.max(e / bound);
        }
        // Written so that a NaN energy counts as a violation.
        if !(e <= bound * (1.0 + rel_tol)) {
            report.violations += 1;
            note(&mut report.first_violations, Violation { index: i, t: s.t[i], value: e, bound });
        }
    }
    report.delta_emp = empirical_decay_rate(&s.t, &s.energy);
    report.rate_ratio = report.delta_emp.map(|d| d / cert.delta);
    Ok(report)
}

/// Negative slope of the least-squares line through `(t, ln E)` over the
/// second half of the series. Non-positive energies are skipped.
pub fn empirical_decay_rate(t: &[f64], energy: &[f64]) -> Option<f64> {
    let start = t.len() / 2;
    let pts: Vec<(f64, f64)> = t[start..]
        .iter()
        .zip(&energy[start..])
        .filter(|(_, &e)| e > 0.0 && e.is_finite())
        .map(|(&t, &e)| (t, e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    (sxx > 0.0).then(|| -sxy / sxx)
}

/// Optional strict check of the two-exponential bound on `V` itself.
pub fn check_lyapunov_envelope(r: &RunRecord, rel_tol: f64) -> Result<EnvelopeReport> {
    let cert = r.certificate()?;
    r.require_rows(1)?;
    let s = &r.series;
    let v0 = s.lyapunov[0];
    let scale = r.echo.trigger.eta0_scale;
    let mut report = EnvelopeReport {
        checked: s.len(),
        rel_tol,
        violations: 0,
        first_violations: Vec::new(),
        max_ratio: 0.0,
        delta: cert.delta,
        delta_emp: empirical_decay_rate(&s.t, &s.lyapunov),
        rate_ratio: None,
    };
    report.rate_ratio = report.delta_emp.map(|d| d / cert.delta);
    for i in 0..s.len() {
        let bound = cert.lyapunov_envelope(s.t[i], v0, scale);
        let v = s.lyapunov[i];
        if bound > 0.0 {
            report.max_ratio = report.max_ratio.max(v / bound);
        }
        if !(v <= bound + rel_tol * bound.abs()) {
            report.violations += 1;
            note(&mut report.first_violations, Violation { index: i, t: s.t[i], value: v, bound });
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub checked: usize,
    /// Allowed per-step increase relative to the current energy.
    pub slack: f64,
    pub violations: usize,
    /// Largest `(E[i+1] - E[i]) / E[i]`.
    pub max_relative_increase: f64,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// `E` is non-increasing up to `slack * E` per step.
pub fn check_energy_monotone(r: &RunRecord, slack: f64) -> Result<MonotonicityReport> {
    r.require_rows(2)?;
    let e = &r.series.energy;
    let mut report = MonotonicityReport {
        checked: e.len() - 1,
        slack,
        violations: 0,
        max_relative_increase: f64::NEG_INFINITY,
    };
    for w in e.windows(2) {
        let inc = (w[1] - w[0]) / w[0];
        report.max_relative_increase = report.max_relative_increase.max(inc);
        if w[1] - w[0] > slack * w[0] {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// `max |E(t) - E(0)| / E(0)`.
pub fn energy_drift(r: &RunRecord) -> Result<f64> {
    r.require_rows(1)?;
    let e = &r.series.energy;
    let e0 = e[0];
    Ok(e.iter().map(|x| (x - e0).abs() / e0).fold(0.0, f64::max))
}
