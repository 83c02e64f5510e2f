//! Closed-loop time integration of `z_tt - Lap z = -alpha * held`, where
//! `held` is the velocity sampled at the last event and kept constant until
//! the next one.

use serde::{Deserialize, Serialize};

use crate::design::StabilityCertificate;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::lyapunov::{LyapunovWeights, RunEcho, RunRecord, SeriesRow, StateNorms, TimeSeries};
use crate::trigger::{self, EventCause, EventEntry, EventLog, TriggerParams};

#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub t: f64,
    pub z: Field,
    pub v: Field,
    /// Velocity sample driving the actuator since `t_k`.
    pub held: Field,
    pub k: usize,
    pub t_k: f64,
}

impl WaveState {
    /// State at `t = 0` right after the unconditional initial event
    /// (`held = z1`, `k = 0`, `t_k = 0`).
    pub fn new(grid: &Grid, z0: Field, z1: Field) -> Result<Self> {
        grid.check(&z0)?;
        grid.check(&z1)?;
        if !(z0.is_finite() && z1.is_finite()) {
            return Err(Error::Config("initial data must be finite".into()));
        }
        Ok(Self { t: 0.0, held: z1.clone(), z: z0, v: z1, k: 0, t_k: 0.0 })
    }

    /// Samples the current velocity into the actuator.
    pub fn refresh_sample(&mut self, t_event: f64) {
        debug_assert!(t_event == self.t, "events are resolved at step boundaries");
        self.held.values_mut().copy_from_slice(self.v.values());
        self.k += 1;
        self.t_k = t_event;
    }
}

/// Largest stable leapfrog step, `2 / sqrt(lambda_max)`.
pub fn cfl_max_dt(grid: &Grid) -> f64 {
    2.0 / grid.max_eigenvalue().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub cfl_fraction: f64,
}

impl IntegratorConfig {
    pub fn new(grid: &Grid, dt: f64, t_end: f64, cfl_fraction: f64) -> Result<Self> {
        if !(cfl_fraction > 0.0 && cfl_fraction <= 1.0) {
            return Err(Error::Config(format!("cfl_fraction must lie in (0, 1], got {cfl_fraction}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::Config(format!("horizon must be positive, got {t_end}")));
        }
        let limit = cfl_fraction * cfl_max_dt(grid);
        if dt > limit {
            return Err(Error::Config(format!(
                "dt = {dt} exceeds {cfl_fraction} x CFL limit ({limit})"
            )));
        }
        Ok(Self { dt, t_end, cfl_fraction })
    }

    pub fn from_cfl_fraction(grid: &Grid, cfl_fraction: f64, t_end: f64) -> Result<Self> {
        Self::new(grid, cfl_fraction * cfl_max_dt(grid), t_end, cfl_fraction)
    }

    /// Number of steps needed to reach `t_end`; the last step may overshoot
    /// by less than `dt`.
    pub fn step_count(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil() as usize
    }
}

/// Velocity-Verlet stepper with a forcing that is constant over each step.
#[derive(Debug, Clone)]
pub struct Leapfrog {
    acc: Vec<f64>,
}

impl Leapfrog {
    pub fn new(grid: &Grid) -> Self {
        Self { acc: vec![0.0; grid.len()] }
    }

    /// Advances `state` by `dt` with forcing `-gain * held`. `held`, `k` and
    /// `t_k` are untouched. Negative `dt` integrates backwards.
    pub fn advance(&mut self, grid: &Grid, state: &mut WaveState, dt: f64, gain: f64) {
        let half = 0.5 * dt;
        self.kick(grid, state, half, gain);
        for (z, v) in state.z.values_mut().iter_mut().zip(state.v.values()) {
            *z += dt * v;
        }
        self.kick(grid, state, half, gain);
        state.t += dt;
    }

    fn kick(&mut self, grid: &Grid, state: &mut WaveState, h: f64, gain: f64) {
        grid.laplacian_into(state.z.values(), &mut self.acc);
        let held = state.held.values();
        for ((v, a), u) in state.v.values_mut().iter_mut().zip(&self.acc).zip(held) {
            *v += h * (a - gain * u);
        }
    }
}

/// One leapfrog step on a copy of `state`.
pub fn step(grid: &Grid, state: &WaveState, dt: f64, alpha: f64) -> Result<WaveState> {
    grid.check(&state.z)?;
    grid.check(&state.v)?;
    grid.check(&state.held)?;
    let mut next = state.clone();
    Leapfrog::new(grid).advance(grid, &mut next, dt, alpha);
    if !(next.z.is_finite() && next.v.is_finite()) {
        return Err(Error::BlowUp { step: 1 });
    }
    Ok(next)
}

/// How the actuator sample is refreshed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ControlMode {
    /// Refresh when the trigger predicate becomes non-negative.
    EventTriggered,
    /// Refresh before every step (`-alpha v` recomputed each step).
    ContinuousDamping,
    /// Refresh every `period` seconds.
    Periodic { period: f64 },
    /// No actuation at all.
    Uncontrolled,
}

impl ControlMode {
    pub fn name(&self) -> &'static str {
        match self {
            ControlMode::EventTriggered => "event-triggered",
            ControlMode::ContinuousDamping => "continuous-damping",
            ControlMode::Periodic { .. } => "periodic",
            ControlMode::Uncontrolled => "uncontrolled",
        }
    }

    pub(crate) fn event_cause(&self) -> EventCause {
        match self {
            ControlMode::EventTriggered => EventCause::Trigger,
            _ => EventCause::Schedule,
        }
    }
}

/// Callbacks invoked while a simulation runs.
pub trait SimulationHook {
    fn on_step(&mut self, _index: usize, _state: &WaveState) {}
    fn on_event(&mut self, _event: &EventEntry) {}
}

impl SimulationHook for () {}

/// A configured closed loop, ready to be run from any initial data.
#[derive(Debug, Clone)]
pub struct Simulation<'g> {
    grid: &'g Grid,
    alpha: f64,
    mode: ControlMode,
    trigger: TriggerParams,
    weights: LyapunovWeights,
    integrator: IntegratorConfig,
    certificate: Option<StabilityCertificate>,
}

impl<'g> Simulation<'g> {
    pub fn new(
        grid: &'g Grid,
        alpha: f64,
        integrator: IntegratorConfig,
        trigger: TriggerParams,
        weights: LyapunovWeights,
    ) -> Self {
        Self {
            grid,
            alpha,
            mode: ControlMode::EventTriggered,
            trigger,
            weights,
            integrator,
            certificate: None,
        }
    }

    /// Uses the certificate's Lyapunov weights and attaches it to the record.
    pub fn with_certificate(mut self, certificate: StabilityCertificate) -> Self {
        self.weights = LyapunovWeights::from_certificate(&certificate);
        self.certificate = Some(certificate);
        self
    }

    pub fn with_mode(mut self, mode: ControlMode) -> Self {
        self.mode = mode;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::Config(format!("damping gain must be non-negative, got {}", self.alpha)));
        }
        self.trigger.validate()?;
        if let ControlMode::Periodic { period } = self.mode {
            if !(period.is_finite() && period > 0.0) {
                return Err(Error::Config(format!("sampling period must be positive, got {period}")));
            }
        }
        Ok(())
    }

    pub fn run(&self, z0: Field, z1: Field, hook: &mut dyn SimulationHook) -> Result<RunRecord> {
        self.validate()?;
        let grid = self.grid;
        let dt = self.integrator.dt;
        let steps = self.integrator.step_count();
        let gain = match self.mode {
            ControlMode::Uncontrolled => 0.0,
            _ => self.alpha,
        };

        let mut state = WaveState::new(grid, z0, z1)?;
        let norms = StateNorms::of(grid, &state)?;
        let v0 = norms.lyapunov(self.weights);
        let degenerate = 1e-14 * grid.measure();
        if !(v0 > degenerate) {
            return Err(Error::DegenerateInitialData { v0 });
        }

        let mut series = TimeSeries::with_capacity(steps + 1);
        let mut log = EventLog::new(dt);
        let initial = trigger::evaluate_norms(&norms, 0.0, &self.trigger);
        series.push(SeriesRow::new(0.0, &norms, self.weights, &initial, true));
        let entry = EventEntry {
            k: 0,
            step: 0,
            t: 0.0,
            cause: EventCause::Initial,
            predicate: initial.value,
            norm_e_sq: initial.norm_e_sq,
            eta0: initial.eta0,
            previous_predicate: None,
        };
        hook.on_event(&entry);
        log.push(entry)?;
        hook.on_step(0, &state);

        let mut stepper = Leapfrog::new(grid);
        let mut previous = initial.value;
        for i in 1..=steps {
            stepper.advance(grid, &mut state, dt, gain);
            let t = i as f64 * dt;
            state.t = t;

            let norms = StateNorms::of(grid, &state)?;
            let eval = trigger::evaluate_norms(&norms, t, &self.trigger);
            if !(norms.energy().is_finite() && eval.value.is_finite()) {
                return Err(Error::BlowUp { step: i });
            }
            let fire = match self.mode {
                ControlMode::EventTriggered => eval.fires(),
                ControlMode::ContinuousDamping => i < steps,
                ControlMode::Periodic { period } => t - state.t_k >= period - 0.5 * dt,
                ControlMode::Uncontrolled => false,
            };
            series.push(SeriesRow::new(t, &norms, self.weights, &eval, fire));
            if fire {
                state.refresh_sample(t);
                let entry = EventEntry {
                    k: state.k,
                    step: i,
                    t,
                    cause: self.mode.event_cause(),
                    predicate: eval.value,
                    norm_e_sq: eval.norm_e_sq,
                    eta0: eval.eta0,
                    previous_predicate: Some(previous),
                };
                hook.on_event(&entry);
                log.push(entry)?;
            }
            previous = eval.value;
            hook.on_step(i, &state);
        }

        let echo = RunEcho {
            shape: grid.shape(),
            alpha: self.alpha,
            mode: self.mode,
            dt,
            t_end: self.integrator.t_end,
            steps,
            trigger: self.trigger,
            weights: self.weights,
        };
        Ok(RunRecord { series, events: log, certificate: self.certificate.clone(), echo })
    }
}

/// Runs the closed loop without hooks.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    grid: &Grid,
    z0: Field,
    z1: Field,
    alpha: f64,
    integrator: IntegratorConfig,
    trigger: TriggerParams,
    weights: LyapunovWeights,
    mode: ControlMode,
) -> Result<RunRecord> {
    Simulation::new(grid, alpha, integrator, trigger, weights)
        .with_mode(mode)
        .run(z0, z1, &mut ())
}
