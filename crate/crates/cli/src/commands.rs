use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wavetrig_core::design::{build_certificate, DesignInput, StabilityCertificate};
use wavetrig_core::dynamics::{ControlMode, IntegratorConfig, Simulation};
use wavetrig_core::grid::{Field, Grid, PoincareSource};
use wavetrig_core::lyapunov::{
    check_energy_monotone, check_envelope, check_equivalence, check_vdot, empirical_decay_rate, energy_drift,
    LyapunovWeights, RunRecord, ENVELOPE_REL_TOL, EQUIVALENCE_REL_TOL, VDOT_C_TOL,
};
use wavetrig_core::trigger::{check_trigger_invariant, zeno_report, TriggerParams};
use wavetrig_core::Error as CoreError;

use crate::config::{RunConfig, WithLength};
use crate::error::{exit, CliError, CliResult};
use crate::output::{self, CheckSuite, Summary, SummaryHead, Verdict};

/// Relative energy drift tolerated in uncontrolled runs.
pub const CONSERVATION_TOL: f64 = 1e-3;

/// Poincare constant for the configured domain and source.
pub fn poincare_constant(cfg: &RunConfig, grid: &Grid) -> CliResult<f64> {
    match cfg.design.comega_source {
        PoincareSource::User => cfg.design.comega.ok_or_else(|| {
            CliError::Usage("comega_source = \"user\" requires a comega value".into())
        }),
        source => Ok(grid.poincare_constant(source)?),
    }
}

pub fn design_input(cfg: &RunConfig, c_omega: f64) -> DesignInput {
    DesignInput {
        alpha: cfg.alpha,
        c_omega,
        c_omega_source: cfg.design.comega_source,
        s_gamma0: cfg.design.s_gamma0,
        s_gamma1: cfg.design.s_gamma1,
        theta_margin: cfg.design.theta_margin,
    }
}

pub fn certificate_for(cfg: &RunConfig, grid: &Grid) -> CliResult<(f64, StabilityCertificate)> {
    let c = poincare_constant(cfg, grid)?;
    Ok((c, build_certificate(&design_input(cfg, c))?))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Designs a certificate and writes `certificate.json` into the output
/// directory.
pub fn cmd_design(cfg: &RunConfig) -> CliResult<StabilityCertificate> {
    let grid = Grid::new(cfg.domain)?;
    let (_, cert) = certificate_for(cfg, &grid)?;
    ensure_dir(&cfg.out)?;
    output::write_json(&cfg.out.join(output::CERTIFICATE_FILE), &cert)?;
    Ok(cert)
}

/// Everything a run needs, derived from a config.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub grid: Grid,
    pub c_omega: f64,
    pub certificate: StabilityCertificate,
    pub integrator: IntegratorConfig,
    pub trigger: TriggerParams,
    pub z0: Field,
    pub z1: Field,
}

pub fn prepare(cfg: &RunConfig) -> CliResult<Prepared> {
    let grid = Grid::new(cfg.domain)?;
    let (c_omega, certificate) = certificate_for(cfg, &grid)?;
    let t = cfg.time;
    let integrator = match (t.dt, t.cfl_fraction) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("give either time.dt or time.cfl_fraction, not both".into()))
        }
        (None, Some(f)) => IntegratorConfig::from_cfl_fraction(&grid, f, t.t_end)?,
        (dt, None) => IntegratorConfig::new(&grid, dt.unwrap_or(0.5 * grid.min_spacing()), t.t_end, 1.0)?,
    };
    let z0 = cfg.initial.z0.build(&grid)?;
    let z1 = cfg.initial.z1.build(&grid)?;
    let weights = LyapunovWeights::from_certificate(&certificate);
    let scale = cfg.design.eta0_variant.scale(&grid, &z0, &z1, weights)?;
    let trigger = TriggerParams::from_certificate(&certificate, scale)?;
    Ok(Prepared { grid, c_omega, certificate, integrator, trigger, z0, z1 })
}

impl Prepared {
    pub fn run(&self, alpha: f64, mode: ControlMode) -> CliResult<RunRecord> {
        let weights = LyapunovWeights::from_certificate(&self.certificate);
        Ok(Simulation::new(&self.grid, alpha, self.integrator, self.trigger, weights)
            .with_certificate(self.certificate.clone())
            .with_mode(mode)
            .run(self.z0.clone(), self.z1.clone(), &mut ())?)
    }
}

/// The concrete control mode; an open sampling period becomes the mean
/// dwell time of the event-triggered run with the same setup.
pub fn resolve_mode(cfg: &RunConfig, prepared: &Prepared) -> CliResult<ControlMode> {
    if let Some(mode) = cfg.mode.resolved() {
        return Ok(mode);
    }
    let matched = prepared.run(cfg.alpha, ControlMode::EventTriggered)?;
    let stats = zeno_report(&matched.events, cfg.time.t_end)?;
    Ok(ControlMode::Periodic { period: stats.mean_dwell })
}

fn verdict(check: &str, passed: bool, detail: String) -> Verdict {
    Verdict { check: check.to_string(), passed, detail }
}

/// Runs the checks that apply to the record's control mode.
///
/// The certificate's dissipation inequality, decay envelope and trigger
/// logic only make sense when the loop is closed by events or by continuous
/// damping; a periodic schedule is held to the E/V equivalence only, and an
/// uncontrolled run to energy conservation.
pub fn run_checks(record: &RunRecord) -> CliResult<CheckSuite> {
    let mode = record.echo.mode;
    let mut suite = CheckSuite::default();

    let eq = check_equivalence(record, EQUIVALENCE_REL_TOL)?;
    suite.verdicts.push(verdict(
        "equivalence",
        eq.passed(),
        format!("{} violations in {} steps, worst slacks {:.3e} / {:.3e}", eq.violations, eq.checked, eq.worst_lower_slack, eq.worst_upper_slack),
    ));
    suite.equivalence = Some(eq);

    if matches!(mode, ControlMode::EventTriggered | ControlMode::ContinuousDamping) {
        let vd = check_vdot(record, VDOT_C_TOL)?;
        suite.verdicts.push(verdict(
            "vdot",
            vd.passed(),
            format!("{} violations in {} steps ({} skipped), worst margin {:.3e}, tolerance {:.3e}", vd.violations, vd.checked, vd.excluded, vd.worst_margin, vd.tolerance),
        ));
        suite.vdot = Some(vd);

        let env = check_envelope(record, ENVELOPE_REL_TOL)?;
        suite.verdicts.push(verdict(
            "envelope",
            env.passed(),
            format!(
                "{} violations, max E/bound {:.3e}, delta {:.4e}, delta_emp {}",
                env.violations,
                env.max_ratio,
                env.delta,
                env.delta_emp.map_or("n/a".into(), |d| format!("{d:.4e}"))
            ),
        ));
        suite.envelope = Some(env);
    }

    if matches!(mode, ControlMode::EventTriggered | ControlMode::Periodic { .. }) {
        let z = zeno_report(&record.events, record.echo.t_end)?;
        let passed = z.passed();
        suite.verdicts.push(verdict(
            "zeno",
            passed,
            format!(
                "{} events, dwell min {:.4e} mean {:.4e} max {:.4e}, {} floor violations",
                z.event_count,
                z.min_dwell,
                z.mean_dwell,
                z.max_dwell,
                z.floor_violations.len()
            ),
        ));
        suite.zeno = Some(z);
    }

    if mode == ControlMode::EventTriggered {
        let inv = check_trigger_invariant(record);
        suite.verdicts.push(verdict(
            "trigger-invariant",
            inv.passed(),
            format!(
                "{} inter-event violations, {} spurious events in {} steps",
                inv.inter_event_violations.len(),
                inv.spurious_events.len(),
                inv.checked
            ),
        ));
        suite.trigger_invariant = Some(inv);
    }

    if mode == ControlMode::ContinuousDamping {
        let dt = record.echo.dt;
        let mono = check_energy_monotone(record, dt * dt)?;
        suite.verdicts.push(verdict(
            "energy-monotone",
            mono.passed(),
            format!("{} increases beyond dt^2 E, largest relative step {:.3e}", mono.violations, mono.max_relative_increase),
        ));
        suite.energy_monotone = Some(mono);
    }

    if mode == ControlMode::Uncontrolled {
        let drift = energy_drift(record)?;
        suite.verdicts.push(verdict(
            "conservation",
            drift < CONSERVATION_TOL,
            format!("relative energy drift {drift:.3e} (limit {CONSERVATION_TOL:e})"),
        ));
        suite.energy_drift = Some(drift);
    }
    Ok(suite)
}

pub struct RunOutcome {
    pub record: RunRecord,
    pub summary: Summary,
}

/// Designs, simulates and checks one configuration without touching disk.
pub fn execute(cfg: &RunConfig) -> CliResult<RunOutcome> {
    let started = Instant::now();
    let prepared = prepare(cfg)?;
    let mode = resolve_mode(cfg, &prepared)?;
    let record = prepared.run(cfg.alpha, mode)?;
    let checks = run_checks(&record)?;
    let steps = record.echo.steps;
    let summary = Summary {
        config: cfg.clone(),
        run: record.echo,
        c_omega: prepared.c_omega,
        certificate: prepared.certificate,
        event_count: record.events.len(),
        step_count: steps,
        update_ratio: record.events.len() as f64 / steps as f64,
        delta_emp: empirical_decay_rate(&record.series.t, &record.series.energy),
        checks,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    Ok(RunOutcome { record, summary })
}

/// Runs one configuration and writes the run directory.
pub fn cmd_simulate(cfg: &RunConfig) -> CliResult<RunOutcome> {
    let outcome = execute(cfg)?;
    write_run(&cfg.out, &outcome)?;
    Ok(outcome)
}

pub fn write_run(dir: &Path, outcome: &RunOutcome) -> CliResult<()> {
    ensure_dir(dir)?;
    let event_columns = outcome.record.echo.mode != ControlMode::Uncontrolled;
    output::write_series(&dir.join(output::SERIES_FILE), &outcome.record.series, event_columns)?;
    output::write_events(&dir.join(output::EVENTS_FILE), &outcome.record.events)?;
    output::write_json(&dir.join(output::CERTIFICATE_FILE), &outcome.summary.certificate)?;
    output::write_json(&dir.join(output::SUMMARY_FILE), &outcome.summary)
}

/// Re-runs the checks on a persisted run directory.
pub fn cmd_verify(dir: &Path) -> CliResult<CheckSuite> {
    if !dir.is_dir() {
        return Err(CliError::MissingDir(dir.to_path_buf()));
    }
    let head: SummaryHead = output::read_json(&dir.join(output::SUMMARY_FILE))?;
    let series_path = dir.join(output::SERIES_FILE);
    if !series_path.is_file() {
        return Err(CliError::Data(format!("{} is missing", series_path.display())));
    }
    let series = output::read_series(&series_path)?;
    let as_data = |e: CoreError| CliError::Data(format!("{}: {e}", dir.display()));
    let record = RunRecord::from_series(series, head.run, Some(head.certificate)).map_err(as_data)?;
    run_checks(&record).map_err(|e| match e {
        CliError::Core(e) => as_data(e),
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub length: f64,
    pub c_omega: Option<f64>,
    pub feasible: bool,
    pub delta: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub events: Option<usize>,
    pub delta_emp: Option<f64>,
    /// `ok`, `infeasible`, `checks-failed` or `error: <message>`.
    pub status: String,
    #[serde(skip)]
    pub exit_code: u8,
}

fn cell_dir(out: &Path, alpha: f64, length: f64) -> PathBuf {
    out.join(format!("alpha_{alpha}_L_{length}"))
}

fn sweep_cell(base: &RunConfig, alpha: f64, length: f64) -> SweepRow {
    let mut cfg = base.clone();
    cfg.alpha = alpha;
    cfg.domain = cfg.domain.with_length(length);
    cfg.out = cell_dir(&base.out, alpha, length);
    let mut row = SweepRow {
        alpha,
        length,
        c_omega: None,
        feasible: false,
        delta: None,
        k: None,
        events: None,
        delta_emp: None,
        status: String::new(),
        exit_code: exit::OK,
    };
    let c = Grid::new(cfg.domain).map_err(CliError::from).and_then(|g| poincare_constant(&cfg, &g));
    match c {
        Ok(c) => row.c_omega = Some(c),
        Err(e) => {
            row.exit_code = e.exit_code();
            row.status = format!("error: {e}");
            return row;
        }
    }
    match cmd_simulate(&cfg) {
        Ok(o) => {
            let s = &o.summary;
            row.feasible = true;
            row.delta = Some(s.certificate.delta);
            row.k = Some(s.certificate.k);
            row.events = Some(s.event_count);
            row.delta_emp = s.delta_emp;
            row.status = if s.checks.passed() { "ok".into() } else { "checks-failed".into() };
        }
        Err(CliError::Core(CoreError::InfeasibleDomain { .. })) => {
            row.exit_code = exit::INFEASIBLE_DOMAIN;
            row.status = "infeasible".into();
        }
        Err(e) => {
            row.feasible = !matches!(e, CliError::Core(CoreError::DesignFailure { .. }));
            row.exit_code = e.exit_code();
            row.status = format!("error: {e}");
        }
    }
    row
}

/// Thread cap for sweeps from `WAVETRIG_THREADS`; unset or zero means the
/// rayon default.
pub fn sweep_threads() -> CliResult<usize> {
    match std::env::var("WAVETRIG_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("WAVETRIG_THREADS must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

/// One design + simulation per `(alpha, length)` cell, run concurrently.
/// Writes a run directory per cell and `sweep.csv` in row-major order
/// (alpha outer, length inner).
pub fn cmd_sweep(base: &RunConfig, alphas: &[f64], lengths: &[f64]) -> CliResult<Vec<SweepRow>> {
    if alphas.is_empty() || lengths.is_empty() {
        return Err(CliError::Usage("sweep needs non-empty --alphas and --lengths".into()));
    }
    let cells: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| lengths.iter().map(move |&l| (a, l))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sweep_threads()?)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| cells.par_iter().map(|&(a, l)| sweep_cell(base, a, l)).collect());

    ensure_dir(&base.out)?;
    let path = base.out.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(rows)
}

/// Exit code of a whole sweep: success if any cell ran, otherwise the code
/// of the first failed cell.
pub fn sweep_exit_code(rows: &[SweepRow]) -> u8 {
    if rows.iter().any(|r| r.feasible && r.exit_code == exit::OK) {
        return exit::OK;
    }
    rows.iter().map(|r| r.exit_code).find(|&c| c != exit::OK).unwrap_or(exit::OK)
}
