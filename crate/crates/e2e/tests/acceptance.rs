//! Acceptance suite: one PASS/FAIL line per criterion A1-A9.
//!
//! Built with `harness = false`; exits non-zero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::{PI, SQRT_2};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavetrig::commands::{cmd_simulate, execute, prepare};
use wavetrig::config::{ModeSpec, RunConfig};
use wavetrig_core::design::{build_certificate, margins, DesignInput};
use wavetrig_core::dynamics::{ControlMode, Leapfrog, WaveState};
use wavetrig_core::grid::{Grid, PoincareSource};
use wavetrig_core::lyapunov::{check_envelope, check_equivalence, check_vdot, energy_drift, RunRecord, VDOT_C_TOL};
use wavetrig_core::trigger::{check_trigger_invariant, zeno_report, EventCause};
use wavetrig_core::Error;

// Tolerances, as pinned by the acceptance criteria.
const A1_ENVELOPE_REL_TOL: f64 = 1e-9;
const A1_SANDWICH_REL_TOL: f64 = 1e-12;
const A3_REL_TOL: f64 = 1e-10;
const A4_TARGET_RATIO: f64 = 4.0;
const A4_RATIO_TOL: f64 = 0.2;
const A5_SBP_REL_TOL: f64 = 1e-12;
const A5_FIELDS_PER_GRID: usize = 100;
const A6_REL_TOL: f64 = 0.01;
const A8_CONSERVATION_TOL: f64 = 1e-3;
const A8_UNCONTROLLED_T_END: f64 = 10.0;

const A2_ALPHAS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
const A2_CONSTANTS: [f64; 5] = [0.1, 0.3, 0.5, 1.0, 1.3];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

type Criterion = fn() -> Result<Outcome, String>;

/// The A1 scenario; every field matches the defaults of the run config.
fn a1_config() -> RunConfig {
    RunConfig::default()
}

fn a1_record() -> Result<RunRecord, String> {
    execute(&a1_config()).map(|o| o.record).map_err(|e| e.to_string())
}

fn a1() -> Result<Outcome, String> {
    let cfg = a1_config();
    let prepared = prepare(&cfg).map_err(|e| e.to_string())?;
    let r = a1_record()?;
    let env = check_envelope(&r, A1_ENVELOPE_REL_TOL).map_err(|e| e.to_string())?;
    let eq = check_equivalence(&r, A1_SANDWICH_REL_TOL).map_err(|e| e.to_string())?;
    let inv = check_trigger_invariant(&r);
    let vd = check_vdot(&r, VDOT_C_TOL).map_err(|e| e.to_string())?;
    let delta_emp = env.delta_emp.ok_or("no decay-rate fit")?;
    let events = r.events.len();
    let steps = r.echo.steps;
    let passed = env.passed()
        && eq.passed()
        && inv.passed()
        && vd.passed()
        && delta_emp >= env.delta
        && events < steps
        && (prepared.c_omega - 0.3184).abs() < 1e-3;
    Ok(outcome(
        passed,
        format!(
            "C_omega={:.6}; envelope violations {} (max E/bound {:.3}); sandwich violations {}; \
             trigger-invariant violations {}; vdot violations {} of {}; delta_emp={:.4} >= delta={:.4}; \
             events {} < steps {}",
            prepared.c_omega,
            env.violations,
            env.max_ratio,
            eq.violations,
            inv.inter_event_violations.len() + inv.spurious_events.len(),
            vd.violations,
            vd.checked,
            delta_emp,
            env.delta,
            events,
            steps
        ),
    ))
}

fn a2() -> Result<Outcome, String> {
    let mut bad = Vec::new();
    for &alpha in &A2_ALPHAS {
        for &c in &A2_CONSTANTS {
            match build_certificate(&DesignInput::new(alpha, c, PoincareSource::User)) {
                Ok(cert) if cert.delta > 0.0 && cert.k > 1.0 && cert.nu0 > 0.0 && cert.nu1 > 0.0 => {}
                Ok(cert) => bad.push(format!("({alpha}, {c}): delta={} K={} nu0={} nu1={}", cert.delta, cert.k, cert.nu0, cert.nu1)),
                Err(e) => bad.push(format!("({alpha}, {c}): {e}")),
            }
        }
        for c in [SQRT_2, 1.5] {
            match build_certificate(&DesignInput::new(alpha, c, PoincareSource::User)) {
                Err(Error::InfeasibleDomain { .. }) => {}
                other => bad.push(format!("({alpha}, {c}) not refused: {:?}", other.map(|c| c.delta))),
            }
        }
    }
    Ok(outcome(bad.is_empty(), if bad.is_empty() { "25/25 cells designed, 10/10 infeasible refusals".into() } else { bad.join("; ") }))
}

fn a3() -> Result<Outcome, String> {
    let mut worst0 = 0.0f64;
    let mut worst1 = 0.0f64;
    for &alpha in &A2_ALPHAS {
        for &c in &A2_CONSTANTS {
            let cert = build_certificate(&DesignInput::new(alpha, c, PoincareSource::User)).map_err(|e| e.to_string())?;
            let (g0, g1) = (cert.gamma0, cert.gamma1);
            let iv = cert.diagnostics.epsilon_interval;
            let c2 = c * c;
            let lo = iv.lo;
            let scale0 = 2.0 * lo + alpha * g0 * c2 + lo * c2 * (1.0 + alpha * alpha * g0);
            worst0 = worst0.max(margins(alpha, c, g0, g1, lo).nu0.abs() / scale0);
            let hi = iv.hi_uncapped;
            let scale1 = 2.0 * alpha + 2.0 * hi + alpha * (g1 + 1.0) + alpha * alpha * hi * g1;
            worst1 = worst1.max(margins(alpha, c, g0, g1, hi).nu1.abs() / scale1);
        }
    }
    Ok(outcome(
        worst0 <= A3_REL_TOL && worst1 <= A3_REL_TOL,
        format!("max |nu0(lo)| rel {worst0:.2e}, max |nu1(hi)| rel {worst1:.2e} (tol {A3_REL_TOL:e})"),
    ))
}

/// Max-norm error of the undriven standing wave against `cos(pi t) sin(pi x)`
/// on `n` interior points with `dt = dx / 2`; returns the error at `t = 1`
/// and the largest error over all steps in `[0, 1]`.
fn standing_wave_error(n: usize) -> Result<(f64, f64), String> {
    let g = Grid::interval(1.0, n).map_err(|e| e.to_string())?;
    let dt = 0.5 * g.dx();
    let steps = (1.0 / dt).round() as usize;
    let exact = |t: f64| g.sample(|x, _| (PI * t).cos() * (PI * x).sin());
    let mut s = WaveState::new(&g, exact(0.0), g.zeros()).map_err(|e| e.to_string())?;
    let mut stepper = Leapfrog::new(&g);
    let mut worst = 0.0f64;
    let mut last = 0.0;
    for i in 1..=steps {
        stepper.advance(&g, &mut s, dt, 0.0);
        let t = i as f64 * dt;
        last = s.z.sub(&exact(t)).map_err(|e| e.to_string())?.max_abs();
        worst = worst.max(last);
    }
    Ok((last, worst))
}

fn a4() -> Result<Outcome, String> {
    let levels = [19usize, 39, 79, 159];
    let errs = levels.iter().map(|&n| standing_wave_error(n)).collect::<Result<Vec<_>, _>>()?;
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0].0 / w[1].0).collect();
    let sup_ratios: Vec<f64> = errs.windows(2).map(|w| w[0].1 / w[1].1).collect();
    let lo = A4_TARGET_RATIO * (1.0 - A4_RATIO_TOL);
    let hi = A4_TARGET_RATIO * (1.0 + A4_RATIO_TOL);
    let passed = ratios.iter().all(|r| (lo..=hi).contains(r));
    let fmt = |v: &[f64]| v.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", ");
    Ok(outcome(
        passed,
        format!(
            "error ratios at t=1: [{}] (required {lo}..{hi}); errors [{}]; \
             for reference, ratios of the max error over t in [0, 1]: [{}]",
            fmt(&ratios),
            errs.iter().map(|e| format!("{:.3e}", e.0)).collect::<Vec<_>>().join(", "),
            fmt(&sup_ratios)
        ),
    ))
}

fn a5() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_00a5);
    let mut failures = Vec::new();
    let mut worst_sbp = 0.0f64;
    for n in [49usize, 199, 999] {
        let g = Grid::interval(1.0, n).map_err(|e| e.to_string())?;
        let c = g.discrete_poincare_constant().map_err(|e| e.to_string())?;
        for trial in 0..A5_FIELDS_PER_GRID {
            let mut draw = || g.field((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
            let (f, h) = (draw(), draw());
            let l2 = g.l2_norm_sq(&f).unwrap();
            let h1 = g.h1_seminorm_sq(&f).unwrap();
            if l2 > c * c * h1 {
                failures.push(format!("Poincare n={n} trial {trial}"));
            }
            let lap = g.apply_laplacian(&f).unwrap();
            let sbp = (g.inner_product(&lap, &f).unwrap() + h1).abs() / h1;
            worst_sbp = worst_sbp.max(sbp);
            if sbp > A5_SBP_REL_TOL {
                failures.push(format!("summation by parts n={n} trial {trial}: {sbp:e}"));
            }
            if g.inner_product(&f, &h).unwrap().abs() > (l2 * g.l2_norm_sq(&h).unwrap()).sqrt() {
                failures.push(format!("Cauchy-Schwarz n={n} trial {trial}"));
            }
        }
    }
    Ok(outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("300 random fields: Poincare and Cauchy-Schwarz hold, worst SBP residual {worst_sbp:.2e}")
        } else {
            failures.join("; ")
        },
    ))
}

fn a6() -> Result<Outcome, String> {
    let g = Grid::interval(1.0, 999).map_err(|e| e.to_string())?;
    let c = g.discrete_poincare_constant().map_err(|e| e.to_string())?;
    let rel = (c - 1.0 / PI).abs() * PI;
    // Pinned counterexample: the sampled first Dirichlet mode.
    let f = g.sample(|x, _| (PI * x).sin());
    let quotient = (g.l2_norm_sq(&f).unwrap() / g.h1_seminorm_sq(&f).unwrap()).sqrt();
    let wirtinger = g.poincare_constant(PoincareSource::Wirtinger).map_err(|e| e.to_string())?;
    Ok(outcome(
        rel <= A6_REL_TOL && quotient > wirtinger,
        format!(
            "discrete C={c:.8} vs 1/pi, rel diff {rel:.2e}; sin(pi x): |f|/|grad f| = {quotient:.6} > 1/(2 pi) = {wirtinger:.6}"
        ),
    ))
}

fn a7() -> Result<Outcome, String> {
    let r = a1_record()?;
    let dt = r.echo.dt;
    let z = zeno_report(&r.events, r.echo.t_end).map_err(|e| e.to_string())?;
    let s = &r.series;
    let mut bad = Vec::new();
    for e in r.events.entries().iter().filter(|e| e.cause == EventCause::Trigger) {
        let i = e.step;
        if !(s.trigger_value[i] >= 0.0) {
            bad.push(format!("step {i}: predicate {:e} < 0", s.trigger_value[i]));
        }
        if !(s.trigger_value[i - 1] < 0.0) {
            bad.push(format!("step {}: preceding predicate {:e} >= 0", i - 1, s.trigger_value[i - 1]));
        }
        // One-step slack: the threshold may be compared one step early.
        if !(s.norm_e_sq[i] >= s.eta0[i] || s.norm_e_sq[i] >= s.eta0[i - 1]) {
            bad.push(format!("step {i}: |e|^2 = {:e} below eta0 = {:e}", s.norm_e_sq[i], s.eta0[i]));
        }
    }
    let passed = z.min_dwell >= dt && bad.is_empty() && z.floor_violations.is_empty();
    Ok(outcome(
        passed,
        format!(
            "min dwell {:.4} >= dt {dt}; {} triggered events checked; {} floor violations{}",
            z.min_dwell,
            z.floor_checked,
            z.floor_violations.len(),
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    ))
}

fn a8() -> Result<Outcome, String> {
    let et = a1_record()?;
    let cont = execute(&RunConfig { mode: ModeSpec::ContinuousDamping, ..a1_config() })
        .map_err(|e| e.to_string())?
        .record;
    assert_eq!(cont.echo.mode, ControlMode::ContinuousDamping);
    let dt = cont.echo.dt;
    let e = &cont.series.energy;
    let max_increase = e.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let monotone = max_increase <= dt * dt;
    let more_updates = cont.events.len() > et.events.len();

    let mut ucfg = RunConfig { mode: ModeSpec::Uncontrolled, ..a1_config() };
    ucfg.time.t_end = A8_UNCONTROLLED_T_END;
    let unc = execute(&ucfg).map_err(|e| e.to_string())?.record;
    let drift = energy_drift(&unc).map_err(|e| e.to_string())?;
    Ok(outcome(
        monotone && more_updates && drift < A8_CONSERVATION_TOL,
        format!(
            "continuous: max per-step increase {max_increase:.2e} <= dt^2 = {:.2e}, {} updates vs {} event-triggered; \
             uncontrolled drift over [0, {A8_UNCONTROLLED_T_END}] {drift:.2e}",
            dt * dt,
            cont.events.len(),
            et.events.len()
        ),
    ))
}

fn a9() -> Result<Outcome, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut series = Vec::new();
    for name in ["first", "second"] {
        let cfg = RunConfig { out: dir.path().join(name), ..a1_config() };
        cmd_simulate(&cfg).map_err(|e| e.to_string())?;
        series.push(std::fs::read(cfg.out.join("series.csv")).map_err(|e| e.to_string())?);
    }
    Ok(outcome(series[0] == series[1], format!("series.csv: {} bytes, identical = {}", series[0].len(), series[0] == series[1])))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, Criterion); 9] = [
        ("A1", "end-to-end certificate validity", a1),
        ("A2", "feasibility grid", a2),
        ("A3", "boundary identities", a3),
        ("A4", "integrator order", a4),
        ("A5", "discrete identities", a5),
        ("A6", "Poincare convergence", a6),
        ("A7", "Zeno diagnostics", a7),
        ("A8", "baseline sanity", a8),
        ("A9", "determinism", a9),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let o = check().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        if !o.passed {
            failed += 1;
        }
        println!("{id} {} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
