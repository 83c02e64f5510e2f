use proptest::prelude::*;
use wavetrig_core::design::{build_certificate, epsilon_interval, gamma_bounds, margins, DesignInput};
use wavetrig_core::dynamics::{step, WaveState};
use wavetrig_core::grid::{Grid, PoincareSource};
use wavetrig_core::lyapunov::{energy, LyapunovWeights, StateNorms};
use wavetrig_core::trigger::{eta0, predicate, TriggerParams};

fn interval() -> impl Strategy<Value = Grid> {
    (0.2f64..5.0, 3usize..80).prop_map(|(l, n)| Grid::interval(l, n).unwrap())
}

fn rectangle() -> impl Strategy<Value = Grid> {
    (0.2f64..3.0, 0.2f64..3.0, 2usize..14, 2usize..14).prop_map(|(a, b, nx, ny)| Grid::rectangle(a, b, nx, ny).unwrap())
}

fn any_grid() -> impl Strategy<Value = Grid> {
    prop_oneof![interval(), rectangle()]
}

fn grid_and_fields(count: usize) -> impl Strategy<Value = (Grid, Vec<Vec<f64>>)> {
    any_grid().prop_flat_map(move |g| {
        let n = g.len();
        (Just(g), prop::collection::vec(prop::collection::vec(-10.0f64..10.0, n), count))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn summation_by_parts((g, f) in grid_and_fields(1)) {
        let f = g.field(f[0].clone()).unwrap();
        let lap = g.apply_laplacian(&f).unwrap();
        let lhs = g.inner_product(&lap, &f).unwrap();
        let rhs = -g.h1_seminorm_sq(&f).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(f64::MIN_POSITIVE), "{lhs} vs {rhs}");
    }

    #[test]
    fn discrete_poincare_inequality((g, f) in grid_and_fields(1)) {
        let c = g.discrete_poincare_constant().unwrap();
        let f = g.field(f[0].clone()).unwrap();
        let l2 = g.l2_norm_sq(&f).unwrap();
        let h1 = g.h1_seminorm_sq(&f).unwrap();
        prop_assert!(l2 <= c * c * h1 * (1.0 + 1e-9), "{l2} > {c}^2 * {h1}");
    }

    #[test]
    fn cauchy_schwarz((g, f) in grid_and_fields(2)) {
        let a = g.field(f[0].clone()).unwrap();
        let b = g.field(f[1].clone()).unwrap();
        let ip = g.inner_product(&a, &b).unwrap();
        let bound = (g.l2_norm_sq(&a).unwrap() * g.l2_norm_sq(&b).unwrap()).sqrt();
        prop_assert!(ip.abs() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn lyapunov_is_sandwiched_by_energy(
        (g, f) in grid_and_fields(2),
        alpha in 0.05f64..5.0,
    ) {
        let c = g.discrete_poincare_constant().unwrap();
        prop_assume!(c < 1.4);
        let cert = build_certificate(&DesignInput::new(alpha, c, PoincareSource::Discrete)).unwrap();
        let s = WaveState::new(&g, g.field(f[0].clone()).unwrap(), g.field(f[1].clone()).unwrap()).unwrap();
        let n = StateNorms::of(&g, &s).unwrap();
        let (e, v) = (n.energy(), n.lyapunov(LyapunovWeights::from_certificate(&cert)));
        prop_assert!(cert.c1 * e <= v * (1.0 + 1e-12), "lower: {} {} {}", cert.c1, e, v);
        prop_assert!(v <= cert.c2 * e * (1.0 + 1e-12), "upper: {} {} {}", cert.c2, e, v);
    }

    #[test]
    fn certificate_invariants(alpha in 0.01f64..8.0, c in 0.005f64..1.414) {
        let cert = build_certificate(&DesignInput::new(alpha, c, PoincareSource::User)).unwrap();
        prop_assert!(cert.nu0 > 0.0 && cert.nu1 > 0.0);
        prop_assert!(cert.beta > 0.0 && cert.delta > 0.0);
        prop_assert!(cert.theta > cert.delta);
        prop_assert!(cert.c1 > 0.0 && cert.c2 > cert.c1);
        prop_assert!(cert.k > 1.0);
        let iv = cert.diagnostics.epsilon_interval;
        prop_assert!(iv.lo < cert.epsilon && cert.epsilon < iv.hi);
        prop_assert!(cert.epsilon * c < 1.0);
        let b = gamma_bounds(alpha, c).unwrap();
        prop_assert!(cert.gamma0 < b.gamma0_sup && cert.gamma1 < b.gamma1_sup);
    }

    #[test]
    fn margins_vanish_at_interval_ends(alpha in 0.05f64..6.0, c in 0.01f64..1.4, s0 in 0.05f64..0.95, s1 in 0.05f64..0.95) {
        let b = gamma_bounds(alpha, c).unwrap();
        let (g0, g1) = (s0 * b.gamma0_sup, s1 * b.gamma1_sup);
        let iv = epsilon_interval(alpha, c, g0, g1).unwrap();
        let c2 = c * c;
        let at_lo = margins(alpha, c, g0, g1, iv.lo);
        let scale0 = 2.0 * iv.lo + alpha * g0 * c2 + iv.lo * c2 * (1.0 + alpha * alpha * g0);
        prop_assert!(at_lo.nu0.abs() <= 1e-10 * scale0, "nu0(lo) = {}", at_lo.nu0);
        let at_hi = margins(alpha, c, g0, g1, iv.hi_uncapped);
        let e = iv.hi_uncapped;
        let scale1 = 2.0 * alpha + 2.0 * e + alpha * (g1 + 1.0) + alpha * alpha * e * g1;
        prop_assert!(at_hi.nu1.abs() <= 1e-10 * scale1, "nu1(hi) = {}", at_hi.nu1);
    }

    #[test]
    fn predicate_grows_with_deviation(e in 0.0f64..10.0, de in 1e-6f64..10.0, z in 0.0f64..10.0, v in 0.0f64..10.0, t in 0.0f64..50.0) {
        let p = TriggerParams::new(0.3, 0.2, 0.4, 2.0).unwrap();
        let eta = eta0(t, &p);
        prop_assert!(predicate(e + de, z, v, eta, &p) > predicate(e, z, v, eta, &p));
    }

    #[test]
    fn threshold_decays(t in 0.0f64..50.0, dt in 1e-3f64..5.0) {
        let p = TriggerParams::new(0.3, 0.2, 0.4, 2.0).unwrap();
        prop_assert!(eta0(t + dt, &p) < eta0(t, &p));
        prop_assert!(eta0(t, &p) > 0.0);
    }

    #[test]
    fn undriven_leapfrog_is_time_reversible((g, f) in grid_and_fields(2)) {
        let dt = 0.4 * g.min_spacing();
        let s0 = WaveState::new(&g, g.field(f[0].clone()).unwrap(), g.field(f[1].clone()).unwrap()).unwrap();
        let mut s = s0.clone();
        for _ in 0..20 {
            s = step(&g, &s, dt, 0.0).unwrap();
        }
        for v in s.v.values_mut() {
            *v = -*v;
        }
        for _ in 0..20 {
            s = step(&g, &s, dt, 0.0).unwrap();
        }
        let scale = s0.z.max_abs().max(s0.v.max_abs()).max(1.0);
        for (a, b) in s.z.values().iter().zip(s0.z.values()) {
            prop_assert!((a - b).abs() <= 1e-9 * scale);
        }
        let e0 = energy(&g, &s0).unwrap();
        prop_assert!(energy(&g, &s).unwrap().is_finite() && e0.is_finite());
    }
}
