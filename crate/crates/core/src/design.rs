//! Parameter design for the event-triggered damping law.
//!
//! Starting from the damping gain `alpha` and a Poincaré constant `C`, the
//! pipeline picks trigger gains `(gamma0, gamma1)`, a Lyapunov weight
//! `epsilon`, the dissipation margins `(nu0, nu1, beta)`, the threshold decay
//! rate `theta`, and finally the guarantee `E(t) <= K exp(-delta t) E(0)`.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PoincareSource;

/// Halvings of `(gamma0, gamma1)` allowed before giving up on an empty
/// epsilon interval.
pub const SHRINK_BUDGET: usize = 60;

/// Smallest accepted `(hi - lo) / hi` of the epsilon interval.
pub const MIN_RELATIVE_WIDTH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignInput {
    pub alpha: f64,
    pub c_omega: f64,
    pub c_omega_source: PoincareSource,
    /// Fraction of the admissible `gamma0` supremum actually used.
    pub s_gamma0: f64,
    /// Fraction of the admissible `gamma1` supremum actually used.
    pub s_gamma1: f64,
    /// `theta = theta_margin * beta / C2`.
    pub theta_margin: f64,
}

impl DesignInput {
    pub fn new(alpha: f64, c_omega: f64, c_omega_source: PoincareSource) -> Self {
        Self {
            alpha,
            c_omega,
            c_omega_source,
            s_gamma0: 0.5,
            s_gamma1: 0.5,
            theta_margin: 1.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Config(format!("damping gain must be positive, got {}", self.alpha)));
        }
        check_domain(self.c_omega)?;
        for (name, s) in [("s_gamma0", self.s_gamma0), ("s_gamma1", self.s_gamma1)] {
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {s}")));
            }
        }
        if !(self.theta_margin.is_finite() && self.theta_margin > 1.0) {
            return Err(Error::Config(format!(
                "theta_margin must exceed 1, got {}",
                self.theta_margin
            )));
        }
        Ok(())
    }
}

fn check_domain(c_omega: f64) -> Result<()> {
    if !(c_omega.is_finite() && c_omega > 0.0) {
        return Err(Error::Config(format!("Poincare constant must be positive, got {c_omega}")));
    }
    if c_omega >= SQRT_2 {
        return Err(Error::InfeasibleDomain { c_omega });
    }
    Ok(())
}

/// Strict upper bounds on the trigger gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaBounds {
    pub gamma0_sup: f64,
    pub gamma1_sup: f64,
}

pub fn gamma_bounds(alpha: f64, c_omega: f64) -> Result<GammaBounds> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Config(format!("damping gain must be positive, got {alpha}")));
    }
    check_domain(c_omega)?;
    let c2 = c_omega * c_omega;
    let slack = 2.0 - c2;
    if alpha < 2.0 {
        let denom = c2 * (alpha * alpha + alpha * c_omega).max(2.0 * (2.0 - alpha * alpha));
        Ok(GammaBounds { gamma0_sup: slack / denom, gamma1_sup: 0.5 })
    } else {
        let denom = alpha * alpha * c2 + alpha * c2 * c_omega;
        Ok(GammaBounds { gamma0_sup: slack / denom, gamma1_sup: 1.0 })
    }
}

/// Open interval of admissible Lyapunov weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonInterval {
    /// Below this value `nu0 <= 0`.
    pub lo: f64,
    /// `min(hi_uncapped, 1/C)`.
    pub hi: f64,
    /// Above this value `nu1 <= 0`.
    pub hi_uncapped: f64,
}

impl EpsilonInterval {
    pub fn is_feasible(&self) -> bool {
        self.lo < self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

pub fn epsilon_interval(alpha: f64, c_omega: f64, gamma0: f64, gamma1: f64) -> Result<EpsilonInterval> {
    let c2 = c_omega * c_omega;
    let denom = 2.0 - c2 * (1.0 + alpha * alpha * gamma0);
    if denom <= 0.0 {
        return Err(Error::Precondition(format!(
            "2 - C^2 (1 + alpha^2 gamma0) = {denom} must be positive (gamma0 = {gamma0} too large)"
        )));
    }
    let lo = alpha * gamma0 * c2 / denom;
    let hi_uncapped = alpha * (1.0 - gamma1) / (2.0 + alpha * alpha * gamma1);
    Ok(EpsilonInterval { lo, hi: hi_uncapped.min(1.0 / c_omega), hi_uncapped })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub nu0: f64,
    pub nu1: f64,
    pub beta: f64,
}

impl Margins {
    pub fn are_positive(&self) -> bool {
        self.nu0 > 0.0 && self.nu1 > 0.0
    }
}

/// Dissipation coefficients of the gradient (`nu0`) and velocity (`nu1`)
/// terms in the derivative estimate. Negative values are returned as-is.
pub fn margins(alpha: f64, c_omega: f64, gamma0: f64, gamma1: f64, epsilon: f64) -> Margins {
    let c2 = c_omega * c_omega;
    let nu0 = 2.0 * epsilon - alpha * gamma0 * c2 - epsilon * c2 * (1.0 + alpha * alpha * gamma0);
    let nu1 = 2.0 * alpha - 2.0 * epsilon - alpha * (gamma1 + 1.0) - alpha * alpha * epsilon * gamma1;
    Margins { nu0, nu1, beta: nu0.min(nu1) }
}

/// The two expanded forms of the feasibility condition `lo < hi_uncapped`,
/// evaluated as numbers (positive means feasible).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpandedFeasibility {
    /// `(alpha^2 - 2) C^2 gamma0 + 2 - C^2 + (C^2 - 2) gamma1`.
    pub published: f64,
    /// `-(alpha^2 + 2) C^2 gamma0 + 2 - C^2 + (C^2 - 2) gamma1`.
    pub rederived: f64,
}

pub fn expanded_feasibility(alpha: f64, c_omega: f64, gamma0: f64, gamma1: f64) -> ExpandedFeasibility {
    let c2 = c_omega * c_omega;
    let rest = 2.0 - c2 + (c2 - 2.0) * gamma1;
    ExpandedFeasibility {
        published: (alpha * alpha - 2.0) * c2 * gamma0 + rest,
        rederived: -(alpha * alpha + 2.0) * c2 * gamma0 + rest,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignDiagnostics {
    pub gamma_bounds: GammaBounds,
    pub shrink_iterations: usize,
    pub epsilon_interval: EpsilonInterval,
    pub expanded_feasibility: ExpandedFeasibility,
    /// Overshoot factor with `(1 + epsilon)` in place of `(1 + alpha epsilon)`.
    /// Not a valid bound when `alpha > 1`; kept for comparison.
    pub mu_published: f64,
    pub k_published: f64,
    pub notes: Vec<String>,
}

/// Every constant of the exponential-stability guarantee.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub input: DesignInput,
    pub gamma0: f64,
    pub gamma1: f64,
    pub epsilon: f64,
    pub nu0: f64,
    pub nu1: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub theta: f64,
    pub mu: f64,
    pub k: f64,
    pub delta: f64,
    pub diagnostics: DesignDiagnostics,
}

pub fn build_certificate(input: &DesignInput) -> Result<StabilityCertificate> {
    input.validate()?;
    let DesignInput { alpha, c_omega, .. } = *input;

    let bounds = gamma_bounds(alpha, c_omega)?;
    let mut gamma0 = input.s_gamma0 * bounds.gamma0_sup;
    let mut gamma1 = input.s_gamma1 * bounds.gamma1_sup;
    let mut trace = Vec::new();
    let mut shrinks = 0;
    // An interval that is non-empty only by round-off leaves margins that
    // are zero to machine precision at its midpoint; such a pair of gains is
    // shrunk like an empty interval.
    let wide_enough = |iv: &EpsilonInterval| iv.is_feasible() && iv.hi - iv.lo > MIN_RELATIVE_WIDTH * iv.hi;
    let (interval, epsilon, m) = loop {
        let interval = epsilon_interval(alpha, c_omega, gamma0, gamma1)?;
        trace.push(format!(
            "gamma0={gamma0:e} gamma1={gamma1:e} lo={:e} hi={:e}",
            interval.lo, interval.hi
        ));
        if wide_enough(&interval) {
            let epsilon = interval.midpoint();
            let m = margins(alpha, c_omega, gamma0, gamma1, epsilon);
            if m.are_positive() {
                break (interval, epsilon, m);
            }
            trace.push(format!("epsilon={epsilon:e} nu0={:e} nu1={:e}", m.nu0, m.nu1));
        }
        if shrinks == SHRINK_BUDGET {
            return Err(Error::DesignFailure { iterations: shrinks, trace: trace.join("; ") });
        }
        gamma0 *= 0.5;
        gamma1 *= 0.5;
        shrinks += 1;
    };

    let c1 = 1.0 - epsilon * c_omega;
    let c2 = 1.0 + epsilon * c_omega + epsilon * alpha * c_omega * c_omega;
    let delta = m.beta / c2;
    let theta = input.theta_margin * delta;
    let mu = alpha * (1.0 + alpha * epsilon) / (2.0 * (theta - delta));
    let k = c2 / c1 * (1.0 + mu);
    let mu_published = alpha * (1.0 + epsilon) / (2.0 * (theta - delta));
    let k_published = c2 / c1 * (1.0 + mu_published);

    let mut notes = Vec::new();
    if input.c_omega_source == PoincareSource::Wirtinger {
        notes.push(
            "C_omega from the Wirtinger formula L/(2 pi): smaller than the Dirichlet Poincare \
             constant, the E/V equivalence may fail on discrete fields"
                .to_string(),
        );
    }
    if alpha > 1.0 {
        notes.push(format!(
            "mu uses (1 + alpha epsilon); the (1 + epsilon) variant gives K = {k_published:e}, \
             which is not a valid overshoot bound for alpha > 1"
        ));
    }

    let cert = StabilityCertificate {
        input: *input,
        gamma0,
        gamma1,
        epsilon,
        nu0: m.nu0,
        nu1: m.nu1,
        beta: m.beta,
        c1,
        c2,
        theta,
        mu,
        k,
        delta,
        diagnostics: DesignDiagnostics {
            gamma_bounds: bounds,
            shrink_iterations: shrinks,
            epsilon_interval: interval,
            expanded_feasibility: expanded_feasibility(alpha, c_omega, gamma0, gamma1),
            mu_published,
            k_published,
            notes,
        },
    };
    cert.check_invariants()?;
    Ok(cert)
}

impl StabilityCertificate {
    pub fn alpha(&self) -> f64 {
        self.input.alpha
    }

    pub fn c_omega(&self) -> f64 {
        self.input.c_omega
    }

    pub fn check_invariants(&self) -> Result<()> {
        let c = self.c_omega();
        let alpha = self.alpha();
        let iv = &self.diagnostics.epsilon_interval;
        let checks = [
            (c < SQRT_2, "C_omega < sqrt(2)"),
            (self.epsilon < 1.0 / c, "epsilon < 1/C_omega"),
            (iv.lo < self.epsilon && self.epsilon < iv.hi, "epsilon inside its interval"),
            (self.nu0 > 0.0 && self.nu1 > 0.0, "nu0, nu1 > 0"),
            (self.beta == self.nu0.min(self.nu1) && self.beta > 0.0, "beta = min(nu0, nu1) > 0"),
            (self.c1 == 1.0 - self.epsilon * c && self.c1 > 0.0, "C1 = 1 - epsilon C > 0"),
            (
                self.c2 == 1.0 + self.epsilon * c + self.epsilon * alpha * c * c,
                "C2 = 1 + epsilon C + epsilon alpha C^2",
            ),
            (self.c1 < 1.0 && 1.0 < self.c2, "C1 < 1 < C2"),
            (self.delta == self.beta / self.c2 && self.delta > 0.0, "delta = beta/C2 > 0"),
            (self.theta > self.delta, "theta > beta/C2"),
            (self.mu > 0.0, "mu > 0"),
            (self.k > 1.0, "K > 1"),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(Error::DesignFailure {
                    iterations: self.diagnostics.shrink_iterations,
                    trace: format!("certificate invariant violated: {what}"),
                });
            }
        }
        Ok(())
    }

    pub fn vdot_bound_rhs(&self, energy: f64, eta0: f64) -> f64 {
        vdot_bound_rhs(self, energy, eta0)
    }

    /// `K exp(-delta t) E(0)`.
    pub fn energy_envelope(&self, t: f64, e0: f64) -> f64 {
        self.k * (-self.delta * t).exp() * e0
    }

    /// `V(0) exp(-delta t) + mu s (exp(-delta t) - exp(-theta t))` for a
    /// threshold `eta0(t) = s exp(-theta t)`.
    pub fn lyapunov_envelope(&self, t: f64, v0: f64, eta0_scale: f64) -> f64 {
        let decay = (-self.delta * t).exp();
        v0 * decay + self.mu * eta0_scale * (decay - (-self.theta * t).exp())
    }
}

/// Certified upper bound on `dV/dt`: `-beta E + (alpha/2)(1 + alpha epsilon) eta0`.
pub fn vdot_bound_rhs(cert: &StabilityCertificate, energy: f64, eta0: f64) -> f64 {
    let alpha = cert.alpha();
    -cert.beta * energy + 0.5 * alpha * (1.0 + alpha * cert.epsilon) * eta0
}
