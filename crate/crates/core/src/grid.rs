//! Uniform finite-difference grids on intervals and rectangles with homogeneous
//! Dirichlet boundary.
//!
//! Only interior nodes are stored. Boundary values are implicitly zero, so the
//! quadrature, the forward-difference gradient and the five-point Laplacian
//! satisfy the summation-by-parts identity `<Lap f, f> = -|grad f|^2` exactly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EIGEN_REL_TOL: f64 = 1e-10;
const EIGEN_RESIDUAL_TOL: f64 = 1e-8;
const EIGEN_MAX_ITER: usize = 100_000;

/// Geometry of the domain together with the number of interior nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    Interval { length: f64, n: usize },
    Rectangle { a: f64, b: f64, nx: usize, ny: usize },
}

/// Identifies the grid a [`Field`] was built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridTag {
    nx: usize,
    ny: usize,
    dx_bits: u64,
    dy_bits: u64,
}

/// Where a Poincaré constant comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoincareSource {
    /// `1/sqrt(lambda_1)` of the discrete Dirichlet Laplacian.
    Discrete,
    /// Continuous Dirichlet value: `L/pi` on an interval,
    /// `1/(pi sqrt(1/a^2 + 1/b^2))` on a rectangle.
    DirichletClosedForm,
    /// `L/(2 pi)` on an interval, `diameter/pi` on a rectangle. The interval
    /// value is the zero-mean Wirtinger constant and is too small for
    /// functions vanishing at both ends.
    Wirtinger,
    /// Supplied by the caller.
    User,
}

impl PoincareSource {
    pub fn as_str(self) -> &'static str {
        match self {
            PoincareSource::Discrete => "discrete",
            PoincareSource::DirichletClosedForm => "dirichlet-closed-form",
            PoincareSource::Wirtinger => "wirtinger",
            PoincareSource::User => "user",
        }
    }
}

impl std::str::FromStr for PoincareSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete" => Ok(PoincareSource::Discrete),
            "dirichlet" | "dirichlet-closed-form" => Ok(PoincareSource::DirichletClosedForm),
            "wirtinger" => Ok(PoincareSource::Wirtinger),
            "user" => Ok(PoincareSource::User),
            other => Err(Error::Config(format!("unknown Poincare constant source `{other}`"))),
        }
    }
}

/// Converged smallest eigenpair of the discrete Dirichlet operator `-Lap`.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Field,
    pub iterations: usize,
    /// `|Lap f + lambda f| / |f|` in the discrete L2 norm.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    shape: Shape,
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    weight: f64,
}

impl Grid {
    pub fn new(shape: Shape) -> Result<Self> {
        match shape {
            Shape::Interval { length, n } => {
                check_extent("length", length)?;
                check_count("n", n)?;
                let dx = length / (n + 1) as f64;
                Ok(Self { shape, nx: n, ny: 1, dx, dy: dx, weight: dx })
            }
            Shape::Rectangle { a, b, nx, ny } => {
                check_extent("a", a)?;
                check_extent("b", b)?;
                check_count("nx", nx)?;
                check_count("ny", ny)?;
                let dx = a / (nx + 1) as f64;
                let dy = b / (ny + 1) as f64;
                Ok(Self { shape, nx, ny, dx, dy, weight: dx * dy })
            }
        }
    }

    pub fn interval(length: f64, n: usize) -> Result<Self> {
        Self::new(Shape::Interval { length, n })
    }

    pub fn rectangle(a: f64, b: f64, nx: usize, ny: usize) -> Result<Self> {
        Self::new(Shape::Rectangle { a, b, nx, ny })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn is_2d(&self) -> bool {
        matches!(self.shape, Shape::Rectangle { .. })
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Mesh size along y. Equal to `dx` on an interval.
    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn min_spacing(&self) -> f64 {
        if self.is_2d() {
            self.dx.min(self.dy)
        } else {
            self.dx
        }
    }

    /// Number of interior nodes.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight of each interior node.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> f64 {
        match self.shape {
            Shape::Interval { length, .. } => length,
            Shape::Rectangle { a, b, .. } => a * b,
        }
    }

    pub fn tag(&self) -> GridTag {
        GridTag {
            nx: self.nx,
            ny: self.ny,
            dx_bits: self.dx.to_bits(),
            dy_bits: self.dy.to_bits(),
        }
    }

    /// Physical coordinates of interior node `index` (`y = 0` on an interval).
    pub fn coordinates(&self, index: usize) -> (f64, f64) {
        let i = index % self.nx;
        let j = index / self.nx;
        let x = (i + 1) as f64 * self.dx;
        if self.is_2d() {
            (x, (j + 1) as f64 * self.dy)
        } else {
            (x, 0.0)
        }
    }

    pub fn zeros(&self) -> Field {
        Field { values: vec![0.0; self.len()], tag: self.tag() }
    }

    /// Samples `f(x, y)` at every interior node.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Field {
        let values = (0..self.len())
            .map(|idx| {
                let (x, y) = self.coordinates(idx);
                f(x, y)
            })
            .collect();
        Field { values, tag: self.tag() }
    }

    pub fn field(&self, values: Vec<f64>) -> Result<Field> {
        if values.len() != self.len() {
            return Err(Error::ShapeMismatch { expected: self.len(), found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("field contains non-finite values".into()));
        }
        Ok(Field { values, tag: self.tag() })
    }

    pub(crate) fn check(&self, f: &Field) -> Result<()> {
        if f.tag != self.tag() {
            return Err(Error::ShapeMismatch { expected: self.len(), found: f.len() });
        }
        Ok(())
    }

    pub fn l2_norm_sq(&self, f: &Field) -> Result<f64> {
        self.check(f)?;
        Ok(self.weight * dot(&f.values, &f.values))
    }

    /// Squared discrete L2 norm of the forward-difference gradient, boundary
    /// edges included.
    pub fn h1_seminorm_sq(&self, f: &Field) -> Result<f64> {
        self.check(f)?;
        Ok(self.gradient_sq_unchecked(&f.values))
    }

    pub fn inner_product(&self, f: &Field, h: &Field) -> Result<f64> {
        self.check(f)?;
        self.check(h)?;
        Ok(self.weight * dot(&f.values, &h.values))
    }

    pub fn apply_laplacian(&self, f: &Field) -> Result<Field> {
        self.check(f)?;
        let mut out = self.zeros();
        self.laplacian_into(&f.values, &mut out.values);
        Ok(out)
    }

    pub(crate) fn gradient_sq_unchecked(&self, f: &[f64]) -> f64 {
        let (nx, ny) = (self.nx, self.ny);
        let mut sx = 0.0;
        for j in 0..ny {
            let row = &f[j * nx..(j + 1) * nx];
            let mut prev = 0.0;
            for &val in row {
                let d = val - prev;
                sx += d * d;
                prev = val;
            }
            sx += prev * prev;
        }
        let mut total = sx / (self.dx * self.dx);
        if self.is_2d() {
            let mut sy = 0.0;
            for i in 0..nx {
                let mut prev = 0.0;
                for j in 0..ny {
                    let val = f[j * nx + i];
                    let d = val - prev;
                    sy += d * d;
                    prev = val;
                }
                sy += prev * prev;
            }
            total += sy / (self.dy * self.dy);
        }
        self.weight * total
    }

    /// Writes the Dirichlet Laplacian of `f` into `out`. Lengths are not checked.
    pub(crate) fn laplacian_into(&self, f: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.nx, self.ny);
        let cx = 1.0 / (self.dx * self.dx);
        for j in 0..ny {
            let row = &f[j * nx..(j + 1) * nx];
            let dst = &mut out[j * nx..(j + 1) * nx];
            for i in 0..nx {
                let left = if i > 0 { row[i - 1] } else { 0.0 };
                let right = if i + 1 < nx { row[i + 1] } else { 0.0 };
                dst[i] = (left - 2.0 * row[i] + right) * cx;
            }
        }
        if self.is_2d() {
            let cy = 1.0 / (self.dy * self.dy);
            for j in 0..ny {
                for i in 0..nx {
                    let idx = j * nx + i;
                    let down = if j > 0 { f[idx - nx] } else { 0.0 };
                    let up = if j + 1 < ny { f[idx + nx] } else { 0.0 };
                    out[idx] += (down - 2.0 * f[idx] + up) * cy;
                }
            }
        }
    }

    /// Largest eigenvalue of `-Lap` in closed form for the second-order stencil.
    pub fn max_eigenvalue(&self) -> f64 {
        let axis = |n: usize, h: f64| {
            let s = (n as f64 * PI / (2.0 * (n + 1) as f64)).sin();
            4.0 / (h * h) * s * s
        };
        let mut lambda = axis(self.nx, self.dx);
        if self.is_2d() {
            lambda += axis(self.ny, self.dy);
        }
        lambda
    }

    /// Smallest eigenpair of `-Lap` by inverse power iteration from the
    /// all-ones vector.
    pub fn first_eigenpair(&self) -> Result<Eigenpair> {
        let n = self.len();
        let mut x = vec![1.0 / (n as f64).sqrt(); n];
        let mut y = vec![0.0; n];
        let mut ax = vec![0.0; n];
        let mut lambda_prev = f64::INFINITY;
        let mut residual = f64::INFINITY;
        let mut solver = self.solver();

        for iter in 1..=EIGEN_MAX_ITER {
            solver.solve(self, &x, &mut y);
            let norm = dot(&y, &y).sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::NoConvergence { iterations: iter, residual });
            }
            for (xi, yi) in x.iter_mut().zip(&y) {
                *xi = yi / norm;
            }

            // Rayleigh quotient of -Lap; x has unit Euclidean norm.
            self.laplacian_into(&x, &mut ax);
            let lambda = -dot(&x, &ax);
            residual = ax
                .iter()
                .zip(&x)
                .map(|(a, xi)| (a + lambda * xi).powi(2))
                .sum::<f64>()
                .sqrt();

            if (lambda - lambda_prev).abs() <= EIGEN_REL_TOL * lambda
                && residual <= EIGEN_RESIDUAL_TOL
            {
                return Ok(Eigenpair {
                    value: lambda,
                    vector: Field { values: x, tag: self.tag() },
                    iterations: iter,
                    residual,
                });
            }
            lambda_prev = lambda;
        }
        Err(Error::NoConvergence { iterations: EIGEN_MAX_ITER, residual })
    }

    /// Poincaré constant valid for the discrete norms on this grid:
    /// `|f|^2 <= C^2 |grad f|^2` for every interior field.
    pub fn discrete_poincare_constant(&self) -> Result<f64> {
        Ok(1.0 / self.first_eigenpair()?.value.sqrt())
    }

    /// Poincaré constant from a named source. [`PoincareSource::User`] has no
    /// value attached and is rejected here.
    pub fn poincare_constant(&self, source: PoincareSource) -> Result<f64> {
        match (source, self.shape) {
            (PoincareSource::Discrete, _) => self.discrete_poincare_constant(),
            (PoincareSource::DirichletClosedForm, Shape::Interval { length, .. }) => {
                Ok(length / PI)
            }
            (PoincareSource::DirichletClosedForm, Shape::Rectangle { a, b, .. }) => {
                Ok(1.0 / (PI * (1.0 / (a * a) + 1.0 / (b * b)).sqrt()))
            }
            (PoincareSource::Wirtinger, Shape::Interval { length, .. }) => {
                Ok(length / (2.0 * PI))
            }
            (PoincareSource::Wirtinger, Shape::Rectangle { a, b, .. }) => {
                Ok((a * a + b * b).sqrt() / PI)
            }
            (PoincareSource::User, _) => Err(Error::Config(
                "a user-supplied Poincare constant needs an explicit value".into(),
            )),
        }
    }

    fn solver(&self) -> Solver {
        if self.is_2d() {
            Solver::ConjugateGradient {
                r: vec![0.0; self.len()],
                p: vec![0.0; self.len()],
                ap: vec![0.0; self.len()],
            }
        } else {
            Solver::Tridiagonal { c: vec![0.0; self.len()] }
        }
    }
}

/// Linear solver for `-Lap y = x` used inside inverse iteration.
enum Solver {
    Tridiagonal { c: Vec<f64> },
    ConjugateGradient { r: Vec<f64>, p: Vec<f64>, ap: Vec<f64> },
}

impl Solver {
    fn solve(&mut self, grid: &Grid, rhs: &[f64], out: &mut [f64]) {
        match self {
            Solver::Tridiagonal { c } => {
                // (1/h^2) tridiag(-1, 2, -1), Thomas algorithm.
                let h2 = grid.dx * grid.dx;
                let n = rhs.len();
                let (sub, diag) = (-1.0, 2.0);
                c[0] = sub / diag;
                out[0] = rhs[0] * h2 / diag;
                for i in 1..n {
                    let m = diag - sub * c[i - 1];
                    c[i] = sub / m;
                    out[i] = (rhs[i] * h2 - sub * out[i - 1]) / m;
                }
                for i in (0..n - 1).rev() {
                    out[i] -= c[i] * out[i + 1];
                }
            }
            Solver::ConjugateGradient { r, p, ap } => {
                let n = rhs.len();
                out.iter_mut().for_each(|v| *v = 0.0);
                r.copy_from_slice(rhs);
                p.copy_from_slice(rhs);
                let mut rr = dot(r, r);
                let stop = 1e-28 * rr;
                for _ in 0..(10 * n).max(100) {
                    if rr <= stop {
                        break;
                    }
                    grid.laplacian_into(p, ap);
                    ap.iter_mut().for_each(|v| *v = -*v);
                    let step = rr / dot(p, ap);
                    for i in 0..n {
                        out[i] += step * p[i];
                        r[i] -= step * ap[i];
                    }
                    let rr_new = dot(r, r);
                    let beta = rr_new / rr;
                    for i in 0..n {
                        p[i] = r[i] + beta * p[i];
                    }
                    rr = rr_new;
                }
            }
        }
    }
}

/// Nodal values on the interior nodes of one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
    tag: GridTag,
}

impl Field {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn tag(&self) -> GridTag {
        self.tag
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Field {
        Field { values: self.values.iter().map(|v| v * factor).collect(), tag: self.tag }
    }

    /// `self - other`.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        if self.tag != other.tag {
            return Err(Error::ShapeMismatch { expected: self.len(), found: other.len() });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Field { values, tag: self.tag })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_extent(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("domain extent `{name}` must be positive, got {value}")))
    }
}

fn check_count(name: &str, value: usize) -> Result<()> {
    if value >= 2 {
        Ok(())
    } else {
        Err(Error::Config(format!("interior node count `{name}` must be at least 2, got {value}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sine(grid: &Grid) -> Field {
        grid.sample(|x, _| (PI * x).sin())
    }

    fn sine2(grid: &Grid) -> Field {
        grid.sample(|x, y| (PI * x).sin() * (PI * y).sin())
    }

    #[test]
    fn build_interval_and_rectangle() {
        let g = Grid::interval(1.0, 99).unwrap();
        assert_relative_eq!(g.dx(), 0.01, max_relative = 1e-15);
        assert_eq!(g.len(), 99);
        assert_relative_eq!(g.weight(), 0.01, max_relative = 1e-15);

        let r = Grid::rectangle(1.0, 1.0, 9, 9).unwrap();
        assert_eq!(r.len(), 81);
        assert_relative_eq!(r.weight(), 0.01, max_relative = 1e-15);
    }

    #[test]
    fn degenerate_domains_are_rejected() {
        assert!(matches!(Grid::interval(0.0, 10), Err(Error::Config(_))));
        assert!(matches!(Grid::interval(-1.0, 10), Err(Error::Config(_))));
        assert!(matches!(Grid::interval(1.0, 1), Err(Error::Config(_))));
        assert!(matches!(Grid::rectangle(1.0, 0.0, 4, 4), Err(Error::Config(_))));
        assert!(matches!(Grid::rectangle(1.0, 1.0, 4, 1), Err(Error::Config(_))));
    }

    #[test]
    fn l2_norm_of_sine_modes() {
        let g = Grid::interval(1.0, 999).unwrap();
        assert_eq!(g.l2_norm_sq(&g.zeros()).unwrap(), 0.0);
        assert!((g.l2_norm_sq(&sine(&g)).unwrap() - 0.5).abs() < 1e-4);

        let r = Grid::rectangle(1.0, 1.0, 99, 99).unwrap();
        assert!((r.l2_norm_sq(&sine2(&r)).unwrap() - 0.25).abs() < 1e-3);
    }

    #[test]
    fn h1_seminorm_of_sine() {
        let g = Grid::interval(1.0, 999).unwrap();
        assert_eq!(g.h1_seminorm_sq(&g.zeros()).unwrap(), 0.0);
        assert_relative_eq!(
            g.h1_seminorm_sq(&sine(&g)).unwrap(),
            PI * PI / 2.0,
            max_relative = 1e-3
        );
    }

    #[test]
    fn h1_seminorm_sees_boundary_edges() {
        // A field supported on a single node still has a nonzero gradient.
        let g = Grid::interval(1.0, 2).unwrap();
        let f = g.field(vec![1e-3, 0.0]).unwrap();
        assert!(g.h1_seminorm_sq(&f).unwrap() > 0.0);
        let f = g.field(vec![0.5, 0.5]).unwrap();
        assert!(g.h1_seminorm_sq(&f).unwrap() > 0.0);
    }

    #[test]
    fn inner_product_examples() {
        let g = Grid::interval(1.0, 999).unwrap();
        let f = sine(&g);
        let h = g.sample(|x, _| (2.0 * PI * x).sin());
        assert_eq!(g.inner_product(&f, &f).unwrap(), g.l2_norm_sq(&f).unwrap());
        assert_eq!(g.inner_product(&f, &g.zeros()).unwrap(), 0.0);
        assert!(g.inner_product(&f, &h).unwrap().abs() < 1e-6);
    }

    #[test]
    fn laplacian_of_eigenfunctions() {
        let g = Grid::interval(1.0, 999).unwrap();
        assert!(g.apply_laplacian(&g.zeros()).unwrap().values().iter().all(|&v| v == 0.0));
        let f = sine(&g);
        let lf = g.apply_laplacian(&f).unwrap();
        for (a, b) in lf.values().iter().zip(f.values()) {
            assert_relative_eq!(*a, -PI * PI * b, max_relative = 1e-4);
        }

        let r = Grid::rectangle(1.0, 1.0, 99, 99).unwrap();
        let f = sine2(&r);
        let lf = r.apply_laplacian(&f).unwrap();
        for (a, b) in lf.values().iter().zip(f.values()) {
            assert_relative_eq!(*a, -2.0 * PI * PI * b, max_relative = 1e-2);
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = Grid::interval(1.0, 10).unwrap();
        let other = Grid::interval(1.0, 11).unwrap();
        let f = other.zeros();
        assert!(matches!(g.l2_norm_sq(&f), Err(Error::ShapeMismatch { expected: 10, found: 11 })));
        assert!(matches!(g.apply_laplacian(&f), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(g.field(vec![0.0; 3]), Err(Error::ShapeMismatch { .. })));
        // Same node count on a different domain is still a different grid.
        let stretched = Grid::interval(2.0, 10).unwrap();
        assert!(g.h1_seminorm_sq(&stretched.zeros()).is_err());
    }

    #[test]
    fn discrete_poincare_constants() {
        // Closed form of the discrete first eigenvalue: (4/h^2) sin^2(pi h / 2L).
        let expected = |l: f64, n: usize| {
            let h = l / (n + 1) as f64;
            let lam = 4.0 / (h * h) * (PI * h / (2.0 * l)).sin().powi(2);
            1.0 / lam.sqrt()
        };
        let g = Grid::interval(1.0, 999).unwrap();
        let c = g.discrete_poincare_constant().unwrap();
        assert_relative_eq!(c, 1.0 / PI, max_relative = 1e-4);
        assert_relative_eq!(c, expected(1.0, 999), max_relative = 1e-9);

        let g = Grid::interval(2.0, 999).unwrap();
        assert_relative_eq!(g.discrete_poincare_constant().unwrap(), 2.0 / PI, max_relative = 1e-4);

        let r = Grid::rectangle(1.0, 1.0, 99, 99).unwrap();
        assert_relative_eq!(
            r.discrete_poincare_constant().unwrap(),
            1.0 / (PI * 2f64.sqrt()),
            max_relative = 1e-2
        );
    }

    #[test]
    fn eigenpair_residual_is_small() {
        for g in [Grid::interval(1.0, 199).unwrap(), Grid::rectangle(1.0, 2.0, 30, 40).unwrap()] {
            let pair = g.first_eigenpair().unwrap();
            let lf = g.apply_laplacian(&pair.vector).unwrap();
            let res: Field = g
                .field(
                    lf.values()
                        .iter()
                        .zip(pair.vector.values())
                        .map(|(a, f)| a + pair.value * f)
                        .collect(),
                )
                .unwrap();
            let ratio = (g.l2_norm_sq(&res).unwrap() / g.l2_norm_sq(&pair.vector).unwrap()).sqrt();
            assert!(ratio <= 1e-8, "residual ratio {ratio}");
        }
    }

    #[test]
    fn poincare_constant_decreases_with_refinement() {
        let mut prev = f64::INFINITY;
        for n in [2, 5, 10, 50, 200, 1000] {
            let c = Grid::interval(1.0, n).unwrap().discrete_poincare_constant().unwrap();
            assert!(c < prev, "n = {n}: {c} !< {prev}");
            prev = c;
        }
        assert!((prev - 1.0 / PI).abs() / (1.0 / PI) < 0.01);
    }

    #[test]
    fn named_poincare_sources() {
        let g = Grid::interval(1.0, 50).unwrap();
        assert_relative_eq!(
            g.poincare_constant(PoincareSource::DirichletClosedForm).unwrap(),
            1.0 / PI
        );
        assert_relative_eq!(
            g.poincare_constant(PoincareSource::Wirtinger).unwrap(),
            0.5 / PI
        );
        assert!(g.poincare_constant(PoincareSource::User).is_err());
        // The discrete constant dominates the continuous one.
        assert!(g.poincare_constant(PoincareSource::Discrete).unwrap() > 1.0 / PI);
        assert_eq!("dirichlet".parse::<PoincareSource>().unwrap(), PoincareSource::DirichletClosedForm);
    }

    #[test]
    fn max_eigenvalue_matches_bound() {
        let g = Grid::interval(1.0, 99).unwrap();
        let lam = g.max_eigenvalue();
        assert!(lam <= 4.0 / (g.dx() * g.dx()));
        assert!(lam > 0.99 * 4.0 / (g.dx() * g.dx()));
    }
}
