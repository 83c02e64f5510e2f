//! Run configuration: a TOML file plus command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use wavetrig_core::dynamics::ControlMode;
use wavetrig_core::grid::{Field, Grid, PoincareSource, Shape};
use wavetrig_core::trigger::Eta0Variant;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub domain: Shape,
    pub alpha: f64,
    pub mode: ModeSpec,
    pub initial: InitialData,
    pub time: TimeSpec,
    pub design: DesignSpec,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: Shape::Interval { length: 1.0, n: 199 },
            alpha: 1.0,
            mode: ModeSpec::EventTriggered,
            initial: InitialData::default(),
            time: TimeSpec::default(),
            design: DesignSpec::default(),
            out: PathBuf::from("wavetrig-run"),
        }
    }
}

/// Like [`ControlMode`], except that the sampling period may be left open;
/// it is then taken from a matched event-triggered run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModeSpec {
    EventTriggered,
    ContinuousDamping,
    Periodic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        period: Option<f64>,
    },
    Uncontrolled,
}

impl ModeSpec {
    /// The concrete mode, or `None` for a periodic mode without a period.
    pub fn resolved(self) -> Option<ControlMode> {
        Some(match self {
            Self::EventTriggered => ControlMode::EventTriggered,
            Self::ContinuousDamping => ControlMode::ContinuousDamping,
            Self::Periodic { period: Some(period) } => ControlMode::Periodic { period },
            Self::Periodic { period: None } => return None,
            Self::Uncontrolled => ControlMode::Uncontrolled,
        })
    }
}

impl FromStr for ModeSpec {
    type Err = String;

    /// Accepts `event-triggered`, `continuous-damping`, `uncontrolled`,
    /// `periodic` and `periodic:<period>`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "event-triggered" | "et" => Ok(Self::EventTriggered),
            "continuous-damping" | "continuous" => Ok(Self::ContinuousDamping),
            "uncontrolled" => Ok(Self::Uncontrolled),
            "periodic" => Ok(Self::Periodic { period: None }),
            _ => match s.strip_prefix("periodic:") {
                Some(p) => p
                    .parse()
                    .map(|p| Self::Periodic { period: Some(p) })
                    .map_err(|_| format!("bad sampling period in {s:?}")),
                None => Err(format!("unknown mode {s:?}")),
            },
        }
    }
}

impl fmt::Display for ModeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EventTriggered => f.write_str("event-triggered"),
            Self::ContinuousDamping => f.write_str("continuous-damping"),
            Self::Periodic { period: None } => f.write_str("periodic"),
            Self::Periodic { period: Some(p) } => write!(f, "periodic:{p}"),
            Self::Uncontrolled => f.write_str("uncontrolled"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialData {
    /// Initial displacement.
    pub z0: FieldSpec,
    /// Initial velocity.
    pub z1: FieldSpec,
}

impl Default for InitialData {
    fn default() -> Self {
        Self { z0: FieldSpec::Sine { k: 1, ky: None, amplitude: 1.0 }, z1: FieldSpec::Zero }
    }
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn quarter() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Zero,
    /// `amplitude * sin(k pi x / a) * sin(ky pi y / b)`; `ky` defaults to `k`.
    Sine {
        k: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ky: Option<u32>,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude * exp(1 - 1 / (1 - r^2))` for `r < 1`, where `r` is the
    /// distance to the centre divided by the radius. Centre and radius are
    /// fractions of the domain extent.
    Bump {
        #[serde(default = "half")]
        center: f64,
        #[serde(default = "quarter")]
        radius: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Whitespace- or comma-separated nodal values, row-major in `x`.
    File { path: PathBuf },
}

impl FieldSpec {
    pub fn build(&self, grid: &Grid) -> CliResult<Field> {
        let (a, b) = extents(grid.shape());
        match *self {
            Self::Zero => Ok(grid.zeros()),
            Self::Sine { k, ky, amplitude } => {
                let kx = f64::from(k) * std::f64::consts::PI / a;
                let ky = f64::from(ky.unwrap_or(k)) * std::f64::consts::PI / b;
                let two_d = grid.is_2d();
                Ok(grid.sample(|x, y| {
                    let s = amplitude * (kx * x).sin();
                    if two_d { s * (ky * y).sin() } else { s }
                }))
            }
            Self::Bump { center, radius, amplitude } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(CliError::Usage(format!("bump radius must be positive, got {radius}")));
                }
                let two_d = grid.is_2d();
                Ok(grid.sample(|x, y| {
                    let dx = (x / a - center) / radius;
                    let dy = if two_d { (y / b - center) / radius } else { 0.0 };
                    let r2 = dx * dx + dy * dy;
                    if r2 < 1.0 { amplitude * (1.0 - 1.0 / (1.0 - r2)).exp() } else { 0.0 }
                }))
            }
            Self::File { ref path } => {
                let values = read_nodal_values(path)?;
                grid.field(values).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
            }
        }
    }
}

fn extents(shape: Shape) -> (f64, f64) {
    match shape {
        Shape::Interval { length, .. } => (length, 1.0),
        Shape::Rectangle { a, b, .. } => (a, b),
    }
}

fn read_nodal_values(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Data(format!("{}: not a number: {s:?}", path.display())))
        })
        .collect()
}

/// Exactly one of `dt` and `cfl_fraction` may be given; with neither the step
/// is half the smallest grid spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cfl_fraction: Option<f64>,
    pub t_end: f64,
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self { dt: None, cfl_fraction: None, t_end: 40.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignSpec {
    pub s_gamma0: f64,
    pub s_gamma1: f64,
    pub theta_margin: f64,
    pub comega_source: PoincareSource,
    /// Required when `comega_source = "user"`; ignored otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comega: Option<f64>,
    pub eta0_variant: Eta0Variant,
}

impl Default for DesignSpec {
    fn default() -> Self {
        Self {
            s_gamma0: 0.5,
            s_gamma1: 0.5,
            theta_margin: 1.5,
            comega_source: PoincareSource::Discrete,
            comega: None,
            eta0_variant: Eta0Variant::V0,
        }
    }
}

/// Command-line overrides, applied on top of the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub length: Option<f64>,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub mode: Option<ModeSpec>,
    pub eta0_variant: Option<Eta0Variant>,
    pub comega_source: Option<PoincareSource>,
    pub comega: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Reads a config file; `None` gives the defaults.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(alpha) = o.alpha {
            self.alpha = alpha;
        }
        if let Some(l) = o.length {
            self.domain = self.domain.with_length(l);
        }
        if let Some(n) = o.n {
            self.domain = match self.domain {
                Shape::Interval { length, .. } => Shape::Interval { length, n },
                Shape::Rectangle { a, b, .. } => Shape::Rectangle { a, b, nx: n, ny: n },
            };
        }
        if let Some(dt) = o.dt {
            self.time.dt = Some(dt);
            self.time.cfl_fraction = None;
        }
        if let Some(t) = o.t_end {
            self.time.t_end = t;
        }
        if let Some(m) = o.mode {
            self.mode = m;
        }
        if let Some(v) = o.eta0_variant {
            self.design.eta0_variant = v;
        }
        if let Some(s) = o.comega_source {
            self.design.comega_source = s;
        }
        if let Some(c) = o.comega {
            self.design.comega = Some(c);
            self.design.comega_source = PoincareSource::User;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
    }
}

/// Length rescaling used by overrides and sweeps: an interval takes the new
/// length, a rectangle takes it as its `a` side and keeps its aspect ratio.
pub trait WithLength {
    fn with_length(self, length: f64) -> Self;
}

impl WithLength for Shape {
    fn with_length(self, length: f64) -> Self {
        match self {
            Shape::Interval { n, .. } => Shape::Interval { length, n },
            Shape::Rectangle { a, b, nx, ny } => Shape::Rectangle { a: length, b: b * length / a, nx, ny },
        }
    }
}
