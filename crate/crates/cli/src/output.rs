//! On-disk formats of a run directory.
//!
//! `series.csv` and `events.csv` print every float with 17 significant
//! digits so that values survive a write/read cycle bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use wavetrig_core::design::StabilityCertificate;
use wavetrig_core::lyapunov::{RunEcho, TimeSeries};
use wavetrig_core::trigger::{DwellStats, EventLog, TriggerInvariantReport};
use wavetrig_core::lyapunov::{EnvelopeReport, EquivalenceReport, MonotonicityReport, VdotReport};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const CERTIFICATE_FILE: &str = "certificate.json";
pub const SERIES_FILE: &str = "series.csv";
pub const EVENTS_FILE: &str = "events.csv";
pub const SUMMARY_FILE: &str = "summary.json";

const BASE_COLUMNS: [&str; 6] = ["t", "E", "V", "norm_z_sq", "norm_v_sq", "norm_gradz_sq"];
const EVENT_COLUMNS: [&str; 4] = ["norm_e_sq", "eta0", "trigger_value", "event"];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        other => CliError::Data(format!("{}: {other:?}", path.display())),
    }
}

/// Writes the per-step series. Without event columns (uncontrolled runs)
/// the deviation, threshold, predicate and event flag are omitted.
pub fn write_series(path: &Path, s: &TimeSeries, event_columns: bool) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    let mut header: Vec<&str> = BASE_COLUMNS.to_vec();
    if event_columns {
        header.extend(EVENT_COLUMNS);
    }
    let err = |e| csv_error(path, e);
    w.write_record(&header).map_err(err)?;
    let mut row = Vec::with_capacity(header.len());
    for i in 0..s.len() {
        row.clear();
        row.extend(
            [s.t[i], s.energy[i], s.lyapunov[i], s.norm_z_sq[i], s.norm_v_sq[i], s.norm_gradz_sq[i]]
                .map(num),
        );
        if event_columns {
            row.extend([s.norm_e_sq[i], s.eta0[i], s.trigger_value[i]].map(num));
            row.push(if s.event[i] { "1" } else { "0" }.to_string());
        }
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Reads a series written by [`write_series`]. Missing event columns read
/// as zeros, with only the initial row flagged as an event.
pub fn read_series(path: &Path) -> CliResult<TimeSeries> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    let names: Vec<&str> = header.iter().collect();
    let event_columns = match names.len() {
        6 => false,
        10 => true,
        _ => return Err(CliError::Data(format!("{}: unexpected header {names:?}", path.display()))),
    };
    let expected: Vec<&str> = BASE_COLUMNS.iter().chain(EVENT_COLUMNS.iter()).copied().take(names.len()).collect();
    if names != expected {
        return Err(CliError::Data(format!("{}: unexpected header {names:?}", path.display())));
    }

    let mut s = TimeSeries::default();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let field = |j: usize| -> CliResult<f64> {
            let raw = rec.get(j).unwrap_or("");
            raw.trim().parse::<f64>().map_err(|_| {
                CliError::Data(format!("{}: row {}: bad value {raw:?} in column {}", path.display(), line + 2, names[j]))
            })
        };
        s.t.push(field(0)?);
        s.energy.push(field(1)?);
        s.lyapunov.push(field(2)?);
        s.norm_z_sq.push(field(3)?);
        s.norm_v_sq.push(field(4)?);
        s.norm_gradz_sq.push(field(5)?);
        if event_columns {
            s.norm_e_sq.push(field(6)?);
            s.eta0.push(field(7)?);
            s.trigger_value.push(field(8)?);
            s.event.push(match rec.get(9) {
                Some("1") => true,
                Some("0") => false,
                other => {
                    return Err(CliError::Data(format!(
                        "{}: row {}: bad event flag {other:?}",
                        path.display(),
                        line + 2
                    )))
                }
            });
        } else {
            s.norm_e_sq.push(0.0);
            s.eta0.push(0.0);
            s.trigger_value.push(0.0);
            s.event.push(line == 0);
        }
    }
    if s.is_empty() {
        return Err(CliError::Data(format!("{}: no rows", path.display())));
    }
    Ok(s)
}

/// `k,t_k,dwell`, where `dwell = t_{k+1} - t_k` and is left empty for the
/// last event.
pub fn write_events(path: &Path, log: &EventLog) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    let err = |e| csv_error(path, e);
    w.write_record(["k", "t_k", "dwell"]).map_err(err)?;
    let entries = log.entries();
    for (i, e) in entries.iter().enumerate() {
        let dwell = entries.get(i + 1).map(|n| num(n.t - e.t)).unwrap_or_default();
        w.write_record([e.k.to_string(), num(e.t), dwell]).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Data(e.to_string()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::Data(format!("{} is missing", path.display())),
        _ => CliError::io(path, e),
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

/// Reports of the checks applicable to a run's mode; absent ones are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckSuite {
    pub equivalence: Option<EquivalenceReport>,
    pub vdot: Option<VdotReport>,
    pub envelope: Option<EnvelopeReport>,
    pub zeno: Option<DwellStats>,
    pub trigger_invariant: Option<TriggerInvariantReport>,
    pub energy_monotone: Option<MonotonicityReport>,
    pub energy_drift: Option<f64>,
    pub verdicts: Vec<Verdict>,
}

impl CheckSuite {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub config: RunConfig,
    pub run: RunEcho,
    pub c_omega: f64,
    pub certificate: StabilityCertificate,
    pub event_count: usize,
    pub step_count: usize,
    /// Control updates per integration step (the initial sample included).
    pub update_ratio: f64,
    pub delta_emp: Option<f64>,
    pub checks: CheckSuite,
    pub wall_clock_seconds: f64,
}

/// The parts of `summary.json` that `verify` needs.
#[derive(Debug, Clone, Deserialize)]
pub struct SummaryHead {
    pub run: RunEcho,
    pub certificate: StabilityCertificate,
}
