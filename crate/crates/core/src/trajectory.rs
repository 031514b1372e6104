//! Ingestion of NGSIM-style trajectory records into uniformly sampled
//! velocity traces.
//!
//! NGSIM publishes one row per vehicle per frame at 10 Hz. Only the vehicle
//! id, frame id and speed are kept; everything else in the row is ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Frame period of the NGSIM recordings, in seconds.
pub const FRAME_PERIOD: f64 = 0.1;

/// Feet per second to metres per second.
pub const FEET_TO_METERS: f64 = 0.3048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub vehicle_id: i64,
    pub frame_id: i64,
    /// Velocity in m/s (already multiplied by the configured unit scale).
    pub velocity: f64,
}

/// A uniformly sampled velocity series for one vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub vehicle_id: i64,
    pub sample_period: f64,
    pub samples: Vec<f64>,
}

impl Trajectory {
    pub fn new(vehicle_id: i64, sample_period: f64, samples: Vec<f64>) -> Result<Self> {
        if !(sample_period > 0.0 && sample_period.is_finite()) {
            return Err(Error::InvalidPeriod {
                period: sample_period,
                sample_period,
            });
        }
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(&bad) = samples.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::NonFiniteInput(bad));
        }
        Ok(Self {
            vehicle_id,
            sample_period,
            samples,
        })
    }

    /// Build a 10 Hz trajectory from in-memory samples.
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        Self::new(0, FRAME_PERIOD, samples)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.sample_period * (self.samples.len().saturating_sub(1)) as f64
    }

    /// Two-column CSV export: `t_seconds,velocity_mps`, six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_seconds,velocity_mps\n");
        for (k, v) in self.samples.iter().enumerate() {
            let t = k as f64 * self.sample_period;
            let _ = writeln!(out, "{t:.6},{v:.6}");
        }
        out
    }

    /// Inverse of [`Trajectory::to_csv`]. The sample period is taken from the
    /// first two time stamps (0.1 s when only one row is present).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut times = Vec::new();
        let mut samples = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if idx == 0 && line.starts_with("t_seconds") {
                continue;
            }
            let mut cells = line.split(',');
            let (Some(t), Some(v), None) = (cells.next(), cells.next(), cells.next()) else {
                return Err(Error::MalformedRow {
                    line: idx + 1,
                    reason: "expected two columns".into(),
                });
            };
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|_| Error::MalformedRow {
                    line: idx + 1,
                    reason: format!("non-numeric cell '{s}'"),
                })
            };
            times.push(parse(t)?);
            samples.push(parse(v)?);
        }
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        let period = if times.len() >= 2 {
            // Six-decimal timestamps: snap the period back to a clean value.
            ((times[1] - times[0]) * 1e6).round() / 1e6
        } else {
            FRAME_PERIOD
        };
        Self::new(0, period, samples)
    }
}

/// Column positions of the retained fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub vehicle_id: usize,
    pub frame_id: usize,
    pub velocity: usize,
}

impl ColumnMap {
    /// Layout of the public NGSIM US-101 / I-80 trajectory files.
    pub const NGSIM: ColumnMap = ColumnMap {
        vehicle_id: 0,
        frame_id: 1,
        velocity: 11,
    };

    fn max_index(&self) -> usize {
        self.vehicle_id.max(self.frame_id).max(self.velocity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeaderMode {
    /// Treat the first row as a header if its mapped cells are not numeric.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub column_map: ColumnMap,
    /// Multiplier converting raw speeds to m/s.
    pub unit_scale: f64,
    /// Frame gaps larger than this split a vehicle's run into separate trajectories.
    pub max_gap_frames: i64,
    pub delimiter: char,
    pub header: HeaderMode,
    /// Abort on the first malformed row instead of skipping it.
    pub strict: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            column_map: ColumnMap::NGSIM,
            unit_scale: FEET_TO_METERS,
            max_gap_frames: 1,
            delimiter: ',',
            header: HeaderMode::Auto,
            strict: false,
        }
    }
}

impl IngestConfig {
    pub fn validate(&self) -> Result<()> {
        let m = self.column_map;
        if m.vehicle_id == m.frame_id || m.vehicle_id == m.velocity || m.frame_id == m.velocity {
            return Err(Error::InvalidConfig("column indices must be distinct".into()));
        }
        if !(self.unit_scale > 0.0 && self.unit_scale.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "unit_scale must be positive, got {}",
                self.unit_scale
            )));
        }
        if self.max_gap_frames < 1 {
            return Err(Error::InvalidConfig("max_gap_frames must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parsed rows together with the rows that were skipped in lenient mode.
#[derive(Debug, Clone, Default)]
pub struct ParsedRecords {
    pub records: Vec<TrajectoryRecord>,
    pub skipped: Vec<Error>,
}

/// Parse delimiter-separated text into records, preserving row order.
pub fn parse_records(raw_text: &str, config: &IngestConfig) -> Result<Vec<TrajectoryRecord>> {
    parse_records_reporting(raw_text, config).map(|p| p.records)
}

/// Like [`parse_records`], but also returns the diagnostics for rows that were
/// skipped when `strict` is off.
pub fn parse_records_reporting(raw_text: &str, config: &IngestConfig) -> Result<ParsedRecords> {
    config.validate()?;
    let map = config.column_map;
    let mut out = ParsedRecords::default();
    let mut first_data_line = true;

    for (idx, line) in raw_text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(config.delimiter).map(str::trim).collect();
        let is_first = std::mem::replace(&mut first_data_line, false);
        if is_first {
            let skip = match config.header {
                HeaderMode::Present => true,
                HeaderMode::Absent => false,
                HeaderMode::Auto => !looks_numeric(&cells, &map),
            };
            if skip {
                continue;
            }
        }

        match parse_row(&cells, &map, config.unit_scale, line_no) {
            Ok(rec) => out.records.push(rec),
            Err(e) if config.strict => return Err(e),
            Err(e) => out.skipped.push(e),
        }
    }

    if out.records.is_empty() {
        // Every row was skipped: surface the first reason rather than a bare EmptyInput.
        return Err(out.skipped.into_iter().next().unwrap_or(Error::EmptyInput));
    }
    Ok(out)
}

fn looks_numeric(cells: &[&str], map: &ColumnMap) -> bool {
    [map.vehicle_id, map.frame_id, map.velocity]
        .iter()
        .all(|&i| cells.get(i).is_some_and(|c| c.parse::<f64>().is_ok()))
}

fn parse_row(cells: &[&str], map: &ColumnMap, scale: f64, line: usize) -> Result<TrajectoryRecord> {
    if cells.len() <= map.max_index() {
        return Err(Error::MalformedRow {
            line,
            reason: format!(
                "expected at least {} fields, found {}",
                map.max_index() + 1,
                cells.len()
            ),
        });
    }
    let bad = |what: &str, cell: &str| Error::MalformedRow {
        line,
        reason: format!("non-numeric {what} '{cell}'"),
    };
    let vehicle_id = parse_int(cells[map.vehicle_id]).ok_or_else(|| bad("vehicle id", cells[map.vehicle_id]))?;
    let frame_id = parse_int(cells[map.frame_id]).ok_or_else(|| bad("frame id", cells[map.frame_id]))?;
    let raw: f64 = cells[map.velocity]
        .parse()
        .map_err(|_| bad("velocity", cells[map.velocity]))?;
    let velocity = raw * scale;
    if !velocity.is_finite() || velocity < 0.0 {
        return Err(Error::MalformedRow {
            line,
            reason: format!("velocity {raw} is negative or non-finite"),
        });
    }
    Ok(TrajectoryRecord {
        vehicle_id,
        frame_id,
        velocity,
    })
}

// Some exports write integer ids as "13.0".
fn parse_int(cell: &str) -> Option<i64> {
    if let Ok(v) = cell.parse::<i64>() {
        return Some(v);
    }
    let f: f64 = cell.parse().ok()?;
    (f.fract() == 0.0 && f.abs() < 9.0e15).then_some(f as i64)
}

/// Distinct vehicle ids in order of first appearance.
pub fn vehicle_ids(records: &[TrajectoryRecord]) -> Vec<i64> {
    let mut seen = std::collections::BTreeSet::new();
    records
        .iter()
        .filter(|r| seen.insert(r.vehicle_id))
        .map(|r| r.vehicle_id)
        .collect()
}

/// Collect one vehicle's records into trajectories, splitting at frame gaps
/// larger than `config.max_gap_frames`.
pub fn extract_trajectory(
    records: &[TrajectoryRecord],
    vehicle_id: i64,
    config: &IngestConfig,
) -> Result<Vec<Trajectory>> {
    config.validate()?;
    let mut frames: BTreeMap<i64, f64> = BTreeMap::new();
    for r in records.iter().filter(|r| r.vehicle_id == vehicle_id) {
        if frames.insert(r.frame_id, r.velocity).is_some() {
            return Err(Error::DuplicateFrame {
                vehicle: vehicle_id,
                frame: r.frame_id,
            });
        }
    }
    if frames.is_empty() {
        return Err(Error::UnknownVehicle(vehicle_id));
    }

    let mut runs: Vec<Vec<(i64, f64)>> = Vec::new();
    let mut prev: Option<i64> = None;
    for (&frame, &v) in &frames {
        match prev {
            Some(p) if frame - p <= config.max_gap_frames => {
                runs.last_mut().expect("run started").push((frame, v))
            }
            _ => runs.push(vec![(frame, v)]),
        }
        prev = Some(frame);
    }

    runs.into_iter()
        .map(|run| {
            let stride = run
                .windows(2)
                .map(|w| w[1].0 - w[0].0)
                .min()
                .unwrap_or(1);
            let samples = run.into_iter().map(|(_, v)| v).collect();
            Trajectory::new(vehicle_id, FRAME_PERIOD * stride as f64, samples)
        })
        .collect()
}

/// Decimate to the integer stride nearest `period / sample_period`, keeping
/// the first sample.
pub fn resample_uniform(trajectory: &Trajectory, period: f64) -> Result<Trajectory> {
    let sp = trajectory.sample_period;
    let invalid = || Error::InvalidPeriod {
        period,
        sample_period: sp,
    };
    if !(period > 0.0 && period.is_finite()) || period < sp * (1.0 - 1e-9) {
        return Err(invalid());
    }
    let stride = ((period / sp).round() as usize).max(1);
    let samples = trajectory.samples.iter().step_by(stride).copied().collect();
    Ok(Trajectory {
        vehicle_id: trajectory.vehicle_id,
        sample_period: sp * stride as f64,
        samples,
    })
}
