//! CSV readers for drive logs and command schedules, and CSV writers for
//! model plots.

use serde::Serialize;

use crate::config::{SpeedUnit, KMH_PER_MPS};
use crate::dynamics::{Controls, StepSchedule};
use crate::error::{Error, Result};
use crate::spline::{ForceModel, ModelFile};
use crate::vehicle::{DriveLog, DriveSample, LogMetadata, Signal, SignalRange};

/// A data row dropped during ingest, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub log: DriveLog,
    pub rejected: Vec<Rejection>,
}

fn reader(input: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input.as_bytes())
}

fn column(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers
        .iter()
        .position(|h| names.iter().any(|n| h.eq_ignore_ascii_case(n)))
}

fn required(headers: &csv::StringRecord, names: &[&str]) -> Result<usize> {
    column(headers, names).ok_or_else(|| Error::MissingColumn(names[0].to_string()))
}

fn field(record: &csv::StringRecord, idx: usize, name: &str) -> std::result::Result<f64, String> {
    let raw = record.get(idx).ok_or_else(|| format!("missing {name}"))?;
    let v: f64 = raw
        .parse()
        .map_err(|_| format!("{name} `{raw}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("{name} is not finite"));
    }
    Ok(v)
}

fn signal(
    record: &csv::StringRecord,
    idx: usize,
    which: Signal,
    range: SignalRange,
) -> std::result::Result<i32, String> {
    let v = field(record, idx, &which.to_string())?;
    if v.fract() != 0.0 {
        return Err(format!("{which} {v} is not an integer"));
    }
    if v < range.min as f64 || v > range.max as f64 {
        return Err(format!(
            "{which} {v} outside [{}, {}]",
            range.min, range.max
        ));
    }
    Ok(v as i32)
}

/// Parses telemetry with header-named columns `t`, `speed`, `throttle`,
/// `brake` and optionally `slope` (rad, 0 when absent).
///
/// Rows with unparsable or non-finite values, negative speed, or command
/// signals that are fractional or outside their ranges are rejected and
/// reported. Accepted rows must have strictly increasing time.
pub fn parse_drive_csv(
    input: &str,
    units: SpeedUnit,
    throttle_range: SignalRange,
    brake_range: SignalRange,
    metadata: LogMetadata,
) -> Result<Ingested> {
    let mut rdr = reader(input);
    let headers = rdr.headers()?.clone();
    let t_col = required(&headers, &["t", "t_s", "time"])?;
    let v_col = required(&headers, &["speed", "speed_mps", "speed_kmh", "v"])?;
    let th_col = required(&headers, &["throttle"])?;
    let br_col = required(&headers, &["brake"])?;
    let sl_col = column(&headers, &["slope", "slope_rad"]);

    let mut samples: Vec<DriveSample> = Vec::new();
    let mut rejected = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let row = (|| -> std::result::Result<DriveSample, String> {
            let t = field(&record, t_col, "t")?;
            let speed = units.to_mps(field(&record, v_col, "speed")?);
            if speed < 0.0 {
                return Err(format!("negative speed {speed}"));
            }
            let slope = match sl_col {
                Some(i) => field(&record, i, "slope")?,
                None => 0.0,
            };
            Ok(DriveSample {
                t,
                speed,
                throttle: signal(&record, th_col, Signal::Throttle, throttle_range)?,
                brake: signal(&record, br_col, Signal::Brake, brake_range)?,
                slope,
            })
        })();
        match row {
            Ok(s) => {
                if samples.last().is_some_and(|p| !(s.t > p.t)) {
                    return Err(Error::NonMonotoneTime {
                        line: line as usize,
                    });
                }
                samples.push(s);
            }
            Err(reason) => rejected.push(Rejection { line, reason }),
        }
    }
    Ok(Ingested {
        log: DriveLog::new(samples, metadata)?,
        rejected,
    })
}

/// Parses a step-hold schedule with columns `t_s`, `throttle`, `brake` and
/// optionally `slope_rad`.
pub fn parse_schedule_csv(input: &str) -> Result<StepSchedule> {
    let mut rdr = reader(input);
    let headers = rdr.headers()?.clone();
    let t_col = required(&headers, &["t_s", "t"])?;
    let th_col = required(&headers, &["throttle"])?;
    let br_col = required(&headers, &["brake"])?;
    let sl_col = column(&headers, &["slope_rad", "slope"]);

    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let get = |idx: usize, name: &str| {
            field(&record, idx, name).map_err(|e| Error::Schema(format!("line {line}: {e}")))
        };
        let controls = Controls {
            throttle: get(th_col, "throttle")?,
            brake: get(br_col, "brake")?,
            slope: match sl_col {
                Some(i) => get(i, "slope")?,
                None => 0.0,
            },
        };
        if controls.throttle < 0.0 || controls.brake < 0.0 {
            return Err(Error::Schema(format!("line {line}: negative command")));
        }
        rows.push((get(t_col, "t_s")?, controls));
    }
    StepSchedule::new(rows)
}

/// Speed grid for plot export, in km/h.
pub fn plot_grid_kmh(points: usize, min_kmh: f64, max_kmh: f64, log_axes: bool) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min_kmh],
        n => (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                if log_axes {
                    (min_kmh.ln() + f * (max_kmh.ln() - min_kmh.ln())).exp()
                } else {
                    min_kmh + f * (max_kmh - min_kmh)
                }
            })
            .collect(),
    }
}

/// Rows `speed_kmh,force_N,level` sampled on `grid_kmh`. The level column
/// is empty for friction. Values print with shortest round-trip formatting.
pub fn plot_csv(model: &ModelFile, grid_kmh: &[f64], level: Option<i32>) -> Result<String> {
    let mut out = String::from("speed_kmh,force_N,level\n");
    match &model.model {
        ForceModel::Curve(_) if level.is_some() => {
            return Err(Error::UnknownLevel {
                requested: level.unwrap_or_default(),
                available: Vec::new(),
            });
        }
        ForceModel::Curve(c) => {
            for &x in grid_kmh {
                out.push_str(&format!("{x},{},\n", c.eval(x / KMH_PER_MPS)));
            }
        }
        ForceModel::Surface(s) => {
            let levels: Vec<i32> = match level {
                Some(l) if s.curve(l).is_some() => vec![l],
                Some(l) => {
                    return Err(Error::UnknownLevel {
                        requested: l,
                        available: s.levels().to_vec(),
                    })
                }
                None => s.levels().to_vec(),
            };
            for l in levels {
                let c = s.curve(l).expect("level present");
                for &x in grid_kmh {
                    out.push_str(&format!("{x},{},{l}\n", c.eval(x / KMH_PER_MPS)));
                }
            }
        }
    }
    Ok(out)
}
