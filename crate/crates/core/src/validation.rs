//! Comparison of model-predicted and measured acceleration over drive logs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dynamics::{direct_acceleration, resolve_standstill, ModelSet};
use crate::error::{Error, Result};
use crate::estimation::AccelSeries;
use crate::vehicle::DriveLog;

/// Default histogram bin width in m/s².
pub const DEFAULT_HIST_BIN: f64 = 0.1;

/// Running error statistics. Two accumulators over disjoint samples merge
/// into the accumulator over their union.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStats {
    count: usize,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
    distance: f64,
    bin_width: f64,
    histogram: BTreeMap<i64, usize>,
}

impl ErrorStats {
    pub fn new(bin_width: f64) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "histogram bin width must be > 0, got {bin_width}"
            )));
        }
        Ok(ErrorStats {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            distance: 0.0,
            bin_width,
            histogram: BTreeMap::new(),
        })
    }

    pub fn push(&mut self, error: f64) {
        self.count += 1;
        let delta = error - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (error - self.mean);
        self.min = self.min.min(error);
        self.max = self.max.max(error);
        *self
            .histogram
            .entry((error / self.bin_width).round() as i64)
            .or_default() += 1;
    }

    pub fn add_distance(&mut self, metres: f64) {
        self.distance += metres;
    }

    pub fn merge(&mut self, other: &ErrorStats) -> Result<()> {
        if other.bin_width != self.bin_width {
            return Err(Error::InvalidParameter(
                "cannot merge statistics with different bin widths".into(),
            ));
        }
        if other.count > 0 {
            let n = self.count + other.count;
            let delta = other.mean - self.mean;
            self.mean += delta * other.count as f64 / n as f64;
            self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n as f64;
            self.count = n;
            self.min = self.min.min(other.min);
            self.max = self.max.max(other.max);
            for (k, c) in &other.histogram {
                *self.histogram.entry(*k).or_default() += c;
            }
        }
        self.distance += other.distance;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn report(&self) -> Result<ErrorReport> {
        if self.count == 0 {
            return Err(Error::EmptyReport);
        }
        let histogram = match (
            self.histogram.keys().next(),
            self.histogram.keys().next_back(),
        ) {
            (Some(&lo), Some(&hi)) => (lo..=hi)
                .map(|k| HistogramBin {
                    center: k as f64 * self.bin_width,
                    count: self.histogram.get(&k).copied().unwrap_or(0),
                })
                .collect(),
            _ => Vec::new(),
        };
        Ok(ErrorReport {
            mean: self.mean,
            std_dev: (self.m2 / self.count as f64).max(0.0).sqrt(),
            min: self.min,
            max: self.max,
            count: self.count,
            total_distance: self.distance,
            bin_width: self.bin_width,
            histogram,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub center: f64,
    pub count: usize,
}

/// Summary of `a_measured - a_model` over the compared samples, in m/s².
/// Standard deviation is the population value; distance is in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub total_distance: f64,
    pub bin_width: f64,
    pub histogram: Vec<HistogramBin>,
}

impl ErrorReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let rows = [
            ("Average [m/s^2]", format!("{:.4}", self.mean)),
            ("Std. deviation [m/s^2]", format!("{:.4}", self.std_dev)),
            ("Minimum [m/s^2]", format!("{:.4}", self.min)),
            ("Maximum [m/s^2]", format!("{:.4}", self.max)),
            ("Number of measurements", self.count.to_string()),
            (
                "Total distance [km]",
                format!("{:.3}", self.total_distance / 1000.0),
            ),
        ];
        for (name, value) in rows {
            let _ = writeln!(out, "{name:<24}{value:>14}");
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialize")
    }
}

/// Accumulates `a_measured - a_model` for one log. Samples without a valid
/// measurement, or marked in `exclude`, are skipped. Distance integrates
/// the measured speed with the trapezoid rule inside each segment.
pub fn accumulate(
    stats: &mut ErrorStats,
    models: &ModelSet,
    log: &DriveLog,
    measured: &AccelSeries,
    exclude: Option<&[bool]>,
) -> Result<()> {
    if measured.len() != log.len() {
        return Err(Error::InvalidParameter(format!(
            "acceleration series has {} samples, log has {}",
            measured.len(),
            log.len()
        )));
    }
    if let Some(mask) = exclude {
        if mask.len() != log.len() {
            return Err(Error::InvalidParameter(format!(
                "exclusion mask has {} entries, log has {}",
                mask.len(),
                log.len()
            )));
        }
    }
    let samples = log.samples();
    for seg in log.segments() {
        for w in samples[seg.clone()].windows(2) {
            stats.add_distance(0.5 * (w[0].speed + w[1].speed) * (w[1].t - w[0].t));
        }
    }
    for (i, s) in samples.iter().enumerate() {
        if exclude.is_some_and(|m| m[i]) {
            continue;
        }
        let Some(a_meas) = measured.get(i) else {
            continue;
        };
        let out = direct_acceleration(models, s.speed, s.throttle as f64, s.brake as f64, s.slope);
        stats.push(a_meas - resolve_standstill(s.speed, out.accel));
    }
    Ok(())
}

/// Error report over a set of logs with their measured accelerations.
pub fn validate(
    models: &ModelSet,
    runs: &[(&DriveLog, &AccelSeries)],
    bin_width: f64,
) -> Result<ErrorReport> {
    let mut stats = ErrorStats::new(bin_width)?;
    for (log, accel) in runs {
        accumulate(&mut stats, models, log, accel, None)?;
    }
    stats.report()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stats_of(errors: &[f64], width: f64) -> ErrorStats {
        let mut s = ErrorStats::new(width).unwrap();
        errors.iter().for_each(|e| s.push(*e));
        s
    }

    #[test]
    fn known_small_sample() {
        let r = stats_of(&[1.0, 2.0, 3.0, 4.0], 1.0).report().unwrap();
        assert_eq!(r.count, 4);
        assert!((r.mean - 2.5).abs() < 1e-15);
        assert!((r.std_dev - 1.25f64.sqrt()).abs() < 1e-15);
        assert_eq!((r.min, r.max), (1.0, 4.0));
        assert_eq!(
            r.histogram.iter().map(|b| b.count).collect::<Vec<_>>(),
            vec![1, 1, 1, 1]
        );
    }

    #[test]
    fn empty_report_errors() {
        assert!(matches!(
            ErrorStats::new(0.05).unwrap().report(),
            Err(Error::EmptyReport)
        ));
        assert!(ErrorStats::new(0.0).is_err());
    }

    #[test]
    fn histogram_fills_gaps() {
        let r = stats_of(&[-0.1, 0.1], 0.05).report().unwrap();
        assert_eq!(r.histogram.len(), 5);
        assert_eq!(r.histogram.iter().map(|b| b.count).sum::<usize>(), 2);
        assert!((r.histogram[0].center + 0.1).abs() < 1e-12);
    }

    #[test]
    fn table_has_every_row() {
        let table = stats_of(&[0.1, -0.2], 0.05).report().unwrap().to_table();
        for name in [
            "Average",
            "Std. deviation",
            "Minimum",
            "Maximum",
            "Number of measurements",
            "Total distance",
        ] {
            assert!(table.contains(name), "{name}");
        }
    }

    fn flat(v: f64) -> crate::spline::Spline1D {
        crate::spline::Spline1D::interpolate(vec![0.0, 40.0], vec![v, v], 0.0).unwrap()
    }

    fn models() -> ModelSet {
        use crate::spline::ForceSurface;
        let params = crate::vehicle::VehicleParams::new(
            1480.0,
            200.0,
            vec![
                crate::vehicle::Wheel {
                    inertia: 0.9,
                    radius: 0.3
                };
                4
            ],
        )
        .unwrap();
        ModelSet::new(
            flat(250.0),
            ForceSurface::new(vec![0, 186], vec![flat(0.0), flat(6000.0)]).unwrap(),
            ForceSurface::new(vec![0, 255], vec![flat(300.0), flat(8000.0)]).unwrap(),
            params,
        )
        .unwrap()
    }

    /// `samples` points at 10 Hz.
    fn cruise(speed: f64, samples: usize, throttle: i32) -> DriveLog {
        use crate::vehicle::{DriveSample, Gear, LogMetadata};
        let samples = (0..samples)
            .map(|i| DriveSample {
                t: i as f64 * 0.1,
                speed,
                throttle,
                brake: 0,
                slope: 0.0,
            })
            .collect();
        DriveLog::new(
            samples,
            LogMetadata {
                gear: Gear::Drive,
                description: String::new(),
            },
        )
        .unwrap()
    }

    fn series(log: &DriveLog, accel: impl Fn(usize) -> f64) -> AccelSeries {
        AccelSeries {
            t: log.samples().iter().map(|s| s.t).collect(),
            accel: (0..log.len()).map(accel).collect(),
            valid: vec![true; log.len()],
        }
    }

    #[test]
    fn self_consistent_drive_has_zero_error() {
        let m = models();
        let log = cruise(10.0, 101, 20);
        let a = (6000.0 * 20.0 / 186.0 - 250.0) / m.equivalent_mass();
        let measured = series(&log, |i| {
            direct_acceleration(&m, 10.0, 20.0, 0.0, 0.0).accel + 0.0 * i as f64
        });
        assert!((measured.accel[0] - a).abs() < 1e-9);
        let r = validate(&m, &[(&log, &measured)], DEFAULT_HIST_BIN).unwrap();
        assert_eq!((r.mean, r.std_dev, r.min, r.max), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(r.count, 101);
    }

    #[test]
    fn distance_is_integrated_speed() {
        let m = models();
        let log = cruise(10.0, 9841, 0);
        let measured = series(&log, |_| 0.0);
        let r = validate(&m, &[(&log, &measured)], DEFAULT_HIST_BIN).unwrap();
        assert!((r.total_distance - 9840.0).abs() < 1e-6);
    }

    #[test]
    fn error_is_measured_minus_model() {
        let m = models();
        let log = cruise(10.0, 11, 0);
        let model = direct_acceleration(&m, 10.0, 0.0, 0.0, 0.0).accel;
        let measured = series(&log, |_| model + 0.25);
        let r = validate(&m, &[(&log, &measured)], DEFAULT_HIST_BIN).unwrap();
        assert!((r.mean - 0.25).abs() < 1e-12);
    }

    #[test]
    fn excluded_and_invalid_samples_are_skipped() {
        let m = models();
        let log = cruise(10.0, 10, 0);
        let mut measured = series(&log, |i| i as f64);
        measured.valid[0] = false;
        let mask: Vec<bool> = (0..10).map(|i| i == 9).collect();
        let mut stats = ErrorStats::new(DEFAULT_HIST_BIN).unwrap();
        accumulate(&mut stats, &m, &log, &measured, Some(&mask)).unwrap();
        assert_eq!(stats.count(), 8);
        assert!(accumulate(&mut stats, &m, &log, &measured, Some(&mask[..3])).is_err());
    }

    proptest! {
        #[test]
        fn log_order_does_not_matter(offsets in proptest::collection::vec(-1.0f64..1.0, 2..6)) {
            let m = models();
            let logs: Vec<DriveLog> = offsets.iter().enumerate().map(|(k, _)| cruise(5.0 + k as f64, 21, 10)).collect();
            let accels: Vec<AccelSeries> =
                logs.iter().zip(&offsets).map(|(l, o)| series(l, |i| o * (i as f64).sin())).collect();
            let runs: Vec<(&DriveLog, &AccelSeries)> = logs.iter().zip(&accels).collect();
            let mut reversed = runs.clone();
            reversed.reverse();
            let a = validate(&m, &runs, DEFAULT_HIST_BIN).unwrap();
            let b = validate(&m, &reversed, DEFAULT_HIST_BIN).unwrap();
            prop_assert_eq!(a.count, b.count);
            prop_assert_eq!(&a.histogram, &b.histogram);
            prop_assert!((a.mean - b.mean).abs() < 1e-12);
            prop_assert!((a.std_dev - b.std_dev).abs() < 1e-12);
            prop_assert!((a.total_distance - b.total_distance).abs() < 1e-9);
        }

        #[test]
        fn report_invariants(errors in proptest::collection::vec(-5.0f64..5.0, 1..200), shift in -1.0f64..1.0) {
            let r = stats_of(&errors, 0.05).report().unwrap();
            prop_assert!(r.std_dev >= 0.0);
            prop_assert!(r.min <= r.mean + 1e-12 && r.mean <= r.max + 1e-12);
            prop_assert_eq!(r.histogram.iter().map(|b| b.count).sum::<usize>(), r.count);

            let shifted: Vec<f64> = errors.iter().map(|e| e + shift).collect();
            let s = stats_of(&shifted, 0.05).report().unwrap();
            prop_assert!((s.mean - (r.mean + shift)).abs() < 1e-9);
            prop_assert!((s.std_dev - r.std_dev).abs() < 1e-9);
        }

        #[test]
        fn merge_equals_pooled(a in proptest::collection::vec(-5.0f64..5.0, 0..100),
                               b in proptest::collection::vec(-5.0f64..5.0, 1..100)) {
            let mut left = stats_of(&a, 0.1);
            left.merge(&stats_of(&b, 0.1)).unwrap();
            let pooled: Vec<f64> = a.iter().chain(&b).copied().collect();
            let (m, p) = (left.report().unwrap(), stats_of(&pooled, 0.1).report().unwrap());
            prop_assert_eq!(m.count, p.count);
            prop_assert!((m.mean - p.mean).abs() < 1e-9);
            prop_assert!((m.std_dev - p.std_dev).abs() < 1e-9);
            prop_assert_eq!(m.histogram, p.histogram);
        }
    }
}
