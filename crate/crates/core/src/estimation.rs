//! Acceleration estimation from speed telemetry and speed-binned aggregation
//! of scattered force observations.
//!
//! The acceleration estimate is the slope of a least-squares line over a
//! centered window of speed samples, smoothed by a first-order low-pass run
//! forward and backward so that the result carries no phase lag.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vehicle::DriveLog;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSettings {
    /// Odd number of samples in the regression window.
    pub window: usize,
    pub cutoff_hz: f64,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        EstimatorSettings {
            window: 21,
            cutoff_hz: 5.0,
        }
    }
}

impl EstimatorSettings {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "window must be odd and >= 3, got {}",
                self.window
            )));
        }
        if !(self.cutoff_hz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cutoff must be > 0 Hz, got {}",
                self.cutoff_hz
            )));
        }
        Ok(())
    }

    fn half_window(&self) -> usize {
        (self.window - 1) / 2
    }
}

/// Acceleration aligned sample-for-sample with a drive log. Samples whose
/// centered window does not fit inside their segment are marked invalid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccelSeries {
    pub t: Vec<f64>,
    pub accel: Vec<f64>,
    pub valid: Vec<bool>,
}

impl AccelSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Valid acceleration at sample `i`, if any.
    pub fn get(&self, i: usize) -> Option<f64> {
        self.valid
            .get(i)
            .copied()
            .unwrap_or(false)
            .then(|| self.accel[i])
    }
}

/// Estimates acceleration over every segment of `log`.
///
/// Segments shorter than the window contribute only invalid samples; the
/// call fails only when no segment is long enough.
pub fn estimate_acceleration(log: &DriveLog, settings: &EstimatorSettings) -> Result<AccelSeries> {
    settings.validate()?;
    let samples = log.samples();
    let n = samples.len();
    let mut series = AccelSeries {
        t: samples.iter().map(|s| s.t).collect(),
        accel: vec![0.0; n],
        valid: vec![false; n],
    };
    let mut any = false;
    for seg in log.segments() {
        if seg.len() < settings.window {
            continue;
        }
        let t = &series.t[seg.clone()];
        let v: Vec<f64> = samples[seg.clone()].iter().map(|s| s.speed).collect();
        let interior = estimate_segment(t, &v, settings)?;
        let h = settings.half_window();
        for (k, a) in interior.into_iter().enumerate() {
            series.accel[seg.start + h + k] = a;
            series.valid[seg.start + h + k] = true;
        }
        any = true;
    }
    if !any {
        let longest = log.segments().iter().map(|r| r.len()).max().unwrap_or(0);
        return Err(Error::EmptySeries {
            len: longest,
            window: settings.window,
        });
    }
    Ok(series)
}

/// Acceleration at the interior samples `h..n-h` of one contiguous segment,
/// where `h = (window - 1) / 2`.
pub fn estimate_segment(
    t: &[f64],
    speed: &[f64],
    settings: &EstimatorSettings,
) -> Result<Vec<f64>> {
    settings.validate()?;
    let n = t.len();
    if n < settings.window || speed.len() != n {
        return Err(Error::EmptySeries {
            len: n.min(speed.len()),
            window: settings.window,
        });
    }
    let h = settings.half_window();
    let slopes: Vec<f64> = (h..n - h)
        .map(|i| regression_slope(&t[i - h..=i + h], &speed[i - h..=i + h]))
        .collect();
    let alpha = smoothing_factor(median_step(t), settings.cutoff_hz);
    Ok(zero_phase_lowpass(&slopes, alpha))
}

fn regression_slope(t: &[f64], v: &[f64]) -> f64 {
    let n = t.len() as f64;
    let t_mean = t.iter().sum::<f64>() / n;
    let v_mean = v.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (ti, vi) in t.iter().zip(v) {
        let dt = ti - t_mean;
        sxy += dt * (vi - v_mean);
        sxx += dt * dt;
    }
    sxy / sxx
}

fn median_step(t: &[f64]) -> f64 {
    let mut steps: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    steps.sort_by(f64::total_cmp);
    steps[steps.len() / 2]
}

/// Coefficient of the discrete first-order low-pass `y += a * (x - y)`.
fn smoothing_factor(dt: f64, cutoff_hz: f64) -> f64 {
    let rc = 1.0 / (2.0 * std::f64::consts::PI * cutoff_hz);
    dt / (rc + dt)
}

/// Forward-backward first-order low-pass. Both pass orders are averaged so
/// the filter commutes exactly with time reversal.
pub(crate) fn zero_phase_lowpass(x: &[f64], alpha: f64) -> Vec<f64> {
    if x.len() < 2 || alpha >= 1.0 {
        return x.to_vec();
    }
    let fb = forward_backward(x, alpha);
    let rev: Vec<f64> = x.iter().rev().copied().collect();
    let bf = forward_backward(&rev, alpha);
    fb.iter()
        .zip(bf.iter().rev())
        .map(|(a, b)| 0.5 * (a + b))
        .collect()
}

fn forward_backward(x: &[f64], alpha: f64) -> Vec<f64> {
    let n = x.len();
    // Odd reflection continues linear trends across the ends, so the filter
    // start-up transient is spent inside the padding.
    let pad = ((10.0 / alpha).ceil() as usize).min(n - 1);
    let mut buf = Vec::with_capacity(n + 2 * pad);
    buf.extend((1..=pad).rev().map(|k| 2.0 * x[0] - x[k]));
    buf.extend_from_slice(x);
    buf.extend((1..=pad).map(|k| 2.0 * x[n - 1] - x[n - 1 - k]));

    causal_lowpass(&mut buf, alpha);
    buf.reverse();
    causal_lowpass(&mut buf, alpha);
    buf.reverse();
    buf[pad..pad + n].to_vec()
}

fn causal_lowpass(buf: &mut [f64], alpha: f64) {
    let mut y = buf[0];
    for x in buf.iter_mut() {
        y += alpha * (*x - y);
        *x = y;
    }
}

/// Per-bin medians of scattered (speed, value) observations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BinnedPoints {
    pub bin_centers: Vec<f64>,
    pub values: Vec<f64>,
    pub counts: Vec<usize>,
}

impl BinnedPoints {
    pub fn len(&self) -> usize {
        self.bin_centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bin_centers.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        self.bin_centers
            .iter()
            .zip(&self.values)
            .zip(&self.counts)
            .map(|((&x, &y), &c)| (x, y, c))
    }
}

/// `bins + 1` edges spaced geometrically between `min` and `max`.
pub fn log_spaced_edges(bins: usize, min: f64, max: f64) -> Vec<f64> {
    let ratio = (max / min).ln() / bins as f64;
    let mut edges: Vec<f64> = (0..=bins).map(|i| min * (ratio * i as f64).exp()).collect();
    edges[bins] = max;
    edges
}

pub fn default_bin_edges() -> Vec<f64> {
    log_spaced_edges(40, 0.05, 40.0)
}

/// Groups points into the half-open bins `[edges[i], edges[i+1])` (the last
/// bin also takes its right edge). Each non-empty bin reports the median
/// speed and median value of its members. Points outside the edges are
/// ignored.
pub fn bin_by_speed(points: &[(f64, f64)], edges: &[f64]) -> Result<BinnedPoints> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "bin edges must be strictly increasing with at least 2 entries".into(),
        ));
    }
    let last = edges[edges.len() - 1];
    let mut members: Vec<Vec<(f64, f64)>> = vec![Vec::new(); edges.len() - 1];
    for &(speed, value) in points {
        if !(speed.is_finite() && value.is_finite()) || speed < edges[0] || speed > last {
            continue;
        }
        let bin = (edges.partition_point(|e| *e <= speed) - 1).min(members.len() - 1);
        members[bin].push((speed, value));
    }

    let mut out = BinnedPoints::default();
    for bin in members.into_iter().filter(|m| !m.is_empty()) {
        let mut speeds: Vec<f64> = bin.iter().map(|p| p.0).collect();
        let mut values: Vec<f64> = bin.iter().map(|p| p.1).collect();
        out.bin_centers.push(median(&mut speeds));
        out.values.push(median(&mut values));
        out.counts.push(bin.len());
    }
    Ok(out)
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
