use serde::{Deserialize, Serialize};

use super::curve::{hermite, monotone_tangents, Spline1D};
use crate::error::{Error, Result};

/// Signal resolution of [`ForceSurface::invert`].
pub const INVERSION_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InversionFlag {
    /// The requested force exceeds what the maximum signal delivers.
    Saturated,
    /// The requested force is below what the minimum signal delivers.
    Underflow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub signal: f64,
    pub flag: Option<InversionFlag>,
}

/// Force as a function of speed and a command signal. Each defining level
/// has its own speed curve; between levels the force is a shape-preserving
/// cubic Hermite interpolation along the signal axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceSurface {
    levels: Vec<i32>,
    curves: Vec<Spline1D>,
}

/// The surface restricted to one speed: force versus signal.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    signals: Vec<f64>,
    forces: Vec<f64>,
    tangents: Vec<f64>,
}

impl CrossSection {
    pub fn forces(&self) -> &[f64] {
        &self.forces
    }

    /// Index of the first level whose force drops below its predecessor.
    pub fn first_decrease(&self) -> Option<usize> {
        self.forces
            .windows(2)
            .position(|w| w[1] < w[0])
            .map(|i| i + 1)
    }

    pub fn eval(&self, signal: f64) -> f64 {
        let n = self.signals.len();
        if signal <= self.signals[0] {
            return self.forces[0];
        }
        if signal >= self.signals[n - 1] {
            return self.forces[n - 1];
        }
        let k = self.signals.partition_point(|s| *s <= signal) - 1;
        if signal == self.signals[k] {
            return self.forces[k];
        }
        hermite(
            self.signals[k],
            self.signals[k + 1],
            self.forces[k],
            self.forces[k + 1],
            self.tangents[k],
            self.tangents[k + 1],
            signal,
        )
    }
}

impl ForceSurface {
    pub fn new(levels: Vec<i32>, curves: Vec<Spline1D>) -> Result<Self> {
        if levels.is_empty() || levels.len() != curves.len() {
            return Err(Error::InvalidParameter(format!(
                "surface needs one curve per level ({} levels, {} curves)",
                levels.len(),
                curves.len()
            )));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "surface levels must be strictly increasing".into(),
            ));
        }
        Ok(ForceSurface { levels, curves })
    }

    /// A surface that is zero everywhere over `[min, max]`.
    pub fn zero(min: i32, max: i32) -> Self {
        let levels = if min < max { vec![min, max] } else { vec![min] };
        let curves = vec![Spline1D::constant(0.0); levels.len()];
        ForceSurface { levels, curves }
    }

    pub fn levels(&self) -> &[i32] {
        &self.levels
    }

    pub fn curves(&self) -> &[Spline1D] {
        &self.curves
    }

    pub fn curve(&self, level: i32) -> Option<&Spline1D> {
        self.levels
            .iter()
            .position(|l| *l == level)
            .map(|i| &self.curves[i])
    }

    pub fn signal_range(&self) -> (f64, f64) {
        (
            self.levels[0] as f64,
            self.levels[self.levels.len() - 1] as f64,
        )
    }

    pub fn cross_section(&self, speed: f64) -> CrossSection {
        let signals: Vec<f64> = self.levels.iter().map(|l| *l as f64).collect();
        let forces: Vec<f64> = self.curves.iter().map(|c| c.eval(speed)).collect();
        let tangents = monotone_tangents(&signals, &forces);
        CrossSection {
            signals,
            forces,
            tangents,
        }
    }

    pub fn eval(&self, speed: f64, signal: f64) -> f64 {
        self.eval_flagged(speed, signal).0
    }

    /// Force at `(speed, signal)`; the flag is set when `signal` lay outside
    /// the defining levels and was clamped.
    pub fn eval_flagged(&self, speed: f64, signal: f64) -> (f64, bool) {
        let (lo, hi) = self.signal_range();
        let clamped = signal < lo || signal > hi;
        if let Some(i) = self.levels.iter().position(|l| *l as f64 == signal) {
            return (self.curves[i].eval(speed), false);
        }
        (
            self.cross_section(speed).eval(signal.clamp(lo, hi)),
            clamped,
        )
    }

    /// Smallest signal whose force reaches `force` at `speed`, to within
    /// [`INVERSION_TOLERANCE`].
    pub fn invert(&self, speed: f64, force: f64) -> Result<Inversion> {
        let cs = self.cross_section(speed);
        if cs.first_decrease().is_some() {
            return Err(Error::InversionUnsupported { speed_mps: speed });
        }
        let (min, max) = self.signal_range();
        let n = cs.forces.len();
        if force <= cs.forces[0] {
            let flag = (force < cs.forces[0]).then_some(InversionFlag::Underflow);
            return Ok(Inversion { signal: min, flag });
        }
        if force > cs.forces[n - 1] {
            return Ok(Inversion {
                signal: max,
                flag: Some(InversionFlag::Saturated),
            });
        }
        // invariant: eval(lo) < force <= eval(hi)
        let mut lo = min;
        let mut hi = max;
        while hi - lo > INVERSION_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if cs.eval(mid) >= force {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Inversion {
            signal: hi,
            flag: None,
        })
    }

    /// Checks that force is non-decreasing in the signal at every given
    /// speed, naming the first offending level.
    pub fn check_monotone(&self, speeds: &[f64]) -> Result<()> {
        for &v in speeds {
            if let Some(i) = self.cross_section(v).first_decrease() {
                return Err(Error::NonMonotoneLevel {
                    level: self.levels[i],
                    speed_mps: v,
                });
            }
        }
        Ok(())
    }
}
