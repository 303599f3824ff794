//! JSON configuration for the fitting pipeline: estimator settings, speed
//! bins, and per-level knots and anchor points.

use std::collections::BTreeSet;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{log_spaced_edges, EstimatorSettings};
use crate::spline::{Anchor, AnchorSet, ForceKind, ForceSurface, Spline1D, DEFAULT_KNOTS_MPS};

pub const KMH_PER_MPS: f64 = 3.6;

/// Weight of an anchor point that does not state one, in bin-count units.
pub const DEFAULT_ANCHOR_WEIGHT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SpeedUnit {
    #[default]
    #[serde(rename = "speed_mps")]
    Mps,
    #[serde(rename = "speed_kmh")]
    Kmh,
}

impl SpeedUnit {
    pub fn to_mps(self, v: f64) -> f64 {
        match self {
            SpeedUnit::Mps => v,
            SpeedUnit::Kmh => v / KMH_PER_MPS,
        }
    }

    pub fn from_mps(self, v: f64) -> f64 {
        match self {
            SpeedUnit::Mps => v,
            SpeedUnit::Kmh => v * KMH_PER_MPS,
        }
    }
}

impl FromStr for SpeedUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "speed_mps" | "mps" => Ok(SpeedUnit::Mps),
            "speed_kmh" | "kmh" => Ok(SpeedUnit::Kmh),
            other => Err(Error::InvalidParameter(format!(
                "unknown speed unit `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinSpec {
    #[serde(default = "default_bin_count")]
    pub count: usize,
    #[serde(default = "default_bin_min")]
    pub min_mps: f64,
    #[serde(default = "default_bin_max")]
    pub max_mps: f64,
}

fn default_bin_count() -> usize {
    40
}

fn default_bin_min() -> f64 {
    0.05
}

fn default_bin_max() -> f64 {
    40.0
}

impl Default for BinSpec {
    fn default() -> Self {
        BinSpec {
            count: default_bin_count(),
            min_mps: default_bin_min(),
            max_mps: default_bin_max(),
        }
    }
}

impl BinSpec {
    pub fn edges(&self) -> Result<Vec<f64>> {
        if self.count == 0
            || !(self.min_mps > 0.0 && self.max_mps > self.min_mps && self.max_mps.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "bins need count > 0 and 0 < min < max, got {} bins on [{}, {}]",
                self.count, self.min_mps, self.max_mps
            )));
        }
        Ok(log_spaced_edges(self.count, self.min_mps, self.max_mps))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorPoint {
    pub speed: f64,
    #[serde(rename = "force_N")]
    pub force: f64,
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_weight() -> f64 {
    DEFAULT_ANCHOR_WEIGHT
}

/// Knots and anchors for one curve. `level` is absent for friction, and
/// a surface entry without a level applies to every level not listed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<f64>>,
    #[serde(default)]
    pub anchors: Vec<AnchorPoint>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSetConfig {
    #[serde(default)]
    pub units: SpeedUnit,
    #[serde(default)]
    pub curves: Vec<CurveConfig>,
}

/// Knots and anchors resolved to m/s.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub knots: Vec<f64>,
    pub anchors: AnchorSet,
}

impl Default for CurveSpec {
    fn default() -> Self {
        CurveSpec {
            knots: DEFAULT_KNOTS_MPS.to_vec(),
            anchors: AnchorSet::empty(),
        }
    }
}

impl CurveSetConfig {
    pub fn validate(&self, kind: ForceKind) -> Result<()> {
        let mut seen = BTreeSet::new();
        for c in &self.curves {
            if kind == ForceKind::Friction && c.level.is_some() {
                return Err(Error::Schema(
                    "friction curves must not carry a level".into(),
                ));
            }
            if !seen.insert(c.level) {
                return Err(Error::Schema(format!(
                    "duplicate {kind} curve for level {:?}",
                    c.level
                )));
            }
            self.resolve(c)
                .map_err(|e| Error::Schema(format!("{kind} level {:?}: {e}", c.level)))?;
        }
        Ok(())
    }

    fn resolve(&self, c: &CurveConfig) -> Result<CurveSpec> {
        let knots = match &c.knots {
            Some(k) => {
                let k: Vec<f64> = k.iter().map(|v| self.units.to_mps(*v)).collect();
                if k.is_empty()
                    || k.iter().any(|v| !v.is_finite())
                    || k.windows(2).any(|w| !(w[1] > w[0]))
                {
                    return Err(Error::InvalidParameter(
                        "knots must be finite and strictly increasing".into(),
                    ));
                }
                k
            }
            None => DEFAULT_KNOTS_MPS.to_vec(),
        };
        let anchors = c
            .anchors
            .iter()
            .map(|a| {
                if !a.force.is_finite() {
                    return Err(Error::InvalidParameter(
                        "anchor force must be finite".into(),
                    ));
                }
                Ok(Anchor {
                    speed: self.units.to_mps(a.speed),
                    force: a.force,
                    weight: a.weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CurveSpec {
            knots,
            anchors: AnchorSet::new(anchors)?,
        })
    }

    /// The entry for `level`, else the level-less entry, else defaults.
    pub fn spec_for(&self, level: Option<i32>) -> Result<CurveSpec> {
        let entry = self
            .curves
            .iter()
            .find(|c| c.level == level)
            .or_else(|| self.curves.iter().find(|c| c.level.is_none()));
        match entry {
            Some(c) => self.resolve(c),
            None => Ok(CurveSpec::default()),
        }
    }

    /// Levels listed explicitly, in ascending order.
    pub fn levels(&self) -> Vec<i32> {
        let set: BTreeSet<i32> = self.curves.iter().filter_map(|c| c.level).collect();
        set.into_iter().collect()
    }

    fn interpolate(&self, c: &CurveConfig) -> Result<Spline1D> {
        let spec = self.resolve(c)?;
        let mut pts: Vec<(f64, f64)> = spec
            .anchors
            .anchors()
            .iter()
            .map(|a| (a.speed, a.force))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (x, y) = pts.into_iter().unzip();
        Spline1D::interpolate(x, y, 0.0)
    }

    /// Shape-preserving curve through the anchor points of the level-less
    /// entry (or the only entry).
    pub fn interpolated_curve(&self) -> Result<Spline1D> {
        let c = self
            .curves
            .iter()
            .find(|c| c.level.is_none())
            .or(self.curves.first())
            .ok_or_else(|| Error::Schema("no curves".into()))?;
        self.interpolate(c)
    }

    /// Surface whose level curves pass through each level's anchor points.
    pub fn interpolated_surface(&self) -> Result<ForceSurface> {
        let mut entries: Vec<&CurveConfig> =
            self.curves.iter().filter(|c| c.level.is_some()).collect();
        entries.sort_by_key(|c| c.level);
        let levels = entries.iter().filter_map(|c| c.level).collect();
        let curves = entries
            .iter()
            .map(|c| self.interpolate(c))
            .collect::<Result<Vec<_>>>()?;
        ForceSurface::new(levels, curves)
    }
}

/// Settings shared by all fitting stages.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub estimator: EstimatorSettings,
    #[serde(default)]
    pub bins: BinSpec,
    #[serde(default)]
    pub friction: CurveSetConfig,
    #[serde(default)]
    pub propulsion: CurveSetConfig,
    #[serde(default)]
    pub braking: CurveSetConfig,
}

impl PipelineConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: PipelineConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialize")
    }

    pub fn validate(&self) -> Result<()> {
        self.estimator
            .validate()
            .map_err(|e| Error::Schema(e.to_string()))?;
        self.bins
            .edges()
            .map_err(|e| Error::Schema(e.to_string()))?;
        self.friction.validate(ForceKind::Friction)?;
        self.propulsion.validate(ForceKind::Propulsion)?;
        self.braking.validate(ForceKind::Braking)
    }

    pub fn curves(&self, kind: ForceKind) -> &CurveSetConfig {
        match kind {
            ForceKind::Friction => &self.friction,
            ForceKind::Propulsion => &self.propulsion,
            ForceKind::Braking => &self.braking,
        }
    }
}
