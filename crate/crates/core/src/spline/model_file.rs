use serde::{Deserialize, Serialize};

use super::curve::Spline1D;
use super::surface::ForceSurface;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForceKind {
    Friction,
    Propulsion,
    Braking,
}

impl std::fmt::Display for ForceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ForceKind::Friction => "friction",
            ForceKind::Propulsion => "propulsion",
            ForceKind::Braking => "braking",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForceModel {
    Curve(Spline1D),
    Surface(ForceSurface),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default)]
    pub source_logs: Vec<String>,
    #[serde(default)]
    pub fit_timestamp: Option<String>,
}

/// A fitted force model as persisted between pipeline stages.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub kind: ForceKind,
    pub model: ForceModel,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct RawCurve {
    knots_x_mps: Vec<f64>,
    #[serde(rename = "knots_y_N")]
    knots_y_n: Vec<f64>,
    tangents: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    kind: ForceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<i32>>,
    curves: Vec<RawCurve>,
    #[serde(rename = "lower_clamp_N", default)]
    lower_clamp_n: f64,
    #[serde(default)]
    provenance: Provenance,
}

impl ModelFile {
    pub fn friction(curve: Spline1D, provenance: Provenance) -> Self {
        ModelFile {
            kind: ForceKind::Friction,
            model: ForceModel::Curve(curve),
            provenance,
        }
    }

    pub fn surface(kind: ForceKind, surface: ForceSurface, provenance: Provenance) -> Self {
        ModelFile {
            kind,
            model: ForceModel::Surface(surface),
            provenance,
        }
    }

    pub fn as_curve(&self) -> Result<&Spline1D> {
        match &self.model {
            ForceModel::Curve(c) => Ok(c),
            ForceModel::Surface(_) => Err(Error::Schema(format!(
                "{} model is a surface, expected a curve",
                self.kind
            ))),
        }
    }

    pub fn as_surface(&self) -> Result<&ForceSurface> {
        match &self.model {
            ForceModel::Surface(s) => Ok(s),
            ForceModel::Curve(_) => Err(Error::Schema(format!(
                "{} model is a curve, expected a surface",
                self.kind
            ))),
        }
    }

    pub fn levels(&self) -> Vec<i32> {
        match &self.model {
            ForceModel::Curve(_) => Vec::new(),
            ForceModel::Surface(s) => s.levels().to_vec(),
        }
    }

    pub fn to_json_string(&self) -> String {
        let curves: Vec<&Spline1D> = match &self.model {
            ForceModel::Curve(c) => vec![c],
            ForceModel::Surface(s) => s.curves().iter().collect(),
        };
        let raw = RawModel {
            kind: self.kind,
            levels: match &self.model {
                ForceModel::Curve(_) => None,
                ForceModel::Surface(s) => Some(s.levels().to_vec()),
            },
            lower_clamp_n: curves[0].lower_clamp(),
            curves: curves
                .iter()
                .map(|c| RawCurve {
                    knots_x_mps: c.knots_x().to_vec(),
                    knots_y_n: c.knots_y().to_vec(),
                    tangents: c.tangents().to_vec(),
                })
                .collect(),
            provenance: self.provenance.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("model serialize")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawModel = serde_json::from_str(s)?;
        if !raw.lower_clamp_n.is_finite() {
            return Err(Error::Schema("lower_clamp_N must be finite".into()));
        }
        let curves = raw
            .curves
            .into_iter()
            .map(|c| Spline1D::new(c.knots_x_mps, c.knots_y_n, c.tangents, raw.lower_clamp_n))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Schema(e.to_string()))?;
        let model = match (raw.kind, raw.levels) {
            (ForceKind::Friction, None) => {
                let mut curves = curves;
                if curves.len() != 1 {
                    return Err(Error::Schema(format!(
                        "friction model needs exactly one curve, found {}",
                        curves.len()
                    )));
                }
                ForceModel::Curve(curves.remove(0))
            }
            (ForceKind::Friction, Some(_)) => {
                return Err(Error::Schema("friction model must not carry levels".into()))
            }
            (kind, None) => {
                return Err(Error::Schema(format!("{kind} model needs a levels array")))
            }
            (_, Some(levels)) => ForceModel::Surface(
                ForceSurface::new(levels, curves).map_err(|e| Error::Schema(e.to_string()))?,
            ),
        };
        Ok(ModelFile {
            kind: raw.kind,
            model,
            provenance: raw.provenance,
        })
    }
}
