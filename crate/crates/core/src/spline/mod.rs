//! Force-model representation: shape-preserving Hermite curves over speed,
//! force surfaces over (speed, signal), fitting, inversion and the model
//! file format.

mod curve;
mod fit;
mod model_file;
mod surface;

pub use curve::{monotone_tangents, Spline1D};
pub use fit::{fit_curve, fit_curve_clamped, Anchor, AnchorSet, CurveFit, DEFAULT_KNOTS_MPS};
pub use model_file::{ForceKind, ForceModel, ModelFile, Provenance};
pub use surface::{CrossSection, ForceSurface, Inversion, InversionFlag, INVERSION_TOLERANCE};
