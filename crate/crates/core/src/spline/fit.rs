//! Weighted least-squares fitting of shape-preserving Hermite curves.
//!
//! The unknowns are the knot values; tangents always follow from the values
//! through [`monotone_tangents`], so the fitted curve lives in the same
//! family as a hand-drawn interpolant through anchor points. The objective
//! is nonlinear in the knot values (the tangent limiter switches branches),
//! so a piecewise-linear least-squares solution seeds a Levenberg-Marquardt
//! refinement.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::curve::{monotone_tangents, Spline1D};
use crate::error::{Error, Result};
use crate::estimation::BinnedPoints;

/// Default knot layout in m/s, geometric to favour low speeds.
pub const DEFAULT_KNOTS_MPS: [f64; 10] = [0.1, 0.2, 0.5, 1.0, 2.0, 4.0, 8.0, 15.0, 25.0, 36.0];

/// Weight of the curvature penalty relative to the total data weight. It
/// only decides knots that no data constrains; linear data is unaffected.
const SMOOTHING: f64 = 1e-7;

/// Hand-specified point that shapes a curve where data is missing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub speed: f64,
    pub force: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnchorSet {
    anchors: Vec<Anchor>,
}

impl AnchorSet {
    pub fn new(anchors: Vec<Anchor>) -> Result<Self> {
        for (i, a) in anchors.iter().enumerate() {
            if !(a.weight > 0.0 && a.weight.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "anchor {i}: weight must be > 0"
                )));
            }
            if !(a.speed.is_finite() && a.force.is_finite()) || a.speed < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "anchor {i}: speed must be >= 0 and values finite"
                )));
            }
        }
        Ok(AnchorSet { anchors })
    }

    pub fn empty() -> Self {
        AnchorSet::default()
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// Anchors whose speed lies outside `[lo, hi]`.
    pub fn outside(&self, lo: f64, hi: f64) -> AnchorSet {
        AnchorSet {
            anchors: self
                .anchors
                .iter()
                .filter(|a| a.speed < lo || a.speed > hi)
                .copied()
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CurveFit {
    pub spline: Spline1D,
    /// Count-weighted RMS of (fit - bin value) over the binned points.
    pub residual_rms: f64,
}

/// Fits a curve with lower clamp 0 on `knots_x`.
pub fn fit_curve(binned: &BinnedPoints, anchors: &AnchorSet, knots_x: &[f64]) -> Result<Spline1D> {
    fit_curve_clamped(binned, anchors, knots_x, 0.0).map(|f| f.spline)
}

pub fn fit_curve_clamped(
    binned: &BinnedPoints,
    anchors: &AnchorSet,
    knots_x: &[f64],
    lower_clamp: f64,
) -> Result<CurveFit> {
    let n = knots_x.len();
    if n == 0
        || knots_x.iter().any(|x| !x.is_finite())
        || knots_x.windows(2).any(|w| !(w[1] > w[0]))
    {
        return Err(Error::InvalidParameter(
            "knots must be finite and strictly increasing".into(),
        ));
    }
    let data: Vec<(f64, f64, f64)> = binned
        .iter()
        .map(|(x, y, c)| (x, y, c as f64))
        .chain(
            anchors
                .anchors()
                .iter()
                .map(|a| (a.speed, a.force, a.weight)),
        )
        .collect();
    if data.is_empty() {
        return Err(Error::InvalidParameter(
            "nothing to fit: no binned points and no anchors".into(),
        ));
    }
    if data.len() < n {
        return Err(Error::Underdetermined {
            points: data.len(),
            knots: n,
        });
    }

    let problem = Problem::new(knots_x, &data);
    let seed = problem.piecewise_linear_seed()?;
    let mut y = problem.refine(seed);
    for v in &mut y {
        *v = v.max(lower_clamp);
    }
    let tangents = monotone_tangents(knots_x, &y);
    let spline = Spline1D::new(knots_x.to_vec(), y, tangents, lower_clamp)?;

    let (mut sse, mut wsum) = (0.0, 0.0);
    for (x, v, c) in binned.iter() {
        let e = spline.eval(x) - v;
        sse += c as f64 * e * e;
        wsum += c as f64;
    }
    let residual_rms = if wsum > 0.0 { (sse / wsum).sqrt() } else { 0.0 };
    Ok(CurveFit {
        spline,
        residual_rms,
    })
}

struct Problem<'a> {
    knots: &'a [f64],
    data: &'a [(f64, f64, f64)],
    penalty_weight: f64,
}

impl<'a> Problem<'a> {
    fn new(knots: &'a [f64], data: &'a [(f64, f64, f64)]) -> Self {
        let total: f64 = data.iter().map(|d| d.2).sum();
        Problem {
            knots,
            data,
            penalty_weight: (SMOOTHING * total).sqrt(),
        }
    }

    fn rows(&self) -> usize {
        self.data.len() + self.knots.len().saturating_sub(2)
    }

    /// Deviation of knot `j` from the chord through its neighbours, in
    /// force units; zero for collinear knots.
    fn curvature_row(&self, j: usize) -> [(usize, f64); 3] {
        let x = self.knots;
        let h0 = x[j] - x[j - 1];
        let h1 = x[j + 1] - x[j];
        let s = 0.5 * (h0 + h1) * self.penalty_weight;
        [(j - 1, s / h0), (j, -s / h0 - s / h1), (j + 1, s / h1)]
    }

    fn residuals(&self, y: &[f64]) -> DVector<f64> {
        let mut r = DVector::zeros(self.rows());
        let tangents = monotone_tangents(self.knots, y);
        let curve = Spline1D::new(self.knots.to_vec(), y.to_vec(), tangents, f64::MIN);
        match curve {
            Ok(c) => {
                for (i, (x, v, w)) in self.data.iter().enumerate() {
                    r[i] = w.sqrt() * (c.eval(*x) - v);
                }
            }
            Err(_) => r.fill(f64::INFINITY),
        }
        for j in 1..self.knots.len().saturating_sub(1) {
            r[self.data.len() + j - 1] = self.curvature_row(j).iter().map(|(k, c)| c * y[*k]).sum();
        }
        r
    }

    /// Linear least squares with piecewise-linear interpolation between
    /// knots; close enough to the Hermite optimum to start from.
    fn piecewise_linear_seed(&self) -> Result<Vec<f64>> {
        let n = self.knots.len();
        let mut a = DMatrix::<f64>::zeros(self.rows(), n);
        let mut b = DVector::<f64>::zeros(self.rows());
        for (i, (x, v, w)) in self.data.iter().enumerate() {
            let sw = w.sqrt();
            for (k, basis) in hat_weights(self.knots, *x) {
                a[(i, k)] += sw * basis;
            }
            b[i] = sw * v;
        }
        for j in 1..n.saturating_sub(1) {
            for (k, c) in self.curvature_row(j) {
                a[(self.data.len() + j - 1, k)] = c;
            }
        }
        solve_least_squares(&a, &b)
            .map(|s| s.iter().copied().collect())
            .ok_or_else(|| Error::Fit("singular least-squares system".into()))
    }

    fn refine(&self, mut y: Vec<f64>) -> Vec<f64> {
        let n = y.len();
        let scale = self.data.iter().map(|d| d.1.abs()).fold(1.0, f64::max);
        let mut r = self.residuals(&y);
        let mut cost = r.norm_squared();
        let mut lambda = 1e-3;
        for _ in 0..200 {
            let mut jac = DMatrix::<f64>::zeros(r.len(), n);
            for j in 0..n {
                let step = 1e-7 * y[j].abs().max(scale);
                let mut yp = y.clone();
                yp[j] += step;
                let rp = self.residuals(&yp);
                jac.set_column(j, &((rp - &r) / step));
            }
            let g = jac.tr_mul(&r);
            let h = jac.tr_mul(&jac);
            let mut improved = false;
            while lambda < 1e12 {
                let mut damped = h.clone();
                for k in 0..n {
                    damped[(k, k)] += lambda * h[(k, k)].max(1e-12);
                }
                let Some(delta) = damped.cholesky().map(|c| c.solve(&(-&g))) else {
                    lambda *= 4.0;
                    continue;
                };
                let trial: Vec<f64> = y.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
                let r_trial = self.residuals(&trial);
                let c_trial = r_trial.norm_squared();
                if c_trial < cost {
                    let gain = cost - c_trial;
                    y = trial;
                    r = r_trial;
                    cost = c_trial;
                    lambda = (lambda / 3.0).max(1e-12);
                    improved = gain > 1e-13 * cost.max(1e-300);
                    break;
                }
                lambda *= 4.0;
            }
            if !improved {
                break;
            }
        }
        y
    }
}

/// Nonzero piecewise-linear basis weights of `knots` at `x`, held constant
/// beyond the ends.
fn hat_weights(knots: &[f64], x: f64) -> Vec<(usize, f64)> {
    let n = knots.len();
    if n == 1 || x <= knots[0] {
        return vec![(0, 1.0)];
    }
    if x >= knots[n - 1] {
        return vec![(n - 1, 1.0)];
    }
    let k = knots.partition_point(|v| *v <= x) - 1;
    let t = (x - knots[k]) / (knots[k + 1] - knots[k]);
    vec![(k, 1.0 - t), (k + 1, t)]
}

fn solve_least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let ata = a.tr_mul(a);
    let atb = a.tr_mul(b);
    if let Some(ch) = ata.clone().cholesky() {
        return Some(ch.solve(&atb));
    }
    a.clone().svd(true, true).solve(b, 1e-12).ok()
}
