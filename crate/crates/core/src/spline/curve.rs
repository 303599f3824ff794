use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tangents that keep a cubic Hermite interpolant shape preserving.
///
/// Starts from the three-point parabolic slope estimate, zeroes the tangent
/// at local extrema and on flat intervals, then scales tangent pairs into
/// the Fritsch-Carlson circle `alpha^2 + beta^2 <= 9` so no interval
/// overshoots its end values.
pub fn monotone_tangents(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    match n {
        0 => return Vec::new(),
        1 => return vec![0.0],
        _ => {}
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }

    let mut m = vec![0.0; n];
    for i in 1..n - 1 {
        let (d0, d1) = (delta[i - 1], delta[i]);
        if d0 * d1 > 0.0 {
            m[i] = (h[i] * d0 + h[i - 1] * d1) / (h[i - 1] + h[i]);
        }
    }
    m[0] = end_tangent(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end_tangent(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);

    for k in 0..n - 1 {
        if delta[k] == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let a = m[k] / delta[k];
        let b = m[k + 1] / delta[k];
        let r2 = a * a + b * b;
        if r2 > 9.0 {
            let tau = 3.0 / r2.sqrt();
            m[k] = tau * a * delta[k];
            m[k + 1] = tau * b * delta[k];
        }
    }
    m
}

/// One-sided three-point end slope, forced to agree in sign with the end
/// secant.
fn end_tangent(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// Cubic Hermite interpolation on `[x0, x1]`.
#[inline]
pub(crate) fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
}

/// Piecewise cubic Hermite curve with held-end extrapolation and a lower
/// clamp on its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spline1D {
    knots_x: Vec<f64>,
    knots_y: Vec<f64>,
    tangents: Vec<f64>,
    lower_clamp: f64,
}

impl Spline1D {
    /// Builds a curve from explicit knots and tangents.
    pub fn new(
        knots_x: Vec<f64>,
        knots_y: Vec<f64>,
        tangents: Vec<f64>,
        lower_clamp: f64,
    ) -> Result<Self> {
        let n = knots_x.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "spline needs at least one knot".into(),
            ));
        }
        if knots_y.len() != n || tangents.len() != n {
            return Err(Error::InvalidParameter(format!(
                "spline arrays disagree in length: {} x, {} y, {} tangents",
                n,
                knots_y.len(),
                tangents.len()
            )));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&knots_x) || !finite(&knots_y) || !finite(&tangents) || !lower_clamp.is_finite()
        {
            return Err(Error::InvalidParameter(
                "spline values must be finite".into(),
            ));
        }
        if knots_x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "spline knots must be strictly increasing".into(),
            ));
        }
        if let Some(i) = knots_y.iter().position(|y| *y < lower_clamp) {
            return Err(Error::InvalidParameter(format!(
                "knot {i} value {} is below the lower clamp {lower_clamp}",
                knots_y[i]
            )));
        }
        Ok(Spline1D {
            knots_x,
            knots_y,
            tangents,
            lower_clamp,
        })
    }

    /// Shape-preserving interpolant through the given points.
    pub fn interpolate(knots_x: Vec<f64>, knots_y: Vec<f64>, lower_clamp: f64) -> Result<Self> {
        if knots_x.len() != knots_y.len() {
            return Err(Error::InvalidParameter("x and y lengths differ".into()));
        }
        let tangents = monotone_tangents(&knots_x, &knots_y);
        Spline1D::new(knots_x, knots_y, tangents, lower_clamp)
    }

    pub fn constant(value: f64) -> Self {
        let clamp = value.min(0.0);
        Spline1D {
            knots_x: vec![0.0],
            knots_y: vec![value],
            tangents: vec![0.0],
            lower_clamp: clamp,
        }
    }

    pub fn knots_x(&self) -> &[f64] {
        &self.knots_x
    }

    pub fn knots_y(&self) -> &[f64] {
        &self.knots_y
    }

    pub fn tangents(&self) -> &[f64] {
        &self.tangents
    }

    pub fn lower_clamp(&self) -> f64 {
        self.lower_clamp
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots_x[0], self.knots_x[self.knots_x.len() - 1])
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_raw(x).max(self.lower_clamp)
    }

    fn eval_raw(&self, x: f64) -> f64 {
        let n = self.knots_x.len();
        if x <= self.knots_x[0] {
            return self.knots_y[0];
        }
        if x >= self.knots_x[n - 1] {
            return self.knots_y[n - 1];
        }
        // x is strictly inside, so 1 <= idx <= n - 1
        let idx = self.knots_x.partition_point(|k| *k <= x);
        let k = idx - 1;
        if x == self.knots_x[k] {
            return self.knots_y[k];
        }
        hermite(
            self.knots_x[k],
            self.knots_x[k + 1],
            self.knots_y[k],
            self.knots_y[k + 1],
            self.tangents[k],
            self.tangents[k + 1],
            x,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eval_at_knots_is_exact() {
        let s =
            Spline1D::interpolate(vec![0.0, 1.0, 2.5, 4.0], vec![3.0, 7.0, 1.0, 9.0], 0.0).unwrap();
        for (x, y) in s.knots_x().iter().zip(s.knots_y()) {
            assert_eq!(s.eval(*x), *y);
        }
    }

    #[test]
    fn held_end_extrapolation() {
        let s = Spline1D::interpolate(vec![1.0, 2.0, 3.0], vec![5.0, 6.0, 8.0], 0.0).unwrap();
        assert_eq!(s.eval(0.0), 5.0);
        assert_eq!(s.eval(100.0), 8.0);
    }

    #[test]
    fn linear_data_is_reproduced() {
        let x: Vec<f64> = vec![0.5, 1.0, 2.0, 4.5, 7.0];
        let y: Vec<f64> = x.iter().map(|v| 100.0 + 10.0 * v).collect();
        let s = Spline1D::interpolate(x, y, 0.0).unwrap();
        for i in 0..=100 {
            let v = 0.5 + 6.5 * i as f64 / 100.0;
            assert!((s.eval(v) - (100.0 + 10.0 * v)).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(Spline1D::new(vec![], vec![], vec![], 0.0).is_err());
        assert!(Spline1D::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0], 0.0).is_err());
        assert!(Spline1D::new(vec![0.0, 1.0], vec![1.0], vec![0.0, 0.0], 0.0).is_err());
        assert!(Spline1D::new(vec![0.0, 1.0], vec![-1.0, 1.0], vec![0.0, 0.0], 0.0).is_err());
        assert!(Spline1D::new(vec![0.0, f64::NAN], vec![1.0, 1.0], vec![0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn tangents_zero_at_extrema_and_flats() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [0.0, 2.0, 1.0, 1.0, 3.0];
        let m = monotone_tangents(&x, &y);
        assert_eq!(m[1], 0.0);
        assert_eq!(m[2], 0.0);
        assert_eq!(m[3], 0.0);
    }

    fn knots() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        proptest::collection::vec((0.01f64..5.0, 0.0f64..1e4), 2..12).prop_map(|v| {
            let mut x = 0.0;
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (dx, y) in v {
                x += dx;
                xs.push(x);
                ys.push(y);
            }
            (xs, ys)
        })
    }

    proptest! {
        // Between two knots the interpolant stays inside their value range,
        // which is what makes undershoot below the clamp impossible.
        #[test]
        fn no_overshoot_between_knots((xs, ys) in knots(), frac in 0.0f64..1.0) {
            let s = Spline1D::interpolate(xs.clone(), ys.clone(), 0.0).unwrap();
            for k in 0..xs.len() - 1 {
                let x = xs[k] + frac * (xs[k + 1] - xs[k]);
                let lo = ys[k].min(ys[k + 1]);
                let hi = ys[k].max(ys[k + 1]);
                let v = s.eval(x);
                let tol = 1e-9 * hi.max(1.0);
                prop_assert!(v >= lo - tol && v <= hi + tol, "k={} v={} in [{}, {}]", k, v, lo, hi);
            }
        }

        #[test]
        fn dense_sweep_non_negative((xs, ys) in knots()) {
            let s = Spline1D::interpolate(xs.clone(), ys, 0.0).unwrap();
            let (a, b) = s.domain();
            for i in 0..1000 {
                let x = a - 1.0 + (b - a + 2.0) * i as f64 / 999.0;
                prop_assert!(s.eval(x) >= 0.0);
            }
        }

        #[test]
        fn interpolant_is_c1_at_knots((xs, ys) in knots()) {
            let s = Spline1D::interpolate(xs.clone(), ys.clone(), 0.0).unwrap();
            for k in 1..xs.len() - 1 {
                let eps = 1e-7 * (xs[k + 1] - xs[k - 1]);
                let left = (s.eval_raw(xs[k]) - s.eval_raw(xs[k] - eps)) / eps;
                let right = (s.eval_raw(xs[k] + eps) - s.eval_raw(xs[k])) / eps;
                // one-sided differences are off by up to eps * max|f''| / 2
                let m = s.tangents();
                let f2 = (k - 1..=k)
                    .map(|i| {
                        let h = xs[i + 1] - xs[i];
                        6.0 * (ys[i + 1] - ys[i]).abs() / (h * h) + 6.0 * m[i].abs().max(m[i + 1].abs()) / h
                    })
                    .fold(0.0, f64::max);
                let scale = left.abs().max(right.abs()).max(1.0);
                prop_assert!((left - right).abs() <= eps * f2 + 1e-6 * scale + 1e-3, "{} vs {}", left, right);
            }
        }
    }
}
