//! Shape-preserving cubic interpolation (Fritsch-Carlson).

use crate::error::{Error, Result};

/// Piecewise-cubic Hermite interpolant whose slopes are limited so that the
/// interpolant is monotone wherever the data are. Evaluation outside the
/// grid clamps to the endpoint values.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidParameter(
                "interpolation needs two or more matching nodes".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "interpolation nodes must be strictly increasing".into(),
            ));
        }
        let n = xs.len();
        let mut secants = vec![0.0; n - 1];
        for i in 0..n - 1 {
            secants[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        }
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            slopes[i] = if secants[i - 1] * secants[i] > 0.0 {
                0.5 * (secants[i - 1] + secants[i])
            } else {
                0.0
            };
        }
        // Fritsch-Carlson limiter keeps each interval free of overshoot.
        for i in 0..n - 1 {
            if secants[i] == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let a = slopes[i] / secants[i];
            let b = slopes[i + 1] / secants[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                slopes[i] = tau * a * secants[i];
                slopes[i + 1] = tau * b * secants[i];
            }
        }
        Ok(Self {
            xs,
            ys,
            slopes,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i]
            + h10 * h * self.slopes[i]
            + h01 * self.ys[i + 1]
            + h11 * h * self.slopes[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reproduces_linear_data() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        for i in 0..90 {
            let x = i as f64 * 0.1;
            assert_relative_eq!(c.eval(x), 2.0 * x - 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn interpolates_nodes_and_clamps_outside() {
        let c = MonotoneCubic::new(vec![0.0, 1.0, 3.0], vec![1.0, 0.5, 0.2]).unwrap();
        assert_relative_eq!(c.eval(0.0), 1.0);
        assert_relative_eq!(c.eval(1.0), 0.5);
        assert_relative_eq!(c.eval(3.0), 0.2);
        assert_relative_eq!(c.eval(-5.0), 1.0);
        assert_relative_eq!(c.eval(9.0), 0.2);
    }

    #[test]
    fn preserves_monotonicity() {
        // Data with an abrupt level change, the classic overshoot case.
        let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = vec![0.0, 0.01, 0.02, 0.98, 0.99, 1.0];
        let c = MonotoneCubic::new(xs, ys).unwrap();
        let mut prev = c.eval(0.0);
        for i in 1..=500 {
            let v = c.eval(i as f64 * 0.01);
            assert!(v >= prev - 1e-12, "dip at {i}: {v} < {prev}");
            assert!((-1e-12..=1.0 + 1e-12).contains(&v), "overshoot: {v}");
            prev = v;
        }
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(MonotoneCubic::new(vec![0.0], vec![1.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(MonotoneCubic::new(vec![1.0, 0.0], vec![1.0, 2.0]).is_err());
    }
}
