//! Least-squares polynomial fits in a normalized time variable.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Polynomial `sum c_i * tau^i` with `tau = (t - center) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    /// Coefficients in the normalized variable, lowest order first.
    pub coeffs: Vec<f64>,
    pub center: f64,
    pub scale: f64,
}

impl Polynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let tau = (t - self.center) / self.scale;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * tau + c)
    }

    /// Exact derivative with respect to `t`.
    pub fn derivative(&self) -> Polynomial {
        let coeffs = if self.coeffs.len() <= 1 {
            vec![0.0]
        } else {
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| i as f64 * c / self.scale)
                .collect()
        };
        Polynomial { coeffs, center: self.center, scale: self.scale }
    }

    /// Coefficients in powers of `(t - center)` (seconds), lowest order first.
    pub fn raw_coeffs(&self) -> Vec<f64> {
        let mut s = 1.0;
        self.coeffs
            .iter()
            .map(|c| {
                let v = c / s;
                s *= self.scale;
                v
            })
            .collect()
    }
}

/// Least-squares fit of a degree-`degree` polynomial to `(t, y)` pairs.
pub fn fit(t: &[f64], y: &[f64], degree: usize) -> Result<Polynomial> {
    assert_eq!(t.len(), y.len(), "fit: length mismatch");
    let n = t.len();
    let cols = degree + 1;
    if n < cols {
        return Err(Error::InsufficientSamples { needed: cols, got: n });
    }
    let (lo, hi) = t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let center = 0.5 * (lo + hi);
    let scale = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };
    let a = DMatrix::from_fn(n, cols, |r, c| ((t[r] - center) / scale).powi(c as i32));
    let b = DVector::from_column_slice(y);
    let qr = a.qr();
    let r = qr.r();
    if (0..cols).any(|i| r[(i, i)].abs() < 1e-12 * (n as f64).sqrt()) {
        return Err(Error::InsufficientSamples { needed: cols, got: distinct_count(t) });
    }
    let qtb = qr.q().transpose() * b;
    let coeffs = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::InvalidInput("singular polynomial fit".into()))?;
    Ok(Polynomial { coeffs: coeffs.iter().copied().collect(), center, scale })
}

fn distinct_count(t: &[f64]) -> usize {
    let mut v: Vec<f64> = t.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}
