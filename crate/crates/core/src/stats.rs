//! Small descriptive statistics: means, medians, Pearson correlation and
//! least squares with an intercept.

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

fn centered(xs: &[f64]) -> Vec<f64> {
    let m = mean(xs).unwrap_or(0.0);
    xs.iter().map(|x| x - m).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pearson correlation. Errors name whichever input has zero variance.
pub fn pearson(x: &[f64], y: &[f64], x_name: &str, y_name: &str) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::Empty("correlation needs at least two samples".into()));
    }
    let (cx, cy) = (centered(x), centered(y));
    let (sxx, syy) = (dot(&cx, &cx), dot(&cy, &cy));
    if sxx == 0.0 {
        return Err(Error::ZeroVariance(x_name.to_string()));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance(y_name.to_string()));
    }
    Ok((dot(&cx, &cy) / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Coefficients of `y ≈ a·x1 + b·x2 + c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ols2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Ols2 {
    pub fn predict(&self, x1: f64, x2: f64) -> f64 {
        self.a * x1 + self.b * x2 + self.c
    }
}

/// Ordinary least squares of `y` on `(x1, x2)` with intercept, solved from
/// the centered 2×2 normal equations.
pub fn ols2(x1: &[f64], x2: &[f64], y: &[f64]) -> Result<Ols2> {
    let n = y.len();
    if x1.len() != n {
        return Err(Error::LengthMismatch(x1.len(), n));
    }
    if x2.len() != n {
        return Err(Error::LengthMismatch(x2.len(), n));
    }
    if n < 3 {
        return Err(Error::Empty("regression needs at least three samples".into()));
    }
    let (c1, c2, cy) = (centered(x1), centered(x2), centered(y));
    let (s11, s22, s12) = (dot(&c1, &c1), dot(&c2, &c2), dot(&c1, &c2));
    let (s1y, s2y) = (dot(&c1, &cy), dot(&c2, &cy));
    let det = s11 * s22 - s12 * s12;
    if det <= 1e-12 * s11 * s22 {
        return Err(Error::Degenerate("regressors are collinear".into()));
    }
    let a = (s22 * s1y - s12 * s2y) / det;
    let b = (s11 * s2y - s12 * s1y) / det;
    let c = mean(y).unwrap() - a * mean(x1).unwrap() - b * mean(x2).unwrap();
    Ok(Ols2 { a, b, c })
}
