//! Composite Gauss-Legendre quadrature (5-point panels) for scalar and
//! matrix-valued integrands, with a panel-doubling convergence check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// 5-point Gauss-Legendre nodes on [-1, 1] and their weights.
pub const GL5_NODES: [f64; 5] = [
    -0.906179845938664,
    -0.538469310105683,
    0.0,
    0.538469310105683,
    0.906179845938664,
];
pub const GL5_WEIGHTS: [f64; 5] = [
    0.236926885056189,
    0.478628670499366,
    0.568888888888889,
    0.478628670499366,
    0.236926885056189,
];

pub fn gl5_scalar<F: FnMut(f64) -> Result<Complex64>>(
    f: &mut F,
    a: f64,
    b: f64,
) -> Result<Complex64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
        acc += f(mid + half * x)? * w;
    }
    Ok(acc * half)
}

pub fn gl5_matrix<F: FnMut(f64) -> Result<Matrix>>(f: &mut F, a: f64, b: f64) -> Result<Matrix> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc: Option<Matrix> = None;
    for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
        let v = f(mid + half * x)?.scale_re(*w);
        acc = Some(match acc {
            None => v,
            Some(s) => s + v,
        });
    }
    Ok(acc.expect("five nodes").scale_re(half))
}

fn composite_scalar<F: FnMut(f64) -> Result<Complex64>>(
    f: &mut F,
    a: f64,
    b: f64,
    panels: usize,
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    let h = (b - a) / panels as f64;
    for k in 0..panels {
        acc += gl5_scalar(f, a + k as f64 * h, a + (k + 1) as f64 * h)?;
    }
    Ok(acc)
}

fn composite_matrix<F: FnMut(f64) -> Result<Matrix>>(
    f: &mut F,
    a: f64,
    b: f64,
    panels: usize,
) -> Result<Matrix> {
    let h = (b - a) / panels as f64;
    let mut acc: Option<Matrix> = None;
    for k in 0..panels {
        let v = gl5_matrix(f, a + k as f64 * h, a + (k + 1) as f64 * h)?;
        acc = Some(match acc {
            None => v,
            Some(s) => s + v,
        });
    }
    Ok(acc.expect("at least one panel"))
}

/// Integrate a scalar integrand over [a, b], doubling the panel count until
/// two consecutive composite rules agree to `tol` (relative to the scale of
/// the result).
pub fn adaptive_scalar<F: FnMut(f64) -> Result<Complex64>>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Complex64> {
    let mut panels = 8usize;
    let mut prev = composite_scalar(f, a, b, panels)?;
    while panels <= 1 << 14 {
        panels *= 2;
        let next = composite_scalar(f, a, b, panels)?;
        if (next - prev).norm() <= tol * (1.0 + next.norm()) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Precision(format!(
        "quadrature did not stabilize on [{a}, {b}] within {panels} panels"
    )))
}

/// Matrix-valued analogue of [`adaptive_scalar`].
pub fn adaptive_matrix<F: FnMut(f64) -> Result<Matrix>>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Matrix> {
    let mut panels = 8usize;
    let mut prev = composite_matrix(f, a, b, panels)?;
    while panels <= 1 << 14 {
        panels *= 2;
        let next = composite_matrix(f, a, b, panels)?;
        if next.distance(&prev) <= tol * (1.0 + next.frobenius_norm()) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Precision(format!(
        "matrix quadrature did not stabilize on [{a}, {b}] within {panels} panels"
    )))
}

/// Fixed-resolution composite rule over a list of subinterval boundaries,
/// `panels_per_piece` GL5 panels on each piece.
pub fn piecewise_matrix<F: FnMut(f64) -> Result<Matrix>>(
    f: &mut F,
    boundaries: &[f64],
    panels_per_piece: usize,
) -> Result<Matrix> {
    let mut acc: Option<Matrix> = None;
    for w in boundaries.windows(2) {
        let v = composite_matrix(f, w[0], w[1], panels_per_piece.max(1))?;
        acc = Some(match acc {
            None => v,
            Some(s) => s + v,
        });
    }
    acc.ok_or_else(|| Error::invalid("piecewise quadrature needs at least two boundaries"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        // GL5 is exact through degree 9
        let mut f = |t: f64| Ok(Complex64::new(t.powi(7), 0.0));
        let got = gl5_scalar(&mut f, 0.0, 1.0).unwrap();
        assert!((got.re - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let mut f = |t: f64| Ok(Complex64::new((10.0 * t).sin(), 0.0));
        let got = adaptive_scalar(&mut f, 0.0, 1.0, 1e-13).unwrap();
        let want = (1.0 - (10.0f64).cos()) / 10.0;
        assert!((got.re - want).abs() < 1e-12);
    }
}
