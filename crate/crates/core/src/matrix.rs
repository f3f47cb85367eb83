//! Dense complex matrix kernel: arithmetic, exponential, principal logarithm,
//! adjoint action and Lie bracket.
//!
//! Everything here targets small matrices (n <= 16; the eigenvalue helpers
//! stop at n = 4), stored row-major in a `Vec<Complex64>`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Global tolerances for the numeric kernel.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Frobenius-distance threshold for element equality.
    pub eq_tol: f64,
    /// Truncation target for the exp/log series kernels.
    pub exp_log_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eq_tol: 1e-9, exp_log_tol: 1e-13 }
    }
}

impl Tolerances {
    pub fn new(eq_tol: f64, exp_log_tol: f64) -> Result<Self> {
        if eq_tol <= 0.0 || exp_log_tol <= 0.0 {
            return Err(Error::invalid("tolerances must be strictly positive"));
        }
        Ok(Tolerances { eq_tol, exp_log_tol })
    }
}

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a row-major slice; length must be n*n.
    pub fn from_rows(n: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        Ok(Matrix { n, data: entries.to_vec() })
    }

    /// Convenience constructor from real entries.
    pub fn from_real_rows(n: usize, entries: &[f64]) -> Result<Self> {
        let data: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Matrix::from_rows(n, &data)
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Matrix::zeros(n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().map(|z| z * c) .collect() }
    }

    pub fn scale_re(&self, c: f64) -> Matrix {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn distance(&self, other: &Matrix) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch in distance");
        (self.clone() - other.clone()).frobenius_norm()
    }

    pub fn approx_eq(&self, other: &Matrix, tol: f64) -> bool {
        self.n == other.n && self.distance(other) < tol
    }

    fn require_same_dim(&self, other: &Matrix) -> Result<()> {
        if self.n != other.n {
            return Err(Error::invalid(format!(
                "dimension mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    /// LU decomposition with partial pivoting. Returns (lu, perm, sign) or an
    /// error when a pivot falls below the singularity threshold.
    fn lu(&self) -> Result<(Matrix, Vec<usize>, Complex64)> {
        let n = self.n;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = Complex64::new(1.0, 0.0);
        let scale = self.max_abs().max(1e-300);
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < 1e-14 * scale {
                return Err(Error::invalid("matrix is singular (zero pivot in LU)"));
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in k + 1..n {
                    let upd = lu[(k, j)] * factor;
                    lu[(i, j)] -= upd;
                }
            }
        }
        Ok((lu, perm, sign))
    }

    pub fn det(&self) -> Complex64 {
        match self.lu() {
            Ok((lu, _, sign)) => {
                let mut d = sign;
                for i in 0..self.n {
                    d *= lu[(i, i)];
                }
                d
            }
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Solve A X = B for X (B square).
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        self.require_same_dim(b)?;
        let n = self.n;
        let (lu, perm, _) = self.lu()?;
        let mut x = Matrix::zeros(n);
        // permute rows of b, then forward/back substitute column by column
        for col in 0..n {
            let mut y = vec![Complex64::new(0.0, 0.0); n];
            for i in 0..n {
                let mut s = b[(perm[i], col)];
                for j in 0..i {
                    s -= lu[(i, j)] * y[j];
                }
                y[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = y[i];
                for j in i + 1..n {
                    s -= lu[(i, j)] * x[(j, col)];
                }
                x[(i, col)] = s / lu[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.solve(&Matrix::identity(self.n))
    }
}

impl Add for Matrix {
    type Output = Matrix;
    fn add(self, rhs: Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in add");
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for Matrix {
    type Output = Matrix;
    fn sub(self, rhs: Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in sub");
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().map(|z| -z).collect() }
    }
}

impl Mul for Matrix {
    type Output = Matrix;
    fn mul(self, rhs: Matrix) -> Matrix {
        mat_mul(&self, &rhs)
    }
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.n, b.n, "dimension mismatch in mul");
    let n = a.n;
    let mut out = Matrix::zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[(i, k)];
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                let upd = aik * b[(k, j)];
                out[(i, j)] += upd;
            }
        }
    }
    out
}

// Diagonal Pade [6/6] coefficients for exp.
const PADE6: [f64; 7] = [
    1.0,
    0.5,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
];

/// Matrix exponential by scaling-and-squaring with a diagonal Pade [6/6]
/// approximant. The input is scaled so its Frobenius norm drops below 0.5.
pub fn mat_exp(x: &Matrix) -> Result<Matrix> {
    if !x.is_finite() {
        return Err(Error::invalid("mat_exp: non-finite entries"));
    }
    let n = x.dim();
    let norm = x.frobenius_norm();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let a = x.scale_re(1.0 / 2f64.powi(s as i32));

    let a2 = mat_mul(&a, &a);
    let a4 = mat_mul(&a2, &a2);
    let a6 = mat_mul(&a2, &a4);
    let id = Matrix::identity(n);

    // odd part: U = A (c1 I + c3 A^2 + c5 A^4), even part: V = c0 I + c2 A^2 + c4 A^4 + c6 A^6
    let u_inner = id.scale_re(PADE6[1]) + a2.scale_re(PADE6[3]) + a4.scale_re(PADE6[5]);
    let u = mat_mul(&a, &u_inner);
    let v = id.scale_re(PADE6[0]) + a2.scale_re(PADE6[2]) + a4.scale_re(PADE6[4]) + a6.scale_re(PADE6[6]);

    // exp(A) ~ (V - U)^-1 (V + U)
    let denom = v.clone() - u.clone();
    let numer = v + u;
    let mut r = denom.solve(&numer)?;
    for _ in 0..s {
        r = mat_mul(&r, &r);
    }
    Ok(r)
}

/// Principal matrix logarithm by inverse scaling-and-squaring: repeated
/// principal square roots (Denman-Beavers) until the iterate is within 0.25
/// of the identity, then a Mercator series.
///
/// Requires an invertible input with no eigenvalue on the closed negative
/// real axis; the result has its spectrum in the strip |Im| < pi.
pub fn mat_log_principal(g: &Matrix) -> Result<Matrix> {
    if !g.is_finite() {
        return Err(Error::invalid("mat_log_principal: non-finite entries"));
    }
    let n = g.dim();
    // spot the branch cut exactly for small n where we can afford eigenvalues
    if n <= 4 {
        let scale = g.max_abs().max(1e-300);
        for lam in eigenvalues(g)? {
            if lam.norm() < 1e-13 * scale {
                return Err(Error::invalid("mat_log_principal: singular matrix"));
            }
            if lam.re < 0.0 && lam.im.abs() < 1e-7 * scale {
                return Err(Error::BranchCut(format!(
                    "eigenvalue {lam} lies on the closed negative real axis"
                )));
            }
        }
    }

    let id = Matrix::identity(n);
    let mut a = g.clone();
    let mut sqrt_count = 0u32;
    while (a.clone() - id.clone()).frobenius_norm() > 0.25 {
        if sqrt_count >= 40 {
            return Err(Error::BranchCut(
                "inverse scaling did not reach the identity; spectrum too close to the cut".into(),
            ));
        }
        a = denman_beavers_sqrt(&a)?;
        sqrt_count += 1;
    }

    let e = a - id;
    let mut term = e.clone();
    let mut log = Matrix::zeros(n);
    for j in 1..=64 {
        let contrib = term.scale_re(if j % 2 == 1 { 1.0 } else { -1.0 } / j as f64);
        log = log + contrib.clone();
        if contrib.frobenius_norm() < 1e-18 {
            break;
        }
        term = mat_mul(&term, &e);
    }
    Ok(log.scale_re(2f64.powi(sqrt_count as i32)))
}

/// Principal square root via the Denman-Beavers iteration.
fn denman_beavers_sqrt(a: &Matrix) -> Result<Matrix> {
    let mut y = a.clone();
    let mut z = Matrix::identity(a.dim());
    for _ in 0..60 {
        let y_inv = y.inverse().map_err(|_| {
            Error::BranchCut("square root iteration hit a singular iterate".into())
        })?;
        let z_inv = z.inverse().map_err(|_| {
            Error::BranchCut("square root iteration hit a singular iterate".into())
        })?;
        let y_next = (y.clone() + z_inv).scale_re(0.5);
        let z_next = (z + y_inv).scale_re(0.5);
        let delta = y_next.distance(&y);
        y = y_next;
        z = z_next;
        if delta < 1e-15 * y.frobenius_norm().max(1.0) {
            return Ok(y);
        }
    }
    Err(Error::BranchCut(
        "Denman-Beavers iteration did not converge; eigenvalue near the negative real axis".into(),
    ))
}

/// Adjoint action Ad(g).x = g x g^-1.
pub fn ad_conjugate(g: &Matrix, x: &Matrix) -> Result<Matrix> {
    g.require_same_dim(x)?;
    let g_inv = g.inverse()?;
    Ok(mat_mul(&mat_mul(g, x), &g_inv))
}

/// Commutator [x, y] = xy - yx.
pub fn bracket(x: &Matrix, y: &Matrix) -> Result<Matrix> {
    x.require_same_dim(y)?;
    Ok(mat_mul(x, y) - mat_mul(y, x))
}

/// Characteristic polynomial coefficients by Faddeev-LeVerrier:
/// p(lambda) = lambda^n + c[n-1] lambda^(n-1) + ... + c[0].
fn char_poly(a: &Matrix) -> Vec<Complex64> {
    let n = a.dim();
    let id = Matrix::identity(n);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    let mut m = a.clone();
    let mut c_prev = -m.trace();
    coeffs[n - 1] = c_prev;
    for k in 2..=n {
        m = mat_mul(a, &(m + id.scale(c_prev)));
        c_prev = -m.trace() / Complex64::new(k as f64, 0.0);
        coeffs[n - k] = c_prev;
    }
    coeffs
}

fn poly_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    // monic: z^n + coeffs[n-1] z^(n-1) + ... + coeffs[0]
    let mut v = Complex64::new(1.0, 0.0);
    for c in coeffs.iter().rev() {
        v = v * z + c;
    }
    v
}

fn poly_deriv_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let n = coeffs.len();
    let mut v = Complex64::new(n as f64, 0.0);
    for k in (1..n).rev() {
        v = v * z + coeffs[k] * Complex64::new(k as f64, 0.0);
    }
    v
}

/// Eigenvalues for n <= 4 by characteristic-polynomial root finding
/// (Durand-Kerner) with Newton polishing.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    let n = a.dim();
    if n == 0 || n > 4 {
        return Err(Error::Unsupported(format!(
            "eigenvalues implemented for 1 <= n <= 4, got n = {n}"
        )));
    }
    if !a.is_finite() {
        return Err(Error::invalid("eigenvalues: non-finite entries"));
    }
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let coeffs = char_poly(a);
    let radius = 1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut roots: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    for _ in 0..200 {
        let mut max_step = 0.0f64;
        for k in 0..n {
            let zk = roots[k];
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != k {
                    denom *= zk - roots[j];
                }
            }
            if denom.norm() < 1e-290 {
                continue;
            }
            let step = poly_eval(&coeffs, zk) / denom;
            roots[k] = zk - step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-14 * radius {
            break;
        }
    }
    // a couple of Newton polish steps per root
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let dp = poly_deriv_eval(&coeffs, *r);
            if dp.norm() < 1e-280 {
                break;
            }
            *r -= poly_eval(&coeffs, *r) / dp;
        }
    }
    Ok(roots)
}
