//! Descriptors for the concrete target groups K: GL_n over R or C, SL_n(C),
//! and abelian quotients k/Gamma, with membership checks, the exponential,
//! and the exp-image classification.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{mat_exp, mat_log_principal, mat_mul, eigenvalues, Matrix};
use crate::EQ_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

/// A discrete subgroup Gamma of C^d, spanned by real-independent generators.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    dim: usize,
    generators: Vec<Vec<Complex64>>,
}

impl Lattice {
    /// A lattice in C^d; generators must be linearly independent over R.
    pub fn new(dim: usize, generators: Vec<Vec<Complex64>>) -> Result<Self> {
        if generators.iter().any(|g| g.len() != dim) {
            return Err(Error::invalid("lattice generator has wrong dimension"));
        }
        if generators.len() > 2 * dim {
            return Err(Error::invalid("too many lattice generators for real independence"));
        }
        let lat = Lattice { dim, generators };
        if !lat.generators.is_empty() {
            // Gram determinant over R must be bounded away from zero
            let g = lat.real_generator_matrix();
            let m = lat.generators.len();
            let mut gram = vec![vec![0.0f64; m]; m];
            for a in 0..m {
                for b in 0..m {
                    gram[a][b] = (0..2 * dim).map(|i| g[i][a] * g[i][b]).sum();
                }
            }
            let det = real_det(&gram);
            let scale: f64 = lat
                .generators
                .iter()
                .map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>())
                .product();
            if det.abs() < 1e-12 * scale.max(1e-300) {
                return Err(Error::invalid(
                    "lattice generators are not linearly independent over R",
                ));
            }
        }
        Ok(lat)
    }

    pub fn trivial(dim: usize) -> Self {
        Lattice { dim, generators: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vec<Complex64>] {
        &self.generators
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.is_empty()
    }

    /// Generators as columns of a real (2d) x m matrix.
    fn real_generator_matrix(&self) -> Vec<Vec<f64>> {
        let m = self.generators.len();
        let mut g = vec![vec![0.0f64; m]; 2 * self.dim];
        for (j, gen) in self.generators.iter().enumerate() {
            for i in 0..self.dim {
                g[2 * i][j] = gen[i].re;
                g[2 * i + 1][j] = gen[i].im;
            }
        }
        g
    }

    /// Real coordinates of v with respect to the generators (least squares on
    /// the orthogonal complement of the span).
    pub fn coordinates(&self, v: &[Complex64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::invalid("vector dimension does not match lattice"));
        }
        let m = self.generators.len();
        if m == 0 {
            return Ok(Vec::new());
        }
        let g = self.real_generator_matrix();
        let mut vr = vec![0.0f64; 2 * self.dim];
        for i in 0..self.dim {
            vr[2 * i] = v[i].re;
            vr[2 * i + 1] = v[i].im;
        }
        // normal equations: (G^T G) c = G^T v
        let mut gram = vec![vec![0.0f64; m]; m];
        let mut rhs = vec![0.0f64; m];
        for a in 0..m {
            for b in 0..m {
                gram[a][b] = (0..2 * self.dim).map(|i| g[i][a] * g[i][b]).sum();
            }
            rhs[a] = (0..2 * self.dim).map(|i| g[i][a] * vr[i]).sum();
        }
        real_solve(&mut gram, &mut rhs)
            .ok_or_else(|| Error::invalid("degenerate lattice Gram matrix"))?;
        Ok(rhs)
    }

    /// Canonical fundamental-domain representative: generator coordinates
    /// reduced into [0, 1). Coordinates within 1e-9 of an integer snap to it
    /// first, so lattice points come out as (numerically) zero.
    pub fn reduce(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.reduce_with(v, |c| {
            if (c - c.round()).abs() < 1e-9 {
                c.round()
            } else {
                c.floor()
            }
        })
    }

    /// Nearest-lattice-point reduction (ties round half-up per coordinate);
    /// this is the reduction behind the quotient metric.
    pub fn reduce_nearest(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.reduce_with(v, |c| (c + 0.5).floor())
    }

    fn reduce_with(&self, v: &[Complex64], pick: impl Fn(f64) -> f64) -> Result<Vec<Complex64>> {
        let coords = self.coordinates(v)?;
        let mut out = v.to_vec();
        for (j, cj) in coords.iter().enumerate() {
            let k = pick(*cj);
            if k != 0.0 {
                for i in 0..self.dim {
                    out[i] -= self.generators[j][i] * k;
                }
            }
        }
        Ok(out)
    }

    /// Distance from v to the nearest lattice point, measured in generator
    /// coordinates (max norm); the span complement contributes its own norm.
    pub fn coordinate_distance(&self, v: &[Complex64]) -> Result<f64> {
        let coords = self.coordinates(v)?;
        let mut d = coords
            .iter()
            .map(|c| (c - (c + 0.5).floor()).abs())
            .fold(0.0f64, f64::max);
        // component off the real span of the generators
        let mut residual = v.to_vec();
        for (j, cj) in coords.iter().enumerate() {
            for i in 0..self.dim {
                residual[i] -= self.generators[j][i] * cj;
            }
        }
        let off_span = residual.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        d = d.max(off_span);
        Ok(d)
    }
}

fn real_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if m[i][k].abs() > m[p][k].abs() {
                p = i;
            }
        }
        if m[p][k].abs() < 1e-300 {
            return 0.0;
        }
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    det
}

/// In-place Gaussian elimination; solution left in rhs. Returns None if singular.
fn real_solve(a: &mut [Vec<f64>], rhs: &mut [f64]) -> Option<()> {
    let n = a.len();
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if a[i][k].abs() > a[p][k].abs() {
                p = i;
            }
        }
        if a[p][k].abs() < 1e-300 {
            return None;
        }
        a.swap(p, k);
        rhs.swap(p, k);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            rhs[i] -= f * rhs[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in i + 1..n {
            s -= a[i][j] * rhs[j];
        }
        rhs[i] = s / a[i][i];
    }
    Some(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroupDescriptor {
    GeneralLinear { n: usize, field: Field },
    SpecialLinear { n: usize },
    AbelianQuotient { lattice: Lattice },
}

impl GroupDescriptor {
    pub fn gl(n: usize, field: Field) -> Self {
        GroupDescriptor::GeneralLinear { n, field }
    }

    pub fn sl(n: usize) -> Self {
        GroupDescriptor::SpecialLinear { n }
    }

    pub fn abelian(lattice: Lattice) -> Self {
        GroupDescriptor::AbelianQuotient { lattice }
    }

    /// Dimension of the matrices housing group/algebra elements; abelian
    /// quotient elements of C^d live as d-vectors (diagonal d x d matrices
    /// when a matrix is needed).
    pub fn matrix_dim(&self) -> usize {
        match self {
            GroupDescriptor::GeneralLinear { n, .. } => *n,
            GroupDescriptor::SpecialLinear { n } => *n,
            GroupDescriptor::AbelianQuotient { lattice } => lattice.dim(),
        }
    }

    pub fn is_abelian(&self) -> bool {
        matches!(self, GroupDescriptor::AbelianQuotient { .. })
    }

    /// Check that x lies in the Lie algebra of the group. Abelian quotient
    /// algebra elements are vectors in C^d carried as diagonal matrices.
    pub fn check_algebra_element(&self, x: &Matrix) -> Result<()> {
        if x.dim() != self.matrix_dim() {
            return Err(Error::invalid("algebra element has wrong dimension"));
        }
        if !x.is_finite() {
            return Err(Error::invalid("algebra element has non-finite entries"));
        }
        match self {
            GroupDescriptor::SpecialLinear { .. } => {
                let tr = x.trace();
                if tr.norm() > EQ_TOL * x.frobenius_norm().max(1.0) {
                    return Err(Error::invalid(format!(
                        "sl algebra element must be trace free, got trace {tr}"
                    )));
                }
            }
            GroupDescriptor::AbelianQuotient { .. } => {
                let n = x.dim();
                let off_diag: f64 = (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .filter(|(i, j)| i != j)
                    .map(|(i, j)| x[(i, j)].norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                if off_diag > EQ_TOL * x.frobenius_norm().max(1.0) {
                    return Err(Error::invalid(
                        "abelian algebra elements must be diagonal (vectors in C^d)",
                    ));
                }
            }
            GroupDescriptor::GeneralLinear { .. } => {}
        }
        Ok(())
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupDescriptor::AbelianQuotient { lattice } => GroupElement {
                descriptor: self.clone(),
                payload: Payload::Vector(vec![Complex64::new(0.0, 0.0); lattice.dim()]),
            },
            _ => GroupElement {
                descriptor: self.clone(),
                payload: Payload::Matrix(Matrix::identity(self.matrix_dim())),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Matrix(Matrix),
    Vector(Vec<Complex64>),
}

/// An element of the target group K with its membership validated.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    descriptor: GroupDescriptor,
    payload: Payload,
}

impl GroupElement {
    pub fn from_matrix(descriptor: GroupDescriptor, m: Matrix) -> Result<Self> {
        match &descriptor {
            GroupDescriptor::AbelianQuotient { .. } => Err(Error::invalid(
                "abelian quotient elements are vectors, not matrices",
            )),
            GroupDescriptor::GeneralLinear { n, field } => {
                if m.dim() != *n {
                    return Err(Error::invalid("group element dimension mismatch"));
                }
                if *field == Field::Real && !is_real(&m) {
                    return Err(Error::invalid("GL(n,R) element has complex entries"));
                }
                let d = m.det();
                if d.norm() < EQ_TOL {
                    return Err(Error::invalid("group element is singular"));
                }
                Ok(GroupElement { descriptor, payload: Payload::Matrix(m) })
            }
            GroupDescriptor::SpecialLinear { n } => {
                if m.dim() != *n {
                    return Err(Error::invalid("group element dimension mismatch"));
                }
                let d = m.det();
                if (d - Complex64::new(1.0, 0.0)).norm() > EQ_TOL {
                    return Err(Error::invalid(format!(
                        "SL element must have unit determinant, got {d}"
                    )));
                }
                Ok(GroupElement { descriptor, payload: Payload::Matrix(m) })
            }
        }
    }

    pub fn from_vector(descriptor: GroupDescriptor, v: Vec<Complex64>) -> Result<Self> {
        match &descriptor {
            GroupDescriptor::AbelianQuotient { lattice } => {
                if v.len() != lattice.dim() {
                    return Err(Error::invalid("vector dimension does not match group"));
                }
                let reduced = lattice.reduce(&v)?;
                Ok(GroupElement { descriptor, payload: Payload::Vector(reduced) })
            }
            _ => Err(Error::invalid("matrix group elements need matrix payloads")),
        }
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    pub fn matrix(&self) -> Result<&Matrix> {
        match &self.payload {
            Payload::Matrix(m) => Ok(m),
            Payload::Vector(_) => Err(Error::invalid("element is an abelian coset, not a matrix")),
        }
    }

    pub fn vector(&self) -> Result<&[Complex64]> {
        match &self.payload {
            Payload::Vector(v) => Ok(v),
            Payload::Matrix(_) => Err(Error::invalid("element is a matrix, not an abelian coset")),
        }
    }

    /// The element as a matrix in every case; abelian cosets embed as
    /// diagonal matrices of their representative.
    pub fn as_matrix(&self) -> Matrix {
        match &self.payload {
            Payload::Matrix(m) => m.clone(),
            Payload::Vector(v) => Matrix::diag(v),
        }
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        match &self.payload {
            Payload::Matrix(m) => Ok(GroupElement {
                descriptor: self.descriptor.clone(),
                payload: Payload::Matrix(m.inverse()?),
            }),
            Payload::Vector(v) => {
                let neg: Vec<Complex64> = v.iter().map(|z| -z).collect();
                GroupElement::from_vector(self.descriptor.clone(), neg)
            }
        }
    }

    /// Distance to another element: Frobenius for matrix groups, lattice
    /// reduced difference for abelian quotients.
    pub fn distance(&self, other: &GroupElement) -> Result<f64> {
        if self.descriptor != other.descriptor {
            return Err(Error::invalid("descriptor mismatch in distance"));
        }
        match (&self.payload, &other.payload) {
            (Payload::Matrix(a), Payload::Matrix(b)) => Ok(a.distance(b)),
            (Payload::Vector(a), Payload::Vector(b)) => {
                let diff: Vec<Complex64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
                let lattice = match &self.descriptor {
                    GroupDescriptor::AbelianQuotient { lattice } => lattice,
                    _ => unreachable!(),
                };
                // quotient metric: measure against the nearest lattice shift
                let red = lattice.reduce_nearest(&diff)?;
                Ok(red.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            }
            _ => Err(Error::invalid("payload mismatch in distance")),
        }
    }

    pub fn distance_to_identity(&self) -> f64 {
        self.distance(&self.descriptor.identity()).unwrap_or(f64::INFINITY)
    }
}

fn is_real(m: &Matrix) -> bool {
    let n = m.dim();
    (0..n).all(|i| (0..n).all(|j| m[(i, j)].im.abs() < EQ_TOL))
}

/// Group multiplication: matrix product, or lattice-reduced vector sum.
pub fn group_multiply(a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
    if a.descriptor != b.descriptor {
        return Err(Error::invalid("descriptor mismatch in group_multiply"));
    }
    match (&a.payload, &b.payload) {
        (Payload::Matrix(x), Payload::Matrix(y)) => Ok(GroupElement {
            descriptor: a.descriptor.clone(),
            payload: Payload::Matrix(mat_mul(x, y)),
        }),
        (Payload::Vector(x), Payload::Vector(y)) => {
            let sum: Vec<Complex64> = x.iter().zip(y.iter()).map(|(p, q)| p + q).collect();
            GroupElement::from_vector(a.descriptor.clone(), sum)
        }
        _ => Err(Error::invalid("payload mismatch in group_multiply")),
    }
}

/// Quotient map composed with exp: for matrix groups this is mat_exp, for
/// abelian quotients the lattice reduction of x (exp = q_K there).
pub fn exp_to_group(k: &GroupDescriptor, x: &Matrix) -> Result<GroupElement> {
    k.check_algebra_element(x)?;
    match k {
        GroupDescriptor::AbelianQuotient { .. } => {
            GroupElement::from_vector(k.clone(), x.diagonal())
        }
        _ => GroupElement::from_matrix(k.clone(), mat_exp(x)?),
    }
}

/// Outcome of the exp-image classification.
#[derive(Debug, Clone)]
pub enum ExpImage {
    /// g = exp(x) for the returned algebra element x.
    InImage { witness: Matrix },
    /// g is provably outside exp(k).
    NotInImage,
}

impl ExpImage {
    pub fn is_in_image(&self) -> bool {
        matches!(self, ExpImage::InImage { .. })
    }
}

/// Exact exp-image classification for the catalog.
///
/// * GL_n(C): always in the image (principal or rotated-branch logarithm).
/// * Abelian quotients: always in the image.
/// * SL_2(C): in the image iff g = +/-I or tr(g) != -2; the excluded case is
///   the non-diagonalizable class with double eigenvalue -1.
/// * GL_n(R): unsupported (no completeness guarantee is offered).
pub fn is_in_exp_image(k: &GroupDescriptor, g: &GroupElement) -> Result<ExpImage> {
    if g.descriptor() != k {
        return Err(Error::invalid("element does not belong to the descriptor"));
    }
    match k {
        GroupDescriptor::AbelianQuotient { .. } => {
            let v = g.vector()?.to_vec();
            Ok(ExpImage::InImage { witness: Matrix::diag(&v) })
        }
        GroupDescriptor::GeneralLinear { field: Field::Real, .. } => Err(Error::Unsupported(
            "exp-image membership for GL(n,R) is witness search only; no classification".into(),
        )),
        GroupDescriptor::GeneralLinear { n, field: Field::Complex } => {
            let m = g.matrix()?;
            match mat_log_principal(m) {
                Ok(x) => Ok(ExpImage::InImage { witness: x }),
                Err(Error::BranchCut(_)) if *n <= 4 => {
                    let x = rotated_branch_log(m)?;
                    Ok(ExpImage::InImage { witness: x })
                }
                Err(e) => Err(e),
            }
        }
        GroupDescriptor::SpecialLinear { n } => {
            if *n != 2 {
                return Err(Error::Unsupported(
                    "exp-image classification implemented for SL_2(C) only".into(),
                ));
            }
            sl2_exp_image(g.matrix()?)
        }
    }
}

/// Logarithm of g in GL_n(C) when the principal branch is blocked: rotate the
/// spectrum away from the cut, take the principal log, undo the rotation by a
/// central shift. Needs the eigenvalues, hence n <= 4.
fn rotated_branch_log(m: &Matrix) -> Result<Matrix> {
    let eigs = eigenvalues(m)?;
    // aim the branch cut into the widest angular gap of the spectrum
    let mut args: Vec<f64> = eigs.iter().map(|z| z.arg()).collect();
    args.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut best_gap = (args[0] + two_pi) - args[args.len() - 1];
    let mut cut_angle = args[args.len() - 1] + best_gap / 2.0;
    for w in args.windows(2) {
        let gap = w[1] - w[0];
        if gap > best_gap {
            best_gap = gap;
            cut_angle = w[0] + gap / 2.0;
        }
    }
    if best_gap < 1e-9 {
        return Err(Error::BranchCut("spectrum leaves no angular gap for a branch".into()));
    }
    // rotate so the chosen gap direction lands on the negative real axis
    let theta = std::f64::consts::PI - cut_angle;
    let rot = Complex64::from_polar(1.0, theta);
    let rotated = m.scale(rot);
    let log_rotated = mat_log_principal(&rotated)?;
    // exp(log_rotated - i theta I) = e^{-i theta} (rot * m) = m
    let shift = Matrix::identity(m.dim()).scale(Complex64::new(0.0, -theta));
    Ok(log_rotated + shift)
}

/// Jordan case analysis for SL_2(C). Eigenvalues of x in sl_2 are +/-mu, so
/// exp(x) has eigenvalues e^mu, e^-mu; a double eigenvalue -1 forces
/// mu = i k pi with k odd, hence exp(x) = -I. A -1 Jordan block is therefore
/// unreachable.
fn sl2_exp_image(g: &Matrix) -> Result<ExpImage> {
    let id = Matrix::identity(2);
    let pi = std::f64::consts::PI;
    if g.approx_eq(&id, EQ_TOL) {
        return Ok(ExpImage::InImage { witness: Matrix::zeros(2) });
    }
    let minus_id = id.scale_re(-1.0);
    if g.approx_eq(&minus_id, EQ_TOL) {
        return Ok(ExpImage::InImage {
            witness: Matrix::diag(&[Complex64::new(0.0, pi), Complex64::new(0.0, -pi)]),
        });
    }
    let tr = g.trace();
    if (tr + Complex64::new(2.0, 0.0)).norm() < EQ_TOL {
        return Ok(ExpImage::NotInImage);
    }
    if (tr - Complex64::new(2.0, 0.0)).norm() < EQ_TOL {
        // unipotent: g = I + N with N^2 = 0 (Cayley-Hamilton), exp(N) = I + N
        let witness = g.clone() - id;
        return Ok(ExpImage::InImage { witness });
    }
    // diagonalizable with tr = 2 cosh(mu) != +/-2:
    // x = mu / sinh(mu) * (g - cosh(mu) I)
    let w = tr / Complex64::new(2.0, 0.0);
    let mu = (w + (w * w - Complex64::new(1.0, 0.0)).sqrt()).ln();
    let sinh_mu = mu.sinh();
    if sinh_mu.norm() < 1e-13 {
        return Err(Error::Precision("sl2 witness: sinh(mu) vanished unexpectedly".into()));
    }
    let witness = (g.clone() - Matrix::identity(2).scale(mu.cosh())).scale(mu / sinh_mu);
    Ok(ExpImage::InImage { witness })
}

/// Reduce v modulo the lattice (free function mirroring the lattice method).
pub fn quotient_reduce(lattice: &Lattice, v: &[Complex64]) -> Result<Vec<Complex64>> {
    lattice.reduce(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::mat_exp;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn z_lattice_in_r() -> Lattice {
        Lattice::new(1, vec![vec![c(1.0, 0.0)]]).unwrap()
    }

    #[test]
    fn multiply_identity_and_inverse() {
        let k = GroupDescriptor::gl(2, Field::Complex);
        let g = GroupElement::from_matrix(
            k.clone(),
            Matrix::from_real_rows(2, &[1.0, 2.0, 0.0, 1.0]).unwrap(),
        )
        .unwrap();
        let prod = group_multiply(&k.identity(), &g).unwrap();
        assert!(prod.distance(&g).unwrap() < 1e-14);
        let e = group_multiply(&g, &g.inverse().unwrap()).unwrap();
        assert!(e.distance_to_identity() < EQ_TOL);
    }

    #[test]
    fn abelian_mod_one_addition() {
        let k = GroupDescriptor::abelian(z_lattice_in_r());
        let a = GroupElement::from_vector(k.clone(), vec![c(0.7, 0.0)]).unwrap();
        let b = GroupElement::from_vector(k.clone(), vec![c(0.6, 0.0)]).unwrap();
        let s = group_multiply(&a, &b).unwrap();
        let want = GroupElement::from_vector(k, vec![c(0.3, 0.0)]).unwrap();
        assert!(s.distance(&want).unwrap() < 1e-12);
    }

    #[test]
    fn descriptor_mismatch_is_an_error() {
        let k1 = GroupDescriptor::gl(2, Field::Complex);
        let k2 = GroupDescriptor::sl(2);
        let a = k1.identity();
        let b = k2.identity();
        assert!(group_multiply(&a, &b).is_err());
    }

    #[test]
    fn exp_to_group_cases() {
        let pi = std::f64::consts::PI;
        // SL2: diag(i pi, -i pi) -> -I
        let sl2 = GroupDescriptor::sl(2);
        let x = Matrix::diag(&[c(0.0, pi), c(0.0, -pi)]);
        let g = exp_to_group(&sl2, &x).unwrap();
        assert!(
            g.matrix().unwrap().approx_eq(&Matrix::identity(2).scale_re(-1.0), 1e-12)
        );
        // abelian C/(Z + iZ): 1 + 2i is a lattice point
        let gauss = Lattice::new(1, vec![vec![c(1.0, 0.0)], vec![c(0.0, 1.0)]]).unwrap();
        let k = GroupDescriptor::abelian(gauss);
        let g = exp_to_group(&k, &Matrix::diag(&[c(1.0, 2.0)])).unwrap();
        assert!(g.distance_to_identity() < 1e-12);
        // GL2: nilpotent
        let gl2 = GroupDescriptor::gl(2, Field::Complex);
        let e = Matrix::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let g = exp_to_group(&gl2, &e).unwrap();
        assert!(g.matrix().unwrap().approx_eq(&(Matrix::identity(2) + e), 1e-13));
    }

    #[test]
    fn exp_to_group_rejects_nonzero_trace_for_sl() {
        let sl2 = GroupDescriptor::sl(2);
        let x = Matrix::diag(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(exp_to_group(&sl2, &x).is_err());
    }

    #[test]
    fn quotient_reduce_examples() {
        let z = z_lattice_in_r();
        let r = z.reduce(&[c(2.25, 0.0)]).unwrap();
        assert!((r[0] - c(0.25, 0.0)).norm() < 1e-12);
        let r = z.reduce(&[c(3.0, 0.0)]).unwrap();
        assert!(r[0].norm() < 1e-12);

        // Gamma generated by (1,0),(0,2) in R^2, v = (1.5, 3.5) -> (0.5, 1.5)
        let lat = Lattice::new(2, vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(2.0, 0.0)],
        ])
        .unwrap();
        let r = lat.reduce(&[c(1.5, 0.0), c(3.5, 0.0)]).unwrap();
        assert!((r[0] - c(0.5, 0.0)).norm() < 1e-12);
        assert!((r[1] - c(1.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn quotient_reduce_invariant_under_lattice_shift() {
        let gauss = Lattice::new(1, vec![vec![c(1.0, 0.0)], vec![c(0.0, 1.0)]]).unwrap();
        let v = [c(0.3, -0.4)];
        let shifted = [c(0.3 + 2.0, -0.4 + 3.0)];
        let a = gauss.reduce(&v).unwrap();
        let b = gauss.reduce(&shifted).unwrap();
        assert!((a[0] - b[0]).norm() < 1e-12);
    }

    #[test]
    fn sl2_minus_identity_has_witness() {
        let sl2 = GroupDescriptor::sl(2);
        let g = GroupElement::from_matrix(sl2.clone(), Matrix::identity(2).scale_re(-1.0)).unwrap();
        match is_in_exp_image(&sl2, &g).unwrap() {
            ExpImage::InImage { witness } => {
                let back = mat_exp(&witness).unwrap();
                assert!(back.approx_eq(&Matrix::identity(2).scale_re(-1.0), 1e-10));
            }
            ExpImage::NotInImage => panic!("-I must be in the image"),
        }
    }

    #[test]
    fn sl2_jordan_block_not_in_image() {
        let sl2 = GroupDescriptor::sl(2);
        let g = GroupElement::from_matrix(
            sl2.clone(),
            Matrix::from_real_rows(2, &[-1.0, 1.0, 0.0, -1.0]).unwrap(),
        )
        .unwrap();
        assert!(!is_in_exp_image(&sl2, &g).unwrap().is_in_image());
    }

    #[test]
    fn gl2_negative_diagonal_has_witness() {
        let gl2 = GroupDescriptor::gl(2, Field::Complex);
        let g = GroupElement::from_matrix(
            gl2.clone(),
            Matrix::diag(&[c(-1.0, 0.0), c(-2.0, 0.0)]),
        )
        .unwrap();
        match is_in_exp_image(&gl2, &g).unwrap() {
            ExpImage::InImage { witness } => {
                let back = mat_exp(&witness).unwrap();
                assert!(back.distance(&g.as_matrix()) < 1e-9, "witness error {}", back.distance(&g.as_matrix()));
            }
            ExpImage::NotInImage => panic!("GL_n(C) is exponential"),
        }
    }

    #[test]
    fn gl2_jordan_block_at_minus_one_has_witness() {
        // the same matrix that is outside exp(sl_2) does lie in exp(gl_2):
        // the rotated-branch witness picks up a central 2 pi i contribution
        let gl2 = GroupDescriptor::gl(2, Field::Complex);
        let m = Matrix::from_real_rows(2, &[-1.0, 1.0, 0.0, -1.0]).unwrap();
        let g = GroupElement::from_matrix(gl2.clone(), m.clone()).unwrap();
        match is_in_exp_image(&gl2, &g).unwrap() {
            ExpImage::InImage { witness } => {
                let back = mat_exp(&witness).unwrap();
                assert!(back.distance(&m) < 1e-9, "witness error {}", back.distance(&m));
                // the witness cannot be trace free
                assert!(witness.trace().norm() > 1.0);
            }
            ExpImage::NotInImage => panic!("GL_2(C) is exponential"),
        }
    }

    #[test]
    fn dependent_lattice_generators_rejected() {
        // 1 and 2 span the same real line in C
        assert!(Lattice::new(1, vec![vec![c(1.0, 0.0)], vec![c(2.0, 0.0)]]).is_err());
    }

    #[test]
    fn abelian_algebra_elements_must_be_diagonal() {
        let lat2 = Lattice::new(2, vec![vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let k = GroupDescriptor::abelian(lat2);
        let mut x = Matrix::zeros(2);
        x[(0, 1)] = c(1.0, 0.0);
        assert!(exp_to_group(&k, &x).is_err());
    }

    #[test]
    fn gl_real_classification_unsupported() {
        let glr = GroupDescriptor::gl(2, Field::Real);
        let g = glr.identity();
        assert!(matches!(is_in_exp_image(&glr, &g), Err(Error::Unsupported(_))));
    }

    #[test]
    fn sl2_random_exponentials_have_witnesses() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let sl2 = GroupDescriptor::sl(2);
        for _ in 0..200 {
            let a = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let b = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let f = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let x = Matrix::from_rows(2, &[a, b, f, -a]).unwrap();
            let g = exp_to_group(&sl2, &x).unwrap();
            match is_in_exp_image(&sl2, &g).unwrap() {
                ExpImage::InImage { witness } => {
                    let back = mat_exp(&witness).unwrap();
                    assert!(
                        back.distance(g.matrix().unwrap()) < 1e-8,
                        "witness reproduces element: err {}",
                        back.distance(g.matrix().unwrap())
                    );
                    // witness stays in sl2
                    assert!(witness.trace().norm() < 1e-8);
                }
                ExpImage::NotInImage => panic!("exp(x) must be classified inside the image"),
            }
        }
    }

    #[test]
    fn sl2_not_in_image_implies_trace_minus_two() {
        // constructed Jordan examples: conjugates of the -1 block
        let sl2 = GroupDescriptor::sl(2);
        let p = Matrix::from_real_rows(2, &[1.0, 3.0, 2.0, 7.0]).unwrap();
        let block = Matrix::from_real_rows(2, &[-1.0, 1.0, 0.0, -1.0]).unwrap();
        let g_mat = mat_mul(&mat_mul(&p, &block), &p.inverse().unwrap());
        let g = GroupElement::from_matrix(sl2.clone(), g_mat.clone()).unwrap();
        let verdict = is_in_exp_image(&sl2, &g).unwrap();
        assert!(!verdict.is_in_image());
        assert!((g_mat.trace() + c(2.0, 0.0)).norm() < 1e-9);
        assert!(g_mat.distance(&Matrix::identity(2).scale_re(-1.0)) > EQ_TOL);
    }
}
