//! Exact integer Smith normal form and the Hom-group rank / discreteness
//! reports for finitely presented abelian groups. All arithmetic is in
//! arbitrary-precision integers; no floating point enters any verdict.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::group::Lattice;

/// Dense integer matrix (arbitrary precision).
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_i64_rows(rows: usize, cols: usize, entries: &[i64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::invalid("entry count does not match matrix shape"));
        }
        Ok(IntMatrix {
            rows,
            cols,
            data: entries.iter().map(|&x| BigInt::from(x)).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in integer matrix product");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = &self[(i, k)] * &other[(k, j)];
                    out[(i, j)] += add;
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[target] += q * row[source]
    fn add_row_multiple(&mut self, target: usize, source: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let add = q * &self[(source, j)];
            self[(target, j)] += add;
        }
    }

    fn add_col_multiple(&mut self, target: usize, source: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let add = q * &self[(i, source)];
            self[(i, target)] += add;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -self[(r, j)].clone();
            self[(r, j)] = v;
        }
    }

    /// Exact determinant by Bareiss fraction-free elimination (square only).
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                let swap = (k + 1..n).find(|&i| !m[(i, k)].is_zero());
                match swap {
                    Some(i) => {
                        m.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[(k, k)] * &m[(i, j)] - &m[(i, k)] * &m[(k, j)];
                    m[(i, j)] = num / &prev;
                }
            }
            for i in k + 1..n {
                m[(i, k)] = BigInt::zero();
            }
            prev = m[(k, k)].clone();
        }
        sign * m[(n - 1, n - 1)].clone()
    }
}

/// Smith normal form D = U R V with unimodular U, V and a divisibility chain
/// d1 | d2 | ... on the diagonal of D (non-negative entries).
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithDecomposition {
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let k = self.d.rows().min(self.d.cols());
        (0..k).map(|i| self.d[(i, i)].clone()).collect()
    }
}

/// Nearest-quotient division: q minimizing |a - q b|.
fn rounded_quotient(a: &BigInt, b: &BigInt) -> BigInt {
    let q0 = a / b;
    let mut best = q0.clone();
    let mut best_rem = (a - &q0 * b).abs();
    for delta in [-1i64, 1] {
        let q = &q0 + BigInt::from(delta);
        let rem = (a - &q * b).abs();
        if rem < best_rem {
            best_rem = rem;
            best = q;
        }
    }
    best
}

pub fn smith_normal_form(r: &IntMatrix) -> SmithDecomposition {
    let rows = r.rows();
    let cols = r.cols();
    let mut d = r.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    let rank_bound = rows.min(cols);
    for k in 0..rank_bound {
        // locate a pivot: the smallest nonzero entry of the trailing block
        let (pi, pj) = match smallest_nonzero(&d, k) {
            Some(p) => p,
            None => break,
        };
        d.swap_rows(pi, k);
        u.swap_rows(pi, k);
        d.swap_cols(pj, k);
        v.swap_cols(pj, k);

        loop {
            // clear column k below the pivot
            let mut dirty = false;
            for i in k + 1..rows {
                if !d[(i, k)].is_zero() {
                    let q = -rounded_quotient(&d[(i, k)], &d[(k, k)]);
                    d.add_row_multiple(i, k, &q);
                    u.add_row_multiple(i, k, &q);
                    if !d[(i, k)].is_zero() {
                        // remainder became the new smaller pivot candidate
                        d.swap_rows(i, k);
                        u.swap_rows(i, k);
                        dirty = true;
                    }
                }
            }
            // clear row k to the right of the pivot
            for j in k + 1..cols {
                if !d[(k, j)].is_zero() {
                    let q = -rounded_quotient(&d[(k, j)], &d[(k, k)]);
                    d.add_col_multiple(j, k, &q);
                    v.add_col_multiple(j, k, &q);
                    if !d[(k, j)].is_zero() {
                        d.swap_cols(j, k);
                        v.swap_cols(j, k);
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue;
            }
            // enforce divisibility of the trailing block by the pivot
            let offender = trailing_non_multiple(&d, k);
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    d.add_row_multiple(k, i, &one);
                    u.add_row_multiple(k, i, &one);
                }
                None => break,
            }
        }
        if d[(k, k)].is_negative() {
            d.negate_row(k);
            u.negate_row(k);
        }
    }
    SmithDecomposition { u, d, v }
}

fn smallest_nonzero(d: &IntMatrix, k: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in k..d.rows() {
        for j in k..d.cols() {
            if d[(i, j)].is_zero() {
                continue;
            }
            match best {
                None => best = Some((i, j)),
                Some((bi, bj)) => {
                    if d[(i, j)].abs() < d[(bi, bj)].abs() {
                        best = Some((i, j));
                    }
                }
            }
        }
    }
    best
}

/// A row index i > k holding an entry not divisible by the pivot d[k][k].
fn trailing_non_multiple(d: &IntMatrix, k: usize) -> Option<usize> {
    let pivot = &d[(k, k)];
    for i in k + 1..d.rows() {
        for j in k + 1..d.cols() {
            if !(&d[(i, j)] % pivot).is_zero() {
                return Some(i);
            }
        }
    }
    None
}

/// A finitely presented abelian group A = Z^n / im(relations), relations as
/// an n x m integer matrix whose columns generate the relation subgroup.
#[derive(Debug, Clone)]
pub struct AbelianPresentation {
    pub n: usize,
    pub relations: IntMatrix,
}

impl AbelianPresentation {
    pub fn new(n: usize, relations: IntMatrix) -> Result<Self> {
        if relations.rows() != n {
            return Err(Error::invalid(format!(
                "relations matrix must have {n} rows, got {}",
                relations.rows()
            )));
        }
        Ok(AbelianPresentation { n, relations })
    }

    pub fn free(n: usize) -> Self {
        AbelianPresentation { n, relations: IntMatrix::zeros(n, 0) }
    }
}

/// Rank of Hom(A, Z): the number of free summands of A, i.e. n minus the
/// count of nonzero invariant factors of the presentation.
pub fn hom_rank(presentation: &AbelianPresentation) -> usize {
    if presentation.relations.cols() == 0 {
        return presentation.n;
    }
    let snf = smith_normal_form(&presentation.relations);
    let nonzero = snf
        .invariant_factors()
        .iter()
        .filter(|d| !d.is_zero())
        .count();
    presentation.n - nonzero
}

#[derive(Debug, Clone)]
pub struct DiscretenessReport {
    pub invariant_factors: Vec<BigInt>,
    pub hom_rank: usize,
    pub lattice_trivial: bool,
    /// Hom(A, Gamma) with pointwise convergence is discrete iff Gamma is
    /// trivial or Hom(A, Z) is finitely generated; a finite presentation
    /// always delivers the latter.
    pub discrete: bool,
}

impl DiscretenessReport {
    pub fn verdict_line(&self) -> String {
        format!(
            "Hom(A,Z) rank {} (finitely generated); Hom(A,Gamma) {} (lattice {})",
            self.hom_rank,
            if self.discrete { "discrete" } else { "not discrete" },
            if self.lattice_trivial { "trivial" } else { "nontrivial" },
        )
    }
}

pub fn discreteness_report(
    presentation: &AbelianPresentation,
    lattice: &Lattice,
) -> DiscretenessReport {
    let factors = if presentation.relations.cols() == 0 {
        Vec::new()
    } else {
        smith_normal_form(&presentation.relations).invariant_factors()
    };
    let rank = hom_rank(presentation);
    DiscretenessReport {
        invariant_factors: factors,
        hom_rank: rank,
        lattice_trivial: lattice.is_trivial(),
        // finite presentation => Hom(A,Z) = Z^rank is finitely generated
        discrete: true,
    }
}
