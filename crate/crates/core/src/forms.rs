//! Lie-algebra valued 1-forms: expression-backed and black-box evaluators
//! under one contract (point, tangent) -> algebra element, pullback along
//! paths, the Maurer-Cartan residual on 2-D charts, and the Behnke-Stein
//! dual basis of a punctured plane.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::domain::{Domain, Path};
use crate::error::{Error, Result};
use crate::expr::MatrixExpr;
use crate::group::{Field, GroupDescriptor};
use crate::matrix::{bracket, Matrix};
use crate::EQ_TOL;

pub type PointFn = Arc<dyn Fn(Complex64) -> Result<Matrix> + Send + Sync>;

/// Pointwise coefficient of a form: an expression with a fixed variable
/// binding, or an opaque evaluator.
#[derive(Clone)]
pub enum Coefficient {
    /// binds z = p
    ExprZ(MatrixExpr),
    /// binds t = Re p (interval and circle-angle coordinates)
    ExprT(MatrixExpr),
    /// binds x = Re p, y = Im p
    ExprXY(MatrixExpr),
    BlackBox(PointFn),
}

impl Coefficient {
    pub fn eval(&self, p: Complex64) -> Result<Matrix> {
        match self {
            Coefficient::ExprZ(e) => e.eval_single("z", p),
            Coefficient::ExprT(e) => e.eval_single("t", Complex64::new(p.re, 0.0)),
            Coefficient::ExprXY(e) => {
                let mut env = std::collections::HashMap::new();
                env.insert("x".to_string(), Complex64::new(p.re, 0.0));
                env.insert("y".to_string(), Complex64::new(p.im, 0.0));
                e.eval(&env)
            }
            Coefficient::BlackBox(f) => f(p),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::ExprZ(e) => write!(f, "ExprZ({e})"),
            Coefficient::ExprT(e) => write!(f, "ExprT({e})"),
            Coefficient::ExprXY(e) => write!(f, "ExprXY({e})"),
            Coefficient::BlackBox(_) => write!(f, "BlackBox(..)"),
        }
    }
}

#[derive(Clone)]
enum Kind {
    Zero,
    /// xi(z) dz on a complex domain
    Complex(Coefficient),
    /// xi(t) dt on an interval (or the circle-angle coordinate)
    RealInterval(Coefficient),
    /// xi1 dx + xi2 dy on a plane chart
    Chart(Coefficient, Coefficient),
    /// Ad(dressing(m))^-1 . inner_m; closed under the group law
    Dressed { inner: Box<OneForm>, dressing: PointFn },
    Sum(Vec<OneForm>),
    Scaled(Complex64, Box<OneForm>),
    /// scalar (1x1) form times a fixed algebra element
    ScalarTimes { scalar: Box<OneForm>, element: Matrix },
}

impl fmt::Debug for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Zero => write!(f, "Zero"),
            Kind::Complex(c) => write!(f, "Complex({c:?})"),
            Kind::RealInterval(c) => write!(f, "RealInterval({c:?})"),
            Kind::Chart(a, b) => write!(f, "Chart({a:?}, {b:?})"),
            Kind::Dressed { inner, .. } => write!(f, "Dressed({inner:?})"),
            Kind::Sum(fs) => write!(f, "Sum({fs:?})"),
            Kind::Scaled(c, inner) => write!(f, "Scaled({c}, {inner:?})"),
            Kind::ScalarTimes { scalar, .. } => write!(f, "ScalarTimes({scalar:?})"),
        }
    }
}

/// A k-valued 1-form on a domain.
#[derive(Debug, Clone)]
pub struct OneForm {
    domain: Domain,
    group: GroupDescriptor,
    kind: Kind,
}

impl OneForm {
    pub fn zero(domain: Domain, group: GroupDescriptor) -> OneForm {
        OneForm { domain, group, kind: Kind::Zero }
    }

    pub fn complex_expr(domain: Domain, group: GroupDescriptor, expr: MatrixExpr) -> Result<OneForm> {
        check_dim(&group, expr.dim())?;
        Ok(OneForm { domain, group, kind: Kind::Complex(Coefficient::ExprZ(expr)) })
    }

    pub fn complex_black_box(domain: Domain, group: GroupDescriptor, f: PointFn) -> OneForm {
        OneForm { domain, group, kind: Kind::Complex(Coefficient::BlackBox(f)) }
    }

    pub fn interval_expr(domain: Domain, group: GroupDescriptor, expr: MatrixExpr) -> Result<OneForm> {
        check_dim(&group, expr.dim())?;
        Ok(OneForm { domain, group, kind: Kind::RealInterval(Coefficient::ExprT(expr)) })
    }

    pub fn interval_black_box(domain: Domain, group: GroupDescriptor, f: PointFn) -> OneForm {
        OneForm { domain, group, kind: Kind::RealInterval(Coefficient::BlackBox(f)) }
    }

    pub fn chart_exprs(
        domain: Domain,
        group: GroupDescriptor,
        xi1: MatrixExpr,
        xi2: MatrixExpr,
    ) -> Result<OneForm> {
        check_dim(&group, xi1.dim())?;
        check_dim(&group, xi2.dim())?;
        Ok(OneForm {
            domain,
            group,
            kind: Kind::Chart(Coefficient::ExprXY(xi1), Coefficient::ExprXY(xi2)),
        })
    }

    pub fn chart_black_box(domain: Domain, group: GroupDescriptor, xi1: PointFn, xi2: PointFn) -> OneForm {
        OneForm {
            domain,
            group,
            kind: Kind::Chart(Coefficient::BlackBox(xi1), Coefficient::BlackBox(xi2)),
        }
    }

    /// Ad(dressing(m))^-1 . alpha_m. The dressing must be a pure, group
    /// valued map on the domain.
    pub fn dressed(alpha: &OneForm, dressing: PointFn) -> OneForm {
        OneForm {
            domain: alpha.domain.clone(),
            group: alpha.group.clone(),
            kind: Kind::Dressed { inner: Box::new(alpha.clone()), dressing },
        }
    }

    pub fn sum(a: &OneForm, b: &OneForm) -> Result<OneForm> {
        if a.group != b.group {
            return Err(Error::invalid("cannot add forms with different target algebras"));
        }
        Ok(OneForm {
            domain: a.domain.clone(),
            group: a.group.clone(),
            kind: Kind::Sum(vec![a.clone(), b.clone()]),
        })
    }

    pub fn sum_of(forms: Vec<OneForm>) -> Result<OneForm> {
        let first = forms
            .first()
            .ok_or_else(|| Error::invalid("sum of forms needs at least one summand"))?;
        let (domain, group) = (first.domain.clone(), first.group.clone());
        if forms.iter().any(|f| f.group != group) {
            return Err(Error::invalid("cannot add forms with different target algebras"));
        }
        Ok(OneForm { domain, group, kind: Kind::Sum(forms) })
    }

    pub fn scaled(&self, c: Complex64) -> OneForm {
        OneForm {
            domain: self.domain.clone(),
            group: self.group.clone(),
            kind: Kind::Scaled(c, Box::new(self.clone())),
        }
    }

    pub fn negated(&self) -> OneForm {
        self.scaled(Complex64::new(-1.0, 0.0))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn value_dim(&self) -> usize {
        self.group.matrix_dim()
    }

    /// Evaluate the form on a tangent vector at a point. The tangent is a
    /// complex number: dz acts complex-linearly, dt uses the coordinate
    /// velocity, dx/dy split it into real and imaginary parts.
    pub fn eval(&self, point: Complex64, tangent: Complex64) -> Result<Matrix> {
        let value = match &self.kind {
            Kind::Zero => Matrix::zeros(self.value_dim()),
            Kind::Complex(c) => c.eval(point)?.scale(tangent),
            Kind::RealInterval(c) => c.eval(point)?.scale(tangent),
            Kind::Chart(c1, c2) => {
                let v1 = c1.eval(point)?.scale_re(tangent.re);
                let v2 = c2.eval(point)?.scale_re(tangent.im);
                v1 + v2
            }
            Kind::Dressed { inner, dressing } => {
                let base = inner.eval(point, tangent)?;
                let k = dressing(point)?;
                let k_inv = k.inverse().map_err(|_| {
                    Error::eval(None, "dressing map produced a singular group element")
                })?;
                crate::matrix::mat_mul(&crate::matrix::mat_mul(&k_inv, &base), &k)
            }
            Kind::Sum(fs) => {
                let mut acc = Matrix::zeros(self.value_dim());
                for f in fs {
                    acc = acc + f.eval(point, tangent)?;
                }
                acc
            }
            Kind::Scaled(c, inner) => inner.eval(point, tangent)?.scale(*c),
            Kind::ScalarTimes { scalar, element } => {
                let s = scalar.eval(point, tangent)?;
                element.scale(s[(0, 0)])
            }
        };
        // spot-check algebra membership for SL targets
        if let GroupDescriptor::SpecialLinear { .. } = self.group {
            let tr = value.trace();
            if tr.norm() > EQ_TOL * (1.0 + value.frobenius_norm()) {
                return Err(Error::eval(
                    None,
                    format!("form value leaves the trace-free algebra (trace {tr})"),
                ));
            }
        }
        Ok(value)
    }

    /// The coefficient in direction `e` at a point (tangent = e), used by the
    /// chart residual.
    fn component(&self, point: Complex64, e: Complex64) -> Result<Matrix> {
        self.eval(point, e)
    }
}

fn check_dim(group: &GroupDescriptor, expr_dim: usize) -> Result<()> {
    if group.matrix_dim() != expr_dim {
        return Err(Error::invalid(format!(
            "form coefficient is {expr_dim}x{expr_dim} but the target algebra needs {}",
            group.matrix_dim()
        )));
    }
    Ok(())
}

/// A Lie-algebra valued path t -> xi(t) on the unit interval, the pullback
/// of a form along a piecewise smooth path. Knot locations record where
/// smoothness may fail.
#[derive(Clone)]
pub struct AlgebraPath {
    dim: usize,
    knots: Vec<f64>,
    eval: Arc<dyn Fn(f64) -> Result<Matrix> + Send + Sync>,
}

impl fmt::Debug for AlgebraPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraPath(dim={}, knots={:?})", self.dim, self.knots)
    }
}

impl AlgebraPath {
    pub fn from_fn(
        dim: usize,
        knots: Vec<f64>,
        eval: Arc<dyn Fn(f64) -> Result<Matrix> + Send + Sync>,
    ) -> Self {
        AlgebraPath { dim, knots, eval }
    }

    pub fn constant(value: Matrix) -> Self {
        let dim = value.dim();
        AlgebraPath {
            dim,
            knots: Vec::new(),
            eval: Arc::new(move |_t| Ok(value.clone())),
        }
    }

    pub fn eval(&self, t: f64) -> Result<Matrix> {
        (self.eval)(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn scaled(&self, c: f64) -> AlgebraPath {
        let inner = self.eval.clone();
        AlgebraPath {
            dim: self.dim,
            knots: self.knots.clone(),
            eval: Arc::new(move |t| Ok(inner(t)?.scale_re(c))),
        }
    }
}

/// Pullback of a form along a path: t -> alpha_{gamma(t)}(gamma'(t)).
pub fn pullback(alpha: &OneForm, gamma: &Path) -> AlgebraPath {
    let form = alpha.clone();
    let path = gamma.clone();
    let knots = gamma.knots();
    AlgebraPath {
        dim: alpha.value_dim(),
        knots,
        eval: Arc::new(move |t| {
            form.eval(path.point(t), path.velocity(t)).map_err(|e| match e {
                Error::Evaluation { msg, .. } => Error::Evaluation { at: Some(t), msg },
                other => other,
            })
        }),
    }
}

/// Maurer-Cartan residual on a plane chart: the maximum over interior grid
/// nodes of || d_x xi_2 - d_y xi_1 + [xi_1, xi_2] ||_F with central
/// differences at the grid spacing. Forms over 1-D domains have no 2-forms
/// to test against, so their residual is exactly zero.
pub fn mc_residual(alpha: &OneForm, grid: (usize, usize)) -> Result<f64> {
    let (x0, x1, y0, y1) = match alpha.domain() {
        Domain::PlaneChart { x0, x1, y0, y1 } => (*x0, *x1, *y0, *y1),
        _ => return Ok(0.0),
    };
    let (nx, ny) = grid;
    if nx < 3 || ny < 3 {
        return Err(Error::invalid("mc_residual needs a grid of at least 3x3"));
    }
    let hx = (x1 - x0) / (nx - 1) as f64;
    let hy = (y1 - y0) / (ny - 1) as f64;
    let ex = Complex64::new(1.0, 0.0);
    let ey = Complex64::new(0.0, 1.0);
    let mut worst = 0.0f64;
    for i in 1..nx - 1 {
        for j in 1..ny - 1 {
            let p = Complex64::new(x0 + i as f64 * hx, y0 + j as f64 * hy);
            let attach = |e: Error| match e {
                Error::Evaluation { msg, .. } => {
                    Error::Evaluation { at: None, msg: format!("{msg} (node {p})") }
                }
                other => other,
            };
            // xi1 is the dx coefficient (tangent ex), xi2 the dy coefficient (tangent ey)
            let xi2_xp = alpha.component(p + hx, ey).map_err(attach)?;
            let xi2_xm = alpha.component(p - hx, ey).map_err(attach)?;
            let d_x_xi2 = (xi2_xp - xi2_xm).scale_re(1.0 / (2.0 * hx));
            let xi1_yp = alpha.component(p + ey * hy, ex).map_err(attach)?;
            let xi1_ym = alpha.component(p - ey * hy, ex).map_err(attach)?;
            let d_y_xi1 = (xi1_yp - xi1_ym).scale_re(1.0 / (2.0 * hy));
            let xi1 = alpha.component(p, ex).map_err(attach)?;
            let xi2 = alpha.component(p, ey).map_err(attach)?;
            let comm = bracket(&xi1, &xi2)?;
            let residual = d_x_xi2 - d_y_xi1 + comm;
            worst = worst.max(residual.frobenius_norm());
        }
    }
    Ok(worst)
}

/// The Behnke-Stein dual basis of a punctured plane: beta_j = dz / (2 pi i (z - p_j))
/// as scalar (1x1) holomorphic forms, dual to the canonical loop basis.
pub fn behnke_stein_basis(domain: &Domain) -> Result<Vec<OneForm>> {
    let punctures = match domain {
        Domain::PuncturedPlane { punctures, .. } if !punctures.is_empty() => punctures.clone(),
        Domain::PuncturedPlane { .. } => {
            return Err(Error::invalid("Behnke-Stein basis needs at least one puncture"))
        }
        _ => return Err(Error::invalid("Behnke-Stein basis lives on a punctured plane")),
    };
    let scalar_group = GroupDescriptor::gl(1, Field::Complex);
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    Ok(punctures
        .iter()
        .map(|&p| {
            let f: PointFn = Arc::new(move |z: Complex64| {
                let den = (z - p) * two_pi_i;
                if den.norm() < 1e-13 {
                    return Err(Error::eval(None, format!("pole of the dual form at {p}")));
                }
                Ok(Matrix::from_rows(1, &[Complex64::new(1.0, 0.0) / den]).unwrap())
            });
            OneForm::complex_black_box(domain.clone(), scalar_group.clone(), f)
        })
        .collect())
}

/// Pointwise product of a scalar (1x1) closed form with a fixed algebra
/// element: alpha = beta . x.
pub fn scalar_times(beta: &OneForm, x: &Matrix, group: &GroupDescriptor) -> Result<OneForm> {
    if beta.value_dim() != 1 {
        return Err(Error::invalid("scalar_times needs a 1x1 scalar form"));
    }
    group.check_algebra_element(x)?;
    Ok(OneForm {
        domain: beta.domain().clone(),
        group: group.clone(),
        kind: Kind::ScalarTimes { scalar: Box::new(beta.clone()), element: x.clone() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{canonical_loop_basis, Path};
    use crate::expr::parse_expr;
    use crate::quad::adaptive_matrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn punctured_origin() -> Domain {
        Domain::punctured_plane(vec![c(0.0, 0.0)], c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn pullback_of_a_dz_over_z_on_unit_circle_is_constant() {
        // alpha = A dz/z pulled back along e^{2 pi i t} gives 2 pi i A
        let domain = punctured_origin();
        let gl2 = GroupDescriptor::gl(2, Field::Complex);
        let expr = parse_expr("[[1/z,0],[0,2/z]]", &["z"]).unwrap();
        let alpha = OneForm::complex_expr(domain, gl2, expr).unwrap();
        let xi = pullback(&alpha, &Path::unit_circle());
        let a = Matrix::diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let want = a.scale(c(0.0, 2.0 * std::f64::consts::PI));
        for k in 0..7 {
            let t = k as f64 / 7.0;
            assert!(xi.eval(t).unwrap().approx_eq(&want, 1e-12));
        }
    }

    #[test]
    fn pullback_of_zero_form_vanishes() {
        let domain = punctured_origin();
        let gl2 = GroupDescriptor::gl(2, Field::Complex);
        let alpha = OneForm::zero(domain, gl2);
        let xi = pullback(&alpha, &Path::unit_circle());
        assert!(xi.eval(0.3).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn pullback_of_constant_form_on_unit_segment() {
        let domain = Domain::plane_chart(-2.0, 2.0, -2.0, 2.0).unwrap();
        let gl2 = GroupDescriptor::gl(2, Field::Complex);
        let expr = parse_expr("[[0,1],[0,0]]", &[]).unwrap();
        let alpha = OneForm::complex_expr(domain, gl2, expr).unwrap();
        let xi = pullback(&alpha, &Path::segment(c(0.0, 0.0), c(1.0, 0.0)));
        let e = Matrix::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(xi.eval(0.5).unwrap().approx_eq(&e, 1e-14));
    }

    #[test]
    fn pullback_linearity_and_reversal() {
        let domain = punctured_origin();
        let gl2 = GroupDescriptor::gl(2, Field::Complex);
        let alpha = OneForm::complex_expr(
            domain.clone(),
            gl2.clone(),
            parse_expr("[[1/z,0],[0,2/z]]", &["z"]).unwrap(),
        )
        .unwrap();
        let beta = OneForm::complex_expr(
            domain.clone(),
            gl2.clone(),
            parse_expr("[[0,1],[z,0]]", &["z"]).unwrap(),
        )
        .unwrap();
        let gamma = Path::arc(c(0.0, 0.0), 1.0, 0.2, 2.9);
        let combo = OneForm::sum(&alpha.scaled(c(2.0, 0.0)), &beta.scaled(c(0.0, -1.5))).unwrap();
        let lhs = pullback(&combo, &gamma);
        let pa = pullback(&alpha, &gamma);
        let pb = pullback(&beta, &gamma);
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            let want = pa.eval(t).unwrap().scale(c(2.0, 0.0)) + pb.eval(t).unwrap().scale(c(0.0, -1.5));
            assert!(lhs.eval(t).unwrap().approx_eq(&want, 1e-12));
            // reversal: pullback along the reversed path flips sign and parameter
            let rev = pullback(&alpha, &gamma.reverse());
            let want_rev = pa.eval(1.0 - t).unwrap().scale_re(-1.0);
            assert!(rev.eval(t).unwrap().approx_eq(&want_rev, 1e-12));
        }
    }

    #[test]
    fn pole_on_path_reports_parameter() {
        let domain = punctured_origin();
        let gl1 = GroupDescriptor::gl(1, Field::Complex);
        let alpha = OneForm::complex_expr(
            domain,
            gl1,
            parse_expr("[[1/z]]", &["z"]).unwrap(),
        )
        .unwrap();
        // segment crossing the pole at t = 0.5
        let xi = pullback(&alpha, &Path::segment(c(-1.0, 0.0), c(1.0, 0.0)));
        match xi.eval(0.5) {
            Err(Error::Evaluation { at: Some(t), .. }) => assert!((t - 0.5).abs() < 1e-12),
            other => panic!("expected evaluation error with location, got {other:?}"),
        }
    }

    #[test]
    fn mc_residual_is_zero_for_one_dimensional_forms() {
        let domain = Domain::interval(0.0, 1.0).unwrap();
        let gl1 = GroupDescriptor::gl(1, Field::Complex);
        let alpha = OneForm::interval_expr(domain, gl1, parse_expr("[[t]]", &["t"]).unwrap()).unwrap();
        assert_eq!(mc_residual(&alpha, (5, 5)).unwrap(), 0.0);
    }

    #[test]
    fn mc_residual_detects_x_dy() {
        // alpha = x dy . X has d alpha = dx ^ dy . X and zero bracket: the
        // residual must stay near ||X||
        let domain = Domain::plane_chart(0.0, 1.0, 0.0, 1.0).unwrap();
        let gl2 = GroupDescriptor::gl(2, Field::Complex);
        let zero = parse_expr("[[0,0],[0,0]]", &["x", "y"]).unwrap();
        let x_dy = parse_expr("[[x,0],[0,0]]", &["x", "y"]).unwrap();
        let alpha = OneForm::chart_exprs(domain, gl2, zero, x_dy).unwrap();
        let r = mc_residual(&alpha, (9, 9)).unwrap();
        assert!((r - 1.0).abs() < 1e-10, "residual {r}");
    }

    #[test]
    fn behnke_stein_duality_single_puncture() {
        let domain = punctured_origin();
        let basis = canonical_loop_basis(&domain).unwrap();
        let betas = behnke_stein_basis(&domain).unwrap();
        let xi = pullback(&betas[0], &basis.loops[0]);
        let mut boundaries = vec![0.0];
        boundaries.extend(xi.knots().iter().copied());
        boundaries.push(1.0);
        let mut total = Matrix::zeros(1);
        for w in boundaries.windows(2) {
            let mut f = |t: f64| xi.eval(t);
            total = total + adaptive_matrix(&mut f, w[0], w[1], 1e-13).unwrap();
        }
        assert!((total[(0, 0)] - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn scalar_times_builds_matrix_form() {
        let domain = punctured_origin();
        let betas = behnke_stein_basis(&domain).unwrap();
        let sl2 = GroupDescriptor::sl(2);
        let x = Matrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let alpha = scalar_times(&betas[0], &x, &sl2).unwrap();
        let v = alpha.eval(c(2.0, 0.0), c(1.0, 0.0)).unwrap();
        // value is (1 / (4 pi i)) X, proportional to X
        let expected_scale = c(1.0, 0.0) / (c(2.0, 0.0) * c(0.0, 2.0 * std::f64::consts::PI));
        assert!(v.approx_eq(&x.scale(expected_scale), 1e-13));
        // zero element gives the zero form
        let zero = scalar_times(&betas[0], &Matrix::zeros(2), &sl2).unwrap();
        assert!(zero.eval(c(2.0, 0.0), c(1.0, 0.0)).unwrap().frobenius_norm() < 1e-15);
    }
}
