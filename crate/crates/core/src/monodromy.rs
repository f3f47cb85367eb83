//! Period homomorphisms and integrability decisions over loop bases, the
//! period-vector map with its Behnke-Stein sections, abelian lattice periods,
//! and component classification of mapping-group elements.

use num_complex::Complex64;

use crate::calculus::{gauge_action, FullMapElement};
use crate::domain::{word_loop, Domain, LoopBasis, Path};
use crate::error::{Error, Result};
use crate::evolve::{transport, EvolControl};
use crate::forms::{behnke_stein_basis, pullback, scalar_times, OneForm};
use crate::group::{group_multiply, GroupDescriptor, GroupElement, Lattice};
use crate::matrix::Matrix;
use crate::quad::adaptive_matrix;
use crate::{LATTICE_TOL, PERIOD_TOL};

/// The period homomorphism recorded on a loop basis: one group value per
/// generator.
#[derive(Debug, Clone)]
pub struct PeriodMap {
    pub group: GroupDescriptor,
    pub values: Vec<GroupElement>,
}

impl PeriodMap {
    pub fn worst_identity_distance(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.distance_to_identity())
            .fold(0.0, f64::max)
    }

    /// Integrability criterion: the homomorphism is trivial.
    pub fn is_trivial(&self, tol: f64) -> bool {
        self.worst_identity_distance() < tol
    }
}

/// Period of a form over a closed loop: the transport around it.
pub fn period(
    k: &GroupDescriptor,
    alpha: &OneForm,
    loop_path: &Path,
    control: EvolControl,
) -> Result<GroupElement> {
    if !alpha.domain().points_equal(loop_path.start(), loop_path.end()) {
        return Err(Error::invalid("period needs a closed loop"));
    }
    transport(k, alpha, loop_path, control)
}

/// The map P: componentwise periods over a loop basis.
pub fn period_vector(
    k: &GroupDescriptor,
    alpha: &OneForm,
    basis: &LoopBasis,
    control: EvolControl,
) -> Result<PeriodMap> {
    let values: Result<Vec<GroupElement>> = basis
        .loops
        .iter()
        .map(|lp| period(k, alpha, lp, control))
        .collect();
    Ok(PeriodMap { group: k.clone(), values: values? })
}

/// Integrability decision at the default period tolerance.
pub fn is_integrable(
    k: &GroupDescriptor,
    alpha: &OneForm,
    basis: &LoopBasis,
    control: EvolControl,
) -> Result<bool> {
    Ok(period_vector(k, alpha, basis, control)?.is_trivial(PERIOD_TOL))
}

/// Defect of the homomorphism property on a word in the generators, under
/// the traverse-first convention (the first letter is traversed first and
/// multiplies from the left).
pub fn homomorphism_check(
    k: &GroupDescriptor,
    alpha: &OneForm,
    basis: &LoopBasis,
    word: &[(usize, i64)],
    control: EvolControl,
) -> Result<f64> {
    let combined = word_loop(basis, word)?;
    let lhs = period(k, alpha, &combined, control)?;
    let mut rhs = k.identity();
    for &(gen, exp) in word {
        let base = period(k, alpha, &basis.loops[gen], control)?;
        let factor = if exp >= 0 { base } else { base.inverse()? };
        for _ in 0..exp.unsigned_abs() {
            rhs = group_multiply(&rhs, &factor)?;
        }
    }
    lhs.distance(&rhs)
}

/// The Behnke-Stein section sigma: x = (x_1, ..., x_r) -> sum_j beta_j . x_j,
/// a right inverse of the tangent of the period-vector map at zero.
pub fn bs_section(domain: &Domain, k: &GroupDescriptor, x: &[Matrix]) -> Result<OneForm> {
    let betas = behnke_stein_basis(domain)?;
    if x.len() != betas.len() {
        return Err(Error::invalid(format!(
            "section needs one algebra element per generator ({} != {})",
            x.len(),
            betas.len()
        )));
    }
    let summands: Result<Vec<OneForm>> = betas
        .iter()
        .zip(x.iter())
        .map(|(beta, xj)| scalar_times(beta, xj, k))
        .collect();
    OneForm::sum_of(summands?)
}

/// The dressed section sigma_alpha(x) = alpha + Ad(f)^-1 . sigma(x), where f
/// is the full element with delta(f) = alpha. Its periods coincide with
/// those of the plain section.
pub fn dressed_section(
    f: &FullMapElement,
    x: &[Matrix],
    control: EvolControl,
) -> Result<OneForm> {
    let sigma = bs_section(f.based.domain(), f.based.group(), x)?;
    gauge_action(&sigma, f, control)
}

/// Result of an abelian lattice period: the raw loop integral, its coset,
/// and the distance to the nearest lattice point in generator coordinates.
#[derive(Debug, Clone)]
pub struct AbelianPeriod {
    pub integral: Vec<Complex64>,
    pub coset: GroupElement,
    pub lattice_distance: f64,
}

impl AbelianPeriod {
    pub fn in_lattice(&self) -> bool {
        self.lattice_distance < LATTICE_TOL
    }
}

/// Abelian period q_K(int_gamma alpha) by Gauss-Legendre quadrature of the
/// pullback, followed by lattice reduction.
pub fn abelian_period(
    alpha: &OneForm,
    loop_path: &Path,
    lattice: &Lattice,
) -> Result<AbelianPeriod> {
    let integral = loop_integral(alpha, loop_path)?;
    let v = integral.diagonal();
    if v.len() != lattice.dim() {
        return Err(Error::invalid("form dimension does not match the lattice"));
    }
    let distance = lattice.coordinate_distance(&v)?;
    let k = GroupDescriptor::abelian(lattice.clone());
    let coset = GroupElement::from_vector(k, v.clone())?;
    Ok(AbelianPeriod { integral: v, coset, lattice_distance: distance })
}

/// Plain (ungrouped) loop integral of a form by adaptive quadrature over the
/// smooth pieces.
pub fn loop_integral(alpha: &OneForm, loop_path: &Path) -> Result<Matrix> {
    let xi = pullback(alpha, loop_path);
    let mut boundaries = vec![0.0];
    boundaries.extend(xi.knots().iter().copied());
    boundaries.push(1.0);
    let mut total = Matrix::zeros(xi.dim());
    for w in boundaries.windows(2) {
        total = total + adaptive_matrix(&mut |t| xi.eval(t), w[0], w[1], 1e-13)?;
    }
    Ok(total)
}

/// The component invariant of a mapping-group element with abelian target:
/// per basis loop, the loop integral of its logarithmic derivative expressed
/// in integer lattice coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentClass {
    pub classes: Vec<Vec<i64>>,
}

impl ComponentClass {
    pub fn is_trivial(&self) -> bool {
        self.classes.iter().all(|c| c.iter().all(|&k| k == 0))
    }

    pub fn same_component(&self, other: &ComponentClass) -> bool {
        self == other
    }

    /// Classwise sum (the invariant of a pointwise product of elements).
    pub fn add(&self, other: &ComponentClass) -> Result<ComponentClass> {
        if self.classes.len() != other.classes.len() {
            return Err(Error::invalid("component classes over different bases"));
        }
        Ok(ComponentClass {
            classes: self
                .classes
                .iter()
                .zip(other.classes.iter())
                .map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| x + y).collect())
                .collect(),
        })
    }
}

/// Component class of the element with logarithmic derivative `alpha` in an
/// abelian quotient k/Gamma: each basis integral must land on a lattice
/// point within a 0.25 rounding margin in generator coordinates.
pub fn component_class(
    alpha: &OneForm,
    basis: &LoopBasis,
    lattice: &Lattice,
) -> Result<ComponentClass> {
    let mut classes = Vec::with_capacity(basis.loops.len());
    for lp in &basis.loops {
        let integral = loop_integral(alpha, lp)?;
        let coords = lattice.coordinates(&integral.diagonal())?;
        let mut class = Vec::with_capacity(coords.len());
        for c in coords {
            let rounded = (c + 0.5).floor();
            if (c - rounded).abs() > 0.25 {
                return Err(Error::Precision(format!(
                    "lattice coordinate {c} violates the 0.25 rounding margin"
                )));
            }
            class.push(rounded as i64);
        }
        classes.push(class);
    }
    Ok(ComponentClass { classes })
}

/// The lattice 2 pi i Z in C, presenting C^x as the abelian quotient
/// C / 2 pi i Z through the exponential parameterization.
pub fn c_star_lattice() -> Lattice {
    Lattice::new(1, vec![vec![Complex64::new(0.0, 2.0 * std::f64::consts::PI)]])
        .expect("2 pi i generates a lattice")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{BasedMapElement, IntegrabilityStatus};
    use crate::domain::canonical_loop_basis;
    use crate::expr::parse_expr;
    use crate::group::Field;
    use crate::matrix::mat_exp;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gl2() -> GroupDescriptor {
        GroupDescriptor::gl(2, Field::Complex)
    }

    fn punctured_origin() -> Domain {
        Domain::punctured_plane(vec![c(0.0, 0.0)], c(1.0, 0.0)).unwrap()
    }

    fn a_dz_over_z(a_entries: &[f64]) -> OneForm {
        let domain = punctured_origin();
        let text = format!(
            "[[{}/z,{}/z],[{}/z,{}/z]]",
            a_entries[0], a_entries[1], a_entries[2], a_entries[3]
        );
        let expr = parse_expr(&text, &["z"]).unwrap();
        OneForm::complex_expr(domain, gl2(), expr).unwrap()
    }

    #[test]
    fn period_of_example_form_is_exp_two_pi_i_a() {
        let control = EvolControl::default();
        let alpha = a_dz_over_z(&[0.3, 0.1, 0.0, -0.2]);
        let a = Matrix::from_real_rows(2, &[0.3, 0.1, 0.0, -0.2]).unwrap();
        let basis = canonical_loop_basis(&punctured_origin()).unwrap();
        let got = period(&gl2(), &alpha, &basis.loops[0], control).unwrap();
        let want = mat_exp(&a.scale(c(0.0, 2.0 * std::f64::consts::PI))).unwrap();
        assert!(got.matrix().unwrap().distance(&want) < 1e-8);
        // loop traversed twice
        let double = word_loop(&basis, &[(0, 2)]).unwrap();
        let got2 = period(&gl2(), &alpha, &double, control).unwrap();
        let want2 = mat_exp(&a.scale(c(0.0, 4.0 * std::f64::consts::PI))).unwrap();
        assert!(got2.matrix().unwrap().distance(&want2) < 1e-8);
    }

    #[test]
    fn exact_form_has_identity_period() {
        // alpha = dz . X is exact (X z integrates it)
        let control = EvolControl::default();
        let domain = punctured_origin();
        let expr = parse_expr("[[0.4,0.1],[0,-0.4]]", &[]).unwrap();
        let alpha = OneForm::complex_expr(domain.clone(), gl2(), expr).unwrap();
        let basis = canonical_loop_basis(&domain).unwrap();
        let p = period(&gl2(), &alpha, &basis.loops[0], control).unwrap();
        assert!(p.distance_to_identity() < PERIOD_TOL);
    }

    #[test]
    fn integrability_dichotomy_of_diagonal_forms() {
        let control = EvolControl::default();
        let domain = punctured_origin();
        let basis = canonical_loop_basis(&domain).unwrap();
        // diag(1,2) dz/z: integer spectrum, integrable
        let good = OneForm::complex_expr(
            domain.clone(),
            gl2(),
            parse_expr("[[1/z,0],[0,2/z]]", &["z"]).unwrap(),
        )
        .unwrap();
        let pm = period_vector(&gl2(), &good, &basis, control).unwrap();
        assert!(pm.is_trivial(PERIOD_TOL), "distance {}", pm.worst_identity_distance());
        // diag(1/2, 1/3) dz/z: periods far from the identity
        let bad = OneForm::complex_expr(
            domain.clone(),
            gl2(),
            parse_expr("[[0.5/z,0],[0,1/(3*z)]]", &["z"]).unwrap(),
        )
        .unwrap();
        let pm = period_vector(&gl2(), &bad, &basis, control).unwrap();
        assert!(pm.worst_identity_distance() >= 0.5);
        // zero form: all periods identity
        let zero = OneForm::zero(domain, gl2());
        let pm = period_vector(&gl2(), &zero, &basis, control).unwrap();
        assert!(pm.worst_identity_distance() < 1e-12);
    }

    #[test]
    fn homomorphism_property_on_words() {
        let control = EvolControl::default();
        let domain = Domain::punctured_plane(vec![c(0.0, 0.0), c(4.0, 0.0)], c(2.0, 0.0)).unwrap();
        let basis = canonical_loop_basis(&domain).unwrap();
        // noncommuting residues at the two punctures
        let expr = parse_expr("[[0.3/z,0.2/z],[0,-0.3/z]]", &["z"]).unwrap();
        let a1 = OneForm::complex_expr(domain.clone(), gl2(), expr).unwrap();
        let expr2 = parse_expr("[[0,0],[0.25/(z-4),0]]", &["z"]).unwrap();
        let a2 = OneForm::complex_expr(domain.clone(), gl2(), expr2).unwrap();
        let alpha = OneForm::sum(&a1, &a2).unwrap();
        // single generator: defect is integrator noise
        assert!(homomorphism_check(&gl2(), &alpha, &basis, &[(0, 1)], control).unwrap() < 1e-10);
        // gamma gamma^-1
        assert!(homomorphism_check(&gl2(), &alpha, &basis, &[(0, 1), (0, -1)], control).unwrap() < 1e-8);
        // mixed word
        let defect = homomorphism_check(&gl2(), &alpha, &basis, &[(0, 1), (1, 1)], control).unwrap();
        assert!(defect < 1e-6, "word defect {defect}");
    }

    #[test]
    fn homotopy_invariance_of_periods() {
        // two loops around the same puncture with different radii and base
        // detours give the same period
        let control = EvolControl::default();
        let alpha = a_dz_over_z(&[0.3, 0.1, 0.2, -0.3]);
        let a_loop = |r: f64| {
            let entry = c(r, 0.0);
            Path::Concat(vec![
                Path::segment(c(1.0, 0.0), entry),
                Path::arc(c(0.0, 0.0), r, 0.0, 2.0 * std::f64::consts::PI),
                Path::segment(entry, c(1.0, 0.0)),
            ])
        };
        let p1 = period(&gl2(), &alpha, &a_loop(0.5), control).unwrap();
        let p2 = period(&gl2(), &alpha, &a_loop(0.8), control).unwrap();
        assert!(p1.distance(&p2).unwrap() < 1e-6);
    }

    #[test]
    fn section_periods_exponentiate_the_duality() {
        // period of sigma(x) over gamma_1 = exp(x) because int_{gamma_1} beta_1 = 1
        let control = EvolControl::default();
        let domain = punctured_origin();
        let basis = canonical_loop_basis(&domain).unwrap();
        let sl2 = GroupDescriptor::sl(2);
        let x = Matrix::from_real_rows(2, &[0.4, 0.3, 0.2, -0.4]).unwrap();
        let sigma = bs_section(&domain, &sl2, std::slice::from_ref(&x)).unwrap();
        let got = period(&sl2, &sigma, &basis.loops[0], control).unwrap();
        let want = mat_exp(&x).unwrap();
        assert!(got.matrix().unwrap().distance(&want) < 1e-6);
        // doubled loop: exp(2x)
        let double = word_loop(&basis, &[(0, 2)]).unwrap();
        let got2 = period(&sl2, &sigma, &double, control).unwrap();
        assert!(got2.matrix().unwrap().distance(&mat_exp(&x.scale_re(2.0)).unwrap()) < 1e-6);
    }

    #[test]
    fn dressed_section_preserves_periods() {
        let control = EvolControl::default();
        let domain = punctured_origin();
        let basis = canonical_loop_basis(&domain).unwrap();
        let gl = gl2();
        // an integrable alpha = diag(1,2) dz/z, with f its primitive
        let alpha_form = OneForm::complex_expr(
            domain.clone(),
            gl.clone(),
            parse_expr("[[1/z,0],[0,2/z]]", &["z"]).unwrap(),
        )
        .unwrap();
        let based = BasedMapElement::new(alpha_form, c(1.0, 0.0))
            .unwrap()
            .with_status(IntegrabilityStatus::Verified);
        let f = FullMapElement::new(gl.identity(), based).unwrap();
        let x = Matrix::from_real_rows(2, &[0.2, 0.1, 0.0, -0.1]).unwrap();
        let sigma = bs_section(&domain, &gl, std::slice::from_ref(&x)).unwrap();
        let sigma_alpha = dressed_section(&f, &[x], control).unwrap();
        let p_plain = period_vector(&gl, &sigma, &basis, control).unwrap();
        let p_dressed = period_vector(&gl, &sigma_alpha, &basis, control).unwrap();
        for (a, b) in p_plain.values.iter().zip(p_dressed.values.iter()) {
            assert!(a.distance(b).unwrap() < 1e-6, "period changed: {}", a.distance(b).unwrap());
        }
    }

    #[test]
    fn abelian_periods_and_lattice_membership() {
        let domain = punctured_origin();
        let basis = canonical_loop_basis(&domain).unwrap();
        let gl1 = GroupDescriptor::gl(1, Field::Complex);
        let z_lattice = Lattice::new(1, vec![vec![c(1.0, 0.0)]]).unwrap();
        // alpha = dz / (2 pi i z): integral over the basis loop is 1, a
        // lattice point
        let betas = behnke_stein_basis(&domain).unwrap();
        let p = abelian_period(&betas[0], &basis.loops[0], &z_lattice).unwrap();
        assert!((p.integral[0] - c(1.0, 0.0)).norm() < 1e-10);
        assert!(p.in_lattice());
        assert!(p.coset.distance_to_identity() < 1e-9);
        // half of it is not a lattice point
        let half = betas[0].scaled(c(0.5, 0.0));
        let p = abelian_period(&half, &basis.loops[0], &z_lattice).unwrap();
        assert!(!p.in_lattice());
        assert!((p.coset.vector().unwrap()[0] - c(0.5, 0.0)).norm() < 1e-9);
        // exact form: zero integral
        let const_form = OneForm::complex_expr(
            domain.clone(),
            gl1,
            parse_expr("[[0.7]]", &[]).unwrap(),
        )
        .unwrap();
        let p = abelian_period(&const_form, &basis.loops[0], &z_lattice).unwrap();
        assert!(p.integral[0].norm() < 1e-10);
        assert!(p.in_lattice());
    }

    #[test]
    fn component_classes_of_powers() {
        // f(z) = z^k on C^x has class (k) for the C^x lattice 2 pi i Z
        let domain = punctured_origin();
        let basis = canonical_loop_basis(&domain).unwrap();
        let lattice = c_star_lattice();
        let gl1 = GroupDescriptor::gl(1, Field::Complex);
        for k in -5i64..=5 {
            let expr = parse_expr(&format!("[[{k}/z]]"), &["z"]).unwrap();
            let alpha = OneForm::complex_expr(domain.clone(), gl1.clone(), expr).unwrap();
            let class = component_class(&alpha, &basis, &lattice).unwrap();
            assert_eq!(class.classes, vec![vec![k]]);
        }
        // product of z^1 and z^3: classes add
        let a1 = component_class(
            &OneForm::complex_expr(domain.clone(), gl1.clone(), parse_expr("[[1/z]]", &["z"]).unwrap()).unwrap(),
            &basis,
            &lattice,
        )
        .unwrap();
        let a3 = component_class(
            &OneForm::complex_expr(domain.clone(), gl1.clone(), parse_expr("[[3/z]]", &["z"]).unwrap()).unwrap(),
            &basis,
            &lattice,
        )
        .unwrap();
        assert_eq!(a1.add(&a3).unwrap().classes, vec![vec![4]]);
        assert!(!a1.same_component(&a3));
        // exp(g) with entire g: class 0
        let expr = parse_expr("[[2*z+1]]", &["z"]).unwrap();
        let alpha = OneForm::complex_expr(domain.clone(), gl1, expr).unwrap();
        let class = component_class(&alpha, &basis, &lattice).unwrap();
        assert!(class.is_trivial());
    }

    #[test]
    fn class_obstruction_versus_integrability() {
        // a nonzero component class means the loop integral is a nonzero
        // lattice element: the element lives in the quotient but never lifts
        // to the cover (no global primitive); zero class with vanishing
        // periods reconstructs globally
        let domain = punctured_origin();
        let basis = canonical_loop_basis(&domain).unwrap();
        let lattice = c_star_lattice();
        let gl1 = GroupDescriptor::gl(1, Field::Complex);

        // the log derivative of z^2: class (2)
        let z2 =
            OneForm::complex_expr(domain.clone(), gl1.clone(), parse_expr("[[2/z]]", &["z"]).unwrap())
                .unwrap();
        let class = component_class(&z2, &basis, &lattice).unwrap();
        assert!(!class.is_trivial());
        // in the quotient the period is a lattice point (z^2 is fine as a
        // C^x-valued map) ...
        let p = abelian_period(&z2, &basis.loops[0], &lattice).unwrap();
        assert!(p.in_lattice());
        // ... but the raw integral 4 pi i obstructs any C-valued primitive
        assert!(p.integral[0].norm() > 0.5);

        // a form that is not integrable even in the quotient
        let bad = OneForm::complex_expr(domain.clone(), gl1.clone(), parse_expr("[[0.3/z]]", &["z"]).unwrap())
            .unwrap();
        assert!(!abelian_period(&bad, &basis.loops[0], &lattice).unwrap().in_lattice());

        // trivial class, vanishing periods: alpha = c dz reconstructs
        let good = OneForm::complex_expr(domain.clone(), gl1, parse_expr("[[0.4]]", &[]).unwrap())
            .unwrap();
        assert!(component_class(&good, &basis, &lattice).unwrap().is_trivial());
        let p = abelian_period(&good, &basis.loops[0], &lattice).unwrap();
        assert!(p.in_lattice() && p.integral[0].norm() < 1e-10);
        let based = BasedMapElement::new(good, c(1.0, 0.0))
            .unwrap()
            .with_status(IntegrabilityStatus::Verified);
        let value = based.evol_at(c(2.0, 0.0), EvolControl::default()).unwrap();
        let want = mat_exp(&Matrix::from_rows(1, &[c(0.4, 0.0)]).unwrap()).unwrap();
        assert!(value.matrix().unwrap().distance(&want) < 1e-9);
    }

    #[test]
    fn circle_domain_periods() {
        // f(theta) = exp(c theta) closes up on the circle iff exp(2 pi c) = 1
        let control = EvolControl::default();
        let circle = Domain::circle();
        let basis = canonical_loop_basis(&circle).unwrap();
        let gl1 = GroupDescriptor::gl(1, Field::Complex);
        let closed = OneForm::interval_expr(circle.clone(), gl1.clone(), parse_expr("[[i]]", &[]).unwrap())
            .unwrap();
        let pm = period_vector(&gl1, &closed, &basis, control).unwrap();
        assert!(pm.is_trivial(PERIOD_TOL), "distance {}", pm.worst_identity_distance());
        let open = OneForm::interval_expr(circle, gl1.clone(), parse_expr("[[0.5]]", &[]).unwrap())
            .unwrap();
        let pm = period_vector(&gl1, &open, &basis, control).unwrap();
        assert!(pm.worst_identity_distance() > 1.0);
    }

    #[test]
    fn rounding_margin_violation_is_an_error() {
        let domain = punctured_origin();
        let basis = canonical_loop_basis(&domain).unwrap();
        let z_lattice = Lattice::new(1, vec![vec![c(1.0, 0.0)]]).unwrap();
        let betas = behnke_stein_basis(&domain).unwrap();
        // 0.4 of a generator: coordinate 0.4 is farther than 0.25 from any integer
        let off = betas[0].scaled(c(0.4, 0.0));
        assert!(matches!(
            component_class(&off, &basis, &z_lattice),
            Err(Error::Precision(_))
        ));
    }

    #[test]
    fn scalar_times_periods_on_integral_loops() {
        // for closed scalar beta and x: period(beta . x, gamma) = exp(I(gamma) x)
        let control = EvolControl::default();
        let domain = punctured_origin();
        let basis = canonical_loop_basis(&domain).unwrap();
        let sl2 = GroupDescriptor::sl(2);
        let x = Matrix::from_real_rows(2, &[0.0, 0.7, 0.4, 0.0]).unwrap();
        let betas = behnke_stein_basis(&domain).unwrap();
        let alpha = scalar_times(&betas[0], &x, &sl2).unwrap();
        for n in 0..=2i64 {
            let lp = word_loop(&basis, &[(0, n)]).unwrap();
            let got = period(&sl2, &alpha, &lp, control).unwrap();
            let want = mat_exp(&x.scale_re(n as f64)).unwrap();
            assert!(
                got.matrix().unwrap().distance(&want) < 1e-6,
                "scalar-times period defect at n={n}: {}",
                got.matrix().unwrap().distance(&want)
            );
        }
    }
}
