//! The left evolution equation gamma'(t) = gamma(t) . xi(t), gamma(0) = 1 on
//! matrix groups, solved by fourth-order two-point Gauss-Magnus stepping.
//!
//! For the left equation the ordered product stacks later times on the
//! right, so the order-4 step reads
//!
//! ```text
//! Omega = (h/2)(xi_1 + xi_2) + (sqrt(3) h^2 / 12) [xi_1, xi_2],
//! gamma <- gamma . exp(Omega)
//! ```
//!
//! with xi_1, xi_2 the Gauss nodes at t + (1/2 -+ sqrt(3)/6) h. Abelian
//! quotient targets short-circuit to plain quadrature of the integrand
//! followed by lattice reduction.

use crate::domain::Path;
use crate::error::{Error, Result};
use crate::forms::{pullback, AlgebraPath, OneForm};
use crate::group::{GroupDescriptor, GroupElement};
use crate::matrix::{bracket, mat_exp, mat_mul, Matrix};
use crate::quad::piecewise_matrix;

const SQRT3: f64 = 1.732050807568877;

/// Step control: a fixed number of Magnus steps per unit parameter, with
/// mandatory splitting at the knots of the integrand. No automatic
/// refinement; callers raise `steps`.
#[derive(Debug, Clone, Copy)]
pub struct EvolControl {
    pub steps: usize,
    /// Run a second pass at half resolution for a step-doubling error estimate.
    pub estimate_error: bool,
}

impl Default for EvolControl {
    fn default() -> Self {
        EvolControl { steps: 256, estimate_error: true }
    }
}

impl EvolControl {
    pub fn with_steps(steps: usize) -> Self {
        EvolControl { steps: steps.max(1), estimate_error: true }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub final_element: GroupElement,
    /// Uniform-grid samples of the whole evolution curve, when requested.
    pub dense: Option<Vec<(f64, GroupElement)>>,
    /// Step-doubling estimate of the endpoint error (Frobenius), 0 when the
    /// estimate pass is disabled.
    pub error_estimate: f64,
    pub steps_used: usize,
}

/// Build sorted step boundaries on [0,1]: knots are mandatory, each knot
/// interval is split uniformly into about `steps * length` pieces, and any
/// `mandatory` points (dense sample times) are inserted exactly.
fn step_boundaries(knots: &[f64], steps: usize, mandatory: &[f64]) -> Vec<f64> {
    let mut anchors = vec![0.0];
    anchors.extend(knots.iter().copied().filter(|t| *t > 1e-12 && *t < 1.0 - 1e-12));
    anchors.extend(mandatory.iter().copied().filter(|t| *t > 1e-12 && *t < 1.0 - 1e-12));
    anchors.push(1.0);
    anchors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    anchors.dedup_by(|a, b| (*a - *b).abs() < 1e-13);

    let mut boundaries = Vec::new();
    for w in anchors.windows(2) {
        let (a, b) = (w[0], w[1]);
        let pieces = ((b - a) * steps as f64).ceil().max(1.0) as usize;
        for k in 0..pieces {
            boundaries.push(a + (b - a) * k as f64 / pieces as f64);
        }
    }
    boundaries.push(1.0);
    boundaries
}

/// One fine Magnus pass over the given boundaries, optionally recording the
/// group element at requested sample times (which must be boundary points).
fn magnus_pass(
    xi: &AlgebraPath,
    boundaries: &[f64],
    record_at: Option<&[f64]>,
) -> Result<(Matrix, Vec<Matrix>)> {
    let n = xi.dim();
    let mut g = Matrix::identity(n);
    let mut recorded = Vec::new();
    let mut next_record = 0usize;
    if let Some(times) = record_at {
        while next_record < times.len() && times[next_record] <= boundaries[0] + 1e-13 {
            recorded.push(g.clone());
            next_record += 1;
        }
    }
    for (step, w) in boundaries.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let h = b - a;
        let c1 = a + (0.5 - SQRT3 / 6.0) * h;
        let c2 = a + (0.5 + SQRT3 / 6.0) * h;
        let xi1 = xi.eval(c1)?;
        let xi2 = xi.eval(c2)?;
        let omega = (xi1.clone() + xi2.clone()).scale_re(h / 2.0)
            + bracket(&xi1, &xi2)?.scale_re(SQRT3 * h * h / 12.0);
        g = mat_mul(&g, &mat_exp(&omega)?);
        if !g.is_finite() {
            return Err(Error::NumericBlowup { step });
        }
        if let Some(times) = record_at {
            while next_record < times.len() && times[next_record] <= b + 1e-13 {
                recorded.push(g.clone());
                next_record += 1;
            }
        }
    }
    Ok((g, recorded))
}

fn wrap_final(k: &GroupDescriptor, m: Matrix) -> Result<GroupElement> {
    match k {
        GroupDescriptor::AbelianQuotient { .. } => GroupElement::from_vector(k.clone(), m.diagonal()),
        _ => GroupElement::from_matrix(k.clone(), m),
    }
}

/// evol: endpoint of the evolution of xi.
pub fn evol(k: &GroupDescriptor, xi: &AlgebraPath, control: EvolControl) -> Result<EvolutionResult> {
    evol_impl(k, xi, control, None, &[])
}

/// Evol: the whole evolution curve, sampled on the uniform grid
/// t_j = j / samples (so `samples = 1` records just the endpoints).
pub fn evol_dense(
    k: &GroupDescriptor,
    xi: &AlgebraPath,
    samples: usize,
    control: EvolControl,
) -> Result<EvolutionResult> {
    let samples = samples.max(1);
    let times: Vec<f64> = (0..=samples).map(|j| j as f64 / samples as f64).collect();
    evol_impl(k, xi, control, Some(times), &[])
}

/// Shared driver; `extra_boundaries` lets transport force near-puncture caps.
pub(crate) fn evol_impl(
    k: &GroupDescriptor,
    xi: &AlgebraPath,
    control: EvolControl,
    sample_times: Option<Vec<f64>>,
    extra_boundaries: &[f64],
) -> Result<EvolutionResult> {
    if xi.dim() != k.matrix_dim() {
        return Err(Error::invalid("integrand dimension does not match the group"));
    }
    let mut mandatory: Vec<f64> = extra_boundaries.to_vec();
    if let Some(times) = &sample_times {
        mandatory.extend(times.iter().copied());
    }
    let steps = control.steps.max(1);
    let fine = step_boundaries(xi.knots(), steps, &mandatory);

    if k.is_abelian() {
        return evol_abelian(k, xi, control, sample_times, &fine);
    }

    let (final_mat, recorded) = magnus_pass(xi, &fine, sample_times.as_deref())?;

    let error_estimate = if control.estimate_error && steps >= 2 {
        let coarse = step_boundaries(xi.knots(), (steps / 2).max(1), &mandatory);
        let (coarse_mat, _) = magnus_pass(xi, &coarse, None)?;
        coarse_mat.distance(&final_mat)
    } else {
        0.0
    };

    let dense = match &sample_times {
        Some(times) => Some(
            times
                .iter()
                .zip(recorded)
                .map(|(&t, m)| Ok((t, wrap_final(k, m)?)))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };

    Ok(EvolutionResult {
        final_element: wrap_final(k, final_mat)?,
        dense,
        error_estimate,
        steps_used: fine.len() - 1,
    })
}

/// Abelian quotients: the evolution is the quadrature of the integrand
/// reduced modulo the lattice (composite 5-point Gauss-Legendre per step).
fn evol_abelian(
    k: &GroupDescriptor,
    xi: &AlgebraPath,
    control: EvolControl,
    sample_times: Option<Vec<f64>>,
    fine: &[f64],
) -> Result<EvolutionResult> {
    let integral_to = |upper: f64, boundaries: &[f64]| -> Result<Matrix> {
        let cut: Vec<f64> = boundaries.iter().copied().filter(|t| *t <= upper + 1e-13).collect();
        if cut.len() < 2 {
            return Ok(Matrix::zeros(xi.dim()));
        }
        piecewise_matrix(&mut |t| xi.eval(t), &cut, 1)
    };
    let total = integral_to(1.0, fine)?;
    let error_estimate = if control.estimate_error {
        let coarse = step_boundaries(xi.knots(), (control.steps / 2).max(1), &[]);
        let coarse_total = piecewise_matrix(&mut |t| xi.eval(t), &coarse, 1)?;
        coarse_total.distance(&total)
    } else {
        0.0
    };
    let dense = match &sample_times {
        Some(times) => {
            let mut out = Vec::with_capacity(times.len());
            for &t in times.iter() {
                let part = integral_to(t, fine)?;
                out.push((t, wrap_final(k, part)?));
            }
            Some(out)
        }
        None => None,
    };
    Ok(EvolutionResult {
        final_element: wrap_final(k, total)?,
        dense,
        error_estimate,
        steps_used: fine.len() - 1,
    })
}

/// Transport of a form along a path: evol of the pullback. Steps are capped
/// near punctures so the chord per step stays below a quarter of the
/// distance to the nearest one.
pub fn transport(
    k: &GroupDescriptor,
    alpha: &OneForm,
    gamma: &Path,
    control: EvolControl,
) -> Result<GroupElement> {
    let xi = pullback(alpha, gamma);
    let extra = puncture_caps(alpha, gamma, control.steps)?;
    let res = evol_impl(k, &xi, control, None, &extra)?;
    Ok(res.final_element)
}

/// Transport with the partial values along the path sampled on a uniform
/// parameter grid.
pub fn transport_dense(
    k: &GroupDescriptor,
    alpha: &OneForm,
    gamma: &Path,
    samples: usize,
    control: EvolControl,
) -> Result<EvolutionResult> {
    let xi = pullback(alpha, gamma);
    let extra = puncture_caps(alpha, gamma, control.steps)?;
    let samples = samples.max(1);
    let times: Vec<f64> = (0..=samples).map(|j| j as f64 / samples as f64).collect();
    evol_impl(k, &xi, control, Some(times), &extra)
}

/// Extra step boundaries forcing |dz| <= rho/4 near the punctures of the
/// form's domain; errors out when the path effectively touches a puncture.
pub(crate) fn puncture_caps(alpha: &OneForm, gamma: &Path, steps: usize) -> Result<Vec<f64>> {
    let punctures = alpha.domain().punctures();
    if punctures.is_empty() {
        return Ok(Vec::new());
    }
    for q in punctures {
        let d = gamma.distance_to_point(*q);
        if d <= 1e-9 {
            return Err(Error::eval(
                None,
                format!("path passes through the puncture at {q} (distance {d:.1e})"),
            ));
        }
    }
    let mut anchors = vec![0.0];
    anchors.extend(gamma.knots());
    anchors.push(1.0);
    let mut extra = Vec::new();
    for w in anchors.windows(2) {
        let (a, b) = (w[0], w[1]);
        // chord-based length estimate plus the exact closest approach of the
        // sub-path (probe points refine the per-piece distance further)
        let probes = 64;
        let mut length = 0.0;
        let mut rho = f64::INFINITY;
        let mut prev = gamma.point(a);
        for i in 0..=probes {
            let t = a + (b - a) * i as f64 / probes as f64;
            let p = gamma.point(t);
            if i > 0 {
                length += (p - prev).norm();
            }
            prev = p;
            for q in punctures {
                rho = rho.min((p - q).norm());
            }
        }
        if !rho.is_finite() || rho <= 1e-9 {
            // the global check above bounds the true distance; fall back to it
            rho = punctures
                .iter()
                .map(|q| gamma.distance_to_point(*q))
                .fold(f64::INFINITY, f64::min)
                .max(1e-9);
        }
        let needed = (length / (rho / 4.0)).ceil() as usize;
        let default_here = ((b - a) * steps as f64).ceil() as usize;
        if needed > default_here.max(1) {
            for j in 1..needed {
                extra.push(a + (b - a) * j as f64 / needed as f64);
            }
        }
    }
    Ok(extra)
}

/// Defect of the tangent formula at zero: || (evol(eps xi) - 1)/eps - int_0^1 xi ||,
/// expected O(eps) with eps = 1e-6.
pub fn tangent_at_zero_check(k: &GroupDescriptor, xi: &AlgebraPath, control: EvolControl) -> Result<f64> {
    let eps = 1e-6;
    let scaled = xi.scaled(eps);
    let fine = step_boundaries(xi.knots(), control.steps.max(1), &[]);
    let (g, _) = magnus_pass(&scaled, &fine, None)?;
    let n = xi.dim();
    let difference = (g - Matrix::identity(n)).scale_re(1.0 / eps);
    let integral = piecewise_matrix(&mut |t| xi.eval(t), &fine, 1)?;
    let _ = k;
    Ok(difference.distance(&integral))
}
