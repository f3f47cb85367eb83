//! The mapping group C(M,K) = K x| C_*(M,K) realized on logarithmic
//! derivatives: multiplication and inversion of based elements, evaluation by
//! transport along canonical paths, logarithmic derivatives of sampled maps,
//! cocycle and gauge utilities, and the pointwise exp/log pair.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;

use crate::domain::{canonical_loop_basis, Domain, Path};
use crate::error::{Error, Result};
use crate::evolve::{transport, EvolControl};
use crate::forms::{OneForm, PointFn};
use crate::group::{group_multiply, GroupDescriptor, GroupElement};
use crate::matrix::{mat_exp, mat_log_principal, mat_mul, Matrix};
use crate::{EQ_TOL, PERIOD_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrabilityStatus {
    /// All basis periods checked against the identity.
    Verified,
    Unverified,
    /// Values only make sense relative to an explicitly supplied path.
    RelativeToPath,
}

/// An element of the based mapping group C_*(M,K), represented faithfully by
/// its logarithmic derivative; the value at the base point is the identity.
#[derive(Debug, Clone)]
pub struct BasedMapElement {
    domain: Domain,
    group: GroupDescriptor,
    form: OneForm,
    base_point: Complex64,
    status: IntegrabilityStatus,
}

impl BasedMapElement {
    pub fn new(form: OneForm, base_point: Complex64) -> Result<Self> {
        let domain = form.domain().clone();
        let group = form.group().clone();
        if !domain.contains(base_point) {
            return Err(Error::invalid("base point lies outside the domain"));
        }
        Ok(BasedMapElement {
            domain,
            group,
            form,
            base_point,
            status: IntegrabilityStatus::Unverified,
        })
    }

    pub fn with_status(mut self, status: IntegrabilityStatus) -> Self {
        self.status = status;
        self
    }

    pub fn identity(domain: Domain, group: GroupDescriptor, base_point: Complex64) -> Result<Self> {
        let zero = OneForm::zero(domain, group);
        Ok(BasedMapElement::new(zero, base_point)?.with_status(IntegrabilityStatus::Verified))
    }

    pub fn form(&self) -> &OneForm {
        &self.form
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn base_point(&self) -> Complex64 {
        self.base_point
    }

    pub fn status(&self) -> IntegrabilityStatus {
        self.status
    }

    /// Evol of the based element at a point (transport along the canonical
    /// path from the base point).
    pub fn evol_at(&self, m: Complex64, control: EvolControl) -> Result<GroupElement> {
        let path = canonical_path(&self.domain, self.base_point, m)?;
        transport(&self.group, &self.form, &path, control)
    }

    /// Decide integrability by checking every basis period against the
    /// identity; 1-connected domains are integrable outright (all our forms
    /// satisfy Maurer-Cartan there: 1-D domains trivially, chart forms are
    /// the caller's responsibility via `mc_residual`). Updates the status and
    /// returns the worst period distance.
    pub fn verify_integrability(&mut self, control: EvolControl) -> Result<(bool, f64)> {
        let loops: Vec<Path> = match &self.domain {
            Domain::Interval { .. } | Domain::PlaneChart { .. } => Vec::new(),
            _ => canonical_loop_basis(&self.domain)?.loops,
        };
        let mut worst = 0.0f64;
        for lp in &loops {
            let period = transport(&self.group, &self.form, lp, control)?;
            worst = worst.max(period.distance_to_identity());
        }
        let ok = worst < PERIOD_TOL;
        self.status = if ok { IntegrabilityStatus::Verified } else { IntegrabilityStatus::Unverified };
        Ok((ok, worst))
    }
}

/// A full mapping-group element as the semidirect pair (k, based part),
/// f = k . f_based with f(m_0) = k.
#[derive(Debug, Clone)]
pub struct FullMapElement {
    pub k: GroupElement,
    pub based: BasedMapElement,
}

impl FullMapElement {
    pub fn new(k: GroupElement, based: BasedMapElement) -> Result<Self> {
        if k.descriptor() != based.group() {
            return Err(Error::invalid("semidirect pair mixes different groups"));
        }
        Ok(FullMapElement { k, based })
    }

    pub fn constant(k: GroupElement, domain: Domain, base_point: Complex64) -> Result<Self> {
        let based = BasedMapElement::identity(domain, k.descriptor().clone(), base_point)?;
        Ok(FullMapElement { k, based })
    }

    /// Pointwise value f(m) = k . Evol(alpha)(m) along the canonical path.
    pub fn value_at(&self, m: Complex64, control: EvolControl) -> Result<GroupElement> {
        let based_value = self.based.evol_at(m, control)?;
        group_multiply(&self.k, &based_value)
    }

    /// The value map as a pure point function (matrix-valued), memoized.
    pub fn point_map(&self, control: EvolControl) -> PointFn {
        let k_mat = self.k.as_matrix();
        let based_map = evol_point_map(&self.based, control);
        Arc::new(move |m| Ok(mat_mul(&k_mat, &based_map(m)?)))
    }
}

fn quantize(p: Complex64) -> (i64, i64) {
    ((p.re * 1e12).round() as i64, (p.im * 1e12).round() as i64)
}

/// Memoized m -> Evol(alpha)(m) as a matrix-valued point map. The cache is
/// keyed on the point at 1e-12 granularity and is safe for concurrent reads.
pub fn evol_point_map(elem: &BasedMapElement, control: EvolControl) -> PointFn {
    let domain = elem.domain().clone();
    let group = elem.group().clone();
    let form = elem.form().clone();
    let m0 = elem.base_point();
    let cache: Arc<RwLock<HashMap<(i64, i64), Matrix>>> = Arc::new(RwLock::new(HashMap::new()));
    Arc::new(move |m| {
        if domain.points_equal(m, m0) {
            return Ok(Matrix::identity(group.matrix_dim()));
        }
        let key = quantize(m);
        if let Some(hit) = cache.read().expect("transport cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let path = canonical_path(&domain, m0, m)?;
        let value = transport(&group, &form, &path, control)?.as_matrix();
        cache
            .write()
            .expect("transport cache poisoned")
            .insert(key, value.clone());
        Ok(value)
    })
}

/// Canonical evaluation path from m0 to m: a straight segment on charts,
/// intervals and the circle-angle coordinate; on punctured planes a straight
/// segment with counterclockwise detour arcs of radius rho/2 around any
/// puncture the segment approaches closer than 1e-6.
pub fn canonical_path(domain: &Domain, m0: Complex64, m: Complex64) -> Result<Path> {
    if !domain.contains(m) {
        return Err(Error::invalid(format!("evaluation point {m} outside the domain")));
    }
    let punctures = match domain {
        Domain::PuncturedPlane { punctures, .. } => punctures.clone(),
        _ => return Ok(Path::segment(m0, m)),
    };
    if (m - m0).norm() < EQ_TOL {
        return Ok(Path::constant(m0));
    }
    // find punctures the straight segment passes too close to
    let dir = m - m0;
    let len2 = dir.norm_sqr();
    let mut offenders: Vec<(f64, Complex64, f64)> = Vec::new(); // (t along segment, puncture, rho)
    for &p in &punctures {
        let t = (((p - m0) * dir.conj()).re / len2).clamp(0.0, 1.0);
        let closest = m0 + dir * t;
        if (closest - p).norm() < 1e-6 {
            let mut rho = (p - m0).norm().min((p - m).norm());
            for &q in &punctures {
                if (q - p).norm() > EQ_TOL {
                    rho = rho.min((q - p).norm());
                }
            }
            rho *= 0.5;
            if rho < 1e-9 {
                return Err(Error::Geometry(format!(
                    "no room for a detour around the puncture at {p}"
                )));
            }
            offenders.push((t, p, rho));
        }
    }
    if offenders.is_empty() {
        return Ok(Path::segment(m0, m));
    }
    offenders.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut pieces: Vec<Path> = Vec::new();
    let mut cursor = m0;
    for (_, p, rho) in offenders {
        let r = rho / 2.0;
        // intersection parameters of the segment with |z - p| = r
        let a = len2;
        let b = 2.0 * ((m0 - p) * dir.conj()).re;
        let c = (m0 - p).norm_sqr() - r * r;
        let disc = b * b - 4.0 * a * c;
        if disc <= 0.0 {
            continue; // approach without crossing; segment stays outside the circle
        }
        let sq = disc.sqrt();
        let t1 = (-b - sq) / (2.0 * a);
        let t2 = (-b + sq) / (2.0 * a);
        let z1 = m0 + dir * t1.clamp(0.0, 1.0);
        let z2 = m0 + dir * t2.clamp(0.0, 1.0);
        let theta1 = (z1 - p).arg();
        let mut theta2 = (z2 - p).arg();
        while theta2 <= theta1 {
            theta2 += 2.0 * std::f64::consts::PI;
        }
        if (z1 - cursor).norm() > EQ_TOL {
            pieces.push(Path::segment(cursor, z1));
        }
        pieces.push(Path::arc(p, r, theta1, theta2));
        cursor = z2;
    }
    if (m - cursor).norm() > EQ_TOL {
        pieces.push(Path::segment(cursor, m));
    }
    if pieces.len() == 1 {
        return Ok(pieces.pop().unwrap());
    }
    Ok(Path::Concat(pieces))
}

fn require_compatible(a: &BasedMapElement, b: &BasedMapElement) -> Result<()> {
    if a.domain() != b.domain() {
        return Err(Error::invalid("elements live on different domains"));
    }
    if a.group() != b.group() {
        return Err(Error::invalid("elements target different groups"));
    }
    if (a.base_point() - b.base_point()).norm() > EQ_TOL {
        return Err(Error::invalid("elements have different base points"));
    }
    Ok(())
}

/// Group law on logarithmic derivatives:
/// alpha * beta = beta + Ad(Evol(beta))^-1 . alpha.
pub fn multiply(
    alpha: &BasedMapElement,
    beta: &BasedMapElement,
    control: EvolControl,
) -> Result<BasedMapElement> {
    require_compatible(alpha, beta)?;
    let form = if alpha.group().is_abelian() {
        OneForm::sum(beta.form(), alpha.form())?
    } else {
        let dressing = evol_point_map(beta, control);
        OneForm::sum(beta.form(), &OneForm::dressed(alpha.form(), dressing))?
    };
    let status = if alpha.status() == IntegrabilityStatus::Verified
        && beta.status() == IntegrabilityStatus::Verified
    {
        IntegrabilityStatus::Verified
    } else {
        IntegrabilityStatus::Unverified
    };
    Ok(BasedMapElement::new(form, alpha.base_point())?.with_status(status))
}

/// Inverse on logarithmic derivatives: alpha^-1 = -Ad(Evol(alpha)) . alpha.
pub fn inverse(alpha: &BasedMapElement, control: EvolControl) -> Result<BasedMapElement> {
    let form = if alpha.group().is_abelian() {
        alpha.form().negated()
    } else {
        let evol_map = evol_point_map(alpha, control);
        // Ad(g).x = Ad(g^-1)^-1.x, so dress with the pointwise inverse
        let dressing: PointFn = Arc::new(move |m| {
            let g = evol_map(m)?;
            g.inverse()
                .map_err(|_| Error::eval(None, "evolution hit a singular group element"))
        });
        OneForm::dressed(alpha.form(), dressing).negated()
    };
    Ok(BasedMapElement::new(form, alpha.base_point())?.with_status(alpha.status()))
}

/// Evaluate a full element at a point: f(m) = k . evol(gamma* alpha) along
/// the supplied path (mandatory unless the element is verified integrable).
pub fn evaluate(
    f: &FullMapElement,
    m: Complex64,
    path: Option<&Path>,
    control: EvolControl,
) -> Result<GroupElement> {
    let domain = f.based.domain();
    let chosen = match path {
        Some(p) => {
            if !domain.points_equal(p.start(), f.based.base_point()) {
                return Err(Error::invalid("evaluation path must start at the base point"));
            }
            if !domain.points_equal(p.end(), m) {
                return Err(Error::invalid("evaluation path must end at the evaluation point"));
            }
            p.clone()
        }
        None => {
            if f.based.status() != IntegrabilityStatus::Verified {
                return Err(Error::Ambiguity(
                    "element is not verified integrable; supply an explicit path".into(),
                ));
            }
            canonical_path(domain, f.based.base_point(), m)?
        }
    };
    let based_value = transport(f.based.group(), f.based.form(), &chosen, control)?;
    group_multiply(&f.k, &based_value)
}

/// Semidirect product on full elements:
/// (k1, a1) (k2, a2) = (k1 k2, (Ad(k2)^-1 . a1) * a2).
pub fn full_multiply(
    a: &FullMapElement,
    b: &FullMapElement,
    control: EvolControl,
) -> Result<FullMapElement> {
    let k = group_multiply(&a.k, &b.k)?;
    let conjugated = if a.based.group().is_abelian() {
        a.based.clone()
    } else {
        let k2 = b.k.as_matrix();
        let dressing: PointFn = Arc::new(move |_m| Ok(k2.clone()));
        BasedMapElement::new(
            OneForm::dressed(a.based.form(), dressing),
            a.based.base_point(),
        )?
        .with_status(a.based.status())
    };
    let based = multiply(&conjugated, &b.based, control)?;
    FullMapElement::new(k, based)
}

/// Right gauge action of a full element on a form:
/// alpha * f = delta(f) + Ad(f)^-1 . alpha.
pub fn gauge_action(alpha: &OneForm, f: &FullMapElement, control: EvolControl) -> Result<OneForm> {
    if alpha.group() != f.based.group() {
        return Err(Error::invalid("gauge action mixes different target groups"));
    }
    if f.based.group().is_abelian() {
        // delta(f) + alpha, Ad trivial
        return OneForm::sum(f.based.form(), alpha);
    }
    let dressing = f.point_map(control);
    OneForm::sum(f.based.form(), &OneForm::dressed(alpha, dressing))
}

// ---------------------------------------------------------------------------
// sampled maps and finite-difference logarithmic derivatives
// ---------------------------------------------------------------------------

/// A map into K sampled on a uniform 1-D grid (interval coordinate or circle
/// angle); values are stored as matrices.
#[derive(Debug, Clone)]
pub struct SampledCurve {
    pub domain: Domain,
    pub group: GroupDescriptor,
    pub coords: Vec<f64>,
    pub values: Vec<Matrix>,
}

impl SampledCurve {
    pub fn from_fn(
        domain: Domain,
        group: GroupDescriptor,
        samples: usize,
        f: impl Fn(f64) -> Result<Matrix>,
    ) -> Result<Self> {
        let (coords, periodic) = sample_coords(&domain, samples)?;
        let _ = periodic;
        let values: Result<Vec<Matrix>> = coords.iter().map(|&t| f(t)).collect();
        Ok(SampledCurve { domain, group, coords, values: values? })
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.domain, Domain::Circle)
    }

    fn spacing(&self) -> Result<f64> {
        if self.coords.len() < 3 {
            return Err(Error::invalid("need at least three samples"));
        }
        let h = self.coords[1] - self.coords[0];
        for w in self.coords.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs() {
                return Err(Error::invalid("sample grid must be uniform"));
            }
        }
        Ok(h)
    }

    /// Relative jump between neighbors; the finite-difference logarithm
    /// needs every jump well inside the principal branch.
    fn check_jumps(&self) -> Result<()> {
        let id = Matrix::identity(self.values[0].dim());
        let n = self.values.len();
        let last = if self.is_periodic() { n } else { n - 1 };
        for i in 0..last {
            let j = (i + 1) % n;
            let hop = mat_mul(&self.values[i].inverse()?, &self.values[j]);
            if hop.distance(&id) >= 0.5 {
                return Err(Error::SamplingResolution(format!(
                    "neighbor jump {} at sample {i} exceeds 0.5; refine the grid",
                    hop.distance(&id)
                )));
            }
        }
        Ok(())
    }

    /// Per-node logarithmic derivative estimates: central differences at
    /// interior nodes, second-order one-sided stencils at the ends (periodic
    /// grids have no ends).
    pub fn log_derivative_samples(&self) -> Result<Vec<Matrix>> {
        let h = self.spacing()?;
        self.check_jumps()?;
        let n = self.values.len();
        let mut xi = Vec::with_capacity(n);
        for i in 0..n {
            let value = if self.is_periodic() {
                let prev = &self.values[(i + n - 1) % n];
                let next = &self.values[(i + 1) % n];
                central_log_derivative(prev, next, h)?
            } else if i == 0 {
                forward_log_derivative(&self.values[0], &self.values[1], &self.values[2], h)?
            } else if i == n - 1 {
                backward_log_derivative(
                    &self.values[n - 1],
                    &self.values[n - 2],
                    &self.values[n - 3],
                    h,
                )?
            } else {
                central_log_derivative(&self.values[i - 1], &self.values[i + 1], h)?
            };
            xi.push(value);
        }
        Ok(xi)
    }

    /// The logarithmic derivative as a 1-form (piecewise-linear interpolation
    /// of the per-node estimates in the grid coordinate).
    pub fn log_derivative(&self) -> Result<OneForm> {
        let xi = self.log_derivative_samples()?;
        let coords = self.coords.clone();
        let periodic = self.is_periodic();
        let period = 2.0 * std::f64::consts::PI;
        let values = Arc::new(xi);
        let f: PointFn = Arc::new(move |p: Complex64| {
            let mut t = p.re;
            if periodic {
                t = t.rem_euclid(period);
            }
            Ok(interp_linear(&coords, &values, t, periodic))
        });
        Ok(OneForm::interval_black_box(self.domain.clone(), self.group.clone(), f))
    }
}

fn sample_coords(domain: &Domain, samples: usize) -> Result<(Vec<f64>, bool)> {
    let samples = samples.max(3);
    match domain {
        Domain::Interval { a, b } => Ok((
            (0..samples)
                .map(|i| a + (b - a) * i as f64 / (samples - 1) as f64)
                .collect(),
            false,
        )),
        Domain::Circle => {
            let period = 2.0 * std::f64::consts::PI;
            Ok((
                (0..samples).map(|i| period * i as f64 / samples as f64).collect(),
                true,
            ))
        }
        _ => Err(Error::invalid("sampled curves live on an interval or the circle")),
    }
}

fn central_log_derivative(prev: &Matrix, next: &Matrix, h: f64) -> Result<Matrix> {
    let hop = mat_mul(&prev.inverse()?, next);
    Ok(mat_log_principal(&hop)?.scale_re(1.0 / (2.0 * h)))
}

/// Second-order one-sided stencil: (4 log(f0^-1 f1) - log(f0^-1 f2)) / 2h.
fn forward_log_derivative(f0: &Matrix, f1: &Matrix, f2: &Matrix, h: f64) -> Result<Matrix> {
    let inv = f0.inverse()?;
    let l1 = mat_log_principal(&mat_mul(&inv, f1))?;
    let l2 = mat_log_principal(&mat_mul(&inv, f2))?;
    Ok((l1.scale_re(4.0) - l2).scale_re(1.0 / (2.0 * h)))
}

fn backward_log_derivative(f0: &Matrix, f_prev: &Matrix, f_prev2: &Matrix, h: f64) -> Result<Matrix> {
    let inv = f0.inverse()?;
    let l1 = mat_log_principal(&mat_mul(&inv, f_prev))?;
    let l2 = mat_log_principal(&mat_mul(&inv, f_prev2))?;
    Ok((l1.scale_re(4.0) - l2).scale_re(-1.0 / (2.0 * h)))
}

fn interp_linear(coords: &[f64], values: &[Matrix], t: f64, periodic: bool) -> Matrix {
    let n = coords.len();
    let h = coords[1] - coords[0];
    if periodic {
        // t already reduced to [0, period); the last cell wraps to node 0
        let i = (((t - coords[0]) / h).floor() as usize).min(n - 1);
        let j = (i + 1) % n;
        let t0 = coords[0] + i as f64 * h;
        let w = ((t - t0) / h).clamp(0.0, 1.0);
        values[i].scale_re(1.0 - w) + values[j].scale_re(w)
    } else {
        if t <= coords[0] {
            return values[0].clone();
        }
        if t >= coords[n - 1] {
            return values[n - 1].clone();
        }
        let i = (((t - coords[0]) / h).floor() as usize).min(n - 2);
        let w = ((t - coords[i]) / h).clamp(0.0, 1.0);
        values[i].scale_re(1.0 - w) + values[i + 1].scale_re(w)
    }
}

/// A map into K sampled on a uniform plane-chart grid, row-major with x
/// fastest: node (i, j) sits at (x0 + i hx, y0 + j hy).
#[derive(Debug, Clone)]
pub struct SampledChartMap {
    pub domain: Domain,
    pub group: GroupDescriptor,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<Matrix>,
}

impl SampledChartMap {
    pub fn from_fn(
        domain: Domain,
        group: GroupDescriptor,
        nx: usize,
        ny: usize,
        f: impl Fn(f64, f64) -> Result<Matrix>,
    ) -> Result<Self> {
        let (x0, x1, y0, y1) = match &domain {
            Domain::PlaneChart { x0, x1, y0, y1 } => (*x0, *x1, *y0, *y1),
            _ => return Err(Error::invalid("chart maps need a plane chart domain")),
        };
        if nx < 3 || ny < 3 {
            return Err(Error::invalid("chart sampling needs at least a 3x3 grid"));
        }
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let x = x0 + (x1 - x0) * i as f64 / (nx - 1) as f64;
                let y = y0 + (y1 - y0) * j as f64 / (ny - 1) as f64;
                values.push(f(x, y)?);
            }
        }
        Ok(SampledChartMap { domain, group, nx, ny, values })
    }

    fn at(&self, i: usize, j: usize) -> &Matrix {
        &self.values[j * self.nx + i]
    }

    fn steps(&self) -> (f64, f64) {
        match &self.domain {
            Domain::PlaneChart { x0, x1, y0, y1 } => (
                (x1 - x0) / (self.nx - 1) as f64,
                (y1 - y0) / (self.ny - 1) as f64,
            ),
            _ => unreachable!("constructor enforces a chart domain"),
        }
    }

    /// Per-node coefficient grids (xi1, xi2) of delta(f) = xi1 dx + xi2 dy.
    pub fn log_derivative_samples(&self) -> Result<(Vec<Matrix>, Vec<Matrix>)> {
        let (hx, hy) = self.steps();
        let mut xi1 = Vec::with_capacity(self.values.len());
        let mut xi2 = Vec::with_capacity(self.values.len());
        for j in 0..self.ny {
            for i in 0..self.nx {
                let dx = if i == 0 {
                    forward_log_derivative(self.at(0, j), self.at(1, j), self.at(2, j), hx)?
                } else if i == self.nx - 1 {
                    backward_log_derivative(
                        self.at(i, j),
                        self.at(i - 1, j),
                        self.at(i - 2, j),
                        hx,
                    )?
                } else {
                    central_log_derivative(self.at(i - 1, j), self.at(i + 1, j), hx)?
                };
                let dy = if j == 0 {
                    forward_log_derivative(self.at(i, 0), self.at(i, 1), self.at(i, 2), hy)?
                } else if j == self.ny - 1 {
                    backward_log_derivative(
                        self.at(i, j),
                        self.at(i, j - 1),
                        self.at(i, j - 2),
                        hy,
                    )?
                } else {
                    central_log_derivative(self.at(i, j - 1), self.at(i, j + 1), hy)?
                };
                xi1.push(dx);
                xi2.push(dy);
            }
        }
        Ok((xi1, xi2))
    }

    /// delta(f) as a chart form with bilinear interpolation of the per-node
    /// estimates (exact at the sample nodes).
    pub fn log_derivative(&self) -> Result<OneForm> {
        let (xi1, xi2) = self.log_derivative_samples()?;
        let c1 = self.grid_interp(Arc::new(xi1));
        let c2 = self.grid_interp(Arc::new(xi2));
        Ok(OneForm::chart_black_box(self.domain.clone(), self.group.clone(), c1, c2))
    }

    fn grid_interp(&self, grid: Arc<Vec<Matrix>>) -> PointFn {
        let (x0, y0) = match &self.domain {
            Domain::PlaneChart { x0, y0, .. } => (*x0, *y0),
            _ => unreachable!(),
        };
        let (hx, hy) = self.steps();
        let (nx, ny) = (self.nx, self.ny);
        Arc::new(move |p: Complex64| {
            let fx = ((p.re - x0) / hx).clamp(0.0, (nx - 1) as f64);
            let fy = ((p.im - y0) / hy).clamp(0.0, (ny - 1) as f64);
            let i = (fx.floor() as usize).min(nx - 2);
            let j = (fy.floor() as usize).min(ny - 2);
            let wx = (fx - i as f64).clamp(0.0, 1.0);
            let wy = (fy - j as f64).clamp(0.0, 1.0);
            let v00 = grid[j * nx + i].scale_re((1.0 - wx) * (1.0 - wy));
            let v10 = grid[j * nx + i + 1].scale_re(wx * (1.0 - wy));
            let v01 = grid[(j + 1) * nx + i].scale_re((1.0 - wx) * wy);
            let v11 = grid[(j + 1) * nx + i + 1].scale_re(wx * wy);
            Ok(v00 + v10 + v01 + v11)
        })
    }
}

/// Max-norm defect of the cocycle identity
/// delta(f1 f2) = Ad(f2)^-1 . delta(f1) + delta(f2)
/// over the interior nodes of a shared sample grid; O(h^2) for smooth maps.
pub fn cocycle_residual(f1: &SampledCurve, f2: &SampledCurve) -> Result<f64> {
    if f1.coords.len() != f2.coords.len() || f1.domain != f2.domain {
        return Err(Error::invalid("cocycle residual needs a common sample grid"));
    }
    let product = SampledCurve {
        domain: f1.domain.clone(),
        group: f1.group.clone(),
        coords: f1.coords.clone(),
        values: f1
            .values
            .iter()
            .zip(f2.values.iter())
            .map(|(a, b)| mat_mul(a, b))
            .collect(),
    };
    let d1 = f1.log_derivative_samples()?;
    let d2 = f2.log_derivative_samples()?;
    let dp = product.log_derivative_samples()?;
    let n = f1.coords.len();
    let interior = if f1.is_periodic() { 0..n } else { 1..n - 1 };
    let mut worst = 0.0f64;
    for i in interior {
        let f2_inv = f2.values[i].inverse()?;
        let dressed = mat_mul(&mat_mul(&f2_inv, &d1[i]), &f2.values[i]);
        let defect = dp[i].clone() - dressed - d2[i].clone();
        worst = worst.max(defect.frobenius_norm());
    }
    Ok(worst)
}

/// Constancy defect of the left-translation relation: if delta(f1) = delta(f2) then
/// f2 f1^-1 must be a constant; returns the max deviation from its value at
/// the first sample.
pub fn translation_constancy_defect(f1: &SampledCurve, f2: &SampledCurve) -> Result<f64> {
    if f1.coords.len() != f2.coords.len() {
        return Err(Error::invalid("constancy defect needs a common sample grid"));
    }
    let reference = mat_mul(&f2.values[0], &f1.values[0].inverse()?);
    let mut worst = 0.0f64;
    for (a, b) in f1.values.iter().zip(f2.values.iter()).skip(1) {
        let ratio = mat_mul(b, &a.inverse()?);
        worst = worst.max(ratio.distance(&reference));
    }
    Ok(worst)
}

/// Pointwise exponential of an algebra-valued map on a list of sample points.
pub fn pointwise_exp(
    group: &GroupDescriptor,
    points: &[Complex64],
    xi: impl Fn(Complex64) -> Result<Matrix>,
) -> Result<Vec<(Complex64, Matrix)>> {
    points
        .iter()
        .map(|&p| {
            let x = xi(p)?;
            group.check_algebra_element(&x)?;
            Ok((p, mat_exp(&x)?))
        })
        .collect()
}

/// Pointwise principal logarithm of a near-identity sampled map; the local
/// inverse of [`pointwise_exp`]. Requires ||f(m) - 1|| < 1 at every sample.
pub fn pointwise_log_lift(samples: &[(Complex64, Matrix)]) -> Result<Vec<(Complex64, Matrix)>> {
    samples
        .iter()
        .map(|(p, g)| {
            let id = Matrix::identity(g.dim());
            if g.distance(&id) >= 1.0 {
                return Err(Error::BranchCut(format!(
                    "sample at {p} is {} away from the identity; outside the local chart",
                    g.distance(&id)
                )));
            }
            Ok((*p, mat_log_principal(g)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::group::Field;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gl2() -> GroupDescriptor {
        GroupDescriptor::gl(2, Field::Complex)
    }

    fn interval01() -> Domain {
        Domain::interval(0.0, 1.0).unwrap()
    }

    fn small_sl2_element(seed: &str) -> BasedMapElement {
        let domain = interval01();
        let sl2 = GroupDescriptor::sl(2);
        let expr = parse_expr(seed, &["t"]).unwrap();
        let form = OneForm::interval_expr(domain, sl2, expr).unwrap();
        BasedMapElement::new(form, c(0.0, 0.0))
            .unwrap()
            .with_status(IntegrabilityStatus::Verified)
    }

    #[test]
    fn identity_laws_of_the_group_law() {
        let control = EvolControl::default();
        let alpha = small_sl2_element("[[0.2*t,0.3],[0.1,-0.2*t]]");
        let zero = BasedMapElement::identity(interval01(), GroupDescriptor::sl(2), c(0.0, 0.0)).unwrap();
        let left = multiply(&alpha, &zero, control).unwrap();
        let right = multiply(&zero, &alpha, control).unwrap();
        for k in 0..=6 {
            let t = c(k as f64 / 6.0, 0.0);
            let tangent = c(1.0, 0.0);
            let want = alpha.form().eval(t, tangent).unwrap();
            assert!(left.form().eval(t, tangent).unwrap().approx_eq(&want, 1e-9));
            assert!(right.form().eval(t, tangent).unwrap().approx_eq(&want, 1e-9));
        }
    }

    #[test]
    fn group_law_matches_pointwise_products() {
        // Evol(alpha * beta)(m) = Evol(alpha)(m) . Evol(beta)(m)
        let control = EvolControl::default();
        let alpha = small_sl2_element("[[0.2*t,0.3],[0.1,-0.2*t]]");
        let beta = small_sl2_element("[[0.1,0.2*t],[-0.3*t,-0.1]]");
        let prod = multiply(&alpha, &beta, control).unwrap();
        for k in 1..=10 {
            let m = c(k as f64 / 10.0, 0.0);
            let lhs = prod.evol_at(m, control).unwrap();
            let rhs = group_multiply(
                &alpha.evol_at(m, control).unwrap(),
                &beta.evol_at(m, control).unwrap(),
            )
            .unwrap();
            assert!(
                lhs.distance(&rhs).unwrap() < 1e-6,
                "group law defect {} at {m}",
                lhs.distance(&rhs).unwrap()
            );
        }
    }

    #[test]
    fn inverse_law_of_the_group_law() {
        let control = EvolControl::default();
        let alpha = small_sl2_element("[[0.2*t,0.3],[0.1,-0.2*t]]");
        let inv = inverse(&alpha, control).unwrap();
        let prod = multiply(&alpha, &inv, control).unwrap();
        for k in 0..=10 {
            let t = c(k as f64 / 10.0, 0.0);
            let v = prod.form().eval(t, c(1.0, 0.0)).unwrap();
            assert!(v.frobenius_norm() < 1e-6, "alpha * alpha^-1 value {}", v.frobenius_norm());
        }
        // inverse of zero is zero
        let zero = BasedMapElement::identity(interval01(), GroupDescriptor::sl(2), c(0.0, 0.0)).unwrap();
        let zinv = inverse(&zero, control).unwrap();
        assert!(zinv.form().eval(c(0.4, 0.0), c(1.0, 0.0)).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn abelian_specialization_is_addition() {
        let control = EvolControl::default();
        let lattice = crate::group::Lattice::new(1, vec![vec![c(1.0, 0.0)]]).unwrap();
        let k = GroupDescriptor::abelian(lattice);
        let domain = interval01();
        let f1 = OneForm::interval_expr(domain.clone(), k.clone(), parse_expr("[[t]]", &["t"]).unwrap()).unwrap();
        let f2 = OneForm::interval_expr(domain.clone(), k.clone(), parse_expr("[[2-t]]", &["t"]).unwrap()).unwrap();
        let a = BasedMapElement::new(f1.clone(), c(0.0, 0.0))
            .unwrap()
            .with_status(IntegrabilityStatus::Verified);
        let b = BasedMapElement::new(f2.clone(), c(0.0, 0.0))
            .unwrap()
            .with_status(IntegrabilityStatus::Verified);
        let prod = multiply(&a, &b, control).unwrap();
        for k in 0..=8 {
            let t = c(k as f64 / 8.0, 0.0);
            let want = f1.eval(t, c(1.0, 0.0)).unwrap() + f2.eval(t, c(1.0, 0.0)).unwrap();
            assert!(prod.form().eval(t, c(1.0, 0.0)).unwrap().approx_eq(&want, 1e-12));
        }
        let inv = inverse(&a, control).unwrap();
        let want = f1.eval(c(0.5, 0.0), c(1.0, 0.0)).unwrap().scale_re(-1.0);
        assert!(inv.form().eval(c(0.5, 0.0), c(1.0, 0.0)).unwrap().approx_eq(&want, 1e-12));
    }

    #[test]
    fn evaluate_closed_form_oracle() {
        // alpha = diag(1,2) dz/z on C \ {0} with base point 1 integrates to
        // f(z) = diag(z, z^2)
        let control = EvolControl::default();
        let domain = Domain::punctured_plane(vec![c(0.0, 0.0)], c(1.0, 0.0)).unwrap();
        let expr = parse_expr("[[1/z,0],[0,2/z]]", &["z"]).unwrap();
        let form = OneForm::complex_expr(domain.clone(), gl2(), expr).unwrap();
        let mut based = BasedMapElement::new(form, c(1.0, 0.0)).unwrap();
        let (ok, worst) = based.verify_integrability(control).unwrap();
        assert!(ok, "diag(1,2) dz/z must be integrable, worst period distance {worst}");
        let f = FullMapElement::new(gl2().identity(), based).unwrap();
        let got = evaluate(&f, c(2.0, 0.0), None, control).unwrap();
        let want = Matrix::diag(&[c(2.0, 0.0), c(4.0, 0.0)]);
        assert!(got.matrix().unwrap().distance(&want) < 1e-8);
    }

    #[test]
    fn evaluate_path_dependent_form_needs_a_path() {
        // alpha = (1/2) dz/z is not integrable; its loop value is -1
        let control = EvolControl::default();
        let domain = Domain::punctured_plane(vec![c(0.0, 0.0)], c(1.0, 0.0)).unwrap();
        let gl1 = GroupDescriptor::gl(1, Field::Complex);
        let expr = parse_expr("[[0.5/z]]", &["z"]).unwrap();
        let form = OneForm::complex_expr(domain.clone(), gl1.clone(), expr).unwrap();
        let mut based = BasedMapElement::new(form, c(1.0, 0.0)).unwrap();
        let (ok, worst) = based.verify_integrability(control).unwrap();
        assert!(!ok);
        assert!(worst >= 0.5, "period distance {worst}");
        let f = FullMapElement::new(gl1.identity(), based).unwrap();
        assert!(matches!(
            evaluate(&f, c(2.0, 0.0), None, control),
            Err(Error::Ambiguity(_))
        ));
        // along the basis loop the value at the base point is -1
        let basis = canonical_loop_basis(&domain).unwrap();
        let got = evaluate(&f, c(1.0, 0.0), Some(&basis.loops[0]), control).unwrap();
        assert!((got.matrix().unwrap()[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn log_derivative_of_constant_curve_vanishes() {
        let curve = SampledCurve::from_fn(interval01(), gl2(), 11, |_t| {
            Ok(Matrix::diag(&[c(2.0, 0.0), c(3.0, 0.0)]))
        })
        .unwrap();
        for xi in curve.log_derivative_samples().unwrap() {
            assert!(xi.frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn log_derivative_of_exp_curve_is_constant() {
        let x = Matrix::from_real_rows(2, &[0.0, 1.0, 0.5, 0.0]).unwrap();
        let x2 = x.clone();
        let curve = SampledCurve::from_fn(interval01(), gl2(), 101, move |t| {
            mat_exp(&x2.scale_re(t))
        })
        .unwrap();
        let samples = curve.log_derivative_samples().unwrap();
        let h: f64 = 0.01;
        for xi in samples {
            assert!(xi.distance(&x) < 10.0 * h * h, "finite-difference error {}", xi.distance(&x));
        }
    }

    #[test]
    fn log_derivative_roundtrip_through_evolution() {
        // delta -> Evol roundtrip: integrate the sampled log derivative and
        // compare with f(m0)^-1 f(m)
        let control = EvolControl::default();
        let x = Matrix::from_real_rows(2, &[0.0, 1.0, 0.5, 0.0]).unwrap();
        let y = Matrix::from_real_rows(2, &[0.3, 0.0, 0.0, -0.3]).unwrap();
        let (x2, y2) = (x.clone(), y.clone());
        let curve = SampledCurve::from_fn(interval01(), gl2(), 1001, move |t| {
            Ok(mat_mul(&mat_exp(&x2.scale_re(t)).unwrap(), &mat_exp(&y2.scale_re(t * t)).unwrap()))
        })
        .unwrap();
        let form = curve.log_derivative().unwrap();
        let based = BasedMapElement::new(form, c(0.0, 0.0))
            .unwrap()
            .with_status(IntegrabilityStatus::Verified);
        for &t in &[0.3, 0.7, 1.0] {
            let got = based.evol_at(c(t, 0.0), control).unwrap();
            let want = mat_mul(&mat_exp(&x.scale_re(t)).unwrap(), &mat_exp(&y.scale_re(t * t)).unwrap());
            let err = got.matrix().unwrap().distance(&want);
            assert!(err < 1e-5, "roundtrip error {err} at t={t}");
        }
    }

    #[test]
    fn sampling_resolution_guard_fires() {
        // a wildly under-resolved curve: exp(10 t X) at 4 samples
        let x = Matrix::from_real_rows(2, &[0.0, 10.0, 10.0, 0.0]).unwrap();
        let curve = SampledCurve::from_fn(interval01(), gl2(), 4, move |t| {
            mat_exp(&x.scale_re(t))
        })
        .unwrap();
        assert!(matches!(
            curve.log_derivative_samples(),
            Err(Error::SamplingResolution(_))
        ));
    }

    #[test]
    fn cocycle_residual_small_for_smooth_pair() {
        let e = Matrix::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let f = Matrix::from_real_rows(2, &[0.0, 0.0, 1.0, 0.0]).unwrap();
        let (e2, f2) = (e.clone(), f.clone());
        let f1 = SampledCurve::from_fn(interval01(), gl2(), 1001, move |t| mat_exp(&e2.scale_re(t))).unwrap();
        let f2 = SampledCurve::from_fn(interval01(), gl2(), 1001, move |t| mat_exp(&f2.scale_re(t))).unwrap();
        let r = cocycle_residual(&f1, &f2).unwrap();
        assert!(r < 1e-4, "cocycle residual {r}");
    }

    #[test]
    fn cocycle_residual_with_identity_factor_is_noise() {
        let e = Matrix::from_real_rows(2, &[0.0, 1.0, 0.3, 0.0]).unwrap();
        let f1 = SampledCurve::from_fn(interval01(), gl2(), 501, move |t| mat_exp(&e.scale_re(t))).unwrap();
        let ones = SampledCurve::from_fn(interval01(), gl2(), 501, |_t| Ok(Matrix::identity(2))).unwrap();
        let r = cocycle_residual(&f1, &ones).unwrap();
        assert!(r < 1e-8, "identity cocycle residual {r}");
    }

    #[test]
    fn equal_log_derivatives_force_constant_left_factor() {
        // f2 = k f1 has the same log derivative; f2 f1^-1 must be constant
        let e = Matrix::from_real_rows(2, &[0.0, 1.0, 0.4, 0.0]).unwrap();
        let k = Matrix::from_real_rows(2, &[2.0, 1.0, 1.0, 1.0]).unwrap();
        let (e2, k2) = (e.clone(), k.clone());
        let f1 = SampledCurve::from_fn(interval01(), gl2(), 301, move |t| mat_exp(&e.scale_re(t))).unwrap();
        let f2 = SampledCurve::from_fn(interval01(), gl2(), 301, move |t| {
            Ok(mat_mul(&k2, &mat_exp(&e2.scale_re(t)).unwrap()))
        })
        .unwrap();
        // identical log derivatives
        let d1 = f1.log_derivative_samples().unwrap();
        let d2 = f2.log_derivative_samples().unwrap();
        for (a, b) in d1.iter().zip(d2.iter()) {
            assert!(a.distance(b) < 1e-9);
        }
        assert!(translation_constancy_defect(&f1, &f2).unwrap() < 1e-9);
    }

    #[test]
    fn semidirect_product_reproduces_pointwise_products() {
        let control = EvolControl::default();
        let sl2 = GroupDescriptor::sl(2);
        let alpha = small_sl2_element("[[0.2*t,0.3],[0.1,-0.2*t]]");
        let beta = small_sl2_element("[[0.1,0.2*t],[-0.3*t,-0.1]]");
        let k1 = crate::group::exp_to_group(&sl2, &Matrix::diag(&[c(0.0, 0.4), c(0.0, -0.4)])).unwrap();
        let k2 = crate::group::exp_to_group(&sl2, &Matrix::from_real_rows(2, &[0.0, 0.3, 0.3, 0.0]).unwrap()).unwrap();
        let f = FullMapElement::new(k1, alpha).unwrap();
        let g = FullMapElement::new(k2, beta).unwrap();
        let fg = full_multiply(&f, &g, control).unwrap();
        for k in 0..=5 {
            let m = c(k as f64 / 5.0, 0.0);
            let want = group_multiply(
                &f.value_at(m, control).unwrap(),
                &g.value_at(m, control).unwrap(),
            )
            .unwrap();
            let got = fg.value_at(m, control).unwrap();
            assert!(
                got.distance(&want).unwrap() < 1e-6,
                "semidirect defect {}",
                got.distance(&want).unwrap()
            );
        }
    }

    #[test]
    fn gauge_action_special_cases() {
        let control = EvolControl::default();
        let sl2 = GroupDescriptor::sl(2);
        let alpha = small_sl2_element("[[0.2*t,0.3],[0.1,-0.2*t]]");
        // f = identity constant: alpha * f = alpha
        let id_f = FullMapElement::constant(sl2.identity(), interval01(), c(0.0, 0.0)).unwrap();
        let acted = gauge_action(alpha.form(), &id_f, control).unwrap();
        for k in 0..=5 {
            let t = c(k as f64 / 5.0, 0.0);
            let want = alpha.form().eval(t, c(1.0, 0.0)).unwrap();
            assert!(acted.eval(t, c(1.0, 0.0)).unwrap().approx_eq(&want, 1e-9));
        }
        // alpha = 0: result is delta(f)
        let beta = small_sl2_element("[[0.1,0.2*t],[-0.3*t,-0.1]]");
        let f = FullMapElement::new(sl2.identity(), beta.clone()).unwrap();
        let zero = OneForm::zero(interval01(), sl2.clone());
        let acted = gauge_action(&zero, &f, control).unwrap();
        for k in 0..=5 {
            let t = c(k as f64 / 5.0, 0.0);
            let want = beta.form().eval(t, c(1.0, 0.0)).unwrap();
            assert!(acted.eval(t, c(1.0, 0.0)).unwrap().approx_eq(&want, 1e-9));
        }
    }

    #[test]
    fn pointwise_exp_log_roundtrip() {
        let gl = gl2();
        let points: Vec<Complex64> = (0..20).map(|k| c(k as f64 / 19.0, 0.0)).collect();
        let xi = |p: Complex64| {
            Ok(Matrix::from_rows(2, &[
                c(0.1 * p.re, 0.05),
                c(0.2, -0.1 * p.re),
                c(-0.15, 0.0),
                c(-0.1 * p.re, 0.1),
            ])
            .unwrap()
            .scale_re(0.75))
        };
        let sampled = pointwise_exp(&gl, &points, xi).unwrap();
        let lifted = pointwise_log_lift(&sampled).unwrap();
        for ((p, back), q) in lifted.iter().zip(points.iter()) {
            assert_eq!(p, q);
            let want = xi(*q).unwrap();
            assert!(back.distance(&want) < 1e-10);
        }
    }

    #[test]
    fn pointwise_log_rejects_far_from_identity() {
        let bad = vec![(
            c(0.0, 0.0),
            Matrix::from_real_rows(2, &[-1.0, 1.0, 0.0, -1.0]).unwrap(),
        )];
        assert!(matches!(pointwise_log_lift(&bad), Err(Error::BranchCut(_))));
    }

    #[test]
    fn group_law_is_associative_on_samples() {
        let control = EvolControl::default();
        let alpha = small_sl2_element("[[0.2*t,0.3],[0.1,-0.2*t]]");
        let beta = small_sl2_element("[[0.1,0.2*t],[-0.3*t,-0.1]]");
        let gamma = small_sl2_element("[[0.05*t,-0.2],[0.25,-0.05*t]]");
        let left = multiply(&multiply(&alpha, &beta, control).unwrap(), &gamma, control).unwrap();
        let right = multiply(&alpha, &multiply(&beta, &gamma, control).unwrap(), control).unwrap();
        for k in 0..=5 {
            let t = c(k as f64 / 5.0, 0.0);
            let defect = left
                .form()
                .eval(t, c(1.0, 0.0))
                .unwrap()
                .distance(&right.form().eval(t, c(1.0, 0.0)).unwrap());
            assert!(defect < 1e-6, "associativity defect {defect} at {t}");
        }
    }

    #[test]
    fn bracket_at_identity_matches_pointwise_bracket() {
        // eta_i(s) = delta(exp(s f_i)) has eta_i'(0) = s df_i, and the
        // commutator of the group law realizes d[f1, f2]:
        // (eta1*eta2 - eta2*eta1)/s^2 -> d[f1,f2] as s -> 0
        let control = EvolControl::default();
        let sl2 = GroupDescriptor::sl(2);
        let domain = interval01();
        let e = Matrix::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let f_mat = Matrix::from_real_rows(2, &[0.0, 0.0, 1.0, 0.0]).unwrap();
        let h_mat = Matrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        // f1(t) = t E, f2(t) = t^2 H + t F (both vanish at the base point)
        let f1 = move |t: f64| e.scale_re(t);
        let f1_prime = {
            let e = Matrix::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
            move |_t: f64| e.clone()
        };
        let (h2, f2m) = (h_mat.clone(), f_mat.clone());
        let f2 = move |t: f64| h2.scale_re(t * t) + f2m.scale_re(t);
        let f2_prime = {
            let (h2, f2m) = (h_mat.clone(), f_mat.clone());
            move |t: f64| h2.scale_re(2.0 * t) + f2m.clone()
        };

        // delta(exp(s f))(d/dt) = exp(s f)^-1 d/dt exp(s f), via a central
        // difference in t (h = 1e-5, error O(h^2), independent of s)
        let make_eta = |fval: Arc<dyn Fn(f64) -> Matrix + Send + Sync>, s: f64| {
            let form = crate::forms::OneForm::interval_black_box(
                domain.clone(),
                sl2.clone(),
                Arc::new(move |p: Complex64| {
                    let h = 1e-5;
                    let g = mat_exp(&fval(p.re).scale_re(s))?;
                    let plus = mat_exp(&fval(p.re + h).scale_re(s))?;
                    let minus = mat_exp(&fval(p.re - h).scale_re(s))?;
                    let diff = (plus - minus).scale_re(1.0 / (2.0 * h));
                    Ok(mat_mul(&g.inverse()?, &diff))
                }),
            );
            BasedMapElement::new(form, c(0.0, 0.0))
                .unwrap()
                .with_status(IntegrabilityStatus::Verified)
        };

        let s = 0.05;
        let f1a: Arc<dyn Fn(f64) -> Matrix + Send + Sync> = Arc::new(f1);
        let f2a: Arc<dyn Fn(f64) -> Matrix + Send + Sync> = Arc::new(f2);
        let eta1 = make_eta(f1a.clone(), s);
        let eta2 = make_eta(f2a.clone(), s);
        // first-order check: delta(exp(s f)) = s df + O(s^2)
        for k in 1..=4 {
            let t = k as f64 / 4.0;
            let got = eta1.form().eval(c(t, 0.0), c(1.0, 0.0)).unwrap();
            let want = f1_prime(t).scale_re(s);
            assert!(
                got.distance(&want) < 2.0 * s * s,
                "first-order defect {} at t={t}",
                got.distance(&want)
            );
        }
        // commutator check at a few points
        let p12 = multiply(&eta1, &eta2, control).unwrap();
        let p21 = multiply(&eta2, &eta1, control).unwrap();
        for k in 1..=4 {
            let t = k as f64 / 4.0;
            let tangent = c(1.0, 0.0);
            let comm = (p12.form().eval(c(t, 0.0), tangent).unwrap()
                - p21.form().eval(c(t, 0.0), tangent).unwrap())
            .scale_re(1.0 / (s * s));
            // d[f1,f2](d/dt) = [f1', f2] + [f1, f2']
            let want = crate::matrix::bracket(&f1_prime(t), &f2a(t)).unwrap()
                + crate::matrix::bracket(&f1a(t), &f2_prime(t)).unwrap();
            let scale = want.frobenius_norm().max(1.0);
            assert!(
                comm.distance(&want) < 0.15 * scale,
                "bracket defect {} at t={t} (s={s})",
                comm.distance(&want)
            );
        }
    }

    #[test]
    fn detour_paths_avoid_punctures() {
        // the straight segment from -2 to 2 passes through the puncture at 0
        let domain = Domain::punctured_plane(vec![c(0.0, 0.0)], c(-2.0, 0.0)).unwrap();
        let path = canonical_path(&domain, c(-2.0, 0.0), c(2.0, 0.0)).unwrap();
        let clearance = path.min_distance_to(c(0.0, 0.0), 400);
        assert!(clearance > 0.4, "detour clearance {clearance}");
        assert!((path.start() - c(-2.0, 0.0)).norm() < 1e-12);
        assert!((path.end() - c(2.0, 0.0)).norm() < 1e-12);
    }
}
