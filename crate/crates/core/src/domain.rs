//! Model domains M, piecewise-smooth paths with exact velocities, and
//! canonical free generating loops of the fundamental group of a punctured
//! plane.
//!
//! Points live in the complex plane throughout; the interval embeds as a real
//! segment and the circle is parameterized by its angle coordinate (points on
//! the circle domain *are* angles, compared modulo 2 pi).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::adaptive_scalar;
use crate::EQ_TOL;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    /// Unit circle, parameterized by angle; points are angles mod 2 pi.
    Circle,
    PuncturedPlane { punctures: Vec<Complex64>, base_point: Complex64 },
    PlaneChart { x0: f64, x1: f64, y0: f64, y1: f64 },
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if a >= b || !a.is_finite() || !b.is_finite() {
            return Err(Error::invalid("interval needs a < b with finite endpoints"));
        }
        Ok(Domain::Interval { a, b })
    }

    pub fn circle() -> Self {
        Domain::Circle
    }

    pub fn punctured_plane(punctures: Vec<Complex64>, base_point: Complex64) -> Result<Self> {
        for (i, p) in punctures.iter().enumerate() {
            for q in punctures.iter().skip(i + 1) {
                if (p - q).norm() < EQ_TOL {
                    return Err(Error::invalid("punctures must be pairwise distinct"));
                }
            }
            if (p - base_point).norm() < EQ_TOL {
                return Err(Error::invalid("base point coincides with a puncture"));
            }
        }
        Ok(Domain::PuncturedPlane { punctures, base_point })
    }

    pub fn plane_chart(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::invalid("chart rectangle is degenerate"));
        }
        Ok(Domain::PlaneChart { x0, x1, y0, y1 })
    }

    pub fn punctures(&self) -> &[Complex64] {
        match self {
            Domain::PuncturedPlane { punctures, .. } => punctures,
            _ => &[],
        }
    }

    pub fn default_base_point(&self) -> Complex64 {
        match self {
            Domain::Interval { a, .. } => Complex64::new(*a, 0.0),
            Domain::Circle => Complex64::new(0.0, 0.0),
            Domain::PuncturedPlane { base_point, .. } => *base_point,
            Domain::PlaneChart { x0, x1, y0, y1 } => {
                Complex64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1))
            }
        }
    }

    pub fn contains(&self, p: Complex64) -> bool {
        match self {
            Domain::Interval { a, b } => {
                p.im.abs() < EQ_TOL && *a - EQ_TOL <= p.re && p.re <= *b + EQ_TOL
            }
            Domain::Circle => p.im.abs() < EQ_TOL,
            Domain::PuncturedPlane { punctures, .. } => {
                punctures.iter().all(|q| (p - q).norm() > EQ_TOL)
            }
            Domain::PlaneChart { x0, x1, y0, y1 } => {
                *x0 - EQ_TOL <= p.re && p.re <= *x1 + EQ_TOL && *y0 - EQ_TOL <= p.im && p.im <= *y1 + EQ_TOL
            }
        }
    }

    /// Point equality in the domain; on the circle, angles agree mod 2 pi.
    pub fn points_equal(&self, p: Complex64, q: Complex64) -> bool {
        match self {
            Domain::Circle => {
                let d = (p.re - q.re).rem_euclid(TWO_PI);
                (d.min(TWO_PI - d)).abs() < EQ_TOL && (p.im - q.im).abs() < EQ_TOL
            }
            _ => (p - q).norm() < EQ_TOL,
        }
    }
}

/// Piecewise-smooth parametric curve over [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub enum Path {
    Segment { from: Complex64, to: Complex64 },
    /// Circular arc `center + radius e^{i theta(t)}`, theta linear from
    /// `theta_start` to `theta_end` (multiple turns and negative sweeps allowed).
    Arc { center: Complex64, radius: f64, theta_start: f64, theta_end: f64 },
    /// Concatenation with uniform parameter split across the parts.
    Concat(Vec<Path>),
}

impl Path {
    pub fn segment(from: Complex64, to: Complex64) -> Path {
        Path::Segment { from, to }
    }

    pub fn arc(center: Complex64, radius: f64, theta_start: f64, theta_end: f64) -> Path {
        Path::Arc { center, radius, theta_start, theta_end }
    }

    /// Full counterclockwise unit circle around the origin.
    pub fn unit_circle() -> Path {
        Path::arc(Complex64::new(0.0, 0.0), 1.0, 0.0, TWO_PI)
    }

    pub fn constant(at: Complex64) -> Path {
        Path::Segment { from: at, to: at }
    }

    pub fn point(&self, t: f64) -> Complex64 {
        match self {
            Path::Segment { from, to } => from + (to - from) * t,
            Path::Arc { center, radius, theta_start, theta_end } => {
                let theta = theta_start + (theta_end - theta_start) * t;
                center + Complex64::from_polar(*radius, theta)
            }
            Path::Concat(parts) => {
                let (i, local) = split_index(parts.len(), t);
                parts[i].point(local)
            }
        }
    }

    pub fn velocity(&self, t: f64) -> Complex64 {
        match self {
            Path::Segment { from, to } => to - from,
            Path::Arc { center: _, radius, theta_start, theta_end } => {
                let sweep = theta_end - theta_start;
                let theta = theta_start + sweep * t;
                Complex64::new(0.0, sweep) * Complex64::from_polar(*radius, theta)
            }
            Path::Concat(parts) => {
                let (i, local) = split_index(parts.len(), t);
                parts[i].velocity(local) * parts.len() as f64
            }
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0)
    }

    /// Interior parameter values where smoothness may fail (concatenation
    /// boundaries), sorted, without 0 and 1.
    pub fn knots(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_knots(0.0, 1.0, &mut out);
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        out
    }

    fn collect_knots(&self, lo: f64, hi: f64, out: &mut Vec<f64>) {
        if let Path::Concat(parts) = self {
            let k = parts.len() as f64;
            for (i, part) in parts.iter().enumerate() {
                let a = lo + (hi - lo) * i as f64 / k;
                let b = lo + (hi - lo) * (i as f64 + 1.0) / k;
                if i > 0 {
                    out.push(a);
                }
                part.collect_knots(a, b, out);
            }
        }
    }

    /// Reversed path: t -> gamma(1 - t), with the velocity negated. Built
    /// structurally so velocities remain exact.
    pub fn reverse(&self) -> Path {
        match self {
            Path::Segment { from, to } => Path::Segment { from: *to, to: *from },
            Path::Arc { center, radius, theta_start, theta_end } => Path::Arc {
                center: *center,
                radius: *radius,
                theta_start: *theta_end,
                theta_end: *theta_start,
            },
            Path::Concat(parts) => {
                Path::Concat(parts.iter().rev().map(|p| p.reverse()).collect())
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        (self.start() - self.end()).norm() < EQ_TOL
    }

    /// Rough arc length from a uniform sample (plenty for step budgeting).
    pub fn sampled_length(&self, samples: usize) -> f64 {
        let n = samples.max(8);
        let mut len = 0.0;
        let mut prev = self.point(0.0);
        for k in 1..=n {
            let p = self.point(k as f64 / n as f64);
            len += (p - prev).norm();
            prev = p;
        }
        len
    }

    /// Minimum distance from the sampled path image to a point.
    pub fn min_distance_to(&self, p: Complex64, samples: usize) -> f64 {
        let n = samples.max(16);
        (0..=n)
            .map(|k| (self.point(k as f64 / n as f64) - p).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Exact distance from the path image to a point (piecewise geometry,
    /// no sampling).
    pub fn distance_to_point(&self, p: Complex64) -> f64 {
        match self {
            Path::Segment { from, to } => {
                let dir = to - from;
                let len2 = dir.norm_sqr();
                if len2 == 0.0 {
                    return (p - from).norm();
                }
                let t = (((p - from) * dir.conj()).re / len2).clamp(0.0, 1.0);
                (from + dir * t - p).norm()
            }
            Path::Arc { center, radius, theta_start, theta_end } => {
                let rel = p - center;
                let d_center = rel.norm();
                let sweep = theta_end - theta_start;
                if sweep.abs() >= TWO_PI - 1e-12 {
                    return (d_center - radius).abs();
                }
                // does the angle of p (mod 2 pi) fall inside the swept range?
                let (lo, hi) = if sweep >= 0.0 {
                    (*theta_start, *theta_end)
                } else {
                    (*theta_end, *theta_start)
                };
                let mut angle = rel.arg();
                while angle < lo {
                    angle += TWO_PI;
                }
                while angle >= lo + TWO_PI {
                    angle -= TWO_PI;
                }
                if angle <= hi {
                    (d_center - radius).abs()
                } else {
                    let a = (self.point(0.0) - p).norm();
                    let b = (self.point(1.0) - p).norm();
                    a.min(b)
                }
            }
            Path::Concat(parts) => parts
                .iter()
                .map(|part| part.distance_to_point(p))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

fn split_index(parts: usize, t: f64) -> (usize, f64) {
    let s = (t.clamp(0.0, 1.0)) * parts as f64;
    let i = (s.floor() as usize).min(parts - 1);
    (i, s - i as f64)
}

/// Concatenation with an endpoint compatibility check; the parameter splits
/// at 1/2.
pub fn concatenate(first: Path, second: Path) -> Result<Path> {
    if (first.end() - second.start()).norm() > EQ_TOL {
        return Err(Error::invalid(format!(
            "concatenation endpoints differ: {} vs {}",
            first.end(),
            second.start()
        )));
    }
    Ok(Path::Concat(vec![first, second]))
}

/// Straight segment from the chart center m to x, the identity-chart radial
/// path gamma_x(t) = m + t (x - m).
pub fn radial_path(domain: &Domain, center: Complex64, x: Complex64) -> Result<Path> {
    if !domain.contains(x) || !domain.contains(center) {
        return Err(Error::invalid("radial path endpoint outside the chart"));
    }
    Ok(Path::segment(center, x))
}

/// Winding number of a closed path around p: (1/2 pi i) (contour integral of
/// dz/(z-p)), by quadrature, rounded, with a 0.25 rounding margin.
pub fn winding_number(path: &Path, p: Complex64) -> Result<i64> {
    if !path.is_closed() {
        return Err(Error::invalid("winding number needs a closed path"));
    }
    let mut boundaries = vec![0.0];
    boundaries.extend(path.knots());
    boundaries.push(1.0);
    let mut total = Complex64::new(0.0, 0.0);
    for w in boundaries.windows(2) {
        let mut f = |t: f64| {
            let z = path.point(t);
            let dz = path.velocity(t);
            let den = z - p;
            if den.norm() < 1e-13 {
                return Err(Error::eval(Some(t), "path passes through the winding point"));
            }
            Ok(dz / den)
        };
        total += adaptive_scalar(&mut f, w[0], w[1], 1e-13)?;
    }
    let value = total / Complex64::new(0.0, TWO_PI);
    let rounded = value.re.round();
    if (value.re - rounded).abs() > 0.25 || value.im.abs() > 0.25 {
        return Err(Error::Precision(format!(
            "winding integral {value} too far from an integer to round"
        )));
    }
    Ok(rounded as i64)
}

/// A canonical free generating set of pi_1 for a punctured plane: one lasso
/// per puncture (segment out, full counterclockwise circle, segment back),
/// ordered like the input punctures.
#[derive(Debug, Clone)]
pub struct LoopBasis {
    pub base_point: Complex64,
    pub loops: Vec<Path>,
}

impl LoopBasis {
    pub fn rank(&self) -> usize {
        self.loops.len()
    }
}

pub fn canonical_loop_basis(domain: &Domain) -> Result<LoopBasis> {
    let (punctures, m0) = match domain {
        Domain::PuncturedPlane { punctures, base_point } => (punctures, *base_point),
        Domain::Circle => {
            // pi_1(S^1) = Z, generated by one full turn in the angle coordinate
            return Ok(LoopBasis {
                base_point: Complex64::new(0.0, 0.0),
                loops: vec![Path::segment(Complex64::new(0.0, 0.0), Complex64::new(TWO_PI, 0.0))],
            });
        }
        _ => return Err(Error::invalid("loop basis requires a punctured plane or circle")),
    };
    if punctures.is_empty() {
        return Err(Error::invalid("loop basis needs at least one puncture"));
    }
    let mut loops = Vec::with_capacity(punctures.len());
    for (j, &p) in punctures.iter().enumerate() {
        let mut rho = (m0 - p).norm();
        for (i, &q) in punctures.iter().enumerate() {
            if i != j {
                rho = rho.min((q - p).norm());
            }
        }
        rho *= 0.5;
        if rho < 1e-12 {
            return Err(Error::Geometry(format!(
                "puncture {p} too close to its neighbors or the base point"
            )));
        }
        let u = (m0 - p) / (m0 - p).norm();
        let entry = p + u * rho;
        let theta = u.arg();
        let lasso = Path::Concat(vec![
            Path::segment(m0, entry),
            Path::arc(p, rho, theta, theta + TWO_PI),
            Path::segment(entry, m0),
        ]);
        loops.push(lasso);
    }
    // verify the winding matrix is exactly the identity
    for (i, lasso) in loops.iter().enumerate() {
        for (j, &p) in punctures.iter().enumerate() {
            let w = winding_number(lasso, p)?;
            let want = if i == j { 1 } else { 0 };
            if w != want {
                return Err(Error::Geometry(format!(
                    "loop {i} winds {w} times around puncture {j}, expected {want}"
                )));
            }
        }
    }
    Ok(LoopBasis { base_point: m0, loops })
}

/// Loop for a word in the basis generators under the traverse-first
/// convention: the first factor is traversed first. Negative exponents
/// traverse the reversed loop.
pub fn word_loop(basis: &LoopBasis, word: &[(usize, i64)]) -> Result<Path> {
    let mut pieces: Vec<Path> = Vec::new();
    for &(gen, exp) in word {
        if gen >= basis.loops.len() {
            return Err(Error::invalid(format!("word references generator {gen} out of range")));
        }
        let base = &basis.loops[gen];
        let reps = exp.unsigned_abs();
        for _ in 0..reps {
            pieces.push(if exp >= 0 { base.clone() } else { base.reverse() });
        }
    }
    if pieces.is_empty() {
        return Ok(Path::constant(basis.base_point));
    }
    Ok(Path::Concat(pieces))
}
