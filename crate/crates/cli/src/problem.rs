//! Problem-file schema (JSON) and its conversion into library types.
//!
//! Complex numbers are [re, im] pairs throughout. Forms are either
//! expression-backed ("expr", or "expr_dx"/"expr_dy" on charts) or sampled
//! maps referenced through a CSV file ("samples_csv"), whose logarithmic
//! derivative becomes the form.

use std::collections::BTreeMap;
use std::path::Path as FsPath;

use num_complex::Complex64;
use serde::Deserialize;

use mapgroup::calculus::SampledCurve;
use mapgroup::domain::{Domain, Path};
use mapgroup::error::{Error, Result};
use mapgroup::expr::parse_expr;
use mapgroup::forms::OneForm;
use mapgroup::group::{Field, GroupDescriptor, Lattice};
use mapgroup::matrix::Matrix;

use crate::report::parse_complex;

pub type Pair = [f64; 2];

pub fn pair_to_complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub group: GroupSpec,
    pub domain: DomainSpec,
    #[serde(default)]
    pub base_point: Option<Pair>,
    #[serde(default)]
    pub forms: BTreeMap<String, FormSpec>,
    #[serde(default)]
    pub control: ControlSpec,
    #[serde(default)]
    pub periods: Option<PeriodsSection>,
    #[serde(default)]
    pub integrate: Option<IntegrateSection>,
    #[serde(default)]
    pub multiply: Option<MultiplySection>,
    #[serde(default)]
    pub inverse: Option<InverseSection>,
    #[serde(default)]
    pub components: Option<ComponentsSection>,
    #[serde(default)]
    pub discreteness: Option<DiscretenessSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub field: Option<String>,
    #[serde(default)]
    pub lattice: Option<Vec<Vec<Pair>>>,
    #[serde(default)]
    pub dim: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub punctures: Option<Vec<Pair>>,
    #[serde(default)]
    pub x0: Option<f64>,
    #[serde(default)]
    pub x1: Option<f64>,
    #[serde(default)]
    pub y0: Option<f64>,
    #[serde(default)]
    pub y1: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    #[serde(default)]
    pub expr: Option<String>,
    #[serde(default)]
    pub expr_dx: Option<String>,
    #[serde(default)]
    pub expr_dy: Option<String>,
    #[serde(default)]
    pub samples_csv: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ControlSpec {
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub period_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodsSection {
    #[serde(default)]
    pub forms: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateSection {
    pub form: String,
    pub points: Vec<Pair>,
    #[serde(default)]
    pub paths: Option<Vec<PathSpec>>,
    #[serde(default)]
    pub svg_samples: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplySection {
    pub left: String,
    pub right: String,
    #[serde(default)]
    pub points: Option<Vec<Pair>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseSection {
    pub form: String,
    #[serde(default)]
    pub points: Option<Vec<Pair>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentsSection {
    pub forms: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretenessSection {
    pub n: usize,
    pub relations: Vec<Vec<i64>>,
}

/// One smooth piece of an explicit path; a list concatenates.
#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathPiece {
    Segment { from: Pair, to: Pair },
    Arc { center: Pair, radius: f64, theta_start: f64, theta_end: f64 },
}

pub type PathSpec = Vec<PathPiece>;

pub fn build_path(spec: &PathSpec) -> Result<Path> {
    let pieces: Vec<Path> = spec
        .iter()
        .map(|p| match p {
            PathPiece::Segment { from, to } => {
                Path::segment(pair_to_complex(*from), pair_to_complex(*to))
            }
            PathPiece::Arc { center, radius, theta_start, theta_end } => {
                Path::arc(pair_to_complex(*center), *radius, *theta_start, *theta_end)
            }
        })
        .collect();
    match pieces.len() {
        0 => Err(Error::invalid("path spec must have at least one piece")),
        1 => Ok(pieces.into_iter().next().unwrap()),
        _ => {
            for w in pieces.windows(2) {
                if (w[0].end() - w[1].start()).norm() > 1e-9 {
                    return Err(Error::invalid("path pieces are not endpoint compatible"));
                }
            }
            Ok(Path::Concat(pieces))
        }
    }
}

pub fn load_problem(path: &FsPath) -> Result<(ProblemFile, String)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    let problem: ProblemFile = serde_json::from_str(&text)
        .map_err(|e| Error::invalid(format!("problem file schema error: {e}")))?;
    Ok((problem, text))
}

pub fn build_group(spec: &GroupSpec) -> Result<GroupDescriptor> {
    match spec.kind.as_str() {
        "GL" => {
            let n = spec.n.ok_or_else(|| Error::invalid("GL group needs \"n\""))?;
            let field = match spec.field.as_deref() {
                Some("C") | None => Field::Complex,
                Some("R") => Field::Real,
                Some(other) => {
                    return Err(Error::invalid(format!("unknown field \"{other}\" (use C or R)")))
                }
            };
            Ok(GroupDescriptor::gl(n, field))
        }
        "SL" => {
            let n = spec.n.ok_or_else(|| Error::invalid("SL group needs \"n\""))?;
            if spec.field.as_deref() == Some("R") {
                return Err(Error::invalid("SL is supported over C only"));
            }
            Ok(GroupDescriptor::sl(n))
        }
        "abelian" => {
            let generators: Vec<Vec<Complex64>> = spec
                .lattice
                .clone()
                .unwrap_or_default()
                .into_iter()
                .map(|g| g.into_iter().map(pair_to_complex).collect())
                .collect();
            let dim = match (spec.dim, generators.first()) {
                (Some(d), _) => d,
                (None, Some(g)) => g.len(),
                (None, None) => {
                    return Err(Error::invalid("abelian group needs \"dim\" or a nonempty lattice"))
                }
            };
            Ok(GroupDescriptor::abelian(Lattice::new(dim, generators)?))
        }
        other => Err(Error::invalid(format!("unknown group type \"{other}\" (GL, SL, abelian)"))),
    }
}

pub fn build_domain(spec: &DomainSpec, base_point: Option<Pair>) -> Result<Domain> {
    match spec.kind.as_str() {
        "interval" => Domain::interval(
            spec.a.ok_or_else(|| Error::invalid("interval needs \"a\""))?,
            spec.b.ok_or_else(|| Error::invalid("interval needs \"b\""))?,
        ),
        "circle" => Ok(Domain::circle()),
        "punctured_plane" => {
            let punctures: Vec<Complex64> = spec
                .punctures
                .clone()
                .ok_or_else(|| Error::invalid("punctured_plane needs \"punctures\""))?
                .into_iter()
                .map(pair_to_complex)
                .collect();
            let m0 = base_point
                .map(pair_to_complex)
                .ok_or_else(|| Error::invalid("punctured_plane needs \"base_point\""))?;
            Domain::punctured_plane(punctures, m0)
        }
        "chart" => Domain::plane_chart(
            spec.x0.ok_or_else(|| Error::invalid("chart needs \"x0\""))?,
            spec.x1.ok_or_else(|| Error::invalid("chart needs \"x1\""))?,
            spec.y0.ok_or_else(|| Error::invalid("chart needs \"y0\""))?,
            spec.y1.ok_or_else(|| Error::invalid("chart needs \"y1\""))?,
        ),
        other => Err(Error::invalid(format!(
            "unknown domain type \"{other}\" (interval, circle, punctured_plane, chart)"
        ))),
    }
}

/// Resolve a named form into a OneForm; sampled references load their CSV
/// relative to the problem file's directory.
pub fn build_form(
    name: &str,
    spec: &FormSpec,
    domain: &Domain,
    group: &GroupDescriptor,
    problem_dir: &FsPath,
) -> Result<OneForm> {
    if let Some(csv) = &spec.samples_csv {
        let full = problem_dir.join(csv);
        let curve = load_sampled_curve(&full, domain.clone(), group.clone())?;
        return curve.log_derivative();
    }
    match domain {
        Domain::PlaneChart { .. } => {
            let dx = spec
                .expr_dx
                .as_deref()
                .ok_or_else(|| Error::invalid(format!("chart form \"{name}\" needs \"expr_dx\"")))?;
            let dy = spec
                .expr_dy
                .as_deref()
                .ok_or_else(|| Error::invalid(format!("chart form \"{name}\" needs \"expr_dy\"")))?;
            let e1 = parse_expr(dx, &["x", "y"])?;
            let e2 = parse_expr(dy, &["x", "y"])?;
            OneForm::chart_exprs(domain.clone(), group.clone(), e1, e2)
        }
        Domain::Interval { .. } | Domain::Circle => {
            let text = spec
                .expr
                .as_deref()
                .ok_or_else(|| Error::invalid(format!("form \"{name}\" needs \"expr\"")))?;
            let e = parse_expr(text, &["t"])?;
            OneForm::interval_expr(domain.clone(), group.clone(), e)
        }
        Domain::PuncturedPlane { .. } => {
            let text = spec
                .expr
                .as_deref()
                .ok_or_else(|| Error::invalid(format!("form \"{name}\" needs \"expr\"")))?;
            let e = parse_expr(text, &["z"])?;
            OneForm::complex_expr(domain.clone(), group.clone(), e)
        }
    }
}

/// CSV with header `t,e00,e01,...` (row-major matrix entries as re+imi
/// strings) becomes a uniformly sampled curve.
pub fn load_sampled_curve(
    path: &FsPath,
    domain: Domain,
    group: GroupDescriptor,
) -> Result<SampledCurve> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read samples {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::invalid("samples CSV is empty"))?;
    let n_cols = header.split(',').count();
    let n = group.matrix_dim();
    if n_cols != 1 + n * n {
        return Err(Error::invalid(format!(
            "samples CSV has {n_cols} columns, expected {} for a {n}x{n} map",
            1 + n * n
        )));
    }
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n_cols {
            return Err(Error::invalid(format!(
                "samples CSV row {} has {} cells, expected {n_cols}",
                lineno + 2,
                cells.len()
            )));
        }
        let t: f64 = cells[0]
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad parameter value on row {}", lineno + 2)))?;
        let entries: Result<Vec<Complex64>> =
            cells[1..].iter().map(|c| parse_complex(c.trim())).collect();
        coords.push(t);
        values.push(Matrix::from_rows(n, &entries?)?);
    }
    if coords.len() < 3 {
        return Err(Error::invalid("samples CSV needs at least three rows"));
    }
    Ok(SampledCurve { domain, group, coords, values })
}
