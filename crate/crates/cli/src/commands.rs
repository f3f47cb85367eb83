//! Command implementations: each returns a RunReport whose tables become
//! CSV files and whose verdicts go to stdout.

use std::time::Instant;

use num_complex::Complex64;

use mapgroup::calculus::{
    evaluate, inverse as calculus_inverse, multiply as calculus_multiply, BasedMapElement,
    FullMapElement, IntegrabilityStatus,
};
use mapgroup::domain::{canonical_loop_basis, Domain};
use mapgroup::error::{Error, Result};
use mapgroup::evolve::{transport_dense, EvolControl};
use mapgroup::forms::OneForm;
use mapgroup::group::{group_multiply, GroupDescriptor};
use mapgroup::monodromy::{component_class, period_vector};
use mapgroup::snf::{discreteness_report, smith_normal_form, AbelianPresentation, IntMatrix};
use mapgroup::verify::{pathology_rows, run_suite};

use crate::problem::{
    build_domain, build_form, build_group, build_path, load_problem, pair_to_complex, ProblemFile,
};
use crate::report::{digest, entry_header, format_complex, matrix_cells, RunReport, Table};
use crate::svg::line_chart;

pub struct RunOptions {
    pub input: std::path::PathBuf,
    pub out: Option<std::path::PathBuf>,
    pub steps: Option<usize>,
    pub period_tol: Option<f64>,
    pub svg: bool,
    /// Report the step-doubling error estimate of each transport.
    pub tol_report: bool,
}

struct Context {
    problem: ProblemFile,
    group: GroupDescriptor,
    domain: Domain,
    base_point: Complex64,
    control: EvolControl,
    period_tol: f64,
    digest: String,
    dir: std::path::PathBuf,
}

fn load_context(opts: &RunOptions, command: &str) -> Result<Context> {
    let (problem, text) = load_problem(&opts.input)?;
    let group = build_group(&problem.group)?;
    let domain = build_domain(&problem.domain, problem.base_point)?;
    let base_point = problem
        .base_point
        .map(pair_to_complex)
        .unwrap_or_else(|| domain.default_base_point());
    if !domain.contains(base_point) {
        return Err(Error::invalid("base point lies outside the domain"));
    }
    let steps = opts.steps.or(problem.control.steps).unwrap_or(256);
    let period_tol = opts.period_tol.or(problem.control.period_tol).unwrap_or(1e-6);
    let control = EvolControl::with_steps(steps);
    let dir = opts
        .input
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| std::path::PathBuf::from("."));
    let digest = digest(&[
        command,
        &text,
        &steps.to_string(),
        &format!("{period_tol}"),
    ]);
    Ok(Context { problem, group, domain, base_point, control, period_tol, digest, dir })
}

impl Context {
    fn form(&self, name: &str) -> Result<OneForm> {
        let spec = self
            .problem
            .forms
            .get(name)
            .ok_or_else(|| Error::invalid(format!("form \"{name}\" is not defined")))?;
        build_form(name, spec, &self.domain, &self.group, &self.dir)
    }

    fn based(&self, name: &str) -> Result<BasedMapElement> {
        let form = self.form(name)?;
        let mut based = BasedMapElement::new(form, self.base_point)?;
        match self.domain {
            Domain::Interval { .. } | Domain::PlaneChart { .. } => {
                based = based.with_status(IntegrabilityStatus::Verified);
            }
            _ => {
                based.verify_integrability(self.control)?;
            }
        }
        Ok(based)
    }

    fn sample_points(&self, requested: &Option<Vec<[f64; 2]>>) -> Result<Vec<Complex64>> {
        if let Some(points) = requested {
            return Ok(points.iter().map(|p| pair_to_complex(*p)).collect());
        }
        match &self.domain {
            Domain::Interval { a, b } => Ok((1..=10)
                .map(|k| Complex64::new(a + (b - a) * k as f64 / 10.0, 0.0))
                .collect()),
            Domain::Circle => Ok((1..=10)
                .map(|k| Complex64::new(2.0 * std::f64::consts::PI * k as f64 / 10.0, 0.0))
                .collect()),
            _ => Err(Error::invalid(
                "this domain needs explicit sample \"points\" in the command section",
            )),
        }
    }
}

pub fn cmd_periods(opts: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let ctx = load_context(opts, "periods")?;
    match ctx.domain {
        Domain::PuncturedPlane { .. } | Domain::Circle => {}
        _ => return Err(Error::invalid("periods needs a punctured_plane or circle domain")),
    }
    let basis = canonical_loop_basis(&ctx.domain)?;
    let names: Vec<String> = match ctx.problem.periods.as_ref().and_then(|s| s.forms.clone()) {
        Some(list) => list,
        None => ctx.problem.forms.keys().cloned().collect(),
    };
    if names.is_empty() {
        return Err(Error::invalid("no forms to take periods of"));
    }
    let mut report = RunReport::new("periods", ctx.digest.clone());
    let n = ctx.group.matrix_dim();
    let mut header = vec!["form".to_string(), "generator".to_string()];
    header.extend(entry_header(n));
    header.push("distance_to_identity".to_string());
    let mut table = Table { name: "table".into(), header, rows: Vec::new() };
    for name in &names {
        let alpha = ctx.form(name)?;
        let pm = period_vector(&ctx.group, &alpha, &basis, ctx.control)?;
        for (j, value) in pm.values.iter().enumerate() {
            let mut row = vec![name.clone(), j.to_string()];
            row.extend(matrix_cells(&value.as_matrix()));
            row.push(format!("{}", value.distance_to_identity()));
            table.rows.push(row);
        }
        let worst = pm.worst_identity_distance();
        let verdict = if pm.is_trivial(ctx.period_tol) {
            format!("form {name}: integrable (worst period distance {worst:.3e} < {:.1e})", ctx.period_tol)
        } else {
            format!("form {name}: non-integrable (worst period distance {worst:.3e} >= {:.1e})", ctx.period_tol)
        };
        report.verdicts.push(verdict);
    }
    report.tables.push(table);
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

pub fn cmd_integrate(opts: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let ctx = load_context(opts, "integrate")?;
    let section = ctx
        .problem
        .integrate
        .as_ref()
        .ok_or_else(|| Error::invalid("problem file needs an \"integrate\" section"))?;
    let mut based = ctx.based(&section.form)?;
    let integrable = based.status() == IntegrabilityStatus::Verified;
    if !integrable {
        if section.paths.is_none() {
            return Err(Error::Ambiguity(format!(
                "form \"{}\" is not integrable; values are path-dependent, supply \"paths\"",
                section.form
            )));
        }
        based = based.with_status(IntegrabilityStatus::RelativeToPath);
    }
    let full = FullMapElement::new(ctx.group.identity(), based)?;
    let points: Vec<Complex64> = section.points.iter().map(|p| pair_to_complex(*p)).collect();
    let paths = match &section.paths {
        Some(specs) => {
            if specs.len() != points.len() {
                return Err(Error::invalid("\"paths\" must match \"points\" one to one"));
            }
            Some(specs.iter().map(build_path).collect::<Result<Vec<_>>>()?)
        }
        None => None,
    };
    let mut report = RunReport::new("integrate", ctx.digest.clone());
    let n = ctx.group.matrix_dim();
    let mut header = vec!["point".to_string()];
    header.extend(entry_header(n));
    let mut table = Table { name: "values".into(), header, rows: Vec::new() };
    let mut worst_estimate = 0.0f64;
    for (i, &point) in points.iter().enumerate() {
        let path = paths.as_ref().map(|p| &p[i]);
        let value = evaluate(&full, point, path, ctx.control)?;
        let mut row = vec![format_complex(point)];
        row.extend(matrix_cells(&value.as_matrix()));
        table.rows.push(row);
        if opts.tol_report {
            let chosen = match path {
                Some(p) => (*p).clone(),
                None => mapgroup::calculus::canonical_path(&ctx.domain, ctx.base_point, point)?,
            };
            let res = transport_dense(&ctx.group, full.based.form(), &chosen, 1, ctx.control)?;
            worst_estimate = worst_estimate.max(res.error_estimate);
        }
    }
    report.tables.push(table);
    if opts.tol_report {
        report.verdicts.push(format!(
            "worst step-doubling error estimate over transports: {worst_estimate:.3e}"
        ));
    }
    report
        .verdicts
        .push(format!("evaluated {} points ({})", points.len(), if integrable { "integrable form, canonical paths" } else { "explicit paths" }));

    if opts.svg {
        let out = opts
            .out
            .as_ref()
            .ok_or_else(|| Error::invalid("--svg needs --out to place the file"))?;
        let samples = section.svg_samples.unwrap_or(100);
        let path = match &paths {
            Some(p) => p[0].clone(),
            None => mapgroup::calculus::canonical_path(&ctx.domain, ctx.base_point, points[0])?,
        };
        let dense = transport_dense(&ctx.group, full.based.form(), &path, samples, ctx.control)?;
        let grid = dense.dense.expect("dense transport requested");
        let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let pts: Vec<(f64, f64)> = grid
                    .iter()
                    .map(|(t, g)| (*t, g.as_matrix()[(i, j)].norm()))
                    .collect();
                series.push((format!("|e{i}{j}|"), pts));
            }
        }
        let chart = line_chart(
            &format!("|entries| of the transport of {} along the path to {}", section.form, format_complex(points[0])),
            &series,
        );
        std::fs::create_dir_all(out)
            .map_err(|e| Error::invalid(format!("cannot create {}: {e}", out.display())))?;
        let svg_path = out.join("integrate_path.svg");
        std::fs::write(&svg_path, chart)
            .map_err(|e| Error::invalid(format!("cannot write {}: {e}", svg_path.display())))?;
        report.verdicts.push(format!("wrote {}", svg_path.display()));
    }
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

fn dressed_form_table(
    ctx: &Context,
    name: &str,
    form: &OneForm,
    points: &[Complex64],
) -> Result<Table> {
    let n = ctx.group.matrix_dim();
    let mut header = vec!["point".to_string()];
    header.extend(entry_header(n));
    let mut table = Table { name: name.into(), header, rows: Vec::new() };
    for &p in points {
        let value = form.eval(p, Complex64::new(1.0, 0.0))?;
        let mut row = vec![format_complex(p)];
        row.extend(matrix_cells(&value));
        table.rows.push(row);
    }
    Ok(table)
}

pub fn cmd_multiply(opts: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let ctx = load_context(opts, "multiply")?;
    let section = ctx
        .problem
        .multiply
        .as_ref()
        .ok_or_else(|| Error::invalid("problem file needs a \"multiply\" section"))?;
    let alpha = ctx.based(&section.left)?;
    let beta = ctx.based(&section.right)?;
    let product = calculus_multiply(&alpha, &beta, ctx.control)?;
    let points = ctx.sample_points(&section.points)?;
    let mut report = RunReport::new("multiply", ctx.digest.clone());
    report.tables.push(dressed_form_table(&ctx, "form", product.form(), &points)?);
    // consistency residual: Evol(alpha*beta) vs Evol(alpha) Evol(beta)
    let mut residual = 0.0f64;
    for &m in &points {
        let lhs = product.evol_at(m, ctx.control)?;
        let rhs = group_multiply(&alpha.evol_at(m, ctx.control)?, &beta.evol_at(m, ctx.control)?)?;
        residual = residual.max(lhs.distance(&rhs)?);
    }
    report.verdicts.push(format!(
        "max || Evol(a*b) - Evol(a) Evol(b) || over {} points: {residual:.3e}",
        points.len()
    ));
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

pub fn cmd_inverse(opts: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let ctx = load_context(opts, "inverse")?;
    let section = ctx
        .problem
        .inverse
        .as_ref()
        .ok_or_else(|| Error::invalid("problem file needs an \"inverse\" section"))?;
    let alpha = ctx.based(&section.form)?;
    let inv = calculus_inverse(&alpha, ctx.control)?;
    let points = ctx.sample_points(&section.points)?;
    let mut report = RunReport::new("inverse", ctx.digest.clone());
    report.tables.push(dressed_form_table(&ctx, "form", inv.form(), &points)?);
    let product = calculus_multiply(&alpha, &inv, ctx.control)?;
    let mut residual = 0.0f64;
    for &p in &points {
        residual = residual.max(product.form().eval(p, Complex64::new(1.0, 0.0))?.frobenius_norm());
    }
    report
        .verdicts
        .push(format!("max || (a * a^-1)_m || over {} points: {residual:.3e}", points.len()));
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

pub fn cmd_components(opts: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let ctx = load_context(opts, "components")?;
    let section = ctx
        .problem
        .components
        .as_ref()
        .ok_or_else(|| Error::invalid("problem file needs a \"components\" section"))?;
    let lattice = match &ctx.group {
        GroupDescriptor::AbelianQuotient { lattice } => lattice.clone(),
        _ => {
            return Err(Error::invalid(
                "components needs an abelian quotient group (C^x is the lattice 2 pi i Z)",
            ))
        }
    };
    let basis = canonical_loop_basis(&ctx.domain)?;
    let mut report = RunReport::new("components", ctx.digest.clone());
    let mut header = vec!["form".to_string(), "generator".to_string()];
    for g in 0..lattice.generators().len() {
        header.push(format!("class_{g}"));
    }
    let mut table = Table { name: "classes".into(), header, rows: Vec::new() };
    let mut classes = Vec::new();
    for name in &section.forms {
        let alpha = ctx.form(name)?;
        let class = component_class(&alpha, &basis, &lattice)?;
        for (j, c) in class.classes.iter().enumerate() {
            let mut row = vec![name.clone(), j.to_string()];
            row.extend(c.iter().map(|k| k.to_string()));
            table.rows.push(row);
        }
        classes.push((name.clone(), class));
    }
    report.tables.push(table);
    for i in 0..classes.len() {
        for j in i + 1..classes.len() {
            let same = classes[i].1.same_component(&classes[j].1);
            report.verdicts.push(format!(
                "{} and {}: {}",
                classes[i].0,
                classes[j].0,
                if same { "same component" } else { "different components" }
            ));
        }
    }
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

pub fn cmd_discreteness(opts: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let ctx = load_context(opts, "discreteness")?;
    let section = ctx
        .problem
        .discreteness
        .as_ref()
        .ok_or_else(|| Error::invalid("problem file needs a \"discreteness\" section"))?;
    let rows = section.relations.len();
    let cols = section.relations.first().map(|r| r.len()).unwrap_or(0);
    if section.relations.iter().any(|r| r.len() != cols) {
        return Err(Error::invalid("relations rows must have equal length"));
    }
    let flat: Vec<i64> = section.relations.iter().flatten().copied().collect();
    let relations = if rows == 0 || cols == 0 {
        IntMatrix::zeros(section.n, 0)
    } else {
        if rows != section.n {
            return Err(Error::invalid(format!(
                "relations matrix must have n = {} rows, got {rows}",
                section.n
            )));
        }
        IntMatrix::from_i64_rows(rows, cols, &flat)?
    };
    let presentation = AbelianPresentation::new(section.n, relations.clone())?;
    let lattice = match &ctx.group {
        GroupDescriptor::AbelianQuotient { lattice } => lattice.clone(),
        _ => mapgroup::group::Lattice::trivial(1),
    };
    let verdict = discreteness_report(&presentation, &lattice);
    let snf = smith_normal_form(&relations);
    let mut report = RunReport::new("discreteness", ctx.digest.clone());
    let mut table = Table {
        name: "invariant_factors".into(),
        header: vec!["index".into(), "factor".into()],
        rows: Vec::new(),
    };
    for (i, d) in snf.invariant_factors().iter().enumerate() {
        table.rows.push(vec![i.to_string(), d.to_string()]);
    }
    report.tables.push(table);
    report.verdicts.push(verdict.verdict_line());
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

pub fn cmd_demo_exp_pathology(n_list: &[u32], radius: f64) -> Result<RunReport> {
    let start = Instant::now();
    let rows = pathology_rows(n_list, radius, 41)?;
    let mut report = RunReport::new(
        "demo-exp-pathology",
        digest(&[&format!("{n_list:?}"), &format!("{radius}")]),
    );
    let mut table = Table {
        name: "rows".into(),
        header: vec!["n".into(), "sup_deviation".into(), "in_exp_image".into()],
        rows: Vec::new(),
    };
    for row in &rows {
        table.rows.push(vec![
            row.n.to_string(),
            format!("{}", row.sup_deviation),
            row.in_exp_image.to_string(),
        ]);
    }
    report.tables.push(table);
    let monotone = rows.windows(2).all(|w| w[1].sup_deviation < w[0].sup_deviation);
    let outside = rows.iter().all(|r| !r.in_exp_image);
    report.verdicts.push(format!(
        "sup deviations decay monotonically: {monotone}; h_n(n) outside exp image for every n: {outside}"
    ));
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Runs a named verification suite; Ok(false) means criteria failed (exit 1).
pub fn cmd_verify(suite: &str) -> Result<bool> {
    let report = run_suite(suite)?;
    for criterion in &report.criteria {
        println!("{}", criterion.line());
    }
    Ok(report.passed())
}
