//! Argument definitions and command dispatch.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use projflat::analysis::{self, Family};
use projflat::descriptor::{self, MetricDescriptor, PresetParams};
use projflat::metrics::{classify, ClosedKind};
use projflat::{geometry, sampling, sphere, tensor, Error, FinslerMetric};

use crate::output::{num, Artifact, Format};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Lib(#[from] Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

type Out = Result<Artifact, CliError>;

#[derive(Debug, Parser)]
#[command(name = "projflat", version, about = "Projectively flat Finsler metrics of constant flag curvature")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Preset name, inline JSON descriptor, or path to a JSON descriptor.
    #[arg(long, global = true)]
    metric: Option<String>,
    /// Path to a JSON descriptor.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// First component of the Randers vector for the `randers_*` presets.
    #[arg(long, global = true, allow_hyphen_values = true)]
    a1: Option<f64>,
    /// Ratio `φ = cψ` for `randers_km1`.
    #[arg(long, global = true)]
    c: Option<f64>,
    /// Bryant parameter.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Sectional curvature for `riemann`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Dimension for presets.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Random samples (curvature: 100, sphere-check: 200).
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads for scans (default: hardware parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate F(x, y).
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        at: Point,
        #[arg(long, allow_hyphen_values = true)]
        dir: Point,
    },
    /// Closed-form distance against the integral along the segment.
    Distance {
        #[arg(long, allow_hyphen_values = true)]
        from: Point,
        #[arg(long, allow_hyphen_values = true)]
        to: Point,
        /// Flag curvature (defaults to the family's value).
        #[arg(long, allow_hyphen_values = true)]
        k: Option<f64>,
    },
    /// Flag curvature and Berwald residuals at random interior samples.
    Curvature,
    /// Positive-definiteness scan of a planar metric.
    Scan {
        #[arg(long, default_value_t = 200)]
        res: usize,
        #[arg(long, default_value_t = 64)]
        dirs: usize,
        /// `xmin,xmax,ymin,ymax`.
        #[arg(long, allow_hyphen_values = true)]
        bounds: Option<Point>,
    },
    /// Global case of a k0 or km1 descriptor.
    Classify,
    /// Checks of the hemisphere pull-back of a planar metric.
    SphereCheck,
    /// Growth of F*(x, −dr) approaching the boundary.
    Growth {
        #[arg(long, allow_hyphen_values = true, default_value = "1,0")]
        dir: Point,
        #[arg(long, default_value = "0.9,0.99,0.999")]
        fractions: Point,
    },
    /// Reparametrised straight line from a point.
    Geodesic {
        #[arg(long, allow_hyphen_values = true)]
        from: Point,
        #[arg(long, allow_hyphen_values = true)]
        dir: Point,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        t_end: f64,
    },
}

/// Comma-separated coordinates.
#[derive(Debug, Clone)]
struct Point(Vec<f64>);

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
            .collect::<Result<_, _>>()
            .map(Point)
    }
}

fn read_descriptor(path: &Path) -> Result<MetricDescriptor, CliError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

impl Common {
    fn descriptor(&self) -> Result<MetricDescriptor, CliError> {
        if let Some(path) = &self.config {
            return read_descriptor(path);
        }
        let arg = self.metric.as_deref().ok_or_else(|| CliError::Parse("one of --metric or --config is required".into()))?;
        if arg.trim_start().starts_with('{') {
            return serde_json::from_str(arg).map_err(|e| CliError::Parse(format!("--metric: {e}")));
        }
        if descriptor::PRESET_NAMES.contains(&arg) {
            let params = PresetParams { a1: self.a1, c: self.c, alpha: self.alpha, lambda: self.lambda, n: self.dim };
            return Ok(descriptor::preset(arg, &params)?);
        }
        let path = Path::new(arg);
        if path.exists() {
            return read_descriptor(path);
        }
        Err(CliError::Parse(format!(
            "--metric `{arg}` is neither a preset ({}) nor a JSON descriptor",
            descriptor::PRESET_NAMES.join(", ")
        )))
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let common = &cli.common;
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Parse(format!("--threads: {e}")))?;
    }
    let desc = common.descriptor()?;
    let metric = desc.build()?;
    let artifact = match &cli.command {
        Command::Eval { at, dir } => eval(&metric, &at.0, &dir.0),
        Command::Distance { from, to, k } => distance(&desc, &metric, &from.0, &to.0, *k),
        Command::Curvature => curvature(&desc, &metric, common),
        Command::Scan { res, dirs, bounds } => scan(&metric, *res, *dirs, bounds.as_ref().map(|b| b.0.as_slice())),
        Command::Classify => classify_cmd(&desc),
        Command::SphereCheck => sphere_check(&desc, &metric, common),
        Command::Growth { dir, fractions } => growth(&desc, &dir.0, &fractions.0),
        Command::Geodesic { from, dir, t_end } => geodesic(&metric, &from.0, &dir.0, *t_end),
    }?;
    artifact.write(common.format, common.out.as_deref())
}

fn joined(v: &[f64]) -> String {
    v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(";")
}

fn eval(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Out {
    let value = metric.eval(x, y)?;
    let mut a = Artifact::new(&json!({ "x": x, "y": y, "value": value }), &["x", "y", "value"])?;
    a.row([joined(x), joined(y), num(value)]);
    Ok(a)
}

fn curvature_of(desc: &MetricDescriptor, k: Option<f64>) -> Result<f64, CliError> {
    k.or_else(|| desc.curvature())
        .ok_or_else(|| CliError::Lib(Error::BadInput("flag curvature unknown for this metric; pass --k".into())))
}

fn distance(desc: &MetricDescriptor, metric: &FinslerMetric, from: &[f64], to: &[f64], k: Option<f64>) -> Out {
    let k = curvature_of(desc, k)?;
    let d = geometry::distance(metric, k, from, to)?;
    let mut a = Artifact::new(
        &json!({ "from": from, "to": to, "k": k, "formula": d.formula, "integral": d.integral, "rel_err": d.rel_err }),
        &["from", "to", "k", "formula", "integral", "rel_err"],
    )?;
    a.row([joined(from), joined(to), num(k), num(d.formula), num(d.integral), num(d.rel_err)]);
    Ok(a)
}

#[derive(Serialize)]
struct CurvatureSample {
    x: Vec<f64>,
    y: Vec<f64>,
    k_formula: f64,
    k_profile: f64,
    berwald_residual: f64,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(a.abs()))
}

fn curvature(desc: &MetricDescriptor, metric: &FinslerMetric, common: &Common) -> Out {
    let count = common.samples.unwrap_or(100);
    let mut rng = sampling::rng(common.seed);
    let n = metric.dim();
    let mut rows = Vec::with_capacity(count);
    for _ in 0..count {
        let x: Vec<f64> = metric.domain().sample(n, 0.8, &mut rng);
        let y: Vec<f64> = sampling::random_unit(n, &mut rng);
        let r = geometry::flag_curvature(metric, &x, &y)?;
        let berwald_residual = max_abs(&r.berwald_r1).max(max_abs(&r.berwald_r2));
        rows.push(CurvatureSample { x, y, k_formula: r.k_formula, k_profile: r.k_profile, berwald_residual });
    }
    let ks: Vec<f64> = rows.iter().map(|r| r.k_formula).collect();
    let expected = desc.curvature();
    let max_deviation = expected.map(|e| ks.iter().fold(0.0f64, |m, k| m.max((k - e).abs())));
    let summary = json!({
        "samples": count,
        "expected": expected,
        "k_min": ks.iter().cloned().fold(f64::INFINITY, f64::min),
        "k_max": ks.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        "max_abs_k": max_abs(&ks),
        "max_deviation": max_deviation,
        "max_profile_gap": rows.iter().fold(0.0f64, |m, r| m.max((r.k_formula - r.k_profile).abs())),
        "max_berwald_residual": rows.iter().fold(0.0f64, |m, r| m.max(r.berwald_residual)),
        "rows": rows,
    });
    let mut a = Artifact::new(&summary, &["x", "y", "k_formula", "k_profile", "berwald_residual"])?;
    for r in &rows {
        a.row([joined(&r.x), joined(&r.y), num(r.k_formula), num(r.k_profile), num(r.berwald_residual)]);
    }
    Ok(a)
}

fn scan(metric: &FinslerMetric, res: usize, dirs: usize, bounds: Option<&[f64]>) -> Out {
    let mut opts = tensor::ScanOptions::new(res, dirs);
    if let Some(b) = bounds {
        let b: [f64; 4] = b.try_into().map_err(|_| CliError::Parse("--bounds needs four numbers".into()))?;
        opts.bounds = Some(b);
    }
    let start = Instant::now();
    let s = tensor::scan_domain_2d(metric, &opts)?;
    let seconds = start.elapsed().as_secs_f64();
    let summary = s.summary();
    let doc = json!({
        "components": summary.components,
        "topology": summary.topology,
        "resolution": summary.resolution,
        "bounds": summary.bounds,
        "strong_cells": s.strong_count(),
        "threads": rayon::current_num_threads(),
        "seconds": seconds,
        "boundary_polylines": summary.boundary_polylines,
    });
    let mut a = Artifact::new(&doc, &["x1", "x2", "label", "min_eig", "det"])?;
    for (x1, x2, label, min_eig, det) in s.rows() {
        a.row([num(x1), num(x2), format!("{label:?}").to_lowercase(), num(min_eig), num(det)]);
    }
    Ok(a)
}

fn initial_data(desc: &MetricDescriptor) -> Result<(Family, projflat::HomogeneousFn, projflat::HomogeneousFn), CliError> {
    match desc.initial_data() {
        Some((psi, phi, 0)) => Ok((Family::K0, psi, phi)),
        Some((psi, phi, _)) => Ok((Family::Km1, psi, phi)),
        None => Err(CliError::Lib(Error::BadInput("command needs a k0 or km1 descriptor".into()))),
    }
}

fn classify_cmd(desc: &MetricDescriptor) -> Out {
    let (family, psi, phi) = initial_data(desc)?;
    let c = classify(&psi, &phi, family.curvature())?;
    let doc = json!({
        "curvature_sign": c.curvature_sign,
        "case_label": c.case_label,
        "case_index": c.case_label.index(),
        "backward_complete": c.backward_complete,
        "reversibility_finite": c.reversibility_finite,
    });
    let mut a = Artifact::new(
        &doc,
        &["curvature_sign", "case_label", "case_index", "backward_complete", "reversibility_finite"],
    )?;
    a.row([
        c.curvature_sign.to_string(),
        doc["case_label"].as_str().unwrap_or_default().to_string(),
        c.case_label.index().to_string(),
        c.backward_complete.to_string(),
        c.reversibility_finite.to_string(),
    ]);
    Ok(a)
}

fn sphere_check(desc: &MetricDescriptor, metric: &FinslerMetric, common: &Common) -> Out {
    let samples = common.samples.unwrap_or(200);
    let n = metric.dim();
    let antipodal = sphere::antipodal_deviation(metric, samples, common.seed)?;
    let mut y = vec![0.0; n];
    y[0] = 1.0;
    let origin = vec![0.0; n];
    let glued = sphere::glued_great_circle_length(metric, &origin, &y)?;
    let line = geometry::line_length(metric, &origin, &y, 1e8)?;
    let equator = match desc {
        MetricDescriptor::Closed { kind: ClosedKind::Bryant { alpha }, n: 2 } => {
            let r = sphere::equator_extension_check(*alpha, samples)?;
            Some(json!({ "alpha": r.alpha, "max_deviation": r.max_deviation, "min_eig": r.min_eig, "min_direction": r.min_direction }))
        }
        _ => None,
    };
    let doc = json!({
        "antipodal_deviation": antipodal,
        "glued_great_circle_length": glued,
        "line_length": line,
        "equator": equator,
    });
    let mut a = Artifact::new(&doc, &["quantity", "value"])?;
    a.row(["antipodal_deviation".into(), num(antipodal)]);
    a.row(["glued_great_circle_length".into(), num(glued)]);
    a.row(["line_length".into(), num(line)]);
    if let Some(e) = &equator {
        a.row(["equator_max_deviation".into(), num(e["max_deviation"].as_f64().unwrap_or(f64::NAN))]);
        a.row(["equator_min_eig".into(), num(e["min_eig"].as_f64().unwrap_or(f64::NAN))]);
    }
    Ok(a)
}

fn growth(desc: &MetricDescriptor, dir: &[f64], fractions: &[f64]) -> Out {
    let (family, psi, phi) = initial_data(desc)?;
    let rows = analysis::growth_check(family, &psi, &phi, dir, fractions)?;
    let mut a = Artifact::new(&json!({ "family": family, "direction": dir, "rows": rows }), &["fraction", "r", "fstar", "ratio"])?;
    for r in &rows {
        a.row([num(r.fraction), num(r.r), num(r.fstar), num(r.ratio)]);
    }
    Ok(a)
}

fn geodesic(metric: &FinslerMetric, from: &[f64], dir: &[f64], t_end: f64) -> Out {
    let g = geometry::geodesic(metric, from, dir, t_end)?;
    let doc = json!({
        "direction": g.direction,
        "profile": g.profile,
        "fit_residual": g.fit_residual,
        "samples": g.samples,
    });
    let mut a = Artifact::new(&doc, &["t", "f", "df", "point"])?;
    for ((t, f, df), p) in g.samples.iter().zip(&g.points) {
        a.row([num(*t), num(*f), num(*df), joined(p)]);
    }
    Ok(a)
}
