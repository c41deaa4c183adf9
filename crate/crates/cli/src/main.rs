//! Command-line front end. Every run writes its files and a `manifest.json` into `--out`.

use clap::{Args, Parser, Subcommand, ValueEnum};
use hdelaunay::ambient::AmbientParams;
use hdelaunay::cylinders::{foliation_certificate, foliation_certificate_grid, profile};
use hdelaunay::io::{csv_string, num, obj_string, ply_string, MeshData, OutputSet, RunManifest};
use hdelaunay::moduli::{
    find_lambda_m, moduli_svg, records_csv, scan, ModuliRecord, ScanGrid,
};
use hdelaunay::plateau::{nodal_set, solve_plateau, stability_report, SolverConfig};
use hdelaunay::polygon::{build_polygon, validate};
use hdelaunay::sister::{boundary_fits, boundary_observables, conjugate_mesh, symmetry_extend, ExtensionMode};
use hdelaunay::verify::run_desk;
use hdelaunay::Error;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_FAILURE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "hdelaunay", version, about = "Horizontal Delaunay surfaces in M²(κ)×ℝ")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Curvature κ of the base surface.
    #[arg(long, global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    kappa: f64,
    /// Mean curvature H (comma-separated where a command takes several; H/√κ for moduli-scan).
    #[arg(long = "H", global = true, value_delimiter = ',', allow_negative_numbers = true)]
    h: Vec<f64>,
    /// Polygon parameter λ, comma-separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    lambda: Vec<f64>,
    /// Number of lobes, comma-separated.
    #[arg(long, global = true, value_delimiter = ',')]
    m: Vec<u32>,
    /// Grid cells per side of the Plateau disk.
    #[arg(long, global = true, default_value_t = 32)]
    resolution: usize,
    /// Mean-curvature tolerance of the Plateau solver.
    #[arg(long, global = true, allow_negative_numbers = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Obj,
    Ply,
    Svg,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Delaunay cylinder profiles and the foliation certificate.
    Cylinder {
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// The geodesic polygon and its diagnostics.
    Polygon,
    /// Solve the Plateau problem.
    Plateau {
        /// Also compute the Jacobi stability report.
        #[arg(long)]
        stability: bool,
    },
    /// Solve and conjugate; with --copies also extend by reflections.
    Conjugate {
        #[arg(long)]
        copies: Option<usize>,
    },
    /// Boundary observables ℓᵢ, μᵢ for each λ.
    Observables,
    /// Classify a grid of (H, λ) or (H, m) values.
    ModuliScan {
        #[arg(long, default_value_t = 1e-3)]
        width: f64,
        #[arg(long, default_value_t = 2.0)]
        x_max: f64,
        #[arg(long)]
        sequential: bool,
    },
    /// Bisect for the λ closing an m-lobed surface.
    FindLambda {
        #[arg(long, default_value_t = 1e-3)]
        width: f64,
    },
    /// Run the acceptance suite.
    Verify {
        #[arg(long, default_value = "desk")]
        level: String,
        /// Restrict to these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Cylinder { .. } => "cylinder",
            Command::Polygon => "polygon",
            Command::Plateau { .. } => "plateau",
            Command::Conjugate { .. } => "conjugate",
            Command::Observables => "observables",
            Command::ModuliScan { .. } => "moduli-scan",
            Command::FindLambda { .. } => "find-lambda",
            Command::Verify { .. } => "verify",
        }
    }
}

/// Outcome of a subcommand: summary for the manifest and exit status.
struct Outcome {
    summary: Value,
    code: u8,
}

impl Outcome {
    fn ok(summary: Value) -> Self {
        Self { summary, code: 0 }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        Error::Io(_) => EXIT_FAILURE,
        _ => EXIT_VALIDATION,
    }
}

fn single<T: Copy>(v: &[T], flag: &str) -> hdelaunay::Result<T> {
    match v {
        [x] => Ok(*x),
        [] => Err(Error::InvalidParameter(format!("--{flag} is required"))),
        _ => Err(Error::InvalidParameter(format!("--{flag} takes a single value here"))),
    }
}

fn params(c: &Common) -> hdelaunay::Result<AmbientParams> {
    AmbientParams::new(c.kappa, single(&c.h, "H")?)
}

fn solver_config(c: &Common) -> SolverConfig {
    SolverConfig { tolerance: c.tol, seed: c.seed, ..SolverConfig::with_resolution(c.resolution) }
}

fn wants(c: &Common, f: Format) -> bool {
    c.format.is_none() || c.format == Some(f)
}

fn check_format(c: &Common, allowed: &[Format]) -> hdelaunay::Result<()> {
    match c.format {
        Some(f) if !allowed.contains(&f) => Err(Error::InvalidParameter(format!(
            "--format {f:?} is not available for this command (use one of {allowed:?})"
        ))),
        _ => Ok(()),
    }
}

fn write_mesh(out: &mut OutputSet, c: &Common, stem: &str, mesh: &MeshData) -> hdelaunay::Result<()> {
    if c.format == Some(Format::Ply) {
        out.write(&format!("{stem}.ply"), ply_string(mesh).as_bytes())?;
    } else {
        out.write(&format!("{stem}.obj"), obj_string(mesh).as_bytes())?;
    }
    Ok(())
}

fn run_cylinder(c: &Common, out: &mut OutputSet, samples: usize) -> hdelaunay::Result<Outcome> {
    check_format(c, &[Format::Csv, Format::Json])?;
    let hs = if c.h.is_empty() { vec![0.6, 1.0, 2.0] } else { c.h.clone() };
    if samples < 2 {
        return Err(Error::InvalidParameter("--samples must be at least 2".into()));
    }
    let cert = if hs.len() >= 2 {
        foliation_certificate_grid(&hs, samples)?
    } else {
        foliation_certificate([0.55, 10.0], 20, samples)?
    };
    if wants(c, Format::Csv) {
        for (i, &h) in hs.iter().enumerate() {
            let mut rows = vec![];
            for k in 0..samples {
                let u = 2.0 * std::f64::consts::PI * k as f64 / (samples - 1) as f64;
                let (r, z) = profile(h, u)?;
                rows.push(vec![num(u), num(r), num(z)]);
            }
            out.write(&format!("profile_{i}.csv"), csv_string(&["u", "r", "h"], &rows)?.as_bytes())?;
        }
        let rows: Vec<Vec<String>> =
            cert.pairs.iter().map(|p| vec![num(p.h1), num(p.h2), num(p.min_separation)]).collect();
        out.write("certificate.csv", csv_string(&["H1", "H2", "min_separation"], &rows)?.as_bytes())?;
    }
    if wants(c, Format::Json) {
        out.write_json("certificate.json", &json!({ "H": hs, "report": cert }))?;
    }
    let code = if cert.passed { 0 } else { EXIT_VALIDATION };
    Ok(Outcome { summary: json!({ "leaves": cert.pairs.len() + 1, "passed": cert.passed }), code })
}

fn run_polygon(c: &Common, out: &mut OutputSet) -> hdelaunay::Result<Outcome> {
    check_format(c, &[Format::Csv, Format::Json])?;
    let p = params(c)?;
    let poly = build_polygon(&p, single(&c.lambda, "lambda")?, c.resolution + 1)?;
    let report = validate(&poly);
    if wants(c, Format::Csv) {
        let mut rows = vec![];
        for arc in &poly.arcs {
            for (s, q) in &arc.samples {
                rows.push(vec![arc.tag.name().to_string(), num(*s), num(q.x), num(q.y), num(q.z)]);
            }
        }
        out.write("polygon.csv", csv_string(&["arc_tag", "s", "x", "y", "z"], &rows)?.as_bytes())?;
    }
    if wants(c, Format::Json) {
        out.write_json("polygon.json", &json!({ "vertices": poly.vertices, "report": report }))?;
    }
    let code = if report.passed { 0 } else { EXIT_VALIDATION };
    Ok(Outcome { summary: json!({ "passed": report.passed, "closure": report.closure }), code })
}

fn run_plateau(c: &Common, out: &mut OutputSet, stability: bool) -> hdelaunay::Result<Outcome> {
    check_format(c, &[Format::Obj, Format::Ply, Format::Json])?;
    let p = params(c)?;
    let lambda = single(&c.lambda, "lambda")?;
    let config = solver_config(c);
    config.validate()?;
    let poly = build_polygon(&p, lambda, c.resolution + 1)?;
    let sol = solve_plateau(&poly, &config)?;
    let mesh = &sol.mesh;
    if c.format != Some(Format::Json) {
        write_mesh(out, c, "plateau", &MeshData::from_surface(mesh))?;
        let rows: Vec<Vec<String>> = (0..mesh.num_vertices())
            .map(|v| vec![v.to_string(), mesh.tags[v].label(), num(mesh.nu[v]), num(mesh.u[v])])
            .collect();
        out.write("plateau_vertices.csv", csv_string(&["vertex_id", "tag", "nu", "u"], &rows)?.as_bytes())?;
    }
    let stab = if stability { Some(stability_report(mesh)?) } else { None };
    let nodal: Vec<_> = nodal_set(mesh).into_iter().map(|n| n.ends).collect();
    let sidecar = json!({
        "solve": sol.report,
        "vertices": mesh.num_vertices(),
        "triangles": mesh.triangles.len(),
        "euler_characteristic": mesh.euler_characteristic(),
        "mean_edge_length": mesh.mean_edge_length(),
        "nu_corners": { "h0_h1": mesh.nu[mesh.corner(2)], "h0_h2": mesh.nu[mesh.corner(1)] },
        "nodal_curves": nodal,
        "stability": stab,
    });
    out.write_json("plateau.json", &sidecar)?;
    Ok(Outcome::ok(json!({ "residual": sol.report.residual, "iterations": sol.report.iterations })))
}

fn run_conjugate(c: &Common, out: &mut OutputSet, copies: Option<usize>) -> hdelaunay::Result<Outcome> {
    check_format(c, &[Format::Obj, Format::Ply, Format::Json])?;
    let p = params(c)?;
    let lambda = single(&c.lambda, "lambda")?;
    let config = solver_config(c);
    config.validate()?;
    let sol = solve_plateau(&build_polygon(&p, lambda, c.resolution + 1)?, &config)?;
    let conj = conjugate_mesh(&sol.mesh)?;
    let fits = boundary_fits(&conj);
    let ext = copies.map(|k| symmetry_extend(&conj, ExtensionMode::Full { copies: k })).transpose()?;
    if c.format != Some(Format::Json) {
        write_mesh(out, c, "conjugate", &MeshData::from_conjugate(&conj))?;
        if let Some(e) = &ext {
            write_mesh(out, c, "extension", &MeshData::from_extension(e, p.kappa))?;
        }
    }
    let sidecar = json!({
        "holonomy": conj.holonomy,
        "isometry_error": conj.isometry_error,
        "nu_mismatch": conj.nu_mismatch,
        "tangent_mismatch": conj.tangent_mismatch,
        "mean_edge_length": conj.mean_edge_length,
        "boundary_fits": fits,
        "extension": ext.as_ref().map(|e| json!({
            "copies": copies,
            "weld_mismatch": e.weld_mismatch,
            "seam_mismatch": e.seam_mismatch,
            "closed": e.closed,
            "euler_characteristic": e.euler_characteristic,
        })),
    });
    out.write_json("conjugate.json", &sidecar)?;
    Ok(Outcome::ok(json!({ "holonomy": conj.holonomy, "isometry_error": conj.isometry_error })))
}

fn run_observables(c: &Common, out: &mut OutputSet) -> hdelaunay::Result<Outcome> {
    check_format(c, &[Format::Csv, Format::Json])?;
    let p = params(c)?;
    if c.lambda.is_empty() {
        return Err(Error::InvalidParameter("--lambda is required".into()));
    }
    let config = solver_config(c);
    config.validate()?;
    let mut rows = vec![];
    let mut list = vec![];
    for &lambda in &c.lambda {
        let sol = solve_plateau(&build_polygon(&p, lambda, c.resolution + 1)?, &config)?;
        let o = boundary_observables(&sol.mesh)?;
        let holonomy = conjugate_mesh(&sol.mesh)?.holonomy;
        let quad_err = o.ell_err.iter().chain(&o.mu_err).fold(0.0f64, |a, b| a.max(*b));
        let mut row = vec![num(lambda)];
        row.extend(o.ell.iter().chain(&o.mu).map(|x| num(*x)));
        row.push(num(quad_err));
        row.push(num(holonomy));
        rows.push(row);
        list.push(json!({ "lambda": lambda, "observables": o, "holonomy": holonomy }));
    }
    if wants(c, Format::Csv) {
        let header = ["lambda", "ell0", "ell1", "ell2", "mu0", "mu1", "mu2", "quadrature_error", "holonomy"];
        out.write("observables.csv", csv_string(&header, &rows)?.as_bytes())?;
    }
    if wants(c, Format::Json) {
        out.write_json("observables.json", &list)?;
    }
    Ok(Outcome::ok(json!({ "count": list.len() })))
}

fn run_scan(c: &Common, out: &mut OutputSet, width: f64, x_max: f64, sequential: bool) -> hdelaunay::Result<Outcome> {
    check_format(c, &[Format::Csv, Format::Svg, Format::Json])?;
    if c.h.is_empty() {
        return Err(Error::InvalidParameter("--H is required".into()));
    }
    let grid = match (c.lambda.is_empty(), c.m.is_empty()) {
        (false, true) => ScanGrid::Lambda { kappa: c.kappa, h_over_sqrt_kappa: c.h.clone(), lambdas: c.lambda.clone() },
        (true, false) => ScanGrid::Lobes { kappa: c.kappa, h_over_sqrt_kappa: c.h.clone(), ms: c.m.clone() },
        _ => return Err(Error::InvalidParameter("give exactly one of --lambda or --m".into())),
    };
    let config = solver_config(c);
    config.validate()?;
    let result = scan(&grid, &config, width, !sequential)?;
    let records: Vec<ModuliRecord> = result.records().cloned().collect();
    if wants(c, Format::Csv) {
        out.write("moduli.csv", records_csv(&records)?.as_bytes())?;
    }
    if wants(c, Format::Json) {
        out.write_json("moduli.json", &result)?;
    }
    if wants(c, Format::Svg) {
        let m_max = c.m.iter().copied().max().unwrap_or(4).max(2);
        out.write("moduli.svg", moduli_svg(c.kappa, m_max, x_max, &records)?.as_bytes())?;
    }
    let failures = result.cells.len() - records.len();
    Ok(Outcome::ok(json!({ "cells": result.cells.len(), "records": records.len(), "without_record": failures })))
}

fn run_find_lambda(c: &Common, out: &mut OutputSet, width: f64) -> hdelaunay::Result<Outcome> {
    check_format(c, &[Format::Json])?;
    let p = params(c)?;
    let ms = if c.m.is_empty() { vec![2] } else { c.m.clone() };
    let config = solver_config(c);
    config.validate()?;
    let mut roots = vec![];
    let mut first_err = None;
    for &m in &ms {
        match find_lambda_m(&p, m, &config, width) {
            Ok(r) => roots.push(json!(r)),
            Err(e) => {
                eprintln!("m = {m}: {e}");
                roots.push(json!({ "m": m, "error": e.to_string() }));
                first_err.get_or_insert(e);
            }
        }
    }
    out.write_json("find_lambda.json", &json!({ "kappa": p.kappa, "H": p.h, "roots": roots }))?;
    let code = first_err.as_ref().map_or(0, exit_code);
    Ok(Outcome { summary: json!({ "roots": roots }), code })
}

fn run_verify(c: &Common, out: &mut OutputSet, level: &str, only: &[u8]) -> hdelaunay::Result<Outcome> {
    check_format(c, &[Format::Json])?;
    if level != "desk" {
        return Err(Error::InvalidParameter(format!("unknown verification level {level:?} (available: desk)")));
    }
    let outcomes = run_desk(only, |o| println!("{o}"));
    out.write_json("verify.json", &outcomes)?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    Ok(Outcome {
        summary: json!({ "passed": outcomes.len() - failed, "failed": failed }),
        code: if failed == 0 { 0 } else { EXIT_FAILURE },
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let c = &cli.common;
    let mut out = match OutputSet::create(&c.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: cannot create {}: {e}", c.out.display());
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    let params_json = json!({ "kappa": c.kappa, "H": c.h, "lambda": c.lambda, "m": c.m });
    let config_json = json!({
        "resolution": c.resolution,
        "tol": c.tol,
        "format": c.format.map(|f| format!("{f:?}").to_lowercase()),
        "subcommand": format!("{:?}", cli.command),
    });
    let manifest = match RunManifest::new(cli.command.name(), params_json, config_json, c.seed) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    let result = match &cli.command {
        Command::Cylinder { samples } => run_cylinder(c, &mut out, *samples),
        Command::Polygon => run_polygon(c, &mut out),
        Command::Plateau { stability } => run_plateau(c, &mut out, *stability),
        Command::Conjugate { copies } => run_conjugate(c, &mut out, *copies),
        Command::Observables => run_observables(c, &mut out),
        Command::ModuliScan { width, x_max, sequential } => run_scan(c, &mut out, *width, *x_max, *sequential),
        Command::FindLambda { width } => run_find_lambda(c, &mut out, *width),
        Command::Verify { level, only } => run_verify(c, &mut out, level, only),
    };
    let outcome = result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        Outcome { summary: json!({ "error": e.to_string() }), code: exit_code(&e) }
    });
    if let Err(e) = manifest.finish(&mut out, outcome.code as i32, outcome.summary) {
        eprintln!("error: writing manifest: {e}");
        return ExitCode::from(EXIT_FAILURE);
    }
    ExitCode::from(outcome.code)
}
