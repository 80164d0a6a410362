use std::path::{Path, PathBuf};

use lamefem::decoupled::MaxwellProblem;
use lamefem::fem::{field_curl, field_div, norms, VtkData};
use lamefem::lame::{boundary_residuals, solve_lame, solve_via_fredholm, traction, Solution};
use lamefem::mesh::extract_boundary;
use lamefem::surface::classify_boundary;
use lamefem::verify::{
    convergence_study, reports_to_csv, resonance_scan, verify_decoupling_with, DecouplingOptions, ManufacturedCase,
};
use lamefem::{generate_box_mesh, LameProblem, Mesh};
use serde_json::{json, Map, Value};

use crate::config::{Length, PerAxis, RunConfig, ScanSpec};
use crate::{AnalyzeArgs, CliError, Command, ConvergeArgs, MeshBoxArgs, ScanArgs, SolveArgs, VerifyArgs};

/// Sample count of the manufactured-solution audits.
pub const AUDIT_SAMPLES: usize = 100;
/// Largest accepted audit residual.
pub const AUDIT_TOL: f64 = 1e-8;

/// JSON record of one invocation, written whether the run succeeds or not.
struct Summary {
    command: &'static str,
    path: Option<PathBuf>,
    explicit_path: bool,
    fields: Map<String, Value>,
    outputs: Vec<String>,
}

impl Summary {
    fn new(command: &'static str, explicit: Option<&PathBuf>, fallback: &Path) -> Self {
        Summary {
            command,
            path: Some(explicit.cloned().unwrap_or_else(|| with_summary_extension(fallback))),
            explicit_path: explicit.is_some(),
            fields: Map::new(),
            outputs: Vec::new(),
        }
    }

    /// Moves the default summary next to the main output once it is known.
    fn follow(&mut self, main_output: &Path) {
        if !self.explicit_path {
            self.path = Some(with_summary_extension(main_output));
        }
    }

    fn set(&mut self, key: &str, value: Value) {
        self.fields.insert(key.to_string(), value);
    }

    fn write_output(&mut self, path: &Path, contents: &str) -> Result<(), CliError> {
        std::fs::write(path, contents).map_err(|source| CliError::Output {
            path: path.to_path_buf(),
            source,
        })?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    fn finish(mut self, outcome: &Result<(), CliError>) -> Result<(), CliError> {
        let (status, code) = match outcome {
            Ok(()) => ("ok", 0),
            Err(e) => ("error", e.exit_code()),
        };
        self.set("command", json!(self.command));
        self.set("status", json!(status));
        self.set("exit_code", json!(code));
        self.set("outputs", json!(self.outputs));
        if let Err(e) = outcome {
            self.set("error", json!({ "kind": e.kind(), "message": e.to_string() }));
        }
        let Some(path) = self.path.take() else { return Ok(()) };
        let text = serde_json::to_string_pretty(&Value::Object(self.fields)).expect("summary serializes");
        std::fs::write(&path, text + "\n").map_err(|source| CliError::Output { path, source })
    }
}

fn with_summary_extension(path: &Path) -> PathBuf {
    path.with_extension("summary.json")
}

pub fn run(command: &Command) -> Result<(), CliError> {
    let (mut summary, outcome) = match command {
        Command::MeshBox(a) => {
            let mut s = Summary::new("mesh-box", a.summary.summary.as_ref(), &a.out);
            let r = mesh_box(a, &mut s);
            (s, r)
        }
        Command::AnalyzeBoundary(a) => {
            let mut s = Summary::new("analyze-boundary", a.summary.summary.as_ref(), &a.report);
            let r = analyze_boundary(a, &mut s);
            (s, r)
        }
        Command::Solve(a) => {
            let mut s = Summary::new("solve", a.summary.summary.as_ref(), &a.config);
            let r = solve(a, &mut s);
            (s, r)
        }
        Command::VerifyDecoupling(a) => {
            let mut s = Summary::new("verify-decoupling", a.summary.summary.as_ref(), &a.config);
            let r = verify(a, &mut s);
            (s, r)
        }
        Command::Converge(a) => {
            let mut s = Summary::new("converge", a.summary.summary.as_ref(), &a.config);
            let r = converge(a, &mut s);
            (s, r)
        }
        Command::ResonanceScan(a) => {
            let mut s = Summary::new("resonance-scan", a.summary.summary.as_ref(), &a.config);
            let r = scan(a, &mut s);
            (s, r)
        }
    };
    if let Some(p) = &summary.path {
        if summary.outputs.iter().any(|o| Path::new(o) == p) {
            summary.path = None;
        }
    }
    let written = summary.finish(&outcome);
    outcome.and(written)
}

fn parse_per_axis<T: Clone>(text: &str, parse: impl Fn(&str) -> Result<T, CliError>) -> Result<PerAxis<T>, CliError> {
    let parts = text.split(',').map(parse).collect::<Result<Vec<_>, _>>()?;
    match parts.len() {
        1 => Ok(PerAxis::All(parts[0].clone())),
        3 => Ok(PerAxis::Each([parts[0].clone(), parts[1].clone(), parts[2].clone()])),
        k => Err(CliError::Validation(format!("expected 1 or 3 comma-separated values, got {k}"))),
    }
}

fn mesh_box(a: &MeshBoxArgs, s: &mut Summary) -> Result<(), CliError> {
    let n = parse_per_axis(&a.n, |t| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| CliError::Validation(format!("cannot parse subdivision count '{t}'")))
    })?;
    let lengths = parse_per_axis(&a.lengths, |t| t.parse::<Length>())?;
    let lengths_text: Vec<String> = lengths.expand().iter().map(Length::to_string).collect();
    s.set("inputs", json!({ "n": n.expand(), "lengths": lengths_text }));
    let mesh = generate_box_mesh(n.expand(), lengths.expand().map(|l| l.value))?;
    s.write_output(&a.out, &mesh.to_json_string())?;
    s.set("results", mesh_stats(&mesh));
    Ok(())
}

fn mesh_stats(mesh: &Mesh) -> Value {
    json!({
        "vertices": mesh.n_vertices(),
        "tets": mesh.n_tets(),
        "boundary_facets": mesh.boundary_facets().len(),
        "volume": mesh.volume(),
    })
}

fn load_mesh(path: &Path) -> Result<Mesh, CliError> {
    Mesh::load(path).map_err(|e| match e {
        lamefem::Error::Io(source) => CliError::Input {
            path: path.to_path_buf(),
            source,
        },
        other => other.into(),
    })
}

fn analyze_boundary(a: &AnalyzeArgs, s: &mut Summary) -> Result<(), CliError> {
    s.set(
        "inputs",
        json!({ "mesh": a.mesh.display().to_string(), "tol_flat": a.tol_flat, "tol_s": a.tol_s }),
    );
    let mesh = load_mesh(&a.mesh)?;
    let surface = extract_boundary(&mesh)?;
    let report = classify_boundary(&surface, a.tol_flat, a.tol_s)?;
    s.write_output(&a.report, &report.to_csv(surface.points()))?;
    let patches: Vec<Value> = report
        .patches
        .iter()
        .map(|p| {
            json!({
                "label": p.label,
                "facets": p.facets.len(),
                "flat": p.flat,
                "normal_spread": p.normal_spread,
                "max_abs_s": p.max_abs_s,
                "included_vertices": p.interior_vertices.len(),
            })
        })
        .collect();
    s.set(
        "results",
        json!({
            "mesh": mesh_stats(&mesh),
            "smooth_vertices": report.s.smooth_values().count(),
            "smooth_mean_s": report.s.smooth_mean(),
            "smooth_max_abs_s": report.s.smooth_max_abs(),
            "patches": patches,
            "third_kind_admissible": report.third_kind_admissible,
            "fourth_kind_admissible": report.fourth_kind_admissible,
        }),
    );
    Ok(())
}

/// Loads the config and records its echo and seed.
fn load_config(path: &Path, s: &mut Summary) -> Result<RunConfig, CliError> {
    let cfg = RunConfig::load(path)?;
    s.set("config", serde_json::to_value(&cfg).expect("config serializes"));
    s.set("seed", json!(cfg.seed));
    if let (Some(p), false) = (&cfg.output.summary, s.explicit_path) {
        s.path = Some(p.clone());
        s.explicit_path = true;
    }
    Ok(cfg)
}

/// Residual and boundary audits of a manufactured case; refuses a case whose
/// data are inconsistent before any solver runs.
fn audit(case: &ManufacturedCase, seed: u64, s: &mut Summary) -> Result<(), CliError> {
    let residual = case.residual_audit(AUDIT_SAMPLES, seed);
    let boundary = case.boundary_audit(AUDIT_SAMPLES, seed);
    let pass = residual <= AUDIT_TOL && boundary <= AUDIT_TOL;
    s.set(
        "audits",
        json!({
            "case": case.name(),
            "mode": case.mode,
            "samples": AUDIT_SAMPLES,
            "seed": seed,
            "tolerance": AUDIT_TOL,
            "residual": residual,
            "boundary": boundary,
            "pass": pass,
        }),
    );
    if !pass {
        return Err(CliError::Validation(format!(
            "manufactured case '{}' fails its audit (residual {residual:e}, boundary {boundary:e})",
            case.name()
        )));
    }
    Ok(())
}

fn require_case(cfg: &RunConfig, command: &str) -> Result<ManufacturedCase, CliError> {
    cfg.case()
        .ok_or_else(|| CliError::Validation(format!("{command} needs a manufactured 'source' case")))
}

fn solve(a: &SolveArgs, s: &mut Summary) -> Result<(), CliError> {
    let cfg = load_config(&a.config, s)?;
    let vtk = a.vtk.clone().or_else(|| cfg.output.vtk.clone());
    if let Some(v) = &vtk {
        s.follow(v);
    }
    let case = cfg.case();
    if let Some(c) = &case {
        audit(c, cfg.seed, s)?;
    }
    let mesh = match (&cfg.box_spec, &cfg.mesh) {
        (None, Some(p)) => std::sync::Arc::new(load_mesh(p)?),
        _ => cfg.build_mesh()?,
    };
    let problem = match &case {
        Some(c) => c.lame_problem(mesh.clone(), cfg.order)?,
        None => LameProblem::new(mesh.clone(), cfg.material, cfg.bc(), cfg.source_function(), cfg.order)?,
    }
    .with_settings(cfg.solver);
    let sol = if a.fredholm {
        solve_via_fredholm(&problem)?
    } else {
        solve_lame(&problem)?
    };
    let u = &sol.field;
    let exact = case.as_ref().map(|c| &c.u);
    let n = norms(u, exact)?;
    let residuals = boundary_residuals(u, cfg.bc())?;
    let tr = traction(u, &cfg.material)?;
    let mut results = json!({
        "mesh": mesh_stats(&mesh),
        "method": if a.fredholm { "fredholm_gmres" } else { "minres" },
        "dofs": u.dofmap().n_free(),
        "solver": solver_json(&sol),
        "norms": { "l2": n.l2, "curl_l2": n.curl_l2, "div_l2": n.div_l2, "x": n.x_norm },
        "boundary": {
            "kind": residuals.kind,
            (residuals.essential_name()): residuals.essential,
            (residuals.natural_name()): residuals.natural,
            "u_boundary_l2": residuals.boundary_l2,
            "essential_rel": relative(residuals.essential, residuals.boundary_l2),
        },
        "traction": { "normal_l2": tr.normal_l2, "tangential_l2": tr.tangential_l2 },
    });
    if let Some(e) = n.error {
        results["error"] = json!({
            "l2": e.l2,
            "x": e.x,
            "l2_rel": e.relative_l2().ok(),
            "x_rel": e.relative_x().ok(),
        });
    }
    s.set("results", results);
    if let Some(path) = vtk {
        s.write_output(&path, &vtk_text(&sol, case.as_ref())?)?;
    }
    Ok(())
}

fn relative(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value / scale
    } else {
        value
    }
}

fn solver_json(sol: &Solution) -> Value {
    json!({
        "iterations": sol.stats.iterations,
        "residual": sol.stats.residual,
        "guard": sol.guard.map(|g| json!({
            "shift": g.shift,
            "distance_bound": g.distance_bound,
            "nearest_estimate": g.nearest_estimate,
        })),
    })
}

/// `u_h`, P1 projections of `v_p = −∇·u_h` and `E_s = ∇∧u_h`, and the exact
/// fields when known.
fn vtk_text(sol: &Solution, case: Option<&ManufacturedCase>) -> Result<String, CliError> {
    let u = &sol.field;
    let mesh = u.dofmap().mesh().clone();
    let v_p: Vec<f64> = field_div(u)?.vertex_values().iter().map(|v| -v.x).collect();
    let mut fields = vec![
        ("u_h", VtkData::Vectors(u.vertex_values())),
        ("v_p_h", VtkData::Scalars(v_p)),
        ("E_s_h", VtkData::Vectors(field_curl(u)?.vertex_values())),
    ];
    if let Some(c) = case {
        let xs = mesh.vertices();
        fields.push(("u_exact", VtkData::Vectors(xs.iter().map(|x| c.u.value(x)).collect())));
        fields.push(("v_p_exact", VtkData::Scalars(xs.iter().map(|x| c.v_p.value(x)).collect())));
        fields.push(("E_s_exact", VtkData::Vectors(xs.iter().map(|x| c.e_s.value(x)).collect())));
    }
    Ok(lamefem::fem::vtk_string(&mesh, &fields)?)
}

fn csv_target(arg: &Option<PathBuf>, cfg: &RunConfig, command: &str) -> Result<PathBuf, CliError> {
    arg.clone()
        .or_else(|| cfg.output.csv.clone())
        .ok_or_else(|| CliError::Validation(format!("{command} needs --out or 'output.csv'")))
}

fn verify(a: &VerifyArgs, s: &mut Summary) -> Result<(), CliError> {
    let cfg = load_config(&a.config, s)?;
    let out = csv_target(&a.out, &cfg, "verify-decoupling")?;
    s.follow(&out);
    let case = require_case(&cfg, "verify-decoupling")?;
    let n = cfg.cube_level()?;
    audit(&case, cfg.seed, s)?;
    let opts = DecouplingOptions {
        penalty: cfg.penalty,
        settings: cfg.solver,
    };
    let report = verify_decoupling_with(&case, n, cfg.order, &opts)?;
    s.write_output(&out, &reports_to_csv(std::slice::from_ref(&report)))?;
    let metrics: Map<String, Value> = report.metrics().into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    s.set(
        "results",
        json!({
            "case": report.case,
            "bc": report.bc,
            "order": report.order,
            "n": n,
            "penalty": cfg.penalty.unwrap_or_else(|| MaxwellProblem::default_penalty(&cfg.material)),
            "metrics": metrics,
        }),
    );
    Ok(())
}

fn converge(a: &ConvergeArgs, s: &mut Summary) -> Result<(), CliError> {
    let cfg = load_config(&a.config, s)?;
    let out = csv_target(&a.out, &cfg, "converge")?;
    s.follow(&out);
    let case = require_case(&cfg, "converge")?;
    cfg.cube_level()?;
    let levels = a
        .levels
        .clone()
        .or_else(|| cfg.levels.clone())
        .ok_or_else(|| CliError::Validation("converge needs --levels or 'levels'".into()))?;
    audit(&case, cfg.seed, s)?;
    let study = convergence_study(&case, &levels, cfg.order, &cfg.solver)?;
    s.write_output(&out, &study.to_csv())?;
    let (l2_rate, x_rate) = study.finest_rates().unzip();
    s.set(
        "results",
        json!({
            "levels": levels,
            "study": study,
            "finest_l2_rate": l2_rate,
            "finest_x_rate": x_rate,
        }),
    );
    Ok(())
}

fn scan(a: &ScanArgs, s: &mut Summary) -> Result<(), CliError> {
    let cfg = load_config(&a.config, s)?;
    let out = csv_target(&a.out, &cfg, "resonance-scan")?;
    s.follow(&out);
    let n = cfg.cube_level()?;
    let spec = match (&a.sigmas, a.from, a.to, a.steps) {
        (Some(list), ..) => ScanSpec::List { sigmas: list.clone() },
        (None, Some(from), Some(to), Some(steps)) => ScanSpec::Grid { from, to, steps },
        _ => cfg
            .scan
            .clone()
            .ok_or_else(|| CliError::Validation("resonance-scan needs --sigmas, --from/--to/--steps or 'scan'".into()))?,
    };
    let sigmas = spec.sigmas()?;
    let bc = cfg.bc();
    let result = resonance_scan(bc, cfg.material.lambda, cfg.material.mu, &sigmas, n, cfg.order)?;
    s.write_output(&out, &result.to_csv())?;
    let clusters: Vec<Value> = result
        .clusters
        .iter()
        .map(|&v| {
            let nearest = result.nearest_analytic(v);
            json!({
                "value": v,
                "analytic": nearest.map(|e| e.value),
                "family": nearest.map(|e| e.family.as_str()),
                "rel_diff": nearest.map(|e| (v - e.value).abs() / e.value),
            })
        })
        .collect();
    s.set(
        "results",
        json!({
            "bc": bc,
            "n": n,
            "order": cfg.order,
            "sigmas": sigmas,
            "points": result.points,
            "clusters": clusters,
        }),
    );
    Ok(())
}
