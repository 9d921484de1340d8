//! Subcommand implementations. Each writes its artifacts under the output
//! directory and returns a JSON record for standard output.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use mfelab::bol_symm::{
    bol_check, bol_metric, contour_segments, counterexample_metrics, counterexample_quadrature, symmetrize,
};
use mfelab::ensembles::{canonical_table, ensemble_grid, kind_verdict, legendre_check, EnsembleTable};
use mfelab::geometry::{triangulate, triangulate_graded, Mesh, ScalarField};
use mfelab::mfe_solver::{
    continue_branch, discrete_critical_mass, fit_blowup_rate, newton_solve, Branch, BranchOptions,
};
use mfelab::robin_dcrit::{classify, DCritReport};
use serde_json::{json, Value};

use crate::config::{DomainKind, RunConfig};
use crate::svg::{self, Panel};
use crate::CliError;

/// Radii of the counterexample annulus.
const COUNTEREXAMPLE_RADII: (f64, f64) = (1e-4, 1.0);

pub struct Output {
    pub record: Value,
    pub files: Vec<PathBuf>,
}

struct Writer<'a> {
    dir: &'a Path,
    hash: String,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self, CliError> {
        std::fs::create_dir_all(&cfg.output_dir)
            .map_err(|e| CliError::Invalid(format!("output directory {}: {e}", cfg.output_dir.display())))?;
        Ok(Writer { dir: &cfg.output_dir, hash: cfg.hash(), files: vec![] })
    }

    fn put(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let stamped = if name.ends_with(".csv") {
            format!("# config_hash={}\n{body}", self.hash)
        } else if name.ends_with(".svg") {
            format!("<!-- config_hash={} -->\n{body}", self.hash)
        } else {
            body.to_string()
        };
        std::fs::write(&path, stamped).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(path);
        Ok(())
    }

    fn record(&mut self, name: &str, mut record: Value) -> Result<Output, CliError> {
        record["config_hash"] = json!(self.hash);
        self.put(name, &(serde_json::to_string_pretty(&record).expect("record serializes") + "\n"))?;
        Ok(Output { record, files: std::mem::take(&mut self.files) })
    }
}

fn domain_id(cfg: &RunConfig) -> String {
    match cfg.domain {
        DomainKind::Disk => "disk".into(),
        DomainKind::Annulus => format!("annulus{:?}", cfg.hole.clone().unwrap_or_default()),
        DomainKind::Rectangle => format!("rectangle{:?}", cfg.size),
        DomainKind::Ellipse => format!("ellipse{:?}", cfg.size),
    }
}

fn uniform_mesh(cfg: &RunConfig) -> Result<Mesh, CliError> {
    Ok(triangulate(&cfg.domain_spec()?, cfg.target_h)?)
}

/// Boundary edges of the mesh.
fn boundary_segments(mesh: &Mesh) -> Vec<[[f64; 2]; 2]> {
    let mut count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for t in mesh.triangles() {
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            *count.entry((t[a].min(t[b]), t[a].max(t[b]))).or_default() += 1;
        }
    }
    let nodes = mesh.nodes();
    count.into_iter().filter(|e| e.1 == 1).map(|((i, j), _)| [nodes[i], nodes[j]]).collect()
}

fn ensemble_plot(table: &EnsembleTable) -> String {
    let f: Vec<(f64, f64)> = table.rows.iter().map(|r| (r.beta, r.big_f)).collect();
    let s: Vec<(f64, f64)> = table.rows.iter().map(|r| (r.energy, r.entropy)).collect();
    svg::panels(&[
        Panel { title: "Free energy", x_label: "β", y_label: "F(β)", series: vec![f] },
        Panel { title: "Entropy", x_label: "E", y_label: "S(E)", series: vec![s] },
    ])
}

/// Solves along the branch with the mesh refined towards the Robin
/// maximizer and `8π` replaced by the calibrated blow-up mass.
fn run_branch(cfg: &RunConfig, hints: &[f64]) -> Result<(Branch, DCritReport), CliError> {
    let spec = cfg.domain_spec()?;
    let weight = cfg.weight_spec()?;
    let dcrit = classify(&spec, &triangulate(&spec, cfg.target_h)?, &weight)?;
    let (mesh, critical_mass) = if cfg.graded {
        let g = cfg.grading(dcrit.q);
        (triangulate_graded(&spec, cfg.target_h, g)?, discrete_critical_mass(cfg.target_h, g)?)
    } else {
        (triangulate(&spec, cfg.target_h)?, 8.0 * PI)
    };
    let opts = BranchOptions { critical_mass, lambda_cap: cfg.lambda_cap, ..Default::default() };
    Ok((continue_branch(&mesh, &weight, hints, &opts)?, dcrit))
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut w = Writer::new(cfg)?;
    let report = classify(&cfg.domain_spec()?, &uniform_mesh(cfg)?, &cfg.weight_spec()?)?;
    let mut record = serde_json::to_value(&report).expect("report serializes");
    record["domain"] = json!(domain_id(cfg));
    w.record("classify.json", record)
}

pub fn cmd_branch(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut w = Writer::new(cfg)?;
    let (branch, dcrit) = run_branch(cfg, &cfg.rho_hints)?;
    let table = canonical_table(&branch, &domain_id(cfg))?;
    let verdict = kind_verdict(&table, &branch, &dcrit, &cfg.weight_spec()?);
    let slope = fit_blowup_rate(&branch).ok();

    w.put("branch.csv", &branch.to_csv())?;
    w.put("ensemble.csv", &table.to_csv())?;
    let rl: Vec<(f64, f64)> = branch.rho_lambda();
    let tail: Vec<(f64, f64)> =
        rl.iter().filter(|p| p.0 < branch.critical_mass).map(|p| (p.1, (branch.critical_mass - p.0).ln())).collect();
    w.put(
        "branch.svg",
        &svg::panels(&[
            Panel { title: "Branch", x_label: "ρ", y_label: "λ", series: vec![rl] },
            Panel { title: "Blow-up rate", x_label: "λ", y_label: "log(ρ* − ρ)", series: vec![tail] },
        ]),
    )?;
    w.put("ensemble.svg", &ensemble_plot(&table))?;
    let last = branch.last().expect("branch has points");
    let record = json!({
        "domain": domain_id(cfg),
        "termination": branch.termination,
        "critical_mass": branch.critical_mass,
        "points": branch.points.len(),
        "final_rho": last.rho,
        "final_lambda": last.lambda_blow,
        "min_eig1": branch.points.iter().map(|p| p.eig1_weighted).fold(f64::INFINITY, f64::min),
        "blowup_slope": slope.map(|s| s.0),
        "D_value": dcrit.d_value,
        "verdict": verdict,
        "critical_energy": table.critical_energy(),
    });
    w.record("branch.json", record)
}

pub fn cmd_ensemble(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut w = Writer::new(cfg)?;
    let grid = ensemble_grid(PI, 7.5 * PI, cfg.ensemble_rows)?;
    let hints: Vec<f64> = grid.iter().chain(&cfg.rho_hints).copied().collect();
    let (branch, _) = run_branch(cfg, &hints)?;
    let table = canonical_table(&branch, &domain_id(cfg))?.restrict(&grid, 1e-9 * PI);
    let report = legendre_check(&table)?;
    w.put("ensemble.csv", &table.to_csv())?;
    w.put("ensemble.svg", &ensemble_plot(&table))?;
    let record = json!({
        "domain": domain_id(cfg),
        "rows": table.rows.len(),
        "kind": table.kind,
        "legendre": report,
        "legendre_pass": report.passes(1e-3, 1e-2) && report.convex && report.decreasing,
        "critical_energy": table.critical_energy(),
    });
    w.record("ensemble.json", record)
}

pub fn cmd_bol(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut w = Writer::new(cfg)?;
    let mesh = uniform_mesh(cfg)?;
    let weight = cfg.weight_spec()?;
    let sol = newton_solve(&mesh, &weight, cfg.rho, &ScalarField::zeros(&mesh))?;
    let report = bol_check(&mesh, &weight, &sol, cfg.thresholds)?;
    let v = bol_metric(&mesh, &weight, &sol)?;
    w.put("bol.csv", &report.to_csv())?;
    let mut groups = vec![boundary_segments(&mesh)];
    for row in report.rows.iter().step_by(4) {
        let phi: Vec<f64> = v.values().iter().map(|x| x - row.t).collect();
        groups.push(contour_segments(&mesh, &phi));
    }
    w.put("contours.svg", &svg::segments("Level sets", &groups))?;
    let worst = report.rows.iter().map(|r| r.margin / r.tol).fold(f64::INFINITY, f64::min);
    let record = json!({
        "domain": domain_id(cfg),
        "rho": cfg.rho,
        "thresholds": report.rows.len(),
        "overall_pass": report.overall_pass,
        "strict_when_multiply_connected": report.strict_when_multiply_connected,
        "min_margin_over_tol": worst,
    });
    w.record("bol.json", record)
}

pub fn cmd_counterexample(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut w = Writer::new(cfg)?;
    let (r1, r2) = COUNTEREXAMPLE_RADII;
    let c = counterexample_metrics(cfg.alpha, 1.0, r1, r2)?;
    let (m, ell) = counterexample_quadrature(cfg.alpha, 1.0, r1, r2, 64)?;
    let mut record = serde_json::to_value(c).expect("counterexample serializes");
    record["quadrature_m"] = json!(m);
    record["quadrature_ell"] = json!(ell);
    record["violates_bol"] = json!(c.margin_8pi < 0.0);
    w.record("counterexample.json", record)
}

pub fn cmd_symmetrize(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut w = Writer::new(cfg)?;
    let mesh = uniform_mesh(cfg)?;
    let weight = cfg.weight_spec()?;
    let sol = newton_solve(&mesh, &weight, cfg.rho, &ScalarField::zeros(&mesh))?;
    let v = bol_metric(&mesh, &weight, &sol)?;
    let (profile, report) = symmetrize(&mesh, &sol.u, &v)?;
    let mut csv = String::from("r,phi_star\n");
    for (r, x) in profile.radii.iter().zip(&profile.values) {
        csv.push_str(&format!("{r:.12e},{x:.12e}\n"));
    }
    w.put("profile.csv", &csv)?;
    let mut record = serde_json::to_value(&report).expect("report serializes");
    record["domain"] = json!(domain_id(cfg));
    record["max_equimeasurability"] = json!(report.max_equimeasurability());
    record["energy_decreases"] = json!(report.dirichlet_star <= report.dirichlet);
    w.record("symmetrize.json", record)
}

pub fn cmd_mesh(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut w = Writer::new(cfg)?;
    let mesh = uniform_mesh(cfg)?;
    w.put("mesh.txt", &mesh.to_text())?;
    w.put("mesh.svg", &svg::segments("Mesh", &[boundary_segments(&mesh)]))?;
    let record = json!({
        "domain": domain_id(cfg),
        "nodes": mesh.node_count(),
        "triangles": mesh.triangles().len(),
        "area": mesh.total_area(),
        "max_edge": mesh.max_edge(),
        "min_angle_degrees": mesh.min_angle().to_degrees(),
    });
    w.record("mesh.json", record)
}
