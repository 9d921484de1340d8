//! End-to-end acceptance suite. Prints one line per criterion and fails
//! if any criterion fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use anyhow::{anyhow, ensure, Context, Result};
use mfelab::bol_symm::{
    bol_check, bol_check_field, bol_metric, bubble_eigen, bubble_mass_quadrature, counterexample_metrics,
    counterexample_quadrature, symmetrize, z_residual, BUBBLE_ZERO,
};
use mfelab::geometry::{triangulate, BoundaryCurve, DomainSpec, Mesh, ScalarField};
use mfelab::laplace::{green_regular, robin_field, solve_dirichlet};
use mfelab::mfe_solver::{fit_blowup_tail, newton_solve, test_function_energy, DiskBubble};
use mfelab::robin_dcrit::{compute_d, find_max_point, Kind, WeightSpec};
use mfelab_cli::commands::{cmd_branch, cmd_ensemble};
use mfelab_cli::config::{DomainKind, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const ONE: WeightSpec = WeightSpec::ConstantOne;

struct Suite {
    results: Vec<(usize, bool)>,
}

impl Suite {
    fn run(&mut self, n: usize, name: &str, f: impl FnOnce() -> Result<String>) {
        let t0 = Instant::now();
        let (ok, detail) = match f() {
            Ok(d) => (true, d),
            Err(e) => (false, format!("{e:#}")),
        };
        println!(
            "criterion {n:>2} {} {name}: {detail} ({:.1} s)",
            if ok { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64()
        );
        self.results.push((n, ok));
    }
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn config(domain: DomainKind, hole: Option<[f64; 3]>, out: &str) -> RunConfig {
    RunConfig { domain, hole: hole.map(|h| h.to_vec()), output_dir: scratch(out), ..Default::default() }
}

fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn f64_at(v: &Value, key: &str) -> Result<f64> {
    v[key].as_f64().ok_or_else(|| anyhow!("record lacks {key}"))
}

/// `(ρ, λ)` rows of a branch CSV written by the `branch` command.
fn read_branch(dir: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(dir.join("branch.csv"))?;
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let mut it = l.split(',').map(|x| x.parse::<f64>());
            Ok((it.next().context("rho")??, it.next().context("lambda")??))
        })
        .collect()
}

fn robin_oracle() -> Result<String> {
    let t0 = Instant::now();
    let mesh = triangulate(&DomainSpec::unit_disk(), 0.02)?;
    let pts: Vec<[f64; 2]> = (0..20)
        .map(|k| {
            let (r, th) = (0.85 * k as f64 / 19.0, 2.399963 * k as f64);
            [r * th.cos(), r * th.sin()]
        })
        .collect();
    let err = robin_field(&mesh, &pts)?
        .iter()
        .map(|(p, g)| (g - (1.0 - p[0] * p[0] - p[1] * p[1]).ln() / (2.0 * PI)).abs())
        .fold(0.0, f64::max);
    let secs = t0.elapsed().as_secs_f64();
    ensure!(err <= 1e-3, "max error {err:.3e}");
    ensure!(secs <= 60.0, "took {secs:.1} s");
    Ok(format!("max error {err:.2e} in {secs:.1} s"))
}

fn d_criterion() -> Result<String> {
    let eps: Vec<f64> = (0..9).map(|k| 0.02 + 0.01 * k as f64).collect();
    let spec = DomainSpec::unit_disk();
    let mesh = triangulate(&spec, 0.02)?;
    let robin = green_regular(&mesh, [0.0, 0.0])?;
    let d = compute_d(&spec, &mesh, &ONE, [0.0, 0.0], &robin, 0.25)?;
    ensure!((d + PI).abs() <= 0.02 * PI, "disk D = {d}");
    let est = test_function_energy(&spec, &mesh, &robin, &ONE, &eps)?.d_estimate;
    ensure!((est + PI).abs() <= 0.05 * PI, "disk D_estimate = {est}");

    let spec = DomainSpec::new(BoundaryCurve::rectangle(4.0, 0.5), vec![])?;
    let mesh = triangulate(&spec, 0.02)?;
    let q = find_max_point(&mesh, &ONE)?.q;
    let robin = green_regular(&mesh, q)?;
    let rd = compute_d(&spec, &mesh, &ONE, q, &robin, 0.05)?;
    let rest = test_function_energy(&spec, &mesh, &robin, &ONE, &eps)?.d_estimate;
    ensure!((rd - rest).abs() <= 0.05 * rd.abs(), "rectangle D = {rd}, D_estimate = {rest}");
    Ok(format!("disk D = {d:.4}, D_est = {est:.4}; rectangle D = {rd:.2}, D_est = {rest:.2}"))
}

fn closed_form_branch() -> Result<String> {
    let mesh = triangulate(&DomainSpec::unit_disk(), 0.02)?;
    let mut worst = 0.0f64;
    for k in [2.0, 4.0, 6.0] {
        let sol = newton_solve(&mesh, &ONE, k * PI, &ScalarField::zeros(&mesh))?;
        let exact = DiskBubble::at_rho(k * PI)?.field(&mesh);
        worst = worst.max(max_diff(&sol.u, &exact));
    }
    ensure!(worst <= 1e-2, "max error {worst:.3e}");
    Ok(format!("max error {worst:.2e}"))
}

fn uniqueness(branch_records: &[Value]) -> Result<String> {
    let domains =
        [DomainSpec::unit_disk(), DomainSpec::annulus([0.0, 0.0], 0.25)?, DomainSpec::annulus([0.3, 0.0], 0.02)?];
    let mut spread = 0.0f64;
    for spec in domains {
        let mesh = triangulate(&spec, 0.04)?;
        let rho = 7.0 * PI;
        let a = newton_solve(&mesh, &ONE, rho, &ScalarField::zeros(&mesh))?;
        let mut bump = a.u.clone();
        for (p, v) in mesh.nodes().iter().zip(bump.values_mut()) {
            *v *= 1.0 + 0.3 * (3.0 * p[0]).sin();
        }
        let b = newton_solve(&mesh, &ONE, rho, &bump)?;
        let scaled = ScalarField::new(&mesh, a.u.values().iter().map(|v| 0.4 * v).collect())?;
        let c = newton_solve(&mesh, &ONE, rho, &scaled)?;
        spread = spread.max(max_diff(&a.u, &b.u)).max(max_diff(&a.u, &c.u));
        ensure!(a.eig1_weighted > 0.0, "eig1 ≤ 0 at 7π");
    }
    ensure!(spread <= 1e-8, "starts differ by {spread:.3e}");
    let min_eig = branch_records.iter().map(|r| f64_at(r, "min_eig1")).collect::<Result<Vec<_>>>()?;
    ensure!(min_eig.iter().all(|&e| e > 0.0), "eig1 along branches {min_eig:?}");
    let eigs: Vec<String> = min_eig.iter().map(|e| format!("{e:.1e}")).collect();
    Ok(format!("spread {spread:.1e}; min eig1 along branches {}", eigs.join(", ")))
}

fn classification(records: &[(Value, Kind)], secs: f64) -> Result<String> {
    let mut out = vec![];
    for (r, want) in records {
        let v = &r["verdict"];
        let got: Kind = serde_json::from_value(v["d_sign"].clone())?;
        let branch: Option<Kind> = serde_json::from_value(v["branch"].clone())?;
        let gap: Kind = serde_json::from_value(v["gap_kind"].clone())?;
        ensure!(got == *want && branch == Some(*want) && gap == *want, "{}: {v}", r["domain"]);
        ensure!(v["disagreements"].as_array().is_some_and(|a| a.is_empty()), "{}: {v}", r["domain"]);
        out.push(format!("{} {:?} (gap {:.2e})", r["domain"].as_str().unwrap_or("?"), want, f64_at(v, "gap")?));
    }
    ensure!(secs <= 1800.0, "took {secs:.0} s");
    Ok(format!("{}; branch runs {secs:.0} s", out.join("; ")))
}

fn blowup_rate(offset: &Value, offset_dir: &Path) -> Result<String> {
    // the closed-form disk branch with ρ → 8π
    let exact: Vec<(f64, f64)> =
        (0..48).map(|k| DiskBubble::at_mu(2f64.powf(0.25 * k as f64))).map(|b| (b.rho, b.lambda_blow)).collect();
    let (disk_slope, _) = fit_blowup_tail(&exact, 8.0 * PI)?;
    ensure!((disk_slope + 1.0).abs() <= 0.05, "disk slope {disk_slope}");
    ensure!(exact.iter().all(|p| p.0 < 8.0 * PI), "disk branch crosses 8π");

    let slope = offset["blowup_slope"].as_f64().ok_or_else(|| anyhow!("offset annulus did not blow up"))?;
    ensure!((slope + 1.0).abs() <= 0.05, "offset annulus slope {slope}");
    let (crit, d) = (f64_at(offset, "critical_mass")?, f64_at(offset, "D_value")?);
    let tail: Vec<(f64, f64)> = read_branch(offset_dir)?.into_iter().filter(|p| p.1 >= 5.0).collect();
    ensure!(!tail.is_empty(), "empty tail");
    ensure!(tail.iter().all(|p| (crit - p.0).signum() == -d.signum()), "sign of ρ* − ρ disagrees with −sign D");
    Ok(format!("disk {disk_slope:.4}, offset annulus {slope:.4} over {} tail points, D = {d:.4}", tail.len()))
}

fn bol_suite() -> Result<String> {
    let mut rows = 0;
    let cases: [(DomainSpec, Vec<f64>); 3] = [
        (DomainSpec::unit_disk(), vec![2.0, 4.0, 6.0, 7.5]),
        (DomainSpec::annulus([0.0, 0.0], 0.25)?, vec![4.0, 7.9]),
        (DomainSpec::annulus([0.3, 0.0], 0.02)?, vec![4.0, 7.0]),
    ];
    for (spec, masses) in cases {
        let mesh = triangulate(&spec, 0.03)?;
        let mut init = ScalarField::zeros(&mesh);
        for k in masses {
            let sol = newton_solve(&mesh, &ONE, k * PI, &init)?;
            let report = bol_check(&mesh, &ONE, &sol, 32)?;
            ensure!(report.rows.len() == 32 && report.overall_pass, "ρ = {k}π fails");
            ensure!(report.strict_when_multiply_connected, "ρ = {k}π: annular margin not positive");
            rows += report.rows.len();
            init = sol.u;
        }
    }

    let bubble = |h: f64| -> Result<f64> {
        let mesh = triangulate(&DomainSpec::unit_disk(), h)?;
        let v = ScalarField::from_fn(&mesh, |p| 8f64.ln() - 2.0 * (1.0 + p[0] * p[0] + p[1] * p[1]).ln());
        Ok(bol_check_field(&mesh, &v, 16)?.rows.iter().map(|r| r.margin.abs()).fold(0.0, f64::max))
    };
    let order = (bubble(0.04)? / bubble(0.02)?).log2();
    ensure!(order >= 1.8, "bubble order {order}");

    let mut quad = 0.0f64;
    for alpha in [-0.25, -0.5, -0.75] {
        let c = counterexample_metrics(alpha, 1.0, 1e-4, 1.0)?;
        ensure!(c.margin_8pi < 0.0, "α = {alpha}: margin {}", c.margin_8pi);
        let (m, ell) = counterexample_quadrature(alpha, 1.0, 1e-4, 1.0, 64)?;
        quad = quad.max((m - c.m).abs() / c.m).max((ell - c.ell).abs() / c.ell);
    }
    ensure!(quad <= 1e-6, "quadrature mismatch {quad:.2e}");
    Ok(format!("{rows} thresholds pass; bubble order {order:.2}; counterexample quadrature {quad:.1e}"))
}

fn symmetrization() -> Result<String> {
    let spec = DomainSpec::annulus([0.3, 0.0], 0.02)?;
    let mesh = triangulate(&spec, 0.04)?;
    let sol = newton_solve(&mesh, &ONE, 7.0 * PI, &ScalarField::zeros(&mesh))?;
    let v = bol_metric(&mesh, &ONE, &sol)?;
    let torsion = solve_dirichlet(&mesh, Some(&ScalarField::from_fn(&mesh, |_| 1.0)), &vec![0.0; mesh.node_count()])?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut eq, mut ratio) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let modes: Vec<[f64; 4]> = (0..4)
            .map(|_| {
                [
                    rng.random_range(-4.0..4.0),
                    rng.random_range(-4.0..4.0),
                    rng.random_range(0.0..6.3),
                    rng.random_range(-0.4..0.4),
                ]
            })
            .collect();
        let shift = rng.random_range(0.0..0.02);
        let vals = mesh
            .nodes()
            .iter()
            .zip(torsion.values())
            .map(|(p, b)| {
                b * (1.0 + modes.iter().map(|m| m[3] * (m[0] * p[0] + m[1] * p[1] + m[2]).sin()).sum::<f64>()) - shift
            })
            .collect();
        let (_, report) = symmetrize(&mesh, &ScalarField::new(&mesh, vals)?, &v)?;
        ensure!(report.levels.len() == 20);
        eq = eq.max(report.max_equimeasurability());
        ratio = ratio.max(report.dirichlet_star / report.dirichlet);
    }
    ensure!(eq <= 1e-3, "equimeasurability {eq:.2e}");
    ensure!(ratio <= 1.0, "Dirichlet energy ratio {ratio}");
    let mass = bubble_mass_quadrature(BUBBLE_ZERO, 16);
    ensure!((mass - 4.0 * PI).abs() <= 1e-8, "∫ e^U = {mass}");
    let z = (0..=40).map(|k| z_residual(0.25 * k as f64).abs()).fold(0.0, f64::max);
    ensure!(z <= 1e-10, "z residual {z:.2e}");
    Ok(format!(
        "equimeasurability {eq:.1e}; worst energy ratio {ratio:.3}; ∫e^U − 4π = {:.1e}; z residual {z:.1e}",
        mass - 4.0 * PI
    ))
}

fn bubble_eigenvalue() -> Result<String> {
    let e = bubble_eigen(0.04)?;
    ensure!(e.value.abs() <= 1e-2 && e.correlation >= 0.999, "{e:?}");
    Ok(format!("eigenvalue {:.2e}, correlation {:.5}", e.value, e.correlation))
}

fn ensembles() -> Result<String> {
    let mut out = vec![];
    for (domain, hole, dir) in
        [(DomainKind::Disk, None, "ensemble_disk"), (DomainKind::Annulus, Some([0.0, 0.0, 0.25]), "ensemble_annulus")]
    {
        let cfg = RunConfig { target_h: 0.04, ..config(domain, hole, dir) };
        let r = cmd_ensemble(&cfg)?.record;
        let l = &r["legendre"];
        ensure!(r["rows"].as_u64() == Some(16), "{} rows", r["rows"]);
        let (rs, re) =
            (f64_at(l, "residual_s")? / f64_at(l, "max_abs_f")?, f64_at(l, "residual_e")? / f64_at(l, "max_abs_e")?);
        ensure!(rs <= 1e-3 && re <= 1e-2, "{}: residuals {rs:.2e}, {re:.2e}", r["domain"]);
        ensure!(l["convex"] == true && l["decreasing"] == true, "{}: F not convex decreasing", r["domain"]);
        out.push(format!("{} {rs:.1e}/{re:.1e}", r["domain"].as_str().unwrap_or("?")));
    }
    let mesh: Mesh = triangulate(&DomainSpec::unit_disk(), 0.03)?;
    let e = newton_solve(&mesh, &ONE, 4.0 * PI, &ScalarField::zeros(&mesh))?.energy_e;
    ensure!((e - 0.03074).abs() <= 0.02 * 0.03074, "E(4π) = {e}");
    Ok(format!("relative residuals {}; E(4π) = {e:.5}", out.join(", ")))
}

fn determinism() -> Result<String> {
    let bin = env!("CARGO_BIN_EXE_mfelab");
    let dirs = [scratch("determinism_a"), scratch("determinism_b")];
    for d in &dirs {
        let status = Command::new(bin)
            .args(["branch", "--target-h", "0.08", "--lambda-cap", "8", "--output-dir"])
            .arg(d)
            .output()?;
        ensure!(status.status.success(), "branch run failed: {}", String::from_utf8_lossy(&status.stderr));
    }
    let mut names: Vec<_> =
        std::fs::read_dir(&dirs[0])?.map(|e| e.map(|e| e.file_name())).collect::<std::io::Result<_>>()?;
    names.sort();
    ensure!(names.len() >= 4, "only {} files", names.len());
    for n in &names {
        let (a, b) = (std::fs::read(dirs[0].join(n))?, std::fs::read(dirs[1].join(n))?);
        ensure!(a == b, "{n:?} differs");
    }
    Ok(format!("{} files byte-identical", names.len()))
}

#[test]
fn acceptance() {
    let mut suite = Suite { results: vec![] };
    suite.run(1, "Robin oracle", robin_oracle);
    suite.run(2, "D criterion", d_criterion);
    suite.run(3, "closed-form branch", closed_form_branch);

    let t0 = Instant::now();
    let runs = [
        (DomainKind::Disk, None, Kind::FirstKind, "branch_disk"),
        (DomainKind::Annulus, Some([0.0, 0.0, 0.25]), Kind::SecondKind, "branch_concentric"),
        (DomainKind::Annulus, Some([0.3, 0.0, 0.02]), Kind::FirstKind, "branch_offset"),
    ];
    let mut records = vec![];
    let mut failure = None;
    for (domain, hole, kind, dir) in runs {
        let cfg = RunConfig { lambda_cap: 15.0, ..config(domain, hole, dir) };
        match cmd_branch(&cfg) {
            Ok(out) => records.push((out.record, kind)),
            Err(e) => failure = Some(format!("{dir}: {e}")),
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let branches = || failure.clone().map_or(Ok(()), |e| Err(anyhow!(e)));
    let plain: Vec<Value> = records.iter().map(|r| r.0.clone()).collect();

    suite.run(4, "uniqueness", || branches().and_then(|_| uniqueness(&plain)));
    suite.run(5, "classification triple agreement", || branches().and_then(|_| classification(&records, secs)));
    suite.run(6, "blow-up rate", || {
        branches()?;
        blowup_rate(&plain[2], &scratch_path("branch_offset"))
    });
    suite.run(7, "Bol inequality", bol_suite);
    suite.run(8, "symmetrization", symmetrization);
    suite.run(9, "bubble eigenvalue", bubble_eigenvalue);
    suite.run(10, "ensembles", ensembles);
    suite.run(11, "determinism", determinism);

    let failed: Vec<usize> = suite.results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    println!("{} of {} criteria pass", suite.results.len() - failed.len(), suite.results.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

/// Output directory of an earlier run, without clearing it.
fn scratch_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name)
}
