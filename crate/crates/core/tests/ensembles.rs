use std::f64::consts::PI;

use mfelab::ensembles::{canonical_table, ensemble_grid, kind_verdict, legendre_check, EnsembleTable, MIN_ROWS};
use mfelab::geometry::{triangulate, triangulate_graded, DomainSpec, Grading, Mesh, ScalarField};
use mfelab::mfe_solver::{continue_branch, discrete_critical_mass, newton_solve, Branch, BranchOptions, DiskBubble};
use mfelab::robin_dcrit::{classify, Kind, WeightSpec};
use mfelab::Error;

const ONE: WeightSpec = WeightSpec::ConstantOne;

fn sampled(mesh: &Mesh, grid: &[f64], crit: f64) -> Branch {
    let opts = BranchOptions { critical_mass: crit, lambda_cap: 9.0, ..Default::default() };
    continue_branch(mesh, &ONE, grid, &opts).unwrap()
}

#[test]
fn disk_energy_matches_the_closed_form() {
    let mesh = triangulate(&DomainSpec::unit_disk(), 0.03).unwrap();
    let sol = newton_solve(&mesh, &ONE, 4.0 * PI, &ScalarField::zeros(&mesh)).unwrap();
    let exact = 8.0 * PI / (4.0 * PI).powi(2) * (2f64.ln() - 0.5);
    assert!((exact - 0.03074).abs() < 1e-5);
    assert!((sol.energy_e - exact).abs() < 0.02 * exact, "{}", sol.energy_e);
    assert!((DiskBubble::at_rho(4.0 * PI).unwrap().energy_e - exact).abs() < 1e-12);
}

#[test]
fn legendre_relations_hold_on_disk_and_annulus() {
    let h = 0.04;
    let crit = discrete_critical_mass(h, Grading { center: [0.0, 0.0], h_min: 1e-6, ratio: 0.1 }).unwrap();
    let grid = ensemble_grid(PI, 7.5 * PI, 16).unwrap();
    for spec in [DomainSpec::unit_disk(), DomainSpec::annulus([0.0, 0.0], 0.25).unwrap()] {
        let mesh = triangulate(&spec, h).unwrap();
        let area: f64 = (0..mesh.triangles().len()).map(|t| mesh.area(t)).sum();
        let table = canonical_table(&sampled(&mesh, &grid, crit), "test").unwrap().restrict(&grid, 1e-9);
        assert_eq!(table.rows.len(), 16);
        assert!(table.rows.windows(2).all(|w| w[1].beta > w[0].beta));
        let r = legendre_check(&table).unwrap();
        assert!(r.residual_s <= 1e-3 * r.max_abs_f, "{r:?}");
        assert!(r.residual_e <= 1e-2 * r.max_abs_e, "{r:?}");
        assert!(r.convex && r.decreasing && r.energy_decreasing, "{r:?}");
        // Jensen: S ≤ log|Ω|
        assert!(table.rows.iter().all(|row| row.entropy <= area.ln() + 1e-9));
        assert_eq!(table.to_csv().lines().count(), 17);
    }
}

#[test]
fn entropy_tends_to_log_area() {
    let mesh = triangulate(&DomainSpec::unit_disk(), 0.03).unwrap();
    let sol = newton_solve(&mesh, &ONE, 1e-3, &ScalarField::zeros(&mesh)).unwrap();
    assert!((sol.entropy_s - PI.ln()).abs() < 1e-2, "{}", sol.entropy_s);
}

#[test]
fn fault_injection_and_small_tables() {
    let mesh = triangulate(&DomainSpec::unit_disk(), 0.08).unwrap();
    let grid = ensemble_grid(PI, 7.0 * PI, 10).unwrap();
    let table = canonical_table(&sampled(&mesh, &grid, 8.0 * PI), "disk").unwrap().restrict(&grid, 1e-9);
    let clean = legendre_check(&table).unwrap();
    assert!(clean.residual_s <= 1e-3 * clean.max_abs_f);

    let mut bad = table.clone();
    bad.rows[4].entropy += 1.0;
    let r = legendre_check(&bad).unwrap();
    assert!(r.residual_s > 1e-3 * r.max_abs_f);

    let small = EnsembleTable { rows: table.rows[..MIN_ROWS - 1].to_vec(), ..table.clone() };
    assert!(matches!(legendre_check(&small), Err(Error::TableTooSmall { rows: 7, required: 8 })));

    let empty = Branch { points: vec![], ..sampled(&mesh, &[], PI) };
    assert!(matches!(canonical_table(&empty, "disk"), Err(Error::EmptyBranch)));
    assert!(ensemble_grid(PI, 8.0 * PI, 16).is_err());
}

#[test]
fn verdicts_agree_on_the_disk_and_the_concentric_annulus() {
    let h = 0.08;
    let grading = Grading { center: [0.0, 0.0], h_min: 1e-6, ratio: 0.1 };
    let crit = discrete_critical_mass(h, grading).unwrap();

    let spec = DomainSpec::unit_disk();
    let dcrit = classify(&spec, &triangulate(&spec, 0.04).unwrap(), &ONE).unwrap();
    let branch = sampled(&triangulate_graded(&spec, h, grading).unwrap(), &[], crit);
    let table = canonical_table(&branch, "disk").unwrap();
    let v = kind_verdict(&table, &branch, &dcrit, &ONE);
    assert!(v.agree(), "{v:?}");
    assert_eq!(v.d_sign, Kind::FirstKind);
    assert!(v.gap.abs() < 1e-2, "{}", v.gap);
    assert_eq!(table.critical_energy(), None);

    let spec = DomainSpec::annulus([0.0, 0.0], 0.25).unwrap();
    let dcrit = classify(&spec, &triangulate(&spec, 0.04).unwrap(), &ONE).unwrap();
    let branch = sampled(&triangulate_graded(&spec, h, Grading { center: [0.6, 0.0], ..grading }).unwrap(), &[], crit);
    let table = canonical_table(&branch, "annulus").unwrap();
    let v = kind_verdict(&table, &branch, &dcrit, &ONE);
    assert!(v.agree(), "{v:?}");
    assert_eq!(v.gap_kind, Kind::SecondKind);
    let ec = table.critical_energy().unwrap();
    assert_eq!(ec, branch.last().unwrap().energy_e);
}
