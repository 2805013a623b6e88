//! Cross-module checks: costs against the lattice oracle, solves feeding
//! diagnostics, and the field file format in between.

mod common;

use std::f64::consts::TAU;
use std::sync::Arc;

use twac::diagnostics::wtilde_profile;
use twac::geodesics::{pairwise_costs, HeteroclinicSet};
use twac::junction::{junction_angles, surface_tensions};
use twac::partitions::{solve_problem1, BoundaryData};
use twac::potential::{symmetric_product_well, Family, Point, Potential, TriangleStatus};
use twac::solver::{
    build_trace_with, energy, energy_where, local_min_probe, read_field, recovery_field, relax_with, solve_disc, write_field, DiscSolveOptions,
    GridSpec, RelaxOptions, Schedule, Window,
};

fn assert_costs_match_dijkstra(pot: &Potential) -> [f64; 3] {
    let c = pairwise_costs(pot).unwrap().as_array();
    for (k, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        let o = common::dijkstra_distance(pot, i, j, 400);
        assert!((c[k] - o).abs() / o < 0.02, "c{}{}: {} vs lattice {o}", i + 1, j + 1, c[k]);
    }
    c
}

#[test]
fn costs_agree_with_the_lattice_oracle() {
    let sym = symmetric_product_well();
    let base = assert_costs_match_dijkstra(&sym);

    // extra weight around p1 raises the two costs that start there
    let bumped = Potential::new(*sym.wells(), 1.0, Family::Perturbed { eps: 1.0, weights: [1.0, 0.0, 0.0], width: 0.5 }).unwrap();
    let c = assert_costs_match_dijkstra(&bumped);
    assert!(c[0] > base[0] && c[1] > base[1], "{c:?} vs {base:?}");
    assert!((c[2] - base[2]).abs() / base[2] < 0.02);
    assert!(TriangleStatus::classify(c[0], c[1], c[2]).is_strict());
}

#[test]
fn symmetric_costs_give_equal_angles() {
    let c = pairwise_costs(&symmetric_product_well()).unwrap().as_array();
    let a = junction_angles(c[0], c[1], c[2]).unwrap();
    assert!(a.iter().all(|x| (x - TAU / 3.0).abs() < 1e-6), "{a:?}");
}

#[test]
fn recovery_relax_probe_chain() {
    let pot = symmetric_product_well();
    let set = Arc::new(HeteroclinicSet::with_defaults(&pot).unwrap());
    let c = set.costs();
    let bdata = BoundaryData::three_equal();
    let net = solve_problem1(&bdata, &surface_tensions(c[0], c[1], c[2]).unwrap()).unwrap();
    let r = 16.0;
    let trace = build_trace_with(&bdata, &pot, set, r, Point::zeros(), 1.0).unwrap();
    let start = recovery_field(&net, &trace, &pot, r, Schedule::for_scale(r), GridSpec::unit_disc(64).unwrap()).unwrap();
    let (field, rep) = relax_with(&start, &pot, r, &RelaxOptions::new(1e-9, 200), None).unwrap();
    assert!(rep.converged);
    assert!(energy(&field, &pot, r) < energy(&start, &pot, r));
    let probe = local_min_probe(&field, &pot, r, Window::centered(Point::zeros(), 0.3), 3, 0.05, 5, 1e-9).unwrap();
    assert!(probe.passed(), "{probe:?}");
}

#[test]
fn disc_solve_energy_grows_linearly_and_survives_a_file_round_trip() {
    let pot = symmetric_product_well();
    let set = Arc::new(HeteroclinicSet::with_defaults(&pot).unwrap());
    let sum: f64 = set.costs().iter().sum();
    let sol = solve_disc(&pot, set, &BoundaryData::three_equal(), 32.0, &DiscSolveOptions::default()).unwrap();
    let f = &sol.field;
    for r in [8.0, 16.0, 24.0, 31.0] {
        let e = energy_where(f, &pot, 1.0, |k| f.position(k).norm() < r) / r;
        assert!(e > 0.8 * sum && e < 1.1 * sum, "E(B_{r})/{r} = {e} vs {sum}");
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.twac");
    write_field(&path, f).unwrap();
    let back = read_field(&path).unwrap();
    let radii = [4.0, 8.0, 16.0];
    assert_eq!(wtilde_profile(f, &pot, &radii).unwrap().values, wtilde_profile(&back, &pot, &radii).unwrap().values);
}

#[test]
fn relaxed_energy_is_stable_under_refinement() {
    let pot = symmetric_product_well();
    let set = Arc::new(HeteroclinicSet::with_defaults(&pot).unwrap());
    let mut e = Vec::new();
    for h in [0.125, 0.0625] {
        let opts = DiscSolveOptions { spacing: h, start_radius: 8.0, ..Default::default() };
        let sol = solve_disc(&pot, set.clone(), &BoundaryData::three_equal(), 8.0, &opts).unwrap();
        e.push(energy(&sol.field, &pot, 1.0));
    }
    assert!((e[0] - e[1]).abs() / e[1] < 0.02, "{e:?}");
}
