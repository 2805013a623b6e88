use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use crate::diagnostics::{circle_profile_with, classify_blowdown, distance_to_a, pohozaev_residual, ClassifyOptions};
use crate::error::{Error, Result};
use crate::geodesics::{metric_distance, pairwise_costs_with, HeteroclinicSet};
use crate::junction::{junction_angles, sine_law_residual, surface_tensions, SurfaceTensions};
use crate::partitions::{compare_partitions, junction_angle_error, multiway_cut_oracle, solve_problem1};
use crate::potential::{Point, Potential};
use crate::solver::{
    blowdown, build_trace_with, field_to_string, local_min_probe, read_field, recovery_field, relax_with, solve_disc, write_pgm,
    DiscSolveOptions, Domain, Field, GridSpec, RelaxOptions, Schedule, Window,
};

use super::config::{ExperimentConfig, SolveMode};
use super::manifest::Manifest;

const FIELD_NAME: &str = "field.twac";

pub fn dispatch(name: &str, cfg: &ExperimentConfig) -> Result<String> {
    let pot = cfg.potential()?;
    let mut m = Manifest::new(&cfg.output, name, &cfg.to_toml(), cfg.seed)?;
    let summary = match name {
        "hetero" => hetero(cfg, &pot, &mut m),
        "metric" => metric(cfg, &pot, &mut m),
        "angles" => angles(cfg, &pot, &mut m),
        "solve" => solve(cfg, &pot, &mut m),
        "blowdown" => blowdowns(cfg, &pot, &mut m),
        "diagnose" => diagnose(cfg, &pot, &mut m),
        "partition" => partition(cfg, &pot, &mut m),
        "compare-partitions" => compare(cfg, &pot, &mut m),
        "probe" => probe(cfg, &pot, &mut m),
        other => Err(Error::InvalidParams(format!("unknown subcommand {other}"))),
    }?;
    m.write("config.toml", cfg.to_toml().as_bytes())?;
    m.finish()?;
    Ok(summary)
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn pair_name(k: usize) -> &'static str {
    ["12", "13", "23"][k]
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn profiles(cfg: &ExperimentConfig, pot: &Potential) -> Result<HeteroclinicSet> {
    HeteroclinicSet::compute(pot, cfg.hetero.half_width, cfg.hetero.samples)
}

fn costs(cfg: &ExperimentConfig, pot: &Potential) -> Result<[f64; 3]> {
    match cfg.partitions.costs {
        Some(c) => Ok(c),
        None => Ok(pairwise_costs_with(pot, cfg.hetero.path_points)?.as_array()),
    }
}

fn tensions(cfg: &ExperimentConfig, pot: &Potential) -> Result<SurfaceTensions> {
    match cfg.partitions.tensions {
        Some(t) => SurfaceTensions::from_tensions(t),
        None => {
            let c = costs(cfg, pot)?;
            surface_tensions(c[0], c[1], c[2])
        }
    }
}

fn hetero(cfg: &ExperimentConfig, pot: &Potential, m: &mut Manifest) -> Result<String> {
    let set = profiles(cfg, pot)?;
    let mut rows = Vec::new();
    for (k, (i, j)) in PAIRS.iter().enumerate() {
        let prof = set.profile(*i, *j);
        let name = format!("hetero_{}.csv", pair_name(k));
        prof.write_csv(pot, &m.path(&name))?;
        m.record(&name)?;
        let d = metric_distance(pot, pot.well(*i), pot.well(*j), cfg.hetero.path_points)?.length;
        rows.push(vec![
            pair_name(k).to_string(),
            prof.energy.to_string(),
            d.to_string(),
            ((prof.energy - d) / d).to_string(),
            prof.first_integral_defect(pot).to_string(),
            prof.decay_rate.to_string(),
        ]);
    }
    m.write(
        "hetero.csv",
        &csv_bytes(&["pair", "profile_energy", "metric_distance", "relative_difference", "first_integral_defect", "decay_rate"], &rows)?,
    )?;
    Ok(format!("hetero: costs {:?}", set.costs()))
}

fn metric(cfg: &ExperimentConfig, pot: &Potential, m: &mut Manifest) -> Result<String> {
    let pc = pairwise_costs_with(pot, cfg.hetero.path_points)?;
    let mut rows = Vec::new();
    for (k, path) in pc.paths.iter().enumerate() {
        rows.push(vec![pair_name(k).to_string(), path.length.to_string()]);
        let pts: Vec<Vec<String>> = path.points.iter().enumerate().map(|(n, p)| vec![n.to_string(), p.x.to_string(), p.y.to_string()]).collect();
        m.write(&format!("path_{}.csv", pair_name(k)), &csv_bytes(&["index", "x", "y"], &pts)?)?;
    }
    m.write("metric.csv", &csv_bytes(&["pair", "distance"], &rows)?)?;
    Ok(format!("metric: c12 = {}, c13 = {}, c23 = {} ({:?})", pc.c12, pc.c13, pc.c23, pc.triangle))
}

/// Rounds to nine decimals so that exact angles print as integers of degrees.
fn degrees(a: f64) -> String {
    ((a.to_degrees() * 1e9).round() / 1e9).to_string()
}

fn angles(cfg: &ExperimentConfig, pot: &Potential, m: &mut Manifest) -> Result<String> {
    let c = costs(cfg, pot)?;
    let a = junction_angles(c[0], c[1], c[2])?;
    let row = vec![degrees(a[0]), degrees(a[1]), degrees(a[2]), sine_law_residual(a, c[0], c[1], c[2]).to_string()];
    m.write("angles.csv", &csv_bytes(&["alpha1_deg", "alpha2_deg", "alpha3_deg", "sine_law_residual"], std::slice::from_ref(&row))?)?;
    Ok(format!("angles: {}, {}, {} degrees", row[0], row[1], row[2]))
}

fn solve(cfg: &ExperimentConfig, pot: &Potential, m: &mut Manifest) -> Result<String> {
    let s = &cfg.solver;
    let set = Arc::new(profiles(cfg, pot)?);
    let bdata = cfg.boundary()?;
    let relax = RelaxOptions { tol: s.tol, max_iter: s.max_iter, ..RelaxOptions::default() };
    let (field, stages, m0) = match s.mode {
        SolveMode::Disc => {
            let opts = DiscSolveOptions { spacing: s.spacing, start_radius: s.start_radius, relax };
            let sol = solve_disc(pot, set, &bdata, s.radius, &opts)?;
            m.write("network.txt", sol.network.to_text().as_bytes())?;
            let stages: Vec<(f64, _)> = sol.stages.iter().map(|(r, rep)| (*r, rep.clone())).collect();
            (sol.field, stages, sol.network.cost)
        }
        SolveMode::Unit => {
            let c = set.costs();
            let net = solve_problem1(&bdata, &surface_tensions(c[0], c[1], c[2])?)?;
            m.write("network.txt", net.to_text().as_bytes())?;
            let r = s.r_scale;
            let trace = build_trace_with(&bdata, pot, set, r, Point::zeros(), 1.0)?;
            let start = recovery_field(&net, &trace, pot, r, Schedule::for_scale(r), GridSpec::unit_disc(s.cells)?)?;
            let (f, rep) = relax_with(&start, pot, r, &relax, None)?;
            if !rep.converged {
                return Err(Error::Convergence { what: "unit disc relaxation", iterations: rep.iterations, residual: rep.residual });
            }
            // stored at unit scale like the disc solves
            (f.rescaled(r), vec![(r, rep)], net.cost)
        }
    };
    let rows: Vec<Vec<String>> = stages
        .iter()
        .map(|(r, rep)| {
            vec![
                r.to_string(),
                rep.iterations.to_string(),
                rep.cg_iterations.to_string(),
                rep.residual.to_string(),
                rep.energy_history.last().copied().unwrap_or(f64::NAN).to_string(),
            ]
        })
        .collect();
    m.write("stages.csv", &csv_bytes(&["stage", "iterations", "cg_iterations", "residual", "energy"], &rows)?)?;
    m.write(FIELD_NAME, field_to_string(&field).as_bytes())?;
    write_pgm(&m.path("field.pgm"), &field, pot)?;
    m.record("field.pgm")?;
    let radius = match field.domain {
        Domain::Disc { radius, .. } => radius,
        Domain::Rect => f64::NAN,
    };
    let e = crate::solver::energy(&field, pot, 1.0) / radius;
    Ok(format!("solve: E/L = {e:.6}, m0 = {m0:.6}"))
}

fn input_field(cfg: &ExperimentConfig) -> Result<Field> {
    let path: PathBuf = cfg.diagnostics.field.clone().unwrap_or_else(|| cfg.output.join(FIELD_NAME));
    read_field(&path).map_err(|e| Error::Config { path, message: format!("cannot load field: {e}") })
}

fn classify_options(cfg: &ExperimentConfig) -> ClassifyOptions {
    let d = &cfg.diagnostics;
    ClassifyOptions { rotations: d.rotations, margin: d.margin, tolerance: d.tolerance, ..ClassifyOptions::default() }
}

fn blowdowns(cfg: &ExperimentConfig, pot: &Potential, m: &mut Manifest) -> Result<String> {
    let field = input_field(cfg)?;
    let c = costs(cfg, pot)?;
    let mut rows = Vec::new();
    for &r in &cfg.diagnostics.radii {
        let b = blowdown(&field, r, GridSpec::unit_disc(cfg.diagnostics.cells)?, Domain::unit_disc())?;
        let (d, map) = distance_to_a(&b, pot, c, cfg.diagnostics.rotations)?;
        let stem = format!("blowdown_{r}");
        m.write(&format!("{stem}.twac"), field_to_string(&b).as_bytes())?;
        write_pgm(&m.path(&format!("{stem}.pgm")), &b, pot)?;
        m.record(&format!("{stem}.pgm"))?;
        rows.push(vec![r.to_string(), d.to_string(), map.rotation.to_string()]);
    }
    m.write("blowdown.csv", &csv_bytes(&["radius", "distance_to_A", "rotation"], &rows)?)?;
    Ok(format!("blowdown: {} radii", rows.len()))
}

fn diagnose(cfg: &ExperimentConfig, pot: &Potential, m: &mut Manifest) -> Result<String> {
    let field = input_field(cfg)?;
    let set = profiles(cfg, pot)?;
    let c = set.costs();
    let d = &cfg.diagnostics;
    let report = classify_blowdown(&field, pot, c, &d.radii, &classify_options(cfg))?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    m.write("diagnose.csv", &buf)?;
    report.save_fit_pgm(&m.path("fit.pgm"), pot, d.cells)?;
    m.record("fit.pgm")?;

    let poho: Vec<Vec<String>> = d
        .radii
        .iter()
        .map(|r| Ok(vec![r.to_string(), pohozaev_residual(&field, pot, *r)?.to_string()]))
        .collect::<Result<_>>()?;
    m.write("pohozaev.csv", &csv_bytes(&["radius", "residual"], &poho)?)?;

    let rho = d.circle_radius.unwrap_or(*d.radii.last().expect("validated"));
    let circle = circle_profile_with(&field, pot, &set, &Point::zeros(), rho)?;
    let pts: Vec<Vec<String>> = circle
        .values
        .iter()
        .zip(&circle.potential)
        .enumerate()
        .map(|(k, (u, w))| vec![(2.0 * PI * k as f64 / circle.len() as f64).to_string(), u.x.to_string(), u.y.to_string(), w.to_string()])
        .collect();
    m.write("circle.csv", &csv_bytes(&["theta", "u1", "u2", "W"], &pts)?)?;
    let win: Vec<Vec<String>> = circle
        .windows
        .iter()
        .map(|w| {
            vec![
                w.start.to_string(),
                w.end.to_string(),
                (w.from + 1).to_string(),
                (w.to + 1).to_string(),
                w.energy.to_string(),
                w.sup_distance.to_string(),
                w.h1_distance.to_string(),
            ]
        })
        .collect();
    m.write("windows.csv", &csv_bytes(&["start", "end", "from", "to", "energy", "sup_distance", "h1_distance"], &win)?)?;

    let mut summary = report.summary();
    summary.push_str(&format!(
        "circle_radius = {rho}\ncircle_energy = {}\ncost_sum = {}\nwinding = {}\nw0 = {}\n",
        circle.total_energy(),
        c.iter().sum::<f64>(),
        circle.winding.map_or("none".to_string(), |w| w.to_string()),
        circle.w0
    ));
    m.write("summary.toml", summary.as_bytes())?;
    Ok(format!("diagnose: {} (distance {:.4})", report.classification, report.best_fit.distance))
}

fn partition(cfg: &ExperimentConfig, pot: &Potential, m: &mut Manifest) -> Result<String> {
    let t = tensions(cfg, pot)?;
    let bdata = cfg.boundary()?;
    let net = solve_problem1(&bdata, &t)?;
    m.write("partition.txt", net.to_text().as_bytes())?;
    let oracle = if cfg.partitions.oracle_n > 0 { Some(multiway_cut_oracle(&bdata, &t, cfg.partitions.oracle_n)?) } else { None };
    let row = vec![
        net.cost.to_string(),
        junction_angle_error(&net, &t).map_or(String::new(), |e| e.to_string()),
        oracle.map_or(String::new(), |o| o.to_string()),
    ];
    m.write("partition.csv", &csv_bytes(&["cost", "junction_angle_error", "oracle_cost"], &[row])?)?;
    Ok(format!("partition: m0 = {}", net.cost))
}

fn compare(cfg: &ExperimentConfig, pot: &Potential, m: &mut Manifest) -> Result<String> {
    let t = tensions(cfg, pot)?;
    let table = compare_partitions(&cfg.boundary()?, &t, &cfg.partitions.deltas)?;
    table.write_csv(&m.path("compare.csv"))?;
    m.record("compare.csv")?;
    Ok(format!("compare-partitions: exponent {:.4}, gamma {:.4}", table.exponent(), table.gamma))
}

fn probe(cfg: &ExperimentConfig, pot: &Potential, m: &mut Manifest) -> Result<String> {
    let field = input_field(cfg)?;
    let p = &cfg.probe;
    let rep = local_min_probe(&field, pot, 1.0, Window::centered(Point::zeros(), p.half_side), p.trials, p.amplitude, cfg.seed, p.tol)?;
    let rows: Vec<Vec<String>> = rep.deltas.iter().enumerate().map(|(k, d)| vec![k.to_string(), d.to_string()]).collect();
    m.write("probe.csv", &csv_bytes(&["trial", "delta"], &rows)?)?;
    Ok(format!("probe: min delta {:.3e}, threshold {:.3e}, passed {}", rep.min_delta(), rep.threshold, rep.passed()))
}
