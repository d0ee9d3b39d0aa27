use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use s2re::azero::azero_solutions;
use s2re::conditions::{
    big_a, configuration_from_meridian_shape, double_angle_unit, meridian_residual_relative, solve_s_omega2,
};
use s2re::continuation::{branch_directions_at_saddle, g_eval, trace_contour, trace_contour_from};
use s2re::dynamics::{energy, integrate, polar_momentum, re_residual_norm, verify_re};
use s2re::independent::{f1, f2, member_solution, IndependentMember};
use s2re::{DynState, Error, MassTriple, MeridianShape, ReSolution, TrajectoryReport, EPS_A};

use crate::table::{fmt_num, Cell, Table};
use crate::Common;

/// Reference triples used by `configs` when no masses are given.
const REFERENCE_MASSES: [[f64; 3]; 4] = [[0.1, 0.5, 1.0], [0.4, 0.5, 1.0], [0.8, 0.9, 1.0], [1.0, 1.0, 1.0]];

#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or unusable input (exit code 1).
    Usage(String),
    /// A numerical check failed (exit code 2).
    Numeric(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numeric(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(s) | Failure::Numeric(s) => f.write_str(s),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite(_)
            | Error::InvalidMass(..)
            | Error::NotInShapeSpace { .. }
            | Error::InvalidArc(_)
            | Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("cannot write output: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, value: &Value) -> Outcome {
    let mut out = open_out(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::Usage(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_table(path: Option<&Path>, table: &Table) -> Outcome {
    let mut out = open_out(path)?;
    table.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

/// Writes `table` as CSV, or as JSON with the rows under `key` next to `extra`.
fn emit(common: &Common, table: &Table, key: &str, extra: Value) -> Outcome {
    if common.json {
        let mut obj = match extra {
            Value::Object(o) => o,
            _ => Default::default(),
        };
        obj.insert(key.to_string(), table.json_rows());
        write_json(common.out.as_deref(), &Value::Object(obj))
    } else {
        write_table(common.out.as_deref(), table)
    }
}

fn resolve_masses(common: &Common) -> Result<MassTriple, Failure> {
    match (common.masses, common.rng_seed) {
        (Some(m), _) => Ok(m),
        (None, Some(seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || rng.gen_range((0.1f64).ln()..(10.0f64).ln()).exp();
            Ok(MassTriple::new(draw(), draw(), draw())?)
        }
        (None, None) => Err(Failure::Usage("--masses (or --rng-seed) is required".into())),
    }
}

fn angle(common: &Common, x: f64) -> f64 {
    if common.degrees {
        x.to_radians()
    } else {
        x
    }
}

fn shape_arg(common: &Common, p: (f64, f64)) -> Result<MeridianShape, Failure> {
    Ok(MeridianShape::new(angle(common, p.0), angle(common, p.1))?)
}

fn masses_json(m: &MassTriple) -> Value {
    json!(m.masses())
}

/// Largest drift from rigid rotation, up to the cut if the run hit a singularity.
fn drift_of(m: &MassTriple, sol: &ReSolution, periods: usize) -> Result<f64, Failure> {
    match verify_re(m, sol, periods, 1e-6) {
        Ok(v) => Ok(v.drift()),
        Err(Error::Truncated { report, .. }) => Ok(report.max_theta_drift.max(report.max_phi_deviation)),
        Err(e) => Err(e.into()),
    }
}

pub fn mass_independent(common: &Common, tol: f64, periods: usize) -> Outcome {
    let m = resolve_masses(common)?;
    let mut table = Table::new(&[
        "shape", "tau1", "tau2", "s", "omega2", "A", "theta1", "theta2", "theta3", "residual", "drift", "indefinite",
    ]);
    let mut shapes = Vec::new();
    let mut worst = 0.0_f64;
    for member in IndependentMember::ALL {
        let (sol, spin) = member_solution(&m, member)?;
        let shape = member.shape();
        let residual = re_residual_norm(&m, &sol.config, sol.omega2)?;
        let drift = drift_of(&m, &sol, periods)?;
        worst = worst.max(residual);
        let th = sol.config.theta;
        table.push(vec![
            member.name().into(),
            shape.tau1().into(),
            shape.tau2().into(),
            spin.s.as_i32().into(),
            spin.omega2.into(),
            spin.a.into(),
            th[0].into(),
            th[1].into(),
            th[2].into(),
            residual.into(),
            drift.into(),
            spin.indefinite.into(),
        ]);
        shapes.push(json!({
            "name": member.name(),
            "tau1": shape.tau1(),
            "tau2": shape.tau2(),
            "s": spin.s.as_i32(),
            "omega2": spin.omega2,
            "A": spin.a,
            "theta": th,
            "residual": residual,
            "drift": Cell::Num(drift).json(),
            "indefinite": spin.indefinite,
        }));
    }
    if common.json {
        write_json(common.out.as_deref(), &json!({ "masses": masses_json(&m), "shapes": shapes }))?;
    } else {
        write_table(common.out.as_deref(), &table)?;
    }
    if worst > tol {
        return Err(Failure::Numeric(format!("residual {worst:e} exceeds tolerance {tol:e}")));
    }
    Ok(())
}

/// Cell-centred grid over `(-pi, pi) x (0, pi)`, rows by `tau1`.
fn grid_table(grid: usize, header: &[&'static str], f: impl Fn(f64, f64) -> [f64; 2] + Sync) -> Result<Table, Failure> {
    if grid < 100 {
        return Err(Failure::Usage(format!("--grid must be at least 100, got {grid}")));
    }
    use std::f64::consts::PI;
    let rows: Vec<Vec<Vec<Cell>>> = (0..grid)
        .into_par_iter()
        .map(|i| {
            let t1 = -PI + 2.0 * PI * (i as f64 + 0.5) / grid as f64;
            (0..grid)
                .map(|j| {
                    let t2 = PI * (j as f64 + 0.5) / grid as f64;
                    let v = f(t1, t2);
                    vec![t1.into(), t2.into(), v[0].into(), v[1].into()]
                })
                .collect()
        })
        .collect();
    let mut table = Table::new(header);
    table.rows = rows.into_iter().flatten().collect();
    Ok(table)
}

pub fn scan_f(common: &Common, grid: usize) -> Outcome {
    let table = grid_table(grid, &["tau1", "tau2", "f1", "f2"], |a, b| [f1(a, b), f2(a, b)])?;
    emit(common, &table, "grid", json!({}))
}

pub fn scan_g(common: &Common, grid: usize) -> Outcome {
    let m = resolve_masses(common)?;
    // cell centres stay at least pi / (2 grid) away from the excluded lines
    let table = grid_table(grid, &["tau1", "tau2", "g", "A"], |a, b| match MeridianShape::new(a, b) {
        Ok(s) => [g_eval(&m, &s), big_a(&m, &s)],
        Err(_) => [f64::NAN; 2],
    })?;
    emit(common, &table, "grid", json!({ "masses": masses_json(&m) }))
}

pub fn continue_curve(common: &Common, seed: (f64, f64), step: f64, max_points: usize, tol: f64) -> Outcome {
    let m = resolve_masses(common)?;
    let seed = shape_arg(common, seed)?;
    let step = angle(common, step);
    let curve = match trace_contour(&m, &seed, step, max_points) {
        Ok(c) => c,
        Err(Error::SeedNotOnContour { .. }) => {
            // the equilateral shape is a saddle of g: start along a branch direction
            let e = IndependentMember::Equilateral.shape();
            if seed.distance(&e) > 1e-6 {
                return Err(Failure::Numeric(format!("seed ({}, {}) could not be corrected onto g = 0", seed.tau1(), seed.tau2())));
            }
            let dirs = branch_directions_at_saddle(&m)?;
            trace_contour_from(&m, &e, dirs[0], step, max_points)?
        }
        Err(e) => return Err(e.into()),
    };
    let mut table = Table::new(&["idx", "tau1", "tau2", "g", "A", "s", "omega2", "residual"]);
    let mut worst = 0.0_f64;
    for (k, p) in curve.points.iter().enumerate() {
        let a = big_a(&m, p);
        let spin = if a > EPS_A { solve_s_omega2(&m, p)? } else { None };
        let residual = match spin {
            Some(sp) => Some(meridian_residual_relative(&m, p, sp.s, sp.omega2)?),
            None => None,
        };
        if a > EPS_A {
            worst = worst.max(residual.unwrap_or(f64::INFINITY));
        }
        table.push(vec![
            k.into(),
            p.tau1().into(),
            p.tau2().into(),
            g_eval(&m, p).into(),
            a.into(),
            spin.map(|s| s.s.as_i32()).into(),
            spin.map(|s| s.omega2).into(),
            residual.into(),
        ]);
    }
    let start = curve.termination_start.map(|t| t.to_string());
    if !common.json {
        eprintln!(
            "{} points; ends: {} / {}; A = 0 vertices: {:?}",
            curve.points.len(),
            start.as_deref().unwrap_or("closed_loop"),
            curve.termination,
            curve.a_zero_crossings
        );
    }
    emit(
        common,
        &table,
        "points",
        json!({
            "masses": masses_json(&m),
            "termination": curve.termination.to_string(),
            "termination_start": start,
            "a_zero_crossings": curve.a_zero_crossings,
            "seed_index": curve.seed_index,
        }),
    )?;
    if worst > tol {
        return Err(Failure::Numeric(format!("residual {worst:e} exceeds tolerance {tol:e}")));
    }
    Ok(())
}

pub fn configs(masses: &[MassTriple], out: Option<&Path>, json: bool) -> Outcome {
    let list: Vec<MassTriple> = if masses.is_empty() {
        REFERENCE_MASSES
            .iter()
            .map(|m| MassTriple::new(m[0], m[1], m[2]))
            .collect::<s2re::Result<_>>()?
    } else {
        masses.to_vec()
    };
    let mut table = Table::new(&[
        "m1", "m2", "m3", "shape", "tau1", "tau2", "s", "omega2", "A", "theta1", "theta2", "theta3", "norm",
        "indefinite",
    ]);
    for m in &list {
        for member in IndependentMember::ALL {
            let (sol, spin) = member_solution(m, member)?;
            let shape = member.shape();
            let norm = if spin.indefinite {
                None
            } else {
                let (c, s) = double_angle_unit(m, &shape, spin.s)?;
                Some(c * c + s * s)
            };
            let th = sol.config.theta;
            table.push(vec![
                m[0].into(),
                m[1].into(),
                m[2].into(),
                member.name().into(),
                shape.tau1().into(),
                shape.tau2().into(),
                spin.s.as_i32().into(),
                spin.omega2.into(),
                spin.a.into(),
                th[0].into(),
                th[1].into(),
                th[2].into(),
                norm.into(),
                spin.indefinite.into(),
            ]);
        }
    }
    if json {
        write_json(out, &json!({ "configurations": table.json_rows() }))
    } else {
        write_table(out, &table)
    }
}

pub fn azero(common: &Common) -> Outcome {
    let m = resolve_masses(common)?;
    let set = azero_solutions(&m);
    let mut table = Table::new(&["idx", "tau1", "tau2", "A"]);
    for (k, s) in set.solutions.iter().enumerate() {
        table.push(vec![k.into(), s.tau1().into(), s.tau2().into(), big_a(&m, s).into()]);
    }
    emit(
        common,
        &table,
        "solutions",
        json!({
            "masses": masses_json(&m),
            "alpha1": set.alpha1,
            "alpha2": set.alpha2,
            "degenerate": set.degenerate,
        }),
    )
}

pub fn verify(common: &Common, shape: (f64, f64), periods: usize, tol: f64) -> Outcome {
    let m = resolve_masses(common)?;
    let shape = shape_arg(common, shape)?;
    let a = big_a(&m, &shape);
    if a <= EPS_A {
        return Err(Failure::Numeric(format!("A = {a:e}: the rotation axis is undetermined at this shape")));
    }
    let Some(spin) = solve_s_omega2(&m, &shape)? else {
        return Err(Failure::Numeric(format!(
            "({}, {}) is not an Euler shape for masses {:?}",
            shape.tau1(),
            shape.tau2(),
            m.masses()
        )));
    };
    let config = configuration_from_meridian_shape(&m, &shape, spin.s)?;
    let sol = ReSolution::new(config, spin.s, spin.omega2)?;
    let meridian = meridian_residual_relative(&m, &shape, spin.s, spin.omega2)?;
    let residual = re_residual_norm(&m, &config, spin.omega2)?;
    let (drift, e_drift, lz_drift) = match verify_re(&m, &sol, periods, tol) {
        Ok(v) => (v.drift(), v.report.energy_drift_rel, v.report.lz_drift_rel),
        Err(Error::Truncated { report, .. }) => {
            let d = report.max_theta_drift.max(report.max_phi_deviation);
            // a cut run never passes, whatever it reached before the cut
            (d.max(tol), report.energy_drift_rel, report.lz_drift_rel)
        }
        Err(e) => return Err(e.into()),
    };
    let passed = meridian < 1e-8 && drift < tol;
    let th = config.theta;
    let mut table = Table::new(&[
        "tau1", "tau2", "A", "s", "omega2", "theta1", "theta2", "theta3", "meridian_residual", "residual", "drift",
        "energy_drift", "lz_drift", "passed",
    ]);
    table.push(vec![
        shape.tau1().into(),
        shape.tau2().into(),
        a.into(),
        spin.s.as_i32().into(),
        spin.omega2.into(),
        th[0].into(),
        th[1].into(),
        th[2].into(),
        meridian.into(),
        residual.into(),
        drift.into(),
        e_drift.into(),
        lz_drift.into(),
        passed.into(),
    ]);
    if common.json {
        let row = table.json_rows()[0].clone();
        let mut obj = row.as_object().cloned().unwrap_or_default();
        obj.insert("masses".into(), masses_json(&m));
        write_json(common.out.as_deref(), &Value::Object(obj))?;
    } else {
        write_table(common.out.as_deref(), &table)?;
    }
    if !passed {
        return Err(Failure::Numeric(format!(
            "verification failed: meridian residual {meridian:e}, drift {drift:e} (tolerance {tol:e})"
        )));
    }
    Ok(())
}

fn trajectory_table(m: &MassTriple, report: &TrajectoryReport) -> Table {
    let mut table = Table::new(&["t", "theta1", "theta2", "theta3", "phi1", "phi2", "phi3", "E", "Lz"]);
    for (t, s) in &report.samples {
        let e = energy(m, s).map_or(f64::NAN, |e| e);
        let mut row: Vec<Cell> = vec![(*t).into()];
        row.extend(s.theta.iter().chain(s.phi.iter()).map(|&x| Cell::from(x)));
        row.push(e.into());
        row.push(polar_momentum(m, s).into());
        table.push(row);
    }
    table
}

pub fn simulate(
    common: &Common,
    state: Option<[f64; 12]>,
    seed_shape: Option<(f64, f64)>,
    dt: f64,
    steps: usize,
    sample_every: usize,
) -> Outcome {
    let m = resolve_masses(common)?;
    let state0 = match (state, seed_shape) {
        (Some(v), _) => {
            let v = v.map(|x| angle(common, x));
            let pick = |o: usize| [v[o], v[o + 1], v[o + 2]];
            DynState { theta: pick(0), phi: pick(3), theta_dot: pick(6), phi_dot: pick(9) }
        }
        (None, Some(p)) => {
            let shape = shape_arg(common, p)?;
            let spin = solve_s_omega2(&m, &shape)?
                .ok_or_else(|| Failure::Numeric(format!("({}, {}) is not an Euler shape", shape.tau1(), shape.tau2())))?;
            let config = configuration_from_meridian_shape(&m, &shape, spin.s)?;
            DynState::rotating(&config, spin.omega2.sqrt())
        }
        (None, None) => return Err(Failure::Usage("one of --state or --seed-shape is required".into())),
    };
    let (report, failure) = match integrate(&m, &state0, dt, steps, sample_every) {
        Ok(r) => (r, None),
        Err(Error::Truncated { time, cause, report }) => {
            (*report, Some(Failure::Numeric(format!("integration stopped at t = {}: {cause}", fmt_num(time)))))
        }
        Err(e) => return Err(e.into()),
    };
    let table = trajectory_table(&m, &report);
    emit(
        common,
        &table,
        "samples",
        json!({
            "masses": masses_json(&m),
            "energy_drift": report.energy_drift_rel,
            "lz_drift": report.lz_drift_rel,
        }),
    )?;
    failure.map_or(Ok(()), Err)
}
