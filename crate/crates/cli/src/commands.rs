//! Experiment drivers behind each subcommand.

use std::path::Path;
use std::time::Instant;

use noncollapse_core::noncollapse::{circumradius, inradius};
use noncollapse_core::{
    convergence_order, ratio_series, run, run_pair, Backend, DiscreteHypersurface, FlowTrajectory,
    OrientationCase, SpeedFunction, Termination,
};
use serde_json::{json, Map, Value};

use crate::config::{Command, ExperimentConfig, GeometrySpec};
use crate::error::{CliError, CliResult};
use crate::io::{
    create_dir, distance_table, field_table, fmt_f64, geometry_table, report_tables, series_table,
    write_json, Table, INDEX_HEADER,
};

/// Result of a completed command: its exit status, the summary written to
/// `summary.json`, and text for standard output.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub summary: Value,
    pub stdout: String,
}

#[derive(Default)]
struct Report {
    fields: Map<String, Value>,
    verdicts: Map<String, Value>,
    failed_verdicts: usize,
    flow_failed: bool,
    stdout: String,
}

impl Report {
    fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.fields.insert(key.to_string(), value.into());
    }

    /// Records `value <= bound`.
    fn at_most(&mut self, name: &str, value: f64, bound: f64) {
        self.verdict(name, value, bound, value <= bound, "at_most");
    }

    fn at_least(&mut self, name: &str, value: f64, bound: f64) {
        self.verdict(name, value, bound, value >= bound, "at_least");
    }

    fn verdict(&mut self, name: &str, value: f64, bound: f64, passed: bool, kind: &str) {
        if !passed {
            self.failed_verdicts += 1;
        }
        self.verdicts.insert(
            name.to_string(),
            json!({ "value": value, kind: bound, "passed": passed }),
        );
    }

    fn termination(&mut self, t: Termination) {
        self.set("termination", t.as_str());
        if !matches!(t, Termination::ReachedTEnd | Termination::CurvatureCap) {
            self.flow_failed = true;
        }
    }
}

/// Runs the configured command, writing its CSVs and `summary.json` into
/// the output directory.
pub fn run_command(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let start = Instant::now();
    create_dir(&cfg.output_dir)?;
    let mut rep = Report::default();
    rep.set("command", cfg.command.as_str());
    let speeds: Vec<String> = cfg.speeds.iter().map(|s| s.to_string()).collect();
    rep.set(
        "speed",
        if speeds.len() == 1 {
            Value::from(speeds[0].clone())
        } else {
            Value::from(speeds)
        },
    );
    if let Some(g) = &cfg.geometry {
        rep.set("geometry", g.describe());
    }
    rep.set("seed", cfg.seed);
    match cfg.command {
        Command::RunFlow => run_flow(cfg, &mut rep)?,
        Command::AnalyzeNoncollapse => analyze(cfg, &mut rep)?,
        Command::RunContainment => containment(cfg, &mut rep)?,
        Command::VerifyLinearized => linearized(cfg, &mut rep)?,
        Command::CheckSpeeds => check_speeds(cfg, &mut rep)?,
    }
    let passed = rep.failed_verdicts == 0;
    let exit_code = if rep.flow_failed {
        5
    } else if !passed {
        4
    } else {
        0
    };
    let mut summary = rep.fields;
    summary.insert("verdicts".into(), Value::Object(rep.verdicts));
    summary.insert("passed".into(), passed.into());
    summary.insert(
        "wall_clock_seconds".into(),
        start.elapsed().as_secs_f64().into(),
    );
    let summary = Value::Object(summary);
    write_json(&cfg.output_dir.join("summary.json"), &summary)?;
    Ok(Outcome {
        exit_code,
        summary,
        stdout: rep.stdout,
    })
}

fn dim(h: &DiscreteHypersurface) -> usize {
    match h.backend() {
        Backend::Curve => 1,
        Backend::Axisymmetric(_) => 2,
    }
}

/// `F(1, ..., 1)` in the dimension of `h`.
fn unit_speed(speed: &SpeedFunction, h: &DiscreteHypersurface) -> CliResult<f64> {
    Ok(speed.eval(&vec![1.0; dim(h)])?)
}

/// Radius at time `t` of a round body of initial radius `r0`; NaN after
/// extinction.
fn round_radius(r0: f64, f1: f64, t: f64) -> f64 {
    (r0 * r0 - 2.0 * f1 * t).sqrt()
}

fn speed_values(h: &DiscreteHypersurface, speed: &SpeedFunction) -> Vec<f64> {
    h.samples()
        .iter()
        .map(|s| speed.eval(s.kappa.as_slice()).unwrap_or(f64::NAN))
        .collect()
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

fn write_snapshots(dir: &Path, traj: &FlowTrajectory) -> CliResult<()> {
    let mut index = Table::new(&INDEX_HEADER);
    for (k, snap) in traj.snapshots.iter().enumerate() {
        let file = format!("snap_{k}.csv");
        geometry_table(&snap.surface).write(&dir.join(&file))?;
        let (lo, hi) = min_max(&speed_values(&snap.surface, &traj.speed));
        index.push(vec![
            fmt_f64(snap.t),
            file,
            fmt_f64(lo),
            fmt_f64(hi),
            fmt_f64(snap.surface.max_abs_kappa()),
        ]);
    }
    index.write(&dir.join("index.csv"))
}

fn flow_summary(rep: &mut Report, traj: &FlowTrajectory) {
    rep.termination(traj.termination);
    rep.set("steps", traj.steps);
    rep.set("snapshots", traj.snapshots.len());
    rep.set("t_final", traj.last().t);
}

fn run_flow(cfg: &ExperimentConfig, rep: &mut Report) -> CliResult<()> {
    let geometry = cfg.geometry();
    let h0 = geometry.build("geometry")?;
    let speed = cfg.speed();
    let traj = run(&h0, &cfg.flow_config(speed))?;
    write_snapshots(&cfg.output_dir, &traj)?;
    flow_summary(rep, &traj);
    let last = &traj.last().surface;
    let (center, r0) = geometry.round().unwrap_or((last.centroid(), f64::NAN));
    let (radius, deviation) = noncollapse_core::flow::radius_stats(last, center);
    rep.set("final_radius", radius);
    rep.set("final_radius_deviation", deviation);
    if r0.is_finite() && traj.termination == Termination::ReachedTEnd {
        let exact = round_radius(r0, unit_speed(&speed, &h0)?, traj.last().t);
        rep.set("exact_radius", exact);
        rep.at_most(
            "exact_radius_error",
            (radius - exact).abs() / exact,
            cfg.tolerances.exact,
        );
    }
    Ok(())
}

fn analyze(cfg: &ExperimentConfig, rep: &mut Report) -> CliResult<()> {
    let h0 = cfg.geometry().build("geometry")?;
    let speed = cfg.speed();
    let traj = run(&h0, &cfg.flow_config(speed))?;
    flow_summary(rep, &traj);
    let record = ratio_series(&traj, &speed, &cfg.analyzer)?;
    let dir = &cfg.output_dir;
    series_table(&record).write(&dir.join("series.csv"))?;
    if cfg.write_fields {
        let fields_dir = dir.join("fields");
        create_dir(&fields_dir)?;
        for (k, (field, f)) in record.fields.iter().zip(&record.speeds).enumerate() {
            field_table(field, f).write(&fields_dir.join(format!("field_{k}.csv")))?;
        }
    }
    let tol = &cfg.tolerances;
    let (sup0, inf0) = (record.initial_sup_ratio(), record.initial_inf_ratio());
    rep.set("initial_sup_ratio", sup0);
    rep.set("initial_inf_ratio", inf0);
    rep.set("defect_sup", record.defect_sup);
    rep.set("defect_inf", record.defect_inf);
    if let Some(field) = record.fields.first() {
        rep.set("exclusion_radius", field.exclusion_radius);
        rep.set("angles", field.angles);
    }
    let convexity = speed.convexity();
    rep.set("convexity", format!("{convexity:?}"));
    if convexity.is_concave() {
        rep.at_most(
            "defect_sup",
            record.defect_sup,
            tol.monotonicity * sup0.abs(),
        );
    }
    if convexity.is_convex() {
        rep.at_most(
            "defect_inf",
            record.defect_inf,
            tol.monotonicity * inf0.abs(),
        );
    }
    let (mut above, mut below) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for field in &record.fields {
        for i in 0..field.len() {
            above = above.max(field.kappa_max[i] - field.zbar[i]);
            below = below.max(field.zlow[i] - field.kappa_min[i]);
        }
    }
    rep.at_most("zbar_below_kappa_max", above, tol.invariant);
    rep.at_most("zlow_above_kappa_min", below, tol.invariant);

    let min_inf = record
        .rows
        .iter()
        .fold(f64::INFINITY, |m, r| m.min(r.inf_ratio));
    let strictly_convex = record
        .fields
        .iter()
        .all(|f| f.kappa_min.iter().all(|&k| k > 0.0));
    if convexity.is_convex() && strictly_convex && min_inf > 0.0 {
        let factor = 1.0 / min_inf;
        let excess = traj
            .snapshots
            .iter()
            .map(|s| circumradius(&s.surface) - factor * inradius(&s.surface))
            .fold(f64::NEG_INFINITY, f64::max);
        rep.set("circumradius_factor", factor);
        rep.at_most("circumradius_excess", excess, tol.circumradius_slack);
    }
    Ok(())
}

fn containment(cfg: &ExperimentConfig, rep: &mut Report) -> CliResult<()> {
    let spec = cfg
        .containment
        .as_ref()
        .ok_or_else(|| CliError::validation("containment", "missing containment section"))?;
    let a0 = cfg.geometry().build("geometry")?;
    let b0 = spec.partner.build("containment.partner")?;
    let speed = cfg.speed();
    let (traj, series) = run_pair(&a0, &b0, &cfg.flow_config(speed), spec.case)?;
    distance_table(&series).write(&cfg.output_dir.join("distance.csv"))?;
    rep.termination(traj.termination);
    rep.set("case", spec.case.as_str());
    rep.set("steps", traj.steps);
    let d0 = series.rows[0].closest.distance;
    let last = series
        .rows
        .last()
        .expect("the initial row is always present");
    rep.set("initial_distance", d0);
    rep.set("final_distance", last.closest.distance);
    rep.set("t_final", last.t);
    rep.set("max_decrease", series.max_decrease);
    rep.at_most(
        "distance_decrease",
        series.max_decrease,
        cfg.tolerances.monotonicity * d0,
    );
    if let (Some((ca, ra)), Some((cb, rb))) = (cfg.geometry().round(), spec.partner.round()) {
        let f1 = unit_speed(&speed, &a0)?;
        let gap = (ca[0] - cb[0]).hypot(ca[1] - cb[1]);
        let mut worst: f64 = 0.0;
        for row in &series.rows {
            let (ra, rb) = (round_radius(ra, f1, row.t), round_radius(rb, f1, row.t));
            let exact = match spec.case {
                OrientationCase::Disjoint => gap - ra - rb,
                OrientationCase::Nested => rb - ra - gap,
            };
            worst = worst.max((row.closest.distance - exact).abs() / exact);
        }
        rep.at_most("exact_distance_error", worst, cfg.tolerances.exact);
    }
    Ok(())
}

fn linearized(cfg: &ExperimentConfig, rep: &mut Report) -> CliResult<()> {
    let geometry: &GeometrySpec = cfg.geometry();
    let mut reports = Vec::new();
    for &speed in &cfg.speeds {
        for &label in &cfg.labels {
            let report = convergence_order(
                |n| geometry.generate(n),
                &cfg.flow_config(speed),
                label,
                &cfg.resolutions,
            )?;
            rep.at_least(
                &format!("order.{label}.{speed}"),
                report.order,
                cfg.tolerances.order,
            );
            reports.push(report);
        }
    }
    let (rows, orders) = report_tables(&reports);
    rows.write(&cfg.output_dir.join("residuals.csv"))?;
    orders.write(&cfg.output_dir.join("orders.csv"))?;
    rep.stdout.push_str(&orders.header.join(","));
    rep.stdout.push('\n');
    for row in &orders.rows {
        rep.stdout.push_str(&row.join(","));
        rep.stdout.push('\n');
    }
    Ok(())
}

pub const SPEED_CHECK_HEADER: [&str; 10] = [
    "speed",
    "samples",
    "max_homogeneity",
    "max_euler",
    "min_gradient",
    "max_gradient_error",
    "min_support",
    "max_support",
    "max_asymmetry",
    "convexity",
];

fn check_speeds(cfg: &ExperimentConfig, rep: &mut Report) -> CliResult<()> {
    let tol = &cfg.tolerances;
    let mut table = Table::new(&SPEED_CHECK_HEADER);
    for speed in &cfg.speeds {
        let c = speed.certify(cfg.samples, cfg.seed)?;
        let name = speed.to_string();
        let mut row = vec![name.clone(), c.samples.to_string()];
        row.extend(
            [
                c.max_homogeneity,
                c.max_euler,
                c.min_gradient,
                c.max_gradient_error,
                c.min_support,
                c.max_support,
                c.max_asymmetry,
            ]
            .map(fmt_f64),
        );
        row.push(format!("{:?}", c.convexity));
        table.push(row);
        rep.at_most(
            &format!("{name}.homogeneity"),
            c.max_homogeneity,
            tol.identity,
        );
        rep.at_most(&format!("{name}.euler"), c.max_euler, tol.identity);
        rep.at_most(
            &format!("{name}.gradient"),
            c.max_gradient_error,
            tol.gradient,
        );
        rep.verdict(
            &format!("{name}.monotone"),
            c.min_gradient,
            0.0,
            c.min_gradient > 0.0,
            "above",
        );
        if c.convexity.is_concave() {
            rep.at_least(
                &format!("{name}.support_concave"),
                c.min_support,
                -tol.identity,
            );
        }
        if c.convexity.is_convex() {
            rep.at_most(
                &format!("{name}.support_convex"),
                c.max_support,
                tol.identity,
            );
        }
    }
    table.write(&cfg.output_dir.join("speed_checks.csv"))
}
