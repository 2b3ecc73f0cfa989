//! Explicit time stepping of `dX/dt = -F(kappa) nu`.
//!
//! Nodes move purely along the normal, so between resampling events they are
//! material points; the linearized-flow verifier relies on this.

use crate::error::{Error, Result};
use crate::geometry::DiscreteHypersurface;
use crate::speed::SpeedFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub speed: SpeedFunction,
    /// Fraction of the parabolic stability limit, in `(0, 1]`.
    pub dt_safety: f64,
    pub t_end: f64,
    /// Resample to uniform arclength after this many steps.
    pub resample_every: usize,
    /// Stop once `max |kappa|` exceeds this. `None` means `1e3 / diameter`
    /// of the initial surface.
    pub kappa_cap: Option<f64>,
    pub snapshot_every: usize,
}

impl FlowConfig {
    pub fn new(speed: SpeedFunction, t_end: f64) -> Self {
        Self {
            speed,
            dt_safety: 0.2,
            t_end,
            resample_every: 10,
            kappa_cap: None,
            snapshot_every: 1,
        }
    }

    pub fn with_snapshot_every(mut self, steps: usize) -> Self {
        self.snapshot_every = steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return bad("dt_safety must lie in (0, 1]");
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be positive");
        }
        if self.resample_every == 0 || self.snapshot_every == 0 {
            return bad("resample_every and snapshot_every must be at least 1");
        }
        if let Some(cap) = self.kappa_cap {
            if !(cap > 0.0) {
                return bad("kappa_cap must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ReachedTEnd,
    CurvatureCap,
    ConeExit,
    SelfIntersection,
    Instability,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ReachedTEnd => "ReachedTEnd",
            Termination::CurvatureCap => "CurvatureCap",
            Termination::ConeExit => "ConeExit",
            Termination::SelfIntersection => "SelfIntersection",
            Termination::Instability => "Instability",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    /// Number of engine steps taken to reach this state.
    pub step: usize,
    /// Number of resampling events so far. Two snapshots with the same epoch
    /// have the same material nodes.
    pub epoch: usize,
    pub surface: DiscreteHypersurface,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrajectory {
    pub speed: SpeedFunction,
    pub snapshots: Vec<Snapshot>,
    pub termination: Termination,
    pub steps: usize,
}

impl FlowTrajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("trajectory has an initial snapshot")
    }
}

/// `safety * (min spacing)^2 / (2 max_{i,s} dF/dkappa_i)`.
pub fn cfl_dt(h: &DiscreteHypersurface, speed: &SpeedFunction, safety: f64) -> Result<f64> {
    let mut max_gradient = f64::NEG_INFINITY;
    for s in h.samples() {
        max_gradient = max_gradient.max(speed.evaluate(s.kappa.as_slice())?.max_gradient());
    }
    if !(max_gradient > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "speed `{speed}` has no positive diffusion coefficient on this surface"
        )));
    }
    let spacing = h.min_spacing();
    Ok(safety * spacing * spacing / (2.0 * max_gradient))
}

/// One forward-Euler step: every node moves by `-dt F nu`. Poles of
/// sphere-like profiles stay on the axis.
pub fn step(
    h: &DiscreteHypersurface,
    speed: &SpeedFunction,
    dt: f64,
) -> Result<DiscreteHypersurface> {
    let mut nodes = Vec::with_capacity(h.resolution());
    for (i, s) in h.samples().iter().enumerate() {
        let f = speed.eval(s.kappa.as_slice())?;
        let mut p = [
            s.position[0] - dt * f * s.normal[0],
            s.position[1] - dt * f * s.normal[1],
        ];
        if h.is_pole(i) {
            p[1] = 0.0;
        }
        nodes.push(p);
    }
    if nodes.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::Instability { step: 0 });
    }
    DiscreteHypersurface::from_nodes(h.backend(), nodes)
}

/// Advances one or more surfaces with a shared time step. Used by [`run`]
/// and by the containment driver.
pub(crate) struct Stepper {
    pub surfaces: Vec<DiscreteHypersurface>,
    pub t: f64,
    pub steps: usize,
    pub epoch: usize,
    cap: f64,
    cfg: FlowConfig,
}

pub(crate) enum Advance {
    Continue { snapshot_due: bool },
    Done(Termination),
}

impl Stepper {
    pub fn new(surfaces: Vec<DiscreteHypersurface>, cfg: &FlowConfig) -> Result<Self> {
        cfg.validate()?;
        for h in &surfaces {
            for s in h.samples() {
                cfg.speed.eval(s.kappa.as_slice())?;
            }
        }
        let diameter = surfaces.iter().map(|h| h.diameter()).fold(0.0, f64::max);
        Ok(Self {
            surfaces,
            t: 0.0,
            steps: 0,
            epoch: 0,
            cap: cfg.kappa_cap.unwrap_or(1e3 / diameter),
            cfg: cfg.clone(),
        })
    }

    pub fn advance(&mut self) -> Advance {
        let cfg = &self.cfg;
        let remaining = cfg.t_end - self.t;
        if remaining <= 1e-12 * cfg.t_end {
            return Advance::Done(Termination::ReachedTEnd);
        }
        let mut dt = f64::INFINITY;
        for h in &self.surfaces {
            match cfl_dt(h, &cfg.speed, cfg.dt_safety) {
                Ok(d) => dt = dt.min(d),
                Err(Error::ConeViolation { .. }) => return Advance::Done(Termination::ConeExit),
                Err(_) => return Advance::Done(Termination::Instability),
            }
        }
        let last = dt >= remaining;
        if last {
            dt = remaining;
        }
        let mut next = Vec::with_capacity(self.surfaces.len());
        for h in &self.surfaces {
            match step(h, &cfg.speed, dt) {
                Ok(n) => next.push(n),
                Err(Error::ConeViolation { .. }) => return Advance::Done(Termination::ConeExit),
                Err(_) => return Advance::Done(Termination::Instability),
            }
        }
        self.steps += 1;
        self.t = if last { cfg.t_end } else { self.t + dt };
        if self.steps.is_multiple_of(cfg.resample_every) {
            let mut resampled = Vec::with_capacity(next.len());
            for h in &next {
                match h.resampled() {
                    Ok(r) => resampled.push(r),
                    Err(_) => return Advance::Done(Termination::Instability),
                }
            }
            next = resampled;
            self.epoch += 1;
        }
        self.surfaces = next;
        if self.surfaces.iter().any(|h| h.max_abs_kappa() > self.cap) {
            return Advance::Done(Termination::CurvatureCap);
        }
        Advance::Continue {
            snapshot_due: self.steps.is_multiple_of(cfg.snapshot_every),
        }
    }
}

/// Runs the flow until `t_end` or a stopping criterion. The returned
/// trajectory always holds the initial state; the final state is recorded
/// unless it is non-embedded or non-finite.
pub fn run(h0: &DiscreteHypersurface, cfg: &FlowConfig) -> Result<FlowTrajectory> {
    let mut stepper = Stepper::new(vec![h0.clone()], cfg)?;
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        step: 0,
        epoch: 0,
        surface: h0.clone(),
    }];
    let record = |stepper: &Stepper, snapshots: &mut Vec<Snapshot>| {
        if snapshots.last().map(|s| s.step) != Some(stepper.steps) {
            snapshots.push(Snapshot {
                t: stepper.t,
                step: stepper.steps,
                epoch: stepper.epoch,
                surface: stepper.surfaces[0].clone(),
            });
        }
    };
    let termination = loop {
        match stepper.advance() {
            Advance::Continue { snapshot_due } => {
                if snapshot_due {
                    if stepper.surfaces[0].self_intersects() {
                        break Termination::SelfIntersection;
                    }
                    record(&stepper, &mut snapshots);
                }
            }
            Advance::Done(Termination::Instability) => break Termination::Instability,
            Advance::Done(reason) => {
                if stepper.surfaces[0].self_intersects() {
                    break Termination::SelfIntersection;
                }
                record(&stepper, &mut snapshots);
                break reason;
            }
        }
    };
    Ok(FlowTrajectory {
        speed: cfg.speed,
        snapshots,
        termination,
        steps: stepper.steps,
    })
}

/// Mean distance of the nodes from `center` and its maximal deviation.
pub fn radius_stats(h: &DiscreteHypersurface, center: [f64; 2]) -> (f64, f64) {
    let radii: Vec<f64> = h
        .nodes()
        .iter()
        .map(|p| (p[0] - center[0]).hypot(p[1] - center[1]))
        .collect();
    let mean = radii.iter().sum::<f64>() / radii.len() as f64;
    let dev = radii.iter().fold(0.0_f64, |m, r| m.max((r - mean).abs()));
    (mean, dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{circle, ellipse, sphere};
    use std::f64::consts::PI;

    #[test]
    fn cfl_examples() {
        let c = circle([0.0, 0.0], 1.0, 256).unwrap();
        let dt = cfl_dt(&c, &SpeedFunction::sum(), 0.2).unwrap();
        let hand = 0.2 * (2.0 * PI / 256.0).powi(2) / 2.0;
        assert!((dt / hand - 1.0).abs() < 1e-4, "{dt} vs {hand}");
        assert!((dt - 6.0e-5).abs() < 1e-6);
        let half = cfl_dt(&c, &SpeedFunction::sum(), 0.1).unwrap();
        assert!((half - dt / 2.0).abs() < 1e-18);

        let s = sphere(1.0, 0.0, 256).unwrap();
        let dt = cfl_dt(&s, &SpeedFunction::harmonic_mean(), 0.2).unwrap();
        // dF/dkappa_i = 1/2 at umbilic points.
        let hand = 0.2 * (PI / 255.0).powi(2);
        assert!((dt / hand - 1.0).abs() < 1e-3, "{dt} vs {hand}");
    }

    #[test]
    fn single_step_matches_exact_speed() {
        let r = 1.3;
        let dt = 1e-4;
        let c = circle([0.0, 0.0], r, 4096).unwrap();
        let next = step(&c, &SpeedFunction::sum(), dt).unwrap();
        for p in next.nodes() {
            assert!((p[0].hypot(p[1]) - (r - dt / r)).abs() < 1e-6 * dt);
        }
        let s = sphere(r, 0.0, 256).unwrap();
        let next = step(&s, &SpeedFunction::sum(), dt).unwrap();
        for p in next.nodes() {
            assert!((p[0].hypot(p[1]) - (r - 2.0 * dt / r)).abs() < 1e-4 * dt);
        }
        assert_eq!(next.nodes()[0][1], 0.0);
        assert_eq!(next.nodes()[255][1], 0.0);
        let same = step(&s, &SpeedFunction::sum(), 0.0).unwrap();
        assert_eq!(same.nodes(), s.nodes());
    }

    #[test]
    fn step_rejects_cone_exit() {
        let e = ellipse(2.0, 1.0, 64).unwrap();
        let f = SpeedFunction::harmonic_mean();
        assert!(step(&e, &f, 1e-4).is_ok());
        let nodes: Vec<[f64; 2]> = (0..64)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 64.0;
                let r = 1.0 + 0.4 * (3.0 * t).cos();
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        let wavy = crate::geometry::DiscreteHypersurface::from_nodes(
            crate::geometry::Backend::Curve,
            nodes,
        )
        .unwrap();
        assert!(matches!(
            step(&wavy, &f, 1e-4),
            Err(Error::ConeViolation { .. })
        ));
    }

    fn final_radius(h0: DiscreteHypersurface, speed: SpeedFunction, t_end: f64) -> f64 {
        let traj = run(
            &h0,
            &FlowConfig::new(speed, t_end).with_snapshot_every(1000),
        )
        .unwrap();
        assert_eq!(traj.termination, Termination::ReachedTEnd);
        assert_eq!(traj.last().t, t_end);
        radius_stats(&traj.last().surface, [0.0, 0.0]).0
    }

    #[test]
    fn shrinking_circle_and_spheres() {
        let r = final_radius(
            circle([0.0, 0.0], 1.0, 256).unwrap(),
            SpeedFunction::sum(),
            0.25,
        );
        assert!((r - 0.5_f64.sqrt()).abs() < 5e-3, "{r}");
        let r = final_radius(sphere(1.0, 0.0, 256).unwrap(), SpeedFunction::sum(), 0.1);
        assert!((r - 0.6_f64.sqrt()).abs() < 5e-3, "{r}");
        let r = final_radius(
            sphere(1.0, 0.0, 256).unwrap(),
            SpeedFunction::harmonic_mean(),
            0.2,
        );
        assert!((r - 0.6_f64.sqrt()).abs() < 5e-3, "{r}");
    }

    #[test]
    fn exact_solution_converges() {
        let err = |n| {
            let r = final_radius(
                circle([0.0, 0.0], 1.0, n).unwrap(),
                SpeedFunction::sum(),
                0.25,
            );
            (r - 0.5_f64.sqrt()).abs()
        };
        let (e64, e128) = (err(64), err(128));
        assert!(e64 / e128 >= 3.0, "{e64} {e128}");
    }

    #[test]
    fn round_shapes_stay_round_and_embedded() {
        for h0 in [
            circle([0.5, -0.25], 1.0, 128).unwrap(),
            sphere(1.0, 0.5, 128).unwrap(),
        ] {
            let center = if h0.is_sphere_like() {
                [0.5, 0.0]
            } else {
                [0.5, -0.25]
            };
            let traj = run(
                &h0,
                &FlowConfig::new(SpeedFunction::norm(), 0.1).with_snapshot_every(50),
            )
            .unwrap();
            assert!(traj.snapshots.len() > 3);
            for w in traj.snapshots.windows(2) {
                assert!(w[1].t > w[0].t);
            }
            for snap in &traj.snapshots {
                let (mean, dev) = radius_stats(&snap.surface, center);
                assert!(dev <= 1e-3 * mean);
                assert!(!snap.surface.self_intersects());
            }
        }
    }

    #[test]
    fn curvature_cap_stops_the_run() {
        let h0 = circle([0.0, 0.0], 1.0, 64).unwrap();
        let mut cfg = FlowConfig::new(SpeedFunction::sum(), 1.0);
        cfg.kappa_cap = Some(3.0);
        let traj = run(&h0, &cfg).unwrap();
        assert_eq!(traj.termination, Termination::CurvatureCap);
        let (r, _) = radius_stats(&traj.last().surface, [0.0, 0.0]);
        assert!(r < 1.0 / 3.0 + 2e-3 && r > 0.3, "{r}");
    }

    #[test]
    fn resampling_epochs_are_recorded() {
        let h0 = ellipse(2.0, 1.0, 64).unwrap();
        let mut cfg = FlowConfig::new(SpeedFunction::sum(), 0.01);
        cfg.resample_every = 4;
        let traj = run(&h0, &cfg).unwrap();
        for s in &traj.snapshots {
            assert_eq!(s.epoch, s.step / 4);
        }
    }

    #[test]
    fn invalid_config() {
        let h0 = circle([0.0, 0.0], 1.0, 64).unwrap();
        let mut cfg = FlowConfig::new(SpeedFunction::sum(), 0.1);
        cfg.dt_safety = 1.5;
        assert!(run(&h0, &cfg).is_err());
        let cfg = FlowConfig::new(SpeedFunction::sum(), -1.0);
        assert!(run(&h0, &cfg).is_err());
    }
}
