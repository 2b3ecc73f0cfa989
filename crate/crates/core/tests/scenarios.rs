use noncollapse_core::geometry::{dumbbell, ellipse};
use noncollapse_core::{run, FlowConfig, SpeedFunction, Termination};

fn roundness(h: &noncollapse_core::DiscreteHypersurface) -> f64 {
    let c = h.centroid();
    let radii: Vec<f64> = h
        .nodes()
        .iter()
        .map(|p| (p[0] - c[0]).hypot(p[1] - c[1]))
        .collect();
    let max = radii.iter().cloned().fold(f64::MIN, f64::max);
    let min = radii.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

#[test]
fn ellipse_rounds_out_and_stays_embedded() {
    let h = ellipse(2.0, 1.0, 128).unwrap();
    let cfg = FlowConfig::new(SpeedFunction::sum(), 0.8).with_snapshot_every(200);
    let traj = run(&h, &cfg).unwrap();
    assert_eq!(traj.termination, Termination::ReachedTEnd);
    let ratios: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|s| roundness(&s.surface))
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{ratios:?}");
    assert!(*ratios.last().unwrap() < 1.2, "{ratios:?}");
    assert!(traj.snapshots.iter().all(|s| !s.surface.self_intersects()));
}

#[test]
fn dumbbell_neck_pinches_before_the_bulbs() {
    let h = dumbbell(1.0, 0.3, 0.5, 128).unwrap();
    let mut cfg = FlowConfig::new(SpeedFunction::sum(), 1.0).with_snapshot_every(50);
    cfg.kappa_cap = Some(30.0);
    let traj = run(&h, &cfg).unwrap();
    assert_eq!(traj.termination, Termination::CurvatureCap);
    let last = &traj.last().surface;
    let neck = last
        .nodes()
        .iter()
        .filter(|p| p[0].abs() < 0.25)
        .map(|p| p[1])
        .fold(f64::MAX, f64::min);
    let bulb = last.nodes().iter().map(|p| p[1]).fold(0.0, f64::max);
    assert!(neck < 0.1 && bulb > 0.5, "neck {neck}, bulb {bulb}");
}
