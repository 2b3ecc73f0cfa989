//! Simultaneous evolution of two bodies and their minimal distance.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::{Advance, FlowConfig, Stepper, Termination};
use crate::geometry::{segments_intersect, Backend, DiscreteHypersurface};
use crate::vec::V2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrientationCase {
    Disjoint,
    /// `A` lies strictly inside `B`.
    Nested,
}

impl OrientationCase {
    pub fn as_str(self) -> &'static str {
        match self {
            OrientationCase::Disjoint => "disjoint",
            OrientationCase::Nested => "nested",
        }
    }
}

/// Closest pair of nodes. Surfaces of revolution share the axis, so the
/// closest pair always lies in a common meridian plane and positions are
/// reported there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinDistance {
    pub distance: f64,
    pub a_index: usize,
    pub b_index: usize,
    pub a_position: V2,
    pub b_position: V2,
}

fn same_backend_family(a: &DiscreteHypersurface, b: &DiscreteHypersurface) -> bool {
    matches!(
        (a.backend(), b.backend()),
        (Backend::Curve, Backend::Curve) | (Backend::Axisymmetric(_), Backend::Axisymmetric(_))
    )
}

/// Brute-force minimum over all node pairs, ties to the lowest `(i, j)`.
pub fn min_distance(a: &DiscreteHypersurface, b: &DiscreteHypersurface) -> Result<MinDistance> {
    if !same_backend_family(a, b) {
        return Err(Error::InvalidArgument(
            "distance between a curve and a surface of revolution".into(),
        ));
    }
    // For nodes at rotation angles phi_a, phi_b the squared distance is
    // dx^2 + ra^2 + rb^2 - 2 ra rb cos(phi_a - phi_b), least at equal angles.
    let nb = b.nodes();
    let (d2, i, j) = a
        .nodes()
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut best = (f64::INFINITY, i, 0);
            for (j, q) in nb.iter().enumerate() {
                let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
                let d2 = dx * dx + dy * dy;
                if d2 < best.0 {
                    best = (d2, i, j);
                }
            }
            best
        })
        .reduce(
            || (f64::INFINITY, usize::MAX, usize::MAX),
            |x, y| {
                if y.0 < x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) {
                    y
                } else {
                    x
                }
            },
        );
    Ok(MinDistance {
        distance: d2.sqrt(),
        a_index: i,
        b_index: j,
        a_position: a.nodes()[i],
        b_position: nb[j],
    })
}

fn polylines_cross(a: &DiscreteHypersurface, b: &DiscreteHypersurface) -> bool {
    fn segments(h: &DiscreteHypersurface) -> impl Iterator<Item = (V2, V2)> + '_ {
        let n = h.nodes().len();
        let m = if h.backend().is_periodic() { n } else { n - 1 };
        (0..m).map(move |k| (h.nodes()[k], h.nodes()[(k + 1) % n]))
    }
    segments(a).any(|(p, q)| segments(b).any(|(r, s)| segments_intersect(p, q, r, s)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSnapshot {
    pub t: f64,
    pub step: usize,
    pub a: DiscreteHypersurface,
    pub b: DiscreteHypersurface,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairTrajectory {
    pub snapshots: Vec<PairSnapshot>,
    pub case: OrientationCase,
    pub termination: Termination,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceRow {
    pub t: f64,
    pub closest: MinDistance,
    /// Decrease of `d_min` since the previous row; zero on the first.
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSeries {
    pub rows: Vec<DistanceRow>,
    /// Largest forward decrease of `d_min`, zero for a single row.
    pub max_decrease: f64,
}

impl DistanceSeries {
    fn push(&mut self, t: f64, closest: MinDistance) {
        let defect = match self.rows.last() {
            Some(prev) => prev.closest.distance - closest.distance,
            None => 0.0,
        };
        if self.rows.len() == 1 {
            self.max_decrease = defect;
        } else if !self.rows.is_empty() {
            self.max_decrease = self.max_decrease.max(defect);
        }
        self.rows.push(DistanceRow { t, closest, defect });
    }
}

fn check_case(
    a: &DiscreteHypersurface,
    b: &DiscreteHypersurface,
    case: OrientationCase,
) -> Result<()> {
    let inside = |outer: &DiscreteHypersurface, inner: &DiscreteHypersurface| {
        inner
            .nodes()
            .iter()
            .filter(|p| outer.contains_point(**p))
            .count()
    };
    let ok = match case {
        OrientationCase::Nested => inside(b, a) == a.resolution(),
        OrientationCase::Disjoint => inside(b, a) == 0 && inside(a, b) == 0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(match case {
            OrientationCase::Nested => "nested case requires A strictly inside B".into(),
            OrientationCase::Disjoint => {
                "disjoint case requires neither body inside the other".into()
            }
        }))
    }
}

/// Evolves `A` and `B` under the same flow with a common time step and
/// records their minimal distance at every snapshot.
pub fn run_pair(
    a0: &DiscreteHypersurface,
    b0: &DiscreteHypersurface,
    cfg: &FlowConfig,
    case: OrientationCase,
) -> Result<(PairTrajectory, DistanceSeries)> {
    let d0 = min_distance(a0, b0)?;
    let scale = a0.diameter().max(b0.diameter());
    if d0.distance <= 1e-12 * scale || polylines_cross(a0, b0) {
        return Err(Error::InitialContact {
            distance: d0.distance,
        });
    }
    check_case(a0, b0, case)?;
    let mut stepper = Stepper::new(vec![a0.clone(), b0.clone()], cfg)?;
    let mut snapshots = vec![PairSnapshot {
        t: 0.0,
        step: 0,
        a: a0.clone(),
        b: b0.clone(),
    }];
    let mut series = DistanceSeries {
        rows: Vec::new(),
        max_decrease: 0.0,
    };
    series.push(0.0, d0);
    let mut record = |stepper: &Stepper, snapshots: &mut Vec<PairSnapshot>| -> Result<()> {
        if snapshots.last().map(|s| s.step) == Some(stepper.steps) {
            return Ok(());
        }
        let (a, b) = (&stepper.surfaces[0], &stepper.surfaces[1]);
        series.push(stepper.t, min_distance(a, b)?);
        snapshots.push(PairSnapshot {
            t: stepper.t,
            step: stepper.steps,
            a: a.clone(),
            b: b.clone(),
        });
        Ok(())
    };
    let embedded = |s: &Stepper| !s.surfaces.iter().any(|h| h.self_intersects());
    let termination = loop {
        match stepper.advance() {
            Advance::Continue { snapshot_due } => {
                if snapshot_due {
                    if !embedded(&stepper) {
                        break Termination::SelfIntersection;
                    }
                    record(&stepper, &mut snapshots)?;
                }
            }
            Advance::Done(Termination::Instability) => break Termination::Instability,
            Advance::Done(reason) => {
                if !embedded(&stepper) {
                    break Termination::SelfIntersection;
                }
                record(&stepper, &mut snapshots)?;
                break reason;
            }
        }
    };
    Ok((
        PairTrajectory {
            snapshots,
            case,
            termination,
            steps: stepper.steps,
        },
        series,
    ))
}
