//! Interior and exterior sphere curvatures and the non-collapsing ratios.
//!
//! For a sample `x` with outward normal `nu` and any other point `y` of the
//! hypersurface, `Z(x, y) = 2 <X(x) - X(y), nu(x)> / |X(x) - X(y)|^2` is the
//! curvature of the sphere tangent at `x` through `y`. The interior sphere
//! curvature is the supremum of `Z` over `y`, extended to the diagonal by the
//! largest principal curvature; the exterior one is the infimum, extended by
//! the smallest.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::FlowTrajectory;
use crate::geometry::{Backend, DiscreteHypersurface, SurfaceSample};
use crate::speed::SpeedFunction;
use crate::vec::{dot3, norm2, norm3, point_segment_distance, sub2, sub3, V2, V3};

/// Where an extremal value of `Z` was attained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Witness {
    /// The principal-curvature value on the diagonal.
    Diagonal,
    /// Node `j` of a curve.
    Node(usize),
    /// Profile node `j` rotated to angle `2 pi m / M`.
    Grid { j: usize, m: usize },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Diagonal => write!(f, "diag"),
            Witness::Node(j) => write!(f, "{j}"),
            Witness::Grid { j, m } => write!(f, "{j}:{m}"),
        }
    }
}

impl FromStr for Witness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad witness `{s}`"));
        if s == "diag" {
            return Ok(Witness::Diagonal);
        }
        match s.split_once(':') {
            Some((j, m)) => Ok(Witness::Grid {
                j: j.parse().map_err(|_| bad())?,
                m: m.parse().map_err(|_| bad())?,
            }),
            None => Ok(Witness::Node(s.parse().map_err(|_| bad())?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerConfig {
    /// Pairs closer than `max(2, exclusion_factor) * max spacing` are
    /// replaced by the diagonal value.
    pub exclusion_factor: f64,
    /// Number of rotation angles for surfaces of revolution. `None` uses
    /// `N/2` rounded up to an even number.
    pub angles: Option<usize>,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        Self {
            exclusion_factor: 3.0,
            angles: None,
        }
    }
}

impl AnalyzerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.exclusion_factor > 0.0 && self.exclusion_factor.is_finite()) {
            return Err(Error::InvalidArgument(
                "exclusion_factor must be positive".into(),
            ));
        }
        if self.angles == Some(0) {
            return Err(Error::InvalidArgument("angles must be at least 1".into()));
        }
        Ok(())
    }

    pub fn exclusion_radius(&self, h: &DiscreteHypersurface) -> f64 {
        self.exclusion_factor.max(2.0) * h.max_spacing()
    }

    pub fn angles_for(&self, h: &DiscreteHypersurface) -> usize {
        self.angles
            .unwrap_or_else(|| default_angles(h.resolution()))
    }
}

fn default_angles(n: usize) -> usize {
    let m = n.div_ceil(2);
    m + m % 2
}

/// `Z(x, y)` for a sample `x` and a point `y` in space. Curves and profiles
/// place `x` at rotation angle zero, i.e. `(x, r, 0)`.
pub fn chordal_z(x: &SurfaceSample, y: V3) -> Result<f64> {
    let p = x.position3();
    let d = sub3(p, y);
    let dist = norm3(d);
    let scale = norm3(p).max(norm3(y)).max(dist);
    if dist <= 1e-12 * scale {
        return Err(Error::CoincidentPoints { distance: dist });
    }
    Ok(2.0 * dot3(d, x.normal3()) / (dist * dist))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extremum {
    Max,
    Min,
}

struct Search<'a> {
    h: &'a DiscreteHypersurface,
    exclusion: f64,
    cos: Vec<f64>,
    tiny: f64,
}

impl<'a> Search<'a> {
    fn new(h: &'a DiscreteHypersurface, exclusion: f64, angles: usize) -> Result<Self> {
        if !(exclusion >= 2.0 * h.max_spacing() * (1.0 - 1e-12)) {
            return Err(Error::InvalidArgument(format!(
                "exclusion radius {exclusion} is below twice the spacing {}",
                h.max_spacing()
            )));
        }
        if angles == 0 {
            return Err(Error::InvalidArgument("angles must be at least 1".into()));
        }
        let cos = (0..angles)
            .map(|m| (2.0 * PI * m as f64 / angles as f64).cos())
            .collect();
        Ok(Self {
            h,
            exclusion,
            cos,
            tiny: 1e-12 * h.diameter(),
        })
    }

    fn extremum(&self, i: usize, ext: Extremum) -> Result<(f64, Witness)> {
        let h = self.h;
        let s = &h.samples()[i];
        let mut best = match ext {
            Extremum::Max => s.kappa.max(),
            Extremum::Min => s.kappa.min(),
        };
        let mut witness = Witness::Diagonal;
        let mut offer = |z: f64, w: Witness| {
            let better = match ext {
                Extremum::Max => z > best,
                Extremum::Min => z < best,
            };
            if better {
                best = z;
                witness = w;
            }
        };
        let [xi, ri] = s.position;
        let [nx, nr] = s.normal;
        let excl2 = self.exclusion * self.exclusion;
        match h.backend() {
            Backend::Curve => {
                for (j, y) in h.samples().iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    let d = sub2(s.position, y.position);
                    let d2 = d[0] * d[0] + d[1] * d[1];
                    if h.profile_distance(i, j) <= self.exclusion && d2 <= excl2 {
                        continue;
                    }
                    if d2.sqrt() <= self.tiny {
                        return Err(Error::CoincidentPoints {
                            distance: d2.sqrt(),
                        });
                    }
                    offer(2.0 * (d[0] * nx + d[1] * nr) / d2, Witness::Node(j));
                }
            }
            Backend::Axisymmetric(_) => {
                let i_pole = h.is_pole(i);
                for (j, y) in h.samples().iter().enumerate() {
                    let [xj, rj] = y.position;
                    let dx = xi - xj;
                    let a = nx * dx + nr * ri;
                    let b = dx * dx + ri * ri + rj * rj;
                    let c = ri * rj;
                    let near = h.profile_distance(i, j) <= self.exclusion;
                    // On the axis every rotation angle gives the same point.
                    let angles = if i_pole || h.is_pole(j) {
                        1
                    } else {
                        self.cos.len()
                    };
                    for (m, &cm) in self.cos[..angles].iter().enumerate() {
                        let d2 = (b - 2.0 * c * cm).max(0.0);
                        if near && d2 <= excl2 {
                            continue;
                        }
                        if d2.sqrt() <= self.tiny {
                            return Err(Error::CoincidentPoints {
                                distance: d2.sqrt(),
                            });
                        }
                        offer(2.0 * (a - nr * rj * cm) / d2, Witness::Grid { j, m });
                    }
                }
            }
        }
        Ok((best, witness))
    }
}

/// Interior sphere curvature at sample `i`, with the default angular grid.
pub fn interior_sphere_curvature(
    h: &DiscreteHypersurface,
    i: usize,
    exclusion_radius: f64,
) -> Result<(f64, Witness)> {
    Search::new(h, exclusion_radius, default_angles(h.resolution()))?.extremum(i, Extremum::Max)
}

/// Exterior sphere curvature at sample `i`, with the default angular grid.
pub fn exterior_sphere_curvature(
    h: &DiscreteHypersurface,
    i: usize,
    exclusion_radius: f64,
) -> Result<(f64, Witness)> {
    Search::new(h, exclusion_radius, default_angles(h.resolution()))?.extremum(i, Extremum::Min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereCurvatureField {
    pub zbar: Vec<f64>,
    pub zlow: Vec<f64>,
    pub witness_bar: Vec<Witness>,
    pub witness_low: Vec<Witness>,
    pub kappa_max: Vec<f64>,
    pub kappa_min: Vec<f64>,
    pub exclusion_radius: f64,
    pub angles: usize,
}

impl SphereCurvatureField {
    pub fn compute(h: &DiscreteHypersurface, cfg: &AnalyzerConfig) -> Result<Self> {
        cfg.validate()?;
        let exclusion_radius = cfg.exclusion_radius(h);
        let angles = cfg.angles_for(h);
        let search = Search::new(h, exclusion_radius, angles)?;
        let rows = (0..h.resolution())
            .into_par_iter()
            .map(|i| {
                Ok((
                    search.extremum(i, Extremum::Max)?,
                    search.extremum(i, Extremum::Min)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let (bar, low): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        let (zbar, witness_bar) = bar.into_iter().unzip();
        let (zlow, witness_low) = low.into_iter().unzip();
        Ok(Self {
            zbar,
            zlow,
            witness_bar,
            witness_low,
            kappa_max: h.samples().iter().map(|s| s.kappa.max()).collect(),
            kappa_min: h.samples().iter().map(|s| s.kappa.min()).collect(),
            exclusion_radius,
            angles,
        })
    }

    pub fn len(&self) -> usize {
        self.zbar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zbar.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub sup_ratio: f64,
    pub inf_ratio: f64,
    pub min_f: f64,
    pub max_f: f64,
    /// `sup_ratio` minus its value at the previous row; zero on the first.
    pub defect_sup: f64,
    /// Previous `inf_ratio` minus this one; zero on the first.
    pub defect_inf: f64,
    pub sup_index: usize,
    pub inf_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRecord {
    pub rows: Vec<SeriesRow>,
    pub fields: Vec<SphereCurvatureField>,
    /// `F` at every sample of every snapshot.
    pub speeds: Vec<Vec<f64>>,
    /// Largest forward increase of `sup_ratio` between consecutive rows,
    /// zero for a single row.
    pub defect_sup: f64,
    /// Largest forward decrease of `inf_ratio`.
    pub defect_inf: f64,
}

impl SeriesRecord {
    pub fn initial_sup_ratio(&self) -> f64 {
        self.rows[0].sup_ratio
    }

    pub fn initial_inf_ratio(&self) -> f64 {
        self.rows[0].inf_ratio
    }
}

/// Evaluates `sup Zbar/F` and `inf Zlow/F` on every snapshot and the forward
/// monotonicity defects between consecutive snapshots.
pub fn ratio_series(
    traj: &FlowTrajectory,
    speed: &SpeedFunction,
    cfg: &AnalyzerConfig,
) -> Result<SeriesRecord> {
    let mut rows: Vec<SeriesRow> = Vec::with_capacity(traj.snapshots.len());
    let mut fields = Vec::with_capacity(traj.snapshots.len());
    let mut speeds = Vec::with_capacity(traj.snapshots.len());
    for (k, snap) in traj.snapshots.iter().enumerate() {
        let f = snap
            .surface
            .samples()
            .iter()
            .map(|s| speed.eval(s.kappa.as_slice()))
            .collect::<Result<Vec<f64>>>()?;
        let min_f = f.iter().copied().fold(f64::INFINITY, f64::min);
        let max_f = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(min_f > 0.0) {
            return Err(Error::NonPositiveSpeed { snapshot: k, min_f });
        }
        let field = SphereCurvatureField::compute(&snap.surface, cfg)?;
        let (mut sup_ratio, mut sup_index) = (f64::NEG_INFINITY, 0);
        let (mut inf_ratio, mut inf_index) = (f64::INFINITY, 0);
        for (i, fi) in f.iter().enumerate() {
            let up = field.zbar[i] / fi;
            let down = field.zlow[i] / fi;
            if up > sup_ratio {
                sup_ratio = up;
                sup_index = i;
            }
            if down < inf_ratio {
                inf_ratio = down;
                inf_index = i;
            }
        }
        let (defect_sup, defect_inf) = match rows.last() {
            Some(prev) => (sup_ratio - prev.sup_ratio, prev.inf_ratio - inf_ratio),
            None => (0.0, 0.0),
        };
        rows.push(SeriesRow {
            t: snap.t,
            sup_ratio,
            inf_ratio,
            min_f,
            max_f,
            defect_sup,
            defect_inf,
            sup_index,
            inf_index,
        });
        fields.push(field);
        speeds.push(f);
    }
    let worst = |get: fn(&SeriesRow) -> f64| {
        if rows.len() < 2 {
            0.0
        } else {
            rows[1..].iter().map(get).fold(f64::NEG_INFINITY, f64::max)
        }
    };
    let defect_sup = worst(|r| r.defect_sup);
    let defect_inf = worst(|r| r.defect_inf);
    Ok(SeriesRecord {
        rows,
        fields,
        speeds,
        defect_sup,
        defect_inf,
    })
}

fn witness_point(
    h: &DiscreteHypersurface,
    witness: Witness,
    cfg: &AnalyzerConfig,
) -> Result<(V3, V3)> {
    let at = |j: usize| {
        h.samples()
            .get(j)
            .ok_or_else(|| Error::InvalidArgument(format!("witness index {j} out of range")))
    };
    match (h.backend(), witness) {
        (Backend::Curve, Witness::Node(j)) => {
            let s = at(j)?;
            Ok((s.position3(), s.normal3()))
        }
        (Backend::Axisymmetric(_), Witness::Grid { j, m }) => {
            let s = at(j)?;
            let phi = 2.0 * PI * m as f64 / cfg.angles_for(h) as f64;
            let (c, sn) = (phi.cos(), phi.sin());
            Ok((
                [s.position[0], s.position[1] * c, s.position[1] * sn],
                [s.normal[0], s.normal[1] * c, s.normal[1] * sn],
            ))
        }
        (_, w) => Err(Error::InvalidArgument(format!(
            "witness `{w}` is not a grid point of this hypersurface"
        ))),
    }
}

/// Size of the tangential part, at the witness `y`, of
/// `nu(x) - d Z w` with `w = (X(x) - X(y)) / d`. Vanishes when the sphere
/// through `y` tangent at `x` is also tangent at `y`.
pub fn tangency_residual(
    h: &DiscreteHypersurface,
    i: usize,
    witness: Witness,
    cfg: &AnalyzerConfig,
) -> Result<f64> {
    let x = h
        .samples()
        .get(i)
        .ok_or_else(|| Error::InvalidArgument(format!("sample index {i} out of range")))?;
    let (y, nu_y) = witness_point(h, witness, cfg)?;
    let nu_x = x.normal3();
    let d = sub3(x.position3(), y);
    let d2 = dot3(d, d);
    if d2.sqrt() <= 1e-12 * h.diameter() {
        return Err(Error::CoincidentPoints {
            distance: d2.sqrt(),
        });
    }
    let k = 2.0 * dot3(d, nu_x) / d2;
    let v = [nu_x[0] - k * d[0], nu_x[1] - k * d[1], nu_x[2] - k * d[2]];
    let vn = dot3(v, nu_y);
    Ok(norm3([
        v[0] - vn * nu_y[0],
        v[1] - vn * nu_y[1],
        v[2] - vn * nu_y[2],
    ]))
}

/// Maximiser of a unimodal function on `[a, b]` by golden-section search.
fn golden_max(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..90 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn bounds(points: &[V2]) -> (V2, V2) {
    points.iter().fold(
        ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
        |(lo, hi), p| {
            (
                [lo[0].min(p[0]), lo[1].min(p[1])],
                [hi[0].max(p[0]), hi[1].max(p[1])],
            )
        },
    )
}

fn circle_through(a: V2, b: V2, c: V2) -> Option<(V2, f64)> {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let det = 2.0 * (bx * cy - by * cx);
    if det.abs() <= f64::EPSILON * (bx.abs() + by.abs()) * (cx.abs() + cy.abs()) {
        return None;
    }
    let (b2, c2) = (bx * bx + by * by, cx * cx + cy * cy);
    let u = [(cy * b2 - by * c2) / det, (bx * c2 - cx * b2) / det];
    Some(([a[0] + u[0], a[1] + u[1]], norm2(u)))
}

/// Smallest enclosing circle by Welzl's incremental algorithm.
fn enclosing_circle(points: &[V2]) -> f64 {
    let mut pts = points.to_vec();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(0));
    let outside = |p: V2, c: V2, r: f64| norm2(sub2(p, c)) > r * (1.0 + 1e-12);
    let mid = |a: V2, b: V2| {
        (
            [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0],
            norm2(sub2(a, b)) / 2.0,
        )
    };
    let (mut c, mut r) = (pts[0], 0.0);
    for i in 1..pts.len() {
        if !outside(pts[i], c, r) {
            continue;
        }
        (c, r) = (pts[i], 0.0);
        for j in 0..i {
            if !outside(pts[j], c, r) {
                continue;
            }
            (c, r) = mid(pts[i], pts[j]);
            for k in 0..j {
                if outside(pts[k], c, r) {
                    (c, r) = circle_through(pts[i], pts[j], pts[k]).unwrap_or_else(|| {
                        // Collinear: the farthest pair spans the circle.
                        [
                            mid(pts[i], pts[j]),
                            mid(pts[i], pts[k]),
                            mid(pts[j], pts[k]),
                        ]
                        .into_iter()
                        .fold(
                            ([0.0; 2], 0.0),
                            |best, cand| if cand.1 > best.1 { cand } else { best },
                        )
                    });
                }
            }
        }
    }
    r
}

fn distance_to_polyline(h: &DiscreteHypersurface, p: V2) -> f64 {
    let nodes = h.nodes();
    let n = nodes.len();
    let segments = if h.backend().is_periodic() { n } else { n - 1 };
    (0..segments)
        .map(|k| point_segment_distance(p, nodes[k], nodes[(k + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

fn signed_distance(h: &DiscreteHypersurface, p: V2) -> f64 {
    let d = distance_to_polyline(h, p);
    if h.contains_point(p) {
        d
    } else {
        -d
    }
}

/// Radius of the smallest ball containing the sampled hypersurface. For a
/// surface of revolution the centre lies on the axis.
pub fn circumradius(h: &DiscreteHypersurface) -> f64 {
    match h.backend() {
        Backend::Curve => enclosing_circle(h.nodes()),
        Backend::Axisymmetric(_) => {
            let (lo, hi) = bounds(h.nodes());
            let reach = |c: f64| {
                h.nodes()
                    .iter()
                    .map(|p| (p[0] - c).hypot(p[1]))
                    .fold(0.0, f64::max)
            };
            -golden_max(lo[0], hi[0], |c| -reach(c)).1
        }
    }
}

/// Radius of the largest ball inside the region bounded by the sampled
/// hypersurface, assuming that region is convex.
pub fn inradius(h: &DiscreteHypersurface) -> f64 {
    let (lo, hi) = bounds(h.nodes());
    match h.backend() {
        Backend::Curve => {
            golden_max(lo[0], hi[0], |x| {
                golden_max(lo[1], hi[1], |y| signed_distance(h, [x, y])).1
            })
            .1
        }
        Backend::Axisymmetric(_) => golden_max(lo[0], hi[0], |x| signed_distance(h, [x, 0.0])).1,
    }
}

/// Circumradius over inradius of a convex hypersurface.
pub fn circum_inradius_ratio(h: &DiscreteHypersurface) -> Result<f64> {
    for (index, s) in h.samples().iter().enumerate() {
        if !(s.kappa.min() > 0.0) {
            return Err(Error::NonConvexInput {
                index,
                kappa: s.kappa.min(),
            });
        }
    }
    Ok(circumradius(h) / inradius(h))
}
