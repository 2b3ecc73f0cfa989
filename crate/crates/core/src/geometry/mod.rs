//! Discrete embedded hypersurfaces: closed plane curves and surfaces of
//! revolution generated by a profile in the `(x, r)` half-plane.
//!
//! Sign conventions: the normal points outward and a circle or sphere of
//! radius `rho` has all principal curvatures `1/rho > 0`. Curves are stored
//! counterclockwise, profiles so that the closed polygon (profile plus the
//! axis segment for sphere-like profiles) is counterclockwise.
//!
//! Derivatives are second-order centered differences in the node index.
//! The curvature formulas are invariant under reparametrization, so no
//! explicit arclength normalization of the index is needed. At the poles of a
//! sphere-like profile a ghost node is obtained by reflecting the neighbour
//! across the axis (`x` even, `r` odd), which encodes the perpendicular axis
//! crossing. The rotational curvature `-x'/r` is undefined there; its pole
//! value is the even quadratic extrapolation from the two nearest nodes. In
//! the limit it equals the profile curvature, and unlike a copy of the
//! profile value its discretization error continues smoothly onto the axis.

mod generators;
mod intersect;
mod spline;

use std::f64::consts::PI;

pub use generators::{circle, dumbbell, ellipse, ellipsoid, sphere, torus};
pub use intersect::segments_intersect;

use crate::error::{Error, Result};
pub use crate::speed::PrincipalCurvatures;
use crate::vec::{cross2, dot2, norm2, sub2, V2, V3};

/// Smallest admissible resolution.
pub const MIN_NODES: usize = 16;
/// Adjacent nodes closer than this multiple of the diameter are degenerate.
pub const DEGENERATE_SPACING: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Both profile endpoints on the axis.
    SphereLike,
    /// Closed profile, `r > 0` everywhere.
    TorusLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Curve,
    Axisymmetric(Topology),
}

impl Backend {
    /// Whether the node ring closes on itself.
    pub fn is_periodic(self) -> bool {
        !matches!(self, Backend::Axisymmetric(Topology::SphereLike))
    }
}

/// Closed counterclockwise polyline in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneCurve {
    points: Vec<V2>,
}

impl PlaneCurve {
    /// Validates the polyline and reverses it if it is clockwise.
    pub fn new(mut points: Vec<V2>) -> Result<Self> {
        validate_nodes(Backend::Curve, &points)?;
        if signed_area(&points) < 0.0 {
            points.reverse();
        }
        if polyline_self_intersects(&points, true) {
            return Err(Error::InvalidGeometry("curve is not simple".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[V2] {
        &self.points
    }
}

/// Profile `(x, r)` of a surface of revolution about the `x` axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisymmetricProfile {
    profile: Vec<V2>,
    topology: Topology,
}

impl AxisymmetricProfile {
    pub fn new(mut profile: Vec<V2>, topology: Topology) -> Result<Self> {
        let backend = Backend::Axisymmetric(topology);
        validate_nodes(backend, &profile)?;
        if signed_area(&profile) < 0.0 {
            profile.reverse();
        }
        if polyline_self_intersects(&profile, backend.is_periodic()) {
            return Err(Error::InvalidGeometry("profile is not simple".into()));
        }
        Ok(Self { profile, topology })
    }

    pub fn profile(&self) -> &[V2] {
        &self.profile
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }
}

/// Geometry at one node.
///
/// `position` and `normal` live in the generating plane: `(x, y)` for a
/// curve, `(x, r)` for a profile, where the node is understood at rotation
/// angle zero. The coordinate directions are principal directions; for a
/// profile `kappa = (meridian, rotational)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub position: V2,
    pub normal: V2,
    pub kappa: PrincipalCurvatures,
    /// Arclength `ds` for curves, area element `2 pi r ds` for surfaces.
    pub weight: f64,
}

impl SurfaceSample {
    pub fn position3(&self) -> V3 {
        [self.position[0], self.position[1], 0.0]
    }

    pub fn normal3(&self) -> V3 {
        [self.normal[0], self.normal[1], 0.0]
    }
}

/// A sampled hypersurface together with its derived per-node geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteHypersurface {
    backend: Backend,
    nodes: Vec<V2>,
    samples: Vec<SurfaceSample>,
    /// Cumulative chord length at each node.
    arclength: Vec<f64>,
    /// Total length of the generating polyline, closing segment included
    /// when periodic.
    length: f64,
}

impl DiscreteHypersurface {
    pub fn from_curve(curve: PlaneCurve) -> Result<Self> {
        Self::from_nodes(Backend::Curve, curve.points)
    }

    pub fn from_profile(profile: AxisymmetricProfile) -> Result<Self> {
        Self::from_nodes(Backend::Axisymmetric(profile.topology), profile.profile)
    }

    /// Builds derived geometry without the orientation and simplicity checks
    /// of the validating constructors. The flow uses this to keep node
    /// identity between steps.
    pub fn from_nodes(backend: Backend, nodes: Vec<V2>) -> Result<Self> {
        validate_nodes(backend, &nodes)?;
        let samples = compute_samples(backend, &nodes);
        let (arclength, length) = cumulative_length(&nodes, backend.is_periodic());
        Ok(Self {
            backend,
            nodes,
            samples,
            arclength,
            length,
        })
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn nodes(&self) -> &[V2] {
        &self.nodes
    }

    pub fn samples(&self) -> &[SurfaceSample] {
        &self.samples
    }

    pub fn resolution(&self) -> usize {
        self.nodes.len()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn arclength(&self) -> &[f64] {
        &self.arclength
    }

    pub fn is_sphere_like(&self) -> bool {
        self.backend == Backend::Axisymmetric(Topology::SphereLike)
    }

    /// True for the two axis nodes of a sphere-like profile.
    pub fn is_pole(&self, i: usize) -> bool {
        self.is_sphere_like() && (i == 0 || i + 1 == self.nodes.len())
    }

    /// Distance along the generating polyline between nodes `i` and `j`.
    pub fn profile_distance(&self, i: usize, j: usize) -> f64 {
        let d = (self.arclength[i] - self.arclength[j]).abs();
        if self.backend.is_periodic() {
            d.min(self.length - d)
        } else {
            d
        }
    }

    fn segment_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.nodes.len();
        let segments = if self.backend.is_periodic() { n } else { n - 1 };
        (0..segments).map(move |i| norm2(sub2(self.nodes[(i + 1) % n], self.nodes[i])))
    }

    pub fn max_spacing(&self) -> f64 {
        self.segment_lengths().fold(0.0, f64::max)
    }

    pub fn min_spacing(&self) -> f64 {
        self.segment_lengths().fold(f64::INFINITY, f64::min)
    }

    /// Diagonal of the bounding box of the embedded hypersurface.
    pub fn diameter(&self) -> f64 {
        diameter(self.backend, &self.nodes)
    }

    pub fn max_abs_kappa(&self) -> f64 {
        self.samples
            .iter()
            .fold(0.0, |m, s| f64::max(m, s.kappa.max_abs()))
    }

    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }

    /// Centroid of the nodes in the generating plane. For profiles only the
    /// axial coordinate is meaningful; `r` is reported as zero.
    pub fn centroid(&self) -> V2 {
        let n = self.nodes.len() as f64;
        let (sx, sy) = self
            .nodes
            .iter()
            .fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
        match self.backend {
            Backend::Curve => [sx / n, sy / n],
            Backend::Axisymmetric(_) => [sx / n, 0.0],
        }
    }

    /// A copy moved by `offset`; profiles may only move along the axis.
    pub fn translated(&self, offset: V2) -> Result<Self> {
        if matches!(self.backend, Backend::Axisymmetric(_)) && offset[1] != 0.0 {
            return Err(Error::InvalidArgument(
                "surfaces of revolution can only be translated along the axis".into(),
            ));
        }
        let nodes = self
            .nodes
            .iter()
            .map(|p| [p[0] + offset[0], p[1] + offset[1]])
            .collect();
        Self::from_nodes(self.backend, nodes)
    }

    /// A copy scaled about the origin by `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be positive, got {lambda}"
            )));
        }
        let nodes = self
            .nodes
            .iter()
            .map(|p| [lambda * p[0], lambda * p[1]])
            .collect();
        Self::from_nodes(self.backend, nodes)
    }

    /// Redistributes the nodes uniformly in arclength; see [`resample_arclength`].
    pub fn resampled(&self) -> Result<Self> {
        resample_arclength(self)
    }

    /// True if the generating polyline has two intersecting non-adjacent
    /// segments.
    pub fn self_intersects(&self) -> bool {
        polyline_self_intersects(&self.nodes, self.backend.is_periodic())
    }

    /// Whether `p` (in the generating plane) lies strictly inside the region
    /// bounded by the curve, or by the profile closed along the axis.
    pub fn contains_point(&self, p: V2) -> bool {
        // Even-odd rule. For sphere-like profiles the closing axis segment
        // is included implicitly by the wrap-around edge.
        let n = self.nodes.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.nodes[i];
            let b = self.nodes[(i + 1) % n];
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        if matches!(self.backend, Backend::Axisymmetric(_)) {
            // The half-plane picture is mirrored about the axis.
            return p[1] >= 0.0 && inside || p[1] < 0.0 && self.contains_point([p[0], -p[1]]);
        }
        inside
    }
}

/// Per-node geometry of a plane curve.
pub fn curve_geometry(curve: &PlaneCurve) -> Result<Vec<SurfaceSample>> {
    validate_nodes(Backend::Curve, &curve.points)?;
    Ok(compute_samples(Backend::Curve, &curve.points))
}

/// Per-node geometry of a surface of revolution.
pub fn axisym_geometry(profile: &AxisymmetricProfile) -> Result<Vec<SurfaceSample>> {
    let backend = Backend::Axisymmetric(profile.topology);
    validate_nodes(backend, &profile.profile)?;
    Ok(compute_samples(backend, &profile.profile))
}

/// `(previous, current, next)` node with the periodic wrap or the pole
/// reflection applied.
pub(crate) fn stencil(backend: Backend, nodes: &[V2], i: usize) -> (V2, V2, V2) {
    let n = nodes.len();
    let cur = nodes[i];
    if backend.is_periodic() {
        return (nodes[(i + n - 1) % n], cur, nodes[(i + 1) % n]);
    }
    let prev = if i == 0 {
        [nodes[1][0], -nodes[1][1]]
    } else {
        nodes[i - 1]
    };
    let next = if i + 1 == n {
        [nodes[n - 2][0], -nodes[n - 2][1]]
    } else {
        nodes[i + 1]
    };
    (prev, cur, next)
}

fn compute_samples(backend: Backend, nodes: &[V2]) -> Vec<SurfaceSample> {
    let n = nodes.len();
    let mut samples: Vec<SurfaceSample> = (0..n)
        .map(|i| {
            let (prev, cur, next) = stencil(backend, nodes, i);
            let d1 = [(next[0] - prev[0]) / 2.0, (next[1] - prev[1]) / 2.0];
            let d2 = [
                next[0] - 2.0 * cur[0] + prev[0],
                next[1] - 2.0 * cur[1] + prev[1],
            ];
            let speed = norm2(d1);
            let normal = [d1[1] / speed, -d1[0] / speed];
            let k1 = cross2(d1, d2) / (speed * speed * speed);
            let ds_prev = norm2(sub2(cur, prev));
            let ds_next = norm2(sub2(next, cur));
            match backend {
                Backend::Curve => SurfaceSample {
                    position: cur,
                    normal,
                    kappa: PrincipalCurvatures::curve(k1),
                    weight: 0.5 * (ds_prev + ds_next),
                },
                Backend::Axisymmetric(_) => {
                    let pole = cur[1] == 0.0;
                    let (k2, weight) = if pole {
                        // Replaced by the extrapolated value below.
                        let cap = 0.5 * if i == 0 { ds_next } else { ds_prev };
                        (k1, PI * cap * cap)
                    } else {
                        (
                            -d1[0] / (speed * cur[1]),
                            2.0 * PI * cur[1] * 0.5 * (ds_prev + ds_next),
                        )
                    };
                    SurfaceSample {
                        position: cur,
                        normal,
                        kappa: PrincipalCurvatures::surface(k1, k2),
                        weight,
                    }
                }
            }
        })
        .collect();
    if backend == Backend::Axisymmetric(Topology::SphereLike) {
        for (pole, a, b) in [(0, 1, 2), (n - 1, n - 2, n - 3)] {
            let s1 = norm2(sub2(nodes[a], nodes[pole]));
            let s2 = s1 + norm2(sub2(nodes[b], nodes[a]));
            let (ka, kb) = (
                samples[a].kappa.as_slice()[1],
                samples[b].kappa.as_slice()[1],
            );
            let k2 = (s2 * s2 * ka - s1 * s1 * kb) / (s2 * s2 - s1 * s1);
            let k1 = samples[pole].kappa.as_slice()[0];
            samples[pole].kappa = PrincipalCurvatures::surface(k1, k2);
        }
    }
    samples
}

fn cumulative_length(nodes: &[V2], periodic: bool) -> (Vec<f64>, f64) {
    let mut s = Vec::with_capacity(nodes.len());
    let mut acc = 0.0;
    s.push(0.0);
    for w in nodes.windows(2) {
        acc += norm2(sub2(w[1], w[0]));
        s.push(acc);
    }
    if periodic {
        acc += norm2(sub2(nodes[0], nodes[nodes.len() - 1]));
    }
    (s, acc)
}

fn diameter(backend: Backend, nodes: &[V2]) -> f64 {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in nodes {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    if matches!(backend, Backend::Axisymmetric(_)) {
        // The surface spans [-max r, max r] across the axis.
        lo[1] = -hi[1];
    }
    norm2(sub2(hi, lo))
}

fn signed_area(points: &[V2]) -> f64 {
    let n = points.len();
    0.5 * (0..n)
        .map(|i| cross2(points[i], points[(i + 1) % n]))
        .sum::<f64>()
}

fn validate_nodes(backend: Backend, nodes: &[V2]) -> Result<()> {
    let n = nodes.len();
    if n < MIN_NODES {
        return Err(Error::InvalidGeometry(format!(
            "{n} nodes, at least {MIN_NODES} required"
        )));
    }
    if let Some(i) = nodes
        .iter()
        .position(|p| !p[0].is_finite() || !p[1].is_finite())
    {
        return Err(Error::InvalidGeometry(format!("node {i} is not finite")));
    }
    if let Backend::Axisymmetric(topology) = backend {
        for (i, p) in nodes.iter().enumerate() {
            let endpoint = i == 0 || i + 1 == n;
            let ok = match topology {
                Topology::SphereLike if endpoint => p[1] == 0.0,
                _ => p[1] > 0.0,
            };
            if !ok {
                return Err(Error::AxisViolation { index: i, r: p[1] });
            }
        }
    }
    let threshold = DEGENERATE_SPACING * diameter(backend, nodes);
    let segments = if backend.is_periodic() { n } else { n - 1 };
    for i in 0..segments {
        let j = (i + 1) % n;
        if norm2(sub2(nodes[j], nodes[i])) < threshold {
            return Err(Error::DegenerateSpacing {
                index: i,
                next: j,
                threshold,
            });
        }
    }
    Ok(())
}

/// O(N^2) test over non-adjacent segment pairs with a bounding-box prefilter.
pub(crate) fn polyline_self_intersects(nodes: &[V2], closed: bool) -> bool {
    let n = nodes.len();
    let m = if closed { n } else { n - 1 };
    let seg = |i: usize| (nodes[i], nodes[(i + 1) % n]);
    let boxes: Vec<[f64; 4]> = (0..m)
        .map(|i| {
            let (a, b) = seg(i);
            [
                a[0].min(b[0]),
                a[0].max(b[0]),
                a[1].min(b[1]),
                a[1].max(b[1]),
            ]
        })
        .collect();
    for i in 0..m {
        for j in (i + 2)..m {
            if closed && i == 0 && j == m - 1 {
                continue;
            }
            let (bi, bj) = (boxes[i], boxes[j]);
            if bi[1] < bj[0] || bj[1] < bi[0] || bi[3] < bj[2] || bj[3] < bi[2] {
                continue;
            }
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            if segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

/// Redistributes nodes uniformly in arclength by cubic-spline interpolation
/// in the cumulative chord length: periodic for closed polylines, clamped
/// with `x' = 0`, `|r'| = 1` at the poles of sphere-like profiles. The
/// reparametrization is iterated until chord lengths are uniform, which
/// makes the operation idempotent. The first node is kept.
pub fn resample_arclength(h: &DiscreteHypersurface) -> Result<DiscreteHypersurface> {
    const MAX_ITER: usize = 50;
    let backend = h.backend;
    let n = h.nodes.len();
    let tol = 1e-14 * h.diameter();
    let mut nodes = h.nodes.clone();
    for _ in 0..MAX_ITER {
        let next = spline::uniform_resample(&nodes, backend)?;
        let moved = nodes
            .iter()
            .zip(&next)
            .map(|(a, b)| norm2(sub2(*a, *b)))
            .fold(0.0, f64::max);
        nodes = next;
        if moved <= tol {
            break;
        }
    }
    debug_assert_eq!(nodes.len(), n);
    DiscreteHypersurface::from_nodes(backend, nodes)
}

/// Hausdorff distance between two polylines, measured node-to-polyline in
/// both directions.
pub fn hausdorff_distance(a: &DiscreteHypersurface, b: &DiscreteHypersurface) -> f64 {
    fn one_way(from: &DiscreteHypersurface, to: &DiscreteHypersurface) -> f64 {
        let n = to.nodes.len();
        let m = if to.backend.is_periodic() { n } else { n - 1 };
        from.nodes
            .iter()
            .map(|&p| {
                (0..m)
                    .map(|i| {
                        crate::vec::point_segment_distance(p, to.nodes[i], to.nodes[(i + 1) % n])
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
    one_way(a, b).max(one_way(b, a))
}

/// Smallest `<nu, X - c>` over the samples, `c` the centroid. Positive when
/// every normal points away from the centroid.
pub fn min_outwardness(h: &DiscreteHypersurface) -> f64 {
    let c = h.centroid();
    h.samples
        .iter()
        .map(|s| dot2(s.normal, sub2(s.position, c)))
        .fold(f64::INFINITY, f64::min)
}
