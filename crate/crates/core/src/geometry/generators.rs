//! Built-in initial shapes.

use std::f64::consts::PI;

use super::{AxisymmetricProfile, DiscreteHypersurface, PlaneCurve, Topology};
use crate::error::{Error, Result};
use crate::vec::V2;

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be positive, got {value}"
        )))
    }
}

/// Circle of radius `radius` about `center`, nodes at uniform angles
/// starting from angle zero.
pub fn circle(center: V2, radius: f64, n: usize) -> Result<DiscreteHypersurface> {
    positive("radius", radius)?;
    let points = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
        })
        .collect();
    DiscreteHypersurface::from_curve(PlaneCurve::new(points)?)
}

/// Ellipse `(a cos t, b sin t)` at uniform parameter values.
pub fn ellipse(a: f64, b: f64, n: usize) -> Result<DiscreteHypersurface> {
    positive("a", a)?;
    positive("b", b)?;
    let points = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            [a * t.cos(), b * t.sin()]
        })
        .collect();
    DiscreteHypersurface::from_curve(PlaneCurve::new(points)?)
}

fn meridian(n: usize, f: impl Fn(f64) -> V2) -> Vec<V2> {
    let mut profile: Vec<V2> = (0..n).map(|k| f(PI * k as f64 / (n - 1) as f64)).collect();
    profile[0][1] = 0.0;
    profile[n - 1][1] = 0.0;
    profile
}

/// Sphere of radius `radius` centred on the axis at `center_x`, profile
/// nodes at uniform polar angle.
pub fn sphere(radius: f64, center_x: f64, n: usize) -> Result<DiscreteHypersurface> {
    ellipsoid(radius, radius, center_x, n)
}

/// Ellipsoid of revolution with axial semi-axis `a` and equatorial
/// semi-axis `b`, profile `(c + a cos s, b sin s)` at uniform `s`.
pub fn ellipsoid(a: f64, b: f64, center_x: f64, n: usize) -> Result<DiscreteHypersurface> {
    positive("a", a)?;
    positive("b", b)?;
    if n < 2 {
        return Err(Error::InvalidGeometry(format!("{n} nodes")));
    }
    let profile = meridian(n, |s| [center_x + a * s.cos(), b * s.sin()]);
    DiscreteHypersurface::from_profile(AxisymmetricProfile::new(profile, Topology::SphereLike)?)
}

/// Torus whose profile is the circle of radius `minor` centred at
/// `(0, major)`.
pub fn torus(major: f64, minor: f64, n: usize) -> Result<DiscreteHypersurface> {
    positive("major radius", major)?;
    positive("minor radius", minor)?;
    if minor >= major {
        return Err(Error::InvalidArgument(format!(
            "minor radius {minor} must be below the major radius {major}"
        )));
    }
    let profile = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            [minor * t.cos(), major + minor * t.sin()]
        })
        .collect();
    DiscreteHypersurface::from_profile(AxisymmetricProfile::new(profile, Topology::TorusLike)?)
}

/// `w(0) = 0`, `w(1) = 1` with `w' = 1 - cos(2 pi u)`, so the first and
/// second derivatives vanish at both ends.
fn cosine_blend(u: f64) -> f64 {
    u - (2.0 * PI * u).sin() / (2.0 * PI)
}

/// Two spheres of radius `radius` joined by a neck of radius
/// `neck_ratio * radius` and half-length `half_length`, blended into the
/// spheres over one radius with a C^2 cosine blend. Nodes are uniform in
/// arclength.
pub fn dumbbell(
    radius: f64,
    neck_ratio: f64,
    half_length: f64,
    n: usize,
) -> Result<DiscreteHypersurface> {
    positive("radius", radius)?;
    positive("neck ratio", neck_ratio)?;
    if neck_ratio > 1.0 || !(half_length >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < neck ratio <= 1 and half length >= 0, got {neck_ratio}, {half_length}"
        )));
    }
    let end = half_length + 2.0 * radius;
    let neck = neck_ratio * radius;
    let ball = |u: f64| {
        let d = u - half_length - radius;
        (radius * radius - d * d).max(0.0).sqrt()
    };
    let profile_r = |x: f64| {
        let u = x.abs();
        if u <= half_length {
            neck
        } else if u <= half_length + radius {
            let w = cosine_blend((u - half_length) / radius);
            neck * (1.0 - w) + ball(u) * w
        } else {
            ball(u)
        }
    };
    let profile = meridian(n, |t| {
        let x = end * t.cos();
        [x, profile_r(x)]
    });
    let h = DiscreteHypersurface::from_profile(AxisymmetricProfile::new(
        profile,
        Topology::SphereLike,
    )?)?;
    h.resampled()
}
