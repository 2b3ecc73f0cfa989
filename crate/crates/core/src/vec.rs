//! Minimal fixed-size vector helpers.

pub type V2 = [f64; 2];
pub type V3 = [f64; 3];

#[inline]
pub fn sub2(a: V2, b: V2) -> V2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot2(a: V2, b: V2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm2(a: V2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn cross2(a: V2, b: V2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn sub3(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn dot3(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm3(a: V3) -> f64 {
    dot3(a, a).sqrt()
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: V2, a: V2, b: V2) -> f64 {
    let ab = sub2(b, a);
    let len2 = dot2(ab, ab);
    let t = if len2 > 0.0 {
        (dot2(sub2(p, a), ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    norm2(sub2(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}
