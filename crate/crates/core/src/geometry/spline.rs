//! Cubic splines in the cumulative chord-length parameter.

use super::Backend;
use crate::error::{Error, Result};
use crate::vec::{norm2, sub2, V2};

struct Spline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    curvature: Vec<f64>,
}

impl Spline {
    fn periodic(knots: &[f64], values: &[f64]) -> Self {
        // knots has n+1 entries, values n+1 with values[n] == values[0].
        let n = knots.len() - 1;
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let hp = h[(i + n - 1) % n];
            let hn = h[i];
            let yp = values[(i + n - 1) % n];
            sub[i] = hp;
            diag[i] = 2.0 * (hp + hn);
            sup[i] = hn;
            rhs[i] = 6.0 * ((values[i + 1] - values[i]) / hn - (values[i] - yp) / hp);
        }
        let mut m = solve_cyclic(&sub, &diag, &sup, &rhs);
        m.push(m[0]);
        Self {
            knots: knots.to_vec(),
            values: values.to_vec(),
            curvature: m,
        }
    }

    fn clamped(knots: &[f64], values: &[f64], slope_start: f64, slope_end: f64) -> Self {
        let n = knots.len();
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 2.0 * h[0];
        sup[0] = h[0];
        rhs[0] = 6.0 * ((values[1] - values[0]) / h[0] - slope_start);
        for i in 1..n - 1 {
            sub[i] = h[i - 1];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            sup[i] = h[i];
            rhs[i] =
                6.0 * ((values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1]);
        }
        sub[n - 1] = h[n - 2];
        diag[n - 1] = 2.0 * h[n - 2];
        rhs[n - 1] = 6.0 * (slope_end - (values[n - 1] - values[n - 2]) / h[n - 2]);
        Self {
            knots: knots.to_vec(),
            values: values.to_vec(),
            curvature: solve_tridiagonal(&sub, &diag, &sup, &rhs),
        }
    }

    /// Evaluates at ascending `targets`.
    fn eval_sorted(&self, targets: &[f64]) -> Vec<f64> {
        let last = self.knots.len() - 2;
        let mut i = 0;
        targets
            .iter()
            .map(|&t| {
                while i < last && t > self.knots[i + 1] {
                    i += 1;
                }
                let h = self.knots[i + 1] - self.knots[i];
                let a = (self.knots[i + 1] - t) / h;
                let b = (t - self.knots[i]) / h;
                a * self.values[i]
                    + b * self.values[i + 1]
                    + ((a * a * a - a) * self.curvature[i]
                        + (b * b * b - b) * self.curvature[i + 1])
                        * h
                        * h
                        / 6.0
            })
            .collect()
    }
}

/// Thomas algorithm; `sub[0]` and `sup[n-1]` are ignored.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// Cyclic tridiagonal system: `sub[0]` couples row 0 to `x[n-1]`,
/// `sup[n-1]` couples row `n-1` to `x[0]`. Sherman-Morrison correction.
fn solve_cyclic(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let alpha = sup[n - 1];
    let beta = sub[0];
    let gamma = -diag[0];
    let mut b = diag.to_vec();
    b[0] -= gamma;
    b[n - 1] -= alpha * beta / gamma;
    let x = solve_tridiagonal(sub, &b, sup, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &b, sup, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

/// One pass of uniform-chord-parameter resampling.
pub(super) fn uniform_resample(nodes: &[V2], backend: Backend) -> Result<Vec<V2>> {
    let n = nodes.len();
    let periodic = backend.is_periodic();
    let mut knots = Vec::with_capacity(n + 1);
    knots.push(0.0);
    let mut acc = 0.0;
    for w in nodes.windows(2) {
        acc += norm2(sub2(w[1], w[0]));
        knots.push(acc);
    }
    let xs: Vec<f64>;
    let ys: Vec<f64>;
    let out_x;
    let out_y;
    if periodic {
        acc += norm2(sub2(nodes[0], nodes[n - 1]));
        knots.push(acc);
        xs = nodes
            .iter()
            .chain(std::iter::once(&nodes[0]))
            .map(|p| p[0])
            .collect();
        ys = nodes
            .iter()
            .chain(std::iter::once(&nodes[0]))
            .map(|p| p[1])
            .collect();
        let targets: Vec<f64> = (0..n).map(|k| acc * k as f64 / n as f64).collect();
        out_x = Spline::periodic(&knots, &xs).eval_sorted(&targets);
        out_y = Spline::periodic(&knots, &ys).eval_sorted(&targets);
    } else {
        xs = nodes.iter().map(|p| p[0]).collect();
        ys = nodes.iter().map(|p| p[1]).collect();
        let targets: Vec<f64> = (0..n).map(|k| acc * k as f64 / (n - 1) as f64).collect();
        out_x = Spline::clamped(&knots, &xs, 0.0, 0.0).eval_sorted(&targets);
        out_y = Spline::clamped(&knots, &ys, 1.0, -1.0).eval_sorted(&targets);
    }
    if !(acc > 0.0) {
        return Err(Error::InvalidGeometry("polyline has zero length".into()));
    }
    let mut out: Vec<V2> = out_x.into_iter().zip(out_y).map(|(x, y)| [x, y]).collect();
    out[0] = nodes[0];
    if !periodic {
        out[n - 1] = nodes[n - 1];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_spline_reproduces_trigonometric_data() {
        let n = 64;
        let knots: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let values: Vec<f64> = knots
            .iter()
            .map(|t| (2.0 * std::f64::consts::PI * t).sin())
            .collect();
        let s = Spline::periodic(&knots, &values);
        let targets: Vec<f64> = (0..200).map(|k| k as f64 / 200.0).collect();
        for (t, v) in targets.iter().zip(s.eval_sorted(&targets)) {
            assert!((v - (2.0 * std::f64::consts::PI * t).sin()).abs() < 1e-6);
        }
    }

    #[test]
    fn clamped_spline_is_exact_on_cubics() {
        let knots: Vec<f64> = (0..20).map(|k| (k as f64 / 19.0).powf(1.3)).collect();
        let f = |t: f64| t * t * t - 2.0 * t + 0.5;
        let df = |t: f64| 3.0 * t * t - 2.0;
        let values: Vec<f64> = knots.iter().map(|&t| f(t)).collect();
        let s = Spline::clamped(&knots, &values, df(0.0), df(1.0));
        let targets: Vec<f64> = (0..50).map(|k| k as f64 / 49.0).collect();
        for (t, v) in targets.iter().zip(s.eval_sorted(&targets)) {
            assert!((v - f(*t)).abs() < 1e-12, "{t}: {v}");
        }
    }
}
