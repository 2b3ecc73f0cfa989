//! Residuals of known solutions of the linearized flow
//! `df/dt = F^{kl} f_{;kl} + F^{kl} h_k^p h_{pl} f`.
//!
//! The speed `F`, the normal components `<nu, e>` and `<X, nu> + 2 t F` all
//! solve it. The operator is applied in the principal frame, which is exact
//! for rotationally symmetric fields on surfaces of revolution.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::flow::{run, FlowConfig, FlowTrajectory};
use crate::geometry::{stencil, Backend, DiscreteHypersurface};
use crate::speed::SpeedFunction;
use crate::vec::{dot2, norm2, sub2, V2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldLabel {
    Speed,
    /// `<nu, e>`; `e` must be the axis for surfaces of revolution.
    NormalComponent(V2),
    /// `<X, nu> + 2 t F` with `X` measured from the origin.
    ScalingSolution,
}

impl fmt::Display for FieldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldLabel::Speed => write!(f, "speed"),
            FieldLabel::NormalComponent([x, y]) if *x == 1.0 && *y == 0.0 => write!(f, "normal:x"),
            FieldLabel::NormalComponent([x, y]) if *x == 0.0 && *y == 1.0 => write!(f, "normal:y"),
            FieldLabel::NormalComponent([x, y]) => write!(f, "normal:{x},{y}"),
            FieldLabel::ScalingSolution => write!(f, "scaling"),
        }
    }
}

impl FromStr for FieldLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown field label `{s}`"));
        match s {
            "speed" => Ok(FieldLabel::Speed),
            "scaling" => Ok(FieldLabel::ScalingSolution),
            "normal" | "normal:x" => Ok(FieldLabel::NormalComponent([1.0, 0.0])),
            "normal:y" => Ok(FieldLabel::NormalComponent([0.0, 1.0])),
            _ => {
                let rest = s.strip_prefix("normal:").ok_or_else(bad)?;
                let (x, y) = rest.split_once(',').ok_or_else(bad)?;
                let e: V2 = [
                    x.trim().parse().map_err(|_| bad())?,
                    y.trim().parse().map_err(|_| bad())?,
                ];
                let len = norm2(e);
                if !(len > 0.0) {
                    return Err(bad());
                }
                Ok(FieldLabel::NormalComponent([e[0] / len, e[1] / len]))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
    pub label: Option<FieldLabel>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            label: None,
        }
    }

    /// Evaluates a labelled field on `h` at time `t`.
    pub fn of(
        h: &DiscreteHypersurface,
        speed: &SpeedFunction,
        label: FieldLabel,
        t: f64,
    ) -> Result<Self> {
        if let (Backend::Axisymmetric(_), FieldLabel::NormalComponent(e)) = (h.backend(), label) {
            if e[1] != 0.0 {
                return Err(Error::InvalidArgument(
                    "normal component of a surface of revolution must use the axis".into(),
                ));
            }
        }
        let values = h
            .samples()
            .iter()
            .map(|s| {
                Ok(match label {
                    FieldLabel::Speed => speed.eval(s.kappa.as_slice())?,
                    FieldLabel::NormalComponent(e) => dot2(s.normal, e),
                    FieldLabel::ScalingSolution => {
                        dot2(s.position, s.normal) + 2.0 * t * speed.eval(s.kappa.as_slice())?
                    }
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            values,
            label: Some(label),
        })
    }
}

fn neighbours(h: &DiscreteHypersurface, i: usize) -> (usize, usize) {
    let n = h.resolution();
    if h.backend().is_periodic() {
        return ((i + n - 1) % n, (i + 1) % n);
    }
    // Rotationally symmetric fields are even across the axis.
    let prev = if i == 0 { 1 } else { i - 1 };
    let next = if i + 1 == n { n - 2 } else { i + 1 };
    (prev, next)
}

/// The linearized operator applied to `f` on `h`.
pub fn lin_operator(
    h: &DiscreteHypersurface,
    speed: &SpeedFunction,
    f: &ScalarField,
) -> Result<ScalarField> {
    let f = &f.values;
    if f.len() != h.resolution() {
        return Err(Error::InvalidArgument(format!(
            "field has {} values for {} samples",
            f.len(),
            h.resolution()
        )));
    }
    let values = h
        .samples()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let eval = speed.evaluate(s.kappa.as_slice())?;
            let g = eval.gradient();
            let k = s.kappa.as_slice();
            let reaction: f64 = g.iter().zip(k).map(|(g, k)| g * k * k).sum::<f64>() * f[i];
            let (ip, inx) = neighbours(h, i);
            if h.is_pole(i) {
                // f = f0 + f_ss s^2 / 2 near the axis, and (r'/r) f_s -> f_ss.
                let s1 = norm2(sub2(h.nodes()[inx], h.nodes()[i]));
                let fss = 2.0 * (f[inx] - f[i]) / (s1 * s1);
                return Ok((g[0] + g[1]) * fss + reaction);
            }
            let (prev, _, next) = stencil(h.backend(), h.nodes(), i);
            let cur = h.nodes()[i];
            let d1 = [(next[0] - prev[0]) / 2.0, (next[1] - prev[1]) / 2.0];
            let d2 = [
                next[0] - 2.0 * cur[0] + prev[0],
                next[1] - 2.0 * cur[1] + prev[1],
            ];
            let sigma = norm2(d1);
            let fu = (f[inx] - f[ip]) / 2.0;
            let fuu = f[inx] - 2.0 * f[i] + f[ip];
            let fs = fu / sigma;
            let fss = (fuu - fs * dot2(d1, d2) / sigma) / (sigma * sigma);
            Ok(match h.backend() {
                Backend::Curve => g[0] * fss + reaction,
                Backend::Axisymmetric(_) => {
                    let r_s = d1[1] / sigma;
                    g[0] * fss + g[1] * r_s / cur[1] * fs + reaction
                }
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ScalarField::new(values))
}

/// Forward difference of a labelled field between snapshots `k` and `k + 1`
/// at fixed nodes.
pub fn flow_time_derivative(
    traj: &FlowTrajectory,
    label: FieldLabel,
    k: usize,
) -> Result<ScalarField> {
    let (a, b) = match (traj.snapshots.get(k), traj.snapshots.get(k + 1)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "no snapshot pair ({k}, {}) in a trajectory of {}",
                k + 1,
                traj.snapshots.len()
            )))
        }
    };
    if a.epoch != b.epoch || a.surface.resolution() != b.surface.resolution() {
        return Err(Error::ResampleBoundary {
            snapshot: k,
            next: k + 1,
        });
    }
    let dt = b.t - a.t;
    let fa = ScalarField::of(&a.surface, &traj.speed, label, a.t)?;
    let fb = ScalarField::of(&b.surface, &traj.speed, label, b.t)?;
    let values = if dt == 0.0 && fa.values == fb.values {
        vec![0.0; fa.values.len()]
    } else {
        fa.values
            .iter()
            .zip(&fb.values)
            .map(|(x, y)| (y - x) / dt)
            .collect()
    };
    Ok(ScalarField::new(values))
}

/// `max |df/dt - L f|` over interior samples (sphere-like poles excluded)
/// and over every snapshot window that does not straddle a resample.
pub fn solution_residual(
    traj: &FlowTrajectory,
    speed: &SpeedFunction,
    label: FieldLabel,
) -> Result<f64> {
    let mut traj_view = traj.clone();
    traj_view.speed = *speed;
    let mut worst: Option<f64> = None;
    for k in 0..traj.snapshots.len().saturating_sub(1) {
        let dfdt = match flow_time_derivative(&traj_view, label, k) {
            Ok(v) => v,
            Err(Error::ResampleBoundary { .. }) => continue,
            Err(e) => return Err(e),
        };
        let snap = &traj.snapshots[k];
        if label == FieldLabel::Speed {
            let min_f = snap
                .surface
                .samples()
                .iter()
                .map(|s| speed.eval(s.kappa.as_slice()))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            if !(min_f > 0.0) {
                return Err(Error::NonPositiveSpeed { snapshot: k, min_f });
            }
        }
        let f = ScalarField::of(&snap.surface, speed, label, snap.t)?;
        let lf = lin_operator(&snap.surface, speed, &f)?;
        let window = (0..snap.surface.resolution())
            .filter(|&i| !snap.surface.is_pole(i))
            .map(|i| (dfdt.values[i] - lf.values[i]).abs())
            .fold(0.0, f64::max);
        worst = Some(worst.map_or(window, |w: f64| w.max(window)));
    }
    worst
        .ok_or_else(|| Error::InvalidArgument("trajectory has no window without resampling".into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow {
    pub n: usize,
    /// First time step of the run.
    pub dt: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub label: FieldLabel,
    pub speed: SpeedFunction,
    pub rows: Vec<ResidualRow>,
    /// Least-squares slope of `log(residual)` against `log(1/N)`.
    pub order: f64,
    /// Root-mean-square deviation of the fit in `log(residual)`.
    pub fit_residual: f64,
}

/// Least-squares slope and RMS misfit of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let misfit = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - (my + slope * (a - mx));
            e * e
        })
        .sum::<f64>()
        / n;
    (slope, misfit.sqrt())
}

/// Runs the flow from `initial(N)` for each resolution, recording every
/// step, and fits the decay order of the solution residual. Each initial
/// surface is first resampled to uniform arclength, the node distribution
/// the engine maintains, so all resolutions are compared on the same kind
/// of grid whether or not their run reaches a resampling event.
pub fn convergence_order(
    initial: impl Fn(usize) -> Result<DiscreteHypersurface>,
    cfg: &FlowConfig,
    label: FieldLabel,
    resolutions: &[usize],
) -> Result<ResidualReport> {
    if resolutions.len() < 3 || resolutions.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::InvalidArgument(
            "need at least three resolutions, each double the last".into(),
        ));
    }
    let mut cfg = cfg.clone();
    cfg.snapshot_every = 1;
    let mut rows = Vec::with_capacity(resolutions.len());
    for &n in resolutions {
        let traj = run(&initial(n)?.resampled()?, &cfg)?;
        let dt = match traj.snapshots.get(1) {
            Some(s) => s.t - traj.snapshots[0].t,
            None => 0.0,
        };
        let residual = solution_residual(&traj, &cfg.speed, label)?;
        rows.push(ResidualRow { n, dt, residual });
    }
    let x: Vec<f64> = rows.iter().map(|r| -(r.n as f64).ln()).collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|r| r.residual.max(f64::MIN_POSITIVE).ln())
        .collect();
    let (order, fit_residual) = fit_slope(&x, &y);
    Ok(ResidualReport {
        label,
        speed: cfg.speed,
        rows,
        order,
        fit_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::Snapshot;
    use crate::geometry::{circle, ellipse, ellipsoid, sphere, torus};

    fn speeds() -> [SpeedFunction; 3] {
        [
            SpeedFunction::sum(),
            SpeedFunction::norm(),
            SpeedFunction::harmonic_mean(),
        ]
    }

    #[test]
    fn label_text_round_trip() {
        for l in [
            FieldLabel::Speed,
            FieldLabel::ScalingSolution,
            FieldLabel::NormalComponent([1.0, 0.0]),
            FieldLabel::NormalComponent([0.0, 1.0]),
        ] {
            assert_eq!(l.to_string().parse::<FieldLabel>().unwrap(), l);
        }
        assert_eq!(
            "normal:3,4".parse::<FieldLabel>().unwrap(),
            FieldLabel::NormalComponent([0.6, 0.8])
        );
        assert!("normal:0,0".parse::<FieldLabel>().is_err());
        assert!("curvature".parse::<FieldLabel>().is_err());
    }

    #[test]
    fn umbilic_identity_for_constants() {
        let r = 1.7;
        let h = sphere(r, 0.3, 128).unwrap();
        for speed in speeds() {
            let c = 2.5;
            let lf = lin_operator(&h, &speed, &ScalarField::new(vec![c; 128])).unwrap();
            let f11 = speed.eval(&[1.0, 1.0]).unwrap();
            for (i, s) in h.samples().iter().enumerate() {
                let g = speed.eval_gradient(s.kappa.as_slice()).unwrap();
                let k = s.kappa.as_slice();
                let exact = c * (g[0] * k[0] * k[0] + g[1] * k[1] * k[1]);
                assert!((lf.values[i] - exact).abs() <= 1e-10 * exact.abs());
                assert!((lf.values[i] - c * f11 / (r * r)).abs() <= 1e-3 * c * f11 / (r * r));
            }
        }
    }

    #[test]
    fn translation_field_on_the_circle() {
        let h = circle([0.0, 0.0], 1.0, 256).unwrap();
        let f = ScalarField::of(
            &h,
            &SpeedFunction::sum(),
            FieldLabel::NormalComponent([1.0, 0.0]),
            0.0,
        )
        .unwrap();
        let lf = lin_operator(&h, &SpeedFunction::sum(), &f).unwrap();
        assert!(lf.values.iter().all(|v| v.abs() < 1e-3));
        let zero =
            lin_operator(&h, &SpeedFunction::sum(), &ScalarField::new(vec![0.0; 256])).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn operator_is_linear() {
        for h in [
            ellipse(2.0, 1.0, 64).unwrap(),
            ellipsoid(1.5, 1.0, 0.0, 64).unwrap(),
            torus(3.0, 1.0, 64).unwrap(),
        ] {
            let n = h.resolution();
            let f: Vec<f64> = (0..n).map(|i| (0.3 * i as f64).sin()).collect();
            let g: Vec<f64> = (0..n).map(|i| (i as f64 / n as f64).powi(2)).collect();
            let (alpha, beta) = (1.3, -0.7);
            let mix: Vec<f64> = f
                .iter()
                .zip(&g)
                .map(|(a, b)| alpha * a + beta * b)
                .collect();
            let speed = SpeedFunction::sum();
            let lf = lin_operator(&h, &speed, &ScalarField::new(f)).unwrap();
            let lg = lin_operator(&h, &speed, &ScalarField::new(g)).unwrap();
            let lmix = lin_operator(&h, &speed, &ScalarField::new(mix)).unwrap();
            for i in 0..n {
                let expect = alpha * lf.values[i] + beta * lg.values[i];
                let scale = lf.values[i].abs() + lg.values[i].abs() + 1.0;
                assert!((lmix.values[i] - expect).abs() <= 1e-12 * scale);
            }
        }
    }

    fn static_trajectory(h: DiscreteHypersurface, epochs: [usize; 2]) -> FlowTrajectory {
        FlowTrajectory {
            speed: SpeedFunction::sum(),
            snapshots: vec![
                Snapshot {
                    t: 0.0,
                    step: 0,
                    epoch: epochs[0],
                    surface: h.clone(),
                },
                Snapshot {
                    t: 1e-3,
                    step: 1,
                    epoch: epochs[1],
                    surface: h,
                },
            ],
            termination: crate::flow::Termination::ReachedTEnd,
            steps: 1,
        }
    }

    #[test]
    fn time_derivative_examples() {
        let h = ellipse(2.0, 1.0, 64).unwrap();
        let d = flow_time_derivative(&static_trajectory(h.clone(), [0, 0]), FieldLabel::Speed, 0)
            .unwrap();
        assert!(d.values.iter().all(|&v| v == 0.0));
        assert!(matches!(
            flow_time_derivative(&static_trajectory(h, [0, 1]), FieldLabel::Speed, 0),
            Err(Error::ResampleBoundary {
                snapshot: 0,
                next: 1
            })
        ));

        let c = circle([0.0, 0.0], 1.0, 128).unwrap();
        let traj = run(&c, &FlowConfig::new(SpeedFunction::sum(), 0.01)).unwrap();
        for k in 0..5 {
            let d =
                flow_time_derivative(&traj, FieldLabel::NormalComponent([1.0, 0.0]), k).unwrap();
            assert!(d.values.iter().all(|v| v.abs() < 1e-8));
        }

        let r0 = 1.0;
        let s = sphere(r0, 0.0, 128).unwrap();
        for speed in speeds() {
            let traj = run(&s, &FlowConfig::new(speed, 1e-3)).unwrap();
            let f11 = speed.eval(&[1.0, 1.0]).unwrap();
            let d = flow_time_derivative(&traj, FieldLabel::Speed, 0).unwrap();
            let exact = f11 * f11 / r0.powi(3);
            for v in &d.values {
                assert!((v - exact).abs() <= 2e-3 * exact, "{v} vs {exact}");
            }
        }
    }

    #[test]
    fn sphere_speed_residual_is_small() {
        for speed in speeds() {
            let h = sphere(1.0, 0.0, 256).unwrap();
            let traj = run(&h, &FlowConfig::new(speed, 2e-4)).unwrap();
            let f11 = speed.eval(&[1.0, 1.0]).unwrap();
            let res = solution_residual(&traj, &speed, FieldLabel::Speed).unwrap();
            assert!(res <= 1e-3 * f11, "{speed}: {res}");
        }
    }

    #[test]
    fn scaling_residual_does_not_depend_on_the_origin() {
        let speed = SpeedFunction::sum();
        let h = ellipse(2.0, 1.0, 64).unwrap();
        let c = [0.7, -1.9];
        let moved = h.translated(c).unwrap();
        let f = ScalarField::of(&h, &speed, FieldLabel::ScalingSolution, 0.3).unwrap();
        let g = ScalarField::of(&moved, &speed, FieldLabel::ScalingSolution, 0.3).unwrap();
        let lf = lin_operator(&h, &speed, &f).unwrap();
        let lg = lin_operator(&moved, &speed, &g).unwrap();
        let shift =
            ScalarField::of(&h, &speed, FieldLabel::NormalComponent([c[0], c[1]]), 0.0).unwrap();
        let lshift = lin_operator(&h, &speed, &shift).unwrap();
        for i in 0..64 {
            assert!((g.values[i] - f.values[i] - shift.values[i]).abs() < 1e-12);
            assert!((lg.values[i] - lf.values[i] - lshift.values[i]).abs() < 1e-10);
        }

        let cfg = FlowConfig::new(speed, 5e-3);
        let base = run(&h, &cfg).unwrap();
        let other = run(&moved, &cfg).unwrap();
        let r0 = solution_residual(&base, &speed, FieldLabel::ScalingSolution).unwrap();
        let r1 = solution_residual(&other, &speed, FieldLabel::ScalingSolution).unwrap();
        let rx = solution_residual(&base, &speed, FieldLabel::NormalComponent([1.0, 0.0])).unwrap();
        let ry = solution_residual(&base, &speed, FieldLabel::NormalComponent([0.0, 1.0])).unwrap();
        let bound = c[0].abs() * rx + c[1].abs() * ry;
        assert!(
            (r1 - r0).abs() <= bound * (1.0 + 1e-6) + 1e-9,
            "{r0} {r1} {bound}"
        );
    }

    #[test]
    fn residual_orders() {
        type Initial = Box<dyn Fn(usize) -> Result<DiscreteHypersurface>>;
        let bodies: Vec<(&str, Initial)> = vec![
            ("sphere", Box::new(|n| sphere(1.0, 0.0, n))),
            ("ellipsoid", Box::new(|n| ellipsoid(1.5, 1.0, 0.0, n))),
            ("torus", Box::new(|n| torus(3.0, 1.0, n))),
            ("ellipse", Box::new(|n| ellipse(2.0, 1.0, n))),
        ];
        let labels = [
            FieldLabel::Speed,
            FieldLabel::NormalComponent([1.0, 0.0]),
            FieldLabel::ScalingSolution,
        ];
        for (name, initial) in &bodies {
            // The torus leaves the positive cone on its inner side.
            let admissible: &[SpeedFunction] = if *name == "torus" {
                &[SpeedFunction::sum()]
            } else {
                &speeds()
            };
            for &speed in admissible {
                for label in labels {
                    let report = convergence_order(
                        initial,
                        &FlowConfig::new(speed, 1e-3),
                        label,
                        &[64, 128, 256],
                    )
                    .unwrap();
                    assert!(report.order >= 1.0, "{name} {speed} {label}: {report:?}");
                }
            }
        }
        assert!(convergence_order(
            |n| sphere(1.0, 0.0, n),
            &FlowConfig::new(SpeedFunction::sum(), 1e-3),
            FieldLabel::Speed,
            &[64, 100, 200]
        )
        .is_err());
    }
}
