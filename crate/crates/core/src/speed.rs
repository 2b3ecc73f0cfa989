//! Symmetric, degree-one homogeneous speeds `F(kappa)` and their calculus in
//! the principal frame.
//!
//! Every speed here is evaluated on the ordered principal curvatures of a
//! curve (`n = 1`) or a surface (`n = 2`). The gradient `dF/dkappa_i` is the
//! diagonal of `F^{kl}` in a principal frame, which is all the geometry
//! backends ever need since their coordinate directions are curvature lines.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Ordered principal curvatures of a curve (one entry) or surface (two).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalCurvatures {
    values: [f64; 2],
    dim: usize,
}

impl PrincipalCurvatures {
    pub fn curve(kappa: f64) -> Self {
        Self {
            values: [kappa, 0.0],
            dim: 1,
        }
    }

    /// `profile` is the meridian curvature, `rotational` the curvature of the
    /// parallel circle direction.
    pub fn surface(profile: f64, rotational: f64) -> Self {
        Self {
            values: [profile, rotational],
            dim: 2,
        }
    }

    pub fn new(kappa: &[f64]) -> Result<Self> {
        if kappa.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "principal curvatures must be finite, got {kappa:?}"
            )));
        }
        match *kappa {
            [k] => Ok(Self::curve(k)),
            [k1, k2] => Ok(Self::surface(k1, k2)),
            _ => Err(Error::InvalidArgument(format!(
                "expected 1 or 2 principal curvatures, got {}",
                kappa.len()
            ))),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values[..self.dim]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max(&self) -> f64 {
        self.as_slice()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.as_slice()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0_f64, |m, k| m.max(k.abs()))
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = *self;
        for k in &mut out.values[..self.dim] {
            *k *= lambda;
        }
        out
    }
}

/// The admissible cone `Gamma` of a speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    /// All `kappa_i > 0`, no margin.
    PositiveCone,
    AllOfRn,
}

impl Cone {
    pub fn contains(&self, kappa: &[f64]) -> bool {
        match self {
            Cone::PositiveCone => kappa.iter().all(|&k| k > 0.0),
            Cone::AllOfRn => kappa.iter().all(|k| k.is_finite()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedKind {
    /// `sum kappa_i`, the mean curvature `H`.
    Sum,
    /// `sqrt(sum kappa_i^2)`, i.e. `|A|`.
    EuclideanNorm,
    /// `(sum kappa_i^p / n)^(1/p)`, `p != 0`. `p = -1` is the harmonic mean.
    PowerMean(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convexity {
    Concave,
    Convex,
    Both,
    Neither,
}

impl Convexity {
    pub fn is_concave(self) -> bool {
        matches!(self, Convexity::Concave | Convexity::Both)
    }

    pub fn is_convex(self) -> bool {
        matches!(self, Convexity::Convex | Convexity::Both)
    }
}

/// Value and principal-frame gradient of `F` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedEvaluation {
    pub value: f64,
    gradient: [f64; 2],
    dim: usize,
}

impl SpeedEvaluation {
    pub fn gradient(&self) -> &[f64] {
        &self.gradient[..self.dim]
    }

    pub fn max_gradient(&self) -> f64 {
        self.gradient()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedFunction {
    pub kind: SpeedKind,
    pub cone: Cone,
}

impl SpeedFunction {
    /// A speed with its natural cone: `AllOfRn` for the sum, the positive
    /// cone for the norm and for power means.
    pub fn new(kind: SpeedKind) -> Result<Self> {
        let cone = match kind {
            SpeedKind::Sum => Cone::AllOfRn,
            SpeedKind::EuclideanNorm => Cone::PositiveCone,
            SpeedKind::PowerMean(p) => {
                if p == 0.0 || !p.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "power mean exponent must be finite and non-zero, got {p}"
                    )));
                }
                Cone::PositiveCone
            }
        };
        Ok(Self { kind, cone })
    }

    pub fn sum() -> Self {
        Self::new(SpeedKind::Sum).unwrap()
    }

    pub fn norm() -> Self {
        Self::new(SpeedKind::EuclideanNorm).unwrap()
    }

    pub fn power_mean(p: f64) -> Result<Self> {
        Self::new(SpeedKind::PowerMean(p))
    }

    pub fn harmonic_mean() -> Self {
        Self::power_mean(-1.0).unwrap()
    }

    pub fn with_cone(mut self, cone: Cone) -> Self {
        self.cone = cone;
        self
    }

    /// Convexity class of the builtin formula on the positive cone.
    pub fn convexity(&self) -> Convexity {
        match self.kind {
            SpeedKind::Sum => Convexity::Both,
            SpeedKind::EuclideanNorm => Convexity::Convex,
            SpeedKind::PowerMean(p) if p < 1.0 => Convexity::Concave,
            SpeedKind::PowerMean(p) if p > 1.0 => Convexity::Convex,
            SpeedKind::PowerMean(_) => Convexity::Both,
        }
    }

    fn cone_violation(&self, kappa: &[f64]) -> Error {
        Error::ConeViolation {
            speed: self.to_string(),
            kappa: kappa.to_vec(),
        }
    }

    fn check_cone(&self, kappa: &[f64]) -> Result<()> {
        if kappa.is_empty() || !self.cone.contains(kappa) {
            return Err(self.cone_violation(kappa));
        }
        Ok(())
    }

    /// `F(kappa)`.
    pub fn eval(&self, kappa: &[f64]) -> Result<f64> {
        self.check_cone(kappa)?;
        let n = kappa.len() as f64;
        Ok(match self.kind {
            SpeedKind::Sum => kappa.iter().sum(),
            SpeedKind::EuclideanNorm => kappa.iter().map(|k| k * k).sum::<f64>().sqrt(),
            SpeedKind::PowerMean(p) => {
                let mean = kappa.iter().map(|k| k.powf(p)).sum::<f64>() / n;
                mean.powf(1.0 / p)
            }
        })
    }

    /// Value and analytic gradient. Requires `kappa` in the interior of the
    /// cone; for the norm that excludes `kappa = 0`.
    pub fn evaluate(&self, kappa: &[f64]) -> Result<SpeedEvaluation> {
        let value = self.eval(kappa)?;
        let dim = kappa.len();
        if dim > 2 {
            return Err(Error::InvalidArgument(format!(
                "at most two principal curvatures are supported, got {dim}"
            )));
        }
        let mut gradient = [0.0; 2];
        match self.kind {
            SpeedKind::Sum => gradient[..dim].fill(1.0),
            SpeedKind::EuclideanNorm => {
                if value == 0.0 {
                    return Err(self.cone_violation(kappa));
                }
                for (g, k) in gradient.iter_mut().zip(kappa) {
                    *g = k / value;
                }
            }
            SpeedKind::PowerMean(p) => {
                let n = dim as f64;
                for (g, &k) in gradient.iter_mut().zip(kappa) {
                    *g = (value / k).powf(1.0 - p) / n;
                }
            }
        }
        Ok(SpeedEvaluation {
            value,
            gradient,
            dim,
        })
    }

    pub fn eval_gradient(&self, kappa: &[f64]) -> Result<Vec<f64>> {
        Ok(self.evaluate(kappa)?.gradient().to_vec())
    }

    /// Returns `(|F(lambda kappa) - lambda F(kappa)|, |sum g_i kappa_i - F(kappa)|)`.
    pub fn check_euler_homogeneity(&self, kappa: &[f64], lambda: f64) -> Result<(f64, f64)> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scaling factor must be positive, got {lambda}"
            )));
        }
        let e = self.evaluate(kappa)?;
        let scaled: Vec<f64> = kappa.iter().map(|k| lambda * k).collect();
        let homogeneity = (self.eval(&scaled)? - lambda * e.value).abs();
        let euler: f64 = e.gradient().iter().zip(kappa).map(|(g, k)| g * k).sum();
        Ok((homogeneity, (euler - e.value).abs()))
    }

    /// `F_A(B) - F(B) = sum_i dF/dkappa_i(A) B_i - F(B)` for `A`, `B` in a
    /// common principal frame. Non-negative for concave `F`, non-positive for
    /// convex `F`.
    pub fn support_inequality_residual(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::InvalidArgument(
                "A and B must have the same dimension".into(),
            ));
        }
        let ea = self.evaluate(a)?;
        let fb = self.eval(b)?;
        let contracted: f64 = ea.gradient().iter().zip(b).map(|(g, x)| g * x).sum();
        Ok(contracted - fb)
    }

    /// True iff every gradient component is strictly positive at `kappa`.
    pub fn check_monotonicity(&self, kappa: &[f64]) -> Result<bool> {
        Ok(self.evaluate(kappa)?.gradient().iter().all(|&g| g > 0.0))
    }

    /// Midpoint-sampling certificate on two principal curvatures.
    ///
    /// Draws `samples` pairs in the cone (entries in `[0.1, 10]` for the
    /// positive cone, `[-10, 10]` otherwise) and classifies by the sign of
    /// `F((A+B)/2) - (F(A)+F(B))/2` with tolerance `1e-10`.
    pub fn classify_convexity(&self, samples: usize, seed: u64) -> Result<Convexity> {
        const TOL: f64 = 1e-10;
        if samples < 100 {
            return Err(Error::InvalidArgument(format!(
                "at least 100 samples are required, got {samples}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = match self.cone {
            Cone::PositiveCone => (0.1, 10.0),
            Cone::AllOfRn => (-10.0, 10.0),
        };
        let mut above = false;
        let mut below = false;
        let mut drawn = 0;
        while drawn < samples {
            let a = [rng.gen_range(lo..hi), rng.gen_range(lo..hi)];
            let b = [rng.gen_range(lo..hi), rng.gen_range(lo..hi)];
            let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            let (Ok(fa), Ok(fb), Ok(fm)) = (self.eval(&a), self.eval(&b), self.eval(&mid)) else {
                continue;
            };
            if [fa, fb, fm].iter().any(|f| !f.is_finite()) {
                continue;
            }
            drawn += 1;
            let defect = fm - 0.5 * (fa + fb);
            above |= defect > TOL;
            below |= defect < -TOL;
        }
        Ok(match (above, below) {
            (false, false) => Convexity::Both,
            (true, false) => Convexity::Concave,
            (false, true) => Convexity::Convex,
            (true, true) => Convexity::Neither,
        })
    }
}

/// Worst cases of the speed identities over a random sweep of two
/// principal curvatures with entries in `[0.1, 10]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedCertificate {
    pub samples: usize,
    /// `max |F(lambda k) - lambda F(k)| / F(k)` over `lambda` in `{0.5, 2, 7}`.
    pub max_homogeneity: f64,
    /// `max |sum g_i k_i - F(k)| / F(k)`.
    pub max_euler: f64,
    pub min_gradient: f64,
    /// Largest deviation of a gradient component from central differences,
    /// relative to the largest component.
    pub max_gradient_error: f64,
    /// Extremes of `support_inequality_residual(A, B)` over random pairs.
    pub min_support: f64,
    pub max_support: f64,
    pub max_asymmetry: f64,
    pub convexity: Convexity,
}

impl SpeedCertificate {
    /// The support inequality holds in the direction the convexity requires.
    pub fn support_holds(&self, slack: f64) -> bool {
        let convexity = self.convexity;
        (!convexity.is_concave() || self.min_support >= -slack)
            && (!convexity.is_convex() || self.max_support <= slack)
    }
}

impl SpeedFunction {
    pub fn certify(&self, samples: usize, seed: u64) -> Result<SpeedCertificate> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || [rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0)];
        let mut cert = SpeedCertificate {
            samples,
            max_homogeneity: 0.0,
            max_euler: 0.0,
            min_gradient: f64::INFINITY,
            max_gradient_error: 0.0,
            min_support: f64::INFINITY,
            max_support: f64::NEG_INFINITY,
            max_asymmetry: 0.0,
            convexity: self.classify_convexity(samples.max(100), seed)?,
        };
        for _ in 0..samples {
            let k = draw();
            let e = self.evaluate(&k)?;
            for lambda in [0.5, 2.0, 7.0] {
                let (homogeneity, euler) = self.check_euler_homogeneity(&k, lambda)?;
                cert.max_homogeneity = cert.max_homogeneity.max(homogeneity / e.value);
                cert.max_euler = cert.max_euler.max(euler / e.value);
            }
            let scale = e.max_gradient();
            for (i, &g) in e.gradient().iter().enumerate() {
                cert.min_gradient = cert.min_gradient.min(g);
                let step = 1e-5 * k[i];
                let (mut up, mut down) = (k, k);
                up[i] += step;
                down[i] -= step;
                let fd = (self.eval(&up)? - self.eval(&down)?) / (2.0 * step);
                cert.max_gradient_error = cert.max_gradient_error.max((fd - g).abs() / scale);
            }
            let swapped = self.eval(&[k[1], k[0]])?;
            cert.max_asymmetry = cert.max_asymmetry.max((swapped - e.value).abs());
            let b = draw();
            let support = self.support_inequality_residual(&k, &b)?;
            cert.min_support = cert.min_support.min(support);
            cert.max_support = cert.max_support.max(support);
        }
        Ok(cert)
    }
}

impl fmt::Display for SpeedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SpeedKind::Sum => write!(f, "sum"),
            SpeedKind::EuclideanNorm => write!(f, "norm"),
            SpeedKind::PowerMean(p) => write!(f, "pmean:{p}"),
        }
    }
}

impl FromStr for SpeedFunction {
    type Err = Error;

    /// Parses `"sum"`, `"norm"` or `"pmean:<p>"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |token: &str| Error::SpeedParse {
            input: s.to_string(),
            token: token.to_string(),
        };
        let trimmed = s.trim();
        match trimmed {
            "sum" => Ok(Self::sum()),
            "norm" => Ok(Self::norm()),
            _ => {
                let (head, p) = trimmed.split_once(':').ok_or_else(|| bad(trimmed))?;
                if head != "pmean" {
                    return Err(bad(head));
                }
                let p: f64 = p.trim().parse().map_err(|_| bad(p))?;
                if p == 0.0 || !p.is_finite() {
                    return Err(bad(&p.to_string()));
                }
                Self::power_mean(p)
            }
        }
    }
}
