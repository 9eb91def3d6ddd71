use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The homogeneous additive kernels supported by the feature maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Hellinger,
    ChiSquare,
    Intersection,
    JensenShannon,
    HeinBousquet,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Hellinger => "hellinger",
            KernelKind::ChiSquare => "chi2",
            KernelKind::Intersection => "intersection",
            KernelKind::JensenShannon => "js",
            KernelKind::HeinBousquet => "hein_bousquet",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hellinger" => Ok(KernelKind::Hellinger),
            "chi2" | "chi-square" | "chisquare" | "chi_square" => Ok(KernelKind::ChiSquare),
            "intersection" | "min" => Ok(KernelKind::Intersection),
            "js" | "jensen-shannon" | "jensenshannon" | "jensen_shannon" => {
                Ok(KernelKind::JensenShannon)
            }
            "hein-bousquet" | "heinbousquet" | "hein_bousquet" | "hb" => {
                Ok(KernelKind::HeinBousquet)
            }
            other => Err(Error::InvalidKernel(format!("unknown kernel '{other}'"))),
        }
    }
}

/// A validated kernel choice.
///
/// `alpha` and `beta` are only meaningful for [`KernelKind::HeinBousquet`];
/// `alpha = +inf` and `beta = -inf` are accepted as the limiting members of
/// that family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    kind: KernelKind,
    alpha: f64,
    beta: f64,
}

impl KernelSpec {
    pub fn hellinger() -> Self {
        Self::simple(KernelKind::Hellinger)
    }

    pub fn chi_square() -> Self {
        Self::simple(KernelKind::ChiSquare)
    }

    pub fn intersection() -> Self {
        Self::simple(KernelKind::Intersection)
    }

    pub fn jensen_shannon() -> Self {
        Self::simple(KernelKind::JensenShannon)
    }

    fn simple(kind: KernelKind) -> Self {
        KernelSpec {
            kind,
            alpha: 0.0,
            beta: 0.0,
        }
    }

    /// Member of the two-parameter Hilbertian metric family. Valid when
    /// `alpha` is in `[1, inf]` and `beta` is in `[1/2, alpha]` or `[-inf, -1]`.
    pub fn hein_bousquet(alpha: f64, beta: f64) -> Result<Self> {
        let alpha_ok = !alpha.is_nan() && alpha >= 1.0;
        let beta_ok = !beta.is_nan() && ((0.5..=alpha).contains(&beta) || beta <= -1.0);
        // alpha = inf with beta = -inf makes the normaliser vanish.
        let degenerate = alpha == f64::INFINITY && beta == f64::NEG_INFINITY;
        if !alpha_ok || !beta_ok || degenerate {
            return Err(Error::InvalidKernel(format!(
                "hein_bousquet requires alpha in [1, inf] and beta in [1/2, alpha] or [-inf, -1]; got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(KernelSpec {
            kind: KernelKind::HeinBousquet,
            alpha,
            beta,
        })
    }

    /// Build from a kind plus optional family parameters.
    pub fn new(kind: KernelKind, alpha: Option<f64>, beta: Option<f64>) -> Result<Self> {
        match kind {
            KernelKind::HeinBousquet => match (alpha, beta) {
                (Some(a), Some(b)) => Self::hein_bousquet(a, b),
                _ => Err(Error::InvalidKernel(
                    "hein_bousquet needs both alpha and beta".into(),
                )),
            },
            _ => Ok(Self::simple(kind)),
        }
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn alpha(&self) -> Option<f64> {
        (self.kind == KernelKind::HeinBousquet).then_some(self.alpha)
    }

    pub fn beta(&self) -> Option<f64> {
        (self.kind == KernelKind::HeinBousquet).then_some(self.beta)
    }

    /// Homogeneity degree. Every supported kernel is 1-homogeneous.
    pub fn gamma(&self) -> f64 {
        1.0
    }

    /// Scalar kernel `k(a, b)` for nonnegative `a`, `b`.
    pub fn eval_scalar(&self, a: f64, b: f64) -> f64 {
        match self.kind {
            KernelKind::Hellinger => (a * b).sqrt(),
            KernelKind::ChiSquare => {
                let s = a + b;
                if s > 0.0 {
                    2.0 * a * b / s
                } else {
                    0.0
                }
            }
            KernelKind::Intersection => a.min(b),
            KernelKind::JensenShannon => 0.5 * (xlog2_ratio(a, a + b) + xlog2_ratio(b, a + b)),
            KernelKind::HeinBousquet => {
                0.5 * (self.hb_dist2(a, 0.0) + self.hb_dist2(b, 0.0) - self.hb_dist2(a, b))
            }
        }
    }

    /// Squared Hein–Bousquet distance on the half line, normalised so that
    /// it is nonnegative for every valid `(alpha, beta)`.
    fn hb_dist2(&self, a: f64, b: f64) -> f64 {
        let (alpha, beta) = (self.alpha, self.beta);
        if a == b {
            return 0.0;
        }
        if alpha == beta {
            return hb_limit(a, b, beta);
        }
        // 2^{1/b} M_a' - 2^{1/a} M_b' over |2^{1/a} - 2^{1/b}|, with M_x' the
        // unnormalised power sum (a^x + b^x)^{1/x}.
        let two_a = (1.0 / alpha).exp2();
        let two_b = (1.0 / beta).exp2();
        let num = two_b * power_sum(a, b, alpha) - two_a * power_sum(a, b, beta);
        num / (two_a - two_b).abs()
    }

    /// Signature `kappa(lambda) = k(e^{lambda/2}, e^{-lambda/2})`.
    pub fn signature(&self, lambda: f64) -> f64 {
        match self.kind {
            KernelKind::Hellinger => 1.0,
            KernelKind::ChiSquare => sech(0.5 * lambda),
            KernelKind::Intersection => (-0.5 * lambda.abs()).exp(),
            KernelKind::JensenShannon => {
                let h = 0.5 * lambda;
                0.5 * h.exp() * ln_1p_exp(-lambda) / LN_2 + 0.5 * (-h).exp() * ln_1p_exp(lambda) / LN_2
            }
            KernelKind::HeinBousquet => {
                let h = 0.5 * lambda;
                self.eval_scalar(h.exp(), (-h).exp())
            }
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            KernelKind::HeinBousquet => {
                write!(f, "hein_bousquet(alpha={}, beta={})", self.alpha, self.beta)
            }
            kind => write!(f, "{kind}"),
        }
    }
}

/// Additive kernel `K(x, y) = sum_l k(x_l, y_l)`.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let mut sum = 0.0;
    for (l, (&a, &b)) in x.iter().zip(y).enumerate() {
        if a < 0.0 || b < 0.0 {
            // row 0 is `x`, row 1 is `y`
            return Err(Error::NegativeEntry {
                row: usize::from(a >= 0.0),
                feature: l,
                value: if a < 0.0 { a } else { b },
            });
        }
        sum += spec.eval_scalar(a, b);
    }
    Ok(sum)
}

pub(crate) fn sech(x: f64) -> f64 {
    let ax = x.abs();
    if ax > 700.0 {
        return 0.0;
    }
    let e = (-ax).exp();
    2.0 * e / (1.0 + e * e)
}

/// `ln(1 + e^x)` without overflow.
fn ln_1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `a * log2(s / a)` with the `0 log 0 = 0` convention.
fn xlog2_ratio(a: f64, s: f64) -> f64 {
    if a > 0.0 {
        a * (s / a).log2()
    } else {
        0.0
    }
}

/// `(a^x + b^x)^{1/x}`, including the `x = +inf` (max) and negative-`x`
/// cases where a zero argument forces the result to zero.
fn power_sum(a: f64, b: f64, x: f64) -> f64 {
    if x == f64::INFINITY {
        return a.max(b);
    }
    if x == f64::NEG_INFINITY {
        return a.min(b);
    }
    if x < 0.0 && (a == 0.0 || b == 0.0) {
        return 0.0;
    }
    let m = a.max(b);
    if m == 0.0 {
        return 0.0;
    }
    // Factor out the larger argument to keep the powers bounded.
    let (ra, rb) = (a / m, b / m);
    m * (ra.powf(x) + rb.powf(x)).powf(1.0 / x)
}

/// Pointwise limit of the squared distance as `alpha -> beta`.
fn hb_limit(a: f64, b: f64, beta: f64) -> f64 {
    if beta == f64::INFINITY {
        return (a - b).abs();
    }
    let m = a.max(b);
    let (ra, rb) = (a / m, b / m);
    let (pa, pb) = (ra.powf(beta), rb.powf(beta));
    let s = pa + pb;
    let term = |t: f64| {
        if t > 0.0 {
            (t / s) * (2.0 * t / s).ln()
        } else {
            0.0
        }
    };
    m * s.powf(1.0 / beta) / LN_2 * (term(pa) + term(pb))
}
