//! Probability perception: the identity map and the Prelec weighting function
//! `w(x) = exp(-(-ln x)^alpha)`.
//!
//! Prelec acts on `-ln x` as a plain power, so probabilities are carried as
//! [`Probability`], which stores `-ln p`. That keeps `w` and its inverse exact
//! to rounding even where `p` itself is not representable in an `f64`
//! (for instance `w^{-1}(1 - 1e-9)` at small `alpha`).

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prelec fixed point and inflection point, `1/e`, for every `alpha`.
pub const PRELEC_FIXED_POINT: f64 = 1.0 / E;

/// A probability stored as its negative logarithm, `-ln p` in `[0, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability {
    neg_ln: f64,
}

impl Probability {
    pub const ZERO: Probability = Probability { neg_ln: f64::INFINITY };
    pub const ONE: Probability = Probability { neg_ln: 0.0 };

    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("probability must lie in [0, 1], got {p}")));
        }
        Ok(Self { neg_ln: -p.ln() })
    }

    /// From `-ln p`; negative inputs are clamped to `p = 1`.
    pub fn from_neg_ln(neg_ln: f64) -> Self {
        Self { neg_ln: neg_ln.max(0.0) }
    }

    /// From the odds `p / (1 - p)`.
    pub fn from_odds(odds: f64) -> Self {
        if odds <= 0.0 {
            Self::ZERO
        } else {
            Self { neg_ln: (1.0 / odds).ln_1p() }
        }
    }

    pub fn neg_ln(self) -> f64 {
        self.neg_ln
    }

    pub fn value(self) -> f64 {
        (-self.neg_ln).exp()
    }

    /// `1 - p`, accurate when `p` is close to one.
    pub fn complement(self) -> f64 {
        -(-self.neg_ln).exp_m1()
    }

    /// `p / (1 - p)`, infinite at `p = 1`.
    pub fn odds(self) -> f64 {
        1.0 / self.neg_ln.exp_m1()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", try_from = "RawWeighting")]
pub enum WeightingSpec {
    Identity,
    Prelec { alpha: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RawWeighting {
    Identity,
    Prelec { alpha: f64 },
}

impl TryFrom<RawWeighting> for WeightingSpec {
    type Error = Error;

    fn try_from(raw: RawWeighting) -> Result<Self> {
        match raw {
            RawWeighting::Identity => Ok(WeightingSpec::Identity),
            RawWeighting::Prelec { alpha } => WeightingSpec::prelec(alpha),
        }
    }
}

impl WeightingSpec {
    pub fn prelec(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!("Prelec alpha must lie in (0, 1], got {alpha}")));
        }
        Ok(WeightingSpec::Prelec { alpha })
    }

    /// True when `w(x) = x` identically (identity, or Prelec with `alpha = 1`).
    pub fn is_linear(&self) -> bool {
        match *self {
            WeightingSpec::Identity => true,
            WeightingSpec::Prelec { alpha } => alpha == 1.0,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            WeightingSpec::Identity => None,
            WeightingSpec::Prelec { alpha } => Some(alpha),
        }
    }

    /// Label used in tables: `identity` or the Prelec `alpha`.
    pub fn label(&self) -> String {
        match *self {
            WeightingSpec::Identity => "identity".to_string(),
            WeightingSpec::Prelec { alpha } => format!("{alpha}"),
        }
    }

    /// Point where over- turns into underweighting, if the map is nonlinear.
    pub fn crossover(&self) -> Option<f64> {
        if self.is_linear() {
            None
        } else {
            Some(PRELEC_FIXED_POINT)
        }
    }

    pub fn weight(&self, x: f64) -> Result<f64> {
        match *self {
            WeightingSpec::Identity => {
                Probability::new(x)?;
                Ok(x)
            }
            WeightingSpec::Prelec { .. } => Ok(self.weight_probability(Probability::new(x)?).value()),
        }
    }

    pub fn weight_probability(&self, p: Probability) -> Probability {
        match *self {
            WeightingSpec::Identity => p,
            WeightingSpec::Prelec { alpha } => prelec_power(p, alpha),
        }
    }

    /// `w^{-1}(y)`, in closed form for Prelec: `exp(-(-ln y)^{1/alpha})`.
    pub fn weight_inverse(&self, y: f64) -> Result<Probability> {
        let p = Probability::new(y)?;
        Ok(self.inverse_probability(p))
    }

    pub fn inverse_probability(&self, p: Probability) -> Probability {
        match *self {
            WeightingSpec::Identity => p,
            WeightingSpec::Prelec { alpha } => prelec_power(p, 1.0 / alpha),
        }
    }

    /// `w'(x)` for `x` in the open unit interval.
    pub fn derivative(&self, p: Probability) -> f64 {
        match *self {
            WeightingSpec::Identity => 1.0,
            WeightingSpec::Prelec { alpha } => {
                let l = p.neg_ln();
                // w'(x) = w(x) * alpha * L^(alpha-1) / x with L = -ln x
                (-l.powf(alpha) + l).exp() * alpha * l.powf(alpha - 1.0)
            }
        }
    }
}

fn prelec_power(p: Probability, exponent: f64) -> Probability {
    let l = p.neg_ln();
    if l == 0.0 || l.is_infinite() {
        return p;
    }
    Probability::from_neg_ln(l.powf(exponent))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeCheck {
    Monotone,
    Curvature,
    Crossover,
    EndpointSlope,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeOutcome {
    Pass,
    Fail { check: ShapeCheck, x: f64 },
    Skipped(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeReport {
    pub outcome: ShapeOutcome,
    /// Grid location where the second difference changes sign.
    pub inflection: Option<f64>,
    pub grid_size: usize,
}

impl ShapeReport {
    pub fn passed(&self) -> bool {
        self.outcome == ShapeOutcome::Pass
    }
}

/// Second differences below this magnitude are treated as zero.
const CURVATURE_NOISE: f64 = 1e-13;

/// Checks the inverse-S shape of `w` on the uniform grid `i / (n + 1)`.
///
/// Linear maps are reported as skipped: they have no inflection. The
/// unbounded endpoint slopes are checked qualitatively through the analytic
/// derivative at offsets `1e-3, 1e-6, 1e-9` from each end, which must grow
/// strictly toward the endpoint and exceed the unit secant slope.
pub fn verify_shape(spec: &WeightingSpec, grid_size: usize) -> Result<ShapeReport> {
    if grid_size < 100 {
        return Err(Error::Domain(format!("grid_size must be at least 100, got {grid_size}")));
    }
    let mut report = ShapeReport { outcome: ShapeOutcome::Pass, inflection: None, grid_size };
    if spec.is_linear() {
        report.outcome = ShapeOutcome::Skipped("linear weighting has no inflection point");
        return Ok(report);
    }
    let h = 1.0 / (grid_size as f64 + 1.0);
    let xs: Vec<f64> = (1..=grid_size).map(|i| i as f64 * h).collect();
    let ws: Vec<f64> = xs.iter().map(|&x| spec.weight(x)).collect::<Result<_>>()?;
    let fail = |check, x| ShapeOutcome::Fail { check, x };

    if let Some(i) = (1..ws.len()).find(|&i| ws[i] <= ws[i - 1]) {
        report.outcome = fail(ShapeCheck::Monotone, xs[i]);
        return Ok(report);
    }

    // concave first, then convex: one sign change from - to +
    let mut seen_convex = false;
    for i in 1..ws.len() - 1 {
        let second = ws[i - 1] - 2.0 * ws[i] + ws[i + 1];
        if second.abs() <= CURVATURE_NOISE {
            continue;
        }
        if second > 0.0 && !seen_convex {
            seen_convex = true;
            report.inflection = Some(xs[i]);
        } else if second < 0.0 && seen_convex {
            report.outcome = fail(ShapeCheck::Curvature, xs[i]);
            return Ok(report);
        }
    }
    let x0 = spec.crossover().expect("nonlinear weighting has a crossover");
    match report.inflection {
        Some(xi) if (xi - x0).abs() <= 2.0 * h => {}
        Some(xi) => {
            report.outcome = fail(ShapeCheck::Curvature, xi);
            return Ok(report);
        }
        None => {
            report.outcome = fail(ShapeCheck::Curvature, xs[xs.len() - 1]);
            return Ok(report);
        }
    }

    for (&x, &w) in xs.iter().zip(&ws) {
        if (x - x0).abs() < 1e-9 {
            continue;
        }
        let ok = if x < x0 { w > x } else { w < x };
        if !ok {
            report.outcome = fail(ShapeCheck::Crossover, x);
            return Ok(report);
        }
    }

    let offsets = [1e-3, 1e-6, 1e-9];
    let near_zero: Vec<f64> = offsets.iter().map(|&e| spec.derivative(Probability::new(e).unwrap())).collect();
    let near_one: Vec<f64> =
        offsets.iter().map(|&e| spec.derivative(Probability::from_neg_ln(-(-e).ln_1p()))).collect();
    for (slopes, at) in [(&near_zero, 0.0), (&near_one, 1.0)] {
        let growing = slopes.windows(2).all(|s| s[1] > s[0]);
        if !growing || slopes[slopes.len() - 1] <= 1.0 {
            report.outcome = fail(ShapeCheck::EndpointSlope, at);
            return Ok(report);
        }
    }
    Ok(report)
}
