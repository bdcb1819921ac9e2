//! Analytic bounds for power-law networks with degrees `d0..=D`.
//!
//! All bounds use the finite-sum normalization `kappa` and mean degree of the
//! distribution object, through `B1 = exp(delta <d> / kappa)`.

use rayon::prelude::*;

use crate::dbmf::{self, EpidemicParams, SocialState, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::game::{self, GameSpec};
use crate::weighting::{Probability, WeightingSpec};

/// `R(x_t)` must exceed one by this much for the endemic ratio bounds.
pub const ENDEMIC_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawBoundContext {
    params: EpidemicParams,
    kappa: f64,
    beta: f64,
    b1: f64,
}

impl PowerLawBoundContext {
    pub fn new(params: &EpidemicParams) -> Result<Self> {
        let dist = params.distribution();
        let info = dist
            .power_law_info()
            .ok_or_else(|| Error::Precondition("bounds require a power-law constructed distribution".into()))?;
        let b1 = (params.delta() * dist.mean_degree() / info.kappa).exp();
        Ok(Self { params: params.clone(), kappa: info.kappa, beta: info.beta, b1 })
    }

    pub fn params(&self) -> &EpidemicParams {
        &self.params
    }

    /// `B1 = exp(delta <d> / kappa)`
    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn d0(&self) -> u32 {
        self.params.distribution().min_degree()
    }

    pub fn d_max(&self) -> u32 {
        self.params.distribution().max_degree()
    }

    fn require_beta_range(&self) -> Result<()> {
        if (2.0..=3.0).contains(&self.beta) {
            Ok(())
        } else {
            Err(Error::Precondition(format!("exponent {} outside [2, 3]", self.beta)))
        }
    }

    fn require_beta3_d0(&self) -> Result<()> {
        if (self.beta - 3.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!("exponent must be 3, got {}", self.beta)));
        }
        if self.d0() < 2 {
            return Err(Error::Precondition(format!("minimum degree must exceed 1, got {}", self.d0())));
        }
        Ok(())
    }

    /// `v(x_t)` after checking `R(x_t) > 1 + 1e-9`.
    fn endemic_v(&self, t: u32) -> Result<f64> {
        let dist = self.params.distribution();
        let x = SocialState::full_threshold(dist, dist.index_of(t)?);
        let e = dbmf::endemic_state(&self.params, &x, DEFAULT_TOL)?;
        if e.reproduction <= 1.0 + ENDEMIC_MARGIN || e.v <= 0.0 {
            return Err(Error::Precondition(format!("threshold {t} is not endemic (R = {})", e.reproduction)));
        }
        Ok(e.v)
    }

    /// `t v / (delta + t v)` at the full-threshold state `x_t`.
    pub fn endemic_ratio(&self, t: u32) -> Result<f64> {
        let v = self.endemic_v(t)?;
        let tv = f64::from(t) * v;
        Ok(tv / (self.params.delta() + tv))
    }
}

/// `(t - d0 B1) / (t - d0)`, a lower bound on the endemic ratio at `x_t`.
pub fn endemic_ratio_lower(ctx: &PowerLawBoundContext, t: u32) -> Result<f64> {
    ctx.require_beta_range()?;
    let d0 = ctx.d0();
    if t == d0 {
        return Err(Error::Domain(format!("lower bound undefined at t = d0 = {d0}")));
    }
    ctx.endemic_v(t)?;
    let (t, d0) = (f64::from(t), f64::from(d0));
    Ok((t - d0 * ctx.b1()) / (t - d0))
}

/// `(t - (d0 - 1) B1) / (t - d0 + 1)`, an upper bound on the endemic ratio
/// at `x_t` for exponent 3 and `d0 > 1`.
pub fn endemic_ratio_upper(ctx: &PowerLawBoundContext, t: u32) -> Result<f64> {
    ctx.require_beta3_d0()?;
    ctx.endemic_v(t)?;
    let (t, d0) = (f64::from(t), f64::from(ctx.d0()));
    Ok((t - (d0 - 1.0) * ctx.b1()) / (t - d0 + 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndemicRatioCheck {
    pub t: u32,
    pub ratio: f64,
    pub lower: f64,
    pub upper: Option<f64>,
}

impl EndemicRatioCheck {
    pub fn holds(&self) -> bool {
        self.lower <= self.ratio && self.upper.is_none_or(|u| self.ratio <= u)
    }
}

/// Both sides of the endemic-ratio bounds at every endemic threshold `t > d0`.
pub fn endemic_ratio_table(ctx: &PowerLawBoundContext) -> Result<Vec<EndemicRatioCheck>> {
    ctx.require_beta_range()?;
    let with_upper = ctx.require_beta3_d0().is_ok();
    let dist = ctx.params().distribution();
    let mut rows = Vec::new();
    for &t in &dist.degrees()[1..] {
        let Ok(ratio) = ctx.endemic_ratio(t) else { continue };
        let lower = endemic_ratio_lower(ctx, t)?;
        let upper = if with_upper { Some(endemic_ratio_upper(ctx, t)?) } else { None };
        rows.push(EndemicRatioCheck { t, ratio, lower, upper });
    }
    Ok(rows)
}

/// `min(D, 1 + d0 + d0 (B1 - 1) / (1 - w^{-1}(c)))`.
pub fn threshold_upper_bound(ctx: &PowerLawBoundContext, w: &WeightingSpec, c: f64) -> Result<f64> {
    ctx.require_beta_range()?;
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!("vaccination cost must lie in (0, 1), got {c}")));
    }
    let one_minus_u = w.weight_inverse(c)?.complement();
    let d0 = f64::from(ctx.d0());
    let bound = 1.0 + d0 + d0 * (ctx.b1() - 1.0) / one_minus_u;
    Ok(bound.min(f64::from(ctx.d_max())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichRow {
    pub c: f64,
    pub d_t: u32,
    pub d_w: u32,
    pub lower_t: f64,
    pub upper_t: f64,
    pub lower_w: f64,
    pub upper_w: f64,
    /// `d_w / d_t`
    pub ratio: f64,
    /// `(1 - c) / (1 - w^{-1}(c))`
    pub theta_proxy: f64,
    /// A bound on the true-perception threshold reaches the maximum degree.
    pub clipped_t: bool,
    pub clipped_w: bool,
}

impl SandwichRow {
    pub fn holds_t(&self) -> bool {
        self.lower_t <= f64::from(self.d_t) && f64::from(self.d_t) <= self.upper_t
    }

    pub fn holds_w(&self) -> bool {
        self.lower_w <= f64::from(self.d_w) && f64::from(self.d_w) <= self.upper_w
    }

    pub fn uninformative(&self) -> bool {
        self.clipped_t || self.clipped_w
    }
}

/// Equilibrium thresholds under true and Prelec perception against
///
/// ```text
/// (d0 - 1)(B1 - 1) / (1 - u) + d0 - 1  <=  d  <=  d0 (B1 - 1) / (1 - u) + d0 + 1
/// ```
///
/// with `u = c` for true perception and `u = w^{-1}(c)` under weighting.
pub fn ratio_sandwich(ctx: &PowerLawBoundContext, alpha: f64, c_grid: &[f64]) -> Result<Vec<SandwichRow>> {
    ctx.require_beta3_d0()?;
    let prelec = WeightingSpec::prelec(alpha)?;
    let v_full = game::full_threshold_infection(ctx.params())?;
    let d0 = f64::from(ctx.d0());
    let d_max = f64::from(ctx.d_max());
    let b1m = ctx.b1() - 1.0;
    c_grid
        .par_iter()
        .map(|&c| {
            let truthful = GameSpec::new(ctx.params().clone(), WeightingSpec::Identity, c)?;
            let d_t = game::solve_pne_with(&truthful, &v_full)?.threshold();
            let d_w = game::solve_pne_with(&truthful.with_weighting(prelec), &v_full)?.threshold();
            let one_minus_c = 1.0 - c;
            let one_minus_u = prelec.inverse_probability(Probability::new(c)?).complement();
            let sandwich = |gap: f64| ((d0 - 1.0) * b1m / gap + d0 - 1.0, d0 * b1m / gap + d0 + 1.0);
            let (lower_t, upper_t) = sandwich(one_minus_c);
            let (lower_w, upper_w) = sandwich(one_minus_u);
            Ok(SandwichRow {
                c,
                d_t,
                d_w,
                lower_t,
                upper_t,
                lower_w,
                upper_w,
                ratio: f64::from(d_w) / f64::from(d_t),
                theta_proxy: one_minus_c / one_minus_u,
                clipped_t: upper_t >= d_max || lower_t >= d_max,
                clipped_w: upper_w >= d_max || lower_w >= d_max,
            })
        })
        .collect()
}
