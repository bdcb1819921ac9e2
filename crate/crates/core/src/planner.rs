//! Centralized benchmark: social cost, the socially optimal threshold policy,
//! and the inefficiency of the equilibrium relative to it.
//!
//! The planner uses true probabilities regardless of how players perceive them.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::dbmf::{self, EpidemicParams, SocialState, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::game::{self, compare_candidates, CandidateState, EquilibriumResult, GameSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocialCostBreakdown {
    pub total: f64,
    /// Expected infected mass `sum_d x_{d,U} p_d`.
    pub infected_term: f64,
    /// `c * sum_d (m_d - x_{d,U})`
    pub vaccination_term: f64,
}

fn check_cost(c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("vaccination cost must lie in (0, 1), got {c}")))
    }
}

pub fn social_cost(params: &EpidemicParams, c: f64, x: &SocialState) -> Result<SocialCostBreakdown> {
    check_cost(c)?;
    let endemic = dbmf::endemic_state(params, x, DEFAULT_TOL)?;
    let infected_term = endemic.expected_infected(x);
    let vaccination_term = c * x.vaccinated(params.distribution()).iter().sum::<f64>();
    Ok(SocialCostBreakdown { total: infected_term + vaccination_term, infected_term, vaccination_term })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimumOptions {
    /// Fraction grid points per threshold degree.
    pub grid_points: usize,
    /// Golden-section refinement stops at this bracket width.
    pub refine_width: f64,
}

impl Default for OptimumOptions {
    fn default() -> Self {
        Self { grid_points: 1024, refine_width: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SocialOptimum {
    pub state: CandidateState,
    pub social_state: SocialState,
    pub cost: SocialCostBreakdown,
}

pub fn solve_social_optimum(params: &EpidemicParams, c: f64) -> Result<SocialOptimum> {
    solve_social_optimum_with(params, c, &OptimumOptions::default())
}

/// Minimizes the social cost over threshold states and the all-vaccinated corner.
///
/// Each threshold is searched on a dense fraction grid, then refined by golden
/// section around the best grid point. The cost is not known to be unimodal
/// in the fraction, so the grid comes first. A fraction of zero at threshold
/// `t` is the full state at the previous degree and is not revisited; ties
/// resolve to the smaller candidate.
pub fn solve_social_optimum_with(params: &EpidemicParams, c: f64, opts: &OptimumOptions) -> Result<SocialOptimum> {
    check_cost(c)?;
    if opts.grid_points < 3 {
        return Err(Error::Domain("optimum search needs at least 3 grid points".into()));
    }
    let dist = params.distribution();
    let per_threshold: Vec<(usize, f64, f64)> = (0..dist.len())
        .into_par_iter()
        .map(|i| best_fraction(params, c, i, opts).map(|(f, psi)| (i, f, psi)))
        .collect::<Result<_>>()?;

    let mut best = (CandidateState::ALL_VACCINATED, c);
    for (i, f, psi) in per_threshold {
        if psi < best.1 {
            best = (CandidateState { threshold: Some(dist.degrees()[i]), fraction: f }, psi);
        }
    }
    let social_state = best.0.to_social_state(dist)?;
    let cost = social_cost(params, c, &social_state)?;
    Ok(SocialOptimum { state: best.0, social_state, cost })
}

fn best_fraction(params: &EpidemicParams, c: f64, index: usize, opts: &OptimumOptions) -> Result<(f64, f64)> {
    let dist = params.distribution();
    let m = dist.mass()[index];
    let psi =
        |f: f64| -> Result<f64> { social_cost(params, c, &SocialState::threshold(dist, index, f)).map(|b| b.total) };
    let n = opts.grid_points;
    let step = m / (n - 1) as f64;
    let mut best = (1usize, f64::INFINITY);
    for j in 1..n {
        let f = if j == n - 1 { m } else { step * j as f64 };
        let value = psi(f)?;
        if value < best.1 {
            best = (j, value);
        }
    }
    let grid_f = |j: usize| if j >= n - 1 { m } else { step * j as f64 };
    let (mut a, mut b) = (grid_f(best.0 - 1), grid_f(best.0 + 1));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (psi(x1)?, psi(x2)?);
    while b - a > opts.refine_width {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = psi(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = psi(x2)?;
        }
    }
    let (refined, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if value < best.1 && refined > opts.refine_width {
        Ok((refined, value))
    } else {
        Ok((grid_f(best.0), best.1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InefficiencyReport {
    pub pne: EquilibriumResult,
    pub optimum: SocialOptimum,
    /// Optimum relative to the equilibrium.
    pub ordering: Ordering,
    /// Whether `optimum <= pne` is claimed: true players, or `c >= w(c)`.
    pub ordering_claimed: bool,
    /// `Psi(pne) - Psi(optimum)`
    pub gap: f64,
    /// `<d> / delta`
    pub bound: f64,
    /// The bound is claimed only for true expectation minimizers.
    pub bound_claimed: bool,
}

impl InefficiencyReport {
    pub fn ordering_holds(&self) -> bool {
        self.ordering != Ordering::Greater
    }

    pub fn bound_holds(&self) -> bool {
        self.gap <= self.bound
    }
}

pub fn inefficiency(spec: &GameSpec) -> Result<InefficiencyReport> {
    inefficiency_with(spec, &OptimumOptions::default())
}

pub fn inefficiency_with(spec: &GameSpec, opts: &OptimumOptions) -> Result<InefficiencyReport> {
    let params = spec.params();
    let c = spec.cost();
    let pne = game::solve_pne(spec)?;
    let optimum = solve_social_optimum_with(params, c, opts)?;
    let pne_cost = social_cost(params, c, &pne.social_state)?;
    let linear = spec.weighting().is_linear();
    let ordering_claimed = linear || c >= spec.weighting().weight(c)?;
    let dist = params.distribution();
    Ok(InefficiencyReport {
        ordering: compare_candidates(&optimum.state, &pne.state),
        ordering_claimed,
        gap: pne_cost.total - optimum.cost.total,
        bound: dist.mean_degree() / params.delta(),
        bound_claimed: linear,
        pne,
        optimum,
    })
}
