//! The vaccination population game and its threshold Nash equilibrium.
//!
//! An unprotected node of degree `d` pays its perceived infection probability
//! `w(p_d(x))`; a vaccinated node pays `c`. Every equilibrium is a candidate
//! state (all degrees below a threshold unprotected, all above vaccinated,
//! possibly fractional at the threshold), and the equilibrium is unique, so it
//! is found by scanning thresholds in ascending order against the window
//!
//! ```text
//! d_w v <= K <= d_next v,    K = delta u / (1 - u),  u = w^{-1}(c)
//! ```

use std::cmp::Ordering;

use crate::dbmf::{self, EndemicState, EpidemicParams, SocialState, DEFAULT_TOL};
use crate::degree::DegreeDistribution;
use crate::error::{Error, Result};
use crate::weighting::{Probability, WeightingSpec};

/// Absolute slack when comparing `K` with window edges `t * v_t`.
pub const WINDOW_SLACK: f64 = 1e-9;
/// Resulting `R` within this distance of one marks a near-critical equilibrium.
const NEAR_CRITICAL_R: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    params: EpidemicParams,
    weighting: WeightingSpec,
    cost: f64,
}

impl GameSpec {
    pub fn new(params: EpidemicParams, weighting: WeightingSpec, cost: f64) -> Result<Self> {
        if !(cost > 0.0 && cost < 1.0) {
            return Err(Error::Domain(format!("vaccination cost must lie in (0, 1), got {cost}")));
        }
        if !params.endemic_without_vaccination() {
            let d = params.distribution();
            return Err(Error::Precondition(format!(
                "curing rate {} must be below <d^2>/<d> = {}",
                params.delta(),
                d.second_moment() / d.mean_degree()
            )));
        }
        Ok(Self { params, weighting, cost })
    }

    pub fn params(&self) -> &EpidemicParams {
        &self.params
    }

    pub fn distribution(&self) -> &DegreeDistribution {
        self.params.distribution()
    }

    pub fn weighting(&self) -> &WeightingSpec {
        &self.weighting
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Same game with a different perception of probabilities.
    pub fn with_weighting(&self, weighting: WeightingSpec) -> Self {
        Self { weighting, ..self.clone() }
    }

    /// `K = delta w^{-1}(c) / (1 - w^{-1}(c))`.
    pub fn critical_load(&self) -> f64 {
        let u = self.weighting.inverse_probability(Probability::new(self.cost).expect("cost in (0, 1)"));
        self.params.delta() * u.odds()
    }
}

/// A threshold state; `threshold == None` is the everyone-vaccinated corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateState {
    pub threshold: Option<u32>,
    /// Unprotected mass at the threshold degree, in `(0, m_threshold]`.
    pub fraction: f64,
}

impl CandidateState {
    pub const ALL_VACCINATED: CandidateState = CandidateState { threshold: None, fraction: 0.0 };

    pub fn new(dist: &DegreeDistribution, threshold: u32, fraction: f64) -> Result<Self> {
        let m = dist.mass_of(threshold)?;
        if !(fraction > 0.0 && fraction <= m) {
            return Err(Error::Domain(format!(
                "threshold fraction {fraction} outside (0, {m}] for degree {threshold}"
            )));
        }
        Ok(Self { threshold: Some(threshold), fraction })
    }

    /// Full-threshold state: every degree up to `threshold` unprotected.
    pub fn full(dist: &DegreeDistribution, threshold: u32) -> Result<Self> {
        Self::new(dist, threshold, dist.mass_of(threshold)?)
    }

    pub fn to_social_state(&self, dist: &DegreeDistribution) -> Result<SocialState> {
        match self.threshold {
            None => Ok(SocialState::all_vaccinated(dist)),
            Some(t) => Ok(SocialState::threshold(dist, dist.index_of(t)?, self.fraction)),
        }
    }

    /// Recognizes a candidate state; non-candidate states are rejected.
    pub fn from_social_state(dist: &DegreeDistribution, x: &SocialState) -> Result<Self> {
        x.check(dist)?;
        let xs = x.unprotected();
        let Some(top) = xs.iter().rposition(|&u| u > 0.0) else {
            return Ok(Self::ALL_VACCINATED);
        };
        let masses = dist.mass();
        if let Some(i) = (0..top).find(|&i| (xs[i] - masses[i]).abs() > 1e-14 * masses[i].max(1.0)) {
            return Err(Error::Consistency(format!(
                "not a candidate state: degree {} below the threshold is partially vaccinated",
                dist.degrees()[i]
            )));
        }
        Ok(Self { threshold: Some(dist.degrees()[top]), fraction: xs[top].min(masses[top]) })
    }
}

/// Total order on candidate states by unprotected population.
pub fn compare_candidates(a: &CandidateState, b: &CandidateState) -> Ordering {
    match (a.threshold, b.threshold) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(ta), Some(tb)) => ta.cmp(&tb).then(a.fraction.total_cmp(&b.fraction)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumCase {
    /// The threshold degree is split between the two actions.
    Interior,
    /// The threshold degree is entirely unprotected.
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub state: CandidateState,
    pub social_state: SocialState,
    pub case: EquilibriumCase,
    pub v: f64,
    /// `K`
    pub critical_load: f64,
    /// `(d_w v, d_next v)`; the upper edge is infinite at the maximum degree.
    pub window: (f64, f64),
    pub perceived_cost_at_threshold: f64,
    pub expected_infected: f64,
    /// True-probability social cost of the equilibrium.
    pub social_cost: f64,
    /// `K` sat within [`WINDOW_SLACK`] of a window edge.
    pub window_tie: bool,
    /// The equilibrium state has `R` within `1e-9` of one.
    pub near_critical: bool,
}

impl EquilibriumResult {
    pub fn threshold(&self) -> u32 {
        self.state.threshold.expect("equilibria are never fully vaccinated")
    }
}

/// `w(p_d(x))` for an unprotected node of degree `d`.
pub fn unprotected_cost(spec: &GameSpec, x: &SocialState, d: u32) -> Result<f64> {
    let dist = spec.distribution();
    let i = dist.index_of(d)?;
    let e = dbmf::endemic_state(spec.params(), x, DEFAULT_TOL)?;
    Ok(perceived(spec, dist.degrees()[i], e.v))
}

fn perceived(spec: &GameSpec, d: u32, v: f64) -> f64 {
    let odds = f64::from(d) * v / spec.params().delta();
    spec.weighting().weight_probability(Probability::from_odds(odds)).value()
}

/// `v` at every full-threshold state, in degree order.
pub fn full_threshold_infection(params: &EpidemicParams) -> Result<Vec<f64>> {
    let dist = params.distribution();
    (0..dist.len())
        .map(|i| dbmf::endemic_state(params, &SocialState::full_threshold(dist, i), DEFAULT_TOL).map(|e| e.v))
        .collect()
}

/// The unique pure Nash equilibrium, by threshold scan.
pub fn solve_pne(spec: &GameSpec) -> Result<EquilibriumResult> {
    let v_full = full_threshold_infection(spec.params())?;
    solve_pne_with(spec, &v_full)
}

/// [`solve_pne`] reusing precomputed full-threshold infection levels.
pub fn solve_pne_with(spec: &GameSpec, v_full: &[f64]) -> Result<EquilibriumResult> {
    let dist = spec.distribution();
    if v_full.len() != dist.len() {
        return Err(Error::Consistency("full-threshold levels do not match the degree set".into()));
    }
    let delta = spec.params().delta();
    let k = spec.critical_load();
    // every equilibrium has v >= K / D, which must stay above the bisection floor
    if k < f64::from(dist.max_degree()) * dbmf::V_FLOOR {
        return Err(Error::Range(format!(
            "critical load K = {k:e} at c = {}: equilibrium infection level is below 1e-300",
            spec.cost()
        )));
    }
    let degrees = dist.degrees();
    let masses = dist.mass();

    let mut hits = Vec::new();
    for (i, (&t, &v_t)) in degrees.iter().zip(v_full).enumerate() {
        let td = f64::from(t);
        let v_prev = if i == 0 { 0.0 } else { v_full[i - 1] };
        let next = degrees.get(i + 1).map(|&n| f64::from(n));
        if v_t <= 0.0 {
            continue;
        }
        let lower_interior = if v_prev > 0.0 { td * v_prev + WINDOW_SLACK } else { 0.0 };
        if k > lower_interior && k < td * v_t - WINDOW_SLACK {
            let v_star = k / td;
            let below: f64 = degrees[..i]
                .iter()
                .zip(&masses[..i])
                .map(|(&d, m)| {
                    let d = f64::from(d);
                    d * d * m / (delta + d * v_star)
                })
                .sum();
            let f = (dist.mean_degree() - below) * (delta + td * v_star) / (td * td);
            if !(f > -1e-15 && f < masses[i] + 1e-15) {
                return Err(Error::Internal(format!("interior fraction {f} at degree {t} outside (0, {})", masses[i])));
            }
            let f = f.clamp(f64::MIN_POSITIVE, masses[i]);
            hits.push((i, EquilibriumCase::Interior, f, v_star, false));
        }
        let upper_ok = next.is_none_or(|n| k <= n * v_t + WINDOW_SLACK);
        if k + WINDOW_SLACK >= td * v_t && upper_ok {
            let tie = (k - td * v_t).abs() <= WINDOW_SLACK || next.is_some_and(|n| (k - n * v_t).abs() <= WINDOW_SLACK);
            hits.push((i, EquilibriumCase::Boundary, masses[i], v_t, tie));
        }
    }
    if hits.len() != 1 {
        return Err(Error::Internal(format!(
            "threshold scan found {} equilibrium windows for c = {} (K = {k})",
            hits.len(),
            spec.cost()
        )));
    }
    let (i, case, fraction, v, window_tie) = hits[0];
    let t = degrees[i];
    let social_state = SocialState::threshold(dist, i, fraction);
    let r = dbmf::reproduction(spec.params(), &social_state)?;
    if !dbmf::endemic_state(spec.params(), &social_state, DEFAULT_TOL)?.is_endemic() {
        return Err(Error::Range(format!(
            "equilibrium infection level {v:e} at c = {} is below what the state can resolve (R = {r})",
            spec.cost()
        )));
    }
    let p = dbmf::infection_probabilities(spec.params(), v);
    let expected_infected: f64 = social_state.unprotected().iter().zip(&p).map(|(x, p)| x * p).sum();
    let social_cost = expected_infected + spec.cost() * (1.0 - social_state.total_unprotected());
    let upper = degrees.get(i + 1).map_or(f64::INFINITY, |&n| f64::from(n) * v);
    Ok(EquilibriumResult {
        state: CandidateState { threshold: Some(t), fraction },
        social_state,
        case,
        v,
        critical_load: k,
        window: (f64::from(t) * v, upper),
        perceived_cost_at_threshold: perceived(spec, t, v),
        expected_infected,
        social_cost,
        window_tie,
        near_critical: r <= 1.0 + NEAR_CRITICAL_R,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PneCertificate {
    pub max_violation: f64,
    /// Degree attaining the largest violation.
    pub worst_degree: u32,
    /// `v` recomputed from the state by the fixed-point solver.
    pub endemic: EndemicState,
    pub tol: f64,
}

impl PneCertificate {
    pub fn passed(&self) -> bool {
        self.max_violation <= self.tol
    }
}

/// Checks the equilibrium conditions on a social state directly: unprotected
/// mass requires `w(p_d) <= c`, vaccinated mass requires `w(p_d) >= c`.
pub fn verify_state(spec: &GameSpec, x: &SocialState, tol: f64) -> Result<PneCertificate> {
    let dist = spec.distribution();
    let endemic = dbmf::endemic_state(spec.params(), x, DEFAULT_TOL)?;
    let c = spec.cost();
    let vaccinated = x.vaccinated(dist);
    let mut worst = (0.0, dist.min_degree());
    for (i, &d) in dist.degrees().iter().enumerate() {
        let cost_u = perceived(spec, d, endemic.v);
        let mut violation: f64 = 0.0;
        if x.unprotected()[i] > 0.0 {
            violation = violation.max(cost_u - c);
        }
        if vaccinated[i] > 0.0 {
            violation = violation.max(c - cost_u);
        }
        if violation > worst.0 {
            worst = (violation, d);
        }
    }
    Ok(PneCertificate { max_violation: worst.0, worst_degree: worst.1, endemic, tol })
}

pub fn verify_pne(spec: &GameSpec, result: &EquilibriumResult, tol: f64) -> Result<PneCertificate> {
    verify_state(spec, &result.social_state, tol)
}

/// Which side of the weighting's diagonal the cost lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostRegime {
    /// `c > w(c)`: weighted players vaccinate less.
    AboveWeight,
    /// `c < w(c)`: weighted players vaccinate more.
    BelowWeight,
    /// `c = w(c)` within `1e-12`.
    FixedPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub truthful: EquilibriumResult,
    pub weighted: EquilibriumResult,
    /// Order of the truthful equilibrium relative to the weighted one.
    pub ordering: Ordering,
    pub regime: CostRegime,
    pub holds: bool,
}

pub fn compare_true_vs_weighted(spec_t: &GameSpec, spec_w: &GameSpec) -> Result<ComparisonReport> {
    if !spec_t.weighting().is_linear() {
        return Err(Error::Consistency("first game must use true probabilities".into()));
    }
    if spec_t.params() != spec_w.params() || spec_t.cost() != spec_w.cost() {
        return Err(Error::Consistency("games differ in more than the weighting".into()));
    }
    let truthful = solve_pne(spec_t)?;
    let weighted = solve_pne(spec_w)?;
    let c = spec_t.cost();
    let wc = spec_w.weighting().weight(c)?;
    let regime = if (c - wc).abs() <= 1e-12 {
        CostRegime::FixedPoint
    } else if c > wc {
        CostRegime::AboveWeight
    } else {
        CostRegime::BelowWeight
    };
    let ordering = compare_candidates(&truthful.state, &weighted.state);
    let holds = match regime {
        CostRegime::AboveWeight => ordering != Ordering::Greater,
        CostRegime::BelowWeight => ordering != Ordering::Less,
        CostRegime::FixedPoint => {
            truthful.state.threshold == weighted.state.threshold
                && (truthful.state.fraction - weighted.state.fraction).abs() <= 1e-9
        }
    };
    Ok(ComparisonReport { truthful, weighted, ordering, regime, holds })
}
