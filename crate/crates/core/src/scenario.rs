//! JSON scenarios and the batch commands behind the `solve` binary.
//!
//! ```json
//! {
//!   "distribution": {"type": "powerlaw", "d_min": 1, "d_max": 100, "beta": 3},
//!   "delta": 2.0,
//!   "weighting": [{"kind": "identity"}, {"kind": "prelec", "alpha": 0.5}],
//!   "cost": {"start": 0.05, "stop": 0.95, "steps": 19}
//! }
//! ```
//!
//! Sweep points are evaluated in parallel; rows are always emitted in
//! `(c, weighting)` order.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, PowerLawBoundContext};
use crate::dbmf::{self, EpidemicParams, IntegrationOptions, SocialState};
use crate::degree::{DegreeDistribution, DistributionSpec};
use crate::error::Error;
use crate::game::{self, CandidateState, GameSpec};
use crate::planner;
use crate::table::{Cell, Table};
use crate::weighting::WeightingSpec;

/// Emitted equilibria must satisfy the equilibrium conditions to this tolerance.
pub const PNE_CERTIFICATE_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("malformed scenario: {0}")]
    Parse(String),

    #[error("invalid scenario: {0}")]
    Invalid(String),

    #[error(transparent)]
    Solver(#[from] Error),
}

impl ScenarioError {
    /// Stable machine-readable error category.
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioError::Io { .. } => "io",
            ScenarioError::Parse(_) => "parse",
            ScenarioError::Invalid(_) => "invalid_scenario",
            ScenarioError::Solver(_) => "solver",
        }
    }
}

type Result<T> = std::result::Result<T, ScenarioError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CostSpec {
    Single(f64),
    Sweep { start: f64, stop: f64, steps: usize },
}

impl CostSpec {
    /// Closed grid including both endpoints.
    pub fn values(&self) -> Vec<f64> {
        match *self {
            CostSpec::Single(c) => vec![c],
            CostSpec::Sweep { start, stop, steps } => {
                let span = stop - start;
                (0..steps)
                    .map(|i| if i + 1 == steps { stop } else { start + span * i as f64 / (steps - 1) as f64 })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightingList {
    One(WeightingSpec),
    Many(Vec<WeightingSpec>),
}

impl WeightingList {
    pub fn specs(&self) -> Vec<WeightingSpec> {
        match self {
            WeightingList::One(w) => vec![*w],
            WeightingList::Many(ws) => ws.clone(),
        }
    }
}

impl Default for WeightingList {
    fn default() -> Self {
        WeightingList::One(WeightingSpec::Identity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    AllUnprotected,
    AllVaccinated,
    /// Threshold state; `fraction` defaults to the full mass of the threshold degree.
    Threshold {
        threshold: u32,
        fraction: Option<f64>,
    },
    Explicit {
        #[serde(deserialize_with = "crate::degree::degree_keyed")]
        unprotected: BTreeMap<u32, f64>,
    },
}

impl StateSpec {
    pub fn build(&self, dist: &DegreeDistribution) -> std::result::Result<SocialState, Error> {
        match self {
            StateSpec::AllUnprotected => Ok(SocialState::all_unprotected(dist)),
            StateSpec::AllVaccinated => Ok(SocialState::all_vaccinated(dist)),
            StateSpec::Threshold { threshold, fraction } => {
                let m = dist.mass_of(*threshold)?;
                CandidateState::new(dist, *threshold, fraction.unwrap_or(m))?.to_social_state(dist)
            }
            StateSpec::Explicit { unprotected } => {
                for d in unprotected.keys() {
                    dist.index_of(*d)?;
                }
                let values = dist.degrees().iter().map(|d| unprotected.get(d).copied().unwrap_or(0.0)).collect();
                SocialState::new(dist, values)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialCondition {
    Uniform(f64),
    PerDegree(#[serde(deserialize_with = "crate::degree::degree_keyed")] BTreeMap<u32, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSpec {
    #[serde(default = "default_state")]
    pub state: StateSpec,
    #[serde(default = "default_p0")]
    pub p0: InitialCondition,
    pub t_end: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub sample_every: Option<usize>,
}

fn default_state() -> StateSpec {
    StateSpec::AllUnprotected
}

fn default_p0() -> InitialCondition {
    InitialCondition::Uniform(0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub distribution: DistributionSpec,
    pub delta: f64,
    #[serde(default)]
    pub weighting: WeightingList,
    #[serde(default)]
    pub cost: Option<CostSpec>,
    #[serde(default)]
    pub dynamics: Option<DynamicsSpec>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(ScenarioError::Invalid(format!("delta must be positive, got {}", self.delta)));
        }
        if self.weighting.specs().is_empty() {
            return Err(ScenarioError::Invalid("weighting list is empty".into()));
        }
        if let Some(CostSpec::Sweep { start, stop, steps }) = self.cost {
            if start.is_nan() || stop.is_nan() || start >= stop {
                return Err(ScenarioError::Invalid(format!("sweep start {start} must be below stop {stop}")));
            }
            if steps < 2 {
                return Err(ScenarioError::Invalid(format!("sweep needs at least 2 steps, got {steps}")));
            }
        }
        if let Some(cost) = &self.cost {
            if let Some(c) = cost.values().into_iter().find(|c| !(*c > 0.0 && *c < 1.0)) {
                return Err(ScenarioError::Invalid(format!("cost {c} outside (0, 1)")));
            }
        }
        self.params()?;
        Ok(())
    }

    pub fn params(&self) -> Result<EpidemicParams> {
        let dist = self.distribution.build()?;
        Ok(EpidemicParams::new(self.delta, dist)?)
    }

    pub fn costs(&self) -> Result<Vec<f64>> {
        self.cost
            .as_ref()
            .map(CostSpec::values)
            .ok_or_else(|| ScenarioError::Invalid("this command needs a cost".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Pne,
    Opt,
    Bounds,
    Dynamics,
}

pub fn run(command: Command, scenario: &Scenario) -> Result<Table> {
    match command {
        Command::Pne => cmd_pne(scenario),
        Command::Opt => cmd_social_opt(scenario),
        Command::Bounds => cmd_bounds(scenario),
        Command::Dynamics => cmd_dynamics(scenario),
    }
}

/// Equilibrium for every `(c, weighting)` pair.
pub fn cmd_pne(scenario: &Scenario) -> Result<Table> {
    let params = scenario.params()?;
    let costs = scenario.costs()?;
    let weightings = scenario.weighting.specs();
    let v_full = game::full_threshold_infection(&params)?;
    let pairs: Vec<(f64, WeightingSpec)> =
        costs.iter().flat_map(|&c| weightings.iter().map(move |&w| (c, w))).collect();
    let rows: Vec<Vec<Cell>> = pairs
        .par_iter()
        .map(|&(c, w)| -> Result<Vec<Cell>> {
            let spec = GameSpec::new(params.clone(), w, c)?;
            let eq = game::solve_pne_with(&spec, &v_full)?;
            let cert = game::verify_pne(&spec, &eq, PNE_CERTIFICATE_TOL)?;
            if !cert.passed() {
                return Err(Error::Internal(format!(
                    "equilibrium at c = {c} violates best responses by {:e} at degree {}",
                    cert.max_violation, cert.worst_degree
                ))
                .into());
            }
            Ok(vec![
                c.into(),
                w.label().into(),
                eq.threshold().into(),
                eq.state.fraction.into(),
                eq.v.into(),
                eq.expected_infected.into(),
                eq.social_cost.into(),
            ])
        })
        .collect::<Result<_>>()?;
    let mut table =
        Table::new(["c", "alpha", "threshold", "fraction_at_threshold", "v", "expected_infected", "social_cost"]);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Social optimum per cost, against the true-perception equilibrium.
pub fn cmd_social_opt(scenario: &Scenario) -> Result<Table> {
    let params = scenario.params()?;
    let costs = scenario.costs()?;
    let rows: Vec<Vec<Cell>> = costs
        .par_iter()
        .map(|&c| -> Result<Vec<Cell>> {
            let spec = GameSpec::new(params.clone(), WeightingSpec::Identity, c)?;
            let report = planner::inefficiency(&spec)?;
            let threshold: Cell = match report.optimum.state.threshold {
                Some(t) => t.into(),
                None => "none".into(),
            };
            Ok(vec![
                c.into(),
                threshold,
                report.optimum.state.fraction.into(),
                report.optimum.cost.total.into(),
                report.pne.social_cost.into(),
                report.gap.into(),
                report.bound.into(),
            ])
        })
        .collect::<Result<_>>()?;
    let mut table =
        Table::new(["c", "opt_threshold", "opt_fraction", "opt_social_cost", "pne_social_cost", "gap", "bound"]);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Threshold sandwich rows for every Prelec weighting in the scenario.
pub fn cmd_bounds(scenario: &Scenario) -> Result<Table> {
    let params = scenario.params()?;
    let costs = scenario.costs()?;
    let ctx = PowerLawBoundContext::new(&params)?;
    let alphas: Vec<f64> = scenario.weighting.specs().iter().filter_map(WeightingSpec::alpha).collect();
    if alphas.is_empty() {
        return Err(ScenarioError::Invalid("bounds need at least one prelec weighting".into()));
    }
    let mut per_alpha = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        per_alpha.push(bounds::ratio_sandwich(&ctx, alpha, &costs)?);
    }
    let mut table = Table::new([
        "c",
        "d_t",
        "d_w",
        "lower_t",
        "upper_t",
        "lower_w",
        "upper_w",
        "ratio",
        "theta_proxy",
        "alpha",
        "uninformative",
    ]);
    for i in 0..costs.len() {
        for (alpha, rows) in alphas.iter().zip(&per_alpha) {
            let r = &rows[i];
            table.push(vec![
                r.c.into(),
                r.d_t.into(),
                r.d_w.into(),
                r.lower_t.into(),
                r.upper_t.into(),
                r.lower_w.into(),
                r.upper_w.into(),
                r.ratio.into(),
                r.theta_proxy.into(),
                (*alpha).into(),
                r.uninformative().into(),
            ]);
        }
    }
    Ok(table)
}

/// Sampled DBMF trajectory for the scenario's dynamics block.
pub fn cmd_dynamics(scenario: &Scenario) -> Result<Table> {
    let params = scenario.params()?;
    let spec = scenario
        .dynamics
        .as_ref()
        .ok_or_else(|| ScenarioError::Invalid("dynamics command needs a \"dynamics\" block".into()))?;
    let dist = params.distribution();
    let x = spec.state.build(dist)?;
    let p0: Vec<f64> = match &spec.p0 {
        InitialCondition::Uniform(p) => vec![*p; dist.len()],
        InitialCondition::PerDegree(map) => {
            for d in map.keys() {
                dist.index_of(*d)?;
            }
            dist.degrees().iter().map(|d| map.get(d).copied().unwrap_or(0.0)).collect()
        }
    };
    let opts = IntegrationOptions {
        dt: spec.dt,
        sample_every: spec.sample_every.unwrap_or(1),
        ..IntegrationOptions::new(spec.t_end)
    };
    let traj = dbmf::integrate_dbmf_with(&params, &x, &p0, &opts)?;
    let columns = std::iter::once("t".to_string()).chain(dist.degrees().iter().map(|d| format!("p_{d}")));
    let mut table = Table::new(columns);
    for (t, state) in traj.times.iter().zip(&traj.states) {
        table.push(std::iter::once(Cell::Float(*t)).chain(state.iter().map(|&p| Cell::Float(p))).collect());
    }
    Ok(table)
}
