//! Vaccination games on degree-heterogeneous networks.
//!
//! Players of each degree decide whether to vaccinate against an SIS epidemic
//! described by the degree-based mean-field model. Infection risk may be
//! perceived through a probability weighting function. The crate computes
//! endemic states, the unique pure Nash equilibrium, the social optimum and
//! analytic threshold bounds for power-law populations.

pub mod bounds;
pub mod dbmf;
pub mod degree;
pub mod error;
pub mod game;
pub mod planner;
pub mod scenario;
pub mod table;
pub mod weighting;

pub use bounds::{PowerLawBoundContext, SandwichRow};
pub use dbmf::{endemic_state, EndemicState, EpidemicParams, SocialState};
pub use degree::{DegreeDistribution, DistributionSpec};
pub use error::{Error, Result};
pub use game::{solve_pne, CandidateState, EquilibriumCase, EquilibriumResult, GameSpec};
pub use planner::{inefficiency, solve_social_optimum, InefficiencyReport, SocialOptimum};
pub use weighting::{Probability, WeightingSpec};
