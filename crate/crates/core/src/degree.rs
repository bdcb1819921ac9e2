//! Empirical degree distributions of uncorrelated networks.
//!
//! A distribution is an ordered set of distinct positive degrees with a
//! strictly positive mass on each. Degrees may have gaps; every sum in the
//! crate iterates the stored set. Power-law instances additionally remember
//! their normalization constant and exponent, which the analytic bounds need.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible mass after normalization.
pub const MIN_MASS: f64 = 1e-15;

/// Construction data retained for `m_d = kappa * d^-beta` distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub kappa: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    degrees: Vec<u32>,
    mass: Vec<f64>,
    mean_degree: f64,
    second_moment: f64,
    power_law: Option<PowerLaw>,
}

impl DegreeDistribution {
    /// Power-law distribution on the consecutive degrees `d_min..=d_max`.
    ///
    /// `d_min == d_max` is accepted and yields the single-degree distribution.
    pub fn power_law(d_min: u32, d_max: u32, beta: f64) -> Result<Self> {
        if d_min == 0 || d_min > d_max {
            return Err(Error::Range(format!("need 1 <= d_min <= d_max, got d_min = {d_min}, d_max = {d_max}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!("power-law exponent must be positive, got {beta}")));
        }
        let degrees: Vec<u32> = (d_min..=d_max).collect();
        let raw: Vec<f64> = degrees.iter().map(|&d| f64::from(d).powf(-beta)).collect();
        let kappa = 1.0 / raw.iter().sum::<f64>();
        let mass = raw.iter().map(|r| kappa * r).collect();
        Self::build(degrees, mass, Some(PowerLaw { kappa, beta }))
    }

    /// Distribution from explicit per-degree weights, normalized to unit mass.
    pub fn explicit(mass: &BTreeMap<u32, f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::Range("explicit distribution has no degrees".into()));
        }
        if let Some(&d) = mass.keys().next() {
            if d == 0 {
                return Err(Error::Range("degree 0 is not allowed".into()));
            }
        }
        for (&d, &m) in mass {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::Domain(format!("mass of degree {d} must be positive, got {m}")));
            }
        }
        let total: f64 = mass.values().sum();
        let degrees = mass.keys().copied().collect();
        let mass = mass.values().map(|m| m / total).collect();
        Self::build(degrees, mass, None)
    }

    fn build(degrees: Vec<u32>, mass: Vec<f64>, power_law: Option<PowerLaw>) -> Result<Self> {
        if let Some((d, m)) = degrees.iter().zip(&mass).find(|(_, &m)| m < MIN_MASS) {
            return Err(Error::Domain(format!("mass of degree {d} is {m:e} after normalization, below {MIN_MASS:e}")));
        }
        let mean_degree = degrees.iter().zip(&mass).map(|(&d, m)| f64::from(d) * m).sum();
        let second_moment = degrees.iter().zip(&mass).map(|(&d, m)| f64::from(d) * f64::from(d) * m).sum();
        Ok(Self { degrees, mass, mean_degree, second_moment, power_law })
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn min_degree(&self) -> u32 {
        self.degrees[0]
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees[self.degrees.len() - 1]
    }

    /// `<d>`
    pub fn mean_degree(&self) -> f64 {
        self.mean_degree
    }

    /// `<d^2>`
    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    pub fn power_law_info(&self) -> Option<PowerLaw> {
        self.power_law
    }

    /// Normalization constant, present only for power-law distributions.
    pub fn kappa(&self) -> Option<f64> {
        self.power_law.map(|p| p.kappa)
    }

    /// Position of `d` in the degree set.
    pub fn index_of(&self, d: u32) -> Result<usize> {
        self.degrees.binary_search(&d).map_err(|_| Error::UnknownDegree(d))
    }

    pub fn mass_of(&self, d: u32) -> Result<f64> {
        Ok(self.mass[self.index_of(d)?])
    }

    /// Probability that a randomly chosen neighbor has degree `d`: `d m_d / <d>`.
    pub fn neighbor_prob(&self, d: u32) -> Result<f64> {
        let i = self.index_of(d)?;
        Ok(f64::from(d) * self.mass[i] / self.mean_degree)
    }

    /// Total mass on degrees strictly greater than `d`.
    pub fn tail_mass(&self, d: u32) -> f64 {
        self.degrees.iter().zip(&self.mass).filter(|(&k, _)| k > d).map(|(_, m)| m).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.degrees.iter().copied().zip(self.mass.iter().copied())
    }
}

/// JSON description of a degree distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DistributionSpec {
    Powerlaw {
        d_min: u32,
        d_max: u32,
        beta: f64,
    },
    Explicit {
        #[serde(deserialize_with = "degree_keyed")]
        mass: BTreeMap<u32, f64>,
    },
}

/// Reads a JSON object keyed by degree strings. Tagged and untagged enums
/// buffer their content, which loses serde_json's integer-key parsing.
pub(crate) fn degree_keyed<'de, D>(de: D) -> std::result::Result<BTreeMap<u32, f64>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    let raw = BTreeMap::<String, f64>::deserialize(de)?;
    raw.into_iter()
        .map(|(k, v)| {
            k.trim()
                .parse::<u32>()
                .map(|d| (d, v))
                .map_err(|_| serde::de::Error::custom(format!("degree key {k:?} is not a nonnegative integer")))
        })
        .collect()
}

impl DistributionSpec {
    pub fn build(&self) -> Result<DegreeDistribution> {
        match self {
            DistributionSpec::Powerlaw { d_min, d_max, beta } => DegreeDistribution::power_law(*d_min, *d_max, *beta),
            DistributionSpec::Explicit { mass } => DegreeDistribution::explicit(mass),
        }
    }
}
