#![allow(dead_code)]

//! Independent reference computations and random instance generators shared
//! by the integration tests. Nothing here calls into the solver paths it is
//! used to check.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use vaxgame::{DegreeDistribution, EpidemicParams, SocialState};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Plain degree/mass pairs, normalized here rather than by the library.
#[derive(Debug, Clone)]
pub struct RawInstance {
    pub degrees: Vec<f64>,
    pub mass: Vec<f64>,
    pub delta: f64,
}

impl RawInstance {
    pub fn mean(&self) -> f64 {
        self.degrees.iter().zip(&self.mass).map(|(d, m)| d * m).sum()
    }

    pub fn second(&self) -> f64 {
        self.degrees.iter().zip(&self.mass).map(|(d, m)| d * d * m).sum()
    }

    pub fn params(&self) -> EpidemicParams {
        let map: BTreeMap<u32, f64> = self.degrees.iter().zip(&self.mass).map(|(&d, &m)| (d as u32, m)).collect();
        EpidemicParams::new(self.delta, DegreeDistribution::explicit(&map).unwrap()).unwrap()
    }

    pub fn r(&self, x: &[f64]) -> f64 {
        self.degrees.iter().zip(x).map(|(d, x)| d * d * x).sum::<f64>() / (self.delta * self.mean())
    }

    /// Neighbor infection probability by bisection on
    /// `v = sum_d d x_d p_d(v) / <d>`, written in the un-normalized form.
    pub fn v(&self, x: &[f64]) -> f64 {
        if self.r(x) <= 1.0 {
            return 0.0;
        }
        let mean = self.mean();
        let rhs = |v: f64| -> f64 {
            self.degrees.iter().zip(x).map(|(d, x)| d * x * (d * v / (self.delta + d * v))).sum::<f64>() / mean
        };
        // rhs(v) - v is positive below the root and negative above it
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if rhs(mid) > mid {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn p(&self, v: f64) -> Vec<f64> {
        self.degrees.iter().map(|d| d * v / (self.delta + d * v)).collect()
    }

    /// Social cost with true probabilities.
    pub fn psi(&self, c: f64, x: &[f64]) -> f64 {
        let p = self.p(self.v(x));
        let infected: f64 = x.iter().zip(&p).map(|(x, p)| x * p).sum();
        let vaccinated: f64 = self.mass.iter().zip(x).map(|(m, x)| m - x).sum();
        infected + c * vaccinated
    }

    /// Largest best-response violation of `x` for perceived-probability map `w`.
    /// A class counts as vaccinating only above rounding-level shortfalls.
    pub fn violation(&self, c: f64, x: &[f64], w: &dyn Fn(f64) -> f64) -> f64 {
        let p = self.p(self.v(x));
        let mut worst: f64 = 0.0;
        for i in 0..x.len() {
            let wp = w(p[i]);
            if x[i] > 0.0 {
                worst = worst.max(wp - c);
            }
            if x[i] < self.mass[i] * (1.0 - 1e-12) {
                worst = worst.max(c - wp);
            }
        }
        worst
    }

    /// Candidate state at threshold index `i` with fraction `f` unprotected.
    pub fn candidate(&self, i: usize, f: f64) -> Vec<f64> {
        (0..self.mass.len())
            .map(|j| match j.cmp(&i) {
                std::cmp::Ordering::Less => self.mass[j],
                std::cmp::Ordering::Equal => f,
                std::cmp::Ordering::Greater => 0.0,
            })
            .collect()
    }

    pub fn state(&self, x: &[f64]) -> SocialState {
        SocialState::new(self.params().distribution(), x.to_vec()).unwrap()
    }
}

/// Random strictly increasing degree set with random masses and a random
/// curing rate below `<d^2>/<d>` (so the epidemic survives without vaccination).
pub fn random_instance(rng: &mut StdRng, max_len: usize, max_degree: u32) -> RawInstance {
    let len = rng.gen_range(1..=max_len);
    let mut degrees: Vec<u32> = Vec::with_capacity(len);
    while degrees.len() < len {
        let d = rng.gen_range(1..=max_degree);
        if !degrees.contains(&d) {
            degrees.push(d);
        }
    }
    degrees.sort_unstable();
    let raw: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut inst = RawInstance {
        degrees: degrees.iter().map(|&d| f64::from(d)).collect(),
        mass: raw.iter().map(|m| m / total).collect(),
        delta: 1.0,
    };
    let cap = inst.second() / inst.mean();
    inst.delta = rng.gen_range(0.05..0.95) * cap;
    inst
}

/// Random unprotected masses `0 <= x_d <= m_d`.
pub fn random_state(rng: &mut StdRng, inst: &RawInstance) -> Vec<f64> {
    inst.mass.iter().map(|m| m * rng.gen_range(0.0..=1.0)).collect()
}

/// `exp(-(-ln x)^alpha)` evaluated directly.
pub fn prelec(alpha: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| if x <= 0.0 { 0.0 } else { (-(-x.ln()).powf(alpha)).exp() }
}

/// Position of a candidate state on the continuous line `[0, n]`: threshold
/// index plus the unprotected share of its class. The full state at index
/// `i` and the empty state at `i + 1` coincide.
pub fn candidate_position(threshold_index: Option<usize>, share: f64) -> f64 {
    threshold_index.map_or(0.0, |i| i as f64 + share)
}

/// Prints one acceptance line and fails the test on a miss.
pub fn report(criterion: u32, pass: bool, detail: &str) {
    println!("criterion {criterion}: {} | {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}
