//! Degree-based mean-field SIS machinery.
//!
//! Infection rate is fixed to one; `delta` is the curing rate. For a social
//! state `x` the neighbor-infection probability `v(x)` is the nonzero root of
//!
//! ```text
//! g(v) = sum_d d * qhat_d / (delta + d v) - 1,   qhat_d = d x_{d,U} / <d>
//! ```
//!
//! when `R(x) = sum_d d^2 x_{d,U} / (delta <d>) > 1`, and zero otherwise.
//! `g` is strictly decreasing with `g(0+) = R - 1` and `g(1) < 0`, so the
//! root is bracketed by `(0, 1]` and bisection always converges.

use crate::degree::DegreeDistribution;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_BISECTION_ITERS: usize = 200;
/// Lower end of the bisection bracket.
pub(crate) const V_FLOOR: f64 = 1e-300;
/// `R` within this distance above one is reported as disease free.
pub const NEAR_CRITICAL: f64 = 1e-12;
/// Per-degree slack when validating `0 <= x_{d,U} <= m_d`.
const STATE_SLACK: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct EpidemicParams {
    delta: f64,
    distribution: DegreeDistribution,
}

impl EpidemicParams {
    pub fn new(delta: f64, distribution: DegreeDistribution) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Domain(format!("curing rate must be positive, got {delta}")));
        }
        Ok(Self { delta, distribution })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn distribution(&self) -> &DegreeDistribution {
        &self.distribution
    }

    /// `delta < <d^2> / <d>`: the epidemic survives when nobody vaccinates.
    pub fn endemic_without_vaccination(&self) -> bool {
        self.delta < self.distribution.second_moment() / self.distribution.mean_degree()
    }
}

/// Unprotected mass per degree, aligned with the distribution's degree set.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialState {
    unprotected: Vec<f64>,
}

impl SocialState {
    pub fn new(dist: &DegreeDistribution, unprotected: Vec<f64>) -> Result<Self> {
        let state = Self { unprotected };
        state.check(dist)?;
        Ok(state)
    }

    pub fn all_unprotected(dist: &DegreeDistribution) -> Self {
        Self { unprotected: dist.mass().to_vec() }
    }

    pub fn all_vaccinated(dist: &DegreeDistribution) -> Self {
        Self { unprotected: vec![0.0; dist.len()] }
    }

    /// Every degree up to and including the one at `index` unprotected, the rest vaccinated.
    pub fn full_threshold(dist: &DegreeDistribution, index: usize) -> Self {
        let unprotected = dist.mass().iter().enumerate().map(|(i, &m)| if i <= index { m } else { 0.0 }).collect();
        Self { unprotected }
    }

    /// Threshold state with `fraction` unprotected mass at degree index `index`.
    pub fn threshold(dist: &DegreeDistribution, index: usize, fraction: f64) -> Self {
        let mut state = Self::full_threshold(dist, index);
        state.unprotected[index] = fraction;
        state
    }

    pub fn unprotected(&self) -> &[f64] {
        &self.unprotected
    }

    pub fn unprotected_of(&self, dist: &DegreeDistribution, d: u32) -> Result<f64> {
        Ok(self.unprotected[dist.index_of(d)?])
    }

    /// `x_{d,V} = m_d - x_{d,U}` per degree.
    pub fn vaccinated(&self, dist: &DegreeDistribution) -> Vec<f64> {
        dist.mass().iter().zip(&self.unprotected).map(|(m, x)| (m - x).max(0.0)).collect()
    }

    pub fn total_unprotected(&self) -> f64 {
        self.unprotected.iter().sum()
    }

    /// `qhat_d = d x_{d,U} / <d>`
    pub fn qhat(&self, dist: &DegreeDistribution) -> Vec<f64> {
        dist.degrees().iter().zip(&self.unprotected).map(|(&d, x)| f64::from(d) * x / dist.mean_degree()).collect()
    }

    pub fn check(&self, dist: &DegreeDistribution) -> Result<()> {
        if self.unprotected.len() != dist.len() {
            return Err(Error::Consistency(format!(
                "state has {} entries, distribution has {} degrees",
                self.unprotected.len(),
                dist.len()
            )));
        }
        for ((d, m), &x) in dist.iter().zip(&self.unprotected) {
            if !(x >= -STATE_SLACK && x <= m + STATE_SLACK) {
                return Err(Error::Consistency(format!("unprotected mass {x} of degree {d} outside [0, {m}]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndemicState {
    pub v: f64,
    /// Steady-state infection probability of an unprotected node, per degree.
    pub p: Vec<f64>,
    pub reproduction: f64,
    /// `|g(v)|` at the returned `v` (zero in the disease-free case).
    pub residual: f64,
    /// `R` was above one by less than [`NEAR_CRITICAL`]; `v` reported as zero.
    pub near_critical: bool,
}

impl EndemicState {
    pub fn is_endemic(&self) -> bool {
        self.v > 0.0
    }

    /// Expected infected mass `sum_d x_{d,U} p_d`.
    pub fn expected_infected(&self, x: &SocialState) -> f64 {
        x.unprotected().iter().zip(&self.p).map(|(x, p)| x * p).sum()
    }
}

/// `R(x) = sum_d d^2 x_{d,U} / (delta <d>)`.
pub fn reproduction(params: &EpidemicParams, x: &SocialState) -> Result<f64> {
    x.check(params.distribution())?;
    Ok(reproduction_unchecked(params, x.unprotected()))
}

fn reproduction_unchecked(params: &EpidemicParams, x: &[f64]) -> f64 {
    let dist = params.distribution();
    let s: f64 = dist.degrees().iter().zip(x).map(|(&d, x)| f64::from(d) * f64::from(d) * x).sum();
    s / (params.delta() * dist.mean_degree())
}

/// `g(v)`; positive below the endemic root and negative above it.
pub fn fixed_point_residual(params: &EpidemicParams, x: &SocialState, v: f64) -> f64 {
    residual_unchecked(params, x.unprotected(), v)
}

fn residual_unchecked(params: &EpidemicParams, x: &[f64], v: f64) -> f64 {
    let dist = params.distribution();
    let delta = params.delta();
    let s: f64 = dist
        .degrees()
        .iter()
        .zip(x)
        .filter(|(_, &x)| x > 0.0)
        .map(|(&d, x)| {
            let d = f64::from(d);
            d * d * x / (delta + d * v)
        })
        .sum();
    s / dist.mean_degree() - 1.0
}

/// `p_d = d v / (delta + d v)`.
pub fn infection_probabilities(params: &EpidemicParams, v: f64) -> Vec<f64> {
    let delta = params.delta();
    params
        .distribution()
        .degrees()
        .iter()
        .map(|&d| {
            let dv = f64::from(d) * v;
            dv / (delta + dv)
        })
        .collect()
}

pub fn endemic_state(params: &EpidemicParams, x: &SocialState, tol: f64) -> Result<EndemicState> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    x.check(params.distribution())?;
    let n = params.distribution().len();
    let r = reproduction_unchecked(params, x.unprotected());
    let disease_free =
        |near_critical| EndemicState { v: 0.0, p: vec![0.0; n], reproduction: r, residual: 0.0, near_critical };
    if x.unprotected().iter().all(|&u| u == 0.0) || r <= 1.0 {
        return Ok(disease_free(false));
    }
    if r <= 1.0 + NEAR_CRITICAL {
        return Ok(disease_free(true));
    }

    // Bisect to full precision so that v carries relative accuracy even when
    // it is tiny; the midpoint is geometric while the bracket spans decades.
    let g = |v: f64| residual_unchecked(params, x.unprotected(), v);
    let (mut lo, mut hi) = (V_FLOOR, 1.0);
    let (mut g_lo, mut g_hi) = (g(lo), g(hi));
    for _ in 0..MAX_BISECTION_ITERS {
        let mid = if hi > 4.0 * lo { lo.sqrt() * hi.sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            (lo, hi, g_lo, g_hi) = (mid, mid, g_mid, g_mid);
            break;
        }
        if g_mid > 0.0 {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
    let (v, g_v) = if g_lo.abs() <= g_hi.abs() { (lo, g_lo) } else { (hi, g_hi) };
    if g_v.abs() > tol {
        return Err(Error::Convergence { best: v, residual: g_v.abs(), tol });
    }
    Ok(EndemicState {
        v,
        p: infection_probabilities(params, v),
        reproduction: r,
        residual: g_v.abs(),
        near_critical: false,
    })
}

/// Neighbor-infection probability alone, with the default tolerance.
pub fn neighbor_infection(params: &EpidemicParams, x: &SocialState) -> Result<f64> {
    endemic_state(params, x, DEFAULT_TOL).map(|e| e.v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationOptions {
    pub t_end: f64,
    /// Step size; `None` selects [`default_step`].
    pub dt: Option<f64>,
    /// Record every n-th step (the initial and final states are always kept).
    pub sample_every: usize,
    /// Stop once consecutive steps differ by less than this in max norm.
    pub steady_tol: Option<f64>,
}

impl IntegrationOptions {
    pub fn new(t_end: f64) -> Self {
        Self { t_end, dt: None, sample_every: 1, steady_tol: Some(1e-10) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub degrees: Vec<u32>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub dt: f64,
    /// Time at which the steady-state criterion fired.
    pub steady_at: Option<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds the initial time")
    }
}

/// `min(0.01 / delta, 0.5 / (delta + 2 D))`.
///
/// The second term keeps classical RK4 inside its stability region: the
/// Jacobian spectrum is bounded by `delta + 2 D`.
pub fn default_step(params: &EpidemicParams) -> f64 {
    let delta = params.delta();
    let d_max = f64::from(params.distribution().max_degree());
    (0.01 / delta).min(0.5 / (delta + 2.0 * d_max))
}

/// Integrates the DBMF dynamics with the default step and sampling rules.
pub fn integrate_dbmf(params: &EpidemicParams, x: &SocialState, p0: &[f64], t_end: f64, dt: f64) -> Result<Trajectory> {
    let opts = IntegrationOptions { dt: Some(dt), ..IntegrationOptions::new(t_end) };
    integrate_dbmf_with(params, x, p0, &opts)
}

/// Classical fixed-step RK4 on
/// `dp_d/dt = -delta p_d + (1 - p_d) d sum_i q_i (x_{i,U} / m_i) p_i`.
pub fn integrate_dbmf_with(
    params: &EpidemicParams,
    x: &SocialState,
    p0: &[f64],
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    let dist = params.distribution();
    x.check(dist)?;
    if p0.len() != dist.len() {
        return Err(Error::Consistency(format!(
            "initial condition has {} entries, distribution has {} degrees",
            p0.len(),
            dist.len()
        )));
    }
    if let Some(p) = p0.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain(format!("initial probability {p} outside [0, 1]")));
    }
    let dt = opts.dt.unwrap_or_else(|| default_step(params));
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("step size must be positive, got {dt}")));
    }
    if !(opts.t_end > 0.0 && opts.t_end.is_finite()) {
        return Err(Error::Domain(format!("t_end must be positive, got {}", opts.t_end)));
    }

    let delta = params.delta();
    let degrees: Vec<f64> = dist.degrees().iter().map(|&d| f64::from(d)).collect();
    let coupling: Vec<f64> = dist
        .iter()
        .zip(x.unprotected())
        .map(|((d, m), &xu)| f64::from(d) * m / dist.mean_degree() * (xu / m))
        .collect();
    let rhs = |p: &[f64], out: &mut [f64]| {
        let theta: f64 = coupling.iter().zip(p).map(|(c, p)| c * p).sum();
        for ((o, &pd), &d) in out.iter_mut().zip(p).zip(&degrees) {
            *o = -delta * pd + (1.0 - pd) * d * theta;
        }
    };

    let n = p0.len();
    let steps = (opts.t_end / dt).ceil() as usize;
    let every = opts.sample_every.max(1);
    let mut traj = Trajectory {
        degrees: dist.degrees().to_vec(),
        times: vec![0.0],
        states: vec![p0.to_vec()],
        dt,
        steady_at: None,
    };
    let mut p = p0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for step in 1..=steps {
        let t = step as f64 * dt;
        rhs(&p, &mut k1);
        for i in 0..n {
            tmp[i] = p[i] + 0.5 * dt * k1[i];
        }
        rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = p[i] + 0.5 * dt * k2[i];
        }
        rhs(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = p[i] + dt * k3[i];
        }
        rhs(&tmp, &mut k4);
        let mut change: f64 = 0.0;
        for i in 0..n {
            let next = p[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if !(-1e-12..=1.0 + 1e-12).contains(&next) {
                return Err(Error::Integration { t, dt });
            }
            let next = next.clamp(0.0, 1.0);
            change = change.max((next - p[i]).abs());
            p[i] = next;
        }
        let steady = opts.steady_tol.is_some_and(|tol| change < tol);
        if step % every == 0 || step == steps || steady {
            traj.times.push(t);
            traj.states.push(p.clone());
        }
        if steady {
            traj.steady_at = Some(t);
            break;
        }
    }
    Ok(traj)
}

/// Degree-class adjacency of the equivalent directed NIMFA graph.
#[derive(Debug, Clone, PartialEq)]
pub struct NimfaSummary {
    /// `A[i][j] = d_i * qhat_j`, row = receiving degree.
    pub adjacency: Vec<Vec<f64>>,
    /// Spectral radius of `Delta^{-1} A^T`, by power iteration.
    pub spectral_radius: f64,
    pub reproduction: f64,
}

pub fn nimfa_reduction(params: &EpidemicParams, x: &SocialState) -> Result<NimfaSummary> {
    let dist = params.distribution();
    x.check(dist)?;
    let qhat = x.qhat(dist);
    let adjacency: Vec<Vec<f64>> =
        dist.degrees().iter().map(|&d| qhat.iter().map(|q| f64::from(d) * q).collect()).collect();
    let n = adjacency.len();
    let delta = params.delta();
    // M = Delta^{-1} A^T, so M[i][j] = A[j][i] / delta
    let m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| adjacency[j][i] / delta).collect()).collect();
    Ok(NimfaSummary {
        spectral_radius: power_iteration(&m),
        reproduction: reproduction_unchecked(params, x.unprotected()),
        adjacency,
    })
}

/// Dominant eigenvalue of a nonnegative matrix.
fn power_iteration(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut y = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..1000 {
        let z: Vec<f64> = m.iter().map(|row| row.iter().zip(&y).map(|(a, b)| a * b).sum()).collect();
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        y = z.into_iter().map(|v| v / norm).collect();
        if (next - lambda).abs() <= 1e-15 * next {
            return next;
        }
        lambda = next;
    }
    lambda
}
