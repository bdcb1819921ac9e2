//! One test per acceptance criterion; each prints a single PASS/FAIL line.
//!
//! Run with `cargo test --test acceptance -- --nocapture --test-threads 1` to
//! see the lines in order.

mod common;

use std::cmp::Ordering;
use std::time::Instant;

use common::{candidate_position, prelec, random_instance, random_state, report, rng};
use vaxgame::bounds::{self, PowerLawBoundContext};
use vaxgame::dbmf::{self, IntegrationOptions};
use vaxgame::game::{self, compare_candidates};
use vaxgame::planner;
use vaxgame::scenario::{self, Scenario};
use vaxgame::weighting::{self, PRELEC_FIXED_POINT};
use vaxgame::{DegreeDistribution, EpidemicParams, GameSpec, WeightingSpec};

const REFERENCE_SCENARIO: &str = r#"{
    "distribution": {"type": "powerlaw", "d_min": 1, "d_max": 100, "beta": 3},
    "delta": 2.0,
    "weighting": [{"kind": "identity"}, {"kind": "prelec", "alpha": 0.75}, {"kind": "prelec", "alpha": 0.5}],
    "cost": {"start": 0.05, "stop": 0.95, "steps": 19}
}"#;

fn reference_params() -> EpidemicParams {
    EpidemicParams::new(2.0, DegreeDistribution::power_law(1, 100, 3.0).unwrap()).unwrap()
}

fn cost_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).collect()
}

#[test]
fn criterion_1_endemic_fixed_point_and_dynamics() {
    let start = Instant::now();
    let mut rng = rng(101);
    let (mut endemic, mut free) = (0, 0);
    let mut worst_residual: f64 = 0.0;
    let mut worst_ode: f64 = 0.0;
    let mut worst_decay: f64 = 0.0;
    let mut failures = Vec::new();
    while endemic + free < 200 {
        let inst = random_instance(&mut rng, 5, 12);
        let x = random_state(&mut rng, &inst);
        let r = inst.r(&x);
        // critical slowing down makes either ODE check unreachable in finite time
        if (r - 1.0).abs() < 0.05 {
            continue;
        }
        let params = inst.params();
        let state = inst.state(&x);
        let p0: Vec<f64> = (0..x.len()).map(|_| rand::Rng::gen_range(&mut rng, 0.0..=1.0)).collect();
        let opts = IntegrationOptions { steady_tol: Some(1e-14), ..IntegrationOptions::new(1e6) };
        let traj = dbmf::integrate_dbmf_with(&params, &state, &p0, &opts).unwrap();
        let p_final = traj.final_state();
        if r > 1.0 {
            endemic += 1;
            let e = dbmf::endemic_state(&params, &state, dbmf::DEFAULT_TOL).unwrap();
            // g recomputed from the raw instance
            let g: f64 = inst
                .degrees
                .iter()
                .zip(&x)
                .map(|(d, x)| d * d * x / (inst.mean() * (inst.delta + d * e.v)))
                .sum::<f64>()
                - 1.0;
            worst_residual = worst_residual.max(g.abs());
            let p_star = inst.p(e.v);
            let qhat: Vec<f64> = inst.degrees.iter().zip(&x).map(|(d, x)| d * x / inst.mean()).collect();
            let v_ode: f64 = qhat.iter().zip(p_final).map(|(q, p)| q * p).sum();
            let gap = p_star.iter().zip(p_final).map(|(a, b)| (a - b).abs()).fold((v_ode - e.v).abs(), f64::max);
            worst_ode = worst_ode.max(gap);
            if g.abs() > 1e-10 || gap > 1e-6 {
                failures.push(format!("R={r:.4} |g|={:.2e} ode gap={gap:.2e}", g.abs()));
            }
        } else {
            free += 1;
            // unprotected-free classes are decoupled and decay on their own
            let top = p_final.iter().cloned().fold(0.0, f64::max);
            worst_decay = worst_decay.max(top);
            if top >= 1e-6 {
                failures.push(format!("R={r:.4} max p={top:.2e}"));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = failures.is_empty() && elapsed < 60.0;
    report(
        1,
        pass,
        &format!(
            "{endemic} endemic / {free} disease-free; max |g| {worst_residual:.1e}, max ODE gap {worst_ode:.1e}, \
             max decayed p {worst_decay:.1e}, {elapsed:.1}s; failures {failures:?}"
        ),
    );
}

#[test]
fn criterion_2_rank_one_reduction() {
    let mut rng = rng(202);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let inst = random_instance(&mut rng, 8, 30);
        let x = random_state(&mut rng, &inst);
        let summary = dbmf::nimfa_reduction(&inst.params(), &inst.state(&x)).unwrap();
        worst = worst.max((summary.spectral_radius - inst.r(&x)).abs());
    }
    report(2, worst <= 1e-10, &format!("100 states, max |rho - R| = {worst:.2e}"));
}

#[test]
fn criterion_3_pne_matches_brute_force() {
    let mut rng = rng(303);
    let step = 1e-3;
    let mut mismatches = Vec::new();
    let mut non_unique = Vec::new();
    let mut worst_gap: f64 = 0.0;
    for draw in 0..50 {
        let inst = random_instance(&mut rng, 3, 12);
        let c: f64 = rand::Rng::gen_range(&mut rng, 0.02..0.98);
        let alpha: f64 = rand::Rng::gen_range(&mut rng, 0.3..=1.0);
        let w = prelec(alpha);
        let spec = GameSpec::new(inst.params(), WeightingSpec::prelec(alpha).unwrap(), c).unwrap();
        let eq = match game::solve_pne(&spec) {
            Ok(eq) => eq,
            Err(e) => {
                non_unique.push(format!("draw {draw}: {e}"));
                continue;
            }
        };

        // grid over the candidate family, share of the threshold class in steps of 1e-3
        let n = inst.mass.len();
        let shares: Vec<f64> = (1..=1000).map(|j| j as f64 * step).collect();
        let mut best = (f64::INFINITY, 0.0);
        let mut sign_changes = 0;
        let mut prev_positive = false;
        for i in 0..n {
            for &s in &shares {
                let x = inst.candidate(i, s.min(1.0) * inst.mass[i]);
                let violation = inst.violation(c, &x, &w);
                let pos = candidate_position(Some(i), s);
                if violation < best.0 {
                    best = (violation, pos);
                }
                // perceived unprotected cost at the threshold class, against c
                let phi = w(inst.p(inst.v(&x))[i]) - c;
                if phi > 0.0 && !prev_positive {
                    sign_changes += 1;
                }
                prev_positive = phi > 0.0;
            }
        }
        // never crossing means everybody stays unprotected
        let crossings = if sign_changes == 0 { 1 } else { sign_changes };
        let idx = inst.degrees.iter().position(|&d| d == f64::from(eq.threshold())).unwrap();
        let solved = candidate_position(Some(idx), eq.state.fraction / inst.mass[idx]);
        let gap = (solved - best.1).abs();
        worst_gap = worst_gap.max(gap);
        if gap > step + 1e-12 {
            mismatches.push(format!("draw {draw}: solver {solved:.5} oracle {:.5}", best.1));
        }
        if crossings != 1 {
            non_unique.push(format!("draw {draw}: {crossings} crossings"));
        }
    }
    report(
        3,
        mismatches.is_empty() && non_unique.is_empty(),
        &format!("50 draws, max position gap {worst_gap:.2e}; mismatches {mismatches:?}; uniqueness {non_unique:?}"),
    );
}

#[test]
fn criterion_4_single_degree_closed_form() {
    let dist = DegreeDistribution::explicit(&[(4, 1.0)].into_iter().collect()).unwrap();
    let spec = GameSpec::new(EpidemicParams::new(2.0, dist).unwrap(), WeightingSpec::Identity, 1.0 / 3.0).unwrap();
    let eq = game::solve_pne(&spec).unwrap();
    let pass = eq.threshold() == 4 && (eq.state.fraction - 0.75).abs() <= 1e-9 && (eq.v - 0.25).abs() <= 1e-9;
    report(4, pass, &format!("threshold {}, f {:.12}, v {:.12}", eq.threshold(), eq.state.fraction, eq.v));
}

#[test]
fn criterion_5_reference_instance_shape() {
    let start = Instant::now();
    let params = reference_params();
    let v_full = game::full_threshold_infection(&params).unwrap();
    let mut costs = cost_grid();
    costs.push(PRELEC_FIXED_POINT);
    costs.sort_by(f64::total_cmp);
    let weightings =
        [WeightingSpec::Identity, WeightingSpec::prelec(0.75).unwrap(), WeightingSpec::prelec(0.5).unwrap()];

    let mut shape_a = Vec::new();
    let mut shape_b = Vec::new();
    let mut shape_c = Vec::new();
    for &c in &costs {
        let solved: Vec<_> = weightings
            .iter()
            .map(|&w| game::solve_pne_with(&GameSpec::new(params.clone(), w, c).unwrap(), &v_full).unwrap())
            .collect();
        let d_id = solved[0].threshold();
        let i_id = solved[0].expected_infected;
        for (w, eq) in weightings[1..].iter().zip(&solved[1..]) {
            let d = eq.threshold();
            let a = w.alpha().unwrap();
            if c <= 0.5 && d.abs_diff(d_id) > 1 {
                shape_a.push(format!("c={c:.2} a={a}: {d} vs {d_id} (differ by more than 1)"));
            }
            if c >= 0.5 && d < d_id {
                shape_a.push(format!("c={c:.2} a={a}: {d} below {d_id}"));
            }
            if c >= 0.8 && d <= d_id {
                shape_a.push(format!("c={c:.2} a={a}: {d} not above {d_id}"));
            }
            let inf = eq.expected_infected;
            let at_fixed_point = c == PRELEC_FIXED_POINT;
            if at_fixed_point && (inf - i_id).abs() > 1e-6 {
                shape_b.push(format!("c=1/e a={a}: {inf:.3e} vs {i_id:.3e}"));
            }
            if !at_fixed_point && c < PRELEC_FIXED_POINT && inf > i_id {
                shape_b.push(format!("c={c:.2} a={a}: {inf:.3e} > {i_id:.3e}"));
            }
            if !at_fixed_point && c > PRELEC_FIXED_POINT && inf < i_id {
                shape_b.push(format!("c={c:.2} a={a}: {inf:.3e} < {i_id:.3e}"));
            }
        }
    }
    let optima: Vec<_> = costs.iter().map(|&c| planner::solve_social_optimum(&params, c).unwrap()).collect();
    for (c, opt) in costs.iter().zip(&optima) {
        if opt.state.threshold != Some(1) {
            shape_c.push(format!("c={c:.2}: threshold {:?}", opt.state.threshold));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let detail = format!(
        "(a) {} | (b) {} | (c) {} | {elapsed:.1}s",
        if shape_a.is_empty() { "ok".to_string() } else { format!("{shape_a:?}") },
        if shape_b.is_empty() { "ok".to_string() } else { format!("{shape_b:?}") },
        if shape_c.is_empty() {
            "ok".to_string()
        } else {
            format!("{} of {} costs, e.g. {}", shape_c.len(), costs.len(), shape_c[0])
        },
    );
    report(5, shape_a.is_empty() && shape_b.is_empty() && shape_c.is_empty() && elapsed < 120.0, &detail);
}

#[test]
fn criterion_6_bounds() {
    let mut problems = Vec::new();
    let mut checked = 0;

    for (d0, d_max, beta, delta) in [
        (1, 100, 2.0, 1.0),
        (2, 200, 2.0, 1.0),
        (1, 100, 2.5, 2.0),
        (3, 150, 2.5, 0.5),
        (1, 100, 3.0, 2.0),
        (2, 100, 3.0, 2.0),
        (3, 150, 3.0, 1.5),
        (2, 500, 3.0, 2.0),
    ] {
        let params = EpidemicParams::new(delta, DegreeDistribution::power_law(d0, d_max, beta).unwrap()).unwrap();
        let ctx = PowerLawBoundContext::new(&params).unwrap();
        let rows = bounds::endemic_ratio_table(&ctx).unwrap();
        if beta == 3.0 && d0 > 1 && rows.iter().any(|r| r.upper.is_none()) {
            problems.push(format!("beta 3 d0 {d0}: missing upper bound"));
        }
        for row in rows.iter().filter(|r| !r.holds()) {
            problems.push(format!("endemic ratio beta {beta} d0 {d0} t {}: {:?}", row.t, row));
        }
        checked += rows.len();
        if rows.is_empty() {
            problems.push(format!("beta {beta} d0 {d0}: no endemic thresholds"));
        }
    }

    let weightings =
        [WeightingSpec::Identity, WeightingSpec::prelec(0.75).unwrap(), WeightingSpec::prelec(0.5).unwrap()];
    for params in
        [reference_params(), EpidemicParams::new(2.0, DegreeDistribution::power_law(2, 500, 3.0).unwrap()).unwrap()]
    {
        let ctx = PowerLawBoundContext::new(&params).unwrap();
        let v_full = game::full_threshold_infection(&params).unwrap();
        for &w in &weightings {
            for c in cost_grid() {
                let d =
                    game::solve_pne_with(&GameSpec::new(params.clone(), w, c).unwrap(), &v_full).unwrap().threshold();
                let bound = bounds::threshold_upper_bound(&ctx, &w, c).unwrap();
                if f64::from(d) > bound {
                    problems.push(format!("threshold {d} above bound {bound:.2} at c={c:.2} w={}", w.label()));
                }
            }
        }
    }

    let params = EpidemicParams::new(2.0, DegreeDistribution::power_law(2, 500, 3.0).unwrap()).unwrap();
    let ctx = PowerLawBoundContext::new(&params).unwrap();
    let grid = [0.8, 0.9, 0.95];
    let mut ratios = Vec::new();
    for alpha in [0.75, 0.5] {
        let rows = bounds::ratio_sandwich(&ctx, alpha, &grid).unwrap();
        for r in &rows {
            if !r.holds_t() {
                problems.push(format!("d_t {} outside [{:.2}, {:.2}] at c={}", r.d_t, r.lower_t, r.upper_t, r.c));
            }
        }
        // clipped rows violate the sandwich precondition and carry no ratio information
        let informative: Vec<_> = rows.iter().filter(|r| !r.uninformative()).collect();
        if informative.windows(2).any(|p| p[1].ratio < p[0].ratio) {
            problems.push(format!("alpha {alpha}: ratio decreases on unclipped grid"));
        }
        if alpha == 0.75 && informative.len() != grid.len() {
            problems.push("alpha 0.75: grid clips at the maximum degree".into());
        }
        ratios.push(format!(
            "a={alpha}: {}",
            rows.iter()
                .map(|r| format!("{:.3}{}", r.ratio, if r.uninformative() { "*" } else { "" }))
                .collect::<Vec<_>>()
                .join(",")
        ));
    }
    report(
        6,
        problems.is_empty(),
        &format!(
            "{checked} endemic-ratio rows; ratios {} (* = clipped at D); problems {problems:?}",
            ratios.join("; ")
        ),
    );
}

#[test]
fn criterion_7_inefficiency() {
    let mut rng = rng(707);
    let mut problems = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    let mut draws = 0;
    while draws < 50 {
        let inst = random_instance(&mut rng, 5, 15);
        let params = inst.params();
        if !params.endemic_without_vaccination() {
            continue;
        }
        draws += 1;
        let c: f64 = rand::Rng::gen_range(&mut rng, 0.02..0.98);
        let spec = GameSpec::new(params, WeightingSpec::Identity, c).unwrap();
        let rep = planner::inefficiency(&spec).unwrap();
        if compare_candidates(&rep.optimum.state, &rep.pne.state) == Ordering::Greater {
            problems.push(format!("draw {draws}: optimum {:?} above PNE {:?}", rep.optimum.state, rep.pne.state));
        }
        if !(0.0 <= rep.gap && rep.gap <= rep.bound) {
            problems.push(format!("draw {draws}: gap {:.3e} bound {:.3e}", rep.gap, rep.bound));
        }
        // optimum cost recomputed independently
        let psi = inst.psi(c, rep.optimum.social_state.unprotected());
        if (psi - rep.optimum.cost.total).abs() > 1e-9 {
            problems.push(format!("draw {draws}: optimum cost {psi} vs {}", rep.optimum.cost.total));
        }
        worst_ratio = worst_ratio.max(rep.gap / rep.bound);
    }
    report(7, problems.is_empty(), &format!("50 instances, max gap/bound {worst_ratio:.3}; problems {problems:?}"));
}

#[test]
fn criterion_8_weighting() {
    let n = 10_000;
    let mut worst: f64 = 0.0;
    let mut failed_a1 = Vec::new();
    for alpha in [0.3, 0.5, 0.75, 0.9] {
        let w = WeightingSpec::prelec(alpha).unwrap();
        for i in 0..n {
            let y = 1e-9 + (1.0 - 2e-9) * i as f64 / (n - 1) as f64;
            let back = w.weight_probability(w.weight_inverse(y).unwrap()).value();
            worst = worst.max((back - y).abs());
        }
        let a1 = weighting::verify_shape(&w, n).unwrap();
        if !a1.passed() {
            failed_a1.push(format!("alpha {alpha}: {:?}", a1.outcome));
        }
    }
    report(
        8,
        worst <= 1e-12 && failed_a1.is_empty(),
        &format!("max round-trip error {worst:.2e}; shape check failures {failed_a1:?}"),
    );
}

#[test]
fn criterion_9_cli_determinism() {
    let scenario = Scenario::from_json(REFERENCE_SCENARIO).unwrap();
    let first = scenario::cmd_pne(&scenario).unwrap().to_csv();
    let second = scenario::cmd_pne(&scenario).unwrap().to_csv();

    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("scenario.json");
    std::fs::write(&input, REFERENCE_SCENARIO).unwrap();
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_solve"))
            .args(["pne", "--scenario"])
            .arg(&input)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&out).unwrap());
    }
    let pass = first == second && outputs[0] == outputs[1] && outputs[0] == first.as_bytes();
    report(9, pass, &format!("{} rows, {} bytes, library and binary outputs identical", 19 * 3, first.len()));
}
