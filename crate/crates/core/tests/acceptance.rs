//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use minext::cli::{self, sweep, sweep_csv};
use minext::config::InstanceConfig;
use minext::function_space::HoloFunction;
use minext::geometry::{DomainSpec, SubmanifoldSpec, WeightSpec};
use minext::instance::{Discretization, Instance};
use minext::irls::{descent_check, fixed_point_residual, irls_solve, l2_start, norm_transfer, IrlsSchedule};
use minext::l2_solver::solve_l2;
use minext::lp_solver::{
    random_starts, solve_lp_direct, uniqueness_probe, variational_residual_p, DirectOptions, LpProblem, FINAL_EPS,
};
use minext::verifier::{
    bernoulli_bound, check_holder, gradient_check, l2_orthogonality, majorization, problem, quadrature_exactness,
    run_ledger, solve_direct, solve_irls,
};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

// pinned tolerances
const CLOSED_FORM_REL: f64 = 1e-6;
const CLOSED_FORM_DISTANCE: f64 = 1e-6;
const CLOSED_FORM_BUDGET: Duration = Duration::from_secs(10);
const FIXED_POINT_TOL: f64 = 1e-4;
const CROSS_CHECK_TOL: f64 = 1e-4;
const FIXED_POINT_BUDGET: Duration = Duration::from_secs(120);
const VARIATIONAL_P_TOL: f64 = 1e-5;
const VARIATIONAL_L2_TOL: f64 = 1e-10;
const NAIVE_DETECTOR: f64 = 1e-2;
const MAJORIZATION_SLACK: f64 = 1e-12;
const BERNOULLI_SLACK: f64 = 1e-12;
const HOLDER_INEQ_TOL: f64 = 1e-8;
const HOLDER_EQ_TOL: f64 = 1e-10;
const HOLDER_SAMPLES: usize = 20;
const NORM_TRANSFER_TOL: f64 = 1e-4;
const GRADIENT_TOL: f64 = 1e-6;
const QUADRATURE_TOL: f64 = 1e-10;

const SHIPPED: [&str; 5] = ["disc_p1.cfg", "disc_weighted.cfg", "polydisc_slice.cfg", "ball_origin.cfg", "disc_points.cfg"];
const FIXED_POINT_INSTANCES: [&str; 3] = ["disc_weighted.cfg", "polydisc_slice.cfg", "ball_origin.cfg"];
const EXPONENTS: [f64; 3] = [0.5, 1.0, 1.5];

struct Gate {
    failures: usize,
}

impl Gate {
    fn report(&mut self, id: &str, ok: bool, detail: String) {
        println!("{} criterion {id}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures += 1;
        }
    }
}

fn load(name: &str) -> InstanceConfig {
    InstanceConfig::load(common::config(name)).expect("shipped config parses")
}

/// A direct and an IRLS solution of one configured cell.
struct Solved {
    label: String,
    prob: LpProblem,
    direct: HoloFunction,
    irls: HoloFunction,
    descent: bool,
}

fn solve_cell(label: String, cfg: &InstanceConfig) -> Result<Solved, String> {
    let disc = cfg.instance().discretize().map_err(|e| e.to_string())?;
    let prob = problem(cfg, &disc).map_err(|e| e.to_string())?;
    let (direct, _) = solve_direct(cfg, &prob).map_err(|e| format!("{label}: {e}"))?;
    let out = solve_irls(cfg, &prob).map_err(|e| format!("{label}: {e}"))?;
    Ok(Solved { label, prob, direct, irls: out.solution, descent: descent_check(&out.trace) })
}

fn criterion_1(gate: &mut Gate) {
    let clock = Instant::now();
    let disc = Instance {
        domain: DomainSpec::disc(1.0),
        submanifold: SubmanifoldSpec::CoordinateSubspace { codim: 1 },
        weight: WeightSpec::flat(),
        data: vec![Complex64::new(1.0, 0.0)],
        degree: 8,
        order: 12,
    }
    .discretize()
    .unwrap();
    let one = disc.feasible.particular.clone();
    let mut worst_rel = 0.0f64;
    let mut worst_dist = 0.0f64;
    let mut errors = Vec::new();
    for p in EXPONENTS {
        let prob = LpProblem::new(disc.clone(), p, FINAL_EPS).unwrap();
        let starts = random_starts(&disc, 4, 1, true);
        match solve_lp_direct(&prob, &starts, &DirectOptions::default()) {
            Ok((f, cert)) => {
                worst_rel = worst_rel.max((cert.energy - PI).abs() / PI);
                worst_dist = worst_dist.max((&f.coeffs - &one).norm());
            }
            Err(e) => errors.push(format!("direct p={p}: {e}")),
        }
        match l2_start(&prob).and_then(|s| irls_solve(&prob, &s, &IrlsSchedule::default())) {
            Ok(out) => {
                worst_rel = worst_rel.max((prob.energy(&out.solution) - PI).abs() / PI);
                worst_dist = worst_dist.max((&out.solution.coeffs - &one).norm());
            }
            Err(e) => errors.push(format!("irls p={p}: {e}")),
        }
    }
    let l2 = LpProblem::new(disc.clone(), 2.0, FINAL_EPS).unwrap();
    let (_, rep) = solve_l2(&l2.reweighted_l2(&disc.base_density).unwrap()).unwrap();
    worst_rel = worst_rel.max((rep.objective - PI).abs() / PI);
    let elapsed = clock.elapsed();
    gate.report(
        "1 (closed-form minimal extension)",
        errors.is_empty() && worst_rel <= CLOSED_FORM_REL && worst_dist <= CLOSED_FORM_DISTANCE && elapsed <= CLOSED_FORM_BUDGET,
        format!(
            "max |m_p - pi|/pi = {worst_rel:.1e} (tol {CLOSED_FORM_REL:.0e}), max |F - 1| = {worst_dist:.1e} (tol {CLOSED_FORM_DISTANCE:.0e}), {:.2}s (budget {}s){}",
            elapsed.as_secs_f64(),
            CLOSED_FORM_BUDGET.as_secs(),
            if errors.is_empty() { String::new() } else { format!(", errors: {errors:?}") }
        ),
    );
}

fn criterion_2(gate: &mut Gate) -> Vec<Solved> {
    let clock = Instant::now();
    let mut solved = Vec::new();
    let mut errors = Vec::new();
    for name in FIXED_POINT_INSTANCES {
        let base = load(name);
        for p in EXPONENTS {
            let cfg = base.with_cell(p, base.solve.degree).unwrap();
            match solve_cell(format!("{name} p={p}"), &cfg) {
                Ok(s) => solved.push(s),
                Err(e) => errors.push(e),
            }
        }
    }
    let mut worst_fp = 0.0f64;
    let mut worst_cross = 0.0f64;
    for s in &solved {
        worst_fp = worst_fp.max(fixed_point_residual(&s.direct, &s.prob).unwrap_or(f64::INFINITY));
        worst_cross = worst_cross.max(s.irls.distance(&s.direct) / (1.0 + s.direct.coeff_norm()));
    }
    let elapsed = clock.elapsed();
    gate.report(
        "2 (fixed-point identity)",
        errors.is_empty() && worst_fp <= FIXED_POINT_TOL && worst_cross <= CROSS_CHECK_TOL && elapsed <= FIXED_POINT_BUDGET,
        format!(
            "{} runs, max fixed-point residual {worst_fp:.1e} (tol {FIXED_POINT_TOL:.0e}), max |F_irls - F_direct|/(1+|F_direct|) {worst_cross:.1e} (tol {CROSS_CHECK_TOL:.0e}), {:.2}s (budget {}s){}",
            solved.len(),
            elapsed.as_secs_f64(),
            FIXED_POINT_BUDGET.as_secs(),
            if errors.is_empty() { String::new() } else { format!(", errors: {errors:?}") }
        ),
    );
    solved
}

fn shipped_runs() -> Result<Vec<Solved>, String> {
    SHIPPED.iter().map(|name| solve_cell(name.to_string(), &load(name))).collect()
}

fn criterion_3(gate: &mut Gate, shipped: &[Solved]) {
    let mut worst_p = 0.0f64;
    let mut worst_l2 = 0.0f64;
    let mut naive_best = 0.0f64;
    for s in shipped {
        worst_p = worst_p.max(variational_residual_p(&s.direct, &s.prob));
        worst_l2 = worst_l2.max(l2_orthogonality(&s.direct, &s.prob).unwrap_or(f64::INFINITY));
        naive_best = naive_best.max(variational_residual_p(&s.prob.disc.naive_extension(), &s.prob));
    }
    gate.report(
        "3 (variational conditions)",
        worst_p <= VARIATIONAL_P_TOL && worst_l2 <= VARIATIONAL_L2_TOL && naive_best >= NAIVE_DETECTOR,
        format!(
            "p-energy residual {worst_p:.1e} (tol {VARIATIONAL_P_TOL:.0e}), L² residual {worst_l2:.1e} (tol {VARIATIONAL_L2_TOL:.0e}), naive extension {naive_best:.2e} (needs >= {NAIVE_DETECTOR:.0e})"
        ),
    );
}

fn criterion_4(gate: &mut Gate) {
    let mut worst = 0.0f64;
    for name in SHIPPED {
        let cfg = load(name);
        let disc = cfg.instance().discretize().unwrap();
        for p in EXPONENTS {
            worst = worst.max(majorization(&disc, p, cfg.solve.seed));
        }
    }
    let bern = bernoulli_bound();
    gate.report(
        "4 (majorization and Bernoulli bound)",
        worst <= MAJORIZATION_SLACK && bern <= BERNOULLI_SLACK,
        format!("majorant violation {worst:.1e} (slack {MAJORIZATION_SLACK:.0e}), (1+x)^a - 1 - ax max {bern:.1e} over 9 x 10^4 points"),
    );
}

fn random_function(disc: &Arc<Discretization>, rng: &mut ChaCha8Rng) -> HoloFunction {
    disc.function(DVector::from_fn(disc.basis.len(), |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    }))
}

fn criterion_5(gate: &mut Gate, runs: &[&Solved]) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_ineq = 0.0f64;
    let mut worst_eq = 0.0f64;
    for s in runs {
        for _ in 0..HOLDER_SAMPLES {
            let g = random_function(&s.prob.disc, &mut rng);
            let h = check_holder(&s.direct, &g, &s.prob);
            worst_ineq = worst_ineq.max((h.lhs - h.rhs).max(0.0) / h.rhs);
        }
        let e = check_holder(&s.direct, &s.direct, &s.prob);
        worst_eq = worst_eq.max((e.lhs - e.rhs).abs() / e.rhs);
    }
    gate.report(
        "5 (Hölder chain)",
        worst_ineq <= HOLDER_INEQ_TOL && worst_eq <= HOLDER_EQ_TOL,
        format!(
            "{} minimizers x {HOLDER_SAMPLES} samples, inequality {worst_ineq:.1e} (tol {HOLDER_INEQ_TOL:.0e}), equality {worst_eq:.1e} (tol {HOLDER_EQ_TOL:.0e})",
            runs.len()
        ),
    );
}

fn criterion_6(gate: &mut Gate, shipped: &[Solved]) {
    let worst = shipped.iter().map(|s| norm_transfer(&s.direct, &s.prob)).fold(0.0, f64::max);
    gate.report(
        "6 (norm transfer)",
        worst <= NORM_TRANSFER_TOL,
        format!("max relative gap {worst:.1e} at eps = {FINAL_EPS:.0e} (tol {NORM_TRANSFER_TOL:.0e})"),
    );
}

fn criterion_7(gate: &mut Gate, runs: &[&Solved]) {
    let mut grad = 0.0f64;
    let mut quad = 0.0f64;
    for name in SHIPPED {
        let cfg = load(name);
        let disc = cfg.instance().discretize().unwrap();
        grad = grad.max(gradient_check(&disc, cfg.solve.seed).unwrap_or(f64::INFINITY));
        quad = quad.max(quadrature_exactness(&disc).unwrap_or(f64::INFINITY));
    }
    let descending = runs.iter().filter(|s| s.descent).count();
    let bad: Vec<&str> = runs.iter().filter(|s| !s.descent).map(|s| s.label.as_str()).collect();
    gate.report(
        "7 (numerics hygiene)",
        grad <= GRADIENT_TOL && quad <= QUADRATURE_TOL && bad.is_empty(),
        format!(
            "gradient vs central differences {grad:.1e} (tol {GRADIENT_TOL:.0e}), quadrature moments {quad:.1e} (tol {QUADRATURE_TOL:.0e}), IRLS descent {descending}/{} runs{}",
            runs.len(),
            if bad.is_empty() { String::new() } else { format!(" (not monotone: {bad:?})") }
        ),
    );
}

fn criterion_8(gate: &mut Gate) {
    let cfg = load("disc_weighted.cfg");
    let mut ledgers = Vec::new();
    let mut codes = Vec::new();
    for _ in 0..2 {
        let report = cli::verify_report(&cfg).unwrap();
        let ledger = report.ledger.unwrap();
        codes.push(ledger.exit_code());
        ledgers.push(serde_json::to_string(&ledger).unwrap());
    }
    let identical = ledgers[0] == ledgers[1];
    let csv = sweep(&cfg, &EXPONENTS, &[4, 8]).map(|rows| sweep_csv(&rows));
    let golden = std::fs::read_to_string(common::golden("sweep_disc_weighted.csv")).unwrap();
    let golden_ok = match &csv {
        Ok(csv) => common::sweep_matches(csv, &golden),
        Err(e) => Err(e.to_string()),
    };
    let again = sweep(&cfg, &EXPONENTS, &[4, 8]).map(|rows| sweep_csv(&rows));
    let repeatable = matches!((&csv, &again), (Ok(a), Ok(b)) if a == b);
    gate.report(
        "8 (determinism)",
        identical && codes == [0, 0] && golden_ok.is_ok() && repeatable,
        format!(
            "repeated verify ledgers {}, sweep golden {}, repeated sweep {}",
            if identical { "bit-identical" } else { "DIFFER" },
            match &golden_ok {
                Ok(()) => "matches".to_string(),
                Err(e) => format!("mismatch: {e}"),
            },
            if repeatable { "bit-identical" } else { "DIFFERS" }
        ),
    );
}

fn criterion_9(gate: &mut Gate) {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut found = Vec::new();
    let mut errors = Vec::new();
    for (label, domain, data, degree, order, trials) in [
        ("disc f=1", DomainSpec::disc(1.0), vec![one], 8u32, 12usize, 8usize),
        ("bidisc f=z1", DomainSpec::polydisc(2, 1.0), vec![zero, one], 4, 4, 16),
    ] {
        let disc = Instance {
            domain,
            submanifold: SubmanifoldSpec::CoordinateSubspace { codim: 1 },
            weight: WeightSpec::flat(),
            data,
            degree,
            order,
        }
        .discretize()
        .unwrap();
        let prob = LpProblem::new(disc, 0.5, FINAL_EPS).unwrap();
        match uniqueness_probe(&prob, trials, 9, &DirectOptions::default()) {
            Ok(r) => found.push(format!("{label}: {} cluster(s) from {trials} starts", r.clusters.len())),
            Err(e) => errors.push(format!("{label}: {e}")),
        }
    }
    // recorded, never asserted; only a probe that fails to run fails here
    gate.report(
        "9 (explicit non-claims)",
        errors.is_empty(),
        format!(
            "sharp extension constant not adjudicated; uniqueness for p = 0.5 probed and reported only: {}{}",
            found.join("; "),
            if errors.is_empty() { String::new() } else { format!(" errors: {errors:?}") }
        ),
    );
}

fn main() {
    let mut gate = Gate { failures: 0 };
    criterion_1(&mut gate);
    let fixed_point_runs = criterion_2(&mut gate);
    match shipped_runs() {
        Ok(shipped) => {
            criterion_3(&mut gate, &shipped);
            criterion_4(&mut gate);
            let all: Vec<&Solved> = shipped.iter().chain(&fixed_point_runs).collect();
            criterion_5(&mut gate, &all);
            criterion_6(&mut gate, &shipped);
            criterion_7(&mut gate, &all);
        }
        Err(e) => {
            for id in ["3", "5", "6", "7"] {
                gate.report(id, false, format!("shipped instance failed to solve: {e}"));
            }
            criterion_4(&mut gate);
        }
    }
    criterion_8(&mut gate);
    criterion_9(&mut gate);
    // ledger composition on the shipped instances
    let ledgers: Vec<(String, i32)> = SHIPPED
        .iter()
        .map(|n| (n.to_string(), run_ledger(&load(n)).map(|r| r.ledger.exit_code()).unwrap_or(3)))
        .collect();
    let all_zero = ledgers.iter().all(|(_, c)| *c == 0);
    gate.report("ledger (shipped instances verify)", all_zero, format!("exit codes {ledgers:?}"));

    if gate.failures > 0 {
        println!("{} criterion line(s) failed", gate.failures);
        std::process::exit(1);
    }
}
