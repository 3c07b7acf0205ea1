//! Acceptance suite. Prints one PASS/FAIL line per criterion with its
//! tolerances and runtime, then exits nonzero if any criterion failed.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cutters::gallery::{
    fixture_by_name, fixture_kink_family, fixture_nonexpansivity_loss, FIXTURE_NAMES,
};
use cutters::instances::{
    random_feasible_pair, random_set_containing, rng_from_seed, sample_member, uniform_point,
    SetKind,
};
use cutters::operators::{Cutter, PrimitiveSet};
use cutters::solver::{fejer_check, read_csv, sqne_audit, write_csv};
use cutters::{
    lift, solve, subgradient_project, LiftedB, Mode, OperatorParams, Point, StopRule,
    TerminationReason,
};
use rand::Rng;
use rayon::prelude::*;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cutters"))
}

const SEED: u64 = 20_240_601;

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

/// Sublinear cutter: exact iterates and ratios.
fn criterion_1() -> Outcome {
    let out = bin().args(["run-fixture", "sublinear"]).output().unwrap();
    if out.status.code() != Some(0) {
        return outcome(false, format!("run-fixture exited {:?}", out.status.code()));
    }
    let steps = read_csv(out.stdout.as_slice()).unwrap();
    let x: Vec<f64> = steps.iter().map(|s| s.x[0]).collect();
    if x.len() < 51 {
        return outcome(false, format!("only {} iterates", x.len()));
    }
    let max_err = (1..=50)
        .map(|n| (x[n] - 1.0 / (2 * n + 1) as f64).abs())
        .fold(0.0, f64::max);
    let iterates_ok = max_err <= 1e-12;
    let ratios: Vec<(usize, f64)> = (10..50).map(|n| (n, x[n + 1] / x[n])).collect();
    let bad: Vec<&(usize, f64)> = ratios
        .iter()
        .filter(|(_, r)| r.partial_cmp(&0.95) != Some(std::cmp::Ordering::Greater))
        .collect();
    let ratio_ok = bad.is_empty();
    let mut detail = format!(
        "x_n = 1/(2n+1), n = 1..50: max err {max_err:e} (tol 1e-12) {}; x_(n+1)/x_n > 0.95 for n >= 10: {}",
        if iterates_ok { "ok" } else { "FAILED" },
        if ratio_ok { "ok".to_string() } else { format!("FAILED at {} n", bad.len()) },
    );
    if let Some((n, r)) = bad.first() {
        detail.push_str(&format!(
            " (n = {n}: {r:.6}; first n above 0.95 is {})",
            first_ratio_above(&ratios)
        ));
    }
    outcome(iterates_ok && ratio_ok, detail)
}

fn first_ratio_above(ratios: &[(usize, f64)]) -> String {
    ratios
        .iter()
        .find(|(_, r)| *r > 0.95)
        .map_or("none".into(), |(n, _)| n.to_string())
}

const GAMMAS: [f64; 5] = [0.1, 0.5, 1.0, 1.5, 1.9];

/// Relaxed-cutter bound and strong quasinonexpansivity on random primitive sets.
fn criterion_2() -> Outcome {
    const SAMPLES: usize = 20_000;
    let mut rng = rng_from_seed(SEED);
    let mut failures = 0usize;
    let mut worst = f64::INFINITY;
    let mut checks = 0usize;
    for _ in 0..SAMPLES {
        let dim = rng.random_range(1..=6);
        let anchor = uniform_point(&mut rng, dim, 3.0);
        let set = match rng.random_range(0..5) {
            0 => random_set_containing(&mut rng, SetKind::Halfspace, &anchor),
            1 => random_set_containing(&mut rng, SetKind::Ball, &anchor),
            2 => random_set_containing(&mut rng, SetKind::Box, &anchor),
            3 => {
                let n = uniform_point(&mut rng, dim, 1.0);
                PrimitiveSet::hyperplane(n.clone(), n.dot(&anchor))
                    .unwrap_or_else(|_| PrimitiveSet::singleton(anchor.clone()))
            }
            _ => PrimitiveSet::singleton(anchor.clone()),
        };
        let x = uniform_point(&mut rng, dim, 10.0);
        let y = sample_member(&mut rng, &set, &anchor, 3.0);
        let gamma = GAMMAS[rng.random_range(0..GAMMAS.len())];
        let cutter = Cutter::exact(set);
        let rep = sqne_audit(
            &cutter,
            gamma,
            std::slice::from_ref(&x),
            std::slice::from_ref(&y),
        )
        .unwrap();
        for ineq in &rep.inequalities {
            checks += 1;
            worst = worst.min(ineq.worst_slack);
            if ineq.worst_slack < -1e-9 {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0,
        format!("{SAMPLES} samples, {checks} inequality checks, {failures} failures, worst scaled slack {worst:e} (tol -1e-9)"),
    )
}

/// Fejér monotonicity and convergence on random feasible instances in R^10.
fn criterion_3() -> Outcome {
    const INSTANCES: u64 = 100;
    const DIM: usize = 10;
    let mut cells = Vec::new();
    for g in [0.5, 1.0, 1.5] {
        for m in [0.5, 1.0, 1.5] {
            for l in [0.5, 1.0] {
                cells.push(OperatorParams::new(g, m, l).unwrap());
            }
        }
    }
    let results: Vec<(f64, f64, bool, usize)> = (0..INSTANCES)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = rng_from_seed(SEED ^ (i + 1));
            let inst = random_feasible_pair(&mut rng, DIM);
            let x0 = uniform_point(&mut rng, DIM, 10.0);
            let (a, b) = (Cutter::exact(inst.a), Cutter::exact(inst.b));
            let planted = inst.planted;
            cells
                .iter()
                .map(|p| {
                    let t = solve(&a, &b, p, &x0, &StopRule::default()).unwrap();
                    let fej = fejer_check(&t, std::slice::from_ref(&planted)).unwrap();
                    let res = t.final_max_residual().unwrap_or(f64::INFINITY);
                    let ok = t.termination == TerminationReason::ResidualMet;
                    (fej.max_violation, res, ok, t.iterations)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let runs = results.len();
    let worst_fejer = results
        .iter()
        .map(|r| r.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let worst_res = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let unconverged = results.iter().filter(|r| !r.2).count();
    let max_iters = results.iter().map(|r| r.3).max().unwrap_or(0);
    outcome(
        worst_fejer <= 1e-9 && worst_res <= 1e-8 && unconverged == 0,
        format!(
            "{runs} runs: max Fejer violation {worst_fejer:e} (tol 1e-9), max final residual {worst_res:e} (tol 1e-8), \
             {unconverged} not ResidualMet, max iterations {max_iters} (limit 1e5)"
        ),
    )
}

/// Expansion of one pair by a subgradient cutter that stays SQNE.
fn criterion_4() -> Outcome {
    let f = fixture_nonexpansivity_loss();
    let p = |v: f64| f.a.apply(&Point::new(vec![v]).unwrap()).unwrap()[0];
    let (p09, p11) = (p(0.9), p(1.1));
    let image_gap = (p09 - p11).abs();
    let gap = (0.9f64 - 1.1).abs();
    let values_ok = p09 == 0.0
        && p11 == 0.5
        && image_gap == 0.5
        && (gap - 0.2).abs() <= 1e-15
        && image_gap > gap;
    let report = f.verify().unwrap();
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.label.as_str())
        .collect();
    outcome(
        values_ok && failed.is_empty(),
        format!(
            "P(0.9) = {p09}, P(1.1) = {p11}, |P(0.9) - P(1.1)| = {image_gap} > |0.9 - 1.1| = {gap}; \
             SQNE audit over 501 points x 5 gammas: {}",
            if failed.is_empty() { "pass".to_string() } else { format!("failed {failed:?}") }
        ),
    )
}

/// Spurious fixed points of pure reflections.
fn criterion_5() -> Outcome {
    let mut details = Vec::new();
    let mut all = true;
    for name in ["fixed-points-abs", "fixed-points-max-abs"] {
        let f = fixture_by_name(name).unwrap();
        let report = f.verify().unwrap();
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.label.clone())
            .collect();
        all &= failed.is_empty();
        details.push(format!(
            "{name}: {}/{} checks",
            report.checks.len() - failed.len(),
            report.checks.len()
        ));
        for (label, t) in &report.traces {
            all &= t.termination == TerminationReason::Stagnated;
            details.push(format!("{label} run {}", t.termination));
        }
    }
    let f = fixture_by_name("fixed-points-max-abs").unwrap();
    let g = match &f.a {
        Cutter::Subgradient(g) => g.clone(),
        _ => unreachable!(),
    };
    let img = subgradient_project(&g, &Point::new(vec![2.0, 1.0]).unwrap()).unwrap();
    let img_ok = img == Point::new(vec![0.0, 1.0]).unwrap() && g.value(&img).unwrap() > 0.0;
    all &= img_ok;
    details.push(format!("image of (2, 1) is {img}, in A∩B: {}", !img_ok));
    outcome(all, details.join("; "))
}

/// Step length 1/n against distance 1 for the truncated kink family.
fn criterion_6() -> Outcome {
    let report = fixture_kink_family(10).unwrap().verify().unwrap();
    let f = fixture_kink_family(10).unwrap();
    let g = match &f.a {
        Cutter::Subgradient(g) => g.clone(),
        _ => unreachable!(),
    };
    let exact = (1..=10).all(|n| {
        let e = Point::basis(10, n - 1);
        let step = e.dist(&subgradient_project(&g, &e).unwrap());
        step == 1.0 / n as f64 || (step - 1.0 / n as f64).abs() <= f64::EPSILON
    });
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    outcome(
        failed == 0 && exact,
        format!(
            "K = 10: {} checks, {failed} failed; steps 1/n at distance 1 for n = 1..10",
            report.checks.len()
        ),
    )
}

/// Five unit balls in R^3 through the product space.
fn criterion_7() -> Outcome {
    let mut rng = rng_from_seed(SEED + 7);
    let planted = uniform_point(&mut rng, 3, 2.0);
    let balls: Vec<PrimitiveSet> = (0..5)
        .map(|_| {
            let off =
                cutters::instances::unit_direction(&mut rng, 3).scale(rng.random_range(0.0..0.9));
            PrimitiveSet::ball(planted.add(&off), 1.0).unwrap()
        })
        .collect();
    let x0 = uniform_point(&mut rng, 3, 8.0);
    let mut details = Vec::new();
    let mut all = true;
    for flavor in [LiftedB::Exact, LiftedB::Subgradient] {
        let prob = lift(
            balls.iter().cloned().map(Cutter::exact).collect(),
            3,
            flavor,
        )
        .unwrap();
        let start = prob.diagonal_point(&x0).unwrap();
        for (g, m, l) in [(1.0, 1.0, 1.0), (0.5, 0.5, 0.5)] {
            let params = OperatorParams::new(g, m, l).unwrap();
            let t = solve(
                prob.lifted_a(),
                prob.lifted_b(),
                &params,
                &start,
                &StopRule::default(),
            )
            .unwrap();
            let mean = prob.mean_block(&t.final_point).unwrap();
            let spread = prob.diagonal_spread(&t.final_point).unwrap();
            let infeas = balls
                .iter()
                .map(|b| b.distance(&mean).unwrap())
                .fold(0.0, f64::max);
            let ok =
                t.termination == TerminationReason::ResidualMet && infeas <= 1e-6 && spread <= 1e-6;
            all &= ok;
            details.push(format!(
                "{flavor:?} ({g},{m},{l}): {} in {} its, infeasibility {infeas:e}, spread {spread:e}",
                t.termination, t.iterations
            ));
        }
    }
    outcome(all, format!("tol 1e-6; {}", details.join("; ")))
}

/// Two trace files for the comparison fixture, both converging, CSV round trip.
fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run-fixture", "figure-comparison", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    if out.status.code() != Some(0) {
        return outcome(false, format!("run-fixture exited {:?}", out.status.code()));
    }
    let mut files: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    let mut details = vec![format!("{} trace files", files.len())];
    let mut all = files.len() == 2;
    for path in &files {
        let bytes = std::fs::read(path).unwrap();
        let steps = read_csv(bytes.as_slice()).unwrap();
        let mut again = Vec::new();
        write_csv(&steps, &mut again).unwrap();
        let round_trip = again == bytes;
        let residual = steps.last().map_or(f64::INFINITY, |s| s.max_residual());
        let converged = residual < 1e-8;
        all &= round_trip && converged;
        details.push(format!(
            "{}: {} rows, final residual {residual:e}, round trip {}",
            Path::new(path).file_name().unwrap().to_string_lossy(),
            steps.len(),
            if round_trip { "identical" } else { "DIFFERS" }
        ));
    }
    let f = fixture_by_name("figure-comparison").unwrap();
    for (label, t) in f.run(Mode::Strict).unwrap() {
        all &= t.termination == TerminationReason::ResidualMet;
        details.push(format!(
            "{label} {} after {} its",
            t.termination, t.iterations
        ));
    }
    outcome(all, details.join("; "))
}

fn main() -> ExitCode {
    assert_eq!(FIXTURE_NAMES.len(), 7);
    let criteria: [Criterion; 8] = [
        (1, "sublinear iterates", Duration::from_secs(1), criterion_1),
        (
            2,
            "relaxed cutter inequalities",
            Duration::from_secs(10),
            criterion_2,
        ),
        (
            3,
            "quasinonexpansivity and Fejer",
            Duration::from_secs(60),
            criterion_3,
        ),
        (
            4,
            "loss of nonexpansivity",
            Duration::from_secs(1),
            criterion_4,
        ),
        (
            5,
            "spurious fixed points",
            Duration::from_secs(5),
            criterion_5,
        ),
        (
            6,
            "kink family step vs distance",
            Duration::from_secs(1),
            criterion_6,
        ),
        (7, "product space", Duration::from_secs(10), criterion_7),
        (8, "comparison traces", Duration::from_secs(5), criterion_8),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < limit;
        let pass = o.passed && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id} [{name}]: {} | {} | runtime {:.3} s (limit {} s{})",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", EXCEEDED" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
