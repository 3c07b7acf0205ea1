//! Named fixtures: small problems whose behaviour is known in closed form,
//! each with a machine-checkable expectation.
//!
//! | name                   | shows                                                     |
//! |------------------------|-----------------------------------------------------------|
//! | `separator`            | a separator that is not a cutter fails the cutter audit   |
//! | `nonexpansivity-loss`  | a subgradient cutter expands a pair yet stays SQNE        |
//! | `fixed-points-abs`     | pure reflections fix every point of the line              |
//! | `fixed-points-max-abs` | fixed points whose cutter image is infeasible             |
//! | `sublinear`            | a cutter forcing the sublinear rate `1/(2n+1)`            |
//! | `kink-family`          | cutter steps of length `1/n` at distance 1 from the set   |
//! | `figure-comparison`    | damped-reflection vs alternating-projection runs on disks |
//!
//! The kink family is a finite truncation: the sequential space it comes
//! from is infinite-dimensional, and only the per-coordinate gap between
//! step length and distance carries over. Infinite-dimensional failure
//! examples are not reproduced.

use crate::error::{Error, Result};
use crate::functions::{
    kink, make_abs, make_distance, make_kink_family, make_kinked_abs, make_max_abs,
    make_sublinear_cutter, subgradient_project,
};
use crate::operators::{averaged_step, CustomCutter, Cutter, Mode, OperatorParams, PrimitiveSet};
use crate::point::Point;
use crate::solver::{
    cutter_audit, expansion, solve, sqne_audit, IterationTrace, StopRule, TerminationReason,
};

/// One solver run of a fixture.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub label: String,
    pub gamma: f64,
    pub mu: f64,
    pub lambda: f64,
    pub x0: Point,
    pub stop: StopRule,
}

impl RunSpec {
    fn new(label: &str, (gamma, mu, lambda): (f64, f64, f64), x0: Point, stop: StopRule) -> Self {
        RunSpec {
            label: label.to_string(),
            gamma,
            mu,
            lambda,
            x0,
            stop,
        }
    }
}

/// What a fixture must exhibit.
#[derive(Debug, Clone)]
pub enum Expectation {
    /// The cutter audit fails at `x` against the fixed point `z`.
    NotACutter { x: Point, z: Point },
    /// `|P x - P y| > |x - y|` while the relaxed cutter stays strongly quasinonexpansive.
    LosesNonexpansivity { x: Point, y: Point },
    /// Every grid point is fixed by `T`, and runs from infeasible points stall.
    SpuriousFixedPoints { grid: Vec<Point>, lambdas: Vec<f64> },
    /// 1-D iterates equal `1 / (2n + 1)` up to `upto`.
    ExactIterates { upto: usize, tol: f64 },
    /// At each basis vector `e_n` the cutter step is `1/n` while the distance is 1.
    StepVersusDistance { k_max: usize },
    /// Every run ends with `ResidualMet` and a final residual below `tol`.
    AllConverge { tol: f64 },
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub summary: &'static str,
    pub a: Cutter,
    pub b: Cutter,
    /// Mode the fixture is meant to run in.
    pub mode: Mode,
    pub runs: Vec<RunSpec>,
    pub expectation: Expectation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(label: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            label: label.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixtureReport {
    pub name: &'static str,
    pub checks: Vec<Check>,
    pub traces: Vec<(String, IterationTrace)>,
}

impl FixtureReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl Fixture {
    /// Runs every [`RunSpec`] with parameters validated in `mode`. Fixtures
    /// that need reflections fail here when asked to run in strict mode.
    pub fn run(&self, mode: Mode) -> Result<Vec<(String, IterationTrace)>> {
        self.runs
            .iter()
            .map(|r| {
                let params = OperatorParams::with_mode(r.gamma, r.mu, r.lambda, mode)?;
                let trace = solve(&self.a, &self.b, &params, &r.x0, &r.stop)?;
                Ok((r.label.clone(), trace))
            })
            .collect()
    }

    /// Runs the fixture in its own mode and checks the expectation.
    pub fn verify(&self) -> Result<FixtureReport> {
        let traces = self.run(self.mode)?;
        let checks = match &self.expectation {
            Expectation::NotACutter { x, z } => self.check_not_a_cutter(x, z)?,
            Expectation::LosesNonexpansivity { x, y } => self.check_expansion(x, y)?,
            Expectation::SpuriousFixedPoints { grid, lambdas } => {
                self.check_spurious(grid, lambdas)?
            }
            Expectation::ExactIterates { upto, tol } => check_exact_iterates(&traces, *upto, *tol),
            Expectation::StepVersusDistance { k_max } => self.check_step_vs_distance(*k_max)?,
            Expectation::AllConverge { tol } => check_all_converge(&traces, *tol),
        };
        Ok(FixtureReport {
            name: self.name,
            checks,
            traces,
        })
    }

    fn check_not_a_cutter(&self, x: &Point, z: &Point) -> Result<Vec<Check>> {
        let c = &self.a;
        let report = cutter_audit(c, std::slice::from_ref(x), std::slice::from_ref(z))?;
        let sep = &report.inequalities[0];
        let tx = c.apply(x)?;
        let inner = x.sub(&tx).dot(&z.sub(&tx));
        let mut checks = vec![
            Check::new(
                "z is a fixed point",
                c.apply(z)? == *z && c.in_fixed_set(z, 0.0),
                format!("T{z} = {}", c.apply(z)?),
            ),
            Check::new(
                "cutter audit fails at (x, z)",
                !sep.passed && inner > 0.0,
                format!("<x - Tx, z - Tx> = {inner} at x = {x}, z = {z}"),
            ),
        ];
        // sampled audit over the line must catch the same defect
        let xs: Vec<Point> = (-30..=30)
            .map(|i| Point::from_raw(vec![i as f64 / 10.0]))
            .collect();
        let zs = vec![
            Point::from_raw(vec![-1.0]),
            Point::from_raw(vec![0.0]),
            z.clone(),
        ];
        let sampled = cutter_audit(c, &xs, &zs)?;
        let worst = &sampled.inequalities[0];
        checks.push(Check::new(
            "sampled cutter audit fails",
            !worst.passed,
            format!(
                "worst slack {} at {:?}",
                worst.worst_slack, worst.worst_pair
            ),
        ));
        Ok(checks)
    }

    fn check_expansion(&self, x: &Point, y: &Point) -> Result<Vec<Check>> {
        let c = &self.a;
        let (px, py) = (c.apply(x)?, c.apply(y)?);
        let grew = expansion(c, x, y)?;
        let mut checks = vec![Check::new(
            "pair is expanded",
            grew > 0.0,
            format!("|P{x} - P{y}| = {} > |x - y| = {}", px.dist(&py), x.dist(y)),
        )];
        let grid: Vec<Point> = (-200..=300)
            .map(|i| Point::from_raw(vec![i as f64 / 100.0]))
            .collect();
        let fixed = vec![Point::zeros(c.dim())];
        for gamma in [0.1, 0.5, 1.0, 1.5, 1.9] {
            let rep = sqne_audit(c, gamma, &grid, &fixed)?;
            checks.push(Check::new(
                format!("SQNE audit, gamma = {gamma}"),
                rep.passed(),
                format!(
                    "worst slacks {} / {}",
                    rep.inequalities[0].worst_slack, rep.inequalities[1].worst_slack
                ),
            ));
        }
        Ok(checks)
    }

    fn check_spurious(&self, grid: &[Point], lambdas: &[f64]) -> Result<Vec<Check>> {
        let mut checks = Vec::new();
        let feasible = |p: &Point| self.a.in_fixed_set(p, 0.0) && self.b.in_fixed_set(p, 0.0);
        for &lambda in lambdas {
            let params = OperatorParams::with_mode(0.0, 0.0, lambda, self.mode)?;
            let mut worst = 0.0f64;
            let mut stalls = 0usize;
            let mut infeasible = 0usize;
            let mut wrong = Vec::new();
            for p in grid {
                let rec = averaged_step(&self.a, &self.b, &params, p)?;
                worst = worst.max(rec.next.dist(p) / 1f64.max(p.norm()));
                let trace = solve(&self.a, &self.b, &params, p, &StopRule::default())?;
                if feasible(p) {
                    if trace.termination != TerminationReason::ResidualMet {
                        wrong.push(p.clone());
                    }
                } else {
                    infeasible += 1;
                    if trace.termination == TerminationReason::Stagnated {
                        stalls += 1;
                    } else {
                        wrong.push(p.clone());
                    }
                }
            }
            checks.push(Check::new(
                format!("every grid point fixed, lambda = {lambda}"),
                worst <= f64::EPSILON,
                format!("max relative move {worst:e} over {} points", grid.len()),
            ));
            checks.push(Check::new(
                format!("infeasible starts stall, lambda = {lambda}"),
                wrong.is_empty() && stalls == infeasible,
                format!(
                    "{stalls}/{infeasible} stagnated; unexpected: {:?}",
                    wrong.iter().take(3).collect::<Vec<_>>()
                ),
            ));
        }
        // where the cutter image lands
        let images_feasible = grid
            .iter()
            .filter(|p| p.coords().iter().all(|c| *c != 0.0))
            .map(|p| self.a.apply(p).map(|q| feasible(&q)))
            .collect::<Result<Vec<bool>>>()?;
        let all = images_feasible.iter().all(|&f| f);
        let none = images_feasible.iter().all(|&f| !f);
        let label = if self.a.dim() == 1 {
            "cutter image of every point is feasible"
        } else {
            "cutter image of every point off the axes is infeasible"
        };
        let passed = if self.a.dim() == 1 { all } else { none };
        checks.push(Check::new(
            label,
            passed,
            format!("{} points inspected", images_feasible.len()),
        ));
        Ok(checks)
    }

    fn check_step_vs_distance(&self, k_max: usize) -> Result<Vec<Check>> {
        let f = match &self.a {
            Cutter::Subgradient(f) => f,
            _ => {
                return Err(Error::InvalidArgument(
                    "kink-family fixture needs a subgradient cutter".into(),
                ))
            }
        };
        let origin = Point::zeros(k_max);
        let mut checks = Vec::new();
        for n in 1..=k_max {
            let e = Point::basis(k_max, n - 1);
            let step = e.dist(&subgradient_project(f, &e)?);
            let dist = e.dist(&origin);
            let expected = 1.0 / n as f64;
            checks.push(Check::new(
                format!("e_{n}: step 1/{n}, distance 1"),
                (step - expected).abs() <= 1e-15 && dist == 1.0,
                format!("step {step}, distance {dist}, ratio {}", step / dist),
            ));
        }
        checks.push(Check::new(
            "origin is fixed",
            subgradient_project(f, &origin)? == origin,
            "f(0) = 0",
        ));
        Ok(checks)
    }
}

fn check_exact_iterates(traces: &[(String, IterationTrace)], upto: usize, tol: f64) -> Vec<Check> {
    let mut checks = Vec::new();
    let Some((_, trace)) = traces.first() else {
        return vec![Check::new("trace present", false, "no runs")];
    };
    let xs: Vec<f64> = trace.steps.iter().map(|s| s.x[0]).collect();
    let worst = (1..=upto)
        .map(|n| {
            xs.get(n)
                .map_or(f64::INFINITY, |x| (x - 1.0 / (2 * n + 1) as f64).abs())
        })
        .fold(0.0, f64::max);
    checks.push(Check::new(
        format!("x_n = 1/(2n+1) for n = 1..{upto}"),
        worst <= tol,
        format!("max error {worst:e}"),
    ));
    let ratios: Vec<f64> = xs.windows(2).map(|w| w[1] / w[0]).collect();
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let last = ratios.last().copied().unwrap_or(0.0);
    checks.push(Check::new(
        "ratios x_{n+1}/x_n increase toward 1",
        increasing && last > 0.98,
        format!("last ratio {last}"),
    ));
    checks
}

fn check_all_converge(traces: &[(String, IterationTrace)], tol: f64) -> Vec<Check> {
    traces
        .iter()
        .map(|(label, t)| {
            let res = t.final_max_residual().unwrap_or(f64::INFINITY);
            Check::new(
                format!("{label} converges"),
                t.termination == TerminationReason::ResidualMet && res < tol,
                format!(
                    "{} after {} iterations, residual {res:e}",
                    t.termination, t.iterations
                ),
            )
        })
        .collect()
}

/// Identity on `(-inf, 0]`, 0 on `(0, 1)`, 1 on `[1, inf)`. Its image always
/// separates `x` from `(-inf, 0]`, but `x = 1` is also fixed and is not
/// separated from points in `(0, 1)`.
pub fn separator_map() -> Cutter {
    Cutter::Custom(CustomCutter::new(
        "separator",
        1,
        |x: &Point| {
            let t = x[0];
            Point::from_raw(vec![if t <= 0.0 {
                t
            } else if t < 1.0 {
                0.0
            } else {
                1.0
            }])
        },
        |x: &Point, tol| x[0] <= tol || (x[0] - 1.0).abs() <= tol,
    ))
}

pub fn fixture_separator_not_cutter() -> Fixture {
    let c = separator_map();
    Fixture {
        name: "separator",
        summary:
            "separator that is not a cutter: x = 1 is fixed, yet T(0.5) = 0 does not separate it",
        a: c.clone(),
        b: c,
        mode: Mode::Strict,
        runs: vec![RunSpec::new(
            "alternating",
            (1.0, 1.0, 1.0),
            Point::from_raw(vec![0.5]),
            StopRule::default(),
        )],
        expectation: Expectation::NotACutter {
            x: Point::from_raw(vec![0.5]),
            z: Point::from_raw(vec![1.0]),
        },
    }
}

pub fn fixture_nonexpansivity_loss() -> Fixture {
    let c = Cutter::subgradient(make_kinked_abs());
    Fixture {
        name: "nonexpansivity-loss",
        summary: "subgradient cutter of a kinked function: expands (0.9, 1.1) but stays SQNE",
        a: c.clone(),
        b: c,
        mode: Mode::Strict,
        runs: vec![RunSpec::new(
            "alternating",
            (1.0, 1.0, 1.0),
            Point::from_raw(vec![2.0]),
            StopRule::default(),
        )],
        expectation: Expectation::LosesNonexpansivity {
            x: Point::from_raw(vec![0.9]),
            y: Point::from_raw(vec![1.1]),
        },
    }
}

/// `i / 10` for `i` in `-50..=50`, so the grid is exactly symmetric.
fn line_grid() -> Vec<f64> {
    (-50..=50).map(|i| i as f64 / 10.0).collect()
}

pub fn fixture_fixedpoints_abs() -> Fixture {
    let c = Cutter::subgradient(make_abs());
    Fixture {
        name: "fixed-points-abs",
        summary: "pure reflections through the subgradient cutter of |x| fix every point",
        a: c.clone(),
        b: c,
        mode: Mode::Permissive,
        runs: vec![
            RunSpec::new(
                "douglas-rachford",
                (0.0, 0.0, 0.5),
                Point::from_raw(vec![1.0]),
                StopRule::default(),
            ),
            RunSpec::new(
                "peaceman-rachford",
                (0.0, 0.0, 1.0),
                Point::from_raw(vec![-2.5]),
                StopRule::default(),
            ),
        ],
        expectation: Expectation::SpuriousFixedPoints {
            grid: line_grid()
                .into_iter()
                .map(|x| Point::from_raw(vec![x]))
                .collect(),
            lambdas: vec![0.5, 1.0],
        },
    }
}

pub fn fixture_fixedpoints_maxabs() -> Fixture {
    let c = Cutter::subgradient(make_max_abs());
    let g = line_grid();
    let grid = g
        .iter()
        .flat_map(|&x| g.iter().map(move |&y| (x, y)))
        .filter(|(x, y)| x.abs() != y.abs())
        .map(|(x, y)| Point::from_raw(vec![x, y]))
        .collect();
    Fixture {
        name: "fixed-points-max-abs",
        summary: "pure reflections for max{|x|,|y|}: points with |x| != |y| are fixed, cutter images infeasible",
        a: c.clone(),
        b: c,
        mode: Mode::Permissive,
        runs: vec![RunSpec::new(
            "douglas-rachford",
            (0.0, 0.0, 0.5),
            Point::from_raw(vec![2.0, 1.0]),
            StopRule::default(),
        )],
        expectation: Expectation::SpuriousFixedPoints {
            grid,
            lambdas: vec![0.5],
        },
    }
}

pub const SUBLINEAR_STEPS: usize = 50;

pub fn fixture_sublinear() -> Fixture {
    let c = make_sublinear_cutter();
    Fixture {
        name: "sublinear",
        summary: "cutter on {0} whose alternating iterates are exactly 1/(2n+1)",
        a: c.clone(),
        b: c,
        mode: Mode::Strict,
        runs: vec![RunSpec::new(
            "alternating",
            (1.0, 1.0, 1.0),
            Point::from_raw(vec![1.0]),
            StopRule::with_max_iter(SUBLINEAR_STEPS),
        )],
        expectation: Expectation::ExactIterates {
            upto: SUBLINEAR_STEPS,
            tol: 1e-12,
        },
    }
}

pub fn fixture_kink_family(k_max: usize) -> Result<Fixture> {
    let f = make_kink_family(k_max)?;
    let c = Cutter::subgradient(f);
    Ok(Fixture {
        name: "kink-family",
        summary: "cutter steps of length 1/n from e_n, whose distance to the solution set {0} is 1",
        a: c.clone(),
        b: c,
        mode: Mode::Strict,
        runs: vec![RunSpec::new(
            "alternating",
            (1.0, 1.0, 1.0),
            Point::basis(k_max, k_max - 1),
            StopRule::with_max_iter(1000),
        )],
        expectation: Expectation::StepVersusDistance { k_max },
    })
}

pub const FIGURE_START: [f64; 2] = [-2.0, 2.5];

/// Two unit disks centred at the origin and at `(1.5, 0)`, each handled by
/// the subgradient cutter of its distance function.
pub fn overlapping_disks() -> (Cutter, Cutter) {
    let d1 = PrimitiveSet::ball(Point::from_raw(vec![0.0, 0.0]), 1.0).expect("valid disk");
    let d2 = PrimitiveSet::ball(Point::from_raw(vec![1.5, 0.0]), 1.0).expect("valid disk");
    (
        Cutter::subgradient(make_distance(d1)),
        Cutter::subgradient(make_distance(d2)),
    )
}

pub fn fixture_figure_comparison() -> Fixture {
    let (a, b) = overlapping_disks();
    let x0 = Point::from_raw(FIGURE_START.to_vec());
    Fixture {
        name: "figure-comparison",
        summary: "damped reflections (0.1, 0.1, 0.5) against alternating projections on two overlapping disks",
        a,
        b,
        mode: Mode::Strict,
        runs: vec![
            RunSpec::new("damped", (0.1, 0.1, 0.5), x0.clone(), StopRule::default()),
            RunSpec::new("alternating", (1.0, 1.0, 1.0), x0, StopRule::default()),
        ],
        expectation: Expectation::AllConverge { tol: 1e-8 },
    }
}

pub const KINK_FAMILY_DEFAULT: usize = 10;

pub const FIXTURE_NAMES: &[&str] = &[
    "separator",
    "nonexpansivity-loss",
    "fixed-points-abs",
    "fixed-points-max-abs",
    "sublinear",
    "kink-family",
    "figure-comparison",
];

pub fn fixture_by_name(name: &str) -> Result<Fixture> {
    match name {
        "separator" => Ok(fixture_separator_not_cutter()),
        "nonexpansivity-loss" => Ok(fixture_nonexpansivity_loss()),
        "fixed-points-abs" => Ok(fixture_fixedpoints_abs()),
        "fixed-points-max-abs" => Ok(fixture_fixedpoints_maxabs()),
        "sublinear" => Ok(fixture_sublinear()),
        "kink-family" => fixture_kink_family(KINK_FAMILY_DEFAULT),
        "figure-comparison" => Ok(fixture_figure_comparison()),
        other => Err(Error::InvalidArgument(format!(
            "unknown fixture `{other}`; valid names: {}",
            FIXTURE_NAMES.join(", ")
        ))),
    }
}

/// Value of one member of the kink family, re-exported for fixture tests.
pub fn kink_value(k: usize, t: f64) -> f64 {
    kink(k, t)
}
