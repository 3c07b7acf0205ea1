//! Sampled checks of the inequalities behind the convergence theory.
//!
//! Every inequality is evaluated as a slack `rhs - lhs`, divided by
//! `max(1, |x|^2, |y|^2)`. A check passes when the worst normalized slack is
//! at least `-AUDIT_TOL`. Pairs are evaluated in parallel; the worst pair is
//! chosen by (slack, x index, y index) so reports do not depend on scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{relax_from_image, step_raw, theta, Cutter, OperatorParams, StepRecord};
use crate::point::Point;
use crate::solver::IterationTrace;

pub const AUDIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub label: &'static str,
    pub checks: usize,
    /// Smallest normalized slack seen; negative means the inequality failed.
    pub worst_slack: f64,
    pub worst_pair: Option<(Point, Point)>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub inequalities: Vec<InequalityReport>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.inequalities.iter().all(|r| r.passed)
    }

    pub fn get(&self, label: &str) -> Option<&InequalityReport> {
        self.inequalities.iter().find(|r| r.label == label)
    }
}

#[derive(Debug, Clone, Copy)]
struct Worst {
    slack: f64,
    i: usize,
    j: usize,
}

impl Worst {
    const NONE: Worst = Worst {
        slack: f64::INFINITY,
        i: usize::MAX,
        j: usize::MAX,
    };

    fn consider(&mut self, slack: f64, i: usize, j: usize) {
        let slack = if slack.is_nan() {
            f64::NEG_INFINITY
        } else {
            slack
        };
        if (slack, i, j) < (self.slack, self.i, self.j) {
            *self = Worst { slack, i, j };
        }
    }

    fn merge(mut self, other: Worst) -> Worst {
        self.consider(other.slack, other.i, other.j);
        self
    }
}

fn scale(x: &Point, y: &Point) -> f64 {
    1f64.max(x.norm_sq()).max(y.norm_sq())
}

/// Evaluates `K` normalized slacks for every pair in `xs x ys`.
fn pairwise<const K: usize, C, P, F>(
    labels: [&'static str; K],
    xs: &[Point],
    ys: &[Point],
    prep: P,
    eval: F,
) -> Result<AuditReport>
where
    C: Send,
    P: Fn(&Point) -> Result<C> + Sync,
    F: Fn(&Point, &C, usize, &Point) -> [f64; K] + Sync,
{
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::InvalidArgument(
            "audit needs at least one sample on each side".into(),
        ));
    }
    let per_x: Vec<Result<[Worst; K]>> = xs
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let ctx = prep(x)?;
            let mut w = [Worst::NONE; K];
            for (j, y) in ys.iter().enumerate() {
                let s = eval(x, &ctx, j, y);
                for k in 0..K {
                    w[k].consider(s[k], i, j);
                }
            }
            Ok(w)
        })
        .collect();
    let mut worst = [Worst::NONE; K];
    for w in per_x {
        let w = w?;
        for k in 0..K {
            worst[k] = worst[k].merge(w[k]);
        }
    }
    let checks = xs.len() * ys.len();
    Ok(AuditReport {
        inequalities: labels
            .iter()
            .zip(worst)
            .map(|(&label, w)| InequalityReport {
                label,
                checks,
                worst_slack: w.slack,
                worst_pair: Some((xs[w.i].clone(), ys[w.j].clone())),
                passed: w.slack >= -AUDIT_TOL,
            })
            .collect(),
    })
}

pub const RELAXED_BOUND: &str = "relaxed-cutter-bound";
pub const SQNE: &str = "strong-quasinonexpansivity";
pub const SEPARATION: &str = "cutter-separation";
pub const FIRM: &str = "firm-nonexpansivity";
pub const QUASI: &str = "quasinonexpansivity";
pub const THETA_BOUND: &str = "theta-bound";

/// Checks, for `y` in the fixed set,
/// `|R x - y|^2 <= gamma(gamma - 2)|x - P x|^2 + |x - y|^2` and
/// `|R x - y|^2 <= |x - y|^2 - gamma/(2 - gamma) |R x - x|^2`.
pub fn sqne_audit(cutter: &Cutter, gamma: f64, xs: &[Point], ys: &[Point]) -> Result<AuditReport> {
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    let rho = gamma / (2.0 - gamma);
    pairwise(
        [RELAXED_BOUND, SQNE],
        xs,
        ys,
        |x| {
            let p = cutter.apply(x)?;
            let r = relax_from_image(x, &p, gamma);
            let d2 = x.dist_sq(&p);
            let moved2 = x.dist_sq(&r);
            Ok((r, d2, moved2))
        },
        |x, (r, d2, moved2), _, y| {
            let lhs = r.dist_sq(y);
            let xy = x.dist_sq(y);
            let sc = scale(x, y);
            [
                (gamma * (gamma - 2.0) * d2 + xy - lhs) / sc,
                (xy - rho * moved2 - lhs) / sc,
            ]
        },
    )
}

/// Checks the separating inequality `<x - P x, z - P x> <= 0` for `z` in the fixed set.
pub fn cutter_audit(cutter: &Cutter, xs: &[Point], zs: &[Point]) -> Result<AuditReport> {
    pairwise(
        [SEPARATION],
        xs,
        zs,
        |x| {
            let p = cutter.apply(x)?;
            let r = x.sub(&p);
            Ok((p, r))
        },
        |x, (p, r), _, z| [-r.dot(&z.sub(p)) / scale(x, z)],
    )
}

/// Checks `|P x - P y|^2 + |(x - P x) - (y - P y)|^2 <= |x - y|^2`.
pub fn firm_nonexpansive_audit(cutter: &Cutter, xs: &[Point], ys: &[Point]) -> Result<AuditReport> {
    let images: Vec<Point> = ys.iter().map(|y| cutter.apply(y)).collect::<Result<_>>()?;
    pairwise(
        [FIRM],
        xs,
        ys,
        |x| cutter.apply(x),
        |x, px, j, y| {
            let py = &images[j];
            let lhs = px.dist_sq(py) + x.sub(px).dist_sq(&y.sub(py));
            [(x.dist_sq(y) - lhs) / scale(x, y)]
        },
    )
}

/// Checks, for `y` in both fixed sets, `|T x - y| <= |x - y|` and
/// `|T x - y|^2 <= lambda theta(x) + |x - y|^2`.
pub fn operator_audit(
    a: &Cutter,
    b: &Cutter,
    params: &OperatorParams,
    xs: &[Point],
    ys: &[Point],
) -> Result<AuditReport> {
    let lambda = params.lambda();
    pairwise(
        [QUASI, THETA_BOUND],
        xs,
        ys,
        |x| -> Result<(StepRecord, f64)> {
            x.check_dim(a.dim())?;
            let rec = step_raw(a, b, params.gamma(), params.mu(), lambda, x)?;
            let th = theta(&rec);
            Ok((rec, th))
        },
        |x, (rec, th), _, y| {
            let lhs = rec.next.dist_sq(y);
            let xy = x.dist_sq(y);
            let sc = scale(x, y);
            [(xy - lhs) / sc, (lambda * th + xy - lhs) / sc]
        },
    )
}

/// `|P x - P y| - |x - y|`; positive means the pair is expanded.
pub fn expansion(cutter: &Cutter, x: &Point, y: &Point) -> Result<f64> {
    Ok(cutter.apply(x)?.dist(&cutter.apply(y)?) - x.dist(y))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FejerReport {
    pub reference_points: Vec<Point>,
    /// `max_{n, ref} |x_{n+1} - ref| - |x_n - ref|`; 0 for traces with fewer than two iterates.
    pub max_violation: f64,
    /// `(n, reference index)` of the largest violation.
    pub worst: Option<(usize, usize)>,
    pub monotone: bool,
}

/// Fejér monotonicity of the recorded iterates with respect to `refs`, which
/// the caller certifies to lie in both fixed sets.
pub fn fejer_check(trace: &IterationTrace, refs: &[Point]) -> Result<FejerReport> {
    let iterates: Vec<&Point> = trace.iterates().collect();
    let labels: Vec<usize> = trace.steps.iter().map(|s| s.n).collect();
    fejer_core(&iterates, &labels, refs)
}

/// [`fejer_check`] on a bare sequence of iterates.
pub fn fejer_check_points(iterates: &[Point], refs: &[Point]) -> Result<FejerReport> {
    let its: Vec<&Point> = iterates.iter().collect();
    let labels: Vec<usize> = (0..iterates.len()).collect();
    fejer_core(&its, &labels, refs)
}

fn fejer_core(iterates: &[&Point], labels: &[usize], refs: &[Point]) -> Result<FejerReport> {
    if refs.is_empty() {
        return Err(Error::EmptyReferenceSet);
    }
    let mut max_violation = f64::NEG_INFINITY;
    let mut worst = None;
    let mut monotone = true;
    for (k, pair) in iterates.windows(2).enumerate() {
        for (r, z) in refs.iter().enumerate() {
            let v = pair[1].dist(z) - pair[0].dist(z);
            let tol = AUDIT_TOL * 1f64.max(pair[0].norm()).max(z.norm());
            if v > tol || v.is_nan() {
                monotone = false;
            }
            if v > max_violation || v.is_nan() {
                max_violation = if v.is_nan() { f64::INFINITY } else { v };
                worst = Some((labels[k], r));
            }
        }
    }
    if worst.is_none() {
        max_violation = 0.0;
    }
    Ok(FejerReport {
        reference_points: refs.to_vec(),
        max_violation,
        worst,
        monotone,
    })
}
