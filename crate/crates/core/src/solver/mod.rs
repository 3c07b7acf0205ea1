//! Fixed-point iteration of the averaged operator, stopping rules and the
//! diagnostics built on top of the recorded traces.

pub mod diagnostics;
mod trace;

pub use diagnostics::{
    cutter_audit, expansion, fejer_check, fejer_check_points, firm_nonexpansive_audit,
    operator_audit, sqne_audit, AuditReport, FejerReport, InequalityReport, AUDIT_TOL,
};
pub use trace::{
    format_f64, read_csv, read_jsonl, write_csv, write_jsonl, IterationTrace, TerminationReason,
    TraceStep, DEFAULT_TRACE_CAP,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{check_lambda, check_relax, step_raw, theta, Cutter, Mode, OperatorParams};
use crate::point::Point;
use trace::TraceRecorder;

/// Consecutive steps with a (near) zero move that count as a stall.
pub const STAGNATION_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StopRule {
    pub max_iter: usize,
    /// Stop once `max(residual_a, residual_b)` is at most this.
    pub residual_tol: f64,
    /// Steps no longer than this count toward a stall; 0 counts only exact zero steps.
    pub stagnation_tol: f64,
    /// Number of stored steps before the trace is thinned.
    pub trace_cap: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            max_iter: 100_000,
            residual_tol: 1e-10,
            stagnation_tol: 0.0,
            trace_cap: DEFAULT_TRACE_CAP,
        }
    }
}

impl StopRule {
    pub fn with_max_iter(max_iter: usize) -> Self {
        StopRule {
            max_iter,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::InvalidArgument(
                "residual_tol must be positive".into(),
            ));
        }
        if !(self.stagnation_tol >= 0.0) {
            return Err(Error::InvalidArgument("stagnation_tol must be >= 0".into()));
        }
        Ok(())
    }
}

fn check_problem(a: &Cutter, b: &Cutter, x0: &Point, stop: &StopRule, mode: Mode) -> Result<()> {
    stop.validate()?;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    x0.check_dim(a.dim())?;
    if mode == Mode::Strict {
        for c in [a, b] {
            if !c.is_certified() {
                return Err(Error::NotCertifiedConvex(c.label()));
            }
        }
    }
    Ok(())
}

/// Iterates `x_{n+1} = T x_n` from `x0` until the first stop rule fires.
///
/// Each recorded step holds `x_n` with its residuals, so a trace that ends
/// at iteration `N` holds `x_0 ..= x_N` (subject to thinning). Cutter
/// failures end the run with [`TerminationReason::Error`] and keep the
/// partial trace; invalid inputs are rejected up front.
pub fn solve(
    a: &Cutter,
    b: &Cutter,
    params: &OperatorParams,
    x0: &Point,
    stop: &StopRule,
) -> Result<IterationTrace> {
    check_problem(a, b, x0, stop, params.mode())?;
    let (g, m) = (params.gamma(), params.mu());
    iterate(a, b, params.lambda(), x0, stop, |_| Ok((g, m)))
}

/// Like [`solve`] with `gamma_n, mu_n` drawn from sequences. Every value must
/// lie in `(0, 2)`, and the running minimum of `gamma_n(2 - gamma_n)` (and of
/// `mu_n(2 - mu_n)`) must stay at or above `floor`.
#[allow(clippy::too_many_arguments)]
pub fn varying_params_solve<G, M>(
    a: &Cutter,
    b: &Cutter,
    gammas: G,
    mus: M,
    lambda: f64,
    floor: f64,
    x0: &Point,
    stop: &StopRule,
) -> Result<IterationTrace>
where
    G: IntoIterator<Item = f64>,
    M: IntoIterator<Item = f64>,
{
    check_problem(a, b, x0, stop, Mode::Strict)?;
    check_lambda(lambda)?;
    if !(floor > 0.0) {
        return Err(Error::InvalidArgument(
            "parameter floor must be positive".into(),
        ));
    }
    let mut gammas = gammas.into_iter();
    let mut mus = mus.into_iter();
    let draw = |n: usize, it: &mut dyn Iterator<Item = f64>, name: &'static str| -> Result<f64> {
        let v = it
            .next()
            .ok_or_else(|| Error::InvalidArgument(format!("{name} sequence ended at step {n}")))?;
        check_relax(name, v, Mode::Strict)?;
        let margin = v * (2.0 - v);
        if margin < floor {
            return Err(Error::ParamFloorViolated {
                step: n,
                name,
                value: margin,
                floor,
            });
        }
        Ok(v)
    };
    iterate(a, b, lambda, x0, stop, |n| {
        Ok((draw(n, &mut gammas, "gamma")?, draw(n, &mut mus, "mu")?))
    })
}

fn iterate<F>(
    a: &Cutter,
    b: &Cutter,
    lambda: f64,
    x0: &Point,
    stop: &StopRule,
    mut params_at: F,
) -> Result<IterationTrace>
where
    F: FnMut(usize) -> Result<(f64, f64)>,
{
    let mut rec = TraceRecorder::new(stop.trace_cap);
    let mut x = x0.clone();
    let mut still = 0usize;
    let mut n = 0usize;
    loop {
        let (gamma, mu) = params_at(n)?;
        let record = match step_raw(a, b, gamma, mu, lambda, &x) {
            Ok(r) if r.next.is_finite() => r,
            Ok(_) => {
                return Ok(rec.finish(
                    TerminationReason::Error,
                    n,
                    x,
                    lambda,
                    Some("non-finite iterate".into()),
                ));
            }
            Err(e) => {
                return Ok(rec.finish(TerminationReason::Error, n, x, lambda, Some(e.to_string())));
            }
        };
        let step = TraceStep {
            n,
            x: x.clone(),
            residual_a: record.residual_a(),
            residual_b: record.residual_b(),
            theta: theta(&record),
            step_norm: record.step_norm(),
            gamma,
            mu,
        };
        let residual = step.max_residual();
        let moved = step.step_norm;
        rec.push(step);

        if residual <= stop.residual_tol {
            return Ok(rec.finish(TerminationReason::ResidualMet, n, x, lambda, None));
        }
        if moved == 0.0 || moved <= stop.stagnation_tol {
            still += 1;
        } else {
            still = 0;
        }
        if still >= STAGNATION_WINDOW {
            return Ok(rec.finish(TerminationReason::Stagnated, n, x, lambda, None));
        }
        if n >= stop.max_iter {
            return Ok(rec.finish(TerminationReason::MaxIter, n, x, lambda, None));
        }
        x = record.next;
        n += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{make_abs, make_sublinear_cutter};
    use crate::operators::PrimitiveSet;
    use crate::pt;

    fn halfspace_pair() -> (Cutter, Cutter) {
        (
            Cutter::exact(PrimitiveSet::halfspace(pt![1], 0.0).unwrap()),
            Cutter::exact(PrimitiveSet::halfspace(pt![-1], 1.0).unwrap()),
        )
    }

    #[test]
    fn sublinear_iterates_follow_closed_form() {
        let c = make_sublinear_cutter();
        let params = OperatorParams::new(1.0, 1.0, 1.0).unwrap();
        let trace = solve(&c, &c, &params, &pt![1], &StopRule::with_max_iter(10)).unwrap();
        assert_eq!(trace.termination, TerminationReason::MaxIter);
        assert_eq!(trace.steps.len(), 11);
        for s in &trace.steps {
            assert!(
                (s.x[0] - 1.0 / (2 * s.n + 1) as f64).abs() < 1e-12,
                "n = {}",
                s.n
            );
        }
    }

    #[test]
    fn feasible_start_terminates_immediately() {
        let (a, b) = halfspace_pair();
        let params = OperatorParams::new(0.5, 1.5, 0.5).unwrap();
        let trace = solve(&a, &b, &params, &pt![-0.5], &StopRule::default()).unwrap();
        assert_eq!(trace.termination, TerminationReason::ResidualMet);
        assert_eq!(trace.iterations, 0);
        assert_eq!(trace.final_point, pt![-0.5]);
    }

    #[test]
    fn one_alternating_step_lands_in_intersection() {
        let (a, b) = halfspace_pair();
        let params = OperatorParams::new(1.0, 1.0, 1.0).unwrap();
        let trace = solve(&a, &b, &params, &pt![5], &StopRule::default()).unwrap();
        assert_eq!(trace.termination, TerminationReason::ResidualMet);
        assert_eq!(trace.iterations, 1);
        assert_eq!(trace.final_point, pt![0]);
        assert!(trace.steps[0].theta < 0.0);
    }

    #[test]
    fn reflections_on_abs_stall() {
        let f = Cutter::subgradient(make_abs());
        let params = OperatorParams::permissive(0.0, 0.0, 0.5).unwrap();
        let trace = solve(&f, &f, &params, &pt![1], &StopRule::default()).unwrap();
        assert_eq!(trace.termination, TerminationReason::Stagnated);
        assert!(trace
            .steps
            .iter()
            .all(|s| s.step_norm == 0.0 && s.residual_a > 0.0));
    }

    #[test]
    fn cutter_errors_end_with_partial_trace() {
        let one = crate::functions::ConvexFunction::new("one", 1, |_| 1.0, |_| vec![0.0]).unwrap();
        let a = Cutter::subgradient(one);
        let (_, b) = halfspace_pair();
        let params = OperatorParams::new(1.0, 1.0, 1.0).unwrap();
        let trace = solve(&a, &b, &params, &pt![3], &StopRule::default()).unwrap();
        assert_eq!(trace.termination, TerminationReason::Error);
        assert!(trace.error.unwrap().contains("zero subgradient"));
    }

    #[test]
    fn strict_mode_refuses_nonconvex_cutters() {
        let f = Cutter::subgradient(crate::functions::make_ellipse_residual(0.0, 0.0));
        let params = OperatorParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            solve(&f, &f, &params, &pt![3, 0], &StopRule::default()),
            Err(Error::NotCertifiedConvex(_))
        ));
        let permissive = OperatorParams::permissive(1.0, 1.0, 1.0).unwrap();
        assert!(solve(&f, &f, &permissive, &pt![3, 0], &StopRule::default()).is_ok());
    }

    #[test]
    fn stop_rule_validation() {
        let (a, b) = halfspace_pair();
        let params = OperatorParams::new(1.0, 1.0, 1.0).unwrap();
        let bad = StopRule {
            residual_tol: 0.0,
            ..StopRule::default()
        };
        assert!(solve(&a, &b, &params, &pt![5], &bad).is_err());
        assert!(matches!(
            solve(&a, &b, &params, &pt![5, 1], &StopRule::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn constant_sequences_match_fixed_params() {
        let (a, b) = halfspace_pair();
        let stop = StopRule::default();
        let x0 = pt![7];
        let fixed = solve(
            &a,
            &b,
            &OperatorParams::new(1.3, 0.7, 0.8).unwrap(),
            &x0,
            &stop,
        )
        .unwrap();
        let varying = varying_params_solve(
            &a,
            &b,
            std::iter::repeat(1.3),
            std::iter::repeat(0.7),
            0.8,
            1e-3,
            &x0,
            &stop,
        )
        .unwrap();
        assert_eq!(fixed, varying);
    }

    #[test]
    fn alternating_gamma_sequence_converges() {
        let (a, b) = halfspace_pair();
        let gammas = (0..).map(|n| 1.0 + if n % 2 == 0 { 0.25 } else { -0.25 });
        let trace = varying_params_solve(
            &a,
            &b,
            gammas,
            std::iter::repeat(1.0),
            1.0,
            1e-3,
            &pt![10],
            &StopRule::default(),
        )
        .unwrap();
        assert_eq!(trace.termination, TerminationReason::ResidualMet);
        assert!(trace
            .steps
            .windows(2)
            .all(|w| w[0].step_norm >= 0.0 && w[1].gamma != w[0].gamma));
    }

    #[test]
    fn floor_guard_rejects_degenerating_sequence() {
        // the sublinear cutter never reaches its fixed point, so the run lasts
        // until the guard fires
        let c = make_sublinear_cutter();
        let gammas = (1..).map(|n| 2.0 - 1.0 / n as f64);
        let err = varying_params_solve(
            &c,
            &c,
            gammas,
            std::iter::repeat(1.0),
            1.0,
            0.05,
            &pt![1],
            &StopRule::default(),
        )
        .unwrap_err();
        match err {
            Error::ParamFloorViolated {
                name, value, floor, ..
            } => {
                assert_eq!(name, "gamma");
                assert!(value < floor);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
