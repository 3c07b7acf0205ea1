use serde::Serialize;

use crate::error::Result;
use crate::operators::cutter::{relax_from_image, Cutter};
use crate::operators::params::OperatorParams;
use crate::point::Point;

/// One application of the averaged operator
/// `T = lambda R_B^mu R_A^gamma + (1 - lambda) Id`, with every intermediate point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub gamma: f64,
    pub mu: f64,
    pub lambda: f64,
    pub x: Point,
    /// `P_A x`
    pub proj_a: Point,
    /// `R_A^gamma x`
    pub relaxed_a: Point,
    /// `P_B R_A^gamma x`
    pub proj_b: Point,
    /// `R_B^mu R_A^gamma x`
    pub relaxed_b: Point,
    /// `T x`
    pub next: Point,
}

impl StepRecord {
    /// `|x - P_A x|`
    pub fn residual_a(&self) -> f64 {
        self.x.dist(&self.proj_a)
    }

    /// `|x - P_B R_A^gamma x|`
    pub fn residual_b(&self) -> f64 {
        self.x.dist(&self.proj_b)
    }

    pub fn step_norm(&self) -> f64 {
        self.x.dist(&self.next)
    }
}

/// Applies `T` to `x`. Parameters are assumed validated by the caller.
pub(crate) fn step_raw(
    a: &Cutter,
    b: &Cutter,
    gamma: f64,
    mu: f64,
    lambda: f64,
    x: &Point,
) -> Result<StepRecord> {
    let proj_a = a.apply(x)?;
    let relaxed_a = relax_from_image(x, &proj_a, gamma);
    let proj_b = b.apply(&relaxed_a)?;
    let relaxed_b = relax_from_image(&relaxed_a, &proj_b, mu);
    let next = relaxed_b.lerp_from(lambda, x);
    Ok(StepRecord {
        gamma,
        mu,
        lambda,
        x: x.clone(),
        proj_a,
        relaxed_a,
        proj_b,
        relaxed_b,
        next,
    })
}

pub fn averaged_step(
    a: &Cutter,
    b: &Cutter,
    params: &OperatorParams,
    x: &Point,
) -> Result<StepRecord> {
    x.check_dim(a.dim())?;
    x.check_dim(b.dim())?;
    step_raw(a, b, params.gamma(), params.mu(), params.lambda(), x)
}

/// `mu(mu-2)|P_B R_A x - R_A x|^2 + gamma(gamma-2)|x - P_A x|^2`.
/// Nonpositive for `gamma, mu` in `[0, 2)`; `|Tx - y|^2 <= lambda theta + |x - y|^2`
/// for every `y` in both fixed sets.
pub fn theta(rec: &StepRecord) -> f64 {
    rec.mu * (rec.mu - 2.0) * rec.proj_b.dist_sq(&rec.relaxed_a)
        + rec.gamma * (rec.gamma - 2.0) * rec.x.dist_sq(&rec.proj_a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::make_abs;
    use crate::operators::PrimitiveSet;
    use crate::pt;

    fn halfspace_pair() -> (Cutter, Cutter) {
        // A = {x <= 0}, B = {x >= -1}
        (
            Cutter::exact(PrimitiveSet::halfspace(pt![1], 0.0).unwrap()),
            Cutter::exact(PrimitiveSet::halfspace(pt![-1], 1.0).unwrap()),
        )
    }

    #[test]
    fn reflect_reflect_on_abs_is_stationary() {
        let f = Cutter::subgradient(make_abs());
        let params = OperatorParams::permissive(0.0, 0.0, 0.5).unwrap();
        let rec = averaged_step(&f, &f, &params, &pt![1]).unwrap();
        assert_eq!(rec.proj_a, pt![0]);
        assert_eq!(rec.relaxed_a, pt![-1]);
        assert_eq!(rec.proj_b, pt![0]);
        assert_eq!(rec.relaxed_b, pt![1]);
        assert_eq!(rec.next, pt![1]);
    }

    #[test]
    fn alternating_projection_on_halfspaces() {
        let (a, b) = halfspace_pair();
        let params = OperatorParams::new(1.0, 1.0, 1.0).unwrap();
        let rec = averaged_step(&a, &b, &params, &pt![5]).unwrap();
        assert_eq!(rec.next, pt![0]);
        assert_eq!(rec.residual_a(), 5.0);
        // gamma = mu = 1 collapses theta to minus the two squared moves
        assert_eq!(theta(&rec), -(rec.proj_b.dist_sq(&rec.relaxed_a) + 25.0));
        assert!(theta(&rec) < 0.0);
    }

    #[test]
    fn feasible_points_are_fixed() {
        let (a, b) = halfspace_pair();
        for &(g, m, l) in &[(0.5, 1.5, 0.5), (1.0, 1.0, 1.0), (1.9, 0.1, 0.3)] {
            let params = OperatorParams::new(g, m, l).unwrap();
            let rec = averaged_step(&a, &b, &params, &pt![-0.25]).unwrap();
            assert_eq!(rec.next, pt![-0.25]);
            assert_eq!(theta(&rec), 0.0);
        }
    }

    #[test]
    fn theta_negative_off_the_intersection() {
        let (a, b) = halfspace_pair();
        let params = OperatorParams::new(0.5, 1.5, 0.5).unwrap();
        let rec = averaged_step(&a, &b, &params, &pt![5]).unwrap();
        assert!(theta(&rec) < 0.0);
    }
}
