//! Fixed instances shared by the benchmarks.

use cutters::instances::{
    random_feasible_pair, random_set_containing, rng_from_seed, uniform_point, SetKind,
};
use cutters::operators::Cutter;
use cutters::productspace::ProductProblem;
use cutters::{lift, LiftedB, Point};

pub const SEED: u64 = 7;

/// A random halfspace/ball/box pair in `R^dim` with a start point.
pub fn feasible_pair(dim: usize) -> (Cutter, Cutter, Point) {
    let mut rng = rng_from_seed(SEED ^ dim as u64);
    let inst = random_feasible_pair(&mut rng, dim);
    let x0 = uniform_point(&mut rng, dim, 10.0);
    (Cutter::exact(inst.a), Cutter::exact(inst.b), x0)
}

/// `blocks` random balls in `R^block_dim` sharing a point, lifted to the product space.
pub fn lifted_balls(blocks: usize, block_dim: usize, flavor: LiftedB) -> (ProductProblem, Point) {
    let mut rng = rng_from_seed(SEED);
    let planted = uniform_point(&mut rng, block_dim, 1.0);
    let cutters = (0..blocks)
        .map(|_| Cutter::exact(random_set_containing(&mut rng, SetKind::Ball, &planted)))
        .collect();
    let prob = lift(cutters, block_dim, flavor).expect("valid lift");
    let x0 = prob
        .diagonal_point(&uniform_point(&mut rng, block_dim, 8.0))
        .expect("block dimension matches");
    (prob, x0)
}

/// Sample points for audits.
pub fn sample_points(count: usize, dim: usize) -> Vec<Point> {
    let mut rng = rng_from_seed(SEED + 1);
    (0..count)
        .map(|_| uniform_point(&mut rng, dim, 10.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_have_expected_shapes() {
        let (a, b, x0) = feasible_pair(12);
        assert_eq!((a.dim(), b.dim(), x0.dim()), (12, 12, 12));
        let (p, x0) = lifted_balls(5, 3, LiftedB::Exact);
        assert_eq!((p.dim(), x0.dim()), (15, 15));
        assert_eq!(sample_points(4, 2).len(), 4);
    }
}
