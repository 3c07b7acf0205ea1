//! Seeded random instances with a planted feasible point, and samplers for
//! points inside sets and fixed sets.
//!
//! All randomness comes from [`rng_from_seed`]: ChaCha8 (`rand_chacha`)
//! keyed by `seed_from_u64`, so a 64-bit seed fully determines every draw.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::operators::{Cutter, PrimitiveSet, Shape};
use crate::point::Point;

pub type InstanceRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in `[-half_width, half_width]^dim`.
pub fn uniform_point(rng: &mut impl Rng, dim: usize, half_width: f64) -> Point {
    Point::from_raw(
        (0..dim)
            .map(|_| rng.random_range(-half_width..=half_width))
            .collect(),
    )
}

/// Uniform direction on the unit sphere (normalized Gaussian vector).
pub fn unit_direction(rng: &mut impl Rng, dim: usize) -> Point {
    loop {
        let p = Point::from_raw(
            (0..dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect(),
        );
        let n = p.norm();
        if n > 1e-12 {
            return p.scale(1.0 / n);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    Halfspace,
    Ball,
    Box,
}

/// A random set containing `anchor`.
pub fn random_set_containing(rng: &mut impl Rng, kind: SetKind, anchor: &Point) -> PrimitiveSet {
    let dim = anchor.dim();
    match kind {
        SetKind::Halfspace => {
            let normal = unit_direction(rng, dim);
            let margin = rng.random_range(0.0..1.0);
            PrimitiveSet::halfspace(normal.clone(), normal.dot(anchor) + margin)
                .expect("unit normal")
        }
        SetKind::Ball => {
            let radius = rng.random_range(0.5..3.0);
            let offset = rng.random_range(0.0..0.9) * radius;
            let center = anchor.add_scaled(offset, &unit_direction(rng, dim));
            PrimitiveSet::ball(center, radius).expect("positive radius")
        }
        SetKind::Box => {
            let lower = Point::from_raw(
                anchor
                    .coords()
                    .iter()
                    .map(|a| a - rng.random_range(0.0..2.0))
                    .collect(),
            );
            let upper = Point::from_raw(
                anchor
                    .coords()
                    .iter()
                    .map(|a| a + rng.random_range(0.0..2.0))
                    .collect(),
            );
            PrimitiveSet::boxed(lower, upper).expect("lower <= upper")
        }
    }
}

/// Two sets sharing a planted point.
#[derive(Debug, Clone)]
pub struct FeasibleInstance {
    pub a: PrimitiveSet,
    pub b: PrimitiveSet,
    pub planted: Point,
    /// A linear-regularity constant, recorded only when one is provable
    /// for the generated geometry (identical or nested sets give 1).
    pub kappa: Option<f64>,
}

/// A random pair of halfspaces / balls / boxes in `R^dim` with a common
/// point drawn from `[-2, 2]^dim`.
pub fn random_feasible_pair(rng: &mut impl Rng, dim: usize) -> FeasibleInstance {
    let kinds = [SetKind::Halfspace, SetKind::Ball, SetKind::Box];
    let planted = uniform_point(rng, dim, 2.0);
    let ka = *kinds.choose(rng).expect("non-empty");
    let kb = *kinds.choose(rng).expect("non-empty");
    let a = random_set_containing(rng, ka, &planted);
    let b = random_set_containing(rng, kb, &planted);
    let kappa = (a == b).then_some(1.0);
    FeasibleInstance {
        a,
        b,
        planted,
        kappa,
    }
}

/// A random point of `set`, near `around`.
pub fn sample_member(rng: &mut impl Rng, set: &PrimitiveSet, around: &Point, spread: f64) -> Point {
    let dim = set.dim();
    match set.shape() {
        Shape::Halfspace { normal, .. } => {
            let z = around.add(&uniform_point(rng, dim, spread));
            let p = set.project_unchecked(&z);
            let depth = rng.random_range(0.0..spread.max(1e-3));
            p.add_scaled(-depth / normal.norm(), normal)
        }
        Shape::Ball { center, radius } => {
            let u: f64 = rng.random_range(0.0..1.0);
            center.add_scaled(radius * u.powf(1.0 / dim as f64), &unit_direction(rng, dim))
        }
        Shape::Box { lower, upper } => Point::from_raw(
            lower
                .coords()
                .iter()
                .zip(upper.coords())
                .map(|(l, u)| {
                    if l == u {
                        *l
                    } else {
                        rng.random_range(*l..=*u)
                    }
                })
                .collect(),
        ),
        Shape::Hyperplane { .. } | Shape::AffineDiagonal { .. } | Shape::Singleton { .. } => {
            set.project_unchecked(&around.add(&uniform_point(rng, dim, spread)))
        }
    }
}

/// Samples up to `count` points of the cutter's fixed set: random points in
/// `[-half_width, half_width]^dim` and their images, kept when the fixed-set
/// predicate accepts them.
pub fn sample_fixed_points(
    rng: &mut impl Rng,
    cutter: &Cutter,
    count: usize,
    half_width: f64,
) -> Result<Vec<Point>> {
    let dim = cutter.dim();
    let mut out = Vec::with_capacity(count);
    let attempts = count.saturating_mul(50).max(1000);
    for _ in 0..attempts {
        if out.len() >= count {
            break;
        }
        let x = uniform_point(rng, dim, half_width);
        if cutter.in_fixed_set(&x, 0.0) {
            out.push(x);
            continue;
        }
        if let Ok(p) = cutter.apply(&x) {
            if cutter.in_fixed_set(&p, 0.0) {
                out.push(p);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "could not sample the fixed set of {}",
            cutter.label()
        )));
    }
    Ok(out)
}
