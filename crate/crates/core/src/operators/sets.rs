//! Closed convex sets with closed-form Euclidean projections.

use crate::error::{Error, Result};
use crate::point::Point;

/// The concrete geometry of a [`PrimitiveSet`].
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `{x : <normal, x> <= offset}`
    Halfspace {
        normal: Point,
        offset: f64,
    },
    /// `{x : <normal, x> = offset}`
    Hyperplane {
        normal: Point,
        offset: f64,
    },
    Ball {
        center: Point,
        radius: f64,
    },
    Box {
        lower: Point,
        upper: Point,
    },
    /// Points of `R^(block_dim * blocks)` whose blocks are all equal.
    /// Blocks are stored contiguously: block `i` is `coords[i*block_dim..(i+1)*block_dim]`.
    AffineDiagonal {
        block_dim: usize,
        blocks: usize,
    },
    Singleton {
        point: Point,
    },
}

/// A validated closed convex set.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveSet {
    shape: Shape,
    dim: usize,
}

impl PrimitiveSet {
    pub fn halfspace(normal: Point, offset: f64) -> Result<Self> {
        Self::affine(normal, offset, true)
    }

    pub fn hyperplane(normal: Point, offset: f64) -> Result<Self> {
        Self::affine(normal, offset, false)
    }

    fn affine(normal: Point, offset: f64, half: bool) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::NonFinite("set offset"));
        }
        let norm_sq = normal.norm_sq();
        if !(norm_sq > 0.0) || !norm_sq.is_finite() {
            return Err(Error::DegenerateSet(
                "normal vector must have positive finite norm".into(),
            ));
        }
        let dim = normal.dim();
        let shape = if half {
            Shape::Halfspace { normal, offset }
        } else {
            Shape::Hyperplane { normal, offset }
        };
        Ok(PrimitiveSet { shape, dim })
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(Error::DegenerateSet(format!(
                "ball radius {radius} must be finite and >= 0"
            )));
        }
        let dim = center.dim();
        Ok(PrimitiveSet {
            shape: Shape::Ball { center, radius },
            dim,
        })
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(Point::zeros(dim), 1.0).expect("unit ball is valid")
    }

    pub fn boxed(lower: Point, upper: Point) -> Result<Self> {
        lower.check_dim(upper.dim())?;
        if let Some(i) = (0..lower.dim()).find(|&i| lower[i] > upper[i]) {
            return Err(Error::DegenerateSet(format!(
                "box lower[{i}] = {} exceeds upper[{i}] = {}",
                lower[i], upper[i]
            )));
        }
        let dim = lower.dim();
        Ok(PrimitiveSet {
            shape: Shape::Box { lower, upper },
            dim,
        })
    }

    pub fn diagonal(block_dim: usize, blocks: usize) -> Result<Self> {
        if block_dim == 0 || blocks == 0 {
            return Err(Error::DegenerateSet(
                "diagonal needs positive block size and count".into(),
            ));
        }
        Ok(PrimitiveSet {
            shape: Shape::AffineDiagonal { block_dim, blocks },
            dim: block_dim * blocks,
        })
    }

    pub fn singleton(point: Point) -> Self {
        let dim = point.dim();
        PrimitiveSet {
            shape: Shape::Singleton { point },
            dim,
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Euclidean projection onto the set. Points already in the set are
    /// returned unchanged (bitwise).
    pub fn project(&self, x: &Point) -> Result<Point> {
        x.check_dim(self.dim)?;
        Ok(self.project_unchecked(x))
    }

    pub(crate) fn project_unchecked(&self, x: &Point) -> Point {
        match &self.shape {
            Shape::Halfspace { normal, offset } => {
                let excess = normal.dot(x) - offset;
                if excess <= 0.0 {
                    x.clone()
                } else {
                    x.add_scaled(-excess / normal.norm_sq(), normal)
                }
            }
            Shape::Hyperplane { normal, offset } => {
                let excess = normal.dot(x) - offset;
                if excess == 0.0 {
                    x.clone()
                } else {
                    x.add_scaled(-excess / normal.norm_sq(), normal)
                }
            }
            Shape::Ball { center, radius } => {
                let d = x.dist(center);
                if d <= *radius {
                    x.clone()
                } else {
                    let t = radius / d;
                    Point::from_raw(
                        x.coords()
                            .iter()
                            .zip(center.coords())
                            .map(|(xi, ci)| ci + t * (xi - ci))
                            .collect(),
                    )
                }
            }
            Shape::Box { lower, upper } => Point::from_raw(
                x.coords()
                    .iter()
                    .zip(lower.coords().iter().zip(upper.coords()))
                    .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
                    .collect(),
            ),
            Shape::AffineDiagonal { block_dim, blocks } => {
                let mean = block_mean(x.coords(), *block_dim, *blocks);
                Point::from_raw(mean.iter().copied().cycle().take(self.dim).collect())
            }
            Shape::Singleton { point } => point.clone(),
        }
    }

    /// Euclidean distance to the set.
    pub fn distance(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.dim)?;
        Ok(self.distance_unchecked(x))
    }

    pub(crate) fn distance_unchecked(&self, x: &Point) -> f64 {
        match &self.shape {
            Shape::Halfspace { normal, offset } => {
                ((normal.dot(x) - offset) / normal.norm()).max(0.0)
            }
            Shape::Hyperplane { normal, offset } => (normal.dot(x) - offset).abs() / normal.norm(),
            Shape::Ball { center, radius } => (x.dist(center) - radius).max(0.0),
            _ => x.dist(&self.project_unchecked(x)),
        }
    }

    /// Membership up to an absolute distance tolerance.
    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        x.dim() == self.dim && self.distance_unchecked(x) <= tol
    }
}

/// Mean of the `blocks` consecutive blocks of `coords`, summed in block order.
pub(crate) fn block_mean(coords: &[f64], block_dim: usize, blocks: usize) -> Vec<f64> {
    let mut sum = vec![0.0; block_dim];
    for block in coords.chunks_exact(block_dim).take(blocks) {
        for (s, v) in sum.iter_mut().zip(block) {
            *s += v;
        }
    }
    let n = blocks as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    sum
}
