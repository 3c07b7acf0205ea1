//! Many-set feasibility recast as a two-set problem on the product space.
//!
//! A stacked point of `R^(blocks * block_dim)` stores block `i` at
//! `coords[i * block_dim..(i + 1) * block_dim]`. The first set is the
//! product of the component sets; the second is the diagonal where all
//! blocks agree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::ConvexFunction;
use crate::operators::{block_mean, Cutter, PrimitiveSet};
use crate::point::Point;

/// How the diagonal side is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiftedB {
    /// Exact projection: every block replaced by the block mean.
    Exact,
    /// Subgradient projector of the squared diagonal distance.
    Subgradient,
}

#[derive(Debug, Clone)]
pub struct ProductProblem {
    block_dim: usize,
    blocks: usize,
    components: Vec<Cutter>,
    lifted_a: Cutter,
    lifted_b: Cutter,
}

/// Lifts `N >= 2` cutters on `R^block_dim` to the product space.
pub fn lift(cutters: Vec<Cutter>, block_dim: usize, flavor: LiftedB) -> Result<ProductProblem> {
    if cutters.len() < 2 {
        return Err(Error::FewerThanTwoBlocks(cutters.len()));
    }
    for c in &cutters {
        if c.dim() != block_dim {
            return Err(Error::DimensionMismatch {
                expected: block_dim,
                found: c.dim(),
            });
        }
    }
    let blocks = cutters.len();
    let lifted_a = Cutter::product(cutters.clone())?;
    let lifted_b = match flavor {
        LiftedB::Exact => Cutter::exact(PrimitiveSet::diagonal(block_dim, blocks)?),
        LiftedB::Subgradient => Cutter::subgradient(make_g(block_dim, blocks)?),
    };
    Ok(ProductProblem {
        block_dim,
        blocks,
        components: cutters,
        lifted_a,
        lifted_b,
    })
}

impl ProductProblem {
    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn dim(&self) -> usize {
        self.block_dim * self.blocks
    }

    pub fn components(&self) -> &[Cutter] {
        &self.components
    }

    pub fn lifted_a(&self) -> &Cutter {
        &self.lifted_a
    }

    pub fn lifted_b(&self) -> &Cutter {
        &self.lifted_b
    }

    /// Concatenates blocks in order.
    pub fn stack(&self, blocks: &[Point]) -> Result<Point> {
        if blocks.len() != self.blocks {
            return Err(Error::DimensionMismatch {
                expected: self.blocks,
                found: blocks.len(),
            });
        }
        let mut out = Vec::with_capacity(self.dim());
        for b in blocks {
            b.check_dim(self.block_dim)?;
            out.extend_from_slice(b.coords());
        }
        Ok(Point::from_raw(out))
    }

    /// Replicates one block across every slot.
    pub fn diagonal_point(&self, block: &Point) -> Result<Point> {
        self.stack(&vec![block.clone(); self.blocks])
    }

    pub fn split(&self, x: &Point) -> Result<Vec<Point>> {
        x.check_dim(self.dim())?;
        Ok(x.coords()
            .chunks_exact(self.block_dim)
            .map(|c| Point::from_raw(c.to_vec()))
            .collect())
    }

    /// Mean of the blocks, summed in block order.
    pub fn mean_block(&self, x: &Point) -> Result<Point> {
        x.check_dim(self.dim())?;
        Ok(Point::from_raw(block_mean(
            x.coords(),
            self.block_dim,
            self.blocks,
        )))
    }

    /// Largest distance from a block to the block mean.
    pub fn diagonal_spread(&self, x: &Point) -> Result<f64> {
        let mean = self.mean_block(x)?;
        Ok(self
            .split(x)?
            .iter()
            .map(|b| b.dist(&mean))
            .fold(0.0, f64::max))
    }
}

/// `F(x_1..x_N) = sum_i max{f_i(x_i), 0}` on the stacked space. The
/// subgradient stacks `s_i(x_i)` on blocks with `f_i(x_i) > 0` and zero elsewhere.
pub fn make_f(fs: Vec<ConvexFunction>) -> Result<ConvexFunction> {
    let block_dim = fs
        .first()
        .map(ConvexFunction::dim)
        .ok_or_else(|| Error::InvalidArgument("make_f needs at least one function".into()))?;
    for f in &fs {
        if f.dim() != block_dim {
            return Err(Error::DimensionMismatch {
                expected: block_dim,
                found: f.dim(),
            });
        }
    }
    let dim = block_dim * fs.len();
    let certified = fs.iter().all(ConvexFunction::is_certified_convex);
    let fs_value = fs.clone();
    let value = move |x: &[f64]| {
        fs_value
            .iter()
            .zip(x.chunks_exact(block_dim))
            .map(|(f, b)| f.value_raw(b).max(0.0))
            .sum::<f64>()
    };
    let subgrad = move |x: &[f64]| {
        let mut out = Vec::with_capacity(x.len());
        for (f, b) in fs.iter().zip(x.chunks_exact(block_dim)) {
            if f.value_raw(b) > 0.0 {
                out.extend(f.subgrad_raw(b));
            } else {
                out.extend(std::iter::repeat_n(0.0, block_dim));
            }
        }
        out
    };
    if certified {
        ConvexFunction::new("block_sum", dim, value, subgrad)
    } else {
        ConvexFunction::nonconvex("block_sum", dim, value, subgrad)
    }
}

/// `G(x_1..x_N) = sum_i |x_i - mean|^2`, the squared distance to the diagonal.
/// Gradient `2(x_i - mean)` per block.
pub fn make_g(block_dim: usize, blocks: usize) -> Result<ConvexFunction> {
    if blocks < 2 {
        return Err(Error::FewerThanTwoBlocks(blocks));
    }
    if block_dim == 0 {
        return Err(Error::InvalidArgument(
            "block dimension must be positive".into(),
        ));
    }
    ConvexFunction::new(
        "diagonal_distance_sq",
        block_dim * blocks,
        move |x| {
            let mean = block_mean(x, block_dim, blocks);
            x.chunks_exact(block_dim)
                .map(|b| {
                    b.iter()
                        .zip(&mean)
                        .map(|(v, m)| (v - m) * (v - m))
                        .sum::<f64>()
                })
                .sum()
        },
        move |x| {
            let mean = block_mean(x, block_dim, blocks);
            x.chunks_exact(block_dim)
                .flat_map(|b| {
                    b.iter()
                        .zip(&mean)
                        .map(|(v, m)| 2.0 * (v - m))
                        .collect::<Vec<_>>()
                })
                .collect()
        },
    )
}
