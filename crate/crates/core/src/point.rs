//! The iterate type.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of a finite-dimensional real space.
///
/// Constructed points have at least one coordinate and no NaN or infinite
/// entries. Arithmetic helpers never re-check finiteness; the solver checks
/// every iterate it produces.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument(
                "a point needs at least one coordinate".into(),
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point coordinates"));
        }
        Ok(Point(coords))
    }

    /// Wraps coordinates produced by arithmetic on valid points.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Point(coords)
    }

    pub fn scalar(v: f64) -> Result<Self> {
        Self::new(vec![v])
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Point(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector of `R^dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut p = Self::zeros(dim);
        p.0[i] = 1.0;
        p
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            })
        }
    }

    pub fn dot(&self, other: &Point) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist_sq(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist_sq(other).sqrt()
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: f64) -> Point {
        Point(self.0.iter().map(|a| s * a).collect())
    }

    /// `self + s * dir`
    pub fn add_scaled(&self, s: f64, dir: &Point) -> Point {
        Point(self.0.iter().zip(&dir.0).map(|(a, d)| a + s * d).collect())
    }

    /// `t * self + (1 - t) * other`, evaluated per coordinate in that order.
    pub fn lerp_from(&self, t: f64, other: &Point) -> Point {
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| t * a + (1.0 - t) * b)
                .collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Shorthand for building a point in tests and fixtures; panics on invalid input.
#[macro_export]
macro_rules! pt {
    ($($x:expr),+ $(,)?) => {
        $crate::Point::new(vec![$(($x) as f64),+]).expect("valid point")
    };
}
