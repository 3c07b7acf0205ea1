use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functions::{subgradient_project, ConvexFunction};
use crate::operators::PrimitiveSet;
use crate::point::Point;

type MapFn = dyn Fn(&Point) -> Point + Send + Sync;
type FixedFn = dyn Fn(&Point, f64) -> bool + Send + Sync;

/// A user-supplied map together with a membership predicate describing its
/// fixed set. Nothing checks that the map is actually a cutter; the audits
/// in [`crate::solver::diagnostics`] do that by sampling.
#[derive(Clone)]
pub struct CustomCutter {
    name: Arc<str>,
    dim: usize,
    map: Arc<MapFn>,
    fixed: Arc<FixedFn>,
}

impl CustomCutter {
    pub fn new<M, F>(name: impl Into<String>, dim: usize, map: M, fixed: F) -> Self
    where
        M: Fn(&Point) -> Point + Send + Sync + 'static,
        F: Fn(&Point, f64) -> bool + Send + Sync + 'static,
    {
        assert!(dim > 0, "dimension must be positive");
        CustomCutter {
            name: Arc::from(name.into()),
            dim,
            map: Arc::new(map),
            fixed: Arc::new(fixed),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// An operator `x -> P(x)` whose image separates `x` from the fixed set:
/// `<x - P(x), z - P(x)> <= 0` for every fixed point `z`.
#[derive(Clone)]
pub enum Cutter {
    /// Metric projection onto a primitive set.
    Exact(PrimitiveSet),
    /// Subgradient projector onto `{f <= 0}`.
    Subgradient(ConvexFunction),
    Custom(CustomCutter),
    /// Blockwise application on a stacked point: block `i` goes through
    /// `components[i]`.
    Product {
        block_dim: usize,
        components: Vec<Cutter>,
    },
}

impl fmt::Debug for Cutter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cutter::Exact(s) => f.debug_tuple("Exact").field(s.shape()).finish(),
            Cutter::Subgradient(func) => f.debug_tuple("Subgradient").field(&func.name()).finish(),
            Cutter::Custom(c) => f.debug_tuple("Custom").field(&c.name()).finish(),
            Cutter::Product {
                block_dim,
                components,
            } => f
                .debug_struct("Product")
                .field("block_dim", block_dim)
                .field("components", components)
                .finish(),
        }
    }
}

impl Cutter {
    pub fn exact(set: PrimitiveSet) -> Self {
        Cutter::Exact(set)
    }

    pub fn subgradient(f: ConvexFunction) -> Self {
        Cutter::Subgradient(f)
    }

    /// Stacks component cutters that all act on `R^block_dim`.
    pub fn product(components: Vec<Cutter>) -> Result<Self> {
        let block_dim = components
            .first()
            .map(Cutter::dim)
            .ok_or_else(|| Error::InvalidArgument("product of zero cutters".into()))?;
        for c in &components {
            if c.dim() != block_dim {
                return Err(Error::DimensionMismatch {
                    expected: block_dim,
                    found: c.dim(),
                });
            }
        }
        Ok(Cutter::Product {
            block_dim,
            components,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Cutter::Exact(s) => s.dim(),
            Cutter::Subgradient(f) => f.dim(),
            Cutter::Custom(c) => c.dim,
            Cutter::Product {
                block_dim,
                components,
            } => block_dim * components.len(),
        }
    }

    /// Short human-readable label for traces and reports.
    pub fn label(&self) -> String {
        match self {
            Cutter::Exact(s) => {
                let kind = match s.shape() {
                    super::Shape::Halfspace { .. } => "halfspace",
                    super::Shape::Hyperplane { .. } => "hyperplane",
                    super::Shape::Ball { .. } => "ball",
                    super::Shape::Box { .. } => "box",
                    super::Shape::AffineDiagonal { .. } => "diagonal",
                    super::Shape::Singleton { .. } => "singleton",
                };
                format!("exact:{kind}")
            }
            Cutter::Subgradient(f) => format!("subgradient:{}", f.name()),
            Cutter::Custom(c) => format!("custom:{}", c.name()),
            Cutter::Product { components, .. } => format!("product[{}]", components.len()),
        }
    }

    /// True unless some subgradient cutter inside is built on a function not
    /// certified convex.
    pub fn is_certified(&self) -> bool {
        match self {
            Cutter::Subgradient(f) => f.is_certified_convex(),
            Cutter::Product { components, .. } => components.iter().all(Cutter::is_certified),
            _ => true,
        }
    }

    /// Evaluates the cutter.
    pub fn apply(&self, x: &Point) -> Result<Point> {
        x.check_dim(self.dim())?;
        let image = match self {
            Cutter::Exact(s) => s.project_unchecked(x),
            Cutter::Subgradient(f) => subgradient_project(f, x)?,
            Cutter::Custom(c) => {
                let y = (c.map)(x);
                y.check_dim(c.dim)?;
                y
            }
            Cutter::Product {
                block_dim,
                components,
            } => {
                let mut out = Vec::with_capacity(x.dim());
                for (c, block) in components.iter().zip(x.coords().chunks_exact(*block_dim)) {
                    let b = c.apply(&Point::from_raw(block.to_vec()))?;
                    out.extend_from_slice(b.coords());
                }
                Point::from_raw(out)
            }
        };
        if !image.is_finite() {
            return Err(Error::NonFinite("cutter image"));
        }
        Ok(image)
    }

    /// Membership in the fixed set, up to `tol`.
    pub fn in_fixed_set(&self, x: &Point, tol: f64) -> bool {
        if x.dim() != self.dim() {
            return false;
        }
        match self {
            Cutter::Exact(s) => s.contains(x, tol),
            Cutter::Subgradient(f) => f.value_raw(x.coords()) <= tol,
            Cutter::Custom(c) => (c.fixed)(x, tol),
            Cutter::Product {
                block_dim,
                components,
            } => components
                .iter()
                .zip(x.coords().chunks_exact(*block_dim))
                .all(|(c, b)| c.in_fixed_set(&Point::from_raw(b.to_vec()), tol)),
        }
    }
}

/// Checks `gamma` against the domain `[0, 2)` of the relaxation.
pub fn check_gamma(gamma: f64) -> Result<()> {
    if (0.0..2.0).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::GammaOutOfRange(gamma))
    }
}

/// `x + (2 - gamma)(image - x)` given the cutter image of `x`. `gamma = 1`
/// returns the image itself.
pub fn relax_from_image(x: &Point, image: &Point, gamma: f64) -> Point {
    if gamma == 1.0 {
        return image.clone();
    }
    let t = 2.0 - gamma;
    Point::from_raw(
        x.coords()
            .iter()
            .zip(image.coords())
            .map(|(xi, pi)| xi + t * (pi - xi))
            .collect(),
    )
}

/// The relaxed cutter: `gamma = 0` reflects through the separating
/// hyperplane, `gamma = 1` is the cutter itself, `gamma` in `(1, 2)`
/// under-relaxes and `(0, 1)` over-relaxes.
pub fn relax(cutter: &Cutter, gamma: f64, x: &Point) -> Result<Point> {
    check_gamma(gamma)?;
    let image = cutter.apply(x)?;
    Ok(relax_from_image(x, &image, gamma))
}

/// The relaxation parameter turning the relaxed cutter into the damped
/// reflection `x/(2 eta + 1) + 2 eta/(2 eta + 1) P(x)`.
pub fn damped_reflection_gamma(eta: f64) -> Result<f64> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::EtaNonpositive(eta));
    }
    Ok(2.0 * (eta + 1.0) / (2.0 * eta + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;

    fn x_axis() -> Cutter {
        Cutter::exact(PrimitiveSet::hyperplane(pt![0, 1], 0.0).unwrap())
    }

    #[test]
    fn relax_special_values() {
        let c = x_axis();
        assert_eq!(relax(&c, 0.0, &pt![1, 3]).unwrap(), pt![1, -3]);
        assert_eq!(relax(&c, 1.0, &pt![1, 3]).unwrap(), pt![1, 0]);
        // 4 + 0.5 * (0 - 4) = 2, evaluated independently of the point helpers
        let scalar = 4.0 + (2.0 - 1.5) * (0.0 - 4.0);
        assert_eq!(scalar, 2.0);
        assert_eq!(relax(&c, 1.5, &pt![0, 4]).unwrap(), pt![0, scalar]);
    }

    #[test]
    fn relax_rejects_gamma_outside_domain() {
        let c = x_axis();
        assert_eq!(relax(&c, 2.0, &pt![0, 1]), Err(Error::GammaOutOfRange(2.0)));
        assert_eq!(
            relax(&c, -0.1, &pt![0, 1]),
            Err(Error::GammaOutOfRange(-0.1))
        );
        assert!(relax(&c, f64::NAN, &pt![0, 1]).is_err());
    }

    #[test]
    fn damped_reflection() {
        let g = damped_reflection_gamma(1.0).unwrap();
        assert!((g - 4.0 / 3.0).abs() < 1e-15);
        let c = x_axis();
        let x = pt![0, 3];
        let relaxed = relax(&c, g, &x).unwrap();
        let p = c.apply(&x).unwrap();
        let eta = 1.0;
        let other = x
            .scale(1.0 / (2.0 * eta + 1.0))
            .add(&p.scale(2.0 * eta / (2.0 * eta + 1.0)));
        assert!(relaxed.dist(&other) < 1e-15);
        assert!(relaxed.dist(&pt![0, 1]) < 1e-15);
        assert_eq!(damped_reflection_gamma(0.5).unwrap(), 1.5);
        assert!((damped_reflection_gamma(1e6).unwrap() - 1.0).abs() < 1e-5);
        assert_eq!(
            damped_reflection_gamma(0.0),
            Err(Error::EtaNonpositive(0.0))
        );
    }

    #[test]
    fn product_applies_blockwise() {
        let le0 = Cutter::exact(PrimitiveSet::halfspace(pt![1], 0.0).unwrap());
        let ge0 = Cutter::exact(PrimitiveSet::halfspace(pt![-1], 0.0).unwrap());
        let prod = Cutter::product(vec![le0, ge0]).unwrap();
        assert_eq!(prod.apply(&pt![3, -4]).unwrap(), pt![0, 0]);
        assert_eq!(prod.apply(&pt![-3, 4]).unwrap(), pt![-3, 4]);
        assert!(prod.in_fixed_set(&pt![-1, 1], 0.0));
        assert!(!prod.in_fixed_set(&pt![1, 1], 0.0));
    }

    #[test]
    fn dimension_checked() {
        assert!(matches!(
            x_axis().apply(&pt![1]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
    }
}
