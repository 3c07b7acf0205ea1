//! Convex functions with a subgradient selection, the subgradient projector
//! built from them, and the catalog of named functions.
//!
//! Every selection is deterministic. At kinks of a one-dimensional function
//! the right derivative is used; for max-type functions the lowest active
//! index wins.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operators::{CustomCutter, Cutter, PrimitiveSet};
use crate::point::{dot, Point};

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type SubgradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A real-valued function on `R^dim` paired with one element of its
/// subdifferential at every point.
#[derive(Clone)]
pub struct ConvexFunction {
    name: Arc<str>,
    dim: usize,
    value: Arc<ValueFn>,
    subgrad: Arc<SubgradFn>,
    certified: bool,
}

impl fmt::Debug for ConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("certified", &self.certified)
            .finish()
    }
}

/// Seed for the construction-time subgradient check, fixed so that catalog
/// construction is reproducible.
const VALIDATION_SEED: u64 = 0x5eed_c0de;
const VALIDATION_PAIRS: usize = 256;

impl ConvexFunction {
    /// Builds a function and checks the subgradient inequality on sampled pairs.
    pub fn new<V, S>(name: impl Into<String>, dim: usize, value: V, subgrad: S) -> Result<Self>
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        S: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        let f = Self::unchecked(name, dim, value, subgrad, true)?;
        f.validate()?;
        Ok(f)
    }

    /// Builds a function that is not convex. Its subgradient projector is not
    /// covered by any convergence guarantee, so the solver only accepts it in
    /// permissive mode.
    pub fn nonconvex<V, S>(
        name: impl Into<String>,
        dim: usize,
        value: V,
        subgrad: S,
    ) -> Result<Self>
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        S: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::unchecked(name, dim, value, subgrad, false)
    }

    fn unchecked<V, S>(
        name: impl Into<String>,
        dim: usize,
        value: V,
        subgrad: S,
        certified: bool,
    ) -> Result<Self>
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        S: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "function domain dimension must be positive".into(),
            ));
        }
        Ok(ConvexFunction {
            name: Arc::from(name.into()),
            dim,
            value: Arc::new(value),
            subgrad: Arc::new(subgrad),
            certified,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// False only for functions built with [`ConvexFunction::nonconvex`].
    pub fn is_certified_convex(&self) -> bool {
        self.certified
    }

    pub fn value(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.dim)?;
        Ok(self.value_raw(x.coords()))
    }

    pub fn subgradient(&self, x: &Point) -> Result<Point> {
        x.check_dim(self.dim)?;
        Ok(Point::from_raw(self.subgrad_raw(x.coords())))
    }

    pub(crate) fn value_raw(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub(crate) fn subgrad_raw(&self, x: &[f64]) -> Vec<f64> {
        let s = (self.subgrad)(x);
        debug_assert_eq!(
            s.len(),
            self.dim,
            "subgradient of `{}` has wrong length",
            self.name
        );
        s
    }

    /// Worst violation of `f(y) >= f(x) + <s(x), y - x>` over the given pairs,
    /// each scaled by `max(1, |f(x)|, |f(y)|)`. Non-positive means the
    /// inequality held everywhere.
    pub fn subgradient_gap(&self, pairs: &[(Point, Point)]) -> f64 {
        pairs
            .iter()
            .map(|(x, y)| {
                let fx = self.value_raw(x.coords());
                let fy = self.value_raw(y.coords());
                let s = self.subgrad_raw(x.coords());
                let diff = y.sub(x);
                let gap = fx + dot(&s, diff.coords()) - fy;
                gap / 1f64.max(fx.abs()).max(fy.abs())
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn validate(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
        let pairs: Vec<(Point, Point)> = (0..VALIDATION_PAIRS)
            .map(|_| {
                (
                    random_point(&mut rng, self.dim, 5.0),
                    random_point(&mut rng, self.dim, 5.0),
                )
            })
            .collect();
        let gap = self.subgradient_gap(&pairs);
        if gap > 1e-9 {
            return Err(Error::InvalidSubgradient {
                name: self.name.to_string(),
                gap,
            });
        }
        Ok(())
    }
}

fn random_point(rng: &mut impl Rng, dim: usize, half_width: f64) -> Point {
    Point::from_raw(
        (0..dim)
            .map(|_| rng.random_range(-half_width..half_width))
            .collect(),
    )
}

/// Sign with `sign(0) = 0`.
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The subgradient projector of `f`: `x` itself when `f(x) <= 0`, otherwise
/// `x - f(x) / |s(x)|^2 * s(x)`.
pub fn subgradient_project(f: &ConvexFunction, x: &Point) -> Result<Point> {
    x.check_dim(f.dim)?;
    let fx = f.value_raw(x.coords());
    if !fx.is_finite() {
        return Err(Error::NonFinite("function value"));
    }
    if fx <= 0.0 {
        return Ok(x.clone());
    }
    let s = Point::from_raw(f.subgrad_raw(x.coords()));
    let ns = s.norm_sq();
    if ns == 0.0 {
        return Err(Error::ZeroSubgradient { value: fx });
    }
    Ok(x.add_scaled(-fx / ns, &s))
}

/// `|x|` on the real line, with `s(0) = 0`.
pub fn make_abs() -> ConvexFunction {
    ConvexFunction::new("abs", 1, |x| x[0].abs(), |x| vec![sign(x[0])]).expect("abs is convex")
}

/// `max{|x|, |y|}` on the plane. Ties go to the first coordinate.
pub fn make_max_abs() -> ConvexFunction {
    ConvexFunction::new(
        "max_abs",
        2,
        |x| x[0].abs().max(x[1].abs()),
        |x| {
            if x[0].abs() >= x[1].abs() {
                vec![sign(x[0]), 0.0]
            } else {
                vec![0.0, sign(x[1])]
            }
        },
    )
    .expect("max_abs is convex")
}

/// `|x|` for `x <= 1`, `2x - 1` beyond. Its subgradient projector jumps from
/// 0 to 1/2 across `x = 1`, so it is a cutter that is not nonexpansive.
pub fn make_kinked_abs() -> ConvexFunction {
    ConvexFunction::new(
        "kinked_abs",
        1,
        |x| {
            if x[0] <= 1.0 {
                x[0].abs()
            } else {
                2.0 * x[0] - 1.0
            }
        },
        // right derivative
        |x| {
            let t = x[0];
            vec![if t < 0.0 {
                -1.0
            } else if t < 1.0 {
                1.0
            } else {
                2.0
            }]
        },
    )
    .expect("kinked_abs is convex")
}

/// Distance to a primitive set. Its subgradient projector coincides with the
/// exact projection onto the set.
pub fn make_distance(set: PrimitiveSet) -> ConvexFunction {
    let dim = set.dim();
    let for_value = set.clone();
    ConvexFunction::new(
        "distance",
        dim,
        move |x| for_value.distance_unchecked(&Point::from_raw(x.to_vec())),
        move |x| {
            let p = Point::from_raw(x.to_vec());
            let proj = set.project_unchecked(&p);
            let d = p.dist(&proj);
            if d > 0.0 {
                p.sub(&proj).scale(1.0 / d).into_coords()
            } else {
                vec![0.0; p.dim()]
            }
        },
    )
    .expect("distance functions are convex")
}

/// `((x-a)^2 + (y-b)^2 - 1)^2`, whose zero set is the unit circle about `(a, b)`.
/// Not convex; usable only in permissive mode.
pub fn make_ellipse_residual(a: f64, b: f64) -> ConvexFunction {
    ConvexFunction::nonconvex(
        "ellipse_residual",
        2,
        move |x| {
            let r = (x[0] - a).powi(2) + (x[1] - b).powi(2) - 1.0;
            r * r
        },
        move |x| {
            let r = (x[0] - a).powi(2) + (x[1] - b).powi(2) - 1.0;
            vec![4.0 * r * (x[0] - a), 4.0 * r * (x[1] - b)]
        },
    )
    .expect("dimension is positive")
}

/// One member of the kink family on the real line:
/// `max{-t/k, t/k, k t + 1 - k, -k t + 1 - k}`.
pub fn kink(k: usize, t: f64) -> f64 {
    kink_pieces(k, t)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

fn kink_pieces(k: usize, t: f64) -> [f64; 4] {
    let kf = k as f64;
    [-t / kf, t / kf, kf * t + 1.0 - kf, -kf * t + 1.0 - kf]
}

fn kink_slope(k: usize, t: f64) -> f64 {
    let kf = k as f64;
    let pieces = kink_pieces(k, t);
    let best = pieces.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let active = pieces.iter().position(|&p| p == best).unwrap_or(0);
    [-1.0 / kf, 1.0 / kf, kf, -kf][active]
}

/// `x -> max_{k <= k_max} kink(k, x_k)` on `R^k_max`; zero only at the origin.
/// Near the basis vector `e_n` it equals `n x_n + 1 - n`, so the subgradient
/// step from `e_n` has length `1/n` while the distance to the origin is 1.
pub fn make_kink_family(k_max: usize) -> Result<ConvexFunction> {
    if k_max < 1 {
        return Err(Error::InvalidArgument(
            "kink family needs k_max >= 1".into(),
        ));
    }
    ConvexFunction::new(
        "kink_family",
        k_max,
        move |x| {
            (1..=k_max)
                .map(|k| kink(k, x[k - 1]))
                .fold(f64::NEG_INFINITY, f64::max)
        },
        move |x| {
            let values: Vec<f64> = (1..=k_max).map(|k| kink(k, x[k - 1])).collect();
            let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let k = values.iter().position(|&v| v == best).unwrap_or(0) + 1;
            let mut s = vec![0.0; k_max];
            s[k - 1] = kink_slope(k, x[k - 1]);
            s
        },
    )
}

/// The map on the real line whose alternating iteration from 1 visits
/// `1/(2n+1)`: points of `{1/n}` step to the next member toward 0, points
/// between members step to the member nearer 0, and `|x| > 1` is clipped
/// to `+-1`. Its fixed set is `{0}`.
pub fn make_sublinear_cutter() -> Cutter {
    Cutter::Custom(CustomCutter::new(
        "sublinear",
        1,
        |x: &Point| Point::from_raw(vec![sublinear_map(x[0])]),
        |x: &Point, tol| x[0].abs() <= tol,
    ))
}

fn sublinear_map(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x > 1.0 {
        return 1.0;
    }
    if x < -1.0 {
        return -1.0;
    }
    let r = 1.0 / x;
    let nearest = r.round();
    if (r - nearest).abs() <= 1e-9 * r.abs() {
        // x = 1/n
        return if x > 0.0 {
            1.0 / (nearest + 1.0)
        } else {
            1.0 / (nearest - 1.0)
        };
    }
    if x > 0.0 {
        // 1/(n+1) < x < 1/n
        1.0 / (r.floor() + 1.0)
    } else {
        // 1/n < x < 1/(n-1), n negative
        1.0 / (r.ceil() - 1.0)
    }
}

/// Builds a catalog function from named numeric parameters.
pub type CatalogBuilder = fn(&BTreeMap<String, f64>) -> Result<ConvexFunction>;

pub struct FunctionCatalogEntry {
    pub name: &'static str,
    pub params: &'static [&'static str],
    pub convex: bool,
    pub builder: CatalogBuilder,
}

fn param(params: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| Error::InvalidArgument(format!("missing function parameter `{key}`")))
}

pub static CATALOG: &[FunctionCatalogEntry] = &[
    FunctionCatalogEntry {
        name: "abs",
        params: &[],
        convex: true,
        builder: |_| Ok(make_abs()),
    },
    FunctionCatalogEntry {
        name: "max_abs",
        params: &[],
        convex: true,
        builder: |_| Ok(make_max_abs()),
    },
    FunctionCatalogEntry {
        name: "kinked_abs",
        params: &[],
        convex: true,
        builder: |_| Ok(make_kinked_abs()),
    },
    FunctionCatalogEntry {
        name: "kink_family",
        params: &["k"],
        convex: true,
        builder: |p| {
            let k = param(p, "k")?;
            if k.fract() != 0.0 || k < 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "kink_family k = {k} must be a positive integer"
                )));
            }
            make_kink_family(k as usize)
        },
    },
    FunctionCatalogEntry {
        name: "ellipse_residual",
        params: &["a", "b"],
        convex: false,
        builder: |p| Ok(make_ellipse_residual(param(p, "a")?, param(p, "b")?)),
    },
];

pub fn catalog_names() -> Vec<&'static str> {
    CATALOG.iter().map(|e| e.name).collect()
}

/// Looks up `name` in the catalog and builds it.
pub fn build_catalog_function(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<ConvexFunction> {
    let entry = CATALOG.iter().find(|e| e.name == name).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "unknown function `{name}`; valid names: {}",
            catalog_names().join(", ")
        ))
    })?;
    if let Some(extra) = params.keys().find(|k| !entry.params.contains(&k.as_str())) {
        return Err(Error::InvalidArgument(format!(
            "function `{name}` takes no parameter `{extra}`"
        )));
    }
    (entry.builder)(params)
}
