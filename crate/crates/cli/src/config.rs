//! TOML problem files.
//!
//! ```toml
//! mode = "strict"
//! x0 = [3.0, 4.0]
//!
//! [params]
//! gamma = 1.0
//! mu = 1.0
//! lambda = 1.0
//!
//! [a]
//! kind = "halfspace"
//! normal = [1.0, 0.0]
//! offset = 0.0
//!
//! [b]
//! kind = "ball"
//! center = [0.0, 0.0]
//! radius = 1.0
//! cutter = "subgradient"
//! ```
//!
//! Instead of `a`/`b`, a `[product]` section lifts any number of component
//! sets to the product space. Instead of `[params]`, `[sequences]` cycles
//! through lists of `gamma` and `mu` values.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use cutters::functions::{build_catalog_function, make_distance, make_sublinear_cutter};
use cutters::gallery::separator_map;
use cutters::operators::{Cutter, PrimitiveSet};
use cutters::productspace::ProductProblem;
use cutters::{lift, LiftedB, Mode, OperatorParams, Point, StopRule};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutterKind {
    #[default]
    Exact,
    Subgradient,
}

/// One side of the problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SideSpec {
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
        #[serde(default)]
        cutter: CutterKind,
    },
    Hyperplane {
        normal: Vec<f64>,
        offset: f64,
        #[serde(default)]
        cutter: CutterKind,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(default)]
        cutter: CutterKind,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
        #[serde(default)]
        cutter: CutterKind,
    },
    Singleton {
        point: Vec<f64>,
        #[serde(default)]
        cutter: CutterKind,
    },
    /// Subgradient cutter of a catalog function.
    Function {
        name: String,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        params: BTreeMap<String, f64>,
    },
    /// A built-in map: `sublinear` or `separator`.
    Custom { name: String },
}

pub const CUSTOM_NAMES: &[&str] = &["sublinear", "separator"];

fn point(v: &[f64], field: &str) -> Result<Point> {
    Point::new(v.to_vec()).with_context(|| format!("invalid `{field}`"))
}

impl SideSpec {
    pub fn build(&self) -> Result<Cutter> {
        let with = |set: PrimitiveSet, kind: CutterKind| match kind {
            CutterKind::Exact => Cutter::exact(set),
            CutterKind::Subgradient => Cutter::subgradient(make_distance(set)),
        };
        Ok(match self {
            SideSpec::Halfspace {
                normal,
                offset,
                cutter,
            } => with(
                PrimitiveSet::halfspace(point(normal, "normal")?, *offset)?,
                *cutter,
            ),
            SideSpec::Hyperplane {
                normal,
                offset,
                cutter,
            } => with(
                PrimitiveSet::hyperplane(point(normal, "normal")?, *offset)?,
                *cutter,
            ),
            SideSpec::Ball {
                center,
                radius,
                cutter,
            } => with(
                PrimitiveSet::ball(point(center, "center")?, *radius)?,
                *cutter,
            ),
            SideSpec::Box {
                lower,
                upper,
                cutter,
            } => with(
                PrimitiveSet::boxed(point(lower, "lower")?, point(upper, "upper")?)?,
                *cutter,
            ),
            SideSpec::Singleton { point: p, cutter } => {
                with(PrimitiveSet::singleton(point(p, "point")?), *cutter)
            }
            SideSpec::Function { name, params } => {
                Cutter::subgradient(build_catalog_function(name, params)?)
            }
            SideSpec::Custom { name } => match name.as_str() {
                "sublinear" => make_sublinear_cutter(),
                "separator" => separator_map(),
                other => bail!(
                    "unknown custom cutter `{other}`; valid names: {}",
                    CUSTOM_NAMES.join(", ")
                ),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSpec {
    #[serde(default = "default_lifted_b")]
    pub lifted_b: LiftedB,
    pub components: Vec<SideSpec>,
}

fn default_lifted_b() -> LiftedB {
    LiftedB::Exact
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsSpec {
    pub gamma: f64,
    pub mu: f64,
    pub lambda: f64,
}

/// Parameter sequences, repeated cyclically. Strict mode only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub gamma: Vec<f64>,
    pub mu: Vec<f64>,
    pub lambda: f64,
    /// Lower bound on `v (2 - v)` for every drawn value.
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: TraceFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Starting point. For product problems a single block is copied to every block.
    pub x0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequences: Option<SequenceSpec>,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<SideSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<SideSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<ProductSpec>,
}

fn default_mode() -> Mode {
    Mode::Strict
}

#[derive(Debug, Clone)]
pub enum RunParams {
    Constant(OperatorParams),
    Sequence(SequenceSpec),
}

/// A validated, ready-to-run problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub a: Cutter,
    pub b: Cutter,
    pub product: Option<ProductProblem>,
    pub x0: Point,
    pub run: RunParams,
    pub stop: StopRule,
    pub mode: Mode,
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Checks the configuration against `mode` and builds every cutter.
    pub fn build(&self, mode: Mode) -> Result<Problem> {
        let run = match (&self.params, &self.sequences) {
            (Some(p), None) => {
                RunParams::Constant(OperatorParams::with_mode(p.gamma, p.mu, p.lambda, mode)?)
            }
            (None, Some(s)) => {
                if mode != Mode::Strict {
                    bail!("parameter sequences run in strict mode only");
                }
                if s.gamma.is_empty() || s.mu.is_empty() {
                    bail!("parameter sequences must be non-empty");
                }
                for &v in s.gamma.iter().chain(&s.mu) {
                    OperatorParams::new(v, 1.0, 1.0).context("sequence value")?;
                }
                OperatorParams::new(1.0, 1.0, s.lambda).context("sequence lambda")?;
                RunParams::Sequence(s.clone())
            }
            (Some(_), Some(_)) => bail!("give either [params] or [sequences], not both"),
            (None, None) => bail!("missing [params] (or [sequences])"),
        };
        self.stop.validate()?;
        let (a, b, product) = match (&self.a, &self.b, &self.product) {
            (Some(a), Some(b), None) => (
                a.build().context("side a")?,
                b.build().context("side b")?,
                None,
            ),
            (None, None, Some(p)) => {
                let comps = p
                    .components
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c.build().with_context(|| format!("product component {i}")))
                    .collect::<Result<Vec<_>>>()?;
                let block_dim = comps.first().map_or(0, Cutter::dim);
                let prob = lift(comps, block_dim, p.lifted_b)?;
                (prob.lifted_a().clone(), prob.lifted_b().clone(), Some(prob))
            }
            _ => bail!("give either both [a] and [b], or a [product] section"),
        };
        let mut x0 = point(&self.x0, "x0")?;
        if let Some(p) = &product {
            if x0.dim() == p.block_dim() {
                x0 = p.diagonal_point(&x0)?;
            }
        }
        x0.check_dim(a.dim()).context("x0")?;
        if a.dim() != b.dim() {
            bail!(
                "sides a and b live in different dimensions ({} vs {})",
                a.dim(),
                b.dim()
            );
        }
        if mode == Mode::Strict {
            for (side, c) in [("a", &a), ("b", &b)] {
                if !c.is_certified() {
                    bail!(
                        "side {side} ({}) is not certified convex; use --mode permissive",
                        c.label()
                    );
                }
            }
        }
        Ok(Problem {
            a,
            b,
            product,
            x0,
            run,
            stop: self.stop,
            mode,
        })
    }
}
