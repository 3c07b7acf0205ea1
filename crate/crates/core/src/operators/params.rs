use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which parameter ranges are accepted.
///
/// `Strict` admits only the ranges covered by the convergence guarantees.
/// `Permissive` also admits the pure reflections `gamma = 0` / `mu = 0`,
/// needed to reproduce the stalling examples, and must always be asked for
/// explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    Permissive,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Permissive => "permissive",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Mode::Strict),
            "permissive" => Ok(Mode::Permissive),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode `{other}`; expected strict or permissive"
            ))),
        }
    }
}

/// Relaxation parameters `gamma` (first set), `mu` (second set) and the
/// averaging weight `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorParams {
    gamma: f64,
    mu: f64,
    lambda: f64,
    mode: Mode,
}

const STRICT_RELAX: &str = "(0, 2)";
const PERMISSIVE_RELAX: &str = "[0, 2)";
const LAMBDA_RANGE: &str = "(0, 1]";

pub(crate) fn check_relax(name: &'static str, v: f64, mode: Mode) -> Result<()> {
    let ok = match mode {
        Mode::Strict => v > 0.0 && v < 2.0,
        Mode::Permissive => (0.0..2.0).contains(&v),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange {
            name,
            value: v,
            allowed: match mode {
                Mode::Strict => STRICT_RELAX,
                Mode::Permissive => PERMISSIVE_RELAX,
            },
        })
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange {
            name: "lambda",
            value: lambda,
            allowed: LAMBDA_RANGE,
        })
    }
}

impl OperatorParams {
    /// Strict-mode parameters: `gamma, mu` in `(0, 2)`, `lambda` in `(0, 1]`.
    pub fn new(gamma: f64, mu: f64, lambda: f64) -> Result<Self> {
        Self::with_mode(gamma, mu, lambda, Mode::Strict)
    }

    /// Permissive-mode parameters: `gamma, mu` in `[0, 2)`.
    pub fn permissive(gamma: f64, mu: f64, lambda: f64) -> Result<Self> {
        Self::with_mode(gamma, mu, lambda, Mode::Permissive)
    }

    pub fn with_mode(gamma: f64, mu: f64, lambda: f64, mode: Mode) -> Result<Self> {
        check_relax("gamma", gamma, mode)?;
        check_relax("mu", mu, mode)?;
        check_lambda(lambda)?;
        Ok(OperatorParams {
            gamma,
            mu,
            lambda,
            mode,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn method(&self) -> MethodName {
        classify_params(self)
    }
}

/// The classical scheme a parameter triple reduces to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MethodName {
    AlternatingProjections,
    DouglasRachford,
    PeacemanRachford,
    /// Relaxed reflect-reflect: pure reflections with a free averaging weight.
    Rrr,
    Generic,
}

impl fmt::Display for MethodName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodName::AlternatingProjections => "alternating-projections",
            MethodName::DouglasRachford => "douglas-rachford",
            MethodName::PeacemanRachford => "peaceman-rachford",
            MethodName::Rrr => "rrr",
            MethodName::Generic => "generic",
        })
    }
}

pub fn classify_params(params: &OperatorParams) -> MethodName {
    let (g, m, l) = (params.gamma, params.mu, params.lambda);
    if g == 1.0 && m == 1.0 && l == 1.0 {
        MethodName::AlternatingProjections
    } else if g == 0.0 && m == 0.0 {
        if l == 0.5 {
            MethodName::DouglasRachford
        } else if l == 1.0 {
            MethodName::PeacemanRachford
        } else {
            MethodName::Rrr
        }
    } else {
        MethodName::Generic
    }
}
