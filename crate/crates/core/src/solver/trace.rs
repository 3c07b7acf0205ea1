//! Iteration traces and their CSV / JSONL encodings.
//!
//! CSV columns: `n, x0 .. x{d-1}, residual_a, residual_b, theta, step_norm,
//! gamma, mu`. JSONL holds one step object per line. Floats are written in
//! shortest round-trip form, so reading a file back yields bit-identical values.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminationReason {
    ResidualMet,
    MaxIter,
    Stagnated,
    Error,
}

impl TerminationReason {
    /// Process exit code: 0 / 2 / 3 / 4.
    pub fn exit_code(self) -> i32 {
        match self {
            TerminationReason::ResidualMet => 0,
            TerminationReason::MaxIter => 2,
            TerminationReason::Stagnated => 3,
            TerminationReason::Error => 4,
        }
    }
}

impl fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminationReason::ResidualMet => "ResidualMet",
            TerminationReason::MaxIter => "MaxIter",
            TerminationReason::Stagnated => "Stagnated",
            TerminationReason::Error => "Error",
        })
    }
}

/// Diagnostics of iterate `x_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub n: usize,
    pub x: Point,
    /// `|x_n - P_A x_n|`
    pub residual_a: f64,
    /// `|x_n - P_B R_A x_n|`
    pub residual_b: f64,
    pub theta: f64,
    /// `|x_{n+1} - x_n|`
    pub step_norm: f64,
    pub gamma: f64,
    pub mu: f64,
}

impl TraceStep {
    pub fn max_residual(&self) -> f64 {
        self.residual_a.max(self.residual_b)
    }
}

/// Default number of stored steps before thinning starts.
pub const DEFAULT_TRACE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub steps: Vec<TraceStep>,
    pub termination: TerminationReason,
    /// Index of the last iterate reached.
    pub iterations: usize,
    pub final_point: Point,
    /// Sum of theta over every step, including thinned ones.
    pub theta_sum: f64,
    pub lambda: f64,
    pub error: Option<String>,
}

impl IterationTrace {
    pub fn last(&self) -> Option<&TraceStep> {
        self.steps.last()
    }

    pub fn final_max_residual(&self) -> Option<f64> {
        self.last().map(TraceStep::max_residual)
    }

    pub fn iterates(&self) -> impl Iterator<Item = &Point> {
        self.steps.iter().map(|s| &s.x)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv(&self.steps, out)
    }

    pub fn write_jsonl<W: Write>(&self, out: W) -> Result<()> {
        write_jsonl(&self.steps, out)
    }
}

/// Collects steps, keeping the first `cap / 2` verbatim and later steps on a
/// stride that doubles whenever the cap is reached.
#[derive(Debug)]
pub(crate) struct TraceRecorder {
    steps: Vec<TraceStep>,
    cap: usize,
    head: usize,
    stride: usize,
    last: Option<TraceStep>,
    theta_sum: f64,
}

impl TraceRecorder {
    pub(crate) fn new(cap: usize) -> Self {
        let cap = cap.max(4);
        TraceRecorder {
            steps: Vec::new(),
            cap,
            head: cap / 2,
            stride: 1,
            last: None,
            theta_sum: 0.0,
        }
    }

    pub(crate) fn push(&mut self, step: TraceStep) {
        self.theta_sum += step.theta;
        if step.n < self.head || (step.n - self.head).is_multiple_of(self.stride) {
            self.steps.push(step);
            self.last = None;
            if self.steps.len() > self.cap {
                self.stride *= 2;
                let (head, stride) = (self.head, self.stride);
                self.steps
                    .retain(|s| s.n < head || (s.n - head) % stride == 0);
            }
        } else {
            self.last = Some(step);
        }
    }

    pub(crate) fn finish(
        mut self,
        termination: TerminationReason,
        iterations: usize,
        final_point: Point,
        lambda: f64,
        error: Option<String>,
    ) -> IterationTrace {
        if let Some(step) = self.last.take() {
            self.steps.push(step);
        }
        IterationTrace {
            steps: self.steps,
            termination,
            iterations,
            final_point,
            theta_sum: self.theta_sum,
            lambda,
            error,
        }
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn io_err(e: impl fmt::Display) -> Error {
    Error::TraceIo(e.to_string())
}

pub fn write_csv<W: Write>(steps: &[TraceStep], out: W) -> Result<()> {
    let dim = steps.first().map_or(0, |s| s.x.dim());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["n".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    header.extend(
        [
            "residual_a",
            "residual_b",
            "theta",
            "step_norm",
            "gamma",
            "mu",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    w.write_record(&header).map_err(io_err)?;
    for s in steps {
        let mut row = vec![s.n.to_string()];
        row.extend(s.x.coords().iter().map(|&c| format_f64(c)));
        row.extend(
            [
                s.residual_a,
                s.residual_b,
                s.theta,
                s.step_norm,
                s.gamma,
                s.mu,
            ]
            .iter()
            .map(|&v| format_f64(v)),
        );
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<TraceStep>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(io_err)?.clone();
    let dim = header.iter().filter(|h| h.starts_with('x')).count();
    if header.len() != dim + 7 {
        return Err(Error::TraceIo(format!(
            "unexpected CSV header with {} columns",
            header.len()
        )));
    }
    let num = |s: &str| s.parse::<f64>().map_err(io_err);
    let mut steps = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(io_err)?;
        let n = rec[0].parse::<usize>().map_err(io_err)?;
        let coords = (1..=dim)
            .map(|i| num(&rec[i]))
            .collect::<Result<Vec<_>>>()?;
        let tail = (dim + 1..dim + 7)
            .map(|i| num(&rec[i]))
            .collect::<Result<Vec<_>>>()?;
        steps.push(TraceStep {
            n,
            x: Point::new(coords)?,
            residual_a: tail[0],
            residual_b: tail[1],
            theta: tail[2],
            step_norm: tail[3],
            gamma: tail[4],
            mu: tail[5],
        });
    }
    Ok(steps)
}

pub fn write_jsonl<W: Write>(steps: &[TraceStep], mut out: W) -> Result<()> {
    for s in steps {
        serde_json::to_writer(&mut out, s).map_err(io_err)?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)?;
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<TraceStep>> {
    input
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| {
            let l = l.map_err(io_err)?;
            serde_json::from_str(&l).map_err(io_err)
        })
        .collect()
}
