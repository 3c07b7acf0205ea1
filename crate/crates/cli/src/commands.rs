use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cutters::gallery::{fixture_by_name, FIXTURE_NAMES};
use cutters::instances::{rng_from_seed, sample_fixed_points, uniform_point};
use cutters::operators::Cutter;
use cutters::solver::{
    cutter_audit, firm_nonexpansive_audit, format_f64, operator_audit, sqne_audit, AuditReport,
};
use cutters::{
    classify_params, solve as run_solve, varying_params_solve, IterationTrace, OperatorParams,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Problem, ProblemConfig, RunParams, TraceFormat};
use crate::{GlobalOpts, EXIT_CHECK_FAILED};

/// Relaxation values sampled by `audit`.
pub const AUDIT_GAMMAS: [f64; 5] = [0.1, 0.5, 1.0, 1.5, 1.9];
/// Fixed points drawn per side by `audit`; every sample is checked against each.
pub const AUDIT_FIXED_POINTS: usize = 64;

fn load(global: &GlobalOpts, path: &Path) -> Result<(ProblemConfig, Problem)> {
    let cfg = ProblemConfig::load(path)?;
    let mode = global.mode.unwrap_or(cfg.mode);
    let problem = cfg
        .build(mode)
        .with_context(|| format!("invalid config {}", path.display()))?;
    Ok((cfg, problem))
}

/// Writes `bytes` to `path`, or to `stdout` when the path is absent or `-`.
fn emit(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))
        }
        _ => Ok(stdout.write_all(bytes)?),
    }
}

fn encode(trace: &IterationTrace, format: TraceFormat) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        TraceFormat::Csv => trace.write_csv(&mut buf)?,
        TraceFormat::Jsonl => trace.write_jsonl(&mut buf)?,
    }
    Ok(buf)
}

pub fn solve_problem(p: &Problem) -> Result<IterationTrace> {
    Ok(match &p.run {
        RunParams::Constant(params) => run_solve(&p.a, &p.b, params, &p.x0, &p.stop)?,
        RunParams::Sequence(s) => varying_params_solve(
            &p.a,
            &p.b,
            s.gamma.iter().copied().cycle(),
            s.mu.iter().copied().cycle(),
            s.lambda,
            s.floor,
            &p.x0,
            &p.stop,
        )?,
    })
}

fn summarize(trace: &IterationTrace, p: &Problem, stderr: &mut dyn Write) -> Result<()> {
    writeln!(
        stderr,
        "{} after {} iterations; max residual {}; final point {}",
        trace.termination,
        trace.iterations,
        trace.final_max_residual().map_or("n/a".into(), format_f64),
        trace.final_point
    )?;
    if let Some(prod) = &p.product {
        writeln!(
            stderr,
            "mean block {}",
            prod.mean_block(&trace.final_point)?
        )?;
    }
    if let Some(e) = &trace.error {
        writeln!(stderr, "error: {e}")?;
    }
    Ok(())
}

pub fn solve(
    global: &GlobalOpts,
    config: &Path,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let (cfg, problem) = load(global, config)?;
    let trace = solve_problem(&problem)?;
    let format = global.format.unwrap_or(cfg.output.format);
    let out = global.out.as_deref().or(cfg.output.path.as_deref());
    emit(out, &encode(&trace, format)?, stdout)?;
    summarize(&trace, &problem, stderr)?;
    Ok(trace.termination.exit_code())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Grid {
    pub gamma: Option<Vec<f64>>,
    pub mu: Option<Vec<f64>>,
    pub lambda: Option<Vec<f64>>,
}

/// Parses repeated `name=v1,v2,..` arguments.
pub fn parse_grid(args: &[String]) -> Result<Grid> {
    let mut grid = Grid::default();
    for arg in args {
        let (name, values) = arg
            .split_once('=')
            .with_context(|| format!("grid axis `{arg}` is not of the form name=v1,v2,.."))?;
        let values = values
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| {
                v.parse::<f64>()
                    .with_context(|| format!("grid value `{v}` for {name}"))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            bail!("empty grid: axis `{name}` has no values");
        }
        let slot = match name.trim() {
            "gamma" => &mut grid.gamma,
            "mu" => &mut grid.mu,
            "lambda" => &mut grid.lambda,
            other => bail!("unknown grid axis `{other}`; expected gamma, mu or lambda"),
        };
        if slot.is_some() {
            bail!("grid axis `{name}` given twice");
        }
        *slot = Some(values);
    }
    Ok(grid)
}

impl Grid {
    /// Cells in gamma-major, then mu, then lambda order. Missing axes take the
    /// value of `base`.
    pub fn cells(&self, base: Option<(f64, f64, f64)>) -> Result<Vec<(f64, f64, f64)>> {
        let axis = |v: &Option<Vec<f64>>,
                    pick: fn((f64, f64, f64)) -> f64,
                    name: &str|
         -> Result<Vec<f64>> {
            match (v, base) {
                (Some(v), _) => Ok(v.clone()),
                (None, Some(b)) => Ok(vec![pick(b)]),
                (None, None) => bail!("grid has no `{name}` axis and the config has no [params]"),
            }
        };
        let gs = axis(&self.gamma, |b| b.0, "gamma")?;
        let ms = axis(&self.mu, |b| b.1, "mu")?;
        let ls = axis(&self.lambda, |b| b.2, "lambda")?;
        let mut cells = Vec::with_capacity(gs.len() * ms.len() * ls.len());
        for &g in &gs {
            for &m in &ms {
                cells.extend(ls.iter().map(|&l| (g, m, l)));
            }
        }
        if cells.is_empty() {
            bail!("empty grid");
        }
        Ok(cells)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub mu: f64,
    pub lambda: f64,
    pub method: String,
    pub termination: String,
    pub iterations: usize,
    pub residual_a: f64,
    pub residual_b: f64,
}

pub fn sweep_rows(
    problem: &Problem,
    cells: &[(f64, f64, f64)],
    jobs: Option<usize>,
) -> Result<Vec<SweepRow>> {
    let params = cells
        .iter()
        .map(|&(g, m, l)| {
            OperatorParams::with_mode(g, m, l, problem.mode)
                .with_context(|| format!("grid cell ({g}, {m}, {l})"))
        })
        .collect::<Result<Vec<_>>>()?;
    let threads = jobs
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map_or(1, |n| n.get())
                .min(8)
        })
        .max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?;
    let traces: Vec<Result<IterationTrace>> = pool.install(|| {
        params
            .par_iter()
            .map(|p| {
                Ok(run_solve(
                    &problem.a,
                    &problem.b,
                    p,
                    &problem.x0,
                    &problem.stop,
                )?)
            })
            .collect()
    });
    params
        .iter()
        .zip(traces)
        .map(|(p, t)| {
            let t = t?;
            let last = t.last();
            Ok(SweepRow {
                gamma: p.gamma(),
                mu: p.mu(),
                lambda: p.lambda(),
                method: classify_params(p).to_string(),
                termination: t.termination.to_string(),
                iterations: t.iterations,
                residual_a: last.map_or(f64::NAN, |s| s.residual_a),
                residual_b: last.map_or(f64::NAN, |s| s.residual_b),
            })
        })
        .collect()
}

pub fn sweep(
    global: &GlobalOpts,
    config: &Path,
    grid: &[String],
    jobs: Option<usize>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let grid = parse_grid(grid)?;
    let (cfg, problem) = load(global, config)?;
    if matches!(problem.run, RunParams::Sequence(_)) {
        bail!("sweep needs constant [params], not [sequences]");
    }
    let cells = grid.cells(cfg.params.map(|p| (p.gamma, p.mu, p.lambda)))?;
    let rows = sweep_rows(&problem, &cells, jobs)?;
    let mut buf = Vec::new();
    match global.format.unwrap_or(cfg.output.format) {
        TraceFormat::Csv => {
            writeln!(
                buf,
                "gamma,mu,lambda,method,termination,iterations,residual_a,residual_b"
            )?;
            for r in &rows {
                writeln!(
                    buf,
                    "{},{},{},{},{},{},{},{}",
                    format_f64(r.gamma),
                    format_f64(r.mu),
                    format_f64(r.lambda),
                    r.method,
                    r.termination,
                    r.iterations,
                    format_f64(r.residual_a),
                    format_f64(r.residual_b)
                )?;
            }
        }
        TraceFormat::Jsonl => {
            for r in &rows {
                serde_json::to_writer(&mut buf, r)?;
                buf.push(b'\n');
            }
        }
    }
    emit(global.out.as_deref(), &buf, stdout)?;
    Ok(0)
}

/// One audited inequality, ready to print.
#[derive(Debug, Clone)]
pub struct AuditLine {
    pub side: String,
    pub report: AuditReport,
}

pub fn audit_problem(
    problem: &Problem,
    samples: usize,
    seed: u64,
    half_width: f64,
) -> Result<Vec<AuditLine>> {
    if samples == 0 {
        bail!("--samples must be positive");
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        bail!("--half-width must be positive");
    }
    let mut rng = rng_from_seed(seed);
    let dim = problem.a.dim();
    let mut lines = Vec::new();
    let mut fixed_sets = Vec::new();
    for (side, cutter) in [("a", &problem.a), ("b", &problem.b)] {
        let xs: Vec<_> = (0..samples)
            .map(|_| uniform_point(&mut rng, dim, half_width))
            .collect();
        let fixed = sample_fixed_points(
            &mut rng,
            cutter,
            samples.min(AUDIT_FIXED_POINTS),
            half_width,
        )
        .ok();
        if let Some(zs) = &fixed {
            let label = format!("{side} {}", cutter.label());
            lines.push(AuditLine {
                side: label.clone(),
                report: cutter_audit(cutter, &xs, zs)?,
            });
            for g in AUDIT_GAMMAS {
                lines.push(AuditLine {
                    side: format!("{label} gamma={g}"),
                    report: sqne_audit(cutter, g, &xs, zs)?,
                });
            }
        }
        if matches!(cutter, Cutter::Exact(_)) {
            let ys = &xs[..xs.len().min(AUDIT_FIXED_POINTS)];
            lines.push(AuditLine {
                side: format!("{side} {}", cutter.label()),
                report: firm_nonexpansive_audit(cutter, &xs, ys)?,
            });
        }
        fixed_sets.push(fixed.unwrap_or_default());
    }
    if let RunParams::Constant(params) = &problem.run {
        let common: Vec<_> = fixed_sets[0]
            .iter()
            .filter(|p| problem.b.in_fixed_set(p, 0.0))
            .chain(
                fixed_sets[1]
                    .iter()
                    .filter(|p| problem.a.in_fixed_set(p, 0.0)),
            )
            .cloned()
            .collect();
        if !common.is_empty() {
            let xs: Vec<_> = (0..samples)
                .map(|_| uniform_point(&mut rng, dim, half_width))
                .collect();
            lines.push(AuditLine {
                side: format!("operator {}", params.method()),
                report: operator_audit(&problem.a, &problem.b, params, &xs, &common)?,
            });
        }
    }
    Ok(lines)
}

pub fn audit(
    global: &GlobalOpts,
    config: &Path,
    samples: usize,
    seed: u64,
    half_width: f64,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let (_, problem) = load(global, config)?;
    let lines = audit_problem(&problem, samples, seed, half_width)?;
    let mut buf = Vec::new();
    let mut all = true;
    for line in &lines {
        for ineq in &line.report.inequalities {
            all &= ineq.passed;
            write!(
                buf,
                "{} {}: {} checks, worst slack {} {}",
                if ineq.passed { "PASS" } else { "FAIL" },
                ineq.label,
                ineq.checks,
                format_f64(ineq.worst_slack),
                line.side,
            )?;
            if let (false, Some((x, y))) = (ineq.passed, &ineq.worst_pair) {
                write!(buf, " at x = {x}, y = {y}")?;
            }
            writeln!(buf)?;
        }
    }
    if lines.is_empty() {
        writeln!(buf, "nothing to audit: no fixed points could be sampled")?;
    }
    emit(global.out.as_deref(), &buf, stdout)?;
    Ok(if all { 0 } else { EXIT_CHECK_FAILED })
}

pub fn trace_file_name(fixture: &str, label: &str, format: TraceFormat) -> PathBuf {
    let ext = match format {
        TraceFormat::Csv => "csv",
        TraceFormat::Jsonl => "jsonl",
    };
    PathBuf::from(format!("{fixture}-{label}.{ext}"))
}

pub fn run_fixture(
    global: &GlobalOpts,
    name: &str,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    if name == "list" {
        for n in FIXTURE_NAMES {
            writeln!(stdout, "{n}")?;
        }
        return Ok(0);
    }
    let fixture = fixture_by_name(name)?;
    if let Some(mode) = global.mode {
        if mode != fixture.mode {
            fixture
                .run(mode)
                .with_context(|| format!("fixture `{name}` cannot run in {mode} mode"))?;
        }
    }
    let report = fixture.verify()?;
    writeln!(stderr, "{}: {}", fixture.name, fixture.summary)?;
    for c in &report.checks {
        writeln!(
            stderr,
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.label,
            c.detail
        )?;
    }
    let format = global.format.unwrap_or_default();
    match global.out.as_deref() {
        Some(dir) if dir != Path::new("-") => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for (label, trace) in &report.traces {
                let path = dir.join(trace_file_name(fixture.name, label, format));
                fs::write(&path, encode(trace, format)?)
                    .with_context(|| format!("writing {}", path.display()))?;
                writeln!(stderr, "wrote {}", path.display())?;
            }
        }
        _ => {
            let many = report.traces.len() > 1;
            for (label, trace) in &report.traces {
                if many {
                    writeln!(stdout, "# run: {label}")?;
                }
                stdout.write_all(&encode(trace, format)?)?;
            }
        }
    }
    Ok(if report.passed() {
        0
    } else {
        EXIT_CHECK_FAILED
    })
}
