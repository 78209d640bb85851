//! The `dtfe` command line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dtfe_core::analytic::{
    dtfe_mean_1d_poisson, dtfe_second_moment_1d_poisson, exp_integral_e1, exp_integral_e2,
};
use dtfe_core::estimators::{
    berman_diggle, dtfe_evaluate, dtfe_field, kernel_k, Bandwidth, IntensityEstimate,
};
use dtfe_core::geometry::{build_delaunay, Dim, Point, PointPattern, Window};
use dtfe_core::pointprocess::{IntensityModel, Seed};
use dtfe_core::quadrature::QuadratureSpec;
use serde::Serialize;
use serde_json::json;

use crate::config::{CorrectionSpec, ExperimentSpec, IntensitySpec, WindowSpec};
use crate::io::{self, GridRow, TessellationExport};
use crate::montecarlo::{run_experiment, sample};
use crate::verify::{run_suite, Suite, VerifyOptions};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "dtfe",
    version,
    about = "Delaunay tessellation field estimation and its moments"
)]
pub struct Cli {
    /// Cap on worker threads for Monte Carlo runs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Dtfe,
    Bd,
    Kernelk,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a Poisson pattern.
    Simulate(SimulateArgs),
    /// Delaunay tessellation of a pattern file.
    Tessellate(TessellateArgs),
    /// Evaluate an estimator on a pattern file.
    Estimate(EstimateArgs),
    /// Quadrature values of the closed-form moments.
    #[command(subcommand)]
    Analytic(AnalyticCommand),
    /// Replicated experiment described by a config file.
    Experiment(ExperimentArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ProcessArgs {
    /// Experiment config whose `process` section is used.
    #[arg(long, conflicts_with_all = ["window", "lambda"])]
    config: Option<PathBuf>,
    /// `lo,hi` on the line or `xlo,xhi,ylo,yhi` in the plane.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// `<rate>`, `constant:<rate>` or `affine1d:<a>,<b>`.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    replicate: u64,
}

#[derive(Debug, Args)]
struct TessellateArgs {
    /// Pattern CSV.
    #[arg(long)]
    input: PathBuf,
    /// Adds the window's corners as ghost points.
    #[arg(long, allow_hyphen_values = true, requires = "correction")]
    window: Option<String>,
    #[arg(long, value_enum)]
    correction: Option<CorrectionSpec>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    window: String,
    #[arg(long, value_enum, default_value = "dtfe")]
    estimator: EstimatorKind,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, value_enum, default_value = "ghost")]
    correction: CorrectionSpec,
    /// Evaluate on a grid with this many nodes per axis instead of
    /// listing the DTFE cells.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum AnalyticCommand {
    /// Mean (and optionally variance) of the 1D DTFE for a Poisson process on `[-w, w]`.
    Mean1d {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long)]
        w: f64,
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long)]
        variance: bool,
    },
    /// Table of `E1` and `E2` on a grid.
    SpecialTable {
        /// `start,stop,count`.
        #[arg(long)]
        grid: String,
        /// Space the grid geometrically.
        #[arg(long)]
        log: bool,
    },
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Writes per-replicate estimates as CSV here.
    #[arg(long)]
    dump_replicates: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the suite's replicate counts.
    #[arg(long)]
    replicates: Option<u64>,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("warning: {e}");
        }
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, Error> {
    let out = Output {
        path: cli.out.as_deref(),
        format: cli.format,
    };
    match &cli.command {
        Command::Simulate(a) => simulate(a, &out),
        Command::Tessellate(a) => tessellate(a, &out),
        Command::Estimate(a) => estimate(a, &out),
        Command::Analytic(a) => analytic(a, &out),
        Command::Experiment(a) => experiment(a, &out),
        Command::Verify(a) => verify(a, &out),
    }
}

struct Output<'a> {
    path: Option<&'a Path>,
    format: Option<Format>,
}

impl Output<'_> {
    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn writer(&self) -> Result<Box<dyn Write>, Error> {
        Ok(match self.path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(std::io::stdout().lock())),
        })
    }

    fn json<T: Serialize>(&self, value: &T) -> Result<(), Error> {
        let mut w = self.writer()?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    /// CSV can't carry metadata, so the resolved config goes to a
    /// `<out>.meta.json` sidecar when writing to a file.
    fn csv(
        &self,
        meta: &serde_json::Value,
        body: impl FnOnce(&mut dyn Write) -> Result<(), Error>,
    ) -> Result<(), Error> {
        let mut w = self.writer()?;
        body(&mut w)?;
        w.flush()?;
        if let Some(p) = self.path {
            let mut side = p.as_os_str().to_owned();
            side.push(".meta.json");
            let mut f = BufWriter::new(File::create(PathBuf::from(side))?);
            serde_json::to_writer_pretty(&mut f, meta)?;
            writeln!(f)?;
            f.flush()?;
        }
        Ok(())
    }
}

fn usage(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

fn parse_numbers(s: &str, field: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| usage(field, format!("`{t}`: {e}")))
        })
        .collect()
}

pub fn parse_window(s: &str) -> Result<WindowSpec, Error> {
    let v = parse_numbers(s, "--window")?;
    let spec = match v.as_slice() {
        [a, b] => WindowSpec {
            lo: vec![*a],
            hi: vec![*b],
        },
        [a, b, c, d] => WindowSpec {
            lo: vec![*a, *c],
            hi: vec![*b, *d],
        },
        _ => return Err(usage("--window", "expected `lo,hi` or `xlo,xhi,ylo,yhi`")),
    };
    spec.resolve()?;
    Ok(spec)
}

pub fn parse_lambda(s: &str) -> Result<IntensitySpec, Error> {
    let (kind, rest) = s.split_once(':').unwrap_or(("constant", s));
    let v = parse_numbers(rest, "--lambda")?;
    match (kind, v.as_slice()) {
        ("constant", [rate]) => Ok(IntensitySpec::Constant { rate: *rate }),
        ("affine1d" | "affine", [a, b]) => Ok(IntensitySpec::Affine1d { a: *a, b: *b }),
        _ => Err(usage(
            "--lambda",
            "expected `<rate>`, `constant:<rate>` or `affine1d:<a>,<b>`",
        )),
    }
}

fn resolve_process(p: &ProcessArgs) -> Result<(WindowSpec, IntensitySpec, Option<u64>), Error> {
    if let Some(path) = &p.config {
        let spec = ExperimentSpec::load(path)?;
        spec.validate()?;
        return Ok((spec.process.window, spec.process.intensity, Some(spec.seed)));
    }
    let window = parse_window(
        p.window
            .as_deref()
            .ok_or_else(|| usage("--window", "required without --config"))?,
    )?;
    let lambda = parse_lambda(
        p.lambda
            .as_deref()
            .ok_or_else(|| usage("--lambda", "required without --config"))?,
    )?;
    Ok((window, lambda, None))
}

fn simulate(a: &SimulateArgs, out: &Output) -> Result<i32, Error> {
    let (window_spec, lambda, config_seed) = resolve_process(&a.process)?;
    let seed = a
        .seed
        .or(config_seed)
        .ok_or_else(|| usage("--seed", "required without --config"))?;
    let window = window_spec.resolve()?;
    let model = lambda.model();
    if window.dim() == Dim::Two && matches!(lambda, IntensitySpec::Affine1d { .. }) {
        return Err(usage(
            "--lambda",
            "affine intensity is only defined on the line",
        ));
    }
    model
        .validate(&window)
        .map_err(|e| usage("--lambda", e.to_string()))?;
    let pattern = sample(&window, &model, Seed::new(seed, a.replicate))?;
    let config = json!({
        "command": "simulate",
        "window": window_spec,
        "intensity": lambda,
        "seed": seed,
        "replicate": a.replicate,
    });
    match out.format_or(Format::Csv) {
        Format::Csv => out.csv(&config, |w| io::write_pattern(w, &pattern))?,
        Format::Json => {
            let d = window.dim().get();
            out.json(&json!({
                "config": config,
                "seed": seed,
                "points": pattern.points().iter().map(|p| p[..d].to_vec()).collect::<Vec<_>>(),
            }))?
        }
    }
    Ok(EXIT_OK)
}

fn read_pattern_file(path: &Path) -> Result<PointPattern, Error> {
    io::read_pattern(File::open(path)?)
}

fn tessellate(a: &TessellateArgs, out: &Output) -> Result<i32, Error> {
    let mut pattern = read_pattern_file(&a.input)?;
    let window = a.window.as_deref().map(parse_window).transpose()?;
    if let (Some(ws), Some(CorrectionSpec::Ghost)) = (&window, a.correction) {
        let w = ws.resolve()?;
        pattern.check_within(&w)?;
        pattern = pattern.with_window_ghosts(&w);
    }
    let t = build_delaunay(&pattern)?;
    if out.format_or(Format::Json) == Format::Csv {
        return Err(usage("--format", "tessellations are written as JSON"));
    }
    out.json(&json!({
        "config": {
            "command": "tessellate",
            "input": a.input,
            "window": window,
            "correction": a.correction,
        },
        "tessellation": TessellationExport::new(&t),
    }))?;
    Ok(EXIT_OK)
}

fn grid_points(window: &Window, n: usize) -> Vec<Point> {
    let (lo, hi) = (window.lo(), window.hi());
    let node = |k: usize, i: usize| lo[k] + (hi[k] - lo[k]) * i as f64 / (n - 1) as f64;
    match window.dim() {
        Dim::One => (0..n).map(|i| [node(0, i), 0.0]).collect(),
        Dim::Two => (0..n)
            .flat_map(|j| (0..n).map(move |i| (i, j)))
            .map(|(i, j)| [node(0, i), node(1, j)])
            .collect(),
    }
}

fn estimate(a: &EstimateArgs, out: &Output) -> Result<i32, Error> {
    let window_spec = parse_window(&a.window)?;
    let window = window_spec.resolve()?;
    let pattern = read_pattern_file(&a.input)?;
    if pattern.dim() != window.dim() {
        return Err(usage("--window", "dimension differs from the pattern file"));
    }
    let h = a
        .bandwidth
        .map(|h| Bandwidth::new(h).map_err(|e| usage("--bandwidth", e.to_string())))
        .transpose()?;
    if a.estimator != EstimatorKind::Dtfe && h.is_none() {
        return Err(usage("--bandwidth", "required for kernel estimators"));
    }
    let est = dtfe_field(&pattern, &window, a.correction.into())?;
    let config = json!({
        "command": "estimate",
        "input": a.input,
        "window": window_spec,
        "estimator": a.estimator,
        "bandwidth": a.bandwidth,
        "correction": a.correction,
        "grid": a.grid,
    });
    let grid = match (a.grid, a.estimator) {
        (None, EstimatorKind::Dtfe) => None,
        (n, _) => {
            let n = n.unwrap_or(101);
            if n < 2 {
                return Err(usage("--grid", "need at least 2 nodes per axis"));
            }
            Some(evaluate_grid(&pattern, &window, &est, h, n)?)
        }
    };
    match (out.format_or(Format::Csv), grid) {
        (Format::Csv, None) => out.csv(&config, |w| io::write_field(w, &est))?,
        (Format::Csv, Some(rows)) => {
            out.csv(&config, |w| io::write_grid(w, window.dim(), &rows))?
        }
        (Format::Json, grid) => {
            let cells: Vec<_> = match est.tessellation() {
                Some(t) => est
                    .cell_values()
                    .iter()
                    .zip(t.cell_volumes())
                    .enumerate()
                    .map(|(j, (v, vol))| json!({"cell_id": j, "value": v, "volume": vol}))
                    .collect(),
                None => vec![json!({
                    "cell_id": 0,
                    "value": est.constant_value(),
                    "volume": window.volume(),
                })],
            };
            out.json(&json!({"config": config, "field": cells, "grid": grid}))?
        }
    }
    Ok(EXIT_OK)
}

fn evaluate_grid(
    pattern: &PointPattern,
    window: &Window,
    est: &IntensityEstimate,
    h: Option<Bandwidth>,
    n: usize,
) -> Result<Vec<GridRow>, Error> {
    grid_points(window, n)
        .into_iter()
        .map(|x| {
            Ok(GridRow {
                x,
                dtfe: dtfe_evaluate(est, x),
                bd: h
                    .map(|h| berman_diggle(pattern, window, x, h))
                    .transpose()?,
                kernel_k: h.map(|h| kernel_k(pattern, window, x, h)).transpose()?,
            })
        })
        .collect()
}

fn analytic(a: &AnalyticCommand, out: &Output) -> Result<i32, Error> {
    match a {
        AnalyticCommand::Mean1d {
            lambda,
            w,
            x0,
            variance,
        } => {
            let spec = parse_lambda(lambda)?;
            let model: IntensityModel = spec.model();
            let window = Window::interval(-w, *w).map_err(|e| usage("--w", e.to_string()))?;
            model
                .validate(&window)
                .map_err(|e| usage("--lambda", e.to_string()))?;
            let q = QuadratureSpec::new(1e-9, 1e-14, 4000).expect("valid quadrature spec");
            let m = dtfe_mean_1d_poisson(&model, *w, *x0, &q)?;
            let second = if *variance {
                Some(dtfe_second_moment_1d_poisson(&model, *w, *x0, &q)?.total())
            } else {
                None
            };
            let var = second.map(|s| s - m.total() * m.total());
            let config = json!({
                "command": "analytic mean1d",
                "intensity": spec,
                "w": w,
                "x0": x0,
                "variance": variance,
            });
            match out.format_or(Format::Json) {
                Format::Json => out.json(&json!({
                    "config": config,
                    "terms": {
                        "interior": m.interior,
                        "atom": m.atom,
                        "right_border": m.right_border,
                        "left_border": m.left_border,
                    },
                    "mean": m.total(),
                    "second_moment": second,
                    "variance": var,
                }))?,
                Format::Csv => out.csv(&config, |w| {
                    let mut c = csv::Writer::from_writer(w);
                    c.write_record(["quantity", "value"])?;
                    let mut rows = vec![
                        ("interior", m.interior),
                        ("atom", m.atom),
                        ("right_border", m.right_border),
                        ("left_border", m.left_border),
                        ("mean", m.total()),
                    ];
                    if let (Some(s), Some(v)) = (second, var) {
                        rows.extend([("second_moment", s), ("variance", v)]);
                    }
                    for r in rows {
                        c.serialize(r)?;
                    }
                    c.flush()?;
                    Ok(())
                })?,
            }
        }
        AnalyticCommand::SpecialTable { grid, log } => {
            let v = parse_numbers(grid, "--grid")?;
            let &[start, stop, count] = v.as_slice() else {
                return Err(usage("--grid", "expected `start,stop,count`"));
            };
            let n = count as usize;
            if n < 2 || count.fract() != 0.0 || !(start > 0.0 && stop > start) {
                return Err(usage(
                    "--grid",
                    "need 0 < start < stop and an integer count ≥ 2",
                ));
            }
            let xs: Vec<f64> = (0..n)
                .map(|k| {
                    let t = k as f64 / (n - 1) as f64;
                    if *log {
                        (start.ln() + t * (stop.ln() - start.ln())).exp()
                    } else {
                        start + t * (stop - start)
                    }
                })
                .collect();
            let rows = xs
                .iter()
                .map(|&x| Ok((x, exp_integral_e1(x)?, exp_integral_e2(x)?)))
                .collect::<Result<Vec<_>, Error>>()?;
            let config = json!({"command": "analytic special-table", "grid": grid, "log": log});
            match out.format_or(Format::Csv) {
                Format::Csv => out.csv(&config, |w| {
                    let mut c = csv::Writer::from_writer(w);
                    c.write_record(["x", "E1", "E2"])?;
                    for r in &rows {
                        c.serialize(r)?;
                    }
                    c.flush()?;
                    Ok(())
                })?,
                Format::Json => out.json(&json!({
                    "config": config,
                    "rows": rows.iter().map(|(x, e1, e2)| json!({"x": x, "E1": e1, "E2": e2})).collect::<Vec<_>>(),
                }))?,
            }
        }
    }
    Ok(EXIT_OK)
}

fn experiment(a: &ExperimentArgs, out: &Output) -> Result<i32, Error> {
    let mut spec = ExperimentSpec::load(&a.config)?;
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    let report = run_experiment(&spec, a.dump_replicates.is_some())?;
    if let (Some(path), Some(values)) = (&a.dump_replicates, &report.replicate_values) {
        io::write_replicates(BufWriter::new(File::create(path)?), values)?;
    }
    if out.format_or(Format::Json) == Format::Csv {
        let config = serde_json::to_value(&report.config)?;
        out.csv(&json!({"config": config, "seed": report.seed}), |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["x0", "mean", "variance", "se_mean", "se_variance"])?;
            for p in &report.points {
                let x0 =
                    p.x0.iter()
                        .map(f64::to_string)
                        .collect::<Vec<_>>()
                        .join(" ");
                let m = p.moments;
                c.serialize((x0, m.mean, m.variance, m.se_mean, m.se_variance))?;
            }
            c.flush()?;
            Ok(())
        })?;
    } else {
        out.json(&report)?;
    }
    Ok(EXIT_OK)
}

fn verify(a: &VerifyArgs, out: &Output) -> Result<i32, Error> {
    let mut options = VerifyOptions::default();
    if let Some(s) = a.seed {
        options.seed = s;
    }
    options.replicates = a.replicates;
    if options.replicates.is_some_and(|r| r < 2) {
        return Err(usage("--replicates", "need at least 2"));
    }
    let report = run_suite(a.suite, options)?;
    if out.format_or(Format::Json) == Format::Csv {
        out.csv(
            &json!({"suite": report.suite, "options": report.options}),
            |w| {
                let mut c = csv::Writer::from_writer(w);
                c.write_record(["name", "target", "estimate", "tolerance", "se", "pass"])?;
                for k in &report.checks {
                    c.serialize((&k.name, k.target, k.estimate, k.tolerance, k.se, k.pass))?;
                }
                c.flush()?;
                Ok(())
            },
        )?;
    } else {
        out.json(&report)?;
    }
    for k in &report.checks {
        eprintln!("{} {}", if k.pass { "PASS" } else { "FAIL" }, k.name);
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_TOLERANCE })
}
