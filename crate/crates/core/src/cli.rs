//! Command-line front end. [`run`] parses arguments, executes one subcommand
//! and returns the process exit code: 0 on success (and convergence), 2 when
//! `segment` exhausts its iteration budget, 1 on any error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use toml::{Table, Value};

use crate::config::{self, Input, RunConfig};
use crate::error::{Error, Result};
use crate::evolve::{run_model, Model, ModelParams};
use crate::grid::{load_image, mask_from_phi, save_image, ScalarField, SegMask};
use crate::metrics::{evaluate, MetricPair};
use crate::noise::{add_noise, NoiseKind, NoiseSpec};
use crate::synth::{generate, Suite, SynthSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

pub const BENCH_HEADER: &str = "case,model,dsc,js,iterations,seconds";

#[derive(Debug, Parser)]
#[command(name = "hzspf", version, about = "Hybrid signed-pressure-function active contours")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment one image (or one synthetic case) with one model.
    Segment(SegmentArgs),
    /// Render synthetic scenes with their ground truth.
    Synth(SynthArgs),
    /// Add seeded noise to an image.
    Noise(NoiseArgs),
    /// Run models over a synthetic suite and tabulate Dice/Jaccard scores.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// TOML run configuration; flags below take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    /// Grayscale PGM (P5) or 8-bit grayscale PNG.
    #[arg(long, conflicts_with = "suite")]
    pub input: Option<PathBuf>,
    /// Reference mask; enables metrics.csv.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Segment a synthetic case instead of a file.
    #[arg(long)]
    pub suite: Option<String>,
    /// Case name within a multi-case suite (defaults to the first).
    #[arg(long, requires = "suite")]
    pub case: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override any config key, e.g. `--set alpha=12 --set init=circle:64,64,30`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    pub suite: Option<String>,
    /// TOML scene description.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output image path.
    #[arg(long)]
    pub out: PathBuf,
    /// gaussian, salt_pepper, poisson or speckle.
    #[arg(long)]
    pub kind: String,
    #[arg(long, default_value_t = 0.0)]
    pub mean: f64,
    #[arg(long, default_value_t = 0.01)]
    pub variance: f64,
    #[arg(long, default_value_t = 0.05)]
    pub density: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub suite: String,
    /// Comma-separated models; all three by default.
    #[arg(long, value_delimiter = ',')]
    pub model: Vec<String>,
    /// TOML file of model parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for bench.csv and params.toml.
    #[arg(long)]
    pub out: PathBuf,
    /// Write `NA` in the seconds column so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Segment(a) => segment(&a),
        Command::Synth(a) => synth(&a).map(|()| EXIT_OK),
        Command::Noise(a) => noise(&a).map(|()| EXIT_OK),
        Command::Bench(a) => bench(&a).map(|()| EXIT_OK),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// C-style `%.6g`: six significant digits, trailing zeros dropped.
pub fn fmt_real(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{v:.*}", (5 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_table(path: &Path) -> Result<Table> {
    config::parse_table(&read_text(path)?).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn load_mask(path: &Path) -> Result<SegMask> {
    Ok(SegMask::from_field(&load_image(path)?))
}

pub fn residuals_csv(residuals: &[f64]) -> String {
    let mut out = String::from("iteration,residual\n");
    for (i, r) in residuals.iter().enumerate() {
        let _ = writeln!(out, "{},{}", i + 1, fmt_real(*r));
    }
    out
}

pub fn metrics_csv(m: &MetricPair) -> String {
    format!("dsc,js\n{},{}\n", fmt_real(m.dsc), fmt_real(m.js))
}

/// The image with the mask boundary painted white.
pub fn overlay(image: &ScalarField, mask: &SegMask) -> Result<ScalarField> {
    image.zip_map(&mask.boundary().to_field(), |v, b| if b > 0.5 { 1.0 } else { v })
}

fn segment(args: &SegmentArgs) -> Result<i32> {
    let mut table = match &args.config {
        Some(path) => read_table(path)?,
        None => Table::new(),
    };
    let mut put = |key: &str, value: Option<String>| {
        if let Some(v) = value {
            table.insert(key.into(), Value::String(v));
        }
    };
    put("model", args.model.clone());
    put("input", args.input.as_ref().map(|p| p.display().to_string()));
    put("truth", args.truth.as_ref().map(|p| p.display().to_string()));
    put("synth", args.suite.clone());
    put("case", args.case.clone());
    put("output_dir", args.out.as_ref().map(|p| p.display().to_string()));
    if args.input.is_some() {
        table.remove("synth");
        table.remove("case");
    } else if args.suite.is_some() {
        table.remove("input");
    }
    if let Some(seed) = args.seed {
        let seed = i64::try_from(seed).map_err(|_| Error::param("seed", "too large"))?;
        table.insert("seed".into(), Value::Integer(seed));
    }
    config::apply_overrides(&mut table, args.overrides.iter().map(String::as_str))?;
    let cfg = RunConfig::from_table(table)?;

    let (image, synth_truth, seed) = match &cfg.input {
        Input::Path(path) => (load_image(path)?, None, None),
        Input::Synth { spec, .. } => {
            let (image, truth) = generate(spec)?;
            (image, Some(truth), spec.noise.map(|_| spec.seed))
        }
    };
    let truth = match &cfg.truth {
        Some(path) => Some(load_mask(path)?),
        None => synth_truth,
    };
    if let Some(t) = &truth {
        if t.dims() != image.dims() {
            return Err(Error::DimensionMismatch { left: image.dims(), right: t.dims() });
        }
    }
    cfg.params.init.resolve(image.width(), image.height())?;

    let (phi, mut report) = run_model(cfg.model, &image, &cfg.params)?;
    report.seed = seed;
    let mask = mask_from_phi(&phi);

    let dir = &cfg.output_dir;
    create_dir(dir)?;
    save_image(&mask.to_field(), dir.join("mask.pgm"))?;
    save_image(&overlay(&image, &mask)?, dir.join("overlay.pgm"))?;
    write_file(&dir.join("report.csv"), residuals_csv(&report.residuals))?;
    write_file(&dir.join("params.toml"), cfg.echo())?;
    let metrics = match &truth {
        Some(t) => {
            let m = evaluate(&mask, t)?;
            write_file(&dir.join("metrics.csv"), metrics_csv(&m))?;
            Some(m)
        }
        None => None,
    };

    let status = if report.converged { "converged" } else { "did not converge" };
    let mut line = format!("{}: {status} after {} iterations", cfg.model, report.iterations);
    if let Some(m) = metrics {
        let _ = write!(line, ", dsc={} js={}", fmt_real(m.dsc), fmt_real(m.js));
    }
    println!("{line}");
    Ok(if report.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn write_scene(dir: &Path, spec: &SynthSpec) -> Result<()> {
    let (image, truth) = generate(spec)?;
    create_dir(dir)?;
    save_image(&image, dir.join("image.pgm"))?;
    save_image(&truth.to_field(), dir.join("truth.pgm"))?;
    write_file(&dir.join("spec.toml"), spec.to_toml_string())
}

fn synth(args: &SynthArgs) -> Result<()> {
    let cases = match (&args.suite, &args.config) {
        (Some(name), _) => name.parse::<Suite>()?.cases(args.seed.unwrap_or(0)),
        (None, Some(path)) => {
            let mut spec: SynthSpec = toml::from_str(&read_text(path)?)
                .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
            if let Some(seed) = args.seed {
                spec.seed = seed;
            }
            vec![("custom".to_string(), spec)]
        }
        (None, None) => return Err(Error::param("suite", "give --suite or --config")),
    };
    for (_, spec) in &cases {
        spec.validate()?;
    }
    if let [(_, spec)] = cases.as_slice() {
        return write_scene(&args.out, spec);
    }
    for (name, spec) in &cases {
        write_scene(&args.out.join(name), spec)?;
    }
    Ok(())
}

fn noise(args: &NoiseArgs) -> Result<()> {
    let kind: NoiseKind = args.kind.parse()?;
    let spec = NoiseSpec {
        kind,
        mean: args.mean,
        variance: args.variance,
        density: args.density,
        seed: args.seed,
    };
    spec.validate()?;
    let image = load_image(&args.input)?;
    let noisy = add_noise(&image, &spec)?;
    save_image(&noisy, &args.out)?;
    let mut echo = Table::new();
    echo.insert("input".into(), Value::String(args.input.display().to_string()));
    if let Value::Table(t) = Value::try_from(spec).expect("noise specs always serialize") {
        echo.extend(t);
    }
    let echo_path = args.out.with_extension("noise.toml");
    write_file(&echo_path, toml::to_string(&echo).expect("table always serializes"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub case: String,
    pub model: Model,
    pub outcome: std::result::Result<(MetricPair, usize), String>,
    pub seconds: f64,
}

impl BenchRow {
    pub fn to_csv(&self, timing: bool) -> String {
        let seconds = if timing { fmt_real(self.seconds) } else { "NA".into() };
        match &self.outcome {
            Ok((m, iters)) => format!("{},{},{},{},{iters},{seconds}", self.case, self.model, fmt_real(m.dsc), fmt_real(m.js)),
            Err(_) => format!("{},{},NA,NA,NA,{seconds}", self.case, self.model),
        }
    }
}

/// Runs every `(case, model)` pair in parallel. Rows come back in case order,
/// then in the order `models` was given.
pub fn bench_rows(suite: Suite, models: &[Model], params: &ModelParams, seed: u64) -> Result<Vec<BenchRow>> {
    params.validate()?;
    let cases = suite.cases(seed);
    let scenes = cases
        .iter()
        .map(|(name, spec)| Ok((name.as_str(), generate(spec)?)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<_> = scenes.iter().flat_map(|scene| models.iter().map(move |&m| (scene, m))).collect();
    Ok(jobs
        .par_iter()
        .map(|((name, (image, truth)), model)| {
            let start = Instant::now();
            let outcome = run_model(*model, image, params)
                .and_then(|(phi, report)| Ok((evaluate(&mask_from_phi(&phi), truth)?, report.iterations)))
                .map_err(|e| e.to_string());
            BenchRow {
                case: name.to_string(),
                model: *model,
                outcome,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect())
}

pub fn bench_csv(rows: &[BenchRow], timing: bool) -> String {
    let mut out = format!("{BENCH_HEADER}\n");
    for row in rows {
        out.push_str(&row.to_csv(timing));
        out.push('\n');
    }
    out
}

fn bench(args: &BenchArgs) -> Result<()> {
    let suite: Suite = args.suite.parse()?;
    let models = if args.model.is_empty() {
        Model::ALL.to_vec()
    } else {
        args.model.iter().map(|m| m.parse()).collect::<Result<Vec<Model>>>()?
    };
    let mut table = match &args.config {
        Some(path) => read_table(path)?,
        None => Table::new(),
    };
    config::apply_overrides(&mut table, args.overrides.iter().map(String::as_str))?;
    let params = config::params_from_table(&table)?;

    let rows = bench_rows(suite, &models, &params, args.seed)?;
    for row in &rows {
        if let Err(e) = &row.outcome {
            eprintln!("warning: {} on {}: {e}", row.model, row.case);
        }
    }
    create_dir(&args.out)?;
    write_file(&args.out.join("bench.csv"), bench_csv(&rows, !args.no_timing))?;

    let mut echo = Table::new();
    echo.insert("suite".into(), Value::String(suite.name().into()));
    echo.insert(
        "models".into(),
        Value::Array(models.iter().map(|m| Value::String(m.name().into())).collect()),
    );
    echo.insert("seed".into(), Value::Integer(args.seed as i64));
    if let Value::Table(p) = Value::try_from(&params).expect("params always serialize") {
        echo.extend(p);
    }
    write_file(&args.out.join("params.toml"), toml::to_string(&echo).expect("table always serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_formatting_matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.5, "0.5"),
            (0.987654321, "0.987654"),
            (123456.7, "123457"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-2.5, "-2.5"),
            (0.9999999, "1"),
            (999999.5, "1e+06"),
        ];
        for (v, want) in cases {
            assert_eq!(fmt_real(v), want, "{v}");
        }
    }

    #[test]
    fn residual_csv_layout() {
        assert_eq!(residuals_csv(&[0.5, 0.001]), "iteration,residual\n1,0.5\n2,0.001\n");
    }

    #[test]
    fn failed_rows_render_as_na() {
        let row = BenchRow { case: "c".into(), model: Model::Cv, outcome: Err("x".into()), seconds: 0.1 };
        assert_eq!(row.to_csv(false), "c,cv,NA,NA,NA,NA");
        assert_eq!(row.to_csv(true), "c,cv,NA,NA,NA,0.1");
    }
}
