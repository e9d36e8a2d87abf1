//! `framequant`: frame generation, PCM quantization, error sweeps, radial
//! integral evaluation, and the full verification checklist.

mod config;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use config::{parse_vector, FileConfig};
use framequant::experiments::{self, Regime, SweepResult};
use framequant::frames::{self, Frame};
use framequant::integrals::{self, Method2d, MethodHighD, RadialSpec};
use framequant::parallel;
use framequant::pcm;
use framequant::seqtools::{self, TorusPointSet};
use framequant::verify;
use svg::{emit_svg, Axes};

#[derive(Parser)]
#[command(name = "framequant", version, about = "PCM quantization laboratory for unit-norm tight frames")]
struct Cli {
    /// Worker thread cap (default: machine parallelism; env fallback
    /// FRAMEQUANT_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat `key = value` config file; flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a frame and certify tightness
    Frame {
        /// harmonic | funtf
        #[arg(long, default_value = "harmonic")]
        kind: String,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the frame in the text format
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quantize the analysis coefficients of a signal
    Quantize {
        /// Read a frame from the text format instead of building a harmonic one
        #[arg(long)]
        frame: Option<PathBuf>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated signal coordinates
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Reconstruction error of one signal
    Error {
        #[arg(long)]
        frame: Option<PathBuf>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Error against frame size for a fixed signal (plateau sweep)
    SweepN {
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        n_step: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Any of csv,json,svg
        #[arg(long)]
        formats: Option<String>,
    },
    /// Error against step size with redundancy tied to the regime
    SweepDelta {
        #[arg(long)]
        x: Option<String>,
        /// Comma-separated step sizes
        #[arg(long)]
        deltas: Option<String>,
        /// large | small
        #[arg(long)]
        regime: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        formats: Option<String>,
    },
    /// Root-mean-square error over a circle of signals
    AvgError {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// direct | fourier | both
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// The radial key integral by one or all routes
    Integral {
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        d: Option<usize>,
        /// quadrature | closed | analytic | all
        #[arg(long)]
        method: Option<String>,
        /// Write `method,r,delta,d,value,residual_vs_oracle` CSV rows
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Radius where the key integral vanishes
    FindRstar {
        #[arg(long)]
        delta: Option<f64>,
    },
    /// White-noise residual simulation
    WnhSim {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact torus discrepancy with Erdős–Turán bounds
    Discrepancy {
        /// File with one point per line
        #[arg(long)]
        points: Option<PathBuf>,
        /// Draw this many seeded uniform points instead
        #[arg(long)]
        random: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated K values for the bounds
        #[arg(long)]
        k: Option<String>,
    },
    /// Run the whole verification checklist
    VerifyAll {
        /// Only the `desk` profile exists
        #[arg(long)]
        profile: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for report artifacts
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        formats: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => match std::env::var("FRAMEQUANT_THREADS") {
            Ok(v) => Some(v.parse::<usize>().context("FRAMEQUANT_THREADS must be an integer")?),
            Err(_) => cfg.resolve::<usize>("threads", None, Some(0)).ok(),
        },
    };
    if let Some(t) = threads {
        parallel::set_thread_cap(t);
    }

    match cli.command {
        Command::Frame { kind, d, n, seed, out } => cmd_frame(&cfg, kind, d, n, seed, out),
        Command::Quantize { frame, d, n, x, delta } => cmd_quantize(&cfg, frame, d, n, x, delta),
        Command::Error { frame, d, n, x, delta } => cmd_error(&cfg, frame, d, n, x, delta),
        Command::SweepN { x, delta, n_min, n_max, n_step, out, formats } => {
            cmd_sweep_n(&cfg, x, delta, n_min, n_max, n_step, out, formats)
        }
        Command::SweepDelta { x, deltas, regime, out, formats } => {
            cmd_sweep_delta(&cfg, x, deltas, regime, out, formats)
        }
        Command::AvgError { n, r, delta, method, kmax, nodes } => {
            cmd_avg_error(&cfg, n, r, delta, method, kmax, nodes)
        }
        Command::Integral { r, delta, d, method, out } => cmd_integral(&cfg, r, delta, d, method, out),
        Command::FindRstar { delta } => cmd_find_rstar(&cfg, delta),
        Command::WnhSim { d, n, delta, trials, epsilon, seed, out } => {
            cmd_wnh(&cfg, d, n, delta, trials, epsilon, seed, out)
        }
        Command::Discrepancy { points, random, seed, k } => cmd_discrepancy(&cfg, points, random, seed, k),
        Command::VerifyAll { profile, seed, out, formats } => cmd_verify_all(&cfg, profile, seed, out, formats),
    }
}

// ------------------------------------------------------------------ helpers

fn load_or_build_frame(
    cfg: &FileConfig,
    frame_path: Option<PathBuf>,
    d: Option<usize>,
    n: Option<usize>,
) -> Result<Frame> {
    if let Some(path) = frame_path {
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("cannot read frame file {}", path.display()))?;
        return Ok(Frame::from_text(&text)?);
    }
    let d = cfg.resolve::<usize>("d", d, Some(2))?;
    let n = cfg.resolve::<usize>("n", n, None)?;
    Ok(frames::harmonic_frame(d, n)?)
}

fn resolve_x(cfg: &FileConfig, x: Option<String>, dim: usize) -> Result<Vec<f64>> {
    let text = match x {
        Some(t) => t,
        None => cfg
            .raw("x")
            .map(str::to_string)
            .ok_or_else(|| anyhow::anyhow!("missing required parameter 'x' (flag or config)"))?,
    };
    let v = parse_vector(&text)?;
    if v.len() != dim {
        bail!("parameter 'x' has {} coordinates but the frame dimension is {dim}", v.len());
    }
    Ok(v)
}

fn check_positive(key: &str, value: f64) -> Result<f64> {
    if !(value.is_finite() && value > 0.0) {
        bail!("parameter '{key}' must be positive and finite, got {value}");
    }
    Ok(value)
}

fn parse_formats(formats: Option<String>, cfg: &FileConfig) -> Result<Vec<String>> {
    let text = formats
        .or_else(|| cfg.raw("formats").map(str::to_string))
        .unwrap_or_else(|| "csv,json".to_string());
    let mut out = Vec::new();
    for f in text.split(',') {
        let f = f.trim().to_lowercase();
        match f.as_str() {
            "csv" | "json" | "svg" => out.push(f),
            other => bail!("parameter 'formats': unknown format '{other}' (use csv,json,svg)"),
        }
    }
    Ok(out)
}

fn write_artifact(dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, content).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn sweep_outputs(
    sweep: &SweepResult,
    json_value: &impl serde::Serialize,
    name: &str,
    out: Option<PathBuf>,
    formats: &[String],
    axes: Axes,
) -> Result<()> {
    if let Some(dir) = out {
        if formats.iter().any(|f| f == "csv") {
            write_artifact(&dir, &format!("{name}.csv"), &sweep.to_csv())?;
        }
        if formats.iter().any(|f| f == "json") {
            let mut text = serde_json::to_string_pretty(json_value)?;
            text.push('\n');
            write_artifact(&dir, &format!("{name}.json"), &text)?;
        }
        if formats.iter().any(|f| f == "svg") {
            write_artifact(&dir, &format!("{name}.svg"), &emit_svg(sweep, axes)?)?;
        }
    }
    Ok(())
}

// ------------------------------------------------------------------ commands

fn cmd_frame(
    cfg: &FileConfig,
    kind: String,
    d: Option<usize>,
    n: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<ExitCode> {
    let kind = cfg.resolve::<String>("kind", Some(kind), None)?;
    let d = cfg.resolve::<usize>("d", d, Some(2))?;
    let n = cfg.resolve::<usize>("n", n, None)?;
    let frame = match kind.as_str() {
        "harmonic" => frames::harmonic_frame(d, n)?,
        "funtf" => {
            let seed = cfg.resolve::<u64>("seed", seed, Some(verify::DEFAULT_SEED))?;
            frames::funtf_equidistributed(d, n, seed)?
        }
        other => bail!("parameter 'kind': unknown frame kind '{other}' (use harmonic|funtf)"),
    };
    let report = frames::verify_tight(&frame, frame.tight_tol());
    println!(
        "{}",
        serde_json::json!({
            "kind": kind,
            "d": frame.dim(),
            "N": frame.len(),
            "tight": report.pass,
            "residual": report.residual,
            "lambda_estimate": report.lambda_estimate,
            "tol": report.tol,
        })
    );
    if let Some(path) = out {
        std::fs::write(&path, frame.to_text())
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_quantize(
    cfg: &FileConfig,
    frame_path: Option<PathBuf>,
    d: Option<usize>,
    n: Option<usize>,
    x: Option<String>,
    delta: Option<f64>,
) -> Result<ExitCode> {
    let frame = load_or_build_frame(cfg, frame_path, d, n)?;
    let x = resolve_x(cfg, x, frame.dim())?;
    let delta = check_positive("delta", cfg.resolve::<f64>("delta", delta, None)?)?;
    let expansion = pcm::QuantizedExpansion::new(&frame, &x, delta)?;
    println!("{}", serde_json::to_string_pretty(&expansion)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_error(
    cfg: &FileConfig,
    frame_path: Option<PathBuf>,
    d: Option<usize>,
    n: Option<usize>,
    x: Option<String>,
    delta: Option<f64>,
) -> Result<ExitCode> {
    let frame = load_or_build_frame(cfg, frame_path, d, n)?;
    let x = resolve_x(cfg, x, frame.dim())?;
    let delta = check_positive("delta", cfg.resolve::<f64>("delta", delta, None)?)?;
    let (_, _, report) = pcm::reconstruct_quantized(&frame, &x, delta)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep_n(
    cfg: &FileConfig,
    x: Option<String>,
    delta: Option<f64>,
    n_min: Option<usize>,
    n_max: Option<usize>,
    n_step: Option<usize>,
    out: Option<PathBuf>,
    formats: Option<String>,
) -> Result<ExitCode> {
    let x = resolve_x(cfg, x, 2)?;
    let delta = check_positive("delta", cfg.resolve::<f64>("delta", delta, None)?)?;
    let n_min = cfg.resolve::<usize>("n_min", n_min, Some(10))?;
    let n_max = cfg.resolve::<usize>("n_max", n_max, Some(2000))?;
    let n_step = cfg.resolve::<usize>("n_step", n_step, Some(1))?;
    if n_min < 2 || n_max <= n_min || n_step == 0 {
        bail!("parameters 'n_min'/'n_max'/'n_step' must satisfy 2 ≤ n_min < n_max, n_step ≥ 1");
    }
    let ns: Vec<usize> = (n_min..=n_max).step_by(n_step).collect();
    let result = experiments::plateau_run([x[0], x[1]], delta, &ns)?;
    println!(
        "plateau_mean={:.16e} plateau_cv={:.16e} sphere_limit={:.16e} rel_gap={:.16e} pass={}",
        result.plateau.mean, result.plateau.cv, result.sphere_limit, result.rel_gap, result.pass
    );
    let formats = parse_formats(formats, cfg)?;
    sweep_outputs(&result.sweep, &result, "plateau", out, &formats, Axes::Linear)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep_delta(
    cfg: &FileConfig,
    x: Option<String>,
    deltas: Option<String>,
    regime: Option<String>,
    out: Option<PathBuf>,
    formats: Option<String>,
) -> Result<ExitCode> {
    let x = resolve_x(cfg, x, 2)?;
    let deltas_text = deltas
        .or_else(|| cfg.raw("deltas").map(str::to_string))
        .unwrap_or_else(|| "0.0625,0.03125,0.015625,0.0078125,0.00390625,0.001953125,0.0009765625".into());
    let deltas = parse_vector(&deltas_text)?;
    for &d in &deltas {
        check_positive("deltas", d)?;
    }
    let regime = match cfg
        .resolve::<String>("regime", regime, Some("large".into()))?
        .as_str()
    {
        "large" => Regime::LargeN,
        "small" => Regime::SmallN,
        other => bail!("parameter 'regime': unknown regime '{other}' (use large|small)"),
    };
    let path = frames::FramePath::harmonic(2)?;
    let result = experiments::step_scaling(&x, &path, &deltas, regime)?;
    match regime {
        Regime::LargeN => println!(
            "slope={:.16e} window=[1.35,1.65] pass={}",
            result.slope.unwrap_or(f64::NAN),
            result.pass
        ),
        Regime::SmallN => println!(
            "envelope_max={:.16e} pass={}",
            result.envelope_max.unwrap_or(f64::NAN),
            result.pass
        ),
    }
    let formats = parse_formats(formats, cfg)?;
    let name = match regime {
        Regime::LargeN => "step_scaling_large",
        Regime::SmallN => "step_scaling_small",
    };
    sweep_outputs(&result.sweep, &result, name, out, &formats, Axes::LogLog)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_avg_error(
    cfg: &FileConfig,
    n: Option<usize>,
    r: Option<f64>,
    delta: Option<f64>,
    method: Option<String>,
    kmax: Option<usize>,
    nodes: Option<usize>,
) -> Result<ExitCode> {
    let n = cfg.resolve::<usize>("n", n, None)?;
    let r = check_positive("r", cfg.resolve::<f64>("r", r, None)?)?;
    let delta = check_positive("delta", cfg.resolve::<f64>("delta", delta, None)?)?;
    let method = cfg.resolve::<String>("method", method, Some("both".into()))?;
    let kmax = cfg.resolve::<usize>("kmax", kmax, Some(60_000))?;
    let nodes = cfg.resolve::<usize>("nodes", nodes, Some(40_000))?;
    let spec = RadialSpec::new(r, delta)?;
    let direct = || -> Result<f64> {
        let frame = frames::harmonic_frame(2, n)?;
        Ok(integrals::avg_error_direct(&frame, &spec, nodes)?)
    };
    match method.as_str() {
        "direct" => println!("direct={:.16e}", direct()?),
        "fourier" => println!("fourier={:.16e}", integrals::avg_error_fourier(n, &spec, kmax)),
        "both" => {
            let a = direct()?;
            let b = integrals::avg_error_fourier(n, &spec, kmax);
            println!(
                "direct={a:.16e} fourier={b:.16e} rel_diff={:.16e}",
                (a - b).abs() / a.abs().max(f64::MIN_POSITIVE)
            );
        }
        other => bail!("parameter 'method': unknown method '{other}' (use direct|fourier|both)"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_integral(
    cfg: &FileConfig,
    r: Option<f64>,
    delta: Option<f64>,
    d: Option<usize>,
    method: Option<String>,
    out: Option<PathBuf>,
) -> Result<ExitCode> {
    let r = check_positive("r", cfg.resolve::<f64>("r", r, None)?)?;
    let delta = check_positive("delta", cfg.resolve::<f64>("delta", delta, None)?)?;
    let d = cfg.resolve::<usize>("d", d, Some(2))?;
    let method = cfg.resolve::<String>("method", method, Some("all".into()))?;
    let spec = RadialSpec::new(r, delta)?;

    let mut rows: Vec<(String, f64)> = Vec::new();
    if d == 2 {
        let run = |m: Method2d| integrals::delta_integral_2d(&spec, m).map(|v| v.value);
        match method.as_str() {
            "quadrature" => rows.push(("quadrature".into(), run(Method2d::Quadrature)?)),
            "closed" => rows.push(("closed".into(), run(Method2d::ClosedSum)?)),
            "analytic" => rows.push(("analytic".into(), run(Method2d::AnalyticSmall)?)),
            "all" => {
                rows.push(("quadrature".into(), run(Method2d::Quadrature)?));
                rows.push(("closed".into(), run(Method2d::ClosedSum)?));
                if r <= delta && delta <= 2.0 * r {
                    rows.push(("analytic".into(), run(Method2d::AnalyticSmall)?));
                }
            }
            other => bail!(
                "parameter 'method': unknown method '{other}' (use quadrature|closed|analytic|all)"
            ),
        }
    } else {
        let run = |m: MethodHighD| integrals::delta_integral_highd(&spec, d, m);
        match method.as_str() {
            "quadrature" => rows.push(("quadrature".into(), run(MethodHighD::Quadrature)?)),
            "closed" => rows.push(("closed".into(), run(MethodHighD::BreakpointSum)?)),
            "all" => {
                rows.push(("quadrature".into(), run(MethodHighD::Quadrature)?));
                rows.push(("closed".into(), run(MethodHighD::BreakpointSum)?));
            }
            "analytic" => bail!("parameter 'method': the analytic branch requires d = 2"),
            other => bail!(
                "parameter 'method': unknown method '{other}' (use quadrature|closed|all)"
            ),
        }
    }
    let oracle = rows
        .iter()
        .find(|(name, _)| name == "closed")
        .map(|(_, v)| *v)
        .unwrap_or(rows[0].1);
    let mut max_diff = 0.0_f64;
    for (name, value) in &rows {
        println!("{name}={value:.16e}");
        max_diff = max_diff.max((value - oracle).abs());
    }
    if rows.len() > 1 {
        println!("max_pairwise_diff={max_diff:.16e}");
    }
    if let Some(path) = out {
        let mut csv = String::from("method,r,delta,d,value,residual_vs_oracle\n");
        for (name, value) in &rows {
            csv.push_str(&format!(
                "{name},{r:.16e},{delta:.16e},{d},{value:.16e},{:.16e}\n",
                (value - oracle).abs()
            ));
        }
        std::fs::write(&path, csv).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_find_rstar(cfg: &FileConfig, delta: Option<f64>) -> Result<ExitCode> {
    let delta = check_positive("delta", cfg.resolve::<f64>("delta", delta, None)?)?;
    let r = integrals::find_rstar(delta)?;
    let spec = RadialSpec::new(r, delta)?;
    let residual = integrals::delta_integral_2d(&spec, Method2d::Quadrature)?.value;
    println!(
        "rstar={r:.16e} ratio={:.16e} closed_form_ratio={:.16e} integral_residual={residual:.16e}",
        r / delta,
        integrals::magic_ratio()
    );
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_wnh(
    cfg: &FileConfig,
    d: Option<usize>,
    n: Option<usize>,
    delta: Option<f64>,
    trials: Option<u64>,
    epsilon: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<ExitCode> {
    let d = cfg.resolve::<usize>("d", d, Some(2))?;
    let n = cfg.resolve::<usize>("n", n, None)?;
    let delta = check_positive("delta", cfg.resolve::<f64>("delta", delta, None)?)?;
    let trials = cfg.resolve::<u64>("trials", trials, Some(100_000))?;
    let epsilon = cfg.resolve::<f64>("epsilon", epsilon, Some(0.25))?;
    let seed = cfg.resolve::<u64>("seed", seed, Some(verify::DEFAULT_SEED))?;
    let frame = frames::harmonic_frame(d, n)?;
    let report = pcm::wnh_simulate(&frame, delta, trials, epsilon, seed)?;
    let text = serde_json::to_string_pretty(&report)?;
    println!("{text}");
    if let Some(path) = out {
        std::fs::write(&path, format!("{text}\n"))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_discrepancy(
    cfg: &FileConfig,
    points_path: Option<PathBuf>,
    random: Option<usize>,
    seed: Option<u64>,
    k: Option<String>,
) -> Result<ExitCode> {
    let points = if let Some(path) = points_path {
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("cannot read points file {}", path.display()))?;
        let values: Result<Vec<f64>, _> = text
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect();
        TorusPointSet::new(&values.context("points file must contain numbers")?)?
    } else {
        let n = cfg.resolve::<usize>("random", random, None).map_err(|_| {
            anyhow::anyhow!("missing required parameter 'points' or 'random' (flag or config)")
        })?;
        let seed = cfg.resolve::<u64>("seed", seed, Some(verify::DEFAULT_SEED))?;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        TorusPointSet::new(&values)?
    };
    let ks: Vec<u32> = match k.or_else(|| cfg.raw("k").map(str::to_string)) {
        Some(text) => {
            let parsed: Result<Vec<u32>, _> = text.split(',').map(|t| t.trim().parse()).collect();
            parsed.context("parameter 'k' must be a comma-separated list of positive integers")?
        }
        None => vec![8, 32, 128],
    };
    let report = seqtools::discrepancy_with_bounds(&points, &ks);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_all(
    cfg: &FileConfig,
    profile: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    formats: Option<String>,
) -> Result<ExitCode> {
    let profile = cfg.resolve::<String>("profile", profile, Some("desk".into()))?;
    if profile != "desk" {
        bail!("parameter 'profile': unknown profile '{profile}' (only 'desk' exists)");
    }
    let seed = cfg.resolve::<u64>("seed", seed, Some(verify::DEFAULT_SEED))?;
    let formats = parse_formats(formats, cfg)?;
    let report = verify::run_all(seed);
    for c in &report.criteria {
        println!(
            "criterion {:02} [{}] {} — {}",
            c.id,
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.details
        );
    }
    if let Some(dir) = out {
        for (name, content) in &report.artifacts {
            let wanted = match name.rsplit_once('.').map(|(_, ext)| ext) {
                Some("csv") => formats.iter().any(|f| f == "csv"),
                Some("json") => formats.iter().any(|f| f == "json"),
                _ => true,
            };
            if wanted {
                write_artifact(&dir, name, content)?;
            }
        }
        if formats.iter().any(|f| f == "svg") {
            for (name, content) in &report.artifacts {
                if let Some(stem) = name.strip_suffix(".csv") {
                    if let Some(sweep) = sweep_from_csv(stem, content) {
                        let axes = if stem == "plateau" { Axes::Linear } else { Axes::LogLog };
                        if let Ok(svg) = emit_svg(&sweep, axes) {
                            write_artifact(&dir, &format!("{stem}.svg"), &svg)?;
                        }
                    }
                }
            }
        }
        let summary = serde_json::json!({
            "seed": report.seed,
            "profile": profile,
            "criteria": report.criteria,
            "all_passed": report.all_passed,
        });
        let mut text = serde_json::to_string_pretty(&summary)?;
        text.push('\n');
        write_artifact(&dir, "verify_report.json", &text)?;
    }
    println!("verify-all: {}", if report.all_passed { "PASS" } else { "FAIL" });
    Ok(if report.all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn sweep_from_csv(name: &str, csv: &str) -> Option<SweepResult> {
    let mut rows = Vec::new();
    for line in csv.lines().skip(1) {
        let (a, b) = line.split_once(',')?;
        rows.push((a.parse().ok()?, b.parse().ok()?));
    }
    if rows.len() < 2 {
        return None;
    }
    Some(SweepResult::new(name, None, serde_json::json!({}), rows))
}
