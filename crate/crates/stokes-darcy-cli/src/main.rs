//! Command-line front end: pick a manufactured example, a degree, and a level
//! range; run the convergence study; emit the error table as CSV or Markdown,
//! optionally with per-DOF field dumps. A key=value config file can override
//! the built-in defaults; explicit flags win over the file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::Parser;

use stokes_darcy::system::{CaseCoefficients, Solution, SolveReport};
use stokes_darcy::verification::{
    case_by_name, convergence_study_with, ConvergenceTable, DEFAULT_DOF_BUDGET,
};
use stokes_darcy::wg_stokes::DegreeProfile;

#[derive(Parser, Debug)]
#[command(
    name = "stokes-darcy",
    about = "Convergence studies for the coupled Stokes-Darcy solver"
)]
struct Cli {
    /// Manufactured example to run (1 or 2)
    #[arg(long)]
    example: Option<u32>,

    /// Polynomial degree k of the coupled P_k pair (1 to 4)
    #[arg(long)]
    degree: Option<usize>,

    /// Inclusive mesh level range, e.g. 4..7 (level 1 is four triangles)
    #[arg(long)]
    levels: Option<String>,

    /// Fluid viscosity
    #[arg(long, allow_negative_numbers = true)]
    nu: Option<f64>,

    /// Interface slip coefficient
    #[arg(long, allow_negative_numbers = true)]
    bjs: Option<f64>,

    /// Permeability
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,

    /// Table format: csv or markdown
    #[arg(long)]
    format: Option<String>,

    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Write per-DOF field dumps, one file per level
    #[arg(long)]
    dump_fields: bool,

    /// key=value file overriding the built-in defaults
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Markdown,
}

impl Format {
    fn parse(s: &str) -> anyhow::Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            other => bail!("unknown format {other:?} (expected csv or markdown)"),
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
struct RunConfig {
    example: u32,
    degree: usize,
    levels: (u32, u32),
    nu: f64,
    bjs: f64,
    kappa: f64,
    format: Format,
    out: Option<PathBuf>,
    dump_fields: bool,
    budget: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            example: 1,
            degree: 1,
            levels: (1, 4),
            nu: 1.0,
            bjs: 1.0,
            kappa: 1.0,
            format: Format::Markdown,
            out: None,
            dump_fields: false,
            budget: DEFAULT_DOF_BUDGET,
        }
    }
}

fn parse_levels(s: &str) -> anyhow::Result<(u32, u32)> {
    let (a, b) = match s.split_once("..=").or_else(|| s.split_once("..")) {
        Some((a, b)) => (a, b),
        None => (s, s),
    };
    let lo: u32 = a.trim().parse().context("level range start")?;
    let hi: u32 = b.trim().parse().context("level range end")?;
    Ok((lo, hi))
}

fn apply_kv(cfg: &mut RunConfig, key: &str, val: &str) -> anyhow::Result<()> {
    match key {
        "example" => cfg.example = val.parse()?,
        "degree" => cfg.degree = val.parse()?,
        "levels" => cfg.levels = parse_levels(val)?,
        "nu" => cfg.nu = val.parse()?,
        "bjs" => cfg.bjs = val.parse()?,
        "kappa" => cfg.kappa = val.parse()?,
        "format" => cfg.format = Format::parse(val)?,
        "out" => cfg.out = Some(PathBuf::from(val)),
        "dump_fields" => cfg.dump_fields = val.parse()?,
        "budget" => cfg.budget = val.parse()?,
        other => bail!("unknown config key {other:?}"),
    }
    Ok(())
}

fn build_config(cli: Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, val) = line
                .split_once('=')
                .with_context(|| format!("config line {} is not key=value", lineno + 1))?;
            apply_kv(&mut cfg, key.trim(), val.trim())
                .with_context(|| format!("config line {}", lineno + 1))?;
        }
    }
    if let Some(v) = cli.example {
        cfg.example = v;
    }
    if let Some(v) = cli.degree {
        cfg.degree = v;
    }
    if let Some(v) = &cli.levels {
        cfg.levels = parse_levels(v)?;
    }
    if let Some(v) = cli.nu {
        cfg.nu = v;
    }
    if let Some(v) = cli.bjs {
        cfg.bjs = v;
    }
    if let Some(v) = cli.kappa {
        cfg.kappa = v;
    }
    if let Some(v) = &cli.format {
        cfg.format = Format::parse(v)?;
    }
    if let Some(v) = cli.out {
        cfg.out = Some(v);
    }
    if cli.dump_fields {
        cfg.dump_fields = true;
    }

    if !(cfg.example == 1 || cfg.example == 2) {
        bail!("--example must be 1 or 2, got {}", cfg.example);
    }
    if !(1..=4).contains(&cfg.degree) {
        bail!("--degree must be between 1 and 4, got {}", cfg.degree);
    }
    if cfg.levels.0 < 1 || cfg.levels.0 > cfg.levels.1 {
        bail!(
            "--levels must be a nonempty range starting at 1 or above, got {}..{}",
            cfg.levels.0,
            cfg.levels.1
        );
    }
    if !(cfg.nu > 0.0) {
        bail!("--nu must be positive, got {}", cfg.nu);
    }
    if cfg.bjs < 0.0 {
        bail!("--bjs must be nonnegative, got {}", cfg.bjs);
    }
    if !(cfg.kappa > 0.0) {
        bail!("--kappa must be positive, got {}", cfg.kappa);
    }
    Ok(cfg)
}

fn dump_path(cfg: &RunConfig, level: u32) -> PathBuf {
    let name = format!(
        "fields-example{}-p{}-level{}.txt",
        cfg.example, cfg.degree, level
    );
    match cfg.out.as_deref().and_then(Path::parent) {
        Some(dir) if !dir.as_os_str().is_empty() => dir.join(name),
        _ => PathBuf::from(name),
    }
}

fn write_fields(path: &Path, sol: &Solution) -> anyhow::Result<()> {
    let mut text = String::new();
    let mut block = |label: &str, vecs: &[nalgebra::DVector<f64>]| {
        for (slot, v) in vecs.iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                let _ = writeln!(text, "{label} {slot} {i} {x:.17e}");
            }
        }
    };
    block("us_cell", &sol.u_s.cell);
    block("us_edge", &sol.u_s.edge);
    block("ud_edge", &sol.u_d.edge);
    block("ud_int", &sol.u_d.interior);
    block("ps", &sol.p_s);
    block("pd", &sol.p_d);
    for (i, x) in sol.lambda.iter().enumerate() {
        let _ = writeln!(text, "lambda 0 {i} {x:.17e}");
    }
    let _ = writeln!(text, "mean_multiplier 0 0 {:.17e}", sol.mean_multiplier);
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn report_line(level: u32, r: &SolveReport) -> String {
    format!(
        "{{\"level\": {level}, \"dofs\": {}, \"nnz\": {}, \"residual\": {:.3e}, \"seconds\": {:.3}}}",
        r.n_total, r.nnz, r.rel_residual, r.seconds
    )
}

fn run(cfg: &RunConfig) -> anyhow::Result<ConvergenceTable> {
    let coeffs = CaseCoefficients {
        nu: cfg.nu,
        c_bjs: cfg.bjs,
        kappa: cfg.kappa,
    };
    let name = if cfg.example == 1 {
        "example-1"
    } else {
        "example-2"
    };
    let case = case_by_name(name, coeffs)?;
    let profile = DegreeProfile::standard(cfg.degree)?;

    let mut dump_err: Option<anyhow::Error> = None;
    let table = convergence_study_with(
        &case,
        &profile,
        cfg.levels.0..=cfg.levels.1,
        cfg.budget,
        |level, _sys, sol, report| {
            eprintln!("{}", report_line(level, report));
            if cfg.dump_fields && dump_err.is_none() {
                if let Err(e) = write_fields(&dump_path(cfg, level), sol) {
                    dump_err = Some(e);
                }
            }
        },
    )?;
    if let Some(e) = dump_err {
        return Err(e);
    }

    let text = match cfg.format {
        Format::Csv => table.csv(),
        Format::Markdown => table.markdown(),
    };
    match &cfg.out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(table)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(table) => {
            if table.reports.iter().all(|r| r.rel_residual <= 1e-10) {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: a level exceeded the 1e-10 residual tolerance");
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
