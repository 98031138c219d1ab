//! Command-line front end. Every command prints `key=value` lines.
//!
//! Exit codes: 0 success, 1 bad input or config, 2 reducible matrix,
//! 3 numerical failure or a violated acceptance threshold.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::boyd::{compute_norm, PowerOptions};
use crate::diagnostics::{
    almost_regular, check_irreducible, default_delta, k_hat, maximizer_bound, well_balanced_sampled, RegularityReport,
};
use crate::ensembles::{epsilon_n, EnsembleSpec};
use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::mtx::read_matrix_market_file;
use crate::params::NormParams;
use crate::report::FlatReport;
use crate::spectral::{check_bounds, EntryMoments};
use crate::stats::{derivative_check, grothendieck_mr, run_clt_experiment, write_csv, CltOptions, CltSummary, Mode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_REDUCIBLE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const THREADS_ENV: &str = "OPNORM_THREADS";

#[derive(Parser, Debug)]
#[command(name = "opnorm", version, about = "r→p operator norms of symmetric nonnegative matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute ‖A‖_{r→p} for a Matrix Market file.
    Norm {
        #[command(flatten)]
        common: CommonArgs,
        /// Also print the maximizing vector.
        #[arg(long)]
        dump_maximizer: bool,
    },
    /// Monte Carlo experiment on the standardized norm of a random ensemble.
    Clt {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Regularity, maximizer and spectral reports for one matrix.
    Diagnose {
        #[command(flatten)]
        common: CommonArgs,
        /// Use μ(J−I) of this size instead of a file.
        #[arg(long)]
        mean_matrix: Option<usize>,
        #[arg(long)]
        mu: Option<f64>,
        /// Random subsets for the well-balancedness check.
        #[arg(long)]
        subsets: Option<usize>,
    },
    /// Grothendieck value M_r(A) = max xᵀAx over the unit r-ball.
    Grothendieck {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Finite-difference derivatives of η at μ(J−I).
    Derivcheck {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
    },
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "r")]
    r: Option<f64>,
    #[arg(long = "p")]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, value_parser = ["hom", "inhom"])]
    mode: Option<String>,
}

/// Limits checked after a Monte Carlo run. Only a `thresholds` block that is
/// present in the config is checked; omitted limits take the default values
/// and an explicit `null` switches a limit off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub max_abs_mean: Option<f64>,
    pub max_variance_error: Option<f64>,
    pub min_ks_pvalue: Option<f64>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { max_abs_mean: Some(0.15), max_variance_error: Some(0.3), min_ks_pvalue: Some(0.01) }
    }
}

impl Thresholds {
    /// Names of the violated limits.
    pub fn violations(&self, summary: &CltSummary) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.max_abs_mean.is_some_and(|m| !(summary.mean.abs() <= m)) {
            out.push("max_abs_mean");
        }
        if self.max_variance_error.is_some_and(|m| !((summary.variance - 2.0).abs() <= m)) {
            out.push("max_variance_error");
        }
        if self.min_ks_pvalue.is_some_and(|m| !(summary.ks_pvalue > m)) {
            out.push("min_ks_pvalue");
        }
        out
    }
}

/// Structured run configuration. Every field is optional so one file can
/// serve several commands.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub matrix: Option<PathBuf>,
    pub ensemble: Option<EnsembleSpec>,
    pub r: Option<f64>,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub mode: Option<Mode>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub out: Option<PathBuf>,
    /// Fill the `lambda_big2` CSV column (default true).
    pub lambda_big2: Option<bool>,
    pub thresholds: Option<Thresholds>,
    pub n: Option<usize>,
    pub mu: Option<f64>,
    pub h: Option<f64>,
    pub subsets: Option<usize>,
}

impl RunConfig {
    /// Parses JSON, reporting the path of the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::InvalidParameter(format!("config field `{path}`: {}", e.inner()))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    fn merge(mut self, args: &CommonArgs) -> Result<Self> {
        macro_rules! over {
            ($($f:ident),*) => { $( if args.$f.is_some() { self.$f = args.$f.clone(); } )* };
        }
        over!(matrix, r, p, seed, replicates, tol, max_iter, out);
        if let Some(mode) = &args.mode {
            self.mode = Some(mode.parse()?);
        }
        Ok(self)
    }

    fn params(&self) -> Result<NormParams> {
        match (self.r, self.p) {
            (Some(r), Some(p)) => NormParams::new(r, p),
            _ => Err(Error::InvalidParameter("both --r and --p are required".into())),
        }
    }

    fn power(&self) -> Result<PowerOptions> {
        let mut opts = PowerOptions::default();
        if let Some(tol) = self.tol {
            opts.tol = tol;
        }
        if let Some(m) = self.max_iter {
            opts.max_iter = m;
        }
        opts.validate()?;
        Ok(opts)
    }

    fn matrix(&self) -> Result<SymMatrix> {
        match &self.matrix {
            Some(path) => read_matrix_market_file(path),
            None => Err(Error::InvalidParameter("--matrix is required".into())),
        }
    }

    fn ensemble(&self) -> Result<EnsembleSpec> {
        let mut spec = self
            .ensemble
            .clone()
            .ok_or_else(|| Error::InvalidParameter("config field `ensemble` is required".into()))?;
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Writes `bytes` to a temporary sibling of `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::InvalidParameter(format!("bad output path {}", path.display())))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp-{}", std::process::id()));
    let tmp = dir.join(tmp_name);
    let result = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Reducible(_) | Error::ReplicateReducible { .. } => EXIT_REDUCIBLE,
        Error::NoConvergence { .. } | Error::Degenerate(_) => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_INPUT;
    }
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            if let Error::Reducible(w) = &e {
                let _ = writeln!(out, "irreducible=false\nwitness={w}");
            }
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::InvalidParameter(format!("{THREADS_ENV} must be a positive integer (got {raw:?})")))?;
    // A second call in the same process keeps the first pool, which is fine.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn config_for(common: &CommonArgs) -> Result<RunConfig> {
    let base = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    base.merge(common)
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Norm { common, dump_maximizer } => cmd_norm(&config_for(&common)?, dump_maximizer, out),
        Command::Clt { common } => cmd_clt(&config_for(&common)?, out),
        Command::Diagnose { common, mean_matrix, mu, subsets } => {
            let mut cfg = config_for(&common)?;
            cfg.mu = mu.or(cfg.mu);
            cfg.n = mean_matrix.or(cfg.n);
            cfg.subsets = subsets.or(cfg.subsets);
            cmd_diagnose(&cfg, mean_matrix.is_some(), out)
        }
        Command::Grothendieck { common } => cmd_grothendieck(&config_for(&common)?, out),
        Command::Derivcheck { common, n, mu, h } => {
            let mut cfg = config_for(&common)?;
            cfg.n = n.or(cfg.n);
            cfg.mu = mu.or(cfg.mu);
            cfg.h = h.or(cfg.h);
            cmd_derivcheck(&cfg, out)
        }
    }
}

fn kv(out: &mut dyn Write, key: &str, value: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "{key}={value}")?;
    Ok(())
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn cmd_norm(cfg: &RunConfig, dump_maximizer: bool, out: &mut dyn Write) -> Result<i32> {
    let params = cfg.params()?;
    let opts = cfg.power()?;
    let a = cfg.matrix()?;
    let res = compute_norm(&a, &params, &opts)?;
    kv(out, "gamma", format!("{:.10}", res.gamma))?;
    kv(out, "residual", format!("{:e}", res.residual))?;
    kv(out, "iterations", res.iterations)?;
    kv(out, "n", a.n())?;
    kv(out, "r", params.r())?;
    kv(out, "p", params.p())?;
    if dump_maximizer {
        kv(out, "v", join(&res.v))?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_clt(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let spec = cfg.ensemble()?;
    let params = cfg.params()?;
    let replicates = cfg.replicates.ok_or_else(|| Error::InvalidParameter("replicates is required".into()))?;
    let mode = cfg.mode.unwrap_or_default();
    let options = CltOptions { power: cfg.power()?, lambda_big2: cfg.lambda_big2.unwrap_or(true), ..CltOptions::default() };
    let prefix = cfg.out.clone().unwrap_or_else(|| PathBuf::from("clt"));
    let run = run_clt_experiment(&spec, &params, replicates, mode, &options)?;

    let mut csv = Vec::new();
    write_csv(&run.records, &mut csv)?;
    let csv_path = with_suffix(&prefix, "csv");
    let json_path = with_suffix(&prefix, "json");
    write_atomic(&csv_path, &csv)?;
    let json = serde_json::to_vec_pretty(&run.summary).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    write_atomic(&json_path, &json)?;

    let s = &run.summary;
    kv(out, "replicates", s.replicates)?;
    kv(out, "mean", s.mean)?;
    kv(out, "variance", s.variance)?;
    kv(out, "ks_distance", s.ks_distance)?;
    kv(out, "ks_pvalue", s.ks_pvalue)?;
    kv(out, "centering", s.centering)?;
    kv(out, "scaling", s.scaling)?;
    kv(out, "observed_shift", s.observed_shift)?;
    kv(out, "predicted_shift", s.predicted_shift)?;
    kv(out, "max_eta_gap", s.max_eta_gap)?;
    kv(out, "resamples", s.resamples)?;
    kv(out, "csv", csv_path.display())?;
    kv(out, "summary", json_path.display())?;
    if let Some(t) = &cfg.thresholds {
        let violated = t.violations(s);
        kv(out, "thresholds_ok", violated.is_empty())?;
        if !violated.is_empty() {
            kv(out, "violated", violated.join(","))?;
            return Ok(EXIT_NUMERICAL);
        }
    }
    Ok(EXIT_OK)
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn cmd_diagnose(cfg: &RunConfig, mean_matrix: bool, out: &mut dyn Write) -> Result<i32> {
    let params = cfg.params()?;
    let opts = cfg.power()?;
    let (a, mu, sigma2, diag) = if mean_matrix {
        let mu = cfg.mu.ok_or_else(|| Error::InvalidParameter("--mu is required with --mean-matrix".into()))?;
        (SymMatrix::mean_matrix(cfg.n.unwrap_or(0), mu)?, mu, 0.0, (0.0, 0.0))
    } else if cfg.matrix.is_some() {
        let a = cfg.matrix()?;
        let (m, v) = a.off_diagonal_moments();
        let n = a.n() as f64;
        let dmean = (0..a.n()).map(|i| a.get(i, i)).sum::<f64>() / n;
        let dvar = (0..a.n()).map(|i| (a.get(i, i) - dmean).powi(2)).sum::<f64>() / n;
        (a, cfg.mu.unwrap_or(m), v, (dmean, dvar))
    } else {
        let spec = cfg.ensemble()?;
        let diag = spec.diagonal.map_or((0.0, 0.0), |d| (d.mean, d.variance));
        (spec.sample()?, spec.mu, spec.sigma2()?, diag)
    };
    let n = a.n();
    kv(out, "n", n)?;
    kv(out, "mu", mu)?;
    match check_irreducible(&a) {
        Ok(()) => kv(out, "irreducible", true)?,
        Err(w) => {
            kv(out, "irreducible", false)?;
            kv(out, "witness", &w)?;
        }
    }

    let k = k_hat(&a);
    let eps = epsilon_n(n, mu, k);
    let regular = almost_regular(&a, mu, eps)?;
    let delta = default_delta(n, mu, eps, k);
    let balance = well_balanced_sampled(&a, mu, eps, delta, cfg.subsets.unwrap_or(200), cfg.seed.unwrap_or(0))?;
    out.write_all(RegularityReport::new(regular, &balance, k).to_kv_block().as_bytes())?;

    let res = match compute_norm(&a, &params, &opts) {
        Ok(res) => res,
        Err(Error::Reducible(_)) => return Ok(EXIT_REDUCIBLE),
        Err(e) => return Err(e),
    };
    kv(out, "gamma", res.gamma)?;
    out.write_all(maximizer_bound(&a, &params, &res, mu, k)?.to_kv_block().as_bytes())?;
    if n >= 2 {
        let moments = EntryMoments { mu, sigma2, diag_mean: diag.0, diag_var: diag.1 };
        out.write_all(check_bounds(&a, &params, &res, moments)?.to_kv_block().as_bytes())?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_grothendieck(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let r = cfg.r.ok_or_else(|| Error::InvalidParameter("--r is required".into()))?;
    let opts = cfg.power()?;
    if !(r >= 2.0) {
        return Err(Error::InvalidParameter(format!("r must be ≥ 2 (r = {r})")));
    }
    let a = cfg.matrix()?;
    kv(out, "m_r", format!("{:.10}", grothendieck_mr(&a, r, &opts)?))?;
    kv(out, "r", r)?;
    Ok(EXIT_OK)
}

pub fn cmd_derivcheck(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let params = cfg.params()?;
    let n = cfg.n.unwrap_or(200);
    let mu = cfg.mu.unwrap_or(0.5);
    let h = cfg.h.unwrap_or(1e-4);
    let rep = derivative_check(n, mu, &params, h)?;
    kv(out, "n", n)?;
    kv(out, "mu", mu)?;
    kv(out, "h", h)?;
    out.write_all(rep.to_kv_block().as_bytes())?;
    Ok(EXIT_OK)
}
