//! Command-line front end: configuration, batch runs and report files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::admissibility::{
    classify, default_mode, doubling_sup, Classification, ClassifyOptions, EpsilonRule, Verdict,
};
use crate::ap_condition::{ap_sup, ap_value, ApMode, ApParams};
use crate::catalog;
use crate::error::{Error, Result};
use crate::measure_engine::ball_measure;
use crate::oracle::DiscreteTree;
use crate::radial_weight::{Tolerance, WeightFunction, WeightSpec};
use crate::scan::{serialize_float, ArgMax, ScanDomain};
use crate::tree_geometry::TreeSpace;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "APTREE_THREADS";

pub const EXIT_DECIDED: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

/// Tree part of a run configuration: a catalog name or explicit weights.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branching: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<WeightSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeConfig {
    /// Full mode for `K ≥ 2`, far from the root with `c = 8` for `K = 1`.
    #[default]
    Auto,
    Full,
    Far { c: f64 },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

fn default_p() -> f64 {
    2.0
}

/// A single JSON document describing one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub tree: TreeConfig,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub mode: ModeConfig,
    #[serde(default)]
    pub domain: ScanDomain,
    #[serde(default)]
    pub tolerances: Tolerance,
    #[serde(default)]
    pub epsilon: EpsilonRule,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn space(&self) -> Result<TreeSpace> {
        let t = &self.tree;
        match (&t.catalog, t.branching, &t.lambda, &t.mu) {
            (Some(name), None, None, None) => catalog::lookup(name)?.space(),
            (None, Some(k), Some(lambda), Some(mu)) => {
                TreeSpace::new(k, WeightFunction::from_spec(lambda)?, WeightFunction::from_spec(mu)?)
            }
            _ => Err(Error::Config(
                "tree needs either `catalog` alone or all of `branching`, `lambda`, `mu`".into(),
            )),
        }
    }

    pub fn resolve_mode(&self, branching: u32) -> ApMode {
        match self.mode {
            ModeConfig::Auto => default_mode(branching),
            ModeConfig::Full => ApMode::Full,
            ModeConfig::Far { c } => ApMode::far(c),
        }
    }

    pub fn classify_options(&self, branching: u32) -> ClassifyOptions {
        ClassifyOptions {
            mode: Some(self.resolve_mode(branching)),
            domain: self.domain.clone(),
            tol: self.tolerances,
            seed: self.seed,
            epsilon: self.epsilon,
            ..ClassifyOptions::default()
        }
    }
}

/// The analyse report written as JSON.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub config: RunConfig,
    pub branching: u32,
    pub lambda: WeightSpec,
    pub mu: WeightSpec,
    pub classification: Classification,
    #[serde(serialize_with = "serialize_float")]
    pub c_a_estimate: f64,
    pub argmax: Option<ArgMax>,
    pub evidence_agrees: bool,
    pub verdict: Verdict,
    pub wall_clock_seconds: f64,
    pub threads: usize,
}

pub fn analyze(config: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let space = config.space()?;
    let options = config.classify_options(space.branching());
    let verdict = classify(&space, config.p, &options)?;
    Ok(Report {
        version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        branching: space.branching(),
        lambda: space.lambda().spec().clone(),
        mu: space.mu().spec().clone(),
        classification: verdict.classification,
        c_a_estimate: verdict.ap_scan.estimate,
        argmax: verdict.ap_scan.argmax,
        evidence_agrees: verdict.evidence_agrees,
        verdict,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
    })
}

/// One CSV row of a scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub t: f64,
    pub r: f64,
    pub value: f64,
    pub kind: &'static str,
}

/// `A_p` (or `A_1`) cells followed by doubling cells.
pub fn scan_rows(config: &RunConfig) -> Result<Vec<ScanRow>> {
    let space = config.space()?;
    let params = ApParams::new(config.p, config.resolve_mode(space.branching()))?;
    let ap = ap_sup(&space, &params, &config.domain, &config.tolerances)?;
    let doubling = doubling_sup(&space, &config.domain, &config.tolerances)?;
    let kind = if config.p == 1.0 { "a1" } else { "ap" };
    let mut rows: Vec<ScanRow> = ap
        .cells
        .iter()
        .map(|c| ScanRow {
            t: c.t,
            r: c.r,
            value: c.value,
            kind,
        })
        .collect();
    rows.extend(doubling.cells.iter().map(|c| ScanRow {
        t: c.t,
        r: c.r,
        value: c.value,
        kind: "doubling",
    }));
    Ok(rows)
}

pub fn write_csv(rows: &[ScanRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Discrete versus continuum values at one point.
#[derive(Debug, Clone, Serialize)]
pub struct OracleComparison {
    pub depth: u32,
    pub subdivisions: u32,
    pub segments: usize,
    pub t: f64,
    pub r: f64,
    pub p: f64,
    pub ball_discrete: f64,
    pub ball_continuum: f64,
    pub ap_discrete: f64,
    #[serde(serialize_with = "serialize_float")]
    pub ap_continuum: f64,
    pub truncated: bool,
}

pub fn oracle_compare(config: &RunConfig, depth: u32, subdivisions: u32, t: f64, r: f64) -> Result<OracleComparison> {
    let space = config.space()?;
    let tree = DiscreteTree::build(&space, depth, subdivisions)?;
    let v = tree.node_at(t)?;
    let ball = tree.ball_measure(v, r);
    let ap = tree.ap_value(config.p, v, r)?;
    Ok(OracleComparison {
        depth,
        subdivisions,
        segments: tree.segment_count(),
        t,
        r,
        p: config.p,
        ball_discrete: ball.value,
        ball_continuum: ball_measure(&space, t, r, &config.tolerances)?,
        ap_discrete: ap.value,
        ap_continuum: ap_value(&space, config.p, t, r, &config.tolerances)?,
        truncated: ball.truncated || ap.truncated,
    })
}

#[derive(Debug, Parser)]
#[command(name = "aptree", version, about = "Ap-type conditions, doubling and Poincaré evidence on weighted regular trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Full,
    Far,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Far-from-root constant, used with `--mode far`.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a weighted tree and write a JSON report.
    Analyze(AnalyzeArgs),
    /// Write every scanned cell as CSV.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in weighted trees.
    Catalog {
        #[arg(long)]
        json: bool,
    },
    #[command(hide = true)]
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 12)]
        depth: u32,
        #[arg(long, default_value_t = 16)]
        subdivisions: u32,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        r: f64,
    },
}

fn apply_overrides(config: &mut RunConfig, args: &AnalyzeArgs) -> Result<()> {
    if let Some(p) = args.p {
        config.p = p;
    }
    match (args.mode, args.c) {
        (Some(ModeArg::Far), Some(c)) => config.mode = ModeConfig::Far { c },
        (Some(ModeArg::Far), None) => {
            if !matches!(config.mode, ModeConfig::Far { .. }) {
                return Err(Error::Config("--mode far needs --c".into()));
            }
        }
        (Some(ModeArg::Auto), None) => config.mode = ModeConfig::Auto,
        (Some(ModeArg::Full), None) => config.mode = ModeConfig::Full,
        (Some(_), Some(_)) => return Err(Error::Config("--c only applies to --mode far".into())),
        (None, Some(c)) => match config.mode {
            ModeConfig::Far { .. } => config.mode = ModeConfig::Far { c },
            _ => return Err(Error::Config("--c needs --mode far".into())),
        },
        (None, None) => {}
    }
    if let Some(out) = &args.out {
        config.output.report = Some(out.clone());
    }
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Apply the thread override from the environment, if any.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

/// Run a parsed command and return the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    configure_threads()?;
    match cli.command {
        Command::Analyze(args) => {
            let mut config = RunConfig::load(&args.config)?;
            apply_overrides(&mut config, &args)?;
            let report = analyze(&config)?;
            write_json(&report, config.output.report.as_deref())?;
            eprintln!(
                "{}: {:?} (C_A ≈ {})",
                args.config.display(),
                report.classification,
                report.c_a_estimate
            );
            Ok(match report.classification {
                Classification::Inconclusive => EXIT_INCONCLUSIVE,
                _ => EXIT_DECIDED,
            })
        }
        Command::Scan { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let path = out
                .or_else(|| cfg.output.csv.clone())
                .ok_or_else(|| Error::Config("scan needs --out or output.csv".into()))?;
            let rows = scan_rows(&cfg)?;
            write_csv(&rows, &path)?;
            Ok(EXIT_DECIDED)
        }
        Command::Catalog { json } => {
            if json {
                write_json(&catalog::entries(), None)?;
            } else {
                print!("{}", catalog::listing());
            }
            Ok(EXIT_DECIDED)
        }
        Command::Oracle {
            config,
            depth,
            subdivisions,
            t,
            r,
        } => {
            let cfg = RunConfig::load(&config)?;
            write_json(&oracle_compare(&cfg, depth, subdivisions, t, r)?, None)?;
            Ok(EXIT_DECIDED)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_modes() {
        let c = RunConfig::from_json(r#"{"tree": {"catalog": "lebesgue-halfline"}}"#).unwrap();
        assert_eq!(c.p, 2.0);
        assert_eq!(c.mode, ModeConfig::Auto);
        assert_eq!(c.resolve_mode(1), ApMode::far(8.0));
        let c = RunConfig::from_json(r#"{"tree": {"catalog": "power(2)"}, "mode": {"far": {"c": 0.5}}}"#).unwrap();
        assert_eq!(c.mode, ModeConfig::Far { c: 0.5 });
        let c = RunConfig::from_json(r#"{"tree": {"catalog": "binary-lebesgue"}, "mode": "full", "p": 1}"#).unwrap();
        assert_eq!(c.resolve_mode(2), ApMode::Full);
    }

    #[test]
    fn explicit_tree() {
        let c = RunConfig::from_json(
            r#"{"tree": {"branching": 2, "lambda": {"family": "constant", "value": 1},
                "mu": {"family": "power", "alpha": -1}}, "domain": {"expansions": 4}}"#,
        )
        .unwrap();
        assert_eq!(c.space().unwrap().branching(), 2);
        assert_eq!(c.domain.expansions, 4);
        assert_eq!(c.domain.t_per_decade, ScanDomain::default().t_per_decade);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::from_json(r#"{"tree": {"catalog": "x"}, "bogus": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"tree": {"catalog": "x"}, "domain": {"bogus": 1}}"#).is_err());
        let both = RunConfig::from_json(r#"{"tree": {"catalog": "lebesgue-halfline", "branching": 2}}"#).unwrap();
        assert!(both.space().is_err());
        let unknown = RunConfig::from_json(r#"{"tree": {"catalog": "nope"}}"#).unwrap();
        assert!(unknown.space().is_err());
    }
}
