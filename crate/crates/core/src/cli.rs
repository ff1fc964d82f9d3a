//! Command-line configuration and dispatch.
//!
//! Settings are resolved in three layers: per-command defaults, then an
//! optional `key = value` file given with `--config`, then flags. Keys are
//! the long flag names without dashes in front (`n-files`, `chunk-len`,
//! ...). List-valued keys take comma-separated values. The fully resolved
//! configuration is echoed to `config.txt` in the output directory and
//! parses back to the same [`RunConfig`].

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::analytic::{self, figure1_curves, write_fig1_csv};
use crate::cache::{EvictionMode, PolicyKind};
use crate::catalog::{zipf_popularity, CorrelationMode, FileCatalog, FileId};
use crate::experiments::{
    brute_force_oracle, correlation_study, linf_distance, run_sweep, simulate_marginals, validate_approximation,
    write_oracle_csv, write_validation_csv, LengthModel, SweepGrid, SweepSettings,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Sweep,
    Correlate,
    Oracle,
    Fig1,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Sweep => "sweep",
            Command::Correlate => "correlate",
            Command::Oracle => "oracle",
            Command::Fig1 => "fig1",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "validate" => Ok(Command::Validate),
            "sweep" => Ok(Command::Sweep),
            "correlate" => Ok(Command::Correlate),
            "oracle" => Ok(Command::Oracle),
            "fig1" => Ok(Command::Fig1),
            other => Err(Error::Config(format!("unknown command `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CapacitySpec {
    /// Chunks.
    Absolute(u64),
    /// Fractions of the catalog's total chunks.
    Proportional(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChunkSpec {
    Constant(u32),
    PerFile(Vec<u32>),
    Pareto { shape: f64, scale: f64, cap: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub n_files: usize,
    pub alpha: Vec<f64>,
    pub capacity: CapacitySpec,
    pub chunks: ChunkSpec,
    pub chunk_len: Vec<f64>,
    pub startup_delay: Vec<f64>,
    pub rho: Vec<f64>,
    pub rate: Vec<f64>,
    pub policy: Vec<PolicyKind>,
    pub correlation: CorrelationMode,
    pub requests: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub ranks: Vec<usize>,
    pub max_j: u32,
    pub eviction: EvictionMode,
    pub resample_catalog: bool,
    pub records: bool,
}

const KEYS: [&str; 21] = [
    "command",
    "n-files",
    "alpha",
    "capacity",
    "cp",
    "chunks",
    "pareto",
    "chunk-len",
    "startup-delay",
    "rho",
    "rate",
    "policy",
    "correlation",
    "requests",
    "seed",
    "out",
    "ranks",
    "max-j",
    "eviction",
    "resample-catalog",
    "records",
];

#[derive(Debug, Parser)]
#[command(name = "glru", version, about = "LRU / gLRU chunk cache simulator and analytic toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Simulated vs. approximated chunk-count distributions for selected ranks.
    Validate(Flags),
    /// LRU vs. gLRU over a VoD parameter grid.
    Sweep(Flags),
    /// The sweep under positive and negative popularity-size correlation.
    Correlate(Flags),
    /// Exact stationary distributions of a tiny cache, with a simulation cross-check.
    Oracle(Flags),
    /// Any-chunk and full-file hit probabilities per rank.
    Fig1(Flags),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Zipf exponent(s).
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub n_files: Option<String>,
    /// Cache size in chunks.
    #[arg(long, conflicts_with = "cp")]
    pub capacity: Option<String>,
    /// Cache size(s) as a fraction of total chunks.
    #[arg(long)]
    pub cp: Option<String>,
    /// Chunks per file: one value for all files or one per file.
    #[arg(long, conflicts_with = "pareto")]
    pub chunks: Option<String>,
    /// Censored Pareto video lengths: shape,scale,cap (seconds).
    #[arg(long)]
    pub pareto: Option<String>,
    /// Seconds of video per chunk.
    #[arg(long)]
    pub chunk_len: Option<String>,
    /// Playback start-up delay in seconds.
    #[arg(long)]
    pub startup_delay: Option<String>,
    /// Traffic intensity.
    #[arg(long)]
    pub rho: Option<String>,
    /// Server rate in MB/s.
    #[arg(long)]
    pub rate: Option<String>,
    /// lru, glru or both (comma separated).
    #[arg(long)]
    pub policy: Option<String>,
    /// independent, positive or negative.
    #[arg(long)]
    pub correlation: Option<String>,
    /// Requests per simulation run.
    #[arg(long)]
    pub requests: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    /// Popularity ranks tracked by `validate`.
    #[arg(long)]
    pub ranks: Option<String>,
    /// Largest j exported in model tables.
    #[arg(long)]
    pub max_j: Option<String>,
    /// LRU tail eviction: chunk or file.
    #[arg(long)]
    pub eviction: Option<String>,
    /// Redraw video lengths for every sweep configuration (true/false).
    #[arg(long)]
    pub resample_catalog: Option<String>,
    /// Sweeps only: also write every configuration's catalog, trace and per-request records (true/false).
    #[arg(long)]
    pub records: Option<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, &String)> {
        let fields: [(&'static str, &Option<String>); 20] = [
            ("n-files", &self.n_files),
            ("alpha", &self.alpha),
            ("capacity", &self.capacity),
            ("cp", &self.cp),
            ("chunks", &self.chunks),
            ("pareto", &self.pareto),
            ("chunk-len", &self.chunk_len),
            ("startup-delay", &self.startup_delay),
            ("rho", &self.rho),
            ("rate", &self.rate),
            ("policy", &self.policy),
            ("correlation", &self.correlation),
            ("requests", &self.requests),
            ("seed", &self.seed),
            ("out", &self.out),
            ("ranks", &self.ranks),
            ("max-j", &self.max_j),
            ("eviction", &self.eviction),
            ("resample-catalog", &self.resample_catalog),
            ("records", &self.records),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
            .collect()
    }
}

type Layer = BTreeMap<String, String>;

fn defaults(command: Command) -> Layer {
    let mut d: Vec<(&str, &str)> = vec![
        ("alpha", "0.8"),
        ("chunk-len", "2"),
        ("startup-delay", "3"),
        ("rho", "0.5"),
        ("rate", "10"),
        ("policy", "lru,glru"),
        ("correlation", "independent"),
        ("requests", "1000000"),
        ("seed", "1"),
        ("out", "out"),
        ("ranks", "1,10,100,1000"),
        ("max-j", "10"),
        ("eviction", "chunk"),
        ("resample-catalog", "false"),
        ("records", "false"),
    ];
    let specific: Vec<(&str, &str)> = match command {
        Command::Validate => vec![("n-files", "10000"), ("capacity", "5000"), ("chunks", "30"), ("policy", "glru")],
        Command::Fig1 => vec![("n-files", "10000"), ("capacity", "1000"), ("chunks", "5")],
        Command::Oracle => vec![("n-files", "3"), ("capacity", "3"), ("chunks", "1,2,3")],
        Command::Sweep | Command::Correlate => vec![
            ("n-files", "1000"),
            ("alpha", "0.8,1.2"),
            ("cp", "0.1,0.2"),
            ("startup-delay", "3,4"),
            ("chunk-len", "1,2,3,4"),
            ("rho", "0.1,0.5,0.9"),
            ("rate", "1,2,10,30"),
            ("pareto", "2,300,3600"),
        ],
    };
    d.extend(specific);
    d.into_iter().map(|(k, v)| (k.to_owned(), v.to_owned())).collect()
}

/// Parses `key = value` lines; `#` starts a comment. Unknown keys are rejected.
pub fn parse_kv(text: &str) -> Result<Layer> {
    let mut layer = Layer::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("line {}: unknown key `{key}`", n + 1)));
        }
        if layer.insert(key.to_owned(), value.trim().to_owned()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{key}`", n + 1)));
        }
    }
    Ok(layer)
}

/// Merges defaults, file and flags. The pairs {capacity, cp} and {chunks, pareto}
/// are exclusive: a later layer setting one member replaces the earlier
/// layer's choice, but one layer may not set both.
fn merge(command: Command, file: Layer, flags: Layer) -> Result<Layer> {
    let mut merged = defaults(command);
    for layer in [file, flags] {
        for group in [["capacity", "cp"], ["chunks", "pareto"]] {
            let set: Vec<&str> = group.iter().copied().filter(|k| layer.contains_key(*k)).collect();
            if set.len() > 1 {
                return Err(Error::Config(format!("`{}` and `{}` are mutually exclusive", group[0], group[1])));
            }
            if !set.is_empty() {
                for k in group {
                    merged.remove(k);
                }
            }
        }
        merged.extend(layer);
    }
    merged.remove("command");
    Ok(merged)
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| Error::Config(format!("`{key}`: cannot parse `{s}`"))))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("`{key}` needs at least one value")));
    }
    Ok(items)
}

fn single<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn check_all(key: &str, values: &[f64], ok: impl Fn(f64) -> bool, what: &str) -> Result<()> {
    match values.iter().find(|&&v| !ok(v)) {
        Some(v) => Err(Error::Config(format!("`{key}` = {v}: {what}"))),
        None => Ok(()),
    }
}

impl RunConfig {
    fn from_layer(command: Command, layer: &Layer) -> Result<Self> {
        let get = |k: &str| {
            layer
                .get(k)
                .map(String::as_str)
                .ok_or_else(|| Error::Config(format!("missing `{k}`")))
        };
        let capacity = match (layer.get("capacity"), layer.get("cp")) {
            (Some(c), None) => CapacitySpec::Absolute(single("capacity", c)?),
            (None, Some(p)) => CapacitySpec::Proportional(list("cp", p)?),
            _ => return Err(Error::Config("exactly one of `capacity` and `cp` must be set".into())),
        };
        let chunks = match (layer.get("chunks"), layer.get("pareto")) {
            (Some(c), None) => {
                let values: Vec<u32> = list("chunks", c)?;
                if values.len() == 1 {
                    ChunkSpec::Constant(values[0])
                } else {
                    ChunkSpec::PerFile(values)
                }
            }
            (None, Some(p)) => {
                let v: Vec<f64> = list("pareto", p)?;
                if v.len() != 3 {
                    return Err(Error::Config("`pareto` takes shape,scale,cap".into()));
                }
                ChunkSpec::Pareto {
                    shape: v[0],
                    scale: v[1],
                    cap: v[2],
                }
            }
            _ => return Err(Error::Config("exactly one of `chunks` and `pareto` must be set".into())),
        };
        let mut policy: Vec<PolicyKind> = list("policy", get("policy")?)?;
        policy.sort();
        policy.dedup();

        let cfg = RunConfig {
            command,
            n_files: single("n-files", get("n-files")?)?,
            alpha: list("alpha", get("alpha")?)?,
            capacity,
            chunks,
            chunk_len: list("chunk-len", get("chunk-len")?)?,
            startup_delay: list("startup-delay", get("startup-delay")?)?,
            rho: list("rho", get("rho")?)?,
            rate: list("rate", get("rate")?)?,
            policy,
            correlation: get("correlation")?.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            requests: single("requests", get("requests")?)?,
            seed: single("seed", get("seed")?)?,
            out: PathBuf::from(get("out")?),
            ranks: list("ranks", get("ranks")?)?,
            max_j: single("max-j", get("max-j")?)?,
            eviction: get("eviction")?.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            resample_catalog: single("resample-catalog", get("resample-catalog")?)?,
            records: single("records", get("records")?)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.n_files == 0 {
            return Err(Error::Config("`n-files` must be at least 1".into()));
        }
        if self.requests == 0 {
            return Err(Error::Config("`requests` must be at least 1".into()));
        }
        check_all("alpha", &self.alpha, |a| a > 0.0 && a.is_finite(), "must be positive")?;
        check_all("chunk-len", &self.chunk_len, |l| l > 0.0 && l.is_finite(), "must be positive")?;
        check_all("startup-delay", &self.startup_delay, |d| d >= 0.0 && d.is_finite(), "must be non-negative")?;
        check_all("rho", &self.rho, |r| r > 0.0 && r < 1.0, "must lie in (0, 1)")?;
        check_all("rate", &self.rate, |r| r > 0.0 && r.is_finite(), "must be positive")?;
        match &self.capacity {
            CapacitySpec::Absolute(0) => return Err(Error::Config("`capacity` must be at least 1".into())),
            CapacitySpec::Proportional(cp) => check_all("cp", cp, |c| c > 0.0 && c < 1.0, "must lie in (0, 1)")?,
            CapacitySpec::Absolute(_) => {}
        }
        match &self.chunks {
            ChunkSpec::Constant(0) => return Err(Error::Config("`chunks` must be at least 1".into())),
            ChunkSpec::PerFile(v) => {
                if v.len() != self.n_files {
                    return Err(Error::Config(format!(
                        "`chunks` lists {} sizes for {} files",
                        v.len(),
                        self.n_files
                    )));
                }
                if v.contains(&0) {
                    return Err(Error::Config("`chunks` must be at least 1".into()));
                }
            }
            ChunkSpec::Pareto { shape, scale, cap } => {
                if !(*shape > 1.0 && *scale > 0.0 && cap > scale) {
                    return Err(Error::Config("`pareto` needs shape > 1, scale > 0, cap > scale".into()));
                }
            }
            ChunkSpec::Constant(_) => {}
        }
        if self.ranks.contains(&0) {
            return Err(Error::Config("`ranks` start at 1".into()));
        }
        if self.max_j == 0 {
            return Err(Error::Config("`max-j` must be at least 1".into()));
        }
        Ok(())
    }

    /// Reads a complete configuration (including `command`) from `key = value` text.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let layer = parse_kv(text)?;
        let command: Command = layer
            .get("command")
            .ok_or_else(|| Error::Config("missing `command`".into()))?
            .parse()?;
        let merged = merge(command, layer, Layer::new())?;
        Self::from_layer(command, &merged)
    }

    /// The resolved configuration as `key = value` lines.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("command", self.command.as_str().into());
        put("n-files", self.n_files.to_string());
        put("alpha", join(&self.alpha));
        match &self.capacity {
            CapacitySpec::Absolute(c) => put("capacity", c.to_string()),
            CapacitySpec::Proportional(cp) => put("cp", join(cp)),
        }
        match &self.chunks {
            ChunkSpec::Constant(c) => put("chunks", c.to_string()),
            ChunkSpec::PerFile(v) => put("chunks", join(v)),
            ChunkSpec::Pareto { shape, scale, cap } => put("pareto", join(&[*shape, *scale, *cap])),
        }
        put("chunk-len", join(&self.chunk_len));
        put("startup-delay", join(&self.startup_delay));
        put("rho", join(&self.rho));
        put("rate", join(&self.rate));
        put("policy", join(&self.policy));
        put("correlation", self.correlation.to_string());
        put("requests", self.requests.to_string());
        put("seed", self.seed.to_string());
        put("out", self.out.display().to_string());
        put("ranks", join(&self.ranks));
        put("max-j", self.max_j.to_string());
        put("eviction", self.eviction.as_str().into());
        put("resample-catalog", self.resample_catalog.to_string());
        put("records", self.records.to_string());
        s
    }

    pub fn from_cli(cli: Cli) -> Result<Self> {
        let (command, flags) = match cli.command {
            CliCommand::Validate(f) => (Command::Validate, f),
            CliCommand::Sweep(f) => (Command::Sweep, f),
            CliCommand::Correlate(f) => (Command::Correlate, f),
            CliCommand::Oracle(f) => (Command::Oracle, f),
            CliCommand::Fig1(f) => (Command::Fig1, f),
        };
        let file = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                let layer = parse_kv(&text)?;
                if let Some(c) = layer.get("command") {
                    if c.parse::<Command>()? != command {
                        return Err(Error::Config(format!(
                            "config file is for `{c}`, not `{}`",
                            command.as_str()
                        )));
                    }
                }
                layer
            }
            None => Layer::new(),
        };
        let flag_layer: Layer = flags.pairs().into_iter().map(|(k, v)| (k.to_owned(), v.clone())).collect();
        let merged = merge(command, file, flag_layer)?;
        Self::from_layer(command, &merged)
    }
}

/// Parses command-line arguments (including the program name).
pub fn parse_config<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    RunConfig::from_cli(cli)
}

impl Error {
    /// 1 for configuration problems, 2 for anything that fails while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidParameter { .. }
            | Error::CapacityTooLarge { .. }
            | Error::UnknownFile { .. }
            | Error::ChunkIndexOutOfRange { .. } => 1,
            _ => 2,
        }
    }
}

fn capacity_for(config: &RunConfig, catalog: &FileCatalog) -> Result<u64> {
    match &config.capacity {
        CapacitySpec::Absolute(c) => Ok(*c),
        CapacitySpec::Proportional(cp) => {
            if cp.len() != 1 {
                return Err(Error::Config(format!("`{}` takes a single cp value", config.command.as_str())));
            }
            Ok(((cp[0] * catalog.total_chunks() as f64).round() as u64).max(1))
        }
    }
}

fn analytic_catalog(config: &RunConfig) -> Result<FileCatalog> {
    if config.alpha.len() != 1 {
        return Err(Error::Config(format!("`{}` takes a single alpha", config.command.as_str())));
    }
    let popularity = zipf_popularity(config.n_files, config.alpha[0])?;
    match &config.chunks {
        ChunkSpec::Constant(c) => FileCatalog::new(popularity, vec![*c; config.n_files]),
        ChunkSpec::PerFile(v) => FileCatalog::new(popularity, v.clone()),
        ChunkSpec::Pareto { .. } => Err(Error::Config(format!(
            "`{}` needs explicit `chunks`, not `pareto`",
            config.command.as_str()
        ))),
    }
}

fn sweep_inputs(config: &RunConfig) -> Result<(SweepGrid, SweepSettings)> {
    let cp = match &config.capacity {
        CapacitySpec::Proportional(cp) => cp.clone(),
        CapacitySpec::Absolute(_) => return Err(Error::Config("sweeps size the cache with `cp`".into())),
    };
    let lengths = match config.chunks {
        ChunkSpec::Pareto { shape, scale, cap } => LengthModel::Pareto { shape, scale, cap },
        ChunkSpec::Constant(c) => LengthModel::ConstantChunks(c),
        ChunkSpec::PerFile(_) => return Err(Error::Config("sweeps take `pareto` or a single `chunks` value".into())),
    };
    let grid = SweepGrid {
        alpha: config.alpha.clone(),
        cp,
        startup_delay_s: config.startup_delay.clone(),
        chunk_len_s: config.chunk_len.clone(),
        rho: config.rho.clone(),
        rate_mbps: config.rate.clone(),
    };
    let settings = SweepSettings {
        n_files: config.n_files,
        lengths,
        correlation: config.correlation,
        n_requests: config.requests,
        seed: config.seed,
        resample_catalog: config.resample_catalog,
        eviction: config.eviction,
        artifact_dir: config.records.then(|| config.out.clone()),
        ..SweepSettings::default()
    };
    Ok((grid, settings))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

const SUM_TOL: f64 = 1e-9;

/// Executes `config`, writing result files into `config.out`.
/// Returns the human-readable summary that was also written to `summary.txt`.
pub fn run(config: &RunConfig) -> Result<String> {
    let out = &config.out;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_text(&out.join("config.txt"), &config.to_kv_string())?;
    let summary = match config.command {
        Command::Validate => run_validate(config)?,
        Command::Fig1 => run_fig1(config)?,
        Command::Oracle => run_oracle(config)?,
        Command::Sweep => {
            let (grid, settings) = sweep_inputs(config)?;
            let result = run_sweep(&grid, &settings)?;
            result.write_sweep_csv(&out.join("sweep.csv"), true)?;
            result.write_comparison_csv(&out.join("comparison.csv"))?;
            result.write_histograms_csv(&out.join("histograms.csv"), 20)?;
            result.write_summary_csv(&out.join("table2.csv"))?;
            result.summary_text()
        }
        Command::Correlate => {
            let (grid, settings) = sweep_inputs(config)?;
            let study = correlation_study(&grid, &settings)?;
            study.write_sweep_csv(&out.join("sweep.csv"))?;
            study.write_comparison_csv(&out.join("comparison.csv"))?;
            study.write_tables_csv(&out.join("correlation.csv"))?;
            let mut text = study.summary_text();
            text.push_str("\npositive correlation\n");
            text.push_str(&study.positive.summary_text());
            text.push_str("\nnegative correlation\n");
            text.push_str(&study.negative.summary_text());
            text
        }
    };
    write_text(&out.join("summary.txt"), &summary)?;
    Ok(summary)
}

fn run_validate(config: &RunConfig) -> Result<String> {
    let catalog = analytic_catalog(config)?;
    let capacity = capacity_for(config, &catalog)?;
    catalog.write_csv(&config.out.join("catalog.csv"))?;
    let mut text = String::new();
    for &policy in &config.policy {
        let report = validate_approximation(&catalog, capacity, config.requests, &config.ranks, policy, config.seed)?;
        if report.model.residual() > analytic::DEFAULT_TOL {
            return Err(Error::Invariant(format!("solver residual {}", report.model.residual())));
        }
        for row in &report.rows {
            let total: f64 = row.analytic.iter().sum();
            if (total - 1.0).abs() > SUM_TOL {
                return Err(Error::Invariant(format!("rank {} distribution sums to {total}", row.rank)));
            }
        }
        let name = if config.policy.len() == 1 {
            "validation.csv".to_owned()
        } else {
            format!("validation_{policy}.csv")
        };
        write_validation_csv(&report.rows, &config.out.join(name))?;
        report
            .model
            .write_csv(&config.out.join(format!("model_{policy}.csv")), config.max_j)?;
        let _ = writeln!(
            text,
            "{policy}: t_c = {:.6}, residual = {:.3e}, warm-up = {} requests",
            report.model.t_c(),
            report.model.residual(),
            report.warmup
        );
        for row in &report.rows {
            let _ = writeln!(text, "  rank {:>6}: {:>8} samples, L1 = {:.4}", row.rank, row.samples, row.l1);
        }
    }
    Ok(text)
}

fn run_fig1(config: &RunConfig) -> Result<String> {
    let catalog = analytic_catalog(config)?;
    let capacity = capacity_for(config, &catalog)?;
    let rows = figure1_curves(&catalog, capacity, analytic::DEFAULT_TOL)?;
    if let Some(r) = rows.iter().find(|r| r.glru_full > r.glru_any) {
        return Err(Error::Invariant(format!("rank {}: full-file above any-chunk probability", r.rank)));
    }
    write_fig1_csv(&rows, &config.out.join("fig1.csv"))?;
    let mut text = String::new();
    for policy in PolicyKind::ALL {
        let model = analytic::solve_tc(&catalog, capacity, policy, analytic::DEFAULT_TOL)?;
        model.write_csv(&config.out.join(format!("model_{policy}.csv")), config.max_j)?;
        let _ = writeln!(text, "{policy}: t_c = {:.6}, residual = {:.3e}", model.t_c(), model.residual());
    }
    for r in rows.iter().filter(|r| [1, 10, 100, 1000, 10000].contains(&r.rank)) {
        let _ = writeln!(
            text,
            "rank {:>6}: lru_any {:.4}  glru_any {:.4}  glru_full {:.4}",
            r.rank, r.lru_any, r.glru_any, r.glru_full
        );
    }
    Ok(text)
}

fn run_oracle(config: &RunConfig) -> Result<String> {
    let catalog = analytic_catalog(config)?;
    let capacity = capacity_for(config, &catalog)?;
    catalog.write_csv(&config.out.join("catalog.csv"))?;
    let mut results = Vec::new();
    let mut text = String::new();
    for &policy in &config.policy {
        let oracle = brute_force_oracle(&catalog, capacity, policy, config.eviction)?;
        for (f, dist) in oracle.marginals.iter().enumerate() {
            let total: f64 = dist.iter().sum();
            if (total - 1.0).abs() > SUM_TOL {
                return Err(Error::Invariant(format!("{policy} file {f} marginal sums to {total}")));
            }
        }
        let simulated = simulate_marginals(&catalog, capacity, policy, config.eviction, config.requests, config.seed)?;
        let worst = oracle
            .marginals
            .iter()
            .zip(&simulated)
            .map(|(a, b)| linf_distance(a, b))
            .fold(0.0, f64::max);
        let _ = writeln!(
            text,
            "{policy}: {} states, {} iterations, max |simulated - exact| = {worst:.5}",
            oracle.states.len(),
            oracle.iterations
        );
        for id in catalog.file_ids() {
            let probs: Vec<String> = oracle.marginals[id.0].iter().map(|p| format!("{p:.5}")).collect();
            let _ = writeln!(text, "  file {} ({} chunks): {}", FileId::rank(id), catalog.size(id), probs.join(" "));
        }
        results.push((oracle, Some(simulated)));
    }
    write_oracle_csv(&results, &config.out.join("oracle.csv"))?;
    Ok(text)
}
