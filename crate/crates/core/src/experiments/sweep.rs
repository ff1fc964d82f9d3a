//! Policy comparison over a parameter grid, and the correlation study built on it.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::cache::{EvictionMode, PolicyKind};
use crate::catalog::{censored_pareto_lengths, zipf_popularity, CorrelationMode, FileCatalog};
use crate::csvio;
use crate::delivery::ServiceConfig;
use crate::workload::{generate_trace, rate_for_intensity};
use crate::{Error, Result};

use super::simulate::{run_simulation, write_records_csv, MetricsReport, RequestRecord, SimOptions, Warmup};
use super::{derive_seed, histogram, relative_difference, ComparisonRow, Metric};

/// One point of the VoD parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VodConfig {
    pub alpha: f64,
    /// Cache size as a fraction of all catalog chunks.
    pub cp: f64,
    pub startup_delay_s: f64,
    pub chunk_len_s: f64,
    pub rho: f64,
    /// Server rate in MB/s.
    pub rate_mbps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub alpha: Vec<f64>,
    pub cp: Vec<f64>,
    pub startup_delay_s: Vec<f64>,
    pub chunk_len_s: Vec<f64>,
    pub rho: Vec<f64>,
    pub rate_mbps: Vec<f64>,
}

impl SweepGrid {
    /// The full 384-point VoD grid.
    pub fn table_i() -> Self {
        SweepGrid {
            alpha: vec![0.8, 1.2],
            cp: vec![0.1, 0.2],
            startup_delay_s: vec![3.0, 4.0],
            chunk_len_s: vec![1.0, 2.0, 3.0, 4.0],
            rho: vec![0.1, 0.5, 0.9],
            rate_mbps: vec![1.0, 2.0, 10.0, 30.0],
        }
    }

    pub fn single(config: VodConfig) -> Self {
        SweepGrid {
            alpha: vec![config.alpha],
            cp: vec![config.cp],
            startup_delay_s: vec![config.startup_delay_s],
            chunk_len_s: vec![config.chunk_len_s],
            rho: vec![config.rho],
            rate_mbps: vec![config.rate_mbps],
        }
    }

    /// All combinations, varying the last axis fastest.
    pub fn configs(&self) -> Vec<VodConfig> {
        let mut out = Vec::new();
        for &alpha in &self.alpha {
            for &cp in &self.cp {
                for &startup_delay_s in &self.startup_delay_s {
                    for &chunk_len_s in &self.chunk_len_s {
                        for &rho in &self.rho {
                            for &rate_mbps in &self.rate_mbps {
                                out.push(VodConfig {
                                    alpha,
                                    cp,
                                    startup_delay_s,
                                    chunk_len_s,
                                    rho,
                                    rate_mbps,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let axes: [(&'static str, &Vec<f64>); 6] = [
            ("alpha", &self.alpha),
            ("cp", &self.cp),
            ("startup_delay", &self.startup_delay_s),
            ("chunk_len", &self.chunk_len_s),
            ("rho", &self.rho),
            ("rate", &self.rate_mbps),
        ];
        for (name, values) in axes {
            if values.is_empty() {
                return Err(Error::param(name, "grid axis is empty"));
            }
        }
        for &a in &self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::param("alpha", format!("must be positive, got {a}")));
            }
        }
        for &c in &self.cp {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::param("cp", format!("must lie in (0, 1), got {c}")));
            }
        }
        for &r in &self.rho {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::param("rho", format!("must lie in (0, 1), got {r}")));
            }
        }
        for &l in &self.chunk_len_s {
            ServiceConfig::new(l, 1.0, 0.0)?;
        }
        for &d in &self.startup_delay_s {
            ServiceConfig::new(1.0, 1.0, d)?;
        }
        for &r in &self.rate_mbps {
            ServiceConfig::new(1.0, r, 0.0)?;
        }
        Ok(())
    }
}

/// Where video lengths come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LengthModel {
    /// Pareto lengths in seconds, redrawn above `cap`.
    Pareto { shape: f64, scale: f64, cap: f64 },
    /// Every file has this many chunks regardless of chunk length.
    ConstantChunks(u32),
}

impl Default for LengthModel {
    fn default() -> Self {
        LengthModel::Pareto {
            shape: 2.0,
            scale: 300.0,
            cap: 3600.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub n_files: usize,
    pub lengths: LengthModel,
    pub correlation: CorrelationMode,
    pub n_requests: usize,
    pub seed: u64,
    /// Draw fresh video lengths for every configuration instead of sharing one draw.
    pub resample_catalog: bool,
    pub eviction: EvictionMode,
    /// Batches used for the paired noise estimate.
    pub batches: usize,
    /// When set, each configuration's catalog, trace and per-request records
    /// are written here as `catalog_<id>_<correlation>.csv`,
    /// `trace_<id>_<correlation>.csv` and `records_<id>_<correlation>_<policy>.csv`.
    pub artifact_dir: Option<PathBuf>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            n_files: 1_000,
            lengths: LengthModel::default(),
            correlation: CorrelationMode::Independent,
            n_requests: 1_000_000,
            seed: 1,
            resample_catalog: false,
            eviction: EvictionMode::ChunkWise,
            batches: 20,
            artifact_dir: None,
        }
    }
}

/// Both policies run on one configuration with shared trace and service draws.
#[derive(Debug, Clone)]
pub struct ConfigOutcome {
    pub index: usize,
    pub config: VodConfig,
    pub correlation: CorrelationMode,
    pub capacity: u64,
    pub total_rate: f64,
    pub lru: MetricsReport,
    pub glru: MetricsReport,
    /// One row per metric, in [`Metric::ALL`] order.
    pub rows: Vec<ComparisonRow>,
    /// Batch-means standard error of the paired gLRU - LRU difference, per metric.
    pub noise_se: Vec<f64>,
}

impl ConfigOutcome {
    pub fn row(&self, metric: Metric) -> &ComparisonRow {
        &self.rows[Metric::ALL.iter().position(|&m| m == metric).expect("all metrics present")]
    }

    pub fn noise(&self, metric: Metric) -> f64 {
        self.noise_se[Metric::ALL.iter().position(|&m| m == metric).expect("all metrics present")]
    }

    pub fn report(&self, policy: PolicyKind) -> &MetricsReport {
        match policy {
            PolicyKind::Lru => &self.lru,
            PolicyKind::Glru => &self.glru,
        }
    }
}

fn build_catalog(settings: &SweepSettings, config: &VodConfig, lengths: &[f64]) -> Result<FileCatalog> {
    let popularity = zipf_popularity(settings.n_files, config.alpha)?;
    let catalog = match settings.lengths {
        LengthModel::Pareto { .. } => FileCatalog::with_lengths(popularity, lengths.to_vec(), config.chunk_len_s)?,
        LengthModel::ConstantChunks(c) => FileCatalog::new(popularity, vec![c; settings.n_files])?,
    };
    Ok(catalog.couple_popularity_size(settings.correlation))
}

fn draw_lengths(settings: &SweepSettings, index: u64) -> Result<Vec<f64>> {
    match settings.lengths {
        LengthModel::Pareto { shape, scale, cap } => censored_pareto_lengths(
            settings.n_files,
            shape,
            scale,
            cap,
            derive_seed(settings.seed, "catalog", index),
        ),
        LengthModel::ConstantChunks(_) => Ok(Vec::new()),
    }
}

fn aggregate(records: &[RequestRecord], metric: Metric) -> f64 {
    match metric {
        Metric::Pc => {
            let hits: u64 = records.iter().map(|r| u64::from(r.chunks_hit)).sum();
            let chunks: u64 = records.iter().map(|r| u64::from(r.size)).sum();
            hits as f64 / chunks as f64
        }
        _ => records.iter().map(|r| r.value(metric)).sum::<f64>() / records.len() as f64,
    }
}

/// Standard error of the gLRU - LRU difference of `metric`, from the spread
/// of the difference across `batches` consecutive blocks of paired requests.
/// Batching absorbs the serial correlation that the shared queue introduces.
pub fn paired_batch_se(lru: &[RequestRecord], glru: &[RequestRecord], metric: Metric, batches: usize) -> f64 {
    let n = lru.len().min(glru.len());
    if batches < 2 || n < batches {
        return 0.0;
    }
    let width = n / batches;
    let diffs: Vec<f64> = (0..batches)
        .map(|b| {
            let range = b * width..(b + 1) * width;
            aggregate(&glru[range.clone()], metric) - aggregate(&lru[range], metric)
        })
        .collect();
    let mean = diffs.iter().sum::<f64>() / batches as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

/// Runs LRU and gLRU on one configuration.
///
/// Metrics for both policies are measured over the same requests: the
/// warm-up is the later of the two policies' cache-fill points.
pub fn run_config(settings: &SweepSettings, index: usize, config: VodConfig, lengths: &[f64]) -> Result<ConfigOutcome> {
    let catalog = build_catalog(settings, &config, lengths)?;
    let total = catalog.total_chunks();
    let capacity = ((config.cp * total as f64).round() as u64).clamp(1, total - 1);
    let service = ServiceConfig::new(config.chunk_len_s, config.rate_mbps, config.startup_delay_s)?;
    let total_rate = rate_for_intensity(&catalog, config.rho, service.service_rate())?;
    let trace = generate_trace(
        &catalog,
        total_rate,
        settings.n_requests,
        derive_seed(settings.seed, "trace", index as u64),
    )?;
    let options = SimOptions {
        service_seed: derive_seed(settings.seed, "service", index as u64),
        warmup: Warmup::Requests(0),
        eviction: settings.eviction,
    };
    let (lru, glru) = rayon::join(
        || run_simulation(&catalog, PolicyKind::Lru, capacity, &trace, &service, &options),
        || run_simulation(&catalog, PolicyKind::Glru, capacity, &trace, &service, &options),
    );
    let (lru, glru) = (lru?, glru?);
    if let Some(dir) = &settings.artifact_dir {
        let tag = format!("{index}_{}", settings.correlation);
        catalog.write_csv(&dir.join(format!("catalog_{tag}.csv")))?;
        trace.write_csv(&dir.join(format!("trace_{tag}.csv")))?;
        write_records_csv(&lru.records, &dir.join(format!("records_{tag}_lru.csv")))?;
        write_records_csv(&glru.records, &dir.join(format!("records_{tag}_glru.csv")))?;
    }
    let warmup = match (lru.fill_index, glru.fill_index) {
        (Some(a), Some(b)) => a.max(b),
        _ => {
            return Err(Error::param(
                "requests",
                format!("{} requests never fill a {capacity}-chunk cache", settings.n_requests),
            ))
        }
    };
    let fingerprint = trace.fingerprint();
    let lru_report = MetricsReport::from_records(PolicyKind::Lru, capacity, service, &lru.records, warmup, fingerprint)?;
    let glru_report = MetricsReport::from_records(PolicyKind::Glru, capacity, service, &glru.records, warmup, fingerprint)?;
    lru_report.check_invariants()?;
    glru_report.check_invariants()?;
    if lru_report.trace_fingerprint != glru_report.trace_fingerprint {
        return Err(Error::Invariant("policies ran on different traces".into()));
    }

    let rows = Metric::ALL
        .iter()
        .map(|&m| ComparisonRow::new(m, lru_report.metric(m), glru_report.metric(m)))
        .collect();
    let noise_se = Metric::ALL
        .iter()
        .map(|&m| paired_batch_se(&lru.records[warmup..], &glru.records[warmup..], m, settings.batches))
        .collect();

    Ok(ConfigOutcome {
        index,
        config,
        correlation: settings.correlation,
        capacity,
        total_rate,
        lru: lru_report,
        glru: glru_report,
        rows,
        noise_se,
    })
}

/// Best, worst and mean gLRU-vs-LRU differences for one metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub metric: Metric,
    pub worst_relative: f64,
    pub worst_gross: f64,
    pub best_relative: f64,
    pub best_gross: f64,
    pub mean_relative: f64,
    pub mean_gross: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub settings: SweepSettings,
    pub outcomes: Vec<ConfigOutcome>,
    pub summary: Vec<SummaryRow>,
}

pub fn run_sweep(grid: &SweepGrid, settings: &SweepSettings) -> Result<SweepResult> {
    grid.validate()?;
    if settings.n_files == 0 {
        return Err(Error::param("n_files", "must be at least 1"));
    }
    let configs = grid.configs();
    let shared = if settings.resample_catalog {
        None
    } else {
        Some(draw_lengths(settings, 0)?)
    };
    let outcomes = configs
        .par_iter()
        .enumerate()
        .map(|(i, &config)| {
            let own;
            let lengths = match &shared {
                Some(l) => l,
                None => {
                    own = draw_lengths(settings, i as u64)?;
                    &own
                }
            };
            run_config(settings, i, config, lengths)
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&outcomes);
    Ok(SweepResult {
        settings: settings.clone(),
        outcomes,
        summary,
    })
}

type Fold = fn(f64, f64) -> f64;

fn summarize(outcomes: &[ConfigOutcome]) -> Vec<SummaryRow> {
    Metric::ALL
        .iter()
        .map(|&metric| {
            let rel: Vec<f64> = outcomes.iter().map(|o| o.row(metric).relative).collect();
            let gross: Vec<f64> = outcomes.iter().map(|o| o.row(metric).gross).collect();
            let (worst, best): (Fold, Fold) = if metric.higher_is_better() {
                (f64::min, f64::max)
            } else {
                (f64::max, f64::min)
            };
            let fold = |v: &[f64], f: Fold| v.iter().copied().reduce(f).unwrap_or(f64::NAN);
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            SummaryRow {
                metric,
                worst_relative: fold(&rel, worst),
                worst_gross: fold(&gross, worst),
                best_relative: fold(&rel, best),
                best_gross: fold(&gross, best),
                mean_relative: mean(&rel),
                mean_gross: mean(&gross),
            }
        })
        .collect()
}

const CONFIG_COLUMNS: [&str; 8] = [
    "config_id",
    "alpha",
    "cp",
    "startup_delay",
    "chunk_len",
    "rho",
    "rate",
    "correlation",
];

fn config_fields(o: &ConfigOutcome) -> Vec<String> {
    let c = &o.config;
    vec![
        o.index.to_string(),
        c.alpha.to_string(),
        c.cp.to_string(),
        c.startup_delay_s.to_string(),
        c.chunk_len_s.to_string(),
        c.rho.to_string(),
        c.rate_mbps.to_string(),
        o.correlation.to_string(),
    ]
}

impl SweepResult {
    pub fn summary_row(&self, metric: Metric) -> &SummaryRow {
        self.summary
            .iter()
            .find(|r| r.metric == metric)
            .expect("summary covers every metric")
    }

    /// `config_id,alpha,cp,startup_delay,chunk_len,rho,rate,correlation,policy,metric,value,std_err,n_requests,warmup,capacity,trace_hash`
    pub fn write_sweep_csv(&self, path: &Path, header: bool) -> Result<()> {
        let mut w = csvio::writer(path)?;
        if header {
            let mut h: Vec<&str> = CONFIG_COLUMNS.to_vec();
            h.extend(["policy", "metric", "value", "std_err", "n_requests", "warmup", "capacity", "trace_hash"]);
            w.write_record(&h)?;
        }
        self.append_sweep_rows(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    fn append_sweep_rows<W: std::io::Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        for o in &self.outcomes {
            for policy in PolicyKind::ALL {
                let report = o.report(policy);
                for metric in Metric::ALL {
                    let se = match metric {
                        Metric::Tw => report.t_w_se.to_string(),
                        Metric::Td => report.t_d_se.to_string(),
                        _ => String::new(),
                    };
                    let mut row = config_fields(o);
                    row.extend([
                        policy.to_string(),
                        metric.to_string(),
                        report.metric(metric).to_string(),
                        se,
                        report.n_requests.to_string(),
                        report.warmup.to_string(),
                        report.capacity.to_string(),
                        format!("{:016x}", report.trace_fingerprint),
                    ]);
                    w.write_record(&row)?;
                }
            }
        }
        Ok(())
    }

    /// `config_id,...,correlation,metric,lru,glru,relative,gross,noise_se`
    pub fn write_comparison_csv(&self, path: &Path) -> Result<()> {
        write_comparisons(&[self], path)
    }

    /// `metric,kind,bin_lo,bin_hi,count` for relative and gross differences.
    pub fn write_histograms_csv(&self, path: &Path, bins: usize) -> Result<()> {
        let mut w = csvio::writer(path)?;
        w.write_record(["metric", "kind", "bin_lo", "bin_hi", "count"])?;
        for metric in Metric::ALL {
            let rel: Vec<f64> = self.outcomes.iter().map(|o| o.row(metric).relative).collect();
            let gross: Vec<f64> = self.outcomes.iter().map(|o| o.row(metric).gross).collect();
            for (kind, values) in [("relative", rel), ("gross", gross)] {
                for bin in histogram(&values, bins) {
                    w.write_record([
                        metric.to_string(),
                        kind.to_string(),
                        bin.lo.to_string(),
                        bin.hi.to_string(),
                        bin.count.to_string(),
                    ])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// `metric,worst_relative,worst_gross,best_relative,best_gross,mean_relative,mean_gross`
    pub fn write_summary_csv(&self, path: &Path) -> Result<()> {
        let mut w = csvio::writer(path)?;
        w.write_record([
            "metric",
            "worst_relative",
            "worst_gross",
            "best_relative",
            "best_gross",
            "mean_relative",
            "mean_gross",
        ])?;
        for r in &self.summary {
            w.write_record([
                r.metric.to_string(),
                r.worst_relative.to_string(),
                r.worst_gross.to_string(),
                r.best_relative.to_string(),
                r.best_gross.to_string(),
                r.mean_relative.to_string(),
                r.mean_gross.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn summary_text(&self) -> String {
        let wins = |m: Metric| self.outcomes.iter().filter(|o| o.row(m).glru_wins()).count();
        let mut s = format!(
            "{} configurations, correlation {}, {} requests each\n\n",
            self.outcomes.len(),
            self.settings.correlation,
            self.settings.n_requests
        );
        s.push_str("metric  worst(rel/gross)        best(rel/gross)         mean(rel/gross)         glru wins\n");
        for r in &self.summary {
            s.push_str(&format!(
                "{:<7} {:>9.3} / {:<11.4} {:>9.3} / {:<11.4} {:>9.3} / {:<11.4} {}/{}\n",
                r.metric.name(),
                r.worst_relative,
                r.worst_gross,
                r.best_relative,
                r.best_gross,
                r.mean_relative,
                r.mean_gross,
                wins(r.metric),
                self.outcomes.len()
            ));
        }
        s
    }
}

fn write_comparisons(results: &[&SweepResult], path: &Path) -> Result<()> {
    let mut w = csvio::writer(path)?;
    let mut h: Vec<&str> = CONFIG_COLUMNS.to_vec();
    h.extend(["metric", "lru", "glru", "relative", "gross", "noise_se"]);
    w.write_record(&h)?;
    for result in results {
        for o in &result.outcomes {
            for (row, se) in o.rows.iter().zip(&o.noise_se) {
                let mut rec = config_fields(o);
                rec.extend([
                    row.metric.to_string(),
                    row.lru.to_string(),
                    row.glru.to_string(),
                    row.relative.to_string(),
                    row.gross.to_string(),
                    se.to_string(),
                ]);
                w.write_record(&rec)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Positive vs. negative popularity-size correlation.
#[derive(Debug, Clone)]
pub struct CorrelationStudy {
    pub positive: SweepResult,
    pub negative: SweepResult,
    /// Per metric: mean over configurations of (positive - negative) / negative,
    /// as `(metric, glru, lru)`.
    pub positive_vs_negative: Vec<(Metric, f64, f64)>,
    /// Per metric: mean relative gLRU-over-LRU difference, as `(metric, positive, negative)`.
    pub glru_vs_lru: Vec<(Metric, f64, f64)>,
}

pub fn correlation_study(grid: &SweepGrid, settings: &SweepSettings) -> Result<CorrelationStudy> {
    let with = |mode| SweepSettings {
        correlation: mode,
        ..settings.clone()
    };
    let positive = run_sweep(grid, &with(CorrelationMode::Positive))?;
    let negative = run_sweep(grid, &with(CorrelationMode::Negative))?;

    let mean_rel = |policy: PolicyKind, metric: Metric| {
        let n = positive.outcomes.len() as f64;
        positive
            .outcomes
            .iter()
            .zip(&negative.outcomes)
            .map(|(p, q)| relative_difference(p.report(policy).metric(metric), q.report(policy).metric(metric)))
            .sum::<f64>()
            / n
    };
    let positive_vs_negative = Metric::ALL
        .iter()
        .map(|&m| (m, mean_rel(PolicyKind::Glru, m), mean_rel(PolicyKind::Lru, m)))
        .collect();
    let glru_vs_lru = Metric::ALL
        .iter()
        .map(|&m| {
            (
                m,
                positive.summary_row(m).mean_relative,
                negative.summary_row(m).mean_relative,
            )
        })
        .collect();
    Ok(CorrelationStudy {
        positive,
        negative,
        positive_vs_negative,
        glru_vs_lru,
    })
}

impl CorrelationStudy {
    /// Mean of `metric` over all configurations for one correlation mode and policy.
    pub fn mean_metric(&self, mode: CorrelationMode, policy: PolicyKind, metric: Metric) -> f64 {
        let result = match mode {
            CorrelationMode::Negative => &self.negative,
            _ => &self.positive,
        };
        result.outcomes.iter().map(|o| o.report(policy).metric(metric)).sum::<f64>() / result.outcomes.len() as f64
    }

    /// Both sweeps in one `sweep.csv`.
    pub fn write_sweep_csv(&self, path: &Path) -> Result<()> {
        let mut w = csvio::writer(path)?;
        let mut h: Vec<&str> = CONFIG_COLUMNS.to_vec();
        h.extend(["policy", "metric", "value", "std_err", "n_requests", "warmup", "capacity", "trace_hash"]);
        w.write_record(&h)?;
        self.positive.append_sweep_rows(&mut w)?;
        self.negative.append_sweep_rows(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn write_comparison_csv(&self, path: &Path) -> Result<()> {
        write_comparisons(&[&self.positive, &self.negative], path)
    }

    /// `table,metric,column,value` rows for both summary tables.
    pub fn write_tables_csv(&self, path: &Path) -> Result<()> {
        let mut w = csvio::writer(path)?;
        w.write_record(["table", "metric", "column", "value"])?;
        for &(m, g, l) in &self.positive_vs_negative {
            w.write_record(["positive_vs_negative", m.name(), "glru", &g.to_string()])?;
            w.write_record(["positive_vs_negative", m.name(), "lru", &l.to_string()])?;
        }
        for &(m, p, n) in &self.glru_vs_lru {
            w.write_record(["glru_vs_lru", m.name(), "positive", &p.to_string()])?;
            w.write_record(["glru_vs_lru", m.name(), "negative", &n.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::from("mean (positive - negative) / negative\nmetric        glru         lru\n");
        for &(m, g, l) in &self.positive_vs_negative {
            s.push_str(&format!("{:<7} {:>11.4} {:>11.4}\n", m.name(), g, l));
        }
        s.push_str("\nmean relative improvement of glru over lru\nmetric    positive    negative\n");
        for &(m, p, n) in &self.glru_vs_lru {
            s.push_str(&format!("{:<7} {:>11.4} {:>11.4}\n", m.name(), p, n));
        }
        s
    }
}
