use std::path::Path;

use crate::cache::{CacheState, EvictionMode, PolicyKind};
use crate::catalog::{FileCatalog, FileId};
use crate::csvio;
use crate::delivery::{DownloadTimeline, FifoQueue, ServiceConfig, ServiceDraws};
use crate::workload::RequestTrace;
use crate::{Error, Result};

use super::Metric;

/// Stalls at or below this many seconds count as no stall.
pub const STALL_EPSILON_S: f64 = 1e-12;

/// Which leading requests are left out of the metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Warmup {
    /// Skip requests until the cumulative chunks inserted reach the capacity.
    #[default]
    FillOnce,
    /// Skip a fixed number of requests.
    Requests(usize),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SimOptions {
    pub service_seed: u64,
    pub warmup: Warmup,
    pub eviction: EvictionMode,
}

/// Outcome of one request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequestRecord {
    pub time: f64,
    pub file: FileId,
    pub size: u32,
    pub chunks_hit: u32,
    pub download_time: f64,
    pub stall: f64,
}

impl RequestRecord {
    pub fn stalled(&self) -> bool {
        self.stall > STALL_EPSILON_S
    }

    /// Per-request contribution to `metric` (chunk-weighted metrics return hits).
    pub fn value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Pc => f64::from(self.chunks_hit),
            Metric::Pm => f64::from(u8::from(self.chunks_hit == 0)),
            Metric::Tw => self.download_time,
            Metric::Td => self.stall,
            Metric::Pd => f64::from(u8::from(self.stalled())),
        }
    }
}

/// Aggregate metrics over the measured (post-warm-up) requests.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub policy: PolicyKind,
    pub capacity: u64,
    pub service: ServiceConfig,
    /// Requests skipped before measurement.
    pub warmup: usize,
    /// Requests measured.
    pub n_requests: usize,
    /// Fraction of requested chunks served by the cache.
    pub p_c: f64,
    /// Fraction of requests that found no chunk cached.
    pub p_m: f64,
    /// Mean download time, seconds.
    pub t_w: f64,
    /// Mean stall duration, seconds.
    pub t_d: f64,
    /// Fraction of requests with a stall.
    pub p_d: f64,
    pub t_w_se: f64,
    pub t_d_se: f64,
    pub trace_fingerprint: u64,
}

impl MetricsReport {
    pub fn from_records(
        policy: PolicyKind,
        capacity: u64,
        service: ServiceConfig,
        records: &[RequestRecord],
        warmup: usize,
        trace_fingerprint: u64,
    ) -> Result<Self> {
        let measured = records
            .get(warmup..)
            .filter(|m| !m.is_empty())
            .ok_or_else(|| {
                Error::param(
                    "requests",
                    format!("{} requests leave nothing to measure after a warm-up of {warmup}", records.len()),
                )
            })?;
        let n = measured.len() as f64;
        let chunks: u64 = measured.iter().map(|r| u64::from(r.size)).sum();
        let hits: u64 = measured.iter().map(|r| u64::from(r.chunks_hit)).sum();
        let (t_w, t_w_se) = mean_se(measured.iter().map(|r| r.download_time));
        let (t_d, t_d_se) = mean_se(measured.iter().map(|r| r.stall));
        Ok(MetricsReport {
            policy,
            capacity,
            service,
            warmup,
            n_requests: measured.len(),
            p_c: hits as f64 / chunks as f64,
            p_m: measured.iter().filter(|r| r.chunks_hit == 0).count() as f64 / n,
            t_w,
            t_d,
            p_d: measured.iter().filter(|r| r.stalled()).count() as f64 / n,
            t_w_se,
            t_d_se,
            trace_fingerprint,
        })
    }

    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Pc => self.p_c,
            Metric::Pm => self.p_m,
            Metric::Tw => self.t_w,
            Metric::Td => self.t_d,
            Metric::Pd => self.p_d,
        }
    }

    pub fn check_invariants(&self) -> Result<()> {
        for (name, p) in [("p_c", self.p_c), ("p_m", self.p_m), ("p_d", self.p_d)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Invariant(format!("{name} = {p} outside [0, 1]")));
            }
        }
        for (name, t) in [("T_w", self.t_w), ("T_d", self.t_d)] {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Invariant(format!("{name} = {t} is not a finite non-negative time")));
            }
        }
        Ok(())
    }
}

/// Sample mean and its standard error.
pub(crate) fn mean_se(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut mean, mut m2) = (0.0f64, 0.0f64, 0.0f64);
    for v in values {
        n += 1.0;
        let d = v - mean;
        mean += d / n;
        m2 += d * (v - mean);
    }
    if n < 2.0 {
        return (mean, 0.0);
    }
    (mean, (m2 / (n - 1.0) / n).sqrt())
}

#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub report: MetricsReport,
    pub records: Vec<RequestRecord>,
    /// Index of the first request after cumulative insertions reached capacity.
    pub fill_index: Option<usize>,
}

/// Drives one policy over `trace`, serving uncached chunks through a shared FIFO server.
///
/// Cached chunks are always a prefix of the file: the cache adds chunks in
/// playback order and evicts from the end. Request `k` draws the service
/// time of chunk `j` from its own addressable stream, so runs with the same
/// `service_seed` see identical service times for identical chunks.
pub fn run_simulation(
    catalog: &FileCatalog,
    policy: PolicyKind,
    capacity: u64,
    trace: &RequestTrace,
    service: &ServiceConfig,
    options: &SimOptions,
) -> Result<SimulationRun> {
    let total = catalog.total_chunks();
    if capacity >= total {
        return Err(Error::CapacityTooLarge { capacity, total });
    }
    service.validate()?;
    let mut cache = CacheState::new(capacity, catalog)?.with_eviction(options.eviction);
    let mut queue = FifoQueue::new();
    let draws = ServiceDraws::new(options.service_seed, service.service_rate())?;

    let mut records = Vec::with_capacity(trace.len());
    let mut inserted = 0u64;
    let mut fill_index = None;
    for (k, req) in trace.events().iter().enumerate() {
        let outcome = cache.request(req.file, policy)?;
        let size = catalog.size(req.file);
        let hit = outcome.chunks_hit;
        let missing = (size - hit) as usize;
        let done = queue.enqueue(req.time, missing, draws.chunk_times(k as u64, hit));
        let timeline = DownloadTimeline::from_prefix(req.time, hit as usize, &done);
        records.push(RequestRecord {
            time: req.time,
            file: req.file,
            size,
            chunks_hit: hit,
            download_time: timeline.download_time(),
            stall: timeline.stall_duration(service.startup_delay_s, service.chunk_len_s),
        });
        inserted += u64::from(outcome.chunks_added);
        if fill_index.is_none() && inserted >= capacity {
            fill_index = Some(k + 1);
        }
    }
    cache.check_invariants()?;

    let warmup = match options.warmup {
        Warmup::FillOnce => fill_index.unwrap_or(records.len()),
        Warmup::Requests(n) => n,
    };
    let report = MetricsReport::from_records(policy, capacity, *service, &records, warmup, trace.fingerprint())?;
    report.check_invariants()?;
    Ok(SimulationRun {
        report,
        records,
        fill_index,
    })
}

/// Writes `t,file,s,chunks_hit,download_time,stall,stalled_flag`.
pub fn write_records_csv(records: &[RequestRecord], path: &Path) -> Result<()> {
    let mut w = csvio::writer(path)?;
    w.write_record(["t", "file", "s", "chunks_hit", "download_time", "stall", "stalled_flag"])?;
    for r in records {
        w.write_record([
            r.time.to_string(),
            r.file.0.to_string(),
            r.size.to_string(),
            r.chunks_hit.to_string(),
            r.download_time.to_string(),
            r.stall.to_string(),
            u8::from(r.stalled()).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
