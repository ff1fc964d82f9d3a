//! Poisson request traces over a catalog.

use std::hash::{DefaultHasher, Hash, Hasher};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::catalog::{FileCatalog, FileId};
use crate::csvio;
use crate::{Error, Result};

const ARRIVAL_STREAM: u64 = 0;
const CHOICE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Request {
    /// Arrival time in seconds.
    pub time: f64,
    pub file: FileId,
}

/// Time-ordered request sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestTrace {
    events: Vec<Request>,
    total_rate: f64,
}

impl RequestTrace {
    /// Wraps externally supplied events; arrival times must strictly increase.
    pub fn from_events(events: Vec<Request>, total_rate: f64) -> Result<Self> {
        if let Some(k) = events.windows(2).position(|w| !(w[1].time > w[0].time)) {
            return Err(Error::param(
                "trace",
                format!("arrival times not strictly increasing at event {}", k + 1),
            ));
        }
        if events.first().is_some_and(|e| !(e.time.is_finite() && e.time >= 0.0)) {
            return Err(Error::param("trace", "first arrival must be a finite, non-negative time"));
        }
        Ok(RequestTrace { events, total_rate })
    }

    pub fn events(&self) -> &[Request] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }

    /// Time of the last arrival.
    pub fn horizon(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.time)
    }

    /// Content fingerprint; equal traces hash equally.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.total_rate.to_bits().hash(&mut h);
        for e in &self.events {
            e.time.to_bits().hash(&mut h);
            e.file.0.hash(&mut h);
        }
        h.finish()
    }

    /// Per-file request counts.
    pub fn file_counts(&self, n_files: usize) -> Vec<u64> {
        let mut counts = vec![0; n_files];
        for e in &self.events {
            counts[e.file.0] += 1;
        }
        counts
    }

    /// Writes `t,file_id` where `file_id` is the zero-based catalog index.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csvio::writer(path)?;
        w.write_record(["t", "file_id"])?;
        for e in &self.events {
            w.write_record([e.time.to_string(), e.file.0.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Reads a `t,file_id` trace. The rate is not stored in the file, so it is
    /// estimated as events per unit time.
    pub fn read_csv(path: &Path, catalog: &FileCatalog) -> Result<Self> {
        let mut r = csvio::reader(path)?;
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["t", "file_id"] {
            return Err(Error::Parse(format!("unexpected trace header {headers:?}")));
        }
        let mut events = Vec::new();
        for record in r.records() {
            let record = record?;
            let time: f64 = record
                .get(0)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad time in {record:?}")))?;
            let file: usize = record
                .get(1)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad file id in {record:?}")))?;
            catalog.check_id(FileId(file))?;
            events.push(Request {
                time,
                file: FileId(file),
            });
        }
        let horizon = events.last().map_or(0.0, |e| e.time);
        let rate = if horizon > 0.0 { events.len() as f64 / horizon } else { 0.0 };
        Self::from_events(events, rate)
    }
}

/// Draws `n_requests` Poisson arrivals at `total_rate`, each for file `i`
/// with probability q(i) / sum(q). Arrival gaps and file choices come from
/// separate streams of the same seed.
pub fn generate_trace(catalog: &FileCatalog, total_rate: f64, n_requests: usize, seed: u64) -> Result<RequestTrace> {
    if !(total_rate > 0.0 && total_rate.is_finite()) {
        return Err(Error::param("rate", format!("must be positive, got {total_rate}")));
    }
    if n_requests == 0 {
        return Err(Error::param("requests", "must be at least 1"));
    }
    let gaps = Exp::new(total_rate).map_err(|e| Error::param("rate", e.to_string()))?;
    let choice = WeightedIndex::new(catalog.popularity()).map_err(|e| Error::param("popularity", e.to_string()))?;

    let mut arrival_rng = ChaCha8Rng::seed_from_u64(seed);
    arrival_rng.set_stream(ARRIVAL_STREAM);
    let mut choice_rng = ChaCha8Rng::seed_from_u64(seed);
    choice_rng.set_stream(CHOICE_STREAM);

    let mut t = 0.0f64;
    let events = (0..n_requests)
        .map(|_| {
            let next = t + gaps.sample(&mut arrival_rng);
            // keep times strictly increasing even when a gap underflows
            t = if next > t { next } else { t.next_up() };
            Request {
                time: t,
                file: FileId(choice.sample(&mut choice_rng)),
            }
        })
        .collect();
    Ok(RequestTrace { events, total_rate })
}

/// Aggregate request rate giving traffic intensity `rho` against a server of
/// `service_rate` chunks per second when nothing is cached.
pub fn rate_for_intensity(catalog: &FileCatalog, rho: f64, service_rate: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::param("rho", format!("must lie in (0, 1), got {rho}")));
    }
    if !(service_rate > 0.0 && service_rate.is_finite()) {
        return Err(Error::param("service_rate", format!("must be positive, got {service_rate}")));
    }
    Ok(rho * service_rate / catalog.mean_request_chunks())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_request() {
        let cat = FileCatalog::uniform(5, 0.8, 1).unwrap();
        let trace = generate_trace(&cat, 2.0, 1, 9).unwrap();
        assert_eq!(trace.len(), 1);
        assert!(trace.events()[0].time > 0.0);
    }

    #[test]
    fn same_seed_same_trace() {
        let cat = FileCatalog::uniform(50, 0.8, 1).unwrap();
        let a = generate_trace(&cat, 1.0, 1_000, 42).unwrap();
        let b = generate_trace(&cat, 1.0, 1_000, 42).unwrap();
        let c = generate_trace(&cat, 1.0, 1_000, 43).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn mean_gap_matches_rate() {
        let cat = FileCatalog::uniform(100, 0.8, 1).unwrap();
        let rate = 3.5;
        let trace = generate_trace(&cat, rate, 1_000_000, 1).unwrap();
        let mean_gap = trace.horizon() / trace.len() as f64;
        assert!((mean_gap * rate - 1.0).abs() < 0.01, "mean gap {mean_gap}");
        assert!(trace.events().windows(2).all(|w| w[1].time > w[0].time));
    }

    #[test]
    fn empirical_popularity_l1() {
        let cat = FileCatalog::uniform(100, 0.8, 1).unwrap();
        let trace = generate_trace(&cat, 1.0, 1_000_000, 5).unwrap();
        let counts = trace.file_counts(cat.n_files());
        let l1: f64 = cat
            .file_ids()
            .map(|id| (counts[id.0] as f64 / trace.len() as f64 - cat.request_probability(id)).abs())
            .sum();
        assert!(l1 < 0.01, "l1 = {l1}");
    }

    #[test]
    fn intensity_scaling() {
        // E[s] = 5 for a uniform 5-chunk catalog
        let cat = FileCatalog::uniform(10, 1.0, 5).unwrap();
        let rate = rate_for_intensity(&cat, 0.5, 10.0).unwrap();
        assert!((rate - 1.0).abs() < 1e-12);
        let tiny = rate_for_intensity(&cat, 1e-9, 10.0).unwrap();
        assert!(tiny < 1e-8);
        let lengths = crate::catalog::censored_pareto_lengths(200, 2.0, 300.0, 3600.0, 1).unwrap();
        let vod = FileCatalog::with_lengths(crate::catalog::zipf_popularity(200, 0.8).unwrap(), lengths, 2.0).unwrap();
        let rate = rate_for_intensity(&vod, 0.9, 1.6).unwrap();
        assert!((rate * vod.mean_request_chunks() / 1.6 - 0.9).abs() < 1e-12);
        assert!(rate_for_intensity(&cat, 1.0, 10.0).is_err());
        assert!(rate_for_intensity(&cat, 0.0, 10.0).is_err());
        assert!(generate_trace(&cat, 0.0, 10, 1).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let cat = FileCatalog::uniform(30, 1.2, 2).unwrap();
        let trace = generate_trace(&cat, 0.25, 500, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        trace.write_csv(&path).unwrap();
        let back = RequestTrace::read_csv(&path, &cat).unwrap();
        assert_eq!(back.events(), trace.events());
    }

    #[test]
    fn rejects_unordered_events() {
        let ev = vec![
            Request { time: 1.0, file: FileId(0) },
            Request { time: 1.0, file: FileId(0) },
        ];
        assert!(RequestTrace::from_events(ev, 1.0).is_err());
    }
}
