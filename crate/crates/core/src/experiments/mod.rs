//! Simulation drivers and the experiments built on them.

use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};

mod oracle;
mod simulate;
mod sweep;
mod validation;

pub use oracle::{brute_force_oracle, simulate_marginals, write_oracle_csv, CacheStateKey, OracleResult, ORACLE_STATE_LIMIT};
pub use simulate::{
    run_simulation, write_records_csv, MetricsReport, RequestRecord, SimOptions, SimulationRun, Warmup,
    STALL_EPSILON_S,
};
pub use sweep::{
    correlation_study, paired_batch_se, run_config, run_sweep, ConfigOutcome, CorrelationStudy, LengthModel,
    SummaryRow, SweepGrid, SweepResult, SweepSettings, VodConfig,
};
pub use validation::{validate_approximation, write_validation_csv, RankValidation, ValidationReport};

/// The five VoD performance metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    /// Fraction of chunks served from the cache.
    Pc,
    /// Fraction of requests with no cached chunk.
    Pm,
    /// Mean download time.
    Tw,
    /// Mean stall duration.
    Td,
    /// Fraction of requests that stall.
    Pd,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Pc, Metric::Pm, Metric::Tw, Metric::Td, Metric::Pd];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Pc => "p_c",
            Metric::Pm => "p_m",
            Metric::Tw => "T_w",
            Metric::Td => "T_d",
            Metric::Pd => "p_d",
        }
    }

    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::Pc)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `(new - base) / base`, with 0/0 taken as 0.
pub fn relative_difference(new: f64, base: f64) -> f64 {
    if new == base {
        0.0
    } else {
        (new - base) / base
    }
}

/// One metric compared across the two policies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub metric: Metric,
    pub lru: f64,
    pub glru: f64,
    /// (gLRU - LRU) / LRU, 0 when both are 0.
    pub relative: f64,
    /// gLRU - LRU.
    pub gross: f64,
}

impl ComparisonRow {
    pub fn new(metric: Metric, lru: f64, glru: f64) -> Self {
        ComparisonRow {
            metric,
            lru,
            glru,
            relative: relative_difference(glru, lru),
            gross: glru - lru,
        }
    }

    /// Whether gLRU did strictly better on this metric.
    pub fn glru_wins(&self) -> bool {
        if self.metric.higher_is_better() {
            self.glru > self.lru
        } else {
            self.glru < self.lru
        }
    }
}

/// Sum of absolute differences; the shorter slice is padded with zeros.
pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .sum()
}

/// Largest absolute difference; the shorter slice is padded with zeros.
pub fn linf_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Equal-width histogram over the finite values. A constant sample
/// yields a single zero-width bin.
pub fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return vec![HistogramBin {
            lo,
            hi,
            count: finite.len(),
        }];
    }
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            lo: lo + b as f64 * width,
            hi: if b + 1 == bins { hi } else { lo + (b + 1) as f64 * width },
            count: 0,
        })
        .collect();
    for v in finite {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        out[b].count += 1;
    }
    out
}

/// Deterministic child seed for a tagged sub-stream.
pub fn derive_seed(seed: u64, tag: &str, index: u64) -> u64 {
    let mut h = DefaultHasher::new();
    (seed, tag, index).hash(&mut h);
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_difference_zero_over_zero() {
        assert_eq!(relative_difference(0.0, 0.0), 0.0);
        assert_eq!(relative_difference(1.5, 1.0), 0.5);
        assert_eq!(relative_difference(0.5, 1.0), -0.5);
        assert!(relative_difference(1.0, 0.0).is_infinite());
    }

    #[test]
    fn comparison_row_consistency() {
        let row = ComparisonRow::new(Metric::Tw, 10.0, 7.0);
        assert_eq!(row.gross, -3.0);
        assert!((row.relative + 0.3).abs() < 1e-15);
        assert!(row.glru_wins());
        let pc = ComparisonRow::new(Metric::Pc, 0.2, 0.3);
        assert!(pc.glru_wins());
        assert!(!ComparisonRow::new(Metric::Td, 0.0, 0.0).glru_wins());
    }

    #[test]
    fn distances() {
        assert_eq!(l1_distance(&[0.5, 0.5], &[1.0]), 1.0);
        assert_eq!(linf_distance(&[0.5, 0.25, 0.25], &[0.5, 0.5]), 0.25);
    }

    #[test]
    fn histogram_counts_everything() {
        let values: Vec<f64> = (0..100).map(|i| i as f64 / 10.0).collect();
        let h = histogram(&values, 7);
        assert_eq!(h.len(), 7);
        assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), 100);
        assert_eq!(h[0].lo, 0.0);
        assert_eq!(h[6].hi, 9.9);
        assert_eq!(histogram(&[2.0, 2.0], 5).len(), 1);
        assert!(histogram(&[], 5).is_empty());
    }

    #[test]
    fn seeds_differ_by_tag() {
        assert_eq!(derive_seed(1, "trace", 0), derive_seed(1, "trace", 0));
        assert_ne!(derive_seed(1, "trace", 0), derive_seed(1, "service", 0));
        assert_ne!(derive_seed(1, "trace", 0), derive_seed(1, "trace", 1));
    }
}
