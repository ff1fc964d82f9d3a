use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use crate::analytic::{self, ApproxModel};
use crate::cache::{CacheState, PolicyKind};
use crate::catalog::{FileCatalog, FileId};
use crate::csvio;
use crate::{Error, Result};

use super::l1_distance;

/// Simulated against approximated chunk-count distribution for one rank.
#[derive(Debug, Clone, PartialEq)]
pub struct RankValidation {
    pub rank: usize,
    /// Requests of this file observed after warm-up.
    pub samples: u64,
    pub empirical: Vec<f64>,
    pub analytic: Vec<f64>,
    pub l1: f64,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub model: ApproxModel,
    pub warmup: usize,
    pub rows: Vec<RankValidation>,
    /// Occupancy range over all post-warm-up requests.
    pub occupancy_min: u64,
    pub occupancy_max: u64,
}

/// Compares the steady-state chunk counts seen by requests against the
/// characteristic-time approximation.
///
/// For each tracked rank the simulator records how many chunks of that file
/// were cached at the instants the file was requested. Requests before the
/// cache has absorbed `capacity` chunks are skipped. Only the order of
/// requests matters here, so files are drawn i.i.d. without timestamps.
pub fn validate_approximation(
    catalog: &FileCatalog,
    capacity: u64,
    n_requests: usize,
    ranks: &[usize],
    policy: PolicyKind,
    seed: u64,
) -> Result<ValidationReport> {
    let c = catalog.chunks()[0];
    if catalog.chunks().iter().any(|&s| s != c) {
        return Err(Error::param("chunks", "validation needs a constant chunk count per file"));
    }
    if let Some(&bad) = ranks.iter().find(|&&r| r == 0 || r > catalog.n_files()) {
        return Err(Error::param(
            "ranks",
            format!("rank {bad} outside 1..={}", catalog.n_files()),
        ));
    }
    let model = analytic::solve_tc(catalog, capacity, policy, analytic::DEFAULT_TOL)?;

    let mut cache = CacheState::new(capacity, catalog)?;
    let choice = WeightedIndex::new(catalog.popularity()).map_err(|e| Error::param("popularity", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut tracked = vec![usize::MAX; catalog.n_files()];
    for (slot, &rank) in ranks.iter().enumerate() {
        tracked[rank - 1] = slot;
    }
    let mut counts = vec![vec![0u64; c as usize + 1]; ranks.len()];
    let mut inserted = 0u64;
    let mut warmup = None;
    let (mut occ_min, mut occ_max) = (u64::MAX, 0u64);

    for k in 0..n_requests {
        let file = FileId(choice.sample(&mut rng));
        let out = cache.request(file, policy)?;
        if warmup.is_some() {
            let slot = tracked[file.0];
            if slot != usize::MAX {
                counts[slot][out.chunks_hit as usize] += 1;
            }
            occ_min = occ_min.min(cache.occupancy());
            occ_max = occ_max.max(cache.occupancy());
        }
        inserted += u64::from(out.chunks_added);
        if warmup.is_none() && inserted >= capacity {
            warmup = Some(k + 1);
        }
    }
    cache.check_invariants()?;
    let warmup = warmup.ok_or_else(|| Error::param("requests", "cache never filled; increase the request count"))?;

    let rows = ranks
        .iter()
        .zip(counts)
        .map(|(&rank, hist)| {
            let samples: u64 = hist.iter().sum();
            let empirical: Vec<f64> = if samples == 0 {
                vec![0.0; hist.len()]
            } else {
                hist.iter().map(|&h| h as f64 / samples as f64).collect()
            };
            let analytic = model.chunk_distribution(FileId::from_rank(rank))?.probs;
            let l1 = l1_distance(&empirical, &analytic);
            Ok(RankValidation {
                rank,
                samples,
                empirical,
                analytic,
                l1,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ValidationReport {
        model,
        warmup,
        rows,
        occupancy_min: if occ_min == u64::MAX { 0 } else { occ_min },
        occupancy_max: occ_max,
    })
}

/// Writes `rank,j,empirical,analytic`.
pub fn write_validation_csv(rows: &[RankValidation], path: &Path) -> Result<()> {
    let mut w = csvio::writer(path)?;
    w.write_record(["rank", "j", "empirical", "analytic"])?;
    for row in rows {
        for (j, (e, a)) in row.empirical.iter().zip(&row.analytic).enumerate() {
            w.write_record([row.rank.to_string(), j.to_string(), e.to_string(), a.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
