//! Exact stationary analysis of tiny caches.
//!
//! The cache is a Markov chain over ordered entry lists, driven by i.i.d.
//! requests with probabilities q(i) / sum(q). Reachable states are
//! enumerated from the empty cache, and the stationary law comes from
//! power iteration on the lazy chain `(I + P) / 2`, which has the same
//! stationary distribution and is aperiodic. The transition rule is
//! implemented here on plain vectors, independently of `CacheState`.

use std::collections::HashMap;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use crate::cache::{CacheState, EvictionMode, PolicyKind};
use crate::catalog::{FileCatalog, FileId};
use crate::csvio;
use crate::{Error, Result};

pub const ORACLE_STATE_LIMIT: usize = 100_000;
const CONVERGENCE: f64 = 1e-12;
const MAX_ITERATIONS: usize = 10_000_000;

/// Entries `(file index, cached chunks)` from most to least recent.
pub type CacheStateKey = Vec<(usize, u32)>;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub policy: PolicyKind,
    pub states: Vec<CacheStateKey>,
    pub stationary: Vec<f64>,
    /// `marginals[i][j]`: stationary probability that file `i` has `j` chunks cached.
    pub marginals: Vec<Vec<f64>>,
    pub iterations: usize,
}

fn transition(
    state: &[(usize, u32)],
    file: usize,
    sizes: &[u32],
    capacity: u64,
    policy: PolicyKind,
    eviction: EvictionMode,
) -> CacheStateKey {
    let size = sizes[file];
    let prev = state.iter().find(|e| e.0 == file).map_or(0, |e| e.1);
    let count = match policy {
        PolicyKind::Lru => size,
        PolicyKind::Glru => size.min(prev + 1),
    };
    let mut next: CacheStateKey = Vec::with_capacity(state.len() + 1);
    next.push((file, count));
    next.extend(state.iter().copied().filter(|e| e.0 != file));
    let mut used: u64 = next.iter().map(|e| u64::from(e.1)).sum();
    while used > capacity {
        let last = next.last_mut().expect("overfull cache has entries");
        let drop = match eviction {
            EvictionMode::ChunkWise => u64::from(last.1).min(used - capacity),
            EvictionMode::WholeFile => u64::from(last.1),
        };
        last.1 -= drop as u32;
        used -= drop;
        if last.1 == 0 {
            next.pop();
        }
    }
    next
}

pub fn brute_force_oracle(
    catalog: &FileCatalog,
    capacity: u64,
    policy: PolicyKind,
    eviction: EvictionMode,
) -> Result<OracleResult> {
    if capacity == 0 {
        return Err(Error::param("capacity", "must be at least one chunk"));
    }
    let sizes = catalog.chunks();
    let n = catalog.n_files();
    let total = catalog.total_popularity();
    let probs: Vec<f64> = catalog.popularity().iter().map(|q| q / total).collect();

    let mut index: HashMap<CacheStateKey, usize> = HashMap::new();
    let mut states: Vec<CacheStateKey> = vec![Vec::new()];
    index.insert(Vec::new(), 0);
    let mut edges: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut frontier = 0;
    while frontier < states.len() {
        let mut out = Vec::with_capacity(n);
        for (file, &p) in probs.iter().enumerate() {
            let next = transition(&states[frontier], file, sizes, capacity, policy, eviction);
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    if states.len() >= ORACLE_STATE_LIMIT {
                        return Err(Error::StateSpaceOverflow {
                            limit: ORACLE_STATE_LIMIT,
                        });
                    }
                    states.push(next.clone());
                    index.insert(next, states.len() - 1);
                    states.len() - 1
                }
            };
            out.push((id, p));
        }
        edges.push(out);
        frontier += 1;
    }

    let m = states.len();
    let mut pi = vec![1.0 / m as f64; m];
    let mut next = vec![0.0; m];
    let mut iterations = 0;
    loop {
        next.iter_mut().zip(&pi).for_each(|(x, p)| *x = 0.5 * p);
        for (from, out) in edges.iter().enumerate() {
            let mass = 0.5 * pi[from];
            for &(to, p) in out {
                next[to] += mass * p;
            }
        }
        let norm: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= norm);
        let change: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        iterations += 1;
        if change < CONVERGENCE {
            break;
        }
        if iterations >= MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                tol: CONVERGENCE,
                residual: change,
            });
        }
    }

    let mut marginals: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![0.0; s as usize + 1]).collect();
    for (state, &p) in states.iter().zip(&pi) {
        let mut present = vec![0u32; n];
        for &(f, c) in state {
            present[f] = c;
        }
        for (f, &c) in present.iter().enumerate() {
            marginals[f][c as usize] += p;
        }
    }

    Ok(OracleResult {
        policy,
        states,
        stationary: pi,
        marginals,
        iterations,
    })
}

/// Per-file chunk-count frequencies observed after each simulated request.
/// The first 1% of requests (at least 100) are discarded as burn-in.
pub fn simulate_marginals(
    catalog: &FileCatalog,
    capacity: u64,
    policy: PolicyKind,
    eviction: EvictionMode,
    n_requests: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let mut cache = CacheState::new(capacity, catalog)?.with_eviction(eviction);
    let choice = WeightedIndex::new(catalog.popularity()).map_err(|e| Error::param("popularity", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let burn_in = (n_requests / 100).max(100);
    if n_requests <= burn_in {
        return Err(Error::param("requests", format!("need more than {burn_in} requests")));
    }
    let mut counts: Vec<Vec<u64>> = catalog.chunks().iter().map(|&s| vec![0; s as usize + 1]).collect();
    for k in 0..n_requests {
        cache.request(FileId(choice.sample(&mut rng)), policy)?;
        if k >= burn_in {
            for (f, hist) in counts.iter_mut().enumerate() {
                hist[cache.cached(FileId(f)) as usize] += 1;
            }
        }
    }
    cache.check_invariants()?;
    let samples = (n_requests - burn_in) as f64;
    Ok(counts
        .into_iter()
        .map(|h| h.into_iter().map(|c| c as f64 / samples).collect())
        .collect())
}

/// Writes `policy,file,j,stationary,simulated`; `simulated` is empty when absent.
pub fn write_oracle_csv(results: &[(OracleResult, Option<Vec<Vec<f64>>>)], path: &Path) -> Result<()> {
    let mut w = csvio::writer(path)?;
    w.write_record(["policy", "file", "j", "stationary", "simulated"])?;
    for (oracle, simulated) in results {
        for (f, dist) in oracle.marginals.iter().enumerate() {
            for (j, p) in dist.iter().enumerate() {
                let sim = simulated
                    .as_ref()
                    .map(|s| s[f][j].to_string())
                    .unwrap_or_default();
                w.write_record([oracle.policy.to_string(), f.to_string(), j.to_string(), p.to_string(), sim])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
