//! Characteristic-time approximations for LRU and gLRU.
//!
//! Each file `i` is modelled as being requested by its own Poisson process
//! of rate q(i). The cache is summarized by a single deterministic
//! characteristic time `t_c`: content not refreshed within `t_c` has been
//! pushed out. With `x_i = 1 - exp(-q(i) t_c)`:
//!
//! * LRU holds all of file `i` with probability `x_i` and nothing otherwise,
//!   so `t_c` solves `C = sum_i x_i s(i)`.
//! * gLRU holds at least `j` chunks with probability `x_i^j` (the last `j`
//!   inter-request gaps were all shorter than `t_c`), so `t_c` solves
//!   `C = sum_i sum_{j=1..s(i)} x_i^j`.
//!
//! Both capacity functions increase strictly from 0 to the total chunk
//! count, so bisection finds the unique root.

use std::path::Path;

use crate::cache::PolicyKind;
use crate::catalog::{FileCatalog, FileId};
use crate::csvio;
use crate::{Error, Result};

/// Absolute tolerance on the capacity equation, in chunks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Probability that a file of rate `q` was requested within the last `t`.
pub fn any_chunk_probability(q: f64, t: f64) -> f64 {
    -(-q * t).exp_m1()
}

/// Expected gLRU-cached chunks of a file: `sum_{j=1..s} x^j` with `x = 1 - exp(-q t)`.
///
/// Evaluated as `x (1 - x^s) / (1 - x)` with `1 - x = exp(-q t)` computed
/// directly, which stays accurate as `x -> 1` (limit `s`) and `x -> 0`.
pub fn expected_glru_chunks(q: f64, t: f64, s: u32) -> f64 {
    let miss = (-q * t).exp();
    if miss == 0.0 {
        return f64::from(s);
    }
    let x = any_chunk_probability(q, t);
    // 1 - x^s = -expm1(s ln(1 - miss))
    let one_minus_pow = -(f64::from(s) * (-miss).ln_1p()).exp_m1();
    x * one_minus_pow / miss
}

/// Expected cached chunks at characteristic time `t` under `policy`.
pub fn expected_occupancy(catalog: &FileCatalog, policy: PolicyKind, t: f64) -> f64 {
    let terms = catalog
        .popularity()
        .iter()
        .zip(catalog.chunks())
        .map(|(&q, &s)| match policy {
            PolicyKind::Lru => any_chunk_probability(q, t) * f64::from(s),
            PolicyKind::Glru => expected_glru_chunks(q, t, s),
        });
    neumaier_sum(terms)
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A solved characteristic-time model.
#[derive(Debug, Clone)]
pub struct ApproxModel {
    policy: PolicyKind,
    t_c: f64,
    capacity: u64,
    residual: f64,
    catalog: FileCatalog,
}

pub fn solve_tc_lru(catalog: &FileCatalog, capacity: u64, tol: f64) -> Result<ApproxModel> {
    solve_tc(catalog, capacity, PolicyKind::Lru, tol)
}

pub fn solve_tc_glru(catalog: &FileCatalog, capacity: u64, tol: f64) -> Result<ApproxModel> {
    solve_tc(catalog, capacity, PolicyKind::Glru, tol)
}

/// Solves the capacity equation of `policy` for `t_c` by bracketed bisection.
pub fn solve_tc(catalog: &FileCatalog, capacity: u64, policy: PolicyKind, tol: f64) -> Result<ApproxModel> {
    let total = catalog.total_chunks();
    if capacity == 0 {
        return Err(Error::param("capacity", "must be positive"));
    }
    if capacity >= total {
        return Err(Error::CapacityTooLarge { capacity, total });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    let target = capacity as f64;
    let objective = |t: f64| expected_occupancy(catalog, policy, t) - target;

    let mut lo = 0.0f64;
    let mut hi = 1.0 / catalog.popularity()[0];
    let mut expansions = 0;
    while objective(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 2_000 || !hi.is_finite() {
            return Err(Error::NoConvergence {
                tol,
                residual: objective(lo).abs(),
            });
        }
    }

    let mut best = f64::INFINITY;
    loop {
        let mid = lo + 0.5 * (hi - lo);
        let r = objective(mid);
        best = best.min(r.abs());
        if r.abs() <= tol {
            return Ok(ApproxModel {
                policy,
                t_c: mid,
                capacity,
                residual: r.abs(),
                catalog: catalog.clone(),
            });
        }
        if mid <= lo || mid >= hi {
            return Err(Error::NoConvergence { tol, residual: best });
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

impl ApproxModel {
    pub fn policy(&self) -> PolicyKind {
        self.policy
    }

    pub fn t_c(&self) -> f64 {
        self.t_c
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    /// |C - expected occupancy at t_c|.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn catalog(&self) -> &FileCatalog {
        &self.catalog
    }

    pub fn expected_occupancy(&self) -> f64 {
        expected_occupancy(&self.catalog, self.policy, self.t_c)
    }

    /// 1 - exp(-q t_c): whole-file hit probability under LRU, any-chunk
    /// probability under gLRU.
    pub fn lru_hit_probability(&self, file: FileId) -> Result<f64> {
        self.catalog.check_id(file)?;
        Ok(any_chunk_probability(self.catalog.q(file), self.t_c))
    }

    /// Probability that at least `j` chunks of `file` are cached, `1 <= j <= s(file)`.
    pub fn hit_at_least_j(&self, file: FileId, j: u32) -> Result<f64> {
        self.catalog.check_id(file)?;
        let s = self.catalog.size(file);
        if j == 0 || j > s {
            return Err(Error::ChunkIndexOutOfRange { file: file.0, j, max: s });
        }
        let x = any_chunk_probability(self.catalog.q(file), self.t_c);
        Ok(match self.policy {
            PolicyKind::Glru => x.powi(j as i32),
            // all or nothing
            PolicyKind::Lru => x,
        })
    }

    /// Distribution of the number of cached chunks of `file`.
    pub fn chunk_distribution(&self, file: FileId) -> Result<ChunkDistribution> {
        self.catalog.check_id(file)?;
        let q = self.catalog.q(file);
        let s = self.catalog.size(file) as usize;
        let miss = (-q * self.t_c).exp();
        let x = any_chunk_probability(q, self.t_c);
        let mut probs = vec![0.0; s + 1];
        probs[0] = miss;
        match self.policy {
            PolicyKind::Lru => probs[s] = x,
            PolicyKind::Glru => {
                // h_j - h_{j+1} = x^j (1 - x)
                let mut h = x;
                for p in probs.iter_mut().take(s).skip(1) {
                    *p = h * miss;
                    h *= x;
                }
                probs[s] = h;
            }
        }
        Ok(ChunkDistribution { file, probs })
    }

    pub fn expected_chunks(&self, file: FileId) -> Result<f64> {
        self.catalog.check_id(file)?;
        let (q, s) = (self.catalog.q(file), self.catalog.size(file));
        Ok(match self.policy {
            PolicyKind::Lru => any_chunk_probability(q, self.t_c) * f64::from(s),
            PolicyKind::Glru => expected_glru_chunks(q, self.t_c, s),
        })
    }

    /// Writes `rank,q,s,t_c,h1..h{max_j}`; cells for `j > s` are left empty.
    pub fn write_csv(&self, path: &Path, max_j: u32) -> Result<()> {
        let mut w = csvio::writer(path)?;
        let mut header: Vec<String> = ["rank", "q", "s", "t_c"].map(String::from).to_vec();
        header.extend((1..=max_j).map(|j| format!("h{j}")));
        w.write_record(&header)?;
        for id in self.catalog.file_ids() {
            let s = self.catalog.size(id);
            let mut row = vec![
                id.rank().to_string(),
                self.catalog.q(id).to_string(),
                s.to_string(),
                self.t_c.to_string(),
            ];
            for j in 1..=max_j {
                row.push(if j <= s {
                    self.hit_at_least_j(id, j)?.to_string()
                } else {
                    String::new()
                });
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// P(exactly j chunks cached) for j = 0..=s(file).
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkDistribution {
    pub file: FileId,
    pub probs: Vec<f64>,
}

impl ChunkDistribution {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// P(at least j chunks cached).
    pub fn tail(&self, j: usize) -> f64 {
        self.probs.iter().skip(j).sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(j, p)| j as f64 * p).sum()
    }
}

/// One rank of the any-chunk / full-file hit comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig1Row {
    pub rank: usize,
    pub lru_any: f64,
    pub glru_any: f64,
    pub glru_full: f64,
}

/// Hit probabilities per popularity rank from both solved models.
pub fn figure1_curves(catalog: &FileCatalog, capacity: u64, tol: f64) -> Result<Vec<Fig1Row>> {
    let lru = solve_tc_lru(catalog, capacity, tol)?;
    let glru = solve_tc_glru(catalog, capacity, tol)?;
    catalog
        .file_ids()
        .map(|id| {
            Ok(Fig1Row {
                rank: id.rank(),
                lru_any: lru.lru_hit_probability(id)?,
                glru_any: glru.hit_at_least_j(id, 1)?,
                glru_full: glru.hit_at_least_j(id, catalog.size(id))?,
            })
        })
        .collect()
}

pub fn write_fig1_csv(rows: &[Fig1Row], path: &Path) -> Result<()> {
    let mut w = csvio::writer(path)?;
    w.write_record(["rank", "lru_any", "glru_any", "glru_full"])?;
    for r in rows {
        w.write_record([
            r.rank.to_string(),
            r.lru_any.to_string(),
            r.glru_any.to_string(),
            r.glru_full.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
