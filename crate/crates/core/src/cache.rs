//! Recency-ordered chunk cache shared by the LRU and gLRU policies.
//!
//! Entries are `(file, cached_chunks)` pairs kept in a doubly linked list
//! threaded through per-file slots, so lookups, moves to the head and tail
//! evictions are all O(1). Capacity is counted in chunks.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::catalog::{FileCatalog, FileId};
use crate::{Error, Result};

const NIL: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    /// Every chunk of the requested file is brought to the head.
    Lru,
    /// Cached chunks move to the head plus at most one new chunk.
    Glru,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 2] = [PolicyKind::Lru, PolicyKind::Glru];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Lru => "lru",
            PolicyKind::Glru => "glru",
        }
    }

    /// Cached chunk count after a request that found `prev` of `size` chunks.
    pub fn target_count(self, prev: u32, size: u32) -> u32 {
        match self {
            PolicyKind::Lru => size,
            PolicyKind::Glru => (prev + 1).min(size),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lru" => Ok(PolicyKind::Lru),
            "glru" => Ok(PolicyKind::Glru),
            other => Err(Error::param("policy", format!("expected lru|glru, got `{other}`"))),
        }
    }
}

/// What happens at the tail when the cache overflows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvictionMode {
    /// Remove single chunks from the tail entry until the cache fits exactly.
    #[default]
    ChunkWise,
    /// Remove whole tail entries, possibly leaving free space.
    WholeFile,
}

impl EvictionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EvictionMode::ChunkWise => "chunk",
            EvictionMode::WholeFile => "file",
        }
    }
}

impl FromStr for EvictionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chunk" | "chunkwise" => Ok(EvictionMode::ChunkWise),
            "file" | "wholefile" | "whole-file" => Ok(EvictionMode::WholeFile),
            other => Err(Error::param("eviction", format!("expected chunk|file, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RequestOutcome {
    /// Chunks of the requested file found in the cache before the update.
    pub chunks_hit: u32,
    /// Chunks of the requested file inserted by this request.
    pub chunks_added: u32,
    /// Chunks removed per file, in eviction order.
    pub evicted: Vec<(FileId, u32)>,
}

#[derive(Debug, Clone)]
pub struct CacheState {
    capacity: u64,
    mode: EvictionMode,
    sizes: Vec<u32>,
    counts: Vec<u32>,
    prev: Vec<usize>,
    next: Vec<usize>,
    head: usize,
    tail: usize,
    occupancy: u64,
    entries: usize,
}

impl CacheState {
    pub fn new(capacity: u64, catalog: &FileCatalog) -> Result<Self> {
        Self::with_sizes(capacity, catalog.chunks().to_vec())
    }

    /// An empty cache for files with the given chunk counts.
    pub fn with_sizes(capacity: u64, sizes: Vec<u32>) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::param("capacity", "must be at least one chunk"));
        }
        if let Some(i) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::param("chunks", format!("file {i} has no chunks")));
        }
        let n = sizes.len();
        Ok(CacheState {
            capacity,
            mode: EvictionMode::default(),
            sizes,
            counts: vec![0; n],
            prev: vec![NIL; n],
            next: vec![NIL; n],
            head: NIL,
            tail: NIL,
            occupancy: 0,
            entries: 0,
        })
    }

    pub fn with_eviction(mut self, mode: EvictionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn occupancy(&self) -> u64 {
        self.occupancy
    }

    pub fn eviction_mode(&self) -> EvictionMode {
        self.mode
    }

    /// Number of resident files.
    pub fn len(&self) -> usize {
        self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries == 0
    }

    fn check(&self, file: FileId) -> Result<()> {
        if file.0 < self.sizes.len() {
            Ok(())
        } else {
            Err(Error::UnknownFile {
                id: file.0,
                n_files: self.sizes.len(),
            })
        }
    }

    /// Chunks of `file` currently cached. Does not touch recency.
    pub fn lookup(&self, file: FileId) -> Result<u32> {
        self.check(file)?;
        Ok(self.counts[file.0])
    }

    /// Like [`lookup`](Self::lookup) for ids already known to be valid.
    pub fn cached(&self, file: FileId) -> u32 {
        self.counts[file.0]
    }

    /// Serves one request for `file` and applies `policy`.
    pub fn request(&mut self, file: FileId, policy: PolicyKind) -> Result<RequestOutcome> {
        self.check(file)?;
        let f = file.0;
        let prev = self.counts[f];
        let target = policy.target_count(prev, self.sizes[f]);

        if prev > 0 {
            self.unlink(f);
        }
        self.push_head(f);
        self.counts[f] = target;
        self.occupancy += u64::from(target - prev);

        let evicted = self.evict_overflow();
        Ok(RequestOutcome {
            chunks_hit: prev,
            chunks_added: target - prev,
            evicted,
        })
    }

    fn evict_overflow(&mut self) -> Vec<(FileId, u32)> {
        let mut evicted = Vec::new();
        while self.occupancy > self.capacity {
            let t = self.tail;
            debug_assert_ne!(t, NIL);
            let have = self.counts[t];
            let take = match self.mode {
                EvictionMode::ChunkWise => {
                    // bounded by `have`, so the cast is lossless
                    (self.occupancy - self.capacity).min(u64::from(have)) as u32
                }
                EvictionMode::WholeFile => have,
            };
            self.counts[t] -= take;
            self.occupancy -= u64::from(take);
            if self.counts[t] == 0 {
                self.unlink(t);
            }
            evicted.push((FileId(t), take));
        }
        evicted
    }

    fn unlink(&mut self, f: usize) {
        let (p, n) = (self.prev[f], self.next[f]);
        if p == NIL {
            self.head = n;
        } else {
            self.next[p] = n;
        }
        if n == NIL {
            self.tail = p;
        } else {
            self.prev[n] = p;
        }
        self.prev[f] = NIL;
        self.next[f] = NIL;
        self.entries -= 1;
    }

    fn push_head(&mut self, f: usize) {
        self.prev[f] = NIL;
        self.next[f] = self.head;
        if self.head == NIL {
            self.tail = f;
        } else {
            self.prev[self.head] = f;
        }
        self.head = f;
        self.entries += 1;
    }

    /// Resident entries from most to least recent.
    pub fn entries(&self) -> Entries<'_> {
        Entries {
            cache: self,
            cursor: self.head,
        }
    }

    pub fn snapshot_counts(&self) -> BTreeMap<FileId, u32> {
        self.entries().collect()
    }

    /// Walks the whole structure and reports the first broken invariant.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Invariant(msg));
        if self.occupancy > self.capacity {
            return fail(format!("occupancy {} exceeds capacity {}", self.occupancy, self.capacity));
        }
        let mut seen = vec![false; self.sizes.len()];
        let mut total = 0u64;
        let mut n = 0usize;
        let mut prev = NIL;
        let mut cur = self.head;
        while cur != NIL {
            if seen[cur] {
                return fail(format!("file {cur} appears twice"));
            }
            seen[cur] = true;
            if self.prev[cur] != prev {
                return fail(format!("broken back link at file {cur}"));
            }
            let c = self.counts[cur];
            if c == 0 || c > self.sizes[cur] {
                return fail(format!("file {cur} caches {c} of {} chunks", self.sizes[cur]));
            }
            total += u64::from(c);
            n += 1;
            prev = cur;
            cur = self.next[cur];
        }
        if prev != self.tail {
            return fail("tail pointer does not match list end".into());
        }
        if total != self.occupancy || n != self.entries {
            return fail(format!(
                "index says {} chunks in {} entries, list holds {total} in {n}",
                self.occupancy, self.entries
            ));
        }
        if let Some(f) = (0..self.sizes.len()).find(|&f| !seen[f] && self.counts[f] != 0) {
            return fail(format!("file {f} has a count but no entry"));
        }
        Ok(())
    }
}

pub struct Entries<'a> {
    cache: &'a CacheState,
    cursor: usize,
}

impl Iterator for Entries<'_> {
    type Item = (FileId, u32);

    fn next(&mut self) -> Option<Self::Item> {
        if self.cursor == NIL {
            return None;
        }
        let f = self.cursor;
        self.cursor = self.cache.next[f];
        Some((FileId(f), self.cache.counts[f]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cache(capacity: u64, sizes: &[u32]) -> CacheState {
        CacheState::with_sizes(capacity, sizes.to_vec()).unwrap()
    }

    fn order(c: &CacheState) -> Vec<(usize, u32)> {
        c.entries().map(|(f, n)| (f.0, n)).collect()
    }

    #[test]
    fn empty_lookup() {
        let c = cache(10, &[3, 4]);
        assert_eq!(c.lookup(FileId(0)).unwrap(), 0);
        assert!(c.lookup(FileId(2)).is_err());
        assert!(c.snapshot_counts().is_empty());
    }

    #[test]
    fn glru_adds_one_chunk() {
        let mut c = cache(10, &[3]);
        let out = c.request(FileId(0), PolicyKind::Glru).unwrap();
        assert_eq!(out.chunks_hit, 0);
        assert_eq!(c.lookup(FileId(0)).unwrap(), 1);
        assert_eq!(c.snapshot_counts(), BTreeMap::from([(FileId(0), 1)]));
    }

    #[test]
    fn glru_hundred_chunk_file_with_ten_cached() {
        // file 0 has 100 chunks, 10 cached at the head of a 100-chunk cache
        let mut c = cache(100, &[100]);
        for _ in 0..10 {
            c.request(FileId(0), PolicyKind::Glru).unwrap();
        }
        assert_eq!(c.lookup(FileId(0)).unwrap(), 10);
        let out = c.request(FileId(0), PolicyKind::Glru).unwrap();
        assert_eq!(out.chunks_hit, 10);
        assert_eq!(order(&c), vec![(0, 11)]);
    }

    #[test]
    fn lru_inserts_whole_file() {
        let mut c = cache(100, &[40]);
        let out = c.request(FileId(0), PolicyKind::Lru).unwrap();
        assert_eq!(out.chunks_hit, 0);
        assert_eq!(out.chunks_added, 40);
        assert!(out.evicted.is_empty());
        assert_eq!(order(&c), vec![(0, 40)]);
        assert_eq!(c.occupancy(), 40);
    }

    #[test]
    fn glru_evicts_tail_entry() {
        // files: A=0, B=1, D=2; build head (B,2), tail (A,1) in a 3-chunk cache
        let mut c = cache(3, &[2, 2, 2]);
        c.request(FileId(0), PolicyKind::Glru).unwrap();
        c.request(FileId(1), PolicyKind::Glru).unwrap();
        c.request(FileId(1), PolicyKind::Glru).unwrap();
        assert_eq!(order(&c), vec![(1, 2), (0, 1)]);
        let out = c.request(FileId(2), PolicyKind::Glru).unwrap();
        assert_eq!(order(&c), vec![(2, 1), (1, 2)]);
        assert_eq!(out.evicted, vec![(FileId(0), 1)]);
        assert_eq!(c.occupancy(), 3);
        c.check_invariants().unwrap();
    }

    #[test]
    fn lru_partially_evicts_tail() {
        let mut c = cache(3, &[2, 2]);
        c.request(FileId(0), PolicyKind::Lru).unwrap();
        c.request(FileId(1), PolicyKind::Lru).unwrap();
        assert_eq!(c.snapshot_counts(), BTreeMap::from([(FileId(1), 2), (FileId(0), 1)]));
        c.check_invariants().unwrap();
    }

    #[test]
    fn whole_file_eviction_leaves_slack() {
        let mut c = cache(3, &[2, 2]).with_eviction(EvictionMode::WholeFile);
        c.request(FileId(0), PolicyKind::Lru).unwrap();
        c.request(FileId(1), PolicyKind::Lru).unwrap();
        assert_eq!(order(&c), vec![(1, 2)]);
        assert_eq!(c.occupancy(), 2);
        c.check_invariants().unwrap();
    }

    #[test]
    fn oversized_lru_file_trims_itself() {
        let mut c = cache(3, &[1, 5]);
        c.request(FileId(0), PolicyKind::Lru).unwrap();
        let out = c.request(FileId(1), PolicyKind::Lru).unwrap();
        assert_eq!(out.evicted, vec![(FileId(0), 1), (FileId(1), 2)]);
        assert_eq!(order(&c), vec![(1, 3)]);
        c.check_invariants().unwrap();

        let mut whole = cache(3, &[5]).with_eviction(EvictionMode::WholeFile);
        whole.request(FileId(0), PolicyKind::Lru).unwrap();
        assert!(whole.is_empty());
        whole.check_invariants().unwrap();
    }

    #[test]
    fn fully_cached_glru_file_only_moves() {
        let mut c = cache(4, &[1, 2]);
        c.request(FileId(1), PolicyKind::Glru).unwrap();
        c.request(FileId(1), PolicyKind::Glru).unwrap();
        c.request(FileId(0), PolicyKind::Glru).unwrap();
        let out = c.request(FileId(1), PolicyKind::Glru).unwrap();
        assert_eq!(out.chunks_hit, 2);
        assert_eq!(out.chunks_added, 0);
        assert_eq!(order(&c), vec![(1, 2), (0, 1)]);
    }

    #[test]
    fn lookup_keeps_order() {
        let mut c = cache(10, &[1, 1, 1]);
        for f in 0..3 {
            c.request(FileId(f), PolicyKind::Lru).unwrap();
        }
        let before = order(&c);
        c.lookup(FileId(0)).unwrap();
        assert_eq!(order(&c), before);
    }

    #[test]
    fn rejects_zero_capacity() {
        assert!(CacheState::with_sizes(0, vec![1]).is_err());
        assert!(CacheState::with_sizes(1, vec![0]).is_err());
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("GLRU".parse::<PolicyKind>().unwrap(), PolicyKind::Glru);
        assert_eq!("lru".parse::<PolicyKind>().unwrap(), PolicyKind::Lru);
        assert!("fifo".parse::<PolicyKind>().is_err());
    }
}
