//! FIFO chunk server and video playback accounting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Megabytes per second of video.
pub const VIDEO_MB_PER_S: f64 = 3.13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceConfig {
    /// Seconds of video per chunk (L).
    pub chunk_len_s: f64,
    /// Server throughput in MB/s (r).
    pub processing_rate_mbps: f64,
    pub video_mb_per_s: f64,
    /// Buffering time before playback starts (d_s).
    pub startup_delay_s: f64,
}

impl ServiceConfig {
    pub fn new(chunk_len_s: f64, processing_rate_mbps: f64, startup_delay_s: f64) -> Result<Self> {
        let cfg = ServiceConfig {
            chunk_len_s,
            processing_rate_mbps,
            video_mb_per_s: VIDEO_MB_PER_S,
            startup_delay_s,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.chunk_len_s) {
            return Err(Error::param("chunk_len", format!("must be positive, got {}", self.chunk_len_s)));
        }
        if !positive(self.processing_rate_mbps) {
            return Err(Error::param("rate", format!("must be positive, got {}", self.processing_rate_mbps)));
        }
        if !positive(self.video_mb_per_s) {
            return Err(Error::param("video_mb_per_s", "must be positive"));
        }
        if !(self.startup_delay_s >= 0.0 && self.startup_delay_s.is_finite()) {
            return Err(Error::param("startup_delay", format!("must be non-negative, got {}", self.startup_delay_s)));
        }
        Ok(())
    }

    /// Chunks served per second: r / (3.13 L).
    pub fn service_rate(&self) -> f64 {
        self.processing_rate_mbps / (self.video_mb_per_s * self.chunk_len_s)
    }
}

/// Exponential service times addressed by (request index, chunk index).
///
/// Every request owns a ChaCha stream and chunk `k` always reads the same
/// words of it, so two runs over the same trace see identical service times
/// for the same chunk regardless of which chunks each run had to fetch.
#[derive(Debug, Clone, Copy)]
pub struct ServiceDraws {
    seed: u64,
    rate: f64,
}

impl ServiceDraws {
    pub fn new(seed: u64, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::param("service_rate", format!("must be positive, got {rate}")));
        }
        Ok(ServiceDraws { seed, rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Service times of chunks `first_chunk, first_chunk + 1, ...` of request `request`.
    pub fn chunk_times(&self, request: u64, first_chunk: u32) -> impl Iterator<Item = f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(request);
        // one f64 consumes two 32-bit words
        rng.set_word_pos(2 * u128::from(first_chunk));
        let rate = self.rate;
        std::iter::repeat_with(move || {
            let u: f64 = rng.random();
            -(-u).ln_1p() / rate
        })
    }
}

/// Single FIFO server shared by all requests.
#[derive(Debug, Clone, Default)]
pub struct FifoQueue {
    last_completion: f64,
}

impl FifoQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Time the server finishes all work queued so far.
    pub fn busy_until(&self) -> f64 {
        self.last_completion
    }

    /// Appends `uncached` chunks at `request_time` and returns their
    /// completion times in chunk order. Requests must arrive in time order.
    pub fn enqueue(
        &mut self,
        request_time: f64,
        uncached: usize,
        service_times: impl IntoIterator<Item = f64>,
    ) -> Vec<f64> {
        let mut done = Vec::with_capacity(uncached);
        let mut clock = self.last_completion.max(request_time);
        for service in service_times.into_iter().take(uncached) {
            clock += service;
            done.push(clock);
        }
        assert_eq!(done.len(), uncached, "service time source ran dry");
        self.last_completion = clock;
        done
    }
}

/// When each chunk of one request becomes available.
#[derive(Debug, Clone, PartialEq)]
pub struct DownloadTimeline {
    pub request_time: f64,
    /// Absolute availability time per chunk.
    pub ready: Vec<f64>,
    pub from_cache: Vec<bool>,
}

impl DownloadTimeline {
    /// The first `cached` chunks come from the cache; the rest complete at `completions`.
    pub fn from_prefix(request_time: f64, cached: usize, completions: &[f64]) -> Self {
        let total = cached + completions.len();
        let mut ready = Vec::with_capacity(total);
        ready.resize(cached, request_time);
        ready.extend_from_slice(completions);
        let mut from_cache = vec![true; cached];
        from_cache.resize(total, false);
        DownloadTimeline {
            request_time,
            ready,
            from_cache,
        }
    }

    pub fn n_chunks(&self) -> usize {
        self.ready.len()
    }

    /// Chunk availability measured from the request.
    pub fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        self.ready.iter().map(move |&t| t - self.request_time)
    }

    /// Time until every chunk is available.
    pub fn download_time(&self) -> f64 {
        self.offsets().fold(0.0, f64::max)
    }

    pub fn stall_duration(&self, startup_delay_s: f64, chunk_len_s: f64) -> f64 {
        stall_duration(self.offsets(), startup_delay_s, chunk_len_s)
    }
}

/// Playback delay beyond the ideal schedule.
///
/// Chunk 1 plays at `max(d_s, ready_1)`, chunk `k` at
/// `max(play_{k-1} + L, ready_k)`; the stall is how late the last chunk
/// starts compared with `d_s + (s - 1) L`. The recursion is tracked as
/// lateness against the ideal schedule so that on-time playback gives
/// exactly zero.
pub fn stall_duration(ready_offsets: impl IntoIterator<Item = f64>, startup_delay_s: f64, chunk_len_s: f64) -> f64 {
    ready_offsets
        .into_iter()
        .enumerate()
        .fold(0.0, |late: f64, (k, ready)| {
            let ideal = startup_delay_s + k as f64 * chunk_len_s;
            late.max(ready - ideal)
        })
}
