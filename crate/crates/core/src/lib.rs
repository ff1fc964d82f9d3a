//! Chunk-granular cache simulation and analysis.
//!
//! Files are split into unit-size chunks and cached in a single
//! recency-ordered structure. Two replacement policies share the same
//! machinery:
//!
//! * [`PolicyKind::Lru`] inserts every chunk of a requested file.
//! * [`PolicyKind::Glru`] keeps the chunks already cached and adds at most one
//!   more per request.
//!
//! Both evict chunk by chunk from the least-recent entry. The [`analytic`]
//! module approximates the steady state of either policy through a
//! characteristic time, [`delivery`] models a FIFO chunk server with video
//! playback on top, and [`experiments`] ties everything together into the
//! validation, sweep, correlation and oracle runs exposed by the `glru`
//! binary.

pub mod analytic;
pub mod cache;
pub mod catalog;
pub mod cli;
pub mod delivery;
mod error;
pub mod experiments;
pub mod workload;

pub use analytic::{ApproxModel, ChunkDistribution};
pub use cache::{CacheState, EvictionMode, PolicyKind, RequestOutcome};
pub use catalog::{CorrelationMode, FileCatalog, FileId};
pub use delivery::{DownloadTimeline, FifoQueue, ServiceConfig};
pub use error::{Error, Result};
pub use workload::RequestTrace;

pub(crate) mod csvio {
    use std::fs::File;
    use std::path::Path;

    use crate::{Error, Result};

    pub fn writer(path: &Path) -> Result<csv::Writer<File>> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(csv::Writer::from_writer(file))
    }

    pub fn reader(path: &Path) -> Result<csv::Reader<File>> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(csv::Reader::from_reader(file))
    }
}
