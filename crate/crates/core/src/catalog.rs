//! File population: popularity weights, chunk counts and optional video lengths.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Pareto};

use crate::csvio;
use crate::{Error, Result};

/// Index of a file in its catalog. Files are stored in popularity-rank
/// order, so id 0 is the most popular file (rank 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FileId(pub usize);

impl FileId {
    pub fn index(self) -> usize {
        self.0
    }

    pub fn rank(self) -> usize {
        self.0 + 1
    }

    pub fn from_rank(rank: usize) -> Self {
        assert!(rank >= 1, "ranks start at 1");
        FileId(rank - 1)
    }
}

impl fmt::Display for FileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How chunk counts are paired with popularity ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CorrelationMode {
    /// Sizes keep their sampled order.
    #[default]
    Independent,
    /// Largest files get the highest popularity.
    Positive,
    /// Smallest files get the highest popularity.
    Negative,
}

impl CorrelationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CorrelationMode::Independent => "independent",
            CorrelationMode::Positive => "positive",
            CorrelationMode::Negative => "negative",
        }
    }
}

impl fmt::Display for CorrelationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorrelationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "independent" | "none" => Ok(CorrelationMode::Independent),
            "positive" | "pos" => Ok(CorrelationMode::Positive),
            "negative" | "neg" => Ok(CorrelationMode::Negative),
            other => Err(Error::param(
                "correlation",
                format!("expected independent|positive|negative, got `{other}`"),
            )),
        }
    }
}

/// The file population a cache serves.
///
/// `popularity[i]` is the request weight q(i) of the file with rank `i + 1`;
/// it doubles as that file's request rate, so the aggregate rate is the sum
/// of all weights. Weights are never normalized here.
#[derive(Debug, Clone, PartialEq)]
pub struct FileCatalog {
    popularity: Vec<f64>,
    chunks: Vec<u32>,
    lengths_s: Option<Vec<f64>>,
    chunk_len_s: Option<f64>,
}

impl FileCatalog {
    /// Builds a catalog from explicit weights and chunk counts.
    pub fn new(popularity: Vec<f64>, chunks: Vec<u32>) -> Result<Self> {
        let catalog = FileCatalog {
            popularity,
            chunks,
            lengths_s: None,
            chunk_len_s: None,
        };
        catalog.validate()?;
        Ok(catalog)
    }

    /// Zipf(alpha) popularity with every file split into `chunks` chunks.
    pub fn uniform(n_files: usize, alpha: f64, chunks: u32) -> Result<Self> {
        if chunks == 0 {
            return Err(Error::param("chunks", "must be at least 1"));
        }
        Self::new(zipf_popularity(n_files, alpha)?, vec![chunks; n_files])
    }

    /// A video catalog: chunk counts follow from the lengths and the chunk duration.
    pub fn with_lengths(popularity: Vec<f64>, lengths_s: Vec<f64>, chunk_len_s: f64) -> Result<Self> {
        let chunks = chunkize(&lengths_s, chunk_len_s)?;
        let catalog = FileCatalog {
            popularity,
            chunks,
            lengths_s: Some(lengths_s),
            chunk_len_s: Some(chunk_len_s),
        };
        catalog.validate()?;
        Ok(catalog)
    }

    fn validate(&self) -> Result<()> {
        if self.popularity.is_empty() {
            return Err(Error::param("n_files", "catalog must contain at least one file"));
        }
        if self.popularity.len() != self.chunks.len() {
            return Err(Error::param(
                "chunks",
                format!(
                    "{} chunk counts for {} popularity weights",
                    self.chunks.len(),
                    self.popularity.len()
                ),
            ));
        }
        if let Some(i) = self.popularity.iter().position(|q| !(q.is_finite() && *q > 0.0)) {
            return Err(Error::param("popularity", format!("weight of file {i} is not positive")));
        }
        if let Some(i) = self.popularity.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::param(
                "popularity",
                format!("weights must be non-increasing in rank (file {} > file {i})", i + 1),
            ));
        }
        if let Some(i) = self.chunks.iter().position(|&s| s == 0) {
            return Err(Error::param("chunks", format!("file {i} has no chunks")));
        }
        if let Some(lengths) = &self.lengths_s {
            if lengths.len() != self.chunks.len() {
                return Err(Error::param("lengths", "one length per file required"));
            }
        }
        Ok(())
    }

    pub fn n_files(&self) -> usize {
        self.popularity.len()
    }

    pub fn popularity(&self) -> &[f64] {
        &self.popularity
    }

    pub fn chunks(&self) -> &[u32] {
        &self.chunks
    }

    pub fn lengths_s(&self) -> Option<&[f64]> {
        self.lengths_s.as_deref()
    }

    pub fn chunk_len_s(&self) -> Option<f64> {
        self.chunk_len_s
    }

    pub fn q(&self, file: FileId) -> f64 {
        self.popularity[file.0]
    }

    pub fn size(&self, file: FileId) -> u32 {
        self.chunks[file.0]
    }

    pub fn file_ids(&self) -> impl Iterator<Item = FileId> + '_ {
        (0..self.n_files()).map(FileId)
    }

    pub fn check_id(&self, file: FileId) -> Result<()> {
        if file.0 < self.n_files() {
            Ok(())
        } else {
            Err(Error::UnknownFile {
                id: file.0,
                n_files: self.n_files(),
            })
        }
    }

    pub fn total_chunks(&self) -> u64 {
        self.chunks.iter().map(|&s| u64::from(s)).sum()
    }

    /// Sum of all weights; also the aggregate request rate.
    pub fn total_popularity(&self) -> f64 {
        self.popularity.iter().sum()
    }

    /// Probability that a request targets `file`.
    pub fn request_probability(&self, file: FileId) -> f64 {
        self.q(file) / self.total_popularity()
    }

    /// Popularity-weighted mean chunks per request.
    pub fn mean_request_chunks(&self) -> f64 {
        let total = self.total_popularity();
        self.popularity
            .iter()
            .zip(&self.chunks)
            .map(|(q, &s)| q / total * f64::from(s))
            .sum()
    }

    /// Re-pairs chunk counts (and lengths) with popularity ranks.
    /// The popularity vector itself never moves.
    pub fn couple_popularity_size(&self, mode: CorrelationMode) -> FileCatalog {
        let mut order: Vec<usize> = (0..self.n_files()).collect();
        let length_of = |i: usize| self.lengths_s.as_ref().map_or(0.0, |l| l[i]);
        match mode {
            CorrelationMode::Independent => return self.clone(),
            CorrelationMode::Positive => order.sort_by(|&a, &b| {
                self.chunks[b]
                    .cmp(&self.chunks[a])
                    .then(length_of(b).total_cmp(&length_of(a)))
            }),
            CorrelationMode::Negative => order.sort_by(|&a, &b| {
                self.chunks[a]
                    .cmp(&self.chunks[b])
                    .then(length_of(a).total_cmp(&length_of(b)))
            }),
        }
        FileCatalog {
            popularity: self.popularity.clone(),
            chunks: order.iter().map(|&i| self.chunks[i]).collect(),
            lengths_s: self
                .lengths_s
                .as_ref()
                .map(|l| order.iter().map(|&i| l[i]).collect()),
            chunk_len_s: self.chunk_len_s,
        }
    }

    /// Writes `rank,q,chunks,length_s`. `length_s` is empty when the catalog has no lengths.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csvio::writer(path)?;
        w.write_record(["rank", "q", "chunks", "length_s"])?;
        for id in self.file_ids() {
            let length = self
                .lengths_s
                .as_ref()
                .map(|l| l[id.0].to_string())
                .unwrap_or_default();
            w.write_record([
                id.rank().to_string(),
                self.q(id).to_string(),
                self.size(id).to_string(),
                length,
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csvio::reader(path)?;
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["rank", "q", "chunks", "length_s"] {
            return Err(Error::Parse(format!("unexpected catalog header {headers:?}")));
        }
        let mut popularity = Vec::new();
        let mut chunks = Vec::new();
        let mut lengths = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record?;
            let field = |k: usize| record.get(k).unwrap_or("").trim().to_owned();
            let rank: usize = parse_field(&field(0), "rank")?;
            if rank != row + 1 {
                return Err(Error::Parse(format!("row {} has rank {rank}", row + 1)));
            }
            popularity.push(parse_field(&field(1), "q")?);
            chunks.push(parse_field(&field(2), "chunks")?);
            let len = field(3);
            if !len.is_empty() {
                lengths.push(parse_field::<f64>(&len, "length_s")?);
            }
        }
        let lengths_s = match lengths.len() {
            0 => None,
            n if n == chunks.len() => Some(lengths),
            _ => return Err(Error::Parse("length_s must be given for all files or none".into())),
        };
        let catalog = FileCatalog {
            popularity,
            chunks,
            lengths_s,
            chunk_len_s: None,
        };
        catalog.validate()?;
        Ok(catalog)
    }
}

fn parse_field<T: FromStr>(value: &str, name: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("bad {name} value `{value}`")))
}

/// Unnormalized Zipf weights: q(i) = i^-alpha for ranks 1..=n.
pub fn zipf_popularity(n_files: usize, alpha: f64) -> Result<Vec<f64>> {
    if n_files == 0 {
        return Err(Error::param("n_files", "must be at least 1"));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    Ok((1..=n_files).map(|i| (i as f64).powf(-alpha)).collect())
}

/// Pareto(shape, scale) lengths, redrawn whenever a draw exceeds `cap`.
pub fn censored_pareto_lengths(
    n_files: usize,
    shape: f64,
    scale: f64,
    cap: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(shape > 1.0 && shape.is_finite()) {
        return Err(Error::param("shape", format!("must exceed 1, got {shape}")));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::param("scale", format!("must be positive, got {scale}")));
    }
    if !(cap > scale) {
        return Err(Error::param("cap", format!("must exceed scale {scale}, got {cap}")));
    }
    let pareto = Pareto::new(scale, shape).map_err(|e| Error::param("shape", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_files)
        .map(|_| loop {
            let x = pareto.sample(&mut rng);
            if x <= cap {
                break x;
            }
        })
        .collect())
}

/// Chunk counts for videos of the given lengths: ceil(length / chunk_len), at least 1.
pub fn chunkize(lengths_s: &[f64], chunk_len_s: f64) -> Result<Vec<u32>> {
    if !(chunk_len_s > 0.0 && chunk_len_s.is_finite()) {
        return Err(Error::param("chunk_len", format!("must be positive, got {chunk_len_s}")));
    }
    lengths_s
        .iter()
        .map(|&len| {
            if !(len.is_finite() && len >= 0.0) {
                return Err(Error::param("lengths", format!("invalid length {len}")));
            }
            let n = (len / chunk_len_s).ceil().max(1.0);
            if n > f64::from(u32::MAX) {
                return Err(Error::param("lengths", format!("length {len} yields too many chunks")));
            }
            Ok(n as u32)
        })
        .collect()
}
