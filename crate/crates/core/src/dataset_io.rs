//! Dataset file formats, synthetic data and brute-force ground truth.
//!
//! Formats (all little-endian):
//!
//! - **fvecs**: per record, an `i32` dimension `d` followed by `d` `f32`s.
//! - **ivecs**: same framing with `i32` payload.
//! - **raw-bin**: `u32 n`, `u32 d`, then `n * d` `f32`s.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{cmp_dist_id, GroundTruth, Metric, VectorDataset, Vectors, VertexId};
use crate::rng;

/// Generic record-framed parser shared by fvecs and ivecs.
fn parse_framed<T>(bytes: &[u8], decode: impl Fn([u8; 4]) -> T) -> Result<(usize, Vec<T>)> {
    if bytes.is_empty() {
        return Err(Error::at_byte(0, "empty file: at least one record is required"));
    }
    let mut offset = 0usize;
    let mut dim: Option<usize> = None;
    let mut out = Vec::new();
    while offset < bytes.len() {
        if bytes.len() - offset < 4 {
            return Err(Error::at_byte(offset as u64, "truncated record header"));
        }
        let d = i32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap());
        if d <= 0 {
            return Err(Error::at_byte(
                offset as u64,
                format!("record dimension must be positive, found {d}"),
            ));
        }
        let d = d as usize;
        match dim {
            None => dim = Some(d),
            Some(expected) if expected != d => {
                return Err(Error::at_byte(
                    offset as u64,
                    format!("inconsistent record dimension {d}, expected {expected}"),
                ))
            }
            _ => {}
        }
        let body = offset + 4;
        let end = body + 4 * d;
        if end > bytes.len() {
            return Err(Error::at_byte(
                offset as u64,
                format!(
                    "truncated record: needs {} payload bytes, {} available",
                    4 * d,
                    bytes.len() - body
                ),
            ));
        }
        out.extend(
            bytes[body..end]
                .chunks_exact(4)
                .map(|c| decode(c.try_into().unwrap())),
        );
        offset = end;
    }
    Ok((dim.unwrap(), out))
}

fn encode_framed<T: Copy>(dim: usize, data: &[T], encode: impl Fn(T) -> [u8; 4]) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len() * 4 + data.len() / dim.max(1) * 4);
    for row in data.chunks_exact(dim) {
        out.extend_from_slice(&(dim as i32).to_le_bytes());
        for &x in row {
            out.extend_from_slice(&encode(x));
        }
    }
    out
}

pub fn parse_fvecs(bytes: &[u8]) -> Result<Vectors> {
    let (dim, data) = parse_framed(bytes, f32::from_le_bytes)?;
    Vectors::new(dim, data).map_err(|e| Error::at_byte(0, e.to_string()))
}

pub fn encode_fvecs(vectors: &Vectors) -> Vec<u8> {
    encode_framed(vectors.dim(), vectors.as_slice(), f32::to_le_bytes)
}

pub fn read_fvecs(path: impl AsRef<Path>) -> Result<Vectors> {
    parse_fvecs(&fs::read(path)?)
}

pub fn write_fvecs(path: impl AsRef<Path>, vectors: &Vectors) -> Result<()> {
    fs::write(path, encode_fvecs(vectors))?;
    Ok(())
}

/// Row-major integer matrix, as stored in ivecs files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i32>,
}

impl IntMatrix {
    pub fn row(&self, r: usize) -> &[i32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Interprets the matrix as ground-truth ids, keeping the first `k`
    /// columns.
    pub fn to_ground_truth(&self, k: usize) -> Result<GroundTruth> {
        if k == 0 || k > self.cols {
            return Err(Error::contract(format!(
                "requested k = {k} but ground truth rows hold {} ids",
                self.cols
            )));
        }
        let mut ids = Vec::with_capacity(self.rows * k);
        for r in 0..self.rows {
            for &x in &self.row(r)[..k] {
                if x < 0 {
                    return Err(Error::contract(format!("negative id {x} in ground truth row {r}")));
                }
                ids.push(x as VertexId);
            }
        }
        GroundTruth::from_ids(k, ids)
    }
}

impl From<&GroundTruth> for IntMatrix {
    fn from(gt: &GroundTruth) -> Self {
        IntMatrix {
            rows: gt.num_queries(),
            cols: gt.k(),
            data: gt.all_ids().iter().map(|&x| x as i32).collect(),
        }
    }
}

pub fn parse_ivecs(bytes: &[u8]) -> Result<IntMatrix> {
    let (cols, data) = parse_framed(bytes, i32::from_le_bytes)?;
    Ok(IntMatrix {
        rows: data.len() / cols,
        cols,
        data,
    })
}

pub fn encode_ivecs(m: &IntMatrix) -> Vec<u8> {
    encode_framed(m.cols, &m.data, i32::to_le_bytes)
}

pub fn read_ivecs(path: impl AsRef<Path>) -> Result<IntMatrix> {
    parse_ivecs(&fs::read(path)?)
}

pub fn write_ivecs(path: impl AsRef<Path>, m: &IntMatrix) -> Result<()> {
    fs::write(path, encode_ivecs(m))?;
    Ok(())
}

pub fn parse_raw_bin(bytes: &[u8]) -> Result<Vectors> {
    if bytes.len() < 8 {
        return Err(Error::at_byte(0, "truncated header: raw-bin needs 8 header bytes"));
    }
    let n = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if n == 0 || d == 0 {
        return Err(Error::at_byte(0, format!("header declares n = {n}, d = {d}; both must be >= 1")));
    }
    let expected = 8 + n * d * 4;
    if bytes.len() != expected {
        return Err(Error::at_byte(
            bytes.len().min(expected) as u64,
            format!("payload size mismatch: expected {expected} bytes total, found {}", bytes.len()),
        ));
    }
    let data = bytes[8..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Vectors::new(d, data).map_err(|e| Error::at_byte(8, e.to_string()))
}

pub fn encode_raw_bin(vectors: &Vectors) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + vectors.as_slice().len() * 4);
    out.extend_from_slice(&(vectors.len() as u32).to_le_bytes());
    out.extend_from_slice(&(vectors.dim() as u32).to_le_bytes());
    for &x in vectors.as_slice() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn read_raw_bin(path: impl AsRef<Path>) -> Result<Vectors> {
    parse_raw_bin(&fs::read(path)?)
}

pub fn write_raw_bin(path: impl AsRef<Path>, vectors: &Vectors) -> Result<()> {
    fs::write(path, encode_raw_bin(vectors))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VectorFormat {
    Fvecs,
    RawBin,
}

impl VectorFormat {
    /// Guesses the format from a file extension; `.bin`/`.fbin` is raw-bin.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "fvecs" => Some(VectorFormat::Fvecs),
            "bin" | "fbin" => Some(VectorFormat::RawBin),
            _ => None,
        }
    }
}

impl std::str::FromStr for VectorFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fvecs" => Ok(VectorFormat::Fvecs),
            "raw-bin" | "bin" => Ok(VectorFormat::RawBin),
            other => Err(Error::contract(format!("unknown vector format `{other}`"))),
        }
    }
}

pub fn read_vectors(path: impl AsRef<Path>, format: VectorFormat) -> Result<Vectors> {
    match format {
        VectorFormat::Fvecs => read_fvecs(path),
        VectorFormat::RawBin => read_raw_bin(path),
    }
}

pub fn write_vectors(path: impl AsRef<Path>, vectors: &Vectors, format: VectorFormat) -> Result<()> {
    match format {
        VectorFormat::Fvecs => write_fvecs(path, vectors),
        VectorFormat::RawBin => write_raw_bin(path, vectors),
    }
}

/// Describes a dataset on disk together with its metric and, optionally, the
/// shape it is expected to have.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub path: PathBuf,
    pub format: VectorFormat,
    pub metric: Metric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_d: Option<usize>,
}

impl DatasetManifest {
    pub fn load(&self) -> Result<VectorDataset> {
        let vectors = read_vectors(&self.path, self.format)?;
        check_shape(&vectors, self.expected_n, self.expected_d)?;
        Ok(VectorDataset::new(vectors, self.metric))
    }
}

pub fn check_shape(vectors: &Vectors, n: Option<usize>, d: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        if n != vectors.len() {
            return Err(Error::contract(format!(
                "manifest declares n = {n}, file holds {}",
                vectors.len()
            )));
        }
    }
    if let Some(d) = d {
        if d != vectors.dim() {
            return Err(Error::contract(format!(
                "manifest declares d = {d}, file holds d = {}",
                vectors.dim()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    /// Components i.i.d. uniform on `[0, 1)`.
    #[default]
    Uniform,
    /// Components i.i.d. standard normal.
    Gaussian,
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Distribution::Uniform),
            "gaussian" | "normal" => Ok(Distribution::Gaussian),
            other => Err(Error::contract(format!("unknown distribution `{other}`"))),
        }
    }
}

/// Parameters of a synthetic database/query pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub query_seed: u64,
    pub n_queries: usize,
    #[serde(default)]
    pub distribution: Distribution,
    /// Scale every vector to unit L2 norm.
    #[serde(default)]
    pub normalize: bool,
    /// Permit `seed == query_seed` (queries then duplicate database rows).
    #[serde(default)]
    pub allow_same_seed: bool,
}

impl SyntheticSpec {
    pub fn new(n: usize, d: usize, seed: u64, query_seed: u64, n_queries: usize) -> Self {
        Self {
            n,
            d,
            seed,
            query_seed,
            n_queries,
            distribution: Distribution::Uniform,
            normalize: false,
            allow_same_seed: false,
        }
    }
}

/// Draws `n` vectors of dimension `d` from a ChaCha8 stream seeded by `seed`.
pub fn random_vectors(n: usize, d: usize, seed: u64, dist: Distribution, normalize: bool) -> Result<Vectors> {
    if n == 0 || d == 0 {
        return Err(Error::contract("synthetic data needs n >= 1 and d >= 1"));
    }
    let mut rng = rng::seeded(seed);
    let mut data: Vec<f32> = match dist {
        Distribution::Uniform => (0..n * d).map(|_| rng.random::<f32>()).collect(),
        Distribution::Gaussian => (0..n * d).map(|_| rng.sample::<f32, _>(StandardNormal)).collect(),
    };
    if normalize {
        for row in data.chunks_exact_mut(d) {
            let norm = row.iter().map(|x| x * x).sum::<f32>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
        }
    }
    Vectors::new(d, data)
}

/// Generates a database and an independent query set.
pub fn generate_synthetic(spec: &SyntheticSpec, metric: Metric) -> Result<(VectorDataset, Vectors)> {
    if spec.n_queries == 0 {
        return Err(Error::contract("synthetic data needs at least one query"));
    }
    if spec.seed == spec.query_seed && !spec.allow_same_seed {
        return Err(Error::contract(
            "query seed equals database seed; pass allow_same_seed to permit it",
        ));
    }
    let base = random_vectors(spec.n, spec.d, spec.seed, spec.distribution, spec.normalize)?;
    let queries = random_vectors(
        spec.n_queries,
        spec.d,
        spec.query_seed,
        spec.distribution,
        spec.normalize,
    )?;
    Ok((VectorDataset::new(base, metric), queries))
}

/// Exact top-`k` of one query by full scan, ascending by `(distance, id)`.
pub fn brute_force_top_k(ds: &VectorDataset, query: &[f32], k: usize) -> Vec<(f32, VertexId)> {
    let mut all: Vec<(f32, VertexId)> = (0..ds.len() as VertexId)
        .map(|i| (ds.distance_to(query, i), i))
        .collect();
    let cmp = |a: &(f32, VertexId), b: &(f32, VertexId)| cmp_dist_id(*a, *b);
    if k < all.len() {
        all.select_nth_unstable_by(k, cmp);
        all.truncate(k);
    }
    all.sort_unstable_by(cmp);
    all
}

/// Brute-force ground truth for every query, parallel over queries.
pub fn exact_ground_truth(ds: &VectorDataset, queries: &Vectors, k: usize) -> Result<GroundTruth> {
    if k == 0 || k > ds.len() {
        return Err(Error::contract(format!(
            "k = {k} must lie in [1, n = {}]",
            ds.len()
        )));
    }
    if queries.dim() != ds.dim() {
        return Err(Error::contract(format!(
            "query dimension {} does not match dataset dimension {}",
            queries.dim(),
            ds.dim()
        )));
    }
    let rows: Vec<Vec<(f32, VertexId)>> = (0..queries.len())
        .into_par_iter()
        .map(|q| brute_force_top_k(ds, queries.row(q), k))
        .collect();
    let mut ids = Vec::with_capacity(rows.len() * k);
    let mut dists = Vec::with_capacity(rows.len() * k);
    for row in rows {
        for (d, i) in row {
            ids.push(i);
            dists.push(d);
        }
    }
    GroundTruth::new(k, ids, dists)
}
