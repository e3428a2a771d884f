//! Graph adapter: turns externally built topologies into a
//! [`FixedDegreeGraph`] without touching the edge set.
//!
//! Three on-disk encodings are understood, all little-endian:
//!
//! - **adjlist-text**: UTF-8, one `ID: n1 n2 ...` line per vertex, vertices in
//!   ascending order starting at 0, blank lines ignored.
//! - **csr-bin**: `"CSRX"`, `u32` version, `u32 n`, `u32 edge_count`, then
//!   `n + 1` `u64` offsets and `edge_count` `u32` targets.
//! - **fixed-bin**: `"FDGX"`, `u32` version, `u32 n`, `u32 k_max`, then
//!   `n * k_max` `u32` slots (`0xFFFFFFFF` padding) and `n` `u32` degrees.
//!
//! Other index formats plug in by implementing [`AdjacencySource`].

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FixedDegreeGraph, VertexId, INVALID};

pub const FIXED_MAGIC: &[u8; 4] = b"FDGX";
pub const CSR_MAGIC: &[u8; 4] = b"CSRX";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphFormat {
    AdjlistText,
    CsrBin,
    FixedBin,
}

impl std::str::FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adjlist-text" | "adjlist" => Ok(GraphFormat::AdjlistText),
            "csr-bin" | "csr" => Ok(GraphFormat::CsrBin),
            "fixed-bin" | "fixed" => Ok(GraphFormat::FixedBin),
            other => Err(Error::contract(format!("unknown graph format `{other}`"))),
        }
    }
}

/// Anything that can enumerate per-vertex out-neighbor lists.
pub trait AdjacencySource {
    fn num_vertices(&self) -> usize;
    fn neighbor_list(&self, v: usize) -> &[VertexId];
    /// Human-readable position of vertex `v`'s list, for error messages.
    fn locate(&self, v: usize) -> (u64, crate::error::OffsetUnit) {
        (v as u64, crate::error::OffsetUnit::Line)
    }
}

/// Parsed adjacency-list text. `lines[v]` is the 1-based source line of `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyList {
    pub lists: Vec<Vec<VertexId>>,
    lines: Vec<u64>,
}

impl AdjacencySource for AdjacencyList {
    fn num_vertices(&self) -> usize {
        self.lists.len()
    }

    fn neighbor_list(&self, v: usize) -> &[VertexId] {
        &self.lists[v]
    }

    fn locate(&self, v: usize) -> (u64, crate::error::OffsetUnit) {
        (self.lines[v], crate::error::OffsetUnit::Line)
    }
}

pub fn parse_adjlist(text: &str) -> Result<AdjacencyList> {
    let mut lists = Vec::new();
    let mut lines = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx as u64 + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line
            .split_once(':')
            .ok_or_else(|| Error::at_line(lineno, "expected `ID: neighbors...`"))?;
        let id: u64 = head
            .trim()
            .parse()
            .map_err(|_| Error::at_line(lineno, format!("bad vertex id `{}`", head.trim())))?;
        if id != lists.len() as u64 {
            return Err(Error::at_line(
                lineno,
                format!("vertex {id} out of sequence, expected {}", lists.len()),
            ));
        }
        let mut row = Vec::new();
        for tok in rest.split_whitespace() {
            let u: u64 = tok
                .parse()
                .map_err(|_| Error::at_line(lineno, format!("bad neighbor id `{tok}`")))?;
            if u >= INVALID as u64 {
                return Err(Error::at_line(lineno, format!("neighbor id {u} too large")));
            }
            row.push(u as VertexId);
        }
        lists.push(row);
        lines.push(lineno);
    }
    if lists.is_empty() {
        return Err(Error::at_line(1, "adjacency list declares no vertices"));
    }
    Ok(AdjacencyList { lists, lines })
}

pub fn format_adjlist(g: &FixedDegreeGraph) -> String {
    let mut out = String::new();
    for v in 0..g.len() as VertexId {
        out.push_str(&v.to_string());
        out.push(':');
        for u in g.neighbors(v) {
            out.push(' ');
            out.push_str(&u.to_string());
        }
        out.push('\n');
    }
    out
}

/// Compressed sparse row adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrGraph {
    pub offsets: Vec<u64>,
    pub targets: Vec<VertexId>,
}

impl CsrGraph {
    pub fn from_graph(g: &FixedDegreeGraph) -> Self {
        let mut offsets = Vec::with_capacity(g.len() + 1);
        let mut targets = Vec::with_capacity(g.edge_count());
        offsets.push(0);
        for v in 0..g.len() as VertexId {
            targets.extend_from_slice(g.neighbors(v));
            offsets.push(targets.len() as u64);
        }
        Self { offsets, targets }
    }
}

impl AdjacencySource for CsrGraph {
    fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    fn neighbor_list(&self, v: usize) -> &[VertexId] {
        &self.targets[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    fn locate(&self, v: usize) -> (u64, crate::error::OffsetUnit) {
        (
            16 + 8 * (self.offsets.len() as u64) + 4 * self.offsets[v],
            crate::error::OffsetUnit::Byte,
        )
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < len {
            return Err(Error::at_byte(
                self.pos as u64,
                format!("truncated {what}: need {len} bytes, {} left", self.bytes.len() - self.pos),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        let found = self.take(4, "magic")?;
        if found != magic {
            return Err(Error::at_byte(
                0,
                format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(found),
                    String::from_utf8_lossy(magic)
                ),
            ));
        }
        let version = self.u32("version")?;
        if version != FORMAT_VERSION {
            return Err(Error::at_byte(4, format!("unsupported version {version}")));
        }
        Ok(())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::at_byte(
                self.pos as u64,
                format!("{} trailing bytes", self.bytes.len() - self.pos),
            ));
        }
        Ok(())
    }
}

pub fn parse_csr(bytes: &[u8]) -> Result<CsrGraph> {
    let mut c = Cursor { bytes, pos: 0 };
    c.header(CSR_MAGIC)?;
    let n = c.u32("vertex count")? as usize;
    let m = c.u32("edge count")? as u64;
    if n == 0 {
        return Err(Error::at_byte(8, "graph declares zero vertices"));
    }
    let mut offsets = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let at = c.pos as u64;
        let o = c.u64("offsets")?;
        let prev = offsets.last().copied().unwrap_or(0);
        if (i == 0 && o != 0) || o < prev || o > m {
            return Err(Error::at_byte(at, format!("invalid offset {o} for vertex {i}")));
        }
        offsets.push(o);
    }
    if offsets[n] != m {
        return Err(Error::at_byte(
            c.pos as u64 - 8,
            format!("final offset {} does not equal edge count {m}", offsets[n]),
        ));
    }
    let raw = c.take(4 * m as usize, "targets")?;
    let targets = raw
        .chunks_exact(4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    c.finish()?;
    Ok(CsrGraph { offsets, targets })
}

pub fn encode_csr(csr: &CsrGraph) -> Vec<u8> {
    let n = csr.offsets.len() - 1;
    let mut out = Vec::with_capacity(16 + 8 * (n + 1) + 4 * csr.targets.len());
    out.extend_from_slice(CSR_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(csr.targets.len() as u32).to_le_bytes());
    for &o in &csr.offsets {
        out.extend_from_slice(&o.to_le_bytes());
    }
    for &t in &csr.targets {
        out.extend_from_slice(&t.to_le_bytes());
    }
    out
}

/// Decodes a fixed-bin file, validating every graph invariant. Errors name
/// the byte offset of the offending slot or degree.
pub fn parse_fixed(bytes: &[u8]) -> Result<FixedDegreeGraph> {
    let mut c = Cursor { bytes, pos: 0 };
    c.header(FIXED_MAGIC)?;
    let n = c.u32("vertex count")? as usize;
    let k = c.u32("k_max")? as usize;
    if n == 0 {
        return Err(Error::at_byte(8, "graph declares zero vertices"));
    }
    let slot_base = c.pos;
    let raw = c.take(4 * n * k, "neighbor slots")?;
    let slots: Vec<VertexId> = raw
        .chunks_exact(4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let deg_base = c.pos;
    let raw = c.take(4 * n, "degrees")?;
    let degrees: Vec<u32> = raw
        .chunks_exact(4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    c.finish()?;

    let mut seen = std::collections::HashSet::new();
    for v in 0..n {
        let deg = degrees[v] as usize;
        if deg > k {
            return Err(Error::at_byte(
                (deg_base + 4 * v) as u64,
                format!("vertex {v}: degree {deg} exceeds k_max {k}"),
            ));
        }
        seen.clear();
        for s in 0..k {
            let u = slots[v * k + s];
            let at = (slot_base + 4 * (v * k + s)) as u64;
            if s < deg {
                if u as usize >= n {
                    return Err(Error::at_byte(at, format!("vertex {v}: neighbor {u} out of range")));
                }
                if u as usize == v {
                    return Err(Error::at_byte(at, format!("vertex {v}: self-loop")));
                }
                if !seen.insert(u) {
                    return Err(Error::at_byte(at, format!("vertex {v}: duplicate neighbor {u}")));
                }
            } else if u != INVALID {
                return Err(Error::at_byte(at, format!("vertex {v}: padding slot holds {u}")));
            }
        }
    }
    FixedDegreeGraph::from_raw(n, k, slots, degrees)
}

pub fn encode_fixed(g: &FixedDegreeGraph) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 4 * g.len() * (g.k_max() + 1));
    out.extend_from_slice(FIXED_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(g.len() as u32).to_le_bytes());
    out.extend_from_slice(&(g.k_max() as u32).to_le_bytes());
    for &s in g.raw_slots() {
        out.extend_from_slice(&s.to_le_bytes());
    }
    for &d in g.degrees() {
        out.extend_from_slice(&d.to_le_bytes());
    }
    out
}

/// Writes `g` in fixed-bin format.
pub fn serialize(g: &FixedDegreeGraph, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_fixed(g))?;
    Ok(())
}

pub fn read_fixed(path: impl AsRef<Path>) -> Result<FixedDegreeGraph> {
    parse_fixed(&fs::read(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Slots per row. `None` sizes rows to the largest observed degree.
    pub k_cap: Option<usize>,
    /// Keep only the first `k_cap` neighbors of oversize rows instead of
    /// failing.
    pub truncate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IngestReport {
    pub vertices: usize,
    pub edges_kept: usize,
    pub truncated_rows: usize,
    pub dropped_edges: usize,
}

impl IngestReport {
    /// True when the ingested topology equals the source topology.
    pub fn is_lossless(&self) -> bool {
        self.dropped_edges == 0
    }
}

/// Normalizes any adjacency source into fixed-slot rows, in source order.
///
/// Out-of-range ids, self-loops and duplicate edges are rejected with the
/// position of the offending list; nothing is repaired silently.
pub fn ingest_source<S: AdjacencySource + ?Sized>(
    src: &S,
    opts: IngestOptions,
) -> Result<(FixedDegreeGraph, IngestReport)> {
    let n = src.num_vertices();
    let max_deg = (0..n).map(|v| src.neighbor_list(v).len()).max().unwrap_or(0);
    let k = opts.k_cap.unwrap_or(max_deg);
    let mut report = IngestReport {
        vertices: n,
        ..Default::default()
    };
    let mut rows = Vec::with_capacity(n);
    let mut seen = std::collections::HashSet::new();
    for v in 0..n {
        let list = src.neighbor_list(v);
        let fail = |msg: String| {
            let (offset, unit) = src.locate(v);
            Error::Format {
                offset,
                unit,
                message: msg,
            }
        };
        seen.clear();
        for (i, &u) in list.iter().enumerate() {
            if u as usize >= n {
                return Err(fail(format!("vertex {v}, entry {i}: neighbor {u} out of range (n = {n})")));
            }
            if u as usize == v {
                return Err(fail(format!("vertex {v}, entry {i}: self-loop")));
            }
            if !seen.insert(u) {
                return Err(fail(format!("vertex {v}, entry {i}: duplicate edge to {u}")));
            }
        }
        let row = if list.len() > k {
            if !opts.truncate {
                return Err(fail(format!(
                    "vertex {v} has degree {} above k_cap {k}; enable truncation to drop edges",
                    list.len()
                )));
            }
            report.truncated_rows += 1;
            report.dropped_edges += list.len() - k;
            &list[..k]
        } else {
            list
        };
        report.edges_kept += row.len();
        rows.push(row.to_vec());
    }
    Ok((FixedDegreeGraph::from_rows(k, &rows)?, report))
}

impl AdjacencySource for FixedDegreeGraph {
    fn num_vertices(&self) -> usize {
        self.len()
    }

    fn neighbor_list(&self, v: usize) -> &[VertexId] {
        self.neighbors(v as VertexId)
    }
}

/// Parses `bytes` in `format` and ingests it.
pub fn ingest_bytes(
    bytes: &[u8],
    format: GraphFormat,
    opts: IngestOptions,
) -> Result<(FixedDegreeGraph, IngestReport)> {
    match format {
        GraphFormat::AdjlistText => {
            let text = std::str::from_utf8(bytes)
                .map_err(|e| Error::at_byte(e.valid_up_to() as u64, "adjacency list is not UTF-8"))?;
            ingest_source(&parse_adjlist(text)?, opts)
        }
        GraphFormat::CsrBin => ingest_source(&parse_csr(bytes)?, opts),
        GraphFormat::FixedBin => {
            let g = parse_fixed(bytes)?;
            if opts.k_cap.is_none() || opts.k_cap == Some(g.k_max()) {
                let report = IngestReport {
                    vertices: g.len(),
                    edges_kept: g.edge_count(),
                    ..Default::default()
                };
                Ok((g, report))
            } else {
                ingest_source(&g, opts)
            }
        }
    }
}

pub fn ingest(
    path: impl AsRef<Path>,
    format: GraphFormat,
    opts: IngestOptions,
) -> Result<(FixedDegreeGraph, IngestReport)> {
    ingest_bytes(&fs::read(path)?, format, opts)
}

/// Writes `g` in any of the supported encodings.
pub fn write_graph(g: &FixedDegreeGraph, path: impl AsRef<Path>, format: GraphFormat) -> Result<()> {
    let bytes = match format {
        GraphFormat::AdjlistText => format_adjlist(g).into_bytes(),
        GraphFormat::CsrBin => encode_csr(&CsrGraph::from_graph(g)),
        GraphFormat::FixedBin => encode_fixed(g),
    };
    fs::write(path, bytes)?;
    Ok(())
}
