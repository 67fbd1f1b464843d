//! Dataset loading.
//!
//! Three routes read the same directory:
//!
//! * the fast path ([`DatasetDir::parse_node_tree_fast`]) reads only NODTRE
//!   heads and seeks over the bodies; node ranges follow from the running
//!   sum of head counts;
//! * the full parse ([`DatasetDir::parse_node_tree_full`]) reads every body
//!   and checks it against the range its head implies;
//! * the baseline ([`DatasetDir::baseline_load_like_opentd`]) re-reads the
//!   whole node tree and every temperature row once per requested submodel.
//!
//! Every read goes through a per-file byte counter ([`IoStats`]).

mod bench;
mod index;
mod io;

use std::io::{BufReader, Read};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use crate::csr_model::{
    ConductorKind, ConductorRecord, NodeTreeBlock, Sizes, Submodel, TemperatureMatrix, ThermalDataset,
    CONDUCTORS_FILE, CONDUCTOR_RECORD_LEN, HEAD_FIXED_LEN, NODTRE_FILE, SIZES_FILE, SIZES_LEN, TEMPS_FILE,
};
use crate::error::{Error, Result};

pub use bench::{bench_compare, bench_ladder, log_log_slope, BenchRecord, BenchReport, DEFAULT_RUNS};
pub use index::{IndexEntry, SubmodelIndex};
pub use io::{IoSnapshot, IoStats};

use io::{decode_f64s, CountedFile};

/// Temperatures of one submodel's nodes over a timestep window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmodelTemperatures {
    pub name: String,
    pub temperatures: TemperatureMatrix,
}

/// A dataset directory plus the byte counters its reads are charged to.
#[derive(Debug, Clone)]
pub struct DatasetDir {
    root: PathBuf,
    stats: Arc<IoStats>,
}

impl DatasetDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self::with_stats(root, Arc::default())
    }

    pub fn with_stats(root: impl Into<PathBuf>, stats: Arc<IoStats>) -> Self {
        DatasetDir {
            root: root.into(),
            stats,
        }
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn stats(&self) -> &IoStats {
        &self.stats
    }

    pub fn stats_handle(&self) -> Arc<IoStats> {
        Arc::clone(&self.stats)
    }

    fn open(&self, name: &'static str) -> Result<CountedFile<'_>> {
        CountedFile::open(&self.root, name, &self.stats)
    }

    /// Reads the five counts from SIZES (exactly 40 bytes).
    pub fn read_sizes(&self) -> Result<Sizes> {
        let mut f = self.open(SIZES_FILE)?;
        let mut buf = [0u8; SIZES_LEN as usize];
        f.fill(&mut buf, || format!("{SIZES_LEN}-byte header ({} bytes present)", f_len(&self.root)))?;
        Sizes::from_bytes(&buf)
    }

    /// Reads every NODTRE head, seeking over the bodies.
    ///
    /// Bytes read are `Σ (20 + name_len)` regardless of node counts.
    pub fn read_node_tree_heads(&self) -> Result<Vec<NodeTreeBlock>> {
        let mut f = self.open(NODTRE_FILE)?;
        let mut pos = 0u64;
        let mut blocks = Vec::new();
        while pos < f.len {
            let ordinal = blocks.len();
            let mut len_buf = [0u8; 4];
            f.fill(&mut len_buf, || format!("head of block {ordinal}"))?;
            let name_len = u32::from_le_bytes(len_buf) as u64;
            if pos + HEAD_FIXED_LEN + name_len > f.len {
                return Err(Error::truncated(NODTRE_FILE, format!("head of block {ordinal}")));
            }
            let mut name = vec![0u8; name_len as usize];
            f.fill(&mut name, || format!("head of block {ordinal}"))?;
            let mut rest = [0u8; 16];
            f.fill(&mut rest, || format!("head of block {ordinal}"))?;

            let submodel_name = String::from_utf8(name)
                .map_err(|_| Error::structural(NODTRE_FILE, format!("block {ordinal}: name is not UTF-8")))?;
            let count = i64::from_le_bytes(rest[..8].try_into().unwrap());
            let reserved_meta = u64::from_le_bytes(rest[8..].try_into().unwrap());
            let node_count = usize::try_from(count).map_err(|_| {
                Error::structural(NODTRE_FILE, format!("block {ordinal}: negative node count {count}"))
            })?;

            let body_end = (node_count as u64)
                .checked_mul(8)
                .and_then(|b| b.checked_add(pos + HEAD_FIXED_LEN + name_len))
                .filter(|&end| end <= f.len)
                .ok_or_else(|| {
                    Error::structural(
                        NODTRE_FILE,
                        format!("block {ordinal}: body of {node_count} indices seeks past end of file"),
                    )
                })?;
            f.seek_to(body_end)?;
            pos = body_end;
            blocks.push(NodeTreeBlock {
                submodel_name,
                node_count,
                reserved_meta,
            });
        }
        Ok(blocks)
    }

    /// Head-only node tree parse.
    ///
    /// Bodies are trusted to be the ascending runs the heads imply; run
    /// [`crate::csr_model::validate_dataset`] to check that.
    pub fn parse_node_tree_fast(&self) -> Result<SubmodelIndex> {
        let heads = self.read_node_tree_heads()?;
        index_from_blocks(heads.into_iter().map(|b| (b.submodel_name, b.node_count)))
    }

    /// Reads every NODTRE body and checks it against its head.
    pub fn parse_node_tree_full(&self) -> Result<SubmodelIndex> {
        let f = self.open(NODTRE_FILE)?;
        let len = f.len;
        let mut r = BufReader::with_capacity(1 << 16, f);
        let mut pos = 0u64;
        let mut next = 0u64;
        let mut counts = Vec::new();
        while pos < len {
            let ordinal = counts.len();
            let (name, count, _meta) = read_head(&mut r, ordinal)?;
            pos += HEAD_FIXED_LEN + name.len() as u64;
            for position in 0..count {
                let v = read_i64(&mut r, || format!("body of block {ordinal}"))?;
                if v != (next + position) as i64 {
                    return Err(Error::structural(
                        NODTRE_FILE,
                        format!(
                            "non-sequential body in block {ordinal} (`{name}`) at index position {position}: found {v}, expected {}",
                            next + position
                        ),
                    ));
                }
            }
            pos += count * 8;
            next += count;
            counts.push((name, count as usize));
        }
        index_from_blocks(counts)
    }

    /// Reads the `timesteps x nodes` window of the temperature matrix.
    ///
    /// One contiguous read per timestep row; rows outside `timesteps` are
    /// never touched.
    pub fn load_temperatures(&self, timesteps: Range<usize>, nodes: Range<usize>) -> Result<TemperatureMatrix> {
        let sizes = self.read_sizes()?;
        check_range("timestep", &timesteps, sizes.num_timesteps)?;
        check_range("node", &nodes, sizes.num_nodes)?;
        let width = nodes.len();
        if timesteps.is_empty() {
            return TemperatureMatrix::new(Vec::new(), width, Vec::new());
        }

        let mut f = self.open(TEMPS_FILE)?;
        let expected = 8 * sizes.num_timesteps as u64 * (1 + sizes.num_nodes as u64);
        if f.len < expected {
            return Err(Error::truncated(
                TEMPS_FILE,
                format!("matrix ({} of {expected} bytes present)", f.len),
            ));
        }

        let mut buf = vec![0u8; 8 * timesteps.len().max(width)];
        let mut timestamps = Vec::with_capacity(timesteps.len());
        f.seek_to(8 * timesteps.start as u64)?;
        f.fill(&mut buf[..8 * timesteps.len()], || "timestamps".into())?;
        decode_f64s(&buf[..8 * timesteps.len()], &mut timestamps);

        let mut values = Vec::with_capacity(timesteps.len() * width);
        let header = 8 * sizes.num_timesteps as u64;
        let mut cursor = None;
        for t in timesteps {
            let at = header + 8 * (t as u64 * sizes.num_nodes as u64 + nodes.start as u64);
            if cursor != Some(at) {
                f.seek_to(at)?;
            }
            f.fill(&mut buf[..8 * width], || format!("row {t}"))?;
            decode_f64s(&buf[..8 * width], &mut values);
            cursor = Some(at + 8 * width as u64);
        }
        TemperatureMatrix::new(timestamps, width, values)
    }

    /// Reads all conductor records in file order.
    pub fn load_conductors(&self) -> Result<Vec<ConductorRecord>> {
        let sizes = self.read_sizes()?;
        let mut f = self.open(CONDUCTORS_FILE)?;
        let count = sizes.num_conductors();
        let expected = CONDUCTOR_RECORD_LEN * count as u64;
        if f.len != expected {
            return Err(Error::structural(
                CONDUCTORS_FILE,
                format!("{} bytes, SIZES declares {count} records ({expected} bytes)", f.len),
            ));
        }
        let mut buf = vec![0u8; expected as usize];
        f.fill(&mut buf, || "records".into())?;
        buf.chunks_exact(CONDUCTOR_RECORD_LEN as usize)
            .enumerate()
            .map(|(i, rec)| decode_conductor(i, rec, &sizes))
            .collect()
    }

    /// Loads each named submodel's temperature columns the fast way: one
    /// head-only tree parse and one sequential pass over TEMPS.
    pub fn load_submodel_temperatures(&self, names: &[String]) -> Result<Vec<SubmodelTemperatures>> {
        let index = self.parse_node_tree_fast()?;
        let ranges = names
            .iter()
            .map(|n| index.range_of(n))
            .collect::<Result<Vec<_>>>()?;
        let sizes = self.read_sizes()?;
        let (n, steps) = (sizes.num_nodes, sizes.num_timesteps);
        let mut f = self.open(TEMPS_FILE)?;
        let expected = 8 * steps as u64 * (1 + n as u64);
        if f.len < expected {
            return Err(Error::truncated(
                TEMPS_FILE,
                format!("matrix ({} of {expected} bytes present)", f.len),
            ));
        }

        let mut buf = vec![0u8; 8 * steps.max(n)];
        let mut timestamps = Vec::with_capacity(steps);
        f.fill(&mut buf[..8 * steps], || "timestamps".into())?;
        decode_f64s(&buf[..8 * steps], &mut timestamps);

        let mut outs: Vec<Vec<f64>> = ranges.iter().map(|r| Vec::with_capacity(steps * r.len())).collect();
        for t in 0..steps {
            f.fill(&mut buf[..8 * n], || format!("row {t}"))?;
            for (out, r) in outs.iter_mut().zip(&ranges) {
                decode_f64s(&buf[8 * r.start..8 * r.end], out);
            }
        }

        names
            .iter()
            .zip(ranges)
            .zip(outs)
            .map(|((name, range), values)| {
                Ok(SubmodelTemperatures {
                    name: name.clone(),
                    temperatures: TemperatureMatrix::new(timestamps.clone(), range.len(), values)?,
                })
            })
            .collect()
    }

    /// Per-submodel loading that mimics a conventional object-per-query
    /// pipeline: for every requested submodel the whole node tree (heads and
    /// bodies) is scanned to collect its node list, and every full
    /// temperature row is re-read and decoded before that submodel's columns
    /// are picked out.
    ///
    /// NODTRE bytes read are exactly `names.len() x file size`.
    pub fn baseline_load_like_opentd(&self, names: &[String]) -> Result<Vec<SubmodelTemperatures>> {
        names.iter().map(|name| self.baseline_one(name)).collect()
    }

    fn baseline_one(&self, wanted: &str) -> Result<SubmodelTemperatures> {
        let sizes = self.read_sizes()?;

        let tree = self.open(NODTRE_FILE)?;
        let len = tree.len;
        let mut r = BufReader::with_capacity(1 << 16, tree);
        let mut pos = 0u64;
        let mut ids: Option<Vec<usize>> = None;
        let mut ordinal = 0;
        while pos < len {
            let (name, count, _meta) = read_head(&mut r, ordinal)?;
            pos += HEAD_FIXED_LEN + name.len() as u64 + 8 * count;
            let mut body = Vec::with_capacity(count as usize);
            for _ in 0..count {
                let v = read_i64(&mut r, || format!("body of block {ordinal}"))?;
                let id = usize::try_from(v)
                    .ok()
                    .filter(|&i| i < sizes.num_nodes)
                    .ok_or_else(|| Error::structural(NODTRE_FILE, format!("block {ordinal}: node index {v} out of range")))?;
                body.push(id);
            }
            if name == wanted && ids.is_none() {
                ids = Some(body);
            }
            ordinal += 1;
        }
        // drain so that the whole file is charged even with trailing bytes
        std::io::copy(&mut r, &mut std::io::sink()).map_err(|e| Error::io(NODTRE_FILE, e))?;
        let ids = ids.ok_or_else(|| Error::UnknownSubmodel(wanted.to_owned()))?;

        let temps = self.open(TEMPS_FILE)?;
        let mut r = BufReader::with_capacity(1 << 16, temps);
        let mut buf = vec![0u8; 8 * sizes.num_timesteps.max(sizes.num_nodes)];
        let mut timestamps = Vec::with_capacity(sizes.num_timesteps);
        read_into(&mut r, &mut buf[..8 * sizes.num_timesteps], "timestamps")?;
        decode_f64s(&buf[..8 * sizes.num_timesteps], &mut timestamps);

        let mut row = Vec::with_capacity(sizes.num_nodes);
        let mut values = Vec::with_capacity(sizes.num_timesteps * ids.len());
        for t in 0..sizes.num_timesteps {
            read_into(&mut r, &mut buf[..8 * sizes.num_nodes], &format!("row {t}"))?;
            row.clear();
            decode_f64s(&buf[..8 * sizes.num_nodes], &mut row);
            values.extend(ids.iter().map(|&i| row[i]));
        }

        Ok(SubmodelTemperatures {
            name: wanted.to_owned(),
            temperatures: TemperatureMatrix::new(timestamps, ids.len(), values)?,
        })
    }

    /// Reads the whole dataset, verifying every NODTRE body.
    pub fn parse_full(&self) -> Result<ThermalDataset> {
        let sizes = self.read_sizes()?;
        let index = self.parse_node_tree_full()?;
        check_sizes_against_index(&sizes, &index)?;
        let temperatures = self.load_temperatures(0..sizes.num_timesteps, 0..sizes.num_nodes)?;
        let conductors = self.load_conductors()?;
        Ok(ThermalDataset {
            submodels: index
                .entries()
                .iter()
                .map(|e| Submodel::new(e.name.clone(), e.range.len()))
                .collect(),
            conductors,
            temperatures,
        })
    }
}

pub(crate) fn check_sizes_against_index(sizes: &Sizes, index: &SubmodelIndex) -> Result<()> {
    if index.len() != sizes.num_submodels || index.num_nodes() != sizes.num_nodes {
        return Err(Error::structural(
            NODTRE_FILE,
            format!(
                "{} blocks / {} nodes, SIZES declares {} / {}",
                index.len(),
                index.num_nodes(),
                sizes.num_submodels,
                sizes.num_nodes
            ),
        ));
    }
    Ok(())
}

fn f_len(root: &Path) -> u64 {
    std::fs::metadata(root.join(SIZES_FILE)).map_or(0, |m| m.len())
}

fn index_from_blocks(blocks: impl IntoIterator<Item = (String, usize)>) -> Result<SubmodelIndex> {
    let index = SubmodelIndex::from_counts(blocks);
    if index.has_duplicate_names() {
        return Err(Error::structural(NODTRE_FILE, "duplicate submodel names"));
    }
    Ok(index)
}

fn check_range(what: &'static str, r: &Range<usize>, len: usize) -> Result<()> {
    if r.start > r.end || r.end > len {
        return Err(Error::Bounds {
            what,
            detail: format!("{}..{} not within 0..{len}", r.start, r.end),
        });
    }
    Ok(())
}

fn read_into(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::truncated(TEMPS_FILE, what),
        _ => Error::io(TEMPS_FILE, e),
    })
}

fn read_i64(r: &mut impl Read, what: impl FnOnce() -> String) -> Result<i64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::truncated(NODTRE_FILE, what()),
        _ => Error::io(NODTRE_FILE, e),
    })?;
    Ok(i64::from_le_bytes(b))
}

/// Reads one head from a sequential NODTRE reader.
fn read_head(r: &mut impl Read, ordinal: usize) -> Result<(String, u64, u64)> {
    let what = || format!("head of block {ordinal}");
    let mut len_buf = [0u8; 4];
    r.read_exact(&mut len_buf)
        .map_err(|_| Error::truncated(NODTRE_FILE, what()))?;
    let mut name = Vec::new();
    let name_len = u32::from_le_bytes(len_buf) as u64;
    if r.take(name_len).read_to_end(&mut name).map_err(|e| Error::io(NODTRE_FILE, e))? as u64 != name_len {
        return Err(Error::truncated(NODTRE_FILE, what()));
    }
    let name = String::from_utf8(name)
        .map_err(|_| Error::structural(NODTRE_FILE, format!("block {ordinal}: name is not UTF-8")))?;
    let count = read_i64(r, what)?;
    let meta = read_i64(r, what)? as u64;
    let count = u64::try_from(count)
        .map_err(|_| Error::structural(NODTRE_FILE, format!("block {ordinal}: negative node count {count}")))?;
    Ok((name, count, meta))
}

fn decode_conductor(i: usize, rec: &[u8], sizes: &Sizes) -> Result<ConductorRecord> {
    let bad = |detail: String| Error::structural(CONDUCTORS_FILE, format!("record {i}: {detail}"));
    let kind = ConductorKind::from_byte(rec[0]).ok_or_else(|| bad(format!("unknown kind byte {}", rec[0])))?;
    let expected = if i < sizes.num_linear {
        ConductorKind::Linear
    } else {
        ConductorKind::Radiative
    };
    if kind != expected {
        return Err(bad(format!("{kind:?} record out of order; SIZES declares {} linear first", sizes.num_linear)));
    }
    let node = |bytes: &[u8]| {
        let v = i64::from_le_bytes(bytes.try_into().unwrap());
        usize::try_from(v)
            .ok()
            .filter(|&n| n < sizes.num_nodes)
            .ok_or_else(|| bad(format!("node index {v} outside 0..{}", sizes.num_nodes)))
    };
    let node_a = node(&rec[8..16])?;
    let node_b = node(&rec[16..24])?;
    if node_a == node_b {
        return Err(bad(format!("node_a = node_b = {node_a}")));
    }
    let conductance = f64::from_le_bytes(rec[24..32].try_into().unwrap());
    if !(conductance.is_finite() && conductance > 0.0) {
        return Err(bad(format!("conductance {conductance} is not > 0")));
    }
    Ok(ConductorRecord {
        kind,
        node_a,
        node_b,
        conductance,
    })
}

pub fn read_sizes(dir: &Path) -> Result<Sizes> {
    DatasetDir::new(dir).read_sizes()
}

pub fn parse_node_tree_fast(dir: &Path) -> Result<SubmodelIndex> {
    DatasetDir::new(dir).parse_node_tree_fast()
}

pub fn parse_node_tree_full(dir: &Path) -> Result<SubmodelIndex> {
    DatasetDir::new(dir).parse_node_tree_full()
}

pub fn load_temperatures(dir: &Path, timesteps: Range<usize>, nodes: Range<usize>) -> Result<TemperatureMatrix> {
    DatasetDir::new(dir).load_temperatures(timesteps, nodes)
}

pub fn load_conductors(dir: &Path) -> Result<Vec<ConductorRecord>> {
    DatasetDir::new(dir).load_conductors()
}

pub fn baseline_load_like_opentd(dir: &Path, names: &[String]) -> Result<Vec<SubmodelTemperatures>> {
    DatasetDir::new(dir).baseline_load_like_opentd(names)
}

pub fn parse_full(dir: &Path) -> Result<ThermalDataset> {
    DatasetDir::new(dir).parse_full()
}
