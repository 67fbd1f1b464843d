//! Append-only project directory caching per-timestep temperature rows.
//!
//! Layout: `manifest.json`, `index.bin`, `temps_<t>.bin`, `lock`. The
//! manifest is authoritative; data files it does not list are ignored and
//! overwritten when that timestep is cached again.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::csr_parser::{DatasetDir, IndexEntry, SubmodelIndex};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const INDEX_FILE: &str = "index.bin";
pub const LOCK_FILE: &str = "lock";

pub fn temps_file_name(t: usize) -> String {
    format!("temps_{t}.bin")
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a, 64-bit.
#[derive(Debug, Clone, Copy)]
pub struct Fnv1a64(u64);

impl Default for Fnv1a64 {
    fn default() -> Self {
        Fnv1a64(FNV_OFFSET)
    }
}

impl Fnv1a64 {
    pub fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
    }

    pub fn finish(self) -> u64 {
        self.0
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = Fnv1a64::default();
    h.update(bytes);
    h.finish()
}

/// Hash of the SIZES bytes followed by every NODTRE block head.
pub fn dataset_fingerprint(dataset: &DatasetDir) -> Result<u64> {
    let mut h = Fnv1a64::default();
    h.update(&dataset.read_sizes()?.to_bytes());
    for head in dataset.read_node_tree_heads()? {
        h.update(&head.head_bytes());
    }
    Ok(h.finish())
}

mod hex_u64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:016x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        u64::from_str_radix(&s, 16).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheManifest {
    pub schema_version: u32,
    #[serde(with = "hex_u64")]
    pub dataset_fingerprint: u64,
    pub num_nodes: usize,
    pub num_timesteps: usize,
    /// Sorted, unique.
    pub cached_timesteps: Vec<usize>,
    /// Seconds since the Unix epoch.
    pub created: u64,
    pub updated: u64,
}

impl CacheManifest {
    pub fn contains(&self, t: usize) -> bool {
        self.cached_timesteps.binary_search(&t).is_ok()
    }
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Writes `bytes` next to `path` and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn encode_index(index: &SubmodelIndex) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&(index.len() as i64).to_le_bytes());
    for e in index.entries() {
        out.extend_from_slice(&(e.name.len() as u32).to_le_bytes());
        out.extend_from_slice(e.name.as_bytes());
        out.extend_from_slice(&(e.range.start as i64).to_le_bytes());
        out.extend_from_slice(&(e.range.end as i64).to_le_bytes());
    }
    out
}

pub fn decode_index(bytes: &[u8]) -> std::result::Result<SubmodelIndex, String> {
    fn take<'a>(b: &mut &'a [u8], n: usize) -> std::result::Result<&'a [u8], String> {
        if b.len() < n {
            return Err("unexpected end of data".into());
        }
        let (head, rest) = b.split_at(n);
        *b = rest;
        Ok(head)
    }
    fn int(b: &mut &[u8]) -> std::result::Result<usize, String> {
        let v = i64::from_le_bytes(take(b, 8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| format!("negative value {v}"))
    }
    let mut b = bytes;
    let count = int(&mut b)?;
    let mut counts = Vec::new();
    let mut expected_start = 0;
    for _ in 0..count {
        let len = u32::from_le_bytes(take(&mut b, 4)?.try_into().unwrap()) as usize;
        let name = std::str::from_utf8(take(&mut b, len)?)
            .map_err(|e| e.to_string())?
            .to_owned();
        let (start, end) = (int(&mut b)?, int(&mut b)?);
        if start != expected_start || end < start {
            return Err(format!("range {start}..{end} for `{name}` is not contiguous"));
        }
        expected_start = end;
        counts.push((name, end - start));
    }
    if !b.is_empty() {
        return Err(format!("{} trailing bytes", b.len()));
    }
    Ok(SubmodelIndex::from_counts(counts))
}

/// Exclusive writer lock, released on drop.
struct WriterLock(File);

impl WriterLock {
    fn acquire(project_dir: &Path) -> Result<Self> {
        let path = project_dir.join(LOCK_FILE);
        let f = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        f.lock().map_err(|e| Error::io(&path, e))?;
        Ok(WriterLock(f))
    }
}

impl Drop for WriterLock {
    fn drop(&mut self) {
        let _ = self.0.unlock();
    }
}

fn read_manifest(project_dir: &Path) -> Result<Option<CacheManifest>> {
    let path = project_dir.join(MANIFEST_FILE);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(&path, e)),
    };
    let m: CacheManifest = serde_json::from_str(&text).map_err(|e| Error::CorruptCache {
        file: path.clone(),
        detail: e.to_string(),
    })?;
    if m.schema_version != SCHEMA_VERSION {
        return Err(Error::CorruptCache {
            file: path,
            detail: format!("unsupported schema version {}", m.schema_version),
        });
    }
    if m.cached_timesteps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::CorruptCache {
            file: path,
            detail: "cached_timesteps not sorted and unique".into(),
        });
    }
    Ok(Some(m))
}

fn write_manifest(project_dir: &Path, m: &CacheManifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(m).expect("manifest serializes");
    text.push('\n');
    write_atomic(&project_dir.join(MANIFEST_FILE), text.as_bytes())
}

#[derive(Debug)]
pub struct ProjectHandle {
    project_dir: PathBuf,
    dataset_dir: PathBuf,
    manifest: CacheManifest,
    index: SubmodelIndex,
}

/// Opens the project at `project_dir`, creating it if needed.
///
/// An existing project is only read; a fingerprint mismatch with the
/// dataset yields [`Error::StaleCache`].
pub fn init_project(project_dir: impl AsRef<Path>, dataset_dir: impl AsRef<Path>) -> Result<ProjectHandle> {
    let project_dir = project_dir.as_ref();
    let dataset = DatasetDir::new(dataset_dir.as_ref());
    let fingerprint = dataset_fingerprint(&dataset)?;

    if let Some(manifest) = read_manifest(project_dir)? {
        if manifest.dataset_fingerprint != fingerprint {
            return Err(Error::StaleCache {
                cached: manifest.dataset_fingerprint,
                actual: fingerprint,
            });
        }
        let path = project_dir.join(INDEX_FILE);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let index = decode_index(&bytes).map_err(|detail| Error::CorruptCache { file: path, detail })?;
        return Ok(ProjectHandle {
            project_dir: project_dir.to_owned(),
            dataset_dir: dataset.path().to_owned(),
            manifest,
            index,
        });
    }

    let sizes = dataset.read_sizes()?;
    let index = dataset.parse_node_tree_fast()?;
    fs::create_dir_all(project_dir).map_err(|e| Error::io(project_dir, e))?;
    let _lock = WriterLock::acquire(project_dir)?;
    // another writer may have finished creating it while we waited
    if read_manifest(project_dir)?.is_some() {
        drop(_lock);
        return init_project(project_dir, dataset.path());
    }
    write_atomic(&project_dir.join(INDEX_FILE), &encode_index(&index))?;
    let now = now_unix();
    let manifest = CacheManifest {
        schema_version: SCHEMA_VERSION,
        dataset_fingerprint: fingerprint,
        num_nodes: sizes.num_nodes,
        num_timesteps: sizes.num_timesteps,
        cached_timesteps: Vec::new(),
        created: now,
        updated: now,
    };
    write_manifest(project_dir, &manifest)?;
    Ok(ProjectHandle {
        project_dir: project_dir.to_owned(),
        dataset_dir: dataset.path().to_owned(),
        manifest,
        index,
    })
}

impl ProjectHandle {
    pub fn project_dir(&self) -> &Path {
        &self.project_dir
    }

    pub fn dataset_dir(&self) -> &Path {
        &self.dataset_dir
    }

    /// Manifest as of the last open or write through this handle.
    pub fn manifest(&self) -> &CacheManifest {
        &self.manifest
    }

    pub fn index(&self) -> &SubmodelIndex {
        &self.index
    }

    pub fn index_entries(&self) -> &[IndexEntry] {
        self.index.entries()
    }

    /// Stores row `t`. Already-cached timesteps are left untouched.
    pub fn cache_timestep(&mut self, t: usize, temps_row: &[f64]) -> Result<()> {
        if t >= self.manifest.num_timesteps {
            return Err(Error::Bounds {
                what: "timestep",
                detail: format!("{t} not below {}", self.manifest.num_timesteps),
            });
        }
        if temps_row.len() != self.manifest.num_nodes {
            return Err(Error::Validation(format!(
                "row has {} values, project has {} nodes",
                temps_row.len(),
                self.manifest.num_nodes
            )));
        }
        let _lock = WriterLock::acquire(&self.project_dir)?;
        let mut manifest =
            read_manifest(&self.project_dir)?.ok_or_else(|| Error::NotAProject(self.project_dir.clone()))?;
        if manifest.dataset_fingerprint != self.manifest.dataset_fingerprint {
            return Err(Error::StaleCache {
                cached: manifest.dataset_fingerprint,
                actual: self.manifest.dataset_fingerprint,
            });
        }
        if let Err(pos) = manifest.cached_timesteps.binary_search(&t) {
            let bytes: Vec<u8> = temps_row.iter().flat_map(|v| v.to_le_bytes()).collect();
            write_atomic(&self.project_dir.join(temps_file_name(t)), &bytes)?;
            manifest.cached_timesteps.insert(pos, t);
            manifest.updated = now_unix();
            write_manifest(&self.project_dir, &manifest)?;
        }
        self.manifest = manifest;
        Ok(())
    }

    /// Row `t` if cached. Never touches the dataset directory.
    pub fn load_cached(&self, t: usize) -> Result<Option<Vec<f64>>> {
        let Some(manifest) = read_manifest(&self.project_dir)? else {
            return Ok(None);
        };
        if !manifest.contains(t) {
            return Ok(None);
        }
        let path = self.project_dir.join(temps_file_name(t));
        let expected = manifest.num_nodes * 8;
        let mut bytes = Vec::with_capacity(expected);
        File::open(&path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| match e.kind() {
                io::ErrorKind::NotFound => Error::CorruptCache {
                    file: path.clone(),
                    detail: "listed in manifest but missing".into(),
                },
                _ => Error::io(&path, e),
            })?;
        if bytes.len() != expected {
            return Err(Error::CorruptCache {
                file: path,
                detail: format!("{} bytes, expected {expected}", bytes.len()),
            });
        }
        Ok(Some(
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ))
    }
}

fn is_cache_file(name: &str) -> bool {
    let data = name
        .strip_prefix("temps_")
        .and_then(|r| r.strip_suffix(".bin").or_else(|| r.strip_suffix(".bin.tmp")))
        .is_some_and(|digits| !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()));
    data || name == INDEX_FILE || name == format!("{INDEX_FILE}.tmp") || name == format!("{MANIFEST_FILE}.tmp")
}

/// Deletes the manifest and all cache files. Refuses directories without a
/// manifest; files the cache did not create are left alone.
pub fn clear_project(project_dir: impl AsRef<Path>) -> Result<()> {
    let project_dir = project_dir.as_ref();
    let manifest = project_dir.join(MANIFEST_FILE);
    if !manifest.is_file() {
        return Err(Error::NotAProject(project_dir.to_owned()));
    }
    let _lock = WriterLock::acquire(project_dir)?;
    // manifest first: a half-cleared directory is then simply not a project
    match fs::remove_file(&manifest) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(Error::NotAProject(project_dir.to_owned())),
        Err(e) => return Err(Error::io(&manifest, e)),
    }
    for entry in fs::read_dir(project_dir).map_err(|e| Error::io(project_dir, e))? {
        let entry = entry.map_err(|e| Error::io(project_dir, e))?;
        let name = entry.file_name();
        if name.to_str().is_some_and(is_cache_file) {
            let path = entry.path();
            fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn index_round_trip() {
        let idx = SubmodelIndex::from_counts([("A".to_string(), 3), ("BB".to_string(), 0), ("C".to_string(), 2)]);
        let bytes = encode_index(&idx);
        assert_eq!(bytes.len(), 8 + 3 * 20 + 4);
        assert_eq!(decode_index(&bytes).unwrap(), idx);
        assert!(decode_index(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn cache_file_patterns() {
        assert!(is_cache_file("temps_0.bin"));
        assert!(is_cache_file("temps_12.bin.tmp"));
        assert!(is_cache_file("index.bin"));
        assert!(!is_cache_file("temps_.bin"));
        assert!(!is_cache_file("temps_x.bin"));
        assert!(!is_cache_file("notes.txt"));
        assert!(!is_cache_file(LOCK_FILE));
    }

    #[test]
    fn manifest_json_uses_hex_fingerprint() {
        let m = CacheManifest {
            schema_version: 1,
            dataset_fingerprint: 0xff,
            num_nodes: 2,
            num_timesteps: 3,
            cached_timesteps: vec![0, 2],
            created: 5,
            updated: 6,
        };
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["dataset_fingerprint"], "00000000000000ff");
        assert_eq!(serde_json::from_value::<CacheManifest>(v).unwrap(), m);
    }
}
