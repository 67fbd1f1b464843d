use std::fs::File;
use std::io::{self, Read, Seek, SeekFrom};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use crate::csr_model::{CONDUCTORS_FILE, NODTRE_FILE, SIZES_FILE, TEMPS_FILE};
use crate::error::{Error, Result};

/// Bytes actually returned by `read` calls, per dataset file.
#[derive(Debug, Default)]
pub struct IoStats {
    sizes: AtomicU64,
    nodtre: AtomicU64,
    temps: AtomicU64,
    conductors: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IoSnapshot {
    pub sizes: u64,
    pub nodtre: u64,
    pub temps: u64,
    pub conductors: u64,
}

impl IoSnapshot {
    pub fn total(&self) -> u64 {
        self.sizes + self.nodtre + self.temps + self.conductors
    }
}

impl IoStats {
    pub fn snapshot(&self) -> IoSnapshot {
        IoSnapshot {
            sizes: self.sizes.load(Ordering::Relaxed),
            nodtre: self.nodtre.load(Ordering::Relaxed),
            temps: self.temps.load(Ordering::Relaxed),
            conductors: self.conductors.load(Ordering::Relaxed),
        }
    }

    pub fn total(&self) -> u64 {
        self.snapshot().total()
    }

    pub fn reset(&self) {
        for c in [&self.sizes, &self.nodtre, &self.temps, &self.conductors] {
            c.store(0, Ordering::Relaxed);
        }
    }

    fn counter(&self, file: &str) -> &AtomicU64 {
        match file {
            SIZES_FILE => &self.sizes,
            NODTRE_FILE => &self.nodtre,
            TEMPS_FILE => &self.temps,
            CONDUCTORS_FILE => &self.conductors,
            other => unreachable!("not a dataset file: {other}"),
        }
    }
}

/// Unbuffered file handle that adds every byte it reads to a counter.
pub(crate) struct CountedFile<'a> {
    file: File,
    counter: &'a AtomicU64,
    pub(crate) name: &'static str,
    pub(crate) len: u64,
}

impl<'a> CountedFile<'a> {
    pub(crate) fn open(dir: &Path, name: &'static str, stats: &'a IoStats) -> Result<Self> {
        let path = dir.join(name);
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let len = file.metadata().map_err(|e| Error::io(&path, e))?.len();
        Ok(CountedFile {
            file,
            counter: stats.counter(name),
            name,
            len,
        })
    }

    /// `read_exact` that maps a short read to a truncation error.
    pub(crate) fn fill(&mut self, buf: &mut [u8], what: impl FnOnce() -> String) -> Result<()> {
        match self.read_exact(buf) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => Err(Error::truncated(self.name, what())),
            Err(e) => Err(Error::io(self.name, e)),
        }
    }

    pub(crate) fn seek_to(&mut self, pos: u64) -> Result<()> {
        self.file
            .seek(SeekFrom::Start(pos))
            .map(|_| ())
            .map_err(|e| Error::io(self.name, e))
    }
}

impl Read for CountedFile<'_> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.file.read(buf)?;
        self.counter.fetch_add(n as u64, Ordering::Relaxed);
        Ok(n)
    }
}

pub(crate) fn decode_f64s(bytes: &[u8], out: &mut Vec<f64>) {
    out.extend(
        bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap())),
    );
}
