use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{encode_head, ThermalDataset, CONDUCTORS_FILE, NODTRE_FILE, SIZES_FILE, TEMPS_FILE};
use crate::error::{Error, Result};

/// Writes `dataset` as SIZES, NODTRE, TEMPS and CONDUCTORS under `dir`.
///
/// The dataset is checked before anything touches the disk, so an invalid
/// dataset never leaves partial files behind.
pub fn write_dataset(dataset: &ThermalDataset, dir: &Path) -> Result<()> {
    dataset.check()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    write_file(dir, SIZES_FILE, |w| w.write_all(&dataset.sizes().to_bytes()))?;

    write_file(dir, NODTRE_FILE, |w| {
        let mut next = 0i64;
        for s in &dataset.submodels {
            w.write_all(&encode_head(&s.name, s.node_count, 0))?;
            for _ in 0..s.node_count {
                w.write_all(&next.to_le_bytes())?;
                next += 1;
            }
        }
        Ok(())
    })?;

    write_file(dir, TEMPS_FILE, |w| {
        let temps = &dataset.temperatures;
        for t in &temps.timestamps {
            w.write_all(&t.to_le_bytes())?;
        }
        for v in &temps.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    })?;

    write_file(dir, CONDUCTORS_FILE, |w| {
        for c in &dataset.conductors {
            w.write_all(&c.to_bytes())?;
        }
        Ok(())
    })
}

fn write_file(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::with_capacity(1 << 16, file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&path, e))
}
