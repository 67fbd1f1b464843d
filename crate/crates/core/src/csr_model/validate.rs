use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, Read};
use std::path::Path;

use super::{
    ConductorKind, Sizes, CONDUCTORS_FILE, CONDUCTOR_RECORD_LEN, NODTRE_FILE, SIZES_FILE, SIZES_LEN, TEMPS_FILE,
};

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// File missing, unreadable, truncated or otherwise malformed.
    Structural { file: &'static str, detail: String },
    /// A NODTRE body that is not the ascending run its head implies.
    NonSequentialBody {
        block: usize,
        name: String,
        position: usize,
        expected: u64,
        found: i64,
    },
    CountMismatch {
        what: &'static str,
        expected: u64,
        found: u64,
    },
    InvalidValue { file: &'static str, detail: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Structural { file, detail } => write!(f, "{file}: {detail}"),
            Violation::NonSequentialBody {
                block,
                name,
                position,
                expected,
                found,
            } => write!(
                f,
                "NODTRE: non-sequential body in block {block} (`{name}`): position {position} holds {found}, expected {expected}"
            ),
            Violation::CountMismatch { what, expected, found } => {
                write!(f, "count mismatch for {what}: expected {expected}, found {found}")
            }
            Violation::InvalidValue { file, detail } => write!(f, "{file}: {detail}"),
        }
    }
}

/// Result of [`validate_dataset`]; empty means well-formed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    /// True when every NODTRE body is the run its head implies, which is what
    /// the head-only parser assumes.
    pub fn bodies_sequential(&self) -> bool {
        !self
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NonSequentialBody { .. }))
    }

    fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    fn structural(&mut self, file: &'static str, detail: impl Into<String>) {
        self.push(Violation::Structural {
            file,
            detail: detail.into(),
        });
    }

    fn invalid(&mut self, file: &'static str, detail: impl Into<String>) {
        self.push(Violation::InvalidValue {
            file,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "dataset is well-formed");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every file of the dataset in `dir` against the layout and its
/// invariants. Problems are collected rather than returned as errors.
pub fn validate_dataset(dir: &Path) -> ValidationReport {
    let mut report = ValidationReport::default();

    let sizes = check_sizes(dir, &mut report);
    check_node_tree(dir, sizes.as_ref(), &mut report);
    // TEMPS and CONDUCTORS lengths are only meaningful against SIZES
    if let Some(s) = sizes {
        check_temps(dir, &s, &mut report);
        check_conductors(dir, &s, &mut report);
    }
    report
}

fn open(dir: &Path, name: &'static str, report: &mut ValidationReport) -> Option<(BufReader<File>, u64)> {
    match File::open(dir.join(name)) {
        Ok(f) => {
            let len = f.metadata().map(|m| m.len()).unwrap_or(0);
            Some((BufReader::with_capacity(1 << 16, f), len))
        }
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            report.structural(name, "missing file");
            None
        }
        Err(e) => {
            report.structural(name, format!("unreadable: {e}"));
            None
        }
    }
}

fn read_i64(r: &mut impl Read) -> io::Result<i64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(i64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn check_sizes(dir: &Path, report: &mut ValidationReport) -> Option<Sizes> {
    let (mut r, len) = open(dir, SIZES_FILE, report)?;
    if len != SIZES_LEN {
        report.structural(SIZES_FILE, format!("length {len}, expected {SIZES_LEN}"));
        if len < SIZES_LEN {
            return None;
        }
    }
    let mut buf = [0u8; SIZES_LEN as usize];
    if let Err(e) = r.read_exact(&mut buf) {
        report.structural(SIZES_FILE, format!("read failed: {e}"));
        return None;
    }
    match Sizes::from_bytes(&buf) {
        Ok(s) => {
            if s.num_nodes > 0 && s.num_submodels == 0 {
                report.invalid(SIZES_FILE, "nodes present but zero submodels");
            }
            Some(s)
        }
        Err(e) => {
            report.structural(SIZES_FILE, e.to_string());
            None
        }
    }
}

fn check_node_tree(dir: &Path, sizes: Option<&Sizes>, report: &mut ValidationReport) -> Option<()> {
    let (mut r, len) = open(dir, NODTRE_FILE, report)?;
    let mut pos = 0u64;
    let mut block = 0usize;
    let mut next_index = 0u64;
    let mut names = HashSet::new();

    while pos < len {
        let mut lb = [0u8; 4];
        if r.read_exact(&mut lb).is_err() {
            report.structural(NODTRE_FILE, format!("truncated head of block {block}"));
            return None;
        }
        let name_len = u32::from_le_bytes(lb) as u64;
        if pos + 4 + name_len + 16 > len {
            report.structural(NODTRE_FILE, format!("truncated head of block {block}"));
            return None;
        }
        let mut name = vec![0u8; name_len as usize];
        r.read_exact(&mut name).ok()?;
        let name = match String::from_utf8(name) {
            Ok(n) => n,
            Err(_) => {
                report.invalid(NODTRE_FILE, format!("block {block}: name is not UTF-8"));
                String::from("<invalid>")
            }
        };
        if name.is_empty() {
            report.invalid(NODTRE_FILE, format!("block {block}: empty submodel name"));
        } else if !names.insert(name.clone()) {
            report.invalid(NODTRE_FILE, format!("block {block}: duplicate submodel name `{name}`"));
        }
        let count = read_i64(&mut r).ok()?;
        let _reserved = read_i64(&mut r).ok()?;
        pos += 4 + name_len + 16;
        if count < 0 {
            report.structural(NODTRE_FILE, format!("block {block} (`{name}`): negative node count {count}"));
            return None;
        }
        let count = count as u64;
        if pos + count * 8 > len {
            report.structural(
                NODTRE_FILE,
                format!("block {block} (`{name}`): body of {count} indices extends past end of file"),
            );
            return None;
        }
        let mut reported = false;
        for position in 0..count {
            let found = read_i64(&mut r).ok()?;
            let expected = next_index + position;
            if !reported && found != expected as i64 {
                report.push(Violation::NonSequentialBody {
                    block,
                    name: name.clone(),
                    position: position as usize,
                    expected,
                    found,
                });
                reported = true;
            }
        }
        pos += count * 8;
        next_index += count;
        block += 1;
    }

    if let Some(s) = sizes {
        if s.num_submodels as u64 != block as u64 {
            report.push(Violation::CountMismatch {
                what: "NODTRE blocks vs SIZES num_submodels",
                expected: s.num_submodels as u64,
                found: block as u64,
            });
        }
        if s.num_nodes as u64 != next_index {
            report.push(Violation::CountMismatch {
                what: "sum of NODTRE node counts vs SIZES num_nodes",
                expected: s.num_nodes as u64,
                found: next_index,
            });
        }
    }
    Some(())
}

fn check_temps(dir: &Path, s: &Sizes, report: &mut ValidationReport) {
    let Some((mut r, len)) = open(dir, TEMPS_FILE, report) else {
        return;
    };
    let expected = 8 * (s.num_timesteps as u64) * (1 + s.num_nodes as u64);
    if len != expected {
        report.push(Violation::CountMismatch {
            what: "TEMPS byte length",
            expected,
            found: len,
        });
        return;
    }
    let mut prev = f64::NEG_INFINITY;
    for t in 0..s.num_timesteps {
        let Ok(ts) = read_f64(&mut r) else {
            report.structural(TEMPS_FILE, "read failed");
            return;
        };
        if !ts.is_finite() || ts <= prev {
            report.invalid(TEMPS_FILE, format!("timestamp {t} ({ts}) not strictly increasing"));
            break;
        }
        prev = ts;
    }
    for i in 0..s.num_values() {
        let Ok(v) = read_f64(&mut r) else {
            report.structural(TEMPS_FILE, "read failed");
            return;
        };
        if !(v.is_finite() && v > 0.0) {
            let (t, n) = (i / s.num_nodes, i % s.num_nodes);
            report.invalid(TEMPS_FILE, format!("temperature {v} at timestep {t}, node {n} is not > 0 K"));
            return;
        }
    }
}

fn check_conductors(dir: &Path, s: &Sizes, report: &mut ValidationReport) {
    let Some((mut r, len)) = open(dir, CONDUCTORS_FILE, report) else {
        return;
    };
    let expected = CONDUCTOR_RECORD_LEN * s.num_conductors() as u64;
    if len != expected {
        report.push(Violation::CountMismatch {
            what: "CONDUCTORS byte length",
            expected,
            found: len,
        });
        return;
    }
    let mut rec = [0u8; CONDUCTOR_RECORD_LEN as usize];
    for i in 0..s.num_conductors() {
        if r.read_exact(&mut rec).is_err() {
            report.structural(CONDUCTORS_FILE, "read failed");
            return;
        }
        let expect_kind = if i < s.num_linear {
            ConductorKind::Linear
        } else {
            ConductorKind::Radiative
        };
        match ConductorKind::from_byte(rec[0]) {
            Some(k) if k == expect_kind => {}
            Some(k) => report.invalid(
                CONDUCTORS_FILE,
                format!("record {i}: kind {k:?} out of order (linear records precede radiative)"),
            ),
            None => report.invalid(CONDUCTORS_FILE, format!("record {i}: unknown kind byte {}", rec[0])),
        }
        if rec[1..8].iter().any(|&b| b != 0) {
            report.invalid(CONDUCTORS_FILE, format!("record {i}: nonzero padding"));
        }
        let a = i64::from_le_bytes(rec[8..16].try_into().unwrap());
        let b = i64::from_le_bytes(rec[16..24].try_into().unwrap());
        let g = f64::from_le_bytes(rec[24..32].try_into().unwrap());
        let n = s.num_nodes as i64;
        if a == b {
            report.invalid(CONDUCTORS_FILE, format!("record {i}: node_a = node_b = {a}"));
        }
        if !(0..n).contains(&a) || !(0..n).contains(&b) {
            report.invalid(CONDUCTORS_FILE, format!("record {i}: node index outside 0..{n}"));
        }
        if !(g.is_finite() && g > 0.0) {
            report.invalid(CONDUCTORS_FILE, format!("record {i}: conductance {g} is not > 0"));
        }
    }
}

#[cfg(test)]
mod tests {
    use std::fs;

    use super::*;
    use crate::csr_model::{encode_head, generate_synthetic, write_dataset, SyntheticSpec};

    fn written(seed: u64) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        let d = generate_synthetic(&SyntheticSpec::new(3, 4, 2, seed)).unwrap();
        write_dataset(&d, dir.path()).unwrap();
        dir
    }

    fn nodtre(blocks: &[(&str, &[i64])]) -> Vec<u8> {
        let mut out = Vec::new();
        for (name, body) in blocks {
            out.extend(encode_head(name, body.len(), 0));
            for i in *body {
                out.extend(i.to_le_bytes());
            }
        }
        out
    }

    #[test]
    fn well_formed_is_empty() {
        let dir = written(1);
        let r = validate_dataset(dir.path());
        assert!(r.is_empty(), "{r}");
        assert!(r.bodies_sequential());
    }

    #[test]
    fn non_sequential_body_named() {
        let dir = written(2);
        // keep counts consistent with SIZES: 3 blocks of 4
        fs::write(
            dir.path().join(NODTRE_FILE),
            nodtre(&[("SUB01", &[0, 2, 1, 3]), ("SUB02", &[4, 5, 6, 7]), ("SUB03", &[8, 9, 10, 11])]),
        )
        .unwrap();
        let r = validate_dataset(dir.path());
        assert!(!r.bodies_sequential());
        assert_eq!(
            r.violations,
            vec![Violation::NonSequentialBody {
                block: 0,
                name: "SUB01".into(),
                position: 1,
                expected: 1,
                found: 2
            }]
        );
        assert!(r.to_string().contains("non-sequential body"));
    }

    #[test]
    fn count_mismatch() {
        let dir = written(3);
        let mut sizes = fs::read(dir.path().join(SIZES_FILE)).unwrap();
        sizes[8..16].copy_from_slice(&13i64.to_le_bytes());
        fs::write(dir.path().join(SIZES_FILE), sizes).unwrap();
        let r = validate_dataset(dir.path());
        assert!(r.violations.iter().any(|v| matches!(
            v,
            Violation::CountMismatch {
                what: "sum of NODTRE node counts vs SIZES num_nodes",
                expected: 13,
                found: 12
            }
        )));
    }

    #[test]
    fn missing_and_truncated_files_reported() {
        let dir = written(4);
        fs::remove_file(dir.path().join(CONDUCTORS_FILE)).unwrap();
        let temps = fs::read(dir.path().join(TEMPS_FILE)).unwrap();
        fs::write(dir.path().join(TEMPS_FILE), &temps[..temps.len() - 3]).unwrap();
        let r = validate_dataset(dir.path());
        assert!(r.violations.iter().any(|v| matches!(v, Violation::Structural { file: CONDUCTORS_FILE, .. })));
        assert!(r.violations.iter().any(|v| matches!(v, Violation::CountMismatch { what: "TEMPS byte length", .. })));

        let empty = tempfile::tempdir().unwrap();
        assert_eq!(validate_dataset(empty.path()).violations.len(), 2);
    }

    #[test]
    fn bad_conductor_reported() {
        let dir = written(5);
        let mut c = fs::read(dir.path().join(CONDUCTORS_FILE)).unwrap();
        let a = c[8..16].to_vec();
        c[16..24].copy_from_slice(&a);
        fs::write(dir.path().join(CONDUCTORS_FILE), c).unwrap();
        let r = validate_dataset(dir.path());
        assert!(r.to_string().contains("node_a = node_b"), "{r}");
    }
}
