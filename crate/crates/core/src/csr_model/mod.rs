//! On-disk dataset layout, in-memory dataset model, writer and synthetic
//! generator.
//!
//! A dataset is a directory holding four little-endian binary files:
//!
//! ```text
//! SIZES       5 x i64: submodels, nodes, linear, radiative, timesteps
//! NODTRE      per submodel: u32 name_len | name | i64 node_count | i64 reserved
//!             followed by node_count x i64 node indices (the body)
//! TEMPS       timesteps x f64 timestamps, then timesteps rows of nodes x f64 K
//! CONDUCTORS  per conductor: u8 kind | 7 x 0u8 | i64 a | i64 b | f64 conductance
//! ```
//!
//! NODTRE bodies are always the ascending run of indices that follows from
//! the cumulative head counts; the fast parser relies on that and never
//! reads them.

mod synth;
mod validate;
mod write;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::csr_parser::SubmodelIndex;
use crate::error::{Error, Result};

pub use synth::{generate_synthetic, NodesPerSubmodel, SyntheticSpec};
pub use validate::{validate_dataset, ValidationReport, Violation};
pub use write::write_dataset;

pub const SIZES_FILE: &str = "SIZES";
pub const NODTRE_FILE: &str = "NODTRE";
pub const TEMPS_FILE: &str = "TEMPS";
pub const CONDUCTORS_FILE: &str = "CONDUCTORS";

/// Byte length of the SIZES file.
pub const SIZES_LEN: u64 = 40;
/// Fixed part of a NODTRE head: `name_len` + `node_count` + `reserved_meta`.
pub const HEAD_FIXED_LEN: u64 = 4 + 8 + 8;
pub const CONDUCTOR_RECORD_LEN: u64 = 32;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sizes {
    pub num_submodels: usize,
    pub num_nodes: usize,
    pub num_linear: usize,
    pub num_radiative: usize,
    pub num_timesteps: usize,
}

impl Sizes {
    pub fn num_conductors(&self) -> usize {
        self.num_linear + self.num_radiative
    }

    /// Number of stored temperature values, `nodes x timesteps`.
    pub fn num_values(&self) -> usize {
        self.num_nodes * self.num_timesteps
    }

    pub fn to_bytes(&self) -> [u8; SIZES_LEN as usize] {
        let mut out = [0u8; SIZES_LEN as usize];
        let fields = [
            self.num_submodels,
            self.num_nodes,
            self.num_linear,
            self.num_radiative,
            self.num_timesteps,
        ];
        for (chunk, v) in out.chunks_exact_mut(8).zip(fields) {
            chunk.copy_from_slice(&(v as i64).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8; SIZES_LEN as usize]) -> Result<Self> {
        let mut fields = [0usize; 5];
        for (i, chunk) in bytes.chunks_exact(8).enumerate() {
            let v = i64::from_le_bytes(chunk.try_into().unwrap());
            fields[i] = usize::try_from(v)
                .map_err(|_| Error::structural(SIZES_FILE, format!("field {i} is negative ({v})")))?;
        }
        Ok(Sizes {
            num_submodels: fields[0],
            num_nodes: fields[1],
            num_linear: fields[2],
            num_radiative: fields[3],
            num_timesteps: fields[4],
        })
    }
}

/// Head of one NODTRE block, as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeTreeBlock {
    pub submodel_name: String,
    pub node_count: usize,
    /// Opaque; written as zero and carries no meaning on read.
    pub reserved_meta: u64,
}

impl NodeTreeBlock {
    /// Serialized head bytes (everything but the body).
    pub fn head_bytes(&self) -> Vec<u8> {
        encode_head(&self.submodel_name, self.node_count, self.reserved_meta)
    }

    pub fn head_len(&self) -> u64 {
        HEAD_FIXED_LEN + self.submodel_name.len() as u64
    }
}

pub(crate) fn encode_head(name: &str, node_count: usize, reserved_meta: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEAD_FIXED_LEN as usize + name.len());
    out.extend_from_slice(&(name.len() as u32).to_le_bytes());
    out.extend_from_slice(name.as_bytes());
    out.extend_from_slice(&(node_count as i64).to_le_bytes());
    out.extend_from_slice(&reserved_meta.to_le_bytes());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConductorKind {
    Linear,
    Radiative,
}

impl ConductorKind {
    pub fn to_byte(self) -> u8 {
        match self {
            ConductorKind::Linear => 0,
            ConductorKind::Radiative => 1,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(ConductorKind::Linear),
            1 => Some(ConductorKind::Radiative),
            _ => None,
        }
    }
}

/// A heat path between two nodes.
///
/// `conductance` is in W/K for linear conductors and in m² (script-F times
/// area) for radiative ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConductorRecord {
    pub kind: ConductorKind,
    pub node_a: usize,
    pub node_b: usize,
    pub conductance: f64,
}

impl ConductorRecord {
    pub fn linear(node_a: usize, node_b: usize, conductance: f64) -> Self {
        ConductorRecord {
            kind: ConductorKind::Linear,
            node_a,
            node_b,
            conductance,
        }
    }

    pub fn radiative(node_a: usize, node_b: usize, conductance: f64) -> Self {
        ConductorRecord {
            kind: ConductorKind::Radiative,
            node_a,
            node_b,
            conductance,
        }
    }

    pub fn to_bytes(&self) -> [u8; CONDUCTOR_RECORD_LEN as usize] {
        let mut out = [0u8; CONDUCTOR_RECORD_LEN as usize];
        out[0] = self.kind.to_byte();
        out[8..16].copy_from_slice(&(self.node_a as i64).to_le_bytes());
        out[16..24].copy_from_slice(&(self.node_b as i64).to_le_bytes());
        out[24..32].copy_from_slice(&self.conductance.to_le_bytes());
        out
    }
}

/// Timestep-major temperature values in Kelvin.
///
/// Also used for windows of the full matrix, in which case `num_nodes` is the
/// window width and `timestamps` covers only the selected timesteps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TemperatureMatrix {
    pub timestamps: Vec<f64>,
    pub num_nodes: usize,
    pub values: Vec<f64>,
}

impl TemperatureMatrix {
    pub fn new(timestamps: Vec<f64>, num_nodes: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != timestamps.len() * num_nodes {
            return Err(Error::Validation(format!(
                "temperature matrix holds {} values, expected {} timesteps x {} nodes",
                values.len(),
                timestamps.len(),
                num_nodes
            )));
        }
        Ok(TemperatureMatrix {
            timestamps,
            num_nodes,
            values,
        })
    }

    pub fn num_timesteps(&self) -> usize {
        self.timestamps.len()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.num_nodes..(t + 1) * self.num_nodes]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on a zero chunk size
        (0..self.num_timesteps()).map(move |t| self.row(t))
    }
}

/// One submodel as listed in NODTRE.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submodel {
    pub name: String,
    pub node_count: usize,
}

impl Submodel {
    pub fn new(name: impl Into<String>, node_count: usize) -> Self {
        Submodel {
            name: name.into(),
            node_count,
        }
    }
}

/// Complete in-memory dataset. Node indices are global and assigned
/// contiguously in submodel order.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalDataset {
    pub submodels: Vec<Submodel>,
    /// Linear conductors first, then radiative ones.
    pub conductors: Vec<ConductorRecord>,
    pub temperatures: TemperatureMatrix,
}

impl ThermalDataset {
    pub fn num_nodes(&self) -> usize {
        self.submodels.iter().map(|s| s.node_count).sum()
    }

    pub fn sizes(&self) -> Sizes {
        let num_linear = self
            .conductors
            .iter()
            .filter(|c| c.kind == ConductorKind::Linear)
            .count();
        Sizes {
            num_submodels: self.submodels.len(),
            num_nodes: self.num_nodes(),
            num_linear,
            num_radiative: self.conductors.len() - num_linear,
            num_timesteps: self.temperatures.num_timesteps(),
        }
    }

    pub fn index(&self) -> SubmodelIndex {
        SubmodelIndex::from_counts(self.submodels.iter().map(|s| (s.name.clone(), s.node_count)))
    }

    /// Checks every type invariant of the dataset.
    pub fn check(&self) -> Result<()> {
        let num_nodes = self.num_nodes();
        if num_nodes > 0 && self.submodels.is_empty() {
            return Err(Error::Validation("nodes without submodels".into()));
        }
        let mut seen = HashSet::new();
        for s in &self.submodels {
            if s.name.is_empty() {
                return Err(Error::Validation("empty submodel name".into()));
            }
            if s.name.len() > u32::MAX as usize {
                return Err(Error::Validation(format!("submodel name too long: {}", s.name.len())));
            }
            if !seen.insert(s.name.as_str()) {
                return Err(Error::Validation(format!("duplicate submodel name `{}`", s.name)));
            }
        }

        let temps = &self.temperatures;
        if temps.num_nodes != num_nodes {
            return Err(Error::Validation(format!(
                "temperature matrix has {} columns, dataset has {num_nodes} nodes",
                temps.num_nodes
            )));
        }
        if temps.values.len() != temps.num_timesteps() * num_nodes {
            return Err(Error::Validation("temperature matrix has the wrong length".into()));
        }
        if temps.timestamps.iter().any(|t| !t.is_finite()) {
            return Err(Error::Validation("non-finite timestamp".into()));
        }
        if let Some(w) = temps.timestamps.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Validation(format!(
                "timestamps not strictly increasing at timestep {}",
                w + 1
            )));
        }
        if let Some(i) = temps.values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Validation(format!(
                "temperature {} at value {i} is not a positive finite Kelvin value",
                temps.values[i]
            )));
        }

        let mut radiative_seen = false;
        for (i, c) in self.conductors.iter().enumerate() {
            match c.kind {
                ConductorKind::Radiative => radiative_seen = true,
                ConductorKind::Linear if radiative_seen => {
                    return Err(Error::Validation(format!(
                        "conductor {i}: linear conductors must precede radiative ones"
                    )))
                }
                ConductorKind::Linear => {}
            }
            if c.node_a == c.node_b {
                return Err(Error::Validation(format!("conductor {i} connects node {} to itself", c.node_a)));
            }
            if c.node_a >= num_nodes || c.node_b >= num_nodes {
                return Err(Error::Validation(format!(
                    "conductor {i} references node outside 0..{num_nodes}"
                )));
            }
            if !(c.conductance.is_finite() && c.conductance > 0.0) {
                return Err(Error::Validation(format!(
                    "conductor {i} has non-positive conductance {}",
                    c.conductance
                )));
            }
        }
        Ok(())
    }
}
