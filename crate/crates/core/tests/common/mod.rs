#![allow(dead_code)]

use std::path::Path;

use hfv_core::csr_model::{generate_synthetic, write_dataset, NodesPerSubmodel, SyntheticSpec, ThermalDataset};
use proptest::prelude::*;
use tempfile::TempDir;

pub fn write_synthetic(spec: &SyntheticSpec) -> (TempDir, ThermalDataset) {
    let dir = tempfile::tempdir().unwrap();
    let ds = generate_synthetic(spec).unwrap();
    write_dataset(&ds, dir.path()).unwrap();
    (dir, ds)
}

pub fn synthetic(spec: &SyntheticSpec) -> ThermalDataset {
    generate_synthetic(spec).unwrap()
}

/// Small datasets with uneven submodel sizes, including empty submodels.
pub fn small_spec() -> impl Strategy<Value = SyntheticSpec> {
    (1usize..=8)
        .prop_flat_map(|s| {
            (
                prop::collection::vec(0usize..=30, s),
                0usize..=5,
                0.0f64..=2.0,
                0.0f64..=1.5,
                any::<u64>(),
            )
        })
        .prop_map(|(counts, timesteps, ld, rd, seed)| SyntheticSpec {
            num_submodels: counts.len(),
            nodes_per_submodel: NodesPerSubmodel::List(counts),
            num_timesteps: timesteps,
            linear_density: ld,
            radiative_density: rd,
            temp_range: (200.0, 400.0),
            seed,
        })
}

/// Specs with at least one timestep and some nodes, for graph tests.
pub fn graph_spec() -> impl Strategy<Value = SyntheticSpec> {
    (2usize..=10, 2usize..=12, 0.2f64..=2.0, 0.0f64..=1.5, any::<u64>()).prop_map(|(s, n, ld, rd, seed)| {
        SyntheticSpec::new(s, n, 1, seed).with_densities(ld, rd)
    })
}

pub fn file_len(dir: &Path, name: &str) -> u64 {
    std::fs::metadata(dir.join(name)).unwrap().len()
}
