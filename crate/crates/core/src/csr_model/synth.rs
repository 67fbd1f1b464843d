use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ConductorRecord, Submodel, TemperatureMatrix, ThermalDataset};
use crate::error::{Error, Result};

/// Spacing of synthetic timestamps, in seconds.
const TIMESTEP_SECONDS: f64 = 60.0;
const LINEAR_G_RANGE: (f64, f64) = (0.1, 10.0);
const RADIATIVE_G_RANGE: (f64, f64) = (0.001, 0.1);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodesPerSubmodel {
    Constant(usize),
    List(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub num_submodels: usize,
    pub nodes_per_submodel: NodesPerSubmodel,
    pub num_timesteps: usize,
    /// Linear conductors per node.
    pub linear_density: f64,
    /// Radiative conductors per node.
    pub radiative_density: f64,
    /// Inclusive Kelvin range temperatures are drawn from.
    pub temp_range: (f64, f64),
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(num_submodels: usize, nodes_per_submodel: usize, num_timesteps: usize, seed: u64) -> Self {
        SyntheticSpec {
            num_submodels,
            nodes_per_submodel: NodesPerSubmodel::Constant(nodes_per_submodel),
            num_timesteps,
            linear_density: 1.0,
            radiative_density: 0.5,
            temp_range: (250.0, 350.0),
            seed,
        }
    }

    pub fn with_densities(mut self, linear: f64, radiative: f64) -> Self {
        self.linear_density = linear;
        self.radiative_density = radiative;
        self
    }

    fn node_counts(&self) -> Result<Vec<usize>> {
        match &self.nodes_per_submodel {
            NodesPerSubmodel::Constant(n) => Ok(vec![*n; self.num_submodels]),
            NodesPerSubmodel::List(v) if v.len() == self.num_submodels => Ok(v.clone()),
            NodesPerSubmodel::List(v) => Err(Error::Validation(format!(
                "{} node counts given for {} submodels",
                v.len(),
                self.num_submodels
            ))),
        }
    }

    fn check(&self) -> Result<()> {
        if self.num_submodels == 0 {
            return Err(Error::Validation("synthetic model needs at least one submodel".into()));
        }
        for (what, d) in [("linear", self.linear_density), ("radiative", self.radiative_density)] {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::Validation(format!("{what} density must be >= 0, got {d}")));
            }
        }
        let (lo, hi) = self.temp_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(Error::Validation(format!("invalid temperature range [{lo}, {hi}]")));
        }
        Ok(())
    }
}

/// Builds a deterministic dataset from `spec`.
///
/// Node indices are assigned contiguously in submodel order. When either
/// density is positive the first conductors of the densest-first kind form a
/// random spanning tree over the non-empty submodels, so the submodel graph
/// is connected.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<ThermalDataset> {
    spec.check()?;
    let counts = spec.node_counts()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let width = spec.num_submodels.to_string().len().max(2);
    let submodels: Vec<Submodel> = counts
        .iter()
        .enumerate()
        .map(|(k, &n)| Submodel::new(format!("SUB{:0width$}", k + 1), n))
        .collect();

    // global [start, end) per non-empty submodel
    let mut ranges = Vec::new();
    let mut start = 0;
    for &n in &counts {
        if n > 0 {
            ranges.push((start, start + n));
        }
        start += n;
    }
    let num_nodes = start;

    let mut num_linear = (spec.linear_density * num_nodes as f64).round() as usize;
    let mut num_radiative = (spec.radiative_density * num_nodes as f64).round() as usize;
    if num_nodes < 2 {
        num_linear = 0;
        num_radiative = 0;
    }
    let spanning = ranges.len().saturating_sub(1);
    let linear_spans = spec.linear_density > 0.0;
    if num_nodes >= 2 {
        if linear_spans {
            num_linear = num_linear.max(spanning);
        } else if spec.radiative_density > 0.0 {
            num_radiative = num_radiative.max(spanning);
        }
    }

    let draw = |rng: &mut ChaCha8Rng, count: usize, spans: bool, make: fn(usize, usize, f64) -> ConductorRecord, g: (f64, f64)| {
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            let (a, b) = if spans && i < spanning {
                let k = i + 1;
                let j = rng.random_range(0..k);
                let a = rng.random_range(ranges[j].0..ranges[j].1);
                let b = rng.random_range(ranges[k].0..ranges[k].1);
                if rng.random_bool(0.5) {
                    (a, b)
                } else {
                    (b, a)
                }
            } else {
                let a = rng.random_range(0..num_nodes);
                let mut b = rng.random_range(0..num_nodes - 1);
                if b >= a {
                    b += 1;
                }
                (a, b)
            };
            out.push(make(a, b, rng.random_range(g.0..g.1)));
        }
        out
    };
    let mut conductors = draw(&mut rng, num_linear, linear_spans, ConductorRecord::linear, LINEAR_G_RANGE);
    conductors.extend(draw(
        &mut rng,
        num_radiative,
        !linear_spans,
        ConductorRecord::radiative,
        RADIATIVE_G_RANGE,
    ));

    let (lo, hi) = spec.temp_range;
    let timestamps: Vec<f64> = (0..spec.num_timesteps).map(|t| t as f64 * TIMESTEP_SECONDS).collect();
    let values: Vec<f64> = (0..spec.num_timesteps * num_nodes)
        .map(|_| rng.random_range(lo..=hi))
        .collect();

    Ok(ThermalDataset {
        submodels,
        conductors,
        temperatures: TemperatureMatrix::new(timestamps, num_nodes, values)?,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::csr_model::ConductorKind;

    #[test]
    fn deterministic_for_seed() {
        let spec = SyntheticSpec::new(4, 5, 3, 7);
        assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
        let other = SyntheticSpec { seed: 8, ..spec.clone() };
        assert_ne!(generate_synthetic(&spec).unwrap(), generate_synthetic(&other).unwrap());
    }

    #[test]
    fn contiguous_ranges() {
        let d = generate_synthetic(&SyntheticSpec::new(2, 3, 1, 1)).unwrap();
        let idx = d.index();
        assert_eq!(idx.range_of("SUB01").unwrap(), 0..3);
        assert_eq!(idx.range_of("SUB02").unwrap(), 3..6);
    }

    #[test]
    fn zero_densities_no_conductors() {
        let d = generate_synthetic(&SyntheticSpec::new(3, 4, 2, 42).with_densities(0.0, 0.0)).unwrap();
        assert!(d.conductors.is_empty());
    }

    #[test]
    fn zero_submodels_rejected() {
        let spec = SyntheticSpec::new(0, 4, 2, 42);
        assert!(matches!(generate_synthetic(&spec), Err(Error::Validation(_))));
    }

    #[test]
    fn bad_spec_rejected() {
        let mut spec = SyntheticSpec::new(2, 4, 2, 42);
        spec.temp_range = (0.0, 10.0);
        assert!(generate_synthetic(&spec).is_err());
        let mut spec = SyntheticSpec::new(2, 4, 2, 42);
        spec.linear_density = -1.0;
        assert!(generate_synthetic(&spec).is_err());
        let mut spec = SyntheticSpec::new(2, 4, 2, 42);
        spec.nodes_per_submodel = NodesPerSubmodel::List(vec![1]);
        assert!(generate_synthetic(&spec).is_err());
    }

    #[test]
    fn generated_dataset_is_valid_and_connected() {
        for seed in 0..20 {
            let mut spec = SyntheticSpec::new(8, 3, 2, seed).with_densities(0.05, 0.0);
            spec.nodes_per_submodel = NodesPerSubmodel::List(vec![3, 0, 2, 5, 1, 0, 4, 2]);
            let d = generate_synthetic(&spec).unwrap();
            d.check().unwrap();
            assert!(d.conductors.iter().all(|c| c.kind == ConductorKind::Linear));

            let idx = d.index();
            let mut parent: Vec<usize> = (0..idx.len()).collect();
            fn find(p: &mut Vec<usize>, x: usize) -> usize {
                if p[x] != x {
                    let r = find(p, p[x]);
                    p[x] = r;
                }
                p[x]
            }
            for c in &d.conductors {
                let a = idx.submodel_of(c.node_a).unwrap();
                let b = idx.submodel_of(c.node_b).unwrap();
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
            let roots: BTreeSet<usize> = (0..idx.len())
                .filter(|&k| !idx.entries()[k].range.is_empty())
                .map(|k| find(&mut parent, k))
                .collect();
            assert_eq!(roots.len(), 1, "seed {seed}");
        }
    }

    #[test]
    fn temperatures_within_range() {
        let mut spec = SyntheticSpec::new(3, 10, 5, 3);
        spec.temp_range = (280.0, 290.0);
        let d = generate_synthetic(&spec).unwrap();
        assert!(d.temperatures.values.iter().all(|v| (280.0..=290.0).contains(v)));
        assert_eq!(d.temperatures.timestamps, vec![0.0, 60.0, 120.0, 180.0, 240.0]);
    }
}
