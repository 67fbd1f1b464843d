//! One diagram request, from conductor flows to a styled [`DiagramSpec`].
//!
//! Filters run in a fixed order: grouping, then selection, then the radiant
//! threshold. Selection names therefore refer to rectangles after grouping.

use std::collections::BTreeMap;

use hfv_core::csr_model::{ConductorKind, ConductorRecord};
use hfv_core::csr_parser::SubmodelIndex;
use hfv_core::layout::{layout, LayoutKind};
use hfv_core::render::{build_diagram, DiagramSpec};
use hfv_core::thermal_graph::{apply_grouping, apply_radiant_threshold, apply_selection, compute_node_flows};
use hfv_core::units::DisplayUnits;
use hfv_core::Result;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagramRequest {
    pub timestep: usize,
    /// Rectangles to keep; `None` keeps all.
    pub include: Option<Vec<String>>,
    /// Group name to member submodels.
    pub groups: BTreeMap<String, Vec<String>>,
    /// Radiative edges below this many watts are hidden.
    pub radiant_threshold: f64,
    pub layout: LayoutKind,
    pub seed: Option<u64>,
    pub units: DisplayUnits,
}

impl DiagramRequest {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

/// Runs the filter pipeline over one timestep's temperatures.
pub fn build_view(
    index: &SubmodelIndex,
    conductors: &[ConductorRecord],
    temps_at_t: &[f64],
    req: &DiagramRequest,
) -> Result<DiagramSpec> {
    let flows = compute_node_flows(conductors, temps_at_t)?;
    let mut graph = apply_grouping(index, &flows, temps_at_t, &req.groups, req.timestep)?;
    if let Some(include) = &req.include {
        graph = apply_selection(&graph, include)?;
    }
    let radiative_q_max = graph
        .edges_of_kind(ConductorKind::Radiative)
        .map(|e| e.q_watts)
        .fold(0.0, f64::max);
    let mut graph = apply_radiant_threshold(&graph, req.radiant_threshold)?;
    graph.units = req.units;
    let positions = layout(&graph, req.layout, req.seed());
    let mut diagram = build_diagram(&graph, &positions, req.units)?;
    diagram.radiative_q_max = radiative_q_max;
    Ok(diagram)
}
