//! Conductor heat flows and the submodel-level heat-flow graph.
//!
//! Linear conductors carry `q = G (T_a - T_b)`, radiative conductors
//! `q = σ G_r (T_a⁴ - T_b⁴)`; positive `q` flows from `node_a` to `node_b`.
//! Flows between nodes of different submodels (or groups) are summed per
//! unordered pair and kind, netted, and drawn as one edge pointing along the
//! net flow. Flows inside a submodel cancel and are dropped.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::csr_model::{ConductorKind, ConductorRecord, TemperatureMatrix, ThermalDataset};
use crate::csr_parser::SubmodelIndex;
use crate::error::{Error, Result};
use crate::units::DisplayUnits;

/// Stefan–Boltzmann constant, W·m⁻²·K⁻⁴.
pub const STEFAN_BOLTZMANN: f64 = 5.670374419e-8;

/// Half-width of the neutral load band, in the display power unit.
pub const NEUTRAL_BAND: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatFlow {
    pub conductor: ConductorRecord,
    /// Positive from `node_a` to `node_b`.
    pub q_watts: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadClass {
    Neutral,
    ExcessOutgoing,
    ExcessIncoming,
}

/// `|net| < 1` is neutral; ±1 and beyond belong to the excess classes.
pub fn classify_load(net_load: f64) -> LoadClass {
    if net_load <= -NEUTRAL_BAND {
        LoadClass::ExcessOutgoing
    } else if net_load >= NEUTRAL_BAND {
        LoadClass::ExcessIncoming
    } else {
        LoadClass::Neutral
    }
}

/// Heat flow through one conductor given its endpoint temperatures.
pub fn conductor_flow(c: &ConductorRecord, t_a: f64, t_b: f64) -> f64 {
    match c.kind {
        ConductorKind::Linear => c.conductance * (t_a - t_b),
        ConductorKind::Radiative => STEFAN_BOLTZMANN * c.conductance * (t_a.powi(4) - t_b.powi(4)),
    }
}

fn endpoint_temp(temps: &[f64], node: usize) -> Result<f64> {
    let t = *temps.get(node).ok_or(Error::MissingTemperature(node))?;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Validation(format!("node {node} temperature {t} K is not > 0")));
    }
    Ok(t)
}

/// Flow through every conductor at one timestep.
pub fn compute_node_flows(conductors: &[ConductorRecord], temps_at_t: &[f64]) -> Result<Vec<HeatFlow>> {
    conductors
        .iter()
        .map(|c| {
            let t_a = endpoint_temp(temps_at_t, c.node_a)?;
            let t_b = endpoint_temp(temps_at_t, c.node_b)?;
            Ok(HeatFlow {
                conductor: *c,
                q_watts: conductor_flow(c, t_a, t_b),
            })
        })
        .collect()
}

/// One rectangle of the diagram: a submodel or a group of submodels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmodelNodeView {
    pub name: String,
    /// Mean over all member nodes; `None` when the members have no nodes.
    pub avg_temp: Option<f64>,
    /// Incoming minus outgoing, W.
    pub net_load: f64,
    pub load_class: LoadClass,
    pub member_submodels: Vec<String>,
    pub node_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmodelEdge {
    pub from: String,
    pub to: String,
    pub kind: ConductorKind,
    /// Net flow along `from -> to`; always positive.
    pub q_watts: f64,
    /// Summed conductance of the pair's linear conductors, W/K.
    pub g_total: Option<f64>,
    pub conductor_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmodelGraph {
    pub nodes: Vec<SubmodelNodeView>,
    pub edges: Vec<SubmodelEdge>,
    pub timestep: usize,
    pub units: DisplayUnits,
}

impl SubmodelGraph {
    pub fn node(&self, name: &str) -> Option<&SubmodelNodeView> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn node_names(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.name.as_str())
    }

    pub fn edges_of_kind(&self, kind: ConductorKind) -> impl Iterator<Item = &SubmodelEdge> {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    pub fn total_net_load(&self) -> f64 {
        self.nodes.iter().map(|n| n.net_load).sum()
    }
}

/// A group of index blocks merged into one rectangle.
struct Part {
    name: String,
    blocks: Vec<usize>,
}

#[derive(Default)]
struct PairSum {
    signed_q: f64,
    g_total: f64,
    count: usize,
}

fn aggregate(
    index: &SubmodelIndex,
    parts: Vec<Part>,
    flows: &[HeatFlow],
    temps_at_t: &[f64],
    timestep: usize,
) -> Result<SubmodelGraph> {
    if temps_at_t.len() < index.num_nodes() {
        return Err(Error::MissingTemperature(temps_at_t.len()));
    }
    let mut part_of_block = vec![0usize; index.len()];
    for (p, part) in parts.iter().enumerate() {
        for &b in &part.blocks {
            part_of_block[b] = p;
        }
    }
    let part_of_node = |node: usize| -> Result<usize> {
        index.submodel_of(node).map(|b| part_of_block[b]).ok_or_else(|| {
            Error::structural(
                "CONDUCTORS",
                format!("node {node} lies outside every submodel (0..{})", index.num_nodes()),
            )
        })
    };

    let mut net = vec![0.0; parts.len()];
    let mut pairs: BTreeMap<(usize, usize, ConductorKind), PairSum> = BTreeMap::new();
    for f in flows {
        let pa = part_of_node(f.conductor.node_a)?;
        let pb = part_of_node(f.conductor.node_b)?;
        if pa == pb {
            continue;
        }
        net[pb] += f.q_watts;
        net[pa] -= f.q_watts;
        let (lo, hi, signed) = if pa < pb { (pa, pb, f.q_watts) } else { (pb, pa, -f.q_watts) };
        let sum = pairs.entry((lo, hi, f.conductor.kind)).or_default();
        sum.signed_q += signed;
        sum.g_total += f.conductor.conductance;
        sum.count += 1;
    }

    let nodes = parts
        .iter()
        .zip(&net)
        .map(|(part, &net_load)| {
            let mut sum = 0.0;
            let mut count = 0;
            for &b in &part.blocks {
                let r = index.entries()[b].range.clone();
                count += r.len();
                sum += temps_at_t[r].iter().sum::<f64>();
            }
            SubmodelNodeView {
                name: part.name.clone(),
                avg_temp: (count > 0).then(|| sum / count as f64),
                net_load,
                load_class: classify_load(net_load),
                member_submodels: part.blocks.iter().map(|&b| index.entries()[b].name.clone()).collect(),
                node_count: count,
            }
        })
        .collect();

    let edges = pairs
        .into_iter()
        .filter(|(_, s)| s.signed_q != 0.0)
        .map(|((lo, hi, kind), s)| {
            let (from, to) = if s.signed_q > 0.0 { (lo, hi) } else { (hi, lo) };
            SubmodelEdge {
                from: parts[from].name.clone(),
                to: parts[to].name.clone(),
                kind,
                q_watts: s.signed_q.abs(),
                g_total: (kind == ConductorKind::Linear).then_some(s.g_total),
                conductor_count: s.count,
            }
        })
        .collect();

    Ok(SubmodelGraph {
        nodes,
        edges,
        timestep,
        units: DisplayUnits::default(),
    })
}

/// Flows and per-submodel aggregation for timestep `t` of an in-memory
/// dataset.
pub fn submodel_graph(dataset: &ThermalDataset, t: usize) -> Result<SubmodelGraph> {
    let temps = &dataset.temperatures;
    if t >= temps.num_timesteps() {
        return Err(Error::Bounds {
            what: "timestep",
            detail: format!("{t} not below {}", temps.num_timesteps()),
        });
    }
    let row = temps.row(t);
    let flows = compute_node_flows(&dataset.conductors, row)?;
    aggregate_to_submodels(&dataset.index(), &flows, row, t)
}

/// One rectangle per submodel, in index order.
pub fn aggregate_to_submodels(
    index: &SubmodelIndex,
    flows: &[HeatFlow],
    temps_at_t: &[f64],
    timestep: usize,
) -> Result<SubmodelGraph> {
    let parts = index
        .entries()
        .iter()
        .enumerate()
        .map(|(b, e)| Part {
            name: e.name.clone(),
            blocks: vec![b],
        })
        .collect();
    aggregate(index, parts, flows, temps_at_t, timestep)
}

/// Like [`aggregate_to_submodels`] but merges each group's members into one
/// rectangle. Submodels not named in any group stay on their own. A group
/// takes the position of its first member in index order.
pub fn apply_grouping(
    index: &SubmodelIndex,
    flows: &[HeatFlow],
    temps_at_t: &[f64],
    groups: &BTreeMap<String, Vec<String>>,
    timestep: usize,
) -> Result<SubmodelGraph> {
    let mut group_of_block: HashMap<usize, &str> = HashMap::new();
    for (group, members) in groups {
        if group.is_empty() {
            return Err(Error::Validation("group name must not be empty".into()));
        }
        if members.is_empty() {
            return Err(Error::Validation(format!("group `{group}` has no members")));
        }
        for m in members {
            let b = index.position(m).ok_or_else(|| Error::UnknownSubmodel(m.clone()))?;
            if group_of_block.insert(b, group.as_str()).is_some() {
                return Err(Error::OverlappingGroups(m.clone()));
            }
        }
    }
    for group in groups.keys() {
        if let Some(b) = index.position(group) {
            if group_of_block.get(&b).is_none_or(|g| g != group) {
                return Err(Error::Validation(format!(
                    "group name `{group}` collides with a submodel outside that group"
                )));
            }
        }
    }

    let mut parts: Vec<Part> = Vec::new();
    let mut part_of_group: HashMap<&str, usize> = HashMap::new();
    for b in 0..index.len() {
        match group_of_block.get(&b) {
            Some(&g) => {
                if let Some(&p) = part_of_group.get(g) {
                    parts[p].blocks.push(b);
                } else {
                    part_of_group.insert(g, parts.len());
                    parts.push(Part {
                        name: g.to_owned(),
                        blocks: vec![b],
                    });
                }
            }
            None => parts.push(Part {
                name: index.entries()[b].name.clone(),
                blocks: vec![b],
            }),
        }
    }
    aggregate(index, parts, flows, temps_at_t, timestep)
}

/// Restricts the view to `include`. Node annotations keep their whole-model
/// values.
pub fn apply_selection<S: AsRef<str>>(graph: &SubmodelGraph, include: &[S]) -> Result<SubmodelGraph> {
    let mut keep = HashSet::new();
    for name in include {
        let name = name.as_ref();
        if graph.node(name).is_none() {
            return Err(Error::UnknownSubmodel(name.to_owned()));
        }
        keep.insert(name);
    }
    Ok(SubmodelGraph {
        nodes: graph
            .nodes
            .iter()
            .filter(|n| keep.contains(n.name.as_str()))
            .cloned()
            .collect(),
        edges: graph
            .edges
            .iter()
            .filter(|e| keep.contains(e.from.as_str()) && keep.contains(e.to.as_str()))
            .cloned()
            .collect(),
        ..graph.clone()
    })
}

/// Drops radiative edges carrying less than `tau` watts. Linear edges are
/// never dropped.
pub fn apply_radiant_threshold(graph: &SubmodelGraph, tau: f64) -> Result<SubmodelGraph> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::Validation(format!("radiant threshold must be >= 0, got {tau}")));
    }
    Ok(SubmodelGraph {
        edges: graph
            .edges
            .iter()
            .filter(|e| e.kind == ConductorKind::Linear || e.q_watts >= tau)
            .cloned()
            .collect(),
        ..graph.clone()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemperatureSeries {
    pub name: String,
    pub timestamps: Vec<f64>,
    /// Mean submodel temperature per timestep, K.
    pub kelvin: Vec<f64>,
}

fn check_matrix(index: &SubmodelIndex, temps: &TemperatureMatrix) -> Result<()> {
    if temps.num_nodes != index.num_nodes() {
        return Err(Error::Validation(format!(
            "temperature matrix has {} nodes, index has {}",
            temps.num_nodes,
            index.num_nodes()
        )));
    }
    Ok(())
}

pub fn submodel_temperature_series<S: AsRef<str>>(
    index: &SubmodelIndex,
    temps: &TemperatureMatrix,
    names: &[S],
) -> Result<Vec<TemperatureSeries>> {
    check_matrix(index, temps)?;
    names
        .iter()
        .map(|name| {
            let name = name.as_ref();
            let range = index.range_of(name)?;
            if range.is_empty() {
                return Err(Error::Validation(format!("submodel `{name}` has no nodes")));
            }
            let n = range.len() as f64;
            Ok(TemperatureSeries {
                name: name.to_owned(),
                timestamps: temps.timestamps.clone(),
                kelvin: temps
                    .rows()
                    .map(|row| row[range.clone()].iter().sum::<f64>() / n)
                    .collect(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairFlowSeries {
    pub from: String,
    pub to: String,
    pub timestamps: Vec<f64>,
    /// Signed net flow `from -> to` per timestep, W.
    pub linear: Vec<f64>,
    pub radiative: Vec<f64>,
}

impl PairFlowSeries {
    pub fn label(&self) -> String {
        format!("{}→{}", self.from, self.to)
    }
}

/// Net flow from `from` to `to` at every timestep, per conductor kind.
pub fn pair_flow_series(
    index: &SubmodelIndex,
    conductors: &[ConductorRecord],
    temps: &TemperatureMatrix,
    from: &str,
    to: &str,
) -> Result<PairFlowSeries> {
    check_matrix(index, temps)?;
    let a = index.position(from).ok_or_else(|| Error::UnknownSubmodel(from.to_owned()))?;
    let b = index.position(to).ok_or_else(|| Error::UnknownSubmodel(to.to_owned()))?;
    if a == b {
        return Err(Error::Validation(format!("flow needs two distinct submodels, got `{from}` twice")));
    }

    // (conductor, +1 when node_a is in `from`, -1 when node_a is in `to`)
    let mut crossing = Vec::new();
    for c in conductors {
        let sa = index.submodel_of(c.node_a);
        let sb = index.submodel_of(c.node_b);
        if (sa, sb) == (Some(a), Some(b)) {
            crossing.push((c, false));
        } else if (sa, sb) == (Some(b), Some(a)) {
            crossing.push((c, true));
        }
    }

    let mut linear = Vec::with_capacity(temps.num_timesteps());
    let mut radiative = Vec::with_capacity(temps.num_timesteps());
    for row in temps.rows() {
        let (mut lin, mut rad) = (0.0, 0.0);
        for &(c, reversed) in &crossing {
            let q = conductor_flow(c, endpoint_temp(row, c.node_a)?, endpoint_temp(row, c.node_b)?);
            let q = if reversed { -q } else { q };
            match c.kind {
                ConductorKind::Linear => lin += q,
                ConductorKind::Radiative => rad += q,
            }
        }
        linear.push(lin);
        radiative.push(rad);
    }
    Ok(PairFlowSeries {
        from: from.to_owned(),
        to: to.to_owned(),
        timestamps: temps.timestamps.clone(),
        linear,
        radiative,
    })
}
