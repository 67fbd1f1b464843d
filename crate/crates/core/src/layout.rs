//! 2-D placement of submodel graphs.
//!
//! Four modes: circular, layered (longest-path layering with barycenter
//! ordering), force-directed (Fruchterman–Reingold with heat-weighted
//! springs) and subspace (Laplacian eigenvector embedding). All modes are
//! deterministic; nodes are always visited in name order. Coordinates are
//! abstract units, mapped to pixels by the renderer.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::thermal_graph::SubmodelGraph;

pub const DEFAULT_FORCE_ITERATIONS: usize = 500;
pub const MAX_SUBSPACE_DIMS: usize = 8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutKind {
    Layered,
    Force,
    Subspace,
    #[default]
    Circular,
}

impl LayoutKind {
    pub const ALL: [LayoutKind; 4] = [
        LayoutKind::Layered,
        LayoutKind::Force,
        LayoutKind::Subspace,
        LayoutKind::Circular,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LayoutKind::Layered => "layered",
            LayoutKind::Force => "force",
            LayoutKind::Subspace => "subspace",
            LayoutKind::Circular => "circular",
        }
    }
}

impl fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LayoutKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LayoutKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown layout `{s}` (expected layered, force, subspace or circular)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutResult {
    pub positions: BTreeMap<String, Point>,
    pub layout_kind: LayoutKind,
}

impl LayoutResult {
    pub fn get(&self, name: &str) -> Option<Point> {
        self.positions.get(name).copied()
    }

    pub fn is_finite(&self) -> bool {
        self.positions.values().all(|p| p.x.is_finite() && p.y.is_finite())
    }
}

/// Runs the layout selected by `kind` with default parameters.
pub fn layout(graph: &SubmodelGraph, kind: LayoutKind, seed: u64) -> LayoutResult {
    match kind {
        LayoutKind::Layered => layout_layered(graph),
        LayoutKind::Force => layout_force(graph, seed, DEFAULT_FORCE_ITERATIONS),
        LayoutKind::Subspace => layout_subspace(graph, None),
        LayoutKind::Circular => layout_circular(graph),
    }
}

/// Node names sorted, plus edges as `(from, to, q)` over those ids.
struct Indexed {
    names: Vec<String>,
    edges: Vec<(usize, usize, f64)>,
}

fn indexed(graph: &SubmodelGraph) -> Indexed {
    let mut names: Vec<String> = graph.node_names().map(str::to_owned).collect();
    names.sort();
    let id = |n: &str| names.binary_search_by(|x| x.as_str().cmp(n)).ok();
    let mut edges: Vec<(usize, usize, f64)> = graph
        .edges
        .iter()
        .filter_map(|e| Some((id(&e.from)?, id(&e.to)?, e.q_watts)))
        .collect();
    edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
    Indexed { names, edges }
}

fn result(names: &[String], coords: &[Point], layout_kind: LayoutKind) -> LayoutResult {
    LayoutResult {
        positions: names.iter().cloned().zip(coords.iter().copied()).collect(),
        layout_kind,
    }
}

fn circle(count: usize) -> Vec<Point> {
    (0..count)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / count as f64;
            Point::new(a.cos(), a.sin())
        })
        .collect()
}

/// Unit circle, name order, first node at angle 0.
pub fn layout_circular(graph: &SubmodelGraph) -> LayoutResult {
    let g = indexed(graph);
    result(&g.names, &circle(g.names.len()), LayoutKind::Circular)
}

/// Finds one directed cycle among the edges flagged `alive`, as edge indices.
fn find_cycle(n: usize, edges: &[(usize, usize, f64)], alive: &[bool]) -> Option<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &(u, _, _)) in edges.iter().enumerate() {
        if alive[i] {
            out[u].push(i);
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut path: Vec<usize> = Vec::new();

    fn visit(
        v: usize,
        edges: &[(usize, usize, f64)],
        out: &[Vec<usize>],
        state: &mut [u8],
        path: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        state[v] = 1;
        for &e in &out[v] {
            let w = edges[e].1;
            match state[w] {
                1 => {
                    // cycle: edges on the path from w back to v, then e
                    let start = path.iter().position(|&pe| edges[pe].0 == w).unwrap_or(path.len());
                    let mut cycle = path[start..].to_vec();
                    cycle.push(e);
                    return Some(cycle);
                }
                0 => {
                    path.push(e);
                    if let Some(c) = visit(w, edges, out, state, path) {
                        return Some(c);
                    }
                    path.pop();
                }
                _ => {}
            }
        }
        state[v] = 2;
        None
    }

    for v in 0..n {
        if state[v] == 0 {
            if let Some(c) = visit(v, edges, &out, &mut state, &mut path) {
                return Some(c);
            }
        }
    }
    None
}

/// Edges kept after repeatedly deleting the weakest edge of some cycle.
/// Ties go to the edge that sorts first by endpoints.
pub(crate) fn break_cycles(n: usize, edges: &[(usize, usize, f64)]) -> Vec<bool> {
    let mut alive = vec![true; edges.len()];
    while let Some(cycle) = find_cycle(n, edges, &alive) {
        let weakest = cycle
            .into_iter()
            .min_by(|&a, &b| edges[a].2.total_cmp(&edges[b].2).then(a.cmp(&b)))
            .expect("cycles are nonempty");
        alive[weakest] = false;
    }
    alive
}

/// Edges the layered layout keeps after cycle breaking, as `(from, to)`.
pub fn layered_kept_edges(graph: &SubmodelGraph) -> Vec<(String, String)> {
    let g = indexed(graph);
    let alive = break_cycles(g.names.len(), &g.edges);
    g.edges
        .iter()
        .zip(alive)
        .filter(|(_, a)| *a)
        .map(|(&(u, v, _), _)| (g.names[u].clone(), g.names[v].clone()))
        .collect()
}

/// Strata by longest path over the acyclic edge set; order within a stratum
/// by one barycenter sweep down, then one up. `y` is the layer index and `x`
/// the rank centred on zero.
pub fn layout_layered(graph: &SubmodelGraph) -> LayoutResult {
    let g = indexed(graph);
    let n = g.names.len();
    let alive = break_cycles(n, &g.edges);
    let kept: Vec<(usize, usize)> = g
        .edges
        .iter()
        .zip(&alive)
        .filter(|(_, &a)| a)
        .map(|(&(u, v, _), _)| (u, v))
        .collect();

    // Kahn's algorithm, smallest id first
    let mut indeg = vec![0usize; n];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in &kept {
        indeg[v] += 1;
        succ[u].push(v);
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut layer = vec![0usize; n];
    while let Some(u) = ready.pop_first() {
        for &v in &succ[u] {
            layer[v] = layer[v].max(layer[u] + 1);
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.insert(v);
            }
        }
    }

    let depth = layer.iter().max().map_or(0, |&m| m + 1);
    let mut layers: Vec<Vec<usize>> = vec![Vec::new(); depth];
    for v in 0..n {
        layers[layer[v]].push(v);
    }
    let mut rank = vec![0usize; n];
    let set_ranks = |layers: &[Vec<usize>], rank: &mut [usize]| {
        for l in layers {
            for (r, &v) in l.iter().enumerate() {
                rank[v] = r;
            }
        }
    };
    set_ranks(&layers, &mut rank);

    let reorder = |members: &mut Vec<usize>, rank: &mut [usize], neighbours: &dyn Fn(usize) -> Vec<usize>| {
        let mut keyed: Vec<(f64, usize, usize)> = members
            .iter()
            .map(|&v| {
                let ns = neighbours(v);
                let bary = if ns.is_empty() {
                    rank[v] as f64
                } else {
                    ns.iter().map(|&u| rank[u] as f64).sum::<f64>() / ns.len() as f64
                };
                (bary, rank[v], v)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        *members = keyed.into_iter().map(|k| k.2).collect();
        for (r, &v) in members.iter().enumerate() {
            rank[v] = r;
        }
    };

    for (l, members) in layers.iter_mut().enumerate().take(depth).skip(1) {
        let preds = |v: usize| -> Vec<usize> {
            kept.iter()
                .filter(|&&(a, b)| b == v && layer[a] + 1 == l)
                .map(|&(a, _)| a)
                .collect()
        };
        reorder(members, &mut rank, &preds);
    }
    for l in (0..depth.saturating_sub(1)).rev() {
        let succs = |v: usize| -> Vec<usize> {
            kept.iter()
                .filter(|&&(a, b)| a == v && layer[b] == l + 1)
                .map(|&(_, b)| b)
                .collect()
        };
        let mut members = std::mem::take(&mut layers[l]);
        reorder(&mut members, &mut rank, &succs);
        layers[l] = members;
    }

    let mut coords = vec![Point::new(0.0, 0.0); n];
    for (l, members) in layers.iter().enumerate() {
        let centre = (members.len() as f64 - 1.0) / 2.0;
        for (r, &v) in members.iter().enumerate() {
            coords[v] = Point::new(r as f64 - centre, l as f64);
        }
    }
    result(&g.names, &coords, LayoutKind::Layered)
}

/// Side of the square the force layout starts in.
const FORCE_FRAME: f64 = 2.0;
const MIN_DISTANCE: f64 = 1e-9;

/// Seeded start positions, uniform in the force frame.
pub(crate) fn initial_positions(count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = FORCE_FRAME / 2.0;
    (0..count)
        .map(|_| Point::new(rng.random_range(-half..half), rng.random_range(-half..half)))
        .collect()
}

/// Ideal spring length for `count` nodes.
pub fn ideal_edge_length(count: usize) -> f64 {
    FORCE_FRAME / (count.max(1) as f64).sqrt()
}

/// Fruchterman–Reingold. Springs are weighted by heat flow, rescaled to
/// `[0.5, 2]` over the displayed edges; every pair repels; the step limit
/// cools linearly to zero.
pub fn layout_force(graph: &SubmodelGraph, seed: u64, iterations: usize) -> LayoutResult {
    let g = indexed(graph);
    let n = g.names.len();
    let mut pos = initial_positions(n, seed);
    let k = ideal_edge_length(n);

    let (q_min, q_max) = g
        .edges
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.2), hi.max(e.2)));
    let weight = |q: f64| {
        if q_max > q_min {
            0.5 + 1.5 * (q - q_min) / (q_max - q_min)
        } else {
            1.25
        }
    };
    let springs: Vec<(usize, usize, f64)> = g.edges.iter().map(|&(u, v, q)| (u, v, weight(q))).collect();

    let t0 = FORCE_FRAME / 10.0;
    let iterations = iterations.max(1);
    let mut disp = vec![(0.0f64, 0.0f64); n];
    for it in 0..iterations {
        let step = t0 * (1.0 - it as f64 / iterations as f64);
        disp.iter_mut().for_each(|d| *d = (0.0, 0.0));

        for i in 0..n {
            for j in i + 1..n {
                let (ux, uy, d) = direction(pos[i], pos[j], i * n + j);
                let f = k * k / d;
                disp[i].0 += ux * f;
                disp[i].1 += uy * f;
                disp[j].0 -= ux * f;
                disp[j].1 -= uy * f;
            }
        }
        for &(u, v, w) in &springs {
            let (ux, uy, d) = direction(pos[u], pos[v], u * n + v);
            let f = w * d * d / k;
            disp[u].0 -= ux * f;
            disp[u].1 -= uy * f;
            disp[v].0 += ux * f;
            disp[v].1 += uy * f;
        }
        for (p, &(dx, dy)) in pos.iter_mut().zip(&disp) {
            let len = (dx * dx + dy * dy).sqrt();
            if len > 0.0 && len.is_finite() {
                let s = len.min(step) / len;
                p.x += dx * s;
                p.y += dy * s;
            }
        }
    }
    result(&g.names, &pos, LayoutKind::Force)
}

/// Unit vector from `b` to `a` and the distance, never shorter than
/// [`MIN_DISTANCE`]. Coincident points get a fixed direction from `salt`.
fn direction(a: Point, b: Point, salt: usize) -> (f64, f64, f64) {
    let (dx, dy) = (a.x - b.x, a.y - b.y);
    let d = (dx * dx + dy * dy).sqrt();
    if d < MIN_DISTANCE {
        let angle = salt as f64;
        return (angle.cos(), angle.sin(), MIN_DISTANCE);
    }
    (dx / d, dy / d, d)
}

/// Gap between packed components in the subspace layout.
const COMPONENT_GAP: f64 = 0.5;

/// Laplacian eigenvector embedding.
///
/// Pair weights are the summed `q` over both kinds and directions. Each
/// connected component is embedded on its own using the eigenvectors of the
/// `dims` smallest nonzero eigenvalues, projected onto the first two, scaled
/// into `[-1, 1]` and packed left to right. Graphs with at most two nodes fall
/// back to the circular placement.
pub fn layout_subspace(graph: &SubmodelGraph, dims: Option<usize>) -> LayoutResult {
    let g = indexed(graph);
    let n = g.names.len();
    if n <= 2 {
        return result(&g.names, &circle(n), LayoutKind::Subspace);
    }
    let dims = dims.unwrap_or(MAX_SUBSPACE_DIMS.min(n - 1)).max(1);

    let w_max = g.edges.iter().map(|e| e.2).fold(0.0, f64::max);
    let mut weights = DMatrix::<f64>::zeros(n, n);
    for &(u, v, q) in &g.edges {
        let w = if w_max > 0.0 { q / w_max } else { 0.0 };
        weights[(u, v)] += w;
        weights[(v, u)] += w;
    }

    let comps = components(n, &weights);
    let mut coords = vec![Point::new(0.0, 0.0); n];
    let mut cursor = 0.0;
    for members in comps {
        let local = embed_component(&members, &weights, dims);
        let min_x = local.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let max_x = local.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        for (&v, p) in members.iter().zip(&local) {
            coords[v] = Point::new(p.x - min_x + cursor, p.y);
        }
        cursor += max_x - min_x + COMPONENT_GAP;
    }
    result(&g.names, &coords, LayoutKind::Subspace)
}

/// Connected components over positive weights, each sorted, ordered by
/// smallest member.
fn components(n: usize, weights: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![s];
        let mut members = Vec::new();
        comp[s] = id;
        while let Some(v) = stack.pop() {
            members.push(v);
            for w in 0..n {
                if comp[w] == usize::MAX && weights[(v, w)] > 0.0 {
                    comp[w] = id;
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

fn embed_component(members: &[usize], weights: &DMatrix<f64>, dims: usize) -> Vec<Point> {
    let m = members.len();
    match m {
        1 => return vec![Point::new(0.0, 0.0)],
        2 => return vec![Point::new(-0.5, 0.0), Point::new(0.5, 0.0)],
        _ => {}
    }
    let mut lap = DMatrix::<f64>::zeros(m, m);
    for (i, &a) in members.iter().enumerate() {
        for (j, &b) in members.iter().enumerate() {
            if i != j {
                let w = weights[(a, b)];
                lap[(i, j)] = -w;
                lap[(i, i)] += w;
            }
        }
    }
    let vectors = smallest_nonzero_eigenvectors(lap, dims.min(m - 1));
    let axis = |k: usize| -> Vec<f64> { vectors.get(k).cloned().unwrap_or_else(|| vec![0.0; m]) };
    let (xs, ys) = (axis(0), axis(1));
    let scale = xs
        .iter()
        .chain(&ys)
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    xs.iter()
        .zip(&ys)
        .map(|(&x, &y)| Point::new(x / scale, y / scale))
        .collect()
}

/// Eigenvectors of a connected component's Laplacian for eigenvalues 2..=k+1
/// in ascending order (the first, constant eigenvector is skipped). Each
/// vector's largest-magnitude entry is made positive.
pub(crate) fn smallest_nonzero_eigenvectors(lap: DMatrix<f64>, count: usize) -> Vec<Vec<f64>> {
    let eig = SymmetricEigen::new(lap);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    order
        .into_iter()
        .skip(1)
        .take(count)
        .map(|c| {
            let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
            let pivot = v
                .iter()
                .enumerate()
                .fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
            if v[pivot] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csr_model::ConductorKind;
    use crate::thermal_graph::{LoadClass, SubmodelEdge, SubmodelNodeView};
    use crate::units::DisplayUnits;

    fn graph(names: &[&str], edges: &[(&str, &str, f64, ConductorKind)]) -> SubmodelGraph {
        SubmodelGraph {
            nodes: names
                .iter()
                .map(|n| SubmodelNodeView {
                    name: n.to_string(),
                    avg_temp: Some(300.0),
                    net_load: 0.0,
                    load_class: LoadClass::Neutral,
                    member_submodels: vec![n.to_string()],
                    node_count: 1,
                })
                .collect(),
            edges: edges
                .iter()
                .map(|&(f, t, q, kind)| SubmodelEdge {
                    from: f.into(),
                    to: t.into(),
                    kind,
                    q_watts: q,
                    g_total: (kind == ConductorKind::Linear).then_some(1.0),
                    conductor_count: 1,
                })
                .collect(),
            timestep: 0,
            units: DisplayUnits::default(),
        }
    }

    const L: ConductorKind = ConductorKind::Linear;
    const R: ConductorKind = ConductorKind::Radiative;

    #[test]
    fn circular_four_nodes() {
        let g = graph(&["D", "B", "A", "C"], &[]);
        let r = layout_circular(&g);
        let expect = [("A", 1.0, 0.0), ("B", 0.0, 1.0), ("C", -1.0, 0.0), ("D", 0.0, -1.0)];
        for (name, x, y) in expect {
            let p = r.get(name).unwrap();
            assert!((p.x - x).abs() < 1e-12 && (p.y - y).abs() < 1e-12, "{name}: {p:?}");
        }
        assert_eq!(layout_circular(&graph(&["X"], &[])).get("X"), Some(Point::new(1.0, 0.0)));
        assert!(layout_circular(&graph(&[], &[])).positions.is_empty());
    }

    #[test]
    fn layered_chain() {
        let g = graph(&["A", "B", "C"], &[("A", "B", 1.0, L), ("B", "C", 1.0, L)]);
        let r = layout_layered(&g);
        assert_eq!(r.get("A").unwrap().y, 0.0);
        assert_eq!(r.get("B").unwrap().y, 1.0);
        assert_eq!(r.get("C").unwrap().y, 2.0);
    }

    #[test]
    fn layered_edgeless() {
        let g = graph(&["C", "A", "B"], &[]);
        let r = layout_layered(&g);
        assert_eq!(r.get("A").unwrap(), Point::new(-1.0, 0.0));
        assert_eq!(r.get("B").unwrap(), Point::new(0.0, 0.0));
        assert_eq!(r.get("C").unwrap(), Point::new(1.0, 0.0));
    }

    #[test]
    fn layered_two_cycle_drops_weaker() {
        let g = graph(&["A", "B"], &[("A", "B", 5.0, L), ("B", "A", 1.0, R)]);
        let r = layout_layered(&g);
        assert_eq!(r.get("A").unwrap().y, 0.0);
        assert_eq!(r.get("B").unwrap().y, 1.0);
    }

    #[test]
    fn cycle_breaking_picks_smallest() {
        // 0->1 (3), 1->2 (1), 2->0 (2): drop 1->2
        let edges = [(0, 1, 3.0), (1, 2, 1.0), (2, 0, 2.0)];
        assert_eq!(break_cycles(3, &edges), vec![true, false, true]);
    }

    #[test]
    fn barycenter_reorders() {
        // A, B on layer 0; C under B and D under A; name order would put C first.
        let g = graph(&["A", "B", "C", "D"], &[("B", "C", 1.0, L), ("A", "D", 1.0, L)]);
        let r = layout_layered(&g);
        assert!(r.get("D").unwrap().x < r.get("C").unwrap().x);
    }

    #[test]
    fn force_single_node_stays() {
        let g = graph(&["A"], &[]);
        let r = layout_force(&g, 3, 500);
        assert_eq!(r.get("A").unwrap(), initial_positions(1, 3)[0]);
    }

    #[test]
    fn force_deterministic_and_seeded() {
        let g = graph(&["A", "B", "C"], &[("A", "B", 1.0, L), ("B", "C", 4.0, R)]);
        assert_eq!(layout_force(&g, 1, 200), layout_force(&g, 1, 200));
        assert_ne!(layout_force(&g, 1, 200), layout_force(&g, 2, 200));
    }

    #[test]
    fn force_spring_pulls_in() {
        let g = graph(&["A", "B"], &[("A", "B", 1.0, L)]);
        let k = ideal_edge_length(2);
        let dist = |a: Point, b: Point| ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
        let mut checked = 0;
        for seed in 0..50 {
            let init = initial_positions(2, seed);
            let d0 = dist(init[0], init[1]);
            if d0 <= k {
                continue;
            }
            let r = layout_force(&g, seed, DEFAULT_FORCE_ITERATIONS);
            let d1 = dist(r.get("A").unwrap(), r.get("B").unwrap());
            assert!(d1 < d0, "seed {seed}: {d1} >= {d0}");
            checked += 1;
        }
        assert!(checked > 0);
    }

    #[test]
    fn force_handles_coincident_start() {
        let g = graph(&["A", "B", "C"], &[("A", "B", 1.0, L)]);
        let (ux, uy, d) = direction(Point::new(0.5, 0.5), Point::new(0.5, 0.5), 7);
        assert!(ux.is_finite() && uy.is_finite() && d > 0.0);
        assert!(layout_force(&g, 0, 50).is_finite());
    }

    #[test]
    fn subspace_small_falls_back() {
        let g = graph(&["A", "B"], &[("A", "B", 1.0, L)]);
        let r = layout_subspace(&g, None);
        assert_eq!(r.layout_kind, LayoutKind::Subspace);
        assert_eq!(r.get("A").unwrap(), Point::new(1.0, 0.0));
    }

    #[test]
    fn subspace_path_orders_by_fiedler() {
        // path P0-P1-P2-P3-P4 with unit weights
        let names = ["P0", "P1", "P2", "P3", "P4"];
        let edges: Vec<_> = names.windows(2).map(|w| (w[0], w[1], 1.0, L)).collect();
        let r = layout_subspace(&graph(&names, &edges), None);
        let xs: Vec<f64> = names.iter().map(|n| r.get(n).unwrap().x).collect();
        let up = xs.windows(2).all(|w| w[0] < w[1]);
        let down = xs.windows(2).all(|w| w[0] > w[1]);
        assert!(up || down, "{xs:?}");
    }

    #[test]
    fn subspace_components_disjoint() {
        let g = graph(&["A", "B", "C", "D"], &[("A", "B", 1.0, L), ("C", "D", 2.0, R)]);
        let r = layout_subspace(&g, None);
        let (a, b, c, d) = (r.get("A").unwrap(), r.get("B").unwrap(), r.get("C").unwrap(), r.get("D").unwrap());
        let first = (a.x.min(b.x), a.x.max(b.x));
        let second = (c.x.min(d.x), c.x.max(d.x));
        assert!(first.1 < second.0 || second.1 < first.0);
    }

    #[test]
    fn layout_kind_parse() {
        for k in LayoutKind::ALL {
            assert_eq!(k.as_str().parse::<LayoutKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{k}\""));
        }
        assert!("spiral".parse::<LayoutKind>().is_err());
    }
}
