mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{graph_spec, synthetic};
use hfv_core::csr_model::{ConductorKind, SyntheticSpec};
use hfv_core::layout::{layered_kept_edges, layout, LayoutKind};
use hfv_core::render::{build_diagram, edge_style, render_svg, DiagramSpec};
use hfv_core::thermal_graph::{apply_radiant_threshold, submodel_graph, SubmodelGraph};
use hfv_core::units::{DisplayUnits, TemperatureUnit};
use proptest::prelude::*;

fn is_acyclic(edges: &[(String, String)]) -> bool {
    let mut indeg: BTreeMap<&str, usize> = BTreeMap::new();
    for (a, b) in edges {
        indeg.entry(a).or_default();
        *indeg.entry(b).or_default() += 1;
    }
    let mut ready: Vec<&str> = indeg.iter().filter(|(_, &d)| d == 0).map(|(n, _)| *n).collect();
    let mut seen = 0;
    while let Some(n) = ready.pop() {
        seen += 1;
        for (a, b) in edges {
            if a == n {
                let d = indeg.get_mut(b.as_str()).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(b);
                }
            }
        }
    }
    seen == indeg.len()
}

fn graph(spec: &SyntheticSpec) -> SubmodelGraph {
    submodel_graph(&synthetic(spec), 0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn layouts_are_deterministic_and_finite(spec in graph_spec(), seed in any::<u64>()) {
        let g = graph(&spec);
        for kind in LayoutKind::ALL {
            let a = layout(&g, kind, seed);
            let b = layout(&g, kind, seed);
            prop_assert!(a.is_finite(), "{kind} produced non-finite coordinates");
            prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
            prop_assert_eq!(a.positions.len(), g.nodes.len());
        }
    }

    #[test]
    fn layered_edges_point_down(spec in graph_spec()) {
        let g = graph(&spec);
        let kept = layered_kept_edges(&g);
        prop_assert!(is_acyclic(&kept));
        let l = layout(&g, LayoutKind::Layered, 0);
        for (a, b) in &kept {
            prop_assert!(l.get(b).unwrap().y > l.get(a).unwrap().y);
        }
    }

    #[test]
    fn svg_matches_diagram(spec in graph_spec(), tau in 0.0f64..2.0, kind_ix in 0usize..4) {
        let g = apply_radiant_threshold(&graph(&spec), tau).unwrap();
        let kind = LayoutKind::ALL[kind_ix];
        let d = build_diagram(&g, &layout(&g, kind, 1), DisplayUnits::default()).unwrap();
        let svg = render_svg(&d, 900, 700);
        prop_assert_eq!(svg.matches("<rect").count(), d.boxes.len());
        prop_assert_eq!(svg.matches("<path").count(), d.arrows.len());
        prop_assert_eq!(svg.matches("stroke-dasharray").count(), d.radiative_arrow_count());

        let back: DiagramSpec = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        prop_assert_eq!(&back, &d);

        let mut arrows = d.arrows.clone();
        arrows.sort_by(|a, b| a.q_watts.total_cmp(&b.q_watts));
        for w in arrows.windows(2) {
            prop_assert!(w[0].color <= w[1].color && w[0].weight <= w[1].weight);
        }
    }

    #[test]
    fn style_is_monotone(lo in -50.0f64..50.0, span in 0.0f64..100.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let hi = lo + span;
        let (qa, qb) = (lo + a.min(b) * span, lo + a.max(b) * span);
        let (sa, sb) = (edge_style(qa, lo, hi), edge_style(qb, lo, hi));
        prop_assert!(sa.color_scalar <= sb.color_scalar);
        prop_assert!(sa.stroke_width <= sb.stroke_width);
        prop_assert!((0.0..=1.0).contains(&sa.color_scalar));
        prop_assert!((1.0..=4.0).contains(&sb.stroke_width));
    }
}

#[test]
fn circular_positions_are_exact() {
    let g = graph(&SyntheticSpec::new(7, 2, 1, 4));
    let l = layout(&g, LayoutKind::Circular, 0);
    let names: BTreeSet<&str> = g.node_names().collect();
    for (k, name) in names.iter().enumerate() {
        let p = l.get(name).unwrap();
        let angle = 2.0 * std::f64::consts::PI * k as f64 / 7.0;
        assert!((p.x - angle.cos()).abs() <= 1e-12 && (p.y - angle.sin()).abs() <= 1e-12);
        assert!(((p.x * p.x + p.y * p.y).sqrt() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn threshold_removes_dashed_arrows_from_svg() {
    let g = graph(&SyntheticSpec::new(6, 6, 1, 21).with_densities(1.0, 1.5));
    let before = build_diagram(&g, &layout(&g, LayoutKind::Circular, 0), DisplayUnits::default()).unwrap();
    assert!(before.radiative_arrow_count() > 0);
    let above = before.radiative_q_max * 2.0 + 1.0;
    let cut = apply_radiant_threshold(&g, above).unwrap();
    let after = build_diagram(&cut, &layout(&cut, LayoutKind::Circular, 0), DisplayUnits::default()).unwrap();
    assert_eq!(after.radiative_arrow_count(), 0);
    assert!(!render_svg(&after, 400, 400).contains("stroke-dasharray"));
    assert_eq!(
        after.arrows.iter().filter(|a| a.kind == ConductorKind::Linear).count(),
        before.arrows.iter().filter(|a| a.kind == ConductorKind::Linear).count()
    );
}

#[test]
fn units_only_change_labels() {
    let g = graph(&SyntheticSpec::new(4, 3, 1, 2));
    let l = layout(&g, LayoutKind::Force, 0);
    let k = build_diagram(&g, &l, DisplayUnits::default()).unwrap();
    let c = build_diagram(
        &g,
        &l,
        DisplayUnits {
            temperature: TemperatureUnit::Celsius,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(k.arrows, c.arrows);
    for (a, b) in k.boxes.iter().zip(&c.boxes) {
        assert_eq!(a.fill_class, b.fill_class);
        assert!(b.label_lines[1].ends_with("°C"));
    }
}
