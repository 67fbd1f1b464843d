mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{graph_spec, synthetic};
use hfv_core::csr_model::{ConductorKind, ConductorRecord, SyntheticSpec};
use hfv_core::thermal_graph::{
    aggregate_to_submodels, apply_grouping, apply_radiant_threshold, apply_selection, classify_load,
    compute_node_flows, submodel_graph, LoadClass, SubmodelGraph,
};
use hfv_core::Error;
use proptest::prelude::*;

fn radiative_set(g: &SubmodelGraph) -> BTreeSet<(String, String)> {
    g.edges_of_kind(ConductorKind::Radiative)
        .map(|e| (e.from.clone(), e.to.clone()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn net_loads_sum_to_zero(spec in graph_spec(), timesteps in 1usize..=4) {
        let ds = synthetic(&SyntheticSpec { num_timesteps: timesteps, ..spec });
        for t in 0..timesteps {
            let flows = compute_node_flows(&ds.conductors, ds.temperatures.row(t)).unwrap();
            let g = aggregate_to_submodels(&ds.index(), &flows, ds.temperatures.row(t), t).unwrap();
            let scale: f64 = flows.iter().map(|f| f.q_watts.abs()).sum();
            prop_assert!(g.total_net_load().abs() <= 1e-9 * scale.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn threshold_is_monotone(spec in graph_spec(), a in 0.0f64..5.0, b in 0.0f64..5.0) {
        let g = submodel_graph(&synthetic(&spec), 0).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let gl = apply_radiant_threshold(&g, lo).unwrap();
        let gh = apply_radiant_threshold(&g, hi).unwrap();
        prop_assert!(radiative_set(&gh).is_subset(&radiative_set(&gl)));
        let linear = |g: &SubmodelGraph| g.edges_of_kind(ConductorKind::Linear).cloned().collect::<Vec<_>>();
        prop_assert_eq!(linear(&gh), linear(&g));
        prop_assert_eq!(apply_radiant_threshold(&g, 0.0).unwrap(), g);
    }

    #[test]
    fn selection_commutes_with_threshold(
        spec in graph_spec(),
        tau in 0.0f64..3.0,
        pick in prop::collection::vec(any::<bool>(), 10),
    ) {
        let g = submodel_graph(&synthetic(&spec), 0).unwrap();
        let names: Vec<String> = g
            .node_names()
            .zip(pick.iter().cycle())
            .filter(|(_, &p)| p)
            .map(|(n, _)| n.to_owned())
            .collect();
        let a = apply_selection(&apply_radiant_threshold(&g, tau).unwrap(), &names).unwrap();
        let b = apply_radiant_threshold(&apply_selection(&g, &names).unwrap(), tau).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn singleton_groups_change_nothing(spec in graph_spec()) {
        let ds = synthetic(&spec);
        let index = ds.index();
        let row = ds.temperatures.row(0);
        let flows = compute_node_flows(&ds.conductors, row).unwrap();
        let groups: BTreeMap<String, Vec<String>> =
            index.names().map(|n| (n.to_owned(), vec![n.to_owned()])).collect();
        prop_assert_eq!(
            apply_grouping(&index, &flows, row, &groups, 0).unwrap(),
            aggregate_to_submodels(&index, &flows, row, 0).unwrap()
        );
    }

    #[test]
    fn grouping_internalizes_member_flows(spec in graph_spec(), seed in any::<u64>()) {
        let ds = synthetic(&spec);
        let index = ds.index();
        let names: Vec<String> = index.names().map(str::to_owned).collect();
        let i = (seed as usize) % names.len();
        let j = (i + 1 + (seed >> 32) as usize % (names.len() - 1)) % names.len();
        let members = vec![names[i].clone(), names[j].clone()];

        let row = ds.temperatures.row(0);
        let flows = compute_node_flows(&ds.conductors, row).unwrap();
        let plain = aggregate_to_submodels(&index, &flows, row, 0).unwrap();
        let groups = BTreeMap::from([("GROUP".to_string(), members.clone())]);
        let grouped = apply_grouping(&index, &flows, row, &groups, 0).unwrap();

        prop_assert_eq!(grouped.nodes.len(), plain.nodes.len() - 1);
        prop_assert!(grouped.edges.iter().all(|e| !members.contains(&e.from) && !members.contains(&e.to)));
        prop_assert!(grouped.edges.iter().all(|e| e.from != e.to));

        let g = grouped.node("GROUP").unwrap();
        let member_net: f64 = members.iter().map(|m| plain.node(m).unwrap().net_load).sum();
        let scale: f64 = flows.iter().map(|f| f.q_watts.abs()).sum::<f64>().max(1.0);
        prop_assert!((g.net_load - member_net).abs() <= 1e-9 * scale);

        let nodes: usize = members.iter().map(|m| index.range_of(m).unwrap().len()).sum();
        let sum: f64 = members.iter().flat_map(|m| row[index.range_of(m).unwrap()].iter()).sum();
        prop_assert!((g.avg_temp.unwrap() - sum / nodes as f64).abs() <= 1e-9 * 400.0);
        prop_assert_eq!(g.node_count, nodes);
    }
}

#[test]
fn classification_band() {
    let cases = [
        (0.5, LoadClass::Neutral),
        (-1.0, LoadClass::ExcessOutgoing),
        (1.0, LoadClass::ExcessIncoming),
        (-0.999, LoadClass::Neutral),
        (0.0, LoadClass::Neutral),
    ];
    for (net, class) in cases {
        assert_eq!(classify_load(net), class, "net {net}");
    }
}

#[test]
fn two_node_linear_example() {
    let index = hfv_core::csr_parser::SubmodelIndex::from_counts([("A".to_string(), 1), ("B".to_string(), 1)]);
    let conductors = [ConductorRecord::linear(0, 1, 2.0)];
    let row = [310.0, 300.0];
    let flows = compute_node_flows(&conductors, &row).unwrap();
    assert_eq!(flows[0].q_watts, 20.0);
    let g = aggregate_to_submodels(&index, &flows, &row, 0).unwrap();
    assert_eq!(g.node("A").unwrap().net_load, -20.0);
    assert_eq!(g.node("B").unwrap().net_load, 20.0);
    assert_eq!(g.node("A").unwrap().load_class, LoadClass::ExcessOutgoing);
    assert_eq!(g.node("B").unwrap().load_class, LoadClass::ExcessIncoming);
    assert_eq!((g.edges[0].from.as_str(), g.edges[0].to.as_str()), ("A", "B"));
}

#[test]
fn selection_and_grouping_errors() {
    let ds = synthetic(&SyntheticSpec::new(3, 2, 1, 1));
    let index = ds.index();
    let row = ds.temperatures.row(0);
    let flows = compute_node_flows(&ds.conductors, row).unwrap();
    let g = aggregate_to_submodels(&index, &flows, row, 0).unwrap();
    assert!(matches!(apply_selection(&g, &["NOPE"]), Err(Error::UnknownSubmodel(_))));
    assert!(apply_selection(&g, &[] as &[&str]).unwrap().nodes.is_empty());

    let overlapping = BTreeMap::from([
        ("G1".to_string(), vec!["SUB01".to_string(), "SUB02".to_string()]),
        ("G2".to_string(), vec!["SUB02".to_string()]),
    ]);
    let err = apply_grouping(&index, &flows, row, &overlapping, 0).unwrap_err();
    assert_eq!(err.code(), "overlapping_groups");
    assert!(apply_radiant_threshold(&g, -1.0).is_err());
}

#[test]
fn selection_keeps_whole_model_annotations() {
    let g = submodel_graph(&synthetic(&SyntheticSpec::new(5, 3, 1, 8)), 0).unwrap();
    let names: Vec<&str> = g.node_names().collect();
    for mask in 0u32..(1 << names.len()) {
        let sub: Vec<&str> = names
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, n)| *n)
            .collect();
        let s = apply_selection(&g, &sub).unwrap();
        let expected: Vec<_> = g.nodes.iter().filter(|n| sub.contains(&n.name.as_str())).cloned().collect();
        assert_eq!(s.nodes, expected);
        assert!(s.edges.iter().all(|e| sub.contains(&e.from.as_str()) && sub.contains(&e.to.as_str())));
    }
}
