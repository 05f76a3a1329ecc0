use std::collections::BTreeSet;

use hetroute_core::network::{edge_flows, enumerate_paths};
use hetroute_core::{Commodity, EdgeId, FlowVector, Graph, PathSet, VertexId};
use proptest::prelude::*;

fn graph_strategy() -> impl Strategy<Value = (usize, Vec<(u32, u32)>)> {
    (2usize..6).prop_flat_map(|n| {
        let arc = (0..n as u32, 0..n as u32);
        (Just(n), prop::collection::vec(arc, 0..12))
    })
}

fn build(n: usize, arcs: &[(u32, u32)]) -> Graph {
    Graph::new(
        (0..n as u32).map(VertexId),
        arcs.iter()
            .enumerate()
            .map(|(e, &(a, b))| (EdgeId(e), VertexId(a), VertexId(b))),
    )
    .unwrap()
}

/// Every edge sequence of length < n, kept when it is a simple s-t path.
fn brute_force_paths(n: usize, arcs: &[(u32, u32)], s: u32, t: u32) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for seq in &frontier {
            for e in 0..arcs.len() {
                let mut cand = seq.clone();
                cand.push(e);
                next.push(cand);
            }
        }
        for seq in &next {
            let contiguous = seq.windows(2).all(|w| arcs[w[0]].1 == arcs[w[1]].0);
            if !contiguous || arcs[seq[0]].0 != s {
                continue;
            }
            let mut visited = vec![s];
            visited.extend(seq.iter().map(|&e| arcs[e].1));
            let distinct = visited.iter().collect::<BTreeSet<_>>().len() == visited.len();
            if distinct && *visited.last().unwrap() == t {
                out.insert(seq.clone());
            }
        }
        frontier = next;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_matches_brute_force((n, arcs) in graph_strategy(), s in 0u32..6, t in 0u32..6) {
        let (s, t) = (s % n as u32, t % n as u32);
        prop_assume!(s != t);
        let graph = build(n, &arcs);
        let c = Commodity::new(VertexId(s), VertexId(t), [0.0, 0.0]);
        let found: Vec<Vec<usize>> = enumerate_paths(&graph, &c, None)
            .unwrap()
            .into_iter()
            .map(|p| p.into_iter().map(|e| e.0).collect())
            .collect();
        let unique: BTreeSet<_> = found.iter().cloned().collect();
        prop_assert_eq!(unique.len(), found.len());
        prop_assert_eq!(unique, brute_force_paths(n, &arcs, s, t));
    }

    #[test]
    fn edge_flows_are_linear(
        a in prop::collection::vec((0.0f64..5.0, 0.0f64..5.0), 4),
        b in prop::collection::vec((0.0f64..5.0, 0.0f64..5.0), 4),
        x in 0.0f64..3.0,
        y in 0.0f64..3.0,
    ) {
        let (graph, paths) = diamond();
        let fa = FlowVector::from_vec(a.iter().map(|&(p, q)| [p, q]).collect());
        let fb = FlowVector::from_vec(b.iter().map(|&(p, q)| [p, q]).collect());
        let combined = edge_flows(&fa.combine(x, &fb, y), &paths, graph.num_edges()).unwrap();
        let ea = edge_flows(&fa, &paths, graph.num_edges()).unwrap();
        let eb = edge_flows(&fb, &paths, graph.num_edges()).unwrap();
        for e in 0..graph.num_edges() {
            for t in 0..2 {
                let want = x * ea.as_slice()[e][t] + y * eb.as_slice()[e][t];
                prop_assert!((combined.as_slice()[e][t] - want).abs() <= 1e-12 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn edge_flows_ignore_path_order(flows in prop::collection::vec((0.0f64..5.0, 0.0f64..5.0), 4)) {
        let (graph, paths) = diamond();
        let lists: Vec<Vec<Vec<EdgeId>>> = vec![paths.paths().iter().map(|p| p.edges.clone()).collect()];
        let mut reversed = lists.clone();
        reversed[0].reverse();
        let reversed_paths = PathSet::from_lists(reversed);
        let f: Vec<[f64; 2]> = flows.iter().map(|&(p, q)| [p, q]).collect();
        let mut g = f.clone();
        g.reverse();
        let e1 = edge_flows(&FlowVector::from_vec(f), &paths, graph.num_edges()).unwrap();
        let e2 = edge_flows(&FlowVector::from_vec(g), &reversed_paths, graph.num_edges()).unwrap();
        for (x, y) in e1.as_slice().iter().zip(e2.as_slice()) {
            for t in 0..2 {
                prop_assert!((x[t] - y[t]).abs() <= 1e-12 * (1.0 + x[t].abs()));
            }
        }
    }
}

/// Two stacked diamonds: four paths from 0 to 4 that share edges pairwise.
fn diamond() -> (Graph, PathSet) {
    let arcs = [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 4)];
    let graph = build(5, &arcs);
    let c = Commodity::new(VertexId(0), VertexId(4), [1.0, 1.0]);
    let paths = PathSet::enumerate(&graph, &[c], None).unwrap();
    assert_eq!(paths.len(), 4);
    (graph, paths)
}

#[test]
fn parallel_edges_give_distinct_paths() {
    let (_, paths) = diamond();
    let distinct: BTreeSet<Vec<EdgeId>> = paths.paths().iter().map(|p| p.edges.clone()).collect();
    assert_eq!(distinct.len(), 4);
}
