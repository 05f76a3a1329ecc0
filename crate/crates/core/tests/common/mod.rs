#![allow(dead_code)]

use hetroute_core::costs::AffineEdgeCost;
use hetroute_core::{Commodity, EdgeCostFunction, EdgeId, Game, Graph, PathSet, VertexId};

/// (tail, head) of edges e0..e11 of the six-route example network.
pub const FIG1_EDGES: [(u32, u32); 12] = [
    (3, 8),
    (0, 1),
    (0, 4),
    (5, 1),
    (4, 5),
    (6, 1),
    (5, 3),
    (4, 6),
    (6, 3),
    (2, 4),
    (2, 3),
    (7, 2),
];

pub const FIG1_PATHS: [[&[usize]; 3]; 3] = [
    [&[1], &[2, 4, 3], &[2, 7, 5]],
    [&[10], &[9, 7, 8], &[9, 4, 6]],
    [&[11, 10, 0], &[11, 9, 7, 8, 0], &[11, 9, 4, 6, 0]],
];

const A_CC: [f64; 12] = [1.0, 2.0, 3.0, 1.0, 4.0, 0.5, 1.0, 1.0, 2.0, 1.0, 4.0, 1.0];
const A_CT: [f64; 12] = [0.6, 0.4, 0.1, 0.1, 0.5, 0.1, 0.7, 0.1, 0.1, 0.2, 0.1, 0.3];
const A_TT: [f64; 12] = [2.0, 3.0, 1.0, 0.8, 1.0, 1.0, 1.5, 3.0, 1.7, 3.0, 1.0, 1.3];
const B_C: [f64; 12] = [2.0, 2.0, 4.5, 2.0, 2.0, 4.5, 2.0, 2.0, 4.5, 2.0, 2.0, 4.5];
const B_T: [f64; 12] = [4.0, 4.0, 1.5, 4.0, 4.0, 1.5, 4.0, 4.0, 1.5, 4.0, 4.0, 1.5];

pub fn fig1_costs() -> Vec<EdgeCostFunction> {
    (0..12)
        .map(|e| {
            AffineEdgeCost::symmetric(A_CC[e], A_CT[e], A_TT[e], [B_C[e], B_T[e]])
                .unwrap()
                .into()
        })
        .collect()
}

pub fn fig1_game() -> Game {
    let graph = Graph::new(
        (0..9).map(VertexId),
        FIG1_EDGES
            .iter()
            .enumerate()
            .map(|(e, &(a, b))| (EdgeId(e), VertexId(a), VertexId(b))),
    )
    .unwrap();
    let commodities = vec![
        Commodity::new(VertexId(0), VertexId(1), [5.0, 1.0]),
        Commodity::new(VertexId(2), VertexId(3), [3.0, 3.0]),
        Commodity::new(VertexId(7), VertexId(8), [2.0, 4.0]),
    ];
    let paths = PathSet::from_lists(
        FIG1_PATHS
            .iter()
            .map(|k| k.iter().map(|p| p.iter().map(|&e| EdgeId(e)).collect()).collect())
            .collect(),
    );
    Game::with_paths(graph, commodities, fig1_costs(), paths).unwrap()
}

/// Published equilibrium rows keyed by edge sequence:
/// (edges, car flow, truck flow, car cost, truck cost).
pub const TABLE2: [(&[usize], f64, f64, f64, f64); 9] = [
    (&[1], 4.97, 0.79, 12.26, 8.35),
    (&[2, 4, 3], 0.0, 0.0, 13.18, 10.29),
    (&[2, 7, 5], 0.03, 0.21, 12.26, 8.35),
    (&[9, 7, 8], 1.04, 0.06, 13.92, 11.22),
    (&[9, 4, 6], 0.04, 0.0, 13.92, 13.98),
    (&[10], 1.92, 2.94, 13.92, 11.22),
    (&[11, 9, 7, 8, 0], 0.01, 0.0, 28.02, 31.73),
    (&[11, 9, 4, 6, 0], 1.10, 0.0, 28.02, 34.48),
    (&[11, 10, 0], 0.88, 4.00, 28.02, 31.72),
];

/// Index of the path with exactly this edge sequence.
pub fn path_index(game: &Game, edges: &[usize]) -> usize {
    game.paths()
        .paths()
        .iter()
        .position(|p| p.edges.iter().map(|e| e.0).eq(edges.iter().copied()))
        .expect("path present")
}
