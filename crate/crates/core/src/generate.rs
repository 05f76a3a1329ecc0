//! Seeded random instances for tests, benchmarks and the command line.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::costs::{AffineEdgeCost, EdgeCostFunction};
use crate::game::Game;
use crate::network::{Commodity, EdgeId, FlowVector, Graph, VertexId};

/// Uniform draw from `[lo, hi)` using the top 53 bits of one `u64`.
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    lo + (hi - lo) * unit
}

/// Uniform index in `0..n`; `n` must be positive.
pub fn uniform_index<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> usize {
    // Modulo bias is below 2^-40 for the sizes used here.
    (rng.next_u64() % n as u64) as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrossTerms {
    /// Equal cross coefficients, not necessarily semidefinite.
    Symmetric,
    /// Equal cross coefficients with a semidefinite matrix.
    SymmetricPsd,
    /// Each edge is asymmetric with the given probability, otherwise
    /// symmetric and semidefinite.
    Mixed(f64),
}

/// Random affine cost with nonnegative coefficients.
pub fn random_affine_cost<R: RngCore + ?Sized>(rng: &mut R, cross: CrossTerms) -> AffineEdgeCost {
    let a11 = uniform(rng, 0.1, 3.0);
    let a22 = uniform(rng, 0.1, 3.0);
    let beta = [uniform(rng, 0.0, 5.0), uniform(rng, 0.0, 5.0)];
    // cross <= min(a11, a22) keeps a11 a22 >= cross^2.
    let psd_cross = |rng: &mut R| uniform(rng, 0.0, 1.0) * a11.min(a22);
    let (a12, a21) = match cross {
        CrossTerms::Symmetric => {
            let c = uniform(rng, 0.0, 2.0 * a11.max(a22));
            (c, c)
        }
        CrossTerms::SymmetricPsd => {
            let c = psd_cross(rng);
            (c, c)
        }
        CrossTerms::Mixed(p) => {
            if uniform(rng, 0.0, 1.0) < p {
                (uniform(rng, 0.0, 1.5), uniform(rng, 0.0, 1.5))
            } else {
                let c = psd_cross(rng);
                (c, c)
            }
        }
    };
    AffineEdgeCost::unchecked([[a11, a12], [a21, a22]], beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameShape {
    /// Vertex count is drawn from `2..=max_nodes`.
    pub max_nodes: usize,
    /// Commodity count is drawn from `1..=max_commodities`.
    pub max_commodities: usize,
    pub edge_probability: f64,
    pub cross: CrossTerms,
    /// Demands are drawn from `[0, max_demand)` per type.
    pub max_demand: f64,
    /// Instances with more paths in total are redrawn.
    pub max_paths: usize,
}

impl Default for GameShape {
    fn default() -> Self {
        GameShape {
            max_nodes: 5,
            max_commodities: 2,
            edge_probability: 0.4,
            cross: CrossTerms::SymmetricPsd,
            max_demand: 5.0,
            max_paths: 64,
        }
    }
}

/// Random affine game. Every commodity has at least one path: when the
/// sampled graph has none, a direct edge is added.
pub fn random_game<R: RngCore + ?Sized>(rng: &mut R, shape: &GameShape) -> Game {
    loop {
        if let Some(g) = try_random_game(rng, shape) {
            return g;
        }
    }
}

fn try_random_game<R: RngCore + ?Sized>(rng: &mut R, shape: &GameShape) -> Option<Game> {
    let n = 2 + uniform_index(rng, shape.max_nodes.max(2) - 1);
    let mut arcs: Vec<(u32, u32)> = Vec::new();
    for i in 0..n as u32 {
        for j in 0..n as u32 {
            if i != j && uniform(rng, 0.0, 1.0) < shape.edge_probability {
                arcs.push((i, j));
            }
        }
    }
    let k = 1 + uniform_index(rng, shape.max_commodities.max(1));
    let mut commodities = Vec::with_capacity(k);
    for _ in 0..k {
        let s = uniform_index(rng, n) as u32;
        let t = (s + 1 + uniform_index(rng, n - 1) as u32) % n as u32;
        let demand = [
            uniform(rng, 0.0, shape.max_demand),
            uniform(rng, 0.0, shape.max_demand),
        ];
        commodities.push(Commodity::new(VertexId(s), VertexId(t), demand));
        if !reachable(n, &arcs, s, t) {
            arcs.push((s, t));
        }
    }
    let vertices: Vec<VertexId> = (0..n as u32).map(VertexId).collect();
    let edges: Vec<(EdgeId, VertexId, VertexId)> = arcs
        .iter()
        .enumerate()
        .map(|(e, &(a, b))| (EdgeId(e), VertexId(a), VertexId(b)))
        .collect();
    let graph = Graph::new(vertices, edges).ok()?;
    let costs: Vec<EdgeCostFunction> = arcs
        .iter()
        .map(|_| random_affine_cost(rng, shape.cross).into())
        .collect();
    let game = Game::new(graph, commodities, costs).ok()?;
    (game.num_paths() <= shape.max_paths).then_some(game)
}

fn reachable(n: usize, arcs: &[(u32, u32)], s: u32, t: u32) -> bool {
    let mut seen = alloc::vec![false; n];
    let mut stack = alloc::vec![s];
    seen[s as usize] = true;
    while let Some(v) = stack.pop() {
        if v == t {
            return true;
        }
        for &(a, b) in arcs {
            if a == v && !seen[b as usize] {
                seen[b as usize] = true;
                stack.push(b);
            }
        }
    }
    false
}

/// Uniformly random feasible flows (each commodity/type split by sorted uniforms).
pub fn random_feasible_flows<R: RngCore + ?Sized>(rng: &mut R, game: &Game) -> FlowVector {
    let mut flows = alloc::vec![[0.0; 2]; game.num_paths()];
    for b in game.blocks() {
        let mut cuts: Vec<f64> = (1..b.paths.len()).map(|_| uniform(rng, 0.0, 1.0)).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.push(1.0);
        let mut prev = 0.0;
        for (p, c) in b.paths.clone().zip(cuts) {
            flows[p][b.user_type.index()] = b.demand * (c - prev);
            prev = c;
        }
    }
    FlowVector::from_vec(flows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    #[test]
    fn uniform_stays_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = uniform(&mut rng, -2.0, 3.0);
            assert!((-2.0..3.0).contains(&x));
        }
    }

    #[test]
    fn random_games_are_routable_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let shape = GameShape {
            max_paths: 12,
            ..GameShape::default()
        };
        for _ in 0..50 {
            let g = random_game(&mut rng, &shape);
            assert!(g.num_paths() <= 12);
            for k in 0..g.commodities().len() {
                assert!(!g.paths().commodity_range(k).is_empty());
            }
        }
    }
}
