//! Conditional-gradient engine over the product of path simplices.
//!
//! The objective is separable over edges: `sum_e g_e(phi_e)`. Its path-space
//! gradient is the sum of edge gradients along each path, so the linear
//! subproblem is a cheapest-path choice per commodity and type.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::costs::Jacobian;
use crate::equilibrium::{SolveOptions, StepRule, TraceRow, Variant};
use crate::game::{Block, Game};
use crate::generate::uniform;
use crate::network::FlowVector;

pub(crate) trait Objective {
    fn edge_value(&self, e: usize, phi: [f64; 2]) -> f64;
    fn edge_gradient(&self, e: usize, phi: [f64; 2]) -> [f64; 2];
    /// Constant Jacobian of `edge_gradient` when the edge term is quadratic.
    fn edge_hessian(&self, e: usize) -> Option<Jacobian>;
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub flows: FlowVector,
    pub value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
    /// Some step met non-positive curvature and fell back to an endpoint.
    pub hit_nonconvexity: bool,
}

struct State<'a, O: Objective> {
    game: &'a Game,
    obj: &'a O,
    flows: Vec<[f64; 2]>,
    phi: Vec<[f64; 2]>,
    hit_nonconvexity: bool,
}

pub(crate) fn minimize<O: Objective>(game: &Game, obj: &O, opts: &SolveOptions) -> Outcome {
    let blocks = game.blocks();
    let mut state = State {
        game,
        obj,
        flows: starting_point(game, &blocks, opts.seed),
        phi: Vec::new(),
        hit_nonconvexity: false,
    };

    let mut trace = Vec::new();
    let mut iter = 0;
    let (value, gap, converged) = loop {
        // Recompute edge flows from scratch so incremental updates cannot drift.
        state.refresh_phi();
        let grads = state.path_gradients();
        let value = state.value();
        let gap = duality_gap(&blocks, &state.flows, &grads);
        trace.push(TraceRow { iter, value, gap });
        if gap <= opts.gap_tol * value.abs().max(1.0) {
            break (value, gap, true);
        }
        if iter >= opts.max_iters {
            break (value, gap, false);
        }
        match (opts.variant, opts.step_rule) {
            (Variant::Pairwise, StepRule::ExactLineSearch) => {
                for b in &blocks {
                    state.pairwise_step(b);
                }
            }
            (_, rule) => state.classic_step(&blocks, &grads, rule, iter),
        }
        iter += 1;
    };

    Outcome {
        flows: FlowVector::from_vec(state.flows),
        value,
        gap,
        iterations: iter,
        converged,
        trace,
        hit_nonconvexity: state.hit_nonconvexity,
    }
}

/// Uniform random point of each block's simplex; deterministic in `seed`.
fn starting_point(game: &Game, blocks: &[Block], seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flows = alloc::vec![[0.0; 2]; game.num_paths()];
    for b in blocks {
        let n = b.paths.len();
        let mut cuts: Vec<f64> = (0..n - 1).map(|_| uniform(&mut rng, 0.0, 1.0)).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.push(1.0);
        let mut prev = 0.0;
        for (p, c) in b.paths.clone().zip(cuts) {
            flows[p][b.user_type.index()] = b.demand * (c - prev);
            prev = c;
        }
    }
    flows
}

fn best_path(b: &Block, grads: &[[f64; 2]]) -> usize {
    let t = b.user_type.index();
    // `min_by` keeps the first minimum, which is the lowest path id.
    b.paths
        .clone()
        .min_by(|&p, &q| grads[p][t].total_cmp(&grads[q][t]))
        .expect("blocks are non-empty")
}

fn duality_gap(blocks: &[Block], flows: &[[f64; 2]], grads: &[[f64; 2]]) -> f64 {
    blocks
        .iter()
        .map(|b| {
            let t = b.user_type.index();
            let min = grads[best_path(b, grads)][t];
            b.paths
                .clone()
                .map(|p| flows[p][t] * (grads[p][t] - min))
                .sum::<f64>()
        })
        .sum()
}

impl<O: Objective> State<'_, O> {
    fn refresh_phi(&mut self) {
        let phi = self
            .game
            .edge_flows(&FlowVector::from_vec(self.flows.clone()))
            .expect("flow vector sized to the path set");
        self.phi = phi.as_slice().to_vec();
    }

    fn value(&self) -> f64 {
        self.phi
            .iter()
            .enumerate()
            .map(|(e, &x)| self.obj.edge_value(e, x))
            .sum()
    }

    fn value_at(&self, phi: &[[f64; 2]]) -> f64 {
        phi.iter()
            .enumerate()
            .map(|(e, &x)| self.obj.edge_value(e, x))
            .sum()
    }

    fn path_gradients(&self) -> Vec<[f64; 2]> {
        let edge: Vec<[f64; 2]> = self
            .phi
            .iter()
            .enumerate()
            .map(|(e, &x)| self.obj.edge_gradient(e, x))
            .collect();
        self.game
            .paths()
            .paths()
            .iter()
            .map(|p| {
                p.edges.iter().fold([0.0; 2], |acc, e| {
                    [acc[0] + edge[e.0][0], acc[1] + edge[e.0][1]]
                })
            })
            .collect()
    }

    fn path_gradient(&self, p: usize, t: usize) -> f64 {
        self.game.paths().paths()[p]
            .edges
            .iter()
            .map(|e| self.obj.edge_gradient(e.0, self.phi[e.0])[t])
            .sum()
    }

    /// Moves mass of one type from the costliest used path to the cheapest path.
    fn pairwise_step(&mut self, b: &Block) {
        let t = b.user_type.index();
        let g: Vec<(usize, f64)> = b.paths.clone().map(|p| (p, self.path_gradient(p, t))).collect();
        let best = g
            .iter()
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .copied()
            .expect("blocks are non-empty");
        let Some(worst) = g
            .iter()
            .filter(|(p, _)| self.flows[*p][t] > 0.0)
            .fold(None::<(usize, f64)>, |acc, &(p, v)| match acc {
                Some((_, w)) if w >= v => acc,
                _ => Some((p, v)),
            })
        else {
            return;
        };
        if worst.0 == best.0 || worst.1 - best.1 <= 0.0 {
            return;
        }
        let max_step = self.flows[worst.0][t];
        let paths = self.game.paths().paths();
        // Per-edge change in this type's flow per unit step: +1, -1 or 0.
        let mut delta: Vec<(usize, f64)> = Vec::new();
        for e in &paths[best.0].edges {
            delta.push((e.0, 1.0));
        }
        for e in &paths[worst.0].edges {
            match delta.iter_mut().find(|(x, _)| *x == e.0) {
                Some(d) => d.1 -= 1.0,
                None => delta.push((e.0, -1.0)),
            }
        }
        delta.retain(|(_, d)| *d != 0.0);
        let slope = best.1 - worst.1;
        let direction = |d: f64| if t == 0 { [d, 0.0] } else { [0.0, d] };
        let step = self.line_search(
            &delta
                .iter()
                .map(|&(e, d)| (e, direction(d)))
                .collect::<Vec<_>>(),
            slope,
            max_step,
        );
        if step <= 0.0 {
            return;
        }
        self.flows[best.0][t] += step;
        self.flows[worst.0][t] = if step >= max_step {
            0.0
        } else {
            (self.flows[worst.0][t] - step).max(0.0)
        };
        for (e, d) in delta {
            self.phi[e][t] += step * d;
            if self.phi[e][t] < 0.0 {
                self.phi[e][t] = 0.0;
            }
        }
    }

    /// Step towards the all-or-nothing assignment on the cheapest paths.
    fn classic_step(&mut self, blocks: &[Block], grads: &[[f64; 2]], rule: StepRule, iter: usize) {
        let mut target = alloc::vec![[0.0; 2]; self.flows.len()];
        for b in blocks {
            target[best_path(b, grads)][b.user_type.index()] = b.demand;
        }
        let dir: Vec<[f64; 2]> = target
            .iter()
            .zip(&self.flows)
            .map(|(s, f)| [s[0] - f[0], s[1] - f[1]])
            .collect();
        let dphi = self
            .game
            .edge_flows(&FlowVector::from_vec(dir.clone()))
            .expect("flow vector sized to the path set");
        let delta: Vec<(usize, [f64; 2])> = dphi
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, d)| d[0] != 0.0 || d[1] != 0.0)
            .map(|(e, &d)| (e, d))
            .collect();
        let slope: f64 = dir
            .iter()
            .zip(grads)
            .map(|(d, g)| d[0] * g[0] + d[1] * g[1])
            .sum();
        let step = match rule {
            StepRule::Harmonic => 2.0 / (iter as f64 + 2.0),
            StepRule::ExactLineSearch => self.line_search(&delta, slope, 1.0),
        };
        if step <= 0.0 {
            return;
        }
        for (f, d) in self.flows.iter_mut().zip(&dir) {
            for t in 0..2 {
                f[t] = (f[t] + step * d[t]).max(0.0);
            }
        }
        if step >= 1.0 {
            self.flows.clone_from(&target);
        }
        self.refresh_phi();
    }

    /// Minimizes the objective along `phi + s * delta` for `s` in `[0, max_step]`,
    /// given the slope at `s = 0`.
    fn line_search(&mut self, delta: &[(usize, [f64; 2])], slope: f64, max_step: f64) -> f64 {
        if slope >= 0.0 || max_step <= 0.0 {
            return 0.0;
        }
        let hessians: Option<Vec<Jacobian>> =
            delta.iter().map(|&(e, _)| self.obj.edge_hessian(e)).collect();
        if let Some(h) = hessians {
            let curvature: f64 = delta
                .iter()
                .zip(&h)
                .map(|(&(_, d), h)| {
                    d[0] * (h[0][0] * d[0] + h[0][1] * d[1])
                        + d[1] * (h[1][0] * d[0] + h[1][1] * d[1])
                })
                .sum();
            if curvature > 0.0 {
                return (-slope / curvature).min(max_step);
            }
            self.hit_nonconvexity = true;
            // A concave or flat quadratic with negative slope keeps decreasing.
            return max_step;
        }
        let derivative = |s: f64| -> f64 {
            delta
                .iter()
                .map(|&(e, d)| {
                    let x = [self.phi[e][0] + s * d[0], self.phi[e][1] + s * d[1]];
                    let g = self.obj.edge_gradient(e, x);
                    g[0] * d[0] + g[1] * d[1]
                })
                .sum()
        };
        if derivative(max_step) <= 0.0 {
            return max_step;
        }
        let (mut lo, mut hi) = (0.0, max_step);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if derivative(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        // Bisection finds a stationary point; guard against a worse value.
        let mut moved = self.phi.clone();
        for &(e, d) in delta {
            moved[e][0] += s * d[0];
            moved[e][1] += s * d[1];
        }
        if self.value_at(&moved) > self.value() {
            self.hit_nonconvexity = true;
            return 0.0;
        }
        s
    }
}
