//! Potential existence and the potential function itself.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::costs::{cost_jacobian, EdgeCostFunction};
use crate::error::Result;
use crate::game::Game;
use crate::generate::uniform;
use crate::network::{EdgeId, FlowVector, PathId, UserType};
use crate::quadrature::integrate;

/// Path pairs beyond this count are not examined; the report is marked truncated.
pub const MAX_PATH_PAIRS: usize = 1_000_000;

/// Relative accuracy of the quadrature used for non-affine edges.
pub const QUADRATURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Mode {
    Edgewise,
    Pathwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    EdgewiseSymmetric,
    PathwiseSymmetric,
    Asymmetric,
}

impl Verdict {
    pub fn admits_potential(self) -> bool {
        self != Verdict::Asymmetric
    }
}

/// Flow points `(phi1, phi2)` at which non-affine residuals are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub points: Vec<[f64; 2]>,
}

impl SamplingPlan {
    /// A `n x n` grid over `[0, max]^2` followed by `random` uniform points.
    pub fn new(max: f64, n: usize, random: usize, seed: u64) -> Self {
        let mut points = Vec::with_capacity(n * n + random);
        let steps = n.saturating_sub(1).max(1) as f64;
        for i in 0..n {
            for j in 0..n {
                points.push([max * i as f64 / steps, max * j as f64 / steps]);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..random {
            points.push([uniform(&mut rng, 0.0, max), uniform(&mut rng, 0.0, max)]);
        }
        SamplingPlan { points }
    }

    /// 5x5 grid plus 20 random points over `[0, total demand]^2`.
    pub fn default_for(game: &Game, seed: u64) -> Self {
        Self::new(game.total_demand().max(1.0), 5, 20, seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EdgeResidual {
    pub edge: EdgeId,
    /// One value for affine edges (the residual is constant), one per sample otherwise.
    pub samples: Vec<f64>,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PathPairResidual {
    pub first: PathId,
    pub second: PathId,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SymmetryReport {
    pub mode: Mode,
    pub verdict: Verdict,
    /// True when every effective cost is affine and nothing was sampled.
    pub symbolic: bool,
    pub tol: f64,
    /// Largest edge residual.
    pub max_abs_residual: f64,
    /// Largest path-pair residual (pathwise mode only).
    pub max_abs_pair_residual: f64,
    pub edges: Vec<EdgeResidual>,
    /// Path pairs whose residual exceeds the tolerance, at most 100 of them.
    pub violating_pairs: Vec<PathPairResidual>,
    pub pairs_checked: usize,
    pub truncated: bool,
}

const MAX_LISTED_PAIRS: usize = 100;

/// `dl2/dphi1 - dl1/dphi2` at `phi`.
pub fn symmetry_residual(f: &EdgeCostFunction, phi: [f64; 2]) -> f64 {
    if let Some(a) = f.as_affine() {
        return a.asymmetry();
    }
    let j = cost_jacobian(f, phi, None);
    j[1][0] - j[0][1]
}

/// Decides whether the game (with its tolls) admits a potential.
///
/// Affine costs are decided from their coefficients. Other costs are sampled
/// on `plan`, so a symmetric verdict for them is a numerical judgement.
/// `tol` defaults to `1e-8 * (1 + max |J|)` over everything evaluated.
pub fn check_potential_exists(
    game: &Game,
    mode: Mode,
    plan: &SamplingPlan,
    tol: Option<f64>,
) -> SymmetryReport {
    let costs = game.effective_costs();
    let symbolic = game.is_affine();
    let mut max_jac: f64 = 0.0;
    let mut edges = Vec::with_capacity(costs.len());
    for (e, f) in costs.iter().enumerate() {
        let samples: Vec<f64> = match f.as_affine() {
            Some(a) => {
                max_jac = a.alpha.iter().flatten().fold(max_jac, |m, x| m.max(x.abs()));
                alloc::vec![a.asymmetry()]
            }
            None => plan
                .points
                .iter()
                .map(|&x| {
                    let j = cost_jacobian(f, x, None);
                    max_jac = j.iter().flatten().fold(max_jac, |m, v| m.max(v.abs()));
                    j[1][0] - j[0][1]
                })
                .collect(),
        };
        let max_abs = samples.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        edges.push(EdgeResidual {
            edge: EdgeId(e),
            samples,
            max_abs,
        });
    }
    let tol = tol.unwrap_or(1e-8 * (1.0 + max_jac));
    let max_abs_residual = edges.iter().fold(0.0_f64, |m, r| m.max(r.max_abs));

    let mut report = SymmetryReport {
        mode,
        verdict: Verdict::Asymmetric,
        symbolic,
        tol,
        max_abs_residual,
        max_abs_pair_residual: 0.0,
        edges,
        violating_pairs: Vec::new(),
        pairs_checked: 0,
        truncated: false,
    };
    if max_abs_residual <= tol {
        report.verdict = Verdict::EdgewiseSymmetric;
        return report;
    }
    if mode == Mode::Edgewise {
        return report;
    }

    // Only asymmetric edges can contribute to a pair sum.
    let paths = game.paths().paths();
    let sample_count = if symbolic { 1 } else { plan.points.len() };
    let asym: Vec<&EdgeResidual> = report.edges.iter().filter(|r| r.max_abs > 0.0).collect();
    let mut sums = alloc::vec![0.0; sample_count];
    'outer: for p in 0..paths.len() {
        for q in p..paths.len() {
            if report.pairs_checked >= MAX_PATH_PAIRS {
                report.truncated = true;
                break 'outer;
            }
            report.pairs_checked += 1;
            sums.iter_mut().for_each(|s| *s = 0.0);
            for r in &asym {
                if paths[p].contains(r.edge) && paths[q].contains(r.edge) {
                    for (k, s) in sums.iter_mut().enumerate() {
                        // Affine edges hold a single constant sample.
                        *s += r.samples[k.min(r.samples.len() - 1)];
                    }
                }
            }
            let worst = sums.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
            report.max_abs_pair_residual = report.max_abs_pair_residual.max(worst);
            if worst > tol && report.violating_pairs.len() < MAX_LISTED_PAIRS {
                report.violating_pairs.push(PathPairResidual {
                    first: PathId(p),
                    second: PathId(q),
                    max_abs: worst,
                });
            }
        }
    }
    if report.max_abs_pair_residual <= tol {
        report.verdict = Verdict::PathwiseSymmetric;
    }
    report
}

/// Potential of a single edge at flow `phi`.
///
/// Affine costs use the closed form. Otherwise the value is
/// `int_0^phi1 l1(u, 0) du + int_0^phi2 l2(phi1, u) du`, which equals the
/// three-integral form once the inner double integral is carried out.
pub fn edge_potential(f: &EdgeCostFunction, phi: [f64; 2]) -> f64 {
    let [x, y] = phi;
    match f.as_affine() {
        Some(a) => {
            let al = &a.alpha;
            0.5 * al[0][0] * x * x
                + (al[0][1] * y + a.beta[0]) * x
                + 0.5 * al[1][1] * y * y
                + (al[1][0] * x + a.beta[1]) * y
                - al[0][1] * x * y
        }
        None => {
            integrate(|u| f.value([u, 0.0])[0], 0.0, x, QUADRATURE_TOL)
                + integrate(|u| f.value([x, u])[1], 0.0, y, QUADRATURE_TOL)
        }
    }
}

/// Potential `V` of the game (effective costs) at `flows`.
pub fn potential_value(game: &Game, flows: &FlowVector) -> Result<f64> {
    let phi = game.edge_flows(flows)?;
    Ok(game
        .effective_costs()
        .iter()
        .zip(phi.as_slice())
        .map(|(f, &x)| edge_potential(f, x))
        .sum())
}

/// Gradient of `V` in path space, which is the vector of effective path costs.
pub fn potential_gradient(game: &Game, flows: &FlowVector) -> Result<Vec<[f64; 2]>> {
    game.path_costs(flows)
}

/// Finite-difference gradient of [`potential_value`], for auditing
/// [`potential_gradient`]. Central differences with relative step `step`,
/// forward differences on entries closer to zero than the step.
pub fn potential_gradient_audit(
    game: &Game,
    flows: &FlowVector,
    step: f64,
) -> Result<Vec<[f64; 2]>> {
    game.check_flow_len(flows)?;
    let mut f = flows.clone();
    if f.len() < game.num_paths() {
        let mut padded = f.into_inner();
        padded.resize(game.num_paths(), [0.0; 2]);
        f = FlowVector::from_vec(padded);
    }
    let mut out = alloc::vec![[0.0; 2]; game.num_paths()];
    for (p, row) in out.iter_mut().enumerate() {
        for t in UserType::ALL {
            let id = PathId(p);
            let base = f.get(id, t);
            let h = step * base.abs().max(1.0);
            let mut eval = |x: f64| -> Result<f64> {
                f.set(id, t, x);
                potential_value(game, &f)
            };
            let d = if base >= h {
                (eval(base + h)? - eval(base - h)?) / (2.0 * h)
            } else {
                let (v0, v1, v2) = (eval(base)?, eval(base + h)?, eval(base + 2.0 * h)?);
                (-3.0 * v0 + 4.0 * v1 - v2) / (2.0 * h)
            };
            f.set(id, t, base);
            row[t.index()] = d;
        }
    }
    Ok(out)
}
