//! Nash equilibria as minimizers of the potential, their certificates, and an
//! exhaustive-search oracle for tiny instances.

use alloc::format;
use alloc::vec::Vec;

use crate::costs::Jacobian;
use crate::efficiency::is_psd;
use crate::error::{Error, Result};
use crate::frank_wolfe::{minimize, Objective};
use crate::game::Game;
use crate::network::{validate_feasible_with_tol, FlowVector, PathId, UserType, FEASIBILITY_TOL};
use crate::potential::{
    check_potential_exists, edge_potential, potential_value, Mode, SamplingPlan, SymmetryReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StepRule {
    ExactLineSearch,
    /// `2 / (t + 2)`; always uses the classic all-or-nothing direction.
    Harmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Variant {
    /// Shift mass from the costliest used path to the cheapest one, one
    /// commodity and type at a time. Converges linearly on these problems.
    Pairwise,
    /// Step towards the all-or-nothing assignment on cheapest paths.
    Classic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Stop once the duality gap is at most `gap_tol * max(1, |objective|)`.
    pub gap_tol: f64,
    pub step_rule: StepRule,
    pub variant: Variant,
    /// Seeds the random starting point; ties never depend on it.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 20_000,
            gap_tol: 1e-8,
            step_rule: StepRule::ExactLineSearch,
            variant: Variant::Pairwise,
            seed: 0,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.gap_tol.is_nan() || self.gap_tol <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "gap_tol",
                value: self.gap_tol,
            });
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iters",
                value: 0.0,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TraceRow {
    pub iter: usize,
    pub value: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CostRange {
    pub commodity: usize,
    pub user_type: UserType,
    /// `None` when this type has no used path in the commodity.
    pub min_used: Option<f64>,
    pub max_used: Option<f64>,
    pub min_any: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct NashViolation {
    pub commodity: usize,
    pub user_type: UserType,
    pub used_path: PathId,
    pub better_path: PathId,
    pub cost_gap: f64,
}

/// How far a flow vector is from a Nash equilibrium.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct NashCertificate {
    /// Largest amount any used path exceeds the cheapest path of its
    /// commodity and type. Zero exactly at an equilibrium.
    pub epsilon: f64,
    pub worst: Option<NashViolation>,
    pub ranges: Vec<CostRange>,
    /// Set when convexity of the potential could not be established, so the
    /// flows are only known to be stationary.
    pub stationary_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Convexity {
    Certified,
    StationaryOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub flows: FlowVector,
    pub certificate: NashCertificate,
    pub potential: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub convexity: Convexity,
    pub trace: Vec<TraceRow>,
    pub symmetry: SymmetryReport,
}

/// Default used-flow threshold: `1e-7` times the largest demand.
pub fn default_used_threshold(game: &Game) -> f64 {
    1e-7 * game.max_demand()
}

pub(crate) struct PotentialObjective<'a> {
    pub game: &'a Game,
}

impl Objective for PotentialObjective<'_> {
    fn edge_value(&self, e: usize, phi: [f64; 2]) -> f64 {
        edge_potential(&self.game.effective_costs()[e], phi)
    }

    fn edge_gradient(&self, e: usize, phi: [f64; 2]) -> [f64; 2] {
        self.game.effective_costs()[e].value(phi)
    }

    fn edge_hessian(&self, e: usize) -> Option<Jacobian> {
        self.game.effective_costs()[e].as_affine().map(|a| a.alpha)
    }
}

/// Convexity of the potential: every effective edge cost affine with a
/// positive semidefinite coefficient matrix.
pub(crate) fn potential_convexity(game: &Game) -> Convexity {
    let certified = game
        .effective_costs()
        .iter()
        .all(|c| c.as_affine().is_some_and(|a| is_psd(&a.alpha)));
    if certified {
        Convexity::Certified
    } else {
        Convexity::StationaryOnly
    }
}

pub(crate) fn check_routable(game: &Game) -> Result<()> {
    for (k, c) in game.commodities().iter().enumerate() {
        if c.has_demand() && game.paths().commodity_range(k).is_empty() {
            return Err(Error::Infeasible { commodity: k });
        }
    }
    Ok(())
}

/// Minimizes the potential by Frank–Wolfe and certifies the result.
pub fn solve_equilibrium(game: &Game, opts: &SolveOptions) -> Result<Equilibrium> {
    opts.validate()?;
    let symmetry = check_potential_exists(
        game,
        Mode::Pathwise,
        &SamplingPlan::default_for(game, opts.seed),
        None,
    );
    if !symmetry.verdict.admits_potential() {
        return Err(Error::NoPotential {
            max_residual: symmetry.max_abs_pair_residual.max(symmetry.max_abs_residual),
        });
    }
    check_routable(game)?;
    let outcome = minimize(game, &PotentialObjective { game }, opts);
    let mut convexity = potential_convexity(game);
    if outcome.hit_nonconvexity {
        convexity = Convexity::StationaryOnly;
    }
    let mut certificate = verify_nash(game, &outcome.flows, None)?;
    certificate.stationary_only = convexity == Convexity::StationaryOnly;
    Ok(Equilibrium {
        flows: outcome.flows,
        certificate,
        potential: outcome.value,
        gap: outcome.gap,
        iterations: outcome.iterations,
        converged: outcome.converged,
        convexity,
        trace: outcome.trace,
        symmetry,
    })
}

/// Measures how far `flows` is from an equilibrium of `game` (tolls included).
///
/// A path counts as used when its flow exceeds `used_flow_threshold`
/// (default [`default_used_threshold`]). Flows must be feasible to a relative
/// tolerance of `1e-9`; see [`verify_nash_with_tolerance`] for rounded data.
pub fn verify_nash(
    game: &Game,
    flows: &FlowVector,
    used_flow_threshold: Option<f64>,
) -> Result<NashCertificate> {
    verify_nash_with_tolerance(game, flows, used_flow_threshold, FEASIBILITY_TOL)
}

pub fn verify_nash_with_tolerance(
    game: &Game,
    flows: &FlowVector,
    used_flow_threshold: Option<f64>,
    feasibility_tol: f64,
) -> Result<NashCertificate> {
    let report = validate_feasible_with_tol(flows, game.commodities(), game.paths(), feasibility_tol);
    if !report.feasible {
        let neg = report.negatives.iter().fold(0.0_f64, |m, n| m.max(-n.flow));
        return Err(Error::InfeasibleFlows {
            max_residual: report.max_scaled_residual.max(neg),
        });
    }
    let threshold = used_flow_threshold.unwrap_or_else(|| default_used_threshold(game));
    let costs = game.path_costs(flows)?;
    Ok(certificate_from_costs(game, flows.as_slice(), &costs, threshold))
}

fn certificate_from_costs(
    game: &Game,
    flows: &[[f64; 2]],
    costs: &[[f64; 2]],
    threshold: f64,
) -> NashCertificate {
    let mut epsilon = 0.0;
    let mut worst: Option<NashViolation> = None;
    let mut ranges = Vec::new();
    for (k, c) in game.commodities().iter().enumerate() {
        let range = game.paths().commodity_range(k);
        if range.is_empty() {
            continue;
        }
        for t in UserType::ALL {
            let i = t.index();
            let cheapest = range
                .clone()
                .min_by(|&p, &q| costs[p][i].total_cmp(&costs[q][i]))
                .expect("range is non-empty");
            let min_any = costs[cheapest][i];
            let mut min_used: Option<f64> = None;
            let mut max_used: Option<(usize, f64)> = None;
            if c.demand_of(t) > 0.0 {
                for p in range.clone() {
                    let f = flows.get(p).map_or(0.0, |f| f[i]);
                    if f > threshold {
                        let cost = costs[p][i];
                        min_used = Some(min_used.map_or(cost, |m| m.min(cost)));
                        if max_used.is_none_or(|(_, m)| cost > m) {
                            max_used = Some((p, cost));
                        }
                    }
                }
            }
            if let Some((p, cost)) = max_used {
                let gap = (cost - min_any).max(0.0);
                if gap > epsilon {
                    epsilon = gap;
                    worst = Some(NashViolation {
                        commodity: k,
                        user_type: t,
                        used_path: PathId(p),
                        better_path: PathId(cheapest),
                        cost_gap: gap,
                    });
                }
            }
            ranges.push(CostRange {
                commodity: k,
                user_type: t,
                min_used,
                max_used: max_used.map(|(_, m)| m),
                min_any,
            });
        }
    }
    NashCertificate {
        epsilon,
        worst,
        ranges,
        stationary_only: false,
    }
}

/// Guard on the number of lattice points examined by the oracle.
pub const MAX_GRID_POINTS: u64 = 10_000_000;
/// Guard on the total number of paths the oracle accepts.
pub const MAX_ORACLE_PATHS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    /// The potential minimizer when the game has a potential, otherwise the
    /// point with the smallest epsilon.
    pub flows: FlowVector,
    pub certificate: NashCertificate,
    /// Potential at `flows`, when the game has one.
    pub potential: Option<f64>,
    pub epsilon_minimizer: FlowVector,
    pub epsilon_minimizer_certificate: NashCertificate,
    pub points: u64,
    /// For affine games, an upper bound on how far the best lattice value of
    /// the potential can sit above the continuous minimum.
    pub resolution_bound: Option<f64>,
    /// For affine games, a bound on how much any path cost can move when
    /// every path flow moves by one lattice step.
    pub epsilon_slack: Option<f64>,
}

/// Enumerates every lattice point with spacing `demand / grid_steps` on each
/// commodity/type simplex.
pub fn brute_force_equilibrium(game: &Game, grid_steps: u32) -> Result<BruteForce> {
    if grid_steps == 0 {
        return Err(Error::InvalidParameter {
            name: "grid_steps",
            value: 0.0,
        });
    }
    if game.num_paths() > MAX_ORACLE_PATHS {
        return Err(Error::TooLarge(format!(
            "{} paths (at most {MAX_ORACLE_PATHS})",
            game.num_paths()
        )));
    }
    check_routable(game)?;
    let blocks = game.blocks();
    let mut points: u64 = 1;
    for b in &blocks {
        points = points.saturating_mul(compositions(grid_steps as u64, b.paths.len() as u64));
        if points > MAX_GRID_POINTS {
            return Err(Error::TooLarge(format!(
                "more than {MAX_GRID_POINTS} lattice points"
            )));
        }
    }
    let has_potential = check_potential_exists(
        game,
        Mode::Pathwise,
        &SamplingPlan::default_for(game, 0),
        None,
    )
    .verdict
    .admits_potential();

    let mut counts: Vec<Vec<u32>> = blocks
        .iter()
        .map(|b| {
            let mut c = alloc::vec![0; b.paths.len()];
            c[0] = grid_steps;
            c
        })
        .collect();
    let mut flows = alloc::vec![[0.0; 2]; game.num_paths()];
    let mut best_v: Option<(f64, Vec<[f64; 2]>)> = None;
    let mut best_eps: Option<(f64, Vec<[f64; 2]>)> = None;
    let threshold = default_used_threshold(game);
    loop {
        for (b, c) in blocks.iter().zip(&counts) {
            let h = b.demand / grid_steps as f64;
            for (p, &n) in b.paths.clone().zip(c) {
                flows[p][b.user_type.index()] = h * n as f64;
            }
        }
        let fv = FlowVector::from_vec(flows.clone());
        if has_potential {
            let v = potential_value(game, &fv)?;
            if better(v, &flows, &best_v) {
                best_v = Some((v, flows.clone()));
            }
        }
        let costs = game.path_costs(&fv)?;
        let eps = certificate_from_costs(game, &flows, &costs, threshold).epsilon;
        if better(eps, &flows, &best_eps) {
            best_eps = Some((eps, flows.clone()));
        }
        if !advance(&mut counts) {
            break;
        }
    }

    let (_, eps_flows) = best_eps.expect("at least one lattice point");
    let eps_flows = FlowVector::from_vec(eps_flows);
    let eps_cert = verify_nash_with_tolerance(game, &eps_flows, None, 1e-6)?;
    let (flows, certificate, potential) = match best_v {
        Some((v, f)) => {
            let f = FlowVector::from_vec(f);
            let cert = verify_nash_with_tolerance(game, &f, None, 1e-6)?;
            (f, cert, Some(v))
        }
        None => (eps_flows.clone(), eps_cert.clone(), None),
    };
    let (resolution_bound, epsilon_slack) = lattice_bounds(game, grid_steps);
    Ok(BruteForce {
        flows,
        certificate,
        potential,
        epsilon_minimizer: eps_flows,
        epsilon_minimizer_certificate: eps_cert,
        points,
        resolution_bound,
        epsilon_slack,
    })
}

/// Lower value wins; exact ties go to the lexicographically smaller vector.
fn better(value: f64, flows: &[[f64; 2]], best: &Option<(f64, Vec<[f64; 2]>)>) -> bool {
    match best {
        None => true,
        Some((v, f)) => {
            value < *v
                || (value == *v
                    && flows
                        .iter()
                        .flatten()
                        .partial_cmp(f.iter().flatten())
                        .is_some_and(|o| o.is_lt()))
        }
    }
}

/// Number of ways to split `n` units over `k` slots.
fn compositions(n: u64, k: u64) -> u64 {
    // C(n + k - 1, k - 1), computed incrementally so intermediate values stay exact.
    let r = k.saturating_sub(1);
    let mut out: u64 = 1;
    for i in 0..r {
        out = out.saturating_mul(n + i + 1) / (i + 1);
    }
    out
}

/// Next composition of every block, odometer style. False once exhausted.
fn advance(counts: &mut [Vec<u32>]) -> bool {
    for c in counts.iter_mut() {
        if next_composition(c) {
            return true;
        }
        // Wrap this block back to its first composition and carry.
        let total: u32 = c.iter().sum();
        c.iter_mut().for_each(|x| *x = 0);
        c[0] = total;
    }
    false
}

fn next_composition(c: &mut [u32]) -> bool {
    let n = c.len();
    if n < 2 {
        return false;
    }
    // Find the last nonzero entry before the final slot, move one unit right,
    // and gather everything after it into the slot just right of it.
    let Some(i) = (0..n - 1).rev().find(|&i| c[i] > 0) else {
        return false;
    };
    let tail: u32 = c[i + 1..].iter().sum();
    c[i] -= 1;
    c[i + 1..].iter_mut().for_each(|x| *x = 0);
    c[i + 1] = tail + 1;
    true
}

fn lattice_bounds(game: &Game, grid_steps: u32) -> (Option<f64>, Option<f64>) {
    let costs = game.effective_costs();
    let Some(alphas) = costs
        .iter()
        .map(|c| c.as_affine().map(|a| a.alpha))
        .collect::<Option<Vec<_>>>()
    else {
        return (None, None);
    };
    // Largest per-type change of each edge flow when every path flow moves
    // by at most one lattice step.
    let mut reach = alloc::vec![[0.0; 2]; costs.len()];
    for b in game.blocks() {
        let h = b.demand / grid_steps as f64;
        for p in b.paths.clone() {
            for e in &game.paths().paths()[p].edges {
                reach[e.0][b.user_type.index()] += h;
            }
        }
    }
    let mut bound = 0.0;
    for (a, m) in alphas.iter().zip(&reach) {
        // Hessian of the edge potential.
        let h = [[a[0][0], a[1][0]], [a[1][0], a[1][1]]];
        for i in 0..2 {
            for j in 0..2 {
                bound += 0.5 * h[i][j].abs() * m[i] * m[j];
            }
        }
    }
    let mut slack: f64 = 0.0;
    for p in game.paths().paths() {
        for t in 0..2 {
            let moved: f64 = p
                .edges
                .iter()
                .map(|e| {
                    let a = alphas[e.0];
                    a[t][0].abs() * reach[e.0][0] + a[t][1].abs() * reach[e.0][1]
                })
                .sum();
            slack = slack.max(2.0 * moved);
        }
    }
    (Some(bound), Some(slack))
}
