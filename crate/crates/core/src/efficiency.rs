//! Social cost, the social optimum and the price of anarchy.

use alloc::vec::Vec;

use crate::costs::{cost_jacobian, Jacobian};
use crate::equilibrium::{
    check_routable, solve_equilibrium, Convexity, Equilibrium, SolveOptions, TraceRow,
};
use crate::error::{Error, Result};
use crate::frank_wolfe::{minimize, Objective};
use crate::game::Game;
use crate::network::{EdgeFlows, EdgeId, FlowVector};
use crate::potential::{check_potential_exists, Mode, SamplingPlan};

/// Relative tolerance of the cross-coefficient equality test.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Tolerance on diagonal entries and determinant in the semidefiniteness test.
pub const PSD_TOL: f64 = 1e-12;
/// Slack allowed above the affine bound before it is reported as violated.
pub const BOUND_SLACK: f64 = 1e-6;
/// Both costs below this make the ratio `0/0`, which is defined as 1.
pub const ZERO_COST: f64 = 1e-12;

/// Positive semidefiniteness of the symmetric part of `a`.
///
/// For a 2x2 symmetric matrix this is nonnegative diagonal and nonnegative
/// determinant; for symmetric `a` the determinant is `a11 a22 - a21 a12`.
pub fn is_psd(a: &Jacobian) -> bool {
    let off = 0.5 * (a[0][1] + a[1][0]);
    let scale = a.iter().flatten().fold(1.0_f64, |m, x| m.max(x.abs()));
    a[0][0] >= -PSD_TOL * scale
        && a[1][1] >= -PSD_TOL * scale
        && a[0][0] * a[1][1] - off * off >= -PSD_TOL * scale * scale
}

fn edge_social_cost(values: [f64; 2], phi: [f64; 2]) -> f64 {
    phi[0] * values[0] + phi[1] * values[1]
}

/// Total cost `sum_e sum_theta phi * l` at edge flows `phi`.
pub fn social_cost_at(game: &Game, phi: &EdgeFlows, include_tolls: bool) -> f64 {
    let costs = if include_tolls {
        game.effective_costs()
    } else {
        game.costs()
    };
    costs
        .iter()
        .zip(phi.as_slice())
        .map(|(c, &x)| edge_social_cost(c.value(x), x))
        .sum()
}

/// Total cost of `flows`. Tolls are transfers, so they are left out unless
/// `include_tolls` is set.
pub fn social_cost(game: &Game, flows: &FlowVector, include_tolls: bool) -> Result<f64> {
    Ok(social_cost_at(game, &game.edge_flows(flows)?, include_tolls))
}

struct SocialObjective<'a> {
    game: &'a Game,
    include_tolls: bool,
}

impl SocialObjective<'_> {
    fn cost(&self, e: usize) -> &crate::costs::EdgeCostFunction {
        if self.include_tolls {
            &self.game.effective_costs()[e]
        } else {
            &self.game.costs()[e]
        }
    }
}

impl Objective for SocialObjective<'_> {
    fn edge_value(&self, e: usize, phi: [f64; 2]) -> f64 {
        edge_social_cost(self.cost(e).value(phi), phi)
    }

    /// Marginal cost: `l_i + sum_j phi_j dl_j/dphi_i`.
    fn edge_gradient(&self, e: usize, phi: [f64; 2]) -> [f64; 2] {
        let f = self.cost(e);
        let l = f.value(phi);
        let j = cost_jacobian(f, phi, None);
        [
            l[0] + phi[0] * j[0][0] + phi[1] * j[1][0],
            l[1] + phi[0] * j[0][1] + phi[1] * j[1][1],
        ]
    }

    fn edge_hessian(&self, e: usize) -> Option<Jacobian> {
        self.cost(e).as_affine().map(|a| {
            let m = a.alpha;
            [
                [2.0 * m[0][0], m[0][1] + m[1][0]],
                [m[0][1] + m[1][0], 2.0 * m[1][1]],
            ]
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SocialOptimum {
    pub flows: FlowVector,
    pub cost: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub convexity: Convexity,
    pub trace: Vec<TraceRow>,
}

/// Minimizes the social cost by Frank–Wolfe on marginal costs.
///
/// The result is a global optimum when every cost is affine with a
/// semidefinite coefficient matrix; otherwise it is only stationary.
pub fn solve_social_optimum(
    game: &Game,
    opts: &SolveOptions,
    include_tolls: bool,
) -> Result<SocialOptimum> {
    opts.validate()?;
    check_routable(game)?;
    let obj = SocialObjective {
        game,
        include_tolls,
    };
    let outcome = minimize(game, &obj, opts);
    let costs = if include_tolls {
        game.effective_costs()
    } else {
        game.costs()
    };
    let certified = !outcome.hit_nonconvexity
        && costs
            .iter()
            .all(|c| c.as_affine().is_some_and(|a| is_psd(&a.alpha)));
    Ok(SocialOptimum {
        flows: outcome.flows,
        cost: outcome.value,
        gap: outcome.gap,
        iterations: outcome.iterations,
        converged: outcome.converged,
        convexity: if certified {
            Convexity::Certified
        } else {
            Convexity::StationaryOnly
        },
        trace: outcome.trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EdgeBoundDiagnostic {
    pub edge: EdgeId,
    pub symmetric: bool,
    pub psd: bool,
    /// `a11 a22 - a21 a12`.
    pub determinant: f64,
    pub asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoundVerdict {
    pub applicable: bool,
    /// Edges that fail either condition.
    pub failing: Vec<EdgeBoundDiagnostic>,
}

/// Whether the factor-two bound on the price of anarchy applies: every
/// effective cost affine with equal cross coefficients and a semidefinite
/// coefficient matrix.
pub fn theorem3_applicable(game: &Game) -> Result<BoundVerdict> {
    let mut failing = Vec::new();
    for (e, c) in game.effective_costs().iter().enumerate() {
        let a = c.as_affine().ok_or(Error::NotAffine(EdgeId(e)))?;
        let m = a.alpha;
        let scale = m.iter().flatten().fold(1.0_f64, |s, x| s.max(x.abs()));
        let symmetric = (m[1][0] - m[0][1]).abs() <= SYMMETRY_TOL * scale;
        let psd = is_psd(&m);
        if !(symmetric && psd) {
            failing.push(EdgeBoundDiagnostic {
                edge: EdgeId(e),
                symmetric,
                psd,
                determinant: m[0][0] * m[1][1] - m[1][0] * m[0][1],
                asymmetry: m[1][0] - m[0][1],
            });
        }
    }
    Ok(BoundVerdict {
        applicable: failing.is_empty(),
        failing,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PoAReport {
    pub cost_at_equilibrium: f64,
    pub cost_at_optimum: f64,
    /// Ratio at the computed equilibrium. Equilibria need not be unique, so
    /// this is the worst case only when equilibrium edge flows are unique.
    pub ratio: f64,
    pub bound_applicable: bool,
    pub bound_value: Option<f64>,
    pub zero_over_zero: bool,
    pub include_tolls: bool,
    pub equilibrium_epsilon: f64,
    pub equilibrium_gap: f64,
    pub optimum_gap: f64,
    pub optimum_certified: bool,
}

#[derive(Debug, Clone)]
pub struct PoAResult {
    pub report: PoAReport,
    pub equilibrium: Equilibrium,
    pub optimum: SocialOptimum,
}

/// Solves for an equilibrium and the optimum and compares their social costs.
///
/// With tolls present and `include_tolls` unset the costs being compared
/// differ from those driving the equilibrium, so the factor-two bound is not
/// claimed.
pub fn price_of_anarchy(
    game: &Game,
    opts: &SolveOptions,
    include_tolls: bool,
) -> Result<PoAResult> {
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
    let equilibrium = solve_equilibrium(game, opts)?;
    let optimum = solve_social_optimum(game, opts, include_tolls)?;
    let cost_eq = social_cost(game, &equilibrium.flows, include_tolls)?;
    let cost_opt = social_cost(game, &optimum.flows, include_tolls)?;
    let zero_over_zero = cost_eq.abs() < ZERO_COST && cost_opt.abs() < ZERO_COST;
    let ratio = if zero_over_zero { 1.0 } else { cost_eq / cost_opt };

    let same_costs = include_tolls || game.tolls().is_none();
    let bound_applicable = same_costs && game.is_affine() && theorem3_applicable(game)?.applicable;
    if bound_applicable && ratio > 2.0 + BOUND_SLACK {
        return Err(Error::BoundViolated { ratio });
    }
    let report = PoAReport {
        cost_at_equilibrium: cost_eq,
        cost_at_optimum: cost_opt,
        ratio,
        bound_applicable,
        bound_value: bound_applicable.then_some(2.0),
        zero_over_zero,
        include_tolls,
        equilibrium_epsilon: equilibrium.certificate.epsilon,
        equilibrium_gap: equilibrium.gap,
        optimum_gap: optimum.gap,
        optimum_certified: optimum.convexity == Convexity::Certified,
    };
    Ok(PoAResult {
        report,
        equilibrium,
        optimum,
    })
}
