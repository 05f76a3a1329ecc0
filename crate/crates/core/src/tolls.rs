//! Tolls that turn an asymmetric game into one with a potential.
//!
//! A toll pair `(t1, t2)` on an edge restores symmetry when
//! `dt1/dphi2 - dt2/dphi1 = dl2/dphi1 - dl1/dphi2`. Negative tolls are
//! subsidies and are kept as they are.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::costs::{cost_jacobian, AffineEdgeCost, EdgeCostFunction, Jacobian, SmoothCost};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::network::EdgeId;
use crate::potential::SamplingPlan;
use crate::quadrature::composite_gauss15;

/// Per-edge toll functions with the same shape as edge costs.
#[derive(Debug, Clone)]
pub struct TollScheme {
    edges: Vec<EdgeCostFunction>,
    type_independent: bool,
}

impl TollScheme {
    /// Edges beyond the end of `edges` are untolled.
    pub fn new(edges: Vec<EdgeCostFunction>, type_independent: bool) -> Self {
        TollScheme {
            edges,
            type_independent,
        }
    }

    pub fn zero(num_edges: usize) -> Self {
        TollScheme::new(alloc::vec![EdgeCostFunction::zero(); num_edges], true)
    }

    /// Linear tolls; type independence is read off the coefficients.
    pub fn linear(coefficients: Vec<AffineEdgeCost>) -> Self {
        let type_independent = coefficients
            .iter()
            .all(|a| a.alpha[0] == a.alpha[1] && a.beta[0] == a.beta[1]);
        TollScheme::new(
            coefficients.into_iter().map(EdgeCostFunction::Affine).collect(),
            type_independent,
        )
    }

    pub fn edge(&self, e: EdgeId) -> Option<&EdgeCostFunction> {
        self.edges.get(e.0)
    }

    pub fn edges(&self) -> &[EdgeCostFunction] {
        &self.edges
    }

    /// Both types pay the same toll on every edge.
    pub fn is_type_independent(&self) -> bool {
        self.type_independent
    }

    pub fn is_affine(&self) -> bool {
        self.edges.iter().all(|t| t.as_affine().is_some())
    }

    /// Toll values `(t1, t2)` on edge `e` at `phi`; zero past the end.
    pub fn value(&self, e: EdgeId, phi: [f64; 2]) -> [f64; 2] {
        self.edge(e).map_or([0.0; 2], |t| t.value(phi))
    }
}

/// Adds `tolls` to the game's costs. The untolled costs remain available for
/// social-cost accounting.
pub fn apply_tolls(game: &Game, tolls: TollScheme) -> Game {
    game.with_tolls(tolls)
}

/// Which type pays in a type-dependent scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Strategy {
    ChargeFirst,
    ChargeSecond,
}

/// Linear tolls charged to one type only.
///
/// With `d = a21 - a12`, charging the first type gives `t1 = d * phi2` and
/// charging the second gives `t2 = -d * phi1`.
pub fn distinguishable_tolls(game: &Game, strategy: Strategy) -> Result<TollScheme> {
    let mut out = Vec::with_capacity(game.num_edges());
    for (e, c) in game.costs().iter().enumerate() {
        let a = c.as_affine().ok_or(Error::NotAffine(EdgeId(e)))?;
        let mut alpha = [[0.0; 2]; 2];
        match strategy {
            Strategy::ChargeFirst => alpha[0][1] = a.alpha[1][0] - a.alpha[0][1],
            Strategy::ChargeSecond => alpha[1][0] = a.alpha[0][1] - a.alpha[1][0],
        }
        out.push(EdgeCostFunction::Affine(AffineEdgeCost::unchecked(alpha, [0.0; 2])));
    }
    let zero = out.iter().all(|t| t.is_zero_affine());
    Ok(TollScheme::new(out, zero))
}

/// Free function of the total flow added to a type-independent toll.
#[derive(Clone, Default)]
pub enum TotalFlowFn {
    #[default]
    Zero,
    /// `k * (phi1 + phi2)`.
    Linear(f64),
    Smooth(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for TotalFlowFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TotalFlowFn::Zero => f.write_str("Zero"),
            TotalFlowFn::Linear(k) => f.debug_tuple("Linear").field(k).finish(),
            TotalFlowFn::Smooth(_) => f.write_str("Smooth(..)"),
        }
    }
}

impl TotalFlowFn {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            TotalFlowFn::Zero => 0.0,
            TotalFlowFn::Linear(k) => k * s,
            TotalFlowFn::Smooth(g) => g(s),
        }
    }
}

/// Panels of the fixed quadrature rule inside non-affine tolls.
const TOLL_PANELS: usize = 4;

/// Type-independent toll for a non-affine edge:
/// `c + int_0^phi2 r(phi1 + phi2 - q, q) dq + psi(phi1 + phi2)`, where `r` is
/// the symmetry residual of the cost.
struct IntegratedToll {
    cost: EdgeCostFunction,
    constant: f64,
    psi: TotalFlowFn,
}

impl fmt::Debug for IntegratedToll {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegratedToll")
            .field("cost", &self.cost)
            .field("constant", &self.constant)
            .field("psi", &self.psi)
            .finish()
    }
}

impl SmoothCost for IntegratedToll {
    fn value(&self, phi: [f64; 2]) -> [f64; 2] {
        let s = phi[0] + phi[1];
        let mut r = |q: f64| {
            let j = cost_jacobian(&self.cost, [s - q, q], None);
            j[1][0] - j[0][1]
        };
        let tau = self.constant + composite_gauss15(&mut r, 0.0, phi[1], TOLL_PANELS) + self.psi.eval(s);
        [tau, tau]
    }
}

/// Type-independent tolls. `psi` and `constant` are per edge; missing
/// entries are zero.
///
/// Affine edges get the linear toll `c + (a21 - a12) * phi2 + psi(phi1 + phi2)`
/// (kept affine when `psi` is zero or linear). Other edges integrate the
/// symmetry residual numerically.
pub fn indistinguishable_tolls(
    game: &Game,
    psi: &[TotalFlowFn],
    constant: &[f64],
) -> TollScheme {
    let mut out = Vec::with_capacity(game.num_edges());
    for (e, c) in game.costs().iter().enumerate() {
        let p = psi.get(e).cloned().unwrap_or_default();
        let k = constant.get(e).copied().unwrap_or(0.0);
        let toll = match (c.as_affine(), &p) {
            (Some(a), TotalFlowFn::Zero | TotalFlowFn::Linear(_)) => {
                let lin = match p {
                    TotalFlowFn::Linear(x) => x,
                    _ => 0.0,
                };
                let d = a.alpha[1][0] - a.alpha[0][1];
                let row = [lin, d + lin];
                EdgeCostFunction::Affine(AffineEdgeCost::unchecked([row, row], [k, k]))
            }
            (Some(a), TotalFlowFn::Smooth(_)) => {
                let d = a.alpha[1][0] - a.alpha[0][1];
                let row = [0.0, d];
                let linear = EdgeCostFunction::Affine(AffineEdgeCost::unchecked([row, row], [k, k]));
                linear.sum(&EdgeCostFunction::smooth(IntegratedToll {
                    cost: EdgeCostFunction::zero(),
                    constant: 0.0,
                    psi: p,
                }))
            }
            (None, _) => EdgeCostFunction::smooth(IntegratedToll {
                cost: c.clone(),
                constant: k,
                psi: p,
            }),
        };
        out.push(toll);
    }
    TollScheme::new(out, true)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TollEdgeResidual {
    pub edge: EdgeId,
    /// Largest `|lhs - rhs|` over the samples (or the exact value when symbolic).
    pub max_abs: f64,
    pub symbolic: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TollReport {
    pub edges: Vec<TollEdgeResidual>,
    pub max_residual: f64,
    pub tol: f64,
    pub passed: bool,
}

/// `dt1/dphi2 - dt2/dphi1` minus `dl2/dphi1 - dl1/dphi2` for one edge.
fn toll_mismatch(toll: &Jacobian, cost: &Jacobian) -> f64 {
    (toll[0][1] - toll[1][0]) - (cost[1][0] - cost[0][1])
}

/// Checks the symmetry-restoring condition edge by edge against the
/// untolled costs. Affine costs with affine tolls are checked exactly;
/// anything else is sampled on `plan`. `tol` defaults to
/// `1e-8 * (1 + max |J|)`.
pub fn verify_toll_condition(
    game: &Game,
    tolls: &TollScheme,
    plan: &SamplingPlan,
    tol: Option<f64>,
) -> TollReport {
    let zero = EdgeCostFunction::zero();
    let mut max_jac: f64 = 0.0;
    let mut edges = Vec::with_capacity(game.num_edges());
    for (e, c) in game.costs().iter().enumerate() {
        let t = tolls.edge(EdgeId(e)).unwrap_or(&zero);
        let entry = match (c.as_affine(), t.as_affine()) {
            (Some(ca), Some(ta)) => {
                max_jac = ca
                    .alpha
                    .iter()
                    .chain(&ta.alpha)
                    .flatten()
                    .fold(max_jac, |m, x| m.max(x.abs()));
                TollEdgeResidual {
                    edge: EdgeId(e),
                    max_abs: toll_mismatch(&ta.alpha, &ca.alpha).abs(),
                    symbolic: true,
                }
            }
            _ => {
                let mut worst: f64 = 0.0;
                for &x in &plan.points {
                    let jt = cost_jacobian(t, x, None);
                    let jc = cost_jacobian(c, x, None);
                    max_jac = jt
                        .iter()
                        .chain(&jc)
                        .flatten()
                        .fold(max_jac, |m, v| m.max(v.abs()));
                    worst = worst.max(toll_mismatch(&jt, &jc).abs());
                }
                TollEdgeResidual {
                    edge: EdgeId(e),
                    max_abs: worst,
                    symbolic: false,
                }
            }
        };
        edges.push(entry);
    }
    let tol = tol.unwrap_or(1e-8 * (1.0 + max_jac));
    let max_residual = edges.iter().fold(0.0_f64, |m, r| m.max(r.max_abs));
    TollReport {
        edges,
        max_residual,
        tol,
        passed: max_residual <= tol,
    }
}

/// Raises each edge's tolls by a constant so that none is negative on the
/// sampled flows. A heuristic: points off the plan may still go negative.
pub fn nonnegative_shift(tolls: &TollScheme, plan: &SamplingPlan) -> TollScheme {
    let shifted = tolls
        .edges
        .iter()
        .map(|t| {
            let lowest = plan
                .points
                .iter()
                .flat_map(|&x| t.value(x))
                .fold(0.0_f64, f64::min);
            if lowest >= 0.0 {
                return t.clone();
            }
            let c = -lowest;
            t.sum(&EdgeCostFunction::Affine(AffineEdgeCost::unchecked(
                [[0.0; 2]; 2],
                [c, c],
            )))
        })
        .collect();
    TollScheme::new(shifted, tolls.type_independent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::FnCost;
    use crate::network::{Commodity, Graph, VertexId};
    use alloc::vec;

    fn single_edge(cost: EdgeCostFunction) -> Game {
        let g = Graph::new(
            vec![VertexId(0), VertexId(1)],
            vec![(EdgeId(0), VertexId(0), VertexId(1))],
        )
        .unwrap();
        Game::new(g, vec![Commodity::new(VertexId(0), VertexId(1), [1.0, 1.0])], vec![cost]).unwrap()
    }

    #[test]
    fn hand_computed_type_independent_toll() {
        // l1 = phi1 + 2 phi2, l2 = phi1 + phi2: the residual is 1 - 2 = -1.
        let game = single_edge(AffineEdgeCost::unchecked([[1.0, 2.0], [1.0, 1.0]], [0.0; 2]).into());
        let tolls = indistinguishable_tolls(&game, &[], &[]);
        let t = tolls.edge(EdgeId(0)).unwrap().as_affine().unwrap();
        assert_eq!(t.alpha, [[0.0, -1.0], [0.0, -1.0]]);
        assert_eq!(tolls.value(EdgeId(0), [3.0, 2.0]), [-2.0, -2.0]);
        let plan = SamplingPlan::default_for(&game, 0);
        assert!(verify_toll_condition(&game, &tolls, &plan, None).passed);
    }

    #[test]
    fn zero_tolls_fail_on_asymmetric_costs() {
        let game = single_edge(AffineEdgeCost::unchecked([[1.0, 0.2], [0.5, 1.0]], [0.0; 2]).into());
        let plan = SamplingPlan::default_for(&game, 0);
        let report = verify_toll_condition(&game, &TollScheme::zero(1), &plan, None);
        assert!(!report.passed);
        assert!((report.max_residual - 0.3).abs() < 1e-15);
    }

    #[test]
    fn integrated_toll_for_smooth_cost() {
        let cost = FnCost::with_jacobian(
            |x: [f64; 2]| [x[0] + x[0] * x[1], x[0] * x[0] + x[1]],
            |x: [f64; 2]| [[1.0 + x[1], x[0]], [2.0 * x[0], 1.0]],
        );
        let game = single_edge(EdgeCostFunction::smooth(cost));
        let tolls = indistinguishable_tolls(&game, &[], &[]);
        let plan = SamplingPlan::default_for(&game, 1);
        let report = verify_toll_condition(&game, &tolls, &plan, Some(1e-7));
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn shift_removes_subsidies() {
        let game = single_edge(AffineEdgeCost::unchecked([[1.0, 0.0], [0.5, 1.0]], [0.0; 2]).into());
        let tolls = distinguishable_tolls(&game, Strategy::ChargeSecond).unwrap();
        let plan = SamplingPlan::new(2.0, 3, 0, 0);
        assert_eq!(tolls.value(EdgeId(0), [2.0, 0.0]), [0.0, -1.0]);
        let shifted = nonnegative_shift(&tolls, &plan);
        assert_eq!(shifted.value(EdgeId(0), [2.0, 0.0]), [1.0, 0.0]);
    }
}
