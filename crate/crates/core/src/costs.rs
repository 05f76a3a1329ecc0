//! Edge cost functions of the two user types.
//!
//! Every edge carries a pair `(cost of type 1, cost of type 2)` that depends
//! on the flows of both types on that edge. Jacobians use the convention
//! `J[i][j] = d cost_i / d flow_j`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::network::UserType;

/// `J[i][j]` is the derivative of the type-`i` cost with respect to the type-`j` flow.
pub type Jacobian = [[f64; 2]; 2];

/// A continuously differentiable two-type cost (or toll) function.
pub trait SmoothCost: Send + Sync + fmt::Debug {
    fn value(&self, phi: [f64; 2]) -> [f64; 2];

    /// Analytic Jacobian, if known. Finite differences are used otherwise.
    fn jacobian(&self, _phi: [f64; 2]) -> Option<Jacobian> {
        None
    }
}

/// Adapts closures into a [`SmoothCost`].
pub struct FnCost<F, G = fn([f64; 2]) -> Jacobian> {
    value: F,
    jacobian: Option<G>,
}

impl<F> FnCost<F>
where
    F: Fn([f64; 2]) -> [f64; 2] + Send + Sync,
{
    pub fn new(value: F) -> Self {
        FnCost {
            value,
            jacobian: None,
        }
    }
}

impl<F, G> FnCost<F, G>
where
    F: Fn([f64; 2]) -> [f64; 2] + Send + Sync,
    G: Fn([f64; 2]) -> Jacobian + Send + Sync,
{
    pub fn with_jacobian(value: F, jacobian: G) -> Self {
        FnCost {
            value,
            jacobian: Some(jacobian),
        }
    }
}

impl<F, G> fmt::Debug for FnCost<F, G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnCost")
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl<F, G> SmoothCost for FnCost<F, G>
where
    F: Fn([f64; 2]) -> [f64; 2] + Send + Sync,
    G: Fn([f64; 2]) -> Jacobian + Send + Sync,
{
    fn value(&self, phi: [f64; 2]) -> [f64; 2] {
        (self.value)(phi)
    }

    fn jacobian(&self, phi: [f64; 2]) -> Option<Jacobian> {
        self.jacobian.as_ref().map(|j| j(phi))
    }
}

/// `cost_i = alpha[i][0] * flow_1 + alpha[i][1] * flow_2 + beta[i]`.
///
/// [`AffineEdgeCost::new`] enforces nonnegative coefficients. Tolls reuse
/// this shape with coefficients of either sign via [`AffineEdgeCost::unchecked`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AffineEdgeCost {
    pub alpha: [[f64; 2]; 2],
    pub beta: [f64; 2],
}

const ALPHA_NAMES: [[&str; 2]; 2] = [["alpha_11", "alpha_12"], ["alpha_21", "alpha_22"]];
const BETA_NAMES: [&str; 2] = ["beta_1", "beta_2"];

impl AffineEdgeCost {
    pub const ZERO: AffineEdgeCost = AffineEdgeCost {
        alpha: [[0.0; 2]; 2],
        beta: [0.0; 2],
    };

    pub fn new(alpha: [[f64; 2]; 2], beta: [f64; 2]) -> Result<Self> {
        let cost = Self::unchecked(alpha, beta);
        if let Some((name, value)) = cost.first_negative() {
            return Err(Error::NegativeCoefficient { name, value });
        }
        Ok(cost)
    }

    /// Shared cross coefficient: `alpha_12 = alpha_21 = cross`.
    pub fn symmetric(own1: f64, cross: f64, own2: f64, beta: [f64; 2]) -> Result<Self> {
        Self::new([[own1, cross], [cross, own2]], beta)
    }

    pub const fn unchecked(alpha: [[f64; 2]; 2], beta: [f64; 2]) -> Self {
        AffineEdgeCost { alpha, beta }
    }

    pub fn first_negative(&self) -> Option<(&'static str, f64)> {
        // NaN counts as negative here.
        let bad = |x: f64| x.is_nan() || x < 0.0;
        let alphas = ALPHA_NAMES.iter().flatten().zip(self.alpha.iter().flatten());
        let betas = BETA_NAMES.iter().zip(&self.beta);
        alphas
            .chain(betas)
            .find(|(_, &x)| bad(x))
            .map(|(&name, &x)| (name, x))
    }

    pub fn value(&self, phi: [f64; 2]) -> [f64; 2] {
        let a = &self.alpha;
        [
            a[0][0] * phi[0] + a[0][1] * phi[1] + self.beta[0],
            a[1][0] * phi[0] + a[1][1] * phi[1] + self.beta[1],
        ]
    }

    pub fn plus(&self, other: &AffineEdgeCost) -> AffineEdgeCost {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.alpha[i][j] += other.alpha[i][j];
            }
            out.beta[i] += other.beta[i];
        }
        out
    }

    /// `alpha_21 - alpha_12`: the edgewise symmetry residual.
    pub fn asymmetry(&self) -> f64 {
        self.alpha[1][0] - self.alpha[0][1]
    }
}

/// Cost function of one edge.
#[derive(Clone)]
pub enum EdgeCostFunction {
    Affine(AffineEdgeCost),
    Smooth(Arc<dyn SmoothCost>),
}

impl fmt::Debug for EdgeCostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeCostFunction::Affine(a) => f.debug_tuple("Affine").field(a).finish(),
            EdgeCostFunction::Smooth(s) => f.debug_tuple("Smooth").field(s).finish(),
        }
    }
}

impl From<AffineEdgeCost> for EdgeCostFunction {
    fn from(a: AffineEdgeCost) -> Self {
        EdgeCostFunction::Affine(a)
    }
}

impl EdgeCostFunction {
    pub fn smooth(f: impl SmoothCost + 'static) -> Self {
        EdgeCostFunction::Smooth(Arc::new(f))
    }

    pub fn zero() -> Self {
        EdgeCostFunction::Affine(AffineEdgeCost::ZERO)
    }

    pub fn value(&self, phi: [f64; 2]) -> [f64; 2] {
        match self {
            EdgeCostFunction::Affine(a) => a.value(phi),
            EdgeCostFunction::Smooth(s) => s.value(phi),
        }
    }

    pub fn as_affine(&self) -> Option<&AffineEdgeCost> {
        match self {
            EdgeCostFunction::Affine(a) => Some(a),
            EdgeCostFunction::Smooth(_) => None,
        }
    }

    pub fn analytic_jacobian(&self, phi: [f64; 2]) -> Option<Jacobian> {
        match self {
            EdgeCostFunction::Affine(a) => Some(a.alpha),
            EdgeCostFunction::Smooth(s) => s.jacobian(phi),
        }
    }

    /// Analytic Jacobian when available, else finite differences with the default step.
    pub fn jacobian(&self, phi: [f64; 2]) -> Jacobian {
        cost_jacobian(self, phi, None)
    }

    /// Pointwise sum, kept affine when both sides are.
    pub fn sum(&self, other: &EdgeCostFunction) -> EdgeCostFunction {
        match (self, other) {
            (EdgeCostFunction::Affine(a), EdgeCostFunction::Affine(b)) => {
                EdgeCostFunction::Affine(a.plus(b))
            }
            _ => EdgeCostFunction::Smooth(Arc::new(SumCost(self.clone(), other.clone()))),
        }
    }

    pub fn is_zero_affine(&self) -> bool {
        matches!(self, EdgeCostFunction::Affine(a) if *a == AffineEdgeCost::ZERO)
    }
}

#[derive(Debug)]
struct SumCost(EdgeCostFunction, EdgeCostFunction);

impl SmoothCost for SumCost {
    fn value(&self, phi: [f64; 2]) -> [f64; 2] {
        let a = self.0.value(phi);
        let b = self.1.value(phi);
        [a[0] + b[0], a[1] + b[1]]
    }

    fn jacobian(&self, phi: [f64; 2]) -> Option<Jacobian> {
        let a = self.0.analytic_jacobian(phi)?;
        let b = self.1.analytic_jacobian(phi)?;
        Some([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

/// Evaluates an edge cost; flows must be nonnegative.
pub fn edge_cost(f: &EdgeCostFunction, phi1: f64, phi2: f64) -> Result<[f64; 2]> {
    for flow in [phi1, phi2] {
        if flow.is_nan() || flow < 0.0 {
            return Err(Error::NegativeFlow { flow });
        }
    }
    Ok(f.value([phi1, phi2]))
}

/// Relative step used when none is given: `1e-5 * max(1, |flow|)`.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Jacobian of `f` at `phi`: analytic when available, otherwise finite differences.
///
/// `fd_step` is relative (`h = fd_step * max(1, |flow_j|)`). Differences are
/// central in the interior and second-order one-sided where `flow_j < h`.
pub fn cost_jacobian(f: &EdgeCostFunction, phi: [f64; 2], fd_step: Option<f64>) -> Jacobian {
    if let Some(j) = f.analytic_jacobian(phi) {
        return j;
    }
    finite_difference_jacobian(|x| f.value(x), phi, fd_step)
}

pub fn finite_difference_jacobian(
    f: impl Fn([f64; 2]) -> [f64; 2],
    phi: [f64; 2],
    fd_step: Option<f64>,
) -> Jacobian {
    let rel = fd_step.unwrap_or(DEFAULT_FD_STEP);
    let mut jac = [[0.0; 2]; 2];
    for j in 0..2 {
        let h = rel * phi[j].abs().max(1.0);
        let shifted = |d: f64| {
            let mut x = phi;
            x[j] += d;
            f(x)
        };
        let column = if phi[j] >= h {
            let (up, down) = (shifted(h), shifted(-h));
            [(up[0] - down[0]) / (2.0 * h), (up[1] - down[1]) / (2.0 * h)]
        } else {
            let (f0, f1, f2) = (shifted(0.0), shifted(h), shifted(2.0 * h));
            [
                (-3.0 * f0[0] + 4.0 * f1[0] - f2[0]) / (2.0 * h),
                (-3.0 * f0[1] + 4.0 * f1[1] - f2[1]) / (2.0 * h),
            ]
        };
        jac[0][j] = column[0];
        jac[1][j] = column[1];
    }
    jac
}

/// Linearized platooning model of one road segment. Type 1 is cars, type 2 trucks.
///
/// Speed on the segment is `velocity_slope * (cars + trucks) + free_flow_speed`.
/// The two fuel constants are the lumped air-drag and roll-resistance terms of
/// the truck fuel model (see [`PhysicalConstants::lump`]). The platooning
/// factor is 1 at zero truck flow and has slope `platoon_slope` there.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlatooningParams {
    pub length: f64,
    pub velocity_slope: f64,
    pub free_flow_speed: f64,
    pub fuel_weight: f64,
    pub drag: f64,
    pub rolling: f64,
    pub platoon_slope: f64,
}

impl PlatooningParams {
    /// Platooning factor at zero truck flow.
    pub const PLATOON_FACTOR_AT_ZERO: f64 = 1.0;

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool); 7] = [
            ("length", self.length, self.length >= 0.0),
            ("velocity_slope", self.velocity_slope, self.velocity_slope <= 0.0),
            ("free_flow_speed", self.free_flow_speed, self.free_flow_speed > 0.0),
            ("fuel_weight", self.fuel_weight, self.fuel_weight >= 0.0),
            ("drag", self.drag, self.drag >= 0.0),
            ("rolling", self.rolling, self.rolling >= 0.0),
            ("platoon_slope", self.platoon_slope, self.platoon_slope <= 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// `2 c0 drag b a`: truck-cost sensitivity to car flow minus the reverse.
    pub fn asymmetry(&self) -> f64 {
        2.0 * self.fuel_weight * self.drag * self.free_flow_speed * self.velocity_slope
    }
}

/// Raw physical constants of the truck fuel model, before lumping.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhysicalConstants {
    pub engine_efficiency: f64,
    pub fuel_energy_density: f64,
    pub drag_coefficient: f64,
    pub frontal_area: f64,
    pub air_density: f64,
    pub mass: f64,
    pub gravity: f64,
    pub rolling_coefficient: f64,
}

impl PhysicalConstants {
    /// Returns `(drag, rolling)` for a segment of the given length:
    /// `L rho_a A c_D / (2 eta rho_d)` and `L m g c_r / (eta rho_d)`.
    pub fn lump(&self, length: f64) -> (f64, f64) {
        let denom = self.engine_efficiency * self.fuel_energy_density;
        let drag = length * self.air_density * self.frontal_area * self.drag_coefficient
            / (2.0 * denom);
        let rolling = length * self.mass * self.gravity * self.rolling_coefficient / denom;
        (drag, rolling)
    }
}

/// Coefficients of the linearized platooning model without any parameter or
/// sign checks.
pub fn platooning_affine_unchecked(p: &PlatooningParams) -> AffineEdgeCost {
    let (l, a, b, c0) = (p.length, p.velocity_slope, p.free_flow_speed, p.fuel_weight);
    let gamma0 = PlatooningParams::PLATOON_FACTOR_AT_ZERO;
    let latency_slope = -l * a / (b * b);
    let drag_cross = 2.0 * c0 * p.drag * gamma0 * b * a;

    let alpha = [
        [latency_slope, latency_slope],
        [
            latency_slope + drag_cross,
            latency_slope + c0 * p.drag * p.platoon_slope * b * b + drag_cross,
        ],
    ];
    let beta = [l / b, l / b + c0 * p.rolling + c0 * p.drag * gamma0 * b * b];
    AffineEdgeCost::unchecked(alpha, beta)
}

/// Affine costs of the linearized platooning model.
pub fn platooning_affine(p: &PlatooningParams) -> Result<AffineEdgeCost> {
    p.validate()?;
    let AffineEdgeCost { alpha, beta } = platooning_affine_unchecked(p);

    if alpha[1][0] < 0.0 {
        return Err(Error::NegativeCoefficient {
            name: "alpha_21",
            value: alpha[1][0],
        });
    }
    if alpha[1][1] < 0.0 {
        return Err(Error::AssumptionViolated {
            name: "alpha_22",
            value: alpha[1][1],
        });
    }
    AffineEdgeCost::new(alpha, beta)
}

/// Box `[0, max[0]] x [0, max[1]]` sampled on a `(resolution + 1)^2` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub max: [f64; 2],
    pub resolution: usize,
}

impl SampleGrid {
    pub fn points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        let n = self.resolution.max(1);
        (0..=n).flat_map(move |i| {
            (0..=n).map(move |j| {
                [
                    self.max[0] * i as f64 / n as f64,
                    self.max[1] * j as f64 / n as f64,
                ]
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ViolationKind {
    /// A cost value below zero.
    Negative,
    /// A cost that decreases in the flow of its own type.
    Decreasing,
    /// A negative affine coefficient.
    NegativeCoefficient,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Violation {
    pub kind: ViolationKind,
    pub user_type: Option<UserType>,
    pub coefficient: Option<&'static str>,
    pub at: [f64; 2],
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Assumption1Report {
    pub symbolic: bool,
    pub violations: Vec<Violation>,
}

impl Assumption1Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks nonnegativity and own-flow monotonicity of `f`.
///
/// Affine functions are checked on their coefficients; anything else is
/// sampled on `grid`.
pub fn validate_assumption1(f: &EdgeCostFunction, grid: &SampleGrid) -> Assumption1Report {
    let mut violations = Vec::new();
    match f {
        EdgeCostFunction::Affine(a) => {
            for t in UserType::ALL {
                let i = t.index();
                if a.beta[i] < 0.0 {
                    violations.push(Violation {
                        kind: ViolationKind::Negative,
                        user_type: Some(t),
                        coefficient: Some(BETA_NAMES[i]),
                        at: [0.0, 0.0],
                        value: a.beta[i],
                    });
                }
                if a.alpha[i][i] < 0.0 {
                    violations.push(Violation {
                        kind: ViolationKind::Decreasing,
                        user_type: Some(t),
                        coefficient: Some(ALPHA_NAMES[i][i]),
                        at: [0.0, 0.0],
                        value: a.alpha[i][i],
                    });
                }
                let j = 1 - i;
                if a.alpha[i][j] < 0.0 {
                    violations.push(Violation {
                        kind: ViolationKind::NegativeCoefficient,
                        user_type: Some(t),
                        coefficient: Some(ALPHA_NAMES[i][j]),
                        at: [0.0, 0.0],
                        value: a.alpha[i][j],
                    });
                }
            }
            Assumption1Report {
                symbolic: true,
                violations,
            }
        }
        EdgeCostFunction::Smooth(s) => {
            let n = grid.resolution.max(1);
            let at = |i: usize, j: usize| {
                [
                    grid.max[0] * i as f64 / n as f64,
                    grid.max[1] * j as f64 / n as f64,
                ]
            };
            for i in 0..=n {
                for j in 0..=n {
                    let x = at(i, j);
                    let v = s.value(x);
                    for t in UserType::ALL {
                        let k = t.index();
                        if v[k] < 0.0 {
                            violations.push(Violation {
                                kind: ViolationKind::Negative,
                                user_type: Some(t),
                                coefficient: None,
                                at: x,
                                value: v[k],
                            });
                        }
                        // step along the own-flow axis
                        let next = match t {
                            UserType::First if i < n => Some(at(i + 1, j)),
                            UserType::Second if j < n => Some(at(i, j + 1)),
                            _ => None,
                        };
                        if let Some(y) = next {
                            let w = s.value(y)[k];
                            if w < v[k] - 1e-12 * (1.0 + v[k].abs()) {
                                violations.push(Violation {
                                    kind: ViolationKind::Decreasing,
                                    user_type: Some(t),
                                    coefficient: None,
                                    at: y,
                                    value: w - v[k],
                                });
                            }
                        }
                    }
                }
            }
            Assumption1Report {
                symbolic: false,
                violations,
            }
        }
    }
}
