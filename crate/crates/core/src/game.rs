use alloc::vec::Vec;

use crate::costs::{validate_assumption1, Assumption1Report, EdgeCostFunction, SampleGrid};
use crate::error::{Error, Result};
use crate::network::{
    edge_flows, Commodity, EdgeFlows, EdgeId, FlowVector, Graph, PathId, PathSet, UserType,
};
use crate::tolls::TollScheme;

/// A two-type routing game: graph, commodities, admissible paths, edge costs
/// and optional tolls.
///
/// Equilibrium computations use the *effective* cost (cost plus toll) of each
/// edge; the untolled costs stay available for social-cost accounting.
#[derive(Debug, Clone)]
pub struct Game {
    graph: Graph,
    commodities: Vec<Commodity>,
    paths: PathSet,
    costs: Vec<EdgeCostFunction>,
    tolls: Option<TollScheme>,
    effective: Vec<EdgeCostFunction>,
}

/// One commodity/type pair with positive demand.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Block {
    pub commodity: usize,
    pub user_type: UserType,
    pub demand: f64,
    pub paths: core::ops::Range<usize>,
}

impl Game {
    /// Builds a game whose path sets are all simple paths of each commodity.
    pub fn new(
        graph: Graph,
        commodities: Vec<Commodity>,
        costs: Vec<EdgeCostFunction>,
    ) -> Result<Self> {
        validate_commodities(&graph, &commodities)?;
        let paths = PathSet::enumerate(&graph, &commodities, None)?;
        Self::with_paths(graph, commodities, costs, paths)
    }

    /// Builds a game with explicit path lists.
    pub fn with_paths(
        graph: Graph,
        commodities: Vec<Commodity>,
        costs: Vec<EdgeCostFunction>,
        paths: PathSet,
    ) -> Result<Self> {
        validate_commodities(&graph, &commodities)?;
        if costs.len() != graph.num_edges() {
            return Err(Error::CostCountMismatch {
                expected: graph.num_edges(),
                found: costs.len(),
            });
        }
        paths.validate(&graph, &commodities)?;
        let effective = costs.clone();
        Ok(Game {
            graph,
            commodities,
            paths,
            costs,
            tolls: None,
            effective,
        })
    }

    /// Same game with `tolls` added on top of the costs. Replaces earlier tolls.
    pub fn with_tolls(&self, tolls: TollScheme) -> Game {
        let effective = self
            .costs
            .iter()
            .enumerate()
            .map(|(e, c)| match tolls.edge(EdgeId(e)) {
                Some(t) if !t.is_zero_affine() => c.sum(t),
                _ => c.clone(),
            })
            .collect();
        Game {
            graph: self.graph.clone(),
            commodities: self.commodities.clone(),
            paths: self.paths.clone(),
            costs: self.costs.clone(),
            tolls: Some(tolls),
            effective,
        }
    }

    /// Same game with the tolls removed.
    pub fn without_tolls(&self) -> Game {
        Game {
            tolls: None,
            effective: self.costs.clone(),
            ..self.clone()
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn commodities(&self) -> &[Commodity] {
        &self.commodities
    }

    pub fn paths(&self) -> &PathSet {
        &self.paths
    }

    /// Untolled edge costs.
    pub fn costs(&self) -> &[EdgeCostFunction] {
        &self.costs
    }

    pub fn tolls(&self) -> Option<&TollScheme> {
        self.tolls.as_ref()
    }

    /// Cost plus toll of every edge.
    pub fn effective_costs(&self) -> &[EdgeCostFunction] {
        &self.effective
    }

    pub fn num_edges(&self) -> usize {
        self.graph.num_edges()
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    /// True when every effective edge cost is affine.
    pub fn is_affine(&self) -> bool {
        self.effective.iter().all(|c| c.as_affine().is_some())
    }

    pub fn max_demand(&self) -> f64 {
        self.commodities
            .iter()
            .flat_map(|c| c.demand)
            .fold(0.0, f64::max)
    }

    pub fn total_demand(&self) -> f64 {
        self.commodities.iter().flat_map(|c| c.demand).sum()
    }

    pub(crate) fn blocks(&self) -> Vec<Block> {
        let mut out = Vec::new();
        for (k, c) in self.commodities.iter().enumerate() {
            for t in UserType::ALL {
                let demand = c.demand_of(t);
                if demand > 0.0 {
                    out.push(Block {
                        commodity: k,
                        user_type: t,
                        demand,
                        paths: self.paths.commodity_range(k),
                    });
                }
            }
        }
        out
    }

    pub(crate) fn check_flow_len(&self, flows: &FlowVector) -> Result<()> {
        if flows.len() > self.num_paths() {
            return Err(Error::UnknownPath(PathId(self.num_paths())));
        }
        Ok(())
    }

    pub fn edge_flows(&self, flows: &FlowVector) -> Result<EdgeFlows> {
        edge_flows(flows, &self.paths, self.num_edges())
    }

    /// Effective (tolled) cost of every path at the given edge flows.
    pub fn path_costs_at(&self, phi: &EdgeFlows) -> Vec<[f64; 2]> {
        let edge_costs: Vec<[f64; 2]> = self
            .effective
            .iter()
            .zip(phi.as_slice())
            .map(|(c, &x)| c.value(x))
            .collect();
        self.paths
            .paths()
            .iter()
            .map(|p| {
                p.edges.iter().fold([0.0; 2], |acc, e| {
                    let c = edge_costs[e.0];
                    [acc[0] + c[0], acc[1] + c[1]]
                })
            })
            .collect()
    }

    pub fn path_costs(&self, flows: &FlowVector) -> Result<Vec<[f64; 2]>> {
        Ok(self.path_costs_at(&self.edge_flows(flows)?))
    }

    /// Effective cost of path `p` for type `t`, tolls included.
    pub fn path_cost(&self, flows: &FlowVector, p: PathId, t: UserType) -> Result<f64> {
        let path = self.paths.path(p).ok_or(Error::UnknownPath(p))?;
        let phi = self.edge_flows(flows)?;
        Ok(path
            .edges
            .iter()
            .map(|&e| self.effective[e.0].value(phi.get(e))[t.index()])
            .sum())
    }

    /// Checks every untolled edge cost against nonnegativity and own-flow
    /// monotonicity. Returns only the edges with violations.
    pub fn validate_assumption1(&self, grid: &SampleGrid) -> Vec<(EdgeId, Assumption1Report)> {
        self.costs
            .iter()
            .enumerate()
            .map(|(e, c)| (EdgeId(e), validate_assumption1(c, grid)))
            .filter(|(_, r)| !r.passed())
            .collect()
    }
}

fn validate_commodities(graph: &Graph, commodities: &[Commodity]) -> Result<()> {
    for (k, c) in commodities.iter().enumerate() {
        for v in [c.source, c.sink] {
            if !graph.contains_vertex(v) {
                return Err(Error::UnknownCommodityVertex {
                    commodity: k,
                    vertex: v,
                });
            }
        }
        if c.demand.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidDemand { commodity: k });
        }
    }
    Ok(())
}
