//! Graphs, commodities, path sets and the map from path flows to edge flows.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut, Range};

use crate::error::{Error, Result};

/// Enumeration results above this many paths per commodity deserve a warning.
pub const LARGE_PATH_COUNT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct EdgeId(pub usize);

/// Global index of a path in a [`PathSet`]; paths of one commodity are contiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct PathId(pub usize);

macro_rules! display_id {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Display::fmt(&self.0, f)
            }
        }
    )*};
}
display_id!(VertexId, EdgeId, PathId);

/// The two user types of the game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum UserType {
    #[cfg_attr(feature = "serde", serde(rename = "theta1"))]
    First,
    #[cfg_attr(feature = "serde", serde(rename = "theta2"))]
    Second,
}

impl UserType {
    pub const ALL: [UserType; 2] = [UserType::First, UserType::Second];

    pub const fn index(self) -> usize {
        match self {
            UserType::First => 0,
            UserType::Second => 1,
        }
    }

    pub const fn other(self) -> UserType {
        match self {
            UserType::First => UserType::Second,
            UserType::Second => UserType::First,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            UserType::First => "theta1",
            UserType::Second => "theta2",
        }
    }
}

impl fmt::Display for UserType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Edge {
    pub tail: VertexId,
    pub head: VertexId,
}

/// A directed multigraph with dense edge ids `0..num_edges()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
    outgoing: BTreeMap<VertexId, Vec<EdgeId>>,
}

impl Graph {
    /// Builds a graph from a vertex set and `(id, tail, head)` triples.
    ///
    /// Edge ids may be listed in any order but must cover `0..n` exactly once.
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (EdgeId, VertexId, VertexId)>,
    ) -> Result<Self> {
        let vertex_set: BTreeSet<VertexId> = vertices.into_iter().collect();
        let mut listed: Vec<(EdgeId, VertexId, VertexId)> = edges.into_iter().collect();
        listed.sort_by_key(|&(id, _, _)| id);

        let mut edges = Vec::with_capacity(listed.len());
        let mut outgoing: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
        for (expected, &(id, tail, head)) in listed.iter().enumerate() {
            if id.0 != expected {
                return Err(Error::NonDenseEdgeId {
                    expected,
                    found: id.0,
                });
            }
            for v in [tail, head] {
                if !vertex_set.contains(&v) {
                    return Err(Error::UnknownVertex { edge: id, vertex: v });
                }
            }
            edges.push(Edge { tail, head });
            outgoing.entry(tail).or_default().push(id);
        }

        Ok(Graph {
            vertices: vertex_set.into_iter().collect(),
            edges,
            outgoing,
        })
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(id.0)
    }

    /// Outgoing edges of `v` in increasing id order.
    pub fn outgoing(&self, v: VertexId) -> &[EdgeId] {
        self.outgoing.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// A source/sink pair with a demand for each user type.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Commodity {
    pub source: VertexId,
    pub sink: VertexId,
    pub demand: [f64; 2],
}

impl Commodity {
    pub fn new(source: VertexId, sink: VertexId, demand: [f64; 2]) -> Self {
        Commodity {
            source,
            sink,
            demand,
        }
    }

    pub fn demand_of(&self, t: UserType) -> f64 {
        self.demand[t.index()]
    }

    pub fn has_demand(&self) -> bool {
        self.demand.iter().any(|&d| d > 0.0)
    }
}

/// All simple `source -> sink` paths with at most `max_hops` edges.
///
/// Paths come out in lexicographic order of their edge-id sequences.
/// `max_hops = None` means `|V| - 1`, which admits every simple path.
pub fn enumerate_paths(
    graph: &Graph,
    commodity: &Commodity,
    max_hops: Option<usize>,
) -> Result<Vec<Vec<EdgeId>>> {
    for v in [commodity.source, commodity.sink] {
        if !graph.contains_vertex(v) {
            return Err(Error::UnknownCommodityVertex {
                commodity: 0,
                vertex: v,
            });
        }
    }
    let limit = max_hops.unwrap_or(graph.vertices().len().saturating_sub(1));

    let mut found = Vec::new();
    if commodity.source == commodity.sink {
        found.push(Vec::new());
    } else {
        let mut on_path = BTreeSet::new();
        on_path.insert(commodity.source);
        let mut stack = Vec::new();
        dfs(
            graph,
            commodity.source,
            commodity.sink,
            limit,
            &mut on_path,
            &mut stack,
            &mut found,
        );
    }

    if found.is_empty() && commodity.has_demand() {
        return Err(Error::SinkUnreachable {
            origin: commodity.source,
            sink: commodity.sink,
        });
    }
    Ok(found)
}

fn dfs(
    graph: &Graph,
    at: VertexId,
    sink: VertexId,
    hops_left: usize,
    on_path: &mut BTreeSet<VertexId>,
    stack: &mut Vec<EdgeId>,
    out: &mut Vec<Vec<EdgeId>>,
) {
    if hops_left == 0 {
        return;
    }
    for &e in graph.outgoing(at) {
        let head = graph.edges[e.0].head;
        if on_path.contains(&head) {
            continue;
        }
        stack.push(e);
        if head == sink {
            out.push(stack.clone());
        } else {
            on_path.insert(head);
            dfs(graph, head, sink, hops_left - 1, on_path, stack, out);
            on_path.remove(&head);
        }
        stack.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Path {
    pub commodity: usize,
    pub edges: Vec<EdgeId>,
}

impl Path {
    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.contains(&e)
    }
}

/// Admissible paths of every commodity, numbered globally.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathSet {
    paths: Vec<Path>,
    ranges: Vec<Range<usize>>,
}

impl PathSet {
    /// One list of edge sequences per commodity, in commodity order.
    pub fn from_lists(lists: Vec<Vec<Vec<EdgeId>>>) -> Self {
        let mut paths = Vec::new();
        let mut ranges = Vec::with_capacity(lists.len());
        for (k, list) in lists.into_iter().enumerate() {
            let start = paths.len();
            paths.extend(list.into_iter().map(|edges| Path {
                commodity: k,
                edges,
            }));
            ranges.push(start..paths.len());
        }
        PathSet { paths, ranges }
    }

    /// Enumerates paths for every commodity.
    pub fn enumerate(
        graph: &Graph,
        commodities: &[Commodity],
        max_hops: Option<usize>,
    ) -> Result<Self> {
        let mut lists = Vec::with_capacity(commodities.len());
        for (k, c) in commodities.iter().enumerate() {
            let list = enumerate_paths(graph, c, max_hops).map_err(|e| match e {
                Error::UnknownCommodityVertex { vertex, .. } => Error::UnknownCommodityVertex {
                    commodity: k,
                    vertex,
                },
                other => other,
            })?;
            lists.push(list);
        }
        Ok(Self::from_lists(lists))
    }

    /// Checks every path against the graph and its commodity. An empty list
    /// is accepted here; solvers report it as infeasible when demand is positive.
    pub fn validate(&self, graph: &Graph, commodities: &[Commodity]) -> Result<()> {
        if self.ranges.len() != commodities.len() {
            return Err(Error::InvalidPath {
                commodity: self.ranges.len().min(commodities.len()),
                reason: alloc::format!(
                    "path lists given for {} commodities, game has {}",
                    self.ranges.len(),
                    commodities.len()
                ),
            });
        }
        for (k, c) in commodities.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for path in &self.paths[self.ranges[k].clone()] {
                check_walk(graph, c, &path.edges)
                    .map_err(|reason| Error::InvalidPath { commodity: k, reason })?;
                if !seen.insert(path.edges.clone()) {
                    return Err(Error::InvalidPath {
                        commodity: k,
                        reason: alloc::format!("duplicate path {:?}", ids(&path.edges)),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn num_commodities(&self) -> usize {
        self.ranges.len()
    }

    pub fn path(&self, id: PathId) -> Option<&Path> {
        self.paths.get(id.0)
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    /// Path ids belonging to commodity `k`.
    pub fn of_commodity(&self, k: usize) -> impl Iterator<Item = PathId> + Clone {
        self.ranges
            .get(k)
            .cloned()
            .unwrap_or(0..0)
            .map(PathId)
    }

    pub fn commodity_range(&self, k: usize) -> Range<usize> {
        self.ranges.get(k).cloned().unwrap_or(0..0)
    }
}

fn ids(edges: &[EdgeId]) -> Vec<usize> {
    edges.iter().map(|e| e.0).collect()
}

fn check_walk(
    graph: &Graph,
    c: &Commodity,
    edges: &[EdgeId],
) -> core::result::Result<(), alloc::string::String> {
    let mut at = c.source;
    let mut visited = BTreeSet::new();
    visited.insert(at);
    for &e in edges {
        let edge = graph
            .edge(e)
            .ok_or_else(|| alloc::format!("unknown edge {e}"))?;
        if edge.tail != at {
            return Err(alloc::format!(
                "edge {e} starts at {} but the walk is at {at}",
                edge.tail
            ));
        }
        at = edge.head;
        if !visited.insert(at) {
            return Err(alloc::format!("path {:?} repeats vertex {at}", ids(edges)));
        }
    }
    if at != c.sink {
        return Err(alloc::format!(
            "path {:?} ends at {at}, not at sink {}",
            ids(edges),
            c.sink
        ));
    }
    Ok(())
}

/// Path flows for both types, indexed by [`PathId`].
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct FlowVector(Vec<[f64; 2]>);

impl FlowVector {
    pub fn zeros(num_paths: usize) -> Self {
        FlowVector(vec![[0.0; 2]; num_paths])
    }

    pub fn from_vec(flows: Vec<[f64; 2]>) -> Self {
        FlowVector(flows)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, p: PathId, t: UserType) -> f64 {
        self.0.get(p.0).map_or(0.0, |f| f[t.index()])
    }

    pub fn set(&mut self, p: PathId, t: UserType, value: f64) {
        self.0[p.0][t.index()] = value;
    }

    pub fn as_slice(&self) -> &[[f64; 2]] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<[f64; 2]> {
        self.0
    }

    /// `a * self + b * other`, entrywise.
    pub fn combine(&self, a: f64, other: &FlowVector, b: f64) -> FlowVector {
        let n = self.len().max(other.len());
        FlowVector(
            (0..n)
                .map(|i| {
                    let x = self.0.get(i).copied().unwrap_or([0.0; 2]);
                    let y = other.0.get(i).copied().unwrap_or([0.0; 2]);
                    [a * x[0] + b * y[0], a * x[1] + b * y[1]]
                })
                .collect(),
        )
    }
}

impl Index<PathId> for FlowVector {
    type Output = [f64; 2];
    fn index(&self, p: PathId) -> &[f64; 2] {
        &self.0[p.0]
    }
}

impl IndexMut<PathId> for FlowVector {
    fn index_mut(&mut self, p: PathId) -> &mut [f64; 2] {
        &mut self.0[p.0]
    }
}

/// Aggregate flow of each type on every edge.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct EdgeFlows(Vec<[f64; 2]>);

impl EdgeFlows {
    pub fn zeros(num_edges: usize) -> Self {
        EdgeFlows(vec![[0.0; 2]; num_edges])
    }

    pub fn from_vec(phi: Vec<[f64; 2]>) -> Self {
        EdgeFlows(phi)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, e: EdgeId) -> [f64; 2] {
        self.0[e.0]
    }

    pub fn as_slice(&self) -> &[[f64; 2]] {
        &self.0
    }

}

/// Sums path flows onto edges. Paths missing from `flows` count as zero.
pub fn edge_flows(flows: &FlowVector, paths: &PathSet, num_edges: usize) -> Result<EdgeFlows> {
    if flows.len() > paths.len() {
        return Err(Error::UnknownPath(PathId(paths.len())));
    }
    let mut phi = EdgeFlows::zeros(num_edges);
    for (f, path) in flows.0.iter().zip(&paths.paths) {
        for &e in &path.edges {
            let slot = phi.0.get_mut(e.0).ok_or(Error::UnknownEdge(e))?;
            slot[0] += f[0];
            slot[1] += f[1];
        }
    }
    Ok(phi)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct NegativeEntry {
    pub path: PathId,
    pub user_type: UserType,
    pub flow: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FeasibilityReport {
    /// `sum of path flows - demand` per commodity and type.
    pub residuals: Vec<[f64; 2]>,
    pub negatives: Vec<NegativeEntry>,
    /// Flow entries past the end of the path set.
    pub unknown_paths: usize,
    /// Largest `|residual| / max(1, demand)`.
    pub max_scaled_residual: f64,
    pub feasible: bool,
}

/// Default relative tolerance on demand conservation.
pub const FEASIBILITY_TOL: f64 = 1e-9;

pub fn validate_feasible(
    flows: &FlowVector,
    commodities: &[Commodity],
    paths: &PathSet,
) -> FeasibilityReport {
    validate_feasible_with_tol(flows, commodities, paths, FEASIBILITY_TOL)
}

/// As [`validate_feasible`] with passes iff `|residual| <= tol * max(1, demand)`.
pub fn validate_feasible_with_tol(
    flows: &FlowVector,
    commodities: &[Commodity],
    paths: &PathSet,
    tol: f64,
) -> FeasibilityReport {
    let mut residuals = Vec::with_capacity(commodities.len());
    let mut max_scaled: f64 = 0.0;
    for (k, c) in commodities.iter().enumerate() {
        let mut r = [-c.demand[0], -c.demand[1]];
        for p in paths.of_commodity(k) {
            let f = flows.0.get(p.0).copied().unwrap_or([0.0; 2]);
            r[0] += f[0];
            r[1] += f[1];
        }
        for (res, d) in r.iter().zip(c.demand) {
            max_scaled = max_scaled.max(res.abs() / d.max(1.0));
        }
        residuals.push(r);
    }
    let mut negatives = Vec::new();
    for (i, f) in flows.0.iter().enumerate() {
        for t in UserType::ALL {
            if f[t.index()] < 0.0 || f[t.index()].is_nan() {
                negatives.push(NegativeEntry {
                    path: PathId(i),
                    user_type: t,
                    flow: f[t.index()],
                });
            }
        }
    }
    let unknown_paths = flows.len().saturating_sub(paths.len());
    FeasibilityReport {
        feasible: max_scaled <= tol && negatives.is_empty() && unknown_paths == 0,
        residuals,
        negatives,
        unknown_paths,
        max_scaled_residual: max_scaled,
    }
}
