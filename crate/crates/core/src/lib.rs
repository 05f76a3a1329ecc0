//! Two-type heterogeneous routing games.
//!
//! A game is a directed graph, a list of commodities with a demand for each
//! of the two user types, and a pair of cost functions per edge that depend
//! on the flow of *both* types on that edge. This crate decides whether such
//! a game admits a potential, computes equilibria by minimizing it, builds
//! tolls that restore a potential when the costs are not symmetric, and
//! compares equilibria against the social optimum.
//!
//! The crate is `no_std` (it needs `alloc`). File formats and the command
//! line live in `hetroute-cli`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod costs;
pub mod efficiency;
pub mod equilibrium;
mod error;
mod frank_wolfe;
pub mod game;
pub mod generate;
pub mod network;
pub mod potential;
pub mod quadrature;
pub mod tolls;

pub use costs::{AffineEdgeCost, EdgeCostFunction, PlatooningParams, SmoothCost};
pub use efficiency::{price_of_anarchy, social_cost, solve_social_optimum, PoAReport, PoAResult};
pub use equilibrium::{solve_equilibrium, verify_nash, NashCertificate, SolveOptions};
pub use error::{Error, Result};
pub use game::Game;
pub use network::{
    Commodity, EdgeFlows, EdgeId, FlowVector, Graph, Path, PathId, PathSet, UserType, VertexId,
};
pub use potential::{check_potential_exists, potential_value, SymmetryReport, Verdict};
pub use tolls::TollScheme;
