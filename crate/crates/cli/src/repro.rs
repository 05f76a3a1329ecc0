//! Reproduction of the six-route example: equilibrium path costs, the Nash
//! certificate and the price of anarchy, compared against published values.

use hetroute_core::efficiency::theorem3_applicable;
use hetroute_core::network::validate_feasible;
use hetroute_core::{price_of_anarchy, Game};
use serde::Serialize;

use crate::commands::{join_edges, path_rows, Report};
use crate::error::CliError;
use crate::format::GameFile;
use crate::report::{sig, Fields, Table};

/// The embedded network, demands and path lists.
pub const FIXTURE: &str = include_str!("../fixtures/fig1.game");

/// Published equilibrium rows keyed by edge sequence:
/// (edges, car flow, truck flow, car cost, truck cost).
pub const EXPECTED: [(&[usize], f64, f64, f64, f64); 9] = [
    (&[1], 4.97, 0.79, 12.26, 8.35),
    (&[2, 4, 3], 0.0, 0.0, 13.18, 10.29),
    (&[2, 7, 5], 0.03, 0.21, 12.26, 8.35),
    (&[9, 7, 8], 1.04, 0.06, 13.92, 11.22),
    (&[9, 4, 6], 0.04, 0.0, 13.92, 13.98),
    (&[10], 1.92, 2.94, 13.92, 11.22),
    (&[11, 9, 7, 8, 0], 0.01, 0.0, 28.02, 31.73),
    (&[11, 9, 4, 6, 0], 1.10, 0.0, 28.02, 34.48),
    (&[11, 10, 0], 0.88, 4.00, 28.02, 31.72),
];

pub const EXPECTED_RATIO: f64 = 1.0137;
/// The published costs carry two decimals.
pub const COST_TOL: f64 = 0.05;
pub const RATIO_TOL: f64 = 0.005;
pub const EPSILON_TOL: f64 = 1e-3;
/// Relative tolerance on demand conservation of the computed flows.
pub const FEASIBILITY_TOL: f64 = 1e-9;

pub fn fixture_game() -> Game {
    GameFile::parse(FIXTURE)
        .expect("embedded fixture parses")
        .build(false)
        .expect("embedded fixture is valid")
        .game
}

#[derive(Debug, Serialize)]
pub struct CostRow {
    pub path_id: usize,
    pub edges: Vec<usize>,
    pub expected: [f64; 2],
    pub computed: [f64; 2],
    pub flow: [f64; 2],
    pub max_abs_diff: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub target: String,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct ReproReport {
    pub costs: Vec<CostRow>,
    pub checks: Vec<Check>,
    pub potential: f64,
    pub iterations: usize,
    pub passed: bool,
}

impl Report for ReproReport {
    fn render(&self) -> String {
        let mut t = Table::new([
            "edges",
            "car cost",
            "expected",
            "truck cost",
            "expected",
            "car flow",
            "truck flow",
            "ok",
        ]);
        for r in &self.costs {
            t.row([
                join_edges(&r.edges),
                sig(r.computed[0]),
                sig(r.expected[0]),
                sig(r.computed[1]),
                sig(r.expected[1]),
                sig(r.flow[0]),
                sig(r.flow[1]),
                ok(r.passed).into(),
            ]);
        }
        let mut c = Table::new(["check", "value", "target", "ok"]);
        for k in &self.checks {
            c.row([k.name.to_string(), sig(k.value), k.target.clone(), ok(k.passed).into()]);
        }
        let mut f = Fields::new();
        f.add("potential", sig(self.potential))
            .add("iterations", self.iterations.to_string());
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("{}\n{}\n{}\n{verdict}\n", t.render(), c.render(), f.render())
    }

    fn passed(&self) -> bool {
        self.passed
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "NO"
    }
}

pub fn run() -> Result<ReproReport, CliError> {
    let loaded = GameFile::parse(FIXTURE)
        .expect("embedded fixture parses")
        .build(false)?;
    let game = &loaded.game;
    let result = price_of_anarchy(game, &loaded.solver, false)?;
    let eq = &result.equilibrium;
    let rows = path_rows(game, &eq.flows)?;

    let mut costs = Vec::with_capacity(EXPECTED.len());
    for (edges, _, _, car, truck) in EXPECTED {
        let row = rows
            .iter()
            .find(|r| r.edges == edges)
            .ok_or_else(|| CliError::Failed(format!("fixture lacks path {}", join_edges(edges))))?;
        let diff = (row.cost[0] - car).abs().max((row.cost[1] - truck).abs());
        costs.push(CostRow {
            path_id: row.path_id,
            edges: edges.to_vec(),
            expected: [car, truck],
            computed: row.cost,
            flow: row.flow,
            max_abs_diff: diff,
            passed: diff <= COST_TOL,
        });
    }

    let feasibility = validate_feasible(&eq.flows, game.commodities(), game.paths());
    let ratio = result.report.ratio;
    let bound = theorem3_applicable(game)?;
    let checks = vec![
        Check {
            name: "max path cost difference",
            value: costs.iter().fold(0.0, |m, r| m.max(r.max_abs_diff)),
            target: format!("<= {}", sig(COST_TOL)),
            passed: costs.iter().all(|r| r.passed),
        },
        Check {
            name: "nash epsilon",
            value: eq.certificate.epsilon,
            target: format!("<= {}", sig(EPSILON_TOL)),
            passed: eq.certificate.epsilon <= EPSILON_TOL,
        },
        Check {
            name: "demand residual",
            value: feasibility.max_scaled_residual,
            target: format!("<= {}", sig(FEASIBILITY_TOL)),
            passed: feasibility.feasible,
        },
        Check {
            name: "price of anarchy",
            value: ratio,
            target: format!("{} +/- {}", sig(EXPECTED_RATIO), sig(RATIO_TOL)),
            passed: (ratio - EXPECTED_RATIO).abs() <= RATIO_TOL,
        },
        Check {
            name: "affine bound applies",
            value: if bound.applicable { 1.0 } else { 0.0 },
            target: "1".into(),
            passed: bound.applicable,
        },
        Check {
            name: "ratio within bound",
            value: ratio,
            target: "<= 2".into(),
            passed: ratio <= 2.0,
        },
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(ReproReport {
        costs,
        checks,
        potential: eq.potential,
        iterations: eq.iterations,
        passed,
    })
}
