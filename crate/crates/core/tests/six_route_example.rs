mod common;

use common::{fig1_game, path_index, TABLE2};
use hetroute_core::efficiency::theorem3_applicable;
use hetroute_core::equilibrium::verify_nash_with_tolerance;
use hetroute_core::potential::Mode;
use hetroute_core::potential::SamplingPlan;
use hetroute_core::{
    check_potential_exists, price_of_anarchy, solve_equilibrium, FlowVector, SolveOptions, Verdict,
};

#[test]
fn equilibrium_costs_match_published_table() {
    let game = fig1_game();
    let eq = solve_equilibrium(&game, &SolveOptions::default()).unwrap();
    assert!(eq.converged);
    assert!(eq.certificate.epsilon <= 1e-3, "{:?}", eq.certificate);
    let costs = game.path_costs(&eq.flows).unwrap();
    for (edges, _, _, c, t) in TABLE2 {
        let p = path_index(&game, edges);
        assert!((costs[p][0] - c).abs() <= 0.05, "{edges:?} car {}", costs[p][0]);
        assert!((costs[p][1] - t).abs() <= 0.05, "{edges:?} truck {}", costs[p][1]);
    }
    println!("iterations {} V {}", eq.iterations, eq.potential);
}

#[test]
fn price_of_anarchy_matches_published_ratio() {
    let game = fig1_game();
    let poa = price_of_anarchy(&game, &SolveOptions::default(), false).unwrap();
    let r = poa.report;
    assert!((r.ratio - 1.0137).abs() <= 0.005, "{r:?}");
    assert!(r.bound_applicable);
    assert!(theorem3_applicable(&game).unwrap().applicable);
}

#[test]
fn published_flows_are_nearly_an_equilibrium() {
    let game = fig1_game();
    let mut flows = vec![[0.0; 2]; game.num_paths()];
    for (edges, c, t, _, _) in TABLE2 {
        flows[path_index(&game, edges)] = [c, t];
    }
    let cert = verify_nash_with_tolerance(&game, &FlowVector::from_vec(flows), None, 1e-2).unwrap();
    assert!(cert.epsilon <= 0.05, "{cert:?}");
}

#[test]
fn example_is_edgewise_symmetric() {
    let game = fig1_game();
    let plan = SamplingPlan::default_for(&game, 0);
    let report = check_potential_exists(&game, Mode::Edgewise, &plan, None);
    assert_eq!(report.verdict, Verdict::EdgewiseSymmetric);
}
