mod common;

use hetroute_core::costs::{cost_jacobian, platooning_affine, AffineEdgeCost, FnCost};
use hetroute_core::generate::{random_game, CrossTerms, GameShape};
use hetroute_core::potential::{symmetry_residual, Mode, SamplingPlan};
use hetroute_core::tolls::{
    apply_tolls, distinguishable_tolls, indistinguishable_tolls, verify_toll_condition, Strategy,
    TotalFlowFn,
};
use hetroute_core::{
    check_potential_exists, social_cost, solve_equilibrium, Commodity, EdgeCostFunction, EdgeId,
    Game, Graph, PlatooningParams, SolveOptions, TollScheme, Verdict, VertexId,
};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

fn platoon(length: f64) -> PlatooningParams {
    PlatooningParams {
        length,
        velocity_slope: -0.5,
        free_flow_speed: 1.0,
        fuel_weight: 1.0,
        drag: 0.1,
        rolling: 0.5,
        platoon_slope: -0.2,
    }
}

/// The six-route network with platooning costs; segment lengths vary by edge.
fn platooning_game() -> Game {
    let graph = Graph::new(
        (0..9).map(VertexId),
        common::FIG1_EDGES
            .iter()
            .enumerate()
            .map(|(e, &(a, b))| (EdgeId(e), VertexId(a), VertexId(b))),
    )
    .unwrap();
    let costs = (0..12)
        .map(|e| platooning_affine(&platoon(1.0 + 0.25 * (e % 4) as f64)).unwrap().into())
        .collect();
    let commodities = vec![
        Commodity::new(VertexId(0), VertexId(1), [5.0, 1.0]),
        Commodity::new(VertexId(2), VertexId(3), [3.0, 3.0]),
        Commodity::new(VertexId(7), VertexId(8), [2.0, 4.0]),
    ];
    Game::new(graph, commodities, costs).unwrap()
}

fn plan(game: &Game) -> SamplingPlan {
    SamplingPlan::default_for(game, 5)
}

#[test]
fn platooning_game_is_asymmetric_by_the_drag_term() {
    let game = platooning_game();
    let report = check_potential_exists(&game, Mode::Pathwise, &plan(&game), None);
    assert_eq!(report.verdict, Verdict::Asymmetric);
    for (e, c) in game.costs().iter().enumerate() {
        let p = platoon(1.0 + 0.25 * (e % 4) as f64);
        assert!((symmetry_residual(c, [1.0, 1.0]) - p.asymmetry()).abs() < 1e-15);
    }
    let zero = verify_toll_condition(&game, &TollScheme::zero(12), &plan(&game), None);
    assert!(!zero.passed);
    assert!((zero.max_residual - 0.1).abs() < 1e-12);
}

#[test]
fn every_strategy_restores_a_potential() {
    let game = platooning_game();
    let schemes = [
        distinguishable_tolls(&game, Strategy::ChargeFirst).unwrap(),
        distinguishable_tolls(&game, Strategy::ChargeSecond).unwrap(),
        indistinguishable_tolls(&game, &[], &[]),
    ];
    for tolls in schemes {
        let report = verify_toll_condition(&game, &tolls, &plan(&game), None);
        assert!(report.passed && report.max_residual <= 1e-10, "{report:?}");
        let tolled = apply_tolls(&game, tolls);
        let verdict = check_potential_exists(&tolled, Mode::Edgewise, &plan(&tolled), None).verdict;
        assert_eq!(verdict, Verdict::EdgewiseSymmetric);
        let eq = solve_equilibrium(&tolled, &SolveOptions::default()).unwrap();
        assert!(eq.certificate.epsilon <= 1e-3, "{:?}", eq.certificate);
    }
}

#[test]
fn platooning_toll_coefficients() {
    let game = platooning_game();
    let r = platoon(1.0).asymmetry();
    assert!((r + 0.1).abs() < 1e-15);
    let first = distinguishable_tolls(&game, Strategy::ChargeFirst).unwrap();
    let second = distinguishable_tolls(&game, Strategy::ChargeSecond).unwrap();
    let shared = indistinguishable_tolls(&game, &[], &[]);
    let at = [2.0, 3.0];
    let close = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14;
    assert!(close(first.value(EdgeId(0), at), [r * 3.0, 0.0]));
    assert!(close(second.value(EdgeId(0), at), [0.0, -r * 2.0]));
    assert!(close(shared.value(EdgeId(0), at), [r * 3.0, r * 3.0]));
    assert!(shared.is_type_independent());
    assert!(!second.is_type_independent());
}

#[test]
fn opposite_sign_tolls_fail_the_condition() {
    // Charging the second type +r * phi1 instead of -r * phi1 doubles the asymmetry.
    let game = platooning_game();
    let r = platoon(1.0).asymmetry();
    let wrong = TollScheme::linear(
        (0..12)
            .map(|e| {
                let r = platoon(1.0 + 0.25 * (e % 4) as f64).asymmetry();
                AffineEdgeCost::unchecked([[0.0, 0.0], [r, 0.0]], [0.0; 2])
            })
            .collect(),
    );
    let report = verify_toll_condition(&game, &wrong, &plan(&game), None);
    assert!(!report.passed);
    assert!((report.edges[0].max_abs - 2.0 * r.abs()).abs() < 1e-12);
}

#[test]
fn symmetric_games_get_zero_or_constant_tolls() {
    let game = common::fig1_game();
    for s in [Strategy::ChargeFirst, Strategy::ChargeSecond] {
        let t = distinguishable_tolls(&game, s).unwrap();
        assert!(t.edges().iter().all(|e| e.is_zero_affine()));
    }
    let t = indistinguishable_tolls(&game, &[], &[3.0; 12]);
    assert_eq!(t.value(EdgeId(4), [1.0, 2.0]), [3.0, 3.0]);
    assert!(verify_toll_condition(&game, &t, &plan(&game), None).passed);
}

#[test]
fn smooth_costs_are_rejected_by_the_linear_constructions() {
    let cost = EdgeCostFunction::smooth(FnCost::new(|p: [f64; 2]| [p[0], p[1]]));
    let graph = Graph::new([VertexId(0), VertexId(1)], [(EdgeId(0), VertexId(0), VertexId(1))]).unwrap();
    let game = Game::new(graph, vec![Commodity::new(VertexId(0), VertexId(1), [1.0, 1.0])], vec![cost]).unwrap();
    assert_eq!(
        distinguishable_tolls(&game, Strategy::ChargeFirst).unwrap_err(),
        hetroute_core::Error::NotAffine(EdgeId(0))
    );
}

#[test]
fn tolls_count_in_social_cost_only_when_asked() {
    let game = platooning_game();
    let tolled = apply_tolls(&game, indistinguishable_tolls(&game, &[], &[0.5; 12]));
    let eq = solve_equilibrium(&tolled, &SolveOptions::default()).unwrap();
    let without = social_cost(&tolled, &eq.flows, false).unwrap();
    let with = social_cost(&tolled, &eq.flows, true).unwrap();
    let phi = tolled.edge_flows(&eq.flows).unwrap();
    let paid: f64 = (0..12)
        .map(|e| {
            let x = phi.get(EdgeId(e));
            let t = tolled.tolls().unwrap().value(EdgeId(e), x);
            x[0] * t[0] + x[1] * t[1]
        })
        .sum();
    assert!((with - without - paid).abs() <= 1e-9 * with.abs());
}

/// A cost with nonlinear cross terms and an analytic Jacobian.
fn curved_cost(k: f64) -> EdgeCostFunction {
    EdgeCostFunction::smooth(FnCost::with_jacobian(
        move |p: [f64; 2]| [p[0] + k * p[0] * p[1] + 1.0, p[0] * p[0] + 0.5 * p[1] * p[1] + 2.0],
        move |p: [f64; 2]| [[1.0 + k * p[1], k * p[0]], [2.0 * p[0], p[1]]],
    ))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn constructed_tolls_pass_on_random_affine_games(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = GameShape { cross: CrossTerms::Mixed(0.7), max_paths: 20, ..GameShape::default() };
        let game = random_game(&mut rng, &shape);
        for tolls in [
            distinguishable_tolls(&game, Strategy::ChargeFirst).unwrap(),
            distinguishable_tolls(&game, Strategy::ChargeSecond).unwrap(),
            indistinguishable_tolls(&game, &[], &[]),
        ] {
            let report = verify_toll_condition(&game, &tolls, &plan(&game), None);
            prop_assert!(report.max_residual <= 1e-10);
            let tolled = apply_tolls(&game, tolls);
            prop_assert_eq!(
                check_potential_exists(&tolled, Mode::Pathwise, &plan(&tolled), None).verdict,
                Verdict::EdgewiseSymmetric
            );
        }
    }

    #[test]
    fn linear_tolls_scale_with_the_asymmetry(
        a12 in 0.0f64..2.0, a21 in 0.0f64..2.0, diag in 0.5f64..3.0,
    ) {
        let graph = Graph::new([VertexId(0), VertexId(1)], [(EdgeId(0), VertexId(0), VertexId(1))]).unwrap();
        let make = |lo: f64, hi: f64| {
            let c: EdgeCostFunction = AffineEdgeCost::unchecked([[diag, lo], [hi, diag]], [1.0, 1.0]).into();
            Game::new(graph.clone(), vec![Commodity::new(VertexId(0), VertexId(1), [1.0, 1.0])], vec![c]).unwrap()
        };
        // Same a12, double the difference a21 - a12.
        let once = make(a12, a21);
        let twice = make(a12, a12 + 2.0 * (a21 - a12));
        let coef = |g: &Game, s: Option<Strategy>| {
            let t = match s {
                Some(s) => distinguishable_tolls(g, s).unwrap(),
                None => indistinguishable_tolls(g, &[], &[]),
            };
            t.edge(EdgeId(0)).unwrap().as_affine().unwrap().alpha
        };
        for s in [Some(Strategy::ChargeFirst), Some(Strategy::ChargeSecond), None] {
            let (a, b) = (coef(&once, s), coef(&twice, s));
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((b[i][j] - 2.0 * a[i][j]).abs() <= 1e-12 * (1.0 + a[i][j].abs()));
                }
            }
        }
    }

    #[test]
    fn integrated_toll_identity(k in 0.0f64..3.0, psi_slope in 0.0f64..1.0, c in 0.0f64..2.0, seed in any::<u64>()) {
        let cost = curved_cost(k);
        let graph = Graph::new([VertexId(0), VertexId(1)], [(EdgeId(0), VertexId(0), VertexId(1))]).unwrap();
        let game = Game::new(graph, vec![Commodity::new(VertexId(0), VertexId(1), [2.0, 2.0])], vec![cost.clone()]).unwrap();
        let psi = TotalFlowFn::Smooth(std::sync::Arc::new(move |s: f64| psi_slope * s * s));
        let tolls = indistinguishable_tolls(&game, &[psi], &[c]);
        let toll = tolls.edge(EdgeId(0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let x = [
                hetroute_core::generate::uniform(&mut rng, 0.1, 4.0),
                hetroute_core::generate::uniform(&mut rng, 0.1, 4.0),
            ];
            let jt = cost_jacobian(toll, x, None);
            let jc = cost_jacobian(&cost, x, None);
            let lhs = jt[0][1] - jt[0][0];
            let rhs = jc[1][0] - jc[0][1];
            prop_assert!((lhs - rhs).abs() <= 1e-7, "{lhs} vs {rhs}");
            let v = toll.value(x);
            prop_assert_eq!(v[0], v[1]);
        }
        prop_assert!(verify_toll_condition(&game, &tolls, &plan(&game), Some(1e-7)).passed);
    }
}
