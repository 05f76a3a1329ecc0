use hetroute_core::costs::{AffineEdgeCost, FnCost};
use hetroute_core::efficiency::social_cost;
use hetroute_core::generate::{random_feasible_flows, random_game, CrossTerms, GameShape};
use hetroute_core::potential::{edge_potential, potential_gradient, potential_gradient_audit};
use hetroute_core::quadrature::integrate;
use hetroute_core::{potential_value, EdgeCostFunction, FlowVector, Game, PathId, UserType};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

/// Edge potential by the three-integral definition, with an inner
/// finite-difference derivative of the first cost.
fn three_integral(f: &EdgeCostFunction, phi: [f64; 2]) -> f64 {
    let [x, y] = phi;
    let first = integrate(|u| f.value([u, y])[0], 0.0, x, 1e-13);
    let second = integrate(|u| f.value([x, u])[1], 0.0, y, 1e-13);
    let cross = integrate(
        |u2| {
            integrate(
                |u1| {
                    let h = 1e-4;
                    (f.value([u1, u2 + h])[0] - f.value([u1, (u2 - h).max(0.0)])[0])
                        / (u2 + h - (u2 - h).max(0.0))
                },
                0.0,
                x,
                1e-11,
            )
        },
        0.0,
        y,
        1e-11,
    );
    first + second - cross
}

/// Utility of type `t`: each of its edges integrates its own cost along its own flow.
fn utility(game: &Game, flows: &FlowVector, t: UserType) -> f64 {
    let phi = game.edge_flows(flows).unwrap();
    game.effective_costs()
        .iter()
        .zip(phi.as_slice())
        .map(|(f, &x)| {
            let i = t.index();
            integrate(
                |u| {
                    let mut at = x;
                    at[i] = u;
                    f.value(at)[i]
                },
                0.0,
                x[i],
                1e-13,
            )
        })
        .sum()
}

fn smooth_symmetric() -> EdgeCostFunction {
    // Gradient of W = x^2 y / 2 + x^3 / 3 + y^2 + x + 2 y, so symmetric.
    EdgeCostFunction::smooth(FnCost::with_jacobian(
        |p: [f64; 2]| [p[0] * p[1] + p[0] * p[0] + 1.0, 0.5 * p[0] * p[0] + 2.0 * p[1] + 2.0],
        |p: [f64; 2]| [[p[1] + 2.0 * p[0], p[0]], [p[0], 2.0]],
    ))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_three_integrals(
        a11 in 0.0f64..3.0, a12 in 0.0f64..2.0, a21 in 0.0f64..2.0, a22 in 0.0f64..3.0,
        b1 in 0.0f64..5.0, b2 in 0.0f64..5.0, x in 0.0f64..4.0, y in 0.0f64..4.0,
    ) {
        let f: EdgeCostFunction = AffineEdgeCost::unchecked([[a11, a12], [a21, a22]], [b1, b2]).into();
        let closed = edge_potential(&f, [x, y]);
        let quad = three_integral(&f, [x, y]);
        prop_assert!((closed - quad).abs() <= 1e-9 * closed.abs().max(1.0), "{closed} vs {quad}");
    }

    #[test]
    fn reduced_quadrature_matches_three_integrals(x in 0.0f64..3.0, y in 0.0f64..3.0) {
        let f = smooth_symmetric();
        let reduced = edge_potential(&f, [x, y]);
        let full = three_integral(&f, [x, y]);
        prop_assert!((reduced - full).abs() <= 1e-9 * full.abs().max(1.0), "{reduced} vs {full}");
    }

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = GameShape { cross: CrossTerms::Symmetric, max_paths: 20, ..GameShape::default() };
        let game = random_game(&mut rng, &shape);
        let flows = random_feasible_flows(&mut rng, &game);
        let exact = potential_gradient(&game, &flows).unwrap();
        let audit = potential_gradient_audit(&game, &flows, 1e-5).unwrap();
        for (e, a) in exact.iter().zip(&audit) {
            for t in 0..2 {
                prop_assert!((e[t] - a[t]).abs() <= 1e-6 * e[t].abs().max(1.0), "{e:?} vs {a:?}");
            }
        }
    }

    #[test]
    fn potential_differences_equal_utility_differences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = GameShape { cross: CrossTerms::Symmetric, max_paths: 20, ..GameShape::default() };
        let game = random_game(&mut rng, &shape);
        let a = random_feasible_flows(&mut rng, &game);
        let other = random_feasible_flows(&mut rng, &game);
        for t in UserType::ALL {
            // Only type t deviates.
            let mut b = a.clone();
            for p in 0..game.num_paths() {
                b.set(PathId(p), t, other.get(PathId(p), t));
            }
            let dv = potential_value(&game, &a).unwrap() - potential_value(&game, &b).unwrap();
            let du = utility(&game, &a, t) - utility(&game, &b, t);
            let scale = potential_value(&game, &a).unwrap().abs().max(1.0);
            prop_assert!((dv - du).abs() <= 1e-7 * scale, "{dv} vs {du}");
        }
    }

    #[test]
    fn potential_is_half_cost_plus_half_offsets(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = GameShape { cross: CrossTerms::Symmetric, max_paths: 20, ..GameShape::default() };
        let game = random_game(&mut rng, &shape);
        let flows = random_feasible_flows(&mut rng, &game);
        let v = potential_value(&game, &flows).unwrap();
        let c = social_cost(&game, &flows, false).unwrap();
        let phi = game.edge_flows(&flows).unwrap();
        let offsets: f64 = game.costs().iter().zip(phi.as_slice()).map(|(f, x)| {
            let b = f.as_affine().unwrap().beta;
            b[0] * x[0] + b[1] * x[1]
        }).sum();
        let want = 0.5 * c + 0.5 * offsets;
        prop_assert!((v - want).abs() <= 1e-9 * v.abs().max(1.0));
    }
}

#[test]
fn gradient_at_zero_flow_is_path_offsets() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let game = random_game(&mut rng, &GameShape::default());
    let grad = potential_gradient(&game, &FlowVector::zeros(game.num_paths())).unwrap();
    for (p, g) in game.paths().paths().iter().zip(&grad) {
        for t in 0..2 {
            let want: f64 = p.edges.iter().map(|e| game.costs()[e.0].as_affine().unwrap().beta[t]).sum();
            assert!((g[t] - want).abs() <= 1e-12 * want.max(1.0));
        }
    }
    assert_eq!(potential_value(&game, &FlowVector::zeros(game.num_paths())).unwrap(), 0.0);
}
