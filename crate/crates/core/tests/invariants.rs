use proptest::prelude::*;

use rotwave::dispersion::mu_of_lambda;
use rotwave::grid::chebyshev_grid;
use rotwave::laminar::build_laminar;
use rotwave::sturm::{solve_v1, solve_v2, wronskian_spread};
use rotwave::waves::{assemble_residual, Discretization, QBasis};
use rotwave::{FluidParams, Problem, VorticitySpec};

fn spec_strategy() -> impl Strategy<Value = VorticitySpec> {
    prop_oneof![
        Just(VorticitySpec::Zero),
        (-2.0..2.0f64).prop_map(|c| VorticitySpec::Constant { c }),
        (-0.9..-0.1f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(b, v1, v2)| VorticitySpec::Piecewise {
            breakpoints: vec![b],
            values: vec![v1, v2],
        }),
        (0.1..2.0f64, 1.1..1.8f64).prop_map(|(delta, k)| VorticitySpec::PowerLaw { delta, k, r: 1.6 }),
        prop::collection::vec(-2.0..2.0f64, 5).prop_map(|values| VorticitySpec::Tabulated {
            nodes: vec![-1.0, -0.75, -0.5, -0.25, 0.0],
            values,
            order: 1,
        }),
    ]
}

fn problem(spec: VorticitySpec) -> Problem {
    Problem::new(FluidParams::new(-1.0, 9.8, 1.0, 2.0).unwrap(), spec).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn primitive_matches_quadrature(spec in spec_strategy(), t in 0.01..0.99f64) {
        let pr = problem(spec);
        let p = -t;
        let closed = pr.model.primitive(p);
        let quad = pr.model.primitive_quadrature(p).unwrap();
        prop_assert!((closed - quad).abs() < 1e-9 * (1.0 + closed.abs()));
        prop_assert!(closed <= pr.model.gamma_max() + 1e-12);
    }

    #[test]
    fn laminar_height_increases(spec in spec_strategy(), gap in 0.1..20.0f64) {
        let pr = problem(spec);
        let lam = build_laminar(&pr, pr.lambda_min() + gap, &chebyshev_grid(-1.0, 65)).unwrap();
        prop_assert!(lam.h_values.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(lam.a_values.iter().all(|a| *a > 0.0));
        prop_assert!((lam.q - (lam.lambda + 2.0 * 9.8 * lam.d)).abs() < 1e-12 * lam.q);
    }

    #[test]
    fn wronskian_is_constant(spec in spec_strategy(), gap in 0.2..10.0f64, log_mu in -1.0..4.0f64) {
        let pr = problem(spec);
        let lambda = pr.lambda_min() + gap;
        let mu = 10f64.powf(log_mu);
        let grid = chebyshev_grid(-1.0, 129);
        let v1 = solve_v1(&pr, lambda, mu, &grid).unwrap();
        let v2 = solve_v2(&pr, lambda, mu, &grid).unwrap();
        prop_assert!(wronskian_spread(&v1, &v2) < 1e-8);
    }

    #[test]
    fn laminar_flows_solve_the_discrete_problem(spec in spec_strategy(), gap in 0.1..20.0f64, n in 1u32..4) {
        let pr = problem(spec);
        let disc = Discretization::new(8, 65);
        let h = vec![vec![0.0; 8]; 65];
        let r = assemble_residual(&pr, pr.lambda_min() + gap, &h, n, &disc).unwrap();
        prop_assert!(r.max_norm() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn dispersion_map_increases(c in -1.5..1.5f64, gap in 0.5..5.0f64) {
        let pr = problem(VorticitySpec::Constant { c });
        let l0 = rotwave::dispersion::lambda_threshold(&pr).unwrap().lambda0;
        let m1 = mu_of_lambda(&pr, l0 + gap).unwrap();
        let m2 = mu_of_lambda(&pr, l0 + gap * 1.5).unwrap();
        prop_assert!(m2 > m1 && m1 > 0.0);
    }

    #[test]
    fn helmholtz_inverse(n in 1u32..5, m in 4usize..24, seed in 0u64..1000) {
        let b = QBasis::new(n, m);
        let f = nalgebra::DVector::from_fn(m, |i, _| ((i as u64 * 7919 + seed) % 101) as f64 / 50.0 - 1.0);
        let g = &b.hinv * &f;
        let back = &g - &b.dqq_even * &g;
        prop_assert!((back - f).amax() < 1e-10);
    }
}
