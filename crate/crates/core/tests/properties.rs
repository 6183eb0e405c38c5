use proptest::prelude::*;

use ascl::constitutive::{apply_drift, build_symbol_table, MultiplierSpec};
use ascl::diagnostics::{analyticity_radius_estimate, smallness_condition};
use ascl::io::checkpoint::{decode_checkpoint, encode_checkpoint};
use ascl::io::csv::format_float;
use ascl::spectral::generate::{analytic_decay, random_band, ModeFilter};
use ascl::spectral::{
    advect, gevrey_norm, h1_inner, l2_inner, l2_norm, lambda_power, DealiasRule, GridSpec, SpectralField,
};
use ascl::tangent::{linearized_rhs, reorthonormalize, InnerProduct, TangentBundle};
use ascl::timestepper::{SimulationState, SolverConfig};

fn grid2() -> GridSpec {
    GridSpec::new(2, 16).unwrap()
}

fn band(g: GridSpec, kmax: f64, seed: u64) -> SpectralField {
    random_band(g, 1.0, kmax, 1.0, seed, ModeFilter::default()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fft_round_trip(seed in 0u64..10_000, kmax in 2.0f64..7.0) {
        let f = band(grid2(), kmax, seed);
        let back = SpectralField::from_physical(grid2(), &f.to_physical().unwrap()).unwrap();
        let err = l2_norm(&back.sub(&f).unwrap());
        prop_assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn parseval(seed in 0u64..10_000) {
        let f = band(grid2(), 7.0, seed);
        let p = f.to_physical().unwrap();
        let mean_sq = p.iter().map(|x| x * x).sum::<f64>() / p.len() as f64;
        prop_assert!(close(mean_sq, l2_norm(&f).powi(2), 1e-13));
    }

    #[test]
    fn lambda_powers_compose(seed in 0u64..10_000, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let f = band(grid2(), 7.0, seed);
        let lhs = lambda_power(&lambda_power(&f, a), b);
        let rhs = lambda_power(&f, a + b);
        prop_assert!(l2_norm(&lhs.sub(&rhs).unwrap()) <= 1e-12 * l2_norm(&rhs));
    }

    #[test]
    fn gevrey_norm_grows_with_tau(seed in 0u64..10_000, t1 in 0.0f64..1.0, dt in 0.0f64..1.0, r in 0.0f64..2.0) {
        let f = band(grid2(), 7.0, seed);
        let a = gevrey_norm(&f, r, t1, 1.0).unwrap();
        let b = gevrey_norm(&f, r, t1 + dt, 1.0).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-14));
    }

    /// ⟨θ, u·∇θ⟩ = 0 for in-band θ and divergence-free u.
    #[test]
    fn transport_is_energy_neutral(seed in 0u64..10_000, other in 0u64..10_000) {
        let g = grid2();
        let table = build_symbol_table(&MultiplierSpec::Sqg, g).unwrap();
        let k = g.dealias_cutoff() as f64;
        let theta = band(g, k, seed);
        let u = apply_drift(&table, &band(g, k, other)).unwrap();
        let adv = advect(&u, &theta, DealiasRule::TwoThirds).unwrap();
        let scale = l2_norm(&theta) * l2_norm(&adv);
        prop_assert!(l2_inner(&theta, &adv).unwrap().abs() <= 1e-13 * scale.max(1e-300));
    }

    #[test]
    fn linearization_is_linear(seed in 0u64..10_000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = grid2();
        let cfg = SolverConfig::new(MultiplierSpec::Sqg, 0.1, 1.5);
        let table = build_symbol_table(&cfg.drift, g).unwrap();
        let theta = band(g, 7.0, seed);
        let (p1, p2) = (band(g, 7.0, seed + 1), band(g, 7.0, seed + 2));
        let combo = p1.lin_comb(a, &p2, b).unwrap();
        let lhs = linearized_rhs(&theta, &combo, &cfg, &table).unwrap();
        let rhs = linearized_rhs(&theta, &p1, &cfg, &table)
            .unwrap()
            .lin_comb(a, &linearized_rhs(&theta, &p2, &cfg, &table).unwrap(), b)
            .unwrap();
        prop_assert!(l2_norm(&lhs.sub(&rhs).unwrap()) <= 1e-12 * l2_norm(&lhs).max(1.0));
    }

    /// The QR normalizers multiply to the square root of the Gram determinant.
    #[test]
    fn qr_normalizers_match_gram_determinant(seed in 0u64..10_000) {
        let g = grid2();
        let (a, b) = (band(g, 7.0, seed), band(g, 7.0, seed + 9));
        let bundle = TangentBundle::new(
            SimulationState::initial(SpectralField::zeros(g)),
            vec![a.clone(), b.clone()],
            InnerProduct::H1,
        )
        .unwrap();
        let (q, logs) = reorthonormalize(&bundle).unwrap();
        let (aa, bb, ab) = (h1_inner(&a, &a).unwrap(), h1_inner(&b, &b).unwrap(), h1_inner(&a, &b).unwrap());
        let gram = aa * bb - ab * ab;
        prop_assert!(close(logs.iter().sum::<f64>(), 0.5 * gram.ln(), 1e-10));
        let cross = h1_inner(&q.tangents[0], &q.tangents[1]).unwrap();
        prop_assert!(cross.abs() < 1e-12);
    }

    #[test]
    fn radius_estimate_is_scale_invariant(seed in 0u64..10_000, tau in 0.3f64..1.0, c in 1e-3f64..1e3) {
        let g = GridSpec::new(2, 64).unwrap();
        let f = analytic_decay(g, tau, 1.0, seed, ModeFilter::default()).unwrap();
        let a = analyticity_radius_estimate(&f, None).unwrap();
        let b = analyticity_radius_estimate(&f.scaled(c), None).unwrap();
        prop_assert!((a.tau_hat - b.tau_hat).abs() < 1e-9, "{} vs {}", a.tau_hat, b.tau_hat);
    }

    #[test]
    fn smallness_beta_and_monotonicity(seed in 0u64..10_000, gamma in 0.5f64..2.0, extra in 0.1f64..2.0, grow in 1.0f64..3.0) {
        let g = grid2();
        let theta = band(g, 5.0, seed);
        let s = band(g, 3.0, seed + 5).scaled(0.1);
        let alpha = 2.0 + (1.0 - gamma) + extra;
        let r = smallness_condition(&theta, &s, 0.3, gamma, alpha).unwrap();
        let beta = 1.0 - (2.0 + (1.0 - gamma)) / alpha;
        prop_assert!((r.beta - beta).abs() < 1e-15);
        let big = smallness_condition(&theta.scaled(grow), &s.scaled(grow), 0.3, gamma, alpha).unwrap();
        prop_assert!(big.lhs1 >= r.lhs1 * (1.0 - 1e-14) && big.lhs2 >= r.lhs2 * (1.0 - 1e-14));
    }

    #[test]
    fn checkpoint_round_trip(seed in 0u64..10_000, t in 0.0f64..1e3, step in 0u64..1_000_000, three in any::<bool>()) {
        let g = if three { GridSpec::new(3, 8).unwrap() } else { grid2() };
        let theta = random_band(g, 1.0, 6.0, 2.0, seed, ModeFilter::default()).unwrap();
        let state = SimulationState { t, theta, step_count: step };
        let cfg = SolverConfig::new(MultiplierSpec::Sqg, 0.1, 1.0);
        let bytes = encode_checkpoint(&state, &cfg);
        let (_, back) = decode_checkpoint(&bytes).unwrap();
        prop_assert_eq!(back.theta.coefficient_bytes(), state.theta.coefficient_bytes());
        prop_assert_eq!(back.t.to_bits(), t.to_bits());
        prop_assert_eq!(back.step_count, step);
    }

    #[test]
    fn csv_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(format_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}
