use blockcoh::blockcs::{measure, one_step_group_threshold};
use blockcoh::bounds::{welch_block_lower, BoundInputs};
use blockcoh::flipping::{flip, flip_signs, FlipConfig, NormVariant};
use blockcoh::format::{read_bfm, write_bfm};
use blockcoh::frame::{chordal_distance, column_coherence, nu1, spectral_distance};
use blockcoh::random::sample_subspace;
use blockcoh::rng::{gaussian_matrix, stream};
use blockcoh::special::reg_inc_beta;
use blockcoh::{BlockFrame, Field, Frame, Matrix, C64};
use proptest::prelude::*;

fn random_frame(n: usize, r: usize, m: usize, complex: bool, seed: u64) -> Frame {
    let mut s = stream(seed, &[]);
    let blocks: Vec<Matrix> = (0..m)
        .map(|_| gaussian_matrix::<f64, _>(n, r, complex, &mut s).orthonormalize().unwrap())
        .collect();
    BlockFrame::from_blocks(&blocks, if complex { Field::Complex } else { Field::Real }).unwrap()
}

fn frame_params() -> impl Strategy<Value = (usize, usize, usize, bool, u64)> {
    (2usize..10, 1usize..4, 2usize..12, any::<bool>(), any::<u64>())
        .prop_filter("r < n", |(n, r, ..)| r < n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flipping_keeps_every_cross_gram_norm((n, r, m, complex, seed) in frame_params()) {
        let a = random_frame(n, r, m, complex, seed);
        for variant in [NormVariant::Spectral, NormVariant::Frobenius] {
            let res = flip(&a, &FlipConfig { norm_variant: variant, ..FlipConfig::default() }).unwrap();
            prop_assert_eq!(res.signs[0], 1);
            prop_assert_eq!(a.gram_map(), res.flipped.gram_map());
            prop_assert_eq!(res.mu_before, res.mu_after);
        }
    }

    #[test]
    fn greedy_step_takes_the_smaller_norm((n, r, m, complex, seed) in frame_params()) {
        let a = random_frame(n, r, m, complex, seed);
        for variant in [NormVariant::Spectral, NormVariant::Frobenius] {
            let (_, steps) = flip_signs(&a, variant).unwrap();
            prop_assert_eq!(steps.len(), m - 1);
            for s in steps {
                prop_assert!(s.after <= s.plus + 1e-12 && s.after <= s.minus + 1e-12);
                prop_assert!(s.after == s.plus || s.after == s.minus);
            }
        }
    }

    #[test]
    fn frobenius_flipping_obeys_parallelogram_bound((n, r, m, complex, seed) in frame_params()) {
        let a = random_frame(n, r, m, complex, seed);
        let (signs, _) = flip_signs(&a, NormVariant::Frobenius).unwrap();
        let sum = a.signed_block_sum(Some(&signs));
        let fro_sq: f64 = sum.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!(fro_sq <= (m * r) as f64 * (1.0 + 1e-12));
    }

    #[test]
    fn average_coherence_never_exceeds_worst_case((n, r, m, complex, seed) in frame_params()) {
        let a = random_frame(n, r, m, complex, seed);
        let (mu, nu) = (a.mu().unwrap(), a.nu().unwrap());
        prop_assert!(nu <= mu + 1e-12);
        prop_assert!(mu <= 1.0 + 1e-12);
        if m * r > n {
            let w = welch_block_lower(&BoundInputs::new(m, n, r, a.field()).unwrap()).unwrap();
            prop_assert!(mu >= w - 1e-9);
        }
    }

    #[test]
    fn distances_and_norms_agree((n, r, _m, complex, seed) in frame_params()) {
        let a = random_frame(n, r, 2, complex, seed);
        let (b0, b1) = (a.block(0), a.block(1));
        let c = b0.adjoint_mul(&b1).unwrap();
        let (spec, fro) = (c.spectral_norm(), c.frobenius_norm());
        let ds = spectral_distance(&b0, &b1).unwrap();
        let dc = chordal_distance(&b0, &b1).unwrap();
        prop_assert!((ds * ds + spec * spec - 1.0).abs() < 1e-12);
        prop_assert!((dc * dc - (r as f64 - fro * fro)).abs() < 1e-12);
        prop_assert!(fro * fro <= r as f64 * spec * spec + 1e-12);
    }

    #[test]
    fn bfm_round_trip_is_exact((n, r, m, complex, seed) in frame_params()) {
        let a = random_frame(n, r, m, complex, seed);
        let text = write_bfm(&a);
        let b = read_bfm(&text).unwrap();
        prop_assert_eq!(a.matrix().data(), b.matrix().data());
        prop_assert_eq!(write_bfm(&b), text);
    }

    #[test]
    fn kronecker_with_unitary_transfers_column_coherence(
        n in 2usize..6, extra in 1usize..6, r in 1usize..4, seed in any::<u64>()
    ) {
        let m = n + extra;
        let mut s = stream(seed, &[]);
        let mut p: Matrix = gaussian_matrix(n, m, true, &mut s);
        for j in 0..m {
            let norm = p.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for i in 0..n {
                p[(i, j)] /= norm;
            }
        }
        let q = gaussian_matrix::<f64, _>(r, r, true, &mut s).orthonormalize().unwrap();
        let a = BlockFrame::new(p.kronecker(&q).unwrap(), r, Field::Complex);
        prop_assume!(a.is_ok());
        let a = a.unwrap();
        prop_assert!((a.nu().unwrap() - nu1(&p).unwrap()).abs() < 1e-10);
        prop_assert!((a.mu().unwrap() - column_coherence(&p).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn threshold_support_is_scale_invariant((n, r, m, complex, seed) in frame_params(), k in 1usize..4, c in 0.001f64..1000.0) {
        let a = random_frame(n, r, m, complex, seed);
        let k = k.min(m);
        let mut s = stream(seed, &[1]);
        let x: Vec<C64> = gaussian_matrix::<f64, _>(m * r, 1, complex, &mut s).into_data();
        let y = measure(&a, &x).unwrap();
        let scaled: Vec<C64> = y.iter().map(|z| z * c).collect();
        prop_assert_eq!(
            one_step_group_threshold(&a, &y, k).unwrap(),
            one_step_group_threshold(&a, &scaled, k).unwrap()
        );
    }

    #[test]
    fn sampled_blocks_are_orthonormal(n in 2usize..30, r in 1usize..10, seed in any::<u64>()) {
        prop_assume!(r <= n);
        let u = sample_subspace::<f64, _>(n, r, &mut stream(seed, &[])).unwrap();
        let g = u.adjoint_mul(&u).unwrap();
        let dev = g.sub(&Matrix::identity(r)).unwrap().frobenius_norm();
        prop_assert!(dev < 1e-12);
    }

    #[test]
    fn incomplete_beta_reflection(x in 0.0f64..=1.0, p in 0.05f64..80.0, q in 0.05f64..80.0) {
        let lhs = reg_inc_beta(x, p, q).unwrap() + reg_inc_beta(1.0 - x, q, p).unwrap();
        prop_assert!((lhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn incomplete_beta_is_monotone(x in 0.0f64..0.99, dx in 0.0f64..0.01, p in 0.05f64..40.0, q in 0.05f64..40.0) {
        let lo = reg_inc_beta(x, p, q).unwrap();
        let hi = reg_inc_beta(x + dx, p, q).unwrap();
        prop_assert!(hi >= lo - 1e-13);
        prop_assert!((0.0..=1.0).contains(&lo));
    }
}
