use std::path::Path;

use proptest::prelude::*;

use ethlab::ansatz::{f_exp_decay, f_microcanonical_exact, f_small_a_flat};
use ethlab::experiments::{
    matrix_elements_total_basis, sample_local_operator, BinAccumulator, BinningParams,
    OperatorEnsembleSpec,
};
use ethlab::hamiltonians::{build_random_system, sample_goe, seeded_rng, RandomSystemParams};
use ethlab::io::cache::{decode, encode};
use ethlab::linalg::{eig_sym, SymmetricMatrix};
use ethlab::localize::{localizability, DEFAULT_TOL};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 32,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn exp_decay_is_even_and_nonnegative(
        sigma_a in 0.5f64..10.0,
        ratio in 0.01f64..0.5,
        x in 0.0f64..1.5,
    ) {
        let sigma_s = ratio * sigma_a;
        let w = x * sigma_a;
        let plus = f_exp_decay(sigma_a, sigma_s, 1.0, w).unwrap();
        let minus = f_exp_decay(sigma_a, sigma_s, 1.0, -w).unwrap();
        prop_assert!(plus >= 0.0);
        prop_assert!((plus - minus).abs() <= 1e-12 * plus.max(1e-300));
    }

    #[test]
    fn small_a_flat_vanishes_outside_half_range(
        sigma_a in 0.5f64..10.0,
        ratio in 0.01f64..0.2,
        x in 0.51f64..2.0,
    ) {
        let v = f_small_a_flat(sigma_a, 1.0, ratio * sigma_a, x * sigma_a).unwrap();
        prop_assert_eq!(v, 0.0);
    }

    #[test]
    fn microcanonical_is_symmetric_and_cut_off(
        seed in 0u64..1000,
        l_a in 1usize..3,
        sigma_s in 0.1f64..1.0,
        i in 0usize..64,
        j in 0usize..64,
    ) {
        let sys = build_random_system(&RandomSystemParams::new(l_a, 3, 2, 0.05, seed)).unwrap();
        let o = sample_local_operator(&OperatorEnsembleSpec::new(sys.dim_a(), seed), 0).unwrap();
        let delta = 2.0 * 3f64.sqrt() * sigma_s;
        let e0 = sys.spectrum_0().eigenvalues();
        let (ea, eb) = (e0[i % e0.len()], e0[j % e0.len()]);
        let ab = f_microcanonical_exact(&sys, &o, delta, ea, eb).unwrap();
        let ba = f_microcanonical_exact(&sys, &o, delta, eb, ea).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.max(1.0));
        if (ea - eb).abs() > delta + sys.spectrum_a().range() {
            prop_assert_eq!(ab, 0.0);
        }
    }

    #[test]
    fn sum_rule_holds_for_random_systems(
        seed in 0u64..1000,
        l_a in 1usize..3,
        l_b in 2usize..4,
        index in 0usize..250,
    ) {
        let sys = build_random_system(&RandomSystemParams::new(l_a, l_b, 2, 0.1, seed)).unwrap();
        let o = sample_local_operator(&OperatorEnsembleSpec::new(sys.dim_a(), seed), index).unwrap();
        let d = o.dim();
        let sq = SymmetricMatrix::from_fn(d, |r, c| (0..d).map(|k| o.get(r, k) * o.get(k, c)).sum()).unwrap();
        let m = matrix_elements_total_basis(&sys, &o).unwrap();
        let m2 = matrix_elements_total_basis(&sys, &sq).unwrap();
        for a in 0..sys.dim() {
            let row: f64 = (0..sys.dim()).map(|b| m.get(a, b).powi(2)).sum();
            prop_assert!((row - m2.get(a, a)).abs() <= 1e-10);
        }
    }

    #[test]
    fn cache_roundtrip_is_bit_exact(seed in 0u64..1000, dim in 1usize..24, flip in 0usize..10_000) {
        let h = sample_goe(dim, &mut seeded_rng(seed)).unwrap();
        let s = eig_sym(&h).unwrap();
        let key = [seed as u8; 32];
        let bytes = encode(&s, &key);
        let back = decode(&bytes, &key, Path::new("mem")).unwrap();
        prop_assert_eq!(s.eigenvalues(), back.eigenvalues());
        for c in 0..dim {
            prop_assert_eq!(s.eigenvector(c), back.eigenvector(c));
        }
        let mut bad = bytes.clone();
        let k = flip % bad.len();
        bad[k] ^= 0x40;
        prop_assert!(decode(&bad, &key, Path::new("mem")).is_err());
        let mut other = key;
        other[0] ^= 1;
        prop_assert!(decode(&bytes, &other, Path::new("mem")).is_err());
    }

    #[test]
    fn repeated_spectrum_localizes_to_distinct_count(
        mut values in prop::collection::vec(-5.0f64..5.0, 2..6),
        power in 0u32..4,
    ) {
        values.sort_by(f64::total_cmp);
        values.dedup_by(|a, b| (*a - *b).abs() < 0.05);
        prop_assume!(values.len() >= 2);
        let copies = 1usize << power;
        let spectrum: Vec<f64> = values.iter().flat_map(|&v| std::iter::repeat_n(v, copies)).collect();
        let report = localizability(&spectrum, DEFAULT_TOL).unwrap();
        prop_assert_eq!(report.total_dim, spectrum.len());
        prop_assert_eq!(report.gcd_multiplicity, copies);
        prop_assert_eq!(report.d_o, values.len());
    }

    #[test]
    fn accumulator_merge_matches_single_pass(
        pairs in prop::collection::vec((0.0f64..2.0, -1.0f64..1.0), 1..200),
        split in 0usize..200,
    ) {
        let params = BinningParams { omega_bin_width: 0.1, ..BinningParams::new(0.0) };
        let mut whole = BinAccumulator::new(&params);
        pairs.iter().for_each(|&(w, v)| whole.push(w, v));
        let k = split % (pairs.len() + 1);
        let (mut left, mut right) = (BinAccumulator::new(&params), BinAccumulator::new(&params));
        pairs[..k].iter().for_each(|&(w, v)| left.push(w, v));
        pairs[k..].iter().for_each(|&(w, v)| right.push(w, v));
        left.merge(&right);
        let (a, b) = (whole.finish(&params), left.finish(&params));
        prop_assert_eq!(a.total_count(), pairs.len() as u64);
        prop_assert_eq!(a.bins.len(), b.bins.len());
        for (x, y) in a.bins.iter().zip(&b.bins) {
            prop_assert_eq!(x.count, y.count);
            prop_assert!((x.mean_sq - y.mean_sq).abs() <= 1e-12);
            prop_assert!(x.mean_sq >= 0.0);
        }
    }
}
