use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use specvar_core::bounds::{self, BoundId, SValues};
use specvar_core::harness::{self, BlockProfile, Perturbation, SweepConfig};
use specvar_core::io;
use specvar_core::jordan::{JordanBlock, JordanSpec, PerturbationInstance};
use specvar_core::random::{complex_normal, gaussian_matrix, random_unitary, random_with_condition};
use specvar_core::spectrum::{self, optimal_match, Spectrum};
use specvar_core::{ComplexMatrix, C64};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn spectrum_of(rng: &mut ChaCha8Rng, n: usize) -> Spectrum {
    Spectrum::new((0..n).map(|_| complex_normal(rng) * 2.0).collect())
}

fn random_instance(seed: u64) -> PerturbationInstance {
    let mut r = rng(seed);
    let n = r.random_range(2..=9);
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = r.random_range(1..=left.min(4));
        sizes.push(s);
        left -= s;
    }
    let real = r.random_bool(0.5);
    let blocks = sizes
        .iter()
        .map(|&s| {
            let z = complex_normal(&mut r);
            JordanBlock::new(if real { C64::new(z.re, 0.0) } else { z }, s)
        })
        .collect();
    let kappa = [1.0, 4.0, 30.0][r.random_range(0..3)];
    let q = random_with_condition(&mut r, n, kappa);
    let e = gaussian_matrix(&mut r, n, n);
    let scale = 10f64.powf(r.random_range(-2.5..0.5));
    let e = e.scale(C64::new(scale / e.frobenius_norm(), 0.0));
    PerturbationInstance::new(JordanSpec::new(blocks, q).unwrap(), e).unwrap()
}

fn value(rs: &[bounds::BoundResult], id: BoundId) -> Option<f64> {
    rs.iter().find(|r| r.id == id).and_then(|r| r.value)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delta_is_unitarily_invariant(seed in any::<u64>(), n in 1usize..9) {
        let mut r = rng(seed);
        let m = gaussian_matrix(&mut r, n, n);
        let u = random_unitary(&mut r, n);
        let d = m.delta().unwrap();
        let du = m.unitary_similarity(&u).unwrap().delta().unwrap();
        prop_assert!((d - du).abs() <= 1e-10 * m.frobenius_norm());
        prop_assert!(d <= m.frobenius_norm() * (1.0 + 1e-15));
    }

    #[test]
    fn delta_equals_norm_for_traceless(seed in any::<u64>(), n in 2usize..9) {
        let mut r = rng(seed);
        let mut m = gaussian_matrix(&mut r, n, n);
        let shift = m.trace().unwrap() / n as f64;
        for i in 0..n {
            m[(i, i)] -= shift;
        }
        prop_assert!((m.delta().unwrap() - m.frobenius_norm()).abs() <= 1e-12 * m.frobenius_norm());
    }

    #[test]
    fn triangular_split(seed in any::<u64>(), n in 1usize..10) {
        let mut r = rng(seed);
        let m = gaussian_matrix(&mut r, n, n);
        let split = m.split_dlu().unwrap();
        prop_assert_eq!(split.reconstruct(), m.clone());
        let lhs = split.strictly_lower.frobenius_norm_sq() + split.strictly_upper.frobenius_norm_sq();
        prop_assert!(lhs <= m.delta().unwrap().powi(2) + 1e-12 * m.frobenius_norm_sq());
    }

    #[test]
    fn matching_is_a_metric(seed in any::<u64>(), n in 1usize..8) {
        let mut r = rng(seed);
        let (a, b, c) = (spectrum_of(&mut r, n), spectrum_of(&mut r, n), spectrum_of(&mut r, n));
        let ab = optimal_match(&a, &b).unwrap();
        let ba = optimal_match(&b, &a).unwrap();
        prop_assert!((ab.d2 - ba.d2).abs() <= 1e-12 * (1.0 + ab.d2));
        let ac = optimal_match(&a, &c).unwrap().d2;
        let bc = optimal_match(&b, &c).unwrap().d2;
        prop_assert!(ac <= ab.d2 + bc + 1e-12);
        prop_assert!(ab.d_inf <= ab.d2 + 1e-15);
        let t = complex_normal(&mut r);
        let shifted = optimal_match(&a.shifted(t), &b.shifted(t)).unwrap().d2;
        prop_assert!((shifted - ab.d2).abs() <= 1e-10 * (1.0 + ab.d2));
        let identity: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm_sqr()).sum();
        prop_assert!(ab.d2 <= identity.sqrt() + 1e-12);
    }

    #[test]
    fn matching_ignores_input_order(seed in any::<u64>(), n in 1usize..8) {
        let mut r = rng(seed);
        let vals: Vec<C64> = (0..n).map(|_| complex_normal(&mut r)).collect();
        let b = spectrum_of(&mut r, n);
        let mut rev = vals.clone();
        rev.reverse();
        let d = optimal_match(&Spectrum::new(vals), &b).unwrap();
        let e = optimal_match(&Spectrum::new(rev), &b).unwrap();
        prop_assert_eq!(d, e);
    }

    #[test]
    fn bounds_hold_and_refine(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let n = inst.n();
        let s = SValues::pessimistic(n);
        let mut rs = bounds::baseline_bounds(&inst, &s).unwrap();
        rs.extend(bounds::new_bounds_complex(&inst, &s).unwrap());
        rs.extend(bounds::new_bounds_real(&inst).unwrap());
        let a = inst.spec().eigenvalues();
        let at = spectrum::eigenvalues(&inst.a_tilde()).unwrap();
        let d2 = optimal_match(&a, &at).unwrap().d2;
        for v in bounds::verify_instance(&rs, d2) {
            prop_assert!(!v.violated, "{} = {} < D2 = {}", v.id, v.value, d2);
        }
        prop_assert!(value(&rs, BoundId::Up1_1).unwrap() <= value(&rs, BoundId::Song).unwrap() + 1e-12);
        prop_assert!(value(&rs, BoundId::Up2_1).unwrap() <= value(&rs, BoundId::LiChen).unwrap() + 1e-12);
        if let (Some(u3), Some(u1)) = (value(&rs, BoundId::Up3_1), value(&rs, BoundId::Up1_1)) {
            prop_assert!(u3 <= u1 + 1e-12);
        }
    }

    #[test]
    fn envelope_holds_everywhere(seed in any::<u64>(), k in 1usize..=64) {
        let inst = random_instance(seed);
        let c = inst.envelope_check(k as f64 / 64.0).unwrap();
        prop_assert!(c.holds(1e-8), "{c:?}");
    }

    #[test]
    fn optimal_epsilon_minimizes_phi(seed in any::<u64>()) {
        let inst = random_instance(seed);
        if let Ok(eps) = inst.optimal_epsilon() {
            let best = inst.phi(eps).unwrap();
            for k in 1..=200 {
                prop_assert!(best <= inst.phi(k as f64 / 200.0).unwrap() + 1e-12 * (1.0 + best));
            }
        }
    }

    #[test]
    fn instances_are_reproducible(seed in any::<u64>(), trial in 0usize..1000) {
        let cfg = SweepConfig {
            seed,
            trials: 1,
            n_range: (2, 8),
            block_profile: BlockProfile::Mixed,
            perturbations: vec![Perturbation::Rank1 { norm: 0.7 }, Perturbation::Gaussian { norm: 0.1 }],
            ..SweepConfig::default()
        };
        let a = harness::gen_instance(&cfg, trial).unwrap();
        let b = harness::gen_instance(&cfg, trial).unwrap();
        prop_assert_eq!(a.spec(), b.spec());
        prop_assert_eq!(a.e(), b.e());
        let k = cfg.kappa_for(trial);
        prop_assert!((a.spec().q().kappa2().unwrap() - k).abs() <= 0.1 * k);
    }

    #[test]
    fn matrix_text_round_trip(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6) {
        let mut r = rng(seed);
        let m = gaussian_matrix(&mut r, rows, cols).scale(C64::new(10f64.powf(r.random_range(-200.0..200.0)), 0.0));
        prop_assert_eq!(io::parse_matrix(&io::matrix_to_string(&m)).unwrap(), m);
    }

    #[test]
    fn scalar_matrices_have_zero_delta(re in -1e6f64..1e6, im in -1e6f64..1e6, n in 1usize..20) {
        prop_assert_eq!(ComplexMatrix::scalar(n, C64::new(re, im)).delta().unwrap(), 0.0);
    }
}
