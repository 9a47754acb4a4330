//! Randomized invariants driven by proptest. Each case is generated from a
//! seed, so shrinking reduces to smaller dimensions and seeds.

use proptest::prelude::*;

use kduncert::json::MatrixJson;
use kduncert::kd::{kd_table, table_nonclassicality, table_nonreality};
use kduncert::linalg::{trace_norm, ComplexMatrix};
use kduncert::optimize::{quantum_nonreality, OptimizerConfig};
use kduncert::random::{haar_unitary_with, random_density_with, random_povm_with, rng_for};
use kduncert::state::{DensityMatrix, Povm, RankOnePvm};
use kduncert::uncertainty::{decompose, impurity_s, infimum_total, outcome_probs, s_entropy, t_entropy, Flavor};
use kduncert::witness::disturbance_nonreality;

fn instance(seed: u64, d: usize, n: usize) -> (DensityMatrix, Povm) {
    let mut rng = rng_for(seed, 0);
    let rank = 1 + (seed as usize) % d;
    (
        random_density_with(&mut rng, d, rank).unwrap(),
        random_povm_with(&mut rng, d, n).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kd_marginals_recover_probabilities(seed in any::<u64>(), d in 2usize..5, n in 2usize..5) {
        let (rho, first) = instance(seed, d, n);
        let second = RankOnePvm::from_unitary(haar_unitary_with(&mut rng_for(seed, 1), d)).unwrap().as_povm();
        let t = kd_table(&rho, &first, &second).unwrap();
        let p = outcome_probs(&rho, &first).unwrap();
        for (m, p) in t.marginal_first().iter().zip(&p) {
            prop_assert!((m.re - p).abs() < 1e-10 && m.im.abs() < 1e-10);
        }
        prop_assert!((t.total().re - 1.0).abs() < 1e-10);
        prop_assert!(table_nonreality(&t) >= 0.0);
        prop_assert!(table_nonclassicality(&t) >= -1e-12);
    }

    #[test]
    fn trace_norm_is_unitarily_invariant(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = rng_for(seed, 0);
        let a = kduncert::random::ginibre(&mut rng, d, d);
        let u = haar_unitary_with(&mut rng, d);
        let v = haar_unitary_with(&mut rng, d);
        let rotated = &(&u * &a) * &v;
        prop_assert!((trace_norm(&a) - trace_norm(&rotated)).abs() < 1e-9 * (1.0 + trace_norm(&a)));
    }

    #[test]
    fn entropies_lie_between_zero_and_maximum(seed in any::<u64>(), d in 2usize..6) {
        let (rho, povm) = instance(seed, d, d);
        let p = outcome_probs(&rho, &povm).unwrap();
        let s = s_entropy(&p).unwrap();
        let t = t_entropy(&p).unwrap();
        prop_assert!(s >= 0.0 && s <= ((d - 1) as f64).sqrt() + 1e-12);
        prop_assert!(t >= -1e-12 && t <= (d as f64).sqrt() - 1.0 + 1e-12);
    }

    #[test]
    fn nonreality_part_never_exceeds_total(seed in any::<u64>(), d in 2usize..5, n in 2usize..6) {
        let (rho, povm) = instance(seed, d, n);
        let dec = decompose(&rho, &povm, Flavor::NRe, &OptimizerConfig::default()).unwrap();
        prop_assert!(dec.quantum <= dec.total + 1e-9);
        prop_assert!(dec.classical >= 0.0);
    }

    #[test]
    fn disturbance_form_matches_commutator_form(seed in any::<u64>(), d in 2usize..5) {
        let (rho, _) = instance(seed, d, 2);
        let pvm = RankOnePvm::from_unitary(haar_unitary_with(&mut rng_for(seed, 2), d)).unwrap();
        let a = disturbance_nonreality(&rho, &pvm).unwrap();
        let b = quantum_nonreality(&rho, &pvm.as_povm()).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn infimum_is_attained_and_bounded(seed in any::<u64>(), d in 2usize..5) {
        // Full rank: at a zero eigenvalue √(p(1−p)) turns 1e-17 roundoff into 3e-9.
        let rho = random_density_with(&mut rng_for(seed, 0), d, d).unwrap();
        let inf = infimum_total(&rho, Flavor::NRe);
        prop_assert!((inf.value - impurity_s(&rho)).abs() < 1e-12);
        prop_assert!(inf.value <= ((d - 1) as f64).sqrt() + 1e-12);
        let p = outcome_probs(&rho, &inf.achieving_povm).unwrap();
        prop_assert!((s_entropy(&p).unwrap() - inf.value).abs() < 1e-9);
    }

    #[test]
    fn matrix_json_round_trips_exactly(seed in any::<u64>(), d in 1usize..5) {
        let m: ComplexMatrix = kduncert::random::ginibre(&mut rng_for(seed, 0), d, d);
        let text = serde_json::to_string(&MatrixJson::from_matrix(&m)).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_matrix().unwrap(), m);
    }
}
