//! Total, quantum and classical measurement uncertainty.
//!
//! Two flavors are supported. `NRe` pairs the S entropy Σ√(p(1−p)) with the
//! KD-nonreality quantum part; `NCl` pairs the T entropy Σ√p − 1 with the
//! KD-nonclassicality quantum part. The classical part is what is left over.

mod bounds;

pub use bounds::{bound_asymmetry, uncertainty_relation_bound, AsymmetryBound, RelationBound};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kd::clamp_tiny_negative;
use crate::linalg::ComplexMatrix;
use crate::optimize::{quantum_nonclassicality, quantum_nonreality, EffectwiseSupremum, OptimizerConfig};
use crate::state::{require_dim, DensityMatrix, Povm, RankOnePvm};

/// Probability slack tolerated before clamping into [0, 1].
const PROB_TOL: f64 = 1e-10;
/// Normalization slack for probability vectors.
const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flavor {
    /// S entropy and KD nonreality.
    NRe,
    /// T entropy and KD nonclassicality.
    NCl,
}

impl Flavor {
    pub const ALL: [Flavor; 2] = [Flavor::NRe, Flavor::NCl];
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::NRe => "NRe",
            Flavor::NCl => "NCl",
        })
    }
}

impl FromStr for Flavor {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nre" => Ok(Flavor::NRe),
            "ncl" => Ok(Flavor::NCl),
            other => Err(format!("unknown flavor {other:?}, expected NRe or NCl")),
        }
    }
}

/// Split of the total uncertainty of one measurement on one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub flavor: Flavor,
    pub total: f64,
    pub quantum: f64,
    pub classical: f64,
    pub probs: Vec<f64>,
    /// Optimizer record; absent on the exact nonreality path.
    pub diagnostics: Option<EffectwiseSupremum>,
}

impl Decomposition {
    pub fn converged(&self) -> bool {
        self.diagnostics.as_ref().is_none_or(EffectwiseSupremum::converged)
    }
}

/// p_a = Tr{M^a ϱ}, clamped into [0, 1].
pub fn outcome_probs(state: &DensityMatrix, povm: &Povm) -> Result<Vec<f64>> {
    require_dim(state.dim(), povm.dim())?;
    let probs = povm
        .effects()
        .iter()
        .map(|m| (m * state.matrix()).trace().re.clamp(0.0, 1.0))
        .collect();
    Ok(probs)
}

fn check_distribution(probs: &[f64]) -> Result<()> {
    if let Some(p) = probs.iter().find(|p| !(-PROB_TOL..=1.0 + PROB_TOL).contains(*p)) {
        return Err(Error::BadDistribution {
            reason: format!("probability {p} outside [0, 1]"),
        });
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::BadDistribution {
            reason: format!("probabilities sum to {total}"),
        });
    }
    Ok(())
}

fn clamped(probs: &[f64]) -> impl Iterator<Item = f64> + '_ {
    probs.iter().map(|p| p.clamp(0.0, 1.0))
}

/// Σ_a √(p_a(1 − p_a)).
pub fn s_entropy(probs: &[f64]) -> Result<f64> {
    check_distribution(probs)?;
    Ok(clamped(probs).map(|p| (p * (1.0 - p)).sqrt()).sum())
}

/// Σ_a √p_a − 1.
pub fn t_entropy(probs: &[f64]) -> Result<f64> {
    check_distribution(probs)?;
    Ok(clamped(probs).map(f64::sqrt).sum::<f64>() - 1.0)
}

/// Tsallis entropy (Σ p^q − 1)/(1 − q), q ≠ 1.
pub fn tsallis_entropy(probs: &[f64], q: f64) -> Result<f64> {
    check_distribution(probs)?;
    Ok((clamped(probs).map(|p| p.powf(q)).sum::<f64>() - 1.0) / (1.0 - q))
}

pub fn entropy(flavor: Flavor, probs: &[f64]) -> Result<f64> {
    match flavor {
        Flavor::NRe => s_entropy(probs),
        Flavor::NCl => t_entropy(probs),
    }
}

pub fn total_uncertainty(state: &DensityMatrix, povm: &Povm, flavor: Flavor) -> Result<f64> {
    entropy(flavor, &outcome_probs(state, povm)?)
}

/// Quantum part alone, with the optimizer record for the nonclassicality flavor.
pub fn quantum_uncertainty(
    state: &DensityMatrix,
    povm: &Povm,
    flavor: Flavor,
    cfg: &OptimizerConfig,
) -> Result<(f64, Option<EffectwiseSupremum>)> {
    match flavor {
        Flavor::NRe => Ok((quantum_nonreality(state, povm)?, None)),
        Flavor::NCl => {
            let sup = quantum_nonclassicality(state, povm, cfg)?;
            Ok((sup.value, Some(sup)))
        }
    }
}

pub fn decompose(state: &DensityMatrix, povm: &Povm, flavor: Flavor, cfg: &OptimizerConfig) -> Result<Decomposition> {
    let probs = outcome_probs(state, povm)?;
    let total = entropy(flavor, &probs)?;
    let (quantum, diagnostics) = quantum_uncertainty(state, povm, flavor, cfg)?;
    Ok(Decomposition {
        flavor,
        total,
        quantum,
        classical: clamp_tiny_negative(total - quantum),
        probs,
        diagnostics,
    })
}

/// Tr{(ϱ − ϱ²)^{1/2}} = Σ_j √(λ_j − λ_j²).
pub fn impurity_s(state: &DensityMatrix) -> f64 {
    state
        .eigenvalues()
        .into_iter()
        .map(|l| {
            let l = l.clamp(0.0, 1.0);
            (l - l * l).sqrt()
        })
        .sum()
}

/// Tr{√ϱ} − 1.
pub fn impurity_t(state: &DensityMatrix) -> f64 {
    state.eigenvalues().into_iter().map(|l| l.max(0.0).sqrt()).sum::<f64>() - 1.0
}

pub fn impurity(state: &DensityMatrix, flavor: Flavor) -> f64 {
    match flavor {
        Flavor::NRe => impurity_s(state),
        Flavor::NCl => impurity_t(state),
    }
}

/// Minimum of the total uncertainty over POVMs whose effects all have trace
/// at most 1 (every rank-1 POVM and rank-1 PVM qualifies), with a
/// measurement attaining it.
///
/// Without the trace condition the minimum is 0: the one-outcome POVM {I}
/// has no uncertainty at all.
#[derive(Debug, Clone, PartialEq)]
pub struct Infimum {
    pub value: f64,
    /// Rank-1 refinement of the eigenprojectors of the state.
    pub achieving_basis: RankOnePvm,
    pub achieving_povm: Povm,
}

/// The infimum is the impurity of the state and is attained by measuring in
/// its eigenbasis. Inside a degenerate eigenspace the basis is whatever the
/// eigensolver returned; the value depends only on the spectrum.
pub fn infimum_total(state: &DensityMatrix, flavor: Flavor) -> Infimum {
    let basis = RankOnePvm::from_unitary_unchecked(crate::linalg::hermitian_eigenbasis(state.matrix()));
    Infimum {
        value: impurity(state, flavor),
        achieving_povm: basis.as_povm(),
        achieving_basis: basis,
    }
}

/// Sums effects over the blocks of `partition`, which must cover every
/// outcome index exactly once.
pub fn coarse_grain(povm: &Povm, partition: &[Vec<usize>]) -> Result<Povm> {
    let n = povm.len();
    let mut seen = vec![false; n];
    for block in partition {
        if block.is_empty() {
            return Err(Error::BadPartition {
                reason: "empty block".into(),
            });
        }
        for &a in block {
            if a >= n {
                return Err(Error::BadPartition {
                    reason: format!("index {a} out of range for {n} outcomes"),
                });
            }
            if std::mem::replace(&mut seen[a], true) {
                return Err(Error::BadPartition {
                    reason: format!("index {a} appears twice"),
                });
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::BadPartition {
            reason: format!("index {missing} not covered"),
        });
    }
    let d = povm.dim();
    let effects = partition
        .iter()
        .map(|block| {
            block
                .iter()
                .fold(ComplexMatrix::zeros(d, d), |acc, &a| acc + povm.effect(a).clone())
        })
        .collect();
    let labels = partition
        .iter()
        .map(|block| {
            block
                .iter()
                .map(|&a| povm.labels()[a].as_str())
                .collect::<Vec<_>>()
                .join("+")
        })
        .collect();
    Povm::with_labels(effects, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn plus() -> DensityMatrix {
        DensityMatrix::pure(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap()
    }

    fn z() -> Povm {
        RankOnePvm::qubit_z().as_povm()
    }

    #[test]
    fn outcome_probability_examples() {
        let zero = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        assert_eq!(outcome_probs(&zero, &z()).unwrap(), vec![1.0, 0.0]);
        let p = outcome_probs(&plus(), &z()).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        let p = outcome_probs(&DensityMatrix::maximally_mixed(4), &RankOnePvm::fourier(4).as_povm()).unwrap();
        assert!(p.iter().all(|x| (x - 0.25).abs() < 1e-12));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(s_entropy(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!((s_entropy(&[0.25; 4]).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        assert!((s_entropy(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(t_entropy(&[0.0, 1.0]).unwrap(), 0.0);
        assert!((t_entropy(&[0.25; 4]).unwrap() - 1.0).abs() < 1e-12);
        assert!((t_entropy(&[0.5, 0.5]).unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn t_entropy_is_half_tsallis_one_half() {
        for probs in [vec![0.5, 0.5], vec![0.7, 0.2, 0.1], vec![1.0, 0.0]] {
            let t = t_entropy(&probs).unwrap();
            assert!((2.0 * t - tsallis_entropy(&probs, 0.5).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn entropies_reject_bad_distributions() {
        assert!(matches!(s_entropy(&[0.5, 0.6]), Err(Error::BadDistribution { .. })));
        assert!(matches!(t_entropy(&[1.2, -0.2]), Err(Error::BadDistribution { .. })));
    }

    #[test]
    fn total_uncertainty_examples() {
        let zero = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        for flavor in Flavor::ALL {
            assert_eq!(total_uncertainty(&zero, &z(), flavor).unwrap(), 0.0);
        }
        let coh = DensityMatrix::maximally_coherent(3);
        let comp = RankOnePvm::computational(3).as_povm();
        assert!((total_uncertainty(&coh, &comp, Flavor::NRe).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let rho = DensityMatrix::diagonal(&[0.6, 0.1, 0.3]).unwrap();
        let trivial = Povm::trivial(3, 3);
        assert!((total_uncertainty(&rho, &trivial, Flavor::NCl).unwrap() - (3f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn decomposition_of_commuting_mixed_state() {
        let rho = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        let dec = decompose(&rho, &z(), Flavor::NRe, &OptimizerConfig::default()).unwrap();
        let expected = 2.0 * (3.0f64 / 16.0).sqrt();
        assert!((dec.total - expected).abs() < 1e-12);
        assert!(dec.quantum.abs() < 1e-12);
        assert!((dec.classical - expected).abs() < 1e-12);
        assert!(dec.diagnostics.is_none());
    }

    #[test]
    fn decomposition_of_partially_coherent_state() {
        let rho = DensityMatrix::new(ComplexMatrix::from_real_rows(&[&[0.5, 0.25], &[0.25, 0.5]])).unwrap();
        let dec = decompose(&rho, &z(), Flavor::NRe, &OptimizerConfig::default()).unwrap();
        assert!((dec.total - 1.0).abs() < 1e-12);
        assert!((dec.quantum - 0.5).abs() < 1e-12);
        assert!((dec.classical - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pure_state_rank_one_pvm_is_all_quantum() {
        let cfg = OptimizerConfig {
            n_restarts: 8,
            ..OptimizerConfig::default()
        };
        for flavor in Flavor::ALL {
            let dec = decompose(&plus(), &z(), flavor, &cfg).unwrap();
            assert!(dec.classical.abs() < 1e-6, "{flavor}: {dec:?}");
        }
    }

    #[test]
    fn impurity_examples() {
        assert!(impurity_s(&plus()).abs() < 1e-7);
        assert!(impurity_t(&plus()).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!((impurity_s(&mixed) - 3f64.sqrt()).abs() < 1e-12);
        assert!((impurity_t(&mixed) - 1.0).abs() < 1e-12);
        let rho = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        assert!((impurity_s(&rho) - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((impurity_t(&rho) - (3f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn infimum_examples() {
        let inf = infimum_total(&plus(), Flavor::NCl);
        assert!(inf.value.abs() < 1e-12);
        assert!(total_uncertainty(&plus(), &inf.achieving_povm, Flavor::NCl).unwrap().abs() < 1e-9);

        let half = DensityMatrix::maximally_mixed(2);
        let inf = infimum_total(&half, Flavor::NCl);
        assert!((inf.value - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!((total_uncertainty(&half, &inf.achieving_povm, Flavor::NCl).unwrap() - inf.value).abs() < 1e-9);
    }

    #[test]
    fn infimum_needs_trace_bounded_effects() {
        let half = DensityMatrix::maximally_mixed(2);
        let trivial = Povm::trivial(2, 1);
        for flavor in Flavor::ALL {
            assert!(total_uncertainty(&half, &trivial, flavor).unwrap().abs() < 1e-12);
            assert!(infimum_total(&half, flavor).value > 0.4);
        }
    }

    #[test]
    fn coarse_grain_examples() {
        let p = RankOnePvm::fourier(3).as_povm();
        let same = coarse_grain(&p, &[vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(same.effects(), p.effects());
        let merged = coarse_grain(&p, &[vec![0, 1, 2]]).unwrap();
        assert!(merged.effect(0).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
        assert_eq!(merged.labels(), ["0+1+2"]);
    }

    #[test]
    fn coarse_grain_rejects_bad_partitions() {
        let p = RankOnePvm::fourier(3).as_povm();
        for bad in [vec![vec![0], vec![1]], vec![vec![0, 1], vec![1, 2]], vec![vec![0, 1, 2, 3]], vec![vec![0, 1, 2], vec![]]] {
            assert!(matches!(coarse_grain(&p, &bad), Err(Error::BadPartition { .. })), "{bad:?}");
        }
    }

    #[test]
    fn flavor_parses() {
        assert_eq!("nre".parse::<Flavor>().unwrap(), Flavor::NRe);
        assert_eq!("NCl".parse::<Flavor>().unwrap(), Flavor::NCl);
        assert!("shannon".parse::<Flavor>().is_err());
    }
}
