//! Weak values, the contextuality witness, and the disturbance form of the
//! nonreality quantum uncertainty.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kd::{binary_dephase, clamp_tiny_negative};
use crate::linalg::{hermitian_eigenbasis, trace_norm, ComplexMatrix, HERMITIAN_TOL, I};
use crate::optimize::{quantum_nonclassicality, quantum_nonreality, OptimizerConfig};
use crate::random::{haar_unitary_with, rng_for};
use crate::state::{require_dim, DensityMatrix, Povm, RankOnePvm};

/// Postselection probabilities at or below this leave the weak value undefined.
pub const POSTSELECTION_TOL: f64 = 1e-12;
pub const DEFAULT_WITNESS_THRESHOLD: f64 = 1e-7;
/// Stream offset for the random-basis fallback of the witness search.
const WITNESS_STREAM: u64 = 2 << 32;

/// M_w^a(b|ϱ) = <b|M^aϱ|b>/<b|ϱ|b>, row-major with `a` as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakValueTable {
    pub n_a: usize,
    pub n_b: usize,
    /// Zero wherever `undefined` is set.
    pub values: Vec<Complex64>,
    /// <b|ϱ|b>.
    pub postselect_probs: Vec<f64>,
    pub undefined: Vec<bool>,
}

impl WeakValueTable {
    pub fn get(&self, a: usize, b: usize) -> Option<Complex64> {
        let k = a * self.n_b + b;
        (!self.undefined[k]).then_some(self.values[k])
    }
}

pub fn weak_values(state: &DensityMatrix, povm: &Povm, basis: &RankOnePvm) -> Result<WeakValueTable> {
    let d = state.dim();
    require_dim(d, povm.dim())?;
    require_dim(d, basis.dim())?;
    let postselect_probs: Vec<f64> = basis.diagonal_of(state.matrix()).iter().map(|z| z.re).collect();
    let mut values = Vec::with_capacity(povm.len() * d);
    let mut undefined = Vec::with_capacity(povm.len() * d);
    for m in povm.effects() {
        let numerators = basis.diagonal_of(&(m * state.matrix()));
        for (num, &p) in numerators.iter().zip(&postselect_probs) {
            if p <= POSTSELECTION_TOL {
                values.push(Complex64::new(0.0, 0.0));
                undefined.push(true);
            } else {
                values.push(num / p);
                undefined.push(false);
            }
        }
    }
    Ok(WeakValueTable {
        n_a: povm.len(),
        n_b: d,
        values,
        postselect_probs,
        undefined,
    })
}

/// Nonreality and nonclassicality of the KD table for one fixed basis,
/// written as postselection-weighted weak values. Undefined entries carry
/// zero weight.
pub fn quantum_via_weak_values(state: &DensityMatrix, povm: &Povm, basis: &RankOnePvm) -> Result<(f64, f64)> {
    let table = weak_values(state, povm, basis)?;
    let mut nre = 0.0;
    let mut ncl = 0.0;
    for a in 0..table.n_a {
        for b in 0..table.n_b {
            if let Some(w) = table.get(a, b) {
                let p = table.postselect_probs[b];
                nre += w.im.abs() * p;
                ncl += w.norm() * p;
            }
        }
    }
    Ok((nre, clamp_tiny_negative(ncl - 1.0)))
}

/// A strange weak value located by [`contextuality_witness`].
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessEntry {
    pub a: usize,
    pub b: usize,
    pub weak_value: Complex64,
    pub basis: RankOnePvm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    pub contextual: bool,
    pub nre: f64,
    pub ncl: f64,
    pub threshold: f64,
    pub witness: Option<WitnessEntry>,
    /// False if the two flavors disagree about crossing the threshold,
    /// which signals an optimizer failure rather than physics.
    pub flavors_agree: bool,
}

/// Nonreal, or real part below zero, beyond `threshold`.
pub fn is_strange(w: Complex64, threshold: f64) -> bool {
    w.im.abs() > threshold || w.re < -threshold
}

fn strangeness(w: Complex64) -> f64 {
    w.im.abs().max(-w.re)
}

/// Most strange entry of `basis`, scanning effects in order and stopping at
/// the first effect that has one.
fn strange_entry(state: &DensityMatrix, povm: &Povm, basis: &RankOnePvm, threshold: f64) -> Result<Option<WitnessEntry>> {
    let table = weak_values(state, povm, basis)?;
    for a in 0..table.n_a {
        let mut best: Option<(usize, Complex64)> = None;
        for b in 0..table.n_b {
            if let Some(w) = table.get(a, b) {
                if is_strange(w, threshold) && best.is_none_or(|(_, bw)| strangeness(w) > strangeness(bw)) {
                    best = Some((b, w));
                }
            }
        }
        if let Some((b, weak_value)) = best {
            return Ok(Some(WitnessEntry {
                a,
                b,
                weak_value,
                basis: basis.clone(),
            }));
        }
    }
    Ok(None)
}

/// Decides contextuality from the quantum uncertainty and, when positive,
/// locates a strange weak value certifying it.
///
/// Candidate bases, in order: the eigenbasis of i[M^a, ϱ] for each effect
/// (it attains the nonreality supremum), the nonclassicality maximizers, then
/// `cfg.n_restarts` Haar-random bases.
pub fn contextuality_witness(
    state: &DensityMatrix,
    povm: &Povm,
    cfg: &OptimizerConfig,
    threshold: f64,
) -> Result<WitnessReport> {
    let nre = quantum_nonreality(state, povm)?;
    let ncl_sup = quantum_nonclassicality(state, povm, cfg)?;
    let ncl = ncl_sup.value;
    let contextual = nre > threshold;
    let flavors_agree = contextual == (ncl > threshold);
    let mut report = WitnessReport {
        contextual,
        nre,
        ncl,
        threshold,
        witness: None,
        flavors_agree,
    };
    if !contextual {
        return Ok(report);
    }

    let rho = state.matrix();
    let mut candidates: Vec<RankOnePvm> = povm
        .effects()
        .iter()
        .map(|m| RankOnePvm::from_unitary_unchecked(hermitian_eigenbasis(&m.commutator(rho).scale(I))))
        .collect();
    candidates.extend(ncl_sup.per_effect.iter().map(|r| r.best_basis.clone()));
    for basis in &candidates {
        if let Some(entry) = strange_entry(state, povm, basis, threshold)? {
            report.witness = Some(entry);
            return Ok(report);
        }
    }
    for r in 0..cfg.n_restarts {
        let u = haar_unitary_with(&mut rng_for(cfg.seed, WITNESS_STREAM + r as u64), state.dim());
        let basis = RankOnePvm::from_unitary_unchecked(u);
        if let Some(entry) = strange_entry(state, povm, &basis, threshold)? {
            report.witness = Some(entry);
            return Ok(report);
        }
    }
    Err(Error::WitnessNotFound { nre })
}

/// ΠϱΠ + (I − Π)ϱ(I − Π), the state after the nonselective measurement {Π, I − Π}.
pub fn lueders_update(state: &DensityMatrix, projector: &ComplexMatrix) -> Result<DensityMatrix> {
    require_dim(state.dim(), projector.dim()?)?;
    let herm = projector.hermiticity_deviation();
    if herm > HERMITIAN_TOL {
        return Err(Error::NotProjector {
            reason: "hermiticity",
            deviation: herm,
        });
    }
    let idem = (projector * projector).max_abs_diff(projector);
    if idem > HERMITIAN_TOL {
        return Err(Error::NotProjector {
            reason: "idempotence",
            deviation: idem,
        });
    }
    Ok(DensityMatrix::from_trusted(binary_dephase(state.matrix(), projector)))
}

/// ½ Σ_a ‖ϱ − ϱ_{Π^a}‖₁, the total trace distance moved by the binary
/// measurements {Π^a, I − Π^a}.
pub fn disturbance_nonreality(state: &DensityMatrix, pvm: &RankOnePvm) -> Result<f64> {
    require_dim(state.dim(), pvm.dim())?;
    let rho = state.matrix();
    let mut total = 0.0;
    for p in pvm.projectors() {
        let updated = lueders_update(state, &p)?;
        total += trace_norm(&(rho - updated.matrix()));
    }
    Ok(total / 2.0)
}
