//! Seeded random states, POVMs and unitaries.
//!
//! Every generator is deterministic in its seed. The `*_with` variants draw
//! from a caller-owned RNG so that property suites can stream many samples.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen_pair, spectral_function, ComplexMatrix};
use crate::state::{validate_density, DensityMatrix, Povm};

/// Below this the effect sum S is treated as singular.
pub const SINGULAR_SUM_TOL: f64 = 1e-12;

/// RNG for `(seed, stream)`; streams are independent for a fixed seed.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian, E|z|² = 1.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn haar_unitary_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = ginibre(rng, d, d).into_dmatrix();
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix the phase ambiguity of QR so the distribution is exactly Haar.
    let phases = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let rii = r[(i, i)];
            if rii.norm() > 0.0 {
                rii / rii.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    ComplexMatrix::from_dmatrix(q * phases)
}

/// Haar-distributed d×d unitary.
pub fn haar_random_unitary(d: usize, seed: u64) -> ComplexMatrix {
    haar_unitary_with(&mut rng_for(seed, 0), d)
}

pub fn random_density_with<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> Result<DensityMatrix> {
    if rank == 0 || rank > d {
        return Err(Error::BadRank { rank, dim: d });
    }
    let g = ginibre(rng, d, rank);
    let gg = &g * &g.adjoint();
    let tr = gg.trace().re;
    validate_density(gg.scale_real(1.0 / tr).hermitian_part())
}

/// GG†/Tr(GG†) with G of shape d×rank.
pub fn random_density(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(&mut rng_for(seed, 0), d, rank)
}

pub fn random_pure_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
    random_density_with(rng, d, 1).expect("rank 1 is valid for d >= 1")
}

pub fn random_povm_with<R: Rng + ?Sized>(rng: &mut R, d: usize, n_outcomes: usize) -> Result<Povm> {
    povm_from_ginibre(rng, d, n_outcomes, d)
}

/// Random POVM whose effects are all rank 1, so each has trace at most 1.
/// Needs at least `d` outcomes for the effects to span the space.
pub fn random_rank_one_povm_with<R: Rng + ?Sized>(rng: &mut R, d: usize, n_outcomes: usize) -> Result<Povm> {
    if n_outcomes < d {
        return Err(Error::BadRank { rank: n_outcomes, dim: d });
    }
    povm_from_ginibre(rng, d, n_outcomes, 1)
}

/// S^{-1/2} A_i S^{-1/2} with A_i = G_iG_i†, G_i of shape d×rank.
fn povm_from_ginibre<R: Rng + ?Sized>(rng: &mut R, d: usize, n_outcomes: usize, rank: usize) -> Result<Povm> {
    if n_outcomes == 0 {
        return Err(Error::NoOutcomes);
    }
    let parts: Vec<ComplexMatrix> = (0..n_outcomes)
        .map(|_| {
            let g = ginibre(rng, d, rank);
            &g * &g.adjoint()
        })
        .collect();
    let sum = parts
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, a| acc + a.clone());
    let (values, vectors) = hermitian_eigen_pair(&sum);
    let min_eigenvalue = values.last().copied().unwrap_or(0.0);
    if min_eigenvalue < SINGULAR_SUM_TOL {
        return Err(Error::SingularSum { min_eigenvalue });
    }
    let inv_sqrt: Vec<f64> = values.iter().map(|l| 1.0 / l.sqrt()).collect();
    let s = spectral_function(&vectors, &inv_sqrt, d);
    let effects = parts.iter().map(|a| (&s * a * &s).hermitian_part()).collect();
    Povm::new(effects)
}

/// S^{-1/2} A_i S^{-1/2} with A_i = G_iG_i† and S = Σ A_i.
pub fn random_povm(d: usize, n_outcomes: usize, seed: u64) -> Result<Povm> {
    random_povm_with(&mut rng_for(seed, 0), d, n_outcomes)
}
