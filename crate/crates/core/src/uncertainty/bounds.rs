//! Lower bounds on the S entropy from trace-norm asymmetry, and the
//! commutator uncertainty relation for two rank-1 bases.
//!
//! Both objectives are convex in the eigenvalue vector of each observable
//! and invariant under rescaling, so the search runs over the box
//! `[-1, 1]^d` normalized by the largest modulus. The sign corners of the
//! box are enumerated exhaustively at small d; seeded coordinate ascent
//! covers the interior and larger d.

use rand::Rng;

use crate::error::Result;
use crate::kd::trace_of_product;
use crate::linalg::{trace_norm, ComplexMatrix};
use crate::optimize::OptimizerConfig;
use crate::random::rng_for;
use crate::state::{require_dim, DensityMatrix, RankOnePvm};

const ASYMMETRY_CORNER_MAX_DIM: usize = 10;
const RELATION_CORNER_MAX_DIM: usize = 6;
/// Stream offset so bound searches never share RNG streams with basis restarts.
const BOUND_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq)]
pub struct AsymmetryBound {
    /// sup_A ‖[A, ϱ]‖₁ / (2‖A‖∞).
    pub value: f64,
    /// Eigenvalues of the maximizing A on the given basis, max modulus 1.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationBound {
    /// sup_{A,B} |Tr{[Ã, B̃]ϱ}|.
    pub value: f64,
    pub eigenvalues_a: Vec<f64>,
    pub eigenvalues_b: Vec<f64>,
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let m = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if m == 0.0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / m).collect()
    }
}

fn sign_corner(bits: usize, d: usize) -> Vec<f64> {
    (0..d).map(|j| if bits >> j & 1 == 1 { -1.0 } else { 1.0 }).collect()
}

/// Maximizes `f` over `[-1, 1]^d` by coordinate ascent with step halving.
fn box_ascent(f: &impl Fn(&[f64]) -> f64, mut x: Vec<f64>, cfg: &OptimizerConfig) -> (f64, Vec<f64>) {
    let mut value = f(&x);
    let mut step = 0.5;
    let min_step = cfg.rel_tol.sqrt() * 1e-3;
    for _ in 0..cfg.max_iters {
        let mut improved = false;
        for j in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut trial = x.clone();
                trial[j] = (trial[j] + dir * step).clamp(-1.0, 1.0);
                let v = f(&trial);
                if v > value {
                    x = trial;
                    value = v;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < min_step {
                break;
            }
        }
    }
    (value, x)
}

/// Builds Σ_j λ_j Π^j.
fn observable(projectors: &[ComplexMatrix], eigenvalues: &[f64]) -> ComplexMatrix {
    let d = projectors[0].nrows();
    projectors
        .iter()
        .zip(eigenvalues)
        .fold(ComplexMatrix::zeros(d, d), |acc, (p, &l)| acc + p.scale_real(l))
}

/// Largest trace-norm asymmetry ‖[A, ϱ]‖₁/(2‖A‖∞) over observables A
/// diagonal in `pvm`.
pub fn bound_asymmetry(state: &DensityMatrix, pvm: &RankOnePvm, cfg: &OptimizerConfig) -> Result<AsymmetryBound> {
    let d = state.dim();
    require_dim(d, pvm.dim())?;
    cfg.validate()?;
    let projectors = pvm.projectors();
    let rho = state.matrix();
    let objective = |lambda: &[f64]| {
        let scale = lambda.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        trace_norm(&observable(&projectors, lambda).commutator(rho)) / (2.0 * scale)
    };

    let mut best = (f64::NEG_INFINITY, vec![1.0; d]);
    if d <= ASYMMETRY_CORNER_MAX_DIM {
        // λ and −λ give the same norm, so fix the sign of the first entry.
        for bits in 0..1usize << (d - 1) {
            let corner = sign_corner(bits << 1, d);
            let v = objective(&corner);
            if v > best.0 {
                best = (v, corner);
            }
        }
    }
    for r in 0..cfg.n_restarts {
        let mut rng = rng_for(cfg.seed, BOUND_STREAM + r as u64);
        let start: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let (v, x) = box_ascent(&objective, start, cfg);
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(AsymmetryBound {
        value: best.0.max(0.0),
        eigenvalues: normalized(&best.1),
    })
}

/// Largest |Tr{[Ã, B̃]ϱ}| over observables Ã diagonal in `pvm_a` and B̃
/// diagonal in `pvm_b`, each normalized to unit operator norm.
pub fn uncertainty_relation_bound(
    state: &DensityMatrix,
    pvm_a: &RankOnePvm,
    pvm_b: &RankOnePvm,
    cfg: &OptimizerConfig,
) -> Result<RelationBound> {
    let d = state.dim();
    require_dim(d, pvm_a.dim())?;
    require_dim(d, pvm_b.dim())?;
    cfg.validate()?;
    // Tr{[A,B]ϱ} = Σ_ab λ_a μ_b K_ab with K_ab = Tr{[Π_a, Π_b]ϱ}, which is
    // purely imaginary; keep its imaginary part.
    let pa = pvm_a.projectors();
    let pb = pvm_b.projectors();
    let rho = state.matrix();
    let kernel: Vec<Vec<f64>> = pa
        .iter()
        .map(|p| {
            pb.iter()
                .map(|q| trace_of_product(&p.commutator(q), rho).im)
                .collect()
        })
        .collect();
    let form = |lambda: &[f64], mu: &[f64]| -> f64 {
        let sa = lambda.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let sb = mu.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if sa == 0.0 || sb == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for (a, row) in kernel.iter().enumerate() {
            for (b, k) in row.iter().enumerate() {
                acc += lambda[a] * mu[b] * k;
            }
        }
        acc.abs() / (sa * sb)
    };

    let mut best = (f64::NEG_INFINITY, vec![1.0; d], vec![1.0; d]);
    if d <= RELATION_CORNER_MAX_DIM {
        for bits_a in 0..1usize << (d - 1) {
            let lambda = sign_corner(bits_a << 1, d);
            for bits_b in 0..1usize << d {
                let mu = sign_corner(bits_b, d);
                let v = form(&lambda, &mu);
                if v > best.0 {
                    best = (v, lambda.clone(), mu);
                }
            }
        }
    }
    // Alternating refinement: for fixed λ the best μ is a sign pattern, and vice versa.
    for r in 0..cfg.n_restarts {
        let mut rng = rng_for(cfg.seed, BOUND_STREAM + r as u64);
        let mut lambda: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let mut mu = vec![0.0; d];
        let mut value = f64::NEG_INFINITY;
        for _ in 0..cfg.max_iters {
            mu = (0..d)
                .map(|b| {
                    let s: f64 = (0..d).map(|a| lambda[a] * kernel[a][b]).sum();
                    if s < 0.0 { -1.0 } else { 1.0 }
                })
                .collect();
            lambda = (0..d)
                .map(|a| {
                    let s: f64 = (0..d).map(|b| kernel[a][b] * mu[b]).sum();
                    if s < 0.0 { -1.0 } else { 1.0 }
                })
                .collect();
            let v = form(&lambda, &mu);
            if v <= value * (1.0 + cfg.rel_tol) {
                value = value.max(v);
                break;
            }
            value = v;
        }
        if value > best.0 {
            best = (value, lambda, mu);
        }
    }
    Ok(RelationBound {
        value: best.0.max(0.0),
        eigenvalues_a: normalized(&best.1),
        eigenvalues_b: normalized(&best.2),
    })
}
