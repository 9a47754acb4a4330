//! Suprema over rank-1 projective bases.
//!
//! The engine is a multistart local ascent on the unitary group. Each
//! iterate is written as `U = U₀·exp(iH(θ))`, with `H(θ)` expanded in the
//! real basis of off-diagonal Hermitian generators; diagonal generators only
//! rephase basis vectors and leave every projector unchanged, so they are
//! skipped. After each accepted coordinate move the product is folded back
//! into `U₀`, so a move along one generator is an exact 2×2 rotation of two
//! columns and iterates stay unitary to roundoff.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kd::clamp_tiny_negative;
use crate::linalg::{c, fourier_matrix, hermitian_eigenbasis, partial_trace, tensor, trace_norm, ComplexMatrix, Subsystem, I};
use crate::random::{haar_unitary_with, rng_for};
use crate::state::{require_dim, DensityMatrix, Povm, RankOnePvm};

/// Restarts whose values differ by less than this are tied; the lowest index wins.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub n_restarts: usize,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub step_init: f64,
    pub seed: u64,
    pub include_structured_starts: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            n_restarts: 32,
            max_iters: 500,
            rel_tol: 1e-8,
            step_init: 0.1,
            seed: 0,
            include_structured_starts: true,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_restarts == 0 {
            return Err(Error::BadConfig {
                reason: "n_restarts must be at least 1".into(),
            });
        }
        if self.rel_tol.is_nan() || self.rel_tol <= 0.0 {
            return Err(Error::BadConfig {
                reason: "rel_tol must be positive".into(),
            });
        }
        if !self.step_init.is_finite() || self.step_init <= 0.0 {
            return Err(Error::BadConfig {
                reason: "step_init must be positive and finite".into(),
            });
        }
        Ok(())
    }

    /// Smallest coordinate step tried before a coordinate is declared stuck.
    fn min_step(&self) -> f64 {
        self.rel_tol.sqrt() * 1e-3
    }
}

/// Outcome of one supremum search.
#[derive(Debug, Clone, PartialEq)]
pub struct SupremumResult {
    pub value: f64,
    pub best_basis: RankOnePvm,
    /// Final value of every start, structured starts first.
    pub per_restart_values: Vec<f64>,
    pub best_restart: usize,
    /// Whether the best restart met the relative-improvement criterion.
    pub converged: bool,
    /// Sweeps used by the best restart.
    pub iterations_used: usize,
}

/// Sum over POVM effects of independent per-effect suprema.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectwiseSupremum {
    /// Σ_a sup_a, minus one for the nonclassicality flavor, clamped at 0 within 1e-9.
    pub value: f64,
    /// One search per effect, in POVM order.
    pub per_effect: Vec<SupremumResult>,
}

impl EffectwiseSupremum {
    pub fn converged(&self) -> bool {
        self.per_effect.iter().all(|r| r.converged)
    }

    pub fn iterations_used(&self) -> usize {
        self.per_effect.iter().map(|r| r.iterations_used).sum()
    }

    /// Maximizing basis for each effect.
    pub fn bases(&self) -> Vec<&RankOnePvm> {
        self.per_effect.iter().map(|r| &r.best_basis).collect()
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    /// exp(it(E_jk + E_kj)).
    Sym,
    /// exp(it(−iE_jk + iE_kj)).
    Asym,
}

#[derive(Debug, Clone, Copy)]
struct Generator {
    factor: usize,
    j: usize,
    k: usize,
    kind: Kind,
}

fn generators(dims: &[usize]) -> Vec<Generator> {
    let mut out = Vec::new();
    for (factor, &d) in dims.iter().enumerate() {
        for j in 0..d {
            for k in j + 1..d {
                out.push(Generator { factor, j, k, kind: Kind::Sym });
                out.push(Generator { factor, j, k, kind: Kind::Asym });
            }
        }
    }
    out
}

/// U ← U·exp(itG) for a two-level generator G.
fn rotate(u: &mut ComplexMatrix, g: Generator, t: f64) {
    let (r_jj, r_jk, r_kj, r_kk) = rotation_entries(g.kind, t);
    for row in 0..u.nrows() {
        let (uj, uk) = (u.get(row, g.j), u.get(row, g.k));
        u.set(row, g.j, uj * r_jj + uk * r_kj);
        u.set(row, g.k, uj * r_jk + uk * r_kk);
    }
}

fn assemble(factors: &[ComplexMatrix]) -> ComplexMatrix {
    let mut iter = factors.iter();
    let first = iter.next().expect("at least one factor").clone();
    iter.fold(first, |acc, f| tensor(&acc, f))
}

struct LocalOutcome {
    value: f64,
    factors: Vec<ComplexMatrix>,
    converged: bool,
    iterations: usize,
}

fn local_ascent<F>(objective: &F, mut factors: Vec<ComplexMatrix>, gens: &[Generator], cfg: &OptimizerConfig) -> LocalOutcome
where
    F: Fn(&RankOnePvm) -> f64,
{
    let eval = |fs: &[ComplexMatrix]| objective(&RankOnePvm::from_unitary_unchecked(assemble(fs)));
    let min_step = cfg.min_step();
    let max_step = std::f64::consts::PI;
    let mut steps = vec![cfg.step_init; gens.len()];
    let mut value = eval(&factors);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        iterations += 1;
        let sweep_start = value;
        for (gi, &g) in gens.iter().enumerate() {
            let mut s = steps[gi];
            let mut moved = false;
            while s >= min_step {
                for dir in [1.0, -1.0] {
                    let mut trial = factors.clone();
                    rotate(&mut trial[g.factor], g, dir * s);
                    let v = eval(&trial);
                    if v > value {
                        factors = trial;
                        value = v;
                        moved = true;
                        // Keep going while the enlarged step still pays off.
                        while s * 2.0 <= max_step {
                            let mut further = factors.clone();
                            rotate(&mut further[g.factor], g, dir * s * 2.0);
                            let v2 = eval(&further);
                            if v2 > value {
                                factors = further;
                                value = v2;
                                s *= 2.0;
                            } else {
                                break;
                            }
                        }
                        break;
                    }
                }
                if moved {
                    break;
                }
                s *= 0.5;
            }
            steps[gi] = s.max(min_step);
        }
        if value - sweep_start <= cfg.rel_tol * sweep_start.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    LocalOutcome {
        value,
        factors,
        converged,
        iterations,
    }
}

fn run_multistart<A>(ascend: A, starts: Vec<Vec<ComplexMatrix>>) -> SupremumResult
where
    A: Fn(Vec<ComplexMatrix>) -> LocalOutcome + Sync + Send,
{
    let outcomes: Vec<LocalOutcome> = starts.into_par_iter().map(ascend).collect();

    let best_value = outcomes.iter().map(|o| o.value).fold(f64::NEG_INFINITY, f64::max);
    let best_restart = outcomes
        .iter()
        .position(|o| o.value >= best_value - TIE_TOL)
        .expect("at least one start");
    let best = &outcomes[best_restart];
    SupremumResult {
        value: best_value,
        best_basis: RankOnePvm::from_unitary_unchecked(assemble(&best.factors)),
        per_restart_values: outcomes.iter().map(|o| o.value).collect(),
        best_restart,
        converged: best.converged,
        iterations_used: best.iterations,
    }
}

/// Two-level rotation entries (r_jj, r_jk, r_kj, r_kk) applied by [`rotate`].
fn rotation_entries(kind: Kind, t: f64) -> (Complex64, Complex64, Complex64, Complex64) {
    let (cos, sin) = (t.cos(), t.sin());
    match kind {
        Kind::Sym => (c(cos, 0.0), I * sin, I * sin, c(cos, 0.0)),
        Kind::Asym => (c(cos, 0.0), c(sin, 0.0), c(-sin, 0.0), c(cos, 0.0)),
    }
}

/// Objective Σ_b φ(<b|X|b>) with incremental updates: a two-level rotation
/// of columns j, k only changes <j|X|j> and <k|X|k>, which follow from the
/// 2×2 block of U†XU in O(1).
struct DiagonalState<'a> {
    x: &'a ComplexMatrix,
    phi: fn(Complex64) -> f64,
    u: ComplexMatrix,
    /// X·U.
    xu: ComplexMatrix,
    diag: Vec<Complex64>,
    value: f64,
}

impl<'a> DiagonalState<'a> {
    fn new(x: &'a ComplexMatrix, phi: fn(Complex64) -> f64, u: ComplexMatrix) -> Self {
        let mut st = Self {
            x,
            phi,
            xu: x * &u,
            u,
            diag: Vec::new(),
            value: 0.0,
        };
        st.refresh();
        st
    }

    /// Recomputes everything from U to shed accumulated rounding.
    fn refresh(&mut self) {
        self.xu = self.x * &self.u;
        let d = self.u.nrows();
        self.diag = (0..d).map(|b| self.inner(b, b)).collect();
        self.value = self.diag.iter().map(|&z| (self.phi)(z)).sum();
    }

    /// <p|X|q> for basis columns p, q.
    fn inner(&self, p: usize, q: usize) -> Complex64 {
        (0..self.u.nrows()).map(|i| self.u.get(i, p).conj() * self.xu.get(i, q)).sum()
    }

    /// Value after rotating by `t`, plus the two new diagonal entries.
    fn trial(&self, g: Generator, t: f64) -> (f64, Complex64, Complex64) {
        let (j, k) = (g.j, g.k);
        let (gjj, gjk, gkj, gkk) = (self.diag[j], self.inner(j, k), self.inner(k, j), self.diag[k]);
        let (rjj, rjk, rkj, rkk) = rotation_entries(g.kind, t);
        let quad = |a: Complex64, b: Complex64| a.conj() * a * gjj + a.conj() * b * gjk + b.conj() * a * gkj + b.conj() * b * gkk;
        let (nj, nk) = (quad(rjj, rkj), quad(rjk, rkk));
        let phi = self.phi;
        (self.value - phi(gjj) - phi(gkk) + phi(nj) + phi(nk), nj, nk)
    }

    fn accept(&mut self, g: Generator, t: f64, trial: (f64, Complex64, Complex64)) {
        rotate(&mut self.u, g, t);
        rotate(&mut self.xu, g, t);
        self.value = trial.0;
        self.diag[g.j] = trial.1;
        self.diag[g.k] = trial.2;
    }
}

/// Same step rule as [`local_ascent`], specialized to diagonal objectives on
/// an unrestricted basis.
fn diagonal_ascent(x: &ComplexMatrix, phi: fn(Complex64) -> f64, start: ComplexMatrix, gens: &[Generator], cfg: &OptimizerConfig) -> LocalOutcome {
    let min_step = cfg.min_step();
    let max_step = std::f64::consts::PI;
    let mut steps = vec![cfg.step_init; gens.len()];
    let mut st = DiagonalState::new(x, phi, start);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        iterations += 1;
        let sweep_start = st.value;
        for (gi, &g) in gens.iter().enumerate() {
            let mut s = steps[gi];
            let mut moved = false;
            while s >= min_step {
                for dir in [1.0, -1.0] {
                    let t = st.trial(g, dir * s);
                    if t.0 > st.value {
                        st.accept(g, dir * s, t);
                        moved = true;
                        while s * 2.0 <= max_step {
                            let t2 = st.trial(g, dir * s * 2.0);
                            if t2.0 > st.value {
                                st.accept(g, dir * s * 2.0, t2);
                                s *= 2.0;
                            } else {
                                break;
                            }
                        }
                        break;
                    }
                }
                if moved {
                    break;
                }
                s *= 0.5;
            }
            steps[gi] = s.max(min_step);
        }
        st.refresh();
        if st.value - sweep_start <= cfg.rel_tol * sweep_start.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    LocalOutcome {
        value: st.value,
        factors: vec![st.u],
        converged,
        iterations,
    }
}

/// Supremum of Σ_b φ(<b|X|b>) over all rank-1 PVM bases. Equivalent to
/// [`sup_over_pvm_with_starts`] with that objective, but much cheaper.
pub fn sup_diagonal_objective(
    x: &ComplexMatrix,
    phi: fn(Complex64) -> f64,
    cfg: &OptimizerConfig,
    extra: &[ComplexMatrix],
) -> Result<SupremumResult> {
    let d = x.dim()?;
    for u in extra {
        require_dim(d, u.nrows())?;
    }
    let dims = [d];
    let gens = generators(&dims);
    let extra: Vec<Vec<ComplexMatrix>> = extra.iter().map(|u| vec![u.clone()]).collect();
    Ok(run_multistart(
        |mut factors: Vec<ComplexMatrix>| diagonal_ascent(x, phi, factors.remove(0), &gens, cfg),
        product_starts(&dims, cfg, &extra),
    ))
}

/// |z|, for nonclassicality objectives.
pub fn modulus(z: Complex64) -> f64 {
    z.norm()
}

/// |Im z|, for nonreality objectives.
pub fn imag_modulus(z: Complex64) -> f64 {
    z.im.abs()
}

/// Structured starts followed by `n_restarts` Haar-random ones.
///
/// Random start `r` draws from stream `r` of `cfg.seed`, so results do not
/// depend on scheduling.
fn product_starts(dims: &[usize], cfg: &OptimizerConfig, extra: &[Vec<ComplexMatrix>]) -> Vec<Vec<ComplexMatrix>> {
    let mut starts = Vec::new();
    if cfg.include_structured_starts {
        starts.push(dims.iter().map(|&d| ComplexMatrix::identity(d)).collect());
        starts.push(dims.iter().map(|&d| fourier_matrix(d)).collect());
        starts.extend(extra.iter().cloned());
    }
    for r in 0..cfg.n_restarts {
        let mut rng = rng_for(cfg.seed, r as u64);
        starts.push(dims.iter().map(|&d| haar_unitary_with(&mut rng, d)).collect());
    }
    starts
}

/// Multistart supremum of `objective` over all rank-1 PVM bases of C^d.
pub fn sup_over_pvm<F>(objective: F, d: usize, cfg: &OptimizerConfig) -> SupremumResult
where
    F: Fn(&RankOnePvm) -> f64 + Sync,
{
    sup_over_pvm_with_starts(objective, d, cfg, &[])
}

/// As [`sup_over_pvm`], with extra structured starting unitaries (e.g. the
/// eigenbasis of the state). Extra starts are ignored when
/// `include_structured_starts` is off.
pub fn sup_over_pvm_with_starts<F>(objective: F, d: usize, cfg: &OptimizerConfig, extra: &[ComplexMatrix]) -> SupremumResult
where
    F: Fn(&RankOnePvm) -> f64 + Sync,
{
    let dims = [d];
    let gens = generators(&dims);
    let extra: Vec<Vec<ComplexMatrix>> = extra.iter().map(|u| vec![u.clone()]).collect();
    run_multistart(|f| local_ascent(&objective, f, &gens, cfg), product_starts(&dims, cfg, &extra))
}

/// Supremum restricted to product bases Π^{b₁}⊗···⊗Π^{b_N}, one unitary per factor.
pub fn sup_over_product_pvm<F>(objective: F, dims: &[usize], cfg: &OptimizerConfig) -> Result<SupremumResult>
where
    F: Fn(&RankOnePvm) -> f64 + Sync,
{
    sup_over_product_pvm_with_starts(objective, dims, cfg, &[])
}

/// As [`sup_over_product_pvm`], with extra structured starts given as one
/// unitary per factor.
pub fn sup_over_product_pvm_with_starts<F>(
    objective: F,
    dims: &[usize],
    cfg: &OptimizerConfig,
    extra: &[Vec<ComplexMatrix>],
) -> Result<SupremumResult>
where
    F: Fn(&RankOnePvm) -> f64 + Sync,
{
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimMismatch { expected: 1, found: 0 });
    }
    for start in extra {
        require_dim(dims.len(), start.len())?;
        for (u, &d) in start.iter().zip(dims) {
            require_dim(d, u.nrows())?;
        }
    }
    let gens = generators(dims);
    Ok(run_multistart(|f| local_ascent(&objective, f, &gens, cfg), product_starts(dims, cfg, extra)))
}

/// Qubit basis with Bloch angles (θ, φ) for its first vector.
pub fn qubit_basis(theta: f64, phi: f64) -> RankOnePvm {
    let (h_cos, h_sin) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = num_complex::Complex64::from_polar(1.0, phi);
    let u = ComplexMatrix::from_rows(&[
        vec![c(h_cos, 0.0), -e.conj() * h_sin],
        vec![e * h_sin, c(h_cos, 0.0)],
    ]);
    RankOnePvm::from_unitary_unchecked(u)
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Exhaustive Bloch-sphere scan for qubit objectives, used as an oracle.
///
/// θ takes the `grid_density + 1` values πi/n and φ the `2n` values πj/n, so
/// every coarser grid whose density divides this one is a subset. The best
/// grid point is then polished by alternating golden-section searches.
pub fn brute_force_sup_qubit<F>(objective: F, grid_density: usize) -> f64
where
    F: Fn(&RankOnePvm) -> f64,
{
    let n = grid_density.max(1);
    let h = std::f64::consts::PI / n as f64;
    let f = |theta: f64, phi: f64| objective(&qubit_basis(theta, phi));
    let (mut best_t, mut best_p, mut best) = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 0..=n {
        for j in 0..2 * n {
            let (t, p) = (h * i as f64, h * j as f64);
            let v = f(t, p);
            if v > best {
                (best_t, best_p, best) = (t, p, v);
            }
        }
    }
    let mut width = h;
    for _ in 0..40 {
        let (t, v) = golden_max(|t| f(t, best_p), best_t - width, best_t + width, 60);
        if v > best {
            (best_t, best) = (t, v);
        }
        let (p, v) = golden_max(|p| f(best_t, p), best_p - width, best_p + width, 60);
        if v > best {
            (best_p, best) = (p, v);
        }
        width *= 0.5;
    }
    best
}

/// Σ_b |Tr{Π^b X}| for the basis held by `pvm`.
pub fn abs_diagonal_sum(pvm: &RankOnePvm, x: &ComplexMatrix) -> f64 {
    pvm.diagonal_of(x).iter().map(|z| z.norm()).sum()
}

/// Σ_b |Im Tr{Π^b X}|.
pub fn abs_imag_diagonal_sum(pvm: &RankOnePvm, x: &ComplexMatrix) -> f64 {
    pvm.diagonal_of(x).iter().map(|z| z.im.abs()).sum()
}

fn check_dims(state: &DensityMatrix, povm: &Povm) -> Result<usize> {
    require_dim(state.dim(), povm.dim())?;
    Ok(state.dim())
}

/// KD-nonreality quantum uncertainty, exact: Σ_a ‖[M^a, ϱ]‖₁ / 2.
pub fn quantum_nonreality(state: &DensityMatrix, povm: &Povm) -> Result<f64> {
    check_dims(state, povm)?;
    Ok(povm
        .effects()
        .iter()
        .map(|m| trace_norm(&m.commutator(state.matrix())) / 2.0)
        .sum())
}

/// Starting bases that tend to sit near the maximizer for the product M^aϱ.
fn start_recipes(rho: &ComplexMatrix, effect: &ComplexMatrix, product: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let f = fourier_matrix(rho.nrows());
    let rho_basis = hermitian_eigenbasis(rho);
    let effect_basis = hermitian_eigenbasis(effect);
    let anti = (product - &product.adjoint()).scale(-I * 0.5);
    vec![
        rho_basis.clone(),
        &effect_basis * &f,
        &rho_basis * &f,
        effect_basis,
        hermitian_eigenbasis(&product.hermitian_part()),
        hermitian_eigenbasis(&anti),
    ]
}

fn effect_starts(state: &DensityMatrix, effect: &ComplexMatrix) -> Vec<ComplexMatrix> {
    start_recipes(state.matrix(), effect, &(effect * state.matrix()))
}

/// Reduced operator on factor `k` of a space with factor dimensions `dims`.
fn reduce_to_factor(m: &ComplexMatrix, dims: &[usize], k: usize) -> Result<ComplexMatrix> {
    let before: usize = dims[..k].iter().product();
    let after: usize = dims[k + 1..].iter().product();
    let head = partial_trace(m, (before * dims[k], after), Subsystem::First)?;
    partial_trace(&head, (before, dims[k]), Subsystem::Second)
}

/// Per-factor versions of the single-system starts, built from reduced operators.
fn product_effect_starts(state: &DensityMatrix, effect: &ComplexMatrix, dims: &[usize]) -> Result<Vec<Vec<ComplexMatrix>>> {
    let product = effect * state.matrix();
    let mut per_factor = Vec::with_capacity(dims.len());
    for k in 0..dims.len() {
        per_factor.push(start_recipes(
            &reduce_to_factor(state.matrix(), dims, k)?,
            &reduce_to_factor(effect, dims, k)?,
            &reduce_to_factor(&product, dims, k)?,
        ));
    }
    let n_recipes = per_factor[0].len();
    Ok((0..n_recipes)
        .map(|i| per_factor.iter().map(|recipes| recipes[i].clone()).collect())
        .collect())
}

/// Variational evaluation of the nonreality supremum, kept to cross-check
/// [`quantum_nonreality`].
pub fn quantum_nonreality_variational(state: &DensityMatrix, povm: &Povm, cfg: &OptimizerConfig) -> Result<EffectwiseSupremum> {
    check_dims(state, povm)?;
    cfg.validate()?;
    let per_effect: Vec<SupremumResult> = povm
        .effects()
        .iter()
        .map(|m| {
            sup_diagonal_objective(&(m * state.matrix()), imag_modulus, cfg, &effect_starts(state, m))
        })
        .collect::<Result<_>>()?;
    let value = per_effect.iter().map(|r| r.value).sum();
    Ok(EffectwiseSupremum { value, per_effect })
}

/// KD-nonclassicality quantum uncertainty: Σ_a sup_Π Σ_b |Tr{Π^b M^a ϱ}| − 1.
pub fn quantum_nonclassicality(state: &DensityMatrix, povm: &Povm, cfg: &OptimizerConfig) -> Result<EffectwiseSupremum> {
    check_dims(state, povm)?;
    cfg.validate()?;
    let per_effect: Vec<SupremumResult> = povm
        .effects()
        .iter()
        .map(|m| {
            sup_diagonal_objective(&(m * state.matrix()), modulus, cfg, &effect_starts(state, m))
        })
        .collect::<Result<_>>()?;
    let value = clamp_tiny_negative(per_effect.iter().map(|r| r.value).sum::<f64>() - 1.0);
    Ok(EffectwiseSupremum { value, per_effect })
}

fn product_effectwise(
    state: &DensityMatrix,
    povm: &Povm,
    dims: &[usize],
    cfg: &OptimizerConfig,
    objective: fn(&RankOnePvm, &ComplexMatrix) -> f64,
) -> Result<Vec<SupremumResult>> {
    let d = check_dims(state, povm)?;
    cfg.validate()?;
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimMismatch { expected: d, found: 0 });
    }
    require_dim(d, dims.iter().product())?;
    povm.effects()
        .iter()
        .map(|m| {
            let x = m * state.matrix();
            let extra = product_effect_starts(state, m, dims)?;
            sup_over_product_pvm_with_starts(|p| objective(p, &x), dims, cfg, &extra)
        })
        .collect()
}

/// Nonreality supremum restricted to product bases, for a POVM on a
/// multipartite space with factor dimensions `dims`. No closed form applies
/// once the basis is constrained, so this is always variational.
pub fn quantum_nonreality_product(
    state: &DensityMatrix,
    povm: &Povm,
    dims: &[usize],
    cfg: &OptimizerConfig,
) -> Result<EffectwiseSupremum> {
    let per_effect = product_effectwise(state, povm, dims, cfg, abs_imag_diagonal_sum)?;
    let value = per_effect.iter().map(|r| r.value).sum();
    Ok(EffectwiseSupremum { value, per_effect })
}

/// Nonclassicality supremum restricted to product bases.
pub fn quantum_nonclassicality_product(
    state: &DensityMatrix,
    povm: &Povm,
    dims: &[usize],
    cfg: &OptimizerConfig,
) -> Result<EffectwiseSupremum> {
    let per_effect = product_effectwise(state, povm, dims, cfg, abs_diagonal_sum)?;
    let value = clamp_tiny_negative(per_effect.iter().map(|r| r.value).sum::<f64>() - 1.0);
    Ok(EffectwiseSupremum { value, per_effect })
}
