//! Randomized property suites for every module, runnable at a chosen scale.
//!
//! Each property draws its instances from its own seeded stream, computes a
//! nonnegative discrepancy per instance, and passes when the worst one stays
//! within the tolerance.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kd::{johansen_components, kd_table, table_nonclassicality};
use crate::linalg::{
    hermitian_eigenvalues, operator_sqrt, partial_trace, spectral_decompose, tensor, trace_norm, ComplexMatrix, Subsystem, I,
};
use crate::optimize::{
    abs_diagonal_sum, quantum_nonclassicality_product, quantum_nonreality, quantum_nonreality_product,
    quantum_nonreality_variational, sup_over_pvm, OptimizerConfig,
};
use crate::random::{
    ginibre, haar_unitary_with, random_density_with, random_povm_with, random_pure_with, random_rank_one_povm_with, rng_for,
};
use crate::state::{DensityMatrix, Povm, RankOnePvm};
use crate::uncertainty::{
    bound_asymmetry, coarse_grain, decompose, impurity, infimum_total, outcome_probs, quantum_uncertainty, s_entropy,
    total_uncertainty, uncertainty_relation_bound, Flavor,
};
use crate::witness::{contextuality_witness, disturbance_nonreality, is_strange, weak_values, DEFAULT_WITNESS_THRESHOLD};

/// Flag threshold for "vanishes" in the commutation equivalence.
const NCOMM_EPS: f64 = 1e-7;
/// Zero threshold for the coherence-faithfulness property.
const QU4_EPS: f64 = 1e-8;
/// Random rank-1 POVMs scored against the infimum per state.
const INFIMUM_PROBES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestConfig {
    pub dims: Vec<usize>,
    /// Random instances per property.
    pub samples: usize,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
    /// Test hook: run this property with a negative tolerance so it must fail.
    pub break_property: Option<String>,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 4],
            samples: 30,
            seed: 0,
            optimizer: OptimizerConfig::default(),
            break_property: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub module: &'static str,
    pub instances: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub passed: bool,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub samples: usize,
    pub properties: Vec<PropertyResult>,
}

impl SelftestReport {
    pub fn failed(&self) -> Vec<&'static str> {
        self.properties.iter().filter(|p| !p.passed).map(|p| p.name).collect()
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for p in &self.properties {
            out.push_str(&format!(
                "{} {:<22} [{}] {} instances, worst {:.3e}, tolerance {:.1e}\n",
                if p.passed { "PASS" } else { "FAIL" },
                p.name,
                p.module,
                p.instances,
                p.worst,
                p.tolerance
            ));
        }
        let failed = self.failed();
        if failed.is_empty() {
            out.push_str(&format!("all {} properties passed\n", self.properties.len()));
        } else {
            out.push_str(&format!("{} failed: {}\n", failed.len(), failed.join(", ")));
        }
        out
    }
}

struct Ctx<'a> {
    cfg: &'a SelftestConfig,
    /// Index of the property being run, used to separate RNG streams.
    stream: u64,
}

impl Ctx<'_> {
    fn rng(&self, i: usize) -> ChaCha8Rng {
        rng_for(self.cfg.seed, (3 << 32) + (self.stream << 20) + i as u64)
    }

    fn dim(&self, i: usize) -> usize {
        self.cfg.dims[i % self.cfg.dims.len()]
    }

    fn opt(&self) -> &OptimizerConfig {
        &self.cfg.optimizer
    }
}

type Check = fn(&Ctx, usize) -> Result<f64>;

struct Property {
    name: &'static str,
    module: &'static str,
    tolerance: f64,
    check: Check,
}

const fn prop(name: &'static str, module: &'static str, tolerance: f64, check: Check) -> Property {
    Property {
        name,
        module,
        tolerance,
        check,
    }
}

const PROPERTIES: &[Property] = &[
    prop("core.trace_norm", "qstate-core", 1e-9, core_trace_norm),
    prop("core.spectral", "qstate-core", 1e-9, core_spectral),
    prop("core.sqrt", "qstate-core", 1e-8, core_sqrt),
    prop("core.validators", "qstate-core", 0.0, core_validators),
    prop("core.partial_trace", "qstate-core", 1e-10, core_partial_trace),
    prop("kd.marginals", "kd-quasiprob", 1e-9, kd_marginals),
    prop("kd.commuting_real", "kd-quasiprob", 1e-10, kd_commuting_real),
    prop("kd.johansen", "kd-quasiprob", 1e-9, kd_johansen),
    prop("Lemma1", "pvm-optimize", 1e-6, lemma1),
    prop("NRe.variational", "pvm-optimize", 1e-6, nre_variational),
    prop("NComm1", "pvm-optimize", 0.0, ncomm1),
    prop("NComm2.NRe", "pvm-optimize", 1e-9, ncomm2_nre),
    prop("NComm2.NCl", "pvm-optimize", 1e-6, ncomm2_ncl),
    prop("NComm3.NRe", "pvm-optimize", 1e-6, ncomm3_nre),
    prop("NComm3.NCl", "pvm-optimize", 1e-6, ncomm3_ncl),
    prop("QU1.NRe", "uncertainty", 1e-6, qu1_nre),
    prop("QU1.NCl", "uncertainty", 1e-6, qu1_ncl),
    prop("QU1.equality", "uncertainty", 1e-6, qu1_equality),
    prop("QU2.NRe", "uncertainty", 1e-6, qu2_nre),
    prop("QU2.NCl", "uncertainty", 1e-6, qu2_ncl),
    prop("QU3.NRe", "uncertainty", 1e-6, qu3_nre),
    prop("QU3.NCl", "uncertainty", 1e-6, qu3_ncl),
    prop("QU4", "uncertainty", 0.0, qu4),
    prop("QCD1", "uncertainty", 1e-6, qcd1),
    prop("QCD2", "uncertainty", 1e-8, qcd2),
    prop("QCD3.NRe", "uncertainty", 1e-6, qcd3_nre),
    prop("QCD3.NCl", "uncertainty", 1e-6, qcd3_ncl),
    prop("QCD4", "uncertainty", 1e-9, qcd4),
    prop("QCD5", "uncertainty", 1e-6, qcd5),
    prop("maximal", "uncertainty", 1e-6, maximal),
    prop("infimum", "uncertainty", 1e-9, infimum),
    prop("bound.asymmetry", "uncertainty", 1e-6, bound_asym),
    prop("bound.relation", "uncertainty", 1e-6, bound_relation),
    prop("weak.factorization", "witness", 1e-9, weak_factorization),
    prop("Thm1.flags", "witness", 0.0, thm1_flags),
    prop("Thm1.soundness", "witness", 1e-9, thm1_soundness),
    prop("Prop3", "witness", 1e-9, prop3),
];

pub fn property_names() -> Vec<&'static str> {
    PROPERTIES.iter().map(|p| p.name).collect()
}

pub fn run_selftest(cfg: &SelftestConfig) -> Result<SelftestReport> {
    run_selected(cfg, |_| true)
}

/// Runs the properties whose names satisfy `select`.
pub fn run_selected(cfg: &SelftestConfig, select: impl Fn(&str) -> bool) -> Result<SelftestReport> {
    if cfg.dims.is_empty() || cfg.dims.iter().any(|&d| d < 2) {
        return Err(Error::BadConfig {
            reason: "dims must be a nonempty list of integers >= 2".into(),
        });
    }
    if cfg.samples == 0 {
        return Err(Error::BadConfig {
            reason: "samples must be at least 1".into(),
        });
    }
    if let Some(name) = &cfg.break_property {
        if !PROPERTIES.iter().any(|p| p.name == name) {
            return Err(Error::BadConfig {
                reason: format!("unknown property {name:?}"),
            });
        }
    }
    cfg.optimizer.validate()?;

    let mut properties = Vec::new();
    for (k, p) in PROPERTIES.iter().enumerate() {
        if !select(p.name) {
            continue;
        }
        let ctx = Ctx { cfg, stream: k as u64 };
        let mut worst = 0.0f64;
        for i in 0..cfg.samples {
            let v = (p.check)(&ctx, i)?;
            // NaN counts as a failure.
            worst = if v.is_nan() { f64::INFINITY } else { worst.max(v) };
        }
        let tolerance = if cfg.break_property.as_deref() == Some(p.name) {
            -1.0
        } else {
            p.tolerance
        };
        properties.push(PropertyResult {
            name: p.name,
            module: p.module,
            instances: cfg.samples,
            worst,
            tolerance,
            passed: worst <= tolerance,
        });
    }
    Ok(SelftestReport {
        passed: properties.iter().all(|p| p.passed),
        seed: cfg.seed,
        dims: cfg.dims.clone(),
        samples: cfg.samples,
        properties,
    })
}

// Instance generators.

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    ginibre(rng, d, d).hermitian_part()
}

fn random_probs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

fn random_state(rng: &mut ChaCha8Rng, d: usize) -> Result<DensityMatrix> {
    let rank = rng.random_range(1..=d);
    random_density_with(rng, d, rank)
}

fn random_outcomes(rng: &mut ChaCha8Rng, d: usize) -> usize {
    rng.random_range(2..=d + 1)
}

fn random_pair(rng: &mut ChaCha8Rng, d: usize) -> Result<(DensityMatrix, Povm)> {
    let state = random_state(rng, d)?;
    let n = random_outcomes(rng, d);
    Ok((state, random_povm_with(rng, d, n)?))
}

fn random_basis(rng: &mut ChaCha8Rng, d: usize) -> RankOnePvm {
    RankOnePvm::from_unitary(haar_unitary_with(rng, d)).expect("Haar sample is unitary")
}

/// State and POVM that are both diagonal in one random basis.
fn commuting_pair(rng: &mut ChaCha8Rng, d: usize) -> Result<(DensityMatrix, Povm)> {
    let v = haar_unitary_with(rng, d);
    let state = DensityMatrix::diagonal(&random_probs(rng, d))?.conjugate(&v);
    let n = random_outcomes(rng, d);
    // Column j holds the outcome distribution on basis vector j.
    let columns: Vec<Vec<f64>> = (0..d).map(|_| random_probs(rng, n)).collect();
    let effects = (0..n)
        .map(|a| ComplexMatrix::from_real_diagonal(&columns.iter().map(|col| col[a]).collect::<Vec<_>>()))
        .collect();
    Ok((state, Povm::new(effects)?.conjugate(&v)))
}

fn quantum(state: &DensityMatrix, povm: &Povm, flavor: Flavor, cfg: &OptimizerConfig) -> Result<f64> {
    Ok(quantum_uncertainty(state, povm, flavor, cfg)?.0)
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

// qstate-core

fn core_trace_norm(ctx: &Ctx, i: usize) -> Result<f64> {
    let h = random_hermitian(&mut ctx.rng(i), ctx.dim(i));
    let eig: f64 = hermitian_eigenvalues(&h).iter().map(|l| l.abs()).sum();
    Ok((trace_norm(&h) - eig).abs())
}

fn core_spectral(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let mut h = random_hermitian(&mut rng, d);
    if i % 2 == 1 {
        // Force a degenerate pair.
        let v = haar_unitary_with(&mut rng, d);
        let mut spectrum: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        spectrum[1] = spectrum[0];
        h = &v * &ComplexMatrix::from_real_diagonal(&spectrum) * &v.adjoint();
    }
    Ok(spectral_decompose(&h)?.reconstruct().max_abs_diff(&h))
}

fn core_sqrt(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let rank = rng.random_range(1..=d);
    let h = random_density_with(&mut rng, d, rank)?.matrix().scale_real(3.0);
    let s = operator_sqrt(&h)?;
    Ok((&s * &s).max_abs_diff(&h))
}

fn core_validators(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let (state, povm) = random_pair(&mut rng, d)?;
    let state_ok = DensityMatrix::new(state.matrix().clone()).is_ok();
    let povm_ok = Povm::new(povm.effects().to_vec()).is_ok();
    Ok(indicator(!(state_ok && povm_ok)))
}

fn core_partial_trace(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let (d1, d2) = (ctx.dim(i), ctx.dim(i + 1));
    let r1 = random_state(&mut rng, d1)?;
    let r2 = random_state(&mut rng, d2)?;
    let joint = tensor(r1.matrix(), r2.matrix());
    let e1 = partial_trace(&joint, (d1, d2), Subsystem::First)?.max_abs_diff(r1.matrix());
    let e2 = partial_trace(&joint, (d1, d2), Subsystem::Second)?.max_abs_diff(r2.matrix());
    Ok(e1.max(e2))
}

// kd-quasiprob

fn kd_marginals(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let (state, first) = random_pair(&mut rng, d)?;
    let n = random_outcomes(&mut rng, d);
    let second = random_povm_with(&mut rng, d, n)?;
    let t = kd_table(&state, &first, &second)?;
    let pa = outcome_probs(&state, &first)?;
    let pb = outcome_probs(&state, &second)?;
    let ea = t.marginal_first().iter().zip(&pa).map(|(m, p)| (m - p).norm()).fold(0.0, f64::max);
    let eb = t.marginal_second().iter().zip(&pb).map(|(m, p)| (m - p).norm()).fold(0.0, f64::max);
    // Nonclassicality is nonnegative.
    let neg = (-table_nonclassicality(&t)).max(0.0);
    Ok(ea.max(eb).max(neg))
}

fn kd_commuting_real(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let (state, first) = commuting_pair(&mut rng, d)?;
    let n = random_outcomes(&mut rng, d);
    let second = random_povm_with(&mut rng, d, n)?;
    let t = kd_table(&state, &first, &second)?;
    let mut worst = t.values.iter().map(|z| z.im.abs().max(-z.re)).fold(0.0, f64::max);
    // Same basis on both sides with a diagonal state: the table is diag(λ).
    let basis = random_basis(&mut rng, d);
    let probs = random_probs(&mut rng, d);
    let diag_state = DensityMatrix::diagonal(&probs)?.conjugate(basis.unitary());
    let t = kd_table(&diag_state, &basis.as_povm(), &basis.as_povm())?;
    for (a, &pa) in probs.iter().enumerate() {
        for b in 0..d {
            let expected = if a == b { pa } else { 0.0 };
            worst = worst.max((t.get(a, b) - Complex64::new(expected, 0.0)).norm());
        }
    }
    Ok(worst)
}

fn kd_johansen(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let state = random_state(&mut rng, d)?;
    let p = random_basis(&mut rng, d);
    let q = random_basis(&mut rng, d);
    let t = kd_table(&state, &p.as_povm(), &q.as_povm())?;
    let comps = johansen_components(&state, &p, &q)?;
    let mut worst = 0.0f64;
    for (a, row) in comps.iter().enumerate() {
        for (b, comp) in row.iter().enumerate() {
            worst = worst.max((comp.sum() - t.get(a, b)).norm());
        }
    }
    Ok(worst)
}

// pvm-optimize

fn lemma1(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let h = random_hermitian(&mut rng, d);
    let o = if i.is_multiple_of(2) { h } else { h.scale(I) };
    let r = sup_over_pvm(|p| abs_diagonal_sum(p, &o), d, ctx.opt());
    Ok((r.value - trace_norm(&o)).abs())
}

fn nre_variational(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let state = random_state(&mut rng, d)?;
    let povm = random_basis(&mut rng, d).as_povm();
    let v = quantum_nonreality_variational(&state, &povm, ctx.opt())?.value;
    Ok((v - quantum_nonreality(&state, &povm)?).abs())
}

fn ncomm1(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let commuting = i.is_multiple_of(3);
    let (state, povm) = if commuting {
        commuting_pair(&mut rng, d)?
    } else {
        random_pair(&mut rng, d)?
    };
    let nre = quantum(&state, &povm, Flavor::NRe, ctx.opt())? > NCOMM_EPS;
    let ncl = quantum(&state, &povm, Flavor::NCl, ctx.opt())? > NCOMM_EPS;
    Ok(indicator(nre != ncl || nre == commuting))
}

fn ncomm2(ctx: &Ctx, i: usize, flavor: Flavor) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let (state, povm) = random_pair(&mut rng, d)?;
    let v = haar_unitary_with(&mut rng, d);
    let before = quantum(&state, &povm, flavor, ctx.opt())?;
    let after = quantum(&state.conjugate(&v), &povm.conjugate(&v), flavor, ctx.opt())?;
    Ok((before - after).abs())
}

fn ncomm2_nre(ctx: &Ctx, i: usize) -> Result<f64> {
    ncomm2(ctx, i, Flavor::NRe)
}

fn ncomm2_ncl(ctx: &Ctx, i: usize) -> Result<f64> {
    ncomm2(ctx, i, Flavor::NCl)
}

fn ncomm3(ctx: &Ctx, i: usize, flavor: Flavor) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let states = [random_state(&mut rng, d)?, random_state(&mut rng, d)?];
    let n = random_outcomes(&mut rng, d);
    let povms = [random_povm_with(&mut rng, d, n)?, random_povm_with(&mut rng, d, n)?];
    let p = random_probs(&mut rng, 2);
    let q = random_probs(&mut rng, 2);
    let mixed = quantum(&DensityMatrix::mixture(&p, &states)?, &Povm::mixture(&q, &povms)?, flavor, ctx.opt())?;
    let mut bound = 0.0;
    for (pj, s) in p.iter().zip(&states) {
        for (qk, m) in q.iter().zip(&povms) {
            bound += pj * qk * quantum(s, m, flavor, ctx.opt())?;
        }
    }
    Ok((mixed - bound).max(0.0))
}

fn ncomm3_nre(ctx: &Ctx, i: usize) -> Result<f64> {
    ncomm3(ctx, i, Flavor::NRe)
}

fn ncomm3_ncl(ctx: &Ctx, i: usize) -> Result<f64> {
    ncomm3(ctx, i, Flavor::NCl)
}

// uncertainty

fn qu1(ctx: &Ctx, i: usize, flavor: Flavor) -> Result<f64> {
    let (state, povm) = random_pair(&mut ctx.rng(i), ctx.dim(i))?;
    let dec = decompose(&state, &povm, flavor, ctx.opt())?;
    Ok((dec.quantum - dec.total).max(0.0))
}

fn qu1_nre(ctx: &Ctx, i: usize) -> Result<f64> {
    qu1(ctx, i, Flavor::NRe)
}

fn qu1_ncl(ctx: &Ctx, i: usize) -> Result<f64> {
    qu1(ctx, i, Flavor::NCl)
}

fn pure_rank_one(ctx: &Ctx, i: usize) -> (DensityMatrix, Povm) {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let state = random_pure_with(&mut rng, d);
    (state, random_basis(&mut rng, d).as_povm())
}

fn qu1_equality(ctx: &Ctx, i: usize) -> Result<f64> {
    let (state, povm) = pure_rank_one(ctx, i);
    let mut worst = 0.0f64;
    for flavor in Flavor::ALL {
        let dec = decompose(&state, &povm, flavor, ctx.opt())?;
        worst = worst.max((dec.quantum - dec.total).abs());
    }
    Ok(worst)
}

fn qu2(ctx: &Ctx, i: usize, flavor: Flavor) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let joint = random_state(&mut rng, 4)?;
    let n = random_outcomes(&mut rng, 2);
    let local = random_povm_with(&mut rng, 2, n)?;
    let extended = local.extend_with_identity(2);
    let reduced = DensityMatrix::new(partial_trace(joint.matrix(), (2, 2), Subsystem::First)?.hermitian_part())?;
    let dims = [2, 2];
    let (full, part) = match flavor {
        Flavor::NRe => (
            quantum_nonreality_product(&joint, &extended, &dims, ctx.opt())?.value,
            quantum_nonreality(&reduced, &local)?,
        ),
        Flavor::NCl => (
            quantum_nonclassicality_product(&joint, &extended, &dims, ctx.opt())?.value,
            quantum(&reduced, &local, Flavor::NCl, ctx.opt())?,
        ),
    };
    Ok((part - full).max(0.0))
}

fn qu2_nre(ctx: &Ctx, i: usize) -> Result<f64> {
    qu2(ctx, i, Flavor::NRe)
}

fn qu2_ncl(ctx: &Ctx, i: usize) -> Result<f64> {
    qu2(ctx, i, Flavor::NCl)
}

fn qu3(ctx: &Ctx, i: usize, flavor: Flavor) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let state = random_state(&mut rng, d)?;
    let n = rng.random_range(3..=d + 2);
    let povm = random_povm_with(&mut rng, d, n)?;
    // Random partition into two nonempty blocks.
    let cut = rng.random_range(1..n);
    let mut order: Vec<usize> = (0..n).collect();
    for k in (1..n).rev() {
        order.swap(k, rng.random_range(0..=k));
    }
    let partition = vec![order[..cut].to_vec(), order[cut..].to_vec()];
    let coarse = coarse_grain(&povm, &partition)?;
    let before = quantum(&state, &povm, flavor, ctx.opt())?;
    let after = quantum(&state, &coarse, flavor, ctx.opt())?;
    Ok((after - before).max(0.0))
}

fn qu3_nre(ctx: &Ctx, i: usize) -> Result<f64> {
    qu3(ctx, i, Flavor::NRe)
}

fn qu3_ncl(ctx: &Ctx, i: usize) -> Result<f64> {
    qu3(ctx, i, Flavor::NCl)
}

fn qu4(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let basis = random_basis(&mut rng, d);
    let diagonal = i.is_multiple_of(2);
    let state = if diagonal {
        DensityMatrix::diagonal(&random_probs(&mut rng, d))?.conjugate(basis.unitary())
    } else {
        random_state(&mut rng, d)?
    };
    let mut mismatches = 0.0;
    for flavor in Flavor::ALL {
        let zero = quantum(&state, &basis.as_povm(), flavor, ctx.opt())? <= QU4_EPS;
        mismatches += indicator(zero != diagonal);
    }
    Ok(mismatches)
}

fn qcd1(ctx: &Ctx, i: usize) -> Result<f64> {
    let (state, povm) = pure_rank_one(ctx, i);
    let mut worst = 0.0f64;
    for flavor in Flavor::ALL {
        worst = worst.max(decompose(&state, &povm, flavor, ctx.opt())?.classical.abs());
    }
    Ok(worst)
}

fn qcd2(ctx: &Ctx, i: usize) -> Result<f64> {
    let (state, povm) = commuting_pair(&mut ctx.rng(i), ctx.dim(i))?;
    let mut worst = 0.0f64;
    for flavor in Flavor::ALL {
        let dec = decompose(&state, &povm, flavor, ctx.opt())?;
        worst = worst.max(dec.quantum.abs()).max((dec.classical - dec.total).abs());
    }
    Ok(worst)
}

fn qcd3(ctx: &Ctx, i: usize, flavor: Flavor) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let states = [random_state(&mut rng, d)?, random_state(&mut rng, d)?];
    let n = random_outcomes(&mut rng, d);
    let povm = random_povm_with(&mut rng, d, n)?;
    let w = random_probs(&mut rng, 2);
    let mixed = decompose(&DensityMatrix::mixture(&w, &states)?, &povm, flavor, ctx.opt())?.classical;
    let mut bound = 0.0;
    for (wj, s) in w.iter().zip(&states) {
        bound += wj * decompose(s, &povm, flavor, ctx.opt())?.classical;
    }
    Ok((bound - mixed).max(0.0))
}

fn qcd3_nre(ctx: &Ctx, i: usize) -> Result<f64> {
    qcd3(ctx, i, Flavor::NRe)
}

fn qcd3_ncl(ctx: &Ctx, i: usize) -> Result<f64> {
    qcd3(ctx, i, Flavor::NCl)
}

fn parts_distance(a: &crate::uncertainty::Decomposition, b: &crate::uncertainty::Decomposition) -> f64 {
    (a.total - b.total)
        .abs()
        .max((a.quantum - b.quantum).abs())
        .max((a.classical - b.classical).abs())
}

fn qcd4(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let (state, povm) = random_pair(&mut rng, ctx.dim(i))?;
    let n = povm.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in (1..n).rev() {
        perm.swap(k, rng.random_range(0..=k));
    }
    let permuted = povm.permuted(&perm)?;
    let mut worst = 0.0f64;
    for flavor in Flavor::ALL {
        let a = decompose(&state, &povm, flavor, ctx.opt())?;
        let b = decompose(&state, &permuted, flavor, ctx.opt())?;
        worst = worst.max(parts_distance(&a, &b));
    }
    Ok(worst)
}

fn qcd5(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let (state, povm) = random_pair(&mut rng, d)?;
    let v = haar_unitary_with(&mut rng, d);
    let mut worst = 0.0f64;
    for flavor in Flavor::ALL {
        let a = decompose(&state, &povm, flavor, ctx.opt())?;
        let b = decompose(&state.conjugate(&v), &povm.conjugate(&v), flavor, ctx.opt())?;
        worst = worst.max(parts_distance(&a, &b));
    }
    Ok(worst)
}

/// Cycles through the three maximal-uncertainty cases.
fn maximal(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let mut worst = 0.0f64;
    match i % 3 {
        0 => {
            let state = DensityMatrix::maximally_coherent(d);
            let povm = RankOnePvm::computational(d).as_povm();
            let expected = [(d as f64 - 1.0).sqrt(), (d as f64).sqrt() - 1.0];
            for (flavor, e) in Flavor::ALL.into_iter().zip(expected) {
                let dec = decompose(&state, &povm, flavor, ctx.opt())?;
                worst = worst.max((dec.total - e).abs()).max((dec.quantum - e).abs());
            }
        }
        1 => {
            let state = DensityMatrix::maximally_mixed(d);
            let povm = random_basis(&mut rng, d).as_povm();
            for flavor in Flavor::ALL {
                let dec = decompose(&state, &povm, flavor, ctx.opt())?;
                worst = worst.max((dec.classical - dec.total).abs());
            }
        }
        _ => {
            let state = random_state(&mut rng, d)?;
            let povm = Povm::trivial(d, d);
            for flavor in Flavor::ALL {
                let dec = decompose(&state, &povm, flavor, ctx.opt())?;
                worst = worst.max((dec.classical - dec.total).abs());
            }
        }
    }
    Ok(worst)
}

fn infimum(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    // Full rank: √ turns eigenvalue roundoff near 0 into errors of order 1e-8.
    let state = random_density_with(&mut rng, d, d)?;
    let mut worst = 0.0f64;
    for flavor in Flavor::ALL {
        let inf = infimum_total(&state, flavor);
        let lam = state.eigenvalues();
        let formula = match flavor {
            Flavor::NRe => lam.iter().map(|l| (l.max(0.0) - l * l).max(0.0).sqrt()).sum::<f64>(),
            Flavor::NCl => lam.iter().map(|l| l.max(0.0).sqrt()).sum::<f64>() - 1.0,
        };
        worst = worst.max((inf.value - formula).abs());
        worst = worst.max((total_uncertainty(&state, &inf.achieving_povm, flavor)? - inf.value).abs());
        worst = worst.max(quantum(&state, &inf.achieving_povm, flavor, ctx.opt())?.abs());
        for _ in 0..INFIMUM_PROBES {
            let n = rng.random_range(d..=2 * d);
            let povm = random_rank_one_povm_with(&mut rng, d, n)?;
            worst = worst.max(inf.value - total_uncertainty(&state, &povm, flavor)?);
        }
        debug_assert!((impurity(&state, flavor) - inf.value).abs() < 1e-12);
    }
    Ok(worst)
}

fn bound_asym(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let state = random_state(&mut rng, d)?;
    let pvm = random_basis(&mut rng, d);
    let b = bound_asymmetry(&state, &pvm, ctx.opt())?;
    let s = s_entropy(&outcome_probs(&state, &pvm.as_povm())?)?;
    Ok((b.value - s).max(0.0))
}

fn bound_relation(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let state = random_state(&mut rng, d)?;
    let pa = random_basis(&mut rng, d);
    let pb = random_basis(&mut rng, d);
    let r = uncertainty_relation_bound(&state, &pa, &pb, ctx.opt())?;
    let s = s_entropy(&outcome_probs(&state, &pa.as_povm())?)? + s_entropy(&outcome_probs(&state, &pb.as_povm())?)?;
    Ok((r.value - s).max(0.0))
}

// witness

fn weak_factorization(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let (state, povm) = random_pair(&mut rng, d)?;
    let basis = random_basis(&mut rng, d);
    let w = weak_values(&state, &povm, &basis)?;
    let t = kd_table(&state, &povm, &basis.as_povm())?;
    let mut worst = (w.postselect_probs.iter().sum::<f64>() - 1.0).abs();
    for a in 0..w.n_a {
        for b in 0..w.n_b {
            if let Some(v) = w.get(a, b) {
                worst = worst.max((v * w.postselect_probs[b] - t.get(a, b)).norm());
            }
        }
    }
    Ok(worst)
}

fn witness_instance(ctx: &Ctx, i: usize) -> Result<(DensityMatrix, Povm)> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    if i.is_multiple_of(4) {
        commuting_pair(&mut rng, d)
    } else {
        random_pair(&mut rng, d)
    }
}

fn thm1_flags(ctx: &Ctx, i: usize) -> Result<f64> {
    let (state, povm) = witness_instance(ctx, i)?;
    let rep = contextuality_witness(&state, &povm, ctx.opt(), DEFAULT_WITNESS_THRESHOLD)?;
    Ok(indicator(!rep.flavors_agree || rep.contextual != rep.witness.is_some()))
}

fn thm1_soundness(ctx: &Ctx, i: usize) -> Result<f64> {
    let (state, povm) = witness_instance(ctx, i)?;
    let rep = contextuality_witness(&state, &povm, ctx.opt(), DEFAULT_WITNESS_THRESHOLD)?;
    let Some(w) = rep.witness else {
        return Ok(0.0);
    };
    // From scratch: <b|M^a ϱ|b> / <b|ϱ|b> with explicit vector sums.
    let b = w.basis.vector(w.b);
    let m = povm.effect(w.a) * state.matrix();
    let form = |x: &ComplexMatrix| -> Complex64 {
        let d = b.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..d {
            for s in 0..d {
                acc += b[r].conj() * x.get(r, s) * b[s];
            }
        }
        acc
    };
    let recomputed = form(&m) / form(state.matrix()).re;
    let err = (recomputed - w.weak_value).norm();
    Ok(if is_strange(recomputed, rep.threshold) {
        err
    } else {
        f64::INFINITY
    })
}

fn prop3(ctx: &Ctx, i: usize) -> Result<f64> {
    let mut rng = ctx.rng(i);
    let d = ctx.dim(i);
    let state = random_state(&mut rng, d)?;
    let pvm = random_basis(&mut rng, d);
    Ok((disturbance_nonreality(&state, &pvm)? - quantum_nonreality(&state, &pvm.as_povm())?).abs())
}
