//! `kduncert`: JSON front end for the uncertainty decompositions.
//!
//! Exit codes: 0 ok, 1 selftest or internal check failure, 2 invalid input,
//! 3 dimension mismatch, 4 optimizer did not converge.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use kduncert::json::{
    parse_measurement, parse_state, DecompositionJson, KdTableJson, MatrixJson, PovmJson, WireError, WitnessReportJson,
};
use kduncert::kd::{kd_table, table_nonclassicality, table_nonreality};
use kduncert::optimize::OptimizerConfig;
use kduncert::random::{haar_unitary_with, random_density_with, random_povm_with, random_rank_one_povm_with, rng_for};
use kduncert::selftest::{run_selftest, SelftestConfig};
use kduncert::uncertainty::{
    bound_asymmetry, decompose, infimum_total, outcome_probs, quantum_uncertainty, s_entropy, total_uncertainty,
    uncertainty_relation_bound, Flavor,
};
use kduncert::witness::{contextuality_witness, DEFAULT_WITNESS_THRESHOLD};
use kduncert::Error;

const SEED_ENV: &str = "KDUNCERT_SEED";
/// Slack allowed when checking a bound against the entropy it bounds.
const BOUND_SLACK: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "kduncert", version, about = "Quantum and classical parts of measurement uncertainty")]
struct Cli {
    /// Write output here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// KD quasiprobability table of a state over two measurements.
    KdTable {
        /// State file ("-" for stdin).
        state: String,
        /// First measurement: POVM or basis unitary.
        povm: String,
        /// Second measurement: POVM or basis unitary.
        basis: String,
    },
    /// Total, quantum and classical uncertainty of one measurement.
    Decompose {
        state: String,
        povm: String,
        #[arg(long, value_enum, default_value_t = FlavorArg::Nre)]
        flavor: FlavorArg,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Contextuality verdict and a strange weak value certifying it.
    Witness {
        state: String,
        povm: String,
        #[arg(long, default_value_t = DEFAULT_WITNESS_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Smallest total uncertainty over rank-1 measurements and a basis attaining it.
    Infimum {
        state: String,
        #[arg(long, value_enum, default_value_t = FlavorArg::Nre)]
        flavor: FlavorArg,
    },
    /// Commutator lower bounds on the S entropy for one or two bases.
    Bounds {
        state: String,
        pvm: String,
        pvm2: Option<String>,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Seeded random states, POVMs and unitaries.
    Random {
        #[command(subcommand)]
        kind: RandomKind,
        #[arg(long, global = true)]
        seed: Option<u64>,
    },
    /// Runs every property suite and reports pass/fail per property.
    Selftest {
        /// Comma-separated dimensions.
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        dims: Vec<usize>,
        /// Random instances per property.
        #[arg(long, default_value_t = 30)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Test hook: force the named property to fail.
        #[arg(long, hide = true)]
        break_property: Option<String>,
    },
}

#[derive(Subcommand)]
enum RandomKind {
    State {
        #[arg(long)]
        dim: usize,
        /// Defaults to full rank.
        #[arg(long)]
        rank: Option<usize>,
    },
    Povm {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        outcomes: usize,
        /// Rank-1 effects only.
        #[arg(long)]
        rank_one: bool,
    },
    Unitary {
        #[arg(long)]
        dim: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    Nre,
    Ncl,
}

impl From<FlavorArg> for Flavor {
    fn from(f: FlavorArg) -> Self {
        match f {
            FlavorArg::Nre => Flavor::NRe,
            FlavorArg::Ncl => Flavor::NCl,
        }
    }
}

#[derive(Args)]
struct OptArgs {
    /// OptimizerConfig JSON; flags below override its fields.
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Check(String),
    Invalid(String),
    Dim(String),
    NotConverged(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Dim(_) => 3,
            Failure::NotConverged(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Invalid(m) | Failure::Dim(m) | Failure::NotConverged(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DimMismatch { .. } => Failure::Dim(e.to_string()),
            Error::WitnessNotFound { .. } => Failure::NotConverged(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<WireError> for Failure {
    fn from(e: WireError) -> Self {
        match e {
            WireError::Invalid(inner) => inner.into(),
            WireError::Syntax(_) => Failure::Invalid(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_input(path: &str) -> CliResult<String> {
    let mut text = String::new();
    let read = if path == "-" {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        fs::read_to_string(path).map(|t| text = t)
    };
    read.map_err(|e| Failure::Invalid(format!("cannot read {path}: {e}")))?;
    Ok(text)
}

fn with_path<T>(path: &str, r: Result<T, WireError>) -> CliResult<T> {
    r.map_err(|e| {
        let f = Failure::from(e);
        let msg = format!("{path}: {}", f.message());
        match f {
            Failure::Dim(_) => Failure::Dim(msg),
            _ => Failure::Invalid(msg),
        }
    })
}

fn load_state(path: &str) -> CliResult<kduncert::state::DensityMatrix> {
    with_path(path, parse_state(&read_input(path)?))
}

fn load_povm(path: &str) -> CliResult<kduncert::state::Povm> {
    let text = read_input(path)?;
    with_path(path, parse_measurement(&text).and_then(|m| Ok(m.to_povm()?)))
}

fn load_pvm(path: &str) -> CliResult<kduncert::state::RankOnePvm> {
    let text = read_input(path)?;
    with_path(path, parse_measurement(&text).and_then(|m| Ok(m.to_pvm()?)))
}

/// Flag, then environment, then 0.
fn resolve_seed(flag: Option<u64>) -> CliResult<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Invalid(format!("{SEED_ENV}={v:?} is not a nonnegative integer"))),
        Err(_) => Ok(0),
    }
}

fn optimizer_config(args: &OptArgs) -> CliResult<OptimizerConfig> {
    let mut cfg = match &args.config {
        Some(path) => serde_json::from_str(&read_input(path)?)
            .map_err(|e| Failure::Invalid(format!("{path}: malformed optimizer config: {e}")))?,
        None => OptimizerConfig::default(),
    };
    if let Some(r) = args.restarts {
        cfg.n_restarts = r;
    }
    if let Some(m) = args.max_iters {
        cfg.max_iters = m;
    }
    // An explicit config seed counts like a flag.
    if args.seed.is_some() || args.config.is_none() {
        cfg.seed = resolve_seed(args.seed)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn render<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct KdTableOutput {
    table: KdTableJson,
    nonreality: f64,
    nonclassicality: f64,
}

#[derive(Serialize)]
struct InfimumOutput {
    flavor: Flavor,
    value: f64,
    achieving_povm: PovmJson,
    /// Total and quantum uncertainty re-scored at the achieving POVM.
    rescored_total: f64,
    rescored_quantum: f64,
}

#[derive(Serialize)]
struct BoundsOutput {
    asymmetry_bound: f64,
    s_entropy: f64,
    asymmetry_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    relation_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_sum: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relation_margin: Option<f64>,
}

/// Output text plus a failure to report after writing it.
type Outcome = (String, Option<Failure>);

fn run(command: Command) -> CliResult<Outcome> {
    match command {
        Command::KdTable { state, povm, basis } => {
            let rho = load_state(&state)?;
            let first = load_povm(&povm)?;
            let second = load_povm(&basis)?;
            let t = kd_table(&rho, &first, &second)?;
            let out = KdTableOutput {
                table: KdTableJson::from(&t),
                nonreality: table_nonreality(&t),
                nonclassicality: table_nonclassicality(&t),
            };
            Ok((render(&out), None))
        }
        Command::Decompose { state, povm, flavor, opt } => {
            let cfg = optimizer_config(&opt)?;
            let rho = load_state(&state)?;
            let m = load_povm(&povm)?;
            let dec = decompose(&rho, &m, flavor.into(), &cfg)?;
            let failure = (!dec.converged()).then(|| {
                Failure::NotConverged(format!(
                    "optimizer did not converge within {} sweeps; output is a lower bound on the quantum part",
                    cfg.max_iters
                ))
            });
            Ok((render(&DecompositionJson::from(&dec)), failure))
        }
        Command::Witness {
            state,
            povm,
            threshold,
            opt,
        } => {
            let cfg = optimizer_config(&opt)?;
            let rho = load_state(&state)?;
            let m = load_povm(&povm)?;
            let rep = contextuality_witness(&rho, &m, &cfg, threshold)?;
            Ok((render(&WitnessReportJson::from(&rep)), None))
        }
        Command::Infimum { state, flavor } => {
            let rho = load_state(&state)?;
            let flavor: Flavor = flavor.into();
            let inf = infimum_total(&rho, flavor);
            let out = InfimumOutput {
                flavor,
                value: inf.value,
                achieving_povm: PovmJson::from_povm(&inf.achieving_povm),
                rescored_total: total_uncertainty(&rho, &inf.achieving_povm, flavor)?,
                rescored_quantum: quantum_uncertainty(&rho, &inf.achieving_povm, flavor, &OptimizerConfig::default())?.0,
            };
            Ok((render(&out), None))
        }
        Command::Bounds { state, pvm, pvm2, opt } => {
            let cfg = optimizer_config(&opt)?;
            let rho = load_state(&state)?;
            let pa = load_pvm(&pvm)?;
            let asym = bound_asymmetry(&rho, &pa, &cfg)?;
            let s_a = s_entropy(&outcome_probs(&rho, &pa.as_povm())?)?;
            let mut out = BoundsOutput {
                asymmetry_bound: asym.value,
                s_entropy: s_a,
                asymmetry_margin: s_a - asym.value,
                relation_bound: None,
                s_sum: None,
                relation_margin: None,
            };
            if let Some(path) = pvm2 {
                let pb = load_pvm(&path)?;
                let rel = uncertainty_relation_bound(&rho, &pa, &pb, &cfg)?;
                let s_sum = s_a + s_entropy(&outcome_probs(&rho, &pb.as_povm())?)?;
                out.relation_bound = Some(rel.value);
                out.s_sum = Some(s_sum);
                out.relation_margin = Some(s_sum - rel.value);
            }
            let violated = out.asymmetry_margin < -BOUND_SLACK || out.relation_margin.is_some_and(|m| m < -BOUND_SLACK);
            let failure = violated.then(|| Failure::Check("a bound exceeds the entropy it bounds".into()));
            Ok((render(&out), failure))
        }
        Command::Random { kind, seed } => {
            let mut rng = rng_for(resolve_seed(seed)?, 0);
            let text = match kind {
                RandomKind::State { dim, rank } => {
                    let rho = random_density_with(&mut rng, dim, rank.unwrap_or(dim))?;
                    render(&MatrixJson::from_matrix(rho.matrix()))
                }
                RandomKind::Povm { dim, outcomes, rank_one } => {
                    let povm = if rank_one {
                        random_rank_one_povm_with(&mut rng, dim, outcomes)?
                    } else {
                        random_povm_with(&mut rng, dim, outcomes)?
                    };
                    render(&PovmJson::from_povm(&povm))
                }
                RandomKind::Unitary { dim } => {
                    if dim == 0 {
                        return Err(Failure::Invalid("dimension must be at least 1".into()));
                    }
                    render(&MatrixJson::from_matrix(&haar_unitary_with(&mut rng, dim)))
                }
            };
            Ok((text, None))
        }
        Command::Selftest {
            dims,
            samples,
            seed,
            restarts,
            break_property,
        } => {
            let mut optimizer = OptimizerConfig::default();
            if let Some(r) = restarts {
                optimizer.n_restarts = r;
            }
            let cfg = SelftestConfig {
                dims,
                samples,
                seed: resolve_seed(seed)?,
                optimizer,
                break_property,
            };
            let rep = run_selftest(&cfg)?;
            eprint!("{}", rep.summary());
            let failure = (!rep.passed).then(|| Failure::Check(format!("failed properties: {}", rep.failed().join(", "))));
            Ok((render(&rep), failure))
        }
    }
}

fn emit(output: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Invalid(format!("cannot write stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not errors.
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = run(cli.command).and_then(|(text, failure)| {
        emit(cli.output.as_ref(), &text)?;
        failure.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_mapping_follows_exit_code_table() {
        assert_eq!(Failure::from(Error::DimMismatch { expected: 2, found: 3 }).code(), 3);
        assert_eq!(Failure::from(Error::BadConfig { reason: "x".into() }).code(), 2);
    }

    #[test]
    fn seed_flag_short_circuits() {
        assert_eq!(resolve_seed(Some(7)).ok(), Some(7));
    }

    #[test]
    fn rendered_output_ends_with_newline() {
        assert_eq!(render(&[1.5, 0.1]), "[\n  1.5,\n  0.1\n]\n");
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
