use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hamlim::experiments::{
    fastforward_witness, parity_experiment, parity_sweep, sign_detection_experiment, sign_sweep, ExperimentReport,
};
use hamlim::format::{hermitian_from_json, hermitian_to_json};
use hamlim::graphdecomp::{arboricity_bound_report, star_decompose, trotter_evolve};
use hamlim::instances::{
    circulant_from_string, dense_parity_hamiltonian, hadamard_tensor, line_hamiltonian, parity_hamiltonian,
    saturating_witness, BitString, SignString, WitnessKind,
};
use hamlim::matcore::evolve;
use hamlim::norms::{norm_chain_report_with_zero_tol, norm_profile_with_zero_tol, walk_cost_from_profile};
use hamlim::stochastic::{
    adversary_bound, average_case_bound, derive_promise_bound, promise_probability, tail_estimate, PromiseConfig,
};
use hamlim::{HermitianMatrix, StateVector};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "hamlim", version, about = "Hard-instance Hamiltonians, norm hierarchies and star-forest simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Also write the output to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Omit wall time and timestamp so identical runs give identical bytes.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[arg(long, global = true, env = "HAMLIM_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Line,
    Parity,
    DenseParity,
    Circulant,
    Hadamard,
    Witness,
}

#[derive(Args, Clone)]
struct Generator {
    /// Length of the line, or number of Hadamard factors.
    #[arg(long, visible_alias = "N")]
    n: Option<usize>,
    /// Bit string such as 0110.
    #[arg(long)]
    bits: Option<String>,
    /// Sign string such as +-+ or 1,-1,1.
    #[arg(long)]
    signs: Option<String>,
    /// Witness kind: identity, all-ones or hadamard.
    #[arg(long)]
    kind: Option<String>,
    /// Witness size.
    #[arg(long)]
    size: Option<usize>,
}

#[derive(Args)]
struct MatrixSource {
    /// densecomplex-v1 matrix file.
    #[arg(long = "in", conflicts_with = "make")]
    input: Option<PathBuf>,
    /// Build the matrix instead of reading it.
    #[arg(long, value_enum)]
    make: Option<Family>,
    #[command(flatten)]
    generator: Generator,
}

#[derive(Subcommand)]
enum Command {
    /// Build a Hamiltonian: the weighted line that transfers |0⟩ to |N⟩, the
    /// parity graph and its dense copy, the sign-string circulant, the
    /// Hadamard tensor power, or a norm-chain saturating witness.
    Make {
        #[arg(value_enum)]
        family: Family,
        #[command(flatten)]
        generator: Generator,
    },
    /// Max norm, max column norm, spectral norm, spectral norm of abs(H), and
    /// induced 1-norm.
    Norms {
        #[command(flatten)]
        source: MatrixSource,
        /// Entries at or below this magnitude do not count toward sparsity.
        #[arg(long, default_value_t = 0.0)]
        zero_tol: f64,
    },
    /// Checks the chain max ≤ mcn ≤ ‖H‖ ≤ ‖abs H‖ ≤ ‖H‖₁ ≤ √N·mcn ≤ N·max and
    /// its sparse version with the row sparsity k in place of N.
    Chain {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long, default_value_t = 0.0)]
        zero_tol: f64,
    },
    /// Quantum-walk step estimates ‖abs H‖·t/√δ and ‖H‖₁·t/√δ.
    Cost {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
    },
    /// Exact evolution e^{-iHt}ψ from a basis state or the uniform state.
    Evolve {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Basis state to start from.
        #[arg(long, default_value_t = 0, conflicts_with = "uniform")]
        start: usize,
        #[arg(long)]
        uniform: bool,
    },
    /// Splits H into star forests and checks that a graph of arboricity k has
    /// ‖abs H‖ ≤ 2k·mcn, ‖abs H‖ ≤ 2k·‖H‖ and ‖H‖ ≤ 2k·mcn.
    Decompose {
        #[command(flatten)]
        source: MatrixSource,
    },
    /// First-order product formula over the star forests of H, compared with
    /// exact evolution.
    Trotter {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 64)]
        steps: usize,
    },
    /// Parity of an N-bit string read off the dense parity Hamiltonian after
    /// time πN/2, the step behind the linear lower bound in N for dense
    /// Hamiltonians of unit norm.
    ParityDemo {
        #[arg(long)]
        bits: Option<String>,
        /// String length for random trials.
        #[arg(long, visible_alias = "N", default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
    /// Sign of Σs detected from the eigenphase ∓i of e^{-iH_sτ} on the uniform
    /// state, the reduction behind the no-go for poly(‖Ht‖, log N) simulation.
    SignDemo {
        #[arg(long)]
        signs: Option<String>,
        #[arg(long = "M", default_value_t = 60)]
        m: u64,
        #[arg(long = "B")]
        b: Option<u64>,
        #[arg(long, default_value_t = 50)]
        trials: u64,
    },
    /// Monte Carlo tail of ‖H_s‖ for random sign strings against the bound
    /// Pr(‖H_s‖ ≥ 4d√(M ln M)) ≤ 4/M^{2d²-1}.
    Tail {
        #[arg(long = "M", default_value_t = 51)]
        m: u64,
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        #[arg(long, default_value_t = 2000)]
        trials: u64,
    },
    /// Probability that a random sign string satisfies the promise |Σs| = B,
    /// which is Θ(1/M).
    Promise {
        #[arg(long = "M")]
        m: u64,
        /// Defaults to the integer near √(M ln M) with the parity of M.
        #[arg(long = "B")]
        b: Option<u64>,
    },
    /// Adversary-bound arithmetic m/l = (M/B + 1)/2 for distinguishing
    /// Σs = -B from Σs = +B, with the counting estimate 2M/B.
    Adversary {
        #[arg(long = "M")]
        m: u64,
        #[arg(long = "B")]
        b: u64,
    },
    /// Average-case cost of a hypothetical O((‖Ht‖ log M)^c) simulation on
    /// promise strings, compared with the √(M/ln M) lower bound.
    AvgBound {
        #[arg(long = "M", default_value_t = 1_000_000)]
        m: u64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 2.0)]
        d: f64,
    },
    /// e^{-iR^{⊗n}τ} returns to the identity at τ = 2π even though
    /// ‖abs(R^{⊗n})‖ = 2^{n/2}.
    Fastforward {
        #[arg(long, visible_alias = "N", default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 2.0 * PI)]
        tau: f64,
    },
}

/// Usage, input and domain errors; all exit with status 2.
struct Failure(String);

impl From<hamlim::Error> for Failure {
    fn from(e: hamlim::Error) -> Self {
        Failure(e.to_string())
    }
}

type CmdResult<T> = Result<T, Failure>;

enum Output {
    Report(ExperimentReport),
    /// JSON body, CSV body, pass flag.
    Raw(String, String, bool),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(output) => {
            let (body, pass) = render(output, &cli.output, start);
            print!("{body}");
            if let Some(path) = &cli.output.out {
                if let Err(e) = fs::write(path, &body) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("check failed");
                ExitCode::from(1)
            }
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn render(output: Output, args: &OutputArgs, start: Instant) -> (String, bool) {
    match output {
        Output::Report(mut report) => {
            if !args.no_timestamp {
                report = report.timed(start);
            }
            let body = match args.format {
                Format::Json => format!("{}\n", report.to_json()),
                Format::Csv => format!("{}\n{}\n", ExperimentReport::CSV_HEADER, report.csv_row()),
            };
            (body, report.pass)
        }
        Output::Raw(json, csv, pass) => (if args.format == Format::Json { json } else { csv }, pass),
    }
}

fn run(cli: &Cli) -> CmdResult<Output> {
    let seed = cli.output.seed;
    Ok(match &cli.command {
        Command::Make { family, generator } => {
            let h = build(*family, generator)?;
            Output::Raw(format!("{}\n", hermitian_to_json(&h)), matrix_csv(&h), true)
        }
        Command::Norms { source, zero_tol } => {
            let h = load(source)?;
            let p = norm_profile_with_zero_tol(&h, *zero_tol)?;
            let mut r = ExperimentReport::new("norms");
            r = with_fields(r, &p);
            Output::Report(r.metric("abs_over_spectral", p.abs_spectral / p.spectral))
        }
        Command::Chain { source, zero_tol } => {
            let h = load(source)?;
            let chain = norm_chain_report_with_zero_tol(&h, *zero_tol)?;
            let p = &chain.profile;
            if cli.output.format == Format::Csv {
                Output::Raw(chain.to_csv(), chain.to_csv(), chain.all_ok())
            } else {
                let r = with_fields(ExperimentReport::new("chain"), p)
                    .metric("abs_over_spectral", p.abs_spectral / p.spectral)
                    .metric("links", chain.links().collect::<Vec<_>>())
                    .metric("violations", chain.violations().iter().map(|l| l.name.clone()).collect::<Vec<_>>())
                    .tolerance("slack", hamlim::norms::SLACK_TOLERANCE)
                    .passing(chain.all_ok());
                Output::Report(r)
            }
        }
        Command::Cost { source, t, delta } => {
            let h = load(source)?;
            if !(*delta > 0.0 && *delta <= 1.0) {
                return Err(Failure(format!("delta must lie in (0, 1], got {delta}")));
            }
            let p = norm_profile_with_zero_tol(&h, 0.0)?;
            let est = walk_cost_from_profile(&p, *t, *delta);
            Output::Report(with_fields(ExperimentReport::new("cost").input("t", t).input("delta", delta), &est))
        }
        Command::Evolve { source, t, start, uniform } => {
            let h = load(source)?;
            let n = h.dim();
            let psi = if *uniform {
                StateVector::uniform(n)
            } else if *start < n {
                StateVector::basis(n, *start)
            } else {
                return Err(Failure(format!("start state {start} out of range for dimension {n}")));
            };
            let out = evolve(&h, *t, &psi)?;
            let norm = out.norm();
            let amps: Vec<[f64; 2]> = out.amplitudes().iter().map(|z| [z.re, z.im]).collect();
            let probs: Vec<f64> = out.amplitudes().iter().map(|z| z.norm_sqr()).collect();
            Output::Report(
                ExperimentReport::new("evolve")
                    .input("t", t)
                    .input("start", if *uniform { json!("uniform") } else { json!(start) })
                    .metric("amplitudes", amps)
                    .metric("probabilities", probs)
                    .metric("norm", norm)
                    .tolerance("norm", 1e-9)
                    .passing((norm - 1.0).abs() <= 1e-9),
            )
        }
        Command::Decompose { source } => {
            let h = load(source)?;
            let dec = star_decompose(&h, None)?;
            let report = arboricity_bound_report(&h, &dec)?;
            let dec_json: Value = serde_json::from_str(&dec.to_json()).expect("valid JSON");
            let r = with_fields(ExperimentReport::new("decompose"), &report)
                .metric("decomposition", dec_json)
                .metric("source_edges", dec.source_edge_count)
                .passing(report.pass);
            Output::Report(r)
        }
        Command::Trotter { source, t, steps } => {
            let h = load(source)?;
            let dec = star_decompose(&h, None)?;
            let psi = StateVector::uniform(h.dim());
            let approx = trotter_evolve(&dec.forests, *t, *steps, &psi)?;
            let exact = evolve(&h, *t, &psi)?;
            let norm = approx.norm();
            Output::Report(
                ExperimentReport::new("trotter")
                    .input("t", t)
                    .input("steps", steps)
                    .metric("star_forests", dec.forests.len())
                    .metric("error", approx.distance(&exact))
                    .metric("norm", norm)
                    .tolerance("norm", 1e-9)
                    .passing((norm - 1.0).abs() <= 1e-9),
            )
        }
        Command::ParityDemo { bits, n, trials } => match bits {
            Some(bits) => Output::Report(parity_experiment(&parse_bits(bits)?)?.report),
            None => Output::Report(parity_sweep(*n, *trials, seed)?),
        },
        Command::SignDemo { signs, m, b, trials } => match signs {
            Some(signs) => {
                let s = parse_signs(signs)?;
                let b = b.unwrap_or(s.sum().unsigned_abs());
                let cfg = PromiseConfig::new(s.len() as u64, b)?;
                Output::Report(sign_detection_experiment(&s, &cfg)?.report)
            }
            None => {
                if b.is_some() {
                    return Err(Failure("--B applies only together with --signs".into()));
                }
                Output::Report(sign_sweep(*m, *trials, seed)?)
            }
        },
        Command::Tail { m, d, trials } => {
            let r = tail_estimate(*m, *d, *trials, seed)?;
            let pass = r.pass;
            Output::Report(with_fields(ExperimentReport::new("tail").with_seed(seed), &r).passing(pass))
        }
        Command::Promise { m, b } => {
            let b = match b {
                Some(b) => *b,
                None => derive_promise_bound(*m)?.b,
            };
            let p = promise_probability(*m, b)?;
            let scaled = *m as f64 * p.value;
            Output::Report(with_fields(ExperimentReport::new("promise"), &p).metric("m_times_p", scaled))
        }
        Command::Adversary { m, b } => {
            let r = adversary_bound(*m, *b)?;
            let pass = r.identity_holds;
            Output::Report(with_fields(ExperimentReport::new("adversary"), &r).passing(pass))
        }
        Command::AvgBound { m, c, d } => {
            let r = average_case_bound(*m, *c, *d)?;
            let pass = r.below_lower_bound;
            Output::Report(with_fields(ExperimentReport::new("avg-bound"), &r).passing(pass))
        }
        Command::Fastforward { n, tau } => Output::Report(fastforward_witness(*n, *tau)?),
    })
}

/// Copies every field of `value` into the report's metrics.
fn with_fields(mut report: ExperimentReport, value: &impl serde::Serialize) -> ExperimentReport {
    if let Ok(Value::Object(map)) = serde_json::to_value(value) {
        for (k, v) in map {
            report = report.metric(&k, v);
        }
    }
    report
}

fn parse_bits(s: &str) -> CmdResult<BitString> {
    s.parse().map_err(|e: hamlim::Error| Failure(format!("--bits: {e}")))
}

fn parse_signs(s: &str) -> CmdResult<SignString> {
    s.parse().map_err(|e: hamlim::Error| Failure(format!("--signs: {e}")))
}

fn need<T: Copy>(v: Option<T>, flag: &str, family: &str) -> CmdResult<T> {
    v.ok_or_else(|| Failure(format!("{family} needs --{flag}")))
}

fn build(family: Family, g: &Generator) -> CmdResult<HermitianMatrix> {
    let need_str = |v: &Option<String>, flag: &str, family: &str| {
        v.clone().ok_or_else(|| Failure(format!("{family} needs --{flag}")))
    };
    Ok(match family {
        Family::Line => line_hamiltonian(need(g.n, "n", "line")?)?,
        Family::Parity => parity_hamiltonian(&parse_bits(&need_str(&g.bits, "bits", "parity")?)?)?,
        Family::DenseParity => dense_parity_hamiltonian(&parse_bits(&need_str(&g.bits, "bits", "dense-parity")?)?)?,
        Family::Circulant => circulant_from_string(&parse_signs(&need_str(&g.signs, "signs", "circulant")?)?),
        Family::Hadamard => hadamard_tensor(need(g.n, "n", "hadamard")?)?,
        Family::Witness => {
            let kind: WitnessKind = need_str(&g.kind, "kind", "witness")?.parse()?;
            saturating_witness(kind, need(g.size, "size", "witness")?)?
        }
    })
}

fn load(src: &MatrixSource) -> CmdResult<HermitianMatrix> {
    match (&src.input, src.make) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
            Ok(hermitian_from_json(&text)?)
        }
        (None, Some(family)) => build(family, &src.generator),
        _ => Err(Failure("give exactly one of --in or --make".into())),
    }
}

fn matrix_csv(h: &HermitianMatrix) -> String {
    let mut out = String::from("row,col,re,im\n");
    for i in 0..h.dim() {
        for j in 0..h.dim() {
            let z = h.get(i, j);
            if z.re != 0.0 || z.im != 0.0 {
                out.push_str(&format!("{i},{j},{},{}\n", z.re, z.im));
            }
        }
    }
    out
}
