//! `un-elgamal`: key generation, encryption, decryption, discrete logs,
//! modulus classification and the BSGS scaling benchmark from the command line.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 I/O failure, 4 message encoding
//! error, 5 malformed key or ciphertext file, 6 undecodable plaintext block,
//! 7 no discrete log exists, 8 effort cap exceeded.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use un_elgamal::codec::{self, CodecError};
use un_elgamal::dlog::{self, DlogError, DlogInstance};
use un_elgamal::elgamal::{self, ElGamalError, EphemeralPolicy};
use un_elgamal::group::{self, Classification, GroupError, Unit};
use un_elgamal::keyfile::{self, FormatError};
use un_elgamal::modmath::{FactorBudget, MathError, Natural};

const EFFORT_ENV: &str = "UN_ELGAMAL_EFFORT_CAP";
const RECOMMENDED_P_BITS: u64 = 1024;

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_CODEC: u8 = 4;
const EXIT_MALFORMED: u8 = 5;
const EXIT_BAD_BLOCK: u8 = 6;
const EXIT_NO_SOLUTION: u8 = 7;
const EXIT_CAP: u8 = 8;

#[derive(Parser)]
#[command(name = "un-elgamal", version, about = "ElGamal over U(n) for n = p^m and n = 2p^m")]
struct Cli {
    /// Cap on factoring iterations and discrete-log search effort; overrides UN_ELGAMAL_EFFORT_CAP.
    #[arg(long, global = true, value_name = "N")]
    effort_cap: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair.
    Keygen(KeygenArgs),
    /// Encrypt a letters-only message.
    Encrypt(EncryptArgs),
    /// Decrypt a ciphertext file and print the recovered letters.
    Decrypt(DecryptArgs),
    /// Solve base^x = target in U(n).
    Dlog(DlogArgs),
    /// Report whether U(n) is cyclic and in which form.
    Classify(ClassifyArgs),
    /// Measure baby-step giant-step cost against group order.
    Bench(BenchArgs),
}

#[derive(Args)]
struct Determinism {
    /// Allow fixed seeds and injected key material. Never use for real keys.
    #[arg(long)]
    insecure_deterministic: bool,

    /// RNG seed (requires --insecure-deterministic).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long, default_value_t = RECOMMENDED_P_BITS)]
    p_bits: u64,

    #[arg(long, default_value_t = 1)]
    m: u32,

    /// Use n = 2p^m instead of p^m.
    #[arg(long)]
    doubled: bool,

    #[arg(long = "pub", value_name = "PATH", default_value = "un_elgamal.pub")]
    public_path: PathBuf,

    #[arg(long = "priv", value_name = "PATH", default_value = "un_elgamal.priv")]
    private_path: PathBuf,

    /// Use this prime instead of generating one.
    #[arg(long, value_name = "DEC")]
    exact_p: Option<Natural>,

    /// Use this private exponent.
    #[arg(long, value_name = "DEC", requires = "exact_p")]
    exact_a: Option<Natural>,

    /// Use this generator.
    #[arg(long, value_name = "DEC", requires = "exact_p")]
    exact_r1: Option<Natural>,

    #[command(flatten)]
    determinism: Determinism,
}

#[derive(Args)]
struct EncryptArgs {
    #[arg(long = "pub", value_name = "PATH")]
    public_path: PathBuf,

    #[arg(long, conflicts_with = "message_file")]
    message: Option<String>,

    #[arg(long, value_name = "PATH")]
    message_file: Option<PathBuf>,

    /// Ciphertext output; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Reuse one ephemeral exponent for every block. Leaks equal blocks.
    #[arg(long, requires = "k")]
    paper_mode: bool,

    #[arg(long, value_name = "DEC", requires = "paper_mode")]
    k: Option<Natural>,

    #[command(flatten)]
    determinism: Determinism,
}

#[derive(Args)]
struct DecryptArgs {
    #[arg(long = "priv", value_name = "PATH")]
    private_path: PathBuf,

    #[arg(long, value_name = "PATH")]
    ct: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Brute,
    Bsgs,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Brute => "brute",
            Algorithm::Bsgs => "bsgs",
        }
    }
}

#[derive(Args)]
struct DlogArgs {
    #[arg(long)]
    base: Natural,

    #[arg(long)]
    target: Natural,

    #[arg(long)]
    n: Natural,

    #[arg(long, value_enum, default_value = "bsgs")]
    alg: Algorithm,
}

#[derive(Args)]
struct ClassifyArgs {
    n: Natural,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated bit sizes for the prime p.
    #[arg(long, value_delimiter = ',', default_value = "12,16,20,24")]
    p_bits: Vec<u64>,

    #[arg(long, default_value_t = 1)]
    m: u32,

    #[arg(long)]
    doubled: bool,

    #[arg(long, default_value_t = 5)]
    trials: usize,

    /// Benchmarks hold no secrets, so a seed is accepted without
    /// --insecure-deterministic here.
    #[arg(long)]
    seed: Option<u64>,

    /// CSV output; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Search budgets shared by every subcommand.
struct Effort {
    factor: FactorBudget,
    bruteforce_cap: u64,
    table_cap: u64,
}

impl Effort {
    fn resolve(flag: Option<u64>) -> Result<Self, Failure> {
        let cap = match flag {
            Some(cap) => Some(cap),
            None => match std::env::var(EFFORT_ENV) {
                Ok(raw) => Some(
                    raw.trim()
                        .parse::<u64>()
                        .map_err(|_| Failure::new(EXIT_USAGE, format!("{EFFORT_ENV} must be an integer, got {raw:?}")))?,
                ),
                Err(_) => None,
            },
        };
        let mut effort = Effort {
            factor: FactorBudget::default(),
            bruteforce_cap: dlog::BRUTEFORCE_ORDER_CAP,
            table_cap: dlog::BSGS_TABLE_CAP,
        };
        if let Some(cap) = cap {
            effort.factor.rho_iterations = cap;
            effort.bruteforce_cap = cap;
            effort.table_cap = cap;
        }
        Ok(effort)
    }
}

fn make_rng(det: &Determinism) -> Result<ChaCha20Rng, Failure> {
    match (det.insecure_deterministic, det.seed) {
        (true, seed) => {
            eprintln!("warning: --insecure-deterministic: output is reproducible and must not protect real data");
            Ok(ChaCha20Rng::seed_from_u64(seed.unwrap_or(0)))
        }
        (false, Some(_)) => Err(Failure::new(EXIT_USAGE, "--seed requires --insecure-deterministic")),
        (false, None) => Ok(ChaCha20Rng::from_entropy()),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, contents: &str) -> CmdResult {
    match out {
        Some(path) => write_file(path, contents),
        None => io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|e| Failure::new(EXIT_IO, format!("cannot write to stdout: {e}"))),
    }
}

fn format_failure(path: &Path, err: FormatError) -> Failure {
    let code = match &err {
        FormatError::Group(GroupError::Math(MathError::FactorizationTooHard { .. })) => EXIT_CAP,
        _ => EXIT_MALFORMED,
    };
    Failure::new(code, format!("{}: {err}", path.display()))
}

fn group_failure(err: GroupError) -> Failure {
    match err {
        GroupError::Math(MathError::FactorizationTooHard { .. }) => Failure::new(EXIT_CAP, err.to_string()),
        other => Failure::new(EXIT_USAGE, other.to_string()),
    }
}

fn dlog_failure(err: DlogError) -> Failure {
    match err {
        DlogError::CapExceeded { .. } | DlogError::MemoryBudgetExceeded { .. } => Failure::new(EXIT_CAP, err.to_string()),
        DlogError::NoSolution => Failure::new(EXIT_NO_SOLUTION, err.to_string()),
        DlogError::Group(g) => group_failure(g),
        DlogError::Math(MathError::FactorizationTooHard { .. }) => Failure::new(EXIT_CAP, err.to_string()),
        other => Failure::new(EXIT_USAGE, other.to_string()),
    }
}

fn cmd_keygen(args: KeygenArgs, effort: &Effort) -> CmdResult {
    let injected = args.exact_p.is_some();
    if injected && !args.determinism.insecure_deterministic {
        return Err(Failure::new(EXIT_USAGE, "--exact-* key material requires --insecure-deterministic"));
    }
    let mut rng = make_rng(&args.determinism)?;

    let (pk, sk) = match args.exact_p {
        Some(p) => {
            let modulus = group::Modulus::with_budget(p, args.m, args.doubled, &effort.factor).map_err(group_failure)?;
            let r1 = match args.exact_r1 {
                Some(r1) => r1,
                None => group::find_generator(&modulus).value(),
            };
            let a = match args.exact_a {
                Some(a) => a,
                None => {
                    use num_bigint::RandBigInt;
                    rng.gen_biguint_range(&BigUint::from(2u8), &(modulus.n() - 1u8))
                }
            };
            let sk = elgamal::PrivateKey::new(modulus, a).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
            let pk = sk.public_key(r1).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
            (pk, sk)
        }
        None => {
            if args.p_bits < RECOMMENDED_P_BITS {
                eprintln!(
                    "warning: p has {} bits; at least {RECOMMENDED_P_BITS} are recommended for real use",
                    args.p_bits
                );
            }
            elgamal::keygen(args.p_bits, args.m, args.doubled, &mut rng)
                .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?
        }
    };

    write_file(&args.public_path, &keyfile::write_public_key(&pk))?;
    write_file(&args.private_path, &keyfile::write_private_key(&sk))?;
    println!("n={}", pk.n());
    println!("bits={}", pk.n().bits());
    println!("generator={}", pk.r1());
    Ok(())
}

fn cmd_encrypt(args: EncryptArgs, effort: &Effort) -> CmdResult {
    let pk = keyfile::parse_public_key_with_budget(&read_file(&args.public_path)?, &effort.factor)
        .map_err(|e| format_failure(&args.public_path, e))?;
    let text = match (&args.message, &args.message_file) {
        (Some(m), _) => m.clone(),
        (None, Some(path)) => read_file(path)?,
        (None, None) => return Err(Failure::new(EXIT_USAGE, "one of --message or --message-file is required")),
    };
    let mut rng = make_rng(&args.determinism)?;
    let policy = match args.k {
        Some(k) if args.paper_mode => {
            eprintln!("warning: --paper-mode reuses k for every block; equal plaintext blocks give equal ciphertexts");
            EphemeralPolicy::Fixed(k)
        }
        _ => EphemeralPolicy::Fresh,
    };

    let msg = codec::encode(&text, pk.n()).map_err(|e| Failure::new(EXIT_CODEC, e.to_string()))?;
    let ct = elgamal::encrypt_message(&pk, &msg, &policy, &mut rng).map_err(|e| match e {
        ElGamalError::BadEphemeral { .. } => Failure::new(EXIT_USAGE, e.to_string()),
        other => Failure::new(EXIT_CODEC, other.to_string()),
    })?;
    emit(args.out.as_deref(), &keyfile::write_ciphertext(&ct))
}

fn cmd_decrypt(args: DecryptArgs, effort: &Effort) -> CmdResult {
    let sk = keyfile::parse_private_key_with_budget(&read_file(&args.private_path)?, &effort.factor)
        .map_err(|e| format_failure(&args.private_path, e))?;
    let ct = keyfile::parse_ciphertext(&read_file(&args.ct)?).map_err(|e| format_failure(&args.ct, e))?;
    let msg = elgamal::decrypt_message(&sk, &ct).map_err(|e| match e {
        ElGamalError::Codec(c) => Failure::new(EXIT_BAD_BLOCK, c.to_string()),
        other => Failure::new(EXIT_MALFORMED, format!("{}: {other}", args.ct.display())),
    })?;
    let text = codec::decode(&msg).map_err(|e| match e {
        CodecError::InvalidBlock { .. } => Failure::new(EXIT_BAD_BLOCK, e.to_string()),
        other => Failure::new(EXIT_MALFORMED, other.to_string()),
    })?;
    println!("{text}");
    Ok(())
}

fn cmd_dlog(args: DlogArgs, effort: &Effort) -> CmdResult {
    let modulus = group::modulus_for(&args.n, &effort.factor)
        .map_err(group_failure)?
        .ok_or_else(|| Failure::new(EXIT_USAGE, format!("n = {} is not of the form p^m or 2p^m", args.n)))?;
    let base = Unit::new(args.base, &modulus).map_err(|e| Failure::new(EXIT_USAGE, format!("base: {e}")))?;
    let target = Unit::new(args.target, &modulus)
        .map_err(|e| Failure::new(EXIT_NO_SOLUTION, format!("target is not in <base>: {e}")))?;
    let inst = DlogInstance::with_any_base(base, target).map_err(dlog_failure)?;
    let solution = match args.alg {
        Algorithm::Brute => dlog::bruteforce_solve(&inst, effort.bruteforce_cap),
        Algorithm::Bsgs => dlog::bsgs_solve(&inst, effort.table_cap),
    }
    .map_err(dlog_failure)?;
    println!("x={} algorithm={}", solution.exponent, args.alg.name());
    Ok(())
}

fn cmd_classify(args: ClassifyArgs, effort: &Effort) -> CmdResult {
    let class: Classification = group::classify_modulus_with_budget(&args.n, &effort.factor).map_err(group_failure)?;
    println!("{class}");
    Ok(())
}

fn cmd_bench(args: BenchArgs, effort: &Effort) -> CmdResult {
    let mut rng = match args.seed {
        Some(seed) => ChaCha20Rng::seed_from_u64(seed),
        None => ChaCha20Rng::from_entropy(),
    };
    let reports = dlog::scaling_benchmark_with_budget(&args.p_bits, args.m, args.doubled, args.trials, effort.table_cap, &mut rng)
        .map_err(dlog_failure)?;
    let mut csv = Vec::new();
    dlog::write_reports_csv(&mut csv, &reports).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    let csv = String::from_utf8(csv).expect("CSV is ASCII");
    let slope = match dlog::fit_loglog_slope(&reports) {
        Some(s) => format!("slope={s:.4}"),
        None => "slope=n/a".to_string(),
    };
    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            println!("{slope}");
        }
        None => {
            emit(None, &csv)?;
            eprintln!("{slope}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Effort::resolve(cli.effort_cap).and_then(|effort| match cli.command {
        Command::Keygen(args) => cmd_keygen(args, &effort),
        Command::Encrypt(args) => cmd_encrypt(args, &effort),
        Command::Decrypt(args) => cmd_decrypt(args, &effort),
        Command::Dlog(args) => cmd_dlog(args, &effort),
        Command::Classify(args) => cmd_classify(args, &effort),
        Command::Bench(args) => cmd_bench(args, &effort),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
