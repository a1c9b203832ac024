//! Command-line front end.
//!
//! Exit codes: 0 success or ACCEPT, 1 DENY, 2 usage error, 3 runtime error.
//!
//! `--config FILE` reads `key = value` lines (`#` starts a comment). Keys are
//! long flag names without dashes; only keys the chosen subcommand accepts are
//! applied, and flags given on the command line win.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use rand::Rng;
use sha2::{Digest, Sha256};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::eval::{params_for_security, run_gs_curve, write_gs_csv, GsOptions, ImpostorSource, Scenario};
use crate::fusion::{load_weights, Activation, FusionMode, FusionWeights, DEFAULT_OUT_DIM};
use crate::gf::Field;
use crate::oracle::{column_collision_rate, Codebook};
use crate::pipeline::{derived_rng, enroll, probe_bits, EnrollmentSecrets, PipelineConfig};
use crate::quantizer::{population_stats, PopulationStats, DEFAULT_WINDOW};
use crate::rs_codec::{DecodePolicy, RsCode};
use crate::sketch::{authenticate, DecisionReason, Scheme};
use crate::store::{open_stores, revoke, KeyStore, TemplateDb};
use crate::synth::{gen_population, read_embeddings, write_embeddings, EmbeddingDataset, SynthParams};

pub const EXIT_OK: u8 = 0;
pub const EXIT_DENY: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

const POPULATION_FILE: &str = "population.stats";

#[derive(Parser, Debug)]
#[command(name = "mbsketch", version, about = "Multibiometric secure-sketch templates")]
struct Cli {
    /// key=value configuration file; command-line flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic embedding dataset (and optionally fusion weights)
    Gen(GenArgs),
    /// Enroll one subject: writes its template record and key
    Enroll(EnrollArgs),
    /// Authenticate a probe against an enrolled subject
    Auth(AuthArgs),
    /// Delete a subject's record and key
    Revoke(RevokeArgs),
    /// Write a GAR–Security curve as CSV
    Eval(EvalArgs),
    /// Brute-force nearest-codeword decoding for small codes
    Oracle(OracleArgs),
    /// Print RS code parameters for target security levels
    Params(ParamsArgs),
}

#[derive(Args, Debug, Clone)]
struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    subjects: usize,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 64)]
    d_face: usize,
    #[arg(long, default_value_t = 64)]
    d_iris: usize,
    #[arg(long, default_value_t = 1.0)]
    between_std: f64,
    #[arg(long, default_value_t = 0.3)]
    within_std: f64,
}

impl SynthArgs {
    fn params(&self, seed: u64) -> SynthParams {
        SynthParams {
            num_subjects: self.subjects,
            samples_per_subject: self.samples,
            d_face: self.d_face,
            d_iris: self.d_iris,
            between_std: self.between_std,
            within_std: self.within_std,
            seed,
        }
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    synth: SynthArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Also write seeded random fusion weights to this path
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, default_value = "fca")]
    fusion: FusionMode,
    #[arg(long, default_value_t = DEFAULT_OUT_DIM)]
    out_dim: usize,
}

#[derive(Args, Debug)]
struct FusionArgs {
    #[arg(long, default_value = "bla")]
    fusion: FusionMode,
    /// Fusion weights file; required for fca, optional projection for bla
    #[arg(long)]
    weights: Option<PathBuf>,
}

impl FusionArgs {
    fn load(&self, ds: &EmbeddingDataset) -> Result<FusionWeights> {
        let w = match (&self.weights, self.fusion) {
            (Some(path), _) => load_weights(path)?,
            (None, FusionMode::Bla) => FusionWeights::bla(ds.d_face(), ds.d_iris(), None, Activation::Identity)?,
            (None, FusionMode::Fca) => {
                return Err(Error::InvalidParams("--fusion fca requires --weights".into()))
            }
        };
        if w.mode() != self.fusion {
            return Err(Error::ParameterMismatch(format!(
                "weights file is {}, --fusion is {}",
                w.mode(),
                self.fusion
            )));
        }
        Ok(w)
    }
}

#[derive(Args, Debug)]
struct StoreArgs {
    #[arg(long, default_value = "templates")]
    templates_dir: PathBuf,
    #[arg(long, default_value = "keys")]
    keys_dir: PathBuf,
}

impl StoreArgs {
    fn open(&self) -> Result<(TemplateDb, KeyStore)> {
        open_stores(&self.templates_dir, &self.keys_dir)
    }
}

#[derive(Args, Debug)]
struct CodeArgs {
    #[arg(long, default_value_t = 5)]
    m: u32,
    /// Message length in symbols (overrides --security)
    #[arg(long)]
    k_symbols: Option<usize>,
    /// Target security in bits; K = round(security/m)
    #[arg(long, default_value_t = 100)]
    security: usize,
}

impl CodeArgs {
    fn k(&self) -> Result<usize> {
        match self.k_symbols {
            Some(k) => Ok(k),
            None => Ok(params_for_security(self.m, self.security)?.k),
        }
    }
}

#[derive(Args, Debug)]
struct EnrollArgs {
    #[arg(long)]
    subject: String,
    #[arg(long)]
    dataset: PathBuf,
    /// Comma-separated sample ids to enroll from (default: first half)
    #[arg(long, value_delimiter = ',')]
    samples: Vec<String>,
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, default_value = "ss")]
    scheme: Scheme,
    #[arg(long, default_value = "fallback")]
    policy: DecodePolicy,
    #[command(flatten)]
    fusion: FusionArgs,
    #[command(flatten)]
    stores: StoreArgs,
    /// Candidate pool factor for reliable-component selection
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: f64,
    /// Seed for key nonce, salt and commitment message (random if omitted)
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    overwrite: bool,
}

#[derive(Args, Debug)]
struct AuthArgs {
    /// Claimed identity
    #[arg(long)]
    subject: String,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Probe sample id within the dataset
    #[arg(long)]
    sample: Option<String>,
    /// Subject whose biometric is presented (default: the claimed subject)
    #[arg(long)]
    probe_subject: Option<String>,
    /// Subject whose key is presented (default: the claimed subject)
    #[arg(long)]
    key_subject: Option<String>,
    /// Present uniformly random reliable bits instead of a dataset sample
    #[arg(long)]
    random_probe: bool,
    #[command(flatten)]
    fusion: FusionArgs,
    #[command(flatten)]
    stores: StoreArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct RevokeArgs {
    #[arg(long)]
    subject: String,
    #[command(flatten)]
    stores: StoreArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Embedding CSV; a synthetic population is generated when omitted
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[command(flatten)]
    synth: SynthArgs,
    #[command(flatten)]
    fusion: FusionArgs,
    #[arg(long, default_value_t = 5)]
    m: u32,
    /// Comma-separated message lengths in symbols
    #[arg(long, value_delimiter = ',')]
    k_symbols: Vec<usize>,
    /// Comma-separated security levels in bits (used when --k-symbols is absent)
    #[arg(long, value_delimiter = ',', default_value = "53,80,100")]
    security: Vec<usize>,
    #[arg(long, default_value = "ss")]
    scheme: Scheme,
    #[arg(long, default_value = "fallback")]
    policy: DecodePolicy,
    #[arg(long, default_value = "zero-effort")]
    scenario: Scenario,
    /// Impostor bit source: dataset | uniform
    #[arg(long, default_value = "dataset")]
    impostors: String,
    /// Impostor trials per point (0 skips the empirical FAR)
    #[arg(long, default_value_t = 0)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, default_value_t = 3)]
    m: u32,
    #[arg(long, default_value_t = 3)]
    k_symbols: usize,
    /// Comma-separated received symbols; prints the nearest codewords
    #[arg(long, value_delimiter = ',')]
    received: Vec<u16>,
    /// Estimate the column-collision rate with this many random pairs
    #[arg(long, default_value_t = 0)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ParamsArgs {
    #[arg(long, value_delimiter = ',', default_value = "5,6,7")]
    m: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "53,80,100")]
    security: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let stdout = std::io::stdout();
    let code = run(&args, &mut stdout.lock(), &mut std::io::stderr());
    ExitCode::from(code)
}

/// Runs the CLI with explicit arguments (including the program name) and
/// returns the exit code.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let args = match apply_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(out, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

/// Splices config-file values in right after the subcommand name so that
/// explicit flags, which come later, override them.
fn apply_config(args: &[String]) -> Result<Vec<String>> {
    let mut args = args.to_vec();
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let path = if let Some(v) = args[pos].strip_prefix("--config=") {
        let v = v.to_owned();
        args.remove(pos);
        v
    } else {
        let v = args
            .get(pos + 1)
            .cloned()
            .ok_or_else(|| Error::Parse("--config needs a value".into()))?;
        args.drain(pos..pos + 2);
        v
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;

    let cmd = Cli::command();
    let Some((sub_pos, sub)) = args
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, a)| cmd.find_subcommand(a).map(|s| (i, s)))
    else {
        return Ok(args);
    };
    let accepted: Vec<String> = sub
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_owned))
        .collect();
    let mut extra = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("{path}:{}: expected key = value", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if !accepted.contains(&key) {
            continue;
        }
        match value {
            "true" => extra.push(format!("--{key}")),
            "false" => {}
            v => {
                extra.push(format!("--{key}"));
                extra.push(v.to_owned());
            }
        }
    }
    args.splice(sub_pos + 1..sub_pos + 1, extra);
    Ok(args)
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<u8> {
    match cmd {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Enroll(a) => cmd_enroll(a, out),
        Command::Auth(a) => cmd_auth(a, out),
        Command::Revoke(a) => cmd_revoke(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Params(a) => cmd_params(a, out),
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> Result<u8> {
    let ds = gen_population(a.synth.params(a.seed))?;
    write_embeddings(&ds, &a.out)?;
    writeln!(
        out,
        "wrote {} subjects x {} samples ({}+{} dims) to {}",
        a.synth.subjects,
        a.synth.samples,
        a.synth.d_face,
        a.synth.d_iris,
        a.out.display()
    )
    .map_err(io_err)?;
    if let Some(path) = a.weights {
        let w = match a.fusion {
            FusionMode::Fca => FusionWeights::random_fca(a.synth.d_face, a.synth.d_iris, a.out_dim, Activation::Rectifier, a.seed)?,
            FusionMode::Bla => FusionWeights::random_bla(a.synth.d_face, a.synth.d_iris, a.out_dim, Activation::Identity, a.seed)?,
        };
        w.save(&path)?;
        writeln!(out, "wrote {} weights ({} outputs) to {}", a.fusion, a.out_dim, path.display()).map_err(io_err)?;
    }
    Ok(EXIT_OK)
}

fn subject_index(id: &str) -> u64 {
    let h = Sha256::digest(id.as_bytes());
    u64::from_le_bytes(h[..8].try_into().unwrap())
}

fn load_population(db: &TemplateDb) -> Result<Option<PopulationStats>> {
    let path = db.dir().join(POPULATION_FILE);
    match std::fs::read_to_string(&path) {
        Ok(text) => PopulationStats::from_text(&text).map(Some),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(path, e)),
    }
}

fn fused_dataset(path: &Path, fusion: &FusionArgs) -> Result<(EmbeddingDataset, Vec<Vec<Vec<f64>>>)> {
    let ds = read_embeddings(path)?;
    let weights = fusion.load(&ds)?;
    let fused = ds.fuse(&weights)?;
    Ok((ds, fused))
}

fn cmd_enroll(a: EnrollArgs, out: &mut dyn Write) -> Result<u8> {
    let (db, keys) = a.stores.open()?;
    let (ds, fused) = fused_dataset(&a.dataset, &a.fusion)?;
    let pop = match load_population(&db)? {
        Some(p) => p,
        None => {
            let p = population_stats(&fused)?;
            let path = db.dir().join(POPULATION_FILE);
            std::fs::write(&path, p.to_text()).map_err(|e| Error::io(path, e))?;
            p
        }
    };
    let idx = ds
        .subjects
        .iter()
        .position(|s| s.id == a.subject)
        .ok_or_else(|| Error::NotFound(a.subject.clone()))?;
    let subject = &ds.subjects[idx];
    let samples: Vec<&Vec<f64>> = if a.samples.is_empty() {
        fused[idx][..subject.samples.len().div_ceil(2)].iter().collect()
    } else {
        a.samples
            .iter()
            .map(|sid| {
                subject
                    .samples
                    .iter()
                    .position(|p| &p.sample_id == sid)
                    .map(|i| &fused[idx][i])
                    .ok_or_else(|| Error::NotFound(format!("{}/{sid}", a.subject)))
            })
            .collect::<Result<_>>()?
    };
    let cfg = PipelineConfig {
        m: a.code.m,
        k: a.code.k()?,
        scheme: a.scheme,
        policy: a.policy,
        window: a.window,
        seed: a.seed.unwrap_or_else(|| rand::rng().random()),
    };
    let code = cfg.code()?;
    if !a.overwrite && db.contains(&a.subject)? {
        return Err(Error::DuplicateSubject(a.subject));
    }
    let revoked = keys.revoked_nonces()?;
    let mut enrolled = None;
    for attempt in 0..crate::eval::ENROLL_ATTEMPTS {
        let secrets = EnrollmentSecrets::derive(cfg.seed, subject_index(&a.subject), attempt);
        if revoked.contains(&secrets.nonce) {
            continue;
        }
        match enroll(&a.subject, &samples, &pop, &code, &cfg, secrets) {
            Ok(e) => {
                enrolled = Some(e);
                break;
            }
            Err(Error::EnrollmentDecodeFailure) => continue,
            Err(e) => return Err(e),
        }
    }
    let enrollment = enrolled.ok_or(Error::EnrollmentDecodeFailure)?;
    keys.save_key(&a.subject, &enrollment.key, a.overwrite)?;
    db.save_record(&a.subject, &enrollment.record, a.overwrite)?;
    writeln!(
        out,
        "enrolled {} scheme={} RS({}, {}) m={} security={} bits G={}",
        a.subject,
        cfg.scheme,
        code.n(),
        code.k(),
        code.m(),
        cfg.security_bits(),
        enrollment.key.g()
    )
    .map_err(io_err)?;
    Ok(EXIT_OK)
}

fn cmd_auth(a: AuthArgs, out: &mut dyn Write) -> Result<u8> {
    let (db, keys) = a.stores.open()?;
    let record = db.load_record(&a.subject)?;
    let code = RsCode::new(Field::new(record.m, Some(record.poly))?, record.k)?;
    let key_subject = a.key_subject.as_deref().unwrap_or(&a.subject);

    let probe: BitVector = if a.random_probe {
        let mut rng = derived_rng(a.seed, "random-probe", 0);
        (0..code.n_bits()).map(|_| rng.random_bool(0.5)).collect()
    } else {
        let key = keys.load_key(key_subject)?;
        let pop = load_population(&db)?
            .ok_or_else(|| Error::NotFound(format!("{POPULATION_FILE} in {}", db.dir().display())))?;
        let dataset = a
            .dataset
            .as_ref()
            .ok_or_else(|| Error::InvalidParams("auth needs --dataset or --random-probe".into()))?;
        let (ds, fused) = fused_dataset(dataset, &a.fusion)?;
        let probe_subject = a.probe_subject.as_deref().unwrap_or(&a.subject);
        let si = ds
            .subjects
            .iter()
            .position(|s| s.id == probe_subject)
            .ok_or_else(|| Error::NotFound(probe_subject.to_owned()))?;
        let sample_id = a
            .sample
            .as_ref()
            .ok_or_else(|| Error::InvalidParams("auth needs --sample with --dataset".into()))?;
        let pi = ds.subjects[si]
            .samples
            .iter()
            .position(|p| &p.sample_id == sample_id)
            .ok_or_else(|| Error::NotFound(format!("{probe_subject}/{sample_id}")))?;
        probe_bits(&fused[si][pi], &pop, &key)?
    };

    let decision = match authenticate(&probe, &record, &code) {
        Ok(d) => d,
        Err(Error::ParameterMismatch(msg)) => {
            writeln!(out, "DENY (parameter-mismatch: {msg})").map_err(io_err)?;
            return Ok(EXIT_DENY);
        }
        Err(e) => return Err(e),
    };
    let reason = match decision.reason {
        DecisionReason::HashMatch => "hash-match",
        DecisionReason::HashMismatch => "hash-mismatch",
        DecisionReason::DecodeFailure => "decode-failure",
    };
    if decision.accepted {
        writeln!(out, "ACCEPT ({reason})").map_err(io_err)?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "DENY ({reason})").map_err(io_err)?;
        Ok(EXIT_DENY)
    }
}

fn cmd_revoke(a: RevokeArgs, out: &mut dyn Write) -> Result<u8> {
    let (db, keys) = a.stores.open()?;
    revoke(&db, &keys, &a.subject)?;
    writeln!(out, "revoked {}", a.subject).map_err(io_err)?;
    Ok(EXIT_OK)
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> Result<u8> {
    let ds = match &a.dataset {
        Some(path) => read_embeddings(path)?,
        None => gen_population(a.synth.params(a.seed))?,
    };
    let weights = a.fusion.load(&ds)?;
    let fused = ds.fuse(&weights)?;
    let k_list = if a.k_symbols.is_empty() {
        a.security
            .iter()
            .map(|&s| params_for_security(a.m, s).map(|p| p.k))
            .collect::<Result<Vec<_>>>()?
    } else {
        a.k_symbols.clone()
    };
    let impostors = match a.impostors.as_str() {
        "dataset" => ImpostorSource::Dataset,
        "uniform" => ImpostorSource::UniformBits,
        other => return Err(Error::Parse(format!("unknown impostor source {other:?}"))),
    };
    let opts = GsOptions {
        scheme: a.scheme,
        policy: a.policy,
        scenario: a.scenario,
        impostors,
        window: a.window,
        far_trials: a.trials,
        seed: a.seed,
    };
    let points = run_gs_curve(&fused, a.m, &k_list, &opts)?;
    match &a.out {
        Some(path) => {
            let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            write_gs_csv(&points, std::io::BufWriter::new(f)).map_err(|e| Error::io(path, e))?;
            writeln!(out, "wrote {} points to {}", points.len(), path.display()).map_err(io_err)?;
        }
        None => write_gs_csv(&points, &mut *out).map_err(io_err)?,
    }
    Ok(EXIT_OK)
}

fn cmd_oracle(a: OracleArgs, out: &mut dyn Write) -> Result<u8> {
    let code = RsCode::with_m(a.m, a.k_symbols)?;
    writeln!(
        out,
        "RS({}, {}) over GF(2^{}): t={} d={}",
        code.n(),
        code.k(),
        code.m(),
        code.t(),
        code.min_distance()
    )
    .map_err(io_err)?;
    if !a.received.is_empty() {
        let book = Codebook::new(&code)?;
        let res = book.nearest(&a.received)?;
        writeln!(out, "distance={} ties={}", res.distance, res.best_codewords.len()).map_err(io_err)?;
        for cw in &res.best_codewords {
            let s: Vec<String> = cw.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", s.join(",")).map_err(io_err)?;
        }
    }
    if a.trials > 0 {
        let rate = column_collision_rate(&code, a.trials, a.seed)?;
        writeln!(
            out,
            "collision_rate={rate:.6} expected={:.6}",
            crate::eval::far_analytic(code.k_bits())
        )
        .map_err(io_err)?;
    }
    Ok(EXIT_OK)
}

fn cmd_params(a: ParamsArgs, out: &mut dyn Write) -> Result<u8> {
    writeln!(out, "m,N,n,security,K,achieved_security,rate").map_err(io_err)?;
    for &m in &a.m {
        for &s in &a.security {
            let p = params_for_security(m, s)?;
            writeln!(
                out,
                "{},{},{},{},{},{},{:.3}",
                p.m, p.n_symbols, p.n_bits, p.requested_security, p.k, p.achieved_security, p.rate
            )
            .map_err(io_err)?;
        }
    }
    Ok(EXIT_OK)
}
