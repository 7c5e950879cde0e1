//! Subcommand implementations. Each returns the process exit code.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use eprcommit::adversary::{estimate_alice_flip, estimate_bob_guess, Role, Strategy};
use eprcommit::multiparty::{run_chains, ChainConfig, Preset};
use eprcommit::protocol::{
    run_batch, tomography, AxisMode, Backend, InputSource, SessionConfig, TomographyReport,
};
use eprcommit::qsim::{BellLabel, PairState, ZProduct};
use eprcommit::randomness::{chisq_uniform, monobit, runs_test, DEFAULT_ALPHA};
use eprcommit::replay::{replay, RunSpec};
use eprcommit::rng::{self, Stream};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config_file::RunConfigFile;
use crate::transcript_io::{self, Header};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ABORT: i32 = 2;

fn serde_name<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|e| e.to_string())
}

fn parse_axis(s: &str) -> Result<AxisMode, String> {
    serde_name(s)
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    serde_name(s)
}

#[derive(Debug, Parser)]
#[command(name = "eprcommit", version, about = "EPR-pair bit commitment and coin flipping simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one Alice–Bob session, or a batch of them.
    Session(SessionArgs),
    /// Run the m-party chain.
    Chain(ChainArgs),
    /// Estimate a cheating strategy's success rate.
    Adversary(AdversaryArgs),
    /// Run a randomness test on an output file.
    Randtest(RandtestArgs),
    /// Tomographic estimate of a pair ensemble.
    Tomography(TomographyArgs),
    /// Validate a transcript file and replay it.
    Replay(ReplayArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// TOML run configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Total pairs.
    #[arg(long = "N")]
    pub total_pairs: Option<usize>,
    /// Retained pairs (per receiver for chains).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub verify_fraction: Option<f64>,
    /// fixed-z or random-axes.
    #[arg(long, value_parser = parse_axis)]
    pub axis_mode: Option<AxisMode>,
    #[arg(long)]
    pub noisy: bool,
    #[arg(long)]
    pub p_acc: Option<f64>,
    #[arg(long)]
    pub max_mismatch: Option<f64>,
    /// matrix or label.
    #[arg(long, value_parser = parse_backend)]
    pub backend: Option<Backend>,
    #[arg(long)]
    pub rotational_checks: Option<usize>,
    /// Transcript output (JSONL).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Result JSON output; stdout when absent.
    #[arg(long)]
    pub result: Option<PathBuf>,
}

impl RunArgs {
    fn file(&self) -> Result<RunConfigFile> {
        match &self.config {
            Some(p) => RunConfigFile::load(p),
            None => Ok(RunConfigFile::default()),
        }
    }

    fn session_config(&self, file: &RunConfigFile) -> SessionConfig {
        let mut c = SessionConfig::default();
        if let Some(v) = self.total_pairs.or(file.total_pairs) {
            c.total_pairs = v;
        }
        if let Some(v) = self.n.or(file.n) {
            c.retained = v;
        }
        self.apply_common(file, &mut c.verify_fraction, &mut c.axis_mode, &mut c.p_acc, &mut c.max_mismatch, &mut c.seed, &mut c.noisy, &mut c.backend, &mut c.rotational_checks, &mut c.calibration);
        c
    }

    #[allow(clippy::too_many_arguments)]
    fn apply_common(
        &self,
        file: &RunConfigFile,
        verify_fraction: &mut f64,
        axis_mode: &mut AxisMode,
        p_acc: &mut f64,
        max_mismatch: &mut Option<f64>,
        seed: &mut u64,
        noisy: &mut bool,
        backend: &mut Backend,
        rotational_checks: &mut usize,
        calibration: &mut eprcommit::protocol::Calibration,
    ) {
        if let Some(v) = self.verify_fraction.or(file.verify_fraction) {
            *verify_fraction = v;
        }
        if let Some(v) = self.axis_mode.or(file.axis_mode) {
            *axis_mode = v;
        }
        if let Some(v) = self.p_acc.or(file.p_acc) {
            *p_acc = v;
        }
        if let Some(v) = self.max_mismatch.or(file.max_mismatch) {
            *max_mismatch = Some(v);
        }
        if let Some(v) = self.seed.or(file.seed) {
            *seed = v;
        }
        *noisy = self.noisy || file.noisy.unwrap_or(false);
        if let Some(v) = self.backend.or(file.backend) {
            *backend = v;
        }
        if let Some(v) = self.rotational_checks.or(file.rotational_checks) {
            *rotational_checks = v;
        }
        if let Some(v) = file.calibration_tol {
            calibration.target_tol = v;
        }
        if let Some(v) = file.calibration_step {
            calibration.step = v;
        }
        if let Some(v) = file.calibration_max_iter {
            calibration.max_iter = v;
        }
        if file.calibration_shots.is_some() {
            calibration.shots = file.calibration_shots;
        }
    }

    fn out(&self, file: &RunConfigFile) -> Option<PathBuf> {
        self.out.clone().or_else(|| file.out.clone())
    }

    fn result(&self, file: &RunConfigFile) -> Option<PathBuf> {
        self.result.clone().or_else(|| file.result.clone())
    }
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub commit: Option<u32>,
    #[arg(long)]
    pub guess: Option<u32>,
    /// Run this many sessions; unspecified inputs are drawn uniformly.
    #[arg(long)]
    pub batch: Option<usize>,
    /// With --batch: write the output bit string here.
    #[arg(long)]
    pub bits_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Party count.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub modulus: Option<u32>,
    /// trio or six-gods.
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub commit: Option<u32>,
    /// Comma-separated, one per receiver.
    #[arg(long, value_delimiter = ',')]
    pub guesses: Option<Vec<u32>>,
    /// Run this many chains with uniform inputs and report the output law.
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AdversaryArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub strategy: String,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct RandtestArgs {
    /// Bits as a 0/1 string, or whitespace-separated symbols.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// monobit, runs or chisq.
    #[arg(long)]
    pub test: String,
    #[arg(long, default_value_t = 2)]
    pub modulus: u32,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long)]
    pub result: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TomographyArgs {
    /// uniform-bell, uniform-product, psi-minus or biased-psi-minus.
    #[arg(long)]
    pub mixture: String,
    /// Shots per measurement setting.
    #[arg(long, default_value_t = 10_000)]
    pub shots: usize,
    /// Sample size.
    #[arg(long, default_value_t = 1000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report the exact ensemble instead of sampling.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub result: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub result: Option<PathBuf>,
}

/// Parses `args` and runs the command, writing reports to `stdout` and
/// diagnostics to `stderr`.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Session(a) => cmd_session(a, stdout),
        Command::Chain(a) => cmd_chain(a, stdout),
        Command::Adversary(a) => cmd_adversary(a, stdout),
        Command::Randtest(a) => cmd_randtest(a, stdout),
        Command::Tomography(a) => cmd_tomography(a, stdout),
        Command::Replay(a) => cmd_replay(a, stdout),
    }
}

fn emit<T: Serialize>(value: &T, path: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => writeln!(stdout, "{text}")?,
    }
    Ok(())
}

fn write_transcript(path: &Path, spec: &RunSpec, transcript: &eprcommit::protocol::Transcript) -> Result<()> {
    let text = transcript_io::to_string(&Header::new(Some(spec.clone())), transcript)?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct BatchReport<'a> {
    sessions: usize,
    aborts: usize,
    output: String,
    results: &'a [eprcommit::protocol::SessionResult],
}

pub fn cmd_session(a: SessionArgs, stdout: &mut dyn Write) -> Result<i32> {
    let file = a.run.file()?;
    let cfg = a.run.session_config(&file);
    cfg.validate()?;
    let result_path = a.run.result(&file);
    if let Some(count) = a.batch {
        let src = |v: Option<u32>| v.map_or(InputSource::Uniform, InputSource::Fixed);
        let b = run_batch(&cfg, count, src(a.commit), src(a.guess))?;
        let bits: String = b.output.iter().map(|&o| if o == 1 { '1' } else { '0' }).collect();
        if let Some(p) = &a.bits_out {
            fs::write(p, format!("{bits}\n")).with_context(|| format!("writing {}", p.display()))?;
        }
        let report = BatchReport { sessions: count, aborts: b.aborts(), output: bits, results: &b.sessions };
        emit(&report, result_path.as_deref(), stdout)?;
        return Ok(EXIT_OK);
    }
    let (Some(commit), Some(guess)) = (a.commit, a.guess) else {
        bail!("--commit and --guess are required without --batch");
    };
    let spec = RunSpec::Session { config: cfg, index: 0, commit, guess };
    let (outcome, transcript) = spec.execute()?;
    if let Some(p) = a.run.out(&file) {
        write_transcript(&p, &spec, &transcript)?;
    }
    emit(&outcome, result_path.as_deref(), stdout)?;
    Ok(if outcome.aborted() { EXIT_ABORT } else { EXIT_OK })
}

fn chain_config(a: &ChainArgs, file: &RunConfigFile) -> ChainConfig {
    let mut c = a.preset.map_or_else(ChainConfig::default, ChainConfig::preset);
    if let Some(m) = a.m.or(file.m) {
        c.parties = m;
    }
    if let Some(q) = a.modulus.or(file.modulus) {
        c.modulus = q;
    }
    if let Some(n) = a.run.n.or(file.n) {
        c.blocks = vec![n];
    }
    if let Some(t) = a.run.total_pairs.or(file.total_pairs) {
        c.total_pairs = Some(t);
    }
    a.run.apply_common(file, &mut c.verify_fraction, &mut c.axis_mode, &mut c.p_acc, &mut c.max_mismatch, &mut c.seed, &mut c.noisy, &mut c.backend, &mut c.rotational_checks, &mut c.calibration);
    c
}

#[derive(Serialize)]
struct UniformityReport {
    trials: usize,
    completed: usize,
    aborts: usize,
    modulus: u32,
    counts: Vec<usize>,
    chisq: Option<eprcommit::randomness::RandReport>,
}

pub fn cmd_chain(a: ChainArgs, stdout: &mut dyn Write) -> Result<i32> {
    let file = a.run.file()?;
    let cfg = chain_config(&a, &file);
    cfg.validate()?;
    let result_path = a.run.result(&file);
    if let Some(trials) = a.trials {
        let runs = run_chains(&cfg, trials)?;
        let outputs: Vec<u32> = runs.iter().filter_map(|r| r.output).collect();
        let mut counts = vec![0usize; cfg.modulus as usize];
        for &o in &outputs {
            counts[o as usize] += 1;
        }
        let chisq = chisq_uniform(&outputs, cfg.modulus, DEFAULT_ALPHA).ok();
        let report = UniformityReport {
            trials,
            completed: outputs.len(),
            aborts: trials - outputs.len(),
            modulus: cfg.modulus,
            counts,
            chisq,
        };
        emit(&report, result_path.as_deref(), stdout)?;
        return Ok(EXIT_OK);
    }
    let Some(commit) = a.commit else { bail!("--commit is required without --trials") };
    let guesses = a.guesses.clone().unwrap_or_default();
    if guesses.len() + 1 != cfg.parties {
        bail!("{} guesses given for {} receivers", guesses.len(), cfg.parties - 1);
    }
    let spec = RunSpec::Chain { config: cfg, index: 0, commit, guesses };
    let (outcome, transcript) = spec.execute()?;
    if let Some(p) = a.run.out(&file) {
        write_transcript(&p, &spec, &transcript)?;
    }
    emit(&outcome, result_path.as_deref(), stdout)?;
    Ok(if outcome.aborted() { EXIT_ABORT } else { EXIT_OK })
}

pub fn cmd_adversary(a: AdversaryArgs, stdout: &mut dyn Write) -> Result<i32> {
    let strategy: Strategy = a.strategy.parse()?;
    let file = a.run.file()?;
    let mut cfg = a.run.session_config(&file);
    if a.run.backend.is_none() && file.backend.is_none() {
        cfg.backend = Backend::Label;
    }
    cfg.validate()?;
    let report = match strategy.role() {
        Role::Bob => estimate_bob_guess(strategy, &cfg, a.trials)?,
        Role::Alice => estimate_alice_flip(strategy, &cfg, a.trials)?,
    };
    emit(&report, a.run.result(&file).as_deref(), stdout)?;
    Ok(EXIT_OK)
}

/// Reads a 0/1 string or whitespace-separated integers.
pub fn parse_symbols(text: &str) -> Result<Vec<u32>> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() == 1 {
        return tokens[0]
            .chars()
            .map(|c| c.to_digit(10).with_context(|| format!("unexpected character {c:?}")))
            .collect();
    }
    tokens.iter().map(|t| t.parse::<u32>().with_context(|| format!("bad symbol {t:?}"))).collect()
}

pub const RAND_TESTS: [&str; 3] = ["monobit", "runs", "chisq"];

pub fn cmd_randtest(a: RandtestArgs, stdout: &mut dyn Write) -> Result<i32> {
    let text = fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let symbols = parse_symbols(&text)?;
    let report = match a.test.as_str() {
        "monobit" => monobit(&symbols, a.alpha)?,
        "runs" => runs_test(&symbols, a.alpha)?,
        "chisq" => chisq_uniform(&symbols, a.modulus, a.alpha)?,
        other => bail!("unknown test {other:?}; known: {}", RAND_TESTS.join(", ")),
    };
    emit(&report, a.result.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

pub const MIXTURES: [&str; 4] = ["uniform-bell", "uniform-product", "psi-minus", "biased-psi-minus"];

/// The sample for a named mixture: labels in exact proportions.
pub fn mixture_sample(name: &str, pairs: usize) -> Result<Vec<PairState>> {
    if pairs == 0 {
        bail!("--pairs must be positive");
    }
    let state = |i: usize| -> Result<PairState> {
        Ok(match name {
            "uniform-bell" => PairState::bell(BellLabel::ALL[i % 4]),
            "uniform-product" => {
                let ZProduct(a, b) = ZProduct::ALL[i % 4];
                PairState::product_z(a, b)
            }
            "psi-minus" => PairState::singlet(),
            // 80% singlet, the rest spread evenly
            "biased-psi-minus" => match i % 15 {
                0..=11 => PairState::singlet(),
                k => PairState::bell(BellLabel::ALL[k - 11]),
            },
            other => bail!("unknown mixture {other:?}; known: {}", MIXTURES.join(", ")),
        })
    };
    (0..pairs).map(state).collect()
}

pub fn cmd_tomography(a: TomographyArgs, stdout: &mut dyn Write) -> Result<i32> {
    let sample = mixture_sample(&a.mixture, a.pairs)?;
    let report: TomographyReport = if a.exact {
        TomographyReport::exact(&sample)?
    } else {
        let mut r = rng::named(a.seed, 0, Stream::Aux);
        tomography(&sample, a.shots, &mut r)?
    };
    emit(&report, a.result.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

pub fn cmd_replay(a: ReplayArgs, stdout: &mut dyn Write) -> Result<i32> {
    let f = fs::File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let (header, transcript) = transcript_io::read(std::io::BufReader::new(f))?;
    let Some(spec) = header.run else { bail!("transcript header carries no run description") };
    let outcome = replay(&spec, &transcript)?;
    emit(&outcome, a.result.as_deref(), stdout)?;
    Ok(EXIT_OK)
}
