//! Command-line front end: `sigkit <sig|logsig|windows|gradcheck|bench|words|oracle>`.
//!
//! Exit codes: 0 success, 1 failed check (`gradcheck`, `windows --verify`),
//! 2 input, descriptor or config parse error, 3 shape, capacity, domain or
//! window error.

pub mod bench;
pub mod io;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backward::signature_backward;
use crate::error::SigError;
use crate::logsig::LogSigPlan;
use crate::sigcore::{
    chen_concat, signature_forward_with, signature_windows_with, PathBatch, Precision,
};
use crate::testkit;
use crate::transforms::lead_lag;
use crate::words::parse_word;
use crate::wordsets::{WordSet, WordSetDescriptor};

/// Gradient check threshold on the maximum relative error.
pub const GRADCHECK_TOL: f64 = 1e-6;
/// Finite-difference step (scaled by `max(1, |x|)`).
pub const GRADCHECK_STEP: f64 = 1e-5;
/// Tolerance for `windows --verify`.
pub const VERIFY_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "sigkit",
    version,
    about = "Path signatures over arbitrary word sets"
)]
struct Cli {
    /// Worker thread cap (0 = all cores).
    #[arg(long, global = true, env = "SIGKIT_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Signature coefficients, one CSV row per path.
    Sig {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        words: WordSetArgs,
        /// Accumulate in single precision.
        #[arg(long)]
        single: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Log-signature coefficients at Lyndon words.
    Logsig {
        #[command(flatten)]
        input: InputArgs,
        /// Truncation depth.
        #[arg(long)]
        depth: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Signatures over sample windows listed in a CSV of `l,r` pairs.
    Windows {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        words: WordSetArgs,
        /// CSV file of 0-based `l,r` sample index pairs.
        #[arg(long)]
        windows: PathBuf,
        /// Check Chen recombination of adjacent windows against a direct evaluation.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        single: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare analytic gradients with central finite differences.
    Gradcheck {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        words: WordSetArgs,
        /// Seed for the random upstream gradient.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Timing and allocation table for the cases in a JSON config.
    Bench {
        /// JSON config file.
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// List a word set with column indices.
    Words {
        #[command(flatten)]
        words: WordSetArgs,
        /// Alphabet size, when the descriptor does not give one.
        #[arg(long)]
        dim: Option<u32>,
    },
    /// Dense reference signature (slow, size-limited).
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        depth: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Path file: CSV (one sample per row) or binary with a `SIGK` header.
    input: PathBuf,
    /// First CSV column is a path id instead of blank-line separation.
    #[arg(long)]
    path_id_column: bool,
    /// Apply the lead-lag transform before computing.
    #[arg(long)]
    leadlag: bool,
}

#[derive(Debug, Args)]
struct WordSetArgs {
    /// JSON word-set descriptor, inline or as a file path.
    #[arg(long)]
    wordset: Option<String>,
    /// Truncated word set of this depth.
    #[arg(long)]
    depth: Option<u32>,
    /// Custom word set, comma-separated words such as `1,1.2,2.1.1`.
    #[arg(long)]
    words: Option<String>,
    /// Prepend the empty-word column.
    #[arg(long)]
    include_empty: bool,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file (default: stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Sig(SigError),
    Check(String),
}

impl From<SigError> for Failure {
    fn from(e: SigError) -> Self {
        Self::Sig(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Exit code for a library error.
pub fn exit_code(e: &SigError) -> i32 {
    match e {
        SigError::Parse(_) | SigError::InvalidLetter { .. } | SigError::CorruptWord { .. } => 2,
        SigError::Capacity(_)
        | SigError::Range { .. }
        | SigError::Domain(_)
        | SigError::Shape(_)
        | SigError::Window { .. }
        | SigError::UnsupportedWordSet(_) => 3,
    }
}

impl WordSetArgs {
    fn build(&self, data_dim: Option<u32>) -> crate::Result<WordSet> {
        let given = [
            self.wordset.is_some(),
            self.depth.is_some(),
            self.words.is_some(),
        ];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(SigError::Parse(
                "give exactly one of --wordset, --depth, --words".into(),
            ));
        }
        let need_dim =
            || data_dim.ok_or_else(|| SigError::Parse("alphabet size unknown; pass --dim".into()));
        let ws = if let Some(spec) = &self.wordset {
            let text = if spec.trim_start().starts_with('{') {
                spec.clone()
            } else {
                fs::read_to_string(spec)
                    .map_err(|e| SigError::Parse(format!("cannot read {spec}: {e}")))?
            };
            let desc = WordSetDescriptor::from_json(&text)?;
            WordSet::from_descriptor(&desc, data_dim)?
        } else if let Some(depth) = self.depth {
            WordSet::truncated(need_dim()?, depth)?
        } else {
            let d = need_dim()?;
            let words = self
                .words
                .as_deref()
                .unwrap_or_default()
                .split(',')
                .map(|w| parse_word(w.trim(), d))
                .collect::<crate::Result<Vec<_>>>()?;
            WordSet::custom(&words, d)?
        };
        Ok(if self.include_empty {
            ws.with_include_empty(true)
        } else {
            ws
        })
    }
}

impl InputArgs {
    fn load(&self) -> crate::Result<PathBatch> {
        let paths = io::read_paths(&self.input, self.path_id_column)?;
        if self.leadlag {
            lead_lag(&paths)
        } else {
            Ok(paths)
        }
    }
}

impl OutputArgs {
    fn emit(&self, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
        match &self.output {
            Some(p) => fs::write(p, text)
                .map_err(|e| SigError::Parse(format!("cannot write {}: {e}", p.display())).into()),
            None => stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Check(format!("cannot write output: {e}"))),
        }
    }
}

fn precision(single: bool) -> Precision {
    if single {
        Precision::Single
    } else {
        Precision::Double
    }
}

fn data_dim(paths: &PathBatch) -> u32 {
    paths.d() as u32
}

/// `|a - f| / max(1, |a|, |f|)`.
pub fn gradcheck_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

fn cmd_sig(
    input: &InputArgs,
    words: &WordSetArgs,
    single: bool,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let paths = input.load()?;
    let ws = Arc::new(words.build(Some(data_dim(&paths)))?);
    let sig = signature_forward_with(&paths, &ws, precision(single))?;
    output.emit(
        &io::coefficients_csv(&ws.labels(), sig.batch(), sig.values()),
        stdout,
    )
}

fn cmd_logsig(
    input: &InputArgs,
    depth: u32,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let paths = input.load()?;
    let plan = LogSigPlan::new(data_dim(&paths), depth)?;
    let ls = plan.forward(&paths)?;
    output.emit(
        &io::coefficients_csv(&plan.lyndon().labels(), ls.batch(), ls.values()),
        stdout,
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_windows(
    input: &InputArgs,
    words: &WordSetArgs,
    windows: &Path,
    verify: bool,
    single: bool,
    output: &OutputArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<()> {
    let paths = input.load()?;
    let ws = Arc::new(words.build(Some(data_dim(&paths)))?);
    let win = io::read_windows(windows)?;
    let outs = signature_windows_with(&paths, &ws, &win, precision(single))?;

    let mut text = String::from("path,window");
    for l in ws.labels() {
        text.push(',');
        text.push_str(&l);
    }
    text.push('\n');
    for b in 0..paths.batch() {
        for (k, out) in outs.iter().enumerate() {
            text.push_str(&format!("{b},{k}"));
            for &v in out.row(b) {
                text.push(',');
                io::fmt_f64(&mut text, v);
            }
            text.push('\n');
        }
    }
    output.emit(&text, stdout)?;

    if verify {
        let pairs = win.pairs();
        let mut checked = 0usize;
        let mut worst = 0.0f64;
        for k in 0..pairs.len().saturating_sub(1) {
            let ((l1, r1), (l2, r2)) = (pairs[k], pairs[k + 1]);
            if r1 != l2 {
                continue;
            }
            let joined = chen_concat(&outs[k], &outs[k + 1])?;
            let direct = signature_windows_with(
                &paths,
                &ws,
                &crate::sigcore::WindowSpec::new(vec![(l1, r2)]),
                precision(single),
            )?;
            for (a, b) in joined.values().iter().zip(direct[0].values()) {
                worst = worst.max((a - b).abs() / b.abs().max(1.0));
            }
            checked += 1;
        }
        if checked == 0 {
            return Err(Failure::Check(
                "--verify needs at least one pair of adjacent windows (r_k = l_{k+1})".into(),
            ));
        }
        writeln!(
            stderr,
            "verify: {checked} adjacent pairs, max error {worst:.3e}"
        )
        .ok();
        if worst > VERIFY_TOL {
            return Err(Failure::Check(format!(
                "Chen recombination error {worst:.3e} exceeds {VERIFY_TOL:e}"
            )));
        }
    }
    Ok(())
}

fn cmd_gradcheck(
    input: &InputArgs,
    words: &WordSetArgs,
    seed: u64,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let paths = input.load()?;
    let ws = Arc::new(words.build(Some(data_dim(&paths)))?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let upstream: Vec<f64> = (0..paths.batch() * ws.output_width())
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    let analytic = signature_backward(&paths, &ws, &upstream)?;
    let numeric = testkit::finite_difference_grad(&paths, &ws, &upstream, GRADCHECK_STEP)?;
    let worst = analytic
        .values()
        .iter()
        .zip(&numeric)
        .map(|(&a, &f)| gradcheck_error(a, f))
        .fold(0.0, f64::max);
    let status = if worst <= GRADCHECK_TOL { "ok" } else { "FAIL" };
    writeln!(
        stdout,
        "gradients: {}\nmax_rel_error: {worst:.6e}\nstatus: {status}",
        numeric.len()
    )
    .ok();
    if worst <= GRADCHECK_TOL {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "max relative error {worst:.3e} exceeds {GRADCHECK_TOL:e}"
        )))
    }
}

fn cmd_bench(config: &Path, output: &OutputArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let text = fs::read_to_string(config)
        .map_err(|e| SigError::Parse(format!("cannot read {}: {e}", config.display())))?;
    let cfg = bench::BenchConfig::from_json(&text)?;
    let rows = bench::run_bench(&cfg)?;
    output.emit(&bench::bench_csv(&rows), stdout)
}

fn cmd_words(words: &WordSetArgs, dim: Option<u32>, stdout: &mut dyn Write) -> CliResult<()> {
    let ws = words.build(dim)?;
    let mut text = String::from("index,word\n");
    for (i, l) in ws.labels().iter().enumerate() {
        text.push_str(&format!("{i},{l}\n"));
    }
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Failure::Check(format!("cannot write output: {e}")))
}

fn cmd_oracle(
    input: &InputArgs,
    depth: u32,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let paths = input.load()?;
    let ws = WordSet::truncated(data_dim(&paths), depth)?;
    let values = testkit::oracle_rows(&paths, &ws)?;
    output.emit(
        &io::coefficients_csv(&ws.labels(), paths.batch(), &values),
        stdout,
    )
}

fn dispatch(cmd: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Sig {
            input,
            words,
            single,
            output,
        } => cmd_sig(input, words, *single, output, stdout),
        Command::Logsig {
            input,
            depth,
            output,
        } => cmd_logsig(input, *depth, output, stdout),
        Command::Windows {
            input,
            words,
            windows,
            verify,
            single,
            output,
        } => cmd_windows(
            input, words, windows, *verify, *single, output, stdout, stderr,
        ),
        Command::Gradcheck { input, words, seed } => cmd_gradcheck(input, words, *seed, stdout),
        Command::Bench { config, output } => cmd_bench(config, output, stdout),
        Command::Words { words, dim } => cmd_words(words, *dim, stdout),
        Command::Oracle {
            input,
            depth,
            output,
        } => cmd_oracle(input, *depth, output, stdout),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                stderr.write_all(rendered.as_bytes()).ok();
            } else {
                stdout.write_all(rendered.as_bytes()).ok();
            }
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            writeln!(stderr, "sigkit: cannot build thread pool: {e}").ok();
            return 3;
        }
    };
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let result = pool.install(|| dispatch(&cli.command, &mut out, &mut err));
    stdout.write_all(&out).ok();
    stderr.write_all(&err).ok();
    match result {
        Ok(()) => 0,
        Err(Failure::Sig(e)) => {
            writeln!(stderr, "sigkit: {e}").ok();
            exit_code(&e)
        }
        Err(Failure::Check(msg)) => {
            writeln!(stderr, "sigkit: {msg}").ok();
            1
        }
    }
}
