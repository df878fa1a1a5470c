//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when any bound check fails (offending
//! coordinates go to stderr), 2 on usage or parameter errors.
//!
//! CSV floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64` exactly.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::ThreadPool;
use serde::Serialize;

use crate::experiments::{
    examples_table, find_conjecture_counterexample, q_envelope, run_figure1_with_tol, verify_sweep_with, ExampleRow,
    ExperimentSummary, SampleRecord, SearchOutcome, SweepOptions, Violation,
};
use crate::tolerance;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Exact, ordered CSV header for sample records.
pub const CSV_HEADER: &str = "index,d,rank_rho,rank_sigma,R,trace_dist,hs_dist,Q,ub_theorem1,ub_norm_equiv,ub_rank_sum,ub_entropy_p2,ub_entropy_p3,lemma1_ok,weyl_ok";

const EXAMPLES_HEADER: &str =
    "example,d,r,s,R,trace_dist,hs_dist,Q,closed_trace_dist,closed_hs_dist,closed_Q,residual,note";

const DEFAULT_COUNTEREXAMPLE_BUDGET: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "hsbound",
    version,
    about = "Trace distance vs Hilbert-Schmidt distance bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the Q-versus-R ensemble and write one row per pair.
    Figure1(CommonArgs),
    /// Compare computed distances with closed forms for the projector examples.
    Examples(CommonArgs),
    /// Run every bound check over random pairs; `--dim` accepts a comma list.
    Verify(CommonArgs),
    /// Search for a violation of D^2 <= D_HS / Tr(rho^2). `--samples` is the budget.
    Counterexample(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Hilbert-space dimension (comma-separated list for `verify`).
    #[arg(long, value_delimiter = ',', default_value = "16")]
    pub dim: Vec<usize>,
    /// Number of samples (search budget for `counterexample`, default 1000000 there).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative eigenvalue cutoff for numerical rank.
    #[arg(long, default_value_t = tolerance::DEFAULT_RANK_TOL)]
    pub rank_tol: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads (0 = rayon default).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

impl CommonArgs {
    fn single_dim(&self) -> Result<usize, String> {
        match self.dim.as_slice() {
            [d] => Ok(*d),
            _ => Err(format!("expected a single --dim, got {:?}", self.dim)),
        }
    }

    fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }
}

/// Format a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV data row matching [`CSV_HEADER`].
pub fn csv_row(r: &SampleRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.index,
        r.d,
        r.rank_rho,
        r.rank_sigma,
        fmt_f64(r.reduced_rank),
        fmt_f64(r.trace_distance),
        fmt_f64(r.hs_distance),
        fmt_f64(r.q_ratio),
        fmt_f64(r.upper_theorem1),
        fmt_f64(r.upper_norm_equiv),
        fmt_f64(r.upper_rank_sum),
        fmt_f64(r.upper_entropy_p2),
        fmt_f64(r.upper_entropy_p3),
        r.lemma1_ok,
        r.weyl_ok,
    )
}

pub fn write_csv<W: Write>(out: &mut W, records: &[SampleRecord]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", csv_row(r))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonRun<'a, T: Serialize> {
    records: &'a [T],
    summary: &'a ExperimentSummary,
}

fn example_row_csv(row: &ExampleRow) -> String {
    let triple = |t: Option<crate::experiments::DistanceTriple>| match t {
        Some(t) => [t.trace_distance, t.hs_distance, t.q_ratio].map(fmt_f64).join(","),
        None => ",,".to_string(),
    };
    format!(
        "{},{},{},{},{},{},{},{},{}",
        row.example,
        row.d,
        row.r,
        row.s,
        fmt_f64(row.reduced_rank),
        triple(row.computed),
        triple(row.closed_form),
        row.residual().map(fmt_f64).unwrap_or_default(),
        row.skipped.as_deref().unwrap_or(""),
    )
}

fn open_output<'a>(path: &Option<PathBuf>, stdout: &'a mut dyn Write) -> io::Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

fn report_failures(stderr: &mut dyn Write, failures: &[Violation]) -> io::Result<()> {
    for f in failures {
        writeln!(
            stderr,
            "violation dim={} index={} seed={}: {}",
            f.dim,
            f.index,
            f.seed,
            f.messages.join("; ")
        )?;
    }
    Ok(())
}

fn summary_line(s: &ExperimentSummary) -> String {
    format!(
        "n={} violations={} min_q={} max_q_over_r={} redraws={} seed={} runtime_s={:.3}",
        s.n_samples, s.violations, s.min_q, s.max_q_over_r, s.redraws, s.seed, s.runtime_seconds
    )
}

enum Failure {
    Usage(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn figure1(
    args: &CommonArgs,
    pool: &ThreadPool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let d = args.single_dim().map_err(Failure::Usage)?;
    let run = pool.install(|| run_figure1_with_tol(d, args.samples_or(20_000), args.seed, args.rank_tol))?;
    {
        let mut out = open_output(&args.out, stdout)?;
        match args.format {
            Format::Csv => write_csv(&mut out, &run.records)?,
            Format::Json => {
                serde_json::to_writer_pretty(
                    &mut out,
                    &JsonRun {
                        records: &run.records,
                        summary: &run.summary,
                    },
                )
                .map_err(io::Error::from)?;
                writeln!(out)?;
            }
        }
        out.flush()?;
    }
    writeln!(stderr, "{}", summary_line(&run.summary))?;
    let bins = q_envelope(&run.records);
    let saturation = bins
        .iter()
        .map(|b| b.max_q / b.reduced_rank)
        .fold(f64::NEG_INFINITY, f64::max);
    writeln!(stderr, "R values={} best max(Q)/R per R={saturation:.6}", bins.len())?;
    report_failures(stderr, &run.summary.failures)?;
    Ok(if run.summary.violations == 0 {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn examples(
    args: &CommonArgs,
    pool: &ThreadPool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let d = args.single_dim().map_err(Failure::Usage)?;
    let rows = pool.install(|| examples_table(d))?;
    let worst = rows.iter().filter_map(ExampleRow::residual).fold(0.0_f64, f64::max);
    {
        let mut out = open_output(&args.out, stdout)?;
        match args.format {
            Format::Csv => {
                writeln!(out, "{EXAMPLES_HEADER}")?;
                for row in &rows {
                    writeln!(out, "{}", example_row_csv(row))?;
                }
            }
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, &rows).map_err(io::Error::from)?;
                writeln!(out)?;
            }
        }
        out.flush()?;
    }
    writeln!(stderr, "rows={} max_residual={worst:e}", rows.len())?;
    Ok(if worst <= 1e-10 { EXIT_OK } else { EXIT_VIOLATION })
}

fn verify(
    args: &CommonArgs,
    pool: &ThreadPool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let options = SweepOptions {
        rank_tol: args.rank_tol,
        ..SweepOptions::default()
    };
    let summary = pool.install(|| verify_sweep_with(&args.dim, args.samples_or(20_000), args.seed, &options))?;
    match args.format {
        Format::Csv => writeln!(stdout, "{}", summary_line(&summary))?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut *stdout, &summary).map_err(io::Error::from)?;
            writeln!(stdout)?;
        }
    }
    report_failures(stderr, &summary.failures)?;
    Ok(if summary.violations == 0 {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn counterexample(
    args: &CommonArgs,
    pool: &ThreadPool,
    stdout: &mut dyn Write,
    _stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let d = args.single_dim().map_err(Failure::Usage)?;
    let budget = args.samples_or(DEFAULT_COUNTEREXAMPLE_BUDGET) as u64;
    let outcome = pool.install(|| find_conjecture_counterexample(d, budget, args.seed))?;
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *stdout, &outcome).map_err(io::Error::from)?;
            writeln!(stdout)?;
        }
        Format::Csv => match &outcome {
            SearchOutcome::Found(cx) => {
                let recomputed = cx.recompute_margin()?;
                writeln!(
                    stdout,
                    "found d={} seed={} index={} kind={:?} D={} D_HS={} purity_rho={} margin={} recomputed_margin={}",
                    cx.d,
                    cx.seed,
                    cx.index,
                    cx.kind,
                    fmt_f64(cx.trace_distance),
                    fmt_f64(cx.hs_distance),
                    fmt_f64(cx.purity_rho),
                    fmt_f64(cx.margin),
                    fmt_f64(recomputed),
                )?;
            }
            SearchOutcome::Exhausted { tried, skipped_pure } => {
                writeln!(stdout, "exhausted tried={tried} skipped_pure={skipped_pure}")?;
            }
        },
    }
    Ok(EXIT_OK)
}

/// Parse `argv` (program name first), run the command, return the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            return code;
        }
    };
    let args = match &cli.command {
        Command::Figure1(a) | Command::Examples(a) | Command::Verify(a) | Command::Counterexample(a) => a,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(args.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let result = match &cli.command {
        Command::Figure1(a) => figure1(a, &pool, stdout, stderr),
        Command::Examples(a) => examples(a, &pool, stdout, stderr),
        Command::Verify(a) => verify(a, &pool, stdout, stderr),
        Command::Counterexample(a) => counterexample(a, &pool, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}\n\nrun `hsbound --help` for usage");
            EXIT_USAGE
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}
