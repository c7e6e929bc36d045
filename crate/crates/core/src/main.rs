use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mathieu_gaps::harness::{
    self, report, FitTarget, GapReport, Method, NRange, OutputFormat, RunConfig, Suite,
};
use mathieu_gaps::numeric::Precision;
use mathieu_gaps::walks::SIndex;
use mathieu_gaps::{Error, Result};

#[derive(Parser)]
#[command(name = "mg", version, about = "Spectral gaps of the Mathieu operator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, ValueEnum)]
enum MethodArg {
    Series,
    Oracle,
    Both,
}

#[derive(Copy, Clone, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Copy, Clone, ValueEnum)]
enum FamilyArg {
    #[value(name = "A")]
    A,
    Sigma,
    #[value(name = "S")]
    S,
}

#[derive(clap::Args)]
struct GapArgs {
    /// Amplitude, e.g. 1, 2i, 0.5-0.25i
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    /// Single n or inclusive range lo..hi
    #[arg(long)]
    n: String,
    #[arg(long, value_enum, default_value = "both")]
    method: MethodArg,
    /// Working precision in bits [default: $MG_DEFAULT_BITS or 256]
    #[arg(long)]
    bits: Option<u32>,
    /// Relative tolerance for the series solver
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Include wall-clock timings in the table
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Gap table for one amplitude over a range of n
    Gap(GapArgs),
    /// Deviations z^- and z^+ for each n
    Deviations(GapArgs),
    /// A single walk-sum term
    SeriesTerm {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Index of an A or S term
        #[arg(long)]
        k: Option<u32>,
        /// Number of back steps of a sigma term
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        a: String,
        /// Entry of the 2x2 system for family S: 11, 12, 21 or 22
        #[arg(long, default_value = "11")]
        ij: String,
        /// Rational arithmetic instead of floating point
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        bits: Option<u32>,
    },
    /// Run a sweep described by a JSON config file
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run verification checks
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Print the summary as JSON
        #[arg(long)]
        json: bool,
    },
    /// Fit the remainder order of a saved table
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        target: String,
    },
}

fn bits_or_default(bits: Option<u32>) -> Result<u32> {
    match bits {
        Some(b) => Ok(b),
        None => harness::default_bits(),
    }
}

fn config_from(args: &GapArgs) -> Result<RunConfig> {
    let mut c = RunConfig::new(&args.a, NRange::parse(&args.n)?);
    c.precision_bits = bits_or_default(args.bits)?;
    c.tol = args.tol.clone();
    c.methods = match args.method {
        MethodArg::Series => vec![Method::Series],
        MethodArg::Oracle => vec![Method::Oracle],
        MethodArg::Both => vec![Method::Series, Method::Oracle],
    };
    c.output_path = args.out.clone();
    c.output_format = args.format.map(|f| match f {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    });
    c.record_timings = args.timings;
    Ok(c)
}

fn print_rows(rows: &[GapReport], format: OutputFormat) -> Result<()> {
    let out = io::stdout().lock();
    match format {
        OutputFormat::Csv => report::write_csv(rows, out),
        OutputFormat::Json => report::write_json(rows, out),
    }
}

fn sweep(config: &RunConfig) -> Result<ExitCode> {
    let rows = harness::run_sweep(config)?;
    match &config.output_path {
        None => print_rows(&rows, config.format())?,
        Some(path) => {
            let failed = rows.iter().filter(|r| r.failed()).count();
            eprintln!("wrote {} rows ({failed} without a gap) to {}", rows.len(), path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn deviations(args: &GapArgs) -> Result<ExitCode> {
    let config = config_from(args)?;
    let rows = harness::run_sweep(&config)?;
    let digits = config.precision()?.decimal_digits();
    let mut out = io::stdout().lock();
    for r in &rows {
        match (&r.z_minus, &r.z_plus) {
            (Some(m), Some(p)) => writeln!(
                out,
                "n={} z-={} z+={}",
                r.n,
                m.to_sci_string(digits),
                p.to_sci_string(digits)
            )?,
            _ => writeln!(
                out,
                "n={} error: {}",
                r.n,
                r.series_error.as_deref().or(r.oracle_error.as_deref()).unwrap_or("no data")
            )?,
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Gap(args) => sweep(&config_from(&args)?),
        Cmd::Deviations(args) => deviations(&args),
        Cmd::SeriesTerm { family, k, p, n, z, a, ij, exact, bits } => {
            let prec = Precision::new(bits_or_default(bits)?)?;
            let (fam, index) = match family {
                FamilyArg::A => (harness::Family::Alpha, k.or(p)),
                FamilyArg::Sigma => (harness::Family::Sigma, p.or(k)),
                FamilyArg::S => {
                    let which = match ij.as_str() {
                        "11" => SIndex::S11,
                        "12" => SIndex::S12,
                        "21" => SIndex::S21,
                        "22" => SIndex::S22,
                        _ => return Err(Error::Config(format!("--ij {ij:?} must be 11, 12, 21 or 22"))),
                    };
                    (harness::Family::S(which), k.or(p))
                }
            };
            let index = index.ok_or_else(|| Error::Config("give --k or --p".into()))?;
            println!("{}", harness::series_term(fam, index, n, &z, &a, exact, prec)?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sweep { config } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::Config(format!("{}: {e}", config.display())))?;
            sweep(&RunConfig::from_json(&text)?)
        }
        Cmd::Verify { suite, json } => {
            let summary = harness::verify(Suite::parse(&suite)?);
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?
                );
            } else {
                for c in &summary.checks {
                    println!("{c}");
                }
                let failed = summary.checks.iter().filter(|c| !c.passed).count();
                println!("{} checks, {failed} failed", summary.checks.len());
            }
            Ok(if summary.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Fit { input, target } => {
            let report = harness::fit_file(&input, FitTarget::parse(&target)?)?;
            println!("{report}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
