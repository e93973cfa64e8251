use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use levy_ito::harness::{self, Category, ExperimentConfig, Format};
use levy_ito::{Error, Execution};

#[derive(Parser)]
#[command(
    name = "levy-ito",
    version,
    about = "Monte Carlo and exact checks for Ito integrals against Levy white noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw realizations of the Poisson random measure on the config window.
    Simulate(Common),
    /// Run the moment checks (characteristic function, moments, interpolation).
    Moments {
        #[command(flatten)]
        common: Common,
        /// Inline jump measure as JSON, e.g. '{"atoms": [[1.0, 1.0]]}'.
        #[arg(long, requires_all = ["phi", "p"])]
        measure: Option<String>,
        /// Inline step function as JSON, e.g. '[[0.0, 1.0, 1.0]]'.
        #[arg(long, requires = "measure")]
        phi: Option<String>,
        /// Moment order for the inline check.
        #[arg(long, requires = "measure")]
        p: Option<usize>,
    },
    /// Run the moment-bound, isometry, martingale, tail and approximation checks.
    VerifyBounds(Common),
    /// Run the space-time convolution bound checks.
    Convolution(Common),
    /// Run the chaos, derivative and duality checks.
    MalliavinCheck(Common),
    /// Run every check, or re-render a saved JSON report.
    Report {
        #[command(flatten)]
        common: Common,
        /// Existing JSON report to convert instead of running the config.
        #[arg(long, conflicts_with = "config")]
        input: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the sample count of every check.
    #[arg(long)]
    samples: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Exit with status 1 when any check fails.
    #[arg(long)]
    strict: bool,
    /// Write per-sample values of every Monte Carlo check to this CSV file.
    #[arg(long)]
    dump_samples: Option<PathBuf>,
    /// Schedule samples on the current thread only.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn load_unchecked(&self) -> Result<ExperimentConfig, Error> {
        let path = self.config.as_ref().ok_or_else(|| Error::ConfigParse("--config is required".into()))?;
        ExperimentConfig::from_path(path)
    }

    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut config = self.load_unchecked()?;
        self.apply_overrides(&mut config)?;
        Ok(config)
    }

    fn apply_overrides(&self, config: &mut ExperimentConfig) -> Result<(), Error> {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(samples) = self.samples {
            config.samples = samples;
            for check in &mut config.checks {
                check.samples = None;
            }
        }
        config.validate()
    }

    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    fn writer(&self) -> Result<Box<dyn Write>, Error> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(create(path)?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn create(path: &PathBuf) -> Result<File, Error> {
    File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn run_category(common: &Common, config: &ExperimentConfig, filter: Option<Category>) -> Result<bool, Error> {
    let dump = common.dump_samples.is_some();
    let (report, dumps) = harness::run_with_samples(config, filter, common.exec(), dump)?;
    let mut out = common.writer()?;
    harness::emit(&report, common.format.into(), &mut out)?;
    out.flush()?;
    if let Some(path) = &common.dump_samples {
        let mut w = BufWriter::new(create(path)?);
        harness::emit_samples(&dumps, &mut w)?;
        w.flush()?;
    }
    Ok(report.pass)
}

fn inline_moment_config(common: &Common, measure: &str, phi: &str, p: usize) -> Result<ExperimentConfig, Error> {
    let text = format!(
        r#"{{"measure": {measure}, "checks": [{{"name": "moment", "kind": "moment", "phi": {phi}, "p": {p}}}]}}"#
    );
    let mut config = ExperimentConfig::from_json(&text)?;
    common.apply_overrides(&mut config)?;
    Ok(config)
}

fn simulate(common: &Common) -> Result<bool, Error> {
    // Here --samples counts realizations, not Monte Carlo draws of a check.
    let mut config = common.load_unchecked()?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let draws = common.samples.unwrap_or(1);
    let realizations = harness::simulate(&config, draws)?;
    let mut out = common.writer()?;
    match common.format {
        FormatArg::Json => {
            serde_json::to_writer_pretty(&mut out, &realizations).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(out)?;
        }
        FormatArg::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["sample", "x", "z"]).map_err(|e| Error::Io(e.to_string()))?;
            for r in &realizations {
                for pt in r["points"].as_array().into_iter().flatten() {
                    w.write_record([r["sample"].to_string(), pt[0].to_string(), pt[1].to_string()])
                        .map_err(|e| Error::Io(e.to_string()))?;
                }
            }
            w.flush()?;
        }
    }
    out.flush()?;
    Ok(true)
}

fn rerender(common: &Common, input: &PathBuf) -> Result<bool, Error> {
    let text = std::fs::read_to_string(input).map_err(|e| Error::Io(format!("{}: {e}", input.display())))?;
    let report = harness::parse(&text)?;
    let mut out = common.writer()?;
    harness::emit(&report, common.format.into(), &mut out)?;
    out.flush()?;
    Ok(report.pass)
}

fn dispatch(command: &Command) -> Result<(bool, bool), Error> {
    let (common, pass) = match command {
        Command::Simulate(c) => (c, simulate(c)?),
        Command::Moments { common, measure: Some(m), phi: Some(phi), p: Some(p) } => {
            (common, run_category(common, &inline_moment_config(common, m, phi, *p)?, None)?)
        }
        Command::Moments { common, .. } => (common, run_category(common, &common.load()?, Some(Category::Moments))?),
        Command::VerifyBounds(c) => (c, run_category(c, &c.load()?, Some(Category::Bounds))?),
        Command::Convolution(c) => (c, run_category(c, &c.load()?, Some(Category::Convolution))?),
        Command::MalliavinCheck(c) => (c, run_category(c, &c.load()?, Some(Category::Malliavin))?),
        Command::Report { common, input: Some(input) } => (common, rerender(common, input)?),
        Command::Report { common, input: None } => (common, run_category(common, &common.load()?, None)?),
    };
    Ok((pass, common.strict))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok((true, _)) | Ok((false, false)) => ExitCode::SUCCESS,
        Ok((false, true)) => {
            eprintln!("levy-ito: at least one check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("levy-ito: {e}");
            ExitCode::from(2)
        }
    }
}
