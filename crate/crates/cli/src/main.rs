use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use freechaos::{run_experiment, Config, Error, Report, EXPERIMENTS};
use freechaos_core::{limits, Kind};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Runs a named free-chaos experiment and writes its report.
#[derive(Debug, Parser)]
#[command(name = "fchaos", version, about)]
struct Args {
    /// Experiment to run; `--list` shows the registered names.
    #[arg(long, required_unless_present = "list")]
    experiment: Option<String>,

    /// List the registered experiments and exit.
    #[arg(long)]
    list: bool,

    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Caps the worker threads of the matrix oracle.
    #[arg(long)]
    threads: Option<usize>,

    /// Tolerance for exact identities.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,

    /// Tolerance for midpoint-sampled kernels.
    #[arg(long, default_value_t = 1e-3)]
    sampled_tol: f64,

    /// Time horizon.
    #[arg(long = "T")]
    horizon: Option<f64>,

    /// Number of grid cells.
    #[arg(long = "N")]
    cells: Option<usize>,

    #[arg(long)]
    order: Option<usize>,

    /// wigner or free_poisson.
    #[arg(long)]
    kind: Option<Kind>,

    #[arg(long)]
    k_max: Option<usize>,

    /// Matrix dimension of the random-matrix oracle.
    #[arg(long)]
    d: Option<usize>,

    #[arg(long)]
    trials: Option<usize>,

    /// Corpus size.
    #[arg(long)]
    pairs: Option<usize>,

    /// Maximal total degree of alternating moments.
    #[arg(long)]
    depth: Option<u32>,

    /// Dense-entry budget per alternating moment.
    #[arg(long)]
    budget: Option<usize>,

    /// Overrides the tensor memory guard.
    #[arg(long, env = "FCHAOS_MAX_TENSOR_ENTRIES")]
    max_tensor_entries: Option<usize>,
}

impl Args {
    fn config(&self) -> Config {
        Config {
            seed: self.seed,
            tol: self.tol,
            sampled_tol: self.sampled_tol,
            horizon: self.horizon,
            cells: self.cells,
            order: self.order,
            kind: self.kind,
            k_max: self.k_max,
            d: self.d,
            trials: self.trials,
            pairs: self.pairs,
            depth: self.depth,
            budget: self.budget,
        }
    }
}

fn write_report(report: &Report, args: &Args) -> Result<(), Error> {
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => {
            Box::new(File::create(path).map_err(|e| Error::Io(path.display().to_string(), e))?)
        }
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match args.format {
        Format::Json => sink
            .write_all(report.to_json()?.as_bytes())
            .map_err(|e| Error::Io("report".into(), e))?,
        Format::Csv => report.write_csv(&mut sink)?,
    }
    sink.flush().map_err(|e| Error::Io("report".into(), e))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    if args.list {
        for (name, about) in EXPERIMENTS {
            println!("{name:24} {about}");
        }
        return ExitCode::SUCCESS;
    }
    if let Some(limit) = args.max_tensor_entries {
        limits::set_max_tensor_entries(limit);
    }
    if let Some(threads) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("fchaos: {e}");
            return ExitCode::from(1);
        }
    }
    let name = args.experiment.as_deref().unwrap_or_default();
    let report = match run_experiment(name, &args.config()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("fchaos: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = write_report(&report, &args) {
        eprintln!("fchaos: {e}");
        return ExitCode::from(1);
    }
    for c in report.failed_checks() {
        eprintln!("FAIL {}: {}", c.name, c.detail);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
