//! `vqe-bench`: run sweeps and scans, compute exact references, check files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vqe_core::bench::{
    convert_energy, read_series_file, read_sweep_spec_file, render_rows, rows_to_table, run_series, scan_to_csv,
    EnergyUnit, OutputFormat,
};
use vqe_core::error::Error;
use vqe_core::exact::ground_energy;
use vqe_core::fermion::{build_hamiltonian, Convention};
use vqe_core::io::{read_hamiltonian, read_hamiltonian_file, read_integrals, read_integrals_file};
use vqe_core::noise::load_snapshot;

/// Exit status for a rejected input; nothing was run.
const EXIT_VALIDATION: u8 = 1;
/// Exit status when some cells failed; their rows are still written.
const EXIT_PARTIAL: u8 = 2;

#[derive(Parser)]
#[command(name = "vqe-bench", version, about = "Benchmark variational eigensolver configurations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    /// Aligned columns with grouped digits.
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum Unit {
    Hartree,
    Ev,
    Joule,
}

impl From<Unit> for EnergyUnit {
    fn from(u: Unit) -> Self {
        match u {
            Unit::Hartree => EnergyUnit::Hartree,
            Unit::Ev => EnergyUnit::Ev,
            Unit::Joule => EnergyUnit::Joule,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegralOrder {
    Physicist,
    Chemist,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of a sweep document.
    Run {
        #[arg(long)]
        sweep: PathBuf,
        /// Defaults to the document's output format, else csv.
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Defaults to the document's output path, else stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Overrides the document's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 uses one per core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long, value_enum, default_value = "hartree")]
        unit: Unit,
    },
    /// Energy against distance for a series document.
    Scan {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "hartree")]
        unit: Unit,
    },
    /// Exact ground energy of a Hamiltonian or integral file.
    Exact {
        #[arg(long, conflicts_with = "integrals", required_unless_present = "integrals")]
        hamiltonian: Option<PathBuf>,
        #[arg(long)]
        integrals: Option<PathBuf>,
        /// Index order of native integral files.
        #[arg(long, value_enum, default_value = "physicist")]
        order: IntegralOrder,
        #[arg(long, value_enum, default_value = "hartree")]
        unit: Unit,
    },
    /// Check a sweep, series, Hamiltonian, integral or snapshot file.
    Validate { file: PathBuf },
}

fn fail(code: u8, e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(code)
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Error> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

fn run(sweep: &Path, format: Option<Format>, output: Option<PathBuf>, seed: Option<u64>, workers: usize, unit: EnergyUnit) -> ExitCode {
    let base = base_dir(sweep);
    let plan = match read_sweep_spec_file(sweep).and_then(|mut spec| {
        if let Some(s) = seed {
            spec.seed = s;
        }
        spec.plan(&base)
    }) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_VALIDATION, e),
    };
    let rows = match plan.run(workers) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_VALIDATION, e),
    };
    let doc_output = plan.spec.output.as_ref();
    let text = match format {
        Some(Format::Table) => rows_to_table(&rows, unit),
        Some(Format::Csv) => render_rows(&rows, OutputFormat::Csv, unit),
        Some(Format::Json) => render_rows(&rows, OutputFormat::Json, unit),
        None => render_rows(&rows, doc_output.map_or(OutputFormat::Csv, |o| o.format), unit),
    };
    let path = output.or_else(|| doc_output.map(|o| base.join(&o.path)));
    if let Err(e) = emit(&text, path.as_deref()) {
        return fail(EXIT_PARTIAL, e);
    }
    let failed = rows.iter().filter(|r| r.failure.is_some()).count();
    if failed > 0 {
        return fail(EXIT_PARTIAL, format!("{failed} of {} cells failed", rows.len()));
    }
    ExitCode::SUCCESS
}

fn scan(series: &Path, output: Option<PathBuf>, seed: Option<u64>, unit: EnergyUnit) -> ExitCode {
    let (mut spec, points) = match read_series_file(series) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_VALIDATION, e),
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    let result = match run_series(&spec, &points, &base_dir(series)) {
        Ok(r) => r,
        Err(e @ (Error::Argument(_) | Error::Dimension(_) | Error::Spec(_))) => return fail(EXIT_VALIDATION, e),
        Err(e) => return fail(EXIT_PARTIAL, e),
    };
    if let Err(e) = emit(&scan_to_csv(&result, unit), output.as_deref()) {
        return fail(EXIT_PARTIAL, e);
    }
    match result.iter().filter(|p| p.failure.is_some()).count() {
        0 => ExitCode::SUCCESS,
        n => fail(EXIT_PARTIAL, format!("{n} geometries failed")),
    }
}

fn convention(order: IntegralOrder) -> Convention {
    match order {
        IntegralOrder::Physicist => Convention::Physicist,
        IntegralOrder::Chemist => Convention::Chemist,
    }
}

fn exact(hamiltonian: Option<PathBuf>, integrals: Option<PathBuf>, order: IntegralOrder, unit: EnergyUnit) -> ExitCode {
    let h = match (hamiltonian, integrals) {
        (Some(p), _) => read_hamiltonian_file(&p).map(|f| f.hamiltonian),
        (None, Some(p)) => read_integrals_file(&p, convention(order)).and_then(|i| build_hamiltonian(&i)),
        (None, None) => unreachable!("clap requires one input"),
    };
    let h = match h {
        Ok(h) => h,
        Err(e) => return fail(EXIT_VALIDATION, e),
    };
    match ground_energy(&h) {
        Ok(e) => {
            println!("{:?}", convert_energy(e, unit));
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_PARTIAL, e),
    }
}

/// Picks the reader from the document's shape.
fn validate(file: &Path) -> Result<String, Error> {
    let text = fs::read_to_string(file).map_err(|e| Error::Io {
        path: file.display().to_string(),
        message: e.to_string(),
    })?;
    if text.trim_start().starts_with('&') {
        let ints = read_integrals(&text, Convention::Chemist)?;
        return Ok(format!("FCIDUMP integrals, {} spin orbitals", ints.n_spin_orbitals));
    }
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        location: format!("{} line {} column {}", file.display(), e.line(), e.column()),
        message: e.to_string(),
    })?;
    let has = |k: &str| doc.get(k).is_some();
    match doc.get("format").and_then(|f| f.as_str()) {
        Some("vqe-hamiltonian") => {
            let f = read_hamiltonian(&text)?;
            return Ok(format!("Hamiltonian, {} qubits, {} terms", f.hamiltonian.n_qubits(), f.hamiltonian.len()));
        }
        Some("vqe-integrals") => {
            let ints = read_integrals(&text, Convention::Physicist)?;
            return Ok(format!("integrals, {} spin orbitals", ints.n_spin_orbitals));
        }
        _ => {}
    }
    if has("hamiltonians") {
        let spec = read_sweep_spec_file(file)?;
        let plan = spec.plan(&base_dir(file))?;
        Ok(format!("sweep, {} systems, {} cells", plan.systems.len(), plan.cells.len()))
    } else if has("points") {
        let (_, points) = read_series_file(file)?;
        Ok(format!("series, {} geometries", points.len()))
    } else if has("coupling_map") {
        let snap = load_snapshot(&text)?;
        Ok(format!("backend snapshot `{}`, {} qubits", snap.name, snap.n_qubits))
    } else {
        Err(Error::Validation(format!("{}: unrecognised document", file.display())))
    }
}

fn main() -> ExitCode {
    // Usage errors are validation errors, not clap's default status 2.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_VALIDATION);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match cli.command {
        Command::Run {
            sweep,
            format,
            output,
            seed,
            workers,
            unit,
        } => run(&sweep, format, output, seed, workers, unit.into()),
        Command::Scan {
            series,
            output,
            seed,
            unit,
        } => scan(&series, output, seed, unit.into()),
        Command::Exact {
            hamiltonian,
            integrals,
            order,
            unit,
        } => exact(hamiltonian, integrals, order, unit.into()),
        Command::Validate { file } => match validate(&file) {
            Ok(summary) => {
                println!("ok: {summary}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(EXIT_VALIDATION, e),
        },
    }
}
