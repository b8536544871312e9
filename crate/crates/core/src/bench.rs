//! Parameter sweeps, metrics and bond scans.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{parameter_count, AnsatzKind, AnsatzSpec, Entanglement};
use crate::error::{Error, Result};
use crate::exact::ground_energy;
use crate::io::{in_file, read_hamiltonian_file, HamiltonianFile};
use crate::noise::{bundled_snapshot, load_snapshot_file, BackendSnapshot, BUNDLED_SNAPSHOTS};
use crate::optimize::{OptimizerKind, OptimizerSpec};
use crate::pauli::PauliSum;
use crate::rng::mix;
use crate::vqe::{
    format_grouped, mae_spread, run_vqe_with_reference, EstimatorConfig, EstimatorMode, VqeResult, AUTO_REFERENCE_QUBITS,
    DEFAULT_RESTARTS,
    DEFAULT_SHOTS,
};

/// Electron-volts per Hartree.
pub const HARTREE_TO_EV: f64 = 27.2114;
/// Joules per Hartree.
pub const HARTREE_TO_JOULE: f64 = 4.3597e-18;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyUnit {
    #[default]
    Hartree,
    Ev,
    Joule,
}

impl EnergyUnit {
    pub fn name(self) -> &'static str {
        match self {
            EnergyUnit::Hartree => "hartree",
            EnergyUnit::Ev => "ev",
            EnergyUnit::Joule => "joule",
        }
    }
}

impl FromStr for EnergyUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [EnergyUnit::Hartree, EnergyUnit::Ev, EnergyUnit::Joule]
            .into_iter()
            .find(|u| u.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown unit `{s}`")))
    }
}

pub fn convert_energy(value: f64, unit: EnergyUnit) -> f64 {
    match unit {
        EnergyUnit::Hartree => value,
        EnergyUnit::Ev => value * HARTREE_TO_EV,
        EnergyUnit::Joule => value * HARTREE_TO_JOULE,
    }
}

/// `100 · |value − reference| / |reference|`.
pub fn percent_error(value: f64, reference: f64) -> Result<f64> {
    if reference == 0.0 {
        return Err(Error::Argument("percent error against a zero reference".into()));
    }
    Ok(100.0 * (value - reference).abs() / reference.abs())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Argument(format!("unknown format `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

/// Values swept by a sweep; unset axes take the default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axes {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<Vec<OptimizerKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ansatz: Option<Vec<AnsatzKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<Vec<EstimatorMode>>,
    /// Bundled snapshot names or snapshot file paths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<Vec<String>>,
}

/// Settings of every cell before the axes override them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    #[serde(default = "default_ansatz")]
    pub ansatz: AnsatzKind,
    #[serde(default = "one")]
    pub reps: usize,
    #[serde(default)]
    pub entanglement: Entanglement,
    #[serde(default = "default_optimizer")]
    pub optimizer: OptimizerSpec,
    #[serde(default = "default_estimator")]
    pub estimator: EstimatorMode,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_snapshot")]
    pub snapshot: String,
}

fn default_ansatz() -> AnsatzKind {
    AnsatzKind::EfficientSu2
}
fn one() -> usize {
    1
}
fn default_optimizer() -> OptimizerSpec {
    OptimizerSpec::new(OptimizerKind::SlsqpEquiv)
}
fn default_estimator() -> EstimatorMode {
    EstimatorMode::Statevector
}
fn default_shots() -> u64 {
    DEFAULT_SHOTS
}
fn default_snapshot() -> String {
    BUNDLED_SNAPSHOTS[0].to_string()
}
fn default_restarts() -> usize {
    DEFAULT_RESTARTS
}

impl Default for Defaults {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields default")
    }
}

/// A sweep document. Relative paths resolve against the document's
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub hamiltonians: Vec<PathBuf>,
    pub axes: Axes,
    #[serde(default)]
    pub defaults: Defaults,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
    /// Literature energies by system label, for percent errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_energies: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

pub fn read_sweep_spec(text: &str) -> Result<SweepSpec> {
    serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("sweep spec line {} column {}", e.line(), e.column()), e.to_string()))
}

pub fn read_sweep_spec_file(path: &Path) -> Result<SweepSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_sweep_spec(&text).map_err(|e| in_file(path, e))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// A bundled snapshot name or a path to a snapshot document.
pub fn resolve_snapshot(name: &str, base: &Path) -> Result<BackendSnapshot> {
    let stem = name.strip_suffix(".json").unwrap_or(name);
    if BUNDLED_SNAPSHOTS.contains(&stem) && !resolve(base, Path::new(name)).exists() {
        return bundled_snapshot(stem);
    }
    load_snapshot_file(&resolve(base, Path::new(name)))
}

/// One loaded Hamiltonian with its label and exact reference.
#[derive(Debug, Clone)]
pub struct System {
    pub label: String,
    pub basis: Option<String>,
    pub hamiltonian: PauliSum,
    pub exact: Option<f64>,
}

impl System {
    pub fn from_file(path: &Path, file: HamiltonianFile) -> Self {
        let stem = path.file_stem().map_or_else(|| "system".into(), |s| s.to_string_lossy().into_owned());
        System {
            label: file.metadata.label_or(&stem),
            basis: file.metadata.basis.clone(),
            hamiltonian: file.hamiltonian,
            exact: None,
        }
    }
}

/// Coordinates of one sweep cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub system: usize,
    pub optimizer: OptimizerKind,
    pub ansatz: AnsatzKind,
    pub reps: usize,
    pub estimator: EstimatorMode,
    pub snapshot: String,
}

/// A sweep ready to run: files loaded and validated, cells enumerated.
#[derive(Debug, Clone)]
pub struct Plan {
    pub spec: SweepSpec,
    pub systems: Vec<System>,
    pub snapshots: BTreeMap<String, BackendSnapshot>,
    pub cells: Vec<Cell>,
}

fn axis<T: Clone>(values: &Option<Vec<T>>, default: T) -> Vec<T> {
    values.clone().unwrap_or_else(|| vec![default])
}

impl SweepSpec {
    /// Loads every file and checks every setting before any compute.
    pub fn plan(&self, base: &Path) -> Result<Plan> {
        let a = &self.axes;
        let lists = [
            a.optimizer.as_ref().map(Vec::len),
            a.ansatz.as_ref().map(Vec::len),
            a.reps.as_ref().map(Vec::len),
            a.estimator.as_ref().map(Vec::len),
            a.snapshot.as_ref().map(Vec::len),
        ];
        if lists.iter().all(Option::is_none) {
            return Err(Error::Validation("a sweep needs at least one axis".into()));
        }
        if lists.contains(&Some(0)) {
            return Err(Error::Validation("axes must list at least one value".into()));
        }
        if self.hamiltonians.is_empty() {
            return Err(Error::Validation("no Hamiltonian files listed".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Validation("restarts must be at least 1".into()));
        }
        if self.defaults.shots == 0 {
            return Err(Error::Validation("shots must be at least 1".into()));
        }
        let mut systems = Vec::new();
        for p in &self.hamiltonians {
            let path = resolve(base, p);
            systems.push(System::from_file(&path, read_hamiltonian_file(&path)?));
        }
        systems.sort_by(|x, y| x.label.cmp(&y.label));
        if let Some(w) = systems.windows(2).find(|w| w[0].label == w[1].label) {
            return Err(Error::Validation(format!("two Hamiltonians share the label `{}`", w[0].label)));
        }
        let optimizers = axis(&a.optimizer, self.defaults.optimizer.kind);
        let ansatze = axis(&a.ansatz, self.defaults.ansatz);
        let reps = axis(&a.reps, self.defaults.reps);
        let estimators = axis(&a.estimator, self.defaults.estimator);
        let snapshot_names = axis(&a.snapshot, self.defaults.snapshot.clone());
        let mut snapshots = BTreeMap::new();
        if estimators.contains(&EstimatorMode::Noisy) {
            for name in &snapshot_names {
                snapshots.insert(name.clone(), resolve_snapshot(name, base)?);
            }
        }
        for &k in &optimizers {
            let mut o = self.defaults.optimizer.clone();
            o.kind = k;
            // Dimension-free checks; bounds are sized per cell later.
            o.bounds = None;
            o.validate(1).map_err(|e| Error::Validation(e.to_string()))?;
        }
        if let Some(&r) = reps.iter().find(|&&r| r == 0) {
            return Err(Error::Validation(format!("reps = {r} is not allowed")));
        }
        let mut cells = Vec::new();
        for system in 0..systems.len() {
            for &optimizer in &optimizers {
                for &ansatz in &ansatze {
                    for &r in &reps {
                        for &estimator in &estimators {
                            for snapshot in &snapshot_names {
                                cells.push(Cell {
                                    system,
                                    optimizer,
                                    ansatz,
                                    reps: r,
                                    estimator,
                                    snapshot: snapshot.clone(),
                                });
                            }
                        }
                    }
                }
            }
        }
        for s in &mut systems {
            s.exact = if s.hamiltonian.n_qubits() <= AUTO_REFERENCE_QUBITS {
                Some(ground_energy(&s.hamiltonian)?)
            } else {
                None
            };
        }
        Ok(Plan {
            spec: self.clone(),
            systems,
            snapshots,
            cells,
        })
    }
}

/// One row of a sweep report. Energies are in Hartree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub system: String,
    pub basis: Option<String>,
    pub optimizer: OptimizerKind,
    pub ansatz: AnsatzKind,
    pub reps: usize,
    pub estimator: EstimatorMode,
    /// Only meaningful for the noisy estimator.
    pub snapshot: Option<String>,
    pub n_parameters: usize,
    pub vqe_energy: Option<f64>,
    pub exact_energy: Option<f64>,
    /// Mean absolute error of the restarts against `exact_energy`.
    pub mae: Option<f64>,
    pub spread: Option<f64>,
    /// Against the supplied reference energy for this system.
    pub percent_error: Option<f64>,
    /// Seconds per run (all restarts of this cell).
    pub wall_time: f64,
    pub eval_count: usize,
    pub failure: Option<String>,
}

impl Plan {
    fn cell_config(&self, index: usize) -> (AnsatzSpec, OptimizerSpec, EstimatorConfig, u64) {
        let cell = &self.cells[index];
        let d = &self.spec.defaults;
        let n = self.systems[cell.system].hamiltonian.n_qubits();
        let seed = mix(self.spec.seed, index as u64);
        let mut ansatz = AnsatzSpec::new(cell.ansatz, n, cell.reps).with_entanglement(d.entanglement);
        if cell.ansatz == AnsatzKind::PauliTwoDesign {
            ansatz = ansatz.with_seed(mix(seed, 1));
        }
        let mut opt = d.optimizer.clone();
        opt.kind = cell.optimizer;
        opt.seed = mix(seed, 2);
        let est = match cell.estimator {
            EstimatorMode::Statevector => EstimatorConfig::statevector(),
            EstimatorMode::Shots => EstimatorConfig::shots(d.shots),
            EstimatorMode::Noisy => EstimatorConfig::noisy(d.shots, self.snapshots[&cell.snapshot].clone()),
        }
        .with_seed(mix(seed, 3));
        (ansatz, opt, est, seed)
    }

    /// Runs one cell; failures become rows rather than errors.
    pub fn run_cell(&self, index: usize) -> MetricRow {
        let cell = &self.cells[index];
        let system = &self.systems[cell.system];
        let (ansatz, opt, est, seed) = self.cell_config(index);
        let mut row = MetricRow {
            system: system.label.clone(),
            basis: system.basis.clone(),
            optimizer: cell.optimizer,
            ansatz: cell.ansatz,
            reps: cell.reps,
            estimator: cell.estimator,
            snapshot: (cell.estimator == EstimatorMode::Noisy).then(|| cell.snapshot.clone()),
            n_parameters: parameter_count(&ansatz),
            vqe_energy: None,
            exact_energy: system.exact,
            mae: None,
            spread: None,
            percent_error: None,
            wall_time: 0.0,
            eval_count: 0,
            failure: None,
        };
        match run_vqe_with_reference(&system.hamiltonian, &ansatz, &opt, &est, self.spec.restarts, seed, system.exact) {
            Ok(r) => fill_row(&mut row, &r, self.reference(&system.label)),
            Err(e) => row.failure = Some(e.to_string()),
        }
        row
    }

    fn reference(&self, label: &str) -> Option<f64> {
        self.spec.reference_energies.as_ref().and_then(|m| m.get(label).copied())
    }

    /// Runs every cell on `workers` threads (0: one per core); rows come
    /// back in cell order whatever the completion order.
    pub fn run(&self, workers: usize) -> Result<Vec<MetricRow>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Argument(format!("worker pool: {e}")))?;
        Ok(pool.install(|| (0..self.cells.len()).into_par_iter().map(|i| self.run_cell(i)).collect()))
    }
}

fn fill_row(row: &mut MetricRow, r: &VqeResult, reference: Option<f64>) {
    row.wall_time = r.wall_time;
    row.eval_count = r.evaluations();
    row.failure = r.failure.clone();
    if r.failed() {
        return;
    }
    row.vqe_energy = Some(r.energy);
    if let Some(exact) = r.exact_reference {
        let energies: Vec<f64> = r.restarts.iter().filter(|x| x.failure.is_none()).map(|x| x.energy).collect();
        if let Ok((mae, spread)) = mae_spread(&energies, exact) {
            row.mae = Some(mae);
            row.spread = Some(spread);
        }
    }
    row.percent_error = reference.and_then(|re| percent_error(r.energy, re).ok());
}

/// Validates `spec` (loading files relative to `base`) and runs it.
pub fn run_sweep(spec: &SweepSpec, base: &Path, workers: usize) -> Result<Vec<MetricRow>> {
    spec.plan(base)?.run(workers)
}

const CSV_HEADER: [&str; 16] = [
    "system",
    "basis",
    "optimizer",
    "ansatz",
    "reps",
    "estimator",
    "snapshot",
    "n_parameters",
    "vqe_energy",
    "exact_energy",
    "mae",
    "spread",
    "percent_error",
    "wall_time_s",
    "eval_count",
    "failure",
];

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:?}"))
}

/// Machine-readable CSV with plain decimals; energy columns in `unit`.
pub fn rows_to_csv(rows: &[MetricRow], unit: EnergyUnit) -> String {
    let mut out = CSV_HEADER
        .iter()
        .map(|h| match *h {
            "vqe_energy" | "exact_energy" | "mae" | "spread" => format!("{h}_{}", unit.name()),
            other => other.to_string(),
        })
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    let e = |v: Option<f64>| opt_num(v.map(|x| convert_energy(x, unit)));
    for r in rows {
        let fields = [
            csv_field(&r.system),
            csv_field(r.basis.as_deref().unwrap_or("")),
            r.optimizer.to_string(),
            r.ansatz.to_string(),
            r.reps.to_string(),
            r.estimator.to_string(),
            csv_field(r.snapshot.as_deref().unwrap_or("")),
            r.n_parameters.to_string(),
            e(r.vqe_energy),
            e(r.exact_energy),
            e(r.mae),
            e(r.spread),
            opt_num(r.percent_error),
            format!("{:?}", r.wall_time),
            r.eval_count.to_string(),
            csv_field(r.failure.as_deref().unwrap_or("")),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// JSON array of rows; energy fields in `unit`.
pub fn rows_to_json(rows: &[MetricRow], unit: EnergyUnit) -> String {
    let converted: Vec<MetricRow> = rows
        .iter()
        .map(|r| {
            let c = |v: Option<f64>| v.map(|x| convert_energy(x, unit));
            MetricRow {
                vqe_energy: c(r.vqe_energy),
                exact_energy: c(r.exact_energy),
                mae: c(r.mae),
                spread: c(r.spread),
                ..r.clone()
            }
        })
        .collect();
    let doc = serde_json::json!({ "unit": unit.name(), "rows": converted });
    let mut text = serde_json::to_string_pretty(&doc).expect("rows serialize");
    text.push('\n');
    text
}

pub fn render_rows(rows: &[MetricRow], format: OutputFormat, unit: EnergyUnit) -> String {
    match format {
        OutputFormat::Csv => rows_to_csv(rows, unit),
        OutputFormat::Json => rows_to_json(rows, unit),
    }
}

/// Human-readable table in the `0.002 92 ± 0.000 000` style.
pub fn rows_to_table(rows: &[MetricRow], unit: EnergyUnit) -> String {
    let mut out = format!(
        "{:<14} {:<12} {:<17} {:>4} {:<11} {:>16} {:>24} {:>10} {:>9}\n",
        "system", "optimizer", "ansatz", "reps", "estimator", "energy", "mae ± spread", "% error", "time (s)"
    );
    for r in rows {
        let energy = r
            .vqe_energy
            .map_or_else(|| "failed".into(), |v| format_grouped(convert_energy(v, unit), 5));
        let mae = match (r.mae, r.spread) {
            (Some(m), Some(s)) => crate::vqe::format_mae(convert_energy(m, unit), convert_energy(s, unit)),
            _ => String::new(),
        };
        let pct = r.percent_error.map_or_else(String::new, |p| format_grouped(p, 5));
        out.push_str(&format!(
            "{:<14} {:<12} {:<17} {:>4} {:<11} {:>16} {:>24} {:>10} {:>9.3}\n",
            r.system,
            r.optimizer.to_string(),
            r.ansatz.to_string(),
            r.reps,
            r.estimator.to_string(),
            energy,
            mae,
            pct,
            r.wall_time
        ));
    }
    out
}

/// One geometry of a bond scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub distance: f64,
    pub energy: f64,
    pub exact: Option<f64>,
    pub failure: Option<String>,
}

/// Shared configuration of a scan document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesPoint {
    /// Interatomic distance in nanometres.
    pub distance_nm: f64,
    pub hamiltonian: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    pub points: Vec<SeriesPoint>,
    #[serde(default)]
    pub defaults: Defaults,
    #[serde(default = "one")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
}

pub fn read_series_file(path: &Path) -> Result<(SeriesSpec, Vec<(f64, PauliSum)>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec: SeriesSpec = serde_json::from_str(&text).map_err(|e| {
        in_file(path, Error::parse(format!("series line {} column {}", e.line(), e.column()), e.to_string()))
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut series = Vec::new();
    for p in &spec.points {
        let f = read_hamiltonian_file(&resolve(base, &p.hamiltonian))?;
        series.push((p.distance_nm, f.hamiltonian));
    }
    Ok((spec, series))
}

/// One VQE energy per geometry under a shared configuration.
pub fn bond_scan(
    series: &[(f64, PauliSum)],
    ansatz: &AnsatzSpec,
    opt: &OptimizerSpec,
    est: &EstimatorConfig,
    restarts: usize,
    seed: u64,
) -> Result<Vec<ScanPoint>> {
    if series.len() < 2 {
        return Err(Error::Argument("a scan needs at least two geometries".into()));
    }
    if let Some(w) = series.windows(2).find(|w| w[1].0 <= w[0].0) {
        let what = if w[1].0 == w[0].0 { "duplicate" } else { "decreasing" };
        return Err(Error::Argument(format!("{what} distance {} after {}", w[1].0, w[0].0)));
    }
    series
        .par_iter()
        .enumerate()
        .map(|(i, (d, h))| {
            let exact = if h.n_qubits() <= AUTO_REFERENCE_QUBITS { Some(ground_energy(h)?) } else { None };
            let r = run_vqe_with_reference(h, ansatz, opt, est, restarts, mix(seed, i as u64), exact)?;
            Ok(ScanPoint {
                distance: *d,
                energy: r.energy,
                exact,
                failure: r.failure,
            })
        })
        .collect()
}

/// Runs a series document.
pub fn run_series(spec: &SeriesSpec, series: &[(f64, PauliSum)], base: &Path) -> Result<Vec<ScanPoint>> {
    let d = &spec.defaults;
    let n = series.first().map_or(0, |s| s.1.n_qubits());
    let mut ansatz = AnsatzSpec::new(d.ansatz, n, d.reps).with_entanglement(d.entanglement);
    if d.ansatz == AnsatzKind::PauliTwoDesign {
        ansatz = ansatz.with_seed(spec.seed);
    }
    let est = match d.estimator {
        EstimatorMode::Statevector => EstimatorConfig::statevector(),
        EstimatorMode::Shots => EstimatorConfig::shots(d.shots),
        EstimatorMode::Noisy => EstimatorConfig::noisy(d.shots, resolve_snapshot(&d.snapshot, base)?),
    }
    .with_seed(spec.seed);
    bond_scan(series, &ansatz, &d.optimizer, &est, spec.restarts, spec.seed)
}

/// Two-column plot-ready CSV.
pub fn scan_to_csv(points: &[ScanPoint], unit: EnergyUnit) -> String {
    let mut out = format!("distance_nm,energy_{}\n", unit.name());
    for p in points {
        out.push_str(&format!("{:?},{:?}\n", p.distance, convert_energy(p.energy, unit)));
    }
    out
}

impl fmt::Display for MetricRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} reps={} {}",
            self.system, self.optimizer, self.ansatz, self.reps, self.estimator
        )
    }
}

#[cfg(test)]
mod tests;
