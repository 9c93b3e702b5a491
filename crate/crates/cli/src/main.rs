//! Command-line front-end: load matrices, partitions, tables and groups
//! from JSON, run compatibility checks and reductions, and emit reports,
//! reduced generators and trajectory CSVs.
//!
//! Commands read their primary input from stdin unless a file flag is
//! given, so constructors pipe straight into checks:
//!
//! ```text
//! cgr examples walk --a 1 --b 2 --c 1 --d 1 --e 1 --delta 0.3 --epsilon -0.2 \
//!   | cgr stoch check --partition columns.json
//! ```
//!
//! Exit codes: 0 success (and compatible); 1 a check reported
//! incompatible and `--strict` was set; 2 invalid input or dimension
//! mismatch; 3 internal numerical failure.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use cgr_core::corpus::{self, Fig2Params, IsingConfig, TreeConfig};
use cgr_core::dynamics::{self, Superoperator};
use cgr_core::io::{self, MatrixJson};
use cgr_core::linalg::CMat;
use cgr_core::quantum::{self, BipartitionTable};
use cgr_core::stochastic::{self, Partition, PermRep, RateMatrix};
use cgr_core::symmetry::{self, UnitaryRep};
use cgr_core::CgError;

#[derive(Parser)]
#[command(name = "cgr", version, about = "Coarse-graining engine for stochastic and quantum dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classical Markov-process coarse-graining
    #[command(subcommand)]
    Stoch(StochCmd),
    /// Quantum coarse-graining via bipartition tables
    #[command(subcommand)]
    Quantum(QuantumCmd),
    /// Finite unitary symmetry groups
    #[command(subcommand)]
    Group(GroupCmd),
    /// Constructors for the worked example systems
    #[command(subcommand)]
    Examples(ExamplesCmd),
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Relative tolerance for compatibility decisions
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Proceed despite failed validation or compatibility
    #[arg(long)]
    force: bool,
    /// Directory for report.json and produced artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format for trajectories
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Seed for randomized decompositions
    #[arg(long)]
    seed: Option<u64>,
    /// Exit with code 1 when a check reports incompatibility
    #[arg(long)]
    strict: bool,
}

#[derive(ValueEnum, Clone, Copy, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum StochCmd {
    /// Check compatibility of a rate matrix with a partition
    Check {
        #[arg(long)]
        partition: PathBuf,
        /// Rate matrix JSON (stdin when omitted)
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Reduced rate matrix M Q M+
    Reduce {
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Coarsest equitable refinement of a seed partition
    Refine {
        /// Seed partition JSON (single block when omitted)
        #[arg(long)]
        seed_partition: Option<PathBuf>,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Evolve a probability vector under exp(tQ)
    Evolve {
        #[arg(long)]
        p0: PathBuf,
        /// Comma-separated times
        #[arg(long)]
        times: String,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Orbit partition of a permutation group
    Orbits {
        /// Permutation group JSON (stdin when omitted)
        #[arg(long)]
        group: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Subcommand)]
enum QuantumCmd {
    /// Check compatibility of a generator with a bipartition table
    Check {
        #[arg(long)]
        table: PathBuf,
        /// Hamiltonian matrix JSON
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        /// Superoperator JSON (d^2 x d^2 with a "dim" field)
        #[arg(long)]
        superop: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Reduced generator tr_(A) ∘ L ∘ tr_(A)+
    Reduce {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        #[arg(long)]
        superop: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Apply the coarse-graining channel to a state
    Apply {
        #[arg(long)]
        table: PathBuf,
        /// Density matrix JSON (stdin when omitted)
        #[arg(long)]
        rho: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Evolve a state under exp(tL)
    Evolve {
        #[arg(long)]
        rho0: PathBuf,
        #[arg(long)]
        times: String,
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        #[arg(long)]
        superop: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Subcommand)]
enum GroupCmd {
    /// Product closure of the generated group
    Closure {
        #[arg(long)]
        group: Option<PathBuf>,
        /// Cap on the number of elements
        #[arg(long, default_value_t = symmetry::CLOSURE_CAP)]
        cap: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Orthonormal basis of the commutant U(G)'
    Commutant {
        #[arg(long)]
        group: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Orthonormal basis of the bicommutant U(G)''
    Bicommutant {
        #[arg(long)]
        group: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Test [U(g), H] in U(G)'' (symmetrization compatibility)
    Check {
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        #[arg(long)]
        group: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Split a compatible Hamiltonian into bicommutant + commutant parts
    Split {
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        #[arg(long)]
        group: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Numerical irrep/multiplicity decomposition
    Blocks {
        #[arg(long)]
        group: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Hybrid bipartition table of the symmetrization coarse-graining
    Table {
        #[arg(long)]
        group: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Subcommand)]
enum ExamplesCmd {
    /// Six-vertex three-column random walk
    #[command(allow_negative_numbers = true)]
    Walk {
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        #[arg(long, default_value_t = 1.0)]
        e: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        /// Replace the first-edge rate to break column compatibility
        #[arg(long)]
        atilde: Option<f64>,
        /// What to emit: q | partition
        #[arg(long, default_value = "q")]
        emit: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Glauber-Ising chain on 2^N configurations
    Ising {
        #[arg(long)]
        n: usize,
        /// Temperature parameter tanh(2J/T)
        #[arg(long)]
        gamma: Option<f64>,
        /// Coupling (used with --t when --gamma is absent)
        #[arg(long)]
        j: Option<f64>,
        /// Temperature (used with --j)
        #[arg(long)]
        t: Option<f64>,
        /// What to emit: q | group
        #[arg(long, default_value = "q")]
        emit: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Quantum walk on the binary tree
    Tree {
        #[arg(long)]
        broken: bool,
        /// Override the symmetry-breaking edge, 0-based "u,v"
        #[arg(long)]
        break_edge: Option<String>,
        /// What to emit: bundle | hamiltonian | group | table | classical
        #[arg(long, default_value = "bundle")]
        emit: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// The operationally motivated special-case tables
    Tables {
        /// Emit a single named table instead of the whole catalogue
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        common: CommonOpts,
    },
}

/// Result record of every invocation; the residual is always present.
#[derive(Serialize)]
struct Report {
    command: String,
    compatible: Option<bool>,
    residual: f64,
    artifacts: BTreeMap<String, String>,
    warnings: Vec<String>,
}

impl Report {
    fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            compatible: None,
            residual: 0.0,
            artifacts: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TreeBundle {
    hamiltonian: MatrixJson,
    group: UnitaryRep,
}

#[derive(Serialize)]
struct SubspaceJson {
    ambient_dim: usize,
    dimension: usize,
    basis: Vec<MatrixJson>,
}

#[derive(Serialize)]
struct SectorJson {
    irrep_dim: usize,
    multiplicity: usize,
    isometry: MatrixJson,
}

#[derive(Serialize)]
struct BlocksJson {
    sectors: Vec<SectorJson>,
}

#[derive(Serialize)]
struct NamedTableJson<'a> {
    name: &'a str,
    table: &'a BipartitionTable,
}

enum CliError {
    Core(CgError),
    Usage(String),
    Io(std::io::Error),
}

impl From<CgError> for CliError {
    fn from(e: CgError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(CgError::Json(e))
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(
                CgError::ClosureCapExceeded { .. }
                | CgError::AlgebraCapExceeded { .. }
                | CgError::BlockStructureFailure { .. },
            ) => 3,
            _ => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Usage(m) => m.clone(),
            CliError::Io(e) => e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_source(path: &Option<PathBuf>) -> CliResult<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => Ok(std::fs::read_to_string(p)?),
        _ => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            Ok(buf)
        }
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn parse_times(spec: &str) -> CliResult<Vec<f64>> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad time value {s:?}: {e}")))
        })
        .collect()
}

fn load_rate_matrix(path: &Option<PathBuf>) -> CliResult<RateMatrix> {
    Ok(serde_json::from_str(&read_source(path)?)?)
}

fn load_partition(path: &Path) -> CliResult<Partition> {
    Ok(serde_json::from_str(&read_file(path)?)?)
}

fn load_table(path: &Path) -> CliResult<BipartitionTable> {
    Ok(serde_json::from_str(&read_file(path)?)?)
}

fn load_rep(path: &Option<PathBuf>) -> CliResult<UnitaryRep> {
    Ok(serde_json::from_str(&read_source(path)?)?)
}

fn load_cmat(text: &str) -> CliResult<CMat> {
    Ok(io::cmat_from_json_str(text)?)
}

/// Load a quantum generator: an explicit `--hamiltonian` or `--superop`
/// file, or a sniffed stdin document (superoperators carry a "dim" key).
fn load_generator(
    hamiltonian: &Option<PathBuf>,
    superop: &Option<PathBuf>,
) -> CliResult<(Superoperator, Option<CMat>)> {
    match (hamiltonian, superop) {
        (Some(_), Some(_)) => Err(CliError::Usage(
            "pass either --hamiltonian or --superop, not both".into(),
        )),
        (Some(h), None) => {
            let m = load_cmat(&read_file(h)?)?;
            Ok((dynamics::hamiltonian_generator(&m)?, Some(m)))
        }
        (None, Some(l)) => Ok((serde_json::from_str(&read_file(l)?)?, None)),
        (None, None) => {
            let text = read_source(&None)?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            if value.get("dim").is_some() {
                Ok((serde_json::from_str(&text)?, None))
            } else {
                let m = load_cmat(&text)?;
                Ok((dynamics::hamiltonian_generator(&m)?, Some(m)))
            }
        }
    }
}

/// Load a Hamiltonian and group, accepting a combined bundle on stdin.
fn load_h_and_group(
    hamiltonian: &Option<PathBuf>,
    group: &Option<PathBuf>,
) -> CliResult<(CMat, UnitaryRep)> {
    match hamiltonian {
        Some(h) => {
            let m = load_cmat(&read_file(h)?)?;
            Ok((m, load_rep(group)?))
        }
        None => {
            let text = read_source(group)?;
            let bundle: TreeBundle = serde_json::from_str(&text).map_err(|_| {
                CliError::Usage(
                    "expected --hamiltonian, or a {\"hamiltonian\":…,\"group\":…} bundle on stdin"
                        .into(),
                )
            })?;
            Ok((bundle.hamiltonian.to_cmat()?, bundle.group))
        }
    }
}

fn write_artifact(
    common: &CommonOpts,
    report: &mut Report,
    name: &str,
    content: &str,
) -> CliResult<()> {
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        std::fs::write(&path, content)?;
        report
            .artifacts
            .insert(name.to_string(), path.display().to_string());
    }
    Ok(())
}

fn finish(common: &CommonOpts, mut report: Report, payload: String) -> CliResult<ExitCode> {
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("report.json");
        report
            .artifacts
            .insert("report.json".to_string(), path.display().to_string());
        std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!("{payload}");
    if common.strict && report.compatible == Some(false) {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn report_payload(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Stoch(cmd) => run_stoch(cmd),
        Command::Quantum(cmd) => run_quantum(cmd),
        Command::Group(cmd) => run_group(cmd),
        Command::Examples(cmd) => run_examples(cmd),
    }
}

fn run_stoch(cmd: StochCmd) -> CliResult<ExitCode> {
    match cmd {
        StochCmd::Check {
            partition,
            matrix,
            common,
        } => {
            let q = load_rate_matrix(&matrix)?;
            let p = load_partition(&partition)?;
            let compat = stochastic::check_stochastic_compatibility(&q, &p, common.tol)?;
            let mut report = Report::new("stoch check");
            report.compatible = Some(compat.compatible);
            report.residual = compat.residual;
            let uniformity = stochastic::rate_uniformity_report(&q, &p)?;
            write_artifact(
                &common,
                &mut report,
                "uniformity.json",
                &serde_json::to_string_pretty(&uniformity)?,
            )?;
            let payload = report_payload(&report);
            finish(&common, report, payload)
        }
        StochCmd::Reduce {
            partition,
            matrix,
            common,
        } => {
            let q = load_rate_matrix(&matrix)?;
            let p = load_partition(&partition)?;
            let compat = stochastic::check_stochastic_compatibility(&q, &p, common.tol)?;
            let reduced = stochastic::reduced_rate_matrix(&q, &p, common.force)?;
            let mut report = Report::new("stoch reduce");
            report.compatible = Some(compat.compatible);
            report.residual = compat.residual;
            if !compat.compatible {
                report.warnings.push(format!(
                    "forced reduction of an incompatible coarse-graining (residual {:.3e}); the output generator does not reproduce the coarse-grained dynamics",
                    compat.residual
                ));
            }
            let payload = serde_json::to_string(&reduced)?;
            write_artifact(&common, &mut report, "reduced.json", &payload)?;
            finish(&common, report, payload)
        }
        StochCmd::Refine {
            seed_partition,
            matrix,
            common,
        } => {
            let q = load_rate_matrix(&matrix)?;
            let seed = match &seed_partition {
                Some(p) => load_partition(p)?,
                None => Partition::single_block(q.n()),
            };
            let refined = stochastic::coarsest_equitable_refinement(&q, &seed)?;
            let compat = stochastic::check_stochastic_compatibility(&q, &refined, common.tol)?;
            let mut report = Report::new("stoch refine");
            report.compatible = Some(compat.compatible);
            report.residual = compat.residual;
            let payload = serde_json::to_string(&refined)?;
            write_artifact(&common, &mut report, "partition.json", &payload)?;
            finish(&common, report, payload)
        }
        StochCmd::Evolve {
            p0,
            times,
            matrix,
            common,
        } => {
            let q = load_rate_matrix(&matrix)?;
            let p0 = io::rvec_from_json_str(&read_file(&p0)?)?;
            let times = parse_times(&times)?;
            let states = stochastic::evolve_stochastic(&q, &p0, &times)?;
            let mut report = Report::new("stoch evolve");
            let payload = match common.format {
                Format::Csv => io::stochastic_trajectory_csv(&times, &states)
                    .trim_end()
                    .to_string(),
                Format::Json => {
                    #[derive(Serialize)]
                    struct Trajectory {
                        times: Vec<f64>,
                        states: Vec<Vec<f64>>,
                    }
                    serde_json::to_string(&Trajectory {
                        times: times.clone(),
                        states: states.iter().map(|s| s.iter().cloned().collect()).collect(),
                    })?
                }
            };
            write_artifact(
                &common,
                &mut report,
                "trajectory.csv",
                &io::stochastic_trajectory_csv(&times, &states),
            )?;
            finish(&common, report, payload)
        }
        StochCmd::Orbits { group, common } => {
            let rep: PermRep = serde_json::from_str(&read_source(&group)?)?;
            let orbits = stochastic::orbit_partition(&rep);
            let mut report = Report::new("stoch orbits");
            let payload = serde_json::to_string(&orbits)?;
            write_artifact(&common, &mut report, "partition.json", &payload)?;
            finish(&common, report, payload)
        }
    }
}

fn run_quantum(cmd: QuantumCmd) -> CliResult<ExitCode> {
    match cmd {
        QuantumCmd::Check {
            table,
            hamiltonian,
            superop,
            common,
        } => {
            let t = load_table(&table)?;
            let (l, h) = load_generator(&hamiltonian, &superop)?;
            let mut report = Report::new("quantum check");
            match h {
                Some(h) => {
                    let compat = dynamics::check_hamiltonian_compatibility(&h, &t, common.tol)?;
                    report.compatible = Some(compat.compatible);
                    report.residual = compat.residual;
                    write_artifact(
                        &common,
                        &mut report,
                        "per_operator.json",
                        &serde_json::to_string_pretty(&compat.per_operator)?,
                    )?;
                }
                None => {
                    let compat = dynamics::check_superop_compatibility(&l, &t, common.tol)?;
                    report.compatible = Some(compat.compatible);
                    report.residual = compat.residual;
                }
            }
            let payload = report_payload(&report);
            finish(&common, report, payload)
        }
        QuantumCmd::Reduce {
            table,
            hamiltonian,
            superop,
            common,
        } => {
            let t = load_table(&table)?;
            let (l, _) = load_generator(&hamiltonian, &superop)?;
            let compat = dynamics::check_superop_compatibility(&l, &t, common.tol)?;
            let reduced = dynamics::reduced_generator(&l, &t, common.force)?;
            let mut report = Report::new("quantum reduce");
            report.compatible = Some(compat.compatible);
            report.residual = compat.residual;
            if !compat.compatible {
                report.warnings.push(format!(
                    "forced reduction of an incompatible coarse-graining (residual {:.3e})",
                    compat.residual
                ));
            }
            let payload = serde_json::to_string(&reduced)?;
            write_artifact(&common, &mut report, "reduced.json", &payload)?;
            finish(&common, report, payload)
        }
        QuantumCmd::Apply {
            table,
            rho,
            common,
        } => {
            let t = load_table(&table)?;
            let rho = load_cmat(&read_source(&rho)?)?;
            let out = quantum::qcg_apply(&t, &rho, common.force)?;
            let mut report = Report::new("quantum apply");
            let payload = io::cmat_to_json_string(&out);
            write_artifact(&common, &mut report, "reduced.json", &payload)?;
            finish(&common, report, payload)
        }
        QuantumCmd::Evolve {
            rho0,
            times,
            hamiltonian,
            superop,
            common,
        } => {
            let (l, _) = load_generator(&hamiltonian, &superop)?;
            let rho0 = load_cmat(&read_file(&rho0)?)?;
            let times = parse_times(&times)?;
            let states = dynamics::evolve_quantum(&l, &rho0, &times)?;
            let mut report = Report::new("quantum evolve");
            let csv = io::quantum_trajectory_csv(&times, &states);
            let payload = match common.format {
                Format::Csv => csv.trim_end().to_string(),
                Format::Json => {
                    #[derive(Serialize)]
                    struct Trajectory {
                        times: Vec<f64>,
                        states: Vec<MatrixJson>,
                    }
                    serde_json::to_string(&Trajectory {
                        times: times.clone(),
                        states: states.iter().map(MatrixJson::from_cmat).collect(),
                    })?
                }
            };
            write_artifact(&common, &mut report, "trajectory.csv", &csv)?;
            finish(&common, report, payload)
        }
    }
}

fn run_group(cmd: GroupCmd) -> CliResult<ExitCode> {
    match cmd {
        GroupCmd::Closure { group, cap, common } => {
            let rep = load_rep(&group)?;
            let elements = rep.closure(cap)?;
            #[derive(Serialize)]
            struct ClosureJson {
                size: usize,
                elements: Vec<MatrixJson>,
            }
            let payload = serde_json::to_string(&ClosureJson {
                size: elements.len(),
                elements: elements.iter().map(MatrixJson::from_cmat).collect(),
            })?;
            let mut report = Report::new("group closure");
            write_artifact(&common, &mut report, "closure.json", &payload)?;
            finish(&common, report, payload)
        }
        GroupCmd::Commutant { group, common } => {
            let rep = load_rep(&group)?;
            let sub = symmetry::commutant(&rep);
            let payload = serde_json::to_string(&SubspaceJson {
                ambient_dim: sub.ambient_dim(),
                dimension: sub.dim(),
                basis: sub.basis().iter().map(MatrixJson::from_cmat).collect(),
            })?;
            let mut report = Report::new("group commutant");
            write_artifact(&common, &mut report, "commutant.json", &payload)?;
            finish(&common, report, payload)
        }
        GroupCmd::Bicommutant { group, common } => {
            let rep = load_rep(&group)?;
            let sub = symmetry::bicommutant(&rep);
            let payload = serde_json::to_string(&SubspaceJson {
                ambient_dim: sub.ambient_dim(),
                dimension: sub.dim(),
                basis: sub.basis().iter().map(MatrixJson::from_cmat).collect(),
            })?;
            let mut report = Report::new("group bicommutant");
            write_artifact(&common, &mut report, "bicommutant.json", &payload)?;
            finish(&common, report, payload)
        }
        GroupCmd::Check {
            hamiltonian,
            group,
            common,
        } => {
            let (h, rep) = load_h_and_group(&hamiltonian, &group)?;
            let compat = symmetry::check_symmetrization_compatibility(&h, &rep, common.tol)?;
            let mut report = Report::new("group check");
            report.compatible = Some(compat.compatible);
            report.residual = compat
                .generator_residual
                .max(compat.closure_residual.unwrap_or(0.0));
            if compat.closure_residual.is_none() {
                report.warnings.push(
                    "closure larger than 1000 elements; compatibility verified on generators only"
                        .into(),
                );
            }
            let payload = report_payload(&report);
            finish(&common, report, payload)
        }
        GroupCmd::Split {
            hamiltonian,
            group,
            common,
        } => {
            let (h, rep) = load_h_and_group(&hamiltonian, &group)?;
            let (a, b) = symmetry::split_hamiltonian(&h, &rep, symmetry::CLOSURE_CAP)?;
            #[derive(Serialize)]
            struct SplitJson {
                a: MatrixJson,
                b: MatrixJson,
            }
            let payload = serde_json::to_string(&SplitJson {
                a: MatrixJson::from_cmat(&a),
                b: MatrixJson::from_cmat(&b),
            })?;
            let mut report = Report::new("group split");
            report.compatible = Some(true);
            write_artifact(&common, &mut report, "a.json", &io::cmat_to_json_string(&a))?;
            write_artifact(&common, &mut report, "b.json", &io::cmat_to_json_string(&b))?;
            finish(&common, report, payload)
        }
        GroupCmd::Blocks { group, common } => {
            let rep = load_rep(&group)?;
            let seed = common.seed.unwrap_or(symmetry::DEFAULT_BLOCK_SEED);
            let bs = symmetry::block_structure_seeded(&rep, seed)?;
            let payload = serde_json::to_string(&BlocksJson {
                sectors: bs
                    .sectors
                    .iter()
                    .map(|s| SectorJson {
                        irrep_dim: s.irrep_dim,
                        multiplicity: s.multiplicity,
                        isometry: MatrixJson::from_cmat(&s.isometry),
                    })
                    .collect(),
            })?;
            let mut report = Report::new("group blocks");
            write_artifact(&common, &mut report, "blocks.json", &payload)?;
            finish(&common, report, payload)
        }
        GroupCmd::Table { group, common } => {
            let rep = load_rep(&group)?;
            let seed = common.seed.unwrap_or(symmetry::DEFAULT_BLOCK_SEED);
            let bs = symmetry::block_structure_seeded(&rep, seed)?;
            let table = symmetry::symmetrization_table(&bs)?;
            let payload = serde_json::to_string(&table)?;
            let mut report = Report::new("group table");
            write_artifact(&common, &mut report, "table.json", &payload)?;
            finish(&common, report, payload)
        }
    }
}

fn run_examples(cmd: ExamplesCmd) -> CliResult<ExitCode> {
    match cmd {
        ExamplesCmd::Walk {
            a,
            b,
            c,
            d,
            e,
            delta,
            epsilon,
            atilde,
            emit,
            common,
        } => {
            let mut params = Fig2Params::new(a, b, c, d, e, delta, epsilon);
            if let Some(at) = atilde {
                params = params.with_atilde(at);
            }
            let payload = match emit.as_str() {
                "q" => serde_json::to_string(&corpus::build_fig2_walk(params)?)?,
                "partition" => serde_json::to_string(&corpus::fig2_column_partition())?,
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown emit target {other:?} (expected q | partition)"
                    )))
                }
            };
            finish(&common, Report::new("examples walk"), payload)
        }
        ExamplesCmd::Ising {
            n,
            gamma,
            j,
            t,
            emit,
            common,
        } => {
            let cfg = match (gamma, j, t) {
                (Some(g), None, None) => IsingConfig::new(n, g)?,
                (None, Some(j), Some(t)) => IsingConfig::from_temperature(n, j, t)?,
                _ => {
                    return Err(CliError::Usage(
                        "pass --gamma, or --j together with --t".into(),
                    ))
                }
            };
            let payload = match emit.as_str() {
                "q" => serde_json::to_string(&corpus::build_glauber_ising(cfg))?,
                "group" => serde_json::to_string(&corpus::ising_symmetry_group(n)?)?,
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown emit target {other:?} (expected q | group)"
                    )))
                }
            };
            finish(&common, Report::new("examples ising"), payload)
        }
        ExamplesCmd::Tree {
            broken,
            break_edge,
            emit,
            common,
        } => {
            let mut cfg = if broken {
                TreeConfig::broken()
            } else {
                TreeConfig::default()
            };
            if let Some(edge) = &break_edge {
                let parts: Vec<&str> = edge.split(',').collect();
                if parts.len() != 2 {
                    return Err(CliError::Usage("expected --break-edge U,V".into()));
                }
                let u = parts[0]
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| CliError::Usage(format!("bad vertex {:?}: {e}", parts[0])))?;
                let v = parts[1]
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| CliError::Usage(format!("bad vertex {:?}: {e}", parts[1])))?;
                cfg.extra_edges = vec![(u, v)];
            }
            let payload = match emit.as_str() {
                "bundle" => {
                    let (h, rep) = corpus::build_ctqw_tree(&cfg)?;
                    serde_json::to_string(&TreeBundle {
                        hamiltonian: MatrixJson::from_cmat(&h),
                        group: rep,
                    })?
                }
                "hamiltonian" => {
                    let (h, _) = corpus::build_ctqw_tree(&cfg)?;
                    io::cmat_to_json_string(&h)
                }
                "group" => {
                    let (_, rep) = corpus::build_ctqw_tree(&cfg)?;
                    serde_json::to_string(&rep)?
                }
                "table" => serde_json::to_string(&corpus::tree_symmetrization_table()?)?,
                "classical" => serde_json::to_string(&corpus::tree_classical_walk(&cfg)?)?,
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown emit target {other:?} (expected bundle | hamiltonian | group | table | classical)"
                    )))
                }
            };
            finish(&common, Report::new("examples tree"), payload)
        }
        ExamplesCmd::Tables { name, common } => {
            let tables = corpus::special_case_tables()?;
            let payload = match &name {
                Some(n) => {
                    let found = tables.iter().find(|t| t.name == n).ok_or_else(|| {
                        let known: Vec<&str> = tables.iter().map(|t| t.name).collect();
                        CliError::Usage(format!(
                            "unknown table {n:?}; available: {}",
                            known.join(", ")
                        ))
                    })?;
                    serde_json::to_string(&found.table)?
                }
                None => {
                    let named: Vec<NamedTableJson> = tables
                        .iter()
                        .map(|t| NamedTableJson {
                            name: t.name,
                            table: &t.table,
                        })
                        .collect();
                    serde_json::to_string(&named)?
                }
            };
            finish(&common, Report::new("examples tables"), payload)
        }
    }
}
