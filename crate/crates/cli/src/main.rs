//! Batch front end. Every subcommand parses flags, calls one library entry point and
//! writes its results: CSV for traces, JSON for metadata, Markdown for tables.
//!
//! Exit codes: 0 success, 2 usage or configuration, 3 parse, 4 numerical failure, 5 I/O.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use spinforge::circuit::Circuit;
use spinforge::csf::{Coupling, CsfSpec};
use spinforge::error::{Error, Result};
use spinforge::hamiltonian::{load_fcidump, load_fixture_any, n2_fixture_name};
use spinforge::resources::{cost_csv, cost_table_markdown, mps_csv, mps_table_markdown, TABLE_NS};
use spinforge::sim::{apply, expectation, sample_counts, EvolutionMode, StateVector};
use spinforge::studies::{adapt_study, asp_sweep, csf_fidelity, qsd_study, AspStartKind, RefKind, N_TARGETS};
use spinforge::synth::{csf_circuit_for, plan_circuit_for, SynthesisPlan, Topology};

#[derive(Parser)]
#[command(name = "spinforge", version, about = "Spin-coupled state preparation circuits, verification and subspace studies")]
struct Cli {
    /// Output directory for CSV, JSON and Markdown results
    #[arg(long, global = true, value_name = "DIR", default_value = "spinforge-out")]
    out: PathBuf,
    /// Seed for every random stream (measurement sampling); fixed seed gives identical output
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for independent sweep points
    #[arg(long, global = true, value_name = "K", default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize a CSF circuit and write it in the circuit text format
    Synth(SynthArgs),
    /// Run a circuit file on |0…0⟩ and report the output state
    Simulate(SimulateArgs),
    /// Squared overlap of a synthesized open-shell circuit with the Clebsch–Gordan oracle
    Fidelity(FidelityArgs),
    /// CNOT and Toffoli cost tables
    Resources(ResourcesArgs),
    /// Real-time subspace diagonalization on a fixture
    Qsd(QsdArgs),
    /// ADAPT iterate subspace diagonalization on a fixture
    AdaptQsd(AdaptArgs),
    /// Adiabatic state preparation sweep over nitrogen bond lengths
    Asp(AspArgs),
    /// Parse an FCIDUMP file and report its header
    ParseCheck(ParseCheckArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Number of singly occupied orbitals N (even, dimensionless)
    #[arg(long = "N", value_name = "N", required_unless_present = "spec")]
    n: Option<usize>,
    /// Coupling pattern: 1 (singlet-coupled halves) or 2 (product of two-site singlets)
    #[arg(long, alias = "csf", default_value = "1")]
    pattern: String,
    /// Synthesis plan or CSF spec as JSON, used instead of --N
    #[arg(long, value_name = "FILE", conflicts_with = "n")]
    spec: Option<PathBuf>,
    /// Target connectivity: all, linear or planar
    #[arg(long, default_value = "all")]
    connectivity: String,
}

#[derive(Args)]
struct SimulateArgs {
    /// Circuit file in the text format
    circuit: PathBuf,
    /// Measurement shots to sample in the computational basis (0 disables sampling)
    #[arg(long, default_value_t = 0)]
    shots: usize,
}

#[derive(Args)]
struct FidelityArgs {
    /// Coupling pattern: pattern1 or pattern2
    #[arg(long, default_value = "pattern1")]
    csf: String,
    /// Number of singly occupied orbitals N (even, dimensionless)
    #[arg(long = "N", value_name = "N")]
    n: usize,
    /// Target connectivity: all, linear or planar
    #[arg(long, default_value = "all")]
    connectivity: String,
}

#[derive(Args)]
struct ResourcesArgs {
    /// Open-shell sizes N to report (repeatable); every table row when absent
    #[arg(long = "N", value_name = "N")]
    n: Vec<u64>,
    /// Rotation synthesis error budget ε (dimensionless)
    #[arg(long, default_value_t = 1e-7)]
    eps: f64,
    /// Also emit the MPS comparison table
    #[arg(long)]
    mps: bool,
}

#[derive(Args)]
struct FixtureArgs {
    /// Fixture name in the fixture directory or a path to an .fcidump with a .json sidecar
    #[arg(long)]
    fixture: String,
    /// Reference set: rhf (closed shell) or csf (closed shell plus spin-coupled states)
    #[arg(long, default_value = "csf")]
    references: String,
    /// Overlap-matrix eigenvalue cutoff (dimensionless)
    #[arg(long, default_value_t = 1e-6)]
    threshold: f64,
}

#[derive(Args)]
struct QsdArgs {
    #[command(flatten)]
    fx: FixtureArgs,
    /// Time step Δt (atomic units of time, ħ/E_h)
    #[arg(long, default_value_t = 2.0)]
    dt: f64,
    /// Number of time steps N_T (dimensionless)
    #[arg(long, default_value_t = 30)]
    nt: usize,
    /// Propagator: exact or trotter1 (one first-order product step per Δt)
    #[arg(long, default_value = "exact")]
    mode: String,
}

#[derive(Args)]
struct AdaptArgs {
    #[command(flatten)]
    fx: FixtureArgs,
    /// ADAPT iterations per reference (dimensionless)
    #[arg(long, default_value_t = 30)]
    max_iters: usize,
}

#[derive(Args)]
struct AspArgs {
    /// Bond lengths R (Å) as fixture labels, comma separated
    #[arg(long = "r", value_delimiter = ',', default_value = "1.50,2.50,4.50")]
    r: Vec<String>,
    /// Starting points: csf, rhf, comma separated
    #[arg(long, value_delimiter = ',', default_value = "csf,rhf")]
    start: Vec<String>,
    /// Total evolution times τ (atomic units of time, ħ/E_h), comma separated
    #[arg(long, value_delimiter = ',', default_value = "3,30,300")]
    tau: Vec<f64>,
    /// Time step Δt (atomic units of time, ħ/E_h)
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
}

#[derive(Args)]
struct ParseCheckArgs {
    /// FCIDUMP file
    file: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Dimension { .. } => 2,
        Error::Parse { .. } => 3,
        Error::Numerical(_) => 4,
        Error::Io(_) => 5,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spinforge: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.max(1)).build().map_err(|e| Error::config(e.to_string()))?;
    pool.install(|| match &cli.cmd {
        Cmd::Synth(a) => synth(cli, a),
        Cmd::Simulate(a) => simulate(cli, a),
        Cmd::Fidelity(a) => fidelity(cli, a),
        Cmd::Resources(a) => resources(cli, a),
        Cmd::Qsd(a) => qsd(cli, a),
        Cmd::AdaptQsd(a) => adapt(cli, a),
        Cmd::Asp(a) => asp(cli, a),
        Cmd::ParseCheck(a) => parse_check(a),
    })
}

fn out_file(cli: &Cli, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(&cli.out)?;
    Ok(cli.out.join(name))
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::Io(std::io::Error::other(e)))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

fn read_plan(path: &Path) -> Result<SynthesisPlan> {
    let text = fs::read_to_string(path)?;
    // a full plan first, then a bare CSF spec whose error is reported
    if let Ok(p) = serde_json::from_str::<SynthesisPlan>(&text) {
        return Ok(p);
    }
    Ok(SynthesisPlan { spec: CsfSpec::from_json(&text)?, control: None, basis_rotations: Vec::new() })
}

#[derive(Serialize)]
struct SynthMeta<'a> {
    source: &'a str,
    connectivity: &'static str,
    n_qubits: usize,
    gates: usize,
    counts: spinforge::circuit::GateCounts,
    circuit_file: String,
}

fn synth(cli: &Cli, a: &SynthArgs) -> Result<()> {
    let topo: Topology = a.connectivity.parse()?;
    let (stem, circuit) = match (&a.spec, a.n) {
        (Some(path), _) => {
            let plan = read_plan(path)?;
            let stem = path.file_stem().map_or("plan".into(), |s| s.to_string_lossy().into_owned());
            (format!("{stem}_{}", topo.name()), plan_circuit_for(&plan, topo)?)
        }
        (None, Some(n)) => {
            let coupling: Coupling = a.pattern.parse()?;
            (format!("csf_N{n}_p{}_{}", u8::from(coupling), topo.name()), csf_circuit_for(n, coupling, topo)?)
        }
        (None, None) => return Err(Error::config("either --N or --spec is required")),
    };
    let circ_path = out_file(cli, &format!("{stem}.circ"))?;
    write(&circ_path, &circuit.to_text())?;
    let meta = SynthMeta {
        source: &stem,
        connectivity: topo.name(),
        n_qubits: circuit.n_qubits,
        gates: circuit.gates.len(),
        counts: circuit.count(),
        circuit_file: circ_path.display().to_string(),
    };
    let json = to_json(&meta)?;
    write(&out_file(cli, &format!("{stem}.json"))?, &json)?;
    print!("{json}");
    Ok(())
}

#[derive(Serialize)]
struct SimulateMeta {
    n_qubits: usize,
    norm: f64,
    s2: Option<f64>,
    sz: Option<f64>,
    n_elec: Option<f64>,
    shots: usize,
    seed: u64,
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<()> {
    let circuit = Circuit::from_text(&fs::read_to_string(&a.circuit)?)?;
    let out = apply(&circuit, &StateVector::zero_state(circuit.n_qubits))?;
    let spins = if circuit.n_qubits % 2 == 0 && circuit.n_qubits > 0 {
        let (s2, sz, n) = spinforge::pauli::spin_operators(circuit.n_qubits / 2)?;
        Some((expectation(&s2, &out)?.re, expectation(&sz, &out)?.re, expectation(&n, &out)?.re))
    } else {
        None
    };
    let mut dump = Vec::new();
    out.dump(&mut dump)?;
    fs::write(out_file(cli, "state.bin")?, dump)?;
    if a.shots > 0 {
        let mut csv = String::from("bitstring,count\n");
        for (k, c) in sample_counts(&out, a.shots, cli.seed)? {
            csv += &format!("{:0width$b},{c}\n", k, width = circuit.n_qubits);
        }
        write(&out_file(cli, "counts.csv")?, &csv)?;
    }
    let meta = SimulateMeta {
        n_qubits: circuit.n_qubits,
        norm: out.norm(),
        s2: spins.map(|s| s.0),
        sz: spins.map(|s| s.1),
        n_elec: spins.map(|s| s.2),
        shots: a.shots,
        seed: cli.seed,
    };
    let json = to_json(&meta)?;
    write(&out_file(cli, "state.json")?, &json)?;
    print!("{json}");
    Ok(())
}

fn fidelity(cli: &Cli, a: &FidelityArgs) -> Result<()> {
    let rep = csf_fidelity(a.n, a.csf.parse()?, a.connectivity.parse()?)?;
    write(&out_file(cli, &format!("fidelity_N{}_{}_{}.json", a.n, a.csf, a.connectivity))?, &to_json(&rep)?)?;
    // twelve decimals, printed in shortest form
    println!("{:?}", (rep.fidelity * 1e12).round() / 1e12);
    Ok(())
}

fn resources(cli: &Cli, a: &ResourcesArgs) -> Result<()> {
    let ns: Vec<u64> = if a.n.is_empty() { TABLE_NS.to_vec() } else { a.n.clone() };
    let csv = cost_csv(&ns, a.eps)?;
    write(&out_file(cli, "csf_costs.csv")?, &csv)?;
    write(&out_file(cli, "csf_costs.md")?, &cost_table_markdown(a.eps)?)?;
    print!("{csv}");
    if a.mps {
        write(&out_file(cli, "mps_costs.csv")?, &mps_csv()?)?;
        write(&out_file(cli, "mps_costs.md")?, &mps_table_markdown()?)?;
        print!("{}", mps_table_markdown()?);
    }
    Ok(())
}

fn qsd(cli: &Cli, a: &QsdArgs) -> Result<()> {
    let fx = load_fixture_any(&a.fx.fixture)?;
    let kind: RefKind = a.fx.references.parse()?;
    let mode = match a.mode.as_str() {
        "exact" => EvolutionMode::Exact,
        "trotter1" => EvolutionMode::Trotter1,
        m => return Err(Error::config(format!("unknown mode {m}"))),
    };
    let st = qsd_study(&fx, kind, a.dt, a.nt, a.fx.threshold, mode)?;
    let stem = format!("qsd_{}_{}_{}", fx.name, a.fx.references, a.mode);
    let mut buf = Vec::new();
    st.trace.write_csv(&mut buf, N_TARGETS)?;
    fs::write(out_file(cli, &format!("{stem}.csv"))?, buf)?;
    write(&out_file(cli, &format!("{stem}.json"))?, &to_json(&st)?)?;
    println!("{} {}: steps to {} targets {}, to ground {}", fx.name, a.fx.references, st.targets.len(), opt(st.steps_to_targets), opt(st.steps_to_ground));
    Ok(())
}

fn opt(v: Option<usize>) -> String {
    v.map_or("not reached".into(), |k| k.to_string())
}

fn adapt(cli: &Cli, a: &AdaptArgs) -> Result<()> {
    let fx = load_fixture_any(&a.fx.fixture)?;
    let st = adapt_study(&fx, a.fx.references.parse()?, a.max_iters, a.fx.threshold)?;
    let stem = format!("adapt_{}_{}", fx.name, a.fx.references);
    let mut csv = String::from("iteration,qsd_error,vqe_error\n");
    for (k, (q, v)) in st.qsd_errors.iter().zip(&st.vqe_errors).enumerate() {
        csv += &format!("{k},{q:.12e},{v:.12e}\n");
    }
    write(&out_file(cli, &format!("{stem}_errors.csv"))?, &csv)?;
    let mut buf = Vec::new();
    st.trace.write_csv(&mut buf, N_TARGETS)?;
    fs::write(out_file(cli, &format!("{stem}_trace.csv"))?, buf)?;
    write(&out_file(cli, &format!("{stem}.json"))?, &to_json(&st)?)?;
    println!("{} {}: iterations to 1e-6 {}", fx.name, a.fx.references, opt(st.iterations_to_tol));
    Ok(())
}

#[derive(Serialize)]
struct AspMeta<'a> {
    geometries: Vec<String>,
    starts: &'a [String],
    taus: &'a [f64],
    dt: f64,
    discretization: &'static str,
}

fn asp(cli: &Cli, a: &AspArgs) -> Result<()> {
    let starts = a.start.iter().map(|s| s.parse()).collect::<Result<Vec<AspStartKind>>>()?;
    let rows = asp_sweep(&a.r, &starts, &a.tau, a.dt)?;
    let mut buf = Vec::new();
    spinforge::asp::write_asp_csv(&mut buf, &rows)?;
    fs::write(out_file(cli, "asp.csv")?, &buf)?;
    let meta = AspMeta {
        geometries: a.r.iter().map(|r| n2_fixture_name(r)).collect(),
        starts: &a.start,
        taus: &a.tau,
        dt: a.dt,
        discretization: spinforge::asp::DISCRETIZATION,
    };
    write(&out_file(cli, "asp.json")?, &to_json(&meta)?)?;
    print!("{}", String::from_utf8_lossy(&buf));
    Ok(())
}

fn parse_check(a: &ParseCheckArgs) -> Result<()> {
    let m = load_fcidump(&a.file)?;
    println!(
        "ok: NORB={} NELEC={} MS2={} ECORE={} qubits={} max 8-fold symmetry defect {:.3e}",
        m.n_orb,
        m.n_elec,
        m.ms2,
        m.e_core,
        m.n_qubits(),
        m.symmetry_defect()
    );
    Ok(())
}
