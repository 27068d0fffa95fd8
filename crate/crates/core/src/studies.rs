//! End-to-end studies on shipped fixtures: reference construction, real-time and ADAPT
//! subspaces, adiabatic sweeps and circuit-versus-oracle checks.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::asp::{AspRecord, AspSystem};
use crate::circuit::Circuit;
use crate::csf::{embed_fock, Coupling, CsfSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::{asp_path, load_fixture, n2_fixture_name, to_qubit_hamiltonian, AspStart, Fixture, SectorHamiltonian};
use crate::linalg::{matvec, SparseOp};
use crate::pauli::spin_operators;
use crate::references::{TripleBondPlans, TripleBondStates};
use crate::sim::{apply, expectation, fidelity, EvolutionMode, Evolver, StateVector, TermOrder};
use crate::subspace::{adapt_qsd, closure_spectrum, dense_propagator, excitation_pool, rtqsd, AdaptConfig, AdaptRun, QsdConfig, Trace};
use crate::synth::{csf_circuit_for, Topology};

/// Which reference states seed a subspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RefKind {
    /// The closed-shell determinant alone.
    Rhf,
    /// Closed-shell plus the 2-, 4- and 6-electron spin-coupled states.
    Csf,
}

impl std::str::FromStr for RefKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rhf" => Ok(RefKind::Rhf),
            "csf" => Ok(RefKind::Csf),
            _ => Err(Error::config(format!("unknown reference set {s}"))),
        }
    }
}

/// Lowest `n_elec/2` spatial orbitals doubly occupied.
pub fn closed_shell_state(n_orb: usize, n_elec: usize) -> Result<StateVector> {
    if !n_elec.is_multiple_of(2) || n_elec > 2 * n_orb {
        return Err(Error::domain("closed-shell state needs an even electron count that fits"));
    }
    Ok(StateVector::basis(2 * n_orb, (1u64 << n_elec) - 1))
}

/// Reference states for a fixture; the spin-coupled set needs three localization pairs.
pub fn fixture_references(fx: &Fixture, kind: RefKind) -> Result<Vec<StateVector>> {
    match kind {
        RefKind::Rhf => Ok(vec![closed_shell_state(fx.integrals.n_orb, fx.integrals.n_elec)?]),
        RefKind::Csf => {
            if fx.integrals.n_orb != 6 || fx.integrals.n_elec != 6 {
                return Err(Error::config("spin-coupled references need a six-electron, six-orbital fixture"));
            }
            let st = TripleBondStates::new(&TripleBondPlans::new(&fx.sidecar.localization_pairs)?)?;
            Ok(st.four().into_iter().cloned().collect())
        }
    }
}

/// Number of lowest closure eigenvalues used as targets.
pub const N_TARGETS: usize = 10;

/// Result of a real-time subspace run.
#[derive(Clone, Debug, Serialize)]
pub struct QsdStudy {
    pub fixture: String,
    pub references: RefKind,
    pub dt: f64,
    pub n_t: usize,
    pub threshold: f64,
    pub mode: EvolutionMode,
    pub toeplitz: bool,
    /// Lowest eigenvalues whose eigenspaces overlap the closed-shell determinant.
    pub targets: Vec<f64>,
    pub steps_to_targets: Option<usize>,
    pub steps_to_ground: Option<usize>,
    #[serde(skip)]
    pub trace: Trace,
}

/// Energy tolerance for matching subspace eigenvalues to targets.
pub const MATCH_TOL: f64 = 1e-6;

pub fn qsd_study(fx: &Fixture, kind: RefKind, dt: f64, n_t: usize, threshold: f64, mode: EvolutionMode) -> Result<QsdStudy> {
    let h = SectorHamiltonian::new(&fx.integrals)?;
    let refs = fixture_references(fx, kind)?;
    let rhf = h.project(&closed_shell_state(fx.integrals.n_orb, fx.integrals.n_elec)?);
    let targets: Vec<f64> = closure_spectrum(&h.dense, &rhf, 1e-9, 1e-12).into_iter().take(N_TARGETS).collect();
    let toeplitz = mode == EvolutionMode::Exact && refs.len() == 1;
    let trace = match mode {
        EvolutionMode::Exact => {
            let u = dense_propagator(&h.dense, dt);
            let step = |v: &[C64]| -> Result<Vec<C64>> { Ok(matvec(&u, v)) };
            let cfg = QsdConfig { references: refs.iter().map(|r| h.project(r)).collect(), dt, n_t, threshold, toeplitz };
            rtqsd(&h.sparse, &step, &cfg)?
        }
        EvolutionMode::Trotter1 => {
            // product formulas leave the sector, so this path runs on the full register
            let hq = to_qubit_hamiltonian(&fx.integrals)?;
            let ev = Evolver::new(&hq, TermOrder::CanonicalSorted)?;
            let n_q = hq.n_qubits;
            let step = |v: &[C64]| -> Result<Vec<C64>> { Ok(ev.trotter1(dt, 1, &StateVector { n_qubits: n_q, amps: v.to_vec() })?.amps) };
            let cfg = QsdConfig { references: refs.iter().map(|r| r.amps.clone()).collect(), dt, n_t, threshold, toeplitz: false };
            rtqsd(ev.operator(), &step, &cfg)?
        }
    };
    Ok(QsdStudy {
        fixture: fx.name.clone(),
        references: kind,
        dt,
        n_t,
        threshold,
        mode,
        toeplitz,
        steps_to_targets: trace.first_reaching(&targets, MATCH_TOL),
        steps_to_ground: trace.first_reaching(&targets[..1], MATCH_TOL),
        targets,
        trace,
    })
}

/// Result of ADAPT runs from every reference and their pooled iterate subspace.
#[derive(Clone, Debug, Serialize)]
pub struct AdaptStudy {
    pub fixture: String,
    pub references: RefKind,
    pub threshold: f64,
    pub max_iters: usize,
    pub pool_size: usize,
    pub ground_energy: f64,
    /// Subspace ground-energy error per iteration.
    pub qsd_errors: Vec<f64>,
    /// Lowest single-reference variational energy error per iteration.
    pub vqe_errors: Vec<f64>,
    pub iterations_to_tol: Option<usize>,
    pub stagnated: Vec<bool>,
    #[serde(skip)]
    pub runs: Vec<AdaptRun>,
    #[serde(skip)]
    pub trace: Trace,
}

/// Ground-energy error at which ADAPT studies count as converged.
pub const ADAPT_TOL: f64 = 1e-6;

pub fn adapt_study(fx: &Fixture, kind: RefKind, max_iters: usize, threshold: f64) -> Result<AdaptStudy> {
    let h = SectorHamiltonian::new(&fx.integrals)?;
    let refs: Vec<Vec<C64>> = fixture_references(fx, kind)?.iter().map(|r| h.project(r)).collect();
    let pool: Vec<Arc<_>> = excitation_pool(fx.integrals.n_orb, &h.basis);
    let cfg = AdaptConfig { max_iters, ..AdaptConfig::default() };
    let res = adapt_qsd(&h.sparse, &refs, &pool, &cfg, threshold)?;
    let e0 = h.singlet_ground_energy();
    let qsd_errors: Vec<f64> = res.trace.points.iter().map(|p| p.energies[0] - e0).collect();
    let vqe_errors = (0..qsd_errors.len())
        .map(|k| res.runs.iter().map(|r| r.energies[k.min(r.energies.len() - 1)] - e0).fold(f64::INFINITY, f64::min))
        .collect();
    Ok(AdaptStudy {
        fixture: fx.name.clone(),
        references: kind,
        threshold,
        max_iters,
        pool_size: pool.len(),
        ground_energy: e0,
        iterations_to_tol: qsd_errors.iter().position(|e| *e < ADAPT_TOL),
        stagnated: res.runs.iter().map(|r| r.stagnated).collect(),
        qsd_errors,
        vqe_errors,
        runs: res.runs,
        trace: res.trace,
    })
}

/// Adiabatic starting point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AspStartKind {
    /// Fully spin-coupled state, ground state of the dissociation-limit Hamiltonian.
    Csf,
    /// Closed-shell determinant, ground state of the diagonal Fock operator.
    Rhf,
}

impl AspStartKind {
    pub fn name(self) -> &'static str {
        match self {
            AspStartKind::Csf => "csf",
            AspStartKind::Rhf => "rhf",
        }
    }
}

impl std::str::FromStr for AspStartKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csf" => Ok(AspStartKind::Csf),
            "rhf" => Ok(AspStartKind::Rhf),
            _ => Err(Error::config(format!("unknown start {s}"))),
        }
    }
}

/// Geometry whose Hamiltonian starts the spin-coupled path.
pub const DISSOCIATION_GEOMETRY: &str = "4.50";

/// Sweep over geometries, starts and total times; rows come out in input order.
///
/// Points run in parallel on the current rayon pool.
pub fn asp_sweep(geometries: &[String], starts: &[AspStartKind], taus: &[f64], dt: f64) -> Result<Vec<AspRecord>> {
    let limit = load_fixture(&n2_fixture_name(DISSOCIATION_GEOMETRY))?;
    let combos: Vec<(String, AspStartKind)> = geometries.iter().flat_map(|g| starts.iter().map(move |s| (g.clone(), *s))).collect();
    let systems: Vec<(AspSystem, StateVector)> = combos
        .par_iter()
        .map(|(g, s)| {
            let fx = load_fixture(&n2_fixture_name(g))?;
            let refs = fixture_references(&fx, RefKind::Csf)?;
            let (start, init) = match s {
                AspStartKind::Csf => (AspStart::Integrals(&limit.integrals), refs[3].clone()),
                AspStartKind::Rhf => (AspStart::FockDiagonal(&fx.sidecar.orbital_energies), refs[0].clone()),
            };
            let path = asp_path(start, &fx.integrals, 0.0, dt)?;
            Ok((AspSystem::from_path(&path, &init)?, init))
        })
        .collect::<Result<_>>()?;
    let points: Vec<(usize, f64)> = (0..combos.len()).flat_map(|i| taus.iter().map(move |&t| (i, t))).collect();
    points
        .par_iter()
        .map(|&(i, tau)| {
            let (sys, init) = &systems[i];
            let r = sys.run(tau, dt, init)?;
            Ok(AspRecord { r: combos[i].0.clone(), start: combos[i].1.name().to_string(), tau, fidelity: r.fidelity, energy_error: r.energy_error })
        })
        .collect()
}

/// Circuit state against the spin-coupling oracle.
#[derive(Clone, Debug, Serialize)]
pub struct FidelityReport {
    pub n: usize,
    pub coupling: Coupling,
    pub topology: &'static str,
    pub fidelity: f64,
    pub s2: f64,
    pub sz: f64,
    pub n_elec: f64,
    #[serde(skip)]
    pub circuit: Circuit,
}

pub fn csf_fidelity(n: usize, coupling: Coupling, topo: Topology) -> Result<FidelityReport> {
    let circuit = csf_circuit_for(n, coupling, topo)?;
    let out = apply(&circuit, &StateVector::zero_state(2 * n))?;
    let spec = CsfSpec { closed: vec![], open: (0..n).collect(), coupling, n_spatial: n };
    let oracle = embed_fock(&spec, spec.spin_state()?.as_ref(), n)?;
    let (s2, sz, num) = spin_operators(n)?;
    Ok(FidelityReport {
        n,
        coupling,
        topology: topo.name(),
        fidelity: fidelity(&out, &oracle)?,
        s2: expectation(&s2, &out)?.re,
        sz: expectation(&sz, &out)?.re,
        n_elec: expectation(&num, &out)?.re,
        circuit,
    })
}

/// Full-register sparse Hamiltonian of a fixture.
pub fn full_operator(fx: &Fixture) -> Result<SparseOp> {
    Ok(SparseOp::from_pauli(&to_qubit_hamiltonian(&fx.integrals)?))
}
