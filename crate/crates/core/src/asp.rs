//! Discretized adiabatic state preparation along `H(s) = (1 − s)H₀ + s·H_F`.
//!
//! Each step of length `Δt` holds `H` fixed at the value of `s` at the start of the step
//! and propagates exactly. Both endpoints conserve particle number and `S_z`, so the
//! evolution runs inside the sector of the initial state.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{projector_weight, spin_resolved, AspPath, DEGENERACY_TOL};
use crate::linalg::{dot, eigh, expm_krylov, matvec, norm, Combo, KrylovConfig, SectorBasis, SparseOp};
use crate::pauli::{spin_operators, Determinant, PauliSum};
use crate::sim::StateVector;

/// Schedule discretization recorded with every run.
pub const DISCRETIZATION: &str = "piecewise-constant H, s evaluated at step start, exact propagation per step";

#[derive(Clone, Debug, Serialize)]
pub struct AspResult {
    #[serde(skip)]
    pub final_state: StateVector,
    pub fidelity: f64,
    pub energy_error: f64,
    /// `(s, fidelity)` after every step; the first entry is the initial state.
    pub trace: Vec<(f64, f64)>,
    pub norm_drift: f64,
    pub n_steps: usize,
}

/// Sector operators and the target ground space for repeated runs over one path.
pub struct AspSystem {
    pub basis: SectorBasis,
    pub h0: SparseOp,
    pub hf: SparseOp,
    /// Orthonormal basis of the degenerate ground space of `H_F` reachable from the initial spin.
    pub ground_space: Vec<Vec<C64>>,
    pub ground_energy: f64,
}

fn sector_of(v: &StateVector) -> Result<(u32, i32)> {
    let mut found: Option<(u32, i32)> = None;
    for (i, a) in v.amps.iter().enumerate() {
        if a.norm_sqr() < 1e-24 {
            continue;
        }
        let d = Determinant::new(i as u64);
        let key = (d.n_electrons(), d.ms2());
        match found {
            None => found = Some(key),
            Some(k) if k != key => return Err(Error::domain("initial state mixes particle-number or S_z sectors")),
            _ => {}
        }
    }
    found.ok_or(Error::domain("initial state is zero"))
}

impl AspSystem {
    /// Ground space of `H_F` in the total-spin sector of `initial` when it is a spin eigenstate.
    pub fn new(h0: &PauliSum, hf: &PauliSum, initial: &StateVector) -> Result<Self> {
        if h0.n_qubits != hf.n_qubits || hf.n_qubits != initial.n_qubits {
            return Err(Error::Dimension { expected: hf.n_qubits, got: initial.n_qubits });
        }
        let (n_elec, ms2) = sector_of(initial)?;
        let basis = SectorBasis::new(initial.n_qubits, n_elec, Some(ms2));
        let hf_dense = basis.restrict_pauli(hf);
        let (vals, vecs) = eigh(&hf_dense);
        let (spectrum, vectors) = if initial.n_qubits.is_multiple_of(2) {
            let (s2sum, _, _) = spin_operators(initial.n_qubits / 2)?;
            let s2 = basis.restrict_pauli(&s2sum);
            let v = basis.project(&initial.amps);
            let s = dot(&v, &matvec(&s2, &v)).re / dot(&v, &v).re;
            let var = dot(&matvec(&s2, &v), &matvec(&s2, &v)).re / dot(&v, &v).re - s * s;
            if var.abs() < 1e-8 {
                spin_resolved(&hf_dense, &s2, s, &vals)
            } else {
                (vals, vecs)
            }
        } else {
            (vals, vecs)
        };
        if spectrum.is_empty() {
            return Err(Error::numerical("no eigenstate of H_F in the initial spin sector"));
        }
        let e0 = spectrum[0];
        let ground_space = column_block(&vectors, &spectrum, e0);
        Ok(AspSystem { h0: basis.sparse_pauli(h0), hf: basis.sparse_pauli(hf), basis, ground_space, ground_energy: e0 })
    }

    pub fn from_path(path: &AspPath, initial: &StateVector) -> Result<Self> {
        Self::new(&path.h0, &path.hf, initial)
    }

    /// Runs the schedule of total time `tau` with step `dt`.
    pub fn run(&self, tau: f64, dt: f64, initial: &StateVector) -> Result<AspResult> {
        if !(dt > 0.0) || tau < 0.0 {
            return Err(Error::config("need dt > 0 and tau ≥ 0"));
        }
        let steps = tau / dt;
        let n_steps = steps.round() as usize;
        if (steps - n_steps as f64).abs() > 1e-9 {
            return Err(Error::config("tau must be a multiple of dt"));
        }
        let mut v = self.basis.project(&initial.amps);
        let n0 = norm(&v);
        if (n0 - 1.0).abs() > 1e-10 || (initial.norm() - n0).abs() > 1e-10 {
            return Err(Error::domain("initial state must be normalized and lie in one sector"));
        }
        let mut trace = vec![(0.0, projector_weight(&self.ground_space, &v))];
        let cfg = KrylovConfig::default();
        for k in 0..n_steps {
            let s = k as f64 * dt / tau;
            let h = Combo { a: 1.0 - s, op_a: &self.h0, b: s, op_b: &self.hf };
            v = expm_krylov(&h, dt, &v, cfg)?;
            trace.push(((k + 1) as f64 * dt / tau, projector_weight(&self.ground_space, &v)));
        }
        let energy = dot(&v, &matvec(&self.hf, &v)).re / dot(&v, &v).re;
        let fidelity = trace.last().unwrap().1.clamp(0.0, 1.0);
        let norm_drift = (norm(&v) - 1.0).abs();
        let final_state = StateVector { n_qubits: initial.n_qubits, amps: self.basis.embed(&v) };
        Ok(AspResult { final_state, fidelity, energy_error: energy - self.ground_energy, trace, norm_drift, n_steps })
    }

    pub fn initial_fidelity(&self, initial: &StateVector) -> f64 {
        projector_weight(&self.ground_space, &self.basis.project(&initial.amps))
    }
}

fn column_block(vectors: &DMatrix<C64>, values: &[f64], e0: f64) -> Vec<Vec<C64>> {
    (0..values.len())
        .take_while(|&k| values[k] - e0 <= DEGENERACY_TOL)
        .map(|k| vectors.column(k).iter().cloned().collect())
        .collect()
}

/// Runs one adiabatic path from `initial`.
pub fn run_asp(path: &AspPath, initial: &StateVector) -> Result<AspResult> {
    AspSystem::from_path(path, initial)?.run(path.tau, path.dt, initial)
}

/// One row of an adiabatic sweep.
#[derive(Clone, Debug, Serialize)]
pub struct AspRecord {
    pub r: String,
    pub start: String,
    pub tau: f64,
    pub fidelity: f64,
    pub energy_error: f64,
}

pub fn write_asp_csv<W: std::io::Write>(w: W, rows: &[AspRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["R", "start", "tau", "fidelity", "energy_error"]).map_err(io)?;
    for r in rows {
        out.write_record([r.r.clone(), r.start.clone(), format!("{}", r.tau), format!("{:.12}", r.fidelity), format!("{:.12e}", r.energy_error)])
            .map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

fn io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;

    fn two_level(a: f64, b: f64) -> PauliSum {
        // one electron in two orbitals' α spin-orbitals: qubits 0 and 2
        let mut h = PauliSum::zero(4);
        h.add_term(PauliString::z(0), C64::new(a, 0.0));
        h.add_term(PauliString::z(2), C64::new(-a, 0.0));
        // b(a†_0 a_2 + h.c.) = (b/2)(X₀Z₁X₂ + Y₀Z₁Y₂)
        h.add_term(PauliString::new(0b101, 0b010), C64::new(0.5 * b, 0.0));
        h.add_term(PauliString::new(0b101, 0b111), C64::new(0.5 * b, 0.0));
        h.simplify(1e-15)
    }

    #[test]
    fn stationary_path_keeps_ground_state() {
        let h = two_level(0.4, 0.3);
        let basis = SectorBasis::new(4, 1, Some(1));
        let (_, vecs) = eigh(&basis.restrict_pauli(&h));
        let g = StateVector { n_qubits: 4, amps: basis.embed(vecs.column(0).as_slice()) };
        let sys = AspSystem::new(&h, &h, &g).unwrap();
        for tau in [0.0, 0.5, 3.0] {
            let r = sys.run(tau, 0.1, &g).unwrap();
            assert!((r.fidelity - 1.0).abs() < 1e-10);
            assert!(r.norm_drift < 1e-10);
            assert!(r.energy_error.abs() < 1e-10);
        }
    }

    #[test]
    fn single_step_does_not_improve_orthogonal_start() {
        let h0 = two_level(0.5, 0.0);
        let hf = two_level(0.0, 0.7);
        let init = StateVector::basis(4, 0b0001);
        let sys = AspSystem::new(&h0, &hf, &init).unwrap();
        let before = sys.initial_fidelity(&init);
        let r = sys.run(1e-6, 1e-6, &init).unwrap();
        assert!((r.fidelity - before).abs() < 1e-9);
    }

    #[test]
    fn mixed_sector_start_is_rejected() {
        let h = two_level(0.4, 0.3);
        let v = StateVector::from_amps(vec![C64::new(0.6, 0.0), C64::new(0.8, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let v4 = StateVector { n_qubits: 4, amps: [v.amps.clone(), vec![C64::new(0.0, 0.0); 12]].concat() };
        assert!(AspSystem::new(&h, &h, &v4).is_err());
    }
}
