//! Spin-coupled reference states for a triple bond in a six-orbital valence space,
//! and their optimal linear combination.
//!
//! Orbitals come in bonding/antibonding pairs `[b, a]`; the first pair is the σ bond and
//! the other two the π bonds. Localized orbitals are `L = (b + a)/√2`, `R = (b − a)/√2`
//! up to sign, produced by π/4 Givens rotations on the MO register.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64 as C64;

use crate::csf::{Coupling, CsfSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::SectorHamiltonian;
use crate::linalg::{dot, norm, ZERO};
use crate::sim::{apply, StateVector};
use crate::subspace::{solve_gep, subspace_matrices, SubspaceProblem};
use crate::synth::{lc_csf_circuit, plan_circuit, project_onehot, LcCircuit, SynthesisPlan};

/// Circuit plans for the closed-shell state and the 2-, 4- and 6-electron spin-coupled states.
#[derive(Clone, Debug)]
pub struct TripleBondPlans {
    pub phi0: SynthesisPlan,
    pub phi2x: SynthesisPlan,
    pub phi2y: SynthesisPlan,
    pub phi4: SynthesisPlan,
    pub phi6: SynthesisPlan,
}

fn plan(closed: Vec<usize>, open: Vec<usize>, rotate: &[[usize; 2]]) -> SynthesisPlan {
    let spec = CsfSpec { closed, open, coupling: Coupling::SingletHalves, n_spatial: 6 };
    let mut p = SynthesisPlan { spec, control: None, basis_rotations: Vec::new() };
    for &[b, a] in rotate {
        p = p.rotate_pair(b, a, FRAC_PI_4);
    }
    p
}

impl TripleBondPlans {
    /// `pairs = [σ, π_x, π_y]`, each `[bonding, antibonding]` over six spatial orbitals.
    pub fn new(pairs: &[[usize; 2]]) -> Result<Self> {
        if pairs.len() != 3 {
            return Err(Error::config("three localization pairs are required"));
        }
        let mut all: Vec<usize> = pairs.iter().flatten().copied().collect();
        all.sort_unstable();
        if all != (0..6).collect::<Vec<_>>() {
            return Err(Error::config("localization pairs must partition six orbitals"));
        }
        let [s, x, y] = [pairs[0], pairs[1], pairs[2]];
        Ok(TripleBondPlans {
            phi0: plan(vec![s[0], x[0], y[0]], vec![], &[]),
            phi2x: plan(vec![s[0], y[0]], vec![x[0], x[1]], &[x]),
            phi2y: plan(vec![s[0], x[0]], vec![y[0], y[1]], &[y]),
            phi4: plan(vec![s[0]], vec![x[0], y[0], x[1], y[1]], &[x, y]),
            phi6: plan(vec![], vec![s[0], x[0], y[0], s[1], x[1], y[1]], &[s, x, y]),
        })
    }
}

fn prepare(p: &SynthesisPlan) -> Result<StateVector> {
    apply(&plan_circuit(p)?, &StateVector::zero_state(p.n_data_qubits()))
}

/// Prepared reference states on the twelve-qubit register.
#[derive(Clone, Debug)]
pub struct TripleBondStates {
    pub phi0: StateVector,
    pub phi2x: StateVector,
    pub phi2y: StateVector,
    /// Normalized symmetric combination of the two degenerate diradical states.
    pub phi2: StateVector,
    pub phi4: StateVector,
    pub phi6: StateVector,
    /// `⟨Φ2x|Φ2y⟩` after fixing the relative sign to make it non-negative.
    pub phi2_overlap: f64,
    /// `±1` applied to `Φ2y` inside `Φ2`.
    pub phi2_sign: f64,
}

impl TripleBondStates {
    pub fn new(plans: &TripleBondPlans) -> Result<Self> {
        let phi2x = prepare(&plans.phi2x)?;
        let phi2y = prepare(&plans.phi2y)?;
        let ov = dot(&phi2x.amps, &phi2y.amps).re;
        let sign = if ov < 0.0 { -1.0 } else { 1.0 };
        let sum: Vec<C64> = phi2x.amps.iter().zip(&phi2y.amps).map(|(a, b)| a + b * sign).collect();
        Ok(TripleBondStates {
            phi0: prepare(&plans.phi0)?,
            phi2: StateVector::from_amps(sum)?.normalized()?,
            phi2x,
            phi2y,
            phi4: prepare(&plans.phi4)?,
            phi6: prepare(&plans.phi6)?,
            phi2_overlap: ov * sign,
            phi2_sign: sign,
        })
    }

    /// `[Φ0, Φ2, Φ4, Φ6]`.
    pub fn four(&self) -> [&StateVector; 4] {
        [&self.phi0, &self.phi2, &self.phi4, &self.phi6]
    }
}

/// Energy-optimal combination of nonorthogonal references.
#[derive(Clone, Debug)]
pub struct LcFit {
    pub energy: f64,
    /// Real expansion coefficients over the references, normalized so `Φ_LC` has unit norm.
    pub coeffs: Vec<f64>,
    /// `Φ_LC` in sector coordinates.
    pub state: Vec<C64>,
}

/// Lowest root of the references' generalized eigenproblem.
pub fn lc_fit(h: &SectorHamiltonian, refs: &[Vec<C64>]) -> Result<LcFit> {
    let (hm, sm) = subspace_matrices(&h.sparse, refs);
    let sol = solve_gep(&SubspaceProblem { h: hm, s: sm, threshold: 1e-10 })?;
    let col = sol.vectors.column(0);
    // real Hamiltonian and real references: remove the global phase
    let pivot = col.iter().cloned().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(ZERO);
    let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
    let mut coeffs: Vec<f64> = col.iter().map(|c| (c * phase).re).collect();
    let mut state = vec![ZERO; h.basis.dim()];
    for (r, &c) in refs.iter().zip(&coeffs) {
        for (s, x) in state.iter_mut().zip(r) {
            *s += x * c;
        }
    }
    let n = norm(&state);
    coeffs.iter_mut().for_each(|c| *c /= n);
    state.iter_mut().for_each(|s| *s /= n);
    Ok(LcFit { energy: sol.values[0], coeffs, state })
}

/// Largest weight in the singlet ground space over the span of the references:
/// `Σ_g b_g†S⁻¹b_g` with `(b_g)_i = ⟨φ_i|g⟩`.
pub fn max_overlap_in_span(h: &SectorHamiltonian, refs: &[Vec<C64>]) -> Result<f64> {
    let (_, sm) = subspace_matrices(&h.sparse, refs);
    let chol = sm.cholesky().ok_or(Error::numerical("reference overlap matrix is singular"))?;
    let mut total = 0.0;
    for g in h.singlet_ground_space() {
        let b = nalgebra::DVector::from_iterator(refs.len(), refs.iter().map(|r| dot(r, &g)));
        total += b.dotc(&chol.solve(&b)).re;
    }
    Ok(total)
}

/// One-hot linear-combination circuit realizing an [`LcFit`] over `[Φ0, Φ2, Φ4, Φ6]`.
///
/// `Φ2` itself is split into its two diradical plans.
pub fn lc_circuit(plans: &TripleBondPlans, states: &TripleBondStates, fit: &LcFit) -> Result<LcCircuit> {
    if fit.coeffs.len() != 4 {
        return Err(Error::Dimension { expected: 4, got: fit.coeffs.len() });
    }
    let k = 1.0 / (2.0 + 2.0 * states.phi2_overlap).sqrt();
    let c = &fit.coeffs;
    let list = [plans.phi0.clone(), plans.phi2x.clone(), plans.phi2y.clone(), plans.phi4.clone(), plans.phi6.clone()];
    lc_csf_circuit(&list, &[c[0], c[1] * k, c[1] * k * states.phi2_sign, c[2], c[3]])
}

/// Data-register state produced by [`lc_circuit`] after the ancilla projection.
pub fn lc_circuit_state(lc: &LcCircuit) -> Result<StateVector> {
    let out = apply(&lc.circuit, &StateVector::zero_state(lc.circuit.n_qubits))?;
    project_onehot(&out, lc.n_data, &lc.ancillas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::load_fixture;
    use crate::pauli::spin_operators;
    use crate::sim::expectation;

    const PAIRS: [[usize; 2]; 3] = [[0, 5], [1, 3], [2, 4]];

    #[test]
    fn references_are_singlets_with_six_electrons() {
        let st = TripleBondStates::new(&TripleBondPlans::new(&PAIRS).unwrap()).unwrap();
        // ⟨Φ2x|Φ2y⟩ = 1/2, so Φ2 = (Φ2x + Φ2y)/√3
        assert!((st.phi2_overlap - 0.5).abs() < 1e-12);
        let (s2, sz, n) = spin_operators(6).unwrap();
        for v in [&st.phi0, &st.phi2x, &st.phi2y, &st.phi2, &st.phi4, &st.phi6] {
            assert!((v.norm() - 1.0).abs() < 1e-12);
            assert!(expectation(&s2, v).unwrap().norm() < 1e-10);
            assert!(expectation(&sz, v).unwrap().norm() < 1e-12);
            assert!((expectation(&n, v).unwrap().re - 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lc_circuit_reproduces_fit() {
        let f = load_fixture("n2_2.00").unwrap();
        let h = SectorHamiltonian::new(&f.integrals).unwrap();
        let plans = TripleBondPlans::new(&PAIRS).unwrap();
        let st = TripleBondStates::new(&plans).unwrap();
        let refs: Vec<Vec<C64>> = st.four().iter().map(|v| h.project(v)).collect();
        let fit = lc_fit(&h, &refs).unwrap();
        assert!(fit.energy >= h.singlet_ground_energy() - 1e-10);
        let best = max_overlap_in_span(&h, &refs).unwrap();
        assert!(h.singlet_ground_fidelity(&fit.state) <= best + 1e-10);
        let lc = lc_circuit(&plans, &st, &fit).unwrap();
        let got = h.project(&lc_circuit_state(&lc).unwrap());
        let f = dot(&got, &fit.state).norm_sqr();
        assert!(f > 1.0 - 1e-10, "{f}");
    }

    #[test]
    fn bad_pairs_are_rejected() {
        assert!(TripleBondPlans::new(&[[0, 5], [1, 3]]).is_err());
        assert!(TripleBondPlans::new(&[[0, 5], [1, 3], [2, 3]]).is_err());
    }
}
