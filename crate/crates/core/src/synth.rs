//! Circuit generators: symmetric (Dicke) unitaries, spin-coupled CSF preparation,
//! geminal products, controlled and linear-combination variants, and Givens rotations.
//!
//! Open-shell circuits act on `2N` qubits laid out like the Fock register: site `i`
//! owns qubits `2i` (α) and `2i+1` (β). The spin-space α/β pattern lives on the α qubits
//! until the final mapping layer turns each site into `10` or `01`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuit::{decompose, decompose_with, Circuit, Connectivity, DecomposeOptions, Gate};
use crate::csf::{Coupling, CsfSpec};
use crate::error::{Error, Result};
use crate::sim::StateVector;

/// Target hardware topology.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    All,
    Linear,
    Planar,
}

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::All, Topology::Planar, Topology::Linear];

    pub fn name(self) -> &'static str {
        match self {
            Topology::All => "all",
            Topology::Linear => "linear",
            Topology::Planar => "planar",
        }
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Topology::All),
            "linear" => Ok(Topology::Linear),
            "planar" => Ok(Topology::Planar),
            _ => Err(Error::config(format!("unknown connectivity {s}"))),
        }
    }
}

/// Symmetric-state angles `2·arccos√(i/l)`.
fn scs_angle(i: usize, l: usize) -> f64 {
    2.0 * ((i as f64) / (l as f64)).sqrt().acos()
}

/// Blocks of `M_{l,k}` on register `reg`: one two-qubit block, then `k − 1` three-qubit blocks.
fn m_block(reg: &[usize], l: usize, k: usize, out: &mut Vec<Gate>) {
    out.push(Gate::scs2(reg[l - 2], reg[l - 1], scs_angle(1, l)));
    for i in 2..=k {
        out.push(Gate::scs3(reg[l - i - 1], reg[l - i], reg[l - 1], scs_angle(i, l)));
    }
}

/// Gates of `U_{n,k}` on register `reg`, `n = reg.len()`.
///
/// Maps `|0^{n−l}1^l⟩` (ones on the last `l` register entries) to `|D_l^n⟩` for every `l ≤ k`.
pub fn dicke_gates(reg: &[usize], k: usize) -> Result<Vec<Gate>> {
    let n = reg.len();
    if k > n {
        return Err(Error::domain(format!("Dicke weight {k} exceeds register size {n}")));
    }
    let mut out = Vec::new();
    for l in (k + 1..=n).rev() {
        if k >= 1 {
            m_block(reg, l, k, &mut out);
        }
    }
    for l in (2..=k.min(n)).rev() {
        m_block(reg, l, l - 1, &mut out);
    }
    Ok(out)
}

/// `U_{n,k}` on `n` qubits; `S_n = U_{n,n}`.
pub fn dicke_unitary(n: usize, k: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::domain("empty Dicke register"));
    }
    let reg: Vec<usize> = (0..n).collect();
    let mut c = Circuit::new(n);
    for g in dicke_gates(&reg, k)? {
        c.push(g);
    }
    Ok(c)
}

fn alpha(site: usize) -> usize {
    2 * site
}

fn beta(site: usize) -> usize {
    2 * site + 1
}

/// Staircase amplitudes `(−1)^{n−l}/√(n+1)` for left weight `l`.
pub fn staircase_amplitudes(n: usize) -> Vec<f64> {
    let a = 1.0 / ((n + 1) as f64).sqrt();
    (0..=n).map(|l| if (n - l).is_multiple_of(2) { a } else { -a }).collect()
}

/// Ladder angles turning `|0…0⟩` into `Σ_l c_l|0^{n−l}1^l⟩`; the last amplitude must be nonnegative.
pub fn ladder_angles(c: &[f64]) -> Vec<f64> {
    let n = c.len() - 1;
    let mut tail = vec![0.0f64; n + 2];
    for l in (0..=n).rev() {
        tail[l] = (tail[l + 1].powi(2) + c[l] * c[l]).sqrt();
    }
    (0..n).map(|l| 2.0 * tail[l + 1].atan2(c[l])).collect()
}

/// `CX` from `ctrl`, or a bare `X` when uncontrolled.
fn flip(ctrl: Option<usize>, q: usize) -> Gate {
    match ctrl {
        Some(a) => Gate::cx(a, q),
        None => Gate::x(q),
    }
}

fn rot(ctrl: Option<usize>, q: usize, theta: f64) -> Gate {
    match ctrl {
        Some(a) => Gate::cry(a, q, theta),
        None => Gate::ry(q, theta),
    }
}

/// Spin-to-Fock mapping: `CXbar(α_i → β_i)`, optionally with controlled X conjugations.
fn map_gates(sites: &[usize], ctrl: Option<usize>, out: &mut Vec<Gate>) {
    for &s in sites {
        match ctrl {
            None => out.push(Gate::cxbar(alpha(s), beta(s))),
            Some(a) => {
                out.push(Gate::cx(a, alpha(s)));
                out.push(Gate::cx(alpha(s), beta(s)));
                out.push(Gate::cx(a, alpha(s)));
            }
        }
    }
}

/// Singlet-coupled preparation on open-shell `sites` (length `N ≥ 4`, even).
///
/// Controlling touches only the X flips, the first RY and the mapping X gates; every other
/// gate acts trivially on the all-zero register.
pub fn singlet_gates(sites: &[usize], ctrl: Option<usize>) -> Result<Vec<Gate>> {
    let big_n = sites.len();
    if big_n < 4 || !big_n.is_multiple_of(2) {
        return Err(Error::domain(format!("singlet-coupled circuit needs even N ≥ 4, got {big_n}")));
    }
    let n = big_n / 2;
    let a: Vec<usize> = sites.iter().map(|&s| alpha(s)).collect();
    let mut out = Vec::new();
    for &q in &a[n..] {
        out.push(flip(ctrl, q));
    }
    // left register ends up as Σ c_l |0^{n−l}1^l⟩, ones filled from the far end
    let th = ladder_angles(&staircase_amplitudes(n));
    out.push(rot(ctrl, a[n - 1], th[0]));
    for m in 1..n {
        out.push(Gate::cry(a[n - m], a[n - m - 1], th[m]));
    }
    for j in 0..n {
        out.push(Gate::cx(a[j], a[big_n - 1 - j]));
    }
    out.extend(dicke_gates(&a[..n], n)?);
    out.extend(dicke_gates(&a[n..], n)?);
    map_gates(sites, ctrl, &mut out);
    Ok(out)
}

/// Product of two-site singlets on consecutive site pairs.
pub fn geminal_gates(sites: &[usize], ctrl: Option<usize>) -> Result<Vec<Gate>> {
    let big_n = sites.len();
    if big_n < 2 || !big_n.is_multiple_of(2) {
        return Err(Error::domain(format!("geminal circuit needs even N ≥ 2, got {big_n}")));
    }
    let mut out = Vec::new();
    for pair in sites.chunks(2) {
        let (l, r) = (alpha(pair[0]), alpha(pair[1]));
        // (|10⟩ − |01⟩)/√2 on (l, r): r ← RY(−π/2)|0⟩, then l ← NOT r
        out.push(rot(ctrl, r, -FRAC_PI_2));
        match ctrl {
            None => out.push(Gate::cxbar(r, l)),
            Some(a) => {
                out.push(Gate::cx(a, r));
                out.push(Gate::cx(r, l));
                out.push(Gate::cx(a, r));
            }
        }
    }
    map_gates(sites, ctrl, &mut out);
    Ok(out)
}

/// Gates for a coupling pattern; pattern 1 with `N = 2` takes the geminal route.
pub fn open_shell_gates(sites: &[usize], coupling: Coupling, ctrl: Option<usize>) -> Result<Vec<Gate>> {
    match coupling {
        Coupling::SingletHalves if sites.len() == 2 => geminal_gates(sites, ctrl),
        Coupling::SingletHalves => singlet_gates(sites, ctrl),
        Coupling::BellPairs => geminal_gates(sites, ctrl),
    }
}

/// Two-qubit Givens core on `(p, q)`; the rotation pair is controlled when `ctrl` is set.
fn givens_core(p: usize, q: usize, theta: f64, ctrl: Option<usize>, out: &mut Vec<Gate>) {
    out.push(Gate::ry(p, -FRAC_PI_2));
    out.push(Gate::cx(p, q));
    out.push(rot(ctrl, p, theta));
    out.push(rot(ctrl, q, -theta));
    out.push(Gate::cx(p, q));
    out.push(Gate::ry(p, FRAC_PI_2));
}

fn cz(a: usize, b: usize, out: &mut Vec<Gate>) {
    out.push(Gate::h(b));
    out.push(Gate::cx(a, b));
    out.push(Gate::h(b));
}

/// Gates for `exp(θ(a†_p a_q − a†_q a_p))` under Jordan–Wigner.
///
/// Distance 1 costs 2 CNOTs. Larger distances gather the parity of the intermediate qubits
/// onto `hi − 1` and flip the sign of θ through two CZ gates, `2d` CNOTs in total.
pub fn givens_gates(p: usize, q: usize, theta: f64, ctrl: Option<usize>) -> Result<Vec<Gate>> {
    if p == q {
        return Err(Error::domain("Givens rotation needs distinct spin-orbitals"));
    }
    if ctrl == Some(p) || ctrl == Some(q) {
        return Err(Error::domain("control collides with a rotated qubit"));
    }
    // exp(θ(a†_p a_q − h.c.)) = exp(−θ(a†_q a_p − h.c.))
    let (lo, hi, theta) = if p < q { (p, q, theta) } else { (q, p, -theta) };
    let mut out = Vec::new();
    let ladder: Vec<Gate> = (lo + 1..hi - 1).map(|k| Gate::cx(k, k + 1)).collect();
    if hi - lo == 1 {
        givens_core(lo, hi, theta, ctrl, &mut out);
        return Ok(out);
    }
    if ctrl.is_some_and(|c| c > lo && c < hi) {
        return Err(Error::domain("control lies inside the parity string"));
    }
    out.extend(ladder.iter().cloned());
    cz(hi - 1, lo, &mut out);
    givens_core(lo, hi, theta, ctrl, &mut out);
    cz(hi - 1, lo, &mut out);
    out.extend(ladder.iter().rev().cloned());
    Ok(out)
}

pub fn givens_rotation_circuit(p: usize, q: usize, theta: f64, n_qubits: usize) -> Result<Circuit> {
    if p.max(q) >= n_qubits {
        return Err(Error::domain("Givens index outside the register"));
    }
    let mut c = Circuit::new(n_qubits);
    for g in givens_gates(p, q, theta, None)? {
        c.push(g);
    }
    Ok(c)
}

/// A CSF with optional control and trailing spin-orbital rotations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisPlan {
    pub spec: CsfSpec,
    #[serde(default)]
    pub control: Option<usize>,
    /// `(p, q, θ)` spin-orbital Givens rotations applied after preparation, in order.
    #[serde(default)]
    pub basis_rotations: Vec<(usize, usize, f64)>,
}

impl SynthesisPlan {
    /// Bare open-shell plan: `N` singly occupied orbitals `0..N`.
    pub fn open_shell(big_n: usize, coupling: Coupling) -> Self {
        SynthesisPlan {
            spec: CsfSpec { closed: Vec::new(), open: (0..big_n).collect(), coupling, n_spatial: big_n },
            control: None,
            basis_rotations: Vec::new(),
        }
    }

    /// Rotates spatial pair `(left, right)` for both spins so that
    /// `a†_left → cos θ a†_left + sin θ a†_right`.
    pub fn rotate_pair(mut self, left: usize, right: usize, theta: f64) -> Self {
        for spin in 0..2 {
            self.basis_rotations.push((2 * right + spin, 2 * left + spin, theta));
        }
        self
    }

    pub fn n_data_qubits(&self) -> usize {
        2 * self.spec.n_spatial
    }

    fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let nq = self.n_data_qubits();
        if self.basis_rotations.iter().any(|&(p, q, _)| p >= nq || q >= nq || p == q) {
            return Err(Error::domain("invalid basis-rotation indices"));
        }
        if self.control.is_some_and(|a| a < nq) {
            return Err(Error::domain("ancilla collides with a data qubit"));
        }
        if self.spec.coupling == Coupling::SingletHalves && !self.spec.open.is_empty() && self.spec.open.len() < 2 {
            return Err(Error::domain("open-shell count too small"));
        }
        Ok(())
    }

    /// All gates, with the plan's own control applied.
    pub fn gates(&self) -> Result<Vec<Gate>> {
        self.validate()?;
        let ctrl = self.control;
        let mut out = Vec::new();
        for &c in &self.spec.closed {
            out.push(flip(ctrl, alpha(c)));
            out.push(flip(ctrl, beta(c)));
        }
        if !self.spec.open.is_empty() {
            out.extend(open_shell_gates(&self.spec.open, self.spec.coupling, ctrl)?);
        }
        for &(p, q, th) in &self.basis_rotations {
            out.extend(givens_gates(p, q, th, ctrl)?);
        }
        Ok(out)
    }
}

/// Register size of a plan including its ancilla.
fn plan_width(plan: &SynthesisPlan) -> usize {
    plan.n_data_qubits().max(plan.control.map_or(0, |a| a + 1))
}

/// Circuit for a plan on `2·n_spatial` qubits (plus the ancilla, if any).
pub fn plan_circuit(plan: &SynthesisPlan) -> Result<Circuit> {
    let mut c = Circuit::new(plan_width(plan));
    for g in plan.gates()? {
        c.push(g);
    }
    Ok(c)
}

/// Open-shell CSF circuit on `2N` qubits with all-to-all connectivity.
pub fn csf_circuit(big_n: usize, coupling: Coupling) -> Result<Circuit> {
    if big_n < 2 || !big_n.is_multiple_of(2) {
        return Err(Error::domain(format!("open-shell count must be even and at least 2, got {big_n}")));
    }
    plan_circuit(&SynthesisPlan::open_shell(big_n, coupling))
}

/// Qubit placement used for an open-shell circuit of `N` sites.
///
/// Singlet coupling puts the α qubits in one line and the β qubits in a second line
/// (consecutive on a chain, parallel rows on a grid). Geminal circuits keep the interleaved order.
pub fn placement(big_n: usize, coupling: Coupling, topo: Topology) -> Connectivity {
    let nq = 2 * big_n;
    let interleaved = coupling == Coupling::BellPairs || big_n == 2;
    match topo {
        Topology::All => Connectivity::All,
        Topology::Linear if interleaved => Connectivity::linear_identity(nq),
        Topology::Linear => {
            Connectivity::Linear { position: (0..nq).map(|q| if q % 2 == 0 { q / 2 } else { big_n + q / 2 }).collect() }
        }
        Topology::Planar if interleaved => {
            Connectivity::Planar { rows: 1, cols: nq, place: (0..nq).map(|q| (0, q)).collect() }
        }
        Topology::Planar => Connectivity::Planar { rows: 2, cols: big_n, place: (0..nq).map(|q| (q % 2, q / 2)).collect() },
    }
}

/// Open-shell CSF circuit decomposed for `topo` into nearest-neighbour `{X, H, RY, CX}`.
pub fn csf_circuit_for(big_n: usize, coupling: Coupling, topo: Topology) -> Result<Circuit> {
    let c = csf_circuit(big_n, coupling)?;
    let conn = placement(big_n, coupling, topo);
    decompose_with(&c, &conn, DecomposeOptions { assume_zero_input: true })
}

/// A plan decomposed for `topo`; restricted topologies keep the interleaved qubit order
/// on a line or a single grid row.
pub fn plan_circuit_for(plan: &SynthesisPlan, topo: Topology) -> Result<Circuit> {
    let c = plan_circuit(plan)?;
    let n = c.n_qubits;
    let conn = match topo {
        Topology::All => Connectivity::All,
        Topology::Linear => Connectivity::linear_identity(n),
        Topology::Planar => Connectivity::Planar { rows: 1, cols: n, place: (0..n).map(|q| (0, q)).collect() },
    };
    decompose(&c, &conn)
}

/// A plan controlled on `ancilla`.
pub fn controlled_csf(plan: &SynthesisPlan, ancilla: usize) -> Result<Circuit> {
    let mut p = plan.clone();
    p.control = Some(ancilla);
    plan_circuit(&p)
}

/// Linear combination circuit and the layout of its ancilla register.
#[derive(Clone, Debug)]
pub struct LcCircuit {
    pub circuit: Circuit,
    pub n_data: usize,
    /// One-hot ancillas, one per plan, after the data qubits.
    pub ancillas: Vec<usize>,
}

/// Prepares `Σ_j c_j |e_j⟩|Φ_j⟩` with a one-hot ancilla register.
///
/// Every plan must act on the same data register; projection of the ancillas is left to
/// [`project_onehot`]. Plans after the first are preceded by the inverse of their
/// uncontrolled skeleton, since earlier branches no longer hold |0…0⟩.
pub fn lc_csf_circuit(plans: &[SynthesisPlan], coeffs: &[f64]) -> Result<LcCircuit> {
    if plans.is_empty() || plans.len() != coeffs.len() {
        return Err(Error::domain("need one coefficient per plan"));
    }
    let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm < 1e-14 {
        return Err(Error::domain("coefficients have zero norm"));
    }
    let n_data = plans[0].n_data_qubits();
    if plans.iter().any(|p| p.n_data_qubits() != n_data) {
        return Err(Error::domain("plans act on different registers"));
    }
    let k = plans.len();
    let anc: Vec<usize> = (n_data..n_data + k).collect();
    let mut c = Circuit::new(n_data + k);
    // unary amplitude ladder; the final remainder keeps its sign
    let cs: Vec<f64> = coeffs.iter().map(|c| c / norm).collect();
    let mut rho = vec![0.0; k];
    rho[k - 1] = cs[k - 1];
    for j in (0..k - 1).rev() {
        rho[j] = (rho[j + 1] * rho[j + 1] + cs[j] * cs[j]).sqrt();
    }
    c.push(Gate::x(anc[0]));
    for j in 0..k - 1 {
        let th = 2.0 * rho[j + 1].atan2(cs[j]);
        c.push(Gate::cry(anc[j], anc[j + 1], th));
        c.push(Gate::cx(anc[j + 1], anc[j]));
    }
    for (idx, (p, &a)) in plans.iter().zip(&anc).enumerate() {
        let gates = controlled_csf(p, a)?.gates;
        // with the ancilla off only the skeleton acts; undoing it first makes the off branch
        // the identity on any data, not just on |0…0⟩
        if idx > 0 {
            let skeleton: Vec<Gate> = gates.iter().filter(|g| !g.qubits.contains(&a)).cloned().collect();
            for g in skeleton.iter().rev().flat_map(|g| g.inverse()) {
                c.push(g);
            }
        }
        for g in gates {
            c.push(g);
        }
    }
    Ok(LcCircuit { circuit: c, n_data, ancillas: anc })
}

/// Projects the ancillas onto the uniform one-hot superposition and renormalizes the data register.
pub fn project_onehot(state: &StateVector, n_data: usize, ancillas: &[usize]) -> Result<StateVector> {
    let mut out = vec![C64::new(0.0, 0.0); 1 << n_data];
    for &a in ancillas {
        let bit = 1usize << a;
        for (d, o) in out.iter_mut().enumerate() {
            *o += state.amps[d | bit];
        }
    }
    StateVector::from_amps(out)?.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csf::{binomial, bell_product, embed_fock, singlet_coupled};
    use crate::sim::{apply, fidelity};

    fn dicke_vec(n: usize, l: usize) -> Vec<f64> {
        let a = 1.0 / (binomial(n as u64, l as u64) as f64).sqrt();
        (0..1usize << n).map(|j| if j.count_ones() as usize == l { a } else { 0.0 }).collect()
    }

    #[test]
    fn givens_matches_fermionic_exponential() {
        use crate::linalg::{expm_krylov, KrylovConfig, SparseOp};
        use crate::pauli::{ann, cre, jordan_wigner, FermionOp};
        use rand::{Rng, SeedableRng};
        let n = 6;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let v: Vec<C64> = (0..1 << n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let v = StateVector::from_amps(v).unwrap().normalized().unwrap();
        for (p, q) in [(0, 1), (1, 0), (0, 2), (3, 1), (0, 5), (5, 2), (1, 4)] {
            let theta = 0.37;
            // exp(θ(a†_p a_q − a†_q a_p)) = exp(−i·1·H) with H = iθ(a†_p a_q − a†_q a_p)
            let gen = FermionOp::new().term(1.0, &[cre(p), ann(q)]).term(-1.0, &[cre(q), ann(p)]);
            let h = jordan_wigner(&gen, n).unwrap().scale(C64::new(0.0, theta));
            let want = expm_krylov(&SparseOp::from_pauli(&h), 1.0, &v.amps, KrylovConfig::default()).unwrap();
            let got = apply(&givens_rotation_circuit(p, q, theta, n).unwrap(), &v).unwrap();
            let err = got.amps.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10, "({p},{q}) err {err}");
        }
    }

    #[test]
    fn three_qubit_dicke_example() {
        let c = dicke_unitary(3, 3).unwrap();
        // |011⟩ with qubit 0 leftmost: qubits 1 and 2 set
        let out = apply(&c, &StateVector::basis(3, 0b110)).unwrap();
        let want = dicke_vec(3, 2);
        for (a, w) in out.amps.iter().zip(&want) {
            assert!((a.re - w).abs() < 1e-12 && a.im.abs() < 1e-12);
        }
    }

    #[test]
    fn dicke_all_weights() {
        for n in 1..=6 {
            for k in 1..=n {
                let c = dicke_unitary(n, k).unwrap();
                for l in 0..=k {
                    let input = ((1usize << l) - 1) << (n - l);
                    let out = apply(&c, &StateVector::basis(n, input as u64)).unwrap();
                    let want = dicke_vec(n, l);
                    for (a, w) in out.amps.iter().zip(&want) {
                        assert!((a - C64::new(*w, 0.0)).norm() < 1e-12, "n={n} k={k} l={l}");
                    }
                }
            }
        }
        assert!(dicke_unitary(3, 4).is_err());
    }

    #[test]
    fn dicke_rotation_count() {
        assert_eq!(dicke_unitary(4, 4).unwrap().count().rotation, 6);
    }

    #[test]
    fn ladder_reproduces_amplitudes() {
        let c = [0.3, -0.5, 0.2, (1.0f64 - 0.09 - 0.25 - 0.04).sqrt()];
        let th = ladder_angles(&c);
        let n = c.len() - 1;
        let mut prod = 1.0;
        for l in 0..=n {
            let amp = if l < n { prod * (th[l] / 2.0).cos() } else { prod };
            assert!((amp - c[l]).abs() < 1e-14);
            if l < n {
                prod *= (th[l] / 2.0).sin();
            }
        }
    }

    fn oracle(big_n: usize, coupling: Coupling) -> StateVector {
        let spec = SynthesisPlan::open_shell(big_n, coupling).spec;
        let s = match coupling {
            Coupling::SingletHalves => singlet_coupled(big_n).unwrap(),
            Coupling::BellPairs => bell_product(big_n).unwrap(),
        };
        embed_fock(&spec, Some(&s), big_n).unwrap()
    }

    #[test]
    fn csf_circuits_match_oracle() {
        for big_n in [2, 4, 6] {
            for coupling in [Coupling::SingletHalves, Coupling::BellPairs] {
                let c = csf_circuit(big_n, coupling).unwrap();
                let out = apply(&c, &StateVector::zero_state(2 * big_n)).unwrap();
                let o = oracle(big_n, coupling);
                assert!(fidelity(&out, &o).unwrap() > 1.0 - 1e-12);
                let ov = crate::sim::overlap(&o, &out).unwrap();
                assert!((ov.re - 1.0).abs() < 1e-12, "signed overlap {ov} for N={big_n}");
            }
        }
    }

    #[test]
    fn rotation_counts() {
        assert_eq!(csf_circuit(8, Coupling::SingletHalves).unwrap().count().rotation, 16);
        assert_eq!(csf_circuit(2, Coupling::SingletHalves).unwrap().count().rotation, 0);
    }

    #[test]
    fn geminal_costs() {
        assert_eq!(csf_circuit_for(2, Coupling::SingletHalves, Topology::All).unwrap().count().cnot, 3);
        assert_eq!(csf_circuit_for(2, Coupling::SingletHalves, Topology::Linear).unwrap().count().cnot, 5);
        assert_eq!(csf_circuit_for(6, Coupling::BellPairs, Topology::All).unwrap().count().cnot, 9);
        assert_eq!(csf_circuit_for(6, Coupling::BellPairs, Topology::Linear).unwrap().count().cnot, 15);
    }

    #[test]
    fn all_to_all_counts() {
        for big_n in [4usize, 6, 8] {
            let c = csf_circuit_for(big_n, Coupling::SingletHalves, Topology::All).unwrap();
            let want = crate::resources::csf_cnot_costs(big_n as u64).unwrap().all;
            assert_eq!(c.count().cnot as u64, want, "N={big_n}");
        }
    }

    #[test]
    fn decomposed_circuits_keep_the_state() {
        for topo in Topology::ALL {
            let c = csf_circuit_for(4, Coupling::SingletHalves, topo).unwrap();
            let out = apply(&c, &StateVector::zero_state(8)).unwrap();
            assert!(fidelity(&out, &oracle(4, Coupling::SingletHalves)).unwrap() > 1.0 - 1e-12, "{topo:?}");
        }
    }

    #[test]
    fn controlled_overhead_and_action() {
        for big_n in [4usize, 6] {
            let plan = SynthesisPlan::open_shell(big_n, Coupling::SingletHalves);
            let nq = 2 * big_n;
            let c = controlled_csf(&plan, nq).unwrap();
            let base = crate::circuit::decompose(&csf_circuit(big_n, Coupling::SingletHalves).unwrap(), &Connectivity::All).unwrap();
            let ctl = crate::circuit::decompose(&c, &Connectivity::All).unwrap();
            assert_eq!(ctl.count().cnot - base.count().cnot, 5 * big_n / 2 + 2);
            let off = apply(&c, &StateVector::zero_state(nq + 1)).unwrap();
            assert!((off.amps[0].re - 1.0).abs() < 1e-12);
            let on = apply(&c, &StateVector::basis(nq + 1, 1 << nq)).unwrap();
            let data = project_onehot(&on, nq, &[nq]).unwrap();
            assert!(fidelity(&data, &oracle(big_n, Coupling::SingletHalves)).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn lc_degenerate_weights() {
        let p1 = SynthesisPlan::open_shell(4, Coupling::SingletHalves);
        let p2 = SynthesisPlan::open_shell(4, Coupling::BellPairs);
        let lc = lc_csf_circuit(&[p1, p2], &[1.0, 0.0]).unwrap();
        let out = apply(&lc.circuit, &StateVector::zero_state(lc.circuit.n_qubits)).unwrap();
        let data = project_onehot(&out, lc.n_data, &lc.ancillas).unwrap();
        assert!(fidelity(&data, &oracle(4, Coupling::SingletHalves)).unwrap() > 1.0 - 1e-12);
        assert!(lc_csf_circuit(&[SynthesisPlan::open_shell(2, Coupling::BellPairs)], &[0.0]).is_err());
    }

    #[test]
    fn lc_mixes_coherently() {
        let p1 = SynthesisPlan::open_shell(4, Coupling::SingletHalves);
        let p2 = SynthesisPlan::open_shell(4, Coupling::BellPairs);
        let (a, b) = (0.6, -0.8);
        let lc = lc_csf_circuit(&[p1, p2], &[a, b]).unwrap();
        let out = apply(&lc.circuit, &StateVector::zero_state(lc.circuit.n_qubits)).unwrap();
        let data = project_onehot(&out, lc.n_data, &lc.ancillas).unwrap();
        let o1 = oracle(4, Coupling::SingletHalves);
        let o2 = oracle(4, Coupling::BellPairs);
        let sum: Vec<C64> = o1.amps.iter().zip(&o2.amps).map(|(x, y)| x * a + y * b).collect();
        let want = StateVector::from_amps(sum).unwrap().normalized().unwrap();
        assert!(fidelity(&data, &want).unwrap() > 1.0 - 1e-12);
    }
}
