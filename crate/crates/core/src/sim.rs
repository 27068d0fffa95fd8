//! Dense statevector engine: gates, inner products, exact and Trotterized evolution.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{expand_logical, Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::linalg::{self, expm_krylov, KrylovConfig, LinOp, SparseOp, ZERO};
use crate::pauli::{pauli_matvec, PauliString, PauliSum};

/// Dense amplitudes over `2^n_qubits` basis states, qubit 0 least significant.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub n_qubits: usize,
    pub amps: Vec<C64>,
}

impl StateVector {
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: u64) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index as usize] = C64::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    pub fn from_amps(amps: Vec<C64>) -> Result<Self> {
        let n = amps.len();
        if !n.is_power_of_two() {
            return Err(Error::domain("amplitude count is not a power of two"));
        }
        Ok(StateVector { n_qubits: n.trailing_zeros() as usize, amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amps)
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::numerical("zero-norm state"));
        }
        self.amps.iter_mut().for_each(|a| *a /= n);
        Ok(self)
    }

    /// Writes the 8-byte little-endian qubit count followed by interleaved `(re, im)` doubles.
    pub fn dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.n_qubits as u64).to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load<R: Read>(mut r: R) -> Result<Self> {
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        if n > 30 {
            return Err(Error::domain("statevector dump too large"));
        }
        let mut amps = Vec::with_capacity(1 << n);
        for _ in 0..1usize << n {
            r.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)?;
            let im = f64::from_le_bytes(b8);
            amps.push(C64::new(re, im));
        }
        Ok(StateVector { n_qubits: n, amps })
    }
}

fn ry_pair(v: &mut [C64], i0: usize, i1: usize, c: f64, s: f64) {
    let (a, b) = (v[i0], v[i1]);
    v[i0] = a * c - b * s;
    v[i1] = a * s + b * c;
}

/// Applies one gate in place.
pub fn apply_gate(g: &Gate, v: &mut [C64]) {
    let q = &g.qubits;
    let d = v.len();
    match g.kind {
        GateKind::X => {
            let m = 1 << q[0];
            for j in (0..d).filter(|j| j & m == 0) {
                v.swap(j, j | m);
            }
        }
        GateKind::H => {
            let m = 1 << q[0];
            let r = std::f64::consts::FRAC_1_SQRT_2;
            for j in (0..d).filter(|j| j & m == 0) {
                let (a, b) = (v[j], v[j | m]);
                v[j] = (a + b) * r;
                v[j | m] = (a - b) * r;
            }
        }
        GateKind::RY => {
            let m = 1 << q[0];
            let (s, c) = (g.angle / 2.0).sin_cos();
            for j in (0..d).filter(|j| j & m == 0) {
                ry_pair(v, j, j | m, c, s);
            }
        }
        GateKind::CX | GateKind::CXbar => {
            let (mc, mt) = (1 << q[0], 1 << q[1]);
            let want = if g.kind == GateKind::CX { mc } else { 0 };
            for j in (0..d).filter(|j| j & mt == 0 && j & mc == want) {
                v.swap(j, j | mt);
            }
        }
        GateKind::CRY => {
            let (mc, mt) = (1 << q[0], 1 << q[1]);
            let (s, c) = (g.angle / 2.0).sin_cos();
            for j in (0..d).filter(|j| j & mt == 0 && j & mc != 0) {
                ry_pair(v, j, j | mt, c, s);
            }
        }
        GateKind::CCRY => {
            let mc = (1 << q[0]) | (1 << q[1]);
            let mt = 1 << q[2];
            let (s, c) = (g.angle / 2.0).sin_cos();
            for j in (0..d).filter(|j| j & mt == 0 && j & mc == mc) {
                ry_pair(v, j, j | mt, c, s);
            }
        }
        GateKind::SWAP => {
            let (ma, mb) = (1 << q[0], 1 << q[1]);
            for j in (0..d).filter(|j| j & ma != 0 && j & mb == 0) {
                v.swap(j, j ^ ma ^ mb);
            }
        }
        GateKind::Scs2 | GateKind::Scs3 => {
            for h in expand_logical(g) {
                apply_gate(&h, v);
            }
        }
    }
}

/// Gate-by-gate application of a circuit.
pub fn apply(c: &Circuit, v: &StateVector) -> Result<StateVector> {
    if c.n_qubits != v.n_qubits {
        return Err(Error::Dimension { expected: c.n_qubits, got: v.n_qubits });
    }
    let mut out = v.clone();
    for g in &c.gates {
        apply_gate(g, &mut out.amps);
    }
    Ok(out)
}

/// `⟨u|v⟩`.
pub fn overlap(u: &StateVector, v: &StateVector) -> Result<C64> {
    if u.dim() != v.dim() {
        return Err(Error::Dimension { expected: u.dim(), got: v.dim() });
    }
    Ok(linalg::dot(&u.amps, &v.amps))
}

/// `|⟨u|v⟩|²`.
pub fn fidelity(u: &StateVector, v: &StateVector) -> Result<f64> {
    Ok(overlap(u, v)?.norm_sqr())
}

/// `⟨v|A|v⟩`.
pub fn expectation(a: &PauliSum, v: &StateVector) -> Result<C64> {
    let av = pauli_matvec(a, &v.amps)?;
    Ok(linalg::dot(&v.amps, &av))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionMode {
    Exact,
    Trotter1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermOrder {
    /// Sorted by (weight, z mask, x mask).
    CanonicalSorted,
    /// Storage order of the sum.
    AsParsed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub mode: EvolutionMode,
    pub term_order: TermOrder,
}

impl EvolutionConfig {
    pub fn new(dt: f64, n_steps: usize, mode: EvolutionMode) -> Self {
        EvolutionConfig { dt, n_steps, mode, term_order: TermOrder::CanonicalSorted }
    }
}

/// Cached Hamiltonian for repeated evolution.
pub struct Evolver {
    pub n_qubits: usize,
    sparse: SparseOp,
    terms: Vec<(PauliString, f64)>,
    pub krylov: KrylovConfig,
}

impl Evolver {
    pub fn new(h: &PauliSum, order: TermOrder) -> Result<Self> {
        if !h.is_hermitian(1e-12) {
            return Err(Error::domain("Hamiltonian is not Hermitian"));
        }
        let raw = match order {
            TermOrder::CanonicalSorted => h.canonical_terms(),
            TermOrder::AsParsed => h.iter().collect(),
        };
        let terms = raw.into_iter().map(|(p, c)| (p, c.re)).collect();
        Ok(Evolver { n_qubits: h.n_qubits, sparse: SparseOp::from_pauli(h), terms, krylov: KrylovConfig::default() })
    }

    pub fn operator(&self) -> &SparseOp {
        &self.sparse
    }

    pub fn exact(&self, t: f64, v: &StateVector) -> Result<StateVector> {
        self.check(v)?;
        let amps = expm_krylov(&self.sparse, t, &v.amps, self.krylov)?;
        Ok(StateVector { n_qubits: v.n_qubits, amps })
    }

    /// `(Π_k e^{−i h_k dt})^{n_steps} v`.
    pub fn trotter1(&self, dt: f64, n_steps: usize, v: &StateVector) -> Result<StateVector> {
        self.check(v)?;
        let mut out = v.clone();
        for _ in 0..n_steps {
            for (p, c) in &self.terms {
                apply_pauli_exp(p, c * dt, &mut out.amps);
            }
        }
        Ok(out)
    }

    pub fn evolve(&self, cfg: &EvolutionConfig, v: &StateVector) -> Result<StateVector> {
        match cfg.mode {
            EvolutionMode::Exact => self.exact(cfg.dt * cfg.n_steps as f64, v),
            EvolutionMode::Trotter1 => self.trotter1(cfg.dt, cfg.n_steps, v),
        }
    }

    fn check(&self, v: &StateVector) -> Result<()> {
        if v.n_qubits != self.n_qubits {
            return Err(Error::Dimension { expected: self.n_qubits, got: v.n_qubits });
        }
        Ok(())
    }
}

/// `e^{−iθP} v = cos θ v − i sin θ P v` for a Hermitian Pauli string `P`.
pub fn apply_pauli_exp(p: &PauliString, theta: f64, v: &mut [C64]) {
    let (s, c) = theta.sin_cos();
    let mis = C64::new(0.0, -s);
    if p.x_mask == 0 {
        for (j, a) in v.iter_mut().enumerate() {
            let (ph, _) = p.apply_basis(j as u64);
            *a *= c + mis * ph;
        }
        return;
    }
    let hi = 63 - p.x_mask.leading_zeros();
    for j in 0..v.len() as u64 {
        if j >> hi & 1 == 1 {
            continue;
        }
        let (pj, k) = p.apply_basis(j);
        let (pk, _) = p.apply_basis(k);
        let (aj, ak) = (v[j as usize], v[k as usize]);
        // (P v)_k = pj·v_j and (P v)_j = pk·v_k
        v[j as usize] = aj * c + mis * pk * ak;
        v[k as usize] = ak * c + mis * pj * aj;
    }
}

/// `e^{−iHt} v` by a Krylov exponential.
pub fn evolve_exact(h: &PauliSum, t: f64, v: &StateVector) -> Result<StateVector> {
    Evolver::new(h, TermOrder::CanonicalSorted)?.exact(t, v)
}

/// First-order Trotter product repeated `cfg.n_steps` times with step `cfg.dt`.
pub fn evolve_trotter1(h: &PauliSum, cfg: &EvolutionConfig, v: &StateVector) -> Result<StateVector> {
    Evolver::new(h, cfg.term_order)?.trotter1(cfg.dt, cfg.n_steps, v)
}

/// Computational-basis measurement counts from `shots` draws of a seeded ChaCha8 stream.
///
/// The same seed and state always give the same counts.
pub fn sample_counts(v: &StateVector, shots: usize, seed: u64) -> Result<BTreeMap<u64, usize>> {
    let total = v.norm().powi(2);
    if !(total > 0.0) {
        return Err(Error::numerical("zero-norm state"));
    }
    let mut cdf = Vec::with_capacity(v.dim());
    let mut acc = 0.0;
    for a in &v.amps {
        acc += a.norm_sqr() / total;
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * acc;
        let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        *counts.entry(k as u64).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Applies any [`LinOp`] to a state.
pub fn apply_op(op: &dyn LinOp, v: &StateVector) -> StateVector {
    let mut out = vec![ZERO; v.dim()];
    op.apply(&v.amps, &mut out);
    StateVector { n_qubits: v.n_qubits, amps: out }
}
