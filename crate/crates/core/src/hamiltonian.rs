//! FCIDUMP ingestion, second-quantized Hamiltonian assembly and adiabatic paths.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, eigh, matvec, SectorBasis, SparseOp};
use crate::sim::StateVector;
use crate::pauli::{ann, cre, jordan_wigner, spin_operators, FermionOp, PauliString, PauliSum};

/// One- and two-electron integrals over spatial orbitals, chemists' notation.
#[derive(Clone, Debug, PartialEq)]
pub struct MolecularIntegrals {
    pub n_orb: usize,
    pub n_elec: usize,
    pub ms2: i32,
    pub e_core: f64,
    /// Row-major `n_orb × n_orb`.
    pub h1: Vec<f64>,
    /// `(ij|kl)` at `((i·n + j)·n + k)·n + l`.
    pub g2: Vec<f64>,
}

impl MolecularIntegrals {
    pub fn zeros(n_orb: usize, n_elec: usize, ms2: i32) -> Self {
        MolecularIntegrals { n_orb, n_elec, ms2, e_core: 0.0, h1: vec![0.0; n_orb * n_orb], g2: vec![0.0; n_orb.pow(4)] }
    }

    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.h1[i * self.n_orb + j]
    }

    pub fn g(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n_orb;
        self.g2[((i * n + j) * n + k) * n + l]
    }

    pub fn set_h(&mut self, i: usize, j: usize, v: f64) {
        let n = self.n_orb;
        self.h1[i * n + j] = v;
        self.h1[j * n + i] = v;
    }

    /// Sets all eight permutation partners of `(ij|kl)`.
    pub fn set_g(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let n = self.n_orb;
        for (a, b, c, d) in g_perms(i, j, k, l) {
            self.g2[((a * n + b) * n + c) * n + d] = v;
        }
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_orb
    }

    /// Largest deviation from the 8-fold and one-body symmetries.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n_orb;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.h(i, j) - self.h(j, i)).abs());
                for k in 0..n {
                    for l in 0..n {
                        let v = self.g(i, j, k, l);
                        for (a, b, c, d) in g_perms(i, j, k, l) {
                            worst = worst.max((self.g(a, b, c, d) - v).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    /// `E_core + Σ h_pq a†_p a_q + ½ Σ (pq|rs) a†_p a†_r a_s a_q` over interleaved spin-orbitals.
    pub fn fermion_operator(&self) -> FermionOp {
        let n = self.n_orb;
        let mut op = FermionOp::identity(self.e_core);
        for p in 0..n {
            for q in 0..n {
                let h = self.h(p, q);
                if h != 0.0 {
                    for s in 0..2 {
                        op.push(C64::new(h, 0.0), vec![cre(2 * p + s), ann(2 * q + s)]);
                    }
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let g = self.g(p, q, r, s);
                        if g == 0.0 {
                            continue;
                        }
                        for sa in 0..2 {
                            for sb in 0..2 {
                                let (pp, qq, rr, ss) = (2 * p + sa, 2 * q + sa, 2 * r + sb, 2 * s + sb);
                                if pp == rr || qq == ss {
                                    continue;
                                }
                                op.push(C64::new(0.5 * g, 0.0), vec![cre(pp), cre(rr), ann(ss), ann(qq)]);
                            }
                        }
                    }
                }
            }
        }
        op
    }

    /// Dense Hamiltonian in the fixed-`N`, fixed-`2M_S` sector.
    pub fn sector_matrix(&self, basis: &SectorBasis) -> DMatrix<C64> {
        basis.restrict_fermion(&self.fermion_operator())
    }

    pub fn sector_basis(&self) -> SectorBasis {
        SectorBasis::new(self.n_qubits(), self.n_elec as u32, Some(self.ms2))
    }
}

fn g_perms(i: usize, j: usize, k: usize, l: usize) -> [(usize, usize, usize, usize); 8] {
    [(i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k), (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i)]
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.replace(['D', 'd'], "e").parse::<f64>().map_err(|_| parse_err(line, format!("non-numeric field {tok}")))
}

/// Parses an FCIDUMP document. Duplicate entries overwrite earlier ones and are logged.
pub fn parse_fcidump(text: &str) -> Result<MolecularIntegrals> {
    let lines: Vec<&str> = text.lines().collect();
    let first = lines.iter().position(|l| !l.trim().is_empty()).ok_or(parse_err(1, "empty input"))?;
    if !lines[first].trim_start().to_ascii_uppercase().starts_with("&FCI") {
        return Err(parse_err(first + 1, "header must start with &FCI"));
    }
    let mut header = String::new();
    let mut body_start = None;
    for (i, raw) in lines.iter().enumerate().skip(first) {
        let up = raw.to_ascii_uppercase();
        let (part, done) = match (up.find("&END"), up.trim() == "/" || up.trim_end().ends_with('/')) {
            (Some(p), _) => (&up[..p], true),
            (None, true) => (up.trim_end().trim_end_matches('/'), true),
            (None, false) => (up.as_str(), false),
        };
        header.push(' ');
        header.push_str(part);
        if done {
            body_start = Some(i + 1);
            break;
        }
    }
    let body_start = body_start.ok_or(parse_err(lines.len(), "header not terminated by &END or /"))?;
    let header = header.replacen("&FCI", "", 1);
    let mut fields: Vec<(String, Vec<String>)> = Vec::new();
    for tok in header.split([',', ' ', '\t']).filter(|t| !t.is_empty()) {
        if let Some((k, v)) = tok.split_once('=') {
            fields.push((k.trim().to_string(), Vec::new()));
            if !v.is_empty() {
                fields.last_mut().unwrap().1.push(v.to_string());
            }
        } else if let Some(f) = fields.last_mut() {
            f.1.push(tok.to_string());
        } else {
            return Err(parse_err(first + 1, format!("unexpected header token {tok}")));
        }
    }
    let get = |key: &str| -> Result<Option<i64>> {
        match fields.iter().find(|(k, _)| k == key) {
            None => Ok(None),
            Some((_, v)) => v
                .first()
                .ok_or(parse_err(first + 1, format!("{key} has no value")))?
                .parse::<i64>()
                .map(Some)
                .map_err(|_| parse_err(first + 1, format!("{key} is not an integer"))),
        }
    };
    let norb = get("NORB")?.ok_or(parse_err(first + 1, "missing NORB"))?;
    let nelec = get("NELEC")?.ok_or(parse_err(first + 1, "missing NELEC"))?;
    let ms2 = get("MS2")?.unwrap_or(0);
    if norb <= 0 || norb > 32 || nelec < 0 || nelec > 2 * norb {
        return Err(parse_err(first + 1, "NORB/NELEC out of range"));
    }
    let n = norb as usize;
    let mut m = MolecularIntegrals::zeros(n, nelec as usize, ms2 as i32);
    let mut seen: HashSet<(usize, usize, usize, usize)> = HashSet::new();
    for (i, raw) in lines.iter().enumerate().skip(body_start) {
        let ln = i + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(parse_err(ln, format!("expected 5 fields, found {}", toks.len())));
        }
        let v = parse_f64(toks[0], ln)?;
        let mut idx = [0usize; 4];
        for (slot, t) in idx.iter_mut().zip(&toks[1..]) {
            let x: usize = t.parse().map_err(|_| parse_err(ln, format!("bad index {t}")))?;
            if x > n {
                return Err(parse_err(ln, format!("index {x} exceeds NORB={n}")));
            }
            *slot = x;
        }
        let key = canonical(idx);
        if !seen.insert(key) {
            log::warn!("FCIDUMP line {ln}: duplicate entry {idx:?} overwrites an earlier value");
        }
        match idx {
            [0, 0, 0, 0] => m.e_core = v,
            [a, b, 0, 0] if a > 0 && b > 0 => m.set_h(a - 1, b - 1, v),
            [a, b, c, d] if a > 0 && b > 0 && c > 0 && d > 0 => m.set_g(a - 1, b - 1, c - 1, d - 1, v),
            _ => return Err(parse_err(ln, format!("invalid index pattern {idx:?}"))),
        }
    }
    Ok(m)
}

fn canonical([i, j, k, l]: [usize; 4]) -> (usize, usize, usize, usize) {
    if k == 0 && l == 0 {
        return (i.max(j), i.min(j), 0, 0);
    }
    g_perms(i, j, k, l).into_iter().max().unwrap()
}

/// Emits unique nonzero entries; values use the shortest round-trip decimal form.
pub fn emit_fcidump(m: &MolecularIntegrals) -> String {
    let n = m.n_orb;
    let mut s = format!(" &FCI NORB={},NELEC={},MS2={},\n  ORBSYM={}\n  ISYM=1,\n &END\n", n, m.n_elec, m.ms2, "1,".repeat(n));
    for i in 0..n {
        for j in 0..=i {
            for k in 0..n {
                for l in 0..=k {
                    if i * (i + 1) / 2 + j < k * (k + 1) / 2 + l {
                        continue;
                    }
                    let v = m.g(i, j, k, l);
                    if v != 0.0 {
                        s += &format!("{} {} {} {} {}\n", v, i + 1, j + 1, k + 1, l + 1);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = m.h(i, j);
            if v != 0.0 {
                s += &format!("{} {} {} 0 0\n", v, i + 1, j + 1);
            }
        }
    }
    s += &format!("{} 0 0 0 0\n", m.e_core);
    s
}

/// Jordan–Wigner image of the molecular Hamiltonian.
pub fn to_qubit_hamiltonian(m: &MolecularIntegrals) -> Result<PauliSum> {
    let h = jordan_wigner(&m.fermion_operator(), m.n_qubits())?;
    Ok(h.simplify(crate::pauli::SIMPLIFY_TOL))
}

/// `Σ_p ε_p (n_pα + n_pβ)`.
pub fn fock_diagonal(orbital_energies: &[f64]) -> PauliSum {
    let nq = 2 * orbital_energies.len();
    let mut h = PauliSum::zero(nq);
    for (p, &e) in orbital_energies.iter().enumerate() {
        for q in [2 * p, 2 * p + 1] {
            // n_q = (I − Z_q)/2
            h.add_term(PauliString::IDENTITY, C64::new(0.5 * e, 0.0));
            h.add_term(PauliString::z(q), C64::new(-0.5 * e, 0.0));
        }
    }
    h.simplify(crate::pauli::SIMPLIFY_TOL)
}

/// Hamiltonian restricted to the fixed-`N`, fixed-`2M_S` sector, with its spectrum.
///
/// Besides the full sector spectrum, the spin-singlet part is kept separately: at long
/// bond lengths a high-spin multiplet can lie below the lowest singlet, and spin-free
/// dynamics started from a singlet can only ever reach the singlet ground space.
#[derive(Clone, Debug)]
pub struct SectorHamiltonian {
    pub basis: SectorBasis,
    pub dense: DMatrix<C64>,
    pub sparse: SparseOp,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<C64>,
    pub s2: DMatrix<C64>,
    pub singlet_values: Vec<f64>,
    pub singlet_vectors: DMatrix<C64>,
}

/// Eigenvalues closer than this are treated as one degenerate level.
pub const DEGENERACY_TOL: f64 = 1e-9;

impl SectorHamiltonian {
    pub fn new(m: &MolecularIntegrals) -> Result<Self> {
        let basis = m.sector_basis();
        let op = m.fermion_operator();
        let dense = basis.restrict_fermion(&op);
        let sparse = basis.sparse_fermion(&op);
        let (eigenvalues, eigenvectors) = eigh(&dense);
        let (s2sum, _, _) = spin_operators(m.n_orb)?;
        let s2 = basis.restrict_pauli(&s2sum);
        let (singlet_values, singlet_vectors) = spin_resolved(&dense, &s2, 0.0, &eigenvalues);
        Ok(SectorHamiltonian { basis, dense, sparse, eigenvalues, eigenvectors, s2, singlet_values, singlet_vectors })
    }

    /// Lowest eigenvalue of the whole sector.
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn singlet_ground_energy(&self) -> f64 {
        self.singlet_values[0]
    }

    /// Orthonormal basis of the degenerate singlet ground space.
    pub fn singlet_ground_space(&self) -> Vec<Vec<C64>> {
        let e0 = self.singlet_values[0];
        (0..self.singlet_values.len())
            .take_while(|&k| self.singlet_values[k] - e0 <= DEGENERACY_TOL)
            .map(|k| self.singlet_vectors.column(k).iter().cloned().collect())
            .collect()
    }

    /// Sector coordinates of a full-register state.
    pub fn project(&self, v: &StateVector) -> Vec<C64> {
        self.basis.project(&v.amps)
    }

    /// Weight of `v` in the singlet ground space.
    pub fn singlet_ground_fidelity(&self, v: &[C64]) -> f64 {
        projector_weight(&self.singlet_ground_space(), v)
    }

    pub fn s2_expectation(&self, v: &[C64]) -> f64 {
        dot(v, &matvec(&self.s2, v)).re / dot(v, v).re
    }
}

/// `⟨v|P|v⟩/⟨v|v⟩` for the projector onto an orthonormal set.
pub fn projector_weight(space: &[Vec<C64>], v: &[C64]) -> f64 {
    space.iter().map(|g| dot(g, v).norm_sqr()).sum::<f64>() / dot(v, v).re
}

/// Eigenpairs of `H` with `⟨S²⟩ = s2`, from `H + μ(S² − s2)²` with `μ` above the spectral width.
pub(crate) fn spin_resolved(h: &DMatrix<C64>, s2: &DMatrix<C64>, target: f64, spectrum: &[f64]) -> (Vec<f64>, DMatrix<C64>) {
    let n = h.nrows();
    let width = spectrum[n - 1] - spectrum[0];
    let shifted = s2 - DMatrix::<C64>::identity(n, n) * C64::new(target, 0.0);
    let penalty = &shifted * &shifted;
    let (vals, vecs) = eigh(&(h + penalty * C64::new(width + 1.0, 0.0)));
    let keep: Vec<usize> = (0..n)
        .filter(|&k| {
            let v = vecs.column(k);
            ((v.adjoint() * s2 * v)[(0, 0)].re - target).abs() < 1e-6
        })
        .collect();
    (keep.iter().map(|&k| vals[k]).collect(), vecs.select_columns(&keep))
}

/// Sidecar metadata shipped with each fixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub fci_energy: f64,
    pub rhf_energy: f64,
    pub orbital_energies: Vec<f64>,
    #[serde(default)]
    pub localization_pairs: Vec<[usize; 2]>,
    #[serde(default)]
    pub bond_length: Option<f64>,
}

/// A parsed fixture with its sidecar.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub integrals: MolecularIntegrals,
    pub sidecar: Sidecar,
}

/// Fixture directory: `SPINFORGE_FIXTURES` if set, otherwise the repository copy.
pub fn fixtures_dir() -> PathBuf {
    std::env::var_os("SPINFORGE_FIXTURES")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"))
}

pub fn load_fcidump(path: &Path) -> Result<MolecularIntegrals> {
    parse_fcidump(&std::fs::read_to_string(path)?)
}

/// Loads `<dir>/<name>.fcidump` and `<dir>/<name>.json`.
pub fn load_fixture(name: &str) -> Result<Fixture> {
    let dir = fixtures_dir();
    let integrals = load_fcidump(&dir.join(format!("{name}.fcidump")))?;
    let text = std::fs::read_to_string(dir.join(format!("{name}.json")))?;
    let sidecar: Sidecar = serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
    if sidecar.orbital_energies.len() != integrals.n_orb {
        return Err(Error::domain("sidecar orbital energies do not match NORB"));
    }
    Ok(Fixture { name: name.to_string(), integrals, sidecar })
}

/// Loads a fixture by name from [`fixtures_dir`], or from an explicit `.fcidump` path whose
/// sidecar shares its stem.
pub fn load_fixture_any(name_or_path: &str) -> Result<Fixture> {
    let p = Path::new(name_or_path);
    if p.extension().is_some_and(|e| e == "fcidump") {
        let integrals = load_fcidump(p)?;
        let text = std::fs::read_to_string(p.with_extension("json"))?;
        let sidecar: Sidecar = serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        let name = p.file_stem().map_or(String::new(), |s| s.to_string_lossy().into_owned());
        return Ok(Fixture { name, integrals, sidecar });
    }
    load_fixture(name_or_path)
}

/// Names of the nitrogen fixtures on the shipped bond-length grid.
pub const N2_GEOMETRIES: [&str; 6] = ["1.09", "1.50", "2.00", "2.50", "3.00", "4.50"];

pub fn n2_fixture_name(r: &str) -> String {
    format!("n2_{r}")
}

/// Linear interpolation `H(s) = (1 − s)H₀ + s·H_F` with `s = t/τ`.
#[derive(Clone, Debug)]
pub struct AspPath {
    pub h0: PauliSum,
    pub hf: PauliSum,
    pub tau: f64,
    pub dt: f64,
}

/// Starting Hamiltonian of an adiabatic path.
pub enum AspStart<'a> {
    Integrals(&'a MolecularIntegrals),
    FockDiagonal(&'a [f64]),
}

impl AspPath {
    pub fn s(&self, t: f64) -> f64 {
        if self.tau <= 0.0 {
            1.0
        } else {
            (t / self.tau).clamp(0.0, 1.0)
        }
    }

    pub fn at(&self, s: f64) -> PauliSum {
        self.h0.scale(C64::new(1.0 - s, 0.0)).add(&self.hf.scale(C64::new(s, 0.0))).simplify(crate::pauli::SIMPLIFY_TOL)
    }

    pub fn n_steps(&self) -> usize {
        (self.tau / self.dt).round() as usize
    }
}

pub fn asp_path(start: AspStart<'_>, end: &MolecularIntegrals, tau: f64, dt: f64) -> Result<AspPath> {
    if !(dt > 0.0) || tau < 0.0 {
        return Err(Error::config("need dt > 0 and tau ≥ 0"));
    }
    let steps = tau / dt;
    if (steps - steps.round()).abs() > 1e-9 {
        return Err(Error::config("tau must be a multiple of dt"));
    }
    let h0 = match start {
        AspStart::Integrals(m) => {
            if m.n_orb != end.n_orb {
                return Err(Error::Dimension { expected: end.n_orb, got: m.n_orb });
            }
            to_qubit_hamiltonian(m)?
        }
        AspStart::FockDiagonal(e) => {
            if e.len() != end.n_orb {
                return Err(Error::Dimension { expected: end.n_orb, got: e.len() });
            }
            fock_diagonal(e)
        }
    };
    Ok(AspPath { h0, hf: to_qubit_hamiltonian(end)?, tau, dt })
}


#[cfg(test)]
mod fixture_tests {
    use super::*;

    #[test]
    fn h2_fixture_reproduces_fci() {
        let f = load_fixture("h2").unwrap();
        assert_eq!((f.integrals.n_orb, f.integrals.n_elec), (2, 2));
        assert!(f.integrals.symmetry_defect() == 0.0);
        let b = f.integrals.sector_basis();
        let (e, _) = eigh(&f.integrals.sector_matrix(&b));
        assert!((e[0] - f.sidecar.fci_energy).abs() < 1e-8, "{} vs {}", e[0], f.sidecar.fci_energy);
        let h = to_qubit_hamiltonian(&f.integrals).unwrap();
        assert!(h.is_hermitian(1e-12));
        let (eq, _) = eigh(&b.restrict_pauli(&h));
        assert!((eq[0] - e[0]).abs() < 1e-10);
    }

    #[test]
    fn emission_round_trips() {
        let f = load_fixture("h4").unwrap();
        let again = parse_fcidump(&emit_fcidump(&f.integrals)).unwrap();
        assert_eq!(again, f.integrals);
    }
}
