//! Determinants, Pauli-string algebra, Jordan–Wigner mapping and spin operators.
//!
//! Conventions used everywhere in the crate:
//! * qubit `q` is bit `q` of a basis index, so qubit 0 is the least significant bit;
//! * spin-orbitals are interleaved, qubit `2i` is `iα` and qubit `2i+1` is `iβ`;
//! * Jordan–Wigner parity strings run over qubits with lower index.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Coefficients with magnitude below this are dropped by [`PauliSum::simplify`].
pub const SIMPLIFY_TOL: f64 = 1e-14;

const I_POW: [C64; 4] = [
    C64::new(1.0, 0.0),
    C64::new(0.0, 1.0),
    C64::new(-1.0, 0.0),
    C64::new(0.0, -1.0),
];

/// Occupation of one spatial orbital in compact notation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Occ {
    Empty,
    Alpha,
    Beta,
    Double,
}

impl Occ {
    fn bits(self) -> (u64, u64) {
        match self {
            Occ::Empty => (0, 0),
            Occ::Alpha => (1, 0),
            Occ::Beta => (0, 1),
            Occ::Double => (1, 1),
        }
    }
}

/// Bit-encoded spin-orbital occupation vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Determinant {
    pub bits: u64,
}

impl Determinant {
    pub fn new(bits: u64) -> Self {
        Determinant { bits }
    }

    /// Builds a determinant from per-spatial-orbital occupations.
    pub fn from_occupations(occ: &[Occ]) -> Self {
        let mut bits = 0u64;
        for (i, o) in occ.iter().enumerate() {
            let (a, b) = o.bits();
            bits |= a << (2 * i) | b << (2 * i + 1);
        }
        Determinant { bits }
    }

    /// Parses compact notation such as `"22ab00"` (`a`/`α` alpha, `b`/`β` beta).
    pub fn parse_compact(s: &str) -> Result<Self> {
        let occ = s
            .chars()
            .map(|c| match c {
                '0' => Ok(Occ::Empty),
                '2' => Ok(Occ::Double),
                'a' | 'α' => Ok(Occ::Alpha),
                'b' | 'β' => Ok(Occ::Beta),
                other => Err(Error::domain(format!("bad occupation symbol {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_occupations(&occ))
    }

    pub fn occupation(&self, spatial: usize) -> Occ {
        match (self.bits >> (2 * spatial) & 1, self.bits >> (2 * spatial + 1) & 1) {
            (0, 0) => Occ::Empty,
            (1, 0) => Occ::Alpha,
            (0, 1) => Occ::Beta,
            _ => Occ::Double,
        }
    }

    pub fn n_electrons(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Twice the spin projection, `n_α − n_β`.
    pub fn ms2(&self) -> i32 {
        let a = (self.bits & 0x5555_5555_5555_5555).count_ones() as i32;
        let b = (self.bits & 0xAAAA_AAAA_AAAA_AAAA).count_ones() as i32;
        a - b
    }

    pub fn compact(&self, n_spatial: usize) -> String {
        (0..n_spatial)
            .map(|i| match self.occupation(i) {
                Occ::Empty => '0',
                Occ::Alpha => 'a',
                Occ::Beta => 'b',
                Occ::Double => '2',
            })
            .collect()
    }
}

/// A Pauli operator `i^phase · Π_q σ(x_q, z_q)` with `σ(1,0)=X`, `σ(0,1)=Z`, `σ(1,1)=Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub x_mask: u64,
    pub z_mask: u64,
    /// Power of `i`, always in `0..4`.
    pub phase: u8,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x_mask: 0, z_mask: 0, phase: 0 };

    pub fn new(x_mask: u64, z_mask: u64) -> Self {
        PauliString { x_mask, z_mask, phase: 0 }
    }

    pub fn x(q: usize) -> Self {
        Self::new(1 << q, 0)
    }

    pub fn y(q: usize) -> Self {
        Self::new(1 << q, 1 << q)
    }

    pub fn z(q: usize) -> Self {
        Self::new(0, 1 << q)
    }

    /// Parses a dense label such as `"XIZY"` where character `q` acts on qubit `q`.
    pub fn from_label(label: &str) -> Result<Self> {
        let mut p = Self::IDENTITY;
        for (q, c) in label.chars().enumerate() {
            match c {
                'I' => {}
                'X' => p.x_mask |= 1 << q,
                'Z' => p.z_mask |= 1 << q,
                'Y' => {
                    p.x_mask |= 1 << q;
                    p.z_mask |= 1 << q;
                }
                other => return Err(Error::domain(format!("bad Pauli symbol {other:?}"))),
            }
        }
        Ok(p)
    }

    pub fn label(&self, n_qubits: usize) -> String {
        (0..n_qubits)
            .map(|q| match (self.x_mask >> q & 1, self.z_mask >> q & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => 'Y',
            })
            .collect()
    }

    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    pub fn phase_factor(&self) -> C64 {
        I_POW[self.phase as usize]
    }

    /// Exact product `self · other`.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        let x = self.x_mask ^ other.x_mask;
        let z = self.z_mask ^ other.z_mask;
        // σ(x,z) = i^{|x∧z|} X^x Z^z and Z^z1 X^x2 = (−1)^{|z1∧x2|} X^x2 Z^z1.
        let y1 = (self.x_mask & self.z_mask).count_ones() as i64;
        let y2 = (other.x_mask & other.z_mask).count_ones() as i64;
        let y3 = (x & z).count_ones() as i64;
        let swap = 2 * (self.z_mask & other.x_mask).count_ones() as i64;
        let p = self.phase as i64 + other.phase as i64 + y1 + y2 - y3 + swap;
        PauliString { x_mask: x, z_mask: z, phase: p.rem_euclid(4) as u8 }
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        ((self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones()).is_multiple_of(2)
    }

    /// Amplitude and target index of `P|j⟩`.
    #[inline]
    pub fn apply_basis(&self, j: u64) -> (C64, u64) {
        let ny = (self.x_mask & self.z_mask).count_ones() as u8;
        let sign = (self.z_mask & j).count_ones() & 1;
        let p = (self.phase + ny + 2 * sign as u8) % 4;
        (I_POW[p as usize], j ^ self.x_mask)
    }

    /// Canonical Trotter ordering key: weight, then z mask, then x mask.
    pub fn canonical_key(&self) -> (u32, u64, u64) {
        (self.weight(), self.z_mask, self.x_mask)
    }
}

/// Weighted sum of phase-normalized Pauli strings.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    pub n_qubits: usize,
    /// Keyed by `(x_mask, z_mask)`; every string has phase 0, so keys are Hermitian Paulis.
    pub terms: BTreeMap<(u64, u64), C64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        PauliSum { n_qubits, terms: BTreeMap::new() }
    }

    pub fn identity(n_qubits: usize, c: f64) -> Self {
        let mut s = Self::zero(n_qubits);
        s.add_term(PauliString::IDENTITY, C64::new(c, 0.0));
        s
    }

    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = (PauliString, C64)>) -> Self {
        let mut s = Self::zero(n_qubits);
        for (p, c) in terms {
            s.add_term(p, c);
        }
        s
    }

    pub fn add_term(&mut self, p: PauliString, c: C64) {
        *self.terms.entry((p.x_mask, p.z_mask)).or_insert(C64::new(0.0, 0.0)) += c * p.phase_factor();
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PauliString, C64)> + '_ {
        self.terms.iter().map(|(&(x, z), &c)| (PauliString::new(x, z), c))
    }

    pub fn coeff(&self, p: &PauliString) -> C64 {
        self.terms.get(&(p.x_mask, p.z_mask)).copied().unwrap_or_default() * p.phase_factor().conj()
    }

    /// Drops coefficients with magnitude below `tol`.
    pub fn simplify(mut self, tol: f64) -> Self {
        self.terms.retain(|_, c| c.norm() >= tol);
        self
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut s = self.clone();
        for v in s.terms.values_mut() {
            *v *= c;
        }
        s
    }

    pub fn add(&self, other: &PauliSum) -> Self {
        let mut s = self.clone();
        s.n_qubits = s.n_qubits.max(other.n_qubits);
        for (&k, &c) in &other.terms {
            *s.terms.entry(k).or_insert(C64::new(0.0, 0.0)) += c;
        }
        s.simplify(SIMPLIFY_TOL)
    }

    pub fn sub(&self, other: &PauliSum) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &PauliSum) -> Self {
        let mut s = Self::zero(self.n_qubits.max(other.n_qubits));
        for (p, a) in self.iter() {
            for (q, b) in other.iter() {
                s.add_term(p.mul(&q), a * b);
            }
        }
        s.simplify(SIMPLIFY_TOL)
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &PauliSum) -> Self {
        let mut s = Self::zero(self.n_qubits.max(other.n_qubits));
        for (p, a) in self.iter() {
            for (q, b) in other.iter() {
                if !p.commutes(&q) {
                    s.add_term(p.mul(&q), a * b * 2.0);
                }
            }
        }
        s.simplify(SIMPLIFY_TOL)
    }

    pub fn adjoint(&self) -> Self {
        let mut s = self.clone();
        for v in s.terms.values_mut() {
            *v = v.conj();
        }
        s
    }

    /// Every coefficient of a phase-normalized Hermitian sum is real.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// Sum of absolute coefficients, an upper bound on the spectral norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Terms sorted by [`PauliString::canonical_key`].
    pub fn canonical_terms(&self) -> Vec<(PauliString, C64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_by_key(|(p, _)| p.canonical_key());
        v
    }

    /// Dense matrix in row-major order (test oracle; small sizes only).
    pub fn to_dense(&self) -> Vec<C64> {
        let d = 1usize << self.n_qubits;
        let mut m = vec![C64::new(0.0, 0.0); d * d];
        for (p, c) in self.iter() {
            for j in 0..d as u64 {
                let (a, i) = p.apply_basis(j);
                m[i as usize * d + j as usize] += c * a;
            }
        }
        m
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, c) in self.iter() {
            writeln!(f, "{:+.12e}{:+.12e}i {}", c.re, c.im, p.label(self.n_qubits))?;
        }
        Ok(())
    }
}

/// `y = A v` applied string by string through bit masks.
pub fn pauli_matvec(sum: &PauliSum, v: &[C64]) -> Result<Vec<C64>> {
    let d = 1usize << sum.n_qubits;
    if v.len() != d {
        return Err(Error::Dimension { expected: d, got: v.len() });
    }
    let mut y = vec![C64::new(0.0, 0.0); d];
    for (p, c) in sum.iter() {
        for (j, &vj) in v.iter().enumerate() {
            if vj.re == 0.0 && vj.im == 0.0 {
                continue;
            }
            let (a, i) = p.apply_basis(j as u64);
            y[i as usize] += c * a * vj;
        }
    }
    Ok(y)
}

/// Single creation or annihilation operator on a spin-orbital.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

pub fn cre(mode: usize) -> Ladder {
    Ladder { mode, dagger: true }
}

pub fn ann(mode: usize) -> Ladder {
    Ladder { mode, dagger: false }
}

/// Polynomial in ladder operators; each term is a coefficient times an ordered product.
#[derive(Clone, Debug, Default)]
pub struct FermionOp {
    pub terms: Vec<(C64, Vec<Ladder>)>,
}

impl FermionOp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity(c: f64) -> Self {
        FermionOp { terms: vec![(C64::new(c, 0.0), Vec::new())] }
    }

    pub fn term(mut self, c: f64, ops: &[Ladder]) -> Self {
        self.terms.push((C64::new(c, 0.0), ops.to_vec()));
        self
    }

    pub fn push(&mut self, c: C64, ops: Vec<Ladder>) {
        self.terms.push((c, ops));
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> Self {
        FermionOp {
            terms: self
                .terms
                .iter()
                .map(|(c, ops)| {
                    (c.conj(), ops.iter().rev().map(|l| Ladder { mode: l.mode, dagger: !l.dagger }).collect())
                })
                .collect(),
        }
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.terms.iter().flat_map(|(_, o)| o.iter().map(|l| l.mode)).max()
    }

    /// Applies the operator to a single determinant; returns `(amplitude, det)` pairs.
    pub fn apply_det(&self, j: u64) -> Vec<(C64, u64)> {
        let mut out = Vec::new();
        'term: for (c, ops) in &self.terms {
            let mut bits = j;
            let mut sign = 1.0;
            for l in ops.iter().rev() {
                let occ = bits >> l.mode & 1 == 1;
                if occ == l.dagger {
                    continue 'term;
                }
                if (bits & ((1u64 << l.mode) - 1)).count_ones() % 2 == 1 {
                    sign = -sign;
                }
                bits ^= 1 << l.mode;
            }
            out.push((c * sign, bits));
        }
        out
    }
}

fn jw_ladder(l: Ladder) -> PauliSum {
    let parity = (1u64 << l.mode) - 1;
    let x = PauliString::new(1 << l.mode, parity);
    let y = PauliString::new(1 << l.mode, parity | 1 << l.mode);
    // a = Z_<p (X + iY)/2, a† = Z_<p (X − iY)/2
    let s = if l.dagger { -0.5 } else { 0.5 };
    PauliSum::from_terms(l.mode + 1, [(x, C64::new(0.5, 0.0)), (y, C64::new(0.0, s))])
}

/// Exact qubit image of a fermionic polynomial on `n_qubits` spin-orbitals.
pub fn jordan_wigner(op: &FermionOp, n_qubits: usize) -> Result<PauliSum> {
    if let Some(m) = op.max_mode() {
        if m >= n_qubits {
            return Err(Error::config(format!("mode {m} out of range for {n_qubits} qubits")));
        }
    }
    let mut total = PauliSum::zero(n_qubits);
    for (c, ops) in &op.terms {
        let mut prod = PauliSum::identity(n_qubits, 1.0);
        for &l in ops {
            prod = prod.mul(&jw_ladder(l));
            if prod.is_empty() {
                break;
            }
        }
        for (p, a) in prod.iter() {
            total.add_term(p, a * c);
        }
    }
    total.n_qubits = n_qubits;
    Ok(total.simplify(SIMPLIFY_TOL))
}

/// Fermionic `Ŝ_z`, `Ŝ_+`, `Ŝ_−` and `N̂` on `n_spatial` orbitals.
pub fn spin_fermion_ops(n_spatial: usize) -> (FermionOp, FermionOp, FermionOp, FermionOp) {
    let mut sz = FermionOp::new();
    let mut sp = FermionOp::new();
    let mut number = FermionOp::new();
    for i in 0..n_spatial {
        let (a, b) = (2 * i, 2 * i + 1);
        sz = sz.term(0.5, &[cre(a), ann(a)]).term(-0.5, &[cre(b), ann(b)]);
        sp = sp.term(1.0, &[cre(a), ann(b)]);
        number = number.term(1.0, &[cre(a), ann(a)]).term(1.0, &[cre(b), ann(b)]);
    }
    let sm = sp.adjoint();
    (sz, sp, sm, number)
}

/// Qubit images of `(Ŝ², Ŝ_z, N̂)` with `Ŝ² = Ŝ_−Ŝ_+ + Ŝ_z(Ŝ_z + 1)`.
pub fn spin_operators(n_spatial: usize) -> Result<(PauliSum, PauliSum, PauliSum)> {
    if n_spatial == 0 || 2 * n_spatial > 64 {
        return Err(Error::domain("n_spatial must be in 1..=32"));
    }
    let q = 2 * n_spatial;
    let (sz, sp, sm, number) = spin_fermion_ops(n_spatial);
    let sz = jordan_wigner(&sz, q)?;
    let sp = jordan_wigner(&sp, q)?;
    let sm = jordan_wigner(&sm, q)?;
    let n = jordan_wigner(&number, q)?;
    let s2 = sm.mul(&sp).add(&sz.mul(&sz.add(&PauliSum::identity(q, 1.0))));
    Ok((s2, sz, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx_sum(a: &PauliSum, b: &PauliSum, tol: f64) -> bool {
        a.sub(b).simplify(tol).is_empty()
    }

    #[test]
    fn number_operator_image() {
        let op = FermionOp::new().term(1.0, &[cre(1), ann(1)]);
        let s = jordan_wigner(&op, 3).unwrap();
        let want = PauliSum::from_terms(3, [(PauliString::IDENTITY, C64::new(0.5, 0.0)), (PauliString::z(1), C64::new(-0.5, 0.0))]);
        assert!(approx_sum(&s, &want, 1e-14));
    }

    #[test]
    fn hopping_image() {
        let op = FermionOp::new().term(1.0, &[cre(0), ann(1)]).term(1.0, &[cre(1), ann(0)]);
        let s = jordan_wigner(&op, 2).unwrap();
        let want = PauliSum::from_terms(
            2,
            [(PauliString::from_label("XX").unwrap(), C64::new(0.5, 0.0)), (PauliString::from_label("YY").unwrap(), C64::new(0.5, 0.0))],
        );
        assert!(approx_sum(&s, &want, 1e-14));
    }

    #[test]
    fn identity_image() {
        let s = jordan_wigner(&FermionOp::identity(1.0), 4).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.coeff(&PauliString::IDENTITY), C64::new(1.0, 0.0));
    }

    #[test]
    fn out_of_range_mode() {
        let op = FermionOp::new().term(1.0, &[cre(4)]);
        assert!(matches!(jordan_wigner(&op, 4), Err(Error::Config(_))));
    }

    #[test]
    fn compact_notation() {
        let d = Determinant::parse_compact("222000").unwrap();
        assert_eq!(d.bits, 0b111111);
        let d = Determinant::parse_compact("ab").unwrap();
        assert_eq!(d.bits, 0b1001);
        assert_eq!(d.compact(2), "ab");
        assert_eq!(d.ms2(), 0);
    }

    #[test]
    fn y_is_i_x_z() {
        let xz = PauliString::x(0).mul(&PauliString::z(0));
        // XZ = −iY
        assert_eq!((xz.x_mask, xz.z_mask, xz.phase), (1, 1, 3));
        let yy = PauliString::y(2).mul(&PauliString::y(2));
        assert_eq!(yy, PauliString::IDENTITY);
    }

    #[test]
    fn spin_of_closed_shell_and_high_spin() {
        let (s2, sz, n) = spin_operators(3).unwrap();
        let rhf = Determinant::parse_compact("222").unwrap().bits;
        let quartet = Determinant::parse_compact("aaa").unwrap().bits;
        let diag = |op: &PauliSum, j: u64| {
            op.iter().filter(|(p, _)| p.x_mask == 0).map(|(p, c)| c * p.apply_basis(j).0).sum::<C64>().re
        };
        assert!(diag(&s2, rhf).abs() < 1e-12);
        assert!((diag(&s2, quartet) - 3.75).abs() < 1e-12);
        assert!((diag(&sz, quartet) - 1.5).abs() < 1e-12);
        assert!(diag(&n, 0).abs() < 1e-14);
    }
}
