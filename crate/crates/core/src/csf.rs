//! Analytic spin eigenfunctions as explicit determinant expansions.
//!
//! Spin patterns are `N`-bit integers, bit `i` set when site `i` carries α.
//! Nothing here touches circuits; these states are the oracle the circuits are tested against.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::StateVector;

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Spin-space state of `n_sites` spin-1/2 sites.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinState {
    pub n_sites: usize,
    pub amplitudes: BTreeMap<u64, f64>,
    pub s: f64,
    pub ms: f64,
}

impl SpinState {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a * a).sum()
    }

    pub fn support(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, pattern: u64) -> f64 {
        self.amplitudes.get(&pattern).copied().unwrap_or(0.0)
    }

    pub fn inner(&self, other: &SpinState) -> f64 {
        self.amplitudes.iter().map(|(k, a)| a * other.amplitude(*k)).sum()
    }

    /// Parses a pattern such as `"aabb"` (site 0 first).
    pub fn pattern(s: &str) -> u64 {
        s.chars().enumerate().filter(|(_, c)| matches!(c, 'a' | 'α')).map(|(i, _)| 1u64 << i).sum()
    }
}

/// Equal-weight superposition of all `n`-bit strings of weight `k`, as `(bits, amplitude)`.
pub fn dicke(n: usize, k: usize) -> Vec<(u64, f64)> {
    let amp = 1.0 / (binomial(n as u64, k as u64) as f64).sqrt();
    (0..1u64 << n).filter(|b| b.count_ones() as usize == k).map(|b| (b, amp)).collect()
}

fn check_even(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::domain(format!("open-shell count must be even and at least 2, got {n}")));
    }
    if n > 32 {
        return Err(Error::domain("open-shell count above 32 unsupported"));
    }
    Ok(())
}

/// Two maximal-spin halves coupled to a singlet: `Σ_m (−1)^{s−m}|s,m⟩|s,−m⟩/√(n+1)`.
///
/// The `|α…αβ…β⟩` coefficient is positive.
pub fn singlet_coupled(n_sites: usize) -> Result<SpinState> {
    check_even(n_sites)?;
    let n = n_sites / 2;
    let norm = 1.0 / ((n + 1) as f64).sqrt();
    let mut amplitudes = BTreeMap::new();
    for l in 0..=n {
        // left half carries l α spins, right half n − l
        let sign = if (n - l).is_multiple_of(2) { 1.0 } else { -1.0 };
        for (left, a) in dicke(n, l) {
            for (right, b) in dicke(n, n - l) {
                amplitudes.insert(left | right << n, sign * norm * a * b);
            }
        }
    }
    Ok(SpinState { n_sites, amplitudes, s: 0.0, ms: 0.0 })
}

/// `[(|αβ⟩ − |βα⟩)/√2]^{⊗N/2}` over site pairs `(2k, 2k+1)`.
pub fn bell_product(n_sites: usize) -> Result<SpinState> {
    check_even(n_sites)?;
    let pairs = n_sites / 2;
    let amp = 0.5f64.powf(pairs as f64 / 2.0);
    let mut amplitudes = BTreeMap::new();
    for choice in 0..1u64 << pairs {
        let mut bits = 0u64;
        let mut sign = 1.0;
        for k in 0..pairs {
            if choice >> k & 1 == 0 {
                bits |= 1 << (2 * k);
            } else {
                bits |= 1 << (2 * k + 1);
                sign = -sign;
            }
        }
        amplitudes.insert(bits, sign * amp);
    }
    Ok(SpinState { n_sites, amplitudes, s: 0.0, ms: 0.0 })
}

/// Maximal-spin component `|S=n/2, M⟩` of `n` sites, `M = k − n/2`.
pub fn high_spin(n: usize, k: usize) -> SpinState {
    SpinState {
        n_sites: n,
        amplitudes: dicke(n, k).into_iter().collect(),
        s: n as f64 / 2.0,
        ms: k as f64 - n as f64 / 2.0,
    }
}

/// Coupling pattern of a CSF.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Coupling {
    /// Two maximal-spin halves coupled to a singlet.
    SingletHalves,
    /// Product of two-site singlets.
    BellPairs,
}

impl TryFrom<u8> for Coupling {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Coupling::SingletHalves),
            2 => Ok(Coupling::BellPairs),
            _ => Err(format!("unknown coupling pattern {v}")),
        }
    }
}

impl From<Coupling> for u8 {
    fn from(c: Coupling) -> u8 {
        match c {
            Coupling::SingletHalves => 1,
            Coupling::BellPairs => 2,
        }
    }
}

impl std::str::FromStr for Coupling {
    type Err = Error;
    /// Accepts `1`, `2`, `pattern1` or `pattern2`.
    fn from_str(s: &str) -> Result<Self> {
        let digits = s.strip_prefix("pattern").unwrap_or(s);
        digits.parse::<u8>().ok().and_then(|v| Coupling::try_from(v).ok()).ok_or(Error::config(format!("unknown coupling pattern {s}")))
    }
}

/// Which spatial orbitals are doubly occupied and which are spin-coupled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsfSpec {
    pub closed: Vec<usize>,
    pub open: Vec<usize>,
    pub coupling: Coupling,
    pub n_spatial: usize,
}

impl CsfSpec {
    pub fn validate(&self) -> Result<()> {
        let mut all: Vec<usize> = self.closed.iter().chain(&self.open).copied().collect();
        if all.iter().any(|&i| i >= self.n_spatial) {
            return Err(Error::domain("orbital index out of range"));
        }
        all.sort_unstable();
        let len = all.len();
        all.dedup();
        if all.len() != len {
            return Err(Error::domain("closed and open orbital lists collide"));
        }
        if !self.open.is_empty() && !self.open.len().is_multiple_of(2) {
            return Err(Error::domain("open-shell count must be even"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: CsfSpec = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        s.validate()?;
        Ok(s)
    }

    pub fn spin_state(&self) -> Result<Option<SpinState>> {
        if self.open.is_empty() {
            return Ok(None);
        }
        Ok(Some(match self.coupling {
            Coupling::SingletHalves => singlet_coupled(self.open.len())?,
            Coupling::BellPairs => bell_product(self.open.len())?,
        }))
    }

    pub fn n_electrons(&self) -> usize {
        2 * self.closed.len() + self.open.len()
    }
}

/// Determinant expansion of the Fock-space embedding, `(bits, amplitude)`.
pub fn embed_fock_sparse(spec: &CsfSpec, spin: Option<&SpinState>) -> Result<Vec<(u64, f64)>> {
    spec.validate()?;
    if 2 * spec.n_spatial > 64 {
        return Err(Error::domain("at most 32 spatial orbitals"));
    }
    let core: u64 = spec.closed.iter().map(|&i| 0b11u64 << (2 * i)).sum();
    let Some(spin) = spin else {
        if !spec.open.is_empty() {
            return Err(Error::domain("open shells need a spin state"));
        }
        return Ok(vec![(core, 1.0)]);
    };
    if spin.n_sites != spec.open.len() {
        return Err(Error::domain("spin-state size differs from open-shell count"));
    }
    Ok(spin
        .amplitudes
        .iter()
        .map(|(&pat, &a)| {
            let bits = spec
                .open
                .iter()
                .enumerate()
                .map(|(site, &o)| if pat >> site & 1 == 1 { 1u64 << (2 * o) } else { 1u64 << (2 * o + 1) })
                .sum::<u64>();
            (core | bits, a)
        })
        .collect())
}

/// Dense embedding on `2·n_spatial` qubits: closed 11, α 10, β 01, virtual 00.
pub fn embed_fock(spec: &CsfSpec, spin: Option<&SpinState>, n_spatial: usize) -> Result<StateVector> {
    if n_spatial != spec.n_spatial {
        return Err(Error::domain("n_spatial differs from the spec"));
    }
    if n_spatial > 12 {
        return Err(Error::domain("dense embedding limited to 12 spatial orbitals"));
    }
    let mut sv = StateVector { n_qubits: 2 * n_spatial, amps: vec![C64::new(0.0, 0.0); 1 << (2 * n_spatial)] };
    for (bits, a) in embed_fock_sparse(spec, spin)? {
        sv.amps[bits as usize] = C64::new(a, 0.0);
    }
    Ok(sv)
}

/// Squared overlap of the two-determinant proxy `(|αⁿβⁿ⟩ + |βⁿαⁿ⟩)/√2` with the singlet-coupled state.
pub fn proxy_overlap(n_sites: usize) -> Result<f64> {
    check_even(n_sites)?;
    Ok(4.0 / (n_sites as f64 + 2.0))
}

/// The proxy state itself.
pub fn proxy_state(n_sites: usize) -> Result<SpinState> {
    check_even(n_sites)?;
    let n = n_sites / 2;
    let left = (1u64 << n) - 1;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Ok(SpinState {
        n_sites,
        amplitudes: [(left, r), (left << n, r)].into_iter().collect(),
        s: 0.0,
        ms: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> u64 {
        SpinState::pattern(s)
    }

    #[test]
    fn two_site_singlet() {
        let s = singlet_coupled(2).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitude(p("ab")) - r).abs() < 1e-15);
        assert!((s.amplitude(p("ba")) + r).abs() < 1e-15);
        let b = bell_product(2).unwrap();
        assert!((s.inner(&b) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn four_site_singlet() {
        let s = singlet_coupled(4).unwrap();
        let a = 1.0 / 3f64.sqrt();
        let b = -1.0 / (2.0 * 3f64.sqrt());
        assert!((s.amplitude(p("aabb")) - a).abs() < 1e-15);
        assert!((s.amplitude(p("bbaa")) - a).abs() < 1e-15);
        for c in ["abab", "abba", "baab", "baba"] {
            assert!((s.amplitude(p(c)) - b).abs() < 1e-15, "{c}");
        }
        assert_eq!(s.support(), 6);
    }

    #[test]
    fn six_site_singlet() {
        let s = singlet_coupled(6).unwrap();
        assert_eq!(s.support(), 20);
        assert!((s.amplitude(p("aaabbb")) - 0.5).abs() < 1e-15);
        assert!((s.amplitude(p("bbbaaa")) + 0.5).abs() < 1e-15);
        assert!((s.amplitude(p("aababb")) + 1.0 / 6.0).abs() < 1e-15);
        assert!((s.amplitude(p("abbaab")) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn four_site_bell_product() {
        let s = bell_product(4).unwrap();
        assert_eq!(s.support(), 4);
        assert!((s.amplitude(p("abab")) - 0.5).abs() < 1e-15);
        assert!((s.amplitude(p("abba")) + 0.5).abs() < 1e-15);
        assert!((s.amplitude(p("baab")) + 0.5).abs() < 1e-15);
        assert!((s.amplitude(p("baba")) - 0.5).abs() < 1e-15);
        assert_eq!(bell_product(8).unwrap().support(), 16);
    }

    #[test]
    fn quartet_component() {
        let q = high_spin(3, 2);
        let a = 1.0 / 3f64.sqrt();
        for c in ["aab", "aba", "baa"] {
            assert!((q.amplitude(p(c)) - a).abs() < 1e-15);
        }
    }

    #[test]
    fn odd_counts_rejected() {
        assert!(singlet_coupled(3).is_err());
        assert!(bell_product(5).is_err());
    }

    #[test]
    fn embedding_examples() {
        let rhf = CsfSpec { closed: vec![0, 1, 2], open: vec![], coupling: Coupling::SingletHalves, n_spatial: 6 };
        let v = embed_fock(&rhf, None, 6).unwrap();
        assert_eq!(v.amps[0b111111].re, 1.0);
        let two = CsfSpec { closed: vec![0, 1], open: vec![2, 3], coupling: Coupling::SingletHalves, n_spatial: 6 };
        let s = singlet_coupled(2).unwrap();
        let v = embed_fock(&two, Some(&s), 6).unwrap();
        let ab = crate::pauli::Determinant::parse_compact("22ab00").unwrap().bits as usize;
        let ba = crate::pauli::Determinant::parse_compact("22ba00").unwrap().bits as usize;
        assert!((v.amps[ab].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((v.amps[ba].re + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let empty = CsfSpec { closed: vec![], open: vec![], coupling: Coupling::SingletHalves, n_spatial: 2 };
        assert_eq!(embed_fock(&empty, None, 2).unwrap().amps[0].re, 1.0);
        let clash = CsfSpec { closed: vec![1], open: vec![1, 2], coupling: Coupling::SingletHalves, n_spatial: 3 };
        assert!(embed_fock(&clash, Some(&s), 3).is_err());
    }

    #[test]
    fn proxy_overlaps() {
        assert_eq!(proxy_overlap(6).unwrap(), 0.5);
        assert_eq!(proxy_overlap(2).unwrap(), 1.0);
        let o = singlet_coupled(8).unwrap();
        let f = proxy_state(8).unwrap().inner(&o).powi(2);
        assert!((f - 0.4).abs() < 1e-14);
        assert!((proxy_overlap(8).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn spec_json() {
        let s = CsfSpec::from_json(r#"{"closed":[0],"open":[1,2],"coupling":1,"n_spatial":4}"#).unwrap();
        assert_eq!(s.coupling, Coupling::SingletHalves);
        assert!(CsfSpec::from_json(r#"{"closed":[0],"open":[1,2],"coupling":3,"n_spatial":4}"#).is_err());
    }
}
