//! Closed-form cost calculators.
//!
//! `N` is the open-shell electron count, `n = N/2` the size of one Dicke register.
//! Every CNOT formula here is cross-checked against counted circuits in the tests.

use serde::Serialize;

use crate::csf::binomial;
use crate::error::{Error, Result};

/// Default total state-preparation error.
pub const DEFAULT_EPS: f64 = 1e-7;

fn check_even(n: u64) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::domain(format!("electron count must be even and at least 2, got {n}")));
    }
    Ok(())
}

/// CNOTs of the symmetric-state unitary `S_n`: `(5n² − 9n + 4)/2`.
pub fn dicke_cnots(n: u64) -> u64 {
    if n < 2 {
        return 0;
    }
    (5 * n * n + 4 - 9 * n) / 2
}

/// Two- and three-qubit block counts of `S_n`.
pub fn dicke_blocks(n: u64) -> (u64, u64) {
    if n < 2 {
        return (0, 0);
    }
    (n - 1, (n - 1) * (n - 2) / 2)
}

pub fn dicke_rotations(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

pub fn input_cnots_all(big_n: u64) -> u64 {
    3 * big_n / 2 - 2
}

/// Nearest-neighbour expansion of the mirrored CNOT accordion.
pub fn accordion_cnots(big_n: u64) -> u64 {
    big_n * big_n / 2 - 1
}

pub fn input_cnots_linear(big_n: u64) -> u64 {
    (big_n - 2) + accordion_cnots(big_n)
}

pub fn map_cnots_all(big_n: u64) -> u64 {
    big_n
}

pub fn map_cnots_linear(big_n: u64) -> u64 {
    4 * big_n * big_n - 4 * big_n
}

/// Per-connectivity CNOT totals for one spin-coupled CSF.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CnotCosts {
    pub all: u64,
    pub planar: u64,
    pub linear: u64,
    /// `C_all + 3N`, the swap-based layout that also supports left/right rotations.
    pub planar_swap_layout: u64,
}

/// `N = 2` takes the geminal route.
pub fn csf_cnot_costs(big_n: u64) -> Result<CnotCosts> {
    check_even(big_n)?;
    if big_n == 2 {
        return Ok(CnotCosts { all: 3, planar: 3, linear: 5, planar_swap_layout: 3 });
    }
    let s = 2 * dicke_cnots(big_n / 2);
    let all = s + input_cnots_all(big_n) + map_cnots_all(big_n);
    Ok(CnotCosts {
        all,
        planar: s + input_cnots_linear(big_n) + map_cnots_all(big_n),
        linear: s + input_cnots_linear(big_n) + map_cnots_linear(big_n),
        planar_swap_layout: all + 3 * big_n,
    })
}

/// Logical rotations in the CSF circuit, `N²/4`; zero on the Clifford-only `N = 2` route.
pub fn rotation_count(big_n: u64) -> Result<u64> {
    check_even(big_n)?;
    Ok(if big_n == 2 { 0 } else { big_n * big_n / 4 })
}

/// Binary-angle digits with the random-walk halving: `⌈½·log₂(R/ε)⌉`.
pub fn angle_bits(r: u64, eps: f64) -> Option<u32> {
    (r > 0).then(|| (0.5 * (r as f64 / eps).log2()).ceil() as u32)
}

/// Toffolis for `r` synthesized rotations: `⌈R(0.575·b + 4.6)⌉`.
pub fn toffoli_from_rotations(r: u64, eps: f64) -> u64 {
    match angle_bits(r, eps) {
        None => 0,
        Some(b) => (r as f64 * (0.575 * b as f64 + 4.6)).ceil() as u64,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ToffoliCount {
    pub rotations: u64,
    pub bits: Option<u32>,
    pub toffoli: u64,
}

pub fn toffoli_count(big_n: u64, eps: f64) -> Result<ToffoliCount> {
    if !(eps > 0.0) {
        return Err(Error::domain("eps must be positive"));
    }
    let r = rotation_count(big_n)?;
    Ok(ToffoliCount { rotations: r, bits: angle_bits(r, eps), toffoli: toffoli_from_rotations(r, eps) })
}

/// Determinants in the spin-coupled expansion, `C(N, N/2)`.
pub fn determinant_count(big_n: u64) -> u64 {
    binomial(big_n, big_n / 2)
}

/// One row of the CSF cost table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    pub n: u64,
    pub c_all: u64,
    pub c_planar: u64,
    pub c_linear: u64,
    pub c_planar_swap_layout: u64,
    pub rotations: u64,
    pub bits: Option<u32>,
    pub toffoli: u64,
    pub determinants: u64,
}

pub fn cost_report(big_n: u64, eps: f64) -> Result<CostReport> {
    let c = csf_cnot_costs(big_n)?;
    let t = toffoli_count(big_n, eps)?;
    Ok(CostReport {
        n: big_n,
        c_all: c.all,
        c_planar: c.planar,
        c_linear: c.linear,
        c_planar_swap_layout: c.planar_swap_layout,
        rotations: t.rotations,
        bits: t.bits,
        toffoli: t.toffoli,
        determinants: determinant_count(big_n),
    })
}

/// MPS-preparation Toffolis `(M − 1)χ[32χ + (b + 1)log₂(4χ)]`.
pub fn mps_toffoli(m: u64, chi: u64, b: u64) -> Result<f64> {
    if m < 2 || chi < 1 {
        return Err(Error::domain("need at least two sites and bond dimension one"));
    }
    let chi_f = chi as f64;
    Ok((m - 1) as f64 * chi_f * (32.0 * chi_f + (b + 1) as f64 * (4.0 * chi_f).log2()))
}

/// Rounds to three significant figures.
pub fn sig3(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let e = x.abs().log10().floor() as i32 - 2;
    let scale = 10f64.powi(e);
    (x / scale).round() * scale
}

/// Clean-qubit sparse preparation of `L` determinants: `(2 log L − 2)L + 2^{log L + 1} + L`, real log₂.
pub fn sparse_prep_toffoli(l: f64) -> f64 {
    let lg = l.log2();
    (2.0 * lg - 2.0) * l + 2f64.powf(lg + 1.0) + l
}

/// Leading term `(2⌈log₂ L⌉ − 2)L` alone.
pub fn sparse_prep_leading(l: f64) -> f64 {
    (2.0 * l.log2().ceil() - 2.0) * l
}

pub fn geminal_cnots_all(big_n: u64) -> u64 {
    3 * big_n / 2
}

pub fn geminal_cnots_linear(big_n: u64) -> u64 {
    5 * big_n / 2
}

/// Extra CNOTs to control a CSF circuit on one ancilla.
pub fn controlled_overhead(big_n: u64) -> u64 {
    5 * big_n / 2 + 2
}

/// Tabulated Givens cost for spin-orbital distance `d`.
pub fn givens_cnots_formula(d: u64) -> u64 {
    match d {
        0 => 0,
        1 | 2 => 2,
        _ => 2 * d + 1,
    }
}

/// Givens cost as synthesized here: 2 when adjacent, otherwise `2d`.
pub fn givens_cnots_circuit(d: u64) -> u64 {
    match d {
        0 => 0,
        1 => 2,
        _ => 2 * d,
    }
}

/// Rotating `N` spin-orbitals pairwise: `2N·C_pq`.
pub fn basis_rotation_cnots(big_n: u64, c_pq: u64) -> u64 {
    2 * big_n * c_pq
}

/// Named auxiliary costs for reporting.
pub fn auxiliary_costs(big_n: u64) -> Result<Vec<(&'static str, u64)>> {
    check_even(big_n)?;
    let mut v = vec![
        ("geminal_all", geminal_cnots_all(big_n)),
        ("geminal_linear", geminal_cnots_linear(big_n)),
        ("controlled_overhead", controlled_overhead(big_n)),
        ("basis_rotation_cpq2", basis_rotation_cnots(big_n, 2)),
        ("map_all", map_cnots_all(big_n)),
        ("map_linear", map_cnots_linear(big_n)),
        ("accordion_linear", accordion_cnots(big_n)),
    ];
    if big_n >= 4 {
        v.push(("input_all", input_cnots_all(big_n)));
        v.push(("input_linear", input_cnots_linear(big_n)));
        v.push(("dicke_half", dicke_cnots(big_n / 2)));
    }
    Ok(v)
}

/// The cost-table rows shipped with the CLI: `(N, χ, b)`.
pub const MPS_ROWS: [(u64, u64, u64); 9] = [
    (10, 10, 34),
    (10, 50, 37),
    (10, 2000, 43),
    (18, 10, 35),
    (18, 50, 37),
    (18, 2000, 44),
    (34, 10, 36),
    (34, 50, 38),
    (34, 2000, 44),
];

pub const TABLE_NS: [u64; 8] = [2, 4, 6, 8, 10, 12, 18, 34];

pub fn cost_table_markdown(eps: f64) -> Result<String> {
    let mut s = String::from("| N | C_all | C_pla | C_lin | b | T | L |\n|---|---|---|---|---|---|---|\n");
    for n in TABLE_NS {
        let r = cost_report(n, eps)?;
        let b = r.bits.map_or("-".to_string(), |b| b.to_string());
        s += &format!("| {} | {} | {} | {} | {} | {} | {} |\n", n, r.c_all, r.c_planar, r.c_linear, b, r.toffoli, r.determinants);
    }
    Ok(s)
}

pub fn mps_table_markdown() -> Result<String> {
    let mut s = String::from("| N | chi | b | T_MPS |\n|---|---|---|---|\n");
    for (m, chi, b) in MPS_ROWS {
        s += &format!("| {} | {} | {} | {:.2e} |\n", m, chi, b, sig3(mps_toffoli(m, chi, b)?));
    }
    Ok(s)
}

/// CSV rows `N,C_all,C_pla,C_lin,R,b,T,L`; `b` is empty when no rotations are needed.
pub fn cost_csv(ns: &[u64], eps: f64) -> Result<String> {
    let mut s = String::from("N,C_all,C_pla,C_lin,R,b,T,L\n");
    for &n in ns {
        let r = cost_report(n, eps)?;
        let b = r.bits.map_or(String::new(), |b| b.to_string());
        s += &format!("{},{},{},{},{},{},{},{}\n", n, r.c_all, r.c_planar, r.c_linear, r.rotations, b, r.toffoli, r.determinants);
    }
    Ok(s)
}

/// CSV rows `N,chi,b,T_MPS` with the value rounded to three significant figures.
pub fn mps_csv() -> Result<String> {
    let mut s = String::from("N,chi,b,T_MPS\n");
    for (m, chi, b) in MPS_ROWS {
        s += &format!("{},{},{},{:.2e}\n", m, chi, b, sig3(mps_toffoli(m, chi, b)?));
    }
    Ok(s)
}
