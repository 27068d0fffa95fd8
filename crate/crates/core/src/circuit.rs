//! Gate set, circuit container, connectivity models, decomposition and gate counting.

use std::collections::VecDeque;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    X,
    H,
    RY,
    CX,
    /// Target flipped when the control is |0⟩.
    CXbar,
    CRY,
    CCRY,
    SWAP,
    /// Two-qubit Dicke block `(a, b)`; see [`scs2_expansion`].
    Scs2,
    /// Three-qubit Dicke block `(x, y, z)`; see [`scs3_expansion`].
    Scs3,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::X | GateKind::H | GateKind::RY => 1,
            GateKind::CX | GateKind::CXbar | GateKind::CRY | GateKind::SWAP | GateKind::Scs2 => 2,
            GateKind::CCRY | GateKind::Scs3 => 3,
        }
    }

    pub fn has_angle(self) -> bool {
        matches!(self, GateKind::RY | GateKind::CRY | GateKind::CCRY | GateKind::Scs2 | GateKind::Scs3)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::H => "H",
            GateKind::RY => "RY",
            GateKind::CX => "CX",
            GateKind::CXbar => "CXBAR",
            GateKind::CRY => "CRY",
            GateKind::CCRY => "CCRY",
            GateKind::SWAP => "SWAP",
            GateKind::Scs2 => "SCS2",
            GateKind::Scs3 => "SCS3",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s.to_ascii_uppercase().as_str() {
            "X" => GateKind::X,
            "H" => GateKind::H,
            "RY" => GateKind::RY,
            "CX" | "CNOT" => GateKind::CX,
            "CXBAR" => GateKind::CXbar,
            "CRY" => GateKind::CRY,
            "CCRY" => GateKind::CCRY,
            "SWAP" => GateKind::SWAP,
            "SCS2" => GateKind::Scs2,
            "SCS3" => GateKind::Scs3,
            _ => return None,
        })
    }
}

/// One gate. Controls precede the target in `qubits`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub angle: f64,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize], angle: f64) -> Self {
        assert_eq!(qubits.len(), kind.arity(), "arity mismatch for {}", kind.name());
        Gate { kind, qubits: qubits.to_vec(), angle }
    }

    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, &[q], 0.0)
    }

    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, &[q], 0.0)
    }

    pub fn ry(q: usize, theta: f64) -> Self {
        Self::new(GateKind::RY, &[q], theta)
    }

    pub fn cx(c: usize, t: usize) -> Self {
        Self::new(GateKind::CX, &[c, t], 0.0)
    }

    pub fn cxbar(c: usize, t: usize) -> Self {
        Self::new(GateKind::CXbar, &[c, t], 0.0)
    }

    pub fn cry(c: usize, t: usize, theta: f64) -> Self {
        Self::new(GateKind::CRY, &[c, t], theta)
    }

    pub fn ccry(c1: usize, c2: usize, t: usize, theta: f64) -> Self {
        Self::new(GateKind::CCRY, &[c1, c2, t], theta)
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::new(GateKind::SWAP, &[a, b], 0.0)
    }

    pub fn scs2(a: usize, b: usize, theta: f64) -> Self {
        Self::new(GateKind::Scs2, &[a, b], theta)
    }

    pub fn scs3(x: usize, y: usize, z: usize, theta: f64) -> Self {
        Self::new(GateKind::Scs3, &[x, y, z], theta)
    }

    /// Inverse gate.
    pub fn inverse(&self) -> Vec<Gate> {
        match self.kind {
            GateKind::RY | GateKind::CRY | GateKind::CCRY => vec![Gate { angle: -self.angle, ..self.clone() }],
            GateKind::Scs2 | GateKind::Scs3 => expand_logical(self).iter().rev().flat_map(|g| g.inverse()).collect(),
            _ => vec![self.clone()],
        }
    }

    /// True for rotations counted by the fault-tolerant accounting.
    pub fn is_logical_rotation(&self) -> bool {
        match self.kind {
            GateKind::RY => !is_clifford_angle(self.angle),
            GateKind::CRY | GateKind::CCRY | GateKind::Scs2 | GateKind::Scs3 => true,
            _ => false,
        }
    }
}

fn is_clifford_angle(theta: f64) -> bool {
    let k = theta / FRAC_PI_2;
    (k - k.round()).abs() < 1e-12
}

/// Qubit topology with placement of logical qubits on physical sites.
#[derive(Clone, Debug, PartialEq)]
pub enum Connectivity {
    All,
    /// `position[q]` is the line position of qubit `q`.
    Linear { position: Vec<usize> },
    /// `place[q]` is the `(row, col)` cell of qubit `q`.
    Planar { rows: usize, cols: usize, place: Vec<(usize, usize)> },
}

impl Connectivity {
    pub fn linear_identity(n: usize) -> Self {
        Connectivity::Linear { position: (0..n).collect() }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Connectivity::All => "all",
            Connectivity::Linear { .. } => "linear",
            Connectivity::Planar { .. } => "planar",
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        match self {
            Connectivity::All => Ok(()),
            Connectivity::Linear { position } => {
                if position.len() < n_qubits {
                    return Err(Error::config("linear placement does not cover every qubit"));
                }
                let mut seen = position.clone();
                seen.sort_unstable();
                seen.dedup();
                if seen.len() != position.len() {
                    return Err(Error::config("linear placement is not injective"));
                }
                Ok(())
            }
            Connectivity::Planar { rows, cols, place } => {
                if place.len() < n_qubits {
                    return Err(Error::config("planar placement missing for some qubits"));
                }
                if place.iter().any(|&(r, c)| r >= *rows || c >= *cols) {
                    return Err(Error::config("planar placement outside the grid"));
                }
                let mut seen = place.clone();
                seen.sort_unstable();
                seen.dedup();
                if seen.len() != place.len() {
                    return Err(Error::config("planar placement is not injective"));
                }
                Ok(())
            }
        }
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        match self {
            Connectivity::All => a != b,
            Connectivity::Linear { position } => position[a].abs_diff(position[b]) == 1,
            Connectivity::Planar { place, .. } => {
                let (ra, ca) = place[a];
                let (rb, cb) = place[b];
                ra.abs_diff(rb) + ca.abs_diff(cb) == 1
            }
        }
    }

    fn neighbours(&self, q: usize) -> Vec<usize> {
        let n = match self {
            Connectivity::All => return Vec::new(),
            Connectivity::Linear { position } => position.len(),
            Connectivity::Planar { place, .. } => place.len(),
        };
        (0..n).filter(|&o| o != q && self.adjacent(q, o)).collect()
    }

    /// Shortest path of qubits from `a` to `b` (inclusive), by breadth-first search.
    pub fn path(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        if let Connectivity::All = self {
            return Ok(vec![a, b]);
        }
        let n = match self {
            Connectivity::Linear { position } => position.len(),
            Connectivity::Planar { place, .. } => place.len(),
            Connectivity::All => unreachable!(),
        };
        let mut prev = vec![usize::MAX; n];
        prev[a] = a;
        let mut queue = VecDeque::from([a]);
        while let Some(q) = queue.pop_front() {
            if q == b {
                break;
            }
            for o in self.neighbours(q) {
                if prev[o] == usize::MAX {
                    prev[o] = q;
                    queue.push_back(o);
                }
            }
        }
        if prev[b] == usize::MAX {
            return Err(Error::config(format!("qubits {a} and {b} are disconnected")));
        }
        let mut p = vec![b];
        while *p.last().unwrap() != a {
            p.push(prev[*p.last().unwrap()]);
        }
        p.reverse();
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub connectivity: Connectivity,
}

/// Exact gate statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct GateCounts {
    pub cnot: usize,
    pub rotation: usize,
    pub depth: usize,
    pub toffoli_equivalent: u64,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: Vec::new(), connectivity: Connectivity::All }
    }

    pub fn push(&mut self, g: Gate) {
        debug_assert!(g.qubits.iter().all(|&q| q < self.n_qubits));
        self.gates.push(g);
    }

    pub fn extend(&mut self, other: &Circuit) {
        self.gates.extend(other.gates.iter().cloned());
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            if g.qubits.len() != g.kind.arity() {
                return Err(Error::domain(format!("arity mismatch for {}", g.kind.name())));
            }
            if g.qubits.iter().any(|&q| q >= self.n_qubits) {
                return Err(Error::domain(format!("qubit index out of range in {}", g.kind.name())));
            }
            let mut qs = g.qubits.clone();
            qs.sort_unstable();
            qs.dedup();
            if qs.len() != g.qubits.len() {
                return Err(Error::domain(format!("repeated qubit in {}", g.kind.name())));
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().flat_map(|g| g.inverse()).collect(),
            connectivity: self.connectivity.clone(),
        }
    }

    /// Relabels qubits through `map` into a register of `n_qubits`.
    pub fn remap(&self, map: &[usize], n_qubits: usize) -> Circuit {
        Circuit {
            n_qubits,
            gates: self
                .gates
                .iter()
                .map(|g| Gate { kind: g.kind, qubits: g.qubits.iter().map(|&q| map[q]).collect(), angle: g.angle })
                .collect(),
            connectivity: Connectivity::All,
        }
    }

    pub fn count(&self) -> GateCounts {
        count(self)
    }

    /// Serializes to the one-gate-per-line text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# qubits {}", self.n_qubits);
        for g in &self.gates {
            s.push_str(g.kind.name());
            for q in &g.qubits {
                let _ = write!(s, " {q}");
            }
            if g.kind.has_angle() {
                let _ = write!(s, " {}", fmt_g17(g.angle));
            }
            s.push('\n');
        }
        s
    }

    /// Parses the text format; `# qubits N` fixes the register size, otherwise it is inferred.
    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut n_declared = None;
        let mut gates = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix('#') {
                let mut it = comment.split_whitespace();
                if it.next() == Some("qubits") {
                    let n = it.next().and_then(|v| v.parse().ok()).ok_or(Error::Parse { line: line_no, msg: "bad qubit count".into() })?;
                    n_declared = Some(n);
                }
                continue;
            }
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let kind = GateKind::from_name(toks[0]).ok_or(Error::Parse { line: line_no, msg: format!("unknown gate {}", toks[0]) })?;
            let need = kind.arity() + kind.has_angle() as usize;
            if toks.len() - 1 != need {
                return Err(Error::Parse { line: line_no, msg: format!("{} expects {need} fields", kind.name()) });
            }
            let qubits = toks[1..=kind.arity()]
                .iter()
                .map(|t| t.parse::<usize>().map_err(|_| Error::Parse { line: line_no, msg: format!("bad qubit index {t}") }))
                .collect::<Result<Vec<_>>>()?;
            let angle = if kind.has_angle() {
                let t = toks[kind.arity() + 1];
                t.parse::<f64>().map_err(|_| Error::Parse { line: line_no, msg: format!("bad angle {t}") })?
            } else {
                0.0
            };
            gates.push(Gate { kind, qubits, angle });
        }
        let inferred = gates.iter().flat_map(|g| g.qubits.iter().map(|q| q + 1)).max().unwrap_or(0);
        let n_qubits = n_declared.unwrap_or(inferred);
        let c = Circuit { n_qubits, gates, connectivity: Connectivity::All };
        c.validate()?;
        Ok(c)
    }

    /// Dense unitary, row-major, for at most 12 qubits.
    pub fn unitary(&self) -> Result<Vec<C64>> {
        unitary(self)
    }
}

/// `%.17g`-style formatting: 17 significant digits, trailing zeros stripped.
pub fn fmt_g17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let m = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        format!("{m}e{exp}")
    }
}

/// Exact counts by traversal; depth by greedy layering with every gate one step.
pub fn count(c: &Circuit) -> GateCounts {
    let mut level = vec![0usize; c.n_qubits];
    let mut depth = 0;
    let mut cnot = 0;
    let mut rotation = 0;
    for g in &c.gates {
        let l = g.qubits.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
        for &q in &g.qubits {
            level[q] = l;
        }
        depth = depth.max(l);
        if matches!(g.kind, GateKind::CX | GateKind::CXbar) {
            cnot += 1;
        }
        if g.is_logical_rotation() {
            rotation += 1;
        }
    }
    let toffoli_equivalent = crate::resources::toffoli_from_rotations(rotation as u64, crate::resources::DEFAULT_EPS);
    GateCounts { cnot, rotation, depth, toffoli_equivalent }
}

/// `CX(a→b) RY_a(φ) CX(b→a) RY_a(−φ) CX(a→b)` with `φ = π/2 − θ/2`.
///
/// Acts as `CX·CRY(b→a, θ)·CX` on inputs `|ab⟩ ∈ {00, 01, 11}`.
pub fn scs2_expansion(a: usize, b: usize, theta: f64) -> Vec<Gate> {
    let phi = FRAC_PI_2 - theta / 2.0;
    vec![Gate::cx(a, b), Gate::ry(a, phi), Gate::cx(b, a), Gate::ry(a, -phi), Gate::cx(a, b)]
}

/// Five-CNOT three-qubit block with `β = π/2 − θ/4`, `γ = θ/4`.
///
/// Acts as `CX(x→z)·CCRY(z,y→x, θ)·CX(x→z)` on inputs `|xyz⟩ ∈ {000, 001, 010, 011, 111}`.
pub fn scs3_expansion(x: usize, y: usize, z: usize, theta: f64) -> Vec<Gate> {
    let beta = FRAC_PI_2 - theta / 4.0;
    let gamma = theta / 4.0;
    vec![
        Gate::cx(x, z),
        Gate::ry(x, beta),
        Gate::cx(y, x),
        Gate::ry(x, gamma),
        Gate::cx(z, x),
        Gate::ry(x, -gamma),
        Gate::cx(y, x),
        Gate::ry(x, -beta),
        Gate::cx(x, z),
    ]
}

/// Expansion of one gate into `{X, H, RY, CX}` ignoring topology.
pub fn expand_logical(g: &Gate) -> Vec<Gate> {
    let q = &g.qubits;
    match g.kind {
        GateKind::X | GateKind::H | GateKind::RY | GateKind::CX => vec![g.clone()],
        GateKind::CXbar => vec![Gate::x(q[0]), Gate::cx(q[0], q[1]), Gate::x(q[0])],
        GateKind::SWAP => vec![Gate::cx(q[0], q[1]), Gate::cx(q[1], q[0]), Gate::cx(q[0], q[1])],
        GateKind::CRY => vec![
            Gate::ry(q[1], g.angle / 2.0),
            Gate::cx(q[0], q[1]),
            Gate::ry(q[1], -g.angle / 2.0),
            Gate::cx(q[0], q[1]),
        ],
        GateKind::CCRY => {
            // uniformly controlled rotation with angles (0, 0, 0, θ)
            let a = g.angle / 4.0;
            vec![
                Gate::ry(q[2], a),
                Gate::cx(q[0], q[2]),
                Gate::ry(q[2], -a),
                Gate::cx(q[1], q[2]),
                Gate::ry(q[2], a),
                Gate::cx(q[0], q[2]),
                Gate::ry(q[2], -a),
                Gate::cx(q[1], q[2]),
            ]
        }
        GateKind::Scs2 => scs2_expansion(q[0], q[1], g.angle),
        GateKind::Scs3 => scs3_expansion(q[0], q[1], q[2], g.angle),
    }
}

/// Options for [`decompose_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct DecomposeOptions {
    /// The circuit is only ever applied to |0…0⟩; qubits not yet touched may serve as clean scratch.
    pub assume_zero_input: bool,
}

/// Decomposition into `{X, H, RY, CX}` with every CX on adjacent qubits of `target`.
pub fn decompose(c: &Circuit, target: &Connectivity) -> Result<Circuit> {
    decompose_with(c, target, DecomposeOptions::default())
}

pub fn decompose_with(c: &Circuit, target: &Connectivity, opts: DecomposeOptions) -> Result<Circuit> {
    target.validate(c.n_qubits)?;
    c.validate()?;
    let logical: Vec<Gate> = c.gates.iter().flat_map(expand_logical).collect();
    let mut out = Circuit { n_qubits: c.n_qubits, gates: Vec::new(), connectivity: target.clone() };
    let mut touched = vec![false; c.n_qubits];
    let mut i = 0;
    while i < logical.len() {
        let g = &logical[i];
        if g.kind != GateKind::CX || target.adjacent(g.qubits[0], g.qubits[1]) {
            for &q in &g.qubits {
                touched[q] = true;
            }
            out.gates.push(g.clone());
            i += 1;
            continue;
        }
        let (a, b) = (g.qubits[0], g.qubits[1]);
        let path = target.path(a, b)?;
        if let Some(k) = match_accordion(&logical[i..], &path, target) {
            out.gates.extend(accordion(&path));
            for &q in &path {
                touched[q] = true;
            }
            i += k;
            continue;
        }
        let mid = &path[1..path.len() - 1];
        if opts.assume_zero_input && mid.iter().all(|&m| !touched[m]) {
            out.gates.extend(clean_bridge(&path));
        } else {
            out.gates.extend(bridge(&path));
        }
        touched[a] = true;
        touched[b] = true;
        i += 1;
    }
    Ok(out)
}

/// Number of leading gates of `gates` forming the accordion `Π_i CX(p_i → p_{L−i})` on `path`.
fn match_accordion(gates: &[Gate], path: &[usize], topo: &Connectivity) -> Option<usize> {
    let len = path.len();
    if len < 4 || !len.is_multiple_of(2) {
        return None;
    }
    let k = len / 2;
    if gates.len() < k {
        return None;
    }
    // every consecutive path pair must be a straight nearest-neighbour chain
    if !path.windows(2).all(|w| topo.adjacent(w[0], w[1])) {
        return None;
    }
    let mut want: Vec<(usize, usize)> = (0..k).map(|i| (path[i], path[len - 1 - i])).collect();
    for g in &gates[..k] {
        if g.kind != GateKind::CX {
            return None;
        }
        let pair = (g.qubits[0], g.qubits[1]);
        let pos = want.iter().position(|&w| w == pair)?;
        want.swap_remove(pos);
    }
    Some(k)
}

/// Nearest-neighbour accordion on a path of even length `L+1`, `L²/2 − 1` gates for `L+1 = N`.
pub fn accordion(path: &[usize]) -> Vec<Gate> {
    accordion_positions(0, path.len() - 1).into_iter().map(|(i, j)| Gate::cx(path[i], path[j])).collect()
}

fn accordion_positions(a: usize, b: usize) -> Vec<(usize, usize)> {
    if b == a + 1 {
        return vec![(a, b)];
    }
    let inner = accordion_positions(a + 1, b - 1);
    let m = b - 1 - (a + 1);
    let ylen = 2 * m - 1;
    // the inner chain-up ends with (b−2, b−1); the new pair (b−1, b) slots in right after it
    let idx = inner.len() - ylen + (m - 1);
    let mut seq: Vec<(usize, usize)> = inner[..idx].to_vec();
    seq.push((b - 1, b));
    seq.extend_from_slice(&inner[idx..]);
    seq.extend((a..b).map(|k| (k, k + 1)));
    seq.extend((a..b - 1).rev().map(|k| (k, k + 1)));
    seq
}

/// Exact distant CX along `path` with `4(d−1)` nearest-neighbour CNOTs.
pub fn bridge(path: &[usize]) -> Vec<Gate> {
    let d = path.len() - 1;
    if d == 1 {
        return vec![Gate::cx(path[0], path[1])];
    }
    let up = |lo: usize| -> Vec<Gate> { (lo..d - 1).map(|k| Gate::cx(path[k], path[k + 1])).collect() };
    let mut out = Vec::new();
    for lo in [0, 1] {
        let ladder = up(lo);
        out.extend(ladder.iter().cloned());
        out.push(Gate::cx(path[d - 1], path[d]));
        out.extend(ladder.iter().rev().cloned());
    }
    out
}

/// Distant CX through intermediate qubits known to be |0⟩, `2d − 1` CNOTs.
pub fn clean_bridge(path: &[usize]) -> Vec<Gate> {
    let d = path.len() - 1;
    let mut out: Vec<Gate> = (0..d).map(|k| Gate::cx(path[k], path[k + 1])).collect();
    out.extend((0..d - 1).rev().map(|k| Gate::cx(path[k], path[k + 1])));
    out
}

pub fn unitary(c: &Circuit) -> Result<Vec<C64>> {
    if c.n_qubits > 12 {
        return Err(Error::domain("unitary limited to 12 qubits"));
    }
    let d = 1usize << c.n_qubits;
    let mut u = vec![C64::new(0.0, 0.0); d * d];
    let mut v = vec![C64::new(0.0, 0.0); d];
    for j in 0..d {
        v.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        v[j] = C64::new(1.0, 0.0);
        for g in &c.gates {
            crate::sim::apply_gate(g, &mut v);
        }
        for i in 0..d {
            u[i * d + j] = v[i];
        }
    }
    Ok(u)
}
