//! Nonorthogonal subspace methods: thresholded generalized eigenproblems, real-time
//! Krylov subspaces, nonorthogonal VQE gradients and ADAPT iterate subspaces.
//!
//! Everything here works on plain coordinate vectors and [`LinOp`]s, so the same code
//! runs on the full register or inside a fixed particle-number sector.

use std::io::Write;
use std::sync::{Arc, Mutex};

use argmin::core::{CostFunction, Executor, Gradient, State};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::BFGS;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, eigh, expm_krylov, matvec, norm, KrylovConfig, LinOp, SectorBasis, SparseOp, TimesI, ZERO};
use crate::pauli::{ann, cre, FermionOp};

/// Hamiltonian and overlap matrices over a nonorthogonal basis.
#[derive(Clone, Debug)]
pub struct SubspaceProblem {
    pub h: DMatrix<C64>,
    pub s: DMatrix<C64>,
    pub threshold: f64,
}

/// Eigenpairs of a thresholded generalized problem; `vectors` are basis coefficients.
#[derive(Clone, Debug)]
pub struct GepSolution {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
    pub rank: usize,
}

fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Solves `H v = E S v` in the span of overlap eigenvectors above the threshold.
pub fn solve_gep(p: &SubspaceProblem) -> Result<GepSolution> {
    let m = p.h.nrows();
    if p.h.ncols() != m || p.s.nrows() != m || p.s.ncols() != m {
        return Err(Error::Dimension { expected: m, got: p.s.nrows() });
    }
    let scale = 1.0 + p.h.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if hermitian_defect(&p.h) > 1e-10 * scale || hermitian_defect(&p.s) > 1e-10 {
        return Err(Error::domain("subspace matrices are not Hermitian"));
    }
    let (sv, su) = eigh(&p.s);
    let keep: Vec<usize> = (0..m).filter(|&k| sv[k] > p.threshold).collect();
    if keep.is_empty() {
        return Err(Error::numerical("every overlap eigenvalue is below the threshold"));
    }
    let r = keep.len();
    let mut x = DMatrix::from_element(m, r, ZERO);
    for (c, &k) in keep.iter().enumerate() {
        let f = 1.0 / sv[k].sqrt();
        for i in 0..m {
            x[(i, c)] = su[(i, k)] * f;
        }
    }
    let hp = x.adjoint() * &p.h * &x;
    let hp = (&hp + hp.adjoint()) * C64::new(0.5, 0.0);
    let (values, y) = eigh(&hp);
    Ok(GepSolution { values, vectors: x * y, rank: r })
}

/// `(H_jk, S_jk) = (⟨b_j|H|b_k⟩, ⟨b_j|b_k⟩)` by direct inner products.
pub fn subspace_matrices(h: &dyn LinOp, basis: &[Vec<C64>]) -> (DMatrix<C64>, DMatrix<C64>) {
    let hb: Vec<Vec<C64>> = basis.iter().map(|b| matvec(h, b)).collect();
    let m = basis.len();
    let mut hm = DMatrix::from_element(m, m, ZERO);
    let mut sm = DMatrix::from_element(m, m, ZERO);
    for j in 0..m {
        for k in j..m {
            let s = dot(&basis[j], &basis[k]);
            let e = dot(&basis[j], &hb[k]);
            sm[(j, k)] = s;
            sm[(k, j)] = s.conj();
            hm[(j, k)] = e;
            hm[(k, j)] = e.conj();
        }
    }
    (hm, sm)
}

/// One point of an eigenvalue trace.
#[derive(Clone, Debug, Serialize)]
pub struct TracePoint {
    /// Time steps (real-time runs) or iterations (ADAPT runs).
    pub index: usize,
    pub n_states: usize,
    pub rank: usize,
    pub energies: Vec<f64>,
}

/// Eigenvalue traces, one point per subspace size.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Trace {
    pub points: Vec<TracePoint>,
}

impl Trace {
    /// First index at which every target has a subspace eigenvalue within `tol`.
    pub fn first_reaching(&self, targets: &[f64], tol: f64) -> Option<usize> {
        self.points.iter().find(|p| all_matched(&p.energies, targets, tol)).map(|p| p.index)
    }

    /// CSV with columns `n_states, E_0 … E_{k−1}`; missing eigenvalues are left empty.
    pub fn write_csv<W: Write>(&self, w: W, k: usize) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut head = vec!["n_states".to_string()];
        head.extend((0..k).map(|i| format!("E_{i}")));
        out.write_record(&head).map_err(csv_err)?;
        for p in &self.points {
            let mut row = vec![p.n_states.to_string()];
            row.extend((0..k).map(|i| p.energies.get(i).map_or(String::new(), |e| format!("{e:.12}"))));
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Each target is matched to its nearest subspace eigenvalue.
pub fn all_matched(energies: &[f64], targets: &[f64], tol: f64) -> bool {
    targets.iter().all(|t| energies.iter().any(|e| (e - t).abs() <= tol))
}

/// Nearest-eigenvalue distance for every target.
pub fn match_errors(energies: &[f64], targets: &[f64]) -> Vec<f64> {
    targets.iter().map(|t| energies.iter().map(|e| (e - t).abs()).fold(f64::INFINITY, f64::min)).collect()
}

/// Real-time subspace settings.
#[derive(Clone, Debug)]
pub struct QsdConfig {
    pub references: Vec<Vec<C64>>,
    pub dt: f64,
    pub n_t: usize,
    pub threshold: f64,
    /// Use the single-reference Toeplitz fill; only valid for exact propagation.
    pub toeplitz: bool,
}

/// Thresholds evaluated in the real-time subspace studies.
pub const QSD_THRESHOLDS: [f64; 3] = [1e-6, 1e-4, 1e-2];

/// Real-time Krylov subspace: `{U^j φ_r}` for `j ≤ N_T` with `U` one time step.
///
/// The trace point for `n` steps uses the states `U^j φ_r`, `j ≤ n`, of every reference.
pub fn rtqsd(h: &dyn LinOp, step: &dyn Fn(&[C64]) -> Result<Vec<C64>>, cfg: &QsdConfig) -> Result<Trace> {
    if cfg.references.is_empty() {
        return Err(Error::config("at least one reference is required"));
    }
    for r in &cfg.references {
        if (norm(r) - 1.0).abs() > 1e-10 {
            return Err(Error::domain("references must be normalized"));
        }
    }
    let n_r = cfg.references.len();
    let nt = cfg.n_t;
    let (hfull, sfull) = if cfg.toeplitz {
        if n_r != 1 {
            return Err(Error::config("the Toeplitz fill needs a single reference"));
        }
        toeplitz_matrices(h, step, &cfg.references[0], nt)?
    } else {
        let mut basis = Vec::with_capacity(n_r * (nt + 1));
        for r in &cfg.references {
            let mut v = r.clone();
            basis.push(v.clone());
            for _ in 0..nt {
                v = step(&v)?;
                basis.push(v.clone());
            }
        }
        subspace_matrices(h, &basis)
    };
    let mut trace = Trace::default();
    for n in 0..=nt {
        let idx: Vec<usize> = (0..n_r).flat_map(|r| (0..=n).map(move |j| r * (nt + 1) + j)).collect();
        let p = SubspaceProblem { h: hfull.select_rows(&idx).select_columns(&idx), s: sfull.select_rows(&idx).select_columns(&idx), threshold: cfg.threshold };
        let sol = solve_gep(&p)?;
        trace.points.push(TracePoint { index: n, n_states: idx.len(), rank: sol.rank, energies: sol.values });
    }
    Ok(trace)
}

/// `S_jk = s(k−j)`, `H_jk = h(k−j)` from the `N_T + 1` states `U^m φ`.
pub fn toeplitz_matrices(
    h: &dyn LinOp,
    step: &dyn Fn(&[C64]) -> Result<Vec<C64>>,
    phi: &[C64],
    nt: usize,
) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let hphi = matvec(h, phi);
    let mut s = Vec::with_capacity(nt + 1);
    let mut e = Vec::with_capacity(nt + 1);
    let mut v = phi.to_vec();
    for m in 0..=nt {
        if m > 0 {
            v = step(&v)?;
        }
        s.push(dot(phi, &v));
        e.push(dot(&hphi, &v));
    }
    let dim = nt + 1;
    let mut hm = DMatrix::from_element(dim, dim, ZERO);
    let mut sm = DMatrix::from_element(dim, dim, ZERO);
    for j in 0..dim {
        for k in 0..dim {
            let (sv, hv) = if k >= j { (s[k - j], e[k - j]) } else { (s[j - k].conj(), e[j - k].conj()) };
            sm[(j, k)] = sv;
            hm[(j, k)] = hv;
        }
    }
    Ok((hm, sm))
}

/// Exact propagator `exp(−iHΔt)` from a dense Hermitian matrix.
pub fn dense_propagator(h: &DMatrix<C64>, dt: f64) -> DMatrix<C64> {
    let (vals, vecs) = eigh(h);
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|&l| C64::from_polar(1.0, -l * dt))));
    &vecs * phases * vecs.adjoint()
}

/// Distinct eigenvalues whose eigenspaces overlap `v`: the spectrum of the Krylov closure of `v`.
pub fn closure_spectrum(h: &DMatrix<C64>, v: &[C64], degeneracy_tol: f64, weight_tol: f64) -> Vec<f64> {
    let (vals, vecs) = eigh(h);
    let amps: Vec<f64> = (0..vals.len()).map(|k| dot(vecs.column(k).as_slice(), v).norm_sqr()).collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < vals.len() {
        let mut w = 0.0;
        let start = k;
        while k < vals.len() && vals[k] - vals[start] <= degeneracy_tol {
            w += amps[k];
            k += 1;
        }
        if w > weight_tol {
            out.push(vals[start]);
        }
    }
    out
}

/// Anti-Hermitian generator `G`; `e^{θG}` uses `I + sin θ G + (1 − cos θ) G²` when `G³ = −G`.
#[derive(Clone, Debug)]
pub struct Generator {
    pub op: SparseOp,
    pub cubic_identity: bool,
    pub label: String,
}

impl Generator {
    pub fn new(op: SparseOp, label: impl Into<String>) -> Self {
        Generator { op, cubic_identity: false, label: label.into() }
    }

    /// Caller asserts `G³ = −G`, which holds for single and double excitation generators.
    pub fn excitation(op: SparseOp, label: impl Into<String>) -> Self {
        Generator { op, cubic_identity: true, label: label.into() }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        matvec(&self.op, v)
    }

    pub fn exp_apply(&self, theta: f64, v: &[C64]) -> Result<Vec<C64>> {
        if theta == 0.0 {
            return Ok(v.to_vec());
        }
        if self.cubic_identity {
            let g1 = self.apply(v);
            let g2 = self.apply(&g1);
            let (s, c) = (theta.sin(), 1.0 - theta.cos());
            return Ok(v.iter().zip(&g1).zip(&g2).map(|((a, b), d)| a + b * s + d * c).collect());
        }
        // e^{θG} = e^{−iθ(iG)}
        expm_krylov(&TimesI(&self.op), theta, v, KrylovConfig::default())
    }
}

/// `Π_i e^{θ_i G_i}|ref⟩`; generator 0 acts first.
#[derive(Clone, Debug)]
pub struct AnsatzState {
    pub reference: Vec<C64>,
    pub generators: Vec<Arc<Generator>>,
    pub theta: Vec<f64>,
}

impl AnsatzState {
    pub fn new(reference: Vec<C64>) -> Self {
        AnsatzState { reference, generators: Vec::new(), theta: Vec::new() }
    }

    pub fn realize(&self) -> Result<Vec<C64>> {
        let mut v = self.reference.clone();
        for (g, &t) in self.generators.iter().zip(&self.theta) {
            v = g.exp_apply(t, &v)?;
        }
        Ok(v)
    }

    /// `∂/∂θ_i Re⟨ψ|λ⟩ = Re⟨∂_i ψ|λ⟩` for every `i`, by backward propagation of `λ`.
    fn adjoint_overlaps(&self, psi: &[C64], lambda: &[C64]) -> Result<Vec<C64>> {
        let n = self.generators.len();
        let mut out = vec![ZERO; n];
        let mut phi = psi.to_vec();
        let mut lam = lambda.to_vec();
        for i in (0..n).rev() {
            let g = &self.generators[i];
            out[i] = dot(&g.apply(&phi), &lam);
            phi = g.exp_apply(-self.theta[i], &phi)?;
            lam = g.exp_apply(-self.theta[i], &lam)?;
        }
        Ok(out)
    }
}

/// Energy of `Ψ = Σ_I C_I ψ_I(θ_I)` and its gradients.
#[derive(Clone, Debug)]
pub struct NoVqeEval {
    pub energy: f64,
    pub d_theta: Vec<Vec<f64>>,
    pub d_c: Vec<f64>,
}

/// Quotient-rule energy gradient of a linear combination of independently parameterized states.
pub fn novqe_energy_gradient(h: &dyn LinOp, states: &[AnsatzState], c: &[f64]) -> Result<NoVqeEval> {
    if states.len() != c.len() {
        return Err(Error::Dimension { expected: states.len(), got: c.len() });
    }
    if c.iter().all(|&x| x == 0.0) {
        return Err(Error::domain("coefficients are all zero"));
    }
    let psis: Vec<Vec<C64>> = states.iter().map(|s| s.realize()).collect::<Result<_>>()?;
    let dim = h.dim();
    let mut big = vec![ZERO; dim];
    for (p, &ci) in psis.iter().zip(c) {
        for (b, x) in big.iter_mut().zip(p) {
            *b += x * ci;
        }
    }
    let nn = dot(&big, &big).re;
    if nn < 1e-300 {
        return Err(Error::numerical("zero-norm linear combination"));
    }
    let hb = matvec(h, &big);
    let energy = dot(&big, &hb).re / nn;
    let sigma: Vec<C64> = hb.iter().zip(&big).map(|(a, b)| a - b * energy).collect();
    let d_c = psis.iter().map(|p| 2.0 * dot(p, &sigma).re / nn).collect();
    let mut d_theta = Vec::with_capacity(states.len());
    for ((st, p), &ci) in states.iter().zip(&psis).zip(c) {
        let ov = st.adjoint_overlaps(p, &sigma)?;
        d_theta.push(ov.iter().map(|o| 2.0 * ci * o.re / nn).collect());
    }
    Ok(NoVqeEval { energy, d_theta, d_c })
}

/// Result of a quasi-Newton minimization.
#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub evaluations: usize,
}

type Objective<'a> = dyn Fn(&[f64]) -> Result<(f64, Vec<f64>)> + Sync + 'a;

struct Problem<'a> {
    f: &'a Objective<'a>,
    max_evals: usize,
    // (x, f, g) of the last evaluation, the best point, and the evaluation count
    cache: &'a Mutex<EvalCache>,
}

type EvalCache = (Option<(Vec<f64>, f64, Vec<f64>)>, Option<(Vec<f64>, f64, Vec<f64>)>, usize);

impl Problem<'_> {
    fn eval(&self, x: &[f64]) -> std::result::Result<(f64, Vec<f64>), argmin::core::Error> {
        let mut guard = self.cache.lock().unwrap();
        if let Some((cx, cf, cg)) = &guard.0 {
            if cx.as_slice() == x {
                return Ok((*cf, cg.clone()));
            }
        }
        if guard.2 >= self.max_evals {
            return Err(argmin::core::Error::msg("evaluation budget exhausted"));
        }
        guard.2 += 1;
        let (f, g) = (self.f)(x).map_err(|e| argmin::core::Error::msg(e.to_string()))?;
        if guard.1.as_ref().is_none_or(|b| f < b.1) {
            guard.1 = Some((x.to_vec(), f, g.clone()));
        }
        guard.0 = Some((x.to_vec(), f, g.clone()));
        Ok((f, g))
    }
}

impl CostFunction for Problem<'_> {
    type Param = Vec<f64>;
    type Output = f64;
    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        self.eval(x).map(|r| r.0)
    }
}

impl Gradient for Problem<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;
    fn gradient(&self, x: &Vec<f64>) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        self.eval(x).map(|r| r.1)
    }
}

/// BFGS with a More–Thuente line search, stopping at `|∇f| < grad_tol` or after
/// `max_evals` objective evaluations; the best point seen is returned either way.
pub fn minimize_bfgs(f: &Objective<'_>, x0: Vec<f64>, grad_tol: f64, max_evals: usize) -> Result<Minimum> {
    let n = x0.len();
    let cache = Mutex::new((None, None, 0));
    let problem = Problem { f, max_evals, cache: &cache };
    let (f0, g0) = problem.eval(&x0).map_err(|e| Error::numerical(e.to_string()))?;
    let g0n = g0.iter().map(|g| g * g).sum::<f64>().sqrt();
    if n == 0 || g0n < grad_tol {
        return Ok(Minimum { x: x0, value: f0, grad_norm: g0n, evaluations: 1 });
    }
    let inv_h: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let ls = MoreThuenteLineSearch::new();
    let solver = BFGS::new(ls)
        .with_tolerance_grad(grad_tol)
        .map_err(|e| Error::config(e.to_string()))?
        .with_tolerance_cost(0.0)
        .map_err(|e| Error::config(e.to_string()))?;
    let run = Executor::new(Problem { f, max_evals, cache: &cache }, solver).configure(|s| s.param(x0).inv_hessian(inv_h).max_iters(max_evals as u64)).run();
    if let Err(e) = &run {
        log::debug!("quasi-Newton stopped early: {e}");
    }
    let guard = cache.lock().unwrap();
    let evaluations = guard.2;
    let (x, value, g) = guard.1.clone().ok_or(Error::numerical("no objective evaluation succeeded"))?;
    if let Ok(res) = run {
        if let Some(best) = res.state().get_best_param() {
            if res.state().get_best_cost() <= value {
                let bx = best.clone();
                drop(guard);
                let (bf, bg) = problem.eval(&bx).unwrap_or((value, g.clone()));
                return Ok(Minimum { grad_norm: l2(&bg), x: bx, value: bf, evaluations });
            }
        }
    }
    Ok(Minimum { grad_norm: l2(&g), x, value, evaluations })
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|g| g * g).sum::<f64>().sqrt()
}

/// Spin-conserving generalized single and double excitations `τ − τ†` restricted to a sector.
///
/// Singles `a†_p a_q` pair equal-spin spin-orbitals with `p > q`; doubles
/// `a†_p a†_q a_r a_s` use disjoint pairs `p > q`, `r > s`, `(p, q) > (r, s)` with equal
/// total `S_z`, so every generator appears once up to sign.
pub fn excitation_pool(n_spatial: usize, basis: &SectorBasis) -> Vec<Arc<Generator>> {
    let n = 2 * n_spatial;
    let spin = |k: usize| (k % 2) as i32;
    let mut pool = Vec::new();
    for p in 0..n {
        for q in 0..p {
            if spin(p) == spin(q) {
                let op = FermionOp::new().term(1.0, &[cre(p), ann(q)]).term(-1.0, &[cre(q), ann(p)]);
                pool.push(Arc::new(Generator::excitation(basis.sparse_fermion(&op), format!("{p}^ {q}"))));
            }
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|p| (0..p).map(move |q| (p, q))).collect();
    for (i, &(p, q)) in pairs.iter().enumerate() {
        for &(r, s) in &pairs[..i] {
            if p == r || p == s || q == r || q == s || spin(p) + spin(q) != spin(r) + spin(s) {
                continue;
            }
            let op = FermionOp::new().term(1.0, &[cre(p), cre(q), ann(r), ann(s)]).term(-1.0, &[cre(s), cre(r), ann(q), ann(p)]);
            pool.push(Arc::new(Generator::excitation(basis.sparse_fermion(&op), format!("{p}^ {q}^ {r} {s}"))));
        }
    }
    pool
}

/// ADAPT iteration settings.
#[derive(Clone, Debug)]
pub struct AdaptConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub max_evals: usize,
    /// Largest pool gradient below which the run is flagged as stagnated.
    pub stagnation_tol: f64,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig { max_iters: 30, grad_tol: 1e-6, max_evals: 500, stagnation_tol: 1e-8 }
    }
}

/// Iterates of one ADAPT run; entry 0 is the reference.
#[derive(Clone, Debug)]
pub struct AdaptRun {
    pub iterates: Vec<Vec<C64>>,
    pub energies: Vec<f64>,
    pub selected: Vec<usize>,
    pub stagnated: bool,
}

/// `g_k = 2 Re⟨Hψ|G_k ψ⟩` for every pool member.
pub fn pool_gradients(h: &dyn LinOp, psi: &[C64], pool: &[Arc<Generator>]) -> Vec<f64> {
    let hpsi = matvec(h, psi);
    pool.iter().map(|g| 2.0 * dot(&hpsi, &g.apply(psi)).re).collect()
}

fn expectation(h: &dyn LinOp, v: &[C64]) -> f64 {
    dot(v, &matvec(h, v)).re / dot(v, v).re
}

/// Adaptive ansatz growth from one reference.
pub fn adapt_vqe(h: &dyn LinOp, reference: &[C64], pool: &[Arc<Generator>], cfg: &AdaptConfig) -> Result<AdaptRun> {
    if pool.is_empty() {
        return Err(Error::config("operator pool is empty"));
    }
    let mut state = AnsatzState::new(reference.to_vec());
    let mut psi = reference.to_vec();
    let mut run = AdaptRun { iterates: vec![psi.clone()], energies: vec![expectation(h, &psi)], selected: Vec::new(), stagnated: false };
    for _ in 0..cfg.max_iters {
        let grads = pool_gradients(h, &psi, pool);
        // strict comparison keeps the lowest index on ties
        let (best, gmax) = grads.iter().enumerate().fold((0, -1.0), |acc, (k, g)| if g.abs() > acc.1 { (k, g.abs()) } else { acc });
        if gmax < cfg.stagnation_tol {
            run.stagnated = true;
            break;
        }
        state.generators.push(pool[best].clone());
        state.theta.push(0.0);
        let objective = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            let mut st = state.clone();
            st.theta.copy_from_slice(x);
            let ev = novqe_energy_gradient(h, std::slice::from_ref(&st), &[1.0])?;
            Ok((ev.energy, ev.d_theta[0].clone()))
        };
        let min = minimize_bfgs(&objective, state.theta.clone(), cfg.grad_tol, cfg.max_evals)?;
        state.theta = min.x;
        psi = state.realize()?;
        run.iterates.push(psi.clone());
        run.energies.push(min.value);
        run.selected.push(best);
    }
    Ok(run)
}

/// ADAPT runs per reference plus the iterate-subspace trace.
#[derive(Clone, Debug)]
pub struct AdaptQsd {
    pub runs: Vec<AdaptRun>,
    pub trace: Trace,
}

/// Trace point `k` diagonalizes over iterates `0..=k` of every run.
pub fn adapt_qsd(
    h: &dyn LinOp,
    references: &[Vec<C64>],
    pool: &[Arc<Generator>],
    cfg: &AdaptConfig,
    threshold: f64,
) -> Result<AdaptQsd> {
    let runs: Vec<AdaptRun> = references.iter().map(|r| adapt_vqe(h, r, pool, cfg)).collect::<Result<_>>()?;
    let trace = iterate_trace(h, &runs, threshold)?;
    Ok(AdaptQsd { runs, trace })
}

pub fn iterate_trace(h: &dyn LinOp, runs: &[AdaptRun], threshold: f64) -> Result<Trace> {
    let longest = runs.iter().map(|r| r.iterates.len()).max().unwrap_or(0);
    let mut trace = Trace::default();
    for k in 0..longest {
        let basis: Vec<Vec<C64>> = runs.iter().flat_map(|r| r.iterates.iter().take(k + 1).cloned()).collect();
        let (hm, sm) = subspace_matrices(h, &basis);
        let sol = solve_gep(&SubspaceProblem { h: hm, s: sm, threshold })?;
        trace.points.push(TracePoint { index: k, n_states: basis.len(), rank: sol.rank, energies: sol.values });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        let a = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        (&a + a.adjoint()) * C64::new(0.5, 0.0)
    }

    #[test]
    fn identity_overlap_is_standard_problem() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_hermitian(5, &mut rng);
        let sol = solve_gep(&SubspaceProblem { h: h.clone(), s: DMatrix::identity(5, 5), threshold: 1e-6 }).unwrap();
        let (e, _) = eigh(&h);
        for (a, b) in sol.values.iter().zip(&e) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_state_is_rayleigh_quotient() {
        let h = DMatrix::from_element(1, 1, C64::new(-3.0, 0.0));
        let s = DMatrix::from_element(1, 1, C64::new(2.0, 0.0));
        let sol = solve_gep(&SubspaceProblem { h, s, threshold: 1e-8 }).unwrap();
        assert!((sol.values[0] + 1.5).abs() < 1e-14);
    }

    #[test]
    fn duplicated_state_matches_deduplicated() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_hermitian(8, &mut rng);
        let basis: Vec<Vec<C64>> = (0..3)
            .map(|_| {
                let v: Vec<C64> = (0..8).map(|_| C64::new(rng.gen::<f64>(), rng.gen::<f64>())).collect();
                let n = norm(&v);
                v.iter().map(|x| x / n).collect()
            })
            .collect();
        let mut dup = basis.clone();
        dup.push(basis[1].clone());
        let a = subspace_matrices(&h, &basis);
        let b = subspace_matrices(&h, &dup);
        let sa = solve_gep(&SubspaceProblem { h: a.0, s: a.1, threshold: 1e-8 }).unwrap();
        let sb = solve_gep(&SubspaceProblem { h: b.0, s: b.1, threshold: 1e-8 }).unwrap();
        assert_eq!(sa.rank, sb.rank);
        for (x, y) in sa.values.iter().zip(&sb.values) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn empty_spectrum_is_an_error() {
        let z = DMatrix::from_element(2, 2, ZERO);
        assert!(matches!(solve_gep(&SubspaceProblem { h: z.clone(), s: z, threshold: 1e-6 }), Err(Error::Numerical(_))));
    }

    #[test]
    fn toeplitz_fill_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(64, &mut rng);
        let u = dense_propagator(&h, 0.7);
        let step = |v: &[C64]| -> Result<Vec<C64>> { Ok(matvec(&u, v)) };
        let mut phi: Vec<C64> = (0..64).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let n = norm(&phi);
        phi.iter_mut().for_each(|x| *x /= n);
        let (ht, st) = toeplitz_matrices(&h, &step, &phi, 6).unwrap();
        let mut basis = vec![phi.clone()];
        for _ in 0..6 {
            basis.push(step(basis.last().unwrap()).unwrap());
        }
        let (hb, sb) = subspace_matrices(&h, &basis);
        assert!((ht - hb).iter().map(|x| x.norm()).fold(0.0, f64::max) < 1e-10);
        assert!((st - sb).iter().map(|x| x.norm()).fold(0.0, f64::max) < 1e-10);
    }

    #[test]
    fn ground_state_reference_is_exact_at_zero_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_hermitian(16, &mut rng);
        let (e, v) = eigh(&h);
        let u = dense_propagator(&h, 1.0);
        let step = |x: &[C64]| -> Result<Vec<C64>> { Ok(matvec(&u, x)) };
        let cfg = QsdConfig { references: vec![v.column(0).iter().cloned().collect()], dt: 1.0, n_t: 2, threshold: 1e-6, toeplitz: true };
        let tr = rtqsd(&h, &step, &cfg).unwrap();
        assert!((tr.points[0].energies[0] - e[0]).abs() < 1e-10);
    }

    #[test]
    fn closed_form_exponential_matches_krylov() {
        use crate::pauli::{PauliString, PauliSum};
        // G = i(X₀Y₁) is anti-Hermitian and squares to −I
        let p = PauliSum::from_terms(2, [(PauliString::from_label("XY").unwrap(), C64::new(0.0, 1.0))]);
        let op = SparseOp::from_pauli(&p);
        let a = Generator::excitation(op.clone(), "xy");
        let b = Generator::new(op, "xy");
        let v = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8), ZERO, ZERO];
        let x = a.exp_apply(0.9, &v).unwrap();
        let y = b.exp_apply(0.9, &v).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).norm() < 1e-12);
        }
        assert!((norm(&x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bfgs_finds_quadratic_minimum() {
        let f = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            Ok(((x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2), vec![2.0 * (x[0] - 1.0), 6.0 * (x[1] + 2.0)]))
        };
        let m = minimize_bfgs(&f, vec![0.0, 0.0], 1e-8, 500).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-7 && (m.x[1] + 2.0).abs() < 1e-7);
        assert!(m.evaluations <= 500);
    }
}
