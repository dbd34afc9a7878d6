//! Von Neumann and relative entropies, and a conditional-gradient
//! (Frank–Wolfe) solver for the relative entropy of entanglement
//! `E_R(ρ) = min_{σ separable} S(ρ‖σ)`.
//!
//! The separable set is handled through its extreme points, the product
//! pure states `|α⟩⊗|β⟩`. The iterate is stored as an explicit mixture of
//! such atoms, so it is separable by construction. Each round first polishes
//! the current atoms (their factors and weights) by local quasi-Newton
//! descent, then minimizes the linearized objective over all product states.
//! That minimum certifies the optimality gap; if the gap is still too large
//! the minimizer joins the mixture by an exact line search on the segment.

use std::f64::consts::LN_2;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matcore::{self, herm_eig, psd_factor, HermEig, Mat2, Mat4, C64, RANK_TOL};
use crate::measures::partial_transpose;
use crate::states::{check_unit_interval, complex_gaussian, product_vector, rng_from_seed, DensityMatrix};

/// `−Σ λ log₂ λ` with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&rho.eigenvalues())
}

fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Overlap of `ρ` with the kernel of `σ` above which `S(ρ‖σ) = +∞`.
pub const SUPPORT_TOL: f64 = 1e-10;

/// `S(ρ‖σ) = Tr ρ (log₂ρ − log₂σ)`; returns `f64::INFINITY` when the support
/// of `ρ` is not contained in that of `σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let s_rho = von_neumann_entropy(rho);
    let eig = herm_eig(sigma.mat()).expect("validated state is Hermitian");
    cross_entropy(rho.mat(), &eig)
        .map(|ce| (ce - s_rho).max(0.0))
        .unwrap_or(f64::INFINITY)
}

/// `−Tr ρ log₂ σ`, or `None` on a support violation.
fn cross_entropy(rho: &Mat4, sigma: &HermEig<4>) -> Option<f64> {
    let mut acc = 0.0;
    let mut leak = 0.0;
    for k in 0..4 {
        let w = rho.quadratic_form(&sigma.vector(k)).re;
        let lam = sigma.values[k];
        if lam <= RANK_TOL {
            leak += w.max(0.0);
        } else {
            acc -= w * lam.log2();
        }
    }
    (leak <= SUPPORT_TOL).then_some(acc)
}

/// `(C − 2) log₂(1 − C/2) + (1 − C) log₂(1 − C)`: relative entropy of
/// entanglement of the rank-2 state mixing `Φ⁺` (weight `C`) with `|01⟩`.
pub fn er_mems_closed_form(c: f64) -> Result<f64> {
    check_unit_interval("C", c)?;
    let tail = if c < 1.0 { (1.0 - c) * (1.0 - c).log2() } else { 0.0 };
    Ok(((c - 2.0) * (1.0 - c / 2.0).log2() + tail).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Stop once the certified optimality gap falls below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Random restarts of the product-state linear minimization.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 5000,
            restarts: 16,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EROptResult {
    /// `S(ρ‖σ)` at the returned `σ`, in ebits.
    pub value: f64,
    pub closest_separable: DensityMatrix,
    pub iterations: usize,
    /// Upper bound on `value − E_R(ρ)` from the best Frank–Wolfe dual bound.
    pub gap_bound: f64,
    /// Objective after each iteration, starting with the initial point.
    pub history: Vec<f64>,
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum SolveError {
    #[error("relative entropy solver stopped after {} iterations with gap {:.3e}", .best.iterations, .best.gap_bound)]
    MaxIterations { best: Box<EROptResult> },
    #[error(transparent)]
    State(#[from] Error),
}

impl SolveError {
    /// Best iterate for a run that hit the iteration limit.
    pub fn best(self) -> Option<EROptResult> {
        match self {
            SolveError::MaxIterations { best } => Some(*best),
            SolveError::State(_) => None,
        }
    }
}

/// Runs the solver and falls back to the best iterate on `MaxIterations`.
pub fn rel_entropy_entanglement_best_effort(
    rho: &DensityMatrix,
    cfg: &SolverConfig,
) -> Result<EROptResult> {
    match rel_entropy_entanglement(rho, cfg) {
        Ok(r) => Ok(r),
        Err(SolveError::MaxIterations { best }) => Ok(*best),
        Err(SolveError::State(e)) => Err(e),
    }
}

/// A product vector `α⊗β`, unnormalized; its squared norm is its weight.
#[derive(Clone, Copy)]
struct Atom {
    alpha: [C64; 2],
    beta: [C64; 2],
}

impl Atom {
    fn new(alpha: [C64; 2], beta: [C64; 2], weight: f64) -> Self {
        let s = weight.sqrt().sqrt();
        Atom {
            alpha: alpha.map(|z| z * s),
            beta: beta.map(|z| z * s),
        }
    }

    fn vec(&self) -> [C64; 4] {
        product_vector(&self.alpha, &self.beta)
    }

    fn weight(&self) -> f64 {
        matcore::norm(&self.alpha).powi(2) * matcore::norm(&self.beta).powi(2)
    }

    /// Equalizes the factor norms without changing the product.
    fn balance(&mut self) {
        let (na, nb) = (matcore::norm(&self.alpha), matcore::norm(&self.beta));
        if na > 0.0 && nb > 0.0 {
            let k = (nb / na).sqrt();
            self.alpha = self.alpha.map(|z| z * k);
            self.beta = self.beta.map(|z| z / k);
        }
    }
}

/// Iterates stay at least this far from singular.
const MIN_EIGENVALUE: f64 = 1e-13;
const FW_STEP_CAP: f64 = 1.0 - 1e-9;
const LBFGS_MEMORY: usize = 8;
const REFINE_MAX_STEPS: usize = 400;
/// Rounds without measurable descent before giving up on the tolerance.
/// Near-singular optima put the certificate at a floor set by the
/// resolution of the objective (about 1e-16 absolute), so the requested
/// gap can be out of reach even though the value is settled.
const STALL_ROUNDS: usize = 25;
/// Relative size of objective changes treated as rounding.
const ROUNDING_BAND: f64 = 1e-15;
const MAX_FLAT_STEPS: usize = 40;
/// Atoms below this fraction of the total weight are candidates for removal.
const PRUNE_WEIGHT: f64 = 1e-3;

/// Objective data at one iterate.
struct Point {
    value: f64,
    sigma: Mat4,
    eig: HermEig<4>,
}

struct Problem {
    /// `ρ = X X†` with exactly zero columns outside the support, so that
    /// `V†ρV` has kernel entries free of the rounding floor of `ρ` itself.
    factor: Mat4,
    s_rho: f64,
}

impl Problem {
    fn rotated(&self, eig: &HermEig<4>) -> Mat4 {
        let w = eig.vectors.adjoint() * self.factor;
        (w * w.adjoint()).hermitian_part()
    }
}

impl Problem {
    fn at(&self, sigma: Mat4) -> Option<Point> {
        let eig = herm_eig(&sigma).ok()?;
        if eig.min() <= MIN_EIGENVALUE {
            return None;
        }
        let rt = self.rotated(&eig);
        let value = (0..4).map(|k| -rt[(k, k)].re * eig.values[k].log2()).sum::<f64>() - self.s_rho;
        value.is_finite().then_some(Point { value, sigma, eig })
    }

    fn value(&self, sigma: Mat4) -> f64 {
        self.at(sigma).map_or(f64::INFINITY, |p| p.value)
    }

    fn at_atoms(&self, atoms: &[Atom]) -> Option<Point> {
        let (m, tr) = accumulate(atoms);
        if tr <= 0.0 {
            return None;
        }
        self.at(m.scale_real(1.0 / tr))
    }

    /// Value and gradient with respect to the real coordinates of the atoms.
    fn value_and_grad(&self, theta: &[f64]) -> Option<(Point, Vec<f64>)> {
        let atoms = unpack(theta);
        let (_, tr) = accumulate(&atoms);
        let p = self.at_atoms(&atoms)?;
        let g = gradient(&self.rotated(&p.eig), &p.eig);
        // d f = Tr(H dM) with M = Σ x x†, σ = M / Tr M
        let shift = g.trace_product(&p.sigma).re;
        let h = (g - Mat4::identity().scale_real(shift)).scale_real(1.0 / tr);
        let mut out = Vec::with_capacity(theta.len());
        for a in &atoms {
            let y = h.mul_vec(&a.vec());
            for i in 0..2 {
                let gi: C64 = (0..2).map(|j| y[2 * i + j] * a.beta[j].conj()).sum();
                out.extend([2.0 * gi.re, 2.0 * gi.im]);
            }
            for j in 0..2 {
                let gj: C64 = (0..2).map(|i| y[2 * i + j] * a.alpha[i].conj()).sum();
                out.extend([2.0 * gj.re, 2.0 * gj.im]);
            }
        }
        Some((p, out))
    }
}

fn accumulate(atoms: &[Atom]) -> (Mat4, f64) {
    let mut m = Mat4::zeros();
    let mut tr = 0.0;
    for a in atoms {
        let x = a.vec();
        m = m + Mat4::outer(&x, &x);
        tr += matcore::norm(&x).powi(2);
    }
    (m.hermitian_part(), tr)
}

fn pack(atoms: &[Atom]) -> Vec<f64> {
    atoms
        .iter()
        .flat_map(|a| a.alpha.iter().chain(a.beta.iter()).flat_map(|z| [z.re, z.im]))
        .collect()
}

fn unpack(theta: &[f64]) -> Vec<Atom> {
    theta
        .chunks_exact(8)
        .map(|c| Atom {
            alpha: [C64::new(c[0], c[1]), C64::new(c[2], c[3])],
            beta: [C64::new(c[4], c[5]), C64::new(c[6], c[7])],
        })
        .collect()
}

fn dot_real(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn rel_entropy_entanglement(
    rho: &DensityMatrix,
    cfg: &SolverConfig,
) -> std::result::Result<EROptResult, SolveError> {
    let problem = Problem {
        factor: psd_factor(rho.mat())?,
        s_rho: von_neumann_entropy(rho),
    };
    let mut rng = rng_from_seed(cfg.seed);

    let e = |k: usize| -> [C64; 2] { std::array::from_fn(|i| if i == k { matcore::ONE } else { matcore::ZERO }) };
    let mut atoms: Vec<Atom> = (0..4).map(|k| Atom::new(e(k / 2), e(k % 2), 0.25)).collect();
    let mut point = problem.at_atoms(&atoms).expect("I/4 is interior");
    let mut history = vec![point.value];
    let mut lower = f64::NEG_INFINITY;
    let mut warm: Option<[C64; 2]> = None;
    let mut iterations = 0;
    let mut stalled_rounds = 0;

    let finish = |point: &Point, lower: f64, iterations, history| -> Result<EROptResult> {
        Ok(EROptResult {
            value: point.value.max(0.0),
            closest_separable: DensityMatrix::new(point.sigma)?,
            iterations,
            gap_bound: (point.value - lower.max(0.0)).max(0.0),
            history,
        })
    };

    loop {
        let round_start = point.value;
        refine(&problem, &mut atoms, &mut point, &mut history, &mut iterations, cfg.max_iters);

        let grad = gradient(&problem.rotated(&point.eig), &point.eig);
        let (s_vec, s_val) = product_lmo(&grad, cfg.restarts, &mut rng, warm);
        warm = Some(restart_seed_from(&s_vec));
        // With D = −ln 2 · G, Tr Dσ = 1 and λ = max over product states of
        // ⟨s|D|s⟩. Convexity of X ↦ −Tr ρ ln X on the whole positive cone,
        // applied at cσ with c = λ, gives E_R ≥ value − log₂ λ, which is
        // never weaker than the linear bound value − (λ − 1)/ln 2.
        let lambda = -s_val * LN_2;
        if lambda > 0.0 {
            lower = lower.max(point.value - lambda.log2().max(0.0));
        }
        if point.value - lower.max(0.0) <= cfg.tol {
            return Ok(finish(&point, lower, iterations, history)?);
        }
        if iterations >= cfg.max_iters || stalled_rounds >= STALL_ROUNDS {
            break;
        }
        iterations += 1;

        let s_proj = Mat4::outer(&s_vec, &s_vec);
        let direction = s_proj - point.sigma;
        let sigma = point.sigma;
        let (gamma, new_value) =
            line_search(&|g| problem.value(sigma + direction.scale_real(g)), FW_STEP_CAP, point.value);
        let next = (gamma > 0.0 && new_value < point.value)
            .then(|| {
                let (_, tr) = accumulate(&atoms);
                let keep = ((1.0 - gamma) / tr).sqrt().sqrt();
                let mut moved: Vec<Atom> = atoms
                    .iter()
                    .map(|a| Atom {
                        alpha: a.alpha.map(|z| z * keep),
                        beta: a.beta.map(|z| z * keep),
                    })
                    .collect();
                let (alpha, beta) = split_product(&s_vec);
                moved.push(Atom::new(alpha, beta, gamma));
                problem.at_atoms(&moved).map(|p| (moved, p))
            })
            .flatten()
            .filter(|(_, p)| p.value <= point.value);
        match next {
            Some((moved, p)) => {
                atoms = moved;
                point = p;
            }
            // No descent; only a fresh linear minimization can help, so
            // retry without the warm start.
            None => warm = None,
        }
        history.push(point.value);
        if round_start - point.value <= ROUNDING_BAND * (1.0 + point.value.abs()) {
            stalled_rounds += 1;
        } else {
            stalled_rounds = 0;
        }
    }

    let best = finish(&point, lower, iterations, history)?;
    Err(SolveError::MaxIterations {
        best: Box::new(best),
    })
}

/// Local descent on the atom coordinates (L-BFGS with Armijo backtracking).
/// Accepted steps lower the objective, or move it by no more than rounding
/// while reducing the directional derivative.
fn refine(
    problem: &Problem,
    atoms: &mut Vec<Atom>,
    point: &mut Point,
    history: &mut Vec<f64>,
    iterations: &mut usize,
    max_iters: usize,
) {
    for a in atoms.iter_mut() {
        a.balance();
    }
    let mut theta = pack(atoms);
    let Some((_, mut g)) = problem.value_and_grad(&theta) else {
        return;
    };
    let mut value = point.value;
    let mut flat_steps = 0;
    let mut memory: std::collections::VecDeque<(Vec<f64>, Vec<f64>)> = Default::default();

    for _ in 0..REFINE_MAX_STEPS {
        if *iterations >= max_iters {
            break;
        }
        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, y) in memory.iter().rev() {
            let a = dot_real(s, &d) / dot_real(y, s);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y)) = memory.back() {
            let scale = dot_real(s, y) / dot_real(y, y);
            d.iter_mut().for_each(|x| *x *= scale);
        } else {
            let n = dot_real(&g, &g).sqrt();
            if n == 0.0 {
                break;
            }
            let scale = 1e-2 / n;
            d.iter_mut().for_each(|x| *x *= scale);
        }
        for ((s, y), a) in memory.iter().zip(alphas.iter().rev()) {
            let b = dot_real(y, &d) / dot_real(y, s);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        let mut slope = dot_real(&g, &d);
        if !(slope < 0.0) {
            memory.clear();
            d = g.iter().map(|x| -x * 1e-2 / dot_real(&g, &g).sqrt()).collect();
            slope = dot_real(&g, &d);
            if !(slope < 0.0) {
                break;
            }
        }

        // Below the resolution of the objective, steps are judged by the
        // directional derivative instead, which keeps its accuracy.
        let band = ROUNDING_BAND * (1.0 + value.abs());
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = theta.iter().zip(&d).map(|(x, di)| x + t * di).collect();
            if let Some((p, g_new)) = problem.value_and_grad(&trial) {
                let armijo = p.value <= value + 1e-4 * t * slope && p.value < value;
                let flat = p.value <= value + band && dot_real(&g_new, &d).abs() < 0.5 * slope.abs();
                if armijo || flat {
                    accepted = Some((trial, p, g_new));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((trial, p, g_new)) = accepted else {
            break;
        };
        let s: Vec<f64> = trial.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        if dot_real(&s, &y) > 1e-16 * dot_real(&y, &y).sqrt() * dot_real(&s, &s).sqrt() {
            memory.push_back((s, y));
            if memory.len() > LBFGS_MEMORY {
                memory.pop_front();
            }
        }
        let decrease = value - p.value;
        flat_steps = if decrease > band { 0 } else { flat_steps + 1 };
        theta = trial;
        g = g_new;
        value = p.value;
        *point = p;
        *iterations += 1;
        history.push(value);
        if flat_steps >= MAX_FLAT_STEPS || dot_real(&g, &g).sqrt() < 1e-14 {
            break;
        }
    }
    *atoms = unpack(&theta);
    prune(problem, atoms, point);
}

/// Drops light atoms, lightest first, whenever that does not raise the
/// objective. Weights shrink only slowly under the local descent because
/// they are quartic in the atom coordinates.
fn prune(problem: &Problem, atoms: &mut Vec<Atom>, point: &mut Point) {
    loop {
        let (_, tr) = accumulate(atoms);
        let mut order: Vec<usize> = (0..atoms.len()).filter(|&k| atoms[k].weight() < PRUNE_WEIGHT * tr).collect();
        order.sort_by(|&a, &b| atoms[a].weight().total_cmp(&atoms[b].weight()));
        let mut dropped = false;
        for k in order {
            if atoms.len() == 1 {
                return;
            }
            let mut kept = atoms.clone();
            kept.remove(k);
            if let Some(p) = problem.at_atoms(&kept) {
                if p.value <= point.value {
                    *atoms = kept;
                    *point = p;
                    dropped = true;
                    break;
                }
            }
        }
        if !dropped {
            return;
        }
    }
}

/// Factors a product vector `α⊗β` into its unit factors.
fn split_product(s: &[C64; 4]) -> ([C64; 2], [C64; 2]) {
    let beta = restart_seed_from(s);
    let alpha = [
        beta[0].conj() * s[0] + beta[1].conj() * s[1],
        beta[0].conj() * s[2] + beta[1].conj() * s[3],
    ];
    let n = matcore::norm(&alpha);
    (alpha.map(|z| z / n), beta)
}

/// Minimum of a convex `phi` on `[0, hi]`: a geometric scan `hi·2^{-k}`
/// locates the scale of the minimizer (which can be tiny next to the
/// boundary), then golden-section search refines within that bracket.
fn line_search(phi: &impl Fn(f64) -> f64, hi: f64, at_zero: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut best = (0.0, at_zero);
    let mut best_k = None;
    for k in 0..=60 {
        let g = hi * 0.5f64.powi(k);
        let f = phi(g);
        if f < best.1 {
            best = (g, f);
            best_k = Some(k);
        }
    }
    let Some(k) = best_k else {
        return best;
    };
    let (mut a, mut b) = (best.0 * 0.5, (best.0 * 2.0).min(hi));
    if k == 60 {
        a = 0.0;
    }
    let tol = 1e-10 * best.0;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = phi(c);
    let mut fd = phi(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = phi(d);
        }
    }
    for (g, f) in [(c, fc), (d, fd)] {
        if f < best.1 {
            best = (g, f);
        }
    }
    best
}

/// Gradient of `σ ↦ −Tr ρ log₂ σ` via the Daleckii–Krein formula:
/// `−(1/ln 2) V (L ∘ V†ρV) V†` with `L_ij` the divided differences of `ln`.
/// Takes `rt = V†ρV` in the eigenbasis `V` of `σ`.
fn gradient(rt: &Mat4, e: &HermEig<4>) -> Mat4 {
    let v = e.vectors;
    let mu = e.values.map(|x| x.max(MIN_EIGENVALUE));
    let mut l = Mat4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let x = (mu[i] - mu[j]) / mu[j];
            let dd = if x.abs() < 1e-12 {
                1.0 / mu[j]
            } else {
                x.ln_1p() / (x * mu[j])
            };
            l[(i, j)] = rt[(i, j)] * (-dd / LN_2);
        }
    }
    (v * l * v.adjoint()).hermitian_part()
}

fn restart_seed_from(s: &[C64; 4]) -> [C64; 2] {
    // s = α ⊗ β; recover β from the row of largest weight
    let (r0, r1) = ([s[0], s[1]], [s[2], s[3]]);
    let pick = if matcore::norm(&r0) >= matcore::norm(&r1) { r0 } else { r1 };
    let n = matcore::norm(&pick);
    pick.map(|z| z / n)
}

/// Minimizes `⟨αβ|G|αβ⟩` over product states by alternating 2x2
/// smallest-eigenvector updates, from `restarts` random starting `β`
/// (plus an optional warm start). Ties resolve to the lowest restart index.
fn product_lmo(
    g: &Mat4,
    restarts: usize,
    rng: &mut ChaCha8Rng,
    warm: Option<[C64; 2]>,
) -> ([C64; 4], f64) {
    let mut starts: Vec<[C64; 2]> = Vec::with_capacity(restarts + 1);
    if let Some(w) = warm {
        starts.push(w);
    }
    for _ in 0..restarts.max(1) {
        starts.push(random_qubit(rng));
    }
    let mut best: Option<([C64; 4], f64)> = None;
    for beta0 in starts {
        let (v, val) = alternate(g, beta0);
        if best.as_ref().is_none_or(|b| val < b.1) {
            best = Some((v, val));
        }
    }
    best.expect("at least one restart")
}

fn random_qubit(rng: &mut ChaCha8Rng) -> [C64; 2] {
    loop {
        let v = [complex_gaussian(rng), complex_gaussian(rng)];
        let n = matcore::norm(&v);
        if n > 1e-6 {
            return v.map(|z| z / n);
        }
    }
}

fn alternate(g: &Mat4, mut beta: [C64; 2]) -> ([C64; 4], f64) {
    let mut alpha = [matcore::ONE, matcore::ZERO];
    let mut prev = f64::INFINITY;
    let mut val = f64::INFINITY;
    for _ in 0..200 {
        let ga = Mat2::from_fn(|i, k| {
            let mut acc = matcore::ZERO;
            for j in 0..2 {
                for l in 0..2 {
                    acc += beta[j].conj() * g[(2 * i + j, 2 * k + l)] * beta[l];
                }
            }
            acc
        });
        let ea = herm_eig(&ga.hermitian_part()).expect("Hermitian 2x2");
        alpha = ea.vector(0);
        let gb = Mat2::from_fn(|j, l| {
            let mut acc = matcore::ZERO;
            for i in 0..2 {
                for k in 0..2 {
                    acc += alpha[i].conj() * g[(2 * i + j, 2 * k + l)] * alpha[k];
                }
            }
            acc
        });
        let eb = herm_eig(&gb.hermitian_part()).expect("Hermitian 2x2");
        beta = eb.vector(0);
        val = eb.min();
        if (prev - val).abs() < 1e-12 {
            break;
        }
        prev = val;
    }
    polish(g, &alpha).unwrap_or((product_vector(&alpha, &beta), val))
}

/// `λ_min(G_α)` as a function of the Bloch vector `n` of `α`:
/// `e₀ + e·n − |E₀ + E n|`, where `G_α = (α†⊗I) G (α⊗I)`.
struct BlochForm {
    e0: f64,
    e: [f64; 3],
    c0: [f64; 3],
    /// Columns are the Pauli vectors of the `n_x, n_y, n_z` coefficients.
    c: [[f64; 3]; 3],
}

impl BlochForm {
    fn new(g: &Mat4) -> Self {
        let block = |i: usize, k: usize| Mat2::from_fn(|j, l| g[(2 * i + j, 2 * k + l)]);
        let (g00, g01, g10, g11) = (block(0, 0), block(0, 1), block(1, 0), block(1, 1));
        let parts = [
            (g00 + g11).scale_real(0.5),
            (g01 + g10).scale_real(0.5),
            (g01 - g10).scale(C64::new(0.0, 0.5)),
            (g00 - g11).scale_real(0.5),
        ];
        let pauli = |m: &Mat2| {
            (
                0.5 * (m[(0, 0)].re + m[(1, 1)].re),
                [m[(0, 1)].re, -m[(0, 1)].im, 0.5 * (m[(0, 0)].re - m[(1, 1)].re)],
            )
        };
        let (e0, c0) = pauli(&parts[0]);
        let mut e = [0.0; 3];
        let mut c = [[0.0; 3]; 3];
        for m in 0..3 {
            let (s, v) = pauli(&parts[m + 1]);
            e[m] = s;
            for r in 0..3 {
                c[r][m] = v[r];
            }
        }
        BlochForm { e0, e, c0, c }
    }

    fn pauli_vector(&self, n: &[f64; 3]) -> [f64; 3] {
        std::array::from_fn(|r| self.c0[r] + (0..3).map(|m| self.c[r][m] * n[m]).sum::<f64>())
    }

    fn value(&self, n: &[f64; 3]) -> f64 {
        let v = self.pauli_vector(n);
        self.e0 + dot3(&self.e, n) - dot3(&v, &v).sqrt()
    }
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize3(a: [f64; 3]) -> [f64; 3] {
    let n = dot3(&a, &a).sqrt();
    a.map(|x| x / n)
}

/// Riemannian Newton on the Bloch sphere of the first factor, with
/// gradient steps as fallback; alternation alone creeps along the nearly
/// flat ridges that appear close to the optimum.
fn polish(g: &Mat4, alpha: &[C64; 2]) -> Option<([C64; 4], f64)> {
    let form = BlochForm::new(g);
    let rho_a = Mat2::outer(alpha, alpha);
    let mut n = normalize3([2.0 * rho_a[(1, 0)].re, 2.0 * rho_a[(1, 0)].im, (rho_a[(0, 0)] - rho_a[(1, 1)]).re]);
    let mut val = form.value(&n);
    for _ in 0..60 {
        let v = form.pauli_vector(&n);
        let r = dot3(&v, &v).sqrt();
        if r < 1e-300 {
            break;
        }
        let u = v.map(|x| x / r);
        // Euclidean gradient e − Cᵀu and Hessian −Cᵀ(I − uuᵀ)C / r
        let grad: [f64; 3] = std::array::from_fn(|m| form.e[m] - (0..3).map(|k| form.c[k][m] * u[k]).sum::<f64>());
        let cu: [f64; 3] = std::array::from_fn(|m| (0..3).map(|k| form.c[k][m] * u[k]).sum());
        let hess: [[f64; 3]; 3] = std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let ctc: f64 = (0..3).map(|k| form.c[k][a] * form.c[k][b]).sum();
                -(ctc - cu[a] * cu[b]) / r
            })
        });
        let t1 = tangent(&n);
        let t2 = cross3(&n, &t1);
        let ng = dot3(&n, &grad);
        let g2 = [dot3(&t1, &grad), dot3(&t2, &grad)];
        if (g2[0].abs() + g2[1].abs()) < 1e-15 {
            break;
        }
        let quad = |a: &[f64; 3], b: &[f64; 3]| {
            (0..3).map(|i| (0..3).map(|j| a[i] * hess[i][j] * b[j]).sum::<f64>()).sum::<f64>() - ng * dot3(a, b)
        };
        let (h11, h12, h22) = (quad(&t1, &t1), quad(&t1, &t2), quad(&t2, &t2));
        let det = h11 * h22 - h12 * h12;
        let step2 = if h11 > 0.0 && det > 0.0 {
            [-(h22 * g2[0] - h12 * g2[1]) / det, -(h11 * g2[1] - h12 * g2[0]) / det]
        } else {
            [-g2[0], -g2[1]]
        };
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let trial = normalize3(std::array::from_fn(|k| n[k] + t * (step2[0] * t1[k] + step2[1] * t2[k])));
            let f = form.value(&trial);
            if f < val {
                n = trial;
                val = f;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let theta = n[2].clamp(-1.0, 1.0).acos();
    let phi = n[1].atan2(n[0]);
    let alpha = [
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ];
    let ga = Mat2::from_fn(|j, l| {
        (0..2)
            .flat_map(|i| (0..2).map(move |k| (i, k)))
            .map(|(i, k)| alpha[i].conj() * g[(2 * i + j, 2 * k + l)] * alpha[k])
            .sum()
    });
    let eb = herm_eig(&ga.hermitian_part()).ok()?;
    Some((product_vector(&alpha, &eb.vector(0)), eb.min()))
}

fn tangent(n: &[f64; 3]) -> [f64; 3] {
    let axis = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = dot3(&axis, n);
    normalize3(std::array::from_fn(|k| axis[k] - d * n[k]))
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Smallest eigenvalue of `σ^Γ`; nonnegative (to rounding) for the
/// separable states this solver returns.
pub fn ppt_margin(sigma: &DensityMatrix) -> f64 {
    herm_eig(&partial_transpose(sigma)).expect("Hermitian").min()
}
