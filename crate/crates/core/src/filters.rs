//! Local filtering operations `ρ ↦ (A⊗B)ρ(A⊗B)† / Tr(…)`, the Bell-diagonal
//! normal form reached by iterated filtering, and the decomposition of a
//! state into pure states that all share its concurrence.

use rand::Rng;

use crate::error::{Error, Result};
use crate::matcore::{self, herm_eig, psd_factor, CMat, Mat2, Mat4, C64, I, ONE, ZERO};
use crate::states::{
    bell_basis, complex_gaussian, reduced_a, reduced_b, BellDiagonalSpec, DensityMatrix,
    PureState,
};

/// Determinant tolerance for [`FilterPair`].
pub const DET_TOL: f64 = 1e-10;
/// Smallest admissible unnormalized trace after filtering.
pub const MIN_FILTER_TRACE: f64 = 1e-12;

/// A pair of single-qubit filters with unit determinant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterPair {
    pub a: Mat2,
    pub b: Mat2,
}

impl FilterPair {
    pub fn new(a: Mat2, b: Mat2) -> Result<Self> {
        for m in [&a, &b] {
            let d = m.det();
            if (d - ONE).norm() > DET_TOL {
                return Err(Error::InvalidSpec(format!("filter determinant {d} is not 1")));
            }
        }
        Ok(Self { a, b })
    }

    /// Rescales each operator by `1/√det` so both have unit determinant.
    pub fn from_unnormalized(a: Mat2, b: Mat2) -> Result<Self> {
        let fix = |m: Mat2| -> Result<Mat2> {
            let d = m.det();
            if d.norm() < 1e-14 {
                return Err(Error::SingularFilter { det: d.norm() });
            }
            Ok(m.scale(ONE / d.sqrt()))
        };
        Self::new(fix(a)?, fix(b)?)
    }

    pub fn identity() -> Self {
        Self {
            a: Mat2::identity(),
            b: Mat2::identity(),
        }
    }

    /// Independent complex Gaussian entries, rescaled to determinant one.
    pub fn random_with<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let a = Mat2::from_fn(|_, _| complex_gaussian(rng));
            let b = Mat2::from_fn(|_, _| complex_gaussian(rng));
            if let Ok(f) = Self::from_unnormalized(a, b) {
                return f;
            }
        }
    }

    pub fn operator(&self) -> Mat4 {
        self.a.kron(&self.b)
    }

    /// `|det A| · |det B|`.
    pub fn det_product(&self) -> f64 {
        self.a.det().norm() * self.b.det().norm()
    }

    /// Singular values of both filters; all ones for local unitaries.
    pub fn singular_values(&self) -> [f64; 4] {
        let sa = matcore::singular_values(&self.a);
        let sb = matcore::singular_values(&self.b);
        [sa[0], sa[1], sb[0], sb[1]]
    }

    /// Applies `self` after `first`: `(A·A₁) ⊗ (B·B₁)`.
    pub fn compose(&self, first: &FilterPair) -> FilterPair {
        FilterPair {
            a: self.a * first.a,
            b: self.b * first.b,
        }
    }
}

/// Unnormalized trace `Tr((A⊗B)ρ(A⊗B)†)`.
pub fn filter_trace(rho: &DensityMatrix, f: &FilterPair) -> f64 {
    let m = f.operator();
    (m * *rho.mat() * m.adjoint()).trace().re
}

pub fn apply_filter(rho: &DensityMatrix, f: &FilterPair) -> Result<DensityMatrix> {
    let m = f.operator();
    let out = m * *rho.mat() * m.adjoint();
    let trace = out.trace().re;
    if !(trace > MIN_FILTER_TRACE) {
        return Err(Error::VanishingTrace { trace });
    }
    DensityMatrix::new(out.scale_real(1.0 / trace).hermitian_part())
}

/// Concurrence after filtering as predicted from the input concurrence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PredictedConcurrence {
    pub value: f64,
    /// Set when the raw prediction fell outside `[0, 1]` and was clipped.
    pub clipped: bool,
}

/// `C_in · |det A||det B| / trace_factor`, clipped to `[0, 1]`.
pub fn concurrence_transform(
    c_in: f64,
    f: &FilterPair,
    trace_factor: f64,
) -> Result<PredictedConcurrence> {
    if !(trace_factor > 0.0) {
        return Err(Error::NonpositiveTrace {
            trace: trace_factor,
        });
    }
    let raw = c_in * f.det_product() / trace_factor;
    let value = raw.clamp(0.0, 1.0);
    Ok(PredictedConcurrence {
        value,
        clipped: value != raw,
    })
}

pub const NORMAL_FORM_MAX_ITERS: usize = 500;
pub const NORMAL_FORM_TOL: f64 = 1e-9;

/// Result of [`bell_diagonal_normal_form`].
#[derive(Clone, Copy, Debug)]
pub struct NormalForm {
    /// Accumulated filters; `apply_filter(ρ, filter)` is the normal form.
    pub filter: FilterPair,
    /// Bell weights of the normal form, descending.
    pub spec: BellDiagonalSpec,
    pub state: DensityMatrix,
    /// `Tr((A⊗B)ρ(A⊗B)†)` for the accumulated filters.
    pub trace_factor: f64,
    pub iterations: usize,
}

/// Brings a full-rank state to Bell-diagonal form by alternately filtering
/// each qubit with `ρ_X^{-1/2}` (rescaled to unit determinant) until both
/// marginals are maximally mixed, then rotating the correlation tensor to
/// diagonal form with a local unitary pair.
pub fn bell_diagonal_normal_form(
    rho: &DensityMatrix,
    max_iters: usize,
    tol: f64,
) -> Result<NormalForm> {
    let min_eigenvalue = rho.eigenvalues()[0];
    if min_eigenvalue <= 1e-8 {
        return Err(Error::RankDeficient { min_eigenvalue });
    }
    let half = Mat2::identity().scale_real(0.5);
    let marginal_error =
        |m: &Mat4| (reduced_a(m) - half).max_abs().max((reduced_b(m) - half).max_abs());

    let mut cur = *rho.mat();
    let mut acc = FilterPair::identity();
    let mut iterations = 0;
    // Aim below tol so the final local rotation cannot push us over it.
    while marginal_error(&cur) > 0.1 * tol {
        if iterations == max_iters {
            return Err(Error::NoConvergence {
                iterations,
                residual: marginal_error(&cur),
            });
        }
        iterations += 1;
        let fa = inverse_sqrt_unit_det(&reduced_a(&cur))?;
        cur = filter_normalized(&cur, &fa.kron(&Mat2::identity()));
        let fb = inverse_sqrt_unit_det(&reduced_b(&cur))?;
        cur = filter_normalized(&cur, &Mat2::identity().kron(&fb));
        acc = FilterPair { a: fa, b: fb }.compose(&acc);
    }

    let (ua, ub) = diagonalizing_local_unitaries(&cur)?;
    let filter = FilterPair { a: ua, b: ub }.compose(&acc);
    let trace_factor = filter_trace(rho, &filter);
    let state = apply_filter(rho, &filter)?;

    let bells = bell_basis();
    let mut weights = [0.0; 4];
    let mut off = 0.0f64;
    for (k, bk) in bells.iter().enumerate() {
        weights[k] = state.mat().quadratic_form(bk.amplitudes()).re;
        for bl in &bells[k + 1..] {
            let v = state.mat().mul_vec(bl.amplitudes());
            off = off.max(matcore::dot(bk.amplitudes(), &v).norm());
        }
    }
    let residual = off.max(marginal_error(state.mat()));
    if residual > tol {
        return Err(Error::NoConvergence {
            iterations,
            residual,
        });
    }
    let spec = BellDiagonalSpec::from_weights(weights.map(|w| w.max(0.0)))?;
    Ok(NormalForm {
        filter,
        spec,
        state,
        trace_factor,
        iterations,
    })
}

fn filter_normalized(m: &Mat4, op: &Mat4) -> Mat4 {
    let out = *op * *m * op.adjoint();
    out.scale_real(1.0 / out.trace().re).hermitian_part()
}

/// `r^{-1/2}` scaled to determinant one, i.e. `r^{-1/2} · det(r)^{1/4}`.
fn inverse_sqrt_unit_det(r: &Mat2) -> Result<Mat2> {
    let e = herm_eig(r)?;
    if e.min() <= 0.0 {
        return Err(Error::RankDeficient {
            min_eigenvalue: e.min(),
        });
    }
    let scale = (e.values[0] * e.values[1]).powf(0.25);
    Ok(e.reconstruct_with(&e.values.map(|l| scale / l.sqrt())))
}

/// For a state with maximally mixed marginals, `ρ = (I + Σ T_ij σ_i⊗σ_j)/4`;
/// returns SU(2) elements whose adjoint action diagonalizes `T`.
fn diagonalizing_local_unitaries(m: &Mat4) -> Result<(Mat2, Mat2)> {
    let paulis = [Mat2::pauli_x(), Mat2::pauli_y(), Mat2::pauli_z()];
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m.trace_product(&paulis[i].kron(&paulis[j])).re;
        }
    }
    let (u, v) = real_svd3(&t)?;
    // Local rotations act as T ↦ R_A T R_Bᵀ; choose R_A = Uᵀ, R_B = Vᵀ.
    Ok((su2_from_rotation(&transpose3(&u)), su2_from_rotation(&transpose3(&v))))
}

type Mat3 = [[f64; 3]; 3];

fn transpose3(m: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| m[j][i]))
}

fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn column3(m: &Mat3, j: usize) -> [f64; 3] {
    [m[0][j], m[1][j], m[2][j]]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: &[f64; 3]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `T = U D Vᵀ` with `U, V ∈ SO(3)` and `D` diagonal (entries may be negative).
fn real_svd3(t: &Mat3) -> Result<(Mat3, Mat3)> {
    // Right singular vectors from the eigenvectors of TᵀT, embedded in 4x4.
    let mut gram = CMat::<4>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let s: f64 = (0..3).map(|k| t[k][i] * t[k][j]).sum();
            gram[(i, j)] = C64::new(s, 0.0);
        }
    }
    gram[(3, 3)] = C64::new(-1.0, 0.0); // parks the padding direction at index 0
    let eig = herm_eig(&gram)?;
    let mut v = [[0.0; 3]; 3];
    for (col, k) in (1..4).rev().enumerate() {
        let vec = eig.vector(k);
        // Real symmetric input; strip the residual phase.
        let ph = vec
            .iter()
            .copied()
            .find(|z| z.norm() > 1e-8)
            .map(|z| z.conj() / z.norm())
            .unwrap_or(ONE);
        for i in 0..3 {
            v[i][col] = (vec[i] * ph).re;
        }
    }
    if det3(&v) < 0.0 {
        for row in v.iter_mut() {
            row[2] = -row[2];
        }
    }
    // U columns: T v_k normalized, completed to a right-handed frame.
    let mut ucols: Vec<[f64; 3]> = Vec::with_capacity(3);
    for k in 0..3 {
        let vk = column3(&v, k);
        let mut w: [f64; 3] = std::array::from_fn(|i| (0..3).map(|j| t[i][j] * vk[j]).sum());
        for prev in &ucols {
            let d: f64 = (0..3).map(|i| prev[i] * w[i]).sum();
            for i in 0..3 {
                w[i] -= d * prev[i];
            }
        }
        let n = norm3(&w);
        if n > 1e-12 {
            ucols.push(w.map(|x| x / n));
        } else {
            break;
        }
    }
    while ucols.len() < 3 {
        let next = match ucols.len() {
            0 => [1.0, 0.0, 0.0],
            1 => {
                let a = ucols[0];
                let trial = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
                let c = cross(&a, &trial);
                c.map(|x| x / norm3(&c))
            }
            _ => cross(&ucols[0], &ucols[1]),
        };
        ucols.push(next);
    }
    let mut u: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| ucols[j][i]));
    if det3(&u) < 0.0 {
        for row in u.iter_mut() {
            row[2] = -row[2];
        }
    }
    Ok((u, v))
}

/// SU(2) element `W` with `W σ_i W† = Σ_k R_ki σ_k` for `R ∈ SO(3)`.
pub(crate) fn su2_from_rotation(r: &Mat3) -> Mat2 {
    // Unit quaternion (w, x, y, z) of R, Shepperd's branch selection.
    let tr = r[0][0] + r[1][1] + r[2][2];
    let (w, x, y, z) = if tr > 0.0 {
        let s = 2.0 * (1.0 + tr).sqrt();
        (
            0.25 * s,
            (r[2][1] - r[1][2]) / s,
            (r[0][2] - r[2][0]) / s,
            (r[1][0] - r[0][1]) / s,
        )
    } else if r[0][0] >= r[1][1] && r[0][0] >= r[2][2] {
        let s = 2.0 * (1.0 + r[0][0] - r[1][1] - r[2][2]).sqrt();
        (
            (r[2][1] - r[1][2]) / s,
            0.25 * s,
            (r[0][1] + r[1][0]) / s,
            (r[0][2] + r[2][0]) / s,
        )
    } else if r[1][1] >= r[2][2] {
        let s = 2.0 * (1.0 + r[1][1] - r[0][0] - r[2][2]).sqrt();
        (
            (r[0][2] - r[2][0]) / s,
            (r[0][1] + r[1][0]) / s,
            0.25 * s,
            (r[1][2] + r[2][1]) / s,
        )
    } else {
        let s = 2.0 * (1.0 + r[2][2] - r[0][0] - r[1][1]).sqrt();
        (
            (r[1][0] - r[0][1]) / s,
            (r[0][2] + r[2][0]) / s,
            (r[1][2] + r[2][1]) / s,
            0.25 * s,
        )
    };
    // W = w I − i (x σ_x + y σ_y + z σ_z)
    Mat2::identity().scale_real(w)
        - (Mat2::pauli_x().scale_real(x) + Mat2::pauli_y().scale_real(y) + Mat2::pauli_z().scale_real(z))
            .scale(I)
}

/// A convex decomposition `ρ = Σ pᵢ |ψᵢ⟩⟨ψᵢ|`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleDecomposition {
    pub elements: Vec<(f64, PureState)>,
}

impl EnsembleDecomposition {
    pub fn weight_sum(&self) -> f64 {
        self.elements.iter().map(|(w, _)| w).sum()
    }

    pub fn reconstruct(&self) -> Mat4 {
        self.elements.iter().fold(Mat4::zeros(), |acc, (w, psi)| {
            acc + Mat4::outer(psi.amplitudes(), psi.amplitudes()).scale_real(*w)
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

const MIN_ELEMENT_WEIGHT: f64 = 1e-15;

/// Decomposes `ρ` into at most four pure states that each have concurrence
/// `C(ρ)` (Wootters' construction).
pub fn wootters_decomposition(rho: &DensityMatrix) -> Result<EnsembleDecomposition> {
    let x = psd_factor(rho.mat())?;
    let rank = (0..4).filter(|&j| matcore::norm(&x.column(j)) > 0.0).count();
    if rank == 1 {
        let psi = PureState::normalize(x.column(0))?;
        return Ok(EnsembleDecomposition {
            elements: vec![(1.0, psi)],
        });
    }

    // Y = X Ū with Yᵀ(σ_y⊗σ_y)Y = diag(s), s descending.
    let tau = x.transpose() * Mat4::spin_flip() * x;
    let (u, s) = takagi(&tau)?;
    let y: [[C64; 4]; 4] = std::array::from_fn(|k| x.mul_vec(&u.column(k).map(|z| z.conj())));
    let c = s[0] - s[1] - s[2] - s[3];

    let w: [[C64; 4]; 4] = if c > 0.0 {
        let z = [y[0], y[1].map(|v| v * I), y[2].map(|v| v * I), y[3].map(|v| v * I)];
        let d = [s[0], -s[1], -s[2], -s[3]];
        let mut m = [[0.0; 4]; 4];
        for j in 0..4 {
            for k in 0..4 {
                m[j][k] = -c * matcore::dot(&z[j], &z[k]).re;
            }
            m[j][j] += d[j];
        }
        let o = zero_diagonal_rotation(m);
        combine(&o, &z)
    } else {
        let phases = closing_phases(&s);
        let z: [[C64; 4]; 4] =
            std::array::from_fn(|j| y[j].map(|v| v * C64::from_polar(1.0, phases[j] / 2.0)));
        let h = [
            [0.5, 0.5, 0.5, 0.5],
            [0.5, 0.5, -0.5, -0.5],
            [0.5, -0.5, 0.5, -0.5],
            [0.5, -0.5, -0.5, 0.5],
        ];
        combine(&h, &z)
    };

    let mut elements = Vec::with_capacity(4);
    for wi in &w {
        let p = matcore::norm(wi).powi(2);
        if p > MIN_ELEMENT_WEIGHT {
            elements.push((p, PureState::normalize(*wi)?));
        }
    }
    Ok(EnsembleDecomposition { elements })
}

fn combine(o: &[[f64; 4]; 4], z: &[[C64; 4]; 4]) -> [[C64; 4]; 4] {
    std::array::from_fn(|i| {
        std::array::from_fn(|k| (0..4).map(|j| z[j][k] * o[i][j]).sum())
    })
}

/// Takagi factorization `τ = U diag(s) Uᵀ` of a complex symmetric matrix,
/// `s` descending. Uses the real symmetric embedding
/// `[[Re τ, Im τ], [Im τ, −Re τ]]`, whose eigenpair `(s, (x; y))` gives a
/// Takagi vector `u = x + iy` with `τ ū = s u`.
pub(crate) fn takagi(tau: &Mat4) -> Result<(Mat4, [f64; 4])> {
    let mut h = CMat::<8>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let (re, im) = (tau[(i, j)].re, tau[(i, j)].im);
            h[(i, j)] = C64::new(re, 0.0);
            h[(i, j + 4)] = C64::new(im, 0.0);
            h[(i + 4, j)] = C64::new(im, 0.0);
            h[(i + 4, j + 4)] = C64::new(-re, 0.0);
        }
    }
    let eig = herm_eig(&h.hermitian_part())?;
    let mut cols: Vec<[C64; 4]> = Vec::with_capacity(4);
    let mut s = [0.0; 4];
    for k in (0..8).rev() {
        if cols.len() == 4 || eig.values[k] <= 1e-13 {
            break;
        }
        let v = eig.vector(k);
        // real symmetric problem: make the vector real
        let ph = v
            .iter()
            .copied()
            .find(|z| z.norm() > 1e-8)
            .map(|z| z.conj() / z.norm())
            .unwrap_or(ONE);
        let u: [C64; 4] = std::array::from_fn(|i| C64::new((v[i] * ph).re, (v[i + 4] * ph).re));
        s[cols.len()] = eig.values[k];
        cols.push(u);
    }
    // Complete with an orthonormal basis of the complement (s = 0 there).
    for e in 0..4 {
        if cols.len() == 4 {
            break;
        }
        let mut v: [C64; 4] = std::array::from_fn(|i| if i == e { ONE } else { ZERO });
        for _ in 0..2 {
            for c in &cols {
                let d = matcore::dot(c, &v);
                for i in 0..4 {
                    v[i] -= c[i] * d;
                }
            }
        }
        let n = matcore::norm(&v);
        if n > 0.5 {
            cols.push(v.map(|z| z / n));
        }
    }
    let mut u = Mat4::zeros();
    for (k, c) in cols.iter().enumerate() {
        u.set_column(k, c);
    }
    Ok((u, s))
}

/// Real orthogonal `O` with `diag(O M Oᵀ) = 0` for a traceless symmetric `M`,
/// built from Givens rotations that each zero the currently largest diagonal
/// entry against the largest entry of opposite sign.
fn zero_diagonal_rotation(mut m: [[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut o = [[0.0; 4]; 4];
    for (i, row) in o.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = m.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
    let tiny = 1e-15 * scale.max(f64::MIN_POSITIVE);
    for _ in 0..3 {
        let Some(i) = (0..4)
            .filter(|&i| m[i][i].abs() > tiny)
            .max_by(|&a, &b| m[a][a].abs().total_cmp(&m[b][b].abs()))
        else {
            break;
        };
        let Some(j) = (0..4)
            .filter(|&j| j != i && m[j][j] * m[i][i] < 0.0)
            .max_by(|&a, &b| m[a][a].abs().total_cmp(&m[b][b].abs()))
        else {
            break;
        };
        // m_ii + 2t m_ij + t² m_jj = 0, smaller root in magnitude
        let (mii, mij, mjj) = (m[i][i], m[i][j], m[j][j]);
        let disc = (mij * mij - mii * mjj).sqrt();
        let t = if mij >= 0.0 {
            -mii / (mij + disc)
        } else {
            mii / (disc - mij)
        };
        let c = 1.0 / (1.0 + t * t).sqrt();
        let sn = t * c;
        givens_rows(&mut m, i, j, c, sn);
        givens_cols(&mut m, i, j, c, sn);
        m[i][i] = 0.0;
        givens_rows(&mut o, i, j, c, sn);
    }
    o
}

fn givens_rows(m: &mut [[f64; 4]; 4], i: usize, j: usize, c: f64, s: f64) {
    for k in 0..4 {
        let (a, b) = (m[i][k], m[j][k]);
        m[i][k] = c * a + s * b;
        m[j][k] = -s * a + c * b;
    }
}

fn givens_cols(m: &mut [[f64; 4]; 4], i: usize, j: usize, c: f64, s: f64) {
    for row in m.iter_mut() {
        let (a, b) = (row[i], row[j]);
        row[i] = c * a + s * b;
        row[j] = -s * a + c * b;
    }
}

/// Angles `φ` with `Σ s_j e^{iφ_j} = 0`, for descending `s` with
/// `s₁ ≤ s₂ + s₃ + s₄`.
fn closing_phases(s: &[f64; 4]) -> [f64; 4] {
    let [s1, s2, s3, s4] = *s;
    let lo = (s1 - s2).max(s3 - s4).max(0.0);
    let hi = (s1 + s2).min(s3 + s4);
    let r = lo.min(hi);
    let angle = |num: f64, den: f64| -> f64 {
        if den <= 0.0 {
            0.0
        } else {
            (num / den).clamp(-1.0, 1.0).acos()
        }
    };
    let phi2 = angle(r * r - s1 * s1 - s2 * s2, 2.0 * s1 * s2);
    let p = C64::new(s1, 0.0) + C64::from_polar(s2, phi2);
    let q = -p;
    let psi = if q.norm() > 0.0 { q.arg() } else { 0.0 };
    let alpha = angle(r * r + s3 * s3 - s4 * s4, 2.0 * r * s3);
    let phi3 = psi + alpha;
    let rest = q - C64::from_polar(s3, phi3);
    let phi4 = if rest.norm() > 0.0 {
        rest.arg()
    } else {
        phi3 + std::f64::consts::PI
    };
    [0.0, phi2, phi3, phi4]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{concurrence, negativity, partial_transpose_eig, MeasureReport};
    use crate::states::*;

    #[test]
    fn identity_filter_is_noop() {
        let rho = sample_random(4, 3).unwrap();
        let out = apply_filter(&rho, &FilterPair::identity()).unwrap();
        assert!((*out.mat() - *rho.mat()).frobenius_norm() < 1e-15);
        assert!((filter_trace(&rho, &FilterPair::identity()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_filter_on_maximally_mixed() {
        let s = 2f64.sqrt();
        let a = Mat2::diag_real([s, 1.0 / s]);
        let f = FilterPair::new(a, a).unwrap();
        let out = apply_filter(&DensityMatrix::maximally_mixed(), &f).unwrap();
        let want = Mat4::diag_real([4.0, 1.0, 1.0, 0.25]).scale_real(1.0 / 6.25);
        assert!((*out.mat() - want).frobenius_norm() < 1e-14);
        assert_eq!(concurrence(&out), 0.0);
    }

    #[test]
    fn filter_raises_pure_state_concurrence() {
        let psi = PureState::new([
            C64::new(0.9f64.sqrt(), 0.0),
            ZERO,
            ZERO,
            C64::new(0.1f64.sqrt(), 0.0),
        ])
        .unwrap()
        .density();
        let r = (0.1f64 / 0.9).powf(0.25);
        let f = FilterPair::new(Mat2::diag_real([r, 1.0 / r]), Mat2::identity()).unwrap();
        let out = apply_filter(&psi, &f).unwrap();
        let pred = concurrence_transform(concurrence(&psi), &f, filter_trace(&psi, &f)).unwrap();
        assert!((concurrence(&out) - pred.value).abs() < 1e-12);
        assert!((concurrence(&out) - 1.0).abs() < 1e-12);
        assert!(concurrence(&out) > concurrence(&psi));
    }

    #[test]
    fn vanishing_trace_is_reported() {
        let rho = DensityMatrix::new(Mat4::diag_real([1.0, 0.0, 0.0, 0.0])).unwrap();
        // A projects qubit A onto |1⟩ after scaling to unit determinant
        let a = Mat2::from_real([[1e-7, 0.0], [0.0, 1e7]]);
        let f = FilterPair::new(a, Mat2::identity()).unwrap();
        assert!(matches!(apply_filter(&rho, &f), Err(Error::VanishingTrace { .. })));
    }

    #[test]
    fn transform_examples() {
        let f = FilterPair::identity();
        assert_eq!(concurrence_transform(0.3, &f, 1.0).unwrap().value, 0.3);
        let mut rng = rng_from_seed(1);
        let g = FilterPair::random_with(&mut rng);
        assert_eq!(concurrence_transform(0.0, &g, 0.37).unwrap().value, 0.0);
        assert!(matches!(
            concurrence_transform(0.5, &f, 0.0),
            Err(Error::NonpositiveTrace { .. })
        ));
        let clipped = concurrence_transform(0.9, &f, 0.5).unwrap();
        assert!(clipped.clipped && clipped.value == 1.0);
    }

    #[test]
    fn filter_rejects_non_unit_determinant() {
        assert!(FilterPair::new(Mat2::identity().scale_real(2.0), Mat2::identity()).is_err());
        let f = FilterPair::from_unnormalized(Mat2::identity().scale_real(2.0), Mat2::identity())
            .unwrap();
        assert!((f.a.det() - ONE).norm() < 1e-15);
        assert!(FilterPair::from_unnormalized(Mat2::zeros(), Mat2::identity()).is_err());
    }

    #[test]
    fn unitary_filters_preserve_measures() {
        let mut rng = rng_from_seed(4);
        for _ in 0..100 {
            let rho = sample_random_with(3, &mut rng).unwrap();
            let f = FilterPair::new(sample_su2_with(&mut rng), sample_su2_with(&mut rng)).unwrap();
            let a = MeasureReport::compute(&rho);
            let b = MeasureReport::compute(&apply_filter(&rho, &f).unwrap());
            assert!((a.negativity - b.negativity).abs() < 1e-9);
            assert!((a.concurrence - b.concurrence).abs() < 1e-9);
        }
    }

    #[test]
    fn rotation_to_su2_matches_adjoint_action() {
        let mut rng = rng_from_seed(12);
        let paulis = [Mat2::pauli_x(), Mat2::pauli_y(), Mat2::pauli_z()];
        for _ in 0..50 {
            // Rotation matrix of a random SU(2) element, then back.
            let w0 = sample_su2_with(&mut rng);
            let r: Mat3 = std::array::from_fn(|k| {
                std::array::from_fn(|i| {
                    0.5 * (paulis[k] * w0 * paulis[i] * w0.adjoint()).trace().re
                })
            });
            let w = su2_from_rotation(&r);
            for i in 0..3 {
                let lhs = w * paulis[i] * w.adjoint();
                let rhs = (0..3).fold(Mat2::zeros(), |acc, k| acc + paulis[k].scale_real(r[k][i]));
                assert!((lhs - rhs).frobenius_norm() < 1e-12);
            }
        }
    }

    #[test]
    fn normal_form_of_bell_diagonal_is_local_unitary() {
        let spec = BellDiagonalSpec::new([0.6, 0.2, 0.15, 0.05]).unwrap();
        let nf = bell_diagonal_normal_form(&bell_diagonal(&spec), 500, 1e-9).unwrap();
        for s in nf.filter.singular_values() {
            assert!((s - 1.0).abs() < 1e-8);
        }
        for (got, want) in nf.spec.lambdas().iter().zip(spec.lambdas()) {
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn normal_form_of_werner() {
        let nf = bell_diagonal_normal_form(&werner(0.7).unwrap(), 500, 1e-9).unwrap();
        for (got, want) in nf.spec.lambdas().iter().zip([0.775, 0.075, 0.075, 0.075]) {
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn normal_form_matches_filter_law() {
        let mut rng = rng_from_seed(21);
        for _ in 0..50 {
            let rho = sample_random_with(4, &mut rng).unwrap();
            let nf = bell_diagonal_normal_form(&rho, 500, 1e-9).unwrap();
            let half = Mat2::identity().scale_real(0.5);
            assert!((nf.state.reduced_a() - half).max_abs() <= 1e-9);
            assert!((nf.state.reduced_b() - half).max_abs() <= 1e-9);
            let c_nf = concurrence(&nf.state);
            let bd = (2.0 * nf.spec.largest() - 1.0).max(0.0);
            assert!((c_nf - bd).abs() <= 1e-7);
            let pred = concurrence_transform(concurrence(&rho), &nf.filter, nf.trace_factor).unwrap();
            assert!((pred.value - bd).abs() <= 1e-7);
        }
    }

    #[test]
    fn normal_form_is_idempotent() {
        let rho = sample_random(4, 31).unwrap();
        let nf = bell_diagonal_normal_form(&rho, 500, 1e-9).unwrap();
        let again = bell_diagonal_normal_form(&nf.state, 500, 1e-9).unwrap();
        for s in again.filter.singular_values() {
            assert!((s - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn normal_form_rejects_rank_deficient() {
        assert!(matches!(
            bell_diagonal_normal_form(&mems_rank2(0.5).unwrap(), 500, 1e-9),
            Err(Error::RankDeficient { .. })
        ));
        assert!(matches!(
            bell_diagonal_normal_form(&sample_random(4, 2).unwrap(), 0, 1e-9),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn takagi_factorizes() {
        let mut rng = rng_from_seed(6);
        for _ in 0..100 {
            let g = Mat4::from_fn(|_, _| complex_gaussian(&mut rng));
            let tau = g + g.transpose();
            let (u, s) = takagi(&tau).unwrap();
            assert!((u.adjoint() * u - Mat4::identity()).frobenius_norm() < 1e-12);
            let rebuilt = u * Mat4::diag_real(s) * u.transpose();
            assert!((rebuilt - tau).frobenius_norm() < 1e-11 * tau.frobenius_norm());
            assert!(s.windows(2).all(|w| w[0] >= w[1]));
        }
        // rank-deficient and degenerate
        let tau = Mat4::diag_real([1.0, 1.0, 0.0, 0.0]);
        let (u, s) = takagi(&tau).unwrap();
        assert!((u * Mat4::diag_real(s) * u.transpose() - tau).frobenius_norm() < 1e-13);
    }

    fn check_decomposition(rho: &DensityMatrix) -> EnsembleDecomposition {
        let dec = wootters_decomposition(rho).unwrap();
        let c = concurrence(rho);
        assert!(dec.len() <= 4);
        assert!((dec.weight_sum() - 1.0).abs() <= 1e-10);
        assert!((dec.reconstruct() - *rho.mat()).frobenius_norm() <= 1e-9);
        for (_, psi) in &dec.elements {
            assert!(
                (psi.concurrence() - c).abs() <= 1e-8,
                "element {} vs {}",
                psi.concurrence(),
                c
            );
        }
        dec
    }

    #[test]
    fn decomposition_examples() {
        let psi = sample_random(1, 4).unwrap();
        let dec = check_decomposition(&psi);
        assert_eq!(dec.len(), 1);
        assert_eq!(dec.elements[0].0, 1.0);

        let bd = bell_diagonal(&BellDiagonalSpec::new([0.7, 0.1, 0.1, 0.1]).unwrap());
        let dec = check_decomposition(&bd);
        assert_eq!(dec.len(), 4);
        for (_, p) in &dec.elements {
            assert!((p.concurrence() - 0.4).abs() < 1e-8);
        }

        let dec = check_decomposition(&mems_rank2(0.5).unwrap());
        for (_, p) in &dec.elements {
            assert!((p.concurrence() - 0.5).abs() < 1e-8);
        }

        check_decomposition(&DensityMatrix::maximally_mixed());
        check_decomposition(&werner(1.0 / 3.0).unwrap());
        check_decomposition(&DensityMatrix::new(Mat4::diag_real([1.0, 0.0, 0.0, 0.0])).unwrap());
    }

    #[test]
    fn decomposition_random_states_and_weyl_mechanism() {
        let mut rng = rng_from_seed(14);
        for rank in 1..=4 {
            for _ in 0..100 {
                let rho = sample_random_with(rank, &mut rng).unwrap();
                let dec = check_decomposition(&rho);
                let lmin = partial_transpose_eig(&rho).min();
                let bound: f64 = dec
                    .elements
                    .iter()
                    .map(|(w, p)| w * partial_transpose_eig(&p.density()).min())
                    .sum();
                assert!(lmin >= bound - 1e-9);
                assert!(negativity(&rho) <= concurrence(&rho) + 1e-9);
            }
        }
    }

    #[test]
    fn closing_phases_close_the_polygon() {
        for s in [[0.4, 0.3, 0.2, 0.1], [0.3, 0.3, 0.0, 0.0], [0.25; 4], [0.5, 0.2, 0.2, 0.1], [0.0; 4]] {
            let ph = closing_phases(&s);
            let sum: C64 = (0..4).map(|k| C64::from_polar(s[k], ph[k])).sum();
            assert!(sum.norm() < 1e-14, "{s:?} -> {sum}");
        }
    }
}
