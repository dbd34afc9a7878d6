//! Dense complex linear algebra for the small fixed sizes a two-qubit
//! problem needs.
//!
//! Everything is built around [`CMat`], a stack-allocated square matrix
//! indexed by a const generic dimension. The public API is used with
//! `N = 2` (single-qubit operators) and `N = 4` (two-qubit operators);
//! the only other instantiation is an internal 8x8 real-symmetric
//! eigenproblem used by the Takagi factorization in [`crate::filters`].
//!
//! The eigensolver is cyclic Jacobi, which is unconditionally stable at
//! these sizes and returns eigenvectors that are orthonormal to working
//! precision even for clustered spectra.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance on `‖H − H†‖_F` (relative to `max(1, ‖H‖_F)`) accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues at or below this are treated as exact zeros by [`psd_factor`].
pub const RANK_TOL: f64 = 1e-13;

const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;
const TIE_TOL: f64 = 1e-12;

/// Square complex matrix of dimension `N`, stored row-major on the stack.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat<const N: usize> {
    data: [[C64; N]; N],
}

pub type Mat2 = CMat<2>;
pub type Mat4 = CMat<4>;

impl<const N: usize> Default for CMat<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> CMat<N> {
    pub const DIM: usize = N;

    pub fn zeros() -> Self {
        Self { data: [[ZERO; N]; N] }
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.data[i][i] = ONE;
        }
        m
    }

    pub fn from_rows(data: [[C64; N]; N]) -> Self {
        Self { data }
    }

    pub fn from_real(rows: [[f64; N]; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.data[i][j] = C64::new(rows[i][j], 0.0);
            }
        }
        m
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.data[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn diag_real(d: [f64; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.data[i][i] = C64::new(d[i], 0.0);
        }
        m
    }

    /// `|v⟩⟨w|`.
    pub fn outer(v: &[C64; N], w: &[C64; N]) -> Self {
        Self::from_fn(|i, j| v[i] * w[j].conj())
    }

    pub fn rows(&self) -> &[[C64; N]; N] {
        &self.data
    }

    pub fn column(&self, j: usize) -> [C64; N] {
        std::array::from_fn(|i| self.data[i][j])
    }

    pub fn set_column(&mut self, j: usize, col: &[C64; N]) {
        for i in 0..N {
            self.data[i][j] = col[i];
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|i, j| self.data[j][i].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.data[j][i])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(|i, j| self.data[i][j].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_fn(|i, j| self.data[i][j] * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self::from_fn(|i, j| self.data[i][j] * s)
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|i| self.data[i][i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `‖H − H†‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).frobenius_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * self.frobenius_norm().max(1.0)
    }

    /// `(H + H†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale_real(0.5)
    }

    pub fn mul_vec(&self, v: &[C64; N]) -> [C64; N] {
        std::array::from_fn(|i| (0..N).map(|k| self.data[i][k] * v[k]).sum())
    }

    /// `⟨v|M|v⟩`.
    pub fn quadratic_form(&self, v: &[C64; N]) -> C64 {
        let mv = self.mul_vec(v);
        (0..N).map(|i| v[i].conj() * mv[i]).sum()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        let mut acc = ZERO;
        for i in 0..N {
            for k in 0..N {
                acc += self.data[i][k] * other.data[k][i];
            }
        }
        acc
    }
}

impl Mat2 {
    pub fn det(&self) -> C64 {
        self.data[0][0] * self.data[1][1] - self.data[0][1] * self.data[1][0]
    }

    /// Kronecker product `self ⊗ other`, basis order `|00⟩,|01⟩,|10⟩,|11⟩`.
    pub fn kron(&self, other: &Mat2) -> Mat4 {
        Mat4::from_fn(|r, c| self.data[r / 2][c / 2] * other.data[r % 2][c % 2])
    }

    pub fn pauli_x() -> Self {
        Self::from_real([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn pauli_y() -> Self {
        Self::from_rows([[ZERO, -I], [I, ZERO]])
    }

    pub fn pauli_z() -> Self {
        Self::from_real([[1.0, 0.0], [0.0, -1.0]])
    }
}

impl Mat4 {
    /// `σ_y ⊗ σ_y`, the spin-flip operator.
    pub fn spin_flip() -> Self {
        Self::from_real([
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
        ])
    }
}

impl<const N: usize> Index<(usize, usize)> for CMat<N> {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for CMat<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i][j]
    }
}

impl<const N: usize> Add for CMat<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.data[i][j] + rhs.data[i][j])
    }
}

impl<const N: usize> Sub for CMat<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.data[i][j] - rhs.data[i][j])
    }
}

impl<const N: usize> Mul for CMat<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for k in 0..N {
                let a = self.data[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..N {
                    out.data[i][j] += a * rhs.data[k][j];
                }
            }
        }
        out
    }
}

pub fn dot<const N: usize>(v: &[C64; N], w: &[C64; N]) -> C64 {
    (0..N).map(|i| v[i].conj() * w[i]).sum()
}

pub fn norm<const N: usize>(v: &[C64; N]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigendecomposition `H = U diag(values) U†` of a Hermitian matrix.
#[derive(Clone, Copy, Debug)]
pub struct HermEig<const N: usize> {
    /// Ascending.
    pub values: [f64; N],
    /// Eigenvectors as columns, each phase-fixed so that its first
    /// non-negligible component is real and positive.
    pub vectors: CMat<N>,
}

impl<const N: usize> HermEig<N> {
    pub fn vector(&self, k: usize) -> [C64; N] {
        self.vectors.column(k)
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[N - 1]
    }

    /// `U diag(d) U†`.
    pub fn reconstruct_with(&self, d: &[f64; N]) -> CMat<N> {
        let u = &self.vectors;
        CMat::from_fn(|i, j| {
            (0..N)
                .map(|k| u[(i, k)] * d[k] * u[(j, k)].conj())
                .sum()
        })
    }
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
pub fn herm_eig<const N: usize>(h: &CMat<N>) -> Result<HermEig<N>> {
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL * h.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let mut a = h.hermitian_part();
    let mut v = CMat::<N>::identity();
    let scale = a.frobenius_norm();

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= JACOBI_OFF_TOL * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut values: [f64; N] = std::array::from_fn(|i| a[(i, i)].re);
    for k in 0..N {
        let mut col = v.column(k);
        canonicalize_phase(&mut col);
        v.set_column(k, &col);
    }
    let order = sorted_order(&values, &v);
    let vectors = CMat::from_fn(|i, j| v[(i, order[j])]);
    values = std::array::from_fn(|j| values[order[j]]);
    Ok(HermEig { values, vectors })
}

fn off_diagonal_norm<const N: usize>(a: &CMat<N>) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Annihilates `a[p][q]` with the unitary `J = [[c, s e^{iφ}], [−s e^{−iφ}, c]]`
/// acting on rows/columns `p, q`; accumulates `v ← v J`.
fn rotate<const N: usize>(a: &mut CMat<N>, v: &mut CMat<N>, p: usize, q: usize) {
    let g = a[(p, q)];
    let g_abs = g.norm();
    if g_abs == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if g_abs <= f64::EPSILON * 1e-2 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = g / g_abs;
    let tau = (aqq - app) / (2.0 * g_abs);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let jpq = phase * s; // J[p][q]
    let jqp = -phase.conj() * s; // J[q][p]

    // A ← A J (columns p, q)
    for k in 0..N {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * jqp;
        a[(k, q)] = akp * jpq + akq * c;
    }
    // A ← J† A (rows p, q)
    for k in 0..N {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * jqp.conj();
        a[(q, k)] = apk * jpq.conj() + aqk * c;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for k in 0..N {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * c;
    }
}

/// Rotates `v` so its first component with modulus above `1e-8 · ‖v‖` is real positive.
pub fn canonicalize_phase<const N: usize>(v: &mut [C64; N]) {
    let n = norm(v);
    if n == 0.0 {
        return;
    }
    if let Some(lead) = v.iter().copied().find(|z| z.norm() > 1e-8 * n) {
        let ph = lead.conj() / lead.norm();
        for z in v.iter_mut() {
            *z *= ph;
        }
    }
}

fn leading_real<const N: usize>(v: &CMat<N>, col: usize) -> f64 {
    let c = v.column(col);
    let n = norm(&c);
    c.iter()
        .find(|z| z.norm() > 1e-8 * n)
        .map(|z| z.re)
        .unwrap_or(0.0)
}

fn sorted_order<const N: usize>(values: &[f64; N], v: &CMat<N>) -> [usize; N] {
    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&x, &y| values[x].total_cmp(&values[y]));
    // Within runs of (numerically) tied eigenvalues, order by the leading component.
    let mut start = 0;
    while start < N {
        let mut end = start + 1;
        while end < N && values[order[end]] - values[order[end - 1]] <= TIE_TOL {
            end += 1;
        }
        if end - start > 1 {
            order[start..end]
                .sort_by(|&x, &y| leading_real(v, x).total_cmp(&leading_real(v, y)));
        }
        start = end;
    }
    order
}

/// Singular values in descending order, via one-sided (Hestenes) Jacobi on
/// the columns of `m`.
pub fn singular_values<const N: usize>(m: &CMat<N>) -> [f64; N] {
    let mut w = *m;
    let scale = m.frobenius_norm();
    if scale == 0.0 {
        return [0.0; N];
    }
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..N {
            for q in (p + 1)..N {
                let cp = w.column(p);
                let cq = w.column(q);
                let alpha = dot(&cp, &cp).re;
                let beta = dot(&cq, &cq).re;
                let gamma = dot(&cp, &cq);
                let g_abs = gamma.norm();
                if g_abs <= 1e-15 * (alpha * beta).sqrt() || g_abs == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g_abs;
                let tau = (beta - alpha) / (2.0 * g_abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let jpq = phase * s;
                let jqp = -phase.conj() * s;
                for k in 0..N {
                    let a = cp[k];
                    let b = cq[k];
                    w[(k, p)] = a * c + b * jqp;
                    w[(k, q)] = a * jpq + b * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: [f64; N] = std::array::from_fn(|j| norm(&w.column(j)));
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Factor `ρ = X X†` through the eigendecomposition; columns belonging to
/// eigenvalues at or below [`RANK_TOL`] are exactly zero.
pub fn psd_factor<const N: usize>(rho: &CMat<N>) -> Result<CMat<N>> {
    let eig = herm_eig(rho)?;
    if eig.min() < -PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min(),
        });
    }
    let mut x = CMat::<N>::zeros();
    // Largest eigenvalues first, so nonzero columns lead.
    for (col, k) in (0..N).rev().enumerate() {
        let lam = eig.values[k];
        if lam > RANK_TOL {
            let u = eig.vector(k);
            let r = lam.sqrt();
            x.set_column(col, &u.map(|z| z * r));
        }
    }
    Ok(x)
}

/// `U f(Λ) U†`. Fails if `f` returns a non-finite value at any eigenvalue.
pub fn herm_func<const N: usize>(h: &CMat<N>, f: impl Fn(f64) -> f64) -> Result<CMat<N>> {
    let eig = herm_eig(h)?;
    let mut d = [0.0; N];
    for k in 0..N {
        let y = f(eig.values[k]);
        if !y.is_finite() {
            return Err(Error::Domain {
                eigenvalue: eig.values[k],
            });
        }
        d[k] = y;
    }
    Ok(eig.reconstruct_with(&d))
}
