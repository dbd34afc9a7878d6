//! Partial transpose, negativity, concurrence and entanglement of formation.

use serde::Serialize;

use crate::matcore::{herm_eig, psd_factor, singular_values, HermEig, Mat4, RANK_TOL};
use crate::states::{BellDiagonalSpec, DensityMatrix};

/// Transpose on the second qubit: `((i,j),(k,l)) ↦ ((i,l),(k,j))`.
pub fn partial_transpose_mat(m: &Mat4) -> Mat4 {
    Mat4::from_fn(|r, c| {
        let (i, l) = (r / 2, r % 2);
        let (k, j) = (c / 2, c % 2);
        m[(2 * i + j, 2 * k + l)]
    })
}

pub fn partial_transpose(rho: &DensityMatrix) -> Mat4 {
    partial_transpose_mat(rho.mat())
}

/// Eigendecomposition of `ρ^Γ`.
pub fn partial_transpose_eig(rho: &DensityMatrix) -> HermEig<4> {
    herm_eig(&partial_transpose(rho)).expect("partial transpose of a state is Hermitian")
}

/// `2 · max(0, −λ_min(ρ^Γ))`.
pub fn negativity(rho: &DensityMatrix) -> f64 {
    negativity_from_min_eigenvalue(partial_transpose_eig(rho).min())
}

pub fn negativity_from_min_eigenvalue(lambda_min: f64) -> f64 {
    (-2.0 * lambda_min).max(0.0)
}

/// Concurrence from the singular values of `Xᵀ(σ_y⊗σ_y)X` with `ρ = XX†`.
fn concurrence_from_factor(x: &Mat4) -> f64 {
    let r = x.transpose() * Mat4::spin_flip() * *x;
    let s = singular_values(&r);
    (s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0)
}

/// Wootters concurrence `max(0, s₁ − s₂ − s₃ − s₄)`.
///
/// The `sᵢ` are obtained as singular values of `Xᵀ(σ_y⊗σ_y)X` for the
/// eigenvalue-based factor `ρ = XX†`, which keeps rank-deficient states exact.
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    let x = psd_factor(rho.mat()).expect("validated state is PSD");
    concurrence_from_factor(&x)
}

/// Same quantity as [`concurrence`], but through a diagonally pivoted
/// Cholesky factorization `ρ = XX†`.
pub fn concurrence_cholesky(rho: &DensityMatrix) -> f64 {
    concurrence_from_factor(&pivoted_cholesky(rho.mat()))
}

/// Outer-product Cholesky with symmetric diagonal pivoting. Stops once the
/// remaining diagonal drops below [`RANK_TOL`]; unused columns stay zero.
pub fn pivoted_cholesky(m: &Mat4) -> Mat4 {
    let mut a = *m;
    let mut x = Mat4::zeros();
    let mut used = [false; 4];
    for col in 0..4 {
        let Some(p) = (0..4)
            .filter(|&j| !used[j])
            .max_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re))
        else {
            break;
        };
        let d = a[(p, p)].re;
        if d <= RANK_TOL {
            break;
        }
        used[p] = true;
        let inv = 1.0 / d.sqrt();
        let v: [_; 4] = std::array::from_fn(|i| if used[i] && i != p { Default::default() } else { a[(i, p)] * inv });
        x.set_column(col, &v);
        for i in 0..4 {
            for j in 0..4 {
                a[(i, j)] -= v[i] * v[j].conj();
            }
        }
    }
    x
}

/// `max(0, 2λ₁ − 1)`.
pub fn concurrence_bell_diagonal(spec: &BellDiagonalSpec) -> f64 {
    (2.0 * spec.largest() - 1.0).max(0.0)
}

/// Binary entropy in bits, `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// `h((1 + √(1 − C²))/2)` in ebits.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy((1.0 + (1.0 - c * c).sqrt()) / 2.0)
}

pub fn eof(rho: &DensityMatrix) -> f64 {
    eof_from_concurrence(concurrence(rho))
}

/// Measures of a single state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureReport {
    pub negativity: f64,
    pub concurrence: f64,
    pub eof: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_entropy: Option<f64>,
}

impl MeasureReport {
    /// Negativity, concurrence and EoF; `rel_entropy` is left unset because
    /// it needs the iterative solver.
    pub fn compute(rho: &DensityMatrix) -> Self {
        let c = concurrence(rho);
        Self {
            negativity: negativity(rho),
            concurrence: c,
            eof: eof_from_concurrence(c),
            rel_entropy: None,
        }
    }

    pub fn is_consistent(&self) -> bool {
        const TOL: f64 = 1e-9;
        let unit = |x: f64| x.is_finite() && (-TOL..=1.0 + TOL).contains(&x);
        unit(self.negativity)
            && unit(self.concurrence)
            && unit(self.eof)
            && self.rel_entropy.is_none_or(|e| e.is_finite() && e >= -TOL)
    }
}

/// Independent eigenvalue route used only as a test oracle: the `sᵢ` are the
/// square roots of the eigenvalues of `√ρ ρ̃ √ρ`.
#[cfg(test)]
pub(crate) fn concurrence_textbook(rho: &DensityMatrix) -> f64 {
    use crate::matcore::herm_func;
    let sqrt_rho = herm_func(rho.mat(), |x| x.max(0.0).sqrt()).unwrap();
    let yy = Mat4::spin_flip();
    let tilde = yy * rho.mat().conj() * yy;
    let r = (sqrt_rho * tilde * sqrt_rho).hermitian_part();
    let ev = herm_eig(&r).unwrap().values;
    let s: Vec<f64> = ev.iter().rev().map(|x| x.max(0.0).sqrt()).collect();
    (s[0] - s[1] - s[2] - s[3]).max(0.0)
}
