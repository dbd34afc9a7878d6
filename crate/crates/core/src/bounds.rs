//! Bound curves relating negativity to concurrence and relative entropy of
//! entanglement to entanglement of formation, plus classifiers for the
//! states that sit on them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filters::takagi;
use crate::matcore::{self, Mat2, Mat4, C64};
use crate::measures::{concurrence, eof_from_concurrence, negativity_from_min_eigenvalue, partial_transpose_eig};
use crate::relent::er_mems_closed_form;
use crate::states::{check_unit_interval, DensityMatrix, ExtremalFamilySpec, PureState};

/// Slack tolerance for the inequality verdicts.
pub const BOUND_TOL: f64 = 1e-9;
/// Slack below which a state counts as attaining the lower curve.
pub const LOWER_TIGHT_TOL: f64 = 1e-7;
/// Allowed deviation of a reduced state from `I/2` for a maximally entangled vector.
pub const MAX_ENTANGLED_TOL: f64 = 1e-7;
/// Eigenvalue gap below which the smallest eigenvalue of `ρ^Γ` is degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Negativity above which a state counts as entangled.
pub const ENTANGLED_TOL: f64 = 1e-9;

/// `√((1 − C)² + C²) − (1 − C)`, the positive root of `N² + 2N(1 − C) − C² = 0`.
pub fn negativity_lower_bound(c: f64) -> Result<f64> {
    check_unit_interval("C", c)?;
    let root = ((1.0 - c).powi(2) + c * c).sqrt();
    // rationalized form avoids cancellation near C = 0
    Ok(c * c / (root + (1.0 - c)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundVerdict {
    pub concurrence: f64,
    pub negativity: f64,
    pub lower_curve: f64,
    pub upper_ok: bool,
    pub lower_ok: bool,
    pub upper_tight: bool,
    pub lower_tight: bool,
    /// `C − N`.
    pub slack_upper: f64,
    /// `N − lower_curve(C)`.
    pub slack_lower: f64,
}

impl BoundVerdict {
    pub fn holds(&self) -> bool {
        self.upper_ok && self.lower_ok
    }
}

pub fn check_bounds(rho: &DensityMatrix) -> BoundVerdict {
    let eig = partial_transpose_eig(rho);
    let n = negativity_from_min_eigenvalue(eig.min());
    let c = concurrence(rho);
    let lower_curve = negativity_lower_bound(c).expect("concurrence lies in [0, 1]");
    let slack_upper = c - n;
    let slack_lower = n - lower_curve;
    let upper_tight = if n > ENTANGLED_TOL {
        tight_from_eig(&eig)
    } else {
        slack_upper.abs() <= BOUND_TOL
    };
    BoundVerdict {
        concurrence: c,
        negativity: n,
        lower_curve,
        upper_ok: slack_upper >= -BOUND_TOL,
        lower_ok: slack_lower >= -BOUND_TOL,
        upper_tight,
        lower_tight: slack_lower <= LOWER_TIGHT_TOL,
        slack_upper,
        slack_lower,
    }
}

/// Whether the eigenvector of the negative eigenvalue of `ρ^Γ` is maximally
/// entangled, i.e. a Bell state up to local unitaries. Such states have
/// negativity equal to concurrence.
pub fn is_negativity_tight(rho: &DensityMatrix) -> Result<bool> {
    let eig = partial_transpose_eig(rho);
    let negativity = negativity_from_min_eigenvalue(eig.min());
    if negativity <= ENTANGLED_TOL {
        return Err(Error::NotEntangled { negativity });
    }
    Ok(tight_from_eig(&eig))
}

fn tight_from_eig(eig: &matcore::HermEig<4>) -> bool {
    let v0 = eig.vector(0);
    if eig.values[1] - eig.values[0] > DEGENERACY_TOL {
        return is_maximally_entangled(&v0);
    }
    // Degenerate: look for the most entangled unit vector in span{v0, v1}.
    // |ψᵀ(σ_y⊗σ_y)ψ| over ψ = V c is maximized by the leading Takagi vector
    // of the 2x2 block Vᵀ(σ_y⊗σ_y)V.
    let v1 = eig.vector(1);
    let yy = Mat4::spin_flip();
    let mut tau = Mat4::zeros();
    for (i, a) in [v0, v1].iter().enumerate() {
        for (j, b) in [v0, v1].iter().enumerate() {
            let yb = yy.mul_vec(b);
            tau[(i, j)] = (0..4).map(|k| a[k] * yb[k]).sum();
        }
    }
    let Ok((u, _)) = takagi(&tau) else {
        return is_maximally_entangled(&v0);
    };
    let c = [u[(0, 0)].conj(), u[(1, 0)].conj()];
    let psi: [C64; 4] = std::array::from_fn(|k| v0[k] * c[0] + v1[k] * c[1]);
    is_maximally_entangled(&psi)
}

/// Both reduced states within [`MAX_ENTANGLED_TOL`] of `I/2`.
pub fn is_maximally_entangled(v: &[C64; 4]) -> bool {
    let Ok(psi) = PureState::normalize(*v) else {
        return false;
    };
    let half = Mat2::identity().scale_real(0.5);
    (psi.reduced_a() - half).max_abs() <= MAX_ENTANGLED_TOL
        && (psi.reduced_b() - half).max_abs() <= MAX_ENTANGLED_TOL
}

/// The four values `σ₁…σ₄` of the extremal family (signed, in the order
/// `(p + |q|, √(xy) + r, p − |q|, √(xy) − r)` with `p = (λ₁+λ₂)/2`,
/// `r = (λ₁−λ₂)/2`, `|q| = |ab|(λ₃−λ₄)` and `x, y` the inner diagonal).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilySigmas(pub [f64; 4]);

impl FamilySigmas {
    /// `max(0, σ₁ − σ₂ − σ₃ − σ₄)`, equal to
    /// `2(λ₃−λ₄)|ab| − 2√((λ₃|a|²+λ₄|b|²)(λ₃|b|²+λ₄|a|²))` when positive.
    pub fn printed_concurrence(&self) -> f64 {
        let [s1, s2, s3, s4] = self.0;
        (s1 - s2 - s3 - s4).max(0.0)
    }

    /// Concurrence from the magnitudes sorted in descending order; agrees with
    /// [`printed_concurrence`](Self::printed_concurrence) whenever `σ₁` is the
    /// largest magnitude and `σ₄ ≥ 0`.
    pub fn concurrence(&self) -> f64 {
        let mut s = self.0.map(f64::abs);
        s.sort_by(|a, b| b.total_cmp(a));
        (s[0] - s[1] - s[2] - s[3]).max(0.0)
    }
}

pub fn family_sigmas(spec: &ExtremalFamilySpec) -> Result<FamilySigmas> {
    spec.validate()?;
    // entries within the validation tolerance of zero are zero; the square
    // root would otherwise lift rounding noise to ~1e-8
    let snap = |v: f64| if v.abs() <= ExtremalFamilySpec::TOL { 0.0 } else { v };
    let (x, y) = spec.inner_diagonal();
    let product = snap(x) * snap(y);
    if product < 0.0 {
        return Err(Error::ComplexSigma { product });
    }
    let p = (spec.lambda1 + spec.lambda2) / 2.0;
    let r = (spec.lambda1 - spec.lambda2) / 2.0;
    let q = (spec.a * spec.b).norm() * (spec.lambda3 - spec.lambda4);
    let root = product.max(0.0).sqrt();
    Ok(FamilySigmas([p + q, root + r, p - q, root - r]))
}

/// Lower envelope of `E_R` at fixed entanglement of formation: the
/// rank-2 closed form evaluated at the concurrence whose EoF is `e_f`.
pub fn er_lower_curve(e_f: f64) -> Result<f64> {
    check_unit_interval("E_f", e_f)?;
    er_mems_closed_form(concurrence_for_eof(e_f))
}

/// Inverts `C ↦ EoF(C)` on `[0, 1]` by bisection to 1e-12.
pub fn concurrence_for_eof(e_f: f64) -> f64 {
    if e_f <= 0.0 {
        return 0.0;
    }
    if e_f >= 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if eof_from_concurrence(mid) < e_f {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
