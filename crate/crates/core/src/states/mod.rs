//! Two-qubit states: validated density matrices, pure states, the named
//! state families, and seeded random sampling.
//!
//! Basis order throughout is `|00⟩, |01⟩, |10⟩, |11⟩`; the first tensor
//! factor is qubit A.

mod file;

pub use file::{from_json, to_json, StateFile};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::matcore::{self, herm_eig, Mat2, Mat4, C64, ONE, ZERO};

/// Tolerance used by every density-matrix invariant check.
pub const STATE_TOL: f64 = 1e-10;

/// A validated two-qubit density matrix: Hermitian, unit trace, PSD.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    /// Validates `raw` and stores its Hermitian part.
    pub fn new(raw: Mat4) -> Result<Self> {
        if !raw.is_finite() {
            return Err(Error::NonFinite);
        }
        let defect = raw.hermiticity_defect();
        if defect > STATE_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let m = raw.hermitian_part();
        let trace = m.trace().re;
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::NotUnitTrace { trace });
        }
        let min_eigenvalue = herm_eig(&m)?.min();
        if min_eigenvalue < -STATE_TOL {
            return Err(Error::NotPsd { min_eigenvalue });
        }
        Ok(Self(m))
    }

    /// Normalizes the trace of a PSD matrix before validating.
    pub fn normalized(raw: Mat4) -> Result<Self> {
        let trace = raw.trace().re;
        if !(trace > 0.0) {
            return Err(Error::NotUnitTrace { trace });
        }
        Self::new(raw.scale_real(1.0 / trace))
    }

    pub fn maximally_mixed() -> Self {
        Self(Mat4::identity().scale_real(0.25))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self(Mat4::outer(psi.amplitudes(), psi.amplitudes()))
    }

    pub fn mat(&self) -> &Mat4 {
        &self.0
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        herm_eig(&self.0).expect("validated state is Hermitian").values
    }

    pub fn purity(&self) -> f64 {
        self.0.trace_product(&self.0).re
    }

    /// Reduced state of qubit A (trace over B).
    pub fn reduced_a(&self) -> Mat2 {
        reduced_a(&self.0)
    }

    /// Reduced state of qubit B (trace over A).
    pub fn reduced_b(&self) -> Mat2 {
        reduced_b(&self.0)
    }

    /// `(U ⊗ V) ρ (U ⊗ V)†` for unitaries `U`, `V`.
    pub fn local_unitary(&self, u: &Mat2, v: &Mat2) -> Result<Self> {
        let w = u.kron(v);
        Self::new(w * self.0 * w.adjoint())
    }

    /// Convex combination `(1 − t) self + t other`.
    pub fn mix(&self, other: &Self, t: f64) -> Self {
        Self((self.0.scale_real(1.0 - t) + other.0.scale_real(t)).hermitian_part())
    }
}

pub fn reduced_a(m: &Mat4) -> Mat2 {
    Mat2::from_fn(|i, k| (0..2).map(|j| m[(2 * i + j, 2 * k + j)]).sum())
}

pub fn reduced_b(m: &Mat4) -> Mat2 {
    Mat2::from_fn(|j, l| (0..2).map(|i| m[(2 * i + j, 2 * i + l)]).sum())
}

/// Normalized two-qubit state vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureState([C64; 4]);

impl PureState {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(amplitudes: [C64; 4]) -> Result<Self> {
        let n = matcore::norm(&amplitudes);
        if (n - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::InvalidSpec(format!("state vector norm {n} is not 1")));
        }
        Ok(Self(amplitudes))
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalize(amplitudes: [C64; 4]) -> Result<Self> {
        let n = matcore::norm(&amplitudes);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidSpec("cannot normalize a zero vector".into()));
        }
        Ok(Self(amplitudes.map(|z| z / n)))
    }

    pub fn amplitudes(&self) -> &[C64; 4] {
        &self.0
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// `2|ad − bc|` for amplitudes `(a, b, c, d)`.
    pub fn concurrence(&self) -> f64 {
        let [a, b, c, d] = self.0;
        2.0 * (a * d - b * c).norm()
    }

    /// Reduced state of qubit A.
    pub fn reduced_a(&self) -> Mat2 {
        reduced_a(&Mat4::outer(&self.0, &self.0))
    }

    pub fn reduced_b(&self) -> Mat2 {
        reduced_b(&Mat4::outer(&self.0, &self.0))
    }
}

/// Bell basis `Φ⁺, Φ⁻, Ψ⁺, Ψ⁻` by index 0..3.
pub fn bell_state(index: usize) -> Result<PureState> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let p = C64::new(s, 0.0);
    let amps = match index {
        0 => [p, ZERO, ZERO, p],
        1 => [p, ZERO, ZERO, -p],
        2 => [ZERO, p, p, ZERO],
        3 => [ZERO, p, -p, ZERO],
        _ => return Err(Error::IndexOutOfRange { index, len: 4 }),
    };
    Ok(PureState(amps))
}

pub fn bell_basis() -> [PureState; 4] {
    std::array::from_fn(|k| bell_state(k).unwrap())
}

/// Weights on the Bell basis, descending and summing to one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellDiagonalSpec {
    lambdas: [f64; 4],
}

impl BellDiagonalSpec {
    pub const TOL: f64 = 1e-12;

    pub fn new(lambdas: [f64; 4]) -> Result<Self> {
        if lambdas.iter().any(|l| !l.is_finite() || *l < -Self::TOL) {
            return Err(Error::InvalidSpec(format!("negative Bell weight in {lambdas:?}")));
        }
        let sum: f64 = lambdas.iter().sum();
        if (sum - 1.0).abs() > Self::TOL {
            return Err(Error::InvalidSpec(format!("Bell weights sum to {sum}")));
        }
        if lambdas.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidSpec(format!(
                "Bell weights must be descending: {lambdas:?}"
            )));
        }
        Ok(Self {
            lambdas: lambdas.map(|l| l.max(0.0)),
        })
    }

    /// Sorts arbitrary nonnegative weights and renormalizes them.
    pub fn from_weights(mut w: [f64; 4]) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if !(sum > 0.0) || w.iter().any(|x| *x < 0.0) {
            return Err(Error::InvalidSpec(format!("bad Bell weights {w:?}")));
        }
        w.sort_by(|a, b| b.total_cmp(a));
        let mut lambdas = w.map(|x| x / sum);
        // push the residual rounding into the largest weight
        let resid = 1.0 - lambdas.iter().sum::<f64>();
        lambdas[0] += resid;
        Self::new(lambdas)
    }

    pub fn lambdas(&self) -> [f64; 4] {
        self.lambdas
    }

    pub fn largest(&self) -> f64 {
        self.lambdas[0]
    }
}

/// `Σ λ_k |B_k⟩⟨B_k|`.
pub fn bell_diagonal(spec: &BellDiagonalSpec) -> DensityMatrix {
    let mut m = Mat4::zeros();
    for (lam, b) in spec.lambdas.iter().zip(bell_basis()) {
        m = m + Mat4::outer(b.amplitudes(), b.amplitudes()).scale_real(*lam);
    }
    DensityMatrix(m.hermitian_part())
}

/// Rank-2 mixture of `|Φ⁺⟩` (weight `C`) and `|01⟩` (weight `1 − C`).
pub fn mems_rank2(c: f64) -> Result<DensityMatrix> {
    check_unit_interval("C", c)?;
    let h = c / 2.0;
    Ok(DensityMatrix(Mat4::from_real([
        [h, 0.0, 0.0, h],
        [0.0, 1.0 - c, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [h, 0.0, 0.0, h],
    ])))
}

/// `p |Φ⁺⟩⟨Φ⁺| + (1 − p) I/4`.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    check_unit_interval("p", p)?;
    let phi = bell_state(0)?;
    let m = Mat4::outer(phi.amplitudes(), phi.amplitudes()).scale_real(p)
        + Mat4::identity().scale_real((1.0 - p) / 4.0);
    Ok(DensityMatrix(m.hermitian_part()))
}

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange {
            name,
            value,
            min: 0.0,
            max: 1.0,
        });
    }
    Ok(())
}

/// Parameters of the two-block state family whose partial transpose has
/// eigenvalues `λ₁, λ₂, λ₃ ≥ 0 ≥ λ₄`, with eigenvectors `Φ^±` and a
/// `U(2) = [[a, −b], [b*, a*]]` rotation of `|01⟩, |10⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtremalFamilySpec {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub a: C64,
    pub b: C64,
}

impl ExtremalFamilySpec {
    pub const TOL: f64 = 1e-12;

    pub fn new(lambdas: [f64; 4], a: C64, b: C64) -> Result<Self> {
        let spec = Self {
            lambda1: lambdas[0],
            lambda2: lambdas[1],
            lambda3: lambdas[2],
            lambda4: lambdas[3],
            a,
            b,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let l = [self.lambda1, self.lambda2, self.lambda3, self.lambda4];
        if l.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if l[..3].iter().any(|x| *x < -Self::TOL) || self.lambda4 > Self::TOL {
            return Err(Error::InvalidSpec(format!(
                "need λ₁, λ₂, λ₃ ≥ 0 ≥ λ₄, got {l:?}"
            )));
        }
        let sum: f64 = l.iter().sum();
        if (sum - 1.0).abs() > Self::TOL {
            return Err(Error::InvalidSpec(format!("λ sum to {sum}")));
        }
        let norm = self.a.norm_sqr() + self.b.norm_sqr();
        if (norm - 1.0).abs() > Self::TOL {
            return Err(Error::InvalidSpec(format!("|a|² + |b|² = {norm}")));
        }
        Ok(())
    }

    /// The member attaining the smallest negativity for its concurrence,
    /// indexed by the negative eigenvalue `λ₄ ∈ [−½, 0]`:
    /// `λ₁ = λ₂ = √(λ₃|λ₄|)`, `|a|² = λ₃/(λ₃ − λ₄)`.
    pub fn optimal(lambda4: f64) -> Result<Self> {
        if !(-0.5..=0.0).contains(&lambda4) {
            return Err(Error::OutOfRange {
                name: "λ₄",
                value: lambda4,
                min: -0.5,
                max: 0.0,
            });
        }
        let m = -lambda4;
        // 2√(λ₃ m) + λ₃ − m = 1, solved for u = √λ₃.
        let u = (2.0 * m + 1.0).sqrt() - m.sqrt();
        let lambda3 = u * u;
        let lambda12 = u * m.sqrt();
        let a2 = lambda3 / (lambda3 + m);
        let mut spec = Self {
            lambda1: lambda12,
            lambda2: lambda12,
            lambda3,
            lambda4,
            a: C64::new(a2.sqrt(), 0.0),
            b: C64::new((1.0 - a2).sqrt(), 0.0),
        };
        // absorb rounding so the sum is exactly representable as 1
        spec.lambda3 = 1.0 - spec.lambda1 - spec.lambda2 - spec.lambda4;
        spec.validate()?;
        Ok(spec)
    }

    pub fn lambdas(&self) -> [f64; 4] {
        [self.lambda1, self.lambda2, self.lambda3, self.lambda4]
    }

    /// Inner-block diagonal entries `(λ₃|a|² + λ₄|b|², λ₃|b|² + λ₄|a|²)`.
    pub fn inner_diagonal(&self) -> (f64, f64) {
        let a2 = self.a.norm_sqr();
        let b2 = self.b.norm_sqr();
        (
            self.lambda3 * a2 + self.lambda4 * b2,
            self.lambda3 * b2 + self.lambda4 * a2,
        )
    }
}

/// Builds the family member; fails with `NotPsd` when the parameters do not
/// describe a state.
pub fn extremal_family(spec: &ExtremalFamilySpec) -> Result<DensityMatrix> {
    spec.validate()?;
    let p = C64::new((spec.lambda1 + spec.lambda2) / 2.0, 0.0);
    let r = C64::new((spec.lambda1 - spec.lambda2) / 2.0, 0.0);
    let q = spec.a * spec.b * (spec.lambda3 - spec.lambda4);
    let (x, y) = spec.inner_diagonal();
    let (x, y) = (C64::new(x, 0.0), C64::new(y, 0.0));
    let m = Mat4::from_rows([
        [p, ZERO, ZERO, q],
        [ZERO, x, r, ZERO],
        [ZERO, r, y, ZERO],
        [q.conj(), ZERO, ZERO, p],
    ]);
    DensityMatrix::new(m)
}

/// Deterministic per-item seed derived from a base seed (splitmix64 mix).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// `G G† / Tr(G G†)` for a 4 x rank complex Ginibre matrix `G`.
///
/// Rank 4 gives the Hilbert–Schmidt measure; rank 1 gives Haar-random pure
/// states.
pub fn sample_random(rank: usize, seed: u64) -> Result<DensityMatrix> {
    sample_random_with(rank, &mut rng_from_seed(seed))
}

pub fn sample_random_with<R: Rng + ?Sized>(rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if !(1..=4).contains(&rank) {
        return Err(Error::OutOfRange {
            name: "rank",
            value: rank as f64,
            min: 1.0,
            max: 4.0,
        });
    }
    let mut g = Mat4::zeros();
    for i in 0..4 {
        for j in 0..rank {
            g[(i, j)] = complex_gaussian(rng);
        }
    }
    let m = g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr).hermitian_part())
}

pub fn sample_pure_with<R: Rng + ?Sized>(rng: &mut R) -> PureState {
    loop {
        let v: [C64; 4] = std::array::from_fn(|_| complex_gaussian(rng));
        if let Ok(psi) = PureState::normalize(v) {
            return psi;
        }
    }
}

/// Bell weights drawn uniformly from the probability simplex.
pub fn sample_bell_diagonal_with<R: Rng + ?Sized>(rng: &mut R) -> BellDiagonalSpec {
    let w: [f64; 4] = std::array::from_fn(|_| Exp1.sample(rng));
    BellDiagonalSpec::from_weights(w).expect("exponential draws are positive")
}

/// Haar-random element of SU(2).
pub fn sample_su2_with<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let (a, b) = loop {
        let a = complex_gaussian(rng);
        let b = complex_gaussian(rng);
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if n > 0.0 {
            break (a / n, b / n);
        }
    };
    Mat2::from_rows([[a, -b.conj()], [b, a.conj()]])
}

/// Product `|α⟩ ⊗ |β⟩`.
pub fn product_vector(alpha: &[C64; 2], beta: &[C64; 2]) -> [C64; 4] {
    [
        alpha[0] * beta[0],
        alpha[0] * beta[1],
        alpha[1] * beta[0],
        alpha[1] * beta[1],
    ]
}

#[allow(dead_code)]
pub(crate) fn basis_vector(k: usize) -> [C64; 4] {
    std::array::from_fn(|i| if i == k { ONE } else { ZERO })
}
