//! Born-rule probabilities for a one-parameter family of two-qubit pure states
//! measured with planar projective POVMs.
//!
//! The state family is |Ψ⟩ = α|00⟩ + √(1−α²)|11⟩ with α ∈ [0,1]. Measurement
//! axes lie in the x–z plane: an angle ϑ selects n̂ = (sin ϑ, 0, cos ϑ) and the
//! projectors E_i(ϑ) = ½(𝟙 + (−1)^i σ_n), i ∈ {0,1}.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Comparison tolerance for exact algebraic identities evaluated in f64.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Dense row-major complex matrix. Only the handful of operations needed for
/// 2×2 projectors and 4×4 density matrices are provided.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        ComplexMatrix {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Builds a matrix from a row-major entry list.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        ComplexMatrix { rows, cols, entries }
    }

    /// Rank-1 projector |v⟩⟨v| of a column vector v.
    pub fn outer_product(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, v[i] * v[j].conj());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        self.entries[i * self.cols + j] = value;
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let lik = self.get(i, k);
                if lik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out.get(i, j) + lik * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Kronecker product, computed entrywise: (A⊗B)[(i·p+k),(j·q+l)] = A[i,j]·B[k,l].
    pub fn kron(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = Self::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out.set(i * rhs.rows + k, j * rhs.cols + l, a * rhs.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert_eq!(self.rows, self.cols, "trace requires a square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Entrywise maximum absolute difference.
    pub fn max_abs_diff(&self, rhs: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Pure two-qubit state α|00⟩ + √(1−α²)|11⟩ with real Schmidt coefficient α.
///
/// α = 1/√2 is the maximally entangled member (uniform single-party
/// marginals); α ∈ {0, 1} are the product states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntangledPairState {
    alpha: f64,
}

impl EntangledPairState {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(EntangledPairState { alpha })
    }

    /// The maximally entangled state, α = 1/√2.
    pub fn maximally_entangled() -> Self {
        EntangledPairState {
            alpha: std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Amplitudes in the basis {|00⟩, |01⟩, |10⟩, |11⟩}.
    pub fn state_vector(&self) -> [Complex64; 4] {
        let beta = (1.0 - self.alpha * self.alpha).max(0.0).sqrt();
        [
            Complex64::new(self.alpha, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(beta, 0.0),
        ]
    }

    /// Density matrix ρ = |Ψ⟩⟨Ψ|: 4×4, Hermitian, trace 1, rank 1.
    pub fn density_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::outer_product(&self.state_vector())
    }
}

/// Measurement direction in the x–z plane, stored as ϑ modulo 2π.
///
/// No canonicalization to [0, π) is applied even though E_i(ϑ+π) = E_{1−i}(ϑ);
/// the period-π symmetry is asserted by tests rather than baked in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementAngle {
    theta: f64,
}

impl MeasurementAngle {
    pub fn new(theta: f64) -> Self {
        assert!(theta.is_finite(), "measurement angle must be finite");
        let tau = 2.0 * std::f64::consts::PI;
        MeasurementAngle {
            theta: theta.rem_euclid(tau),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl From<f64> for MeasurementAngle {
    fn from(theta: f64) -> Self {
        MeasurementAngle::new(theta)
    }
}

/// Projector E_i(ϑ) = ½(𝟙 + (−1)^i σ_n) with σ_n = sin ϑ σ_x + cos ϑ σ_z.
///
/// Both outcomes give Hermitian rank-1 projectors summing to the identity.
pub fn povm_element(angle: MeasurementAngle, outcome: u8) -> ComplexMatrix {
    assert!(outcome < 2, "outcome must be 0 or 1");
    let sign = if outcome == 0 { 1.0 } else { -1.0 };
    let (sin_t, cos_t) = angle.theta().sin_cos();
    let r = |x: f64| Complex64::new(x, 0.0);
    ComplexMatrix::from_entries(
        2,
        2,
        vec![
            r(0.5 * (1.0 + sign * cos_t)),
            r(0.5 * sign * sin_t),
            r(0.5 * sign * sin_t),
            r(0.5 * (1.0 - sign * cos_t)),
        ],
    )
}

/// Born rule: p(x,y|a,b) = tr[(E_x^a ⊗ E_y^b) ρ].
///
/// Computed literally via the Kronecker product and a 4×4 trace; this is the
/// reference path that closed-form expressions elsewhere are tested against.
pub fn joint_probability(
    state: &EntangledPairState,
    a: MeasurementAngle,
    b: MeasurementAngle,
    x: u8,
    y: u8,
) -> f64 {
    let observable = povm_element(a, x).kron(&povm_element(b, y));
    let t = observable.mul(&state.density_matrix()).trace();
    debug_assert!(t.im.abs() < 1e-10, "Born probability has imaginary residue");
    t.re
}

/// Alice's marginal p(x|a,b) = Σ_y p(x,y|a,b).
///
/// The sum is evaluated literally; for this quantum family it is independent
/// of b, which the no-signalling tests assert.
pub fn marginal(
    state: &EntangledPairState,
    a: MeasurementAngle,
    b: MeasurementAngle,
    x: u8,
) -> f64 {
    joint_probability(state, a, b, x, 0) + joint_probability(state, a, b, x, 1)
}

/// Bob's marginal p(y|a,b) = Σ_x p(x,y|a,b).
pub fn bob_marginal(
    state: &EntangledPairState,
    a: MeasurementAngle,
    b: MeasurementAngle,
    y: u8,
) -> f64 {
    joint_probability(state, a, b, 0, y) + joint_probability(state, a, b, 1, y)
}

/// Checks that joint probabilities factorize into the product of marginals,
/// p(x,y|a,b) = p(x|a)·p(y|b), which holds exactly when each subsystem is in a
/// pure reduced state (α ∈ {0,1}).
///
/// Rejects α ∉ {0,1} rather than reporting a failed factorization, because for
/// mixed reduced states the question conflates correlation with entanglement.
pub fn decorrelation_check(
    state: &EntangledPairState,
    a: MeasurementAngle,
    b: MeasurementAngle,
) -> Result<bool> {
    let alpha = state.alpha();
    if alpha != 0.0 && alpha != 1.0 {
        return Err(Error::SubsystemNotPure(alpha));
    }
    for x in 0..2u8 {
        for y in 0..2u8 {
            let joint = joint_probability(state, a, b, x, y);
            let product = marginal(state, a, b, x) * bob_marginal(state, a, b, y);
            if (joint - product).abs() > DEFAULT_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
