//! Zero-mean Gaussian states described by their covariance matrices.
//!
//! Conventions used throughout the crate:
//!
//! * quadratures are interleaved per mode, `x₀, p₀, x₁, p₁, …`;
//! * the vacuum has covariance `I`, so physical states satisfy
//!   `γ + iΩ ⪰ 0` and have symplectic eigenvalues `≥ 1`;
//! * first moments are zero. Mixtures are therefore formed by averaging
//!   covariance matrices, which is only valid under this convention.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::quadratures;
use crate::symmat::{
    psd_check, sqrt_spd, sym_eigenvalues, HermPair, PsdVerdict, SymMatrix, DEFAULT_REL_TOL,
};

/// Name of the quadrature ordering, as written in state files.
pub const ORDERING: &str = "xp-interleaved";

/// Relative gap allowed when pairing the doubled singular values.
const PAIRING_REL_GAP: f64 = 1e-6;

/// `Ω = ⊕ [[0, 1], [-1, 0]]` over `n_modes` modes.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        w[(2 * k, 2 * k + 1)] = 1.0;
        w[(2 * k + 1, 2 * k)] = -1.0;
    }
    w
}

/// Covariance matrix of an `n_modes`-mode Gaussian state.
///
/// Construction only checks shape and symmetry; physicality is a separate
/// question answered by [`validate_cm`].
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    mat: SymMatrix,
}

impl CovarianceMatrix {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        Self::from_sym(SymMatrix::new(mat)?)
    }

    pub fn from_sym(mat: SymMatrix) -> Result<Self> {
        if !mat.dim().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "covariance matrix must have even dimension, got {}",
                mat.dim()
            )));
        }
        Ok(CovarianceMatrix {
            n_modes: mat.dim() / 2,
            mat,
        })
    }

    pub fn from_row_slice(n_modes: usize, data: &[f64]) -> Result<Self> {
        Self::from_sym(SymMatrix::from_row_slice(2 * n_modes, data)?)
    }

    pub fn vacuum(n_modes: usize) -> Self {
        CovarianceMatrix {
            n_modes,
            mat: SymMatrix::identity(2 * n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.mat.matrix()
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.mat
    }

    pub fn det(&self) -> f64 {
        self.mat.determinant()
    }

    /// `self ⊕ other`, with `other`'s modes appended.
    pub fn direct_sum(&self, other: &CovarianceMatrix) -> CovarianceMatrix {
        let (n, m) = (2 * self.n_modes, 2 * other.n_modes);
        let mut out = DMatrix::zeros(n + m, n + m);
        out.view_mut((0, 0), (n, n)).copy_from(self.matrix());
        out.view_mut((n, n), (m, m)).copy_from(other.matrix());
        CovarianceMatrix {
            n_modes: self.n_modes + other.n_modes,
            mat: SymMatrix::new(out).expect("direct sum of symmetric blocks"),
        }
    }

    /// Reorders modes so that new mode `i` is old mode `order[i]`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<CovarianceMatrix> {
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.n_modes).collect::<Vec<_>>() {
            return Err(Error::InvalidIndices(format!(
                "{order:?} is not a permutation of 0..{}",
                self.n_modes
            )));
        }
        Self::from_sym(self.mat.principal(&quadratures(order)))
    }

    fn check_modes(&self, modes: &[usize]) -> Result<()> {
        if modes.is_empty() {
            return Err(Error::InvalidIndices("empty mode set".into()));
        }
        let mut seen = vec![false; self.n_modes];
        for &m in modes {
            if m >= self.n_modes {
                return Err(Error::InvalidIndices(format!(
                    "mode {m} out of range for {} modes",
                    self.n_modes
                )));
            }
            if seen[m] {
                return Err(Error::InvalidIndices(format!("mode {m} repeated")));
            }
            seen[m] = true;
        }
        Ok(())
    }
}

/// Checks `γ + iΩ ⪰ 0` and `γ ≻ 0`.
///
/// The returned margin is the smallest eigenvalue of `γ + iΩ`.
pub fn validate_cm(gamma: &CovarianceMatrix, tol: Option<f64>) -> PsdVerdict {
    let pair = HermPair::new(gamma.as_sym().clone(), symplectic_form(gamma.n_modes()))
        .expect("Ω is antisymmetric and correctly sized");
    let mut verdict = psd_check(&pair, tol);
    if verdict.is_psd && sym_eigenvalues(gamma.as_sym())[0] <= 0.0 {
        verdict.is_psd = false;
    }
    verdict
}

/// [`validate_cm`] as a precondition.
pub fn require_physical(gamma: &CovarianceMatrix, tol: Option<f64>) -> Result<PsdVerdict> {
    let v = validate_cm(gamma, tol);
    if v.is_psd {
        Ok(v)
    } else {
        Err(Error::Unphysical { margin: v.margin })
    }
}

/// Williamson spectrum, ascending.
///
/// With `K = γ^{1/2} Ω γ^{1/2}` antisymmetric, the eigenvalues of `KᵀK` are
/// the squared symplectic eigenvalues, each appearing twice.
pub fn symplectic_eigenvalues(gamma: &CovarianceMatrix) -> Result<Vec<f64>> {
    let root = sqrt_spd(gamma.as_sym())?;
    let k = root.matrix() * symplectic_form(gamma.n_modes()) * root.matrix();
    let ktk = SymMatrix::new(k.transpose() * &k)?;
    let sv: Vec<f64> = sym_eigenvalues(&ktk)
        .into_iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    let mut out = Vec::with_capacity(gamma.n_modes());
    for pair in sv.chunks(2) {
        let gap = (pair[1] - pair[0]).abs();
        if gap > PAIRING_REL_GAP * pair[1].abs().max(1.0) {
            return Err(Error::Pairing(format!(
                "singular values {} and {} differ by {gap:e}",
                pair[0], pair[1]
            )));
        }
        out.push(0.5 * (pair[0] + pair[1]));
    }
    Ok(out)
}

/// Reduced state on `keep` (modes in the given order).
pub fn partial_trace(gamma: &CovarianceMatrix, keep: &[usize]) -> Result<CovarianceMatrix> {
    gamma.check_modes(keep)?;
    CovarianceMatrix::from_sym(gamma.as_sym().principal(&quadratures(keep)))
}

/// Two-mode squeezed vacuum with squeezing `r`:
/// `cosh 2r` on the diagonal, `±sinh 2r` in the cross block.
pub fn tmsv(r: f64) -> Result<CovarianceMatrix> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "squeezing must be finite and non-negative, got {r}"
        )));
    }
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    #[rustfmt::skip]
    let data = [
        c,   0.0, s,   0.0,
        0.0, c,   0.0, -s,
        s,   0.0, c,   0.0,
        0.0, -s,  0.0, c,
    ];
    CovarianceMatrix::from_row_slice(2, &data)
}

/// Phase rotation by `theta` on one mode of an `n_modes` system; the mode's
/// block is `[[cos θ, sin θ], [-sin θ, cos θ]]`.
pub fn phase_shift_symplectic(theta: f64, mode: usize, n_modes: usize) -> Result<DMatrix<f64>> {
    if mode >= n_modes {
        return Err(Error::InvalidIndices(format!(
            "mode {mode} out of range for {n_modes} modes"
        )));
    }
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let (sin, cos) = theta.sin_cos();
    s[(2 * mode, 2 * mode)] = cos;
    s[(2 * mode, 2 * mode + 1)] = sin;
    s[(2 * mode + 1, 2 * mode)] = -sin;
    s[(2 * mode + 1, 2 * mode + 1)] = cos;
    Ok(s)
}

/// Largest entry of `SΩSᵀ − Ω`.
pub fn symplectic_residual(s: &DMatrix<f64>) -> f64 {
    let w = symplectic_form(s.nrows() / 2);
    (s * &w * s.transpose() - w).amax()
}

/// `SγSᵀ` for symplectic `S`.
///
/// `S` is accepted when its residual is at most `1e-9 · max(1, max|S_ij|²)`.
pub fn apply_symplectic(gamma: &CovarianceMatrix, s: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    let dim = gamma.matrix().nrows();
    if s.nrows() != dim || s.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "symplectic matrix is {}x{}, state is {dim}x{dim}",
            s.nrows(),
            s.ncols()
        )));
    }
    let residual = symplectic_residual(s);
    if residual > 1e-9 * s.amax().powi(2).max(1.0) {
        return Err(Error::NotSymplectic { residual });
    }
    CovarianceMatrix::new(s * gamma.matrix() * s.transpose())
}

/// Covariance of the mixture `Σ pᵢ ρᵢ` of zero-mean states, `Σ pᵢ γᵢ`.
pub fn mix_cms(components: &[(f64, CovarianceMatrix)]) -> Result<CovarianceMatrix> {
    let Some((_, first)) = components.first() else {
        return Err(Error::InvalidParameter("mixture has no components".into()));
    };
    let n = first.n_modes();
    let mut total = 0.0;
    let mut acc = DMatrix::zeros(2 * n, 2 * n);
    for (w, g) in components {
        if !(*w > 0.0) || !w.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mixture weight {w} is not positive"
            )));
        }
        if g.n_modes() != n {
            return Err(Error::DimensionMismatch(format!(
                "mixing {n}-mode and {}-mode states",
                g.n_modes()
            )));
        }
        total += w;
        acc += g.matrix() * *w;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "mixture weights sum to {total}"
        )));
    }
    let mixed = CovarianceMatrix::new(acc)?;
    require_physical(&mixed, None)?;
    Ok(mixed)
}

/// Three-mode mixture `½ TMSV_AB ⊗ |0⟩_C + ½ |0⟩_A ⊗ (R⊗R) TMSV_BC (R⊗R)†`
/// with `R` a `+π/4` phase rotation, modes ordered `A, B, C`.
///
/// `r` is the covariance-level squeezing: the two-mode squeezed blocks carry
/// `cosh r` on the diagonal and `±sinh r` off it (i.e. `tmsv(r / 2)`).
/// Both pairs `{A,B}` and `{B,C}` are then NPT exactly for `1 < cosh r < 3`.
pub fn build_remark_state(r: f64) -> Result<CovarianceMatrix> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "squeezing must be positive and finite, got {r}"
        )));
    }
    let pair = tmsv(0.5 * r)?;
    let vac = CovarianceMatrix::vacuum(1);
    let first = pair.direct_sum(&vac);
    let second = vac.direct_sum(&pair);
    let quarter = std::f64::consts::FRAC_PI_4;
    let rot = phase_shift_symplectic(quarter, 1, 3)? * phase_shift_symplectic(quarter, 2, 3)?;
    let second = apply_symplectic(&second, &rot)?;
    mix_cms(&[(0.5, first), (0.5, second)])
}

/// [`build_remark_state`] parametrized by `cosh r ≥ 1`.
pub fn remark_state_from_cosh(cosh_r: f64) -> Result<CovarianceMatrix> {
    if !(cosh_r > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cosh r must exceed 1, got {cosh_r}"
        )));
    }
    build_remark_state(cosh_r.acosh())
}

/// The three-mode state `A (B₁ B₂)` whose determinant condition holds while
/// the steering LMI from `A` to `B₁B₂` fails.
pub fn counterexample_state() -> CovarianceMatrix {
    #[rustfmt::skip]
    let data = [
        2.0,  0.0,   1.88,  0.0,   0.37,  0.0,
        0.0,  2.0,   0.0,  -0.39,  0.0,  -0.71,
        1.88, 0.0,   2.78,  0.0,   0.0,   0.0,
        0.0, -0.39,  0.0,   2.78,  0.0,   0.0,
        0.37, 0.0,   0.0,   0.0,   1.14,  0.0,
        0.0, -0.71,  0.0,   0.0,   0.0,   1.14,
    ];
    CovarianceMatrix::from_row_slice(3, &data).expect("literal is symmetric")
}

/// Two-mode standard form `diag(a, a, b, b)` with cross block
/// `diag(c₁, c₂)`, `c₁ ≥ |c₂|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardForm2 {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
}

impl StandardForm2 {
    /// Checks the ordering and local-purity invariants and physicality of
    /// the expanded matrix.
    pub fn new(a: f64, b: f64, c1: f64, c2: f64) -> Result<Self> {
        let sf = StandardForm2 { a, b, c1, c2 };
        let tol = DEFAULT_REL_TOL * a.abs().max(b.abs()).max(1.0);
        if !(a >= 1.0 - tol && b >= 1.0 - tol) {
            return Err(Error::InvalidParameter(format!(
                "local variances must be at least 1, got a = {a}, b = {b}"
            )));
        }
        if !(c1 + tol >= c2.abs()) {
            return Err(Error::InvalidParameter(format!(
                "standard form requires c1 >= |c2|, got c1 = {c1}, c2 = {c2}"
            )));
        }
        require_physical(&sf.to_cm(), None)?;
        Ok(sf)
    }

    pub fn to_cm(&self) -> CovarianceMatrix {
        let StandardForm2 { a, b, c1, c2 } = *self;
        #[rustfmt::skip]
        let data = [
            a,   0.0, c1,  0.0,
            0.0, a,   0.0, c2,
            c1,  0.0, b,   0.0,
            0.0, c2,  0.0, b,
        ];
        CovarianceMatrix::from_row_slice(2, &data).expect("standard form is symmetric")
    }
}

/// Local symplectic invariants `(det γ_A, det γ_B, det C, det γ)` of a
/// two-mode covariance matrix.
pub fn local_invariants(gamma: &CovarianceMatrix) -> Result<[f64; 4]> {
    if gamma.n_modes() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected a two-mode state, got {} modes",
            gamma.n_modes()
        )));
    }
    let m = gamma.matrix();
    let det2 = |r: usize, c: usize| m[(r, c)] * m[(r + 1, c + 1)] - m[(r, c + 1)] * m[(r + 1, c)];
    Ok([det2(0, 0), det2(2, 2), det2(0, 2), gamma.det()])
}

/// Reduces a physical two-mode state to standard form by local symplectics.
///
/// Each local block is brought to `√det · I` with `√det γ_X^{-1/2}` (a
/// determinant-one, hence symplectic, 2×2 map); the cross block is then
/// diagonalized by local rotations, which leaves its singular values with
/// the sign of its determinant on the smaller one.
pub fn standardize_two_mode(gamma: &CovarianceMatrix) -> Result<StandardForm2> {
    let [det_a, det_b, det_c, _] = local_invariants(gamma)?;
    require_physical(gamma, None)?;
    let m = gamma.matrix();
    let block_a = SymMatrix::new(m.view((0, 0), (2, 2)).into_owned())?;
    let block_b = SymMatrix::new(m.view((2, 2), (2, 2)).into_owned())?;
    if !(det_a > 0.0 && det_b > 0.0) {
        return Err(Error::NotPositiveDefinite {
            min_eig: det_a.min(det_b),
        });
    }
    let a = det_a.sqrt();
    let b = det_b.sqrt();
    let s_a = crate::symmat::inverse_spd(&sqrt_spd(&block_a)?)?.into_inner() * a.sqrt();
    let s_b = crate::symmat::inverse_spd(&sqrt_spd(&block_b)?)?.into_inner() * b.sqrt();
    let cross = &s_a * m.view((0, 2), (2, 2)) * s_b.transpose();
    let gram = SymMatrix::new(cross.transpose() * &cross)?;
    let ev = sym_eigenvalues(&gram);
    let c1 = ev[1].max(0.0).sqrt();
    let c2 = ev[0].max(0.0).sqrt() * if det_c < 0.0 { -1.0 } else { 1.0 };
    Ok(StandardForm2 { a, b, c1, c2 })
}
