//! Dense real-symmetric kernel.
//!
//! Every positivity question in the crate reduces to the spectrum of a real
//! symmetric matrix. Hermitian matrices `A + iB` (with `A` symmetric and `B`
//! antisymmetric) are never formed as complex arrays; they are represented by
//! their real embedding
//!
//! ```text
//! [ A  -B ]
//! [ B   A ]
//! ```
//!
//! whose spectrum is that of `A + iB` with every eigenvalue doubled.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative factor for the default PSD tolerance band.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Relative factor below which a pivot block is considered singular.
pub const PIVOT_REL_TOL: f64 = 1e-12;

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Symmetry tolerance `1e-10 * max(1, max |m_ij|)`.
pub fn symmetry_tolerance(m: &DMatrix<f64>) -> f64 {
    1e-10 * max_abs(m).max(1.0)
}

fn asymmetry(m: &DMatrix<f64>, sign: f64) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - sign * m[(j, i)]).abs());
        }
    }
    dev
}

fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// Eigenvalues of a symmetric matrix, ascending.
fn spectrum(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// A real symmetric matrix, exactly symmetrized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Accepts `m` if it is square and symmetric to within
    /// [`symmetry_tolerance`]; the stored matrix is `(m + mᵀ)/2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square(&m)?;
        let tolerance = symmetry_tolerance(&m);
        let deviation = asymmetry(&m, 1.0);
        if !deviation.is_finite() || deviation > tolerance {
            return Err(Error::Asymmetric {
                deviation,
                tolerance,
            });
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(SymMatrix(sym))
    }

    pub fn from_row_slice(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, data))
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    /// Principal submatrix on `idx` (rows and columns in the given order).
    pub fn principal(&self, idx: &[usize]) -> SymMatrix {
        let k = idx.len();
        SymMatrix(DMatrix::from_fn(k, k, |i, j| self.0[(idx[i], idx[j])]))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        sym_eigenvalues(self)
    }

    pub fn determinant(&self) -> f64 {
        determinant(self)
    }
}

/// A Hermitian matrix `sym + i·antisym` held as two real matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct HermPair {
    sym: SymMatrix,
    antisym: DMatrix<f64>,
}

impl HermPair {
    pub fn new(sym: SymMatrix, antisym: DMatrix<f64>) -> Result<Self> {
        if antisym.nrows() != sym.dim() || antisym.ncols() != sym.dim() {
            return Err(Error::DimensionMismatch(format!(
                "real part is {0}x{0}, imaginary part is {1}x{2}",
                sym.dim(),
                antisym.nrows(),
                antisym.ncols()
            )));
        }
        let tolerance = symmetry_tolerance(&antisym);
        let deviation = asymmetry(&antisym, -1.0);
        if !deviation.is_finite() || deviation > tolerance {
            return Err(Error::NotAntisymmetric {
                deviation,
                tolerance,
            });
        }
        let antisym = (&antisym - antisym.transpose()) * 0.5;
        Ok(HermPair { sym, antisym })
    }

    pub fn dim(&self) -> usize {
        self.sym.dim()
    }

    pub fn sym(&self) -> &SymMatrix {
        &self.sym
    }

    pub fn antisym(&self) -> &DMatrix<f64> {
        &self.antisym
    }

    /// The `2n × 2n` real symmetric embedding `[[A, -B], [B, A]]`.
    pub fn embedding(&self) -> SymMatrix {
        let n = self.dim();
        let a = self.sym.matrix();
        let b = &self.antisym;
        let mut e = DMatrix::zeros(2 * n, 2 * n);
        e.view_mut((0, 0), (n, n)).copy_from(a);
        e.view_mut((n, n), (n, n)).copy_from(a);
        e.view_mut((n, 0), (n, n)).copy_from(b);
        e.view_mut((0, n), (n, n)).copy_from(&(-b));
        SymMatrix(e)
    }

    /// Recovers a pair from an embedding laid out as `[[A, -B], [B, A]]`.
    fn from_embedding(e: &DMatrix<f64>) -> Result<Self> {
        let n = e.nrows() / 2;
        let a = e.view((0, 0), (n, n)).into_owned();
        let b = e.view((n, 0), (n, n)).into_owned();
        HermPair::new(SymMatrix::new(a)?, b)
    }

    /// Eigenvalues of `A + iB`, ascending (each once).
    pub fn eigenvalues(&self) -> Vec<f64> {
        spectrum(self.embedding().matrix())
            .into_iter()
            .step_by(2)
            .collect()
    }
}

/// Outcome of a positive-semidefiniteness test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdVerdict {
    pub is_psd: bool,
    /// Smallest eigenvalue of the tested matrix.
    pub margin: f64,
    pub tolerance: f64,
}

impl PsdVerdict {
    pub fn from_margin(margin: f64, tolerance: f64) -> Self {
        PsdVerdict {
            is_psd: margin >= -tolerance,
            margin,
            tolerance,
        }
    }

    /// Margin lies inside the `±tolerance` band around zero.
    pub fn is_marginal(&self) -> bool {
        self.margin.abs() <= self.tolerance
    }
}

/// Full spectrum of `m`, ascending.
pub fn sym_eigenvalues(m: &SymMatrix) -> Vec<f64> {
    spectrum(m.matrix())
}

/// Default PSD band for a matrix whose spectral radius is `norm`.
pub fn default_tolerance(norm: f64) -> f64 {
    DEFAULT_REL_TOL * norm.max(1.0)
}

/// Decides `A + iB ⪰ 0` from the embedding spectrum.
///
/// With `tol = None` the band is `1e-9 · max(1, ‖A + iB‖₂)`.
pub fn psd_check(pair: &HermPair, tol: Option<f64>) -> PsdVerdict {
    let ev = spectrum(pair.embedding().matrix());
    let margin = ev[0];
    let norm = ev[0].abs().max(ev[ev.len() - 1].abs());
    PsdVerdict::from_margin(margin, tol.unwrap_or_else(|| default_tolerance(norm)))
}

/// Same as [`psd_check`] for a purely real symmetric matrix.
pub fn psd_check_real(m: &SymMatrix, tol: Option<f64>) -> PsdVerdict {
    let ev = sym_eigenvalues(m);
    let norm = ev[0].abs().max(ev[ev.len() - 1].abs());
    PsdVerdict::from_margin(ev[0], tol.unwrap_or_else(|| default_tolerance(norm)))
}

/// Real determinant of a Hermitian pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HermDet {
    pub value: f64,
    /// Some eigenvalue lies within the default tolerance of zero.
    pub near_singular: bool,
}

/// `det(A + iB)` as the product of one eigenvalue from each doubled pair of
/// the embedding spectrum.
pub fn herm_pair_det(pair: &HermPair) -> HermDet {
    let ev = spectrum(pair.embedding().matrix());
    let norm = ev[0].abs().max(ev[ev.len() - 1].abs());
    let tol = default_tolerance(norm);
    let half: Vec<f64> = ev.iter().copied().step_by(2).collect();
    HermDet {
        value: half.iter().product(),
        near_singular: half.iter().any(|v| v.abs() <= tol),
    }
}

/// Determinant as the product of eigenvalues.
pub fn determinant(m: &SymMatrix) -> f64 {
    sym_eigenvalues(m).iter().product()
}

/// Result of a Schur complement together with the index order used.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurComplement<T> {
    pub value: T,
    /// Row/column order of the permuted input: pivot indices first, then the
    /// remaining indices ascending. The complement is indexed by the tail.
    pub permutation: Vec<usize>,
    pub pivot_len: usize,
}

impl<T> SchurComplement<T> {
    /// Permutation matrix `P` with `(P M Pᵀ)[i][j] = M[perm[i]][perm[j]]`.
    pub fn permutation_matrix(&self) -> DMatrix<f64> {
        let n = self.permutation.len();
        let mut p = DMatrix::zeros(n, n);
        for (i, &src) in self.permutation.iter().enumerate() {
            p[(i, src)] = 1.0;
        }
        p
    }

    pub fn remaining(&self) -> &[usize] {
        &self.permutation[self.pivot_len..]
    }
}

/// Matrices that admit a Schur complement with respect to an index block.
pub trait Schur: Sized {
    fn schur_complement(&self, pivot: &[usize]) -> Result<SchurComplement<Self>>;
}

/// `M / P = D − Cᵀ P⁻¹ C` after moving `pivot` to the front.
pub fn schur_complement<T: Schur>(m: &T, pivot: &[usize]) -> Result<SchurComplement<T>> {
    m.schur_complement(pivot)
}

fn pivot_order(dim: usize, pivot: &[usize]) -> Result<Vec<usize>> {
    if pivot.is_empty() {
        return Err(Error::InvalidIndices("pivot block is empty".into()));
    }
    if pivot.len() >= dim {
        return Err(Error::InvalidIndices(format!(
            "pivot block of size {} leaves nothing of a {dim}x{dim} matrix",
            pivot.len()
        )));
    }
    let mut seen = vec![false; dim];
    for &i in pivot {
        if i >= dim {
            return Err(Error::InvalidIndices(format!(
                "pivot index {i} out of range for dimension {dim}"
            )));
        }
        if seen[i] {
            return Err(Error::InvalidIndices(format!("pivot index {i} repeated")));
        }
        seen[i] = true;
    }
    let mut order = pivot.to_vec();
    order.extend((0..dim).filter(|&i| !seen[i]));
    Ok(order)
}

fn complement_dense(m: &DMatrix<f64>, order: &[usize], k: usize) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let rest = n - k;
    let pick = |r0: usize, c0: usize, rows: usize, cols: usize| {
        DMatrix::from_fn(rows, cols, |i, j| m[(order[r0 + i], order[c0 + j])])
    };
    let p = pick(0, 0, k, k);
    let c = pick(0, k, k, rest);
    let d = pick(k, k, rest, rest);

    let eig = SymmetricEigen::new(p);
    let min_abs = eig
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, v| a.min(v.abs()));
    let threshold = PIVOT_REL_TOL * m.norm().max(f64::MIN_POSITIVE);
    if min_abs <= threshold {
        return Err(Error::SingularPivot { min_abs, threshold });
    }
    let inv_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v));
    let p_inv = &eig.eigenvectors * inv_diag * eig.eigenvectors.transpose();
    let s = d - c.transpose() * p_inv * c;
    Ok((&s + s.transpose()) * 0.5)
}

impl Schur for SymMatrix {
    fn schur_complement(&self, pivot: &[usize]) -> Result<SchurComplement<Self>> {
        let order = pivot_order(self.dim(), pivot)?;
        let s = complement_dense(self.matrix(), &order, pivot.len())?;
        Ok(SchurComplement {
            value: SymMatrix(s),
            permutation: order,
            pivot_len: pivot.len(),
        })
    }
}

impl Schur for HermPair {
    /// Computed on the real embedding with the doubled pivot `{i, i + n}`;
    /// the embedding map is an algebra homomorphism, so the result embeds the
    /// complex complement.
    fn schur_complement(&self, pivot: &[usize]) -> Result<SchurComplement<Self>> {
        let n = self.dim();
        let order = pivot_order(n, pivot)?;
        let k = pivot.len();
        let rest = &order[k..];
        let mut emb_order: Vec<usize> = pivot.to_vec();
        emb_order.extend(pivot.iter().map(|i| i + n));
        emb_order.extend(rest.iter().copied());
        emb_order.extend(rest.iter().map(|i| i + n));
        let s = complement_dense(self.embedding().matrix(), &emb_order, 2 * k)?;
        Ok(SchurComplement {
            value: HermPair::from_embedding(&s)?,
            permutation: order,
            pivot_len: k,
        })
    }
}

/// Symmetric square root of a positive-definite matrix.
pub fn sqrt_spd(m: &SymMatrix) -> Result<SymMatrix> {
    let eig = SymmetricEigen::new(m.matrix().clone());
    let min_eig = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    let max_eig = eig.eigenvalues.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    if min_eig <= default_tolerance(max_eig) {
        return Err(Error::NotPositiveDefinite { min_eig });
    }
    let root = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let r = &eig.eigenvectors * root * eig.eigenvectors.transpose();
    Ok(SymMatrix((&r + r.transpose()) * 0.5))
}

/// Inverse of a positive-definite matrix via its eigendecomposition.
pub fn inverse_spd(m: &SymMatrix) -> Result<SymMatrix> {
    let eig = SymmetricEigen::new(m.matrix().clone());
    let min_eig = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    if min_eig <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eig });
    }
    let inv = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v));
    let r = &eig.eigenvectors * inv * eig.eigenvectors.transpose();
    Ok(SymMatrix((&r + r.transpose()) * 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Complex;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn omega2() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
    }

    fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        SymMatrix::new(&a + a.transpose()).unwrap()
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        SymMatrix::new(&a * a.transpose() + DMatrix::identity(n, n) * 0.1).unwrap()
    }

    /// Characteristic polynomial coefficients by Faddeev-LeVerrier,
    /// monic, highest degree first.
    fn char_poly(m: &DMatrix<f64>) -> Vec<f64> {
        let n = m.nrows();
        let mut coeffs = vec![1.0];
        let mut mk = DMatrix::<f64>::zeros(n, n);
        let id = DMatrix::<f64>::identity(n, n);
        let mut c = 1.0;
        for k in 1..=n {
            mk = m * (&mk + &id * c);
            c = -mk.trace() / k as f64;
            coeffs.push(c);
        }
        coeffs
    }

    /// Roots of a monic polynomial as eigenvalues of its companion matrix
    /// (general real Schur form, not the symmetric solver).
    fn companion_roots(coeffs: &[f64]) -> Vec<f64> {
        let n = coeffs.len() - 1;
        let mut comp = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            comp[(0, j)] = -coeffs[j + 1];
        }
        for i in 1..n {
            comp[(i, i - 1)] = 1.0;
        }
        let roots: Vec<Complex<f64>> = comp.complex_eigenvalues().iter().copied().collect();
        let mut re: Vec<f64> = roots.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        re
    }

    #[test]
    fn identity_spectrum() {
        assert_eq!(sym_eigenvalues(&SymMatrix::identity(4)), vec![1.0; 4]);
    }

    #[test]
    fn diagonal_spectrum_sorted() {
        let m = SymMatrix::from_row_slice(2, &[3.0, 0.0, 0.0, -1.0]).unwrap();
        assert_eq!(sym_eigenvalues(&m), vec![-1.0, 3.0]);
    }

    #[test]
    fn spectrum_matches_companion_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_sym(&mut rng, 6);
            let fast = sym_eigenvalues(&m);
            let oracle = companion_roots(&char_poly(m.matrix()));
            for (a, b) in fast.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-8, "{fast:?} vs {oracle:?}");
            }
        }
    }

    #[test]
    fn reconstruction_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..10 {
            let m = random_sym(&mut rng, n);
            let eig = SymmetricEigen::new(m.matrix().clone());
            let rec = &eig.eigenvectors
                * DMatrix::from_diagonal(&eig.eigenvalues)
                * eig.eigenvectors.transpose();
            assert!((m.matrix() - rec).norm() <= 1e-9 * m.matrix().norm());
        }
    }

    #[test]
    fn rejects_empty_and_asymmetric() {
        assert!(matches!(
            SymMatrix::new(DMatrix::zeros(0, 0)),
            Err(Error::EmptyMatrix)
        ));
        assert!(matches!(
            SymMatrix::from_row_slice(2, &[1.0, 0.5, 0.4, 1.0]),
            Err(Error::Asymmetric { .. })
        ));
        assert!(matches!(
            SymMatrix::new(DMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
        // Within εsym is accepted and symmetrized.
        let m = SymMatrix::from_row_slice(2, &[1.0, 0.5, 0.5 + 1e-12, 1.0]).unwrap();
        assert_eq!(m.matrix()[(0, 1)], m.matrix()[(1, 0)]);
    }

    #[test]
    fn vacuum_saturates_uncertainty() {
        let p = HermPair::new(SymMatrix::identity(2), omega2()).unwrap();
        let v = psd_check(&p, None);
        assert!(v.is_psd);
        assert!(v.margin.abs() < 1e-12);
    }

    #[test]
    fn doubled_symplectic_form_fails() {
        let p = HermPair::new(SymMatrix::identity(2), omega2() * 2.0).unwrap();
        let v = psd_check(&p, None);
        assert!(!v.is_psd);
        assert_relative_eq!(v.margin, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn herm_pair_det_small_cases() {
        let p = HermPair::new(SymMatrix::identity(2), omega2()).unwrap();
        let d = herm_pair_det(&p);
        assert!(d.value.abs() < 1e-12);
        assert!(d.near_singular);
        let p = HermPair::new(
            SymMatrix::new(DMatrix::identity(2, 2) * 2.0).unwrap(),
            omega2(),
        )
        .unwrap();
        let d = herm_pair_det(&p);
        assert_relative_eq!(d.value, 3.0, epsilon = 1e-12);
        assert!(!d.near_singular);
    }

    #[test]
    fn herm_pair_det_squared_matches_embedding_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..6 {
            let a = random_sym(&mut rng, n);
            let k = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let p = HermPair::new(a, &k - k.transpose()).unwrap();
            let d = herm_pair_det(&p).value;
            let emb = p.embedding().matrix().clone().determinant();
            assert!((d * d - emb).abs() <= 1e-8 * emb.abs().max(1e-300));
        }
    }

    #[test]
    fn rejects_mismatched_pair() {
        assert!(matches!(
            HermPair::new(SymMatrix::identity(3), omega2()),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            HermPair::new(SymMatrix::identity(2), DMatrix::identity(2, 2)),
            Err(Error::NotAntisymmetric { .. })
        ));
    }

    #[test]
    fn schur_two_by_two() {
        let m = SymMatrix::from_row_slice(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let s = schur_complement(&m, &[0]).unwrap();
        assert_relative_eq!(s.value.matrix()[(0, 0)], 1.5, epsilon = 1e-14);
        assert_eq!(s.permutation, vec![0, 1]);
    }

    #[test]
    fn schur_block_diagonal_keeps_block() {
        let m = SymMatrix::from_row_slice(
            4,
            &[
                2.0, 0.5, 0.0, 0.0, //
                0.5, 3.0, 0.0, 0.0, //
                0.0, 0.0, 4.0, 1.0, //
                0.0, 0.0, 1.0, 5.0,
            ],
        )
        .unwrap();
        let s = schur_complement(&m, &[0, 1]).unwrap();
        assert_eq!(s.value, m.principal(&[2, 3]));
        // Pivot on the back block: permutation records the reordering.
        let s = schur_complement(&m, &[3, 2]).unwrap();
        assert_eq!(s.permutation, vec![3, 2, 0, 1]);
        assert_eq!(s.remaining(), &[0, 1]);
        let p = s.permutation_matrix();
        let permuted = &p * m.matrix() * p.transpose();
        assert_eq!(permuted[(0, 0)], 5.0);
        assert!((s.value.matrix() - m.principal(&[0, 1]).matrix()).norm() < 1e-14);
    }

    #[test]
    fn schur_errors() {
        let m = SymMatrix::from_row_slice(2, &[0.0, 1.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            schur_complement(&m, &[0]),
            Err(Error::SingularPivot { .. })
        ));
        let m = SymMatrix::identity(3);
        assert!(matches!(
            schur_complement(&m, &[3]),
            Err(Error::InvalidIndices(_))
        ));
        assert!(matches!(
            schur_complement(&m, &[1, 1]),
            Err(Error::InvalidIndices(_))
        ));
        assert!(matches!(
            schur_complement(&m, &[]),
            Err(Error::InvalidIndices(_))
        ));
        assert!(matches!(
            schur_complement(&m, &[0, 1, 2]),
            Err(Error::InvalidIndices(_))
        ));
    }

    #[test]
    fn herm_schur_matches_complex_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 5;
        let a = random_spd(&mut rng, n);
        let k = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-0.1..0.1));
        let pair = HermPair::new(a.clone(), &k - k.transpose()).unwrap();
        let s = schur_complement(&pair, &[1, 3]).unwrap();

        let h = DMatrix::from_fn(n, n, |i, j| {
            Complex::new(pair.sym().matrix()[(i, j)], pair.antisym()[(i, j)])
        });
        let order = &s.permutation;
        let pick = |rows: &[usize], cols: &[usize]| {
            DMatrix::from_fn(rows.len(), cols.len(), |i, j| h[(rows[i], cols[j])])
        };
        let (piv, rest) = order.split_at(2);
        let expect = pick(rest, rest)
            - pick(rest, piv) * pick(piv, piv).try_inverse().unwrap() * pick(piv, rest);
        for i in 0..3 {
            for j in 0..3 {
                assert!((expect[(i, j)].re - s.value.sym().matrix()[(i, j)]).abs() < 1e-12);
                assert!((expect[(i, j)].im - s.value.antisym()[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sqrt_small_cases() {
        let r = sqrt_spd(&SymMatrix::identity(3)).unwrap();
        assert!((r.matrix() - DMatrix::identity(3, 3)).norm() < 1e-14);
        let m = SymMatrix::from_row_slice(2, &[4.0, 0.0, 0.0, 9.0]).unwrap();
        let r = sqrt_spd(&m).unwrap();
        assert_relative_eq!(r.matrix()[(0, 0)], 2.0, epsilon = 1e-14);
        assert_relative_eq!(r.matrix()[(1, 1)], 3.0, epsilon = 1e-14);
        let bad = SymMatrix::from_row_slice(2, &[1.0, 0.0, 0.0, -1.0]).unwrap();
        assert!(matches!(
            sqrt_spd(&bad),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn sqrt_residual_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let m = random_spd(&mut rng, 6);
            let r = sqrt_spd(&m).unwrap();
            let res = (r.matrix() * r.matrix() - m.matrix()).norm();
            assert!(res <= 1e-9 * m.matrix().norm());
        }
    }

    fn spd_strategy() -> impl Strategy<Value = SymMatrix> {
        (1usize..=12, any::<u64>()).prop_map(|(n, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_spd(&mut rng, n)
        })
    }

    fn herm_strategy() -> impl Strategy<Value = HermPair> {
        (1usize..=6, any::<u64>()).prop_map(|(n, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_sym(&mut rng, n);
            let k = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            HermPair::new(a, &k - k.transpose()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn determinant_factorizes_over_pivot(m in spd_strategy(), split in any::<u64>()) {
            prop_assume!(m.dim() >= 2);
            let k = 1 + (split as usize) % (m.dim() - 1);
            let pivot: Vec<usize> = (0..k).map(|i| (i * 7 + split as usize) % m.dim()).collect();
            let mut pivot_sorted = pivot.clone();
            pivot_sorted.sort();
            pivot_sorted.dedup();
            let s = schur_complement(&m, &pivot_sorted).unwrap();
            let lhs = determinant(&m);
            let rhs = determinant(&m.principal(&pivot_sorted)) * determinant(&s.value);
            prop_assert!((lhs - rhs).abs() <= 1e-8 * lhs.abs());
        }

        #[test]
        fn schur_preserves_positive_definiteness(m in spd_strategy()) {
            prop_assume!(m.dim() >= 2);
            let s = schur_complement(&m, &[0]).unwrap();
            prop_assert!(sym_eigenvalues(&s.value)[0] > 0.0);
        }

        #[test]
        fn embedding_spectrum_pairs(p in herm_strategy()) {
            let ev = sym_eigenvalues(&p.embedding());
            for pair in ev.chunks(2) {
                prop_assert!((pair[0] - pair[1]).abs() <= 1e-8 * (1.0 + pair[0].abs()));
            }
        }

        #[test]
        fn psd_verdict_matches_embedding_min(p in herm_strategy(), t in 0.0f64..0.5) {
            let v = psd_check(&p, Some(t));
            let min = sym_eigenvalues(&p.embedding())[0];
            prop_assert_eq!(v.is_psd, min >= -t);
            prop_assert_eq!(v.margin, min);
        }
    }
}
