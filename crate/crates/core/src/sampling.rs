//! Seeded generators for random symplectic matrices and Gaussian states.
//!
//! All generators are pure functions of their [`SamplerConfig`]; the same
//! configuration always yields bit-identical output.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{partial_trace, symplectic_form, validate_cm, CovarianceMatrix};

/// Default half-width of the uniform distribution of Hamiltonian entries.
pub const DEFAULT_SQUEEZE_SCALE: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Purity {
    Pure,
    /// Purify with this many ancilla modes, then trace them out.
    Mixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub n_modes: usize,
    pub squeeze_scale: f64,
    pub purity: Purity,
}

impl SamplerConfig {
    pub fn new(seed: u64, n_modes: usize) -> Self {
        SamplerConfig {
            seed,
            n_modes,
            squeeze_scale: DEFAULT_SQUEEZE_SCALE,
            purity: Purity::Pure,
        }
    }

    pub fn with_scale(mut self, squeeze_scale: f64) -> Self {
        self.squeeze_scale = squeeze_scale;
        self
    }

    pub fn with_purity(mut self, purity: Purity) -> Self {
        self.purity = purity;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes == 0 {
            return Err(Error::InvalidParameter(
                "sampler needs at least one mode".into(),
            ));
        }
        if !(self.squeeze_scale > 0.0) || !self.squeeze_scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "squeeze scale must be positive, got {}",
                self.squeeze_scale
            )));
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// `exp(ΩH)` for a symmetric `H`; symplectic by construction.
pub fn symplectic_from_hamiltonian(h: &DMatrix<f64>) -> DMatrix<f64> {
    let n = h.nrows() / 2;
    (symplectic_form(n) * h).exp()
}

fn random_hamiltonian(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let v = rng.gen_range(-scale..scale);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

/// `S = exp(ΩH)` with `H` symmetric, entries uniform in `(−s, s)`.
pub fn random_symplectic(cfg: &SamplerConfig) -> DMatrix<f64> {
    let mut rng = cfg.rng();
    let h = random_hamiltonian(&mut rng, 2 * cfg.n_modes, cfg.squeeze_scale);
    symplectic_from_hamiltonian(&h)
}

fn pure_from_symplectic(s: &DMatrix<f64>) -> CovarianceMatrix {
    let g = s * s.transpose();
    CovarianceMatrix::new((&g + g.transpose()) * 0.5).expect("SSᵀ is symmetric")
}

/// `γ = SSᵀ` for a random symplectic `S`. Ignores `cfg.purity`.
pub fn random_pure_cm(cfg: &SamplerConfig) -> CovarianceMatrix {
    pure_from_symplectic(&random_symplectic(cfg))
}

/// Reduction of a random pure `(n + k)`-mode state onto its first `n` modes.
/// `Purity::Pure` and `Purity::Mixed(0)` give [`random_pure_cm`].
pub fn random_mixed_cm(cfg: &SamplerConfig) -> CovarianceMatrix {
    let ancillas = match cfg.purity {
        Purity::Pure | Purity::Mixed(0) => return random_pure_cm(cfg),
        Purity::Mixed(k) => k,
    };
    let total = SamplerConfig {
        n_modes: cfg.n_modes + ancillas,
        ..*cfg
    };
    let keep: Vec<usize> = (0..cfg.n_modes).collect();
    partial_trace(&random_pure_cm(&total), &keep).expect("kept modes are in range")
}

/// Dispatches on `cfg.purity`.
pub fn random_cm(cfg: &SamplerConfig) -> CovarianceMatrix {
    random_mixed_cm(cfg)
}

/// A physical `(M + M + N)`-mode state invariant under exchanging the first
/// two parties.
///
/// A random state (per `cfg.purity`) is averaged with its party-swapped copy;
/// if the result were to violate the uncertainty relation, the smallest
/// isotropic noise `t·I` restoring it is added (found by bisection).
/// `cfg.n_modes` must equal `2M + N`.
pub fn random_symmetric_tripartite(
    cfg: &SamplerConfig,
    sizes: (usize, usize, usize),
) -> Result<CovarianceMatrix> {
    let (m, m2, n) = sizes;
    if m != m2 || m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "party sizes must be (M, M, N) with M, N ≥ 1, got {sizes:?}"
        )));
    }
    if cfg.n_modes != 2 * m + n {
        return Err(Error::InvalidParameter(format!(
            "sampler has {} modes, party sizes need {}",
            cfg.n_modes,
            2 * m + n
        )));
    }
    cfg.validate()?;
    let base = random_cm(cfg);
    let order: Vec<usize> = (m..2 * m).chain(0..m).chain(2 * m..2 * m + n).collect();
    let swapped = base.permute_modes(&order)?;
    let avg = CovarianceMatrix::new((base.matrix() + swapped.matrix()) * 0.5)?;
    lift_to_physical(&avg)
}

fn with_noise(g: &CovarianceMatrix, t: f64) -> CovarianceMatrix {
    let dim = g.matrix().nrows();
    CovarianceMatrix::new(g.matrix() + DMatrix::identity(dim, dim) * t).expect("symmetric")
}

fn lift_to_physical(g: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    if validate_cm(g, None).is_psd {
        return Ok(g.clone());
    }
    let mut hi = 1e-6;
    while !validate_cm(&with_noise(g, hi), None).is_psd {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::InvariantViolation(
                "isotropic lift failed to restore physicality".into(),
            ));
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if validate_cm(&with_noise(g, mid), None).is_psd {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(with_noise(g, hi))
}
