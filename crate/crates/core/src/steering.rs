//! Steering and separability criteria for Gaussian states.
//!
//! Verdicts are about steering *by Gaussian measurements*: a state reported
//! as not steerable may still be steerable with non-Gaussian measurements.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{require_physical, symplectic_form, CovarianceMatrix};
use crate::partition::{quadratures, ModePartition, Party};
use crate::symmat::{psd_check, HermPair, PsdVerdict, SymMatrix, DEFAULT_REL_TOL};

/// Margin band inside which the determinant and LMI verdicts are not
/// compared for single-mode steered parties.
pub const EQUIVALENCE_BAND: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Lmi,
    Determinant,
}

/// Verdict on steering `from → to` by Gaussian measurements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteeringVerdict {
    pub steerable: bool,
    /// For `Lmi`, the smallest eigenvalue of `γ + 0_from ⊕ iΩ_to`.
    /// For `Determinant`, `det γ − det γ_from`.
    pub margin: f64,
    pub tolerance: f64,
    /// `|margin| ≤ tolerance`: the state sits on the decision boundary.
    pub marginal: bool,
    pub method: Method,
    pub from: String,
    pub to: String,
}

/// Steering directions of a bipartite state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DirectionClass {
    TwoWay,
    OnlyAtoB,
    OnlyBtoA,
    NoWay,
}

impl DirectionClass {
    pub fn from_verdicts(a_to_b: bool, b_to_a: bool) -> Self {
        match (a_to_b, b_to_a) {
            (true, true) => DirectionClass::TwoWay,
            (true, false) => DirectionClass::OnlyAtoB,
            (false, true) => DirectionClass::OnlyBtoA,
            (false, false) => DirectionClass::NoWay,
        }
    }
}

fn direction<'p>(
    gamma: &CovarianceMatrix,
    partition: &'p ModePartition,
    from: &str,
    to: &str,
) -> Result<(&'p Party, &'p Party)> {
    if partition.n_modes() != gamma.n_modes() {
        return Err(Error::InvalidPartition(format!(
            "partition is over {} modes, state has {}",
            partition.n_modes(),
            gamma.n_modes()
        )));
    }
    if from == to {
        return Err(Error::InvalidPartition(format!(
            "party {from:?} cannot steer itself"
        )));
    }
    Ok((partition.party(from)?, partition.party(to)?))
}

/// Reduced covariance on `first ∪ second` (first's modes first) and the
/// imaginary part `signs.0 · Ω_first ⊕ signs.1 · Ω_second`.
fn reduced_lmi(
    gamma: &CovarianceMatrix,
    first: &[usize],
    second: &[usize],
    signs: (f64, f64),
) -> HermPair {
    let modes: Vec<usize> = first.iter().chain(second).copied().collect();
    let sub = gamma.as_sym().principal(&quadratures(&modes));
    let (k1, k2) = (2 * first.len(), 2 * second.len());
    let mut im = DMatrix::zeros(k1 + k2, k1 + k2);
    if signs.0 != 0.0 {
        im.view_mut((0, 0), (k1, k1))
            .copy_from(&(symplectic_form(first.len()) * signs.0));
    }
    if signs.1 != 0.0 {
        im.view_mut((k1, k1), (k2, k2))
            .copy_from(&(symplectic_form(second.len()) * signs.1));
    }
    HermPair::new(sub, im).expect("block-diagonal Ω is antisymmetric")
}

/// The steering LMI matrix `γ_{from,to} + 0_from ⊕ iΩ_to`.
pub fn steering_lmi(
    gamma: &CovarianceMatrix,
    partition: &ModePartition,
    from: &str,
    to: &str,
) -> Result<HermPair> {
    let (f, t) = direction(gamma, partition, from, to)?;
    Ok(reduced_lmi(gamma, &f.modes, &t.modes, (0.0, 1.0)))
}

fn lmi_verdict(
    gamma: &CovarianceMatrix,
    f: &Party,
    t: &Party,
    tol: Option<f64>,
) -> SteeringVerdict {
    let v = psd_check(&reduced_lmi(gamma, &f.modes, &t.modes, (0.0, 1.0)), tol);
    SteeringVerdict {
        steerable: !v.is_psd,
        margin: v.margin,
        tolerance: v.tolerance,
        marginal: v.is_marginal(),
        method: Method::Lmi,
        from: f.name.clone(),
        to: t.name.clone(),
    }
}

/// Non-steerable `from → to` iff `γ + 0_from ⊕ iΩ_to ⪰ 0`.
pub fn steerable_gaussian(
    gamma: &CovarianceMatrix,
    partition: &ModePartition,
    from: &str,
    to: &str,
    tol: Option<f64>,
) -> Result<SteeringVerdict> {
    let (f, t) = direction(gamma, partition, from, to)?;
    require_physical(gamma, None)?;
    Ok(lmi_verdict(gamma, f, t, tol))
}

/// Purity comparison `det γ_{from,to} ≥ det γ_from`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetCondition {
    pub satisfied: bool,
    pub det_global: f64,
    pub det_local_from: f64,
    /// Absolute slack used, `tol · max(1, |det γ_from|)`.
    pub tolerance: f64,
    pub from: String,
    pub to: String,
}

impl DetCondition {
    /// Violation certifies steerability; satisfaction is conclusive only
    /// when the steered party is a single mode.
    pub fn verdict(&self) -> SteeringVerdict {
        let margin = self.det_global - self.det_local_from;
        SteeringVerdict {
            steerable: !self.satisfied,
            margin,
            tolerance: self.tolerance,
            marginal: margin.abs() <= self.tolerance,
            method: Method::Determinant,
            from: self.from.clone(),
            to: self.to.clone(),
        }
    }
}

fn det_of(gamma: &CovarianceMatrix, modes: &[usize]) -> f64 {
    gamma.as_sym().principal(&quadratures(modes)).determinant()
}

fn det_condition_unchecked(
    gamma: &CovarianceMatrix,
    f: &Party,
    t: &Party,
    tol: Option<f64>,
) -> DetCondition {
    let modes: Vec<usize> = f.modes.iter().chain(&t.modes).copied().collect();
    let det_global = det_of(gamma, &modes);
    let det_local_from = det_of(gamma, &f.modes);
    let tolerance = tol.unwrap_or(DEFAULT_REL_TOL) * det_local_from.abs().max(1.0);
    DetCondition {
        satisfied: det_global >= det_local_from - tolerance,
        det_global,
        det_local_from,
        tolerance,
        from: f.name.clone(),
        to: t.name.clone(),
    }
}

/// Determinant (purity) condition for non-steerability `from → to`.
///
/// `tol` is relative; the slack is `tol · max(1, |det γ_from|)` with
/// `tol = 1e-9` by default.
pub fn det_condition(
    gamma: &CovarianceMatrix,
    partition: &ModePartition,
    from: &str,
    to: &str,
    tol: Option<f64>,
) -> Result<DetCondition> {
    let (f, t) = direction(gamma, partition, from, to)?;
    require_physical(gamma, None)?;
    Ok(det_condition_unchecked(gamma, f, t, tol))
}

/// Partial-transpose test `γ_AB + i(−Ω_A ⊕ Ω_B) ⪰ 0` on a bipartition.
/// `is_psd == false` certifies entanglement (NPT).
pub fn ppt_test(
    gamma: &CovarianceMatrix,
    partition: &ModePartition,
    tol: Option<f64>,
) -> Result<PsdVerdict> {
    let (a, b) = partition.as_bipartite()?;
    direction(gamma, partition, &a.name, &b.name)?;
    require_physical(gamma, None)?;
    Ok(psd_check(
        &reduced_lmi(gamma, &a.modes, &b.modes, (-1.0, 1.0)),
        tol,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub class: DirectionClass,
    pub a_to_b: SteeringVerdict,
    pub b_to_a: SteeringVerdict,
}

fn cross_check_determinant(
    gamma: &CovarianceMatrix,
    f: &Party,
    t: &Party,
    lmi: &SteeringVerdict,
) -> Result<()> {
    if t.modes.len() != 1 || lmi.margin.abs() < EQUIVALENCE_BAND {
        return Ok(());
    }
    let det = det_condition_unchecked(gamma, f, t, None);
    if det.satisfied == lmi.steerable {
        return Err(Error::InvariantViolation(format!(
            "determinant condition ({} vs {}) disagrees with LMI margin {:e} for {} -> {}",
            det.det_global, det.det_local_from, lmi.margin, f.name, t.name
        )));
    }
    Ok(())
}

/// Classifies a bipartite state by the two one-way LMI verdicts.
///
/// For single-mode steered parties each LMI verdict is cross-checked against
/// the determinant condition; for a one-way state with single-mode parties
/// the purity ordering `det γ_B ≤ det γ_AB < det γ_A` is asserted.
pub fn classify_direction(
    gamma: &CovarianceMatrix,
    partition: &ModePartition,
    tol: Option<f64>,
) -> Result<Classification> {
    let (a, b) = partition.as_bipartite()?;
    direction(gamma, partition, &a.name, &b.name)?;
    require_physical(gamma, None)?;
    let a_to_b = lmi_verdict(gamma, a, b, tol);
    let b_to_a = lmi_verdict(gamma, b, a, tol);
    cross_check_determinant(gamma, a, b, &a_to_b)?;
    cross_check_determinant(gamma, b, a, &b_to_a)?;
    let class = DirectionClass::from_verdicts(a_to_b.steerable, b_to_a.steerable);

    let one_way = match class {
        DirectionClass::OnlyAtoB => Some((a, b, &a_to_b, &b_to_a)),
        DirectionClass::OnlyBtoA => Some((b, a, &b_to_a, &a_to_b)),
        _ => None,
    };
    if let Some((steering, steered, fwd, back)) = one_way {
        let clear = fwd.margin.abs() >= EQUIVALENCE_BAND && back.margin.abs() >= EQUIVALENCE_BAND;
        if steering.modes.len() == 1 && steered.modes.len() == 1 && clear {
            let all: Vec<usize> = a.modes.iter().chain(&b.modes).copied().collect();
            let det_all = det_of(gamma, &all);
            let det_steering = det_of(gamma, &steering.modes);
            let det_steered = det_of(gamma, &steered.modes);
            let slack = DEFAULT_REL_TOL * det_steering.abs().max(1.0);
            if !(det_steered <= det_all + slack && det_all < det_steering) {
                return Err(Error::InvariantViolation(format!(
                    "one-way state breaks purity ordering: det steered {det_steered}, \
                     det global {det_all}, det steering {det_steering}"
                )));
            }
        }
    }
    Ok(Classification {
        class,
        a_to_b,
        b_to_a,
    })
}

/// Outcome of a monogamy audit toward a steered party.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonogamyAudit {
    pub first_steers: bool,
    pub second_steers: bool,
    pub first: SteeringVerdict,
    pub second: SteeringVerdict,
    pub consistent: bool,
}

/// Whether two equally sized parties can be exchanged without changing `γ`.
pub fn is_exchange_symmetric(gamma: &CovarianceMatrix, first: &Party, second: &Party) -> bool {
    if first.modes.len() != second.modes.len() {
        return false;
    }
    let mut order: Vec<usize> = (0..gamma.n_modes()).collect();
    for (&x, &y) in first.modes.iter().zip(&second.modes) {
        order[x] = y;
        order[y] = x;
    }
    let Ok(swapped) = gamma.permute_modes(&order) else {
        return false;
    };
    let scale = gamma.as_sym().max_abs().max(1.0);
    (gamma.matrix() - swapped.matrix()).amax() <= 1e-9 * scale
}

/// Checks that `first` and `second` do not both steer `steered`.
///
/// For a single-mode steered party this holds for every physical state.
/// A multi-mode steered party is accepted only when the state is invariant
/// under exchanging `first` and `second`. A violation is returned as
/// [`Error::InvariantViolation`].
pub fn monogamy_audit(
    gamma: &CovarianceMatrix,
    partition: &ModePartition,
    first: &str,
    second: &str,
    steered: &str,
    tol: Option<f64>,
) -> Result<MonogamyAudit> {
    if first == second {
        return Err(Error::InvalidPartition(
            "steering parties must differ".into(),
        ));
    }
    let (p1, target) = direction(gamma, partition, first, steered)?;
    let (p2, _) = direction(gamma, partition, second, steered)?;
    if target.modes.len() > 1 && !is_exchange_symmetric(gamma, p1, p2) {
        return Err(Error::OutOfScope(format!(
            "steered party {steered:?} has {} modes and {first:?}/{second:?} are not exchange-symmetric",
            target.modes.len()
        )));
    }
    require_physical(gamma, None)?;
    let v1 = lmi_verdict(gamma, p1, target, tol);
    let v2 = lmi_verdict(gamma, p2, target, tol);
    if v1.steerable && v2.steerable {
        return Err(Error::InvariantViolation(format!(
            "both {first:?} (margin {:e}) and {second:?} (margin {:e}) steer {steered:?}",
            v1.margin, v2.margin
        )));
    }
    Ok(MonogamyAudit {
        first_steers: v1.steerable,
        second_steers: v2.steerable,
        first: v1,
        second: v2,
        consistent: true,
    })
}

/// `γ_B − Cᵀ γ_A⁻¹ C` for the steering direction `from → to`.
pub fn conditional_cm(
    gamma: &CovarianceMatrix,
    partition: &ModePartition,
    from: &str,
    to: &str,
) -> Result<CovarianceMatrix> {
    let (f, t) = direction(gamma, partition, from, to)?;
    let modes: Vec<usize> = f.modes.iter().chain(&t.modes).copied().collect();
    let sub: SymMatrix = gamma.as_sym().principal(&quadratures(&modes));
    let pivot: Vec<usize> = (0..2 * f.modes.len()).collect();
    let s = crate::symmat::schur_complement(&sub, &pivot)?;
    CovarianceMatrix::from_sym(s.value)
}
