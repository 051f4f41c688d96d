//! Gaussian channels `γ → XγXᵀ + Y` and the one-way steering thresholds of
//! a two-mode squeezed vacuum sent through a lossy or amplifying channel.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{require_physical, symplectic_form, tmsv, CovarianceMatrix};
use crate::partition::{quadratures, ModePartition};
use crate::steering::{steerable_gaussian, SteeringVerdict};
use crate::symmat::{psd_check, HermPair, PsdVerdict, SymMatrix};

/// A Gaussian channel on `k` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    x: DMatrix<f64>,
    y: SymMatrix,
}

impl GaussianChannel {
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        let y = SymMatrix::new(y)?;
        if x.nrows() != x.ncols() || x.nrows() != y.dim() || !x.nrows().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "channel matrices must be equal even-sized squares, got X {}x{} and Y {}x{}",
                x.nrows(),
                x.ncols(),
                y.dim(),
                y.dim()
            )));
        }
        Ok(GaussianChannel { x, y })
    }

    pub fn identity(k: usize) -> Self {
        GaussianChannel {
            x: DMatrix::identity(2 * k, 2 * k),
            y: SymMatrix::new(DMatrix::zeros(2 * k, 2 * k)).expect("zero is symmetric"),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.x.nrows() / 2
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<f64> {
        self.y.matrix()
    }

    /// Complete-positivity test `Y + iΩ − iXΩXᵀ ⪰ 0`.
    pub fn cp_check(&self, tol: Option<f64>) -> PsdVerdict {
        let w = symplectic_form(self.n_modes());
        let im = &w - &self.x * &w * self.x.transpose();
        let pair = HermPair::new(self.y.clone(), im).expect("Ω − XΩXᵀ is antisymmetric");
        psd_check(&pair, tol)
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &GaussianChannel) -> Result<GaussianChannel> {
        if self.n_modes() != other.n_modes() {
            return Err(Error::DimensionMismatch(format!(
                "composing {}-mode and {}-mode channels",
                self.n_modes(),
                other.n_modes()
            )));
        }
        let x = &other.x * &self.x;
        let y = &other.x * self.y.matrix() * other.x.transpose() + other.y.matrix();
        GaussianChannel::new(x, (&y + y.transpose()) * 0.5)
    }
}

/// Pure loss with transmissivity `η ∈ [0, 1]`: `X = √η I`, `Y = (1 − η) I`.
pub fn loss_channel(eta: f64) -> Result<GaussianChannel> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!(
            "transmissivity must lie in [0, 1], got {eta}"
        )));
    }
    let id = DMatrix::identity(2, 2);
    GaussianChannel::new(&id * eta.sqrt(), &id * (1.0 - eta))
}

/// Phase-insensitive amplifier with gain `G ≥ 1`: `X = √G I`, `Y = (G − 1) I`.
pub fn amp_channel(gain: f64) -> Result<GaussianChannel> {
    if !(gain >= 1.0) || !gain.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gain must be finite and at least 1, got {gain}"
        )));
    }
    let id = DMatrix::identity(2, 2);
    GaussianChannel::new(&id * gain.sqrt(), &id * (gain - 1.0))
}

/// Applies `ch` to `modes` of `gamma`, identity elsewhere.
pub fn apply_channel(
    gamma: &CovarianceMatrix,
    ch: &GaussianChannel,
    modes: &[usize],
) -> Result<CovarianceMatrix> {
    if modes.len() != ch.n_modes() {
        return Err(Error::DimensionMismatch(format!(
            "channel acts on {} modes, {} given",
            ch.n_modes(),
            modes.len()
        )));
    }
    let mut seen = vec![false; gamma.n_modes()];
    for &m in modes {
        if m >= gamma.n_modes() || seen[m] {
            return Err(Error::InvalidIndices(format!(
                "channel modes {modes:?} invalid for {} modes",
                gamma.n_modes()
            )));
        }
        seen[m] = true;
    }
    let cp = ch.cp_check(None);
    if !cp.is_psd {
        return Err(Error::NotCompletelyPositive { margin: cp.margin });
    }
    require_physical(gamma, None)?;

    let dim = 2 * gamma.n_modes();
    let q = quadratures(modes);
    let mut x = DMatrix::identity(dim, dim);
    let mut y = DMatrix::zeros(dim, dim);
    for (i, &qi) in q.iter().enumerate() {
        for (j, &qj) in q.iter().enumerate() {
            x[(qi, qj)] = ch.x[(i, j)];
            y[(qi, qj)] = ch.y.matrix()[(i, j)];
        }
    }
    CovarianceMatrix::new(&x * gamma.matrix() * x.transpose() + y)
}

/// Closed-form gain `2 cosh 2r / (cosh 2r + 1)` below which `A → B`
/// steering survives amplification of mode `B`.
pub fn amp_threshold(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "squeezing must be positive, got {r}"
        )));
    }
    let c = (2.0 * r).cosh();
    Ok(2.0 * c / (c + 1.0))
}

/// Steering direction for two-mode experiments: mode 0 is `A`, mode 1 is `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    AtoB,
    BtoA,
}

impl Direction {
    fn parties(self) -> (&'static str, &'static str) {
        match self {
            Direction::AtoB => ("A", "B"),
            Direction::BtoA => ("B", "A"),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::AtoB => "AtoB",
            Direction::BtoA => "BtoA",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "AtoB" | "A->B" | "ab" => Ok(Direction::AtoB),
            "BtoA" | "B->A" | "ba" => Ok(Direction::BtoA),
            _ => Err(Error::InvalidParameter(format!(
                "direction must be AtoB or BtoA, got {s:?}"
            ))),
        }
    }
}

/// Channel family applied to mode `B` of a two-mode squeezed vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChannelKind {
    Loss,
    Amplifier,
}

impl ChannelKind {
    pub fn channel(self, param: f64) -> Result<GaussianChannel> {
        match self {
            ChannelKind::Loss => loss_channel(param),
            ChannelKind::Amplifier => amp_channel(param),
        }
    }

    /// CSV column name for the channel parameter.
    pub fn param_name(self) -> &'static str {
        match self {
            ChannelKind::Loss => "eta",
            ChannelKind::Amplifier => "gain",
        }
    }
}

/// `tmsv(r)` with `kind(param)` applied to mode `B`.
pub fn one_way_state(r: f64, kind: ChannelKind, param: f64) -> Result<CovarianceMatrix> {
    apply_channel(&tmsv(r)?, &kind.channel(param)?, &[1])
}

pub fn one_way_verdict(
    r: f64,
    kind: ChannelKind,
    param: f64,
    dir: Direction,
) -> Result<SteeringVerdict> {
    let g = one_way_state(r, kind, param)?;
    let p = ModePartition::bipartite(2, &[0], &[1])?;
    let (from, to) = dir.parties();
    steerable_gaussian(&g, &p, from, to, None)
}

/// Inclusive grid `start, start + step, …, stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid {start}:{stop}:{step} needs start <= stop and step > 0"
            )));
        }
        Ok(Grid { start, stop, step })
    }

    /// Grid points; the last point is `stop` exactly.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        let mut pts: Vec<f64> = (0..=n).map(|i| self.start + i as f64 * self.step).collect();
        let last = pts.last_mut().expect("at least one point");
        if (self.stop - *last).abs() <= 1e-9 * self.step {
            *last = self.stop;
        } else {
            pts.push(self.stop);
        }
        pts
    }
}

impl FromStr for Grid {
    type Err = Error;

    /// Parses `start:stop:step`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidParameter(format!("grid {s:?} is not start:stop:step"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        Grid::new(nums[0], nums[1], nums[2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub param: f64,
    pub direction: Direction,
    pub margin: f64,
    pub steerable: bool,
}

/// LMI verdicts over a parameter grid. Rows follow grid order.
pub fn sweep(r: f64, kind: ChannelKind, grid: &Grid, dir: Direction) -> Result<Vec<SweepRow>> {
    grid.points()
        .into_iter()
        .map(|param| {
            let v = one_way_verdict(r, kind, param, dir)?;
            Ok(SweepRow {
                r,
                param,
                direction: dir,
                margin: v.margin,
                steerable: v.steerable,
            })
        })
        .collect()
}

/// Writes sweep rows as CSV with header `r,<eta|gain>,direction,margin,steerable`.
pub fn write_sweep_csv<W: std::io::Write>(
    out: W,
    kind: ChannelKind,
    rows: &[SweepRow],
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["r", kind.param_name(), "direction", "margin", "steerable"])?;
    for row in rows {
        w.write_record([
            row.r.to_string(),
            row.param.to_string(),
            row.direction.to_string(),
            row.margin.to_string(),
            row.steerable.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Bisects for the parameter at which `steerable(param)` flips on
/// `[lo, hi]`, to within `precision`.
///
/// The predicate must differ at the two ends. A coarse scan first counts
/// flips; more than one is logged as non-monotone.
pub fn bisect_threshold<F>(mut steerable: F, lo: f64, hi: f64, precision: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    let at_lo = steerable(lo)?;
    let at_hi = steerable(hi)?;
    if at_lo == at_hi {
        return Err(Error::InvalidParameter(format!(
            "verdict is {at_lo} at both {lo} and {hi}; no threshold bracketed"
        )));
    }
    let mut flips = 0;
    let mut prev = at_lo;
    for i in 1..=32 {
        let v = steerable(lo + (hi - lo) * i as f64 / 32.0)?;
        if v != prev {
            flips += 1;
        }
        prev = v;
    }
    if flips > 1 {
        log::warn!("verdict flips {flips} times on [{lo}, {hi}]; bisection assumes monotonicity");
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > precision {
        let mid = 0.5 * (a + b);
        if steerable(mid)? == at_lo {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Numerical threshold in `η` for steering in `dir` after loss on `B`.
pub fn loss_threshold(r: f64, dir: Direction, precision: f64) -> Result<f64> {
    bisect_threshold(
        |eta| Ok(one_way_verdict(r, ChannelKind::Loss, eta, dir)?.steerable),
        0.0,
        1.0,
        precision,
    )
}

/// Numerical threshold in `G ∈ [1, g_max]` for steering in `dir` after
/// amplification of `B`.
pub fn amp_threshold_numeric(r: f64, dir: Direction, g_max: f64, precision: f64) -> Result<f64> {
    bisect_threshold(
        |g| Ok(one_way_verdict(r, ChannelKind::Amplifier, g, dir)?.steerable),
        1.0,
        g_max,
        precision,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::validate_cm;
    use crate::sampling::{random_mixed_cm, Purity, SamplerConfig};

    #[test]
    fn unit_parameters_are_identity() {
        let g = tmsv(0.8).unwrap();
        for ch in [loss_channel(1.0).unwrap(), amp_channel(1.0).unwrap()] {
            let out = apply_channel(&g, &ch, &[1]).unwrap();
            assert!((out.matrix() - g.matrix()).amax() < 1e-15);
        }
        let out = apply_channel(&g, &GaussianChannel::identity(1), &[0]).unwrap();
        assert_eq!(out, g);
    }

    #[test]
    fn full_loss_resets_to_vacuum() {
        let g = tmsv(1.3).unwrap();
        let out = apply_channel(&g, &loss_channel(0.0).unwrap(), &[1]).unwrap();
        let b = out.matrix().view((2, 2), (2, 2)).into_owned();
        assert_eq!(b, DMatrix::identity(2, 2));
        assert_eq!(out.matrix().view((0, 2), (2, 2)).amax(), 0.0);
    }

    #[test]
    fn loss_on_tmsv_matches_closed_form() {
        for (r, eta) in [(1.0, 0.5), (0.4, 0.13), (2.0, 0.91)] {
            let out = apply_channel(&tmsv(r).unwrap(), &loss_channel(eta).unwrap(), &[1]).unwrap();
            let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
            let se = eta.sqrt() * s;
            let d = eta * c + 1.0 - eta;
            #[rustfmt::skip]
            let expect = DMatrix::from_row_slice(4, 4, &[
                c,   0.0, se,  0.0,
                0.0, c,   0.0, -se,
                se,  0.0, d,   0.0,
                0.0, -se, 0.0, d,
            ]);
            assert!((out.matrix() - expect).amax() < 1e-12);
        }
    }

    #[test]
    fn amplifier_on_tmsv_matches_closed_form() {
        let (r, g) = (0.7, 1.6);
        let out = apply_channel(&tmsv(r).unwrap(), &amp_channel(g).unwrap(), &[1]).unwrap();
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let m = out.matrix();
        assert!((m[(0, 2)] - g.sqrt() * s).abs() < 1e-12);
        assert!((m[(1, 3)] + g.sqrt() * s).abs() < 1e-12);
        assert!((m[(2, 2)] - (g * c + g - 1.0)).abs() < 1e-12);
        assert!((m[(0, 0)] - c).abs() < 1e-15);
    }

    #[test]
    fn loss_semigroup() {
        let g = tmsv(0.9).unwrap();
        let a = apply_channel(&g, &loss_channel(0.6).unwrap(), &[1]).unwrap();
        let ab = apply_channel(&a, &loss_channel(0.3).unwrap(), &[1]).unwrap();
        let direct = apply_channel(&g, &loss_channel(0.18).unwrap(), &[1]).unwrap();
        assert!((ab.matrix() - direct.matrix()).amax() < 1e-12);
        let composed = loss_channel(0.6)
            .unwrap()
            .then(&loss_channel(0.3).unwrap())
            .unwrap();
        let via = apply_channel(&g, &composed, &[1]).unwrap();
        assert!((via.matrix() - direct.matrix()).amax() < 1e-12);
    }

    #[test]
    fn cp_check_on_families() {
        for g in [1.0, 1.01, 1.5, 2.0, 5.0, 100.0] {
            let v = amp_channel(g).unwrap().cp_check(None);
            assert!(v.is_psd, "G = {g}: {}", v.margin);
        }
        for k in 0..=10 {
            assert!(loss_channel(k as f64 / 10.0).unwrap().cp_check(None).is_psd);
        }
        // noiseless amplification is not CP
        let id = DMatrix::identity(2, 2);
        let bad = GaussianChannel::new(&id * 2.0, DMatrix::zeros(2, 2)).unwrap();
        assert!(!bad.cp_check(None).is_psd);
        assert!(matches!(
            apply_channel(&tmsv(0.2).unwrap(), &bad, &[0]),
            Err(Error::NotCompletelyPositive { .. })
        ));
    }

    #[test]
    fn parameter_errors() {
        assert!(loss_channel(-0.01).is_err());
        assert!(loss_channel(1.01).is_err());
        assert!(amp_channel(0.99).is_err());
        assert!(amp_threshold(0.0).is_err());
        let g = tmsv(0.2).unwrap();
        assert!(apply_channel(&g, &loss_channel(0.5).unwrap(), &[0, 1]).is_err());
        assert!(apply_channel(&g, &loss_channel(0.5).unwrap(), &[2]).is_err());
    }

    #[test]
    fn amp_threshold_values() {
        // scalar oracle: cosh 2 = (e² + e⁻²)/2
        let e2 = std::f64::consts::E.powi(2);
        let c = 0.5 * (e2 + 1.0 / e2);
        let t = amp_threshold(1.0).unwrap();
        assert!((t - 2.0 * c / (c + 1.0)).abs() < 1e-14);
        assert!((t - 1.5801).abs() < 1e-4);
        for r in [0.01, 0.5, 1.0, 3.0, 10.0] {
            assert!(amp_threshold(r).unwrap() < 2.0);
        }
        assert!((2.0 - amp_threshold(15.0).unwrap()) < 1e-12);
    }

    #[test]
    fn channel_outputs_stay_physical() {
        for seed in 0..100 {
            let g = random_mixed_cm(&SamplerConfig::new(seed, 3).with_purity(Purity::Mixed(1)));
            let eta = (seed as f64 * 0.37) % 1.0;
            let out =
                apply_channel(&g, &loss_channel(eta).unwrap(), &[(seed % 3) as usize]).unwrap();
            assert!(validate_cm(&out, None).is_psd);
            let out = apply_channel(&g, &amp_channel(1.0 + eta * 3.0).unwrap(), &[1]).unwrap();
            assert!(validate_cm(&out, None).is_psd);
        }
    }

    #[test]
    fn grids() {
        let g: Grid = "0:1:0.25".parse().unwrap();
        assert_eq!(g.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g: Grid = "0:1:0.01".parse().unwrap();
        let p = g.points();
        assert_eq!(p.len(), 101);
        assert_eq!(*p.last().unwrap(), 1.0);
        let g: Grid = "0:1:0.3".parse().unwrap();
        assert_eq!(g.points().len(), 5);
        assert!("1:0:0.1".parse::<Grid>().is_err());
        assert!("0:1".parse::<Grid>().is_err());
        assert!("0:1:0".parse::<Grid>().is_err());
    }

    #[test]
    fn sweep_csv_layout() {
        let g: Grid = "0.4:0.6:0.1".parse().unwrap();
        let rows = sweep(1.0, ChannelKind::Loss, &g, Direction::BtoA).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, ChannelKind::Loss, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "r,eta,direction,margin,steerable");
        assert!(lines[1].starts_with("1,0.4,BtoA,"));
        assert!(lines[1].ends_with(",false"));
        assert!(lines[3].ends_with(",true"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn zero_transmission_is_not_steerable() {
        let v = one_way_verdict(1.0, ChannelKind::Loss, 0.0, Direction::AtoB).unwrap();
        assert!(!v.steerable);
    }
}
