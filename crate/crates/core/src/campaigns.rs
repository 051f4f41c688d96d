//! Randomized property campaigns over seeded states.
//!
//! Sample `i` of a campaign with base seed `s` uses seed `s + i`; samples
//! run in parallel and are folded in index order, so reports are identical
//! across runs and thread counts.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{amp_channel, apply_channel, loss_channel, one_way_state, ChannelKind};
use crate::error::{Error, Result};
use crate::gaussian::{
    remark_state_from_cosh, symplectic_eigenvalues, validate_cm, CovarianceMatrix, StandardForm2,
};
use crate::higher_order::{
    amgm_check, moments_from_standard_form, order_two_closed_form, quadrature_couplings,
    reid_higher_order,
};
use crate::io::StateFile;
use crate::partition::ModePartition;
use crate::sampling::{
    random_cm, random_pure_cm, random_symmetric_tripartite, Purity, SamplerConfig,
};
use crate::steering::{
    classify_direction, conditional_cm, det_condition, monogamy_audit, ppt_test,
    steerable_gaussian, DirectionClass, EQUIVALENCE_BAND,
};
use crate::symmat::{schur_complement, SymMatrix};

/// Violation witnesses kept per report.
pub const MAX_WITNESSES: usize = 5;

const SCALES: [f64; 3] = [0.35, 0.7, 1.2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CampaignConfig {
    pub seed: u64,
    pub samples: usize,
}

impl CampaignConfig {
    pub fn new(seed: u64, samples: usize) -> Self {
        CampaignConfig { seed, samples }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub seed: u64,
    pub kind: String,
    pub detail: String,
    pub state: Option<StateFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub name: String,
    pub base_seed: u64,
    pub samples: usize,
    /// Samples on which the property was actually compared.
    pub checked: usize,
    /// Samples excluded by a tolerance band.
    pub skipped: usize,
    pub violations: usize,
    pub counts: BTreeMap<String, usize>,
    /// Violations (at most [`MAX_WITNESSES`]) and the first sample of each
    /// notable kind.
    pub witnesses: Vec<Witness>,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn count(&self, key: &str) -> usize {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Witnesses that record a violation.
    pub fn violation_witnesses(&self) -> impl Iterator<Item = &Witness> {
        self.witnesses.iter().filter(|w| w.kind == "violation")
    }

    /// CSV summary: one `key,value` row per count plus the totals.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["campaign", "key", "value"])?;
        let totals = [
            ("base_seed", self.base_seed as usize),
            ("samples", self.samples),
            ("checked", self.checked),
            ("skipped", self.skipped),
            ("violations", self.violations),
        ];
        for (k, v) in totals {
            w.write_record([self.name.as_str(), k, &v.to_string()])?;
        }
        for (k, v) in &self.counts {
            w.write_record([self.name.as_str(), k.as_str(), &v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Default)]
struct Outcome {
    checked: bool,
    skipped: bool,
    violation: Option<(String, Option<CovarianceMatrix>)>,
    tags: Vec<&'static str>,
    notable: Option<(&'static str, String, CovarianceMatrix)>,
}

impl Outcome {
    fn tag(mut self, t: &'static str) -> Self {
        self.tags.push(t);
        self
    }

    fn fail(mut self, detail: String, g: Option<&CovarianceMatrix>) -> Self {
        self.violation = Some((detail, g.cloned()));
        self
    }
}

fn run<F>(name: &str, cfg: CampaignConfig, sample: F) -> CampaignReport
where
    F: Fn(u64, usize) -> Outcome + Sync,
{
    let outcomes: Vec<Outcome> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| sample(cfg.seed.wrapping_add(i as u64), i))
        .collect();
    let mut report = CampaignReport {
        name: name.to_string(),
        base_seed: cfg.seed,
        samples: cfg.samples,
        checked: 0,
        skipped: 0,
        violations: 0,
        counts: BTreeMap::new(),
        witnesses: Vec::new(),
    };
    let mut kept_violations = 0;
    for (i, o) in outcomes.into_iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        report.checked += o.checked as usize;
        report.skipped += o.skipped as usize;
        for t in o.tags {
            *report.counts.entry(t.to_string()).or_default() += 1;
        }
        if let Some((detail, g)) = o.violation {
            report.violations += 1;
            if kept_violations < MAX_WITNESSES {
                kept_violations += 1;
                report.witnesses.push(Witness {
                    seed,
                    kind: "violation".into(),
                    detail,
                    state: g.as_ref().map(StateFile::from_cm),
                });
            }
        }
        if let Some((kind, detail, g)) = o.notable {
            if !report.witnesses.iter().any(|w| w.kind == kind) {
                report.witnesses.push(Witness {
                    seed,
                    kind: kind.into(),
                    detail,
                    state: Some(StateFile::from_cm(&g)),
                });
            }
        }
    }
    for w in report.violation_witnesses() {
        log::error!("{name}: violation at seed {}: {}", w.seed, w.detail);
    }
    report
}

fn range(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn span(a: usize, b: usize) -> Vec<usize> {
    (a..b).collect()
}

fn sampler(seed: u64, n_modes: usize, i: usize, ancillas: usize) -> SamplerConfig {
    let purity = if ancillas == 0 {
        Purity::Pure
    } else {
        Purity::Mixed(ancillas)
    };
    SamplerConfig::new(seed, n_modes)
        .with_scale(SCALES[i % SCALES.len()])
        .with_purity(purity)
}

fn unexpected(e: Error, g: Option<&CovarianceMatrix>) -> Outcome {
    Outcome::default().fail(format!("unexpected error: {e}"), g)
}

/// Single-mode steered party: determinant verdict equals LMI verdict
/// outside `|margin| < EQUIVALENCE_BAND`. Steering parties of 1–3 modes,
/// 0–2 purifying ancillas.
pub fn single_mode_equivalence(cfg: CampaignConfig) -> CampaignReport {
    run("single-mode-equivalence", cfg, |seed, i| {
        let n = 1 + i % 3;
        let anc = (i / 3) % 3;
        let g = random_cm(&sampler(seed, n + 1, i / 9, anc));
        let p = ModePartition::bipartite(n + 1, &range(n), &[n]).expect("valid partition");
        let (lmi, det) = match (
            steerable_gaussian(&g, &p, "A", "B", None),
            det_condition(&g, &p, "A", "B", None),
        ) {
            (Ok(l), Ok(d)) => (l, d),
            (Err(e), _) | (_, Err(e)) => return unexpected(e, Some(&g)),
        };
        let base = Outcome::default().tag(if lmi.steerable {
            "steerable"
        } else {
            "not_steerable"
        });
        if lmi.margin.abs() < EQUIVALENCE_BAND {
            return Outcome {
                skipped: true,
                ..base
            };
        }
        let out = Outcome {
            checked: true,
            ..base
        };
        if det.satisfied == lmi.steerable {
            return out.fail(
                format!(
                    "det condition {} but LMI margin {:e} ({} steering modes)",
                    det.satisfied, lmi.margin, n
                ),
                Some(&g),
            );
        }
        out
    })
}

/// Arbitrary `M × N` partitions: a violated determinant condition implies
/// LMI steerability, and the LMI verdict matches the Schur-complement form
/// `γ_B − Cᵀγ_A⁻¹C + iΩ_B ⪰ 0`.
pub fn det_implies_lmi(cfg: CampaignConfig) -> CampaignReport {
    run("det-implies-lmi", cfg, |seed, i| {
        let (m, n) = (1 + i % 2, 1 + (i / 2) % 2);
        let anc = (i / 4) % 3;
        let g = random_cm(&sampler(seed, m + n, i / 12, anc));
        let p = ModePartition::bipartite(m + n, &range(m), &span(m, m + n)).expect("valid");
        let (lmi, det, cond) = match (
            steerable_gaussian(&g, &p, "A", "B", None),
            det_condition(&g, &p, "A", "B", None),
            conditional_cm(&g, &p, "A", "B"),
        ) {
            (Ok(l), Ok(d), Ok(c)) => (l, d, c),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return unexpected(e, Some(&g)),
        };
        let mut out = Outcome::default();
        if !det.satisfied {
            out = out.tag("det_violated");
        }
        if lmi.steerable {
            out = out.tag("steerable");
        }
        if lmi.margin.abs() < EQUIVALENCE_BAND {
            return Outcome {
                skipped: true,
                ..out
            };
        }
        out.checked = true;
        let det_margin = det.det_global - det.det_local_from;
        if !det.satisfied && det_margin.abs() > det.tolerance && !lmi.steerable {
            return out.fail(
                format!(
                    "det condition violated by {det_margin:e} but LMI margin {:e}",
                    lmi.margin
                ),
                Some(&g),
            );
        }
        let schur = validate_cm(&cond, None);
        if schur.margin.abs() >= EQUIVALENCE_BAND && schur.is_psd == lmi.steerable {
            return out.fail(
                format!(
                    "Schur-complement margin {:e} disagrees with LMI margin {:e}",
                    schur.margin, lmi.margin
                ),
                Some(&g),
            );
        }
        if !det.satisfied == lmi.steerable {
            out
        } else {
            out.tag("det_inconclusive")
        }
    })
}

/// Steerable in either direction implies NPT, on 2–4 mode bipartitions.
/// The first PPT-violating state that is unsteerable both ways is kept.
pub fn peres(cfg: CampaignConfig) -> CampaignReport {
    run("peres", cfg, |seed, i| {
        let total = 2 + i % 3;
        let k = 1 + (i / 3) % (total - 1);
        let anc = (i / 9) % 3;
        let g = random_cm(&sampler(seed, total, i / 27, anc));
        let p = ModePartition::bipartite(total, &range(k), &span(k, total)).expect("valid");
        let (ab, ba, ppt) = match (
            steerable_gaussian(&g, &p, "A", "B", None),
            steerable_gaussian(&g, &p, "B", "A", None),
            ppt_test(&g, &p, None),
        ) {
            (Ok(x), Ok(y), Ok(z)) => (x, y, z),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return unexpected(e, Some(&g)),
        };
        let steerable = ab.steerable || ba.steerable;
        let out = Outcome {
            checked: true,
            ..Default::default()
        };
        let out = match (steerable, ppt.is_psd) {
            (true, true) => {
                return out.tag("steerable_ppt").fail(
                    format!(
                        "steerable (margins {:e}, {:e}) yet PPT (margin {:e})",
                        ab.margin, ba.margin, ppt.margin
                    ),
                    Some(&g),
                )
            }
            (true, false) => out.tag("steerable_npt"),
            (false, true) => out.tag("unsteerable_ppt"),
            (false, false) => out.tag("npt_unsteerable"),
        };
        if !steerable && !ppt.is_psd && !ab.marginal && !ba.marginal && !ppt.is_marginal() {
            let detail = format!(
                "{k}x{} modes: LMI margins {:e} / {:e}, PPT margin {:e}",
                total - k,
                ab.margin,
                ba.margin,
                ppt.margin
            );
            return Outcome {
                notable: Some(("npt_unsteerable", detail, g)),
                ..out
            };
        }
        out
    })
}

fn audit_outcome(g: &CovarianceMatrix, p: &ModePartition, parties: (&str, &str, &str)) -> Outcome {
    let (first, second, steered) = parties;
    let out = Outcome {
        checked: true,
        ..Default::default()
    };
    match monogamy_audit(g, p, first, second, steered, None) {
        Ok(a) => match (a.first_steers, a.second_steers) {
            (true, _) => out.tag("first_steers"),
            (_, true) => out.tag("second_steers"),
            _ => out.tag("neither"),
        },
        Err(e @ Error::InvariantViolation(_)) => out.fail(e.to_string(), Some(g)),
        Err(e) => unexpected(e, Some(g)),
    }
}

/// Random pure `(M + 1 + N)`-mode states: `A` (M modes) and `E` (N modes)
/// never both steer the single mode `B`.
pub fn monogamy_pure(cfg: CampaignConfig) -> CampaignReport {
    run("monogamy-pure", cfg, |seed, i| {
        let (m, n) = (1 + i % 2, 1 + (i / 2) % 2);
        let total = m + 1 + n;
        let g = random_pure_cm(&sampler(seed, total, i / 4, 0));
        let p = ModePartition::new(
            total,
            [("A", range(m)), ("B", vec![m]), ("E", span(m + 1, total))],
        )
        .expect("valid partition");
        audit_outcome(&g, &p, ("A", "E", "B"))
    })
}

/// Exchange-symmetric `(M + M + N)`-mode states: `A` and `B` never both
/// steer `C`.
pub fn monogamy_symmetric(cfg: CampaignConfig) -> CampaignReport {
    run("monogamy-symmetric", cfg, |seed, i| {
        let (m, n) = (1 + i % 2, 1 + (i / 2) % 2);
        let anc = (i / 4) % 2;
        let total = 2 * m + n;
        let g = match random_symmetric_tripartite(&sampler(seed, total, i / 8, anc), (m, m, n)) {
            Ok(g) => g,
            Err(e) => return unexpected(e, None),
        };
        let p = ModePartition::new(
            total,
            [
                ("A", range(m)),
                ("B", span(m, 2 * m)),
                ("C", span(2 * m, total)),
            ],
        )
        .expect("valid partition");
        let out = audit_outcome(&g, &p, ("A", "B", "C"));
        // The reverse direction is unconstrained; counting it shows the
        // sampled states are correlated.
        match steerable_gaussian(&g, &p, "C", "A", None) {
            Ok(v) if v.steerable => out.tag("c_steers_a"),
            _ => out,
        }
    })
}

fn det_condition_sf(sf: &StandardForm2) -> f64 {
    (sf.b - sf.c1 * sf.c1 / sf.a) * (sf.b - sf.c2 * sf.c2 / sf.a) - 1.0
}

fn physical_sf(sf: &StandardForm2) -> bool {
    validate_cm(&sf.to_cm(), None).is_psd
}

/// Draws `(a, b, c₁, c₂)` with `a, b ∈ [1, 6)`, `c₁ ∈ [0, √(ab))`,
/// `c₂ ∈ (−c₁, c₁)` until the form is physical and satisfies the
/// determinant condition. With `boundary`, the correlations are then
/// scaled up to the first of the determinant or physicality edges.
fn sample_standard_form(seed: u64, boundary: bool) -> StandardForm2 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let a = 1.0 + 5.0 * rng.gen::<f64>();
        let b = 1.0 + 5.0 * rng.gen::<f64>();
        let c1 = (a * b).sqrt() * rng.gen::<f64>();
        let c2 = c1 * rng.gen_range(-1.0..1.0);
        let sf = StandardForm2 { a, b, c1, c2 };
        if !physical_sf(&sf) || det_condition_sf(&sf) < 0.0 {
            continue;
        }
        if !boundary {
            return sf;
        }
        let scaled = |s: f64| StandardForm2 {
            a,
            b,
            c1: s * c1,
            c2: s * c2,
        };
        let admissible = |s: f64| {
            let f = scaled(s);
            physical_sf(&f) && det_condition_sf(&f) >= 0.0
        };
        let (mut lo, mut hi) = (1.0, (a * b).sqrt() / c1.max(1e-12));
        if admissible(hi) {
            return sf;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if admissible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return scaled(lo);
    }
}

/// Highest order checked by [`higher_order_chain`].
pub const CHAIN_MAX_ORDER: u32 = 6;

/// Determinant condition ⇒ both AM-GM forms ⇒ order-`N` test for
/// `N = 1..6`, on parametrically sampled standard forms. Also checks that
/// the two AM-GM forms agree, that the X coupling dominates, and that the
/// order-2 closed form matches the general evaluation.
pub fn higher_order_chain(cfg: CampaignConfig) -> CampaignReport {
    run("higher-order-chain", cfg, |seed, i| {
        let sf = sample_standard_form(seed, i % 2 == 1);
        let g = sf.to_cm();
        let out = Outcome {
            checked: true,
            ..Default::default()
        };
        let (m, amgm) = match (moments_from_standard_form(&sf), amgm_check(&sf)) {
            (Ok(m), Ok(a)) => (m, a),
            (Err(e), _) | (_, Err(e)) => return unexpected(e, Some(&g)),
        };
        let mut out = if i % 2 == 1 {
            out.tag("near_boundary")
        } else {
            out
        };
        if !(amgm.ineq1 && amgm.ineq2) {
            return out.fail(format!("AM-GM forms fail: {amgm:?} for {sf:?}"), Some(&g));
        }
        if amgm.ineq1 != amgm.ineq2 && !amgm.marginal {
            return out.fail(format!("AM-GM forms disagree: {amgm:?}"), Some(&g));
        }
        for n in 1..=CHAIN_MAX_ORDER {
            let rep = match reid_higher_order(&sf, n) {
                Ok(r) => r,
                Err(e) => return unexpected(e, Some(&g)),
            };
            if !rep.satisfied {
                return out.fail(
                    format!(
                        "order {n} fails: lhs {} < rhs {} for {sf:?}",
                        rep.lhs, rep.rhs
                    ),
                    Some(&g),
                );
            }
            let (kx, kp) = quadrature_couplings(&m, n);
            if kx < kp * (1.0 - 1e-12) {
                return out.fail(
                    format!("order {n}: P coupling {kp} exceeds X coupling {kx}"),
                    Some(&g),
                );
            }
            if n == 2 {
                let (lhs, rhs) = order_two_closed_form(&sf);
                let scale = lhs.abs().max(rhs.abs()).max((sf.b * sf.b + 1.0).powi(2));
                if (4.0 * rep.lhs - lhs).abs() > 1e-9 * scale
                    || (4.0 * rep.rhs - rhs).abs() > 1e-9 * scale
                {
                    return out.fail(
                        format!(
                            "order-2 closed form ({lhs}, {rhs}) vs general ({}, {})",
                            4.0 * rep.lhs,
                            4.0 * rep.rhs
                        ),
                        Some(&g),
                    );
                }
            }
        }
        if amgm.marginal {
            out = out.tag("amgm_marginal");
        }
        out
    })
}

/// Pure states have unit determinant and unit symplectic spectrum within
/// `1e-8`; `det M = det P · det(M/P)` within `1e-8` relative on random SPD
/// matrices.
pub fn structural(cfg: CampaignConfig) -> CampaignReport {
    run("structural", cfg, |seed, i| {
        let n = 1 + i % 4;
        let g = random_pure_cm(&sampler(seed, n, i / 4, 0));
        let out = Outcome {
            checked: true,
            ..Default::default()
        };
        if (g.det() - 1.0).abs() > 1e-8 {
            return out.fail(format!("pure-state det {}", g.det()), Some(&g));
        }
        match symplectic_eigenvalues(&g) {
            Ok(nu) => {
                if let Some(v) = nu.iter().find(|v| (*v - 1.0).abs() > 1e-8) {
                    return out.fail(format!("pure-state symplectic eigenvalue {v}"), Some(&g));
                }
            }
            Err(e) => return unexpected(e, Some(&g)),
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 2 + i % 7;
        let a = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
        let spd = &a * a.transpose() + DMatrix::identity(dim, dim) * 0.1;
        let m = SymMatrix::new(spd).expect("AAᵀ is symmetric");
        let k = 1 + i % (dim - 1);
        let pivot: Vec<usize> = (0..dim).filter(|j| (j + i) % dim < k).collect();
        let s = match schur_complement(&m, &pivot) {
            Ok(s) => s,
            Err(e) => return unexpected(e, None),
        };
        let det_m = m.determinant();
        let det_p = m.principal(&pivot).determinant();
        let prod = det_p * s.value.determinant();
        if (det_m - prod).abs() > 1e-8 * det_m.abs() {
            return out.fail(format!("det M = {det_m}, det P · det(M/P) = {prod}"), None);
        }
        out
    })
}

/// Loss and amplification of one mode keep random two-mode states physical.
pub fn channel_physicality(cfg: CampaignConfig) -> CampaignReport {
    run("channel-physicality", cfg, |seed, i| {
        let g = random_cm(&sampler(seed, 2, i / 2, (i / 6) % 3));
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mode = i % 2;
        let (ch, tag) = if (i / 2) % 2 == 0 {
            (loss_channel(rng.gen_range(0.0..=1.0)), "loss")
        } else {
            (amp_channel(rng.gen_range(1.0..=5.0)), "amplifier")
        };
        let out = Outcome {
            checked: true,
            ..Default::default()
        }
        .tag(tag);
        match ch.and_then(|ch| apply_channel(&g, &ch, &[mode])) {
            Ok(_) => out,
            Err(e @ Error::Unphysical { .. }) => out.fail(e.to_string(), Some(&g)),
            Err(e) => unexpected(e, Some(&g)),
        }
    })
}

/// Direction classes of random two-mode mixed states. Every class is
/// counted; a class that never occurs is logged, not failed.
pub fn direction_coverage(cfg: CampaignConfig) -> CampaignReport {
    let rep = run("direction-coverage", cfg, |seed, i| {
        let g = random_cm(&sampler(seed, 2, i, 1 + (i / 3) % 2));
        let p = ModePartition::bipartite(2, &[0], &[1]).expect("valid");
        let out = Outcome {
            checked: true,
            ..Default::default()
        };
        match classify_direction(&g, &p, None) {
            Ok(c) => out.tag(class_tag(c.class)),
            Err(e @ Error::InvariantViolation(_)) => out.fail(e.to_string(), Some(&g)),
            Err(e) => unexpected(e, Some(&g)),
        }
    });
    for class in ["two_way", "only_a_to_b", "only_b_to_a", "no_way"] {
        match rep.count(class) {
            0 => log::warn!(
                "direction-coverage: class {class} not sampled in {} states",
                rep.samples
            ),
            k => log::info!("direction-coverage: {class} = {k}"),
        }
    }
    rep
}

fn class_tag(c: DirectionClass) -> &'static str {
    match c {
        DirectionClass::TwoWay => "two_way",
        DirectionClass::OnlyAtoB => "only_a_to_b",
        DirectionClass::OnlyBtoA => "only_b_to_a",
        DirectionClass::NoWay => "no_way",
    }
}

/// Classifies `tmsv(r)` after loss or amplification of `B` on each grid
/// point; the one-way purity ordering is asserted inside the classifier.
pub fn direction_census(rs: &[f64], kind: ChannelKind, params: &[f64]) -> CampaignReport {
    let points: Vec<(f64, f64)> = rs
        .iter()
        .flat_map(|&r| params.iter().map(move |&x| (r, x)))
        .collect();
    let cfg = CampaignConfig::new(0, points.len());
    let name = match kind {
        ChannelKind::Loss => "direction-census-loss",
        ChannelKind::Amplifier => "direction-census-amplifier",
    };
    run(name, cfg, |_, i| {
        let (r, x) = points[i];
        let g = match one_way_state(r, kind, x) {
            Ok(g) => g,
            Err(e) => return unexpected(e, None),
        };
        let p = ModePartition::bipartite(2, &[0], &[1]).expect("valid");
        let out = Outcome {
            checked: true,
            ..Default::default()
        };
        match classify_direction(&g, &p, None) {
            Ok(c) => out.tag(class_tag(c.class)),
            Err(e @ Error::InvariantViolation(_)) => out.fail(
                format!("r = {r}, {} = {x}: {e}", kind.param_name()),
                Some(&g),
            ),
            Err(e) => unexpected(e, Some(&g)),
        }
    })
}

/// Names accepted by [`run_campaign`].
pub const CAMPAIGN_NAMES: [&str; 9] = [
    "single-mode-equivalence",
    "det-implies-lmi",
    "peres",
    "monogamy-pure",
    "monogamy-symmetric",
    "higher-order-chain",
    "structural",
    "channel-physicality",
    "direction-coverage",
];

/// Dispatches a randomized campaign by name.
pub fn run_campaign(name: &str, cfg: CampaignConfig) -> Result<CampaignReport> {
    Ok(match name {
        "single-mode-equivalence" => single_mode_equivalence(cfg),
        "det-implies-lmi" => det_implies_lmi(cfg),
        "peres" => peres(cfg),
        "monogamy-pure" => monogamy_pure(cfg),
        "monogamy-symmetric" => monogamy_symmetric(cfg),
        "higher-order-chain" => higher_order_chain(cfg),
        "structural" => structural(cfg),
        "channel-physicality" => channel_physicality(cfg),
        "direction-coverage" => direction_coverage(cfg),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "unknown campaign {name:?}; expected one of {}",
                CAMPAIGN_NAMES.join(", ")
            )))
        }
    })
}

/// PPT boundaries in `cosh r` of the Remark state for pairs `{A,B}` and
/// `{B,C}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemarkBoundary {
    pub pair_ab: f64,
    pub pair_bc: f64,
}

/// PPT verdicts of the Remark state at `cosh r` for `{A,B}` and `{B,C}`.
pub fn remark_ppt(cosh_r: f64) -> Result<(bool, bool)> {
    let g = remark_state_from_cosh(cosh_r)?;
    let mut out = [false; 2];
    for (slot, (a, b)) in out.iter_mut().zip([(0usize, 1usize), (1, 2)]) {
        let keep = crate::gaussian::partial_trace(&g, &[a, b])?;
        let p = ModePartition::bipartite(2, &[0], &[1])?;
        *slot = ppt_test(&keep, &p, None)?.is_psd;
    }
    Ok((out[0], out[1]))
}

/// Bisects each pair's PPT boundary in `cosh r` on `[lo, hi]`.
pub fn remark_boundary(lo: f64, hi: f64, precision: f64) -> Result<RemarkBoundary> {
    let find = |pick: fn((bool, bool)) -> bool| -> Result<f64> {
        let (mut a, mut b) = (lo, hi);
        let at_lo = pick(remark_ppt(a)?);
        if at_lo == pick(remark_ppt(b)?) {
            return Err(Error::InvalidParameter(format!(
                "PPT verdict does not change on [{lo}, {hi}]"
            )));
        }
        while b - a > precision {
            let mid = 0.5 * (a + b);
            if pick(remark_ppt(mid)?) == at_lo {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    };
    Ok(RemarkBoundary {
        pair_ab: find(|v| v.0)?,
        pair_bc: find(|v| v.1)?,
    })
}
