//! Named reproduction items with measured values and pass/fail verdicts.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::campaigns::{
    higher_order_chain, monogamy_pure, monogamy_symmetric, peres, remark_boundary, remark_ppt,
    CampaignConfig, CampaignReport, Witness,
};
use crate::channels::{
    amp_threshold, amp_threshold_numeric, loss_threshold, one_way_verdict, ChannelKind, Direction,
    Grid,
};
use crate::error::{Error, Result};
use crate::gaussian::{counterexample_state, StandardForm2};
use crate::higher_order::reid_higher_order;
use crate::io::StateFile;
use crate::partition::ModePartition;
use crate::steering::{det_condition, steerable_gaussian, steering_lmi};
use crate::symmat::herm_pair_det;

pub const THRESHOLD_RS: [f64; 3] = [0.3, 1.0, 2.0];
pub const THRESHOLD_TOL: f64 = 1e-6;
pub const REMARK_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReproItem {
    Counterexample,
    Loss,
    Amplifier,
    Peres,
    MonogamyPure,
    MonogamySymmetric,
    Remark,
    HigherOrder,
}

impl ReproItem {
    pub const ALL: [ReproItem; 8] = [
        ReproItem::Counterexample,
        ReproItem::Loss,
        ReproItem::Amplifier,
        ReproItem::Peres,
        ReproItem::MonogamyPure,
        ReproItem::MonogamySymmetric,
        ReproItem::Remark,
        ReproItem::HigherOrder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReproItem::Counterexample => "counterexample",
            ReproItem::Loss => "loss",
            ReproItem::Amplifier => "amplifier",
            ReproItem::Peres => "peres",
            ReproItem::MonogamyPure => "monogamy-pure",
            ReproItem::MonogamySymmetric => "monogamy-symmetric",
            ReproItem::Remark => "remark",
            ReproItem::HigherOrder => "higher-order",
        }
    }

    /// Default sample count for randomized items.
    pub fn default_samples(self) -> usize {
        match self {
            ReproItem::Peres | ReproItem::HigherOrder => 10_000,
            ReproItem::MonogamyPure | ReproItem::MonogamySymmetric => 1_000,
            _ => 0,
        }
    }
}

impl fmt::Display for ReproItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReproItem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReproItem::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ReproItem::ALL.iter().map(|i| i.name()).collect();
                Error::InvalidParameter(format!(
                    "unknown item {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReproOptions {
    pub seed: u64,
    /// Overrides the per-item sample count.
    pub samples: Option<usize>,
    /// Remark item: report PPT verdicts at this `cosh r` instead of bisecting.
    pub cosh_r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemResult {
    pub item: ReproItem,
    pub passed: bool,
    pub measured: BTreeMap<String, f64>,
    pub detail: String,
    /// States implicated in a failure.
    pub offending: Vec<Witness>,
}

impl ItemResult {
    fn new(item: ReproItem) -> Self {
        ItemResult {
            item,
            passed: true,
            measured: BTreeMap::new(),
            detail: String::new(),
            offending: Vec::new(),
        }
    }

    fn measure(&mut self, key: impl Into<String>, v: f64) {
        self.measured.insert(key.into(), v);
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.passed = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(&what());
        }
    }
}

fn counterexample() -> Result<ItemResult> {
    let mut res = ItemResult::new(ReproItem::Counterexample);
    let g = counterexample_state();
    let p = ModePartition::bipartite(3, &[0], &[1, 2])?;
    let det_global = g.det();
    let lmi_det = herm_pair_det(&steering_lmi(&g, &p, "A", "B")?).value;
    let det = det_condition(&g, &p, "A", "B", None)?;
    let lmi = steerable_gaussian(&g, &p, "A", "B", None)?;
    res.measure("det_global", det_global);
    res.measure("det_local_a", det.det_local_from);
    res.measure("lmi_det", lmi_det);
    res.measure("lmi_margin", lmi.margin);
    res.measure("det_condition_satisfied", det.satisfied as u8 as f64);
    res.measure("lmi_steerable", lmi.steerable as u8 as f64);
    res.require((det_global - 9.187).abs() <= 0.01, || {
        format!("det γ = {det_global}")
    });
    res.require((lmi_det + 1.958).abs() <= 0.01, || {
        format!("LMI determinant = {lmi_det}")
    });
    res.require(det.satisfied, || "determinant condition violated".into());
    res.require(lmi.steerable, || "LMI not violated".into());
    if !res.passed {
        res.offending.push(state_witness(0, "counterexample", &g));
    }
    Ok(res)
}

fn state_witness(seed: u64, kind: &str, g: &crate::CovarianceMatrix) -> Witness {
    Witness {
        seed,
        kind: kind.into(),
        detail: String::new(),
        state: Some(StateFile::from_cm(g)),
    }
}

fn loss() -> Result<ItemResult> {
    let mut res = ItemResult::new(ReproItem::Loss);
    for r in THRESHOLD_RS {
        let t = loss_threshold(r, Direction::BtoA, 1e-9)?;
        res.measure(format!("threshold_r{r}"), t);
        res.require((t - 0.5).abs() <= THRESHOLD_TOL, || {
            format!("r = {r}: B→A threshold {t}")
        });
        let at_zero = one_way_verdict(r, ChannelKind::Loss, 0.0, Direction::AtoB)?;
        res.require(!at_zero.steerable, || {
            format!("r = {r}: A→B steerable at η = 0")
        });
        let mut misses = 0;
        for eta in Grid::new(0.01, 1.0, 0.01)?.points() {
            if !one_way_verdict(r, ChannelKind::Loss, eta, Direction::AtoB)?.steerable {
                misses += 1;
            }
        }
        res.require(misses == 0, || {
            format!("r = {r}: A→B fails at {misses} grid points")
        });
    }
    Ok(res)
}

fn amplifier() -> Result<ItemResult> {
    let mut res = ItemResult::new(ReproItem::Amplifier);
    for r in THRESHOLD_RS {
        let closed = amp_threshold(r)?;
        let t = amp_threshold_numeric(r, Direction::AtoB, 5.0, 1e-9)?;
        res.measure(format!("closed_r{r}"), closed);
        res.measure(format!("threshold_r{r}"), t);
        res.require((t - closed).abs() <= THRESHOLD_TOL, || {
            format!("r = {r}: A→B threshold {t} vs {closed}")
        });
        let mut misses = 0;
        for gain in Grid::new(1.0, 5.0, 0.05)?.points() {
            if !one_way_verdict(r, ChannelKind::Amplifier, gain, Direction::BtoA)?.steerable {
                misses += 1;
            }
        }
        res.require(misses == 0, || {
            format!("r = {r}: B→A fails at {misses} gains")
        });
    }
    Ok(res)
}

fn from_campaign(item: ReproItem, rep: CampaignReport) -> ItemResult {
    let mut res = ItemResult::new(item);
    res.measure("samples", rep.samples as f64);
    res.measure("checked", rep.checked as f64);
    res.measure("violations", rep.violations as f64);
    for (k, v) in &rep.counts {
        res.measure(k.clone(), *v as f64);
    }
    res.require(rep.passed(), || format!("{} violations", rep.violations));
    res.offending = rep.violation_witnesses().cloned().collect();
    res
}

fn remark(cosh_r: Option<f64>) -> Result<ItemResult> {
    let mut res = ItemResult::new(ReproItem::Remark);
    if let Some(x) = cosh_r {
        let (ab, bc) = remark_ppt(x)?;
        res.measure("cosh_r", x);
        res.measure("ppt_ab", ab as u8 as f64);
        res.measure("ppt_bc", bc as u8 as f64);
        if (x - 3.0).abs() > REMARK_TOL {
            let expect = x > 3.0;
            res.require(ab == expect && bc == expect, || {
                format!("cosh r = {x}: PPT verdicts ({ab}, {bc}), expected {expect}")
            });
        }
        return Ok(res);
    }
    let b = remark_boundary(2.0, 4.0, 1e-6)?;
    res.measure("boundary_ab", b.pair_ab);
    res.measure("boundary_bc", b.pair_bc);
    for (name, v) in [("{A,B}", b.pair_ab), ("{B,C}", b.pair_bc)] {
        res.require((v - 3.0).abs() <= REMARK_TOL, || {
            format!("{name} boundary at {v}")
        });
    }
    res.require(remark_ppt(2.0)? == (false, false), || {
        "not NPT at cosh r = 2".into()
    });
    res.require(remark_ppt(4.0)? == (true, true), || {
        "not PPT at cosh r = 4".into()
    });
    Ok(res)
}

fn higher_order(cfg: CampaignConfig) -> Result<ItemResult> {
    let mut res = from_campaign(ReproItem::HigherOrder, higher_order_chain(cfg));
    let vac = StandardForm2::new(1.0, 1.0, 0.0, 0.0)?;
    let mut worst: f64 = 0.0;
    for n in 1..=20 {
        let rep = reid_higher_order(&vac, n)?;
        worst = worst.max((rep.lhs - rep.rhs).abs() / rep.rhs);
        res.require(rep.satisfied, || format!("vacuum fails at order {n}"));
    }
    res.measure("vacuum_max_rel_gap", worst);
    res.require(worst <= 1e-9, || format!("vacuum equality off by {worst}"));
    Ok(res)
}

/// Runs one item. Library errors surface as a failed item.
pub fn run_item(item: ReproItem, opts: &ReproOptions) -> ItemResult {
    let cfg = CampaignConfig::new(opts.seed, opts.samples.unwrap_or(item.default_samples()));
    let out = match item {
        ReproItem::Counterexample => counterexample(),
        ReproItem::Loss => loss(),
        ReproItem::Amplifier => amplifier(),
        ReproItem::Peres => {
            let rep = peres(cfg);
            let found = rep
                .witnesses
                .iter()
                .find(|w| w.kind == "npt_unsteerable")
                .cloned();
            let mut res = from_campaign(item, rep);
            res.require(found.is_some(), || {
                "no NPT-but-unsteerable state found".into()
            });
            if let Some(w) = found {
                log::info!(
                    "NPT-but-unsteerable witness at seed {}: {}",
                    w.seed,
                    w.detail
                );
                res.measure("witness_seed", w.seed as f64);
            }
            Ok(res)
        }
        ReproItem::MonogamyPure => Ok(from_campaign(item, monogamy_pure(cfg))),
        ReproItem::MonogamySymmetric => Ok(from_campaign(item, monogamy_symmetric(cfg))),
        ReproItem::Remark => remark(opts.cosh_r),
        ReproItem::HigherOrder => higher_order(cfg),
    };
    out.unwrap_or_else(|e| {
        let mut res = ItemResult::new(item);
        res.require(false, || format!("error: {e}"));
        res
    })
}

/// Runs `items` in the canonical order.
pub fn repro_suite(items: &[ReproItem], opts: &ReproOptions) -> Vec<ItemResult> {
    let mut items = items.to_vec();
    items.sort();
    items.dedup();
    items.into_iter().map(|i| run_item(i, opts)).collect()
}
