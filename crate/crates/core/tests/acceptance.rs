//! Acceptance criteria 1-9. Runs sequentially, prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gsteer::campaigns::{
    higher_order_chain, monogamy_pure, monogamy_symmetric, peres, remark_boundary, remark_ppt,
    single_mode_equivalence, structural, CampaignConfig, CampaignReport,
};
use gsteer::channels::{
    amp_threshold_numeric, loss_threshold, one_way_verdict, ChannelKind, Direction, Grid,
};
use gsteer::gaussian::{counterexample_state, StandardForm2};
use gsteer::higher_order::reid_higher_order;
use gsteer::steering::{det_condition, steerable_gaussian, steering_lmi};
use gsteer::symmat::herm_pair_det;
use gsteer::ModePartition;
use nalgebra::{Complex, DMatrix};

const SEED: u64 = 20_240_601;

struct Outcome {
    ok: bool,
    summary: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            ok: true,
            summary: String::new(),
        }
    }

    fn note(&mut self, s: impl AsRef<str>) {
        if !self.summary.is_empty() {
            self.summary.push_str(", ");
        }
        self.summary.push_str(s.as_ref());
    }

    fn check(&mut self, ok: bool, s: impl AsRef<str>) {
        if !ok {
            self.ok = false;
            self.note(format!("FAILED {}", s.as_ref()));
        }
    }

    fn campaign(&mut self, rep: &CampaignReport, min_samples: usize) {
        self.note(format!(
            "{}: {} samples, {} checked, {} violations",
            rep.name, rep.samples, rep.checked, rep.violations
        ));
        self.check(
            rep.samples >= min_samples,
            format!("{} sample count", rep.name),
        );
        self.check(rep.passed(), format!("{} zero violations", rep.name));
        for w in rep.violation_witnesses() {
            eprintln!("  {} seed {}: {}", rep.name, w.seed, w.detail);
        }
    }
}

// Independent oracles: complex LU determinants rather than eigenvalue products.
fn lu_det(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant()
}

fn complex_lu_det(re: &DMatrix<f64>, im: &DMatrix<f64>) -> f64 {
    let z = DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| {
        Complex::new(re[(i, j)], im[(i, j)])
    });
    let d = z.lu().determinant();
    assert!(
        d.im.abs() < 1e-9 * d.re.abs().max(1.0),
        "Hermitian determinant must be real"
    );
    d.re
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    let g = counterexample_state();
    let p = ModePartition::bipartite(3, &[0], &[1, 2]).unwrap();
    let det = g.det();
    let pair = steering_lmi(&g, &p, "A", "B").unwrap();
    let lmi_det = herm_pair_det(&pair).value;
    let dc = det_condition(&g, &p, "A", "B", None).unwrap();
    let lmi = steerable_gaussian(&g, &p, "A", "B", None).unwrap();
    o.note(format!("det = {det:.5}, LMI det = {lmi_det:.5}"));
    o.check((det - 9.187).abs() <= 0.01, "det γ = 9.187 ± 0.01");
    o.check((lmi_det + 1.958).abs() <= 0.01, "LMI det = -1.958 ± 0.01");
    o.check(dc.satisfied, "determinant condition satisfied");
    o.check(lmi.steerable, "LMI steerable");
    o.check(
        (lu_det(g.matrix()) - det).abs() <= 1e-9 * det,
        "det vs LU oracle",
    );
    let oracle = complex_lu_det(pair.sym().matrix(), pair.antisym());
    o.check(
        (oracle - lmi_det).abs() <= 1e-9,
        "LMI det vs complex LU oracle",
    );
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    for r in [0.3, 1.0, 2.0] {
        let t = loss_threshold(r, Direction::BtoA, 1e-9).unwrap();
        o.note(format!("r = {r}: η* = {t:.9}"));
        o.check((t - 0.5).abs() <= 1e-6, format!("r = {r} threshold"));
        o.check(
            !one_way_verdict(r, ChannelKind::Loss, 0.0, Direction::AtoB)
                .unwrap()
                .steerable,
            format!("r = {r} A→B not steerable at η = 0"),
        );
        let grid = Grid::new(0.01, 1.0, 0.01).unwrap().points();
        o.check(grid.len() == 100, "grid has 100 points");
        let all = grid.iter().all(|&eta| {
            one_way_verdict(r, ChannelKind::Loss, eta, Direction::AtoB)
                .unwrap()
                .steerable
        });
        o.check(all, format!("r = {r} A→B steerable on η grid"));
    }
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    for r in [0.3f64, 1.0, 2.0] {
        let c = (2.0 * r).cosh();
        let closed = 2.0 * c / (c + 1.0);
        let t = amp_threshold_numeric(r, Direction::AtoB, 5.0, 1e-9).unwrap();
        o.note(format!("r = {r}: G* = {t:.7} (closed {closed:.7})"));
        o.check((t - closed).abs() <= 1e-6, format!("r = {r} threshold"));
        let all = Grid::new(1.0, 5.0, 0.01)
            .unwrap()
            .points()
            .iter()
            .all(|&gain| {
                one_way_verdict(r, ChannelKind::Amplifier, gain, Direction::BtoA)
                    .unwrap()
                    .steerable
            });
        o.check(all, format!("r = {r} B→A steerable for G in [1, 5]"));
    }
    // r = 1 value from the closed form: 2 cosh 2 / (cosh 2 + 1)
    let g1 = 2.0 * 2f64.cosh() / (2f64.cosh() + 1.0);
    o.check((g1 - 1.5801).abs() < 1e-4, "G*(r = 1) ≈ 1.5801");
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    let rep = single_mode_equivalence(CampaignConfig::new(SEED, 12_000));
    o.campaign(&rep, 10_000);
    o.note(format!("{} in band", rep.skipped));
    o.check(
        rep.count("steerable") > 0 && rep.count("not_steerable") > 0,
        "both verdicts sampled",
    );
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let rep = peres(CampaignConfig::new(SEED, 12_000));
    o.campaign(&rep, 10_000);
    match rep.witnesses.iter().find(|w| w.kind == "npt_unsteerable") {
        Some(w) => {
            o.note(format!("NPT-unsteerable witness at seed {}", w.seed));
            eprintln!("  witness seed {}: {}", w.seed, w.detail);
        }
        None => o.check(false, "NPT-but-unsteerable witness"),
    }
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    o.campaign(&monogamy_pure(CampaignConfig::new(SEED, 2_000)), 1_000);
    o.campaign(&monogamy_symmetric(CampaignConfig::new(SEED, 2_000)), 1_000);
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let b = remark_boundary(2.0, 4.0, 1e-6).unwrap();
    o.note(format!("boundaries {:.6} / {:.6}", b.pair_ab, b.pair_bc));
    o.check((b.pair_ab - 3.0).abs() <= 1e-3, "{A,B} boundary at 3");
    o.check((b.pair_bc - 3.0).abs() <= 1e-3, "{B,C} boundary at 3");
    o.check(
        remark_ppt(2.0).unwrap() == (false, false),
        "NPT at cosh r = 2",
    );
    o.check(
        remark_ppt(4.0).unwrap() == (true, true),
        "PPT at cosh r = 4",
    );
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    o.campaign(
        &higher_order_chain(CampaignConfig::new(SEED, 12_000)),
        10_000,
    );
    let vac = StandardForm2::new(1.0, 1.0, 0.0, 0.0).unwrap();
    let mut fact = 1.0f64;
    for n in 1..=20u32 {
        fact *= n as f64;
        let rep = reid_higher_order(&vac, n).unwrap();
        let expect = (fact / 2.0).powi(2);
        o.check(rep.satisfied, format!("vacuum order {n} satisfied"));
        o.check(
            (rep.lhs - expect).abs() <= 1e-9 * expect,
            format!("vacuum order {n} lhs"),
        );
        o.check(
            (rep.rhs - expect).abs() <= 1e-9 * expect,
            format!("vacuum order {n} rhs"),
        );
    }
    o
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new();
    o.campaign(&structural(CampaignConfig::new(SEED, 10_000)), 10_000);
    o
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "counter-example reproduction",
            criterion_1,
            Duration::from_secs(1),
        ),
        ("loss threshold", criterion_2, Duration::from_secs(10)),
        ("amplifier threshold", criterion_3, Duration::from_secs(10)),
        (
            "single-mode determinant equivalence",
            criterion_4,
            Duration::from_secs(120),
        ),
        (
            "steerable implies NPT",
            criterion_5,
            Duration::from_secs(180),
        ),
        ("monogamy", criterion_6, Duration::from_secs(120)),
        ("mixture PPT boundary", criterion_7, Duration::from_secs(5)),
        (
            "higher-order implication chain",
            criterion_8,
            Duration::from_secs(120),
        ),
        ("structural numerics", criterion_9, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut o = run();
        let took = start.elapsed();
        o.check(
            took < *limit,
            format!("runtime {took:.2?} over {limit:.0?}"),
        );
        let status = if o.ok { "PASS" } else { "FAIL" };
        println!(
            "criterion {} {name}: {status} ({:.2?}) {}",
            i + 1,
            took,
            o.summary
        );
        failed += !o.ok as usize;
    }
    if failed == 0 {
        println!("acceptance: all 9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
