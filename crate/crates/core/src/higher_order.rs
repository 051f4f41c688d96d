//! Reid-type non-steerability tests for higher-order quadratures
//! `X⁽ᴺ⁾ = (bᴺ + b†ᴺ)/√2`, `P⁽ᴺ⁾ = (bᴺ − b†ᴺ)/(√2 i)` on a two-mode Gaussian
//! state in standard form.
//!
//! Moments come from the normally ordered characteristic function; with
//! Wick's theorem the inferred variances under the optimal linear estimate are
//!
//! ```text
//! 2Δ²_inf X⁽ᴺ⁾ = N!(Bᴺ + (B+1)ᴺ) − 4 N! (Cᴺ + (−1)ᴺ Dᴺ)² / (Aᴺ + (A+1)ᴺ)
//! 2Δ²_inf P⁽ᴺ⁾ = N!(Bᴺ + (B+1)ᴺ) − 4 N! (Cᴺ − (−1)ᴺ Dᴺ)² / (Aᴺ + (A+1)ᴺ)
//! |⟨[X⁽ᴺ⁾, P⁽ᴺ⁾]⟩|²_inf = (N! ((B+1)ᴺ − Bᴺ))²
//! ```
//!
//! and the state passes when `Δ²X · Δ²P ≥ ¼ |⟨[X, P]⟩|²`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{require_physical, StandardForm2};

/// Orders above this are evaluated in log space.
pub const LOG_SCALE_ABOVE: u32 = 18;

/// Relative slack for the inequalities in this module.
pub const ORDER_TOL: f64 = 1e-9;

/// Normally ordered second moments of a standard-form state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSet {
    /// `⟨a†a⟩ = (a − 1)/2`
    pub na: f64,
    /// `⟨b†b⟩ = (b − 1)/2`
    pub nb: f64,
    /// `⟨ab⟩ = (c₁ − c₂)/4`
    pub c: f64,
    /// `−⟨a†b⟩ = −(c₁ + c₂)/4`
    pub d: f64,
}

pub fn moments_from_standard_form(sf: &StandardForm2) -> Result<MomentSet> {
    require_physical(&sf.to_cm(), None)?;
    Ok(moments_unchecked(sf))
}

fn moments_unchecked(sf: &StandardForm2) -> MomentSet {
    MomentSet {
        na: (sf.a - 1.0) / 2.0,
        nb: (sf.b - 1.0) / 2.0,
        c: (sf.c1 - sf.c2) / 4.0,
        d: -(sf.c1 + sf.c2) / 4.0,
    }
}

/// The determinant condition `det γ ≥ det γ_A` written in moments.
pub fn moment_det_condition(m: &MomentSet) -> bool {
    let s = (2.0 * m.na + 1.0) * (2.0 * m.nb + 1.0);
    let lhs = (s - 4.0 * (m.c - m.d).powi(2)) * (s - 4.0 * (m.c + m.d).powi(2));
    let rhs = (2.0 * m.na + 1.0).powi(2);
    lhs >= rhs - ORDER_TOL * rhs.max(lhs.abs()).max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderNReport {
    pub order: u32,
    pub var_x_inf: f64,
    pub var_p_inf: f64,
    /// `Δ²X · Δ²P`
    pub lhs: f64,
    /// `¼ |⟨[X, P]⟩|²_inf`
    pub rhs: f64,
    pub satisfied: bool,
    pub log_scale_used: bool,
}

/// `ln(x₁ᴺ + s·x₂ᴺ)`-style helper: returns `(ln scale, mantissa)` with
/// `u + v = e^{scale} · mantissa` for `u = p^N`, `v = sign · q^N`.
fn scaled_sum(p: f64, q: f64, sign: f64, n: u32) -> (f64, f64) {
    let nf = n as f64;
    let (lp, lq) = (p.abs().ln() * nf, q.abs().ln() * nf);
    let sp = if p < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let sq = sign * if q < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let top = lp.max(lq);
    if top == f64::NEG_INFINITY {
        return (0.0, 0.0);
    }
    (top, sp * (lp - top).exp() + sq * (lq - top).exp())
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Order-`N` inferred-variance test on a standard-form state.
///
/// Orders up to [`LOG_SCALE_ABOVE`] are evaluated directly; higher orders are
/// normalized by `N!·(B+1)ᴺ` and `(A+1)ᴺ` so the comparison itself never
/// overflows. Reported values that still exceed `f64` range are an error.
pub fn reid_higher_order(sf: &StandardForm2, order: u32) -> Result<OrderNReport> {
    if order < 1 {
        return Err(Error::InvalidParameter("order must be at least 1".into()));
    }
    if !(sf.c1 >= sf.c2.abs()) {
        return Err(Error::InvalidParameter(format!(
            "standard form requires c1 >= |c2|, got c1 = {}, c2 = {}",
            sf.c1, sf.c2
        )));
    }
    let m = moments_unchecked(sf);
    let report = if order <= LOG_SCALE_ABOVE {
        direct(&m, order)
    } else {
        log_scaled(&m, order)?
    };
    Ok(report)
}

fn direct(m: &MomentSet, order: u32) -> OrderNReport {
    let n = order as i32;
    let f = (1..=order).map(f64::from).product::<f64>();
    let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
    let sb = m.nb.powi(n) + (m.nb + 1.0).powi(n);
    let sa = m.na.powi(n) + (m.na + 1.0).powi(n);
    let kx = m.c.powi(n) + sign * m.d.powi(n);
    let kp = m.c.powi(n) - sign * m.d.powi(n);
    let var_x = 0.5 * (f * sb - 4.0 * f * kx * kx / sa);
    let var_p = 0.5 * (f * sb - 4.0 * f * kp * kp / sa);
    let comm = f * ((m.nb + 1.0).powi(n) - m.nb.powi(n));
    let rhs = 0.25 * comm * comm;
    let lhs = var_x * var_p;
    OrderNReport {
        order,
        var_x_inf: var_x,
        var_p_inf: var_p,
        lhs,
        rhs,
        satisfied: lhs >= rhs - ORDER_TOL * rhs.max(1.0),
        log_scale_used: false,
    }
}

fn log_scaled(m: &MomentSet, order: u32) -> Result<OrderNReport> {
    let nf = order as f64;
    let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
    // Normalizers: (B+1)ᴺ for B-side sums, (A+1)ᴺ for A-side sums.
    let lb = nf * (m.nb + 1.0).ln();
    let la = nf * (m.na + 1.0).ln();
    let rb = (m.nb / (m.nb + 1.0)).powf(nf);
    let ra = (m.na / (m.na + 1.0)).powf(nf);
    let sb_hat = rb + 1.0;
    let sa_hat = ra + 1.0;
    let (lkx, kx_hat) = scaled_sum(m.c, m.d, sign, order);
    let (lkp, kp_hat) = scaled_sum(m.c, m.d, -sign, order);
    // 4 k² / sa, expressed in units of (B+1)ᴺ
    let cross = |lk: f64, k_hat: f64| 4.0 * k_hat * k_hat * (2.0 * lk - la - lb).exp() / sa_hat;
    let x_hat = sb_hat - cross(lkx, kx_hat);
    let p_hat = sb_hat - cross(lkp, kp_hat);
    let r_hat = 0.25 * (1.0 - rb).powi(2);
    let l_hat = 0.25 * x_hat * p_hat;

    // true = hat · e^{scale}
    let ln_f = ln_factorial(order);
    let scale = 2.0 * (ln_f + lb);
    let floor = (-scale).exp();
    let satisfied = l_hat >= r_hat - ORDER_TOL * r_hat.max(floor);

    let unit = (ln_f + lb).exp();
    let var_x = 0.5 * unit * x_hat;
    let var_p = 0.5 * unit * p_hat;
    let lhs = l_hat * scale.exp();
    let rhs = r_hat * scale.exp();
    if [var_x, var_p, lhs, rhs].iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow(format!(
            "order {order} inferred variances exceed f64 range (log scale {scale:.1})"
        )));
    }
    Ok(OrderNReport {
        order,
        var_x_inf: var_x,
        var_p_inf: var_p,
        lhs,
        rhs,
        satisfied,
        log_scale_used: true,
    })
}

/// Closed form of the order-2 test in standard-form parameters:
/// `(b² + 1 − ¼(c₁² + c₂²)²/(a² + 1)) (b² + 1 − c₁²c₂²/(a² + 1))` against `4b²`.
pub fn order_two_closed_form(sf: &StandardForm2) -> (f64, f64) {
    let StandardForm2 { a, b, c1, c2 } = *sf;
    let s = (c1 * c1 + c2 * c2).powi(2) / 4.0;
    let lhs = (b * b + 1.0 - s / (a * a + 1.0)) * (b * b + 1.0 - c1 * c1 * c2 * c2 / (a * a + 1.0));
    (lhs, 4.0 * b * b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmgmCheck {
    /// `a²(b − 1)² ≥ ¼(c₁² + c₂²)²`
    pub ineq1: bool,
    /// `AB ≥ C² + D² − B/2`
    pub ineq2: bool,
    /// Either inequality is within its tolerance band of equality.
    pub marginal: bool,
}

fn banded(lhs: f64, rhs: f64) -> (bool, bool) {
    let band = ORDER_TOL * lhs.abs().max(rhs.abs());
    (lhs >= rhs - band, (lhs - rhs).abs() <= band)
}

/// Evaluates both forms of the arithmetic-geometric-mean consequence of the
/// determinant condition. They are algebraically equivalent.
pub fn amgm_check(sf: &StandardForm2) -> Result<AmgmCheck> {
    let m = moments_from_standard_form(sf)?;
    let StandardForm2 { a, b, c1, c2 } = *sf;
    let (ineq1, m1) = banded((a * (b - 1.0)).powi(2), 0.25 * (c1 * c1 + c2 * c2).powi(2));
    let (ineq2, m2) = banded(m.na * m.nb, m.c * m.c + m.d * m.d - m.nb / 2.0);
    Ok(AmgmCheck {
        ineq1,
        ineq2,
        marginal: m1 || m2,
    })
}

/// `([Cᴺ + (−1)ᴺDᴺ]², [Cᴺ + (−1)ᴺ⁺¹Dᴺ]²)`: the X- and P-quadrature couplings.
pub fn quadrature_couplings(m: &MomentSet, order: u32) -> (f64, f64) {
    let n = order as i32;
    let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
    let kx = m.c.powi(n) + sign * m.d.powi(n);
    let kp = m.c.powi(n) - sign * m.d.powi(n);
    (kx * kx, kp * kp)
}

/// Per-order CSV with header `N,lhs,rhs,satisfied`.
pub fn write_order_csv<W: std::io::Write>(out: W, reports: &[OrderNReport]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["N", "lhs", "rhs", "satisfied"])?;
    for r in reports {
        w.write_record([
            r.order.to_string(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.satisfied.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{standardize_two_mode, tmsv};

    fn vacuum() -> StandardForm2 {
        StandardForm2::new(1.0, 1.0, 0.0, 0.0).unwrap()
    }

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn vacuum_moments_vanish() {
        let m = moments_from_standard_form(&vacuum()).unwrap();
        assert_eq!((m.na, m.nb, m.c, m.d), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn tmsv_moments() {
        let r = 0.8;
        let sf = standardize_two_mode(&tmsv(r).unwrap()).unwrap();
        let m = moments_from_standard_form(&sf).unwrap();
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        assert!((m.na - (c - 1.0) / 2.0).abs() < 1e-10);
        assert!((m.nb - (c - 1.0) / 2.0).abs() < 1e-10);
        assert!((m.c - s / 2.0).abs() < 1e-9);
        assert!(m.d.abs() < 1e-9);
    }

    #[test]
    fn substitution_example() {
        // (3, 2, 1, −1) → A = 1, B = 1/2, C = 1/2, D = 0
        let sf = StandardForm2 {
            a: 3.0,
            b: 2.0,
            c1: 1.0,
            c2: -1.0,
        };
        let m = moments_from_standard_form(&sf).unwrap();
        assert_eq!((m.na, m.nb, m.c, m.d), (1.0, 0.5, 0.5, 0.0));
    }

    #[test]
    fn unphysical_moments_rejected() {
        let sf = StandardForm2 {
            a: 1.0,
            b: 1.0,
            c1: 0.9,
            c2: 0.0,
        };
        assert!(moments_from_standard_form(&sf).is_err());
        assert!(amgm_check(&sf).is_err());
    }

    #[test]
    fn vacuum_attains_equality_at_every_order() {
        for n in 1..=40 {
            let rep = reid_higher_order(&vacuum(), n).unwrap();
            assert!(rep.satisfied, "N = {n}");
            assert_eq!(rep.log_scale_used, n > LOG_SCALE_ABOVE);
            let expect = (factorial(n) / 2.0).powi(2);
            assert!((rep.lhs - expect).abs() <= 1e-9 * expect, "N = {n}");
            assert!((rep.rhs - expect).abs() <= 1e-9 * expect, "N = {n}");
        }
    }

    #[test]
    fn order_one_is_the_determinant_condition() {
        // (b − c₁²/a)(b − c₂²/a) ≥ 1
        for (a, b, c1, c2) in [
            (2.0, 2.0, 1.0, -0.5),
            (3.0, 1.5, 1.2, 0.3),
            (1.6, 1.6, 1.2, -1.2),
        ] {
            let sf = StandardForm2::new(a, b, c1, c2).unwrap();
            let rep = reid_higher_order(&sf, 1).unwrap();
            let det_ok = (b - c1 * c1 / a) * (b - c2 * c2 / a) >= 1.0;
            assert_eq!(rep.satisfied, det_ok);
            assert!((4.0 * rep.lhs - (b - c1 * c1 / a) * (b - c2 * c2 / a)).abs() < 1e-12);
        }
    }

    #[test]
    fn order_two_matches_closed_form() {
        for (a, b, c1, c2) in [
            (2.0, 2.0, 1.0, -0.5),
            (3.0, 1.5, 1.2, 0.3),
            (1.6, 1.6, 1.2, -1.2),
            (2.5, 2.0, 1.5, -1.2),
        ] {
            let sf = StandardForm2::new(a, b, c1, c2).unwrap();
            let rep = reid_higher_order(&sf, 2).unwrap();
            let (lhs, rhs) = order_two_closed_form(&sf);
            assert!((4.0 * rep.lhs - lhs).abs() <= 1e-9 * lhs.abs());
            assert!((4.0 * rep.rhs - rhs).abs() <= 1e-9 * rhs.abs());
        }
    }

    #[test]
    fn log_scale_agrees_with_direct_evaluation() {
        let sf = StandardForm2::new(2.3, 1.9, 1.1, -0.4).unwrap();
        let m = moments_unchecked(&sf);
        for n in [3u32, 10, 18] {
            let d = direct(&m, n);
            let l = log_scaled(&m, n).unwrap();
            assert_eq!(d.satisfied, l.satisfied);
            for (x, y) in [
                (d.var_x_inf, l.var_x_inf),
                (d.var_p_inf, l.var_p_inf),
                (d.rhs, l.rhs),
            ] {
                assert!((x - y).abs() <= 1e-9 * x.abs(), "N = {n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn overflow_is_reported() {
        let sf = StandardForm2::new(1e6, 1e6, 0.0, 0.0).unwrap();
        assert!(matches!(
            reid_higher_order(&sf, 300),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn order_zero_rejected() {
        assert!(reid_higher_order(&vacuum(), 0).is_err());
        let sf = StandardForm2 {
            a: 2.0,
            b: 2.0,
            c1: 0.1,
            c2: 0.5,
        };
        assert!(reid_higher_order(&sf, 2).is_err());
    }

    #[test]
    fn amgm_cases() {
        let v = amgm_check(&vacuum()).unwrap();
        assert!(v.ineq1 && v.ineq2);
        for r in [0.2f64, 0.9, 1.7] {
            let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
            let sf = StandardForm2::new(c, c, s, -s).unwrap();
            let chk = amgm_check(&sf).unwrap();
            assert!(!chk.ineq1 && !chk.ineq2, "r = {r}");
        }
    }

    #[test]
    fn order_csv_layout() {
        let reps: Vec<_> = (1..=3)
            .map(|n| reid_higher_order(&vacuum(), n).unwrap())
            .collect();
        let mut buf = Vec::new();
        write_order_csv(&mut buf, &reps).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "N,lhs,rhs,satisfied");
        assert_eq!(lines[1], "1,0.25,0.25,true");
        assert_eq!(lines.len(), 4);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn moment_form_of_determinant_condition() {
        let sf = StandardForm2::new(2.0, 2.0, 1.0, -0.5).unwrap();
        let m = moments_unchecked(&sf);
        let g = sf.to_cm();
        let det_ok = g.det() >= 4.0;
        assert_eq!(moment_det_condition(&m), det_ok);
        let (c, s) = (2.0f64.cosh(), 2.0f64.sinh());
        let m = moments_unchecked(&StandardForm2 {
            a: c,
            b: c,
            c1: s,
            c2: -s,
        });
        assert!(!moment_det_condition(&m));
    }
}
