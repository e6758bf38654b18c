//! The analytic constants behind the approximation guarantees: roots of the
//! balancing equations, the rounding parameters, the refined-TSP function
//! `f(eps)` and the easy/hard instance ratios derived from them.
//!
//! Roots are reported as bisection enclosures `[lo, hi]` with a verified
//! sign change, so one-sided claims such as `y0 > 0.39312` are checked on
//! `lo` and upper bounds on ratios are evaluated at the enclosure end that
//! maximizes them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ROOT_WIDTH: f64 = 1e-12;
const SCAN_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

impl Enclosure {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub enclosure: Enclosure,
    pub value: f64,
    /// `|g|` at the midpoint.
    pub residual: f64,
    /// Sign changes of `g` seen on an evenly spaced scan of the search interval.
    pub sign_changes: usize,
}

/// Bisection for the unique root of `g` on `[lo, hi]`.
pub fn bisect(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Root> {
    let (mut a, mut b) = (lo, hi);
    let (ga, gb) = (g(a), g(b));
    if ga == 0.0 || gb == 0.0 || ga.signum() == gb.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    let sa = ga.signum();
    while b - a > ROOT_WIDTH {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            a = m;
            b = m;
            break;
        }
        if gm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    let mut prev = ga.signum();
    let mut sign_changes = 0;
    for i in 1..=SCAN_POINTS {
        let x = lo + (hi - lo) * i as f64 / SCAN_POINTS as f64;
        let s = g(x).signum();
        if s != prev {
            sign_changes += 1;
            prev = s;
        }
    }
    let value = 0.5 * (a + b);
    Ok(Root { enclosure: Enclosure { lo: a, hi: b }, value, residual: g(value).abs(), sign_changes })
}

/// `ln[(1-eps)(2 - y/2)] - (3/2)(1-eps) y`; eps = 0 gives the fixed-capacity balance.
pub fn g0(y: f64, eps: f64) -> f64 {
    ((1.0 - eps) * (2.0 - y / 2.0)).ln() - 1.5 * (1.0 - eps) * y
}

/// `(1/2)(1-eps) y + 6(1-eps)(1-y)(1 - e^{-(1-eps) y/2}) - ln[(1-eps)(2-2y)]`.
pub fn g1(y: f64, eps: f64) -> f64 {
    let s = 1.0 - eps;
    0.5 * s * y + 6.0 * s * (1.0 - y) * (1.0 - (-0.5 * s * y).exp()) - (s * (2.0 - 2.0 * y)).ln()
}

/// `4(1-y)(1 - e^{-(1-eps) y/2})`, increasing in `y` on the relevant range.
pub fn y2_of(y1: f64, eps: f64) -> f64 {
    4.0 * (1.0 - y1) * (1.0 - (-0.5 * (1.0 - eps) * y1).exp())
}

pub fn solve_y0_eps(eps: f64) -> Result<Root> {
    bisect(|y| g0(y, eps), 0.0, 1.0)
}

pub fn solve_y1_eps(eps: f64) -> Result<Root> {
    // g1 -> +inf as y -> 1; 0.999 keeps the logarithm finite.
    bisect(|y| g1(y, eps), 0.0, 0.999)
}

pub fn solve_y0() -> Result<Root> {
    solve_y0_eps(0.0)
}

/// `y1` and the enclosure of `y2 = 4(1-y1)(1-e^{-y1/2})`.
pub fn solve_y1() -> Result<(Root, Enclosure)> {
    let y1 = solve_y1_eps(0.0)?;
    let e = y1.enclosure;
    Ok((y1, Enclosure { lo: y2_of(e.lo, 0.0), hi: y2_of(e.hi, 0.0) }))
}

/// Rounding parameter of the fixed-capacity algorithm, `ln(2 - y0/2)`.
pub fn gamma_star(y0: f64) -> f64 {
    (2.0 - y0 / 2.0).ln()
}

pub fn gamma1(y1: f64, y2: f64) -> f64 {
    (2.0 - 2.0 * y1 - y2 / 2.0).ln()
}

pub fn gamma2(y1: f64) -> f64 {
    (2.0 - 2.0 * y1).ln()
}

/// Default rounding parameters `(gamma*, gamma1, gamma2)`.
pub fn default_gammas() -> (f64, f64, f64) {
    static CACHE: std::sync::OnceLock<(f64, f64, f64)> = std::sync::OnceLock::new();
    *CACHE.get_or_init(|| {
        let y0 = solve_y0().expect("y0 root is bracketed").value;
        let (y1, _) = solve_y1().expect("y1 root is bracketed");
        let y1 = y1.value;
        (gamma_star(y0), gamma1(y1, y2_of(y1, 0.0)), gamma2(y1))
    })
}

/// `alpha + 1 + ln(2 - y0/2)` over the y0 enclosure.
pub fn ratio_alg1(alpha: f64, y0: &Enclosure) -> Enclosure {
    // decreasing in y0
    Enclosure { lo: alpha + 1.0 + gamma_star(y0.hi), hi: alpha + 1.0 + gamma_star(y0.lo) }
}

/// `alpha + 1 + y1 + ln(2 - 2 y1) + 2 delta` over the y1 enclosure.
pub fn ratio_alg2(alpha: f64, delta: f64, y1: &Enclosure) -> Enclosure {
    // y + ln(2-2y) is decreasing for y > 0
    let h = |y: f64| alpha + 1.0 + y + gamma2(y) + 2.0 * delta;
    Enclosure { lo: h(y1.hi), hi: h(y1.lo) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FWitness {
    pub eps: f64,
    pub value: f64,
    pub theta: f64,
    pub tau: f64,
    pub rho: f64,
    pub zeta: f64,
}

pub fn zeta(eps: f64, tau: f64, rho: f64) -> f64 {
    let q = (3.0 * rho + tau - 4.0 * tau * rho) / (1.0 - rho);
    q + eps / (tau * rho) * (1.0 - tau * rho - q)
}

/// The objective of `f(eps)` at an explicit point, minus one.
pub fn f_objective(eps: f64, theta: f64, tau: f64, rho: f64) -> f64 {
    let z = zeta(eps, tau, rho);
    (1.0 + z) / theta + (1.0 - tau - theta) / (theta * (1.0 - tau))
        + 3.0 * eps / (1.0 - theta)
        + 3.0 * rho / ((1.0 - rho) * (1.0 - tau))
        - 1.0
}

/// For fixed `(tau, rho)` the objective is `(2+zeta)/theta + 3 eps/(1-theta)`
/// plus terms free of `theta`; it is convex with the stationary point below,
/// clipped to `theta <= 1 - tau`.
pub fn best_theta(eps: f64, tau: f64, rho: f64) -> f64 {
    let a = (2.0 + zeta(eps, tau, rho)).sqrt();
    let b = (3.0 * eps).sqrt();
    (a / (a + b)).min(1.0 - tau)
}

fn reduced(eps: f64, tau: f64, rho: f64) -> f64 {
    f_objective(eps, best_theta(eps, tau, rho), tau, rho)
}

const BOX_HI: f64 = 1.0 / 6.0;
const BOX_LO: f64 = 1e-9;

fn clamp_box(p: [f64; 2]) -> [f64; 2] {
    [p[0].clamp(BOX_LO, BOX_HI), p[1].clamp(BOX_LO, BOX_HI)]
}

/// Nelder-Mead on `(tau, rho)` projected onto the box.
fn nelder_mead(h: impl Fn([f64; 2]) -> f64, start: [f64; 2], step: f64) -> ([f64; 2], f64) {
    let mut s: Vec<([f64; 2], f64)> = [start, [start[0] + step, start[1]], [start[0], start[1] + step]]
        .into_iter()
        .map(|p| {
            let p = clamp_box(p);
            (p, h(p))
        })
        .collect();
    for _ in 0..4000 {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = (s[2].1 - s[0].1).abs();
        let size = (s[2].0[0] - s[0].0[0]).abs().max((s[2].0[1] - s[0].0[1]).abs());
        if spread < 1e-16 && size < 1e-13 {
            break;
        }
        let c = [(s[0].0[0] + s[1].0[0]) / 2.0, (s[0].0[1] + s[1].0[1]) / 2.0];
        let along = |t: f64| clamp_box([c[0] + t * (s[2].0[0] - c[0]), c[1] + t * (s[2].0[1] - c[1])]);
        let r = along(-1.0);
        let fr = h(r);
        if fr < s[0].1 {
            let e = along(-2.0);
            let fe = h(e);
            s[2] = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < s[1].1 {
            s[2] = (r, fr);
        } else {
            let k = if fr < s[2].1 { along(-0.5) } else { along(0.5) };
            let fk = h(k);
            if fk < s[2].1.min(fr) {
                s[2] = (k, fk);
            } else {
                let best = s[0].0;
                for v in s.iter_mut().skip(1) {
                    let p = clamp_box([(v.0[0] + best[0]) / 2.0, (v.0[1] + best[1]) / 2.0]);
                    *v = (p, h(p));
                }
            }
        }
    }
    s.sort_by(|a, b| a.1.total_cmp(&b.1));
    s[0]
}

/// Upper bound on `f(eps)` together with the point that attains it.
pub fn f_epsilon(eps: f64) -> Result<FWitness> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::BadDelta(format!("eps = {eps}")));
    }
    let h = |p: [f64; 2]| reduced(eps, p[0], p[1]);
    // 40 x 25 grid of starts, log-spaced towards the origin.
    let axis = |i: usize, m: usize| BOX_HI * (1e-4f64).powf(1.0 - (i as f64 + 0.5) / m as f64);
    let mut starts: Vec<([f64; 2], f64)> = Vec::with_capacity(1000);
    for i in 0..40 {
        for j in 0..25 {
            let p = [axis(i, 40), axis(j, 25)];
            starts.push((p, h(p)));
        }
    }
    starts.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut best: Option<([f64; 2], f64)> = None;
    for &(p, _) in starts.iter().take(12) {
        let cand = nelder_mead(h, p, 0.1 * p[0].min(p[1]));
        let cand = nelder_mead(h, cand.0, 1e-3 * cand.0[0].min(cand.0[1]));
        if best.is_none_or(|b| cand.1 < b.1) {
            best = Some(cand);
        }
    }
    let ([tau, rho], value) = best.expect("at least one start");
    let theta = best_theta(eps, tau, rho);
    if !(theta > 0.0 && theta <= 1.0 - tau && tau > 0.0 && tau <= BOX_HI && rho > 0.0 && rho <= BOX_HI) {
        return Err(Error::DomainViolation { theta, tau, rho });
    }
    Ok(FWitness { eps, value, theta, tau, rho, zeta: zeta(eps, tau, rho) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedCapacityRefinement {
    pub eps: f64,
    pub y0_eps: Root,
    pub f: FWitness,
    pub easy_ratio: f64,
    pub hard_ratio: f64,
    pub final_ratio: f64,
    /// Against `ratio_alg1(1.5)` evaluated at the plain root.
    pub improvement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralCapacityRefinement {
    pub eps: f64,
    pub y1_eps: Root,
    pub y2_eps: Enclosure,
    pub f: FWitness,
    pub easy_ratio: f64,
    pub hard_ratio: f64,
    pub final_ratio: f64,
    /// Against `ratio_alg2(1.5, 0)` evaluated at the plain root.
    pub improvement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub alpha: f64,
    pub fixed: FixedCapacityRefinement,
    pub general: GeneralCapacityRefinement,
}

/// Easy/hard ratios with the refined TSP tour, `alpha = 1.5`. Every ratio
/// is an upper bound: monotone expressions are evaluated at the worst
/// enclosure end and `f` is a witnessed upper bound.
pub fn easy_hard_refinement(eps_fixed: f64, eps_general: f64) -> Result<RefinementReport> {
    let alpha = 1.5;
    let y0 = solve_y0()?;
    let (y1, _) = solve_y1()?;

    let y0e = solve_y0_eps(eps_fixed)?;
    let f_fixed = f_epsilon(eps_fixed)?;
    // ln[(1-eps)(2 - y/2)] is decreasing in y
    let easy = alpha + 1.0 + ((1.0 - eps_fixed) * (2.0 - y0e.enclosure.lo / 2.0)).ln();
    let hard = 2.0 + f_fixed.value + gamma_star(y0.enclosure.lo);
    let final_fixed = easy.max(hard);
    let fixed = FixedCapacityRefinement {
        eps: eps_fixed,
        y0_eps: y0e,
        f: f_fixed,
        easy_ratio: easy,
        hard_ratio: hard,
        final_ratio: final_fixed,
        improvement: ratio_alg1(alpha, &y0.enclosure).lo - final_fixed,
    };

    let s = 1.0 - eps_general;
    let y1e = solve_y1_eps(eps_general)?;
    let f_gen = f_epsilon(eps_general)?;
    // (1-eps) y + ln[(1-eps)(2-2y)] is decreasing in y; the 1e-100 term of
    // the bound vanishes in double precision.
    let y = y1e.enclosure.lo;
    let easy = alpha + 1.0 + s * y + (s * (2.0 - 2.0 * y)).ln() + 1e-100;
    let hard = 2.0 + f_gen.value + y1.enclosure.lo + gamma2(y1.enclosure.lo);
    let final_gen = easy.max(hard);
    let general = GeneralCapacityRefinement {
        eps: eps_general,
        y1_eps: y1e,
        y2_eps: Enclosure {
            lo: y2_of(y1e.enclosure.lo, eps_general),
            hi: y2_of(y1e.enclosure.hi, eps_general),
        },
        f: f_gen,
        easy_ratio: easy,
        hard_ratio: hard,
        final_ratio: final_gen,
        improvement: ratio_alg2(alpha, 0.0, &y1.enclosure).lo - final_gen,
    };
    Ok(RefinementReport { alpha, fixed, general })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub y0: Root,
    pub y1: Root,
    pub y2: Enclosure,
    pub gamma_star: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// `ln(2 - y0/2) - 1.5 y0` at the reported `y0`.
    pub gamma_star_residual: f64,
    pub ratio_alg1_alpha_1: Enclosure,
    pub ratio_alg1_alpha_1_5: Enclosure,
    pub ratio_alg2_alpha_1_5: Enclosure,
    pub refinement: RefinementReport,
}

pub const DEFAULT_EPS_FIXED: f64 = 0.000335;
pub const DEFAULT_EPS_GENERAL: f64 = 0.000334;

pub fn constants_report(eps_fixed: f64, eps_general: f64) -> Result<ConstantsReport> {
    let y0 = solve_y0()?;
    let (y1, y2) = solve_y1()?;
    let gs = gamma_star(y0.value);
    Ok(ConstantsReport {
        y0,
        y1,
        y2,
        gamma_star: gs,
        gamma1: gamma1(y1.value, y2_of(y1.value, 0.0)),
        gamma2: gamma2(y1.value),
        gamma_star_residual: gs - 1.5 * y0.value,
        ratio_alg1_alpha_1: ratio_alg1(1.0, &y0.enclosure),
        ratio_alg1_alpha_1_5: ratio_alg1(1.5, &y0.enclosure),
        ratio_alg2_alpha_1_5: ratio_alg2(1.5, 1e-10, &y1.enclosure),
        refinement: easy_hard_refinement(eps_fixed, eps_general)?,
    })
}
