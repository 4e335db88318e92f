//! Confidence limits on quantiles and probabilities: Fisher matrix (FM),
//! generalized linear model (GLM) and likelihood ratio (LR).
//!
//! All confidence levels are two-sided.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    bisect, fit_mle_precise, g2, golden_max, info_matrix, log_likelihood, log_pnorm, pchisq, pnorm,
    qchisq, qnorm, qt, MleResult, MleStatus, Trial,
};

/// Fifteen probabilities spanning (0, 1) on both tails.
pub const AL15: [f64; 15] = [
    0.000001, 0.00001, 0.0001, 0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999, 0.9999,
    0.99999, 0.999999,
];

/// The tails of [`AL15`] with 0.025, 0.05, ..., 0.975 in between.
pub fn al49() -> Vec<f64> {
    let mut v: Vec<f64> = AL15[..5].to_vec();
    v.extend((1..=39).map(|i| i as f64 * 0.025));
    v.extend_from_slice(&AL15[10..]);
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Fm,
    Lr,
    Glm,
}

impl Method {
    /// 1 = FM, 2 = LR, 3 = GLM.
    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            1 => Some(Method::Fm),
            2 => Some(Method::Lr),
            3 => Some(Method::Glm),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Fm => "FM",
            Method::Lr => "LR",
            Method::Glm => "GLM",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fm" | "1" => Ok(Method::Fm),
            "lr" | "2" => Ok(Method::Lr),
            "glm" | "3" => Ok(Method::Glm),
            _ => Err(Error::Input(format!("unknown confidence method {s:?}"))),
        }
    }
}

/// One line of a limits table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceRow {
    pub q_l: f64,
    pub q: f64,
    pub q_u: f64,
    pub p_l: f64,
    pub p: f64,
    pub p_u: f64,
}

impl ConfidenceRow {
    pub fn to_line(&self) -> String {
        format!(
            "{:.6}, {:.6}, {:.6}, {:.6}, {:.6}, {:.6}",
            self.q_l, self.q, self.q_u, self.p_l, self.p, self.p_u
        )
    }
}

pub const LIMITS_HEADER: &str = "q_l, q, q_u, p_l, p, p_u";

fn check_conf(conf: f64) -> Result<()> {
    if conf > 0.0 && conf < 1.0 {
        Ok(())
    } else {
        Err(Error::Input(format!("conf = {conf} is outside (0, 1)")))
    }
}

fn check_probs(ps: &[f64]) -> Result<()> {
    match ps.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        Some(p) => Err(Error::Input(format!("probability {p} is outside (0, 1)"))),
        None => Ok(()),
    }
}

fn finite_fit(trials: &[Trial]) -> Result<MleResult> {
    let fit = fit_mle_precise(trials);
    if fit.is_finite() {
        Ok(fit)
    } else {
        Err(Error::Estimate(format!(
            "no finite sigma ({:?}); limits need interval overlap",
            fit.status
        )))
    }
}

/// Fisher-matrix (delta method) limits.
pub fn fm_limits(trials: &[Trial], conf: f64, ps: &[f64], qs: &[f64]) -> Result<Vec<ConfidenceRow>> {
    check_conf(conf)?;
    check_probs(ps)?;
    let fit = finite_fit(trials)?;
    let (mu, sig) = (fit.mu, fit.sig);
    let v = info_matrix(trials, mu, sig)
        .vcov
        .ok_or_else(|| Error::Estimate("singular information matrix".into()))?;
    let zc = qnorm((1.0 + conf) / 2.0);
    let row = |z: f64| {
        let q = mu + z * sig;
        let p = pnorm(z);
        let se = sig * (v[0][0] + 2.0 * v[0][1] * z + v[1][1] * z * z).max(0.0).sqrt();
        let dp = crate::numerics::dnorm(z) * zc * se / sig;
        ConfidenceRow {
            q_l: q - zc * se,
            q,
            q_u: q + zc * se,
            p_l: (p - dp).clamp(0.0, 1.0),
            p,
            p_u: (p + dp).clamp(0.0, 1.0),
        }
    };
    let mut out: Vec<ConfidenceRow> = ps.iter().map(|&p| row(qnorm(p))).collect();
    for &q in qs {
        let mut r = row((q - mu) / sig);
        // Report the requested stress exactly rather than mu + z·sig.
        let shift = q - r.q;
        r.q = q;
        r.q_l += shift;
        r.q_u += shift;
        out.push(r);
    }
    Ok(out)
}

/// Probit regression coefficients (intercept a, slope b) with their inverse
/// expected information, derived from the (μ, σ) fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlmCoef {
    pub a: f64,
    pub b: f64,
    pub cov: [[f64; 2]; 2],
}

pub fn glm_coef(trials: &[Trial]) -> Result<GlmCoef> {
    let fit = finite_fit(trials)?;
    let b = 1.0 / fit.sig;
    let a = -fit.mu * b;
    let (mut i11, mut i12, mut i22) = (0.0, 0.0, 0.0);
    for t in trials {
        let w = g2(a + b * t.x);
        i11 += w;
        i12 += w * t.x;
        i22 += w * t.x * t.x;
    }
    let det = i11 * i22 - i12 * i12;
    if !(det > 0.0 && det.is_finite()) {
        return Err(Error::Estimate("singular information matrix".into()));
    }
    Ok(GlmCoef {
        a,
        b,
        cov: [[i22 / det, -i12 / det], [-i12 / det, i11 / det]],
    })
}

/// GLM limits with Student-t quantiles on n − 2 degrees of freedom.
pub fn glm_limits(trials: &[Trial], conf: f64, ps: &[f64], qs: &[f64]) -> Result<Vec<ConfidenceRow>> {
    check_conf(conf)?;
    check_probs(ps)?;
    let n = trials.len();
    if n < 3 {
        return Err(Error::Input("GLM limits need at least 3 trials".into()));
    }
    let g = glm_coef(trials)?;
    let tc = qt((1.0 + conf) / 2.0, (n - 2) as f64);
    let c = g.cov;
    let row = |q: f64, z: f64| {
        // Dose standard error: gradient of (z − a)/b is −(1, q)/b.
        let se1 = ((c[0][0] + 2.0 * q * c[0][1] + q * q * c[1][1]).max(0.0)).sqrt() / g.b.abs();
        // Linear-predictor standard error at q.
        let se2 = (c[0][0] + 2.0 * q * c[0][1] + q * q * c[1][1]).max(0.0).sqrt();
        let eta = g.a + g.b * q;
        ConfidenceRow {
            q_l: q - tc * se1,
            q,
            q_u: q + tc * se1,
            p_l: pnorm(eta - tc * se2),
            p: pnorm(z),
            p_u: pnorm(eta + tc * se2),
        }
    };
    let mut out: Vec<ConfidenceRow> = ps
        .iter()
        .map(|&p| {
            let z = qnorm(p);
            row((z - g.a) / g.b, z)
        })
        .collect();
    out.extend(qs.iter().map(|&q| row(q, g.a + g.b * q)));
    Ok(out)
}

/// Joint LR confidence region in the (μ, σ) half-plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrContour {
    pub c: f64,
    pub cj: f64,
    pub cmax: f64,
    /// Contour level on the likelihood scale.
    pub lev: f64,
    /// ln(lev); the boundary is where the log-likelihood equals this.
    pub log_lev: f64,
    /// Full-model maximum after recalibration.
    pub m_full: f64,
    pub m_null: f64,
    pub mu_hat: f64,
    pub sig_hat: f64,
    pub status: MleStatus,
    /// Closed loop around the estimate iff C < Cmax.
    pub bounded: bool,
    /// Boundary points (μ, σ): the low-μ side by increasing σ, then the
    /// high-μ side by decreasing σ.
    pub boundary: Vec<(f64, f64)>,
    /// Fraction of responses, the constant of the null model.
    pub p_con: f64,
    /// Asymptote slope dσ/dμ = −1/qnorm(p_con), or ∞ when p_con = 1/2.
    pub m0: f64,
    /// Asymptote intercept, taken literally as σ̂ − m0.
    pub b0: f64,
}

impl LrContour {
    pub fn contains(&self, mu: f64, sig: f64, trials: &[Trial]) -> bool {
        sig > 0.0 && log_likelihood(trials, mu, sig) >= self.log_lev
    }
}

/// Half-widths used to bound the σ search relative to the data spread.
fn data_scale(trials: &[Trial]) -> f64 {
    let lo = trials.iter().map(|t| t.x).fold(f64::INFINITY, f64::min);
    let hi = trials.iter().map(|t| t.x).fold(f64::NEG_INFINITY, f64::max);
    let r = hi - lo;
    if r > 0.0 {
        r
    } else {
        lo.abs().max(1.0)
    }
}

/// Profile over μ at fixed σ: returns (argmax μ, max log-likelihood).
fn slice_max(trials: &[Trial], sig: f64, scale: f64) -> (f64, f64) {
    let lo = trials.iter().map(|t| t.x).fold(f64::INFINITY, f64::min);
    let hi = trials.iter().map(|t| t.x).fold(f64::NEG_INFINITY, f64::max);
    let pad = 10.0 * sig + scale;
    let m = golden_max(|m| log_likelihood(trials, m, sig), lo - pad, hi + pad, 1e-13 * scale);
    (m, log_likelihood(trials, m, sig))
}

/// Root of ll(μ, σ) = level on one side of `m_peak` (dir = ±1).
fn slice_root(trials: &[Trial], sig: f64, level: f64, m_peak: f64, dir: f64, scale: f64) -> f64 {
    let f = |m: f64| log_likelihood(trials, m, sig) - level;
    let mut step = sig.max(1e-6 * scale);
    let mut far = m_peak + dir * step;
    let mut n = 0;
    while f(far) >= 0.0 && n < 200 {
        step *= 2.0;
        far = m_peak + dir * step;
        n += 1;
    }
    let (a, b) = if dir < 0.0 { (far, m_peak) } else { (m_peak, far) };
    refine_root(f, a, b)
}

/// Bisection down to adjacent doubles.
fn refine_root<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    refine_root_tol(f, a, b, 0.0)
}

fn refine_root_tol<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || b - a <= tol {
            break;
        }
        if (f(m) >= 0.0) == (fa >= 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

const SLICES: usize = 240;

/// Traces the joint LR region at confidence `conf`.
pub fn lr_joint_contour(trials: &[Trial], conf: f64) -> Result<LrContour> {
    check_conf(conf)?;
    let n = trials.len();
    let n1 = trials.iter().filter(|t| t.y).count();
    if n == 0 || n1 == 0 || n1 == n {
        return Err(Error::Estimate(
            "all responses are identical; the LR region is undefined".into(),
        ));
    }
    let p_con = n1 as f64 / n as f64;
    let fit = fit_mle_precise(trials);
    let m_null = fit.maxlc;
    let mut m_full = fit.maxll;
    if m_full == 0.0 {
        m_full = m_null;
    }
    let q1 = qchisq(conf, 1.0);
    let cj = pchisq(q1, 2.0);
    let lev = (1.0 - cj) * m_full.exp();
    let log_lev = (1.0 - cj).ln() + m_full;
    let cmax = pchisq(2.0 * (m_full - m_null), 1.0);
    let bounded = conf < cmax && fit.is_finite();
    let zc = qnorm(p_con);
    let m0 = if zc == 0.0 { f64::INFINITY } else { -1.0 / zc };
    let b0 = fit.sig - m0;

    let scale = data_scale(trials);
    let profile = |s: f64| slice_max(trials, s, scale).1 - log_lev;
    let s_floor = 1e-6 * scale;
    let s_cap = 1e3 * scale;
    let (s_lo, s_hi) = if fit.is_finite() {
        let lo = if profile(s_floor) >= 0.0 {
            s_floor
        } else {
            let g = |t: f64| profile(t.exp());
            bisect(g, s_floor.ln(), fit.sig.ln(), 1e-14).map_or(s_floor, f64::exp)
        };
        let hi = if profile(s_cap) >= 0.0 {
            s_cap
        } else {
            let g = |t: f64| profile(t.exp());
            bisect(g, fit.sig.ln(), s_cap.ln(), 1e-14).map_or(s_cap, f64::exp)
        };
        (lo, hi)
    } else {
        (s_floor, s_cap)
    };

    let mut left = Vec::with_capacity(SLICES + 1);
    let mut right = Vec::with_capacity(SLICES + 1);
    let (l0, l1) = (s_lo.ln(), s_hi.ln());
    for i in 0..=SLICES {
        // Cosine spacing puts more slices near the ends, where the loop turns.
        let t = 0.5 - 0.5 * (std::f64::consts::PI * i as f64 / SLICES as f64).cos();
        let s = (l0 + t * (l1 - l0)).exp();
        let (mpk, top) = slice_max(trials, s, scale);
        if top < log_lev {
            continue;
        }
        left.push((slice_root(trials, s, log_lev, mpk, -1.0, scale), s));
        right.push((slice_root(trials, s, log_lev, mpk, 1.0, scale), s));
    }
    right.reverse();
    left.extend(right);

    Ok(LrContour {
        c: conf,
        cj,
        cmax,
        lev,
        log_lev,
        m_full,
        m_null,
        mu_hat: fit.mu,
        sig_hat: fit.sig,
        status: fit.status,
        bounded,
        boundary: left,
        p_con,
        m0,
        b0,
    })
}

/// φ(u)/Φ(u), stable in the lower tail.
fn mills(u: f64) -> f64 {
    (-0.5 * u * u - 0.5 * (2.0 * std::f64::consts::PI).ln() - log_pnorm(u)).exp()
}

/// Maximum of ll over the line a + b·q = z in (a, b) = (−μ/σ, 1/σ)
/// coordinates, i.e. the profile likelihood of "Φ⁻¹(p at q) = z".
/// The log-likelihood is concave along the line, so a safeguarded Newton
/// iteration on b > 0 finds the maximum.
fn line_profile(trials: &[Trial], q: f64, z: f64, b_start: f64) -> f64 {
    let ll = |b: f64| {
        trials
            .iter()
            .map(|t| {
                let e = z + b * (t.x - q);
                if t.y {
                    log_pnorm(e)
                } else {
                    log_pnorm(-e)
                }
            })
            .sum::<f64>()
    };
    let derivs = |b: f64| {
        let (mut g, mut h) = (0.0, 0.0);
        for t in trials {
            let d = t.x - q;
            let sgn = if t.y { 1.0 } else { -1.0 };
            let u = sgn * (z + b * d);
            let m = mills(u);
            g += sgn * m * d;
            h -= m * (u + m) * d * d;
        }
        (g, h)
    };
    let mut b = b_start;
    let mut f = ll(b);
    for _ in 0..100 {
        let (g, h) = derivs(b);
        if g.abs() < 1e-13 * (1.0 + f.abs()) {
            break;
        }
        let mut step = if h < 0.0 { -g / h } else { g.signum() * b };
        // Keep b positive and the likelihood increasing.
        let mut moved = false;
        for _ in 0..60 {
            let nb = b + step;
            if nb > 0.0 {
                let nf = ll(nb);
                if nf >= f {
                    moved = nb != b;
                    b = nb;
                    f = nf;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    f
}

fn profile_limits<F: Fn(f64) -> f64>(g: F, center: f64, width: f64) -> Option<(f64, f64)> {
    let side = |dir: f64| {
        let mut w = width;
        let mut n = 0;
        while g(center + dir * w) >= 0.0 {
            w *= 2.0;
            n += 1;
            if n > 60 {
                return None;
            }
        }
        let (a, b) = if dir < 0.0 {
            (center + dir * w, center)
        } else {
            (center, center + dir * w)
        };
        Some(refine_root_tol(&g, a, b, 1e-12 * width))
    };
    Some((side(-1.0)?, side(1.0)?))
}

/// Individual LR limits from a bounded joint region: for each p the range of
/// μ + z_p σ over the region, for each q the range of Φ((q − μ)/σ).
pub fn lr_individual_limits(
    trials: &[Trial],
    contour: &LrContour,
    ps: &[f64],
    qs: &[f64],
) -> Result<Vec<ConfidenceRow>> {
    check_probs(ps)?;
    if !contour.bounded {
        return Err(Error::Estimate(format!(
            "LR region is unbounded (C = {} >= Cmax = {:.6}); individual limits unavailable",
            contour.c, contour.cmax
        )));
    }
    let (mu, sig) = (contour.mu_hat, contour.sig_hat);
    let s_top = contour
        .boundary
        .iter()
        .map(|&(_, s)| s)
        .fold(sig, f64::max);
    let s_bot = contour
        .boundary
        .iter()
        .map(|&(_, s)| s)
        .fold(sig, f64::min)
        .max(f64::MIN_POSITIVE);
    let b_start = 1.0 / sig;
    let width = 0.25 * (s_top - s_bot).max(sig);
    let level = contour.log_lev;

    let q_range = |z: f64| -> Result<(f64, f64)> {
        let g = |q: f64| line_profile(trials, q, z, b_start) - level;
        profile_limits(g, mu + z * sig, width)
            .ok_or_else(|| Error::Estimate("quantile limit search diverged".into()))
    };
    let z_range = |q: f64| -> Result<(f64, f64)> {
        let g = |z: f64| line_profile(trials, q, z, b_start) - level;
        profile_limits(g, (q - mu) / sig, 0.25)
            .ok_or_else(|| Error::Estimate("probability limit search diverged".into()))
    };

    let mut out = Vec::with_capacity(ps.len() + qs.len());
    for &p in ps {
        let z = qnorm(p);
        let q = mu + z * sig;
        let (q_l, q_u) = q_range(z)?;
        let (zl, zu) = z_range(q)?;
        out.push(ConfidenceRow {
            q_l,
            q,
            q_u,
            p_l: pnorm(zl),
            p,
            p_u: pnorm(zu),
        });
    }
    for &q in qs {
        let z = (q - mu) / sig;
        let (zl, zu) = z_range(q)?;
        let (q_l, q_u) = q_range(z)?;
        out.push(ConfidenceRow {
            q_l,
            q,
            q_u,
            p_l: pnorm(zl),
            p: pnorm(z),
            p_u: pnorm(zu),
        });
    }
    Ok(out)
}

/// Limits table: rows for `ps` first, then rows for `qs`.
pub fn lims(method: Method, trials: &[Trial], conf: f64, ps: &[f64], qs: &[f64]) -> Result<Vec<ConfidenceRow>> {
    if ps.is_empty() && qs.is_empty() {
        return Err(Error::Input("give at least one probability or quantile".into()));
    }
    match method {
        Method::Fm => fm_limits(trials, conf, ps, qs),
        Method::Glm => glm_limits(trials, conf, ps, qs),
        Method::Lr => {
            let c = lr_joint_contour(trials, conf)?;
            lr_individual_limits(trials, &c, ps, qs)
        }
    }
}

/// Writes a limits table in the comma-separated export style.
pub fn limits_text(rows: &[ConfidenceRow]) -> String {
    let mut s = String::from(LIMITS_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_line());
        s.push('\n');
    }
    s
}
