//! Distributional primitives, probit maximum likelihood, Fisher information,
//! the D-optimal `k*` search, pooled adjacent violators and overlap checks.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Normal, StudentsT};

/// One stimulus/response observation on the analysis scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub x: f64,
    pub y: bool,
}

impl Trial {
    pub fn new(x: f64, y: bool) -> Self {
        Trial { x, y }
    }

    fn yf(&self) -> f64 {
        if self.y {
            1.0
        } else {
            0.0
        }
    }
}

/// Builds trials from parallel stimulus and 0/1 response slices.
pub fn trials_from(xs: &[f64], ys: &[u8]) -> Vec<Trial> {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| Trial::new(x, y != 0))
        .collect()
}

fn std_normal() -> Normal {
    Normal::standard()
}

pub fn pnorm(z: f64) -> f64 {
    std_normal().cdf(z)
}

pub fn dnorm(z: f64) -> f64 {
    std_normal().pdf(z)
}

pub fn qnorm(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}

/// ln Φ(z), stable far into the lower tail.
pub fn log_pnorm(z: f64) -> f64 {
    if z > -30.0 {
        let p = pnorm(z);
        if p > 0.0 {
            return p.ln();
        }
    }
    // Mills-ratio expansion: Φ(z) ≈ φ(z)/|z| · (1 − 1/z² + 3/z⁴).
    let z2 = z * z;
    -0.5 * z2 - (-z).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
        + (1.0 - 1.0 / z2 + 3.0 / (z2 * z2)).ln()
}

pub fn pchisq(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    ChiSquared::new(df).expect("positive df").cdf(x)
}

pub fn qchisq(p: f64, df: f64) -> f64 {
    ChiSquared::new(df).expect("positive df").inverse_cdf(p)
}

pub fn qt(p: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).expect("positive df").inverse_cdf(p)
}

/// Rounds to `digits` decimals through the exact decimal expansion of the
/// double, so binary ties go to even (0.390625 -> 0.39062).
pub fn round_decimals(x: f64, digits: usize) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let s = format!("{:.*}", digits, x);
    let r: f64 = s.parse().unwrap_or(x);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Squared probit information weight G²(k) = φ(k)² / (Φ(k)(1 − Φ(k))).
pub fn g2(k: f64) -> f64 {
    if !k.is_finite() {
        return 0.0;
    }
    let ln_phi = -0.5 * k * k - 0.5 * (2.0 * std::f64::consts::PI).ln();
    (2.0 * ln_phi - log_pnorm(k) - log_pnorm(-k)).exp()
}

/// Log-likelihood of a probit model with location `mu` and scale `sig`.
pub fn log_likelihood(trials: &[Trial], mu: f64, sig: f64) -> f64 {
    trials
        .iter()
        .map(|t| {
            let z = (t.x - mu) / sig;
            if t.y {
                log_pnorm(z)
            } else {
                log_pnorm(-z)
            }
        })
        .sum()
}

/// Maximum null-model log-likelihood n[ȳ ln ȳ + (1 − ȳ) ln(1 − ȳ)].
pub fn null_log_likelihood(trials: &[Trial]) -> f64 {
    let n = trials.len() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let n1 = trials.iter().filter(|t| t.y).count() as f64;
    let n0 = n - n1;
    let mut v = 0.0;
    if n1 > 0.0 {
        v += n1 * (n1 / n).ln();
    }
    if n0 > 0.0 {
        v += n0 * (n0 / n).ln();
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapClass {
    Interval,
    Point,
    None,
}

/// Zone-of-mixed-results summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapSummary {
    /// Smallest stimulus with a response.
    pub m1: Option<f64>,
    /// Largest stimulus without a response.
    pub m0: Option<f64>,
    /// mean(X | Y=1) − mean(X | Y=0).
    pub delta: Option<f64>,
    pub class: OverlapClass,
}

impl OverlapSummary {
    pub fn zmr(&self) -> Option<(f64, f64)> {
        match (self.m1, self.m0) {
            (Some(a), Some(b)) if a <= b => Some((a, b)),
            _ => None,
        }
    }

    pub fn has_interval_overlap(&self) -> bool {
        self.class == OverlapClass::Interval
    }

    /// The finite-sigma precondition for entering the refinement phases.
    pub fn admits_finite_sigma(&self) -> bool {
        self.class == OverlapClass::Interval && self.delta.is_some_and(|d| d > 0.0)
    }
}

pub fn classify_overlap(trials: &[Trial]) -> OverlapSummary {
    let mut m1 = f64::INFINITY;
    let mut m0 = f64::NEG_INFINITY;
    let (mut s1, mut s0, mut n1, mut n0) = (0.0, 0.0, 0usize, 0usize);
    for t in trials {
        if t.y {
            m1 = m1.min(t.x);
            s1 += t.x;
            n1 += 1;
        } else {
            m0 = m0.max(t.x);
            s0 += t.x;
            n0 += 1;
        }
    }
    if n1 == 0 || n0 == 0 {
        return OverlapSummary {
            m1: (n1 > 0).then_some(m1),
            m0: (n0 > 0).then_some(m0),
            delta: None,
            class: OverlapClass::None,
        };
    }
    let class = if m1 < m0 {
        OverlapClass::Interval
    } else if m1 == m0 {
        OverlapClass::Point
    } else {
        OverlapClass::None
    };
    OverlapSummary {
        m1: Some(m1),
        m0: Some(m0),
        delta: Some(s1 / n1 as f64 - s0 / n0 as f64),
        class,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MleStatus {
    IntervalOverlap,
    PointOverlap,
    NoOverlap,
    InfiniteSigma,
}

/// Probit fit. `sig` is 0 for point/no overlap and +∞ for infinite sigma;
/// `mu` is then a descriptive centre rather than an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub mu: f64,
    pub sig: f64,
    /// Maximum full-model log-likelihood (M_FULL).
    pub maxll: f64,
    /// Maximum null-model log-likelihood (M_NULL).
    pub maxlc: f64,
    pub status: MleStatus,
    pub iterations: usize,
}

impl MleResult {
    pub fn is_finite(&self) -> bool {
        self.status == MleStatus::IntervalOverlap
    }
}

/// R-compatible stopping rule used for all sequential recommendations.
pub const GLM_EPSILON: f64 = 1e-8;
pub const GLM_MAXIT: usize = 25;

/// Probit MLE with the stopping rule of the reference fitter, which the
/// published traces depend on at the 1e-6 level.
pub fn fit_mle(trials: &[Trial]) -> MleResult {
    fit_mle_with(trials, GLM_EPSILON, GLM_MAXIT)
}

/// Probit MLE iterated to (near) machine precision.
pub fn fit_mle_precise(trials: &[Trial]) -> MleResult {
    fit_mle_with(trials, 1e-15, 500)
}

pub fn fit_mle_with(trials: &[Trial], epsilon: f64, maxit: usize) -> MleResult {
    let maxlc = null_log_likelihood(trials);
    let ov = classify_overlap(trials);
    let mean_x = if trials.is_empty() {
        f64::NAN
    } else {
        trials.iter().map(|t| t.x).sum::<f64>() / trials.len() as f64
    };
    let degenerate = |mu: f64, sig: f64, maxll: f64, status| MleResult {
        mu,
        sig,
        maxll,
        maxlc,
        status,
        iterations: 0,
    };
    let (m1, m0, delta) = match (ov.m1, ov.m0, ov.delta) {
        (Some(a), Some(b), Some(d)) => (a, b, d),
        _ => return degenerate(mean_x, 0.0, 0.0, MleStatus::NoOverlap),
    };
    if ov.class == OverlapClass::None {
        return degenerate(0.5 * (m1 + m0), 0.0, 0.0, MleStatus::NoOverlap);
    }
    if delta <= 0.0 {
        return degenerate(mean_x, f64::INFINITY, maxlc, MleStatus::InfiniteSigma);
    }
    if ov.class == OverlapClass::Point {
        // Supremum as sig -> 0 at the shared stimulus: only tied trials count.
        let tied: Vec<Trial> = trials.iter().copied().filter(|t| t.x == m1).collect();
        return degenerate(m1, 0.0, null_log_likelihood(&tied), MleStatus::PointOverlap);
    }
    match probit_irls(trials, epsilon, maxit) {
        Some((a, b, it)) if b > 0.0 && b.is_finite() => {
            let mu = -a / b;
            let sig = 1.0 / b;
            MleResult {
                mu,
                sig,
                maxll: log_likelihood(trials, mu, sig),
                maxlc,
                status: MleStatus::IntervalOverlap,
                iterations: it,
            }
        }
        _ => degenerate(mean_x, f64::INFINITY, maxlc, MleStatus::InfiniteSigma),
    }
}

/// Fisher scoring for y ~ Φ(a + b x), mirroring glm.fit's probit path.
fn probit_irls(trials: &[Trial], epsilon: f64, maxit: usize) -> Option<(f64, f64, usize)> {
    let eps = f64::EPSILON;
    let thresh = -qnorm(eps);
    let n = trials.len();
    let mut mu: Vec<f64> = trials.iter().map(|t| (t.yf() + 0.5) / 2.0).collect();
    let mut eta: Vec<f64> = mu.iter().map(|&m| qnorm(m)).collect();
    let deviance = |mu: &[f64]| -> f64 {
        -2.0 * trials
            .iter()
            .zip(mu)
            .map(|(t, &m)| if t.y { m.ln() } else { (1.0 - m).ln() })
            .sum::<f64>()
    };
    let mut devold = deviance(&mu);
    let mut coef = (0.0, 0.0);
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];
    for it in 1..=maxit {
        for i in 0..n {
            let me = dnorm(eta[i]).max(eps);
            z[i] = eta[i] + (trials[i].yf() - mu[i]) / me;
            w[i] = me * me / (mu[i] * (1.0 - mu[i]));
        }
        coef = weighted_line(trials, &z, &w)?;
        for i in 0..n {
            eta[i] = coef.0 + coef.1 * trials[i].x;
            mu[i] = pnorm(eta[i].clamp(-thresh, thresh));
        }
        let dev = deviance(&mu);
        if !dev.is_finite() {
            return None;
        }
        if (dev - devold).abs() / (dev.abs() + 0.1) < epsilon {
            return Some((coef.0, coef.1, it));
        }
        devold = dev;
    }
    Some((coef.0, coef.1, maxit))
}

/// Weighted least-squares line z ≈ a + b x, solved in centred form.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN sums
fn weighted_line(trials: &[Trial], z: &[f64], w: &[f64]) -> Option<(f64, f64)> {
    let sw: f64 = w.iter().sum();
    if !(sw > 0.0) {
        return None;
    }
    let xb = trials.iter().zip(w).map(|(t, wi)| wi * t.x).sum::<f64>() / sw;
    let zb = z.iter().zip(w).map(|(zi, wi)| wi * zi).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxz = 0.0;
    for ((t, zi), wi) in trials.iter().zip(z).zip(w) {
        let dx = t.x - xb;
        sxx += wi * dx * dx;
        sxz += wi * dx * (zi - zb);
    }
    if !(sxx > 0.0) {
        return None;
    }
    let b = sxz / sxx;
    Some((zb - b * xb, b))
}

/// Expected information for (μ, σ) in the standardized parametrization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoMatrix {
    pub b11: f64,
    pub b12: f64,
    pub b22: f64,
    /// b⁻¹, when b is invertible. Multiply by σ² for the (μ, σ) covariance.
    pub vcov: Option<[[f64; 2]; 2]>,
}

impl InfoMatrix {
    pub fn det(&self) -> f64 {
        self.b11 * self.b22 - self.b12 * self.b12
    }
}

pub fn info_matrix(trials: &[Trial], mu: f64, sig: f64) -> InfoMatrix {
    let (mut b11, mut b12, mut b22) = (0.0, 0.0, 0.0);
    for t in trials {
        let k = (t.x - mu) / sig;
        let g = g2(k);
        b11 += g;
        b12 += g * k;
        b22 += g * k * k;
    }
    let det = b11 * b22 - b12 * b12;
    let scale = b11.abs().max(b22.abs()).max(f64::MIN_POSITIVE);
    let vcov = (det.is_finite() && det > 1e-14 * scale * scale)
        .then(|| [[b22 / det, -b12 / det], [-b12 / det, b11 / det]]);
    InfoMatrix { b11, b12, b22, vcov }
}

/// The D-optimality criterion h(k) = G²(k)(b11 k² − 2 b12 k + b22).
pub fn dopt_criterion(b: &InfoMatrix, k: f64) -> f64 {
    let v = g2(k) * (b.b11 * k * k - 2.0 * b.b12 * k + b.b22);
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

const KSTAR_LIMIT: f64 = 8.0;
const KSTAR_STEP: f64 = 1e-3;

/// Global maximiser of [`dopt_criterion`]: coarse scan then golden section.
/// Symmetric ties resolve to the positive root.
pub fn kstar(b: &InfoMatrix) -> f64 {
    // G² does not depend on the data, so the scan grid is computed once.
    static GRID: std::sync::OnceLock<Vec<(f64, f64)>> = std::sync::OnceLock::new();
    let grid = GRID.get_or_init(|| {
        let n = (2.0 * KSTAR_LIMIT / KSTAR_STEP).round() as usize;
        (0..=n)
            .map(|i| {
                let k = -KSTAR_LIMIT + i as f64 * KSTAR_STEP;
                (k, g2(k))
            })
            .collect()
    });
    let h_at = |&(k, g): &(f64, f64)| {
        let h = g * (b.b11 * k * k - 2.0 * b.b12 * k + b.b22);
        if h.is_finite() {
            h
        } else {
            0.0
        }
    };
    let best_h = grid.iter().map(h_at).fold(f64::NEG_INFINITY, f64::max);
    // Peaks equal up to rounding count as ties and go to the most positive k,
    // so mirror-symmetric data give the same choice at every scale.
    let tie = best_h - 1e-10 * best_h.abs();
    let best_i = grid.iter().rposition(|g| h_at(g) >= tie).unwrap_or(0);
    let k0 = -KSTAR_LIMIT + best_i as f64 * KSTAR_STEP;
    let lo = (k0 - KSTAR_STEP).max(-KSTAR_LIMIT);
    let hi = (k0 + KSTAR_STEP).min(KSTAR_LIMIT);
    let k = golden_max(|k| dopt_criterion(b, k), lo, hi, 1e-13);
    if b.b12 == 0.0 {
        k.abs()
    } else {
        k
    }
}

/// Golden-section maximisation of a unimodal function on [lo, hi].
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut width = f64::INFINITY;
    // The second test stops once rounding keeps the bracket from shrinking,
    // which happens when `tol` is below the spacing of doubles near lo.
    while (hi - lo).abs() > tol && (hi - lo).abs() < width {
        width = (hi - lo).abs();
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Bisection root of a continuous function with a sign change on [lo, hi].
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo).abs() < tol {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Isotonic (pooled adjacent violators) fit of P(Y=1) against stimulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PavFit {
    /// Distinct stimuli, ascending.
    pub stimuli: Vec<f64>,
    /// Fitted probability at each stimulus, nondecreasing.
    pub levels: Vec<f64>,
    /// Number of trials at each stimulus.
    pub counts: Vec<usize>,
}

pub fn pav(trials: &[Trial]) -> PavFit {
    let mut sorted: Vec<Trial> = trials.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut stimuli = Vec::new();
    let mut counts = Vec::new();
    let mut sums = Vec::new();
    for t in &sorted {
        if stimuli.last() == Some(&t.x) {
            *counts.last_mut().unwrap() += 1;
            *sums.last_mut().unwrap() += t.yf();
        } else {
            stimuli.push(t.x);
            counts.push(1usize);
            sums.push(t.yf());
        }
    }
    // Blocks as (sum, weight, number of stimuli covered).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new();
    for (s, &c) in sums.iter().zip(&counts) {
        blocks.push((*s, c as f64, 1));
        while blocks.len() > 1 {
            let (s2, w2, n2) = blocks[blocks.len() - 1];
            let (s1, w1, n1) = blocks[blocks.len() - 2];
            if s1 / w1 > s2 / w2 {
                blocks.pop();
                *blocks.last_mut().unwrap() = (s1 + s2, w1 + w2, n1 + n2);
            } else {
                break;
            }
        }
    }
    let mut levels = Vec::with_capacity(stimuli.len());
    for (s, w, n) in blocks {
        levels.extend(std::iter::repeat_n(s / w, n));
    }
    PavFit {
        stimuli,
        levels,
        counts,
    }
}
