//! Phase II (D-optimal) and phase III (skewed Robbins-Monro-Joseph).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    dnorm, fit_mle, info_matrix, kstar, pnorm, qnorm, round_decimals, MleResult, Trial,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub n2: u32,
    pub n3: u32,
    pub p: f64,
    pub lam: f64,
}

/// Checks the phase-III parameters.
pub fn check_p_lam(p: f64, lam: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Input(format!("p = {p} is outside (0, 1)")));
    }
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(Error::Input(format!("lambda = {lam} must be positive")));
    }
    Ok(())
}

/// Centre and scale used by both refinement phases: μ̃ = median(xmin, xmax, μ̂),
/// σ̃ = min(σ̂, xmax − xmin).
pub fn truncated_centre(trials: &[Trial], fit: &MleResult) -> (f64, f64) {
    let xl = trials.iter().map(|t| t.x).fold(f64::INFINITY, f64::min);
    let xu = trials.iter().map(|t| t.x).fold(f64::NEG_INFINITY, f64::max);
    (xl.max(fit.mu.min(xu)), fit.sig.min(xu - xl))
}

/// Next D-optimal stimulus given a finite fit of `trials`.
pub fn doptimal_from_fit(trials: &[Trial], fit: &MleResult) -> f64 {
    let (mut_, sigt) = truncated_centre(trials, fit);
    let b = info_matrix(trials, mut_, sigt);
    mut_ + kstar(&b) * sigt
}

/// Next D-optimal stimulus (unrounded). Refuses degenerate fits.
pub fn doptimal_next(trials: &[Trial]) -> Result<f64> {
    let fit = fit_mle(trials);
    if !fit.is_finite() {
        return Err(Error::Estimate(format!(
            "no finite sigma ({:?}); D-optimal step unavailable",
            fit.status
        )));
    }
    Ok(doptimal_from_fit(trials, &fit))
}

/// Skew constant c₁(λ) = ln(λ)/√(2π); zero at the symmetric point λ = 1.
pub fn f3point8(lam: f64) -> f64 {
    lam.ln() / (2.0 * std::f64::consts::PI).sqrt()
}

/// One row of the phase-III recursion table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmjRow {
    pub j: f64,
    pub k: f64,
    pub v: f64,
    pub u: f64,
    pub a: f64,
    pub tau2: f64,
    pub nu: f64,
    pub b: f64,
    /// Stimulus this row recommends (unrounded).
    pub x: f64,
    /// Response observed at that stimulus, once known.
    pub y: Option<bool>,
    /// Set when v had to be pulled away from 0 or 1.
    #[serde(default)]
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmjState {
    pub p: f64,
    pub lam: f64,
    pub zp: f64,
    pub c1: f64,
    pub be: f64,
    pub mut_: f64,
    pub sigt: f64,
    /// The phase I+II fit the recursion was started from.
    pub fit: MleResult,
    pub rows: Vec<RmjRow>,
}

/// Lower and upper τ² clamp factors (multiples of σ̂²), rounded to 4 decimals.
pub fn tau2_clamp_factors(log_scale: bool) -> (f64, f64) {
    let z = qnorm(0.975);
    let q = if log_scale { z.exp() } else { z };
    (
        round_decimals((3.0 / q).powi(2), 4),
        round_decimals((5.0 / q).powi(2), 4),
    )
}

pub fn rmj_init(trials: &[Trial], p: f64, lam: f64, log_scale: bool) -> Result<RmjState> {
    check_p_lam(p, lam)?;
    let fit = fit_mle(trials);
    if !fit.is_finite() {
        return Err(Error::Estimate(format!(
            "no finite sigma ({:?}); phase III cannot start",
            fit.status
        )));
    }
    let zp = qnorm(p);
    let vc = info_matrix(trials, fit.mu, fit.sig)
        .vcov
        .ok_or_else(|| Error::Estimate("singular information matrix".into()))?;
    let (lo, hi) = tau2_clamp_factors(log_scale);
    let s2 = fit.sig * fit.sig;
    // vcov is the unscaled inverse; σ̂² puts it in stimulus units.
    let tau2 = (s2 * (vc[0][0] + zp * zp * vc[1][1])).max(lo * s2).min(hi * s2);
    let (mut_, sigt) = truncated_centre(trials, &fit);
    // The log-scale line p/(p·σ̃) reduces to 1/σ̃.
    let be = if log_scale { 1.0 / sigt } else { 1.0 / (2.0 * sigt) };
    let c1 = f3point8(lam);
    let nu = tau2.sqrt() * c1;
    let x = mut_ + zp * sigt + nu;
    Ok(RmjState {
        p,
        lam,
        zp,
        c1,
        be,
        mut_,
        sigt,
        fit,
        rows: vec![RmjRow {
            j: 0.0,
            k: 0.0,
            v: 0.0,
            u: 0.0,
            a: 0.0,
            tau2,
            nu,
            b: 0.0,
            x,
            y: None,
            clamped: false,
        }],
    })
}

impl RmjState {
    /// The pending recommendation (last row's x).
    pub fn next_x(&self) -> f64 {
        self.rows.last().expect("initialized").x
    }

    /// Records the response at the pending stimulus, which was actually run
    /// at `x_actual`, and appends the next row.
    pub fn step(&mut self, x_actual: f64, y: bool) -> f64 {
        let last = self.rows.last_mut().expect("initialized");
        last.y = Some(y);
        let (tau2, nu) = (last.tau2, last.nu);
        let be = self.be;
        let j = self.zp + be * nu;
        let k = (1.0 + be * be * tau2).sqrt();
        let mut v = pnorm(j / k);
        let eps = f64::EPSILON;
        let clamped = !(v > eps && v < 1.0 - eps);
        if clamped {
            v = v.clamp(eps, 1.0 - eps);
        }
        let u = be * tau2 * dnorm(j / k) / k + nu * v;
        let a = (u - nu * v) / (v * (1.0 - v));
        let ntau2 = a * a * v * (1.0 - v) - 2.0 * a * (u - nu * v) + tau2;
        let nnu = ntau2.max(0.0).sqrt() * self.c1;
        let b = v - (nu - nnu) / a;
        let yf = if y { 1.0 } else { 0.0 };
        let x = x_actual - a * (yf - b);
        self.rows.push(RmjRow {
            j,
            k,
            v,
            u,
            a,
            tau2: ntau2,
            nu: nnu,
            b,
            x,
            y: None,
            clamped,
        });
        x
    }
}

pub fn rmj_step(state: &mut RmjState, x_actual: f64, y: bool) -> f64 {
    state.step(x_actual, y)
}
