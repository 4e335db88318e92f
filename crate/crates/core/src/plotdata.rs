//! Data series behind the eight standard plots, plus a small deterministic
//! SVG renderer. Series are plain data so other front ends can draw them.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::confidence::{
    al49, fm_limits, glm_limits, lr_individual_limits, lr_joint_contour, ConfidenceRow, LrContour,
    Method,
};
use crate::error::{Error, Result};
use crate::numerics::{classify_overlap, fit_mle, pav, pnorm, qnorm, Trial};
use crate::session::{fmt_num, TestSession};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PlotKind {
    History,
    MleTrajectory,
    ResponseCurveCi,
    SimpleVisual,
    JointLr,
    JointPlusIndividualLr,
    LrBounds,
    LinearizedTrimethod,
}

impl PlotKind {
    pub const ALL: [PlotKind; 8] = [
        PlotKind::History,
        PlotKind::MleTrajectory,
        PlotKind::ResponseCurveCi,
        PlotKind::SimpleVisual,
        PlotKind::JointLr,
        PlotKind::JointPlusIndividualLr,
        PlotKind::LrBounds,
        PlotKind::LinearizedTrimethod,
    ];

    /// Plot number 1 to 8.
    pub fn from_index(i: u32) -> Option<Self> {
        Self::ALL.get((i as usize).checked_sub(1)?).copied()
    }

    pub fn index(self) -> u32 {
        Self::ALL.iter().position(|&k| k == self).unwrap() as u32 + 1
    }

    pub fn slug(self) -> &'static str {
        match self {
            PlotKind::History => "history",
            PlotKind::MleTrajectory => "mle-trajectory",
            PlotKind::ResponseCurveCi => "response-curve-ci",
            PlotKind::SimpleVisual => "simple-visual",
            PlotKind::JointLr => "joint-lr",
            PlotKind::JointPlusIndividualLr => "joint-plus-individual-lr",
            PlotKind::LrBounds => "lr-bounds",
            PlotKind::LinearizedTrimethod => "linearized-trimethod",
        }
    }
}

impl std::str::FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(i) = s.parse::<u32>() {
            return PlotKind::from_index(i).ok_or_else(|| Error::Input(format!("no plot {i}")));
        }
        let norm = s.to_ascii_lowercase().replace('_', "-");
        PlotKind::ALL
            .into_iter()
            .find(|k| k.slug() == norm)
            .ok_or_else(|| Error::Input(format!("unknown plot kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerStyle {
    Points,
    Line,
    Dashed,
    Step,
    VLine,
    HLine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub name: String,
    pub style: LayerStyle,
    /// Colour name or hex string; cosmetic only.
    pub color: String,
    pub points: Vec<[f64; 2]>,
}

impl Layer {
    fn new(name: impl Into<String>, style: LayerStyle, color: &str, points: Vec<[f64; 2]>) -> Self {
        Layer {
            name: name.into(),
            style,
            color: color.into(),
            points: points.into_iter().filter(|p| p[0].is_finite() && p[1].is_finite()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub kind: PlotKind,
    pub title: String,
    pub about: String,
    pub x_label: String,
    pub y_label: String,
    pub layers: Vec<Layer>,
    /// Notes about layers that could not be produced (e.g. unbounded LR).
    #[serde(default)]
    pub notes: Vec<String>,
}

impl PlotSeries {
    pub fn layer(&self, name: &str) -> Option<&Layer> {
        self.layers.iter().find(|l| l.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotOptions {
    pub conf: f64,
    /// Selector for the response-curve plot: which intervals (p, q or both)
    /// and which methods.
    pub j: u32,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub confs: Vec<f64>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            conf: 0.95,
            j: 15,
            p: None,
            q: None,
            confs: vec![0.5, 0.8, 0.9, 0.95],
        }
    }
}

/// Which intervals a response-curve selector asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interval {
    P,
    Q,
    Both,
}

/// The fifteen response-curve selectors.
pub fn j_code(j: u32) -> Result<(Interval, &'static [Method])> {
    use Method::*;
    const FM: &[Method] = &[Fm];
    const LR: &[Method] = &[Lr];
    const GLM: &[Method] = &[Glm];
    const FM_LR: &[Method] = &[Fm, Lr];
    const FM_GLM: &[Method] = &[Fm, Glm];
    const LR_GLM: &[Method] = &[Lr, Glm];
    const ALL: &[Method] = &[Fm, Lr, Glm];
    Ok(match j {
        1 => (Interval::P, FM),
        2 => (Interval::Q, FM),
        3 => (Interval::Both, FM),
        4 => (Interval::Both, LR),
        5 => (Interval::P, GLM),
        6 => (Interval::Q, GLM),
        7 => (Interval::Both, GLM),
        8 => (Interval::P, FM_LR),
        9 => (Interval::Q, FM_LR),
        10 => (Interval::P, FM_GLM),
        11 => (Interval::Q, FM_GLM),
        12 => (Interval::P, LR_GLM),
        13 => (Interval::Q, LR_GLM),
        14 => (Interval::P, ALL),
        15 => (Interval::Q, ALL),
        _ => return Err(Error::Input(format!("J must be 1..15, got {j}"))),
    })
}

fn method_color(m: Method) -> &'static str {
    match m {
        Method::Fm => "#d62728",
        Method::Lr => "#1f77b4",
        Method::Glm => "#2ca02c",
    }
}

fn method_rows(m: Method, trials: &[Trial], conf: f64, ps: &[f64], qs: &[f64]) -> Result<Vec<ConfidenceRow>> {
    match m {
        Method::Fm => fm_limits(trials, conf, ps, qs),
        Method::Glm => glm_limits(trials, conf, ps, qs),
        Method::Lr => {
            let c = lr_joint_contour(trials, conf)?;
            lr_individual_limits(trials, &c, ps, qs)
        }
    }
}

fn about(s: &TestSession) -> String {
    let c = &s.config().phase1;
    let (p, lam) = s.p_lam().unwrap_or((0.0, 0.0));
    format!(
        "{{{},{},{} {},{},{} {},{},{}}}",
        fmt_num(c.mlo),
        fmt_num(c.mhi),
        fmt_num(c.sg),
        s.phase1_len(),
        s.n2().unwrap_or(0),
        s.n3().unwrap_or(0),
        fmt_num(p),
        fmt_num(lam),
        fmt_num(s.config().reso)
    )
}

fn title(s: &TestSession) -> String {
    let name = s.config().phase1.procedure.name();
    if s.config().title.is_empty() {
        name.to_string()
    } else {
        format!("{name}: {}", s.config().title)
    }
}

fn stim_label(s: &TestSession) -> String {
    let u = &s.config().units;
    let base = if u.is_empty() { "Stimulus".to_string() } else { format!("Stimulus ({u})") };
    if s.scale().log_scale {
        format!("log {base}")
    } else {
        base
    }
}

fn need_finite(trials: &[Trial]) -> Result<()> {
    if fit_mle(trials).is_finite() {
        Ok(())
    } else {
        Err(Error::Estimate("this plot needs a finite MLE (interval overlap)".into()))
    }
}

/// Builds the series for one plot kind.
pub fn series(s: &TestSession, kind: PlotKind, opt: &PlotOptions) -> Result<PlotSeries> {
    let trials = s.trials();
    let mut out = PlotSeries {
        kind,
        title: title(s),
        about: about(s),
        x_label: String::new(),
        y_label: String::new(),
        layers: Vec::new(),
        notes: Vec::new(),
    };
    let p_of_interest = opt.p.or(s.p_lam().map(|(p, _)| p));
    match kind {
        PlotKind::History => history(s, p_of_interest, &mut out),
        PlotKind::MleTrajectory => trajectory(trials, p_of_interest, &mut out),
        PlotKind::ResponseCurveCi => {
            need_finite(trials)?;
            response_curve(trials, opt, &mut out)?;
            out.x_label = stim_label(s);
        }
        PlotKind::SimpleVisual => {
            simple_visual(trials, &mut out);
            out.x_label = stim_label(s);
        }
        PlotKind::JointLr => joint(trials, &opt.confs, None, None, &mut out)?,
        PlotKind::JointPlusIndividualLr => joint(trials, &opt.confs, opt.p, opt.q, &mut out)?,
        PlotKind::LrBounds => {
            need_finite(trials)?;
            lr_bounds(trials, opt, &mut out)?;
        }
        PlotKind::LinearizedTrimethod => {
            need_finite(trials)?;
            linearized(trials, opt.conf, &mut out)?;
            out.x_label = stim_label(s);
        }
    }
    Ok(out)
}

fn history(s: &TestSession, p: Option<f64>, out: &mut PlotSeries) {
    out.x_label = "Run".into();
    out.y_label = if s.config().units.is_empty() {
        "Stimulus".into()
    } else {
        format!("Stimulus ({})", s.config().units)
    };
    let recs = s.records();
    let pts = |y: u8| -> Vec<[f64; 2]> {
        recs.iter()
            .enumerate()
            .filter(|(_, r)| r.y == y)
            .map(|(i, r)| [(i + 1) as f64, r.tx])
            .collect()
    };
    out.layers.push(Layer::new("response", LayerStyle::Points, "#d62728", pts(1)));
    out.layers.push(Layer::new("non-response", LayerStyle::Points, "#1f77b4", pts(0)));
    // Phase boundaries: the run after which each phase ends.
    let n1 = s.phase1_len().min(recs.len());
    let n12 = recs.iter().filter(|r| !r.id.starts_with("III")).count();
    let mut bounds = Vec::new();
    if n1 > 0 && n1 < recs.len() {
        bounds.push([n1 as f64 + 0.5, 0.0]);
    }
    if n12 > n1 && n12 < recs.len() {
        bounds.push([n12 as f64 + 0.5, 0.0]);
    }
    out.layers.push(Layer::new("phase-boundaries", LayerStyle::VLine, "#7f7f7f", bounds));
    let next = match (s.terminal(), s.prompt()) {
        (Some(t), _) => Some(s.scale().to_user(t_next(s, t.rx))),
        (None, crate::session::Prompt::Pair { rx, .. }) => Some(rx),
        _ => None,
    };
    if let Some(x) = next {
        out.layers.push(Layer::new("next", LayerStyle::Points, "#000000", vec![[(recs.len() + 1) as f64, x]]));
    }
    if let Some(p) = p {
        let f = fit_mle(s.trials());
        if f.is_finite() && p > 0.0 && p < 1.0 {
            let lp = s.scale().to_user(f.mu + qnorm(p) * f.sig);
            out.layers.push(Layer::new(
                format!("L{}", fmt_num(p)),
                LayerStyle::HLine,
                "#9467bd",
                vec![[0.0, lp]],
            ));
        }
    }
}

/// The terminal row's RX is on the analysis scale.
fn t_next(s: &TestSession, rx: f64) -> f64 {
    if s.scale().log_scale {
        rx
    } else {
        s.scale().to_analysis(rx)
    }
}

/// Per-run (μ̂, σ̂, L̂p) from the first run where the fit is finite.
pub fn mle_trajectory(trials: &[Trial], p: Option<f64>) -> Vec<(usize, f64, f64, Option<f64>)> {
    let zp = p.filter(|p| *p > 0.0 && *p < 1.0).map(qnorm);
    let mut out = Vec::new();
    for n in 1..=trials.len() {
        let f = fit_mle(&trials[..n]);
        if f.is_finite() {
            out.push((n, f.mu, f.sig, zp.map(|z| f.mu + z * f.sig)));
        } else if !out.is_empty() {
            // Keep the trajectory contiguous once it has started.
            continue;
        }
    }
    out
}

fn trajectory(trials: &[Trial], p: Option<f64>, out: &mut PlotSeries) {
    out.x_label = "Run".into();
    out.y_label = "Estimate".into();
    let t = mle_trajectory(trials, p);
    out.layers.push(Layer::new("mu", LayerStyle::Line, "#1f77b4", t.iter().map(|r| [r.0 as f64, r.1]).collect()));
    out.layers.push(Layer::new("sigma", LayerStyle::Line, "#ff7f0e", t.iter().map(|r| [r.0 as f64, r.2]).collect()));
    if p.is_some() {
        out.layers.push(Layer::new(
            "lp",
            LayerStyle::Line,
            "#2ca02c",
            t.iter().filter_map(|r| r.3.map(|l| [r.0 as f64, l])).collect(),
        ));
    }
    if t.is_empty() {
        out.notes.push("no run with a finite estimate".into());
    }
}

fn data_ticks(trials: &[Trial], lo: f64, hi: f64, out: &mut PlotSeries) {
    let (above, below): (Vec<&Trial>, Vec<&Trial>) = trials.iter().partition(|t| t.y);
    out.layers.push(Layer::new("data-y1", LayerStyle::Points, "#d62728", above.iter().map(|t| [t.x, hi]).collect()));
    out.layers.push(Layer::new("data-y0", LayerStyle::Points, "#1f77b4", below.iter().map(|t| [t.x, lo]).collect()));
}

fn q_grid(trials: &[Trial], n: usize) -> Vec<f64> {
    let f = fit_mle(trials);
    let lo = f.mu - 4.0 * f.sig;
    let hi = f.mu + 4.0 * f.sig;
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn response_curve(trials: &[Trial], opt: &PlotOptions, out: &mut PlotSeries) -> Result<()> {
    out.y_label = "Probability of response".into();
    let (which, methods) = j_code(opt.j)?;
    let f = fit_mle(trials);
    let pv = pav(trials);
    let mut step = Vec::new();
    for (i, (&x, &l)) in pv.stimuli.iter().zip(&pv.levels).enumerate() {
        if i > 0 {
            step.push([x, pv.levels[i - 1]]);
        }
        step.push([x, l]);
    }
    out.layers.push(Layer::new("pav", LayerStyle::Step, "#7f7f7f", step));
    let qs = q_grid(trials, 121);
    out.layers.push(Layer::new(
        "fit",
        LayerStyle::Line,
        "#000000",
        qs.iter().map(|&q| [q, pnorm((q - f.mu) / f.sig)]).collect(),
    ));
    let ps = al49();
    for &m in methods {
        let color = method_color(m);
        let tag = m.name();
        if matches!(which, Interval::Q | Interval::Both) {
            match method_rows(m, trials, opt.conf, &ps, &[]) {
                Ok(rows) => {
                    out.layers.push(Layer::new(format!("{tag}-q-lower"), LayerStyle::Line, color, rows.iter().map(|r| [r.q_l, r.p]).collect()));
                    out.layers.push(Layer::new(format!("{tag}-q-upper"), LayerStyle::Line, color, rows.iter().map(|r| [r.q_u, r.p]).collect()));
                    let marks = method_rows(m, trials, opt.conf, &[0.25, 0.75], &[])?;
                    out.layers.push(Layer::new(
                        format!("{tag}-marks"),
                        LayerStyle::Points,
                        color,
                        marks.iter().flat_map(|r| [[r.q_l, r.p], [r.q_u, r.p]]).collect(),
                    ));
                }
                Err(e) => out.notes.push(format!("{tag}: {e}")),
            }
        }
        if matches!(which, Interval::P | Interval::Both) {
            match method_rows(m, trials, opt.conf, &[], &qs) {
                Ok(rows) => {
                    out.layers.push(Layer::new(format!("{tag}-p-lower"), LayerStyle::Line, color, rows.iter().map(|r| [r.q, r.p_l]).collect()));
                    out.layers.push(Layer::new(format!("{tag}-p-upper"), LayerStyle::Line, color, rows.iter().map(|r| [r.q, r.p_u]).collect()));
                }
                Err(e) => out.notes.push(format!("{tag}: {e}")),
            }
        }
    }
    data_ticks(trials, -0.05, 1.05, out);
    Ok(())
}

fn simple_visual(trials: &[Trial], out: &mut PlotSeries) {
    out.y_label = "Response".into();
    data_ticks(trials, 0.0, 1.0, out);
    let ov = classify_overlap(trials);
    let mut v = Vec::new();
    if let Some(m1) = ov.m1 {
        v.push([m1, 0.0]);
    }
    if let Some(m0) = ov.m0 {
        v.push([m0, 0.0]);
    }
    out.layers.push(Layer::new("zmr", LayerStyle::VLine, "#7f7f7f", v));
}

fn contour_layers(c: &LrContour, out: &mut PlotSeries) {
    let mut pts: Vec<[f64; 2]> = c.boundary.iter().map(|&(m, s)| [m, s]).collect();
    if c.bounded {
        if let Some(&first) = pts.first() {
            pts.push(first);
        }
    }
    out.layers.push(Layer::new(format!("joint-{}", fmt_num(c.c)), LayerStyle::Line, "#1f77b4", pts));
}

fn joint(trials: &[Trial], confs: &[f64], p: Option<f64>, q: Option<f64>, out: &mut PlotSeries) -> Result<()> {
    out.x_label = "mu".into();
    out.y_label = "sigma".into();
    if confs.is_empty() {
        return Err(Error::Input("give at least one confidence level".into()));
    }
    let mut contours = Vec::new();
    for &c in confs {
        contours.push(lr_joint_contour(trials, c)?);
    }
    for c in &contours {
        contour_layers(c, out);
        if !c.bounded {
            out.notes.push(format!("C = {} >= Cmax = {:.6}: region is unbounded", fmt_num(c.c), c.cmax));
        }
    }
    let c0 = &contours[0];
    if c0.sig_hat.is_finite() && c0.sig_hat > 0.0 {
        out.layers.push(Layer::new("mle", LayerStyle::Points, "#000000", vec![[c0.mu_hat, c0.sig_hat]]));
    }
    // Asymptote σ = m0·μ + b0 across the plotted μ range.
    let (lo, hi) = contours
        .iter()
        .flat_map(|c| c.boundary.iter().map(|&(m, _)| m))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), m| (a.min(m), b.max(m)));
    if c0.m0.is_finite() && lo.is_finite() {
        out.layers.push(Layer::new(
            "asymptote",
            LayerStyle::Dashed,
            "#7f7f7f",
            vec![[lo, c0.m0 * lo + c0.b0], [hi, c0.m0 * hi + c0.b0]],
        ));
    }
    for c in &contours {
        if let Some(p) = p {
            let z = qnorm(p);
            out.layers.push(Layer::new(
                format!("s-vs-q-{}", fmt_num(c.c)),
                LayerStyle::Line,
                "#ff7f0e",
                c.boundary.iter().map(|&(m, s)| [m + z * s, s]).collect(),
            ));
        }
        if let Some(q) = q {
            out.layers.push(Layer::new(
                format!("s-vs-p-{}", fmt_num(c.c)),
                LayerStyle::Line,
                "#2ca02c",
                c.boundary.iter().map(|&(m, s)| [pnorm((q - m) / s), s]).collect(),
            ));
        }
    }
    Ok(())
}

fn lr_bounds(trials: &[Trial], opt: &PlotOptions, out: &mut PlotSeries) -> Result<()> {
    if opt.p.is_some() == opt.q.is_some() {
        return Err(Error::Input("give exactly one of p or q".into()));
    }
    let c = lr_joint_contour(trials, opt.conf)?;
    if !c.bounded {
        return Err(Error::Estimate(format!(
            "C = {} >= Cmax = {:.6}: individual LR bounds need a bounded region",
            fmt_num(opt.conf),
            c.cmax
        )));
    }
    out.y_label = "sigma".into();
    contour_layers(&c, out);
    if let Some(p) = opt.p {
        out.x_label = "q".into();
        let z = qnorm(p);
        out.layers.push(Layer::new("s-vs-q", LayerStyle::Line, "#ff7f0e", c.boundary.iter().map(|&(m, s)| [m + z * s, s]).collect()));
        let r = lr_individual_limits(trials, &c, &[p], &[])?[0];
        out.layers.push(Layer::new("limits", LayerStyle::VLine, "#d62728", vec![[r.q_l, 0.0], [r.q_u, 0.0]]));
    }
    if let Some(q) = opt.q {
        out.x_label = "p".into();
        out.layers.push(Layer::new(
            "s-vs-p",
            LayerStyle::Line,
            "#2ca02c",
            c.boundary.iter().map(|&(m, s)| [pnorm((q - m) / s), s]).collect(),
        ));
        let r = lr_individual_limits(trials, &c, &[], &[q])?[0];
        out.layers.push(Layer::new("limits", LayerStyle::VLine, "#d62728", vec![[r.p_l, 0.0], [r.p_u, 0.0]]));
    }
    Ok(())
}

fn linearized(trials: &[Trial], conf: f64, out: &mut PlotSeries) -> Result<()> {
    out.y_label = "qnorm(p)".into();
    let f = fit_mle(trials);
    let ps = al49();
    out.layers.push(Layer::new(
        "fit",
        LayerStyle::Line,
        "#000000",
        ps.iter().map(|&p| [f.mu + qnorm(p) * f.sig, qnorm(p)]).collect(),
    ));
    for m in [Method::Fm, Method::Lr, Method::Glm] {
        let tag = m.name();
        match method_rows(m, trials, conf, &ps, &[]) {
            Ok(rows) => {
                let color = method_color(m);
                out.layers.push(Layer::new(format!("{tag}-q-lower"), LayerStyle::Line, color, rows.iter().map(|r| [r.q_l, qnorm(r.p)]).collect()));
                out.layers.push(Layer::new(format!("{tag}-q-upper"), LayerStyle::Line, color, rows.iter().map(|r| [r.q_u, qnorm(r.p)]).collect()));
            }
            Err(e) => out.notes.push(format!("{tag}: {e}")),
        }
    }
    Ok(())
}

/// Layers whose points are individual test results.
const TRIAL_LAYERS: [&str; 4] = ["response", "non-response", "data-y1", "data-y0"];

const W: f64 = 640.0;
const H: f64 = 420.0;
const ML: f64 = 64.0;
const MR: f64 = 20.0;
const MT: f64 = 40.0;
const MB: f64 = 50.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders a series as a standalone SVG document. Output depends only on
/// the series.
pub fn render_svg(s: &PlotSeries) -> String {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for l in &s.layers {
        for p in &l.points {
            match l.style {
                LayerStyle::VLine => xs.push(p[0]),
                LayerStyle::HLine => ys.push(p[1]),
                _ => {
                    xs.push(p[0]);
                    ys.push(p[1]);
                }
            }
        }
    }
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo <= 0.0 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let px = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let py = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

    let mut o = String::new();
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(o, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(o, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(&s.title));
    // Axes with five ticks each.
    let _ = writeln!(
        o,
        r##"<g class="axes" stroke="#333" fill="none"><line x1="{ML}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{ML}" y1="{MT}" x2="{ML}" y2="{b}"/></g>"##,
        b = H - MB,
        r = W - MR
    );
    for i in 0..=4 {
        let xv = x0 + (x1 - x0) * i as f64 / 4.0;
        let yv = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            o,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(xv),
            H - MB + 16.0,
            esc(&fmt_tick(xv))
        );
        let _ = writeln!(
            o,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            ML - 6.0,
            py(yv) + 4.0,
            esc(&fmt_tick(yv))
        );
    }
    let _ = writeln!(o, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (ML + W - MR) / 2.0, H - 12.0, esc(&s.x_label));
    let _ = writeln!(
        o,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0,
        esc(&s.y_label)
    );
    for l in &s.layers {
        let name = esc(&l.name);
        let color = esc(&l.color);
        match l.style {
            LayerStyle::Points => {
                let class = if TRIAL_LAYERS.contains(&l.name.as_str()) { "trial" } else { "mark" };
                let _ = writeln!(o, r#"<g class="layer" data-name="{name}" fill="{color}">"#);
                for p in &l.points {
                    let _ = writeln!(o, r#"<circle class="{class}" cx="{:.2}" cy="{:.2}" r="3"/>"#, px(p[0]), py(p[1]));
                }
                let _ = writeln!(o, "</g>");
            }
            LayerStyle::Line | LayerStyle::Dashed | LayerStyle::Step => {
                if l.points.is_empty() {
                    continue;
                }
                let dash = if l.style == LayerStyle::Dashed { r#" stroke-dasharray="6 4""# } else { "" };
                let pts: Vec<String> = l.points.iter().map(|p| format!("{:.2},{:.2}", px(p[0]), py(p[1]))).collect();
                let _ = writeln!(
                    o,
                    r#"<polyline class="layer" data-name="{name}" fill="none" stroke="{color}"{dash} points="{}"/>"#,
                    pts.join(" ")
                );
            }
            LayerStyle::VLine => {
                for p in &l.points {
                    let _ = writeln!(
                        o,
                        r#"<line class="layer" data-name="{name}" x1="{x:.2}" y1="{MT}" x2="{x:.2}" y2="{b}" stroke="{color}" stroke-dasharray="4 3"/>"#,
                        x = px(p[0]),
                        b = H - MB
                    );
                }
            }
            LayerStyle::HLine => {
                for p in &l.points {
                    let _ = writeln!(
                        o,
                        r#"<line class="layer" data-name="{name}" x1="{ML}" y1="{y:.2}" x2="{r}" y2="{y:.2}" stroke="{color}" stroke-dasharray="4 3"/>"#,
                        y = py(p[1]),
                        r = W - MR
                    );
                }
            }
        }
    }
    o.push_str("</svg>\n");
    o
}

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        fmt_num((v * 1e4).round() / 1e4)
    }
}
