//! Phase-I search procedures as resumable step machines.
//!
//! Each machine owns its phase-I history. After every observation it either
//! recommends the next stimulus (with a stage label) or declares phase I
//! complete. All arithmetic is on the analysis scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{bisect, classify_overlap, info_matrix, kstar, OverlapClass, Trial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Procedure {
    ThreePod,
    Neyer,
    Bruceton,
    Langlie,
}

impl Procedure {
    /// Numeric code used on the command line (1..=4).
    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            1 => Some(Procedure::ThreePod),
            2 => Some(Procedure::Neyer),
            3 => Some(Procedure::Bruceton),
            4 => Some(Procedure::Langlie),
            _ => None,
        }
    }

    pub fn code(self) -> u32 {
        match self {
            Procedure::ThreePod => 1,
            Procedure::Neyer => 2,
            Procedure::Bruceton => 3,
            Procedure::Langlie => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Procedure::ThreePod => "3pod",
            Procedure::Neyer => "Neyer",
            Procedure::Bruceton => "Bruceton",
            Procedure::Langlie => "Langlie",
        }
    }

    pub fn is_udtr(self) -> bool {
        matches!(self, Procedure::Bruceton | Procedure::Langlie)
    }
}

/// Reversal target and the two UDTR rule indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bl {
    pub n_rev: u32,
    pub i1: u32,
    pub i2: u32,
}

impl Default for Bl {
    fn default() -> Self {
        Bl {
            n_rev: 4,
            i1: 1,
            i2: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase1Config {
    pub procedure: Procedure,
    pub mlo: f64,
    pub mhi: f64,
    pub sg: f64,
    #[serde(default = "default_true")]
    pub term1: bool,
    #[serde(default)]
    pub bl: Option<Bl>,
}

fn default_true() -> bool {
    true
}

impl Phase1Config {
    pub fn new(procedure: Procedure, mlo: f64, mhi: f64, sg: f64) -> Self {
        Phase1Config {
            procedure,
            mlo,
            mhi,
            sg,
            term1: true,
            bl: None,
        }
    }

    pub fn with_bl(mut self, n_rev: u32, i1: u32, i2: u32) -> Self {
        self.bl = Some(Bl { n_rev, i1, i2 });
        self
    }

    pub fn with_term1(mut self, term1: bool) -> Self {
        self.term1 = term1;
        self
    }

    /// The BL triple in effect (the default applies to UDTR procedures).
    pub fn effective_bl(&self) -> Bl {
        self.bl.unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        let Phase1Config { mlo, mhi, sg, .. } = *self;
        if !(mlo.is_finite() && mhi.is_finite() && sg.is_finite()) {
            return Err(Error::Config("mlo, mhi and sg must be finite".into()));
        }
        match self.procedure {
            Procedure::ThreePod | Procedure::Neyer => {
                if mlo >= mhi {
                    return Err(Error::Config("mlo must be less than mhi".into()));
                }
                if sg <= 0.0 {
                    return Err(Error::Config("sg must be positive".into()));
                }
            }
            Procedure::Bruceton => {
                if sg <= 0.0 {
                    return Err(Error::Config("sg must be positive".into()));
                }
                if mlo > mhi {
                    return Err(Error::Config("mlo must not exceed mhi".into()));
                }
            }
            Procedure::Langlie => {
                if mlo >= mhi {
                    return Err(Error::Config("lower limit must be less than upper limit".into()));
                }
            }
        }
        if self.procedure.is_udtr() {
            let bl = self.effective_bl();
            if bl.i1 == 0 && bl.i2 == 0 {
                return Err(Error::Config("BL needs at least one nonzero rule index".into()));
            }
            udtr_rule(bl.i1)?;
            udtr_rule(bl.i2)?;
        }
        Ok(())
    }
}

/// Up-down transformed-response rule. Strings are written in raw responses
/// ('1' = response, '0' = non-response).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UdtrRule {
    pub i: u32,
    pub down: Vec<String>,
    pub up: Vec<String>,
    /// Targeted response probability.
    pub p: f64,
    pub complemented: bool,
}

pub const UDTR_MAX_I: u32 = 8;

/// Rule `i` in its standard (p ≥ 0.5) form; `i = 0` is the empty slot.
pub fn udtr_rule(i: u32) -> Result<UdtrRule> {
    if i > UDTR_MAX_I {
        return Err(Error::Config(format!("UDTR rule {i} is not supported (max {UDTR_MAX_I})")));
    }
    if i == 0 {
        return Ok(UdtrRule {
            i,
            down: vec![],
            up: vec![],
            p: f64::NAN,
            complemented: false,
        });
    }
    let x = |n: u32| "1".repeat(n as usize);
    let (down, mut up, p);
    if i % 2 == 1 {
        let m = i.div_ceil(2);
        down = vec![x(m)];
        up = (0..m).map(|k| format!("{}0", x(k))).collect::<Vec<_>>();
        p = 2f64.powf(-1.0 / m as f64);
    } else {
        let m = i / 2;
        down = vec![x(m + 1), format!("{}01", x(m))];
        up = (0..m).map(|k| format!("{}0", x(k))).collect::<Vec<_>>();
        up.push(format!("{}00", x(m)));
        let e = (m + 1) as i32;
        p = bisect(|p| p.powi(e) * (2.0 - p) - 0.5, 0.5, 1.0, 1e-15).expect("bracketed");
    }
    Ok(UdtrRule {
        i,
        down,
        up,
        p,
        complemented: false,
    })
}

impl UdtrRule {
    /// Swaps response roles and directions; the target becomes 1 − p.
    pub fn complemented(&self) -> UdtrRule {
        let flip = |s: &String| -> String {
            s.chars().map(|c| if c == '1' { '0' } else { '1' }).collect()
        };
        UdtrRule {
            i: self.i,
            down: self.up.iter().map(flip).collect(),
            up: self.down.iter().map(flip).collect(),
            p: 1.0 - self.p,
            complemented: !self.complemented,
        }
    }

    pub fn classify(&self, group: &str) -> Option<Direction> {
        if self.down.iter().any(|s| s == group) {
            Some(Direction::Down)
        } else if self.up.iter().any(|s| s == group) {
            Some(Direction::Up)
        } else {
            None
        }
    }

    /// Display form such as "D = {1, 01, 001}, U = {000}, Lev = 0.206299".
    pub fn describe(&self) -> String {
        format!(
            "D = {{{}}}, U = {{{}}}, Lev = {:.6}",
            self.down.join(", "),
            self.up.join(", "),
            self.p
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::Up => "U",
            Direction::Down => "D",
        }
    }
}

/// The current output of a phase-I machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Phase1Step {
    Recommend { x: f64, label: String },
    Complete,
}

/// Resumable phase-I machine.
#[derive(Debug, Clone)]
pub struct Phase1 {
    cfg: Phase1Config,
    history: Vec<Trial>,
    labels: Vec<String>,
    step: Phase1Step,
    inner: Inner,
}

#[derive(Debug, Clone)]
enum Inner {
    Pod(PodState),
    Neyer,
    Udtr(UdtrState),
}

impl Phase1 {
    pub fn new(cfg: Phase1Config) -> Result<Self> {
        cfg.validate()?;
        let inner = match cfg.procedure {
            Procedure::ThreePod => Inner::Pod(PodState::new(cfg.sg)),
            Procedure::Neyer => Inner::Neyer,
            Procedure::Bruceton | Procedure::Langlie => Inner::Udtr(UdtrState::new(&cfg)?),
        };
        let mut m = Phase1 {
            cfg,
            history: Vec::new(),
            labels: Vec::new(),
            step: Phase1Step::Complete,
            inner,
        };
        m.advance();
        Ok(m)
    }

    pub fn config(&self) -> &Phase1Config {
        &self.cfg
    }

    pub fn step(&self) -> &Phase1Step {
        &self.step
    }

    pub fn is_complete(&self) -> bool {
        self.step == Phase1Step::Complete
    }

    pub fn history(&self) -> &[Trial] {
        &self.history
    }

    /// Stage labels for the phase-I rows; earlier labels may be revised
    /// (3pod learns its I1 case only after the second run).
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Rule descriptions for UDTR procedures, one per active test.
    pub fn udtr_rules(&self) -> Vec<UdtrRule> {
        match &self.inner {
            Inner::Udtr(u) => u.tests.clone(),
            _ => Vec::new(),
        }
    }

    /// Records an observation at stimulus `x` (which may differ from the
    /// recommendation) and advances.
    pub fn observe(&mut self, trial: Trial) -> Result<()> {
        let label = match &self.step {
            Phase1Step::Recommend { label, .. } => label.clone(),
            Phase1Step::Complete => return Err(Error::Input("phase I is already complete".into())),
        };
        self.history.push(trial);
        self.labels.push(label);
        self.advance();
        Ok(())
    }

    fn advance(&mut self) {
        let cfg = &self.cfg;
        let h = &self.history;
        self.step = match &mut self.inner {
            Inner::Pod(s) => s.advance(cfg, h, &mut self.labels),
            Inner::Neyer => neyer_next(cfg, h, &self.labels),
            Inner::Udtr(s) => s.advance(cfg, h, &mut self.labels),
        };
    }
}

fn rec(x: f64, label: impl Into<String>) -> Phase1Step {
    Phase1Step::Recommend {
        x,
        label: label.into(),
    }
}

/// Relative tolerance for threshold comparisons against multiples of sg.
const REL_TOL: f64 = 1e-9;

// ---------------------------------------------------------------- 3pod

#[derive(Debug, Clone, Copy, PartialEq)]
enum PodCase {
    I,
    Ii,
    Iii,
    Iv,
}

impl PodCase {
    fn tag(self) -> &'static str {
        match self {
            PodCase::I => "i",
            PodCase::Ii => "ii",
            PodCase::Iii => "iii",
            PodCase::Iv => "iv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PairKind {
    /// Upper point first.
    Ic,
    /// Lower point first.
    Id,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PodStage {
    I1,
    I2,
    I3 { c: f64, s: f64 },
    Done,
}

#[derive(Debug, Clone)]
struct PodState {
    stage: PodStage,
    case: Option<PodCase>,
    /// Number of I1 search runs after the first two.
    search: u32,
    sg: f64,
    reductions: u32,
    /// Pair in progress and how many of its runs have been observed.
    pair: Option<(PairKind, u8)>,
    i3_done: u8,
}

impl PodState {
    fn new(sg: f64) -> Self {
        PodState {
            stage: PodStage::I1,
            case: None,
            search: 0,
            sg,
            reductions: 0,
            pair: None,
            i3_done: 0,
        }
    }

    fn advance(&mut self, cfg: &Phase1Config, h: &[Trial], labels: &mut [String]) -> Phase1Step {
        let n = h.len();
        if self.stage == PodStage::I1 {
            let (lo, hi, sg0) = (cfg.mlo, cfg.mhi, cfg.sg);
            if n == 0 {
                return rec(0.75 * lo + 0.25 * hi, "I1");
            }
            if n == 1 {
                return rec(0.25 * lo + 0.75 * hi, "I1");
            }
            let case = match self.case {
                Some(c) => c,
                None => {
                    let c = match (h[0].y, h[1].y) {
                        (false, false) => PodCase::I,
                        (true, true) => PodCase::Ii,
                        (false, true) => PodCase::Iii,
                        (true, false) => PodCase::Iv,
                    };
                    self.case = Some(c);
                    c
                }
            };
            let label = format!("I1({})", case.tag());
            for l in labels.iter_mut() {
                *l = label.clone();
            }
            let last = h[n - 1];
            let in_i1 = match case {
                PodCase::Iii => false,
                PodCase::I => n == 2 || !last.y,
                PodCase::Ii => n == 2 || last.y,
                PodCase::Iv => n < 4,
            };
            if in_i1 {
                self.search += 1;
                let k = self.search as f64;
                let x = match case {
                    PodCase::I => hi + 1.5 * sg0 * k,
                    PodCase::Ii => lo - 1.5 * sg0 * k,
                    _ if n == 2 => lo - 3.0 * sg0,
                    _ => hi + 3.0 * sg0,
                };
                return rec(x, label);
            }
            self.stage = PodStage::I2;
        }

        if self.stage == PodStage::I2 {
            let ov = classify_overlap(h);
            let (m1, m0) = (ov.m1.expect("both responses"), ov.m0.expect("both responses"));
            let exit = if cfg.term1 { m1 <= m0 } else { m1 < m0 };
            if let Some((_, 2)) = self.pair {
                self.pair = None;
                if !exit {
                    self.sg *= 2.0 / 3.0;
                    self.reductions += 1;
                }
            }
            if exit {
                self.pair = None;
                self.stage = PodStage::I3 {
                    c: 0.5 * (m1 + m0),
                    s: self.sg,
                };
            } else {
                let prefix = if self.reductions > 0 { "r" } else { "" };
                let delta = 0.3 * self.sg;
                if let Some((kind, seen)) = self.pair {
                    // Second member, placed against the current bounds.
                    let tag = if kind == PairKind::Ic { "ic" } else { "id" };
                    self.pair = Some((kind, seen + 1));
                    let x = if kind == PairKind::Ic { m0 - delta } else { m1 + delta };
                    return rec(x, format!("{prefix}I2({tag})"));
                }
                let gap = m1 - m0;
                let thresh = 1.5 * self.sg;
                if gap >= thresh * (1.0 - REL_TOL) {
                    return rec(0.5 * (m1 + m0), format!("{prefix}I2(ib)"));
                }
                let n1 = h.iter().filter(|t| t.y).count();
                let n0 = n - n1;
                let (kind, x, tag) = if n0 > n1 {
                    (PairKind::Ic, m1 + delta, "ic")
                } else {
                    (PairKind::Id, m0 - delta, "id")
                };
                self.pair = Some((kind, 1));
                return rec(x, format!("{prefix}I2({tag})"));
            }
        }

        if let PodStage::I3 { c, s } = self.stage {
            let done = self.i3_done;
            self.i3_done += 1;
            return match done {
                0 => rec(c + 0.5 * s, "I3"),
                1 => rec(c - 0.5 * s, "I3"),
                _ => {
                    self.stage = PodStage::Done;
                    Phase1Step::Complete
                }
            };
        }
        Phase1Step::Complete
    }
}

// ---------------------------------------------------------------- Neyer

fn neyer_next(cfg: &Phase1Config, h: &[Trial], labels: &[String]) -> Phase1Step {
    if h.is_empty() {
        return rec(0.5 * (cfg.mlo + cfg.mhi), "B0");
    }
    let ov = classify_overlap(h);
    let xmin = h.iter().map(|t| t.x).fold(f64::INFINITY, f64::min);
    let xmax = h.iter().map(|t| t.x).fold(f64::NEG_INFINITY, f64::max);
    let step = (2.0 * cfg.sg).max(xmax - xmin);
    match (ov.m1, ov.m0) {
        (None, _) => rec(xmax + step, "B1"),
        (_, None) => rec(xmin - step, "B2"),
        (Some(m1), Some(m0)) => {
            if ov.class == OverlapClass::Interval {
                return Phase1Step::Complete;
            }
            let nb4 = labels.iter().filter(|l| l.as_str() == "B4").count();
            let s = cfg.sg * 0.8f64.powi(nb4 as i32);
            let gap = m1 - m0;
            if gap > s && (gap - s).abs() > REL_TOL * s {
                rec(0.5 * (m1 + m0), "B3")
            } else {
                let c = 0.5 * (m1 + m0);
                let k = kstar(&info_matrix(h, c, s));
                rec(c + k * s, "B4")
            }
        }
    }
}

// ---------------------------------------------------------------- UDTR

#[derive(Debug, Clone)]
struct UdtrState {
    tests: Vec<UdtrRule>,
    current: usize,
    /// Index in the history where the current test began.
    start: usize,
    group: String,
    level: f64,
    /// Trigger levels and directions of the current test.
    triggers: Vec<(f64, Direction)>,
    n_rev: u32,
}

impl UdtrState {
    fn new(cfg: &Phase1Config) -> Result<Self> {
        let bl = cfg.effective_bl();
        let mut tests = Vec::new();
        match (bl.i1, bl.i2) {
            (0, i) => tests.push(udtr_rule(i)?.complemented()),
            (i, 0) => tests.push(udtr_rule(i)?),
            (1, 1) => tests.push(udtr_rule(1)?),
            (a, b) => {
                tests.push(udtr_rule(a)?);
                tests.push(udtr_rule(b)?.complemented());
            }
        }
        let level = start_level(cfg, &tests[0]);
        Ok(UdtrState {
            tests,
            current: 0,
            start: 0,
            group: String::new(),
            level,
            triggers: Vec::new(),
            n_rev: bl.n_rev,
        })
    }

    fn reversals(&self) -> u32 {
        self.triggers.windows(2).filter(|w| w[0].1 != w[1].1).count() as u32
    }

    fn advance(&mut self, cfg: &Phase1Config, h: &[Trial], labels: &mut [String]) -> Phase1Step {
        if let Some(&last) = h.last() {
            let n = h.len();
            self.group.push(if last.y { '1' } else { '0' });
            let rule = &self.tests[self.current];
            if let Some(dir) = rule.classify(&self.group) {
                labels[n - 1] = dir.label().to_string();
                self.group.clear();
                self.triggers.push((last.x, dir));
                self.level = match cfg.procedure {
                    Procedure::Bruceton => match dir {
                        Direction::Down => last.x - cfg.sg,
                        Direction::Up => last.x + cfg.sg,
                    },
                    _ => langlie_level(cfg, &self.triggers),
                };
            } else {
                labels[n - 1] = String::new();
            }
            let ov = classify_overlap(h);
            if self.reversals() >= self.n_rev && ov.admits_finite_sigma() {
                if self.current + 1 < self.tests.len() {
                    self.current += 1;
                    self.start = n;
                    self.group.clear();
                    self.triggers.clear();
                    self.level = start_level(cfg, &self.tests[self.current]);
                } else {
                    return Phase1Step::Complete;
                }
            }
        }
        rec(self.level, "")
    }
}

fn start_level(cfg: &Phase1Config, rule: &UdtrRule) -> f64 {
    (1.0 - rule.p) * cfg.mlo + rule.p * cfg.mhi
}

/// Langlie's memory rule: average the trigger level with the most recent
/// earlier trigger level that balances ups and downs over the span between
/// them; otherwise with the lower (after a down) or upper (after an up) limit.
fn langlie_level(cfg: &Phase1Config, triggers: &[(f64, Direction)]) -> f64 {
    let k = triggers.len() - 1;
    let (xk, dk) = triggers[k];
    let mut bal: i64 = if dk == Direction::Up { 1 } else { -1 };
    for j in (0..k).rev() {
        bal += if triggers[j].1 == Direction::Up { 1 } else { -1 };
        if bal == 0 {
            return 0.5 * (triggers[j].0 + xk);
        }
    }
    match dk {
        Direction::Down => 0.5 * (cfg.mlo + xk),
        Direction::Up => 0.5 * (cfg.mhi + xk),
    }
}
