//! Event-sourced test sessions.
//!
//! A session is fully determined by its configuration and its event log.
//! Every console read (stimulus/response pair, n2, n3, p-λ) is one event;
//! suspension and resume markers are bookkeeping and are skipped by [`fixw`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{fit_mle, round_decimals, MleResult, MleStatus, Trial};
use crate::phase1::{Phase1, Phase1Config, Phase1Step, Procedure};
use crate::refine::{check_p_lam, doptimal_from_fit, rmj_init, RmjState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub phase1: Phase1Config,
    /// 0 rounds recommendations to 5 decimals.
    #[serde(default)]
    pub reso: f64,
    #[serde(default)]
    pub log_scale: bool,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub units: String,
}

impl SessionConfig {
    pub fn new(phase1: Phase1Config) -> Self {
        SessionConfig {
            phase1,
            reso: 0.0,
            log_scale: false,
            title: String::new(),
            units: String::new(),
        }
    }

    pub fn with_reso(mut self, reso: f64) -> Self {
        self.reso = reso;
        self
    }

    pub fn with_log(mut self, log_scale: bool) -> Self {
        self.log_scale = log_scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reso >= 0.0 && self.reso.is_finite()) {
            return Err(Error::Config("reso must be a nonnegative number".into()));
        }
        ScaleMap::new(&self.phase1, self.log_scale)?.analysis_config(&self.phase1).validate()
    }
}

/// Starting values on the log scale. 3pod and Neyer pick (mlo', mhi', sg') so
/// that the first two 3pod points map back to the user-scale ones; the UDTR
/// procedures take logs of the limits directly.
pub fn apply_log_transform(procedure: Procedure, mlo: f64, mhi: f64, sg: f64) -> Result<(f64, f64, f64)> {
    match procedure {
        Procedure::ThreePod | Procedure::Neyer => {
            let x1 = 0.75 * mlo + 0.25 * mhi;
            let x2 = 0.25 * mlo + 0.75 * mhi;
            if !(x1 > 0.0 && x2 > x1) {
                return Err(Error::Config(
                    "log scale needs 0.75 mlo + 0.25 mhi > 0 and mlo < mhi".into(),
                ));
            }
            let (l1, l2) = (x1.ln(), x2.ln());
            let lo = 1.5 * l1 - 0.5 * l2;
            let hi = 1.5 * l2 - 0.5 * l1;
            Ok((lo, hi, (hi - lo) / 7.0))
        }
        Procedure::Bruceton | Procedure::Langlie => {
            if !(mlo > 0.0 && mhi > 0.0) {
                return Err(Error::Config("log scale needs positive mlo and mhi".into()));
            }
            let s = if procedure == Procedure::Bruceton {
                let s = (1.0 + sg / mlo.ln()).ln();
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::Config(
                        "log-scale Bruceton step ln(1 + sg/ln mlo) must be positive".into(),
                    ));
                }
                s
            } else {
                sg
            };
            Ok((mlo.ln(), mhi.ln(), s))
        }
    }
}

/// Maps between the user scale (all dialogue) and the analysis scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleMap {
    pub log_scale: bool,
    pub mlo: f64,
    pub mhi: f64,
    pub sg: f64,
}

impl ScaleMap {
    pub fn new(cfg: &Phase1Config, log_scale: bool) -> Result<Self> {
        let (mlo, mhi, sg) = if log_scale {
            apply_log_transform(cfg.procedure, cfg.mlo, cfg.mhi, cfg.sg)?
        } else {
            (cfg.mlo, cfg.mhi, cfg.sg)
        };
        Ok(ScaleMap {
            log_scale,
            mlo,
            mhi,
            sg,
        })
    }

    pub fn analysis_config(&self, cfg: &Phase1Config) -> Phase1Config {
        Phase1Config {
            mlo: self.mlo,
            mhi: self.mhi,
            sg: self.sg,
            ..cfg.clone()
        }
    }

    pub fn to_analysis(&self, x: f64) -> f64 {
        if self.log_scale {
            crate::numerics::round_decimals(x.ln(), 5)
        } else {
            x
        }
    }

    pub fn to_user(&self, x: f64) -> f64 {
        if self.log_scale {
            x.exp()
        } else {
            x
        }
    }
}

/// Decimal places of `reso`, when it is a terminating decimal.
fn reso_decimals(reso: f64) -> Option<usize> {
    (0..=15).find(|&d| {
        let s = reso * 10f64.powi(d as i32);
        s.round() != 0.0 && (s - s.round()).abs() < 1e-9 * s.abs()
    })
}

/// Rounds a user-scale value: to 5 decimals when `reso` is 0, otherwise to
/// the nearest multiple of `reso` (ties to even).
pub fn round_user(x: f64, reso: f64) -> f64 {
    if reso <= 0.0 {
        return round_decimals(x, 5);
    }
    let r = (x / reso).round_ties_even() * reso;
    // Strip the representation error of the multiplication.
    match reso_decimals(reso) {
        Some(d) => round_decimals(r, d),
        None => r,
    }
}

/// Recommended stimulus (RX) on the user scale for an analysis-scale value.
pub fn round_to_reso(x: f64, reso: f64, log_scale: bool) -> f64 {
    round_user(if log_scale { x.exp() } else { x }, reso)
}

/// Numbers as printed in exports: at most 5 decimals, trailing zeros removed.
pub fn fmt_num(x: f64) -> String {
    fmt_decimals(x, 5)
}

/// Like [`fmt_num`] with `d` decimals.
pub fn fmt_decimals(x: f64, d: usize) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "Inf".into() } else { "-Inf".into() };
    }
    if x.is_nan() {
        return "NA".into();
    }
    let s = format!("{:.*}", d, x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" || s.is_empty() {
        "0".into()
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuspendReason {
    InvalidResponse,
    NegativeSize,
    BadPLam,
    /// Phase II/III requested without a finite positive sigma.
    Degenerate,
}

/// The explanation printed when the finite-sigma guard stops a test.
pub const INFINITE_SIGMA_MESSAGE: &str = "Cannot refine: a finite positive sigma needs interval overlap (M0 > m1) \
and delta = mean(X[Y=1]) - mean(X[Y=0]) > 0. The test is suspended; correct entries with fixw or skip the refinement phases.";

/// Shown when refinement starts on the log scale.
pub const LOG_START_WARNING: &str =
    "Note: phase III starting values (tau2[1] and be) on the log scale may need adjustment.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    /// Stimulus on the user scale and response.
    Pair { x: f64, y: u8 },
    N2 { n: u32 },
    N3 { n: u32 },
    PLam { p: f64, lam: f64 },
    Suspend { reason: SuspendReason, detail: String },
    Resume,
}

impl Event {
    /// Whether the event is a console read counted by [`fixw`].
    pub fn is_read(&self) -> bool {
        !matches!(self, Event::Suspend { .. } | Event::Resume)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prompt {
    Pair {
        run: usize,
        /// Recommended stimulus, user scale, rounded.
        rx: f64,
        /// Unrounded recommendation on the analysis scale.
        exact: f64,
        label: String,
    },
    N2,
    N3,
    PLam,
    Complete,
    Suspended {
        reason: SuspendReason,
        detail: String,
    },
}

impl Prompt {
    pub fn text(&self) -> String {
        match self {
            Prompt::Pair { run, rx, .. } => format!("{run}. Test at X ~ {}. Enter X & R: ", fmt_num(*rx)),
            Prompt::N2 => "Enter Phase II (D-Optimal) size n2: ".into(),
            Prompt::N3 => "Enter Phase III (S-RMJ) size n3: ".into(),
            Prompt::PLam => "Enter p lam: ".into(),
            Prompt::Complete => "Test complete".into(),
            Prompt::Suspended { .. } => "Test Suspended".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    One,
    AwaitN2,
    Two,
    AwaitN3,
    AwaitPLam,
    Three,
    Complete,
}

/// One row of the run table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Row label: 1, 2, ... and the previous label with "1" appended for
    /// the terminal recommendation row.
    pub index: String,
    /// Actual stimulus on the analysis scale.
    pub x: f64,
    pub y: u8,
    pub count: u8,
    /// Recommended stimulus, user scale, rounded.
    pub rx: f64,
    /// Unrounded recommendation (analysis scale) rounded to 6 decimals.
    pub ex: f64,
    /// Actual stimulus on the user scale.
    pub tx: f64,
    pub id: String,
}

impl TrialRecord {
    pub fn to_line(&self) -> String {
        format!(
            "{}, {}, {}, {}, {}, {}, {}, {}",
            self.index,
            fmt_num(self.x),
            self.y,
            self.count,
            fmt_num(self.rx),
            fmt_decimals(self.ex, 6),
            fmt_num(self.tx),
            self.id
        )
    }
}

pub const EXPORT_HEADER: &str = "i, X, Y, COUNT, RX, EX, TX, ID";

#[derive(Debug, Clone)]
pub struct TestSession {
    cfg: SessionConfig,
    scale: ScaleMap,
    events: Vec<Event>,
    phase1: Phase1,
    trials: Vec<Trial>,
    records: Vec<TrialRecord>,
    terminal: Option<TrialRecord>,
    phase: Phase,
    n2: Option<u32>,
    n3: Option<u32>,
    p_lam: Option<(f64, f64)>,
    done2: u32,
    done3: u32,
    rmj: Option<RmjState>,
    pending: Option<(f64, String)>,
    suspended: Option<(SuspendReason, String)>,
    messages: Vec<String>,
}

impl TestSession {
    pub fn new(cfg: SessionConfig) -> Result<Self> {
        cfg.validate()?;
        let scale = ScaleMap::new(&cfg.phase1, cfg.log_scale)?;
        let phase1 = Phase1::new(scale.analysis_config(&cfg.phase1))?;
        let mut s = TestSession {
            cfg,
            scale,
            events: Vec::new(),
            phase1,
            trials: Vec::new(),
            records: Vec::new(),
            terminal: None,
            phase: Phase::One,
            n2: None,
            n3: None,
            p_lam: None,
            done2: 0,
            done3: 0,
            rmj: None,
            pending: None,
            suspended: None,
            messages: Vec::new(),
        };
        for rule in s.phase1.udtr_rules() {
            s.messages.push(rule.describe());
        }
        s.refresh();
        Ok(s)
    }

    /// Rebuilds a session by applying `events` in order.
    pub fn replay(cfg: SessionConfig, events: &[Event]) -> Result<Self> {
        let mut s = TestSession::new(cfg)?;
        for ev in events {
            s.apply(ev.clone())?;
        }
        Ok(s)
    }

    pub fn config(&self) -> &SessionConfig {
        &self.cfg
    }

    pub fn scale(&self) -> &ScaleMap {
        &self.scale
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Trials on the analysis scale.
    pub fn trials(&self) -> &[Trial] {
        &self.trials
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    pub fn terminal(&self) -> Option<&TrialRecord> {
        self.terminal.as_ref()
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn phase1_len(&self) -> usize {
        self.phase1.history().len()
    }

    pub fn n2(&self) -> Option<u32> {
        self.n2
    }

    pub fn n3(&self) -> Option<u32> {
        self.n3
    }

    pub fn p_lam(&self) -> Option<(f64, f64)> {
        self.p_lam
    }

    pub fn rmj(&self) -> Option<&RmjState> {
        self.rmj.as_ref()
    }

    pub fn messages(&self) -> &[String] {
        &self.messages
    }

    pub fn is_suspended(&self) -> bool {
        self.suspended.is_some()
    }

    pub fn fit(&self) -> MleResult {
        fit_mle(&self.trials)
    }

    pub fn prompt(&self) -> Prompt {
        if let Some((reason, detail)) = &self.suspended {
            return Prompt::Suspended {
                reason: *reason,
                detail: detail.clone(),
            };
        }
        match self.phase {
            Phase::AwaitN2 => Prompt::N2,
            Phase::AwaitN3 => Prompt::N3,
            Phase::AwaitPLam => Prompt::PLam,
            Phase::Complete => Prompt::Complete,
            Phase::One | Phase::Two | Phase::Three => {
                let (x, label) = self.pending.clone().expect("pending recommendation");
                Prompt::Pair {
                    run: self.records.len() + 1,
                    rx: round_to_reso(x, self.cfg.reso, self.scale.log_scale),
                    exact: x,
                    label,
                }
            }
        }
    }

    fn require(&self, want: &str, ok: bool) -> Result<()> {
        if let Some((_, d)) = &self.suspended {
            return Err(Error::Suspended(d.clone()));
        }
        if self.phase == Phase::Complete {
            return Err(Error::Complete);
        }
        if !ok {
            return Err(Error::WrongPrompt {
                expected: format!("{:?}", self.prompt_kind()),
                got: want.into(),
            });
        }
        Ok(())
    }

    fn prompt_kind(&self) -> &'static str {
        match self.prompt() {
            Prompt::Pair { .. } => "pair",
            Prompt::N2 => "n2",
            Prompt::N3 => "n3",
            Prompt::PLam => "p_lam",
            Prompt::Complete => "complete",
            Prompt::Suspended { .. } => "suspended",
        }
    }

    fn awaiting_pair(&self) -> bool {
        matches!(self.phase, Phase::One | Phase::Two | Phase::Three)
    }

    fn suspend(&mut self, reason: SuspendReason, detail: impl Into<String>) -> Result<Prompt> {
        self.apply(Event::Suspend {
            reason,
            detail: detail.into(),
        })?;
        Ok(self.prompt())
    }

    /// Console entry of a stimulus (user scale) and a response. Responses
    /// other than 0/1 suspend the test.
    pub fn enter_pair(&mut self, x: f64, y: i64) -> Result<Prompt> {
        self.require("pair", self.awaiting_pair())?;
        if y != 0 && y != 1 {
            return self.suspend(SuspendReason::InvalidResponse, format!("invalid response {y}"));
        }
        if !x.is_finite() || (self.scale.log_scale && x <= 0.0) {
            return self.suspend(SuspendReason::InvalidResponse, format!("invalid stimulus {x}"));
        }
        self.apply(Event::Pair { x, y: y as u8 })?;
        Ok(self.prompt())
    }

    fn fit_guard(&mut self) -> Option<Result<Prompt>> {
        let fit = self.fit();
        if fit.is_finite() {
            None
        } else {
            self.messages.push(INFINITE_SIGMA_MESSAGE.into());
            Some(self.suspend(
                SuspendReason::Degenerate,
                format!("no finite positive sigma ({})", status_name(fit.status)),
            ))
        }
    }

    pub fn enter_n2(&mut self, n: i64) -> Result<Prompt> {
        self.require("n2", self.phase == Phase::AwaitN2)?;
        if n < 0 {
            return self.suspend(SuspendReason::NegativeSize, format!("n2 = {n}"));
        }
        if n > 0 {
            if let Some(r) = self.fit_guard() {
                return r;
            }
        }
        self.apply(Event::N2 { n: n as u32 })?;
        Ok(self.prompt())
    }

    pub fn enter_n3(&mut self, n: i64) -> Result<Prompt> {
        self.require("n3", self.phase == Phase::AwaitN3)?;
        if n < 0 {
            return self.suspend(SuspendReason::NegativeSize, format!("n3 = {n}"));
        }
        if n > 0 {
            if let Some(r) = self.fit_guard() {
                return r;
            }
        }
        self.apply(Event::N3 { n: n as u32 })?;
        Ok(self.prompt())
    }

    pub fn enter_p_lam(&mut self, p: f64, lam: f64) -> Result<Prompt> {
        self.require("p_lam", self.phase == Phase::AwaitPLam)?;
        if let Err(e) = check_p_lam(p, lam) {
            return self.suspend(SuspendReason::BadPLam, e.to_string());
        }
        if let Err(e) = rmj_init(&self.trials, p, lam, self.scale.log_scale) {
            return self.suspend(SuspendReason::Degenerate, e.to_string());
        }
        self.apply(Event::PLam { p, lam })?;
        Ok(self.prompt())
    }

    pub fn resume(&mut self) -> Result<Prompt> {
        if self.suspended.is_none() {
            return Err(Error::Input("session is not suspended".into()));
        }
        self.apply(Event::Resume)?;
        Ok(self.prompt())
    }

    /// Applies one logged event. Events are validated against the current
    /// state; guards that turn bad input into suspensions live in the
    /// `enter_*` methods.
    pub fn apply(&mut self, ev: Event) -> Result<()> {
        match &ev {
            Event::Suspend { reason, detail } => {
                self.suspended = Some((*reason, detail.clone()));
                self.messages.push("Test Suspended".into());
            }
            Event::Resume => {
                if self.suspended.take().is_none() {
                    return Err(Error::Input("resume without suspension".into()));
                }
            }
            Event::Pair { x, y } => {
                self.require("pair", self.awaiting_pair())?;
                if *y > 1 || !x.is_finite() {
                    return Err(Error::Input(format!("bad pair ({x}, {y})")));
                }
                self.apply_pair(*x, *y == 1)?;
            }
            Event::N2 { n } => {
                self.require("n2", self.phase == Phase::AwaitN2)?;
                self.n2 = Some(*n);
                if self.scale.log_scale {
                    self.messages.push(LOG_START_WARNING.into());
                }
                if *n == 0 {
                    self.messages.push(format!("Phase II skipped, {}", self.musig()));
                    self.phase = Phase::AwaitN3;
                } else {
                    self.done2 = 0;
                    self.phase = Phase::Two;
                }
            }
            Event::N3 { n } => {
                self.require("n3", self.phase == Phase::AwaitN3)?;
                self.n3 = Some(*n);
                if *n == 0 {
                    self.messages.push(format!("Phase III complete, {}", self.musig()));
                    self.phase = Phase::Complete;
                } else {
                    self.phase = Phase::AwaitPLam;
                }
            }
            Event::PLam { p, lam } => {
                self.require("p_lam", self.phase == Phase::AwaitPLam)?;
                let st = rmj_init(&self.trials, *p, *lam, self.scale.log_scale)?;
                self.p_lam = Some((*p, *lam));
                self.rmj = Some(st);
                self.done3 = 0;
                self.phase = Phase::Three;
            }
        }
        self.events.push(ev);
        self.refresh();
        Ok(())
    }

    fn apply_pair(&mut self, x_user: f64, y: bool) -> Result<()> {
        let (rec, label) = self.pending.clone().ok_or_else(|| {
            Error::Input("no recommendation is pending".into())
        })?;
        if self.scale.log_scale && x_user <= 0.0 {
            return Err(Error::Input("log scale needs positive stimuli".into()));
        }
        let x = self.scale.to_analysis(x_user);
        let trial = Trial::new(x, y);
        self.records.push(TrialRecord {
            index: (self.records.len() + 1).to_string(),
            x,
            y: y as u8,
            count: 1,
            rx: round_to_reso(rec, self.cfg.reso, self.scale.log_scale),
            ex: round_decimals(rec, 6),
            tx: x_user,
            id: label,
        });
        self.trials.push(trial);
        match self.phase {
            Phase::One => {
                self.phase1.observe(trial)?;
                for (r, l) in self.records.iter_mut().zip(self.phase1.labels()) {
                    r.id = l.clone();
                }
                if self.phase1.is_complete() {
                    self.messages.push(format!("Phase I complete, {}", self.musig()));
                    self.phase = Phase::AwaitN2;
                }
            }
            Phase::Two => {
                self.done2 += 1;
                if Some(self.done2) == self.n2 {
                    self.messages.push(format!("Phase II complete, {}", self.musig()));
                    self.phase = Phase::AwaitN3;
                }
            }
            Phase::Three => {
                let st = self.rmj.as_mut().expect("phase III state");
                let next = st.step(x, y);
                self.done3 += 1;
                if Some(self.done3) == self.n3 {
                    let last = self.records.last().expect("row").index.clone();
                    self.terminal = Some(TrialRecord {
                        index: format!("{last}1"),
                        x: 0.0,
                        y: 0,
                        count: 0,
                        rx: round_decimals(next, 5),
                        ex: 0.0,
                        tx: 0.0,
                        id: "III3".into(),
                    });
                    self.messages.push(format!("Phase III complete, {}", self.musig()));
                    self.phase = Phase::Complete;
                }
            }
            _ => unreachable!("pair outside a testing phase"),
        }
        Ok(())
    }

    fn musig(&self) -> String {
        let f = self.fit();
        format!("(Mu, Sig) = ({}, {}).", fmt_num(f.mu), fmt_num(f.sig))
    }

    fn refresh(&mut self) {
        self.pending = match self.phase {
            Phase::One => match self.phase1.step() {
                Phase1Step::Recommend { x, label } => Some((*x, label.clone())),
                Phase1Step::Complete => None,
            },
            Phase::Two => {
                let fit = self.fit();
                if fit.is_finite() {
                    let label = if self.done2 == 0 { "II1" } else { "II2" };
                    Some((doptimal_from_fit(&self.trials, &fit), label.into()))
                } else {
                    if self.suspended.is_none() {
                        self.messages.push(INFINITE_SIGMA_MESSAGE.into());
                        self.suspended = Some((
                            SuspendReason::Degenerate,
                            format!("no finite positive sigma ({})", status_name(fit.status)),
                        ));
                    }
                    None
                }
            }
            Phase::Three => {
                let label = if self.done3 == 0 { "III1" } else { "III2" };
                self.rmj.as_ref().map(|s| (s.next_x(), label.into()))
            }
            _ => None,
        };
    }

    /// Removes the last `k` console reads (and any suspension markers among
    /// them) and rebuilds the session.
    pub fn fixw(&self, k: usize) -> Result<TestSession> {
        if k == 0 {
            return Ok(self.clone());
        }
        let reads = self.events.iter().filter(|e| e.is_read()).count();
        if k > reads {
            return Err(Error::Input(format!("cannot remove {k} reads from a log of {reads}")));
        }
        let mut cut = self.events.len();
        let mut removed = 0;
        while removed < k {
            cut -= 1;
            if self.events[cut].is_read() {
                removed += 1;
            }
        }
        TestSession::replay(self.cfg.clone(), &self.events[..cut])
    }

    /// Run table in the comma-separated text format.
    pub fn export_text(&self) -> String {
        let mut out = String::from(EXPORT_HEADER);
        out.push('\n');
        for r in self.records.iter().chain(self.terminal.iter()) {
            out.push_str(&r.to_line());
            out.push('\n');
        }
        out
    }

    /// Serializes the session as JSON lines: a header, then one event per line.
    pub fn to_log(&self) -> String {
        let header = LogHeader {
            format: LOG_FORMAT.into(),
            version: LOG_VERSION,
            config: self.cfg.clone(),
        };
        let mut out = serde_json::to_string(&header).expect("serializable");
        out.push('\n');
        for ev in &self.events {
            out.push_str(&serde_json::to_string(ev).expect("serializable"));
            out.push('\n');
        }
        out
    }

    pub fn from_log(text: &str) -> Result<TestSession> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty session log".into(),
        })?;
        let header: LogHeader = serde_json::from_str(first).map_err(|e| Error::Parse {
            line: 1,
            msg: e.to_string(),
        })?;
        if header.format != LOG_FORMAT || header.version != LOG_VERSION {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unsupported log {} v{}", header.format, header.version),
            });
        }
        let mut events = Vec::new();
        for (i, line) in lines {
            let ev: Event = serde_json::from_str(line).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
            events.push(ev);
        }
        TestSession::replay(header.config, &events)
    }
}

fn status_name(s: MleStatus) -> &'static str {
    match s {
        MleStatus::IntervalOverlap => "interval overlap",
        MleStatus::PointOverlap => "point overlap",
        MleStatus::NoOverlap => "no overlap",
        MleStatus::InfiniteSigma => "infinite sigma",
    }
}

pub const LOG_FORMAT: &str = "sens-session";
pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct LogHeader {
    format: String,
    version: u32,
    config: SessionConfig,
}

/// Answers to the between-phase prompts for batch runs. A missing answer
/// leaves the session waiting at that prompt.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BatchInputs {
    pub n2: Option<i64>,
    pub n3: Option<i64>,
    pub p_lam: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub session: TestSession,
    /// Responses left unused once the test completed or suspended.
    pub surplus: usize,
}

/// Replays a response sequence. The first `xs.len()` stimuli come from `xs`
/// (user scale); later stimuli are the rounded recommendations.
pub fn run_batch(cfg: SessionConfig, ys: &[i64], xs: Option<&[f64]>, inputs: BatchInputs) -> Result<BatchOutcome> {
    let mut s = TestSession::new(cfg)?;
    let xs = xs.unwrap_or(&[]);
    let mut used = 0;
    loop {
        match s.prompt() {
            Prompt::Pair { rx, .. } => {
                let Some(&y) = ys.get(used) else { break };
                let x = xs.get(used).copied().unwrap_or(rx);
                s.enter_pair(x, y)?;
                used += 1;
            }
            Prompt::N2 => match inputs.n2 {
                Some(n) => {
                    s.enter_n2(n)?;
                }
                None => break,
            },
            Prompt::N3 => match inputs.n3 {
                Some(n) => {
                    s.enter_n3(n)?;
                }
                None => break,
            },
            Prompt::PLam => match inputs.p_lam {
                Some((p, lam)) => {
                    s.enter_p_lam(p, lam)?;
                }
                None => break,
            },
            Prompt::Complete | Prompt::Suspended { .. } => break,
        }
    }
    Ok(BatchOutcome {
        surplus: ys.len() - used,
        session: s,
    })
}
