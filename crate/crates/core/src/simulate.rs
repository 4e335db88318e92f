//! Simulated tests: latent strengths drawn from a normal distribution, the
//! response rule "stress ≥ strength", and a seeded sweep driver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{fit_mle, qnorm, MleStatus};
use crate::phase1::Procedure;
use crate::session::{apply_log_transform, fmt_num, Prompt, SessionConfig, TestSession};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub session: SessionConfig,
    /// Phase II size; a negative value caps phases I + II at |n2|.
    #[serde(default)]
    pub n2: i64,
    /// Phase III size; a negative value caps the whole test at |n3|.
    #[serde(default)]
    pub n3: i64,
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub lam: f64,
    #[serde(default)]
    pub dm: f64,
    #[serde(default)]
    pub ds: f64,
    /// `None` draws a fresh seed from the OS.
    #[serde(default)]
    pub seed: Option<u64>,
    /// When false, stop before the 3pod I3 runs, or at the end of phase I
    /// for the other procedures.
    #[serde(default = "yes")]
    pub llgo: bool,
    /// Multiplier applied to the user-scale inputs (mlo, mhi, sg, reso and,
    /// on the linear scale, dm and ds).
    #[serde(default = "one")]
    pub m: f64,
}

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

impl SimConfig {
    pub fn new(session: SessionConfig) -> Self {
        SimConfig {
            session,
            n2: 0,
            n3: 0,
            p: 0.0,
            lam: 0.0,
            dm: 0.0,
            ds: 0.0,
            seed: None,
            llgo: true,
            m: 1.0,
        }
    }

    pub fn with_sizes(mut self, n2: i64, n3: i64) -> Self {
        self.n2 = n2;
        self.n3 = n3;
        self
    }

    pub fn with_p_lam(mut self, p: f64, lam: f64) -> Self {
        self.p = p;
        self.lam = lam;
        self
    }

    pub fn with_dev(mut self, dm: f64, ds: f64) -> Self {
        self.dm = dm;
        self.ds = ds;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = m;
        self
    }

    /// The session configuration after applying `m`.
    pub fn scaled_session(&self) -> SessionConfig {
        let mut s = self.session.clone();
        if self.m != 1.0 {
            s.phase1.mlo *= self.m;
            s.phase1.mhi *= self.m;
            s.phase1.sg *= self.m;
            s.reso *= self.m;
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::Config("M must be positive".into()));
        }
        if !(self.dm.is_finite() && self.ds.is_finite()) {
            return Err(Error::Config("dm and ds must be finite".into()));
        }
        self.scaled_session().validate()
    }
}

/// Target and true parameters of the latent strength distribution (on the
/// analysis scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimTruth {
    pub tm: f64,
    pub ts: f64,
    pub dm: f64,
    pub ds: f64,
    pub tmu: f64,
    pub tsig: f64,
}

pub fn sim_truth(cfg: &SimConfig) -> Result<SimTruth> {
    cfg.validate()?;
    let s = cfg.scaled_session();
    let p1 = &s.phase1;
    let (mlo, mhi, sg) = (p1.mlo, p1.mhi, p1.sg);
    let (tm, ts) = if !s.log_scale {
        let ts = match p1.procedure {
            Procedure::Langlie => (mhi - mlo) / 6.0,
            _ => sg,
        };
        ((mlo + mhi) / 2.0, ts)
    } else {
        match p1.procedure {
            Procedure::ThreePod | Procedure::Neyer => {
                let (u1, u2, u3) = apply_log_transform(p1.procedure, mlo, mhi, sg)?;
                ((u1 + u2) / 2.0, u3)
            }
            Procedure::Bruceton => ((mlo * mhi).sqrt().ln(), (1.0 + sg / mlo.ln()).ln()),
            Procedure::Langlie => ((mlo * mhi).sqrt().ln(), (mhi / mlo).ln() / 6.0),
        }
    };
    let k = if s.log_scale { 1.0 } else { cfg.m };
    let (dm, ds) = (cfg.dm * k, cfg.ds * k);
    let tsig = ts + ds;
    if !(tsig > 0.0 && tsig.is_finite() && tm.is_finite()) {
        return Err(Error::Config(format!("true sigma {tsig} is not positive")));
    }
    Ok(SimTruth {
        tm,
        ts,
        dm,
        ds,
        tmu: tm + dm,
        tsig,
    })
}

/// SplitMix64 finalizer, used to derive independent substream seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard normal draw for run `t` (1-based) of the test seeded by `seed`.
/// A pure function of (seed, t).
pub fn standard_draw(seed: u64, t: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(t)));
    StandardNormal.sample(&mut rng)
}

/// History-plot title for a simulated test: target parameters, deviations
/// and seed.
pub fn sim_title(t: &SimTruth, seed: u64) -> String {
    format!(
        "(mu_t, sig_t) = ({}, {}) + ({}, {}), i_s = {seed}",
        fmt_num(t.tm),
        fmt_num(t.ts),
        fmt_num(t.dm),
        fmt_num(t.ds)
    )
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub session: TestSession,
    pub truth: SimTruth,
    pub seed: u64,
    /// Latent strengths (analysis scale), one per run.
    pub strengths: Vec<f64>,
    /// True when llgo = false cut the test short.
    pub stopped_early: bool,
}

pub fn simulate_test(cfg: &SimConfig) -> Result<SimOutcome> {
    let truth = sim_truth(cfg)?;
    let seed = cfg.seed.unwrap_or_else(rand::random);
    let mut scfg = cfg.scaled_session();
    if scfg.title.is_empty() {
        scfg.title = sim_title(&truth, seed);
    }
    let procedure = scfg.phase1.procedure;
    let mut s = TestSession::new(scfg)?;
    let mut strengths = Vec::new();
    let mut stopped_early = false;
    loop {
        match s.prompt() {
            Prompt::Pair { run, rx, label, .. } => {
                // The other procedures stop at the n2 prompt below.
                if !cfg.llgo && procedure == Procedure::ThreePod && label == "I3" {
                    stopped_early = true;
                    break;
                }
                let z = standard_draw(seed, run as u64);
                let strength = truth.tmu + truth.tsig * z;
                let stress = if s.scale().log_scale { rx.ln() } else { rx };
                let y = i64::from(stress >= strength);
                strengths.push(strength);
                s.enter_pair(rx, y)?;
            }
            Prompt::N2 => {
                if !cfg.llgo {
                    stopped_early = true;
                    break;
                }
                let n1 = s.phase1_len() as i64;
                let n2 = if cfg.n2 < 0 { (-cfg.n2 - n1).max(0) } else { cfg.n2 };
                s.enter_n2(n2)?;
            }
            Prompt::N3 => {
                let used = s.records().len() as i64;
                let n3 = if cfg.n3 < 0 { (-cfg.n3 - used).max(0) } else { cfg.n3 };
                s.enter_n3(n3)?;
            }
            Prompt::PLam => {
                s.enter_p_lam(cfg.p, cfg.lam)?;
            }
            Prompt::Complete | Prompt::Suspended { .. } => break,
        }
    }
    Ok(SimOutcome {
        session: s,
        truth,
        seed,
        strengths,
        stopped_early,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub template: SimConfig,
    pub n_trials: usize,
    pub seed0: u64,
    /// Seed stride between trials: trial t uses seed0 + stride·(t − 1).
    pub stride: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub mu: f64,
    pub sig: f64,
    pub status: MleStatus,
    /// μ̂ + z_p σ̂ at the template's p (or the median when p is unset).
    pub lp: f64,
    pub suspended: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub truth: SimTruth,
    pub rows: Vec<SweepRow>,
    pub finite: usize,
    pub mu_mean: f64,
    pub mu_median: f64,
    pub mu_sd: f64,
    pub sig_median: f64,
    pub lp_median: f64,
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Trial seeds for a sweep; rejects layouts where two trials would share a seed.
pub fn sweep_seeds(cfg: &SweepConfig) -> Result<Vec<u64>> {
    if cfg.n_trials > 1 && cfg.stride == 0 {
        return Err(Error::Config("seed stride must be positive".into()));
    }
    let span = (cfg.n_trials.saturating_sub(1) as u64).checked_mul(cfg.stride);
    match span.and_then(|s| cfg.seed0.checked_add(s)) {
        Some(_) => Ok((0..cfg.n_trials as u64).map(|t| cfg.seed0 + cfg.stride * t).collect()),
        None => Err(Error::Config("seed range overflows; trials would reuse seeds".into())),
    }
}

/// Runs `n_trials` simulated tests. Trials run in parallel and are merged in
/// trial order, so the result only depends on the configuration.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepSummary> {
    let truth = sim_truth(&cfg.template)?;
    let seeds = sweep_seeds(cfg)?;
    let zp = if cfg.template.p > 0.0 && cfg.template.p < 1.0 {
        qnorm(cfg.template.p)
    } else {
        0.0
    };
    let run_one = |i: usize, seed: u64| -> Result<SweepRow> {
        let mut c = cfg.template.clone();
        c.seed = Some(seed);
        let out = simulate_test(&c)?;
        let f = fit_mle(out.session.trials());
        Ok(SweepRow {
            trial: i + 1,
            seed,
            n: out.session.trials().len(),
            mu: f.mu,
            sig: f.sig,
            status: f.status,
            lp: f.mu + zp * f.sig,
            suspended: out.session.is_suspended(),
        })
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(seeds.len().max(1));
    let chunk = seeds.len().div_ceil(workers.max(1)).max(1);
    let mut rows: Vec<SweepRow> = Vec::with_capacity(seeds.len());
    std::thread::scope(|sc| -> Result<()> {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .enumerate()
            .map(|(ci, part)| {
                let run_one = &run_one;
                sc.spawn(move || {
                    part.iter()
                        .enumerate()
                        .map(|(j, &sd)| run_one(ci * chunk + j, sd))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        for h in handles {
            rows.extend(h.join().expect("sweep worker panicked")?);
        }
        Ok(())
    })?;

    let fin: Vec<&SweepRow> = rows.iter().filter(|r| r.status == MleStatus::IntervalOverlap).collect();
    let mut mus: Vec<f64> = fin.iter().map(|r| r.mu).collect();
    let mut sigs: Vec<f64> = fin.iter().map(|r| r.sig).collect();
    let mut lps: Vec<f64> = fin.iter().map(|r| r.lp).collect();
    let k = mus.len() as f64;
    let mu_mean = mus.iter().sum::<f64>() / k;
    let mu_sd = if mus.len() > 1 {
        (mus.iter().map(|m| (m - mu_mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        f64::NAN
    };
    Ok(SweepSummary {
        truth,
        finite: fin.len(),
        mu_mean,
        mu_median: median(&mut mus),
        mu_sd,
        sig_median: median(&mut sigs),
        lp_median: median(&mut lps),
        rows,
    })
}

/// Sweep rows as comma-separated text.
pub fn sweep_text(s: &SweepSummary) -> String {
    let mut out = String::from("trial, seed, n, mu, sig, lp, status\n");
    for r in &s.rows {
        out.push_str(&format!(
            "{}, {}, {}, {:.7}, {:.7}, {:.7}, {}\n",
            r.trial,
            r.seed,
            r.n,
            r.mu,
            r.sig,
            r.lp,
            if r.suspended {
                "suspended".to_string()
            } else {
                format!("{:?}", r.status)
            }
        ));
    }
    out
}
