//! `sens`: run, replay, analyze and simulate sequential sensitivity tests.
//!
//! Exit status: 0 success, 1 internal error, 2 bad arguments or input,
//! 3 test suspended by an operator entry, 4 test suspended (or analysis
//! refused) because the data admit no finite positive sigma.

mod console;
mod input;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sens_core::confidence::{lims, Method, AL15, LIMITS_HEADER};
use sens_core::phase1::{Phase1Config, Procedure};
use sens_core::plotdata::{render_svg, series, PlotKind, PlotOptions};
use sens_core::session::{run_batch, BatchInputs, Prompt, SessionConfig, SuspendReason, TestSession};
use sens_core::simulate::{simulate_test, sweep, sweep_text, SimConfig, SweepConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Args(String),
    #[error(transparent)]
    Core(#[from] sens_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        use sens_core::Error as E;
        match self {
            CliError::Args(_) => 2,
            CliError::Core(E::Config(_) | E::Input(_) | E::Parse { .. } | E::Json(_)) => 2,
            CliError::Core(E::Complete | E::Suspended(_) | E::WrongPrompt { .. } | E::NothingToUndo) => 2,
            CliError::Core(E::Estimate(_)) => 4,
            CliError::Core(E::Io(_)) | CliError::Io(_) => 1,
        }
    }
}

const EXIT_SUSPENDED_USER: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;

#[derive(Parser)]
#[command(name = "sens", version, about = "Sequential sensitivity (go/no-go) testing")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Start a console test; answers are read from stdin.
    Run {
        #[command(flatten)]
        test: TestArgs,
        /// Session log, rewritten after every entry.
        #[arg(long, default_value = "session.jsonl")]
        session: PathBuf,
        /// Run table written when the test completes or suspends.
        #[arg(long, default_value = "runs.txt")]
        table: PathBuf,
    },
    /// Replay a response sequence.
    Batch {
        #[command(flatten)]
        test: TestArgs,
        #[command(flatten)]
        sizes: SizeArgs,
        /// Responses: a file or an inline comma list.
        #[arg(short = 'Y', long = "Y-file", allow_hyphen_values = true)]
        y: String,
        /// Optional leading stresses: a file or an inline comma list.
        #[arg(short = 'X', long = "X-file", allow_hyphen_values = true)]
        x: Option<String>,
        /// Directory for session.jsonl and runs.txt.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Also write the history plot as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Simulate one test, or a seeded sweep with --trials.
    Sim {
        #[command(flatten)]
        test: TestArgs,
        #[command(flatten)]
        sizes: SizeArgs,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        dm: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        ds: f64,
        /// Seed; -1 draws a random one.
        #[arg(long, default_value_t = -1, allow_negative_numbers = true)]
        iseed: i64,
        /// Multiplier applied to the stress inputs.
        #[arg(long = "M", default_value_t = 1.0)]
        m: f64,
        /// false stops at the end of 3pod stage I2 or at the end of phase I.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        llgo: bool,
        /// Number of simulated tests; more than one prints a sweep table.
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Seed step between consecutive trials of a sweep.
        #[arg(long, default_value_t = 1)]
        stride: u64,
        /// Write the session log (single test) or the sweep table here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// History plot of a single test.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Confidence limits for a saved session.
    Lims {
        #[arg(long)]
        session: PathBuf,
        /// fm, lr or glm (or 1, 2, 3).
        #[arg(long, default_value = "fm")]
        method: String,
        #[arg(long, default_value_t = 0.95)]
        conf: f64,
        /// Probabilities, comma separated.
        #[arg(long = "P")]
        p: Option<String>,
        /// Stresses, comma separated.
        #[arg(long = "Q", allow_hyphen_values = true)]
        q: Option<String>,
        /// Use the standard 15 probabilities (the default when neither P nor Q is given).
        #[arg(long)]
        al15: bool,
    },
    /// Plot series for a saved session, as SVG or JSON.
    Plot {
        #[arg(long)]
        session: PathBuf,
        /// 1-8 or a name such as history or response-curve-ci.
        #[arg(long, default_value = "history")]
        kind: String,
        #[arg(long, default_value_t = 0.95)]
        conf: f64,
        /// Response-curve interval/method selector, 1-15.
        #[arg(long = "J", default_value_t = 15)]
        j: u32,
        #[arg(long = "P")]
        p: Option<f64>,
        #[arg(long = "Q", allow_hyphen_values = true)]
        q: Option<f64>,
        /// Confidence levels for the joint plots, comma separated.
        #[arg(long)]
        confs: Option<String>,
        /// Print the series as JSON instead of SVG.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Remove the last n console reads from a session.
    Fix {
        #[arg(long)]
        session: PathBuf,
        #[arg(short, long)]
        n: usize,
        /// Write the shortened session here instead of in place.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Continue a saved (possibly suspended) console test.
    Resume {
        #[arg(long, default_value = "session.jsonl")]
        session: PathBuf,
        #[arg(long, default_value = "runs.txt")]
        table: PathBuf,
    },
    /// Print the run table of a saved session.
    Export {
        #[arg(long)]
        session: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TestArgs {
    #[arg(long, allow_negative_numbers = true)]
    mlo: f64,
    #[arg(long, allow_negative_numbers = true)]
    mhi: f64,
    #[arg(long, allow_negative_numbers = true)]
    sg: f64,
    /// 1 3pod, 2 Neyer, 3 Bruceton, 4 Langlie.
    #[arg(long, default_value_t = 1)]
    test: u32,
    /// Resolution of recommended stresses; 0 rounds to 5 decimals.
    #[arg(long, default_value_t = 0.0)]
    reso: f64,
    /// Log-scale test.
    #[arg(long)]
    ln: bool,
    /// false makes 3pod stage I2 end with overlap.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    term1: bool,
    /// nRev, i1, i2 for Bruceton and Langlie, e.g. 4,1,0.
    #[arg(long = "BL")]
    bl: Option<String>,
    #[arg(long, default_value = "")]
    title: String,
    #[arg(long, default_value = "")]
    units: String,
}

impl TestArgs {
    fn config(&self) -> Result<SessionConfig, CliError> {
        let procedure =
            Procedure::from_code(self.test).ok_or_else(|| CliError::Args(format!("test must be 1-4, got {}", self.test)))?;
        let mut p1 = Phase1Config::new(procedure, self.mlo, self.mhi, self.sg);
        p1.term1 = self.term1;
        if let Some(bl) = &self.bl {
            let v = input::parse_numbers(bl).map_err(CliError::Args)?;
            match v[..] {
                [a, b, c] if [a, b, c].iter().all(|x| x.fract() == 0.0 && *x >= 0.0) => {
                    p1 = p1.with_bl(a as u32, b as u32, c as u32);
                }
                _ => return Err(CliError::Args(format!("BL needs three nonnegative integers, got {bl:?}"))),
            }
        }
        let mut cfg = SessionConfig::new(p1).with_reso(self.reso).with_log(self.ln);
        cfg.title = self.title.clone();
        cfg.units = self.units.clone();
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SizeArgs {
    /// Phase II size.
    #[arg(long, allow_negative_numbers = true)]
    n2: Option<i64>,
    /// Phase III size.
    #[arg(long, allow_negative_numbers = true)]
    n3: Option<i64>,
    /// Phase III target probability.
    #[arg(long)]
    p: Option<f64>,
    /// Phase III lambda.
    #[arg(long)]
    lam: Option<f64>,
}

impl SizeArgs {
    fn batch(&self) -> Result<BatchInputs, CliError> {
        let p_lam = match (self.p, self.lam) {
            (Some(p), Some(lam)) => Some((p, lam)),
            (None, None) => None,
            _ => return Err(CliError::Args("p and lam go together".into())),
        };
        Ok(BatchInputs {
            n2: self.n2,
            n3: self.n3,
            p_lam,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("sens: {e}");
            ExitCode::from(e.code())
        }
    }
}

/// Exit status for a session's final state.
fn status(p: &Prompt) -> u8 {
    match p {
        Prompt::Suspended {
            reason: SuspendReason::Degenerate,
            ..
        } => EXIT_DEGENERATE,
        Prompt::Suspended { .. } => EXIT_SUSPENDED_USER,
        _ => 0,
    }
}

fn load(path: &Path) -> Result<TestSession, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Args(format!("{}: {e}", path.display())))?;
    Ok(TestSession::from_log(&text)?)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn float_list(s: &Option<String>) -> Result<Vec<f64>, CliError> {
    match s {
        Some(s) => input::parse_numbers(s).map_err(CliError::Args),
        None => Ok(Vec::new()),
    }
}

fn print_messages(s: &TestSession) {
    for m in s.messages() {
        println!("{m}");
    }
}

fn history_svg(s: &TestSession, path: &Path) -> Result<(), CliError> {
    let ser = series(s, PlotKind::History, &PlotOptions::default())?;
    write_file(path, &render_svg(&ser))
}

fn interactive(mut s: TestSession, session: &Path, table: &Path) -> Result<u8, CliError> {
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let mut out = io::stdout();
    write_file(session, &s.to_log())?;
    let end = console::drive(&mut s, &mut input, &mut out, |s| write_file(session, &s.to_log()))?;
    write_file(table, &s.export_text())?;
    Ok(status(&end))
}

fn dispatch(cmd: Cmd) -> Result<u8, CliError> {
    match cmd {
        Cmd::Run { test, session, table } => {
            let s = TestSession::new(test.config()?)?;
            interactive(s, &session, &table)
        }
        Cmd::Resume { session, table } => {
            let mut s = load(&session)?;
            if s.is_suspended() {
                s.resume()?;
            }
            interactive(s, &session, &table)
        }
        Cmd::Batch {
            test,
            sizes,
            y,
            x,
            out_dir,
            svg,
        } => {
            let ys = input::read_responses(&y)?;
            let xs = x.as_deref().map(input::read_numbers).transpose()?;
            let out = run_batch(test.config()?, &ys, xs.as_deref(), sizes.batch()?)?;
            let s = out.session;
            print_messages(&s);
            print!("{}", s.export_text());
            if out.surplus > 0 {
                eprintln!("note: {} response(s) left unused", out.surplus);
            }
            fs::create_dir_all(&out_dir)?;
            write_file(&out_dir.join("session.jsonl"), &s.to_log())?;
            write_file(&out_dir.join("runs.txt"), &s.export_text())?;
            if let Some(p) = svg {
                history_svg(&s, &p)?;
            }
            Ok(status(&s.prompt()))
        }
        Cmd::Sim {
            test,
            sizes,
            dm,
            ds,
            iseed,
            m,
            llgo,
            trials,
            stride,
            out,
            svg,
        } => {
            let b = sizes.batch()?;
            let mut cfg = SimConfig::new(test.config()?)
                .with_sizes(b.n2.unwrap_or(0), b.n3.unwrap_or(0))
                .with_dev(dm, ds)
                .with_m(m);
            if let Some((p, lam)) = b.p_lam {
                cfg = cfg.with_p_lam(p, lam);
            }
            cfg.llgo = llgo;
            if iseed >= 0 {
                cfg = cfg.with_seed(iseed as u64);
            } else if iseed != -1 {
                return Err(CliError::Args("iseed must be -1 or nonnegative".into()));
            }
            cfg.validate()?;
            if trials == 0 {
                return Err(CliError::Args("trials must be positive".into()));
            }
            if trials > 1 {
                let seed0 = cfg.seed.unwrap_or_else(|| std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs()));
                let summary = sweep(&SweepConfig {
                    template: cfg,
                    n_trials: trials,
                    seed0,
                    stride,
                })?;
                let text = sweep_text(&summary);
                match out {
                    Some(p) => write_file(&p, &text)?,
                    None => print!("{text}"),
                }
                println!(
                    "finite fits {}/{}, median mu {:.6}, median sigma {:.6}",
                    summary.finite,
                    summary.rows.len(),
                    summary.mu_median,
                    summary.sig_median
                );
                return Ok(0);
            }
            let o = simulate_test(&cfg)?;
            println!("{}", o.session.config().title);
            print_messages(&o.session);
            print!("{}", o.session.export_text());
            if let Some(p) = out {
                write_file(&p, &o.session.to_log())?;
            }
            if let Some(p) = svg {
                history_svg(&o.session, &p)?;
            }
            Ok(status(&o.session.prompt()))
        }
        Cmd::Lims {
            session,
            method,
            conf,
            p,
            q,
            al15,
        } => {
            let s = load(&session)?;
            let method: Method = method.parse()?;
            let mut ps = float_list(&p)?;
            let qs = float_list(&q)?;
            if al15 || (ps.is_empty() && qs.is_empty()) {
                ps.extend_from_slice(&AL15);
            }
            let rows = lims(method, s.trials(), conf, &ps, &qs)?;
            println!("{} {}% limits", method.name(), sens_core::session::fmt_num(100.0 * conf));
            println!("{LIMITS_HEADER}");
            for r in rows {
                println!("{}", r.to_line());
            }
            Ok(0)
        }
        Cmd::Plot {
            session,
            kind,
            conf,
            j,
            p,
            q,
            confs,
            json,
            out,
        } => {
            let s = load(&session)?;
            let kind: PlotKind = kind.parse()?;
            let mut opt = PlotOptions {
                conf,
                j,
                p,
                q,
                ..PlotOptions::default()
            };
            if confs.is_some() {
                opt.confs = float_list(&confs)?;
            }
            let ser = series(&s, kind, &opt)?;
            let text = if json {
                serde_json::to_string_pretty(&ser).map_err(sens_core::Error::from)?
            } else {
                render_svg(&ser)
            };
            match out {
                Some(p) => write_file(&p, &text)?,
                None => println!("{text}"),
            }
            Ok(0)
        }
        Cmd::Fix { session, n, out } => {
            let s = load(&session)?.fixw(n)?;
            write_file(out.as_deref().unwrap_or(&session), &s.to_log())?;
            println!("{} runs kept; next: {}", s.records().len(), s.prompt().text().trim_end());
            Ok(0)
        }
        Cmd::Export { session, out } => {
            let text = load(&session)?.export_text();
            match out {
                Some(p) => write_file(&p, &text)?,
                None => {
                    io::stdout().write_all(text.as_bytes())?;
                }
            }
            Ok(0)
        }
    }
}
