//! The stdin prompt loop shared by `run` and `resume`.

use std::io::{BufRead, Write};

use sens_core::session::{Event, Prompt, SuspendReason, TestSession};

use crate::CliError;

/// Reads answers until the test completes or suspends. A blank line, a
/// non-numeric entry or end of input suspends the test, as do the invalid
/// entries the session itself rejects. `save` runs after every change.
pub fn drive(
    s: &mut TestSession,
    input: &mut impl BufRead,
    out: &mut impl Write,
    mut save: impl FnMut(&TestSession) -> Result<(), CliError>,
) -> Result<Prompt, CliError> {
    let mut shown = s.messages().len();
    loop {
        for m in &s.messages()[shown..] {
            writeln!(out, "{m}")?;
        }
        shown = s.messages().len();
        let prompt = s.prompt();
        match &prompt {
            Prompt::Complete => {
                writeln!(out, "{}", prompt.text())?;
                return Ok(prompt);
            }
            Prompt::Suspended { detail, .. } => {
                writeln!(out, "({detail})")?;
                return Ok(prompt);
            }
            _ => {}
        }
        write!(out, "{}", prompt.text())?;
        out.flush()?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            suspend(s, "end of input")?;
            save(s)?;
            continue;
        }
        let tokens: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect();
        let entered = match (&prompt, tokens.as_slice()) {
            (Prompt::Pair { rx, .. }, [y]) => pair(s, *rx, y),
            (Prompt::Pair { .. }, [x, y]) => match x.parse::<f64>() {
                Ok(x) => pair(s, x, y),
                Err(_) => None,
            },
            (Prompt::N2, [n]) => n.parse::<i64>().ok().map(|n| s.enter_n2(n)),
            (Prompt::N3, [n]) => n.parse::<i64>().ok().map(|n| s.enter_n3(n)),
            (Prompt::PLam, [p, lam]) => match (p.parse::<f64>(), lam.parse::<f64>()) {
                (Ok(p), Ok(lam)) => Some(s.enter_p_lam(p, lam)),
                _ => None,
            },
            _ => None,
        };
        match entered {
            Some(r) => {
                r?;
            }
            None => suspend(s, &format!("unreadable entry {:?}", line.trim()))?,
        }
        save(s)?;
    }
}

fn pair(s: &mut TestSession, x: f64, y: &str) -> Option<Result<Prompt, sens_core::Error>> {
    y.parse::<i64>().ok().map(|y| s.enter_pair(x, y))
}

fn suspend(s: &mut TestSession, detail: &str) -> Result<(), CliError> {
    s.apply(Event::Suspend {
        reason: SuspendReason::InvalidResponse,
        detail: detail.into(),
    })?;
    Ok(())
}
