//! Number lists from files or inline comma lists.

use std::path::Path;

use crate::CliError;

/// Reads a list of numbers. An existing path is read as a file of
/// whitespace, comma or newline separated numerals; anything else is parsed
/// as an inline list such as `0,1,1,0`.
pub fn read_numbers(arg: &str) -> Result<Vec<f64>, CliError> {
    let text = if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|e| CliError::Args(format!("{arg}: {e}")))?
    } else {
        arg.to_string()
    };
    parse_numbers(&text).map_err(|e| CliError::Args(format!("{arg}: {e}")))
}

pub fn parse_numbers(text: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
        .collect()
}

/// Responses must be integers; anything else is left for the session to
/// reject (and suspend on).
pub fn read_responses(arg: &str) -> Result<Vec<i64>, CliError> {
    read_numbers(arg)?
        .into_iter()
        .map(|v| {
            if v.fract() == 0.0 && v.abs() < 1e15 {
                Ok(v as i64)
            } else {
                Err(CliError::Args(format!("response {v} is not an integer")))
            }
        })
        .collect()
}
