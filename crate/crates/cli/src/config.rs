// SPDX-License-Identifier: MIT OR Apache-2.0

//! `--config FILE` support: file entries are spliced into the argument list
//! directly after the subcommand, so explicit flags (parsed later) win.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Command;

use crate::CliError;

fn config_path(args: &[OsString]) -> Result<Option<PathBuf>, CliError> {
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        let Some(s) = a.to_str() else { continue };
        if s == "--" {
            break;
        }
        if let Some(path) = s.strip_prefix("--config=") {
            return Ok(Some(path.into()));
        }
        if s == "--config" {
            return match iter.next() {
                Some(path) => Ok(Some(path.into())),
                None => Err(CliError::Usage("--config needs a file path".into())),
            };
        }
    }
    Ok(None)
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Some(true),
        "false" | "no" | "0" | "off" => Some(false),
        _ => None,
    }
}

/// Returns `argv` with the referenced configuration file expanded.
pub fn expand(argv: Vec<OsString>, cli: &Command) -> Result<Vec<OsString>, CliError> {
    let Some(sub_name) = argv.get(1).and_then(|s| s.to_str()).map(str::to_owned) else {
        return Ok(argv);
    };
    let Some(sub) = cli.find_subcommand(&sub_name) else {
        return Ok(argv);
    };
    let Some(path) = config_path(&argv[2..])? else {
        return Ok(argv);
    };
    let bad = |reason: String| CliError::Config {
        path: path.clone(),
        reason,
    };
    let text = std::fs::read_to_string(&path).map_err(|e| bad(e.to_string()))?;
    let entries = clusterscan::io::parse_config(&text).map_err(|e| bad(e.to_string()))?;

    let mut spliced = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            return Err(bad("a configuration file cannot include another".into()));
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| bad(format!("unknown key {key:?} for `{sub_name}`")))?;
        if arg.get_action().takes_values() {
            spliced.push(OsString::from(format!("--{key}={value}")));
        } else {
            match parse_bool(&value) {
                Some(true) => spliced.push(OsString::from(format!("--{key}"))),
                Some(false) => {}
                None => return Err(bad(format!("{key} expects true or false, got {value:?}"))),
            }
        }
    }
    let mut out = argv;
    out.splice(2..2, spliced);
    Ok(out)
}
