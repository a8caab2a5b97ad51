//! `--config` TOML overlay.
//!
//! Config values are turned into extra flags for every argument that was
//! neither given on the command line nor taken from the environment, and
//! the arguments are parsed again.

use std::ffi::OsString;

use clap::parser::ValueSource;
use clap::{ArgMatches, Command};

pub(crate) enum ParseFailure {
    Clap(clap::Error),
    Config(String),
}

impl From<clap::Error> for ParseFailure {
    fn from(e: clap::Error) -> Self {
        ParseFailure::Clap(e)
    }
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

fn scalar(key: &str, v: &toml::Value) -> Result<String, String> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        other => Err(format!("config key {key:?}: unsupported value {other}")),
    }
}

/// Appends flags for the plain (non-table) keys of `table` that `matches`
/// did not get from the command line or environment.
fn overlay_table(
    table: &toml::Table,
    cmd: &Command,
    matches: &ArgMatches,
    section: &str,
    extra: &mut Vec<OsString>,
) -> Result<(), String> {
    for (key, value) in table {
        if value.is_table() {
            continue;
        }
        let long = key.replace('_', "-");
        let arg = cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(long.as_str()))
            .ok_or_else(|| {
                format!(
                    "unknown config key {key:?} in {}",
                    if section.is_empty() {
                        "top level"
                    } else {
                        section
                    }
                )
            })?;
        if long == "config" {
            return Err("config files cannot name another config file".to_string());
        }
        let explicit = matches!(
            matches.value_source(arg.get_id().as_str()),
            Some(ValueSource::CommandLine | ValueSource::EnvVariable)
        );
        if explicit {
            continue;
        }
        let values = match value {
            toml::Value::Array(items) => items
                .iter()
                .map(|v| scalar(key, v))
                .collect::<Result<Vec<_>, _>>()?,
            toml::Value::Boolean(true) => {
                extra.push(format!("--{long}").into());
                continue;
            }
            toml::Value::Boolean(false) => continue,
            v => vec![scalar(key, v)?],
        };
        for v in values {
            extra.push(format!("--{long}").into());
            extra.push(v.into());
        }
    }
    Ok(())
}

pub(crate) fn parse_with_config(
    cmd: Command,
    args: Vec<OsString>,
) -> Result<ArgMatches, ParseFailure> {
    let Some(path) = config_path(&args) else {
        return Ok(cmd.try_get_matches_from(args)?);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| {
        ParseFailure::Config(format!("reading config {}: {e}", path.to_string_lossy()))
    })?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| {
        ParseFailure::Config(format!("parsing config {}: {e}", path.to_string_lossy()))
    })?;

    // A strict parse first: flags that are still missing may come from the
    // config, so tolerate only missing-argument errors.
    let first = match cmd.clone().try_get_matches_from(&args) {
        Ok(m) => m,
        Err(e) if e.kind() == clap::error::ErrorKind::MissingRequiredArgument => cmd
            .clone()
            .ignore_errors(true)
            .try_get_matches_from(&args)?,
        Err(e) => return Err(e.into()),
    };

    let mut extra = Vec::new();
    overlay_table(&table, &cmd, &first, "", &mut extra).map_err(ParseFailure::Config)?;

    let mut sub_cmd = &cmd;
    let mut sub_matches = &first;
    let mut sub_table = &table;
    let mut section = String::new();
    while let Some((name, m)) = sub_matches.subcommand() {
        sub_cmd = sub_cmd
            .find_subcommand(name)
            .expect("matched subcommand exists");
        sub_matches = m;
        section = if section.is_empty() {
            name.to_string()
        } else {
            format!("{section}.{name}")
        };
        match sub_table.get(name) {
            Some(toml::Value::Table(t)) => sub_table = t,
            Some(_) => {
                return Err(ParseFailure::Config(format!(
                    "config key {section:?} must be a table"
                )))
            }
            None => break,
        }
        overlay_table(sub_table, sub_cmd, sub_matches, &section, &mut extra)
            .map_err(ParseFailure::Config)?;
    }

    let mut full = args;
    full.extend(extra);
    Ok(cmd.try_get_matches_from(full)?)
}
