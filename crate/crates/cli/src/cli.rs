//! Command-line surface built from the parameter tables.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::config::{parse_config, CommandName, ExperimentConfig, RawSettings};

pub fn command() -> Command {
    let mut root = Command::new("qfc")
        .about("Quantum feedback-control experiments with reproducible CSV/PGM output")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("threads")
                .long("threads")
                .global(true)
                .env("QFC_THREADS")
                .value_parser(clap::value_parser!(usize))
                .help("worker threads (0 = one per core); outputs do not depend on it"),
        );
    for c in CommandName::ALL {
        let mut sub = Command::new(c.as_str())
            .about(c.about())
            .arg(Arg::new("config").long("config").value_name("FILE").help("flat key=value file; flags override it"))
            .arg(Arg::new("seed").long("seed").help("base seed [default: 1]"))
            .arg(Arg::new("out").long("out").value_name("DIR").help("output directory [default: out]"));
        for spec in c.params() {
            sub = sub.arg(
                Arg::new(spec.key)
                    .long(spec.key)
                    .action(ArgAction::Set)
                    .allow_negative_numbers(true)
                    .help(format!("{} [default: {}]", spec.help, spec.default)),
            );
        }
        root = root.subcommand(sub);
    }
    root
}

pub struct Invocation {
    pub config: ExperimentConfig,
    pub threads: Option<usize>,
}

/// File settings first, then every flag given on the command line.
pub fn resolve(matches: &ArgMatches) -> anyhow::Result<Invocation> {
    let (name, sub) = matches.subcommand().context("no command given")?;
    let command = CommandName::parse(name)?;
    let mut settings = match sub.get_one::<String>("config") {
        Some(path) => RawSettings::from_file(&PathBuf::from(path))?,
        None => RawSettings::default(),
    };
    let mut flags = RawSettings::default();
    let keys = command.params().iter().map(|s| s.key).chain(["seed", "out"]);
    for key in keys {
        if let Some(v) = sub.get_one::<String>(key) {
            flags.set(key, v.clone());
        }
    }
    settings.merge(flags);
    let threads = matches.get_one::<usize>("threads").copied().filter(|&n| n > 0);
    Ok(Invocation {
        config: parse_config(command, &settings)?,
        threads,
    })
}

pub fn parse_args<I, T>(args: I) -> anyhow::Result<Invocation>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let m = command().try_get_matches_from(args)?;
    resolve(&m)
}
