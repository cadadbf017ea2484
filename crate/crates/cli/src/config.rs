//! Experiment configuration: per-command parameter tables, flat
//! `key=value` files and flag overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CommandName {
    Stabilize,
    Purify,
    Entangle,
    Bellpurify,
    Julia,
    SmeRun,
    SpinCollapse,
}

impl CommandName {
    pub const ALL: [CommandName; 7] = [
        CommandName::Stabilize,
        CommandName::Purify,
        CommandName::Entangle,
        CommandName::Bellpurify,
        CommandName::Julia,
        CommandName::SmeRun,
        CommandName::SpinCollapse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Stabilize => "stabilize",
            CommandName::Purify => "purify",
            CommandName::Entangle => "entangle",
            CommandName::Bellpurify => "bellpurify",
            CommandName::Julia => "julia",
            CommandName::SmeRun => "sme-run",
            CommandName::SpinCollapse => "spin-collapse",
        }
    }

    pub fn parse(s: &str) -> anyhow::Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| anyhow!("unknown command `{s}`"))
    }

    pub fn about(self) -> &'static str {
        match self {
            CommandName::Stabilize => "Dephasing stabilization: gain surface and Monte-Carlo check at one point",
            CommandName::Purify => "Qubit purification under continuous measurement, with and without feedback",
            CommandName::Entangle => "Two-qubit entanglement by σz⊗σz measurement and local feedback",
            CommandName::Bellpurify => "Iterated squaring map on the perturbed Bell fixture",
            CommandName::Julia => "Convergence-time raster of the induced rational map",
            CommandName::SmeRun => "Qubit dephasing ensemble against the averaged master equation",
            CommandName::SpinCollapse => "Spin-j ensemble collapse under continuous F_z measurement",
        }
    }

    pub fn params(self) -> &'static [ParamSpec] {
        use Check::*;
        use Kind::*;
        match self {
            CommandName::Stabilize => {
                const T: &[ParamSpec] = &[
                    ParamSpec::new("p", Real, "0.115", HalfUnit, "dephasing probability"),
                    ParamSpec::new("theta", Real, "0.715", QuarterTurn, "input-state angle in [0, π/2]"),
                    ParamSpec::new("samples", Count, "100000", Positive, "Monte-Carlo samples per scheme"),
                    ParamSpec::new("n-p", Count, "50", AtLeastTwo, "surface grid points in p"),
                    ParamSpec::new("n-theta", Count, "50", AtLeastTwo, "surface grid points in θ"),
                ];
                T
            }
            CommandName::Purify => {
                const T: &[ParamSpec] = &[
                    ParamSpec::new("k", Real, "1", Positive, "measurement strength"),
                    ParamSpec::new("dt", Real, "1e-4", Positive, "time step"),
                    ParamSpec::new("horizon", Real, "2", Positive, "final time"),
                    ParamSpec::new("trajectories", Count, "1000", Positive, "ensemble size"),
                    ParamSpec::new("checkpoints", Count, "20", Positive, "evenly spaced output times"),
                    ParamSpec::new("target", Real, "1e-3", Positive, "impurity target for the speed-up ratio"),
                ];
                T
            }
            CommandName::Entangle => {
                const T: &[ParamSpec] = &[
                    ParamSpec::new("k", Real, "1", Positive, "measurement strength"),
                    ParamSpec::new("dt", Real, "1e-3", Positive, "time step"),
                    ParamSpec::new("budget", Real, "10", Positive, "time budget in units of 1/k"),
                    ParamSpec::new("runs", Count, "100", Positive, "independent runs from I/4"),
                    ParamSpec::new("sample-every", Count, "100", Positive, "steps between path samples of run 0"),
                ];
                T
            }
            CommandName::Bellpurify => {
                const T: &[ParamSpec] = &[
                    ParamSpec::new("steps", Count, "30", Positive, "iterations of the map"),
                    ParamSpec::new("x", Real, "0.7853981633974483", Finite, "rotation angle x"),
                    ParamSpec::new("phi", Real, "1.5707963267948966", Finite, "rotation phase φ"),
                ];
                T
            }
            CommandName::Julia => {
                const T: &[ParamSpec] = &[
                    ParamSpec::new("p-re", Real, "1", Finite, "Re p"),
                    ParamSpec::new("p-im", Real, "0", Finite, "Im p"),
                    ParamSpec::new("grid", Grid, "512x512", AtLeastTwo, "raster size WIDTHxHEIGHT"),
                    ParamSpec::new("max-iters", Count, "60", Positive, "iterations per pixel"),
                    ParamSpec::new("cycle-tol", Real, "1e-9", Positive, "chordal tolerance for cycle detection"),
                    ParamSpec::new("re-min", Real, "-2", Finite, "viewport"),
                    ParamSpec::new("re-max", Real, "2", Finite, "viewport"),
                    ParamSpec::new("im-min", Real, "-2", Finite, "viewport"),
                    ParamSpec::new("im-max", Real, "2", Finite, "viewport"),
                ];
                T
            }
            CommandName::SmeRun => {
                const T: &[ParamSpec] = &[
                    ParamSpec::new("k", Real, "1", Positive, "measurement strength"),
                    ParamSpec::new("dt", Real, "1e-3", Positive, "time step"),
                    ParamSpec::new("steps", Count, "1000", Positive, "steps per trajectory"),
                    ParamSpec::new("trajectories", Count, "10000", Positive, "ensemble size"),
                    ParamSpec::new("sample-every", Count, "50", Positive, "steps between output rows"),
                ];
                T
            }
            CommandName::SpinCollapse => {
                const T: &[ParamSpec] = &[
                    ParamSpec::new("two-j", Count, "2", Positive, "twice the spin"),
                    ParamSpec::new("m", Real, "1", Positive, "measurement strength M"),
                    ParamSpec::new("eta", Real, "1", UnitInterval, "detection efficiency"),
                    ParamSpec::new("dt", Real, "1e-3", Positive, "time step"),
                    ParamSpec::new("steps", Count, "5000", Positive, "steps per trajectory"),
                    ParamSpec::new("trajectories", Count, "200", Positive, "ensemble size"),
                ];
                T
            }
        }
    }
}

impl fmt::Display for CommandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Real,
    Count,
    /// WIDTHxHEIGHT
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Finite,
    Positive,
    AtLeastTwo,
    UnitInterval,
    HalfUnit,
    QuarterTurn,
}

impl Check {
    fn accepts(self, x: f64) -> bool {
        match self {
            Check::Finite => x.is_finite(),
            Check::Positive => x.is_finite() && x > 0.0,
            Check::AtLeastTwo => x >= 2.0,
            Check::UnitInterval => (0.0..=1.0).contains(&x),
            Check::HalfUnit => (0.0..=0.5).contains(&x),
            Check::QuarterTurn => (0.0..=std::f64::consts::FRAC_PI_2).contains(&x),
        }
    }

    fn describe(self) -> &'static str {
        match self {
            Check::Finite => "a finite number",
            Check::Positive => "> 0",
            Check::AtLeastTwo => "≥ 2",
            Check::UnitInterval => "in [0, 1]",
            Check::HalfUnit => "in [0, 0.5]",
            Check::QuarterTurn => "in [0, π/2]",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub key: &'static str,
    pub kind: Kind,
    pub default: &'static str,
    pub check: Check,
    pub help: &'static str,
}

impl ParamSpec {
    const fn new(key: &'static str, kind: Kind, default: &'static str, check: Check, help: &'static str) -> Self {
        ParamSpec { key, kind, default, check, help }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Real(f64),
    Count(u64),
    Grid(usize, usize),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(x) => write!(f, "{}", crate::output::fmt_real(*x)),
            Value::Count(n) => write!(f, "{n}"),
            Value::Grid(w, h) => write!(f, "{w}x{h}"),
        }
    }
}

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: CommandName,
    pub params: BTreeMap<&'static str, Value>,
    pub seed: u64,
    pub out_path: PathBuf,
}

/// Raw settings before validation: file entries first, then flags on top.
#[derive(Debug, Clone, Default)]
pub struct RawSettings {
    pub entries: BTreeMap<String, String>,
}

impl RawSettings {
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.replace('_', "-"), value.into());
    }

    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_text(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn from_text(text: &str) -> anyhow::Result<Self> {
        let mut out = RawSettings::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value", n + 1))?;
            out.set(k.trim(), v.trim());
        }
        Ok(out)
    }

    pub fn merge(&mut self, over: RawSettings) {
        self.entries.extend(over.entries);
    }
}

fn parse_value(spec: &ParamSpec, raw: &str) -> Result<Value, String> {
    let bad = || format!("`{}` must be {}, got `{raw}`", spec.key, spec.check.describe());
    match spec.kind {
        Kind::Real => {
            let x: f64 = raw.parse().map_err(|_| format!("`{}` is not a number: `{raw}`", spec.key))?;
            if spec.check.accepts(x) {
                Ok(Value::Real(x))
            } else {
                Err(bad())
            }
        }
        Kind::Count => {
            let n: u64 = raw
                .parse()
                .map_err(|_| format!("`{}` must be a non-negative integer, got `{raw}`", spec.key))?;
            if spec.check.accepts(n as f64) {
                Ok(Value::Count(n))
            } else {
                Err(bad())
            }
        }
        Kind::Grid => {
            let parsed = raw
                .split_once(['x', 'X'])
                .and_then(|(w, h)| Some((w.trim().parse::<usize>().ok()?, h.trim().parse::<usize>().ok()?)));
            match parsed {
                Some((w, h)) if spec.check.accepts(w as f64) && spec.check.accepts(h as f64) => Ok(Value::Grid(w, h)),
                Some(_) => Err(bad()),
                None => Err(format!("`{}` must look like 512x512, got `{raw}`", spec.key)),
            }
        }
    }
}

/// Resolve defaults, file and flag settings for `command`. Every invalid
/// or unknown field is reported in one error.
pub fn parse_config(command: CommandName, settings: &RawSettings) -> anyhow::Result<ExperimentConfig> {
    let specs = command.params();
    let mut errors = Vec::new();
    let mut seed = DEFAULT_SEED;
    let mut out_path = PathBuf::from("out");
    for key in settings.entries.keys() {
        let known = specs.iter().any(|s| s.key == key) || key == "seed" || key == "out";
        if !known {
            errors.push(format!("unknown key `{key}` for {command}"));
        }
    }
    if let Some(s) = settings.entries.get("seed") {
        match s.parse() {
            Ok(v) => seed = v,
            Err(_) => errors.push(format!("`seed` must be a non-negative integer, got `{s}`")),
        }
    }
    if let Some(o) = settings.entries.get("out") {
        if o.is_empty() {
            errors.push("`out` must not be empty".to_string());
        }
        out_path = PathBuf::from(o);
    }
    let mut params = BTreeMap::new();
    for spec in specs {
        let raw = settings.entries.get(spec.key).map(String::as_str).unwrap_or(spec.default);
        match parse_value(spec, raw) {
            Ok(v) => {
                params.insert(spec.key, v);
            }
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        bail!("invalid configuration:\n  {}", errors.join("\n  "));
    }
    Ok(ExperimentConfig {
        command,
        params,
        seed,
        out_path,
    })
}

impl ExperimentConfig {
    pub fn real(&self, key: &str) -> f64 {
        match self.params.get(key) {
            Some(Value::Real(x)) => *x,
            Some(Value::Count(n)) => *n as f64,
            other => panic!("`{key}` is not a real parameter: {other:?}"),
        }
    }

    pub fn count(&self, key: &str) -> u64 {
        match self.params.get(key) {
            Some(Value::Count(n)) => *n,
            other => panic!("`{key}` is not a count parameter: {other:?}"),
        }
    }

    pub fn grid(&self, key: &str) -> (usize, usize) {
        match self.params.get(key) {
            Some(Value::Grid(w, h)) => (*w, *h),
            other => panic!("`{key}` is not a grid parameter: {other:?}"),
        }
    }

    /// `# key=value` lines recorded at the top of every output. Thread
    /// count and output directory are left out so they cannot change bytes.
    pub fn preamble(&self) -> String {
        let mut s = format!("# qfc {}\n# seed={}\n", self.command, self.seed);
        for (k, v) in &self.params {
            s.push_str(&format!("# {k}={v}\n"));
        }
        s
    }
}
