//! Run configuration, experiment dispatch and output.
//!
//! Configs are flat `key = value` files (`#` starts a comment). Values are
//! overridden, in order, by `GPPA_<KEY>` environment variables and by
//! explicit `key=value` assignments.

mod experiments;
mod table;

pub use experiments::run_experiment;
pub use table::{Cell, Table};

use crate::delta::DeltaConfig;
use crate::{GppaError, Result};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub const ENV_PREFIX: &str = "GPPA_";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    DhoProbabilities,
    DhoLifetime,
    DeltaResonance,
    DeltaProfile,
    FloquetProfile,
    CompareProfiles,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::DhoProbabilities,
        Experiment::DhoLifetime,
        Experiment::DeltaResonance,
        Experiment::DeltaProfile,
        Experiment::FloquetProfile,
        Experiment::CompareProfiles,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::DhoProbabilities => "dho_probabilities",
            Experiment::DhoLifetime => "dho_lifetime",
            Experiment::DeltaResonance => "delta_resonance",
            Experiment::DeltaProfile => "delta_profile",
            Experiment::FloquetProfile => "floquet_profile",
            Experiment::CompareProfiles => "compare_profiles",
        }
    }

    fn is_dho(self) -> bool {
        matches!(self, Experiment::DhoProbabilities | Experiment::DhoLifetime)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = GppaError;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| GppaError::Invalid(format!("unknown experiment {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = GppaError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(GppaError::Invalid(format!("unknown format {s:?} (csv or json)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.count < 2 {
            return vec![self.start];
        }
        (0..self.count)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{:?}:{:?}:{}", self.name, self.start, self.stop, self.count)
    }
}

/// Keys a sweep may vary.
pub const SWEEPABLE: [&str; 6] = ["a", "sigma", "omega", "g0", "periods", "resonance_window"];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    // oscillator
    pub a: f64,
    pub sigma: f64,
    pub omega: f64,
    pub force: bool,
    pub pairs: Vec<(usize, usize)>,
    pub levels: Vec<usize>,
    pub r_max: usize,
    // delta barrier
    pub delta: DeltaConfig,
    pub sideband: usize,
    pub eps_start: f64,
    pub eps_stop: f64,
    pub eps_count: usize,
    pub n_side: usize,
    // run
    pub sweep: Option<Sweep>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub threads: usize,
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        RunConfig {
            experiment,
            a: 0.5,
            sigma: 5.0,
            omega: 1.0,
            force: false,
            pairs: vec![(1, 0), (2, 0), (2, 1), (2, 2)],
            levels: vec![0, 1, 2],
            r_max: 12,
            delta: DeltaConfig::default(),
            sideband: 1,
            eps_start: 0.005,
            eps_stop: 0.995,
            eps_count: 100,
            n_side: crate::floquet::DEFAULT_N_SIDE,
            sweep: None,
            format: Format::Csv,
            out: None,
            seed: 0,
            threads: 0,
        }
    }

    /// Parse a config file body on top of the experiment defaults.
    pub fn parse(experiment: Experiment, text: &str) -> Result<Self> {
        let mut cfg = RunConfig::new(experiment);
        let mut errs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    if let Err(e) = cfg.set(k.trim(), v.trim()) {
                        errs.push(format!("line {}: {e}", lineno + 1));
                    }
                }
                None => errs.push(format!("line {}: expected key = value, got {line:?}", lineno + 1)),
            }
        }
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(GppaError::Validation(errs))
        }
    }

    /// Apply `GPPA_<KEY>` overrides from an environment listing.
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<()> {
        let mut errs = Vec::new();
        let mut vars: Vec<(String, String)> = vars.into_iter().collect();
        vars.sort();
        for (k, v) in vars {
            if let Some(key) = k.strip_prefix(ENV_PREFIX) {
                if let Err(e) = self.set(&key.to_ascii_lowercase(), &v) {
                    errs.push(format!("{k}: {e}"));
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(GppaError::Validation(errs))
        }
    }

    /// Apply `key=value` assignments.
    pub fn apply_sets<S: AsRef<str>>(&mut self, sets: &[S]) -> Result<()> {
        let mut errs = Vec::new();
        for s in sets {
            match s.as_ref().split_once('=') {
                Some((k, v)) => {
                    if let Err(e) = self.set(k.trim(), v.trim()) {
                        errs.push(format!("--set {}: {e}", s.as_ref()));
                    }
                }
                None => errs.push(format!("--set {:?}: expected key=value", s.as_ref())),
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(GppaError::Validation(errs))
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("cannot parse {v:?}"))
        }
        fn flag(v: &str) -> std::result::Result<bool, String> {
            match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(true),
                "false" | "no" | "0" | "off" => Ok(false),
                _ => Err(format!("cannot parse {v:?} as a boolean")),
            }
        }
        match key {
            "experiment" => {
                let e: Experiment = value.parse().map_err(|e: GppaError| e.to_string())?;
                if e != self.experiment {
                    return Err(format!("config is for {e}, not {}", self.experiment));
                }
            }
            "a" => self.a = num(value)?,
            "sigma" => self.sigma = num(value)?,
            "omega" => self.omega = num(value)?,
            "force" => self.force = flag(value)?,
            "pairs" => self.pairs = parse_pairs(value)?,
            "levels" => {
                self.levels = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| num(s.trim()))
                    .collect::<std::result::Result<_, _>>()?
            }
            "r_max" => self.r_max = num(value)?,
            "g0" => self.delta.g0 = num(value)?,
            "k_max" => self.delta.k_max = num(value)?,
            "nodes" => self.delta.nodes = num(value)?,
            "nu_max" => self.delta.nu_max = num(value)?,
            "periods" => {
                let p: f64 = num(value)?;
                if p.fract() != 0.0 || p < 0.0 {
                    return Err(format!("periods must be a whole number (got {value})"));
                }
                self.delta.periods = p as usize;
            }
            "tau_nodes" => self.delta.tau_nodes = num(value)?,
            "resonance_window" => self.delta.resonance_window = num(value)?,
            "retain_continuum_term" => self.delta.retain_continuum_term = flag(value)?,
            "sideband" => self.sideband = num(value)?,
            "eps_start" => self.eps_start = num(value)?,
            "eps_stop" => self.eps_stop = num(value)?,
            "eps_count" => self.eps_count = num(value)?,
            "n_side" => self.n_side = num(value)?,
            "sweep" => self.sweep = if value.is_empty() || value == "none" { None } else { Some(parse_sweep(value)?) },
            "format" => self.format = value.parse().map_err(|e: GppaError| e.to_string())?,
            "out" => self.out = if value.is_empty() { None } else { Some(PathBuf::from(value)) },
            "seed" => self.seed = num(value)?,
            "threads" => self.threads = num(value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Every key with its current value, in a fixed order; echoed into output.
    pub fn entries(&self) -> Vec<(String, String)> {
        let pairs: Vec<String> = self.pairs.iter().map(|(n, m)| format!("{n},{m}")).collect();
        let levels: Vec<String> = self.levels.iter().map(|n| n.to_string()).collect();
        let mut e: Vec<(&str, String)> = vec![("experiment", self.experiment.to_string())];
        if self.experiment.is_dho() {
            e.extend([
                ("a", format!("{:?}", self.a)),
                ("sigma", format!("{:?}", self.sigma)),
                ("omega", format!("{:?}", self.omega)),
                ("force", self.force.to_string()),
                ("pairs", pairs.join(";")),
                ("levels", levels.join(",")),
                ("r_max", self.r_max.to_string()),
            ]);
        } else {
            let d = &self.delta;
            e.extend([
                ("g0", format!("{:?}", d.g0)),
                ("k_max", format!("{:?}", d.k_max)),
                ("nodes", d.nodes.to_string()),
                ("nu_max", d.nu_max.to_string()),
                ("periods", d.periods.to_string()),
                ("tau_nodes", d.tau_nodes.to_string()),
                ("resonance_window", format!("{:?}", d.resonance_window)),
                ("retain_continuum_term", d.retain_continuum_term.to_string()),
                ("sideband", self.sideband.to_string()),
                ("eps_start", format!("{:?}", self.eps_start)),
                ("eps_stop", format!("{:?}", self.eps_stop)),
                ("eps_count", self.eps_count.to_string()),
                ("n_side", self.n_side.to_string()),
            ]);
        }
        e.push(("sweep", self.sweep.as_ref().map(|s| s.to_string()).unwrap_or_else(|| "none".into())));
        e.push(("seed", self.seed.to_string()));
        e.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn eps_grid(&self) -> Vec<f64> {
        Sweep { name: String::new(), start: self.eps_start, stop: self.eps_stop, count: self.eps_count }.values()
    }
}

fn parse_pairs(v: &str) -> std::result::Result<Vec<(usize, usize)>, String> {
    v.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|p| {
            let (n, m) = p.split_once(',').ok_or_else(|| format!("pair {p:?} is not n,m"))?;
            let n = n.trim().parse().map_err(|_| format!("bad level in {p:?}"))?;
            let m = m.trim().parse().map_err(|_| format!("bad level in {p:?}"))?;
            Ok((n, m))
        })
        .collect()
}

fn parse_sweep(v: &str) -> std::result::Result<Sweep, String> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("sweep {v:?} is not name:start:stop:count"));
    }
    let f = |s: &str| s.parse::<f64>().map_err(|_| format!("bad number {s:?} in sweep"));
    Ok(Sweep {
        name: parts[0].to_string(),
        start: f(parts[1])?,
        stop: f(parts[2])?,
        count: parts[3].parse().map_err(|_| format!("bad count {:?} in sweep", parts[3]))?,
    })
}

/// Every violated precondition of `run`; empty when the config is runnable.
pub fn validate(cfg: &RunConfig) -> Vec<String> {
    let mut v = Vec::new();
    if cfg.experiment.is_dho() {
        if !(cfg.omega > 0.0 && cfg.omega.is_finite()) {
            v.push(format!("omega must be positive (got {})", cfg.omega));
        }
        if !(cfg.sigma > 0.0 && cfg.sigma.is_finite()) {
            v.push(format!("sigma must be positive (got {})", cfg.sigma));
        } else if cfg.omega > 0.0 && cfg.sigma < 5.0 * cfg.omega && !cfg.force {
            v.push(format!("sigma/Omega below 5 ({}); set force = true to override", cfg.sigma / cfg.omega));
        }
        if !(cfg.a >= 0.0 && cfg.a.is_finite()) {
            v.push(format!("a must be >= 0 (got {})", cfg.a));
        }
        if cfg.r_max < 4 {
            v.push(format!("r_max must be >= 4 (got {})", cfg.r_max));
        }
        match cfg.experiment {
            Experiment::DhoProbabilities if cfg.pairs.is_empty() => v.push("pairs is empty".into()),
            Experiment::DhoLifetime if cfg.levels.is_empty() => v.push("levels is empty".into()),
            _ => {}
        }
    } else {
        if let Err(GppaError::Validation(errs)) = cfg.delta.validate() {
            v.extend(errs);
        }
        if cfg.sideband == 0 {
            v.push("sideband must be >= 1".into());
        }
        if cfg.experiment != Experiment::DeltaResonance {
            if !(cfg.eps_start > 0.0) {
                v.push(format!("eps_start must be > 0 (got {})", cfg.eps_start));
            }
            if !(cfg.eps_stop > cfg.eps_start) {
                v.push(format!("eps_stop must exceed eps_start (got {} <= {})", cfg.eps_stop, cfg.eps_start));
            }
            if cfg.eps_count < 2 {
                v.push(format!("eps_count must be >= 2 (got {})", cfg.eps_count));
            }
            if 0.5 * cfg.delta.k_max * cfg.delta.k_max <= cfg.eps_stop {
                v.push(format!("eps_stop = {} beyond the momentum grid", cfg.eps_stop));
            }
        }
        if cfg.n_side < 2 {
            v.push(format!("n_side must be >= 2 (got {})", cfg.n_side));
        }
    }
    if let Some(s) = &cfg.sweep {
        if s.count < 2 {
            v.push(format!("sweep count must be >= 2 (got {})", s.count));
        }
        if !SWEEPABLE.contains(&s.name.as_str()) {
            v.push(format!("sweep parameter {:?} not one of {}", s.name, SWEEPABLE.join(", ")));
        } else {
            let dho_key = matches!(s.name.as_str(), "a" | "sigma" | "omega");
            if dho_key != cfg.experiment.is_dho() {
                v.push(format!("sweep parameter {:?} does not apply to {}", s.name, cfg.experiment));
            } else {
                // every sweep point must itself validate
                for x in [s.start, s.stop] {
                    let mut c = cfg.clone();
                    c.sweep = None;
                    if let Err(e) = c.set(&s.name, &format!("{x:?}")) {
                        v.push(format!("sweep endpoint: {e}"));
                    } else {
                        let fresh: Vec<String> = validate(&c).into_iter().filter(|m| !v.contains(m)).collect();
                        v.extend(fresh.into_iter().map(|m| format!("sweep endpoint {x}: {m}")));
                    }
                }
            }
        }
    }
    v
}

/// Validate, then run on a pool of `threads` workers (0 = all cores).
pub fn run(cfg: &RunConfig) -> Result<Table> {
    let errs = validate(cfg);
    if !errs.is_empty() {
        return Err(GppaError::Validation(errs));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| GppaError::Invalid(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(cfg))
}

/// Encode a table in the configured format, with the config echo for CSV.
pub fn render(cfg: &RunConfig, table: &Table) -> String {
    match cfg.format {
        Format::Csv => table.to_csv(&cfg.entries()),
        Format::Json => table.to_json(),
    }
}
