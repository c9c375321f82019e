//! INI-style run configuration.
//!
//! ```text
//! [detectors]
//! eta_det = 0.1,0.1,0.1,0.1
//! eta_trans = 1,1,0.1,0.1
//! p_dark = 0.00005,0.00005,0.00005,0.00005
//!
//! [tap]
//! vsq = 0.25
//!
//! [entanglement]
//! zeta = 1,10,100,1000
//! zeta_inf_threshold = 1e40
//! n_cap = 32
//!
//! [entropy]
//! renyi = 1.1
//! kmax = auto
//!
//! [energy]
//! kind = poisson
//! mu = 0.01
//!
//! [grid]
//! kind = fine_coarse
//! fine_incr = 0.0001
//! mu_fine_max = 0.007
//! coarse_incr = 0.002
//! mu_max = 0.04
//! mu_begin = 0
//!
//! [sifting]
//! basis_match_factor = false
//!
//! [output]
//! csv = sweep.csv
//! ```
//!
//! Every key is optional; unset keys keep their defaults. Unknown sections
//! and keys are rejected.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ini::{Ini, ParseOption};

use crate::detection::{DetectorParams, TapParams};
use crate::entanglement::DEFAULT_ZETA_INF_THRESHOLD;
use crate::error::{Error, Result};
use crate::gfunctions::{CustomWeights, EnergyDistribution};
use crate::metrics::{renyi_entropy, MetricOptions, DEFAULT_RENYI};
use crate::partitions::DEFAULT_N_CAP;
use crate::sweep::{ModelParams, MuGrid};

/// Largest supported partition depth.
pub const MAX_N_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyKind {
    Poisson,
    Fixed,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    FineCoarse,
    Uniform,
}

/// Parsed but not yet cross-validated settings; see [`Config::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub eta_det: [f64; 4],
    pub eta_trans: [f64; 4],
    pub p_dark: [f64; 4],
    pub vsq: f64,
    /// Intermediate ζ values; `f64::INFINITY` stands for `inf`.
    pub zeta: Vec<f64>,
    pub zeta_inf_threshold: f64,
    pub n_cap: usize,
    pub renyi: f64,
    pub kmax: Option<usize>,
    pub energy_kind: EnergyKind,
    pub mu: f64,
    pub n: usize,
    pub weights: Vec<f64>,
    pub grid_kind: GridKind,
    pub fine_incr: f64,
    pub mu_fine_max: f64,
    pub coarse_incr: f64,
    pub incr: f64,
    pub mu_max: f64,
    pub mu_begin: f64,
    pub basis_match_factor: bool,
    pub csv: Option<PathBuf>,
    pub partitions: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        let det = DetectorParams::default();
        Config {
            eta_det: det.eta_det(),
            eta_trans: det.eta_trans(),
            p_dark: det.p_dark(),
            vsq: TapParams::default().vsq(),
            zeta: vec![1.0, 10.0, 100.0, 1000.0],
            zeta_inf_threshold: DEFAULT_ZETA_INF_THRESHOLD,
            n_cap: DEFAULT_N_CAP,
            renyi: DEFAULT_RENYI,
            kmax: None,
            energy_kind: EnergyKind::Poisson,
            mu: 0.01,
            n: 1,
            weights: Vec::new(),
            grid_kind: GridKind::FineCoarse,
            fine_incr: 1e-4,
            mu_fine_max: 0.007,
            coarse_incr: 0.002,
            incr: 0.002,
            mu_max: 0.04,
            mu_begin: 0.0,
            basis_match_factor: false,
            csv: None,
            partitions: None,
        }
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("detectors", &["eta_det", "eta_trans", "p_dark"]),
    ("tap", &["vsq"]),
    ("entanglement", &["zeta", "zeta_inf_threshold", "n_cap"]),
    ("entropy", &["renyi", "kmax"]),
    ("energy", &["kind", "mu", "n", "weights"]),
    (
        "grid",
        &[
            "kind",
            "fine_incr",
            "mu_fine_max",
            "coarse_incr",
            "incr",
            "mu_max",
            "mu_begin",
        ],
    ),
    ("sifting", &["basis_match_factor"]),
    ("output", &["csv", "partitions"]),
];

pub fn parse_f64(field: &str, text: &str) -> Result<f64> {
    let t = text.trim();
    t.parse::<f64>()
        .ok()
        .filter(|v| !v.is_nan())
        .ok_or_else(|| Error::config(field, format!("expected a number, found `{t}`")))
}

pub fn parse_usize(field: &str, text: &str) -> Result<usize> {
    let t = text.trim();
    t.parse::<usize>().map_err(|_| {
        Error::config(
            field,
            format!("expected a non-negative integer, found `{t}`"),
        )
    })
}

pub fn parse_list(field: &str, text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|t| parse_f64(field, t)).collect()
}

pub fn parse_quad(field: &str, text: &str) -> Result<[f64; 4]> {
    let v = parse_list(field, text)?;
    v.try_into().map_err(|v: Vec<f64>| {
        Error::config(
            field,
            format!("expected 4 comma-separated values, found {}", v.len()),
        )
    })
}

/// Comma-separated ζ values; `inf` is accepted.
pub fn parse_zeta_list(field: &str, text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            let t = t.trim();
            if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
                Ok(f64::INFINITY)
            } else {
                parse_f64(field, t)
            }
        })
        .collect()
}

fn parse_bool(field: &str, text: &str) -> Result<bool> {
    match text.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        t => Err(Error::config(
            field,
            format!("expected true or false, found `{t}`"),
        )),
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| {
            if v.is_infinite() {
                "inf".to_string()
            } else {
                v.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}

impl Config {
    pub fn from_ini_str(text: &str) -> Result<Self> {
        let opt = ParseOption {
            enabled_escape: false,
            ..ParseOption::default()
        };
        let ini = Ini::load_from_str_opt(text, opt).map_err(|e| Error::Parse {
            line: e.line + 1,
            message: e.msg.to_string(),
        })?;
        let mut cfg = Config::default();
        let mut seen_sections = HashSet::new();
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if let Some((key, _)) = props.iter().next() {
                    return Err(Error::config(key, "key outside of any section"));
                }
                continue;
            };
            let Some((_, keys)) = KEYS.iter().find(|(s, _)| *s == section) else {
                return Err(Error::config(section, "unknown section"));
            };
            if !seen_sections.insert(section.to_string()) {
                return Err(Error::config(section, "section appears more than once"));
            }
            let mut seen_keys = HashSet::new();
            for (key, value) in props.iter() {
                let field = format!("{section}.{key}");
                if !keys.contains(&key) {
                    return Err(Error::config(field, "unknown key"));
                }
                if !seen_keys.insert(key) {
                    return Err(Error::config(field, "key appears more than once"));
                }
                cfg.set(section, key, value)?;
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::from_ini_str(&text)
    }

    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let field = format!("{section}.{key}");
        let f = field.as_str();
        match (section, key) {
            ("detectors", "eta_det") => self.eta_det = parse_quad(f, value)?,
            ("detectors", "eta_trans") => self.eta_trans = parse_quad(f, value)?,
            ("detectors", "p_dark") => self.p_dark = parse_quad(f, value)?,
            ("tap", "vsq") => self.vsq = parse_f64(f, value)?,
            ("entanglement", "zeta") => self.zeta = parse_zeta_list(f, value)?,
            ("entanglement", "zeta_inf_threshold") => {
                self.zeta_inf_threshold = parse_f64(f, value)?
            }
            ("entanglement", "n_cap") => self.n_cap = parse_usize(f, value)?,
            ("entropy", "renyi") => self.renyi = parse_f64(f, value)?,
            ("entropy", "kmax") => {
                self.kmax = match value.trim() {
                    "auto" => None,
                    v => Some(parse_usize(f, v)?),
                }
            }
            ("energy", "kind") => {
                self.energy_kind = match value.trim() {
                    "poisson" => EnergyKind::Poisson,
                    "fixed" => EnergyKind::Fixed,
                    "custom" => EnergyKind::Custom,
                    v => {
                        return Err(Error::config(
                            f,
                            format!("expected poisson, fixed or custom, found `{v}`"),
                        ))
                    }
                }
            }
            ("energy", "mu") => self.mu = parse_f64(f, value)?,
            ("energy", "n") => self.n = parse_usize(f, value)?,
            ("energy", "weights") => self.weights = parse_list(f, value)?,
            ("grid", "kind") => {
                self.grid_kind = match value.trim() {
                    "fine_coarse" => GridKind::FineCoarse,
                    "uniform" => GridKind::Uniform,
                    v => {
                        return Err(Error::config(
                            f,
                            format!("expected fine_coarse or uniform, found `{v}`"),
                        ))
                    }
                }
            }
            ("grid", "fine_incr") => self.fine_incr = parse_f64(f, value)?,
            ("grid", "mu_fine_max") => self.mu_fine_max = parse_f64(f, value)?,
            ("grid", "coarse_incr") => self.coarse_incr = parse_f64(f, value)?,
            ("grid", "incr") => self.incr = parse_f64(f, value)?,
            ("grid", "mu_max") => self.mu_max = parse_f64(f, value)?,
            ("grid", "mu_begin") => self.mu_begin = parse_f64(f, value)?,
            ("sifting", "basis_match_factor") => self.basis_match_factor = parse_bool(f, value)?,
            ("output", "csv") => self.csv = non_empty_path(value),
            ("output", "partitions") => self.partitions = non_empty_path(value),
            _ => return Err(Error::config(f, "unknown key")),
        }
        Ok(())
    }

    /// Canonical text form; parsing it yields an equal `Config`.
    pub fn to_ini_string(&self) -> String {
        let mut s = String::new();
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        };
        let energy = match self.energy_kind {
            EnergyKind::Poisson => "poisson",
            EnergyKind::Fixed => "fixed",
            EnergyKind::Custom => "custom",
        };
        let grid = match self.grid_kind {
            GridKind::FineCoarse => "fine_coarse",
            GridKind::Uniform => "uniform",
        };
        let kmax = self.kmax.map_or("auto".to_string(), |k| k.to_string());
        writeln!(s, "[detectors]").unwrap();
        writeln!(s, "eta_det = {}", join(&self.eta_det)).unwrap();
        writeln!(s, "eta_trans = {}", join(&self.eta_trans)).unwrap();
        writeln!(s, "p_dark = {}", join(&self.p_dark)).unwrap();
        writeln!(s, "\n[tap]\nvsq = {}", self.vsq).unwrap();
        writeln!(s, "\n[entanglement]\nzeta = {}", join(&self.zeta)).unwrap();
        writeln!(s, "zeta_inf_threshold = {:e}", self.zeta_inf_threshold).unwrap();
        writeln!(s, "n_cap = {}", self.n_cap).unwrap();
        writeln!(s, "\n[entropy]\nrenyi = {}\nkmax = {kmax}", self.renyi).unwrap();
        writeln!(
            s,
            "\n[energy]\nkind = {energy}\nmu = {}\nn = {}",
            self.mu, self.n
        )
        .unwrap();
        writeln!(s, "weights = {}", join(&self.weights)).unwrap();
        writeln!(s, "\n[grid]\nkind = {grid}").unwrap();
        writeln!(
            s,
            "fine_incr = {}\nmu_fine_max = {}",
            self.fine_incr, self.mu_fine_max
        )
        .unwrap();
        writeln!(
            s,
            "coarse_incr = {}\nincr = {}",
            self.coarse_incr, self.incr
        )
        .unwrap();
        writeln!(s, "mu_max = {}\nmu_begin = {}", self.mu_max, self.mu_begin).unwrap();
        writeln!(
            s,
            "\n[sifting]\nbasis_match_factor = {}",
            self.basis_match_factor
        )
        .unwrap();
        writeln!(s, "\n[output]\ncsv = {}", path(&self.csv)).unwrap();
        writeln!(s, "partitions = {}", path(&self.partitions)).unwrap();
        s
    }

    pub fn detector_params(&self) -> Result<DetectorParams> {
        DetectorParams::new(self.eta_det, self.eta_trans, self.p_dark)
    }

    pub fn tap_params(&self) -> Result<TapParams> {
        TapParams::new(self.vsq)
    }

    pub fn energy(&self) -> Result<EnergyDistribution> {
        match self.energy_kind {
            EnergyKind::Poisson => EnergyDistribution::poisson(self.mu),
            EnergyKind::Fixed => {
                if self.n > self.n_cap {
                    return Err(Error::config(
                        "energy.n",
                        format!("photon number {} exceeds n_cap {}", self.n, self.n_cap),
                    ));
                }
                Ok(EnergyDistribution::FixedN(self.n))
            }
            EnergyKind::Custom => Ok(EnergyDistribution::Custom(
                CustomWeights::new(self.weights.clone()).map_err(|e| match e {
                    Error::Config { message, .. } => Error::config("energy.weights", message),
                    other => other,
                })?,
            )),
        }
    }

    pub fn grid(&self) -> Result<MuGrid> {
        let grid = match self.grid_kind {
            GridKind::FineCoarse => MuGrid::FineCoarse {
                fine_incr: self.fine_incr,
                mu_fine_max: self.mu_fine_max,
                coarse_incr: self.coarse_incr,
                mu_max: self.mu_max,
                mu_begin: self.mu_begin,
            },
            GridKind::Uniform => MuGrid::Uniform {
                incr: self.incr,
                mu_max: self.mu_max,
                mu_begin: self.mu_begin,
            },
        };
        grid.validate().map_err(|e| match e {
            Error::Config { field, message } => Error::config(format!("grid.{field}"), message),
            other => other,
        })?;
        Ok(grid)
    }

    pub fn metric_options(&self) -> Result<MetricOptions> {
        renyi_entropy(0.5, self.renyi).map_err(|_| {
            Error::config(
                "entropy.renyi",
                format!("must be > 0 and != 1, found {}", self.renyi),
            )
        })?;
        Ok(MetricOptions {
            renyi: self.renyi,
            basis_match_factor: self.basis_match_factor,
            kmax: self.kmax,
        })
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let rename = |field: &'static str| {
            move |e: Error| match e {
                Error::Config { message, .. } => Error::config(field, message),
                other => other,
            }
        };
        if !(1..=MAX_N_CAP).contains(&self.n_cap) {
            return Err(Error::config(
                "entanglement.n_cap",
                format!("must lie in 1..={MAX_N_CAP}, found {}", self.n_cap),
            ));
        }
        if !(self.zeta_inf_threshold > 0.0) {
            return Err(Error::config(
                "entanglement.zeta_inf_threshold",
                format!("must be positive, found {}", self.zeta_inf_threshold),
            ));
        }
        let det = self.detector_params().map_err(|e| match e {
            Error::Config { field, message } => {
                Error::config(format!("detectors.{field}"), message)
            }
            other => other,
        })?;
        Ok(ModelParams {
            det,
            tap: self.tap_params().map_err(rename("tap.vsq"))?,
            zetas: self.zeta.clone(),
            zeta_inf_threshold: self.zeta_inf_threshold,
            n_cap: self.n_cap,
            metrics: self.metric_options()?,
        })
    }

    /// Check every setting, including the ones only some commands use.
    pub fn validate(&self) -> Result<()> {
        self.model_params()?;
        self.energy()?;
        self.grid()?;
        Ok(())
    }
}

fn non_empty_path(value: &str) -> Option<PathBuf> {
    let t = value.trim();
    (!t.is_empty()).then(|| PathBuf::from(t))
}
