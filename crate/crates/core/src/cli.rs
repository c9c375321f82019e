use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use entqkd::config::{
    parse_f64, parse_list, parse_quad, parse_zeta_list, Config, EnergyKind, GridKind,
};
use entqkd::detection::{kernel_args, t_terms, t_value, t_value_km, Case, Link, OutcomeCode};
use entqkd::entanglement::{compute_xi, compute_xi_row, Zeta};
use entqkd::partitions::{enumerate_partitions, load_partitions, save_partitions, PartitionTable};
use entqkd::sweep::{run_sweep_with, write_csv, write_csv_to};
use entqkd::{Error, Result};

pub const PART_CACHE_ENV: &str = "QKD_PART_CACHE";

#[derive(Debug, Parser)]
#[command(
    name = "entqkd",
    version,
    about = "QKD link statistics with tunable frequency entanglement"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the partition cache.
    Partitions {
        #[arg(long)]
        n_cap: Option<usize>,
        /// Output file; defaults to $QKD_PART_CACHE, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        verbose: bool,
    },
    /// Print Ξ(ζ, n) as CSV.
    Xi {
        #[arg(value_enum)]
        action: Option<XiAction>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probability of one outcome at the first ζ of the list.
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        /// Four bits over a1,a2,b1,b2; 1 = no click.
        #[arg(long)]
        outcome: String,
        /// Evangeline's count in her first tapped mode.
        #[arg(long, requires = "m")]
        k: Option<usize>,
        /// Evangeline's count in her second tapped mode.
        #[arg(long, requires = "k")]
        m: Option<usize>,
        /// Poisson mean photon number.
        #[arg(long, conflicts_with_all = ["photons", "weights"])]
        mu: Option<f64>,
        /// Fixed photon-pair number.
        #[arg(long, conflicts_with = "weights")]
        photons: Option<usize>,
        /// Photon-number weights |C_0|², |C_1|², ...
        #[arg(long)]
        weights: Option<String>,
    },
    /// Sweep μ for ζ = 0, the ζ list and ζ = ∞; write CSV.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// A single μ value instead of a grid.
        #[arg(long, conflicts_with = "mu_grid")]
        mu: Option<f64>,
        /// fine_incr,mu_fine_max,coarse_incr,mu_max
        #[arg(long)]
        mu_grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a configuration; `--dump` prints its canonical form.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        dump: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum XiAction {
    Dump,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// a1,a2,b1,b2
    #[arg(long)]
    pub eta_det: Option<String>,
    #[arg(long)]
    pub eta_trans: Option<String>,
    #[arg(long)]
    pub p_dark: Option<String>,
    #[arg(long)]
    pub vsq: Option<f64>,
    /// Comma-separated ζ values; `inf` allowed.
    #[arg(long)]
    pub zeta: Option<String>,
    #[arg(long)]
    pub renyi: Option<f64>,
    #[arg(long)]
    pub n_cap: Option<usize>,
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Halve p_good for the chance of matching bases.
    #[arg(long)]
    pub basis_match_factor: bool,
    #[arg(long)]
    pub verbose: bool,
}

impl ModelArgs {
    fn config(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(v) = &self.eta_det {
            cfg.eta_det = parse_quad("--eta-det", v)?;
        }
        if let Some(v) = &self.eta_trans {
            cfg.eta_trans = parse_quad("--eta-trans", v)?;
        }
        if let Some(v) = &self.p_dark {
            cfg.p_dark = parse_quad("--p-dark", v)?;
        }
        if let Some(v) = self.vsq {
            cfg.vsq = v;
        }
        if let Some(v) = &self.zeta {
            cfg.zeta = parse_zeta_list("--zeta", v)?;
        }
        if let Some(v) = self.renyi {
            cfg.renyi = v;
        }
        if let Some(v) = self.n_cap {
            cfg.n_cap = v;
        }
        if let Some(v) = self.kmax {
            cfg.kmax = Some(v);
        }
        if self.basis_match_factor {
            cfg.basis_match_factor = true;
        }
        Ok(cfg)
    }
}

/// Short error class printed as `error[<class>]`.
pub fn error_class(e: &Error) -> &'static str {
    match e {
        Error::Config { .. } => "config",
        Error::Parse { .. } => "parse",
        Error::Validation { .. } => "validation",
        Error::Domain(_) => "domain",
        Error::NegativeProbability { .. } => "numeric",
        Error::Io { .. } | Error::Csv(_) => "io",
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. }
        | Error::Parse { .. }
        | Error::Validation { .. }
        | Error::Domain(_) => 2,
        Error::Io { .. } | Error::Csv(_) => 3,
        Error::NegativeProbability { .. } => 1,
    }
}

pub fn init_logging(verbose: bool) {
    let level = if verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn cache_path(cfg: &Config) -> Option<PathBuf> {
    std::env::var_os(PART_CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .or_else(|| cfg.partitions.clone())
}

/// The partition table for `n_cap`, read from or written to the cache when one is configured.
fn partitions_for(cfg: &Config, n_cap: usize) -> Result<PartitionTable> {
    let Some(path) = cache_path(cfg) else {
        return Ok(enumerate_partitions(n_cap));
    };
    if path.exists() {
        let table = load_partitions(&path)?;
        if table.n_cap() >= n_cap {
            info!(
                "loaded partitions up to n = {} from {}",
                table.n_cap(),
                path.display()
            );
            return Ok(table);
        }
        info!(
            "cache {} stops at n = {}; rebuilding",
            path.display(),
            table.n_cap()
        );
    }
    let table = enumerate_partitions(n_cap);
    save_partitions(&table, &path)?;
    info!("wrote partition cache {}", path.display());
    Ok(table)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Error::Io {
                path: PathBuf::from("<stdout>"),
                source: e,
            })
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Partitions {
            n_cap,
            out,
            verbose,
        } => {
            init_logging(verbose);
            let n_cap = n_cap.unwrap_or(Config::default().n_cap);
            if n_cap == 0 {
                return Err(Error::Config {
                    field: "--n-cap".into(),
                    message: "must be at least 1".into(),
                });
            }
            let table = enumerate_partitions(n_cap);
            let target = out.or_else(|| cache_path(&Config::default()));
            match target {
                Some(p) => save_partitions(&table, &p),
                None => emit(&table.to_text(), None),
            }
        }
        Command::Xi { model, out, .. } => {
            init_logging(model.verbose);
            let cfg = model.config()?;
            let params = cfg.model_params()?;
            let parts = partitions_for(&cfg, params.n_cap)?;
            let table = compute_xi(&params.zeta_curves(), params.n_cap, &parts)?;
            emit(&table.to_csv(), out.as_deref())
        }
        Command::Eval {
            model,
            outcome,
            k,
            m,
            mu,
            photons,
            weights,
        } => {
            init_logging(model.verbose);
            let mut cfg = model.config()?;
            if let Some(mu) = mu {
                cfg.energy_kind = EnergyKind::Poisson;
                cfg.mu = mu;
            }
            if let Some(n) = photons {
                cfg.energy_kind = EnergyKind::Fixed;
                cfg.n = n;
            }
            if let Some(w) = &weights {
                cfg.energy_kind = EnergyKind::Custom;
                cfg.weights = parse_list("--weights", w)?;
            }
            let outcome: OutcomeCode = outcome.parse()?;
            let params = cfg.model_params()?;
            let energy = cfg.energy()?;
            let first = *params.zetas.first().ok_or_else(|| Error::Config {
                field: "--zeta".into(),
                message: "eval needs at least one ζ value".into(),
            })?;
            let zeta = Zeta::new(first, params.zeta_inf_threshold);
            let parts = partitions_for(&cfg, params.n_cap)?;
            let row = compute_xi_row(zeta, params.n_cap, &parts)?;
            let link = Link::new(params.det, params.tap, &row);
            let value = match (k, m) {
                (Some(k), Some(m)) => t_value_km(&link, &energy, k, m, outcome)?,
                _ => t_value(&link, &energy, outcome)?,
            };
            let mut text = format!("{value}\n");
            if model.verbose {
                let case = Case {
                    energy: &energy,
                    counts: k.zip(m),
                };
                text.push_str(&format!("# zeta = {zeta}\n"));
                for (l, f) in t_terms(&link, &case, outcome)? {
                    let a = kernel_args(l, &link.det, &link.tap);
                    text.push_str(&format!(
                        "# F({l}) = {f} w = {} x = {} y = {} z = {}\n",
                        a.w, a.x, a.y, a.z
                    ));
                }
            }
            emit(&text, None)
        }
        Command::Sweep {
            model,
            mu,
            mu_grid,
            out,
        } => {
            init_logging(model.verbose);
            let mut cfg = model.config()?;
            if let Some(mu) = mu {
                cfg.grid_kind = GridKind::Uniform;
                cfg.mu_begin = mu;
                cfg.mu_max = mu;
                cfg.incr = 1.0;
            }
            if let Some(g) = &mu_grid {
                let v: Vec<f64> = g
                    .split(',')
                    .map(|t| parse_f64("--mu-grid", t))
                    .collect::<Result<_>>()?;
                let [fine, fmax, coarse, max] = v[..] else {
                    return Err(Error::Config {
                        field: "--mu-grid".into(),
                        message: format!("expected fine,fmax,coarse,max, found {} values", v.len()),
                    });
                };
                cfg.grid_kind = GridKind::FineCoarse;
                cfg.fine_incr = fine;
                cfg.mu_fine_max = fmax;
                cfg.coarse_incr = coarse;
                cfg.mu_max = max;
            }
            let params = cfg.model_params()?;
            let grid = cfg.grid()?;
            let parts = partitions_for(&cfg, params.n_cap)?;
            let start = Instant::now();
            let result = run_sweep_with(&params, &grid, Some(&parts))?;
            info!("{} rows in {:.2?}", result.rows.len(), start.elapsed());
            match out.or_else(|| cfg.csv.clone()) {
                Some(p) => write_csv(&result, &p),
                None => write_csv_to(&result, std::io::stdout().lock()),
            }
        }
        Command::Validate { model, dump } => {
            init_logging(model.verbose);
            let cfg = model.config()?;
            cfg.validate()?;
            if dump {
                emit(&cfg.to_ini_string(), None)
            } else {
                emit("ok\n", None)
            }
        }
    }
}
