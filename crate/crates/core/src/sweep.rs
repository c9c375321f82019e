//! μ-grid sweeps over the ζ family and the CSV they are written to.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::detection::{DetectorParams, Link, TapParams};
use crate::entanglement::{compute_xi_row, Regime, XiRow, Zeta, DEFAULT_ZETA_INF_THRESHOLD};
use crate::error::{Error, Result};
use crate::gfunctions::{poisson_nmax, EnergyDistribution};
use crate::metrics::{qkd_metrics, MetricOptions, QkdMetrics};
use crate::partitions::{enumerate_partitions, PartitionTable, DEFAULT_N_CAP};

pub const CSV_HEADER: [&str; 6] = ["mu", "zeta", "p_good", "p_sift_err", "av_ent", "fig_merit"];

// absorbs representation error in counts such as 0.007 / 0.0001
const COUNT_SLACK: f64 = 1e-9;

fn count(span: f64, incr: f64) -> usize {
    (span / incr + COUNT_SLACK).floor().max(0.0) as usize
}

/// The μ values of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum MuGrid {
    /// Fine steps from `mu_begin` up to `mu_fine_max`, then coarse steps up to `mu_max`.
    FineCoarse {
        fine_incr: f64,
        mu_fine_max: f64,
        coarse_incr: f64,
        mu_max: f64,
        mu_begin: f64,
    },
    /// Evenly spaced points `mu_begin, mu_begin + incr, ...` not exceeding `mu_max`.
    Uniform {
        incr: f64,
        mu_max: f64,
        mu_begin: f64,
    },
}

impl Default for MuGrid {
    fn default() -> Self {
        MuGrid::FineCoarse {
            fine_incr: 1e-4,
            mu_fine_max: 0.007,
            coarse_incr: 0.002,
            mu_max: 0.04,
            mu_begin: 0.0,
        }
    }
}

impl MuGrid {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be positive, found {v}")))
            }
        };
        let (begin, max) = match *self {
            MuGrid::FineCoarse {
                fine_incr,
                mu_fine_max,
                coarse_incr,
                mu_max,
                mu_begin,
            } => {
                positive("fine_incr", fine_incr)?;
                positive("coarse_incr", coarse_incr)?;
                if !(mu_begin <= mu_fine_max && mu_fine_max <= mu_max) {
                    return Err(Error::config(
                        "mu_fine_max",
                        format!(
                            "need mu_begin <= mu_fine_max <= mu_max, found {mu_begin}, {mu_fine_max}, {mu_max}"
                        ),
                    ));
                }
                (mu_begin, mu_max)
            }
            MuGrid::Uniform {
                incr,
                mu_max,
                mu_begin,
            } => {
                positive("incr", incr)?;
                if mu_begin > mu_max {
                    return Err(Error::config(
                        "mu_max",
                        format!("mu_max {mu_max} below mu_begin {mu_begin}"),
                    ));
                }
                (mu_begin, mu_max)
            }
        };
        if !(begin.is_finite() && begin >= 0.0 && max.is_finite()) {
            return Err(Error::config(
                "mu_begin",
                format!("mu range must be finite and non-negative, found {begin}..{max}"),
            ));
        }
        Ok(())
    }

    pub fn mu_max(&self) -> f64 {
        match *self {
            MuGrid::FineCoarse { mu_max, .. } | MuGrid::Uniform { mu_max, .. } => mu_max,
        }
    }

    /// Strictly increasing grid points.
    pub fn points(&self) -> Vec<f64> {
        match *self {
            MuGrid::FineCoarse {
                fine_incr,
                mu_fine_max,
                coarse_incr,
                mu_max,
                mu_begin,
            } => {
                let n_fine = count(mu_fine_max - mu_begin, fine_incr);
                let fine_end = mu_begin + n_fine as f64 * fine_incr;
                let n_coarse = 1 + count(mu_max - fine_end, coarse_incr);
                let fine = (0..n_fine).map(|i| mu_begin + i as f64 * fine_incr);
                let coarse = (0..n_coarse).map(|i| fine_end + i as f64 * coarse_incr);
                fine.chain(coarse).collect()
            }
            MuGrid::Uniform {
                incr,
                mu_max,
                mu_begin,
            } => {
                let n = 1 + count(mu_max - mu_begin, incr);
                (0..n).map(|i| mu_begin + i as f64 * incr).collect()
            }
        }
    }
}

/// Physical and numerical parameters shared by every point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub det: DetectorParams,
    pub tap: TapParams,
    /// Intermediate ζ values; ζ = 0 and ζ = ∞ are always added.
    pub zetas: Vec<f64>,
    pub zeta_inf_threshold: f64,
    pub n_cap: usize,
    pub metrics: MetricOptions,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            det: DetectorParams::default(),
            tap: TapParams::default(),
            zetas: vec![1.0, 10.0, 100.0, 1000.0],
            zeta_inf_threshold: DEFAULT_ZETA_INF_THRESHOLD,
            n_cap: DEFAULT_N_CAP,
            metrics: MetricOptions::default(),
        }
    }
}

impl ModelParams {
    /// ζ = 0, the configured values in order without repeats, then ζ = ∞.
    pub fn zeta_curves(&self) -> Vec<Zeta> {
        let mut out = vec![Zeta::unentangled()];
        for &v in &self.zetas {
            let z = Zeta::new(v, self.zeta_inf_threshold);
            if z.regime() == Regime::General && !out.contains(&z) {
                out.push(z);
            }
        }
        out.push(Zeta::infinite());
        out
    }
}

/// One CSV row. Markers for undefined quantities are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mu: f64,
    pub zeta: String,
    pub p_good: f64,
    pub p_sift_err: Option<f64>,
    pub av_ent: Option<f64>,
    pub fig_merit: Option<f64>,
}

impl SweepRow {
    fn new(mu: f64, zeta: Zeta, m: QkdMetrics) -> Self {
        SweepRow {
            mu,
            zeta: zeta.label(),
            p_good: m.p_good,
            p_sift_err: m.p_sift_err,
            av_ent: m.av_ent,
            fig_merit: m.fig_merit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Tables needed to evaluate any point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepContext {
    params: ModelParams,
    rows: Vec<XiRow>,
}

impl SweepContext {
    /// Checks that `n_cap` covers the Poisson truncation at `mu_max`.
    pub fn new(params: ModelParams, mu_max: f64, parts: Option<&PartitionTable>) -> Result<Self> {
        let required = poisson_nmax(mu_max);
        if params.n_cap < required {
            return Err(Error::config(
                "n_cap",
                format!(
                    "mu_max = {mu_max} needs n_cap >= {required}, found {}",
                    params.n_cap
                ),
            ));
        }
        let owned;
        let parts = match parts {
            Some(p) => p,
            None => {
                owned = enumerate_partitions(params.n_cap);
                &owned
            }
        };
        let curves = params.zeta_curves();
        let rows = curves
            .par_iter()
            .map(|&z| compute_xi_row(z, params.n_cap, parts))
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepContext { params, rows })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn zetas(&self) -> Vec<Zeta> {
        self.rows.iter().map(XiRow::zeta).collect()
    }

    pub fn xi_row(&self, zeta: Zeta) -> Option<&XiRow> {
        self.rows.iter().find(|r| r.zeta() == zeta)
    }

    /// Metrics at one (ζ, μ); depends on nothing but the shared tables.
    pub fn evaluate_point(&self, zeta: Zeta, mu: f64) -> Result<SweepRow> {
        let row = self.xi_row(zeta).ok_or_else(|| {
            Error::config("zeta", format!("ζ = {zeta} is not part of this sweep"))
        })?;
        let link = Link::new(self.params.det, self.params.tap, row);
        let energy = EnergyDistribution::poisson(mu)?;
        let m = qkd_metrics(&link, &energy, &self.params.metrics)?;
        Ok(SweepRow::new(mu, zeta, m))
    }
}

pub fn run_sweep(params: &ModelParams, grid: &MuGrid) -> Result<SweepResult> {
    run_sweep_with(params, grid, None)
}

/// Like [`run_sweep`] but reusing an already built partition table.
pub fn run_sweep_with(
    params: &ModelParams,
    grid: &MuGrid,
    parts: Option<&PartitionTable>,
) -> Result<SweepResult> {
    grid.validate()?;
    let ctx = SweepContext::new(params.clone(), grid.mu_max(), parts)?;
    let mus = grid.points();
    let points: Vec<(Zeta, f64)> = ctx
        .zetas()
        .into_iter()
        .flat_map(|z| mus.iter().map(move |&mu| (z, mu)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(z, mu)| ctx.evaluate_point(z, mu))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), |x| x.to_string())
}

pub fn write_csv_to<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &result.rows {
        w.write_record([
            r.mu.to_string(),
            r.zeta.clone(),
            r.p_good.to_string(),
            fmt_opt(r.p_sift_err),
            fmt_opt(r.av_ent),
            fmt_opt(r.fig_merit),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(result, std::io::BufWriter::new(file))
}

pub fn read_csv_from<R: Read>(input: R) -> Result<SweepResult> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", CSV_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |idx: usize| -> Result<f64> {
            rec[idx].parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("bad number `{}` in column {}", &rec[idx], CSV_HEADER[idx]),
            })
        };
        let opt = |idx: usize| num(idx).map(|v| (!v.is_nan()).then_some(v));
        rows.push(SweepRow {
            mu: num(0)?,
            zeta: rec[1].to_string(),
            p_good: num(2)?,
            p_sift_err: opt(3)?,
            av_ent: opt(4)?,
            fig_merit: opt(5)?,
        });
    }
    Ok(SweepResult { rows })
}

pub fn read_csv(path: &Path) -> Result<SweepResult> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(file)
}
