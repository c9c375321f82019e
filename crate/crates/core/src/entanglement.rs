//! Frequency-entanglement scalars κ(ζ,n) and the partition sums Ξ(ζ,n).
//!
//! The Gaussian two-frequency kernel g_ζ enters every detection probability
//! only through the loop values κ(ζ,n) of its n-fold self-convolution and the
//! vacuum expectations Ξ(ζ,n) built from them:
//!
//! ```text
//! Ξ(ζ,n) = Σ_{ν ⊢ n} n! / Π_j (j^{ν_j} ν_j!) · Π_j κ(ζ,j)^{ν_j}
//! ```
//!
//! Ξ(0,n) = n! (no frequency entanglement) and Ξ(ζ,n) → 1 as |ζ| → ∞ at fixed n.

use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::factorial;
use crate::partitions::PartitionTable;

/// |ζ| at or above which the extreme-entanglement closed forms are used.
pub const DEFAULT_ZETA_INF_THRESHOLD: f64 = 1e40;

/// Which family of closed forms applies to a given ζ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// ζ = 0: the two-photon amplitude factors, Ξ(n) = n!.
    Unentangled,
    /// 0 < |ζ| < threshold: Ξ from the partition sum.
    General,
    /// |ζ| ≥ threshold: treated as the ζ → ∞ limit, Ξ(n) = 1.
    Extreme,
}

/// A frequency-entanglement parameter together with its regime.
///
/// Only |ζ| matters; negative inputs are folded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zeta {
    value: f64,
    regime: Regime,
}

impl Zeta {
    pub fn new(value: f64, inf_threshold: f64) -> Self {
        let value = value.abs();
        let regime = if value == 0.0 {
            Regime::Unentangled
        } else if value >= inf_threshold {
            Regime::Extreme
        } else {
            Regime::General
        };
        Zeta { value, regime }
    }

    pub fn with_default_threshold(value: f64) -> Self {
        Zeta::new(value, DEFAULT_ZETA_INF_THRESHOLD)
    }

    pub fn unentangled() -> Self {
        Zeta {
            value: 0.0,
            regime: Regime::Unentangled,
        }
    }

    pub fn infinite() -> Self {
        Zeta {
            value: f64::INFINITY,
            regime: Regime::Extreme,
        }
    }

    /// Parse `inf`/`infinity` or a decimal number.
    pub fn parse(text: &str, inf_threshold: f64) -> Option<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Some(Zeta::infinite());
        }
        t.parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .map(|v| Zeta::new(v, inf_threshold))
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// CSV label: `0`, the decimal value, or `inf`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Zeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.regime {
            Regime::Extreme => f.write_str("inf"),
            _ => write!(f, "{}", self.value),
        }
    }
}

/// κ(ζ,n) for n = 1..=n_cap.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaTable {
    zeta: Zeta,
    kappa: Vec<f64>,
}

impl KappaTable {
    pub fn zeta(&self) -> Zeta {
        self.zeta
    }

    pub fn n_cap(&self) -> usize {
        self.kappa.len()
    }

    /// κ(ζ,n), `n >= 1`.
    pub fn get(&self, n: usize) -> f64 {
        self.kappa[n - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.kappa
    }
}

/// κ(ζ,n) through the rational recursion
/// R(2) = 1, R(n+1) = 1/(1 − ζ²R(n)/(4(ζ²+1))), κ = R/√(ζ²+1), κ(ζ,1) = 1.
pub fn compute_kappa(zeta: Zeta, n_cap: usize) -> KappaTable {
    assert!(n_cap >= 1, "n_cap must be at least 1");
    let mut kappa = Vec::with_capacity(n_cap);
    kappa.push(1.0);
    match zeta.regime() {
        Regime::Unentangled => kappa.resize(n_cap, 1.0),
        Regime::Extreme => kappa.resize(n_cap, 0.0),
        Regime::General => {
            let zsq = zeta.value() * zeta.value();
            // ζ²/(4(ζ²+1)) written to stay finite for huge ζ
            let ratio = 0.25 / (1.0 + 1.0 / zsq);
            let scale = zeta.value().hypot(1.0);
            let mut r = 1.0;
            for n in 2..=n_cap {
                if n > 2 {
                    r = 1.0 / (1.0 - ratio * r);
                }
                kappa.push(r / scale);
            }
        }
    }
    KappaTable { zeta, kappa }
}

/// Ξ and the 𝒢 normalization constants for one ζ, for n = 0..=n_cap.
#[derive(Debug, Clone, PartialEq)]
pub struct XiRow {
    zeta: Zeta,
    xi: Vec<f64>,
    // Ξ(n)/n!, bounded by 1; all 𝒢 sums are written in terms of these
    xi_over_fact: Vec<f64>,
    // |𝒩(g_ζ,n)|²·n!² = [Σ_r Ξ(r)Ξ(n−r)/(r!(n−r)!)]⁻¹
    norm: Vec<f64>,
}

impl XiRow {
    pub fn zeta(&self) -> Zeta {
        self.zeta
    }

    pub fn n_cap(&self) -> usize {
        self.xi.len() - 1
    }

    /// Ξ(ζ,n).
    pub fn xi(&self, n: usize) -> f64 {
        self.xi[n]
    }

    /// Ξ(ζ,n)/n!.
    pub fn xi_over_factorial(&self, n: usize) -> f64 {
        self.xi_over_fact[n]
    }

    /// The combined constant |𝒩(g_ζ,n)|²·n!² multiplying every 𝒢_{n,km} sum.
    pub fn norm_factor(&self, n: usize) -> f64 {
        self.norm[n]
    }

    pub fn values(&self) -> &[f64] {
        &self.xi
    }

    pub(crate) fn check_n(&self, n: usize) -> Result<()> {
        if n > self.n_cap() {
            return Err(Error::config(
                "n_cap",
                format!("photon number {n} exceeds table n_cap {}", self.n_cap()),
            ));
        }
        Ok(())
    }
}

/// Build the row for ζ from the partition table.
pub fn compute_xi_row(zeta: Zeta, n_cap: usize, parts: &PartitionTable) -> Result<XiRow> {
    if n_cap > parts.n_cap() {
        return Err(Error::config(
            "n_cap",
            format!(
                "requested n_cap {n_cap} exceeds partition table n_cap {}",
                parts.n_cap()
            ),
        ));
    }
    let xi_over_fact: Vec<f64> = match zeta.regime() {
        Regime::Unentangled => vec![1.0; n_cap + 1],
        Regime::Extreme => (0..=n_cap).map(|n| 1.0 / factorial(n)).collect(),
        Regime::General => {
            let kappa = compute_kappa(zeta, n_cap.max(1));
            let mut out = Vec::with_capacity(n_cap + 1);
            out.push(1.0);
            for n in 1..=n_cap {
                let sum: f64 = parts
                    .of(n)
                    .iter()
                    .map(|row| {
                        row.parts()
                            .map(|(j, nu)| {
                                (kappa.get(j) / j as f64).powi(nu as i32) / factorial(nu as usize)
                            })
                            .product::<f64>()
                    })
                    .sum();
                out.push(sum);
            }
            out
        }
    };
    let xi = match zeta.regime() {
        Regime::Unentangled => (0..=n_cap).map(factorial).collect(),
        Regime::Extreme => vec![1.0; n_cap + 1],
        Regime::General => {
            let mut xi: Vec<f64> = xi_over_fact
                .iter()
                .enumerate()
                .map(|(n, v)| v * factorial(n))
                .collect();
            xi[0] = 1.0;
            if n_cap >= 1 {
                xi[1] = 1.0;
            }
            xi
        }
    };
    let norm = (0..=n_cap)
        .map(|n| match zeta.regime() {
            Regime::Unentangled => 1.0 / (n as f64 + 1.0),
            Regime::Extreme => factorial(n) * 0.5f64.powi(n as i32),
            Regime::General => {
                let s: f64 = (0..=n).map(|r| xi_over_fact[r] * xi_over_fact[n - r]).sum();
                1.0 / s
            }
        })
        .collect();
    Ok(XiRow {
        zeta,
        xi,
        xi_over_fact,
        norm,
    })
}

/// Ξ rows for several ζ values sharing one partition table.
#[derive(Debug, Clone, PartialEq)]
pub struct XiTable {
    rows: Vec<XiRow>,
}

impl XiTable {
    pub fn rows(&self) -> &[XiRow] {
        &self.rows
    }

    /// Row whose ζ equals `zeta` (same regime and |ζ|).
    pub fn row(&self, zeta: Zeta) -> Option<&XiRow> {
        self.rows.iter().find(|r| r.zeta() == zeta)
    }

    /// `zeta,n,xi` CSV used by the `xi` subcommand.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("zeta,n,xi\n");
        for row in &self.rows {
            for (n, xi) in row.values().iter().enumerate() {
                out.push_str(&format!("{},{n},{xi}\n", row.zeta()));
            }
        }
        out
    }
}

pub fn compute_xi(zetas: &[Zeta], n_cap: usize, parts: &PartitionTable) -> Result<XiTable> {
    use rayon::prelude::*;
    let rows = zetas
        .par_iter()
        .map(|&z| compute_xi_row(z, n_cap, parts))
        .collect::<Result<Vec<_>>>()?;
    Ok(XiTable { rows })
}
