//! The 𝒢 kernel polynomials in (w, x, y, z) and their energy-averaged forms.
//!
//! 𝒢_{n,km} is the squared norm of the n-pair component after Evangeline has
//! counted k and m photons in her two tapped modes, with the detector
//! no-click factors folded into the arguments. Summing over (k, m) gives 𝒢_n;
//! averaging over photon number gives 𝒢_μ (Poisson) or 𝒢_C (custom weights).
//!
//! All sums are written in terms of Ξ(n)/n!, which stays bounded by 1, so
//! nothing overflows at n = 32. Each evaluator is bit-exactly invariant under
//! the relabeling (w, x, y, z, k, m) → (y, z, w, x, m, k).

use log::warn;

use crate::entanglement::{Regime, XiRow};
use crate::error::{Error, Result};
use crate::numeric::{binomial, factorial, palindromic_sum};

/// Below this |(y+z) − (w+x)| the Case I closed forms switch to their limits.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Below this μ the Case I Poisson closed form returns its μ → 0 limit.
pub const MU_TOL: f64 = 1e-15;

/// Poisson tail mass beyond `n_cap` above which truncation is reported.
pub const TAIL_WARN: f64 = 1e-9;

// relative gap below which (B^{n+1} − A^{n+1})/(B − A) loses more than ~3 digits
const CLOSED_FORM_MIN_GAP: f64 = 1e-3;

/// Arguments of every 𝒢 function.
///
/// With all no-click factors at 1 these are (|u|², |v|², |u|², |v|²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelArgs {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl KernelArgs {
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        KernelArgs { w, x, y, z }
    }

    /// The same arguments seen after exchanging mode labels 1 and 2.
    pub fn swapped(&self) -> Self {
        KernelArgs::new(self.y, self.z, self.w, self.x)
    }

    fn sums(&self) -> (f64, f64) {
        (self.w + self.x, self.y + self.z)
    }
}

/// Validated photon-number weights |C_n|², n = 0..len.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomWeights(Vec<f64>);

impl CustomWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::config("weights", "at least one weight is required"));
        }
        if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::config(
                "weights",
                format!("weights must be finite and non-negative, found {bad}"),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                "weights",
                format!("weights must sum to 1, found {total}"),
            ));
        }
        Ok(CustomWeights(weights))
    }

    /// A single unit weight at photon number n.
    pub fn delta(n: usize) -> Self {
        let mut w = vec![0.0; n + 1];
        w[n] = 1.0;
        CustomWeights(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Largest photon number carrying a weight slot.
    pub fn max_n(&self) -> usize {
        self.0.len() - 1
    }
}

/// Photon-number distribution of the transmitted pulse.
#[derive(Debug, Clone, PartialEq)]
pub enum EnergyDistribution {
    Poisson(f64),
    FixedN(usize),
    Custom(CustomWeights),
}

impl EnergyDistribution {
    pub fn poisson(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::config(
                "mu",
                format!("mean photon number must be finite and >= 0, found {mu}"),
            ));
        }
        Ok(EnergyDistribution::Poisson(mu))
    }

    /// Largest photon number that this distribution needs from the Ξ tables.
    pub fn required_n_cap(&self) -> usize {
        match self {
            EnergyDistribution::Poisson(mu) => poisson_nmax(*mu),
            EnergyDistribution::FixedN(n) => *n,
            EnergyDistribution::Custom(w) => w.max_n(),
        }
    }
}

/// Truncation point floor(3μ + 16) of the Poisson sums.
pub fn poisson_nmax(mu: f64) -> usize {
    (3.0 * mu + 16.0).floor() as usize
}

/// e^{−μ} μⁿ/n! for n = 0..=nmax, built by the ratio recursion.
pub fn poisson_weights(mu: f64, nmax: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    let mut p = (-mu).exp();
    out.push(p);
    for n in 1..=nmax {
        p *= mu / n as f64;
        out.push(p);
    }
    out
}

// Poisson weights up to min(nmax, n_cap), reporting a lost tail.
fn truncated_poisson(mu: f64, n_cap: usize) -> Vec<f64> {
    let nmax = poisson_nmax(mu);
    if nmax <= n_cap {
        return poisson_weights(mu, nmax);
    }
    let weights = poisson_weights(mu, n_cap);
    let tail = 1.0 - weights.iter().sum::<f64>();
    if tail > TAIL_WARN {
        warn!("Poisson sum for mu = {mu} truncated at n_cap = {n_cap}; tail mass {tail:e} dropped");
    }
    weights
}

/// 𝒢_{n,km}(w, x, y, z). Zero when k + m > n.
pub fn g_nkm(row: &XiRow, n: usize, k: usize, m: usize, args: &KernelArgs) -> Result<f64> {
    row.check_n(n)?;
    if k + m > n {
        return Ok(0.0);
    }
    Ok(g_nkm_unchecked(row, n, k, m, args))
}

fn g_nkm_unchecked(row: &XiRow, n: usize, k: usize, m: usize, args: &KernelArgs) -> f64 {
    let KernelArgs { w, x, y, z } = *args;
    let free = n - k - m;
    let tapped = x.powi(k as i32) * z.powi(m as i32);
    match row.zeta().regime() {
        Regime::Extreme => {
            let weight = factorial(n) / (factorial(k) * factorial(m) * factorial(free));
            0.5f64.powi(n as i32) * weight * tapped * (w + y).powi(free as i32)
        }
        // Case I is the general sum with Ξ(n)/n! ≡ 1 and constant 1/(n+1)
        Regime::Unentangled | Regime::General => {
            let terms: Vec<f64> = (0..=free)
                .map(|j| {
                    let xi = row.xi_over_factorial(j + k) * row.xi_over_factorial(n - k - j);
                    let comb = binomial(j + k, k) * binomial(n - k - j, m);
                    let powers = w.powi(j as i32) * y.powi((free - j) as i32);
                    (xi * comb) * (powers * tapped)
                })
                .collect();
            row.norm_factor(n) * palindromic_sum(&terms)
        }
    }
}

/// 𝒢_n = Σ_{k+m≤n} 𝒢_{n,km}.
pub fn g_n(row: &XiRow, n: usize, args: &KernelArgs) -> Result<f64> {
    row.check_n(n)?;
    Ok(g_n_unchecked(row, n, args))
}

fn g_n_unchecked(row: &XiRow, n: usize, args: &KernelArgs) -> f64 {
    let (a, b) = args.sums();
    match row.zeta().regime() {
        Regime::Extreme => ((a + b) * 0.5).powi(n as i32),
        Regime::Unentangled => case_one_g_n(n, a, b),
        Regime::General => {
            let terms: Vec<f64> = (0..=n)
                .map(|r| {
                    (row.xi_over_factorial(r) * row.xi_over_factorial(n - r))
                        * (a.powi(r as i32) * b.powi((n - r) as i32))
                })
                .collect();
            row.norm_factor(n) * palindromic_sum(&terms)
        }
    }
}

// (B^{n+1} − A^{n+1}) / ((n+1)(B − A)), symmetric in A and B.
fn case_one_g_n(n: usize, a: f64, b: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let gap = hi - lo;
    if gap < DEGENERACY_TOL {
        return hi.powi(n as i32);
    }
    let np1 = (n + 1) as f64;
    if gap >= CLOSED_FORM_MIN_GAP * hi {
        return (hi.powi(n as i32 + 1) - lo.powi(n as i32 + 1)) / (np1 * gap);
    }
    // near-degenerate: expand the quotient instead of cancelling
    let s: f64 = (0..=n)
        .map(|r| lo.powi(r as i32) * hi.powi((n - r) as i32))
        .sum();
    s / np1
}

/// 𝒢_μ: the Poisson average of 𝒢_n with mean photon number μ ≥ 0.
pub fn g_mu(row: &XiRow, mu: f64, args: &KernelArgs) -> f64 {
    debug_assert!(mu >= 0.0);
    if mu == 0.0 {
        return 1.0;
    }
    let (a, b) = args.sums();
    match row.zeta().regime() {
        Regime::Extreme => (-0.5 * mu * (2.0 - (a + b))).exp(),
        Regime::Unentangled => {
            if mu < MU_TOL {
                return 1.0;
            }
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let gap = hi - lo;
            if gap < DEGENERACY_TOL {
                return (-mu * (1.0 - hi)).exp();
            }
            let t = mu * gap;
            (-mu * (1.0 - lo)).exp() * (t.exp_m1() / t)
        }
        Regime::General => truncated_poisson(mu, row.n_cap())
            .iter()
            .enumerate()
            .map(|(n, p)| p * g_n_unchecked(row, n, args))
            .sum(),
    }
}

/// 𝒢_{μ,km}: the Poisson average of 𝒢_{n,km} over n ≥ k + m.
pub fn g_mu_km(row: &XiRow, mu: f64, k: usize, m: usize, args: &KernelArgs) -> f64 {
    debug_assert!(mu >= 0.0);
    match row.zeta().regime() {
        Regime::Extreme => {
            let half = 0.5 * mu;
            let tapped = (half * args.x).powi(k as i32) * (half * args.z).powi(m as i32);
            (-half * (2.0 - (args.w + args.y))).exp() * tapped / (factorial(k) * factorial(m))
        }
        Regime::Unentangled | Regime::General => truncated_poisson(mu, row.n_cap())
            .iter()
            .enumerate()
            .skip(k + m)
            .map(|(n, p)| p * g_nkm_unchecked(row, n, k, m, args))
            .sum(),
    }
}

fn check_weights(row: &XiRow, weights: &CustomWeights) -> Result<()> {
    if weights.max_n() > row.n_cap() {
        return Err(Error::config(
            "weights",
            format!(
                "{} weights need photon numbers up to {}, beyond n_cap {}",
                weights.as_slice().len(),
                weights.max_n(),
                row.n_cap()
            ),
        ));
    }
    Ok(())
}

/// 𝒢_C = Σ_n |C_n|² 𝒢_n.
pub fn g_custom(row: &XiRow, weights: &CustomWeights, args: &KernelArgs) -> Result<f64> {
    check_weights(row, weights)?;
    Ok(weights
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(n, c)| c * g_n_unchecked(row, n, args))
        .sum())
}

/// 𝒢_{C,km} = Σ_{n≥k+m} |C_n|² 𝒢_{n,km}.
pub fn g_custom_km(
    row: &XiRow,
    weights: &CustomWeights,
    k: usize,
    m: usize,
    args: &KernelArgs,
) -> Result<f64> {
    check_weights(row, weights)?;
    Ok(weights
        .as_slice()
        .iter()
        .enumerate()
        .skip(k + m)
        .filter(|(_, c)| **c != 0.0)
        .map(|(n, c)| c * g_nkm_unchecked(row, n, k, m, args))
        .sum())
}

/// 𝒢 for any energy distribution, marginal over Evangeline's counts.
pub fn g_energy(row: &XiRow, energy: &EnergyDistribution, args: &KernelArgs) -> Result<f64> {
    match energy {
        EnergyDistribution::Poisson(mu) => Ok(g_mu(row, *mu, args)),
        EnergyDistribution::FixedN(n) => g_n(row, *n, args),
        EnergyDistribution::Custom(w) => g_custom(row, w, args),
    }
}

/// 𝒢 for any energy distribution at Evangeline's counts (k, m).
pub fn g_energy_km(
    row: &XiRow,
    energy: &EnergyDistribution,
    k: usize,
    m: usize,
    args: &KernelArgs,
) -> Result<f64> {
    match energy {
        EnergyDistribution::Poisson(mu) => Ok(g_mu_km(row, *mu, k, m, args)),
        EnergyDistribution::FixedN(n) => g_nkm(row, *n, k, m, args),
        EnergyDistribution::Custom(w) => g_custom_km(row, w, k, m, args),
    }
}
