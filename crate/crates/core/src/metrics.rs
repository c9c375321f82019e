//! Sifting statistics and Evangeline's Rényi entropy on error-free bits.

use crate::detection::{t_value, t_value_km, Link, OutcomeCode};
use crate::error::{Error, Result};
use crate::gfunctions::EnergyDistribution;

/// Default Rényi order.
pub const DEFAULT_RENYI: f64 = 1.1;

/// The four outcomes in which Alice and Bob each get exactly one click.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// a₁ and b₂ click: code `0110`.
    Correct1,
    /// a₂ and b₁ click: code `1001`. Taken as "Bob received a 1".
    Correct2,
    /// a₂ and b₂ click: code `1010`.
    Error1,
    /// a₁ and b₁ click: code `0101`.
    Error2,
}

impl Outcome {
    pub fn code(self) -> OutcomeCode {
        let bits = match self {
            Outcome::Correct1 => [false, true, true, false],
            Outcome::Correct2 => [true, false, false, true],
            Outcome::Error1 => [true, false, true, false],
            Outcome::Error2 => [false, true, false, true],
        };
        OutcomeCode::from_bits(bits)
    }
}

/// Knobs of the figure-of-merit computation that are not physical parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricOptions {
    pub renyi: f64,
    /// Multiply p_good by 1/2 for the chance of matching bases.
    pub basis_match_factor: bool,
    /// Bound on k + m in the entropy average; `None` picks it from the energy case.
    pub kmax: Option<usize>,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            renyi: DEFAULT_RENYI,
            basis_match_factor: false,
            kmax: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftMetrics {
    pub p_good: f64,
    /// `None` when no sifted outcome has positive probability.
    pub p_sift_err: Option<f64>,
}

pub fn sift_metrics(
    link: &Link<'_>,
    energy: &EnergyDistribution,
    basis_match_factor: bool,
) -> Result<SiftMetrics> {
    let t = |o: Outcome| t_value(link, energy, o.code());
    let c1 = t(Outcome::Correct1)?;
    let c2 = t(Outcome::Correct2)?;
    let e1 = t(Outcome::Error1)?;
    let e2 = t(Outcome::Error2)?;
    let good = c1 + c2;
    let bad = e1 + e2;
    let total = good + bad;
    let p_sift_err = (total > 0.0).then(|| bad / total);
    let p_good = if basis_match_factor { 0.5 * good } else { good };
    Ok(SiftMetrics { p_good, p_sift_err })
}

/// Probability that Bob's bit is 1 given Evangeline counted (k, m) and the
/// bit was sifted without error; `None` when that event has probability 0.
pub fn ev_probability(
    link: &Link<'_>,
    energy: &EnergyDistribution,
    k: usize,
    m: usize,
) -> Result<Option<f64>> {
    let one = t_value_km(link, energy, k, m, Outcome::Correct2.code())?;
    let zero = t_value_km(link, energy, k, m, Outcome::Correct1.code())?;
    Ok(ratio(one, zero))
}

fn ratio(num: f64, other: f64) -> Option<f64> {
    let den = num + other;
    (den > 0.0).then(|| num / den)
}

/// Order-R Rényi entropy, in bits, of a binary variable with P(1) = p.
pub fn renyi_entropy(p: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || r == 1.0 || !r.is_finite() {
        return Err(Error::Domain(format!(
            "Renyi order must be positive, finite and different from 1, got {r}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    Ok((p.powf(r) + (1.0 - p).powf(r)).log2() / (1.0 - r))
}

/// Largest k + m visited by the entropy average.
pub fn default_kmax(energy: &EnergyDistribution) -> usize {
    match energy {
        EnergyDistribution::Poisson(mu) => (16.0 + 3.0 * mu).ceil() as usize,
        EnergyDistribution::FixedN(n) => *n,
        EnergyDistribution::Custom(w) => w.max_n(),
    }
}

/// Evangeline's average R-entropy on error-free sifted bits; `None` when
/// there are no such bits.
pub fn average_entropy(
    link: &Link<'_>,
    energy: &EnergyDistribution,
    renyi: f64,
    kmax: Option<usize>,
) -> Result<Option<f64>> {
    // reject a bad order even when every term would be skipped
    renyi_entropy(0.5, renyi)?;
    let kmax = kmax.unwrap_or_else(|| default_kmax(energy));
    let mut numerator = 0.0;
    for k in 0..=kmax {
        for m in 0..=kmax - k {
            let one = t_value_km(link, energy, k, m, Outcome::Correct2.code())?;
            let zero = t_value_km(link, energy, k, m, Outcome::Correct1.code())?;
            if let Some(p) = ratio(one, zero) {
                numerator += (one + zero) * renyi_entropy(p, renyi)?;
            }
        }
    }
    let den = t_value(link, energy, Outcome::Correct2.code())?
        + t_value(link, energy, Outcome::Correct1.code())?;
    Ok((den > 0.0).then(|| numerator / den))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QkdMetrics {
    pub p_good: f64,
    pub p_sift_err: Option<f64>,
    pub av_ent: Option<f64>,
    /// p_good · av_ent.
    pub fig_merit: Option<f64>,
}

pub fn qkd_metrics(
    link: &Link<'_>,
    energy: &EnergyDistribution,
    opts: &MetricOptions,
) -> Result<QkdMetrics> {
    let sift = sift_metrics(link, energy, opts.basis_match_factor)?;
    let av_ent = average_entropy(link, energy, opts.renyi, opts.kmax)?;
    Ok(QkdMetrics {
        p_good: sift.p_good,
        p_sift_err: sift.p_sift_err,
        av_ent,
        fig_merit: av_ent.map(|a| sift.p_good * a),
    })
}
