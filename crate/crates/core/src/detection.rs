//! Detector outcomes and their probabilities.
//!
//! Modes are ordered (a₁, a₂, b₁, b₂). An outcome is a 4-bit code in which 1
//! marks a barred mode (its detector stays dark) and 0 a mode whose detector
//! clicks. The same bit layout also names subsets L of modes for the signed
//! no-click terms ℱ(L), with 1 meaning "in L".
//!
//! A click is the complement of no-click, so an outcome probability expands
//! over the clicking modes: T(J₀, J₁) = Σ_{X ⊆ J₁} (−1)^{#X} ℱ(J₀ ∪ X) with
//! ℱ(L) = (−1)^{#L} Π_{L}(1 − p_dark) 𝒢(args(L)).

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::entanglement::XiRow;
use crate::error::{Error, Result};
use crate::gfunctions::{g_energy, g_energy_km, EnergyDistribution, KernelArgs};
use crate::numeric::sorted_sum;

/// Negative values down to this magnitude are treated as roundoff and clamped.
pub const CLAMP_LIMIT: f64 = 1e-8;

static CLAMP_COUNT: AtomicUsize = AtomicUsize::new(0);

/// Number of negative outcome probabilities clamped to zero in this process.
pub fn clamp_count() -> usize {
    CLAMP_COUNT.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    A1 = 0,
    A2 = 1,
    B1 = 2,
    B2 = 3,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::A1, Mode::A2, Mode::B1, Mode::B2];

    /// The mode with labels 1 and 2 exchanged.
    pub fn swapped(self) -> Mode {
        match self {
            Mode::A1 => Mode::A2,
            Mode::A2 => Mode::A1,
            Mode::B1 => Mode::B2,
            Mode::B2 => Mode::B1,
        }
    }
}

/// Four bits over (a₁, a₂, b₁, b₂), written left to right as in `0110`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomeCode(u8);

impl OutcomeCode {
    pub const NONE: OutcomeCode = OutcomeCode(0);
    pub const ALL: OutcomeCode = OutcomeCode(0b1111);

    pub fn from_bits(bits: [bool; 4]) -> Self {
        let mut v = 0u8;
        for (i, b) in bits.iter().enumerate() {
            if *b {
                v |= 1 << i;
            }
        }
        OutcomeCode(v)
    }

    pub fn bits(self) -> [bool; 4] {
        [0, 1, 2, 3].map(|i| self.0 & (1 << i) != 0)
    }

    pub fn is_set(self, mode: Mode) -> bool {
        self.0 & (1 << mode as u8) != 0
    }

    pub fn count_ones(self) -> u32 {
        self.0.count_ones()
    }

    /// All 16 codes.
    pub fn all() -> impl Iterator<Item = OutcomeCode> {
        (0u8..16).map(OutcomeCode)
    }

    /// The code with labels 1 and 2 exchanged on both sides.
    pub fn swapped(self) -> Self {
        let mut out = [false; 4];
        for mode in Mode::ALL {
            out[mode.swapped() as usize] = self.is_set(mode);
        }
        OutcomeCode::from_bits(out)
    }

    /// Every code that agrees with `self` on its 1-bits.
    pub fn completions(self) -> impl Iterator<Item = OutcomeCode> {
        let free = !self.0 & 0b1111;
        OutcomeCode::all().filter(move |c| c.0 & !free == self.0)
    }
}

impl FromStr for OutcomeCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::config("outcome", format!("expected four 0/1 digits, found `{s}`"));
        if t.len() != 4 {
            return Err(bad());
        }
        let mut bits = [false; 4];
        for (slot, ch) in bits.iter_mut().zip(t.chars()) {
            *slot = match ch {
                '0' => false,
                '1' => true,
                _ => return Err(bad()),
            };
        }
        Ok(OutcomeCode::from_bits(bits))
    }
}

impl fmt::Display for OutcomeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

fn check_unit(field: &str, values: &[f64], open_top: bool) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        let ok = v.is_finite() && v >= 0.0 && if open_top { v < 1.0 } else { v <= 1.0 };
        if !ok {
            let range = if open_top { "[0, 1)" } else { "[0, 1]" };
            return Err(Error::config(
                field,
                format!("entry {} = {v} outside {range}", i + 1),
            ));
        }
    }
    Ok(())
}

/// Per-mode detector efficiency, transmission and dark-count probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    eta_det: [f64; 4],
    eta_trans: [f64; 4],
    p_dark: [f64; 4],
}

impl DetectorParams {
    pub fn new(eta_det: [f64; 4], eta_trans: [f64; 4], p_dark: [f64; 4]) -> Result<Self> {
        check_unit("eta_det", &eta_det, false)?;
        check_unit("eta_trans", &eta_trans, false)?;
        check_unit("p_dark", &p_dark, true)?;
        Ok(DetectorParams {
            eta_det,
            eta_trans,
            p_dark,
        })
    }

    /// Four identical detectors.
    pub fn uniform(eta_det: f64, eta_trans: f64, p_dark: f64) -> Result<Self> {
        DetectorParams::new([eta_det; 4], [eta_trans; 4], [p_dark; 4])
    }

    pub fn eta_det(&self) -> [f64; 4] {
        self.eta_det
    }

    pub fn eta_trans(&self) -> [f64; 4] {
        self.eta_trans
    }

    pub fn p_dark(&self) -> [f64; 4] {
        self.p_dark
    }

    /// No-click amplitude factor 1 − η_det·η_trans of a mode.
    pub fn alpha0(&self, mode: Mode) -> f64 {
        let i = mode as usize;
        1.0 - self.eta_det[i] * self.eta_trans[i]
    }

    /// Parameters with labels 1 and 2 exchanged.
    pub fn swapped(&self) -> Self {
        let sw = |v: [f64; 4]| [v[1], v[0], v[3], v[2]];
        DetectorParams {
            eta_det: sw(self.eta_det),
            eta_trans: sw(self.eta_trans),
            p_dark: sw(self.p_dark),
        }
    }
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            eta_det: [0.1; 4],
            eta_trans: [1.0, 1.0, 0.1, 0.1],
            p_dark: [5e-5; 4],
        }
    }
}

/// Evangeline's coupler: she keeps the fraction |v|² of Bob's light.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapParams {
    vsq: f64,
}

impl TapParams {
    pub fn new(vsq: f64) -> Result<Self> {
        check_unit("vsq", &[vsq], false)?;
        Ok(TapParams { vsq })
    }

    pub fn vsq(&self) -> f64 {
        self.vsq
    }

    pub fn usq(&self) -> f64 {
        1.0 - self.vsq
    }
}

impl Default for TapParams {
    fn default() -> Self {
        TapParams { vsq: 0.25 }
    }
}

/// 𝒢 arguments for the no-click subset `l`.
pub fn kernel_args(l: OutcomeCode, det: &DetectorParams, tap: &TapParams) -> KernelArgs {
    let alpha = |mode| {
        if l.is_set(mode) {
            det.alpha0(mode)
        } else {
            1.0
        }
    };
    let usq = tap.usq();
    let vsq = tap.vsq();
    KernelArgs::new(
        (alpha(Mode::A1) * alpha(Mode::B2)) * usq,
        alpha(Mode::A1) * vsq,
        (alpha(Mode::A2) * alpha(Mode::B1)) * usq,
        alpha(Mode::A2) * vsq,
    )
}

/// Π_{x∈L}(1 − p_dark(x)), grouped so that relabeling leaves it bit-identical.
pub fn dark_factor(l: OutcomeCode, det: &DetectorParams) -> f64 {
    let f = |mode: Mode| {
        if l.is_set(mode) {
            1.0 - det.p_dark[mode as usize]
        } else {
            1.0
        }
    };
    (f(Mode::A1) * f(Mode::A2)) * (f(Mode::B1) * f(Mode::B2))
}

/// Everything an outcome probability depends on besides the energy case.
#[derive(Debug, Clone, Copy)]
pub struct Link<'a> {
    pub det: DetectorParams,
    pub tap: TapParams,
    pub xi: &'a XiRow,
}

impl<'a> Link<'a> {
    pub fn new(det: DetectorParams, tap: TapParams, xi: &'a XiRow) -> Self {
        Link { det, tap, xi }
    }
}

/// Which 𝒢 variant an outcome probability is built from.
#[derive(Debug, Clone, Copy)]
pub struct Case<'a> {
    pub energy: &'a EnergyDistribution,
    /// Evangeline's counts (k, m), or `None` to marginalize over them.
    pub counts: Option<(usize, usize)>,
}

impl<'a> Case<'a> {
    pub fn marginal(energy: &'a EnergyDistribution) -> Self {
        Case {
            energy,
            counts: None,
        }
    }

    pub fn with_counts(energy: &'a EnergyDistribution, k: usize, m: usize) -> Self {
        Case {
            energy,
            counts: Some((k, m)),
        }
    }
}

/// ℱ(L) = (−1)^{#L} Π_L(1 − p_dark) 𝒢(args(L)).
pub fn f_value(link: &Link<'_>, case: &Case<'_>, l: OutcomeCode) -> Result<f64> {
    let args = kernel_args(l, &link.det, &link.tap);
    let g = match case.counts {
        None => g_energy(link.xi, case.energy, &args)?,
        Some((k, m)) => g_energy_km(link.xi, case.energy, k, m, &args)?,
    };
    let sign = if l.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    Ok(sign * dark_factor(l, &link.det) * g)
}

/// The ℱ terms of T(outcome), one per completion of its 0-bits.
pub fn t_terms(
    link: &Link<'_>,
    case: &Case<'_>,
    outcome: OutcomeCode,
) -> Result<Vec<(OutcomeCode, f64)>> {
    outcome
        .completions()
        .map(|l| f_value(link, case, l).map(|f| (l, f)))
        .collect()
}

/// T(outcome) before clamping; may be slightly negative from roundoff.
pub fn t_value_raw(link: &Link<'_>, case: &Case<'_>, outcome: OutcomeCode) -> Result<f64> {
    let mut terms: Vec<f64> = t_terms(link, case, outcome)?
        .into_iter()
        .map(|(_, f)| f)
        .collect();
    let outer = if outcome.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    Ok(outer * sorted_sum(&mut terms))
}

fn clamp(value: f64, outcome: OutcomeCode) -> Result<f64> {
    if value >= 0.0 {
        return Ok(value);
    }
    if value < -CLAMP_LIMIT {
        return Err(Error::NegativeProbability {
            value,
            outcome: outcome.to_string(),
        });
    }
    CLAMP_COUNT.fetch_add(1, Ordering::Relaxed);
    Ok(0.0)
}

/// Probability of `outcome`, marginal over Evangeline's counts.
pub fn t_value(link: &Link<'_>, energy: &EnergyDistribution, outcome: OutcomeCode) -> Result<f64> {
    let v = t_value_raw(link, &Case::marginal(energy), outcome)?;
    clamp(v, outcome)
}

/// Joint probability of `outcome` and Evangeline counting (k, m).
pub fn t_value_km(
    link: &Link<'_>,
    energy: &EnergyDistribution,
    k: usize,
    m: usize,
    outcome: OutcomeCode,
) -> Result<f64> {
    let v = t_value_raw(link, &Case::with_counts(energy, k, m), outcome)?;
    clamp(v, outcome)
}
