//! Independent reference implementations used by the integration tests.
//!
//! None of these reuse the library's numerical paths.

#![allow(dead_code)]

use entqkd::detection::{DetectorParams, TapParams};
use entqkd::gfunctions::KernelArgs;

/// p(n) from Euler's pentagonal-number recurrence.
pub fn euler_partition_count(n: usize) -> u64 {
    let mut p = vec![0i64; n + 1];
    p[0] = 1;
    for i in 1..=n {
        let mut total = 0i64;
        for k in 1.. {
            let g1 = k * (3 * k - 1) / 2;
            if g1 > i {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            total += sign * p[i - g1];
            let g2 = k * (3 * k + 1) / 2;
            if g2 <= i {
                total += sign * p[i - g2];
            }
        }
        p[i] = total;
    }
    p[n] as u64
}

/// κ(ζ, n) through the ζ_n recursion instead of the rational R recursion.
pub fn kappa_oracle(zeta: f64, n_cap: usize) -> Vec<f64> {
    let s1 = (zeta * zeta + 1.0).sqrt();
    let mut kappa = vec![1.0];
    let mut zn = zeta;
    for _ in 1..n_cap {
        let sn = (zn * zn + 1.0).sqrt();
        kappa.push(2.0 / (s1 + sn));
        zn = -zeta * zn / (s1 + sn);
    }
    kappa
}

/// Ξ(n)/n! from the exponential formula ξ(n) = (1/n) Σ_j κ_j ξ(n−j).
pub fn xi_scaled_oracle(kappa: &[f64]) -> Vec<f64> {
    let n_cap = kappa.len();
    let mut xi = vec![1.0];
    for n in 1..=n_cap {
        let s: f64 = (1..=n).map(|j| kappa[j - 1] * xi[n - j]).sum();
        xi.push(s / n as f64);
    }
    xi
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Terminating ₂F₁(a, −p; c; t) with p a non-negative integer.
pub fn hyp2f1_terminating(a: f64, p: usize, c: f64, t: f64) -> f64 {
    let b = -(p as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 0..p {
        let jf = j as f64;
        term *= (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0)) * t;
        sum += term;
    }
    sum
}

/// Case I 𝒢_{n,km} written through the hypergeometric function. Needs y > 0.
pub fn case_one_gnkm_hyp(n: usize, k: usize, m: usize, a: &KernelArgs) -> f64 {
    let free = n - k - m;
    let pre = factorial(n - k) / ((n as f64 + 1.0) * factorial(m) * factorial(free));
    pre * a.x.powi(k as i32)
        * a.y.powi(free as i32)
        * a.z.powi(m as i32)
        * hyp2f1_terminating((k + 1) as f64, free, k as f64 - n as f64, a.w / a.y)
}

/// Case II 𝒢_{n,km} summed term by term over j.
pub fn case_two_gnkm_sum(n: usize, k: usize, m: usize, a: &KernelArgs) -> f64 {
    let free = n - k - m;
    let s: f64 = (0..=free)
        .map(|j| {
            a.w.powi(j as i32) * a.y.powi((free - j) as i32) / (factorial(j) * factorial(free - j))
        })
        .sum();
    0.5f64.powi(n as i32) * factorial(n) / (factorial(k) * factorial(m))
        * a.x.powi(k as i32)
        * a.z.powi(m as i32)
        * s
}

/// Modes in L as booleans over (a1, a2, b1, b2).
pub fn subset_args(l: [bool; 4], det: &DetectorParams, tap: &TapParams) -> (KernelArgs, f64) {
    let eta_det = det.eta_det();
    let eta_trans = det.eta_trans();
    let p_dark = det.p_dark();
    let mut alpha = [1.0; 4];
    let mut dark = 1.0;
    for i in 0..4 {
        if l[i] {
            alpha[i] = 1.0 - eta_det[i] * eta_trans[i];
            dark *= 1.0 - p_dark[i];
        }
    }
    let u = 1.0 - tap.vsq();
    let v = tap.vsq();
    (
        KernelArgs::new(
            alpha[0] * alpha[3] * u,
            alpha[0] * v,
            alpha[1] * alpha[2] * u,
            alpha[1] * v,
        ),
        dark,
    )
}

/// Outcome probability as Σ_{X ⊆ J₁} (−1)^{#X} Π_{J₀∪X}(1−p_dark) 𝒢(J₀ ∪ X),
/// with 𝒢 supplied by the caller. `barred[i]` is true for J₀ modes.
pub fn t_direct(
    barred: [bool; 4],
    det: &DetectorParams,
    tap: &TapParams,
    g: impl Fn(&KernelArgs) -> f64,
) -> f64 {
    let clicks: Vec<usize> = (0..4).filter(|&i| !barred[i]).collect();
    let mut total = 0.0;
    for mask in 0..(1u32 << clicks.len()) {
        let mut l = barred;
        let mut size = 0;
        for (bit, &mode) in clicks.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                l[mode] = true;
                size += 1;
            }
        }
        let (args, dark) = subset_args(l, det, tap);
        let sign = if size % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * dark * g(&args);
    }
    total
}

pub fn bits(code: &str) -> [bool; 4] {
    let mut out = [false; 4];
    for (o, c) in out.iter_mut().zip(code.chars()) {
        *o = c == '1';
    }
    out
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
