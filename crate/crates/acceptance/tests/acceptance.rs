//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::time::{Duration, Instant};

use common::{case_one_gnkm_hyp, euler_partition_count, kappa_oracle, rel_err};
use entqkd::detection::{t_value, t_value_km, DetectorParams, Link, OutcomeCode, TapParams};
use entqkd::entanglement::{compute_kappa, compute_xi_row, XiRow, Zeta};
use entqkd::gfunctions::{g_n, g_nkm, EnergyDistribution, KernelArgs};
use entqkd::metrics::{average_entropy, default_kmax, sift_metrics, Outcome};
use entqkd::partitions::enumerate_partitions;
use entqkd::sweep::{read_csv, run_sweep, write_csv, ModelParams, MuGrid, SweepContext};

struct Check {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn check(name: &'static str, ok: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        ok,
        detail: detail.into(),
    }
}

fn row(zeta: Zeta, n_cap: usize) -> XiRow {
    compute_xi_row(zeta, n_cap, &enumerate_partitions(n_cap)).unwrap()
}

fn z(v: f64) -> Zeta {
    Zeta::with_default_threshold(v)
}

fn regime_rows() -> Vec<XiRow> {
    vec![
        row(z(0.0), 32),
        row(z(1.0), 32),
        row(z(10.0), 32),
        row(Zeta::infinite(), 32),
    ]
}

fn args_grid() -> Vec<KernelArgs> {
    let vals = [0.0, 0.15, 0.4, 0.6, 0.85];
    let mut out = Vec::new();
    for &w in &vals {
        for &x in &vals {
            for &y in &vals {
                for &zz in &vals {
                    if w + x <= 1.0 && y + zz <= 1.0 {
                        out.push(KernelArgs::new(w, x, y, zz));
                    }
                }
            }
        }
    }
    out
}

fn criterion_1() -> Vec<Check> {
    let t = enumerate_partitions(32);
    let bad: Vec<usize> = (1..=32)
        .filter(|&n| t.of(n).len() as u64 != euler_partition_count(n))
        .collect();
    vec![check(
        "p(n) matches the pentagonal recurrence for n <= 32",
        bad.is_empty(),
        format!("mismatches at {bad:?}"),
    )]
}

fn criterion_2() -> Vec<Check> {
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    for zeta in [0.1, 1.0, 10.0, 100.0] {
        let r = row(z(zeta), 3);
        let k = kappa_oracle(zeta, 3);
        worst = worst.max(rel_err(r.xi(2), 1.0 + k[1]));
        worst = worst.max(rel_err(r.xi(3), 1.0 + 3.0 * k[1] + 2.0 * k[2]));
    }
    out.push(check(
        "Xi(2), Xi(3) equal their kappa expansions",
        worst <= 1e-12,
        format!("max rel err {worst:e}"),
    ));
    let r0 = row(z(0.0), 20);
    let mut fact: u128 = 1;
    let mut exact = true;
    for n in 0..=20usize {
        if n > 0 {
            fact *= n as u128;
        }
        exact &= r0.xi(n) == fact as f64;
    }
    out.push(check("Xi(0, n) = n! exactly for n <= 20", exact, ""));
    let r8 = row(z(1e8), 16);
    let devs: Vec<(usize, f64)> = (0..=16).map(|n| (n, (r8.xi(n) - 1.0).abs())).collect();
    let over: Vec<usize> = devs
        .iter()
        .filter(|(_, d)| *d > 1e-4)
        .map(|(n, _)| *n)
        .collect();
    out.push(check(
        "|Xi(1e8, n) - 1| <= 1e-4 for n <= 16",
        over.is_empty(),
        format!(
            "exceeded for n = {over:?}; |Xi-1| at n=8: {:e}, n=16: {:e}",
            devs[8].1, devs[16].1
        ),
    ));
    out
}

fn criterion_3() -> Vec<Check> {
    let mut bound_ok = true;
    let mut asym_ok = true;
    let mut detail = String::new();
    for zeta in [1.0, 10.0, 100.0] {
        let k = compute_kappa(z(zeta), 32);
        for n in 2..=32 {
            if k.get(n) > 2.0 / zeta {
                bound_ok = false;
                detail.push_str(&format!("bound fails at zeta={zeta} n={n}; "));
            }
        }
        let lim = 2.0 / ((zeta * zeta + 1.0f64).sqrt() + 1.0);
        if (k.get(32) - lim).abs() >= (k.get(8) - lim).abs() {
            asym_ok = false;
            detail.push_str(&format!("no approach at zeta={zeta}; "));
        }
    }
    vec![
        check(
            "kappa(zeta, n) <= 2/zeta for n >= 2",
            bound_ok,
            detail.clone(),
        ),
        check(
            "kappa(zeta, 32) closer to the asymptote than kappa(zeta, 8)",
            asym_ok,
            detail,
        ),
    ]
}

fn criterion_4() -> Vec<Check> {
    let mut out = Vec::new();
    let grid = args_grid();
    let mut worst = 0.0f64;
    for r in [
        row(z(0.0), 8),
        row(z(1.0), 8),
        row(z(100.0), 8),
        row(Zeta::infinite(), 8),
    ] {
        for a in &grid {
            for n in 0..=8 {
                let gn = g_n(&r, n, a).unwrap();
                let mut s = 0.0;
                for k in 0..=n {
                    for m in 0..=n - k {
                        s += g_nkm(&r, n, k, m, a).unwrap();
                    }
                }
                worst = worst.max(rel_err(s, gn));
            }
        }
    }
    out.push(check(
        "sum over k+m <= n of G_nkm equals G_n (n <= 8, three regimes)",
        worst <= 1e-10,
        format!("max rel err {worst:e}"),
    ));

    let r0 = row(z(0.0), 10);
    let mut worst = 0.0f64;
    for a in grid.iter().filter(|a| a.y > 0.0) {
        for n in 0..=10 {
            for k in 0..=3.min(n) {
                for m in 0..=3.min(n - k) {
                    let lib = g_nkm(&r0, n, k, m, a).unwrap();
                    worst = worst.max(rel_err(lib, case_one_gnkm_hyp(n, k, m, a)));
                }
            }
        }
    }
    out.push(check(
        "Case I G_nkm equals the 2F1 form",
        worst <= 1e-9,
        format!("max rel err {worst:e}"),
    ));

    let small = row(z(1e-8), 12);
    let big = row(z(1e8), 12);
    let case1 = row(z(0.0), 12);
    let case2 = row(Zeta::infinite(), 12);
    let (mut w1, mut w2) = (0.0f64, 0.0f64);
    let mut w2_at = (0, KernelArgs::new(0.0, 0.0, 0.0, 0.0));
    for a in &grid {
        for n in 0..=12 {
            w1 = w1.max(rel_err(
                g_n(&small, n, a).unwrap(),
                g_n(&case1, n, a).unwrap(),
            ));
            let e = rel_err(g_n(&big, n, a).unwrap(), g_n(&case2, n, a).unwrap());
            if e > w2 {
                w2 = e;
                w2_at = (n, *a);
            }
        }
    }
    out.push(check(
        "general G_n at zeta=1e-8 matches Case I within 1e-6",
        w1 <= 1e-6,
        format!("max rel err {w1:e}"),
    ));
    out.push(check(
        "general G_n at zeta=1e8 matches Case II within 1e-4",
        w2 <= 1e-4,
        format!("max rel err {w2:e} at n={} args={:?}", w2_at.0, w2_at.1),
    ));
    out
}

fn criterion_5() -> Vec<Check> {
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    for r in regime_rows() {
        for (w, y) in [(1.0, 1.0), (0.3, 0.9), (0.75, 0.75), (0.0, 0.5)] {
            let a = KernelArgs::new(w, 1.0 - w, y, 1.0 - y);
            for n in 0..=16 {
                worst = worst.max((g_n(&r, n, &a).unwrap() - 1.0).abs());
            }
        }
    }
    out.push(check(
        "G_n = 1 when w+x = y+z = 1",
        worst <= 1e-10,
        format!("max err {worst:e}"),
    ));

    let det = DetectorParams::default();
    let mut comp = 0.0f64;
    let mut marg = 0.0f64;
    for vsq in [0.0, 0.25, 0.5] {
        let tap = TapParams::new(vsq).unwrap();
        for r in regime_rows() {
            let link = Link::new(det, tap, &r);
            for mu in [0.0, 0.04, 0.5, 2.0] {
                let e = EnergyDistribution::Poisson(mu);
                let total: f64 = OutcomeCode::all()
                    .map(|o| t_value(&link, &e, o).unwrap())
                    .sum();
                comp = comp.max((total - 1.0).abs());
                if mu == 0.04 || mu == 2.0 {
                    let kmax = default_kmax(&e);
                    for o in OutcomeCode::all() {
                        let t = t_value(&link, &e, o).unwrap();
                        let mut s = 0.0;
                        for k in 0..=kmax {
                            for m in 0..=kmax - k {
                                s += t_value_km(&link, &e, k, m, o).unwrap();
                            }
                        }
                        marg = marg.max((s - t).abs());
                    }
                }
            }
        }
    }
    out.push(check(
        "sum of T over the 16 outcomes is 1 (mu <= 2)",
        comp <= 1e-8,
        format!("max err {comp:e}"),
    ));
    out.push(check(
        "sum over (k, m) of T_km equals T",
        marg <= 1e-8,
        format!("max err {marg:e}"),
    ));
    out
}

fn criterion_6() -> Vec<Check> {
    let mut out = Vec::new();
    let det = DetectorParams::default();
    let mut worst = 0.0f64;
    for r in regime_rows() {
        let link = Link::new(det, TapParams::new(0.0).unwrap(), &r);
        for mu in [0.0, 0.01, 0.04, 0.5] {
            let a = average_entropy(&link, &EnergyDistribution::Poisson(mu), 1.1, None)
                .unwrap()
                .unwrap_or(f64::NAN);
            worst = worst.max((a - 1.0).abs());
        }
    }
    out.push(check(
        "vsq = 0 gives av_ent = 1",
        worst <= 1e-9,
        format!("max |av_ent - 1| {worst:e}"),
    ));

    let mut worst = 0.0f64;
    for r in regime_rows() {
        let link = Link::new(det, TapParams::default(), &r);
        let s = sift_metrics(&link, &EnergyDistribution::Poisson(0.0), false).unwrap();
        worst = worst.max((s.p_sift_err.unwrap_or(f64::NAN) - 0.5).abs());
    }
    out.push(check(
        "mu = 0 with default detectors gives p_sift_err = 1/2",
        worst <= 1e-6,
        format!("max |p_sift_err - 0.5| {worst:e}"),
    ));

    let sym = DetectorParams::uniform(0.2, 0.5, 1e-4).unwrap();
    let asym = DetectorParams::new(
        [0.1, 0.3, 0.2, 0.05],
        [1.0, 0.9, 0.1, 0.2],
        [1e-5, 5e-5, 2e-5, 7e-5],
    )
    .unwrap();
    let mut worst = 0.0f64;
    for r in regime_rows() {
        for mu in [0.0, 0.01, 0.3] {
            let e = EnergyDistribution::Poisson(mu);
            let link = Link::new(sym, TapParams::default(), &r);
            let t = |o: Outcome| t_value(&link, &e, o.code()).unwrap();
            worst = worst.max((t(Outcome::Correct1) - t(Outcome::Correct2)).abs());
            worst = worst.max((t(Outcome::Error1) - t(Outcome::Error2)).abs());
            let a = sift_metrics(&Link::new(asym, TapParams::default(), &r), &e, false).unwrap();
            let b = sift_metrics(
                &Link::new(asym.swapped(), TapParams::default(), &r),
                &e,
                false,
            )
            .unwrap();
            worst = worst.max((a.p_sift_err.unwrap() - b.p_sift_err.unwrap()).abs());
        }
    }
    out.push(check(
        "relabeling symmetries hold",
        worst <= 1e-12,
        format!("max gap {worst:e}"),
    ));
    out
}

fn criterion_7() -> Vec<Check> {
    let mut out = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let written =
        run_sweep(&ModelParams::default(), &MuGrid::default()).and_then(|r| write_csv(&r, &csv));
    out.push(check(
        "default sweep runs and writes CSV",
        written.is_ok(),
        format!("{written:?}"),
    ));
    let Ok(result) = read_csv(&csv) else {
        out.push(check("sweep CSV readable", false, ""));
        return out;
    };
    let labels: Vec<&str> = {
        let mut l: Vec<&str> = result.rows.iter().map(|r| r.zeta.as_str()).collect();
        l.dedup();
        l
    };
    out.push(check(
        "six curves 0, 1, 10, 100, 1000, inf",
        labels == ["0", "1", "10", "100", "1000", "inf"],
        format!("{labels:?}"),
    ));
    let in_range = result.rows.iter().all(|r| {
        r.p_sift_err
            .is_some_and(|p| p.is_finite() && p > 0.0 && p < 1.0)
    });
    out.push(check("p_sift_err finite and in (0, 1)", in_range, ""));

    let ctx = SweepContext::new(ModelParams::default(), 0.04, None).unwrap();
    let mut conv_ok = true;
    let mut detail = String::new();
    for zeta in ctx.zetas() {
        let at_zero = result
            .rows
            .iter()
            .find(|r| r.zeta == zeta.label() && r.mu == 0.0)
            .and_then(|r| r.p_sift_err)
            .unwrap_or(f64::NAN);
        let mut prev = f64::INFINITY;
        for mu in [1e-5, 1e-6, 1e-7, 1e-8] {
            let p = ctx.evaluate_point(zeta, mu).unwrap().p_sift_err.unwrap();
            let d = (p - at_zero).abs();
            conv_ok &= d < prev;
            prev = d;
        }
        conv_ok &= prev < 1e-3 && (at_zero - 0.5).abs() < 1e-6;
        detail.push_str(&format!("{zeta}: {prev:.1e} "));
    }
    out.push(check(
        "p_sift_err approaches the dark-count value 1/2 as mu -> 0",
        conv_ok,
        detail,
    ));

    let series = |label: &str| -> Vec<(f64, f64)> {
        result
            .rows
            .iter()
            .filter(|r| r.zeta == label)
            .map(|r| (r.mu, r.p_sift_err.unwrap_or(f64::NAN)))
            .collect()
    };
    let (a, b) = (series("1000"), series("inf"));
    let worst = a
        .iter()
        .zip(&b)
        .filter(|(p, _)| p.0 >= 0.001)
        .map(|(p, q)| (p.1 - q.1).abs() / q.1)
        .fold(0.0f64, f64::max);
    out.push(check(
        "zeta = 1000 within 2% of zeta = inf for mu >= 0.001",
        a.len() == b.len() && !a.is_empty() && worst <= 0.02,
        format!("max rel gap {worst:e}"),
    ));

    let mut mono = true;
    let mut detail = String::new();
    for zeta in ctx.zetas() {
        let r = ctx.xi_row(zeta).unwrap();
        for mu in [0.001, 0.01, 0.04] {
            let vals: Vec<f64> = [0.0, 0.1, 0.25, 0.5]
                .iter()
                .map(|&v| {
                    let link = Link::new(DetectorParams::default(), TapParams::new(v).unwrap(), r);
                    average_entropy(&link, &EnergyDistribution::Poisson(mu), 1.1, None)
                        .unwrap()
                        .unwrap()
                })
                .collect();
            if !vals.windows(2).all(|w| w[1] <= w[0]) {
                mono = false;
                detail.push_str(&format!("{zeta} mu={mu}: {vals:?}; "));
            }
        }
    }
    out.push(check(
        "av_ent non-increasing in vsq over {0, 0.1, 0.25, 0.5}",
        mono,
        detail,
    ));
    out
}

type Criterion = (&'static str, fn() -> Vec<Check>, Duration);

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 partition counts", criterion_1, Duration::from_secs(1)),
        ("2 Xi anchors", criterion_2, Duration::from_secs(1)),
        (
            "3 kappa bound and asymptote",
            criterion_3,
            Duration::from_secs(1),
        ),
        ("4 G consistency", criterion_4, Duration::from_secs(10)),
        ("5 normalization trio", criterion_5, Duration::from_secs(60)),
        ("6 physics anchors", criterion_6, Duration::from_secs(10)),
        ("7 desk-scale sweep", criterion_7, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let checks = run();
        let elapsed = start.elapsed();
        let timely = elapsed <= budget;
        let ok = timely && checks.iter().all(|c| c.ok);
        for c in &checks {
            let mark = if c.ok { "ok  " } else { "FAIL" };
            if c.detail.is_empty() {
                println!("    {mark} {}", c.name);
            } else {
                println!("    {mark} {} ({})", c.name, c.detail);
            }
        }
        println!(
            "criterion {name}: {} [{:.2?} of {:?}{}]",
            if ok { "PASS" } else { "FAIL" },
            elapsed,
            budget,
            if timely { "" } else { ", over budget" }
        );
        if !ok {
            failed += 1;
        }
    }
    println!("acceptance: {} of 7 criteria passed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
