//! Acceptance criteria, one line per criterion.
//!
//! Runs with `harness = false` so every verdict is printed regardless of
//! output capture. The process exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use gaussftpl::fclass::indicator_class;
use gaussftpl::fixtures::privacy_fixture;
use gaussftpl::online::{competitor_leading_term, gaussian_leading_term};
use gaussftpl::rng;
use gaussftpl::*;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

type Outcome = std::result::Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- 1

fn c1_full() -> Outcome {
    let c = hadamard_class(4, HadamardDomain::Full).unwrap();
    let rho = pairwise_separation(&c, &DiscreteMeasure::uniform(16).unwrap()).unwrap().as_f64();
    let want = 0.5f64.sqrt();
    ensure((rho - want).abs() <= 1e-12, format!("full domain rho = {rho:.15}, expected {want:.15}"))
}

fn c1_basis() -> Outcome {
    let c = hadamard_class(4, HadamardDomain::Basis).unwrap();
    let rho = pairwise_separation(&c, &DiscreteMeasure::uniform(4).unwrap()).unwrap().as_f64();
    let want = 0.5f64.sqrt();
    ensure((rho - want).abs() <= 1e-12, format!("basis domain rho = {rho:.15}, expected {want:.15}"))
}

// ---------------------------------------------------------------- 2

fn c2() -> Outcome {
    let mut r = rng::substream(2, "acceptance-sv", 0);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..200u64 {
        let f = r.random_range(1..=32usize);
        let m = r.random_range(1..=16usize);
        // Mix continuous entries with small alphabets so that duplicate
        // rows and exact ties also occur.
        let alphabet = k % 3;
        let rows: Vec<Vec<f64>> = (0..f)
            .map(|_| {
                (0..m)
                    .map(|_| match alphabet {
                        0 => r.random_range(-1.0..=1.0),
                        1 => [-1.0, 1.0][r.random_range(0..2)],
                        _ => [-1.0, 0.0, 0.5, 1.0][r.random_range(0..4)],
                    })
                    .collect()
            })
            .collect();
        let c = FunctionClass::from_rows(rows).unwrap();
        let pts: Vec<usize> = (0..m).collect();
        let sv = separation_from_singular_value(&c, &pts).unwrap();
        let pw = pairwise_separation(&c, &DiscreteMeasure::uniform(m).unwrap()).unwrap().as_f64();
        if sv > pw + 1e-9 {
            return Err(format!("class {k} (F={f}, m={m}): sv bound {sv} > pairwise {pw}"));
        }
        if pw.is_finite() {
            worst = worst.max(sv - pw);
        }
    }
    for m in [1usize, 2, 5, 8, 16] {
        let c = indicator_class(m).unwrap();
        let pts: Vec<usize> = (0..m).collect();
        let sv = separation_from_singular_value(&c, &pts).unwrap();
        let want = (2.0 / m as f64).sqrt();
        if (sv - want).abs() > 1e-12 {
            return Err(format!("indicator m={m}: sv bound {sv} != sqrt(2/m) = {want}"));
        }
        if m > 1 {
            let pw = pairwise_separation(&c, &DiscreteMeasure::uniform(m).unwrap()).unwrap().as_f64();
            if (pw - want).abs() > 1e-12 {
                return Err(format!("indicator m={m}: pairwise {pw} != sqrt(2/m)"));
            }
        }
    }
    Ok(format!("200 classes dominated (max sv - pairwise = {worst:.3e}); indicator equality holds"))
}

// ---------------------------------------------------------------- 3

/// `integral over [a, b]` by composite Simpson with `n` (even) panels.
fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// P(index `t` is the argmin and the other index stays more than `tau` above
/// it) for two independent standard coordinates, by 2-D quadrature over the
/// region `mean[o] + eta*y - mean[t] - eta*x > tau`.
fn two_point_oracle(mean: [f64; 2], eta: f64, tau: f64, t: usize) -> f64 {
    let o = 1 - t;
    let lim = 12.0;
    simpson(-lim, lim, 4000, |x| {
        let y0 = ((tau + mean[t] + eta * x - mean[o]) / eta).max(-lim);
        if y0 >= lim {
            return 0.0;
        }
        phi(x) * simpson(y0, lim, 400, phi)
    })
}

fn c3() -> Outcome {
    let trials = 200_000;
    let mean = [0.0, 0.3];
    let (eta, tau, rho) = (1.0, 0.5, 0.5);
    let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let gp = FiniteGp::new(mean.to_vec(), id, eta).unwrap();
    let v = check_conditioned_stability(&gp, rho, tau, 0.05, 1.0, trials, 31).unwrap();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut details = Vec::new();
    for t in 0..2 {
        let oracle = two_point_oracle(mean, eta, tau, t);
        let closed = normal.sf((tau - (mean[1 - t] - mean[t])) / (eta * 2f64.sqrt()));
        if (oracle - closed).abs() > 1e-9 {
            return Err(format!("quadrature {oracle} disagrees with closed form {closed}"));
        }
        let est = v.margins[t].rhs;
        let se = (oracle * (1.0 - oracle) / trials as f64).sqrt();
        if (est - oracle).abs() > 3.0 * se {
            return Err(format!("t={t}: MC {est:.5} vs oracle {oracle:.5} (3 se = {:.5})", 3.0 * se));
        }
        details.push(format!("t={t}: MC {est:.5} vs oracle {oracle:.5}"));
    }

    let fx = privacy_fixture().unwrap();
    let (rho16, tau16, delta16, kappa) = (0.5, 1.0, 0.05, 1.0);
    let base = fx.conditioned_gp(1.0).unwrap();
    let (eta_lb, g) = conditioned_eta_threshold(&base, rho16, tau16, delta16, kappa, 32).unwrap();
    let gp16 = base.with_eta(eta_lb).unwrap();
    let v16 = check_conditioned_stability(&gp16, rho16, tau16, delta16, kappa, trials, 32).unwrap();
    let worst = v16.margins.iter().map(|m| m.margin_slack).fold(f64::INFINITY, f64::min);
    details.push(format!(
        "|T|=16 at eta_lb={eta_lb:.3} (G={:.3}+-{:.3}): claimed={}, violations={}, min slack margin={worst:.4}",
        g.value,
        g.stderr,
        v16.bound_claimed,
        v16.violations.len()
    ));
    ensure(v16.bound_claimed && v16.pass, details.join("; "))
}

// ---------------------------------------------------------------- 4

fn c4() -> Outcome {
    let fx = privacy_fixture().unwrap();
    let rho = fx.certificate.rho.as_f64();
    let kernel = fx.kernel().unwrap();
    let (eta, g) = distributional_eta_threshold(&kernel, rho, 1.0, 0.05, 41).unwrap();
    let pair = fx.stability_pair(eta).unwrap();
    let v = check_distributional_stability(&pair, rho, 1.0, 0.05, 200_000, 41).unwrap();
    let worst = v.margins.iter().map(|m| m.margin_slack).fold(f64::INFINITY, f64::min);
    ensure(
        v.bound_claimed && v.pass,
        format!(
            "F=16, m=8, rho={rho:.4}, eta={eta:.2} (G={:.3}), factor={:.4}, violations={}, min slack margin={worst:.4}",
            g.value,
            v.factor,
            v.violations.len()
        ),
    )
}

// ---------------------------------------------------------------- 5

fn c5() -> Outcome {
    let fx = privacy_fixture().unwrap();
    let budget = PrivacyBudget::new(1.0, 0.05).unwrap();
    let g = gaussian_complexity(&fx.class, &fx.certificate.points, 10_000, 51).unwrap();
    let rep = audit_privacy(
        &fx.class,
        &fx.certificate,
        &fx.dataset,
        &fx.neighbor,
        &fx.loss,
        &budget,
        g.conservative_upper(),
        200_000,
        52,
    )
    .unwrap();
    let zero = audit_privacy_with_eta(
        &fx.class,
        &fx.certificate,
        &fx.dataset,
        &fx.neighbor,
        &fx.loss,
        &budget,
        0.0,
        200_000,
        53,
    )
    .unwrap();
    ensure(
        rep.pass && zero.is_infinite() && !zero.pass,
        format!(
            "eta={:.2}: epsilon_hat={:.4} (lower {:.4}) vs target 1; eta=0: epsilon_hat={}",
            rep.eta, rep.epsilon_hat, rep.epsilon_lower, zero.epsilon_hat
        ),
    )
}

// ---------------------------------------------------------------- 6-8

const HORIZON: usize = 100_000;
const SEEDS: u64 = 10;

fn regret_runs() -> Vec<Trace> {
    let c = hadamard_class(4, HadamardDomain::Full).unwrap();
    let cert = SeparationCertificate::full_domain(&c).unwrap();
    let loss = LossSpec::zero_one();
    (0..SEEDS)
        .map(|s| {
            let env = Environment::realizable(5, 0.0, rng::derive_seed(6, "acceptance-env", s));
            run_ftpl(&c, &cert, &loss, &env, HORIZON, &EtaPolicy::tuned(0.0), rng::derive_seed(6, "acceptance-ftpl", s))
                .unwrap()
        })
        .collect()
}

fn c6(traces: &[Trace]) -> Outcome {
    let mean = traces.iter().map(|t| t.regret).sum::<f64>() / traces.len() as f64;
    let lstar_max = traces.iter().map(|t| t.l_star).fold(0.0, f64::max);
    let bound = regret_bound_gaussian(1.0, 0.5f64.sqrt(), HORIZON as u64, 16, 0.0).unwrap();
    let eta = traces.iter().map(|t| t.eta).sum::<f64>() / traces.len() as f64;
    ensure(
        lstar_max == 0.0 && mean <= bound && mean <= 0.05 * HORIZON as f64,
        format!(
            "mean regret {mean:.1} over {SEEDS} seeds (eta ~ {eta:.1}); bound {bound:.1}; 0.05T = {}",
            0.05 * HORIZON as f64
        ),
    )
}

fn c7(traces: &[Trace]) -> Outcome {
    let r = btl_check_tuned(traces).unwrap();
    ensure(
        r.pass,
        format!("mean sum l_t(f_(t+1)) = {:.2} (se {:.2}) <= {:.2} (L* = {})", r.lhs, r.lhs_stderr, r.rhs, r.lstar),
    )
}

fn c8(traces: &[Trace]) -> Outcome {
    for (i, tr) in traces.iter().enumerate() {
        let a = &tr.account;
        if a.calls != HORIZON as u64 || a.per_call_sizes.len() != HORIZON || !a.is_consistent() {
            return Err(format!("trace {i}: {} calls recorded", a.calls));
        }
        if let Some(t) = (1..=HORIZON).find(|&t| a.per_call_sizes[t - 1] != (t - 1 + tr.m) as u64) {
            return Err(format!("trace {i}: call {t} has size {}", a.per_call_sizes[t - 1]));
        }
    }
    Ok(format!("{} traces x {HORIZON} calls, sizes (t-1)+16", traces.len()))
}

// ---------------------------------------------------------------- 9

fn c9() -> Outcome {
    let lstar = 1e4f64;
    let mut parts = Vec::new();
    let mut ok = true;
    // Full domain: m = 2^n points with n = 8, so 2^(n/2) = 16. Basis: m = n = 8.
    for (label, n_functions, m, want) in [("full", 256usize, 256usize, 16.0), ("basis", 256, 8, 8f64.sqrt())] {
        let log_f = (n_functions as f64).ln();
        let oracle = (m as f64 * log_f * lstar).sqrt() / (log_f * lstar).sqrt();
        let ratio = competitor_leading_term(n_functions, m, lstar) / gaussian_leading_term(n_functions, lstar);
        let rel = (ratio / want - 1.0).abs();
        ok &= rel <= 0.2 && (ratio - oracle).abs() <= 1e-12 * oracle;
        parts.push(format!("{label}: ratio {ratio:.3} vs {want:.3} ({:.1}% off)", 100.0 * rel));
    }
    ensure(ok, parts.join("; "))
}

// ---------------------------------------------------------------- 10

fn c10() -> Outcome {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
    let d = 2.0 * (-2f64).exp();
    let eta = privacy_eta(1.0, &PrivacyBudget::new(1.0, d).unwrap(), 1.0).unwrap();
    let eta2 = privacy_eta(1.0, &PrivacyBudget::new(2.0, d).unwrap(), 1.0).unwrap();
    let eta3 = privacy_eta(0.5, &PrivacyBudget::new(1.0, d).unwrap(), 1.0).unwrap();
    if !(close(eta, 24.0) && close(eta2, 12.0) && close(eta3, 96.0)) {
        return Err(format!("privacy_eta examples: {eta}, {eta2}, {eta3}"));
    }
    let e = (-1f64).exp();
    let n = required_samples(1.0, e, &PrivacyBudget::new(1.0, e).unwrap(), 1.0, 0.0).unwrap();
    if n.n != 1 || !close(n.uniform_branch, 1.0) || !close(n.second_branch, 1.0) {
        return Err(format!("required_samples example: {n:?}"));
    }
    let a = accuracy_required_samples(1.0, e, 3.0, 0.0).unwrap();
    if a.n != 3 || !close(a.second_branch, 3.0) || !close(a.uniform_branch, 1.0) {
        return Err(format!("accuracy_required_samples example: {a:?}"));
    }
    let mut worst = 0.0f64;
    for &(rho, eps, delta, g) in &[(1.0, 1.0, 0.05, 1.0), (0.3, 0.2, 1e-6, 3.5), (0.9, 4.0, 0.5, 0.0)] {
        let eta = privacy_eta(rho, &PrivacyBudget::new(eps, delta).unwrap(), g).unwrap();
        let back = privacy_epsilon(eta, rho, delta, 1.0, g).unwrap();
        worst = worst.max((back - eps).abs());
    }
    ensure(worst <= 1e-12, format!("hand-computed values reproduced; max round-trip error {worst:.2e}"))
}

fn main() {
    let mut failures = 0;
    let mut run = |id: &str, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(d) => println!("criterion {id:<3} PASS  {name} [{secs:.1}s] {d}"),
            Err(d) => {
                failures += 1;
                println!("criterion {id:<3} FAIL  {name} [{secs:.1}s] {d}");
            }
        }
    };

    run("1a", "Hadamard separation, full domain", &mut c1_full);
    run("1b", "Hadamard separation, basis domain", &mut c1_basis);
    run("2", "singular-value dominance", &mut c2);
    run("3", "conditioned GP stability", &mut c3);
    run("4", "distributional stability", &mut c4);
    run("5", "privacy audit", &mut c5);
    let start = Instant::now();
    let traces = regret_runs();
    println!("(regret runs: {SEEDS} seeds x T={HORIZON} in {:.1}s)", start.elapsed().as_secs_f64());
    run("6", "small-loss regret", &mut || c6(&traces));
    run("7", "be-the-leader diagnostic", &mut || c7(&traces));
    run("8", "oracle accounting", &mut || c8(&traces));
    run("9", "Hadamard gap ratios", &mut c9);
    run("10", "calculators", &mut c10);

    if failures > 0 {
        println!("acceptance: {failures} criterion line(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
