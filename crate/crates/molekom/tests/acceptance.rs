//! Acceptance checks. Prints one line per criterion and exits non-zero if
//! any criterion fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use molekom::parallel::{self, Pool};
use molekom::{experiments, Config, EXPERIMENTS};
use molekom_core::channel::arrival_prob;
use molekom_core::mc::{McConfig, SignalModel, SlotLevelSim, TrajectorySim};
use molekom_core::perf::{self, risk_at_threshold};
use molekom_core::stats::slot_moments;
use molekom_core::{ArrivalTable, ChannelParams, NoiseParams, TxSchedule};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn reference_channel(d_mobile: f64) -> ChannelParams {
    ChannelParams::new(1e-6, 5e-10, d_mobile, d_mobile, 1e-2).unwrap()
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

fn verdict(pass: bool, detail: String) -> Outcome {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run_experiment(patch: Value) -> experiments::Output {
    let cfg = Config::from_json(&patch.to_string()).unwrap();
    experiments::run(&cfg, &Pool::new(None)).unwrap()
}

// hitting density in u = √t, g(u) = 2u·f(u²), finite at u = 0
fn density_in_u(u: f64, s: f64, d: f64, de: f64) -> f64 {
    let t = u * u;
    let direct = 2.0 * (s * de).sqrt() / (PI * (s + t * de)) * (-d * d / (4.0 * s)).exp();
    let w = t + s / de;
    let arg = d * (t * de).sqrt() / (2.0 * (s * (s + t * de)).sqrt());
    direct + 2.0 * u * d / (4.0 * PI * de * w.powi(3)).sqrt() * (-d * d / (4.0 * de * w)).exp() * libm::erf(arg)
}

fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.5 * (f(a) + f(b));
    for i in 1..panels {
        sum += f(a + i as f64 * h);
    }
    sum * h
}

fn trapezoid_q(offset: usize, slot: usize, p: &ChannelParams, panels: usize) -> f64 {
    let s = p.release_time(slot) * p.d_tot();
    let (d, de, tau) = (p.distance(), p.d_p_eff(), p.tau());
    if offset == 0 {
        trapezoid(|u| density_in_u(u, s, d, de), 0.0, tau.sqrt(), panels)
    } else {
        let lo = offset as f64 * tau;
        trapezoid(|t| density_in_u(t.sqrt(), s, d, de) / (2.0 * t.sqrt()), lo, lo + tau, panels)
    }
}

fn anchor_values() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (dm, q1, q2) in [(1e-9, 0.4505, 0.3480), (1e-11, 0.7511, 0.7338)] {
        let p = reference_channel(dm);
        let (a, b) = (arrival_prob(0, 1, &p).unwrap(), arrival_prob(0, 2, &p).unwrap());
        worst = worst.max((a - q1).abs()).max((b - q2).abs());
        parts.push(format!("D={dm:e}: q(0,1)={a:.4} q(0,2)={b:.4}"));
    }
    verdict(worst <= 0.01, format!("{}; max dev {worst:.1e} (tol 0.01)", parts.join(", ")))
}

fn quadrature_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let p = ChannelParams::new(
            rng.random_range(0.5e-6..3e-6),
            rng.random_range(1e-10..1e-9),
            log_uniform(&mut rng, 1e-12, 1e-9),
            log_uniform(&mut rng, 1e-12, 1e-9),
            rng.random_range(2e-3..2e-2),
        )
        .unwrap();
        let slot = rng.random_range(1..=10);
        let offset = rng.random_range(0..=4);
        let q = arrival_prob(offset, slot, &p).unwrap();
        worst = worst.max((q - trapezoid_q(offset, slot, &p, 1_000_000)).abs());
    }
    verdict(worst <= 1e-6, format!("50 draws, max |q - trapezoid| {worst:.2e} (tol 1e-6)"))
}

fn trajectory_cross_check() -> Outcome {
    let p = reference_channel(1e-9);
    let cfg = McConfig::trajectory(100_000, 31, p.tau() / 1000.0, 4);
    let sim = TrajectorySim::new(&p, 1, 100_000, &cfg, 4).unwrap();
    let (coarse, fine) = parallel::trajectory(&sim);
    let mut within = true;
    let (mut l1c, mut l1f) = (0.0, 0.0);
    let mut parts = Vec::new();
    for o in 0..4 {
        let q = arrival_prob(o, 1, &p).unwrap();
        let dev = (coarse.fraction(o) - q).abs();
        within &= dev <= 3.0 * coarse.stderr(o) + 0.01;
        l1c += dev;
        l1f += (fine.fraction(o) - q).abs();
        parts.push(format!("{:.4}/{q:.4}", coarse.fraction(o)));
    }
    verdict(
        within && l1f < l1c,
        format!(
            "offsets 0-3 walked/exact {}; within 3SE+0.01 {within}; L1 {l1c:.4} at tau/1000 -> {l1f:.4} at tau/4000",
            parts.join(" ")
        ),
    )
}

fn moment_validation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut schedules = Vec::new();
    for draw in 0..2 {
        let counts: Vec<u32> = (0..5).map(|_| rng.random_range(5..=40)).collect();
        let beta = rng.random_range(0.3..0.7);
        let p = reference_channel(log_uniform(&mut rng, 1e-11, 1e-9));
        let noise = NoiseParams::new(rng.random_range(0.0..10.0), rng.random_range(1.0..20.0)).unwrap();
        let sched = TxSchedule::new(counts.clone(), beta).unwrap();
        let qtab = ArrivalTable::compute(5, &p).unwrap();
        let sim = SlotLevelSim::new(&sched, &noise, &qtab, McConfig::slot_level(10_000_000, 41 + draw)).unwrap();
        let est = parallel::slot_level(&sim).estimates();
        for (s, m) in est.slots.iter().zip(sim.moments()) {
            for (h, e) in [(0, &s.h0), (1, &s.h1)] {
                let (mu, var) = m.under(h);
                worst = worst.max(((e.mean - mu) / e.mean_se).abs()).max(((e.var - var) / e.var_se).abs());
                checked += 2;
            }
        }
        schedules.push(format!("{counts:?}"));
    }
    verdict(
        worst <= 3.0,
        format!("k=5, schedules {}, 1e7 trials, {checked} moments, max |z| {worst:.2} (tol 3)", schedules.join(" ")),
    )
}

fn threshold_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let k = 10;
        let p = reference_channel(log_uniform(&mut rng, 1e-11, 1e-9));
        let qtab = ArrivalTable::compute(k, &p).unwrap();
        let sched = TxSchedule::uniform(rng.random_range(10..=100), k, rng.random_range(0.2..0.8)).unwrap();
        let noise = NoiseParams::new(rng.random_range(0.0..20.0), rng.random_range(1.0..20.0)).unwrap();
        let m = slot_moments(rng.random_range(1..=k), &sched, &noise, &qtab).unwrap();
        let beta = sched.beta();
        let at_rule = perf::slot_performance(&m, beta).unwrap().p_e;
        let (lo, hi) = (m.mu0 - 6.0 * m.sigma2_0.sqrt(), m.mu1 + 6.0 * m.sigma2_1.sqrt());
        let brute = (0..10_000)
            .map(|i| risk_at_threshold(&m, lo + (hi - lo) * i as f64 / 9_999.0, beta))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max((at_rule - brute).abs());
    }
    verdict(worst <= 1e-4, format!("20 points, max |risk(gamma') - grid min| {worst:.2e} (tol 1e-4)"))
}

fn analytic_vs_mc() -> Outcome {
    let p = reference_channel(1e-9);
    let qtab = ArrivalTable::compute(20, &p).unwrap();
    let sched = TxSchedule::uniform(30, 20, 0.5).unwrap();
    let mut all = true;
    let mut parts = Vec::new();
    let mut gaussian_worst: f64 = 0.0;
    for (idx, s2) in [1.0, 10.0, 20.0].into_iter().enumerate() {
        let noise = NoiseParams::new(0.0, s2).unwrap();
        let link = perf::link_performance(&sched, &noise, &qtab).unwrap();
        let z = |model: SignalModel| {
            let cfg = McConfig { signal_model: model, ..McConfig::slot_level(1_000_000, 60 + idx as u64) };
            let e = parallel::slot_level(&SlotLevelSim::new(&sched, &noise, &qtab, cfg).unwrap()).estimates();
            [(e.p_d - link.p_d) / e.p_d_se, (e.p_fa - link.p_fa) / e.p_fa_se, (e.p_e - link.p_e) / e.p_e_se]
        };
        let exact = z(SignalModel::Exact);
        all &= exact.iter().all(|z| z.abs() <= 3.0);
        parts.push(format!("s2={s2}: z(PD,PFA,Pe)=({:.1},{:.1},{:.1})", exact[0], exact[1], exact[2]));
        // same detector on Gaussian-drawn counts isolates the approximation
        gaussian_worst = z(SignalModel::Gaussian).iter().fold(gaussian_worst, |w, z| w.max(z.abs()));
    }
    verdict(
        all,
        format!(
            "Q=30, mu_o=0, D=1e-9, 1e6 trials; {} (tol 3); diagnostic with Gaussian-drawn counts max |z| {gaussian_worst:.2}",
            parts.join(" ")
        ),
    )
}

fn figure_one_trends() -> Outcome {
    let mobility = json!([
        { "D_tx_m2s": 1e-11, "D_rx_m2s": 1e-11 },
        { "D_tx_m2s": 1e-10, "D_rx_m2s": 1e-10 },
        { "D_tx_m2s": 1e-9, "D_rx_m2s": 1e-9 }
    ]);
    let off = json!({ "enabled": false });
    let b = run_experiment(json!({ "experiment": "fig1b", "mc": off }));
    let c = run_experiment(json!({ "experiment": "fig1c", "mc": off, "sweep": { "mobility": mobility } }));
    let a = run_experiment(json!({ "experiment": "fig1a", "mc": off }));
    let checks = [
        ("Pe up in sigma2_o", &b.summary["non_decreasing_in_sigma2_o"]),
        ("Pe up in mobility", &b.summary["non_decreasing_in_mobility"]),
        ("C down in sigma2_o", &c.summary["non_increasing_in_sigma2_o"]),
        ("C down in k", &c.summary["non_increasing_in_k"]),
        ("ROC Q=30 over Q=20", &a.summary["more_molecules_dominate"]),
    ];
    let pass = checks.iter().all(|(_, v)| **v == true);
    let detail = checks.iter().map(|(n, v)| format!("{n}: {v}")).collect::<Vec<_>>().join(", ");
    verdict(pass, detail)
}

fn capacity_argmax() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [1e-11, 1e-10, 1e-9] {
        let out = run_experiment(json!({
            "experiment": "fig1c",
            "mc": { "enabled": false },
            "sweep": { "mobility": [{ "D_tx_m2s": d, "D_rx_m2s": d }] }
        }));
        let (lo, hi) = (out.summary["beta_star_min"].as_f64().unwrap(), out.summary["beta_star_max"].as_f64().unwrap());
        if d == 1e-11 {
            pass = (lo - 0.5).abs() <= 0.05 && (hi - 0.5).abs() <= 0.05;
            parts.push(format!("D=1e-11: beta* in [{lo}, {hi}] (tol 0.5 +- 0.05)"));
        } else {
            parts.push(format!("D={d:e} (info): beta* in [{lo}, {hi}]"));
        }
    }
    verdict(pass, parts.join(", "))
}

fn budget_anchors() -> Outcome {
    let b = run_experiment(json!({ "experiment": "fig2b", "sweep": { "sigma2_o": [1, 20] } }));
    let q1 = |i: usize| b.summary["argmins"][i]["allocation"][0].as_u64().unwrap();
    let not_equal = b.summary["argmins"].as_array().unwrap().iter().all(|a| a["equal_split_optimal"] == false);
    let a = run_experiment(json!({ "experiment": "fig2a", "sweep": { "sigma2_o": [1, 20] } }));
    let noise_trend = a.summary["first_slot_share_non_decreasing_in_sigma2_o"] == true;
    let mobility_trend = a.summary["first_slot_share_non_increasing_in_mobility"] == true;
    let (lo, hi) = (q1(0), q1(1));
    verdict(
        not_equal && lo.abs_diff(25) <= 1 && hi.abs_diff(28) <= 1 && noise_trend && mobility_trend,
        format!(
            "M=60, D=1e-10, mu_o=5: argmin Q1 {lo} at s2=1 (want 25+-1), {hi} at s2=20 (want 28+-1); \
             equal split not optimal {not_equal}; trend in s2 {noise_trend}, in D_tot {mobility_trend}"
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    for name in EXPERIMENTS {
        let mut csv = Vec::new();
        for threads in ["1", "8"] {
            let out = dir.path().join(threads);
            let status = Command::new(env!("CARGO_BIN_EXE_molekom"))
                .args(["run", "--experiment", name, "--out"])
                .arg(&out)
                .env("MOLEKOM_THREADS", threads)
                .output()
                .unwrap();
            assert!(status.status.success(), "{name}: {}", String::from_utf8_lossy(&status.stderr));
            csv.push(std::fs::read(out.join(format!("{name}.csv"))).unwrap());
        }
        if csv[0] != csv[1] {
            differing.push(name);
        }
    }
    verdict(
        differing.is_empty(),
        format!("{} experiments at 1 and 8 threads; differing: {differing:?}", EXPERIMENTS.len()),
    )
}

fn main() -> ExitCode {
    // behave like a libtest binary towards `--list` and name filters
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    if args.iter().any(|a| !a.starts_with('-') && !"acceptance".contains(a.as_str())) {
        return ExitCode::SUCCESS;
    }
    let criteria: [Criterion; 10] = [
        ("arrival probability anchors", anchor_values),
        ("quadrature vs trapezoid oracle", quadrature_oracle),
        ("trajectory cross-validation", trajectory_cross_check),
        ("moment validation", moment_validation),
        ("threshold optimality", threshold_optimality),
        ("analytic vs Monte Carlo detection", analytic_vs_mc),
        ("error and capacity trends", figure_one_trends),
        ("capacity-achieving prior", capacity_argmax),
        ("budget split anchors", budget_anchors),
        ("determinism across thread counts", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {:>2} {tag} {name} [{secs:.1}s]: {detail}", i + 1);
        if outcome.is_err() {
            failed.push(i + 1);
        }
    }
    println!("acceptance: {}/{} pass; failing {failed:?}", criteria.len() - failed.len(), criteria.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
