//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run everything with `cargo test --release --test acceptance`, or a subset
//! with `cargo test --release --test acceptance -- 3 5`.

mod common;

use std::cell::OnceCell;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use agejam::aoi::{steady_state_prob, AoiProcess};
use agejam::experiment::{run_train_detector, TrainDetectorOutput, TrainDetectorSpec};
use agejam::link::{success_prob_given_set, success_prob_mc_oracle, ActiveSet, LinkBudget};
use agejam::nn::{build_cnn, build_fnn, extract_error_profile, Architecture, DetectionSnrs};
use agejam::occupancy::TrafficParams;
use agejam::scenario::{ScenarioConfig, Sensing, SignalDetectors};
use agejam::sim::{empirical_jammer_budget_check, run_slotted};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;

#[derive(Default)]
struct Shared {
    detectors: OnceCell<(TrainDetectorOutput, f64)>,
}

impl Shared {
    /// Detectors trained with the default budget, and the wall time it took.
    fn detectors(&self) -> &(TrainDetectorOutput, f64) {
        self.detectors.get_or_init(|| {
            let t = Instant::now();
            let out = run_train_detector(&TrainDetectorSpec::default()).expect("training failed");
            (out, t.elapsed().as_secs_f64())
        })
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn default_at(q1: f64, q: f64, n_slots: u64, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        traffic: TrafficParams { q1, q },
        n_slots,
        seed,
        ..Default::default()
    }
}

fn fnn_parameter_counts(_: &Shared) -> Outcome {
    let counts: Vec<usize> = [16, 64, 128].iter().map(|&n| build_fnn(n, 0).unwrap().param_count()).collect();
    ensure(counts == [3_230, 9_374, 17_566], || format!("counts {counts:?}"))?;
    Ok(format!("{counts:?}"))
}

fn cnn_parameter_slope(_: &Shared) -> Outcome {
    let c: Vec<usize> = [16, 64, 128].iter().map(|&n| build_cnn(n, 0).unwrap().param_count()).collect();
    let (d1, d2) = (c[2] - c[1], c[1] - c[0]);
    ensure(d1 == 131_072 && d2 == 98_304, || format!("differences {d1}, {d2}"))?;
    Ok(format!("128-64: {d1}, 64-16: {d2} (totals {c:?})"))
}

fn sinr_closed_form_vs_oracle(_: &Shared) -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut checked = 0;
    let mut by_interferers = [0usize; 3];
    let mut worst: f64 = 0.0;
    for b in 0..12 {
        let mut links = LinkBudget::uniform([1.0; 3], 1.0, 1.0, 0.0, 1.0);
        for i in 0..3 {
            links.tx_power[i] = rng.random_range(0.1..4.0);
            for k in 0..3 {
                links.path_gain[i][k] = rng.random_range(0.02..1.0);
                links.mean_fading[i][k] = rng.random_range(0.5..2.0);
            }
        }
        links.noise_power = rng.random_range(0.0..0.1);
        links.sinr_threshold = rng.random_range(0.25..4.0);
        // Cycle through 0, 1 and 2 interferers at the receiver of node 1 or 2.
        let node = 1 + b % 2;
        let set = match b % 3 {
            0 => ActiveSet::from_nodes(&[node]),
            1 => ActiveSet::from_nodes(&[node, 3]),
            _ => ActiveSet::from_nodes(&[1, 2, 3]),
        }
        .unwrap();
        let exact = success_prob_given_set(node, set, &links).unwrap();
        let mc = success_prob_mc_oracle(node, set, &links, 1_000_000, 1000 + b as u64).unwrap();
        let tol = (3.0 * mc.stderr).max(5e-3);
        let err = (exact - mc.p).abs();
        ensure(err <= tol, || {
            format!("budget {b}, node {node}, set {set}: closed form {exact:.5}, oracle {:.5}", mc.p)
        })?;
        worst = worst.max(err / tol);
        checked += 1;
        by_interferers[set.len() - 1] += 1;
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "{checked} budgets ({}/{}/{} with 0/1/2 interferers), worst error {:.2} of tolerance, {secs:.1}s",
        by_interferers[0], by_interferers[1], by_interferers[2], worst
    ))
}

fn event_distribution_fidelity(_: &Shared) -> Outcome {
    let cfg = default_at(0.5, 0.5, 1_000_000, 41);
    let a = cfg.analyze().unwrap();
    let r = run_slotted(&cfg).unwrap();
    let n = r.n_slots as f64;
    let mut worst: f64 = 0.0;
    let mut check = |what: String, emp: f64, p: f64| -> Result<(), String> {
        let sd = (p * (1.0 - p) / n).sqrt();
        let z = if sd > 0.0 { (emp - p).abs() / sd } else if emp == p { 0.0 } else { f64::INFINITY };
        worst = worst.max(z);
        ensure(z <= 3.0, || format!("{what}: empirical {emp:.6}, formula {p:.6} ({z:.2} sd)"))
    };
    for set in ActiveSet::all() {
        check(format!("set {set}"), r.set_frequency(set), a.distribution.mass(set))?;
    }
    check("q2".into(), r.q2, a.q2)?;
    check("q3".into(), r.q3, a.q3)?;
    Ok(format!("8 sets + q2 + q3 at 1e6 slots, worst deviation {worst:.2} sd"))
}

fn decorrelation_stride(s: f64) -> usize {
    ((1e-6f64).ln() / (1.0 - s).ln()).ceil().max(1.0) as usize
}

fn aoi_closed_form(_: &Shared) -> Outcome {
    let grid = [(0.2, 0.5), (0.5, 0.5), (0.2, 0.9), (0.5, 0.9), (0.3, 0.7)];
    let mut worst: f64 = 0.0;
    for (k, &(q1, q)) in grid.iter().enumerate() {
        let cfg = default_at(q1, q, 1_000_000, 50 + k as u64);
        let a = cfg.analyze().unwrap();
        let r = run_slotted(&cfg).unwrap();
        let rel = (r.mean_aoi(2) - a.aoi2).abs() / a.aoi2;
        worst = worst.max(rel);
        ensure(rel <= 0.01, || {
            format!("(q1={q1}, q={q}): simulated {:.4}, 1/S2 = {:.4}", r.mean_aoi(2), a.aoi2)
        })?;
    }
    let mut pvals = Vec::new();
    for (k, s) in [0.1, 0.3, 0.5, 0.9].into_iter().enumerate() {
        let stride = decorrelation_stride(s);
        let mut p = AoiProcess::new(s, 60 + k as u64).unwrap();
        let mut counts: Vec<u64> = Vec::new();
        for i in 0..=20_000 {
            let mut age = 0;
            for _ in 0..stride {
                age = p.advance();
            }
            if i == 0 {
                continue;
            }
            if counts.len() < age as usize {
                counts.resize(age as usize, 0);
            }
            counts[age as usize - 1] += 1;
        }
        let mut probs: Vec<f64> = (1..=counts.len() as u64).map(|k| steady_state_prob(s, k).unwrap()).collect();
        let covered: f64 = probs.iter().sum();
        *probs.last_mut().unwrap() += 1.0 - covered;
        let (stat, dof) = common::chi_square(&counts, &probs, 5.0);
        let pv = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat);
        ensure(pv > 0.01, || format!("S={s}: chi-square {stat:.1} on {dof} dof, p={pv:.4}"))?;
        pvals.push(format!("{pv:.3}"));
    }
    Ok(format!(
        "node-2 AoI worst relative error {:.3}% over 5 grid points; chi-square p-values {}",
        100.0 * worst,
        pvals.join("/")
    ))
}

fn jammer_budget(_: &Shared) -> Outcome {
    let grid = [(0.5, 0.5), (0.1, 0.2), (0.9, 0.9), (0.3, 1.0), (0.0, 0.0)];
    let mut worst: f64 = 0.0;
    for (k, &(q1, q)) in grid.iter().enumerate() {
        let cfg = default_at(q1, q, 1_000_000, 70 + k as u64);
        let a = cfg.analyze().unwrap();
        let r = run_slotted(&cfg).unwrap();
        let pbar = cfg.jammer.pbar_max;
        let check = empirical_jammer_budget_check(&r, pbar);
        ensure(check.within_budget, || format!("(q1={q1}, q={q}): measured {} exceeds budget", check.measured))?;
        if a.q3 > 0.0 {
            let rel = (check.measured - pbar).abs() / pbar;
            worst = worst.max(rel);
            ensure(rel <= 0.01, || format!("(q1={q1}, q={q}): measured {:.5} vs {pbar}", check.measured))?;
        }
    }
    let mut cfg = default_at(0.5, 0.5, 100_000, 79);
    cfg.jammer.pbar_max = 0.0;
    let r = run_slotted(&cfg).unwrap();
    ensure(r.average_jamming_power == 0.0, || "zero budget still spent power".into())?;
    Ok(format!("worst relative deviation from the budget {:.3}% over 5 scenarios", 100.0 * worst))
}

fn trend_reproduction(_: &Shared) -> Outcome {
    let t = Instant::now();
    let axis: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let analyze = |q1: f64, q: f64| default_at(q1, q, 1, 0).analyze().unwrap();
    let mesh: Vec<Vec<_>> = axis.iter().map(|&q1| axis.iter().map(|&q| analyze(q1, q)).collect()).collect();
    let idx = |v: f64| axis.iter().position(|a| (*a - v).abs() < 1e-12).unwrap();
    for fixed in [0.2, 0.5, 0.9] {
        let j = idx(fixed);
        for i in 0..20 {
            let (a, b) = (mesh[i][j].aoi2, mesh[i + 1][j].aoi2);
            ensure(b >= a, || format!("AoI falls in q1 at q={fixed}: {a} -> {b} at q1={}", axis[i + 1]))?;
            let (a, b) = (mesh[j][i].aoi2, mesh[j][i + 1].aoi2);
            ensure(b <= a, || format!("AoI rises in q at q1={fixed}: {a} -> {b} at q={}", axis[i + 1]))?;
        }
    }
    for i in 0..21 {
        for j in 0..20 {
            let (a, b) = (mesh[i][j].jammer.p3_selected, mesh[i][j + 1].jammer.p3_selected);
            ensure(b <= a, || format!("P3 rises in q at q1={}: {a} -> {b}", axis[i]))?;
            let (a, b) = (mesh[j][i].jammer.p3_selected, mesh[j + 1][i].jammer.p3_selected);
            ensure(b <= a, || format!("P3 rises in q1 at q={}: {a} -> {b}", axis[i]))?;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 1.0, || format!("took {secs:.2}s"))?;
    Ok(format!("AoI and P3 monotone on the 21x21 mesh ({:.0} ms)", secs * 1e3))
}

fn detector_trends(shared: &Shared) -> Outcome {
    let (out, train_secs) = shared.detectors();
    let acc = |m, n, snr| out.mean_accuracy(m, n, snr).unwrap();
    let (cnn, fnn) = (acc(Architecture::Cnn, 64, 0.0), acc(Architecture::Fnn, 64, 0.0));
    ensure(cnn >= fnn - 0.01, || format!("(a) N=64, 0 dB: CNN {cnn:.4} < FNN {fnn:.4} - 0.01"))?;

    let spec = TrainDetectorSpec::default();
    let mut min_rho: f64 = 1.0;
    for d in &out.detectors {
        let m = &d.model;
        let curve: Vec<f64> = spec
            .snr_grid
            .iter()
            .map(|&s| {
                out.rows
                    .iter()
                    .find(|r| r.model == m.architecture && r.n == m.packet_len && r.seed == d.seed && r.snr_db == s)
                    .unwrap()
                    .accuracy
            })
            .collect();
        let rho = common::spearman(&spec.snr_grid, &curve);
        min_rho = min_rho.min(rho);
        ensure(rho >= 0.8, || {
            format!("(b) {} N={} seed {}: Spearman {rho:.2}, curve {curve:?}", m.architecture.name(), m.packet_len, d.seed)
        })?;
    }

    let mut sizes = Vec::new();
    for arch in [Architecture::Fnn, Architecture::Cnn] {
        let (small, large) = (acc(arch, 16, 0.0), acc(arch, 128, 0.0));
        ensure(large >= small, || {
            format!("(c) {}: accuracy at N=128 {large:.4} < N=16 {small:.4}", arch.name())
        })?;
        sizes.push(format!("{} {small:.3}->{large:.3}", arch.name()));
    }

    let g_fnn = common::gradient_check(&build_fnn(16, 1).unwrap(), 6, None, 1e-4);
    let g_cnn = common::gradient_check(&build_cnn(8, 2).unwrap(), 4, Some(7), 1e-4);
    for (name, g) in [("FNN", g_fnn), ("CNN", g_cnn)] {
        ensure(g.failures == 0, || format!("(d) {name} gradient check: {g:?}"))?;
    }
    ensure(*train_secs <= 900.0, || format!("training took {train_secs:.0}s"))?;
    Ok(format!(
        "(a) CNN {cnn:.3} vs FNN {fnn:.3}; (b) min Spearman {min_rho:.2} over {} models; (c) {}; \
         (d) max rel. error {:.1e}/{:.1e} over {}+{} params; training {train_secs:.0}s",
        out.detectors.len(),
        sizes.join(", "),
        g_fnn.max_rel,
        g_cnn.max_rel,
        g_fnn.checked,
        g_cnn.checked
    ))
}

fn mode_equivalence(shared: &Shared) -> Outcome {
    let (out, _) = shared.detectors();
    let t = Instant::now();
    let cnn = Arc::new(out.detector(Architecture::Cnn, 64, 0).unwrap().clone());
    let fnn = Arc::new(out.detector(Architecture::Fnn, 64, 0).unwrap().clone());
    let snrs = DetectionSnrs::default();
    let standalone = extract_error_profile(&cnn, &fnn, &snrs, 20_000, 91).unwrap();

    // Signal mode, 1e5 slots: see the note in the README on Monte Carlo error.
    let mut signal = default_at(0.5, 0.5, 100_000, 92);
    signal.profile = standalone;
    signal.sensing = Sensing::Signal(SignalDetectors { cnn, fnn, snrs });
    let rs = run_slotted(&signal).unwrap();
    let measured = rs.sensing.profile();
    for (name, m, s) in [("pm", measured.pm, standalone.pm), ("pf", measured.pf, standalone.pf)] {
        ensure((m - s).abs() <= 0.02, || format!("{name}: signal mode {m:.4}, standalone {s:.4}"))?;
    }

    let mut prob = default_at(0.5, 0.5, 1_000_000, 93);
    prob.profile = standalone;
    let rp = run_slotted(&prob).unwrap();
    let (a_sig, a_prob) = (rs.mean_aoi(2), rp.mean_aoi(2));
    let rel = (a_sig - a_prob).abs() / a_prob;
    ensure(rel <= 0.05, || format!("node-2 AoI: signal {a_sig:.3}, probabilistic {a_prob:.3}"))?;
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("took {secs:.0}s"))?;
    Ok(format!(
        "pm {:.4}/{:.4}, pf {:.4}/{:.4} (signal/standalone); AoI {a_sig:.3} vs {a_prob:.3} ({:.2}%); {secs:.0}s",
        measured.pm,
        standalone.pm,
        measured.pf,
        standalone.pf,
        100.0 * rel
    ))
}

fn run_cli(args: &[&str], dir: &Path) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_agejam"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(o.status.success(), || {
        format!("`agejam {}` failed: {}", args.join(" "), String::from_utf8_lossy(&o.stderr))
    })
}

fn determinism(_: &Shared) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    fs::write(
        d.join("sweep.conf"),
        "sweep.param=q1\nsweep.grid=0:1:0.1\nsweep.series=q\nsweep.series_grid=0.2,0.5,0.9\nsim.n_slots=20000\n",
    )
    .unwrap();
    fs::write(d.join("sim.conf"), "sim.n_slots=50000\ntraffic.q1=0.3\n").unwrap();
    fs::write(
        d.join("train.conf"),
        "train.sizes=8,16\ntrain.snr_grid=-5,5\ntrain.seeds=2\ntrain.n_per_class=60\ntrain.cnn_n_per_class=30\n\
         train.test_per_class=40\ntrain.epochs=2\ntrain.cnn_epochs=1\ntrain.profile_packets=100\n",
    )
    .unwrap();
    fs::write(
        d.join("signal.conf"),
        "sim.sensing=signal\nsim.n_slots=2000\ndetector.cnn_weights=t1/cnn_n16_seed0.weights\n\
         detector.fnn_weights=t1/fnn_n16_seed0.weights\ndetector.eval_packets=200\n",
    )
    .unwrap();
    let runs: [(&str, Vec<&str>, &str); 6] = [
        ("sweep analytic", vec!["sweep", "--config", "sweep.conf", "--seed", "5", "--out"], "a{}.csv"),
        ("sweep both", vec!["sweep", "--config", "sweep.conf", "--seed", "5", "--mode", "both", "--out"], "b{}.csv"),
        ("simulate", vec!["simulate", "--config", "sim.conf", "--seed", "5", "--out"], "s{}.csv"),
        ("train-detector", vec!["train-detector", "--config", "train.conf", "--seed", "5", "--out"], "t{}"),
        ("simulate (signal)", vec!["simulate", "--config", "signal.conf", "--seed", "5", "--out"], "g{}.csv"),
        ("report", vec!["report", "b1.csv", "--out"], "r{}.svg"),
    ];
    let mut names = Vec::new();
    for (name, args, pattern) in runs {
        let outs: Vec<String> = (1..=2).map(|i| pattern.replace("{}", &i.to_string())).collect();
        for o in &outs {
            let mut a = args.clone();
            a.push(o);
            run_cli(&a, d)?;
        }
        let files: Vec<(String, String)> = if pattern.ends_with("{}") {
            ["accuracy.csv", "profiles.conf", "cnn_n16_seed1.weights"]
                .iter()
                .map(|f| (format!("{}/{f}", outs[0]), format!("{}/{f}", outs[1])))
                .collect()
        } else {
            vec![(outs[0].clone(), outs[1].clone())]
        };
        for (x, y) in files {
            let (bx, by) = (fs::read(d.join(&x)).unwrap(), fs::read(d.join(&y)).unwrap());
            ensure(!bx.is_empty() && bx == by, || format!("{name}: {x} and {y} differ"))?;
        }
        names.push(name);
    }
    Ok(format!("byte-identical outputs for {}", names.join(", ")))
}

fn main() {
    let criteria: [(u32, &str, fn(&Shared) -> Outcome); 10] = [
        (1, "FNN parameter counts", fnn_parameter_counts),
        (2, "CNN parameter slope", cnn_parameter_slope),
        (3, "SINR closed form vs Monte Carlo oracle", sinr_closed_form_vs_oracle),
        (4, "event-distribution fidelity", event_distribution_fidelity),
        (5, "AoI closed form and age distribution", aoi_closed_form),
        (6, "jammer average-power budget", jammer_budget),
        (7, "AoI and jamming-power trends", trend_reproduction),
        (8, "detector trends and gradient check", detector_trends),
        (9, "signal/probabilistic mode equivalence", mode_equivalence),
        (10, "CLI determinism", determinism),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let shared = Shared::default();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, check) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| check(&shared))).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name} [{secs:.1}s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name} [{secs:.1}s]: {detail}");
            }
        }
    }
    println!("{} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
