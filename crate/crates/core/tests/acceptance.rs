//! End-to-end acceptance gate. Each test prints one `PASS`/`FAIL` line.
//!
//! Run with `cargo test -p snn-landing --test acceptance -- --nocapture --test-threads 1`
//! to see the lines in order.

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snn_landing::analysis::{
    build_gap_report, infill, ks_statistic, match_score, thrust_rmse, GapReport,
};
use snn_landing::codec::BucketTable;
use snn_landing::env::{estimate_divergence_pairs, run_landing, CornerPairSet, EnvConfig};
use snn_landing::evo::{run_evolution, write_log_csv, EvolutionConfig, EvolutionResult};
use snn_landing::snn::{run_backend, InputSpikes, N_HIDDEN, N_INPUT, N_OUTPUT};
use snn_landing::{BackendKind, ControllerGenome, LoihiBackend, ReferenceNet, SpikeTrain, SpikingBackend};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn fixture_genome() -> ControllerGenome {
    ControllerGenome::load(fixture("evolved_genome.json")).expect("fixture genome loads")
}

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    println!("criterion {id} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn random_train(rng: &mut ChaCha8Rng, steps: usize, density: f64) -> SpikeTrain {
    let mut train = SpikeTrain::with_capacity(N_INPUT, 0.02, steps);
    for _ in 0..steps {
        let row: Vec<bool> = (0..N_INPUT).map(|_| rng.random_bool(density)).collect();
        train.push(&row).unwrap();
    }
    train
}

#[test]
fn c1_backend_equivalence_at_extreme_decays() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatched = 0;
    for _ in 0..1000 {
        let mut g = ControllerGenome::random(&mut rng);
        for d in g.delta_v_hidden.iter_mut().chain(g.delta_v_out.iter_mut()) {
            *d = if rng.random_bool(0.5) { 0 } else { 4096 };
        }
        let density = rng.random_range(0.02..0.5);
        let input = random_train(&mut rng, 200, density);
        let (rh, ro) = run_backend(&mut ReferenceNet::new(&g).unwrap(), &input).unwrap();
        let (lh, lo) = run_backend(&mut LoihiBackend::new(&g).unwrap(), &input).unwrap();
        if match_score(&rh, &lh).unwrap() != 1.0 || match_score(&ro, &lo).unwrap() != 1.0 {
            mismatched += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        "backend equivalence",
        mismatched == 0 && elapsed < Duration::from_secs(60),
        format!("{mismatched}/1000 genomes differ, {:.2} s", elapsed.as_secs_f64()),
    );
}

fn gap_batch() -> &'static (GapReport, Duration) {
    static BATCH: OnceLock<(GapReport, Duration)> = OnceLock::new();
    BATCH.get_or_init(|| {
        let start = Instant::now();
        let report = build_gap_report(&fixture_genome(), &EnvConfig::default(), 100, 0, 4.0).unwrap();
        (report, start.elapsed())
    })
}

#[test]
fn c2_reality_gap_on_evolved_genome() {
    let (report, elapsed) = gap_batch();
    let hidden = report.hidden.matching.mean;
    let output = report.output.matching.mean;
    let rmse = report.thrust_rmse.mean;
    verdict(
        2,
        "reality gap",
        hidden >= 0.997 && output >= 0.997 && rmse <= 0.01 && *elapsed < Duration::from_secs(300),
        format!(
            "match hidden {hidden:.5}, output {output:.5}, thrust rmse {rmse:.5} g, {:.2} s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c3_infill_plausibility() {
    let (report, _) = gap_batch();
    let hidden = report.hidden.infill_reference.mean;
    let output = report.output.infill_reference.mean;
    let in_unit = report.episodes.iter().all(|e| {
        [e.hidden_infill_reference, e.hidden_infill_loihi, e.output_infill_reference, e.output_infill_loihi]
            .iter()
            .all(|v| (0.0..=1.0).contains(v))
    });
    verdict(
        3,
        "infill plausibility",
        (0.02..=0.12).contains(&hidden) && (0.05..=0.20).contains(&output) && in_unit,
        format!("hidden {hidden:.4} (band 0.02..0.12), output {output:.4} (band 0.05..0.20)"),
    );
}

fn evolve_timed(config: &EvolutionConfig) -> (EvolutionResult, Duration) {
    let start = Instant::now();
    let result = run_evolution(config).unwrap();
    (result, start.elapsed())
}

fn full_evolution() -> &'static (EvolutionResult, Duration) {
    static RUN: OnceLock<(EvolutionResult, Duration)> = OnceLock::new();
    RUN.get_or_init(|| evolve_timed(&EvolutionConfig::default()))
}

/// Noiseless replay from one start height; lag and delay still come from the seed.
fn noiseless_touchdown(genome: &ControllerGenome, h0: f64) -> Option<f64> {
    let env = EnvConfig::default().noiseless();
    let trace = run_landing(genome, BackendKind::Reference, &env, h0).unwrap();
    if trace.landed() {
        trace.touchdown_velocity()
    } else {
        None
    }
}

#[test]
fn c4_evolution_efficacy() {
    let (result, elapsed) = full_evolution();
    let gen0 = result.log[0].best;
    let ratio = result.best_held_out / gen0;
    let touchdowns: Vec<Option<f64>> = [2.0, 3.0, 4.0, 5.0]
        .iter()
        .map(|&h0| noiseless_touchdown(&result.best, h0))
        .collect();
    let soft = touchdowns.iter().all(|v| v.is_some_and(|v| v.abs() < 0.5));
    let shown: Vec<String> = touchdowns
        .iter()
        .map(|v| v.map_or("timeout".into(), |v| format!("{v:.3}")))
        .collect();
    verdict(
        4,
        "evolution efficacy (200 gen, pop 100)",
        ratio < 0.10 && soft && *elapsed < Duration::from_secs(1800),
        format!(
            "held-out {:.3} / gen-0 best {gen0:.3} = {:.1}% (need < 10%), touchdown v at h0 2..5: [{}], {:.1} s",
            result.best_held_out,
            ratio * 100.0,
            shown.join(", "),
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c4_evolution_smoke() {
    let config = EvolutionConfig {
        generations: 20,
        ..EvolutionConfig::default()
    }
    .with_population(20);
    let (result, elapsed) = evolve_timed(&config);
    let gen0 = result.log[0].best;
    let reduction = 1.0 - result.best_held_out / gen0;
    verdict(
        4,
        "evolution smoke (20 gen, pop 20)",
        reduction >= 0.5 && elapsed < Duration::from_secs(60),
        format!(
            "held-out {:.3} vs gen-0 best {gen0:.3}: {:.1}% reduction (need >= 50%), {:.2} s",
            result.best_held_out,
            reduction * 100.0,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn evolved_fixture_is_reproduced() {
    let (result, _) = full_evolution();
    assert_eq!(result.best, fixture_genome());
    let mut log = Vec::new();
    write_log_csv(&result.log, &mut log).unwrap();
    let recorded = std::fs::read_to_string(fixture("evolved_genome.log.csv")).unwrap();
    assert_eq!(String::from_utf8(log).unwrap(), recorded);
}

#[test]
fn c5_estimator_consistency() {
    let scales = [1.0, 2.5, 7.0, 40.0];
    let mut worst_closed: f64 = 0.0;
    for &d in &[0.25, 0.5, 1.0, 2.0] {
        for &dt in &[0.1, 0.02, 0.005] {
            let heights: Vec<f64> = (0..50).map(|k| 10.0 * (-d * dt * k as f64).exp()).collect();
            let pairs = CornerPairSet::from_heights(&scales, &heights).unwrap();
            let closed = ((d * dt).exp() - 1.0) / dt;
            for k in 1..heights.len() {
                let est = estimate_divergence_pairs(&pairs, k, dt).unwrap();
                worst_closed = worst_closed.max((est - closed).abs());
            }
        }
    }
    let mut worst_rel: f64 = 0.0;
    for &d in &[0.25, 0.5, 1.0, 2.0] {
        for &dt in &[0.002, 0.001, 0.0005] {
            let heights: Vec<f64> = (0..20).map(|k| 3.0 * (-d * dt * k as f64).exp()).collect();
            let pairs = CornerPairSet::from_heights(&scales, &heights).unwrap();
            let est = estimate_divergence_pairs(&pairs, 10, dt).unwrap();
            worst_rel = worst_rel.max((est / d - 1.0).abs());
        }
    }
    verdict(
        5,
        "estimator consistency",
        worst_closed <= 1e-9 && worst_rel < 0.01,
        format!("max |est - closed form| {worst_closed:.2e}, max rel err at dt <= 0.002: {worst_rel:.4}"),
    );
}

fn brute_ks(x: &[f64], y: &[f64]) -> f64 {
    let cdf = |s: &[f64], t: f64| s.iter().filter(|&&v| v <= t).count() as f64 / s.len() as f64;
    x.iter()
        .chain(y)
        .map(|&t| (cdf(x, t) - cdf(y, t)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn c6_metric_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = Vec::new();
    let mut worst_ks: f64 = 0.0;
    for case in 0..1000 {
        let width = rng.random_range(1..12);
        let steps = rng.random_range(1..30);
        let a: Vec<Vec<bool>> = (0..steps)
            .map(|_| (0..width).map(|_| rng.random_bool(0.3)).collect())
            .collect();
        let b: Vec<Vec<bool>> = a
            .iter()
            .map(|row| row.iter().map(|&s| if rng.random_bool(0.1) { !s } else { s }).collect())
            .collect();
        let (ta, tb) = (
            SpikeTrain::from_rows(width, 0.02, &a).unwrap(),
            SpikeTrain::from_rows(width, 0.02, &b).unwrap(),
        );
        let slots = (width * steps) as f64;
        let mut ones = 0usize;
        let mut same = 0usize;
        for t in 0..steps {
            for n in 0..width {
                ones += a[t][n] as usize;
                same += (a[t][n] == b[t][n]) as usize;
            }
        }
        if infill(&ta).unwrap() != ones as f64 / slots {
            failures.push(format!("infill case {case}"));
        }
        if match_score(&ta, &tb).unwrap() != 1.0 - (width * steps - same) as f64 / slots {
            failures.push(format!("match case {case}"));
        }

        let x: Vec<f64> = (0..steps).map(|_| rng.random_range(-0.4..0.4)).collect();
        let y: Vec<f64> = (0..steps).map(|_| rng.random_range(-0.4..0.4)).collect();
        let mut sq = 0.0;
        for i in 0..steps {
            sq += (x[i] - y[i]) * (x[i] - y[i]);
        }
        if thrust_rmse(&x, &y).unwrap() != (sq / steps as f64).sqrt() {
            failures.push(format!("rmse case {case}"));
        }

        // Coarse grid so ties are common.
        let m = rng.random_range(1..25);
        let kx: Vec<f64> = (0..steps).map(|_| rng.random_range(0..8) as f64 / 4.0).collect();
        let ky: Vec<f64> = (0..m).map(|_| rng.random_range(0..8) as f64 / 4.0).collect();
        worst_ks = worst_ks.max((ks_statistic(&kx, &ky).unwrap() - brute_ks(&kx, &ky)).abs());
    }
    verdict(
        6,
        "metric oracles",
        failures.is_empty() && worst_ks <= 1e-12,
        format!("{} exact mismatches {:?}, max KS deviation {worst_ks:.1e}", failures.len(), failures.first()),
    );
}

fn landing_artifacts(genome: &ControllerGenome) -> Vec<String> {
    use rayon::prelude::*;
    (0..16u64)
        .into_par_iter()
        .map(|i| {
            let env = EnvConfig::default().with_seed(i);
            let kind = BackendKind::ALL[i as usize % 2];
            run_landing(genome, kind, &env, 2.0 + (i % 4) as f64).unwrap().to_csv_string()
        })
        .collect()
}

#[test]
fn c7_determinism_across_thread_counts() {
    let genome = fixture_genome();
    let small = EvolutionConfig {
        generations: 4,
        master_seed: 77,
        ..EvolutionConfig::default()
    }
    .with_population(16);
    let artifacts = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let evo = run_evolution(&small).unwrap();
            let mut log = Vec::new();
            write_log_csv(&evo.log, &mut log).unwrap();
            let mut gap = Vec::new();
            let report = build_gap_report(&genome, &EnvConfig::default(), 12, 9, 4.0).unwrap();
            report.write_csv(&mut gap).unwrap();
            (evo.best.to_json(), log, gap, report.to_json().unwrap(), landing_artifacts(&genome))
        })
    };
    let reference = artifacts(1);
    let differing: Vec<usize> = [2, 3, 8].into_iter().filter(|&t| artifacts(t) != reference).collect();
    verdict(
        7,
        "determinism",
        differing.is_empty(),
        format!("artifacts at 1 thread vs 2, 3, 8 threads; differing thread counts: {differing:?}"),
    );
}

#[test]
fn c8_loihi_step_latency() {
    let genome = fixture_genome();
    let table = BucketTable::<f64>::new();
    let inputs: Vec<InputSpikes> = (0..4096)
        .map(|k| table.encode(12.0 * (k as f64 * 0.013).sin()).unwrap())
        .collect();
    let mut net = LoihiBackend::new(&genome).unwrap();
    let steps = 1_000_000;
    let start = Instant::now();
    let mut fired = 0usize;
    for k in 0..steps {
        let out = net.step(&inputs[k % inputs.len()]).unwrap();
        fired += std::hint::black_box(out.hidden.iter().filter(|&&s| s).count() + out.output.iter().filter(|&&s| s).count());
    }
    let mean_us = start.elapsed().as_secs_f64() * 1e6 / steps as f64;
    assert!(fired <= steps * (N_HIDDEN + N_OUTPUT));
    verdict(
        8,
        "loihi step latency",
        mean_us <= 10.0,
        format!("{mean_us:.3} µs/step mean over {steps} steps"),
    );
}
