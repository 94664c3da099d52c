use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;
use snn_landing::analysis::{build_gap_report, summarize};
use snn_landing::codec::BucketTable;
use snn_landing::env::{run_landing, EnvConfig, LandingTrace};
use snn_landing::evo::{run_evolution_with_progress, write_log_csv, EvolutionConfig};
use snn_landing::rng::derive_seed;
use snn_landing::snn::InputSpikes;
use snn_landing::{BackendKind, ControllerGenome, LoihiBackend, ReferenceNet, SpikingBackend};

use crate::manifest::{sidecar, RunManifest};
use crate::{BackendChoice, BenchArgs, CompareArgs, EvolveArgs, LandArgs};

const LAND_TAG: u64 = 0x1A9D;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] snn_landing::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Manifest(#[from] std::io::Error),
}

type CliResult<T = ()> = Result<T, CliError>;

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io_at(path))?))
}

fn create_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(io_at(dir))
}

fn save_manifest(manifest: &RunManifest, path: &Path) -> CliResult {
    manifest.save(path).map_err(io_at(path))
}

fn path_arg(p: &Path) -> String {
    p.display().to_string()
}

pub fn evolve(args: &EvolveArgs) -> CliResult {
    let config = EvolutionConfig {
        p_mut: args.p_mut,
        generations: args.generations,
        master_seed: args.seed,
        ..EvolutionConfig::default()
    }
    .with_population(args.pop);
    config.validate()?;
    let log_path = args.log.clone().unwrap_or_else(|| sidecar(&args.out, "log.csv"));
    let manifest_path = sidecar(&args.out, "manifest.json");

    let quiet = args.quiet;
    let result = run_evolution_with_progress(&config, |row| {
        if !quiet && (row.generation % 10 == 0 || row.generation == config.generations) {
            println!(
                "gen {:>4}  best {:>10.3}  median {:>10.3}  held-out {:>10.3}",
                row.generation, row.best, row.median, row.held_out_best
            );
        }
    })?;

    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    result.best.save(&args.out)?;
    write_log_csv(&result.log, create(&log_path)?)?;

    let mut argv = vec![
        "evolve".to_string(),
        "--generations".into(),
        args.generations.to_string(),
        "--pop".into(),
        args.pop.to_string(),
        "--seed".into(),
        args.seed.to_string(),
        "--p-mut".into(),
        args.p_mut.to_string(),
        "--out".into(),
        path_arg(&args.out),
        "--log".into(),
        path_arg(&log_path),
    ];
    if quiet {
        argv.push("--quiet".into());
    }
    let mut manifest = RunManifest::new(
        "evolve",
        args.seed,
        argv,
        serde_json::to_value(&config).expect("config serializes"),
    );
    manifest.add_artifact(&args.out);
    manifest.add_artifact(&log_path);
    save_manifest(&manifest, &manifest_path)?;
    println!("best held-out fitness {:.3}", result.best_held_out);
    println!("wrote {}", args.out.display());
    Ok(())
}

fn land_env(args: &LandArgs) -> EnvConfig {
    let env = EnvConfig::default();
    if args.noiseless {
        env.noiseless()
    } else {
        env
    }
}

fn backends(choice: BackendChoice) -> &'static [BackendKind] {
    match choice {
        BackendChoice::Reference => &[BackendKind::Reference],
        BackendChoice::Loihi => &[BackendKind::Loihi],
        BackendChoice::Both => &BackendKind::ALL,
    }
}

pub fn land(args: &LandArgs) -> CliResult {
    let genome = ControllerGenome::load(&args.genome)?;
    let env = land_env(args);
    env.validate()?;
    let kinds = backends(args.backend);
    let jobs: Vec<(usize, BackendKind)> = (0..args.runs)
        .flat_map(|i| kinds.iter().map(move |&k| (i, k)))
        .collect();
    // Both backends of one run share the environment seed.
    let traces: Vec<LandingTrace> = jobs
        .par_iter()
        .map(|&(i, kind)| {
            let seed = derive_seed(args.seed, &[LAND_TAG, i as u64]);
            run_landing(&genome, kind, &env.clone().with_seed(seed), args.h0)
        })
        .collect::<Result<_, _>>()?;

    create_dir(&args.out_dir)?;
    let mut manifest = RunManifest::new(
        "land",
        args.seed,
        land_argv(args),
        json!({ "env": env, "h0": args.h0, "runs": args.runs, "backend": format!("{:?}", args.backend).to_lowercase() }),
    );
    let summary_path = args.out_dir.join("summary.csv");
    let mut summary = csv::Writer::from_writer(create(&summary_path)?);
    summary
        .write_record([
            "run",
            "backend",
            "steps",
            "landed",
            "duration",
            "touchdown_velocity",
            "fitness",
            "thrust_tau",
            "delay_steps",
            "noise_sigma",
            "prop_sigma",
        ])
        .map_err(snn_landing::Error::from)?;
    for (&(i, kind), trace) in jobs.iter().zip(&traces) {
        let path = args.out_dir.join(format!("run_{i:03}_{kind}.csv"));
        trace.write_csv(create(&path)?)?;
        manifest.add_artifact(&path);
        let p = &trace.params;
        summary
            .write_record([
                i.to_string(),
                kind.to_string(),
                trace.rows.len().to_string(),
                trace.landed().to_string(),
                trace.duration().to_string(),
                trace.touchdown_velocity().map(|v| v.to_string()).unwrap_or_default(),
                trace.fitness().to_string(),
                p.thrust_tau.to_string(),
                p.delay_steps.to_string(),
                p.noise_sigma.to_string(),
                p.prop_sigma.to_string(),
            ])
            .map_err(snn_landing::Error::from)?;
    }
    summary.flush().map_err(io_at(&summary_path))?;
    manifest.add_artifact(&summary_path);
    save_manifest(&manifest, &args.out_dir.join("manifest.json"))?;

    for &kind in kinds {
        let (landed, fitness): (Vec<bool>, Vec<f64>) = jobs
            .iter()
            .zip(&traces)
            .filter(|((_, k), _)| *k == kind)
            .map(|(_, t)| (t.landed(), t.fitness()))
            .unzip();
        let s = summarize(&fitness)?;
        println!(
            "{:<9}  landed {:>4}/{:<4}  fitness mean {:.3}  median {:.3}",
            kind.as_str(),
            landed.iter().filter(|&&l| l).count(),
            landed.len(),
            s.mean,
            s.median
        );
    }
    println!("wrote {} traces to {}", traces.len(), args.out_dir.display());
    Ok(())
}

fn land_argv(args: &LandArgs) -> Vec<String> {
    let mut argv = vec![
        "land".to_string(),
        "--genome".into(),
        path_arg(&args.genome),
        "--backend".into(),
        format!("{:?}", args.backend).to_lowercase(),
        "--h0".into(),
        args.h0.to_string(),
        "--runs".into(),
        args.runs.to_string(),
        "--seed".into(),
        args.seed.to_string(),
        "--out-dir".into(),
        path_arg(&args.out_dir),
    ];
    if args.noiseless {
        argv.push("--noiseless".into());
    }
    argv
}

pub fn compare(args: &CompareArgs) -> CliResult {
    let genome = ControllerGenome::load(&args.genome)?;
    let env = EnvConfig::default();
    let report = build_gap_report(&genome, &env, args.runs, args.seed, args.h0)?;

    create_dir(&args.out_dir)?;
    let csv_path = args.out_dir.join("gap_report.csv");
    let json_path = args.out_dir.join("gap_report.json");
    report.write_csv(create(&csv_path)?)?;
    let mut text = report.to_json()?;
    text.push('\n');
    fs::write(&json_path, text).map_err(io_at(&json_path))?;

    let argv = vec![
        "compare".to_string(),
        "--genome".into(),
        path_arg(&args.genome),
        "--runs".into(),
        args.runs.to_string(),
        "--h0".into(),
        args.h0.to_string(),
        "--seed".into(),
        args.seed.to_string(),
        "--out-dir".into(),
        path_arg(&args.out_dir),
    ];
    let mut manifest = RunManifest::new(
        "compare",
        args.seed,
        argv,
        json!({ "env": env, "h0": args.h0, "runs": args.runs }),
    );
    manifest.add_artifact(&csv_path);
    manifest.add_artifact(&json_path);
    save_manifest(&manifest, &args.out_dir.join("manifest.json"))?;

    println!("layer   infill ref (mean±sd)   infill loihi (mean±sd)   match mean   match min");
    for (name, layer) in [("hidden", &report.hidden), ("output", &report.output)] {
        println!(
            "{name:<6}  {:.4} ± {:.4}        {:.4} ± {:.4}          {:.5}      {:.5}",
            layer.infill_reference.mean,
            layer.infill_reference.sd,
            layer.infill_loihi.mean,
            layer.infill_loihi.sd,
            layer.matching.mean,
            layer.matching.min,
        );
    }
    println!(
        "thrust rmse mean {:.5}  max {:.5}",
        report.thrust_rmse.mean, report.thrust_rmse.max
    );
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

const BENCH_CHUNK: usize = 10_000;

/// Deterministic one-hot input sweeping the whole error range.
fn bench_inputs(n: usize) -> CliResult<Vec<InputSpikes>> {
    let table = BucketTable::<f64>::new();
    (0..n)
        .map(|k| {
            let err = 12.0 * (k as f64 * 0.013).sin();
            Ok(table.encode(err)?)
        })
        .collect()
}

fn time_backend<B: SpikingBackend>(backend: &mut B, inputs: &[InputSpikes], steps: usize) -> CliResult<Vec<f64>> {
    let mut per_step_us = Vec::new();
    let mut done = 0;
    while done < steps {
        let n = BENCH_CHUNK.min(steps - done);
        let start = Instant::now();
        for k in done..done + n {
            std::hint::black_box(backend.step(&inputs[k % inputs.len()])?);
        }
        per_step_us.push(start.elapsed().as_secs_f64() * 1e6 / n as f64);
        done += n;
    }
    Ok(per_step_us)
}

pub fn bench(args: &BenchArgs) -> CliResult {
    let genome = ControllerGenome::load(&args.genome)?;
    let inputs = bench_inputs(4096)?;
    let reference = time_backend(&mut ReferenceNet::new(&genome)?, &inputs, args.steps)?;
    let loihi = time_backend(&mut LoihiBackend::new(&genome)?, &inputs, args.steps)?;
    for (kind, samples) in [(BackendKind::Reference, reference), (BackendKind::Loihi, loihi)] {
        let s = summarize(&samples)?;
        println!(
            "{:<9}  {:.4} µs/step  sd {:.4}  steps {}  chunks {}",
            kind.as_str(),
            s.mean,
            s.sd,
            args.steps,
            samples.len()
        );
    }
    Ok(())
}
