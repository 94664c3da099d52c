use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{infill, ks_normality, ks_two_sample, match_score, summarize, thrust_rmse, KsResult, Summary};
use crate::codec::TraceDecoder;
use crate::env::{run_landing, EnvConfig, EpisodeParams};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::snn::{run_backend, BackendKind, ControllerGenome, LoihiBackend};

const GAP_TAG: u64 = 0x6A9;

/// Metrics of one replayed episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeGap {
    pub episode: usize,
    pub steps: usize,
    pub params: EpisodeParams,
    pub hidden_infill_reference: f64,
    pub hidden_infill_loihi: f64,
    pub hidden_match: f64,
    pub output_infill_reference: f64,
    pub output_infill_loihi: f64,
    pub output_match: f64,
    pub thrust_rmse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerGap {
    pub infill_reference: Summary<f64>,
    pub infill_loihi: Summary<f64>,
    pub matching: Summary<f64>,
    /// Two-sample test between the per-episode infill of both backends.
    pub infill_ks: KsResult,
    pub infill_reference_normality: KsResult,
    pub infill_loihi_normality: KsResult,
}

/// Reality-gap statistics over a batch of replayed landings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub n_episodes: usize,
    pub h0: f64,
    pub seed: u64,
    pub hidden: LayerGap,
    pub output: LayerGap,
    pub thrust_rmse: Summary<f64>,
    pub episodes: Vec<EpisodeGap>,
}

/// Fly one closed-loop landing on the reference backend, then replay its
/// recorded input spikes through a fresh fixed-point network.
pub fn replay_episode(
    genome: &ControllerGenome,
    env: &EnvConfig,
    h0: f64,
    episode: usize,
    episode_seed: u64,
) -> Result<EpisodeGap> {
    let trace = run_landing(genome, BackendKind::Reference, &env.clone().with_seed(episode_seed), h0)?;
    let mut loihi = LoihiBackend::new(genome)?;
    let (hidden_loihi, output_loihi) = run_backend(&mut loihi, &trace.input_train())?;
    let mut decoder = TraceDecoder::<f64>::new(genome);
    let thrust_loihi: Vec<f64> = output_loihi
        .rows()
        .map(|row| decoder.decode(row.try_into().expect("output width")))
        .collect();
    let hidden_ref = trace.hidden_train();
    let output_ref = trace.output_train();
    Ok(EpisodeGap {
        episode,
        steps: trace.rows.len(),
        params: trace.params,
        hidden_infill_reference: infill(&hidden_ref)?,
        hidden_infill_loihi: infill(&hidden_loihi)?,
        hidden_match: match_score(&hidden_ref, &hidden_loihi)?,
        output_infill_reference: infill(&output_ref)?,
        output_infill_loihi: infill(&output_loihi)?,
        output_match: match_score(&output_ref, &output_loihi)?,
        thrust_rmse: thrust_rmse(&trace.thrust_setpoints(), &thrust_loihi)?,
    })
}

fn layer_gap(reference: &[f64], loihi: &[f64], matching: &[f64]) -> Result<LayerGap> {
    Ok(LayerGap {
        infill_reference: summarize(reference)?,
        infill_loihi: summarize(loihi)?,
        matching: summarize(matching)?,
        infill_ks: ks_two_sample(reference, loihi)?,
        infill_reference_normality: ks_normality(reference)?,
        infill_loihi_normality: ks_normality(loihi)?,
    })
}

/// Episode `i` uses environment seed `derive_seed(seed, [tag, i])`; episodes run in parallel.
pub fn build_gap_report(
    genome: &ControllerGenome,
    env: &EnvConfig,
    n_episodes: usize,
    seed: u64,
    h0: f64,
) -> Result<GapReport> {
    if n_episodes == 0 {
        return Err(Error::contract("gap report needs at least one episode"));
    }
    genome.validate()?;
    let episodes: Vec<EpisodeGap> = (0..n_episodes)
        .into_par_iter()
        .map(|i| replay_episode(genome, env, h0, i, derive_seed(seed, &[GAP_TAG, i as u64])))
        .collect::<Result<_>>()?;
    let col = |f: fn(&EpisodeGap) -> f64| episodes.iter().map(f).collect::<Vec<f64>>();
    let hidden = layer_gap(
        &col(|e| e.hidden_infill_reference),
        &col(|e| e.hidden_infill_loihi),
        &col(|e| e.hidden_match),
    )?;
    let output = layer_gap(
        &col(|e| e.output_infill_reference),
        &col(|e| e.output_infill_loihi),
        &col(|e| e.output_match),
    )?;
    let thrust_rmse = summarize(&col(|e| e.thrust_rmse))?;
    Ok(GapReport {
        n_episodes,
        h0,
        seed,
        hidden,
        output,
        thrust_rmse,
        episodes,
    })
}

pub const GAP_CSV_HEADER: [&str; 8] = [
    "stat",
    "hidden_reference",
    "hidden_loihi",
    "hidden_match",
    "output_reference",
    "output_loihi",
    "output_match",
    "thrust_rmse",
];

impl GapReport {
    /// Table layout: one row per statistic, one column per layer × backend plus match.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(GAP_CSV_HEADER)?;
        let columns = [
            &self.hidden.infill_reference,
            &self.hidden.infill_loihi,
            &self.hidden.matching,
            &self.output.infill_reference,
            &self.output.infill_loihi,
            &self.output.matching,
            &self.thrust_rmse,
        ];
        let stats: [(&str, fn(&Summary<f64>) -> f64); 5] = [
            ("mean", |s| s.mean),
            ("median", |s| s.median),
            ("sd", |s| s.sd),
            ("min", |s| s.min),
            ("max", |s| s.max),
        ];
        for (label, pick) in stats {
            let mut record = vec![label.to_string()];
            record.extend(columns.iter().map(|s| pick(s).to_string()));
            csv.write_record(&record)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
