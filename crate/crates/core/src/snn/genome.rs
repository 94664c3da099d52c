//! Evolved controller parameters and their on-disk JSON form.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{N_HIDDEN, N_INPUT, N_OUTPUT};
use crate::error::{Error, Result};

pub const WEIGHT_MIN: i32 = -256;
pub const WEIGHT_MAX: i32 = 254;
pub const THETA_MIN: i32 = 1;
pub const THETA_MAX: i32 = 1024;
pub const DELTA_MAX: i32 = 4096;
/// Current decay is pinned so the synaptic current never persists across steps.
pub const DELTA_U_FIXED: i32 = 4096;
pub const GENOME_FORMAT_VERSION: u32 = 1;

/// All evolved parameters of the 20-10-5 controller.
///
/// Weight rows are indexed by the postsynaptic neuron: `w_in_hidden[i][j]` is
/// the weight from input `j` to hidden neuron `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControllerGenome {
    pub w_in_hidden: [[i32; N_INPUT]; N_HIDDEN],
    pub w_hidden_out: [[i32; N_HIDDEN]; N_OUTPUT],
    pub theta_hidden: [i32; N_HIDDEN],
    pub theta_out: [i32; N_OUTPUT],
    pub delta_v_hidden: [i32; N_HIDDEN],
    pub delta_v_out: [i32; N_OUTPUT],
    pub delta_u: i32,
    pub alpha_x: [f64; N_OUTPUT],
    pub tau_x: [f64; N_OUTPUT],
}

impl ControllerGenome {
    /// Silent controller: zero weights, minimal thresholds, no trace gain.
    pub fn zeroed() -> Self {
        Self {
            w_in_hidden: [[0; N_INPUT]; N_HIDDEN],
            w_hidden_out: [[0; N_HIDDEN]; N_OUTPUT],
            theta_hidden: [THETA_MIN; N_HIDDEN],
            theta_out: [THETA_MIN; N_OUTPUT],
            delta_v_hidden: [0; N_HIDDEN],
            delta_v_out: [0; N_OUTPUT],
            delta_u: DELTA_U_FIXED,
            alpha_x: [0.0; N_OUTPUT],
            tau_x: [0.0; N_OUTPUT],
        }
    }

    /// Uniform draw over the legal parameter ranges; weights land on even integers.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut g = Self::zeroed();
        for w in g.w_in_hidden.iter_mut().flatten() {
            *w = 2 * rng.random_range(WEIGHT_MIN / 2..=WEIGHT_MAX / 2);
        }
        for w in g.w_hidden_out.iter_mut().flatten() {
            *w = 2 * rng.random_range(WEIGHT_MIN / 2..=WEIGHT_MAX / 2);
        }
        for th in g.theta_hidden.iter_mut().chain(g.theta_out.iter_mut()) {
            *th = rng.random_range(THETA_MIN..=THETA_MAX);
        }
        for d in g.delta_v_hidden.iter_mut().chain(g.delta_v_out.iter_mut()) {
            *d = rng.random_range(0..=DELTA_MAX);
        }
        for a in g.alpha_x.iter_mut().chain(g.tau_x.iter_mut()) {
            *a = rng.random::<f64>();
        }
        g
    }

    #[cfg(test)]
    pub(crate) fn random_for_tests(seed: u64) -> Self {
        Self::random(&mut crate::rng::stream(seed, &[0xC0FFEE]))
    }

    /// Check every invariant, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.w_in_hidden.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                check_weight(&format!("w_in_hidden[{i}][{j}]"), w as i64)?;
            }
        }
        for (i, row) in self.w_hidden_out.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                check_weight(&format!("w_hidden_out[{i}][{j}]"), w as i64)?;
            }
        }
        for (i, &th) in self.theta_hidden.iter().enumerate() {
            check_range(&format!("theta_hidden[{i}]"), th as i64, THETA_MIN, THETA_MAX)?;
        }
        for (i, &th) in self.theta_out.iter().enumerate() {
            check_range(&format!("theta_out[{i}]"), th as i64, THETA_MIN, THETA_MAX)?;
        }
        for (i, &d) in self.delta_v_hidden.iter().enumerate() {
            check_range(&format!("delta_v_hidden[{i}]"), d as i64, 0, DELTA_MAX)?;
        }
        for (i, &d) in self.delta_v_out.iter().enumerate() {
            check_range(&format!("delta_v_out[{i}]"), d as i64, 0, DELTA_MAX)?;
        }
        if self.delta_u != DELTA_U_FIXED {
            return Err(Error::genome(
                "delta_u",
                format!("must be {DELTA_U_FIXED}, got {}", self.delta_u),
            ));
        }
        for (i, &a) in self.alpha_x.iter().enumerate() {
            check_unit(&format!("alpha_x[{i}]"), a)?;
        }
        for (i, &t) in self.tau_x.iter().enumerate() {
            check_unit(&format!("tau_x[{i}]"), t)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = GenomeFileOut {
            format_version: GENOME_FORMAT_VERSION,
            topology: Topology::FIXED,
            genome: self,
        };
        serde_json::to_string_pretty(&file).expect("genome serializes")
    }

    /// Parse and validate a genome document.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: GenomeFileIn = serde_json::from_str(text)?;
        raw.into_genome()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    /// True when every voltage decay sits at an exact extreme (0 or 4096).
    pub fn has_extreme_decays(&self) -> bool {
        self.delta_v_hidden
            .iter()
            .chain(&self.delta_v_out)
            .all(|&d| d == 0 || d == DELTA_MAX)
    }
}

fn check_range(field: &str, value: i64, lo: i32, hi: i32) -> Result<()> {
    if value < lo as i64 || value > hi as i64 {
        return Err(Error::genome(field, format!("{value} outside [{lo}, {hi}]")));
    }
    Ok(())
}

fn check_weight(field: &str, w: i64) -> Result<()> {
    check_range(field, w, WEIGHT_MIN, WEIGHT_MAX)?;
    if w % 2 != 0 {
        return Err(Error::genome(field, format!("{w} is not even")));
    }
    Ok(())
}

fn check_unit(field: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::genome(field, format!("{x} outside [0, 1]")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Topology {
    input: usize,
    hidden: usize,
    output: usize,
}

impl Topology {
    const FIXED: Topology = Topology {
        input: N_INPUT,
        hidden: N_HIDDEN,
        output: N_OUTPUT,
    };
}

#[derive(Serialize)]
struct GenomeFileOut<'a> {
    format_version: u32,
    topology: Topology,
    #[serde(flatten)]
    genome: &'a ControllerGenome,
}

/// Loose mirror of the file so shape errors can name the field.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GenomeFileIn {
    format_version: u32,
    topology: Topology,
    w_in_hidden: Vec<Vec<i64>>,
    w_hidden_out: Vec<Vec<i64>>,
    theta_hidden: Vec<i64>,
    theta_out: Vec<i64>,
    delta_v_hidden: Vec<i64>,
    delta_v_out: Vec<i64>,
    delta_u: i64,
    alpha_x: Vec<f64>,
    tau_x: Vec<f64>,
}

fn int_array<const N: usize>(field: &str, values: &[i64]) -> Result<[i32; N]> {
    if values.len() != N {
        return Err(Error::genome(
            field,
            format!("expected {N} entries, found {}", values.len()),
        ));
    }
    let mut out = [0i32; N];
    for (k, (&v, slot)) in values.iter().zip(out.iter_mut()).enumerate() {
        *slot = i32::try_from(v)
            .map_err(|_| Error::genome(format!("{field}[{k}]"), format!("{v} out of range")))?;
    }
    Ok(out)
}

fn int_matrix<const R: usize, const C: usize>(
    field: &str,
    rows: &[Vec<i64>],
) -> Result<[[i32; C]; R]> {
    if rows.len() != R {
        return Err(Error::genome(
            field,
            format!("expected {R} rows, found {}", rows.len()),
        ));
    }
    let mut out = [[0i32; C]; R];
    for (i, (row, slot)) in rows.iter().zip(out.iter_mut()).enumerate() {
        *slot = int_array::<C>(&format!("{field}[{i}]"), row)?;
    }
    Ok(out)
}

fn real_array<const N: usize>(field: &str, values: &[f64]) -> Result<[f64; N]> {
    values.try_into().map_err(|_| {
        Error::genome(
            field,
            format!("expected {N} entries, found {}", values.len()),
        )
    })
}

impl GenomeFileIn {
    fn into_genome(self) -> Result<ControllerGenome> {
        if self.format_version != GENOME_FORMAT_VERSION {
            return Err(Error::genome(
                "format_version",
                format!(
                    "unsupported version {}, expected {GENOME_FORMAT_VERSION}",
                    self.format_version
                ),
            ));
        }
        if self.topology != Topology::FIXED {
            return Err(Error::genome(
                "topology",
                format!(
                    "expected {{input: {N_INPUT}, hidden: {N_HIDDEN}, output: {N_OUTPUT}}}, found {:?}",
                    self.topology
                ),
            ));
        }
        let delta_u = i32::try_from(self.delta_u)
            .map_err(|_| Error::genome("delta_u", format!("{} out of range", self.delta_u)))?;
        let genome = ControllerGenome {
            w_in_hidden: int_matrix("w_in_hidden", &self.w_in_hidden)?,
            w_hidden_out: int_matrix("w_hidden_out", &self.w_hidden_out)?,
            theta_hidden: int_array("theta_hidden", &self.theta_hidden)?,
            theta_out: int_array("theta_out", &self.theta_out)?,
            delta_v_hidden: int_array("delta_v_hidden", &self.delta_v_hidden)?,
            delta_v_out: int_array("delta_v_out", &self.delta_v_out)?,
            delta_u,
            alpha_x: real_array("alpha_x", &self.alpha_x)?,
            tau_x: real_array("tau_x", &self.tau_x)?,
        };
        genome.validate()?;
        Ok(genome)
    }
}
