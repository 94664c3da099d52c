use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary spike record of one layer: `len()` steps by `width()` neurons, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    width: usize,
    dt: f64,
    data: Vec<bool>,
}

impl SpikeTrain {
    /// # Panics
    /// If `width` is zero.
    pub fn new(width: usize, dt: f64) -> Self {
        Self::with_capacity(width, dt, 0)
    }

    pub fn with_capacity(width: usize, dt: f64, steps: usize) -> Self {
        assert!(width > 0, "spike train needs at least one neuron");
        Self {
            width,
            dt,
            data: Vec::with_capacity(width * steps),
        }
    }

    pub fn from_rows<R: AsRef<[bool]>>(width: usize, dt: f64, rows: &[R]) -> Result<Self> {
        let mut train = Self::with_capacity(width, dt, rows.len());
        for row in rows {
            train.push(row.as_ref())?;
        }
        Ok(train)
    }

    pub fn push(&mut self, row: &[bool]) -> Result<()> {
        if row.len() != self.width {
            return Err(Error::contract(format!(
                "spike row has {} entries, train width is {}",
                row.len(),
                self.width
            )));
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    /// Number of time steps.
    pub fn len(&self) -> usize {
        self.data.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Number of neurons.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn row(&self, t: usize) -> &[bool] {
        &self.data[t * self.width..(t + 1) * self.width]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[bool]> + '_ {
        self.data.chunks_exact(self.width)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn spike_count(&self) -> usize {
        self.data.iter().filter(|&&s| s).count()
    }

    /// Per-neuron spike totals.
    pub fn neuron_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.width];
        for row in self.rows() {
            for (c, &s) in counts.iter_mut().zip(row) {
                *c += s as usize;
            }
        }
        counts
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            dt: self.dt,
            data: self.data.iter().map(|&s| !s).collect(),
        }
    }
}

/// Render a spike vector as a contiguous `0`/`1` string.
pub fn spike_string(spikes: &[bool]) -> String {
    spikes.iter().map(|&s| if s { '1' } else { '0' }).collect()
}
