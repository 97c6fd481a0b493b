//! Benchmark input sequences and targets.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};

/// Delayed reconstruction of random Werner parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryTaskSpec {
    pub sequence_length: usize,
    pub tau_max: usize,
    pub encoding_noise: f64,
    pub seed: u64,
}

impl MemoryTaskSpec {
    pub fn new(sequence_length: usize, seed: u64) -> Self {
        Self {
            sequence_length,
            tau_max: 6,
            encoding_noise: 0.02,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau_max == 0 {
            return Err(QrcError::Config("tau_max must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.encoding_noise) {
            return Err(QrcError::Config(format!(
                "encoding noise must lie in [0, 1), got {}",
                self.encoding_noise
            )));
        }
        Ok(())
    }
}

/// Two independent fair bit streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultitaskSpec {
    pub sequence_length: usize,
    pub seed: u64,
}

/// Returns `(clean, encoded)`: clean values are i.i.d. uniform on `[0, 1]`,
/// encoded values add uniform noise of amplitude `δ` and clamp to `[0, 1]`.
///
/// All clean values are drawn before any noise, so the clean sequence for a
/// seed does not depend on `δ`.
pub fn gen_memory_inputs(spec: &MemoryTaskSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let clean: Vec<f64> = (0..spec.sequence_length)
        .map(|_| rng.random_range(0.0..=1.0))
        .collect();
    let delta = spec.encoding_noise;
    let encoded = clean
        .iter()
        .map(|&c| {
            if delta == 0.0 {
                c
            } else {
                (c + rng.random_range(-delta..=delta)).clamp(0.0, 1.0)
            }
        })
        .collect();
    Ok((clean, encoded))
}

/// `target[n] = clean[n − τ]`; the first `τ` entries are `None`.
pub fn memory_targets(clean: &[f64], tau: usize) -> Result<Vec<Option<f64>>> {
    if tau >= clean.len() {
        return Err(QrcError::OutOfRange(format!(
            "delay {tau} needs a sequence longer than {}",
            clean.len()
        )));
    }
    Ok((0..clean.len())
        .map(|n| n.checked_sub(tau).map(|m| clean[m]))
        .collect())
}

/// Mean of the per-delay capacities `C_1 … C_τmax`.
pub fn total_memory_capacity(capacities: &[f64]) -> Result<f64> {
    if capacities.is_empty() {
        return Err(QrcError::TooShort { needed: 1, got: 0 });
    }
    Ok(capacities.iter().sum::<f64>() / capacities.len() as f64)
}

/// Bit streams and their per-step logical targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multitask {
    pub bits_a: Vec<bool>,
    pub bits_b: Vec<bool>,
    pub and: Vec<bool>,
    pub or: Vec<bool>,
    pub xor: Vec<bool>,
}

pub fn gen_multitask(spec: &MultitaskSpec) -> Result<Multitask> {
    if spec.sequence_length == 0 {
        return Err(QrcError::Config("sequence length must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut bits_a = Vec::with_capacity(spec.sequence_length);
    let mut bits_b = Vec::with_capacity(spec.sequence_length);
    for _ in 0..spec.sequence_length {
        bits_a.push(rng.random::<bool>());
        bits_b.push(rng.random::<bool>());
    }
    let zip = |f: fn(bool, bool) -> bool| -> Vec<bool> {
        bits_a.iter().zip(&bits_b).map(|(&a, &b)| f(a, b)).collect()
    };
    let and = zip(|a, b| a & b);
    let or = zip(|a, b| a | b);
    let xor = zip(|a, b| a ^ b);
    Ok(Multitask {
        bits_a,
        bits_b,
        and,
        or,
        xor,
    })
}

/// Columns `step,encoded,clean`.
pub fn write_memory_task_csv<W: Write>(writer: W, clean: &[f64], encoded: &[f64]) -> Result<()> {
    if clean.len() != encoded.len() {
        return Err(QrcError::LengthMismatch(clean.len(), encoded.len()));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["step", "encoded", "clean"])?;
    for (n, (e, c)) in encoded.iter().zip(clean).enumerate() {
        w.write_record([n.to_string(), e.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `step,bit_a,bit_b,and,or,xor`.
pub fn write_multitask_csv<W: Write>(writer: W, task: &Multitask) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["step", "bit_a", "bit_b", "and", "or", "xor"])?;
    let b = |x: bool| u8::from(x).to_string();
    for n in 0..task.bits_a.len() {
        w.write_record([
            n.to_string(),
            b(task.bits_a[n]),
            b(task.bits_b[n]),
            b(task.and[n]),
            b(task.or[n]),
            b(task.xor[n]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Where an accuracy curve drops below a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum CriticalDisorder {
    /// Interpolated crossing point.
    Crossed(f64),
    /// Never below threshold on the grid; the value is the last grid point.
    Censored(f64),
}

impl CriticalDisorder {
    pub fn value(&self) -> f64 {
        match *self {
            Self::Crossed(v) | Self::Censored(v) => v,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, Self::Censored(_))
    }
}

/// Walks an ascending disorder grid, evaluating lazily, and stops at the
/// first point whose accuracy is below `threshold`. The crossing is
/// interpolated linearly from the bracketing points; a curve already below
/// threshold at the first point crosses there.
pub fn critical_disorder<F>(grid: &[f64], threshold: f64, mut accuracy: F) -> Result<CriticalDisorder>
where
    F: FnMut(f64) -> Result<f64>,
{
    if grid.is_empty() {
        return Err(QrcError::TooShort { needed: 1, got: 0 });
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QrcError::Config("disorder grid must be strictly ascending".into()));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(QrcError::Config(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let mut prev: Option<(f64, f64)> = None;
    for &d in grid {
        let a = accuracy(d)?;
        if a < threshold {
            return Ok(CriticalDisorder::Crossed(match prev {
                None => d,
                Some((d0, a0)) => d0 + (a0 - threshold) / (a0 - a) * (d - d0),
            }));
        }
        prev = Some((d, a));
    }
    Ok(CriticalDisorder::Censored(grid[grid.len() - 1]))
}

/// [`critical_disorder`] for each graph degree.
pub fn critical_disorder_scan<F>(
    k_values: &[usize],
    threshold: f64,
    grid: &[f64],
    mut accuracy: F,
) -> Result<BTreeMap<usize, CriticalDisorder>>
where
    F: FnMut(usize, f64) -> Result<f64>,
{
    k_values
        .iter()
        .map(|&k| Ok((k, critical_disorder(grid, threshold, |d| accuracy(k, d))?)))
        .collect()
}
