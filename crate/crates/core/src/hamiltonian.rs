//! Disordered spin Hamiltonian on a graph and level-spacing statistics.
//!
//! ```text
//! H = Σ_{(i,j) ∈ E} (Jz σᶻᵢσᶻⱼ + Jx σˣᵢσˣⱼ) + Σ_i (hx + δˣᵢ) σˣᵢ + Σ_i (hz + δᶻᵢ) σᶻᵢ
//! ```
//!
//! with `δᵅᵢ` i.i.d. uniform on `[-Δᵅ, Δᵅ]`. Every term is real, so the
//! matrix is real symmetric; it is assembled directly from bit operations on
//! basis indices.

use faer::Mat;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::c64;
use crate::error::{QrcError, Result};
use crate::graph::Graph;
use crate::qstate::{qubit_mask, ComplexMatrix};

/// Gaps at or below this are treated as exact degeneracies.
pub const DEGENERATE_GAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HamiltonianSpec {
    pub jz: f64,
    pub jx: f64,
    pub hx: f64,
    pub hz: f64,
    pub delta_x: f64,
    pub delta_z: f64,
}

impl Default for HamiltonianSpec {
    fn default() -> Self {
        Self {
            jz: 1.0,
            jx: 0.0,
            hx: 1.0,
            hz: 0.0,
            delta_x: 0.0,
            delta_z: 0.2,
        }
    }
}

impl HamiltonianSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.jz, self.jx, self.hx, self.hz, self.delta_x, self.delta_z]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(QrcError::OutOfRange("non-finite Hamiltonian parameter".into()));
        }
        if self.delta_x < 0.0 || self.delta_z < 0.0 {
            return Err(QrcError::OutOfRange(format!(
                "disorder amplitudes must be non-negative (Δx = {}, Δz = {})",
                self.delta_x, self.delta_z
            )));
        }
        Ok(())
    }
}

/// Per-site random field offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub delta_x_fields: Vec<f64>,
    pub delta_z_fields: Vec<f64>,
}

impl DisorderRealization {
    pub fn zeros(n: usize) -> Self {
        Self {
            delta_x_fields: vec![0.0; n],
            delta_z_fields: vec![0.0; n],
        }
    }
}

fn uniform_symmetric<R: Rng + ?Sized>(amplitude: f64, rng: &mut R) -> f64 {
    if amplitude == 0.0 {
        0.0
    } else {
        rng.random_range(-amplitude..=amplitude)
    }
}

/// Draws `δˣ` for every site, then `δᶻ` for every site.
pub fn sample_disorder<R: Rng + ?Sized>(
    spec: &HamiltonianSpec,
    n: usize,
    rng: &mut R,
) -> DisorderRealization {
    let delta_x_fields = (0..n).map(|_| uniform_symmetric(spec.delta_x, rng)).collect();
    let delta_z_fields = (0..n).map(|_| uniform_symmetric(spec.delta_z, rng)).collect();
    DisorderRealization {
        delta_x_fields,
        delta_z_fields,
    }
}

/// Real symmetric Hamiltonian matrix of dimension `2^N`.
pub fn build_hamiltonian_real(
    g: &Graph,
    spec: &HamiltonianSpec,
    dis: &DisorderRealization,
) -> Result<Mat<f64>> {
    let n = g.n_vertices();
    if dis.delta_x_fields.len() != n || dis.delta_z_fields.len() != n {
        return Err(QrcError::DimensionMismatch(format!(
            "disorder has {}/{} fields for {n} vertices",
            dis.delta_x_fields.len(),
            dis.delta_z_fields.len()
        )));
    }
    let dim = 1usize << n;
    let masks: Vec<usize> = (0..n).map(|i| qubit_mask(i, n)).collect();
    let hx: Vec<f64> = dis.delta_x_fields.iter().map(|d| spec.hx + d).collect();
    let hz: Vec<f64> = dis.delta_z_fields.iter().map(|d| spec.hz + d).collect();
    let spin = |s: usize, i: usize| if s & masks[i] == 0 { 1.0 } else { -1.0 };

    let mut h = Mat::<f64>::zeros(dim, dim);
    for s in 0..dim {
        let mut diag = 0.0;
        for &(i, j) in g.edges() {
            diag += spec.jz * spin(s, i) * spin(s, j);
        }
        for i in 0..n {
            diag += hz[i] * spin(s, i);
        }
        h[(s, s)] += diag;
        for i in 0..n {
            h[(s ^ masks[i], s)] += hx[i];
        }
        if spec.jx != 0.0 {
            for &(i, j) in g.edges() {
                h[(s ^ masks[i] ^ masks[j], s)] += spec.jx;
            }
        }
    }
    Ok(h)
}

/// The Hamiltonian as a complex matrix.
pub fn build_hamiltonian(
    g: &Graph,
    spec: &HamiltonianSpec,
    dis: &DisorderRealization,
) -> Result<ComplexMatrix> {
    let h = build_hamiltonian_real(g, spec, dis)?;
    Ok(Mat::from_fn(h.nrows(), h.ncols(), |i, j| c64::new(h[(i, j)], 0.0)))
}

/// Which part of the sorted spectrum enters the spacing-ratio average.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumWindow {
    #[default]
    Full,
    CentralHalf,
}

/// Mean of `min(δₙ, δₙ₊₁) / max(δₙ, δₙ₊₁)` over consecutive gaps of an
/// ascending spectrum, skipping degenerate gaps.
pub fn level_spacing_ratios(energies: &[f64]) -> Result<f64> {
    if energies.len() < 3 {
        return Err(QrcError::TooShort {
            needed: 3,
            got: energies.len(),
        });
    }
    if energies.windows(2).any(|w| w[1] < w[0]) {
        return Err(QrcError::OutOfRange("energies must be sorted ascending".into()));
    }
    let gaps: Vec<f64> = energies
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&d| d > DEGENERATE_GAP)
        .collect();
    if gaps.len() < 2 {
        return Err(QrcError::TooShort {
            needed: 2,
            got: gaps.len(),
        });
    }
    let sum: f64 = gaps
        .windows(2)
        .map(|w| w[0].min(w[1]) / w[0].max(w[1]))
        .sum();
    Ok(sum / (gaps.len() - 1) as f64)
}

/// [`level_spacing_ratios`] restricted to a window of the spectrum.
pub fn windowed_spacing_ratio(energies: &[f64], window: SpectrumWindow) -> Result<f64> {
    match window {
        SpectrumWindow::Full => level_spacing_ratios(energies),
        SpectrumWindow::CentralHalf => {
            let n = energies.len();
            level_spacing_ratios(&energies[n / 4..n - n / 4])
        }
    }
}
