//! Correlation and entanglement dynamics after a single injection.
//!
//! The initial state is the product `ρ(0) = ρ_S ⊗ ρ_S′` with `S` on the
//! leading qubits. It is evolved under `exp(-iHt)` without further
//! injections. The Hamiltonian is diagonalized once; the state is propagated
//! in the energy eigenbasis, where each coherence only picks up a phase.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};

use crate::c64;
use crate::error::{QrcError, Result};
use crate::qstate::{
    herm_eig, partial_transpose, trace_norm, ComplexMatrix, DensityMatrix, SpectralDecomposition,
};

/// Negative log-negativities down to this value are rounding and read as 0.
pub const NEGATIVITY_CLAMP: f64 = 1e-10;

/// `log₂ ‖ρ^{T_A}‖₁` for the bipartition `subsystem | rest`.
pub fn log_negativity(rho: &DensityMatrix, subsystem: &[usize]) -> Result<f64> {
    if subsystem.is_empty() || subsystem.len() >= rho.n_qubits() {
        return Err(QrcError::InvalidSubsystem(format!(
            "need a proper nonempty subset of {} qubits, got {subsystem:?}",
            rho.n_qubits()
        )));
    }
    let pt = partial_transpose(rho, subsystem)?;
    let e = trace_norm(pt.as_ref())?.log2();
    if e < -NEGATIVITY_CLAMP {
        return Err(QrcError::InvalidState(format!("trace norm below one (log₂ = {e})")));
    }
    Ok(e.max(0.0))
}

/// Product initial state propagated in the eigenbasis of `H`.
struct EigenPropagation {
    spec: SpectralDecomposition,
    /// `ρ(0)` in the eigenbasis.
    rho_eig: ComplexMatrix,
    n_qubits: usize,
}

impl EigenPropagation {
    fn new(h: MatRef<'_, c64>, rho_s: &DensityMatrix, rho_r: &DensityMatrix) -> Result<Self> {
        let rho0 = rho_s.tensor(rho_r);
        if h.nrows() != rho0.dim() || h.ncols() != rho0.dim() {
            return Err(QrcError::DimensionMismatch(format!(
                "Hamiltonian is {}x{}, initial state is {}x{}",
                h.nrows(),
                h.ncols(),
                rho0.dim(),
                rho0.dim()
            )));
        }
        let spec = herm_eig(h)?;
        let v = &spec.eigenvectors;
        let rho_eig = v.adjoint() * rho0.matrix() * v;
        Ok(Self {
            spec,
            rho_eig,
            n_qubits: rho0.n_qubits(),
        })
    }

    fn phase(&self, a: usize, b: usize, t: f64) -> c64 {
        let w = self.spec.eigenvalues[a] - self.spec.eigenvalues[b];
        c64::from_polar(1.0, -w * t)
    }

    /// `‖ρ(0) − ρ(t)‖_HS`, basis independent, so computed in the eigenbasis.
    fn chi_norm(&self, t: f64) -> f64 {
        let d = self.rho_eig.nrows();
        let mut acc = 0.0;
        for b in 0..d {
            for a in 0..d {
                let diff = c64::new(1.0, 0.0) - self.phase(a, b, t);
                acc += self.rho_eig[(a, b)].norm_sqr() * diff.norm_sqr();
            }
        }
        acc.sqrt()
    }

    fn state(&self, t: f64) -> Result<DensityMatrix> {
        let d = self.rho_eig.nrows();
        let evolved = Mat::from_fn(d, d, |a, b| self.rho_eig[(a, b)] * self.phase(a, b, t));
        let v = &self.spec.eigenvectors;
        let one = c64::new(1.0, 0.0);
        let mut tmp = Mat::<c64>::zeros(d, d);
        matmul(&mut tmp, Accum::Replace, v, &evolved, one, Par::Seq);
        let mut out = Mat::<c64>::zeros(d, d);
        matmul(&mut out, Accum::Replace, &tmp, v.adjoint(), one, Par::Seq);
        crate::qstate::hermitize(&mut out);
        let rho = DensityMatrix::from_matrix_unchecked(out)?;
        debug_assert_eq!(rho.n_qubits(), self.n_qubits);
        Ok(rho)
    }
}

/// `‖ρ(0) − U(t) ρ(0) U(t)†‖_HS` at each time.
pub fn chi_norm_trajectory(
    h: MatRef<'_, c64>,
    rho_s: &DensityMatrix,
    rho_r: &DensityMatrix,
    times: &[f64],
) -> Result<Vec<f64>> {
    let prop = EigenPropagation::new(h, rho_s, rho_r)?;
    Ok(times.iter().map(|&t| prop.chi_norm(t)).collect())
}

/// Log-negativity of `U(t) ρ(0) U(t)†` across `subsystem | rest`.
pub fn negativity_trajectory(
    h: MatRef<'_, c64>,
    rho_s: &DensityMatrix,
    rho_r: &DensityMatrix,
    times: &[f64],
    subsystem: &[usize],
) -> Result<Vec<f64>> {
    let prop = EigenPropagation::new(h, rho_s, rho_r)?;
    times
        .iter()
        .map(|&t| log_negativity(&prop.state(t)?, subsystem))
        .collect()
}

/// Both trajectories from one diagonalization.
pub fn correlation_dynamics(
    h: MatRef<'_, c64>,
    rho_s: &DensityMatrix,
    rho_r: &DensityMatrix,
    times: &[f64],
    subsystem: &[usize],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let prop = EigenPropagation::new(h, rho_s, rho_r)?;
    let chi = times.iter().map(|&t| prop.chi_norm(t)).collect();
    let neg = times
        .iter()
        .map(|&t| log_negativity(&prop.state(t)?, subsystem))
        .collect::<Result<_>>()?;
    Ok((chi, neg))
}

/// `t = 0` followed by `n` log-spaced points on `[t_min, t_max]`.
pub fn log_time_grid(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min) || n < 2 {
        return Err(QrcError::Config(format!(
            "time grid needs 0 < t_min < t_max and n >= 2, got ({t_min}, {t_max}, {n})"
        )));
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    let mut out = vec![0.0];
    out.extend((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()));
    Ok(out)
}
