//! Input injection channel and reservoir measurements.
//!
//! One step of the channel overwrites the auxiliary register `S` with the
//! encoded input, keeps the reservoir marginal on `S′`, evolves the product
//! for one interval with `U = exp(-iHΔt)` and traces `S` out again:
//!
//! ```text
//! ρ_S′,n = Tr_S[ U (ρ_S,n ⊗ ρ_S′,n-1) U† ]
//! ```
//!
//! [`inject`] and [`step`] implement this literally on the full register.
//! [`Channel`] is the production route: it only carries the reservoir
//! marginal and applies the step as a Kraus sum built from the eigenvectors
//! of the input state, which is about four times cheaper than conjugating the
//! full density matrix.

use std::io::Write;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};

use crate::c64;
use crate::error::{QrcError, Result};
use crate::qstate::{
    conjugate_by, herm_eig, hermitize, partial_trace, qubit_mask, renormalize_trace,
    scatter_table, unitarity_error, ComplexMatrix, DensityMatrix,
};

/// Unitarity tolerance checked once when a [`Channel`] is built.
pub const UNITARY_TOL: f64 = 1e-9;

/// Input eigenvalues at or below this contribute no Kraus operators.
const KRAUS_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirConfig {
    n_total: usize,
    dt: f64,
    aux_sites: Vec<usize>,
    reservoir_sites: Vec<usize>,
}

impl ReservoirConfig {
    /// `aux_sites` are sorted; input qubit `m` lands on the `m`-th smallest
    /// auxiliary site.
    pub fn new(n_total: usize, aux_sites: &[usize], dt: f64) -> Result<Self> {
        let mut aux = aux_sites.to_vec();
        aux.sort_unstable();
        aux.dedup();
        if aux.len() != aux_sites.len() {
            return Err(QrcError::InvalidSubsystem("repeated auxiliary site".into()));
        }
        if aux.is_empty() || aux.len() >= n_total {
            return Err(QrcError::InvalidSubsystem(format!(
                "need 1 <= |S| < N, got |S| = {} with N = {n_total}",
                aux.len()
            )));
        }
        if let Some(&bad) = aux.iter().find(|&&s| s >= n_total) {
            return Err(QrcError::SiteOutOfRange {
                site: bad,
                n_qubits: n_total,
            });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(QrcError::OutOfRange(format!("dt must be positive, got {dt}")));
        }
        let reservoir_sites = (0..n_total).filter(|q| !aux.contains(q)).collect();
        Ok(Self {
            n_total,
            dt,
            aux_sites: aux,
            reservoir_sites,
        })
    }

    /// Auxiliary register on sites `0..n_aux`.
    pub fn with_leading_aux(n_total: usize, n_aux: usize, dt: f64) -> Result<Self> {
        Self::new(n_total, &(0..n_aux).collect::<Vec<_>>(), dt)
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn n_aux(&self) -> usize {
        self.aux_sites.len()
    }

    pub fn n_reservoir(&self) -> usize {
        self.reservoir_sites.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn aux_sites(&self) -> &[usize] {
        &self.aux_sites
    }

    pub fn reservoir_sites(&self) -> &[usize] {
        &self.reservoir_sites
    }

    pub fn n_features(&self) -> usize {
        n_features(self.n_reservoir())
    }
}

/// `N_O = N_S′ (N_S′ + 1) / 2`.
pub fn n_features(n_reservoir: usize) -> usize {
    n_reservoir * (n_reservoir + 1) / 2
}

/// Measured `⟨σᶻᵢ⟩` then `⟨σᶻᵢσᶻⱼ⟩` (i < j) over reservoir sites.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub step_index: usize,
    pub values: Vec<f64>,
}

/// `(1 - η) I/4 + η |Φ⟩⟨Φ|` with the singlet `|Φ⟩ = (|↑↓⟩ - |↓↑⟩)/√2`.
pub fn encode_werner(eta: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(QrcError::OutOfRange(format!("Werner parameter {eta} not in [0, 1]")));
    }
    let mut m = Mat::<c64>::zeros(4, 4);
    let mixed = (1.0 - eta) / 4.0;
    for i in 0..4 {
        m[(i, i)] = c64::new(mixed, 0.0);
    }
    // singlet projector lives on the |↑↓>, |↓↑> block (indices 1, 2)
    m[(1, 1)] += c64::new(eta / 2.0, 0.0);
    m[(2, 2)] += c64::new(eta / 2.0, 0.0);
    m[(1, 2)] = c64::new(-eta / 2.0, 0.0);
    m[(2, 1)] = c64::new(-eta / 2.0, 0.0);
    DensityMatrix::from_matrix_unchecked(m)
}

/// `ρ(b1) ⊗ ρ(b2)` with `ρ(0) = |↑⟩⟨↑|` and `ρ(1) = |↓⟩⟨↓|`.
pub fn encode_bits(b1: bool, b2: bool) -> DensityMatrix {
    DensityMatrix::basis_state(2, (usize::from(b1) << 1) | usize::from(b2))
}

/// Index maps from a global basis index to its auxiliary and reservoir parts.
struct SplitIndex {
    aux_of: Vec<usize>,
    res_of: Vec<usize>,
}

impl SplitIndex {
    fn new(cfg: &ReservoirConfig) -> Self {
        let n = cfg.n_total;
        let gather = |sites: &[usize], i: usize| {
            sites
                .iter()
                .fold(0, |acc, &s| (acc << 1) | usize::from(i & qubit_mask(s, n) != 0))
        };
        let dim = 1usize << n;
        Self {
            aux_of: (0..dim).map(|i| gather(cfg.aux_sites(), i)).collect(),
            res_of: (0..dim).map(|i| gather(cfg.reservoir_sites(), i)).collect(),
        }
    }
}

/// `ρ_S ⊗ ρ_S′` laid out in the global site order.
pub fn embed_product(
    rho_aux: MatRef<'_, c64>,
    rho_res: MatRef<'_, c64>,
    cfg: &ReservoirConfig,
) -> Result<DensityMatrix> {
    if rho_aux.nrows() != 1 << cfg.n_aux() || rho_res.nrows() != 1 << cfg.n_reservoir() {
        return Err(QrcError::DimensionMismatch(format!(
            "expected {}x{} and {}x{} blocks",
            1 << cfg.n_aux(),
            1 << cfg.n_aux(),
            1 << cfg.n_reservoir(),
            1 << cfg.n_reservoir()
        )));
    }
    let idx = SplitIndex::new(cfg);
    let dim = 1usize << cfg.n_total;
    let m = Mat::from_fn(dim, dim, |i, j| {
        rho_aux[(idx.aux_of[i], idx.aux_of[j])] * rho_res[(idx.res_of[i], idx.res_of[j])]
    });
    DensityMatrix::from_matrix_unchecked(m)
}

fn check_input(rho_input: &DensityMatrix, cfg: &ReservoirConfig) -> Result<()> {
    if rho_input.n_qubits() != cfg.n_aux() {
        return Err(QrcError::DimensionMismatch(format!(
            "input has {} qubits, auxiliary register has {}",
            rho_input.n_qubits(),
            cfg.n_aux()
        )));
    }
    Ok(())
}

/// Replaces the auxiliary register: `ρ_in ⊗ Tr_S[ρ_total]`.
pub fn inject(
    rho_total: &DensityMatrix,
    rho_input: &DensityMatrix,
    cfg: &ReservoirConfig,
) -> Result<DensityMatrix> {
    check_input(rho_input, cfg)?;
    if rho_total.n_qubits() != cfg.n_total {
        return Err(QrcError::DimensionMismatch(format!(
            "state has {} qubits, configuration has {}",
            rho_total.n_qubits(),
            cfg.n_total
        )));
    }
    let res = partial_trace(rho_total, cfg.reservoir_sites())?;
    embed_product(rho_input.as_ref(), res.as_ref(), cfg)
}

/// `U · inject(ρ, ρ_in) · U†` on the full register.
pub fn step(
    rho_total: &DensityMatrix,
    rho_input: &DensityMatrix,
    u: MatRef<'_, c64>,
    cfg: &ReservoirConfig,
) -> Result<DensityMatrix> {
    let injected = inject(rho_total, rho_input, cfg)?;
    if u.nrows() != injected.dim() || u.ncols() != injected.dim() {
        return Err(QrcError::DimensionMismatch(format!(
            "propagator is {}x{}, state is {}x{}",
            u.nrows(),
            u.ncols(),
            injected.dim(),
            injected.dim()
        )));
    }
    let mut m = conjugate_by(u, injected.as_ref());
    hermitize(&mut m);
    renormalize_trace(&mut m);
    DensityMatrix::from_matrix_unchecked(m)
}

/// Features of a reservoir marginal (sites in ascending order).
pub fn reservoir_features(rho_res: MatRef<'_, c64>) -> Vec<f64> {
    let dim = rho_res.nrows();
    let n = dim.trailing_zeros() as usize;
    let probs: Vec<f64> = (0..dim).map(|s| rho_res[(s, s)].re).collect();
    let spin = |s: usize, i: usize| if s & qubit_mask(i, n) == 0 { 1.0 } else { -1.0 };
    let mut out = Vec::with_capacity(n_features(n));
    for i in 0..n {
        out.push(probs.iter().enumerate().map(|(s, p)| p * spin(s, i)).sum());
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push(
                probs
                    .iter()
                    .enumerate()
                    .map(|(s, p)| p * spin(s, i) * spin(s, j))
                    .sum(),
            );
        }
    }
    out
}

/// Measures the reservoir marginal of a full-register state.
pub fn extract_features(
    rho_total: &DensityMatrix,
    cfg: &ReservoirConfig,
    step_index: usize,
) -> Result<FeatureRecord> {
    let res = partial_trace(rho_total, cfg.reservoir_sites())?;
    Ok(FeatureRecord {
        step_index,
        values: reservoir_features(res.as_ref()),
    })
}

/// The reservoir map `ρ_S′ ↦ Tr_S[U (ρ_in ⊗ ρ_S′) U†]`, prepared once per
/// propagator.
#[derive(Debug, Clone)]
pub struct Channel {
    cfg: ReservoirConfig,
    /// Propagator in the basis where the auxiliary qubits lead.
    u_aux_first: ComplexMatrix,
}

impl Channel {
    pub fn new(u: MatRef<'_, c64>, cfg: &ReservoirConfig) -> Result<Self> {
        let dim = 1usize << cfg.n_total;
        if u.nrows() != dim || u.ncols() != dim {
            return Err(QrcError::DimensionMismatch(format!(
                "propagator is {}x{}, register needs {dim}x{dim}",
                u.nrows(),
                u.ncols()
            )));
        }
        let err = unitarity_error(u);
        if err > UNITARY_TOL {
            return Err(QrcError::NotUnitary(err));
        }
        let mut order = cfg.aux_sites.clone();
        order.extend_from_slice(&cfg.reservoir_sites);
        // local index (aux bits then reservoir bits) -> global index
        let to_global = scatter_table(&order, cfg.n_total);
        let u_aux_first = Mat::from_fn(dim, dim, |i, j| u[(to_global[i], to_global[j])]);
        Ok(Self {
            cfg: cfg.clone(),
            u_aux_first,
        })
    }

    pub fn config(&self) -> &ReservoirConfig {
        &self.cfg
    }

    /// Maximally mixed reservoir marginal.
    pub fn initial_reservoir(&self) -> ComplexMatrix {
        DensityMatrix::maximally_mixed(self.cfg.n_reservoir()).into_matrix()
    }

    /// One channel application on the reservoir marginal.
    pub fn apply(&self, rho_res: MatRef<'_, c64>, rho_input: &DensityMatrix) -> Result<ComplexMatrix> {
        check_input(rho_input, &self.cfg)?;
        let d_aux = 1usize << self.cfg.n_aux();
        let d_res = 1usize << self.cfg.n_reservoir();
        if rho_res.nrows() != d_res || rho_res.ncols() != d_res {
            return Err(QrcError::DimensionMismatch(format!(
                "reservoir state is {}x{}, expected {d_res}x{d_res}",
                rho_res.nrows(),
                rho_res.ncols()
            )));
        }
        let dim = d_aux * d_res;
        let spec = herm_eig(rho_input.as_ref())?;
        let terms: Vec<usize> = (0..d_aux)
            .filter(|&a| spec.eigenvalues[a] > KRAUS_CUTOFF)
            .collect();

        // Stack of Kraus operators √p_a ⟨b|U|a⟩, each d_res × d_res.
        let mut kraus = Mat::<c64>::zeros(terms.len() * dim, d_res);
        for (t, &a) in terms.iter().enumerate() {
            let weight = spec.eigenvalues[a].sqrt();
            let mut block = kraus.submatrix_mut(t * dim, 0, dim, d_res);
            for c in 0..d_aux {
                let coeff = spec.eigenvectors[(c, a)] * weight;
                if coeff.norm() == 0.0 {
                    continue;
                }
                let cols = self.u_aux_first.submatrix(0, c * d_res, dim, d_res);
                block += cols * faer::Scale(coeff);
            }
        }

        let n_kraus = terms.len() * d_aux;
        let mut z = Mat::<c64>::zeros(n_kraus * d_res, d_res);
        let one = c64::new(1.0, 0.0);
        matmul(&mut z, Accum::Replace, &kraus, rho_res, one, Par::Seq);
        let mut out = Mat::<c64>::zeros(d_res, d_res);
        for j in 0..n_kraus {
            let zj = z.submatrix(j * d_res, 0, d_res, d_res);
            let kj = kraus.submatrix(j * d_res, 0, d_res, d_res);
            matmul(&mut out, Accum::Add, zj, kj.adjoint(), one, Par::Seq);
        }
        hermitize(&mut out);
        renormalize_trace(&mut out);
        Ok(out)
    }

    /// Drives the channel from `rho_res0`, measuring after every step.
    pub fn run<'a, I>(&self, rho_res0: MatRef<'_, c64>, inputs: I) -> Result<Vec<FeatureRecord>>
    where
        I: IntoIterator<Item = &'a DensityMatrix>,
    {
        let mut rho = rho_res0.to_owned();
        let mut out = Vec::new();
        for (n, input) in inputs.into_iter().enumerate() {
            rho = self.apply(rho.as_ref(), input)?;
            out.push(FeatureRecord {
                step_index: n,
                values: reservoir_features(rho.as_ref()),
            });
        }
        Ok(out)
    }
}

/// Full pipeline from a full-register initial state: one feature record per
/// input, measured right after each evolution.
pub fn run_sequence(
    inputs: &[DensityMatrix],
    u: MatRef<'_, c64>,
    cfg: &ReservoirConfig,
    rho0: &DensityMatrix,
) -> Result<Vec<FeatureRecord>> {
    if rho0.n_qubits() != cfg.n_total {
        return Err(QrcError::DimensionMismatch(format!(
            "initial state has {} qubits, configuration has {}",
            rho0.n_qubits(),
            cfg.n_total
        )));
    }
    let channel = Channel::new(u, cfg)?;
    let res0 = partial_trace(rho0, cfg.reservoir_sites())?;
    channel.run(res0.as_ref(), inputs)
}

/// CSV with columns `step, f_0, …, f_{N_O-1}`.
pub fn write_features_csv<W: Write>(writer: W, records: &[FeatureRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let width = records.first().map_or(0, |r| r.values.len());
    let mut header = vec!["step".to_string()];
    header.extend((0..width).map(|i| format!("f_{i}")));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.step_index.to_string()];
        row.extend(r.values.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
