//! Seeded parameter sweeps.
//!
//! A sweep is the Cartesian grid `k × Δt × Δˣ × Jˣ` (in that nesting order)
//! times a number of independent realizations. Every (grid point,
//! realization) job draws its graph, disorder and task sequence from a seed
//! that is a pure function of the master seed and the two indices, so results
//! do not depend on the worker count or the scheduling order.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::{correlation_dynamics, log_time_grid};
use crate::error::{QrcError, Result};
use crate::graph::{sample_rrg, Graph, GraphRecord};
use crate::hamiltonian::{
    build_hamiltonian, build_hamiltonian_real, sample_disorder, windowed_spacing_ratio,
    DisorderRealization, HamiltonianSpec, SpectrumWindow,
};
use crate::qstate::{evolution_operator, sym_eig_real, sym_eigenvalues_real, ComplexMatrix, DensityMatrix};
use crate::readout::{
    accuracy_rescaled, mse, pearson_capacity, ridge_fit, ridge_predict, svm_fit, svm_predict,
    Standardizer, SvmParams, TrainTestSplit,
};
use crate::reservoir::{encode_bits, encode_werner, Channel, FeatureRecord, ReservoirConfig};
use crate::tasks::{
    critical_disorder_scan, gen_memory_inputs, gen_multitask, total_memory_capacity,
    CriticalDisorder, MemoryTaskSpec, MultitaskSpec,
};

/// A sweep aborts when more than this fraction of one grid point's
/// realizations fail.
pub const FAILURE_BUDGET: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Memory,
    Multitask,
    Spectra,
    Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReadoutParams {
    pub lambda: f64,
    pub length_scale: f64,
    pub penalty: f64,
    /// Standardize features with training-split statistics before fitting.
    pub standardize: bool,
    pub kernel_distance: KernelDistance,
}

/// Distance entering the RBF kernel `exp(−D²/2l²)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelDistance {
    /// Plain Euclidean distance between feature vectors.
    Euclidean,
    /// Euclidean distance divided by `√N_O`, so `l` is measured per feature.
    #[default]
    Rms,
}

impl ReadoutParams {
    /// Euclidean length scale equivalent to `length_scale` under
    /// `kernel_distance` for `n_features` features.
    pub fn euclidean_length_scale(&self, n_features: usize) -> f64 {
        match self.kernel_distance {
            KernelDistance::Euclidean => self.length_scale,
            KernelDistance::Rms => self.length_scale * (n_features.max(1) as f64).sqrt(),
        }
    }
}

impl Default for ReadoutParams {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            length_scale: 1.0,
            penalty: 1.0,
            standardize: true,
            kernel_distance: KernelDistance::Rms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_min: 0.1,
            t_max: 100.0,
            n_points: 60,
        }
    }
}

impl TimeGrid {
    pub fn times(&self) -> Result<Vec<f64>> {
        log_time_grid(self.t_min, self.t_max, self.n_points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub task: Task,
    pub n_total: usize,
    pub degrees: Vec<usize>,
    pub dts: Vec<f64>,
    pub delta_x: Vec<f64>,
    pub jx: Vec<f64>,
    pub jz: f64,
    pub hx: f64,
    pub hz: f64,
    pub delta_z: f64,
    pub aux_sites: Vec<usize>,
    pub realizations: usize,
    pub split: TrainTestSplit,
    pub master_seed: u64,
    pub readout: ReadoutParams,
    pub tau_max: usize,
    pub encoding_noise: f64,
    pub time_grid: TimeGrid,
    pub spectrum_window: SpectrumWindow,
    /// XOR accuracy threshold for the critical-disorder scan (multitask).
    pub critical_threshold: Option<f64>,
    /// Worker threads; 0 uses every available core. Not part of the
    /// fingerprint.
    pub workers: usize,
    /// Output directory. Not part of the fingerprint.
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: Task::Memory,
            n_total: 8,
            degrees: vec![3],
            dts: vec![3.0],
            delta_x: vec![10.0],
            jx: vec![0.0],
            jz: 1.0,
            hx: 1.0,
            hz: 0.0,
            delta_z: 0.2,
            aux_sites: vec![0, 1],
            realizations: 100,
            split: TrainTestSplit::default(),
            master_seed: 0,
            readout: ReadoutParams::default(),
            tau_max: 6,
            encoding_noise: 0.02,
            time_grid: TimeGrid::default(),
            spectrum_window: SpectrumWindow::Full,
            critical_threshold: None,
            workers: 0,
            out: PathBuf::from("results"),
        }
    }
}

/// One point of the parameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: usize,
    pub k: usize,
    pub dt: f64,
    pub delta_x: f64,
    pub jx: f64,
}

impl ExperimentConfig {
    /// Defaults for a task; spectra default to `N = 10`.
    pub fn for_task(task: Task) -> Self {
        let mut cfg = Self {
            task,
            ..Self::default()
        };
        if task == Task::Spectra {
            cfg.n_total = 10;
            cfg.degrees = vec![5];
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(QrcError::Config(msg));
        if self.degrees.is_empty() || self.dts.is_empty() || self.delta_x.is_empty() || self.jx.is_empty() {
            return bad("parameter grids must be non-empty".into());
        }
        if self.realizations == 0 {
            return bad("realizations must be at least 1".into());
        }
        if self.n_total < 2 || self.n_total > 14 {
            return bad(format!("n_total = {} outside 2..=14", self.n_total));
        }
        for &k in &self.degrees {
            let feasible = k >= 1 && k < self.n_total && (self.n_total * k) % 2 == 0;
            // 1-regular graphs are connected only on two vertices
            if !feasible || (k == 1 && self.n_total > 2) {
                return bad(format!("no connected {k}-regular graph on {} vertices", self.n_total));
            }
        }
        if self.dts.iter().any(|&dt| !(dt > 0.0 && dt.is_finite())) {
            return bad("dt values must be positive".into());
        }
        if self.delta_x.iter().any(|&d| !(d >= 0.0 && d.is_finite())) {
            return bad("delta_x values must be non-negative".into());
        }
        self.hamiltonian(0.0, 0.0).validate().map_err(|e| QrcError::Config(e.to_string()))?;
        if self.jx.iter().any(|j| !j.is_finite()) {
            return bad("jx values must be finite".into());
        }
        if matches!(self.task, Task::Memory | Task::Multitask | Task::Diagnostics) {
            ReservoirConfig::new(self.n_total, &self.aux_sites, self.dts[0])
                .map_err(|e| QrcError::Config(e.to_string()))?;
        }
        if matches!(self.task, Task::Memory | Task::Multitask) {
            self.split.validate(self.split.total())?;
            let r = &self.readout;
            if !(r.lambda > 0.0 && r.length_scale > 0.0 && r.penalty > 0.0) {
                return bad("readout λ, l and C must be positive".into());
            }
        }
        if self.task == Task::Memory {
            self.memory_spec(0).validate()?;
            if self.tau_max >= self.split.n_transient {
                return bad("tau_max must be shorter than the transient".into());
            }
        }
        if self.task == Task::Diagnostics {
            self.time_grid.times()?;
            if self.aux_sites.iter().enumerate().any(|(i, &s)| i != s) {
                return bad("diagnostics place S on the leading sites 0..|S|".into());
            }
        }
        if let Some(th) = self.critical_threshold {
            if !(th > 0.0 && th < 1.0) {
                return bad(format!("critical threshold {th} not in (0, 1)"));
            }
            if self.delta_x.windows(2).any(|w| w[1] <= w[0]) {
                return bad("critical scan needs an ascending delta_x grid".into());
            }
        }
        Ok(())
    }

    pub fn hamiltonian(&self, delta_x: f64, jx: f64) -> HamiltonianSpec {
        HamiltonianSpec {
            jz: self.jz,
            jx,
            hx: self.hx,
            hz: self.hz,
            delta_x,
            delta_z: self.delta_z,
        }
    }

    fn memory_spec(&self, seed: u64) -> MemoryTaskSpec {
        MemoryTaskSpec {
            sequence_length: self.split.total(),
            tau_max: self.tau_max,
            encoding_noise: self.encoding_noise,
            seed,
        }
    }

    /// Grid points with `k` outermost and `Jˣ` innermost.
    pub fn grid(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &k in &self.degrees {
            for &dt in &self.dts {
                for &delta_x in &self.delta_x {
                    for &jx in &self.jx {
                        out.push(GridPoint {
                            index: out.len(),
                            k,
                            dt,
                            delta_x,
                            jx,
                        });
                    }
                }
            }
        }
        out
    }

    /// SHA-256 of the canonical JSON form, ignoring `workers` and `out`.
    pub fn fingerprint(&self) -> String {
        let mut canonical = self.clone();
        canonical.workers = 0;
        canonical.out = PathBuf::new();
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one realization at one grid point.
pub fn derive_seed(master_seed: u64, grid_index: usize, realization: usize) -> u64 {
    let a = splitmix64(master_seed);
    let b = splitmix64(a ^ grid_index as u64);
    splitmix64(b ^ (realization as u64).rotate_left(32))
}

/// Mean and standard error `s / √n` (0 for a single sample).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub stderr: f64,
}

impl Stat {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Self { mean, stderr: 0.0 };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Self {
            mean,
            stderr: (var / n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricStat {
    pub name: String,
    pub mean: f64,
    pub stderr: f64,
}

/// Aggregated metrics at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub point: GridPoint,
    pub metrics: Vec<MetricStat>,
    pub n_realizations: usize,
    pub n_failed: usize,
    pub fingerprint: String,
}

impl SweepResult {
    pub fn metric(&self, name: &str) -> Option<&MetricStat> {
        self.metrics.iter().find(|m| m.name == name)
    }
}

/// What one realization produced.
#[derive(Debug, Clone)]
pub struct RealizationOutput {
    pub metrics: Vec<f64>,
    pub graph: GraphRecord,
    pub readout: serde_json::Value,
}

/// Log entry of one job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub grid_index: usize,
    pub realization: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub readout: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Everything a sweep produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub fingerprint: String,
    pub results: Vec<SweepResult>,
    pub jobs: Vec<JobRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critical_disorder: Option<BTreeMap<usize, CriticalDisorder>>,
    pub elapsed_seconds: f64,
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| QrcError::Config(format!("thread pool: {e}")))
}

/// Runs every realization of `points` in parallel and aggregates in index
/// order.
fn run_points<F>(
    cfg: &ExperimentConfig,
    points: &[GridPoint],
    metric_names: &[String],
    job: F,
) -> Result<(Vec<SweepResult>, Vec<JobRecord>)>
where
    F: Fn(&GridPoint, u64) -> Result<RealizationOutput> + Sync,
{
    // Parallelism lives at the job level; keep the linear algebra serial.
    faer::set_global_parallelism(faer::Par::Seq);
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..cfg.realizations).map(move |r| (p, r)))
        .collect();
    let outputs: Vec<(u64, Result<RealizationOutput>)> = thread_pool(cfg.workers)?.install(|| {
        jobs.par_iter()
            .map(|&(p, r)| {
                let seed = derive_seed(cfg.master_seed, points[p].index, r);
                (seed, job(&points[p], seed))
            })
            .collect()
    });

    let fingerprint = cfg.fingerprint();
    let mut samples: Vec<Vec<Vec<f64>>> = vec![Vec::new(); points.len()];
    let mut failed = vec![0usize; points.len()];
    let mut records = Vec::with_capacity(jobs.len());
    for (&(p, r), (seed, out)) in jobs.iter().zip(outputs) {
        let mut rec = JobRecord {
            grid_index: points[p].index,
            realization: r,
            seed,
            graph: None,
            readout: None,
            error: None,
        };
        match out {
            Ok(o) => {
                debug_assert_eq!(o.metrics.len(), metric_names.len());
                samples[p].push(o.metrics);
                rec.graph = Some(o.graph);
                rec.readout = Some(o.readout);
            }
            Err(e) => {
                log::warn!("grid point {} realization {r} failed: {e}", points[p].index);
                failed[p] += 1;
                rec.error = Some(e.to_string());
            }
        }
        records.push(rec);
    }

    let mut results = Vec::with_capacity(points.len());
    for (p, point) in points.iter().enumerate() {
        if failed[p] as f64 > FAILURE_BUDGET * cfg.realizations as f64 {
            return Err(QrcError::SweepAborted {
                grid_index: point.index,
                failed: failed[p],
                total: cfg.realizations,
            });
        }
        let metrics = metric_names
            .iter()
            .enumerate()
            .map(|(m, name)| {
                let xs: Vec<f64> = samples[p].iter().map(|s| s[m]).collect();
                let st = Stat::from_samples(&xs);
                MetricStat {
                    name: name.clone(),
                    mean: st.mean,
                    stderr: st.stderr,
                }
            })
            .collect();
        results.push(SweepResult {
            point: *point,
            metrics,
            n_realizations: samples[p].len(),
            n_failed: failed[p],
            fingerprint: fingerprint.clone(),
        });
    }
    Ok((results, records))
}

/// Graph, disorder and Hamiltonian of one realization.
pub struct Realization {
    pub graph: Graph,
    pub disorder: DisorderRealization,
    pub hamiltonian: Mat<f64>,
}

pub fn sample_realization<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    point: &GridPoint,
    rng: &mut R,
) -> Result<Realization> {
    let graph = sample_rrg(cfg.n_total, point.k, rng)?;
    let spec = cfg.hamiltonian(point.delta_x, point.jx);
    let disorder = sample_disorder(&spec, cfg.n_total, rng);
    let hamiltonian = build_hamiltonian_real(&graph, &spec, &disorder)?;
    Ok(Realization {
        graph,
        disorder,
        hamiltonian,
    })
}

/// `exp(-iHΔt)` of a real symmetric Hamiltonian.
pub fn propagator(h: &Mat<f64>, dt: f64) -> Result<ComplexMatrix> {
    Ok(evolution_operator(&sym_eig_real(h.as_ref())?, dt))
}

/// Feature records as a `steps × N_O` matrix.
pub fn feature_matrix(records: &[FeatureRecord]) -> Mat<f64> {
    let width = records.first().map_or(0, |r| r.values.len());
    Mat::from_fn(records.len(), width, |i, j| records[i].values[j])
}

/// Train and test blocks of the feature matrix, standardized with training
/// statistics when requested.
fn split_features(x: &Mat<f64>, split: &TrainTestSplit, standardize: bool) -> (Mat<f64>, Mat<f64>) {
    let tr = split.train_range();
    let te = split.test_range();
    let train = x.submatrix(tr.start, 0, tr.len(), x.ncols());
    let test = x.submatrix(te.start, 0, te.len(), x.ncols());
    if standardize {
        let s = Standardizer::fit(train);
        (s.transform(train), s.transform(test))
    } else {
        (train.to_owned(), test.to_owned())
    }
}

/// Per-delay capacities and MSEs on the test split, one ridge model per delay.
pub fn memory_scores(
    features: &Mat<f64>,
    clean: &[f64],
    split: &TrainTestSplit,
    readout: &ReadoutParams,
    tau_max: usize,
) -> Result<(Vec<f64>, Vec<f64>, serde_json::Value)> {
    split.validate(features.nrows())?;
    if clean.len() != features.nrows() {
        return Err(QrcError::LengthMismatch(features.nrows(), clean.len()));
    }
    if tau_max >= split.n_transient {
        return Err(QrcError::OutOfRange("delay longer than the transient".into()));
    }
    let (train, test) = split_features(features, split, readout.standardize);
    let (tr, te) = (split.train_range(), split.test_range());
    let mut caps = Vec::with_capacity(tau_max);
    let mut mses = Vec::with_capacity(tau_max);
    let mut summaries = Vec::with_capacity(tau_max);
    for tau in 1..=tau_max {
        let y_train: Vec<f64> = tr.clone().map(|n| clean[n - tau]).collect();
        let y_test: Vec<f64> = te.clone().map(|n| clean[n - tau]).collect();
        let model = ridge_fit(train.as_ref(), &y_train, readout.lambda)?;
        let pred = ridge_predict(&model, test.as_ref())?;
        caps.push(pearson_capacity(&y_test, &pred)?);
        mses.push(mse(&y_test, &pred)?);
        summaries.push(model.summary());
    }
    let readout_log = serde_json::json!({
        "standardized": readout.standardize,
        "ridge": summaries,
    });
    Ok((caps, mses, readout_log))
}

fn memory_metric_names(tau_max: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=tau_max).map(|t| format!("capacity_tau{t}")).collect();
    names.extend((1..=tau_max).map(|t| format!("mse_tau{t}")));
    names.push("total_capacity".into());
    names
}

fn memory_job(cfg: &ExperimentConfig, point: &GridPoint, seed: u64) -> Result<RealizationOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let real = sample_realization(cfg, point, &mut rng)?;
    let u = propagator(&real.hamiltonian, point.dt)?;
    let rc = ReservoirConfig::new(cfg.n_total, &cfg.aux_sites, point.dt)?;
    let channel = Channel::new(u.as_ref(), &rc)?;
    let (clean, encoded) = gen_memory_inputs(&cfg.memory_spec(rng.random()))?;
    let inputs = encoded.iter().map(|&e| encode_werner(e)).collect::<Result<Vec<_>>>()?;
    let records = channel.run(channel.initial_reservoir().as_ref(), &inputs)?;
    let x = feature_matrix(&records);
    let (caps, mses, readout) = memory_scores(&x, &clean, &cfg.split, &cfg.readout, cfg.tau_max)?;
    let total = total_memory_capacity(&caps)?;
    let mut metrics = caps;
    metrics.extend(mses);
    metrics.push(total);
    Ok(RealizationOutput {
        metrics,
        graph: real.graph.to_record(seed),
        readout,
    })
}

pub const MULTITASK_METRICS: [&str; 3] = ["and", "or", "xor"];

/// Rescaled test accuracies of independent AND, OR and XOR classifiers.
pub fn multitask_scores(
    features: &Mat<f64>,
    targets: [&[bool]; 3],
    split: &TrainTestSplit,
    readout: &ReadoutParams,
) -> Result<(Vec<f64>, serde_json::Value)> {
    split.validate(features.nrows())?;
    let (train, test) = split_features(features, split, readout.standardize);
    let (tr, te) = (split.train_range(), split.test_range());
    let params = SvmParams {
        length_scale: readout.euclidean_length_scale(features.ncols()),
        penalty: readout.penalty,
        ..SvmParams::default()
    };
    let mut accs = Vec::with_capacity(3);
    let mut summaries = Vec::with_capacity(3);
    for target in targets {
        if target.len() != features.nrows() {
            return Err(QrcError::LengthMismatch(features.nrows(), target.len()));
        }
        let labels: Vec<f64> = tr.clone().map(|n| if target[n] { 1.0 } else { -1.0 }).collect();
        let model = svm_fit(train.as_ref(), &labels, &params)?;
        let pred: Vec<bool> = svm_predict(&model, test.as_ref())?.iter().map(|&p| p > 0.0).collect();
        accs.push(accuracy_rescaled(&pred, &target[te.clone()])?);
        summaries.push(model.summary());
    }
    let readout_log = serde_json::json!({
        "standardized": readout.standardize,
        "kernel_distance": readout.kernel_distance,
        "svm": summaries,
    });
    Ok((accs, readout_log))
}

fn multitask_job(cfg: &ExperimentConfig, point: &GridPoint, seed: u64) -> Result<RealizationOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let real = sample_realization(cfg, point, &mut rng)?;
    let u = propagator(&real.hamiltonian, point.dt)?;
    let rc = ReservoirConfig::new(cfg.n_total, &cfg.aux_sites, point.dt)?;
    let channel = Channel::new(u.as_ref(), &rc)?;
    let task = gen_multitask(&MultitaskSpec {
        sequence_length: cfg.split.total(),
        seed: rng.random(),
    })?;
    let inputs: Vec<DensityMatrix> = task
        .bits_a
        .iter()
        .zip(&task.bits_b)
        .map(|(&a, &b)| encode_bits(a, b))
        .collect();
    let records = channel.run(channel.initial_reservoir().as_ref(), &inputs)?;
    let x = feature_matrix(&records);
    let (metrics, readout) = multitask_scores(&x, [&task.and, &task.or, &task.xor], &cfg.split, &cfg.readout)?;
    Ok(RealizationOutput {
        metrics,
        graph: real.graph.to_record(seed),
        readout,
    })
}

fn spectra_job(cfg: &ExperimentConfig, point: &GridPoint, seed: u64) -> Result<RealizationOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let real = sample_realization(cfg, point, &mut rng)?;
    let energies = sym_eigenvalues_real(real.hamiltonian.as_ref())?;
    let r = windowed_spacing_ratio(&energies, cfg.spectrum_window)?;
    Ok(RealizationOutput {
        metrics: vec![r],
        graph: real.graph.to_record(seed),
        readout: serde_json::Value::Null,
    })
}

fn diagnostics_job(
    cfg: &ExperimentConfig,
    point: &GridPoint,
    seed: u64,
    times: &[f64],
) -> Result<RealizationOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = sample_rrg(cfg.n_total, point.k, &mut rng)?;
    let spec = cfg.hamiltonian(point.delta_x, point.jx);
    let disorder = sample_disorder(&spec, cfg.n_total, &mut rng);
    let h = build_hamiltonian(&graph, &spec, &disorder)?;
    let eta: f64 = rng.random_range(0.0..=1.0);
    let n_aux = cfg.aux_sites.len();
    let rho_s = if n_aux == 2 {
        encode_werner(eta)?
    } else {
        DensityMatrix::maximally_mixed(n_aux)
    };
    let rho_r = DensityMatrix::basis_state(cfg.n_total - n_aux, 0);
    let subsystem: Vec<usize> = (0..n_aux).collect();
    let (chi, neg) = correlation_dynamics(h.as_ref(), &rho_s, &rho_r, times, &subsystem)?;
    let mut metrics = chi;
    metrics.extend(neg);
    Ok(RealizationOutput {
        metrics,
        graph: graph.to_record(seed),
        readout: serde_json::json!({ "eta": eta }),
    })
}

fn finish(
    cfg: &ExperimentConfig,
    started: Instant,
    (results, jobs): (Vec<SweepResult>, Vec<JobRecord>),
) -> ExperimentOutput {
    ExperimentOutput {
        config: cfg.clone(),
        fingerprint: cfg.fingerprint(),
        results,
        jobs,
        times: None,
        critical_disorder: None,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    }
}

fn check_task(cfg: &ExperimentConfig, task: Task) -> Result<()> {
    if cfg.task != task {
        return Err(QrcError::Config(format!(
            "configuration is for {:?}, not {task:?}",
            cfg.task
        )));
    }
    cfg.validate()
}

pub fn run_memory_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    check_task(cfg, Task::Memory)?;
    let started = Instant::now();
    let names = memory_metric_names(cfg.tau_max);
    let out = run_points(cfg, &cfg.grid(), &names, |p, s| memory_job(cfg, p, s))?;
    Ok(finish(cfg, started, out))
}

pub fn run_multitask_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    check_task(cfg, Task::Multitask)?;
    let started = Instant::now();
    let names: Vec<String> = MULTITASK_METRICS.iter().map(|s| s.to_string()).collect();
    let out = run_points(cfg, &cfg.grid(), &names, |p, s| multitask_job(cfg, p, s))?;
    let mut output = finish(cfg, started, out);
    if let Some(threshold) = cfg.critical_threshold {
        output.critical_disorder = Some(critical_from_results(cfg, &output.results, threshold)?);
    }
    Ok(output)
}

/// Critical disorder per degree from a completed multitask grid, using the
/// first `Δt` and `Jˣ` values.
fn critical_from_results(
    cfg: &ExperimentConfig,
    results: &[SweepResult],
    threshold: f64,
) -> Result<BTreeMap<usize, CriticalDisorder>> {
    critical_disorder_scan(&cfg.degrees, threshold, &cfg.delta_x, |k, d| {
        results
            .iter()
            .find(|r| r.point.k == k && r.point.dt == cfg.dts[0] && r.point.jx == cfg.jx[0] && r.point.delta_x == d)
            .and_then(|r| r.metric("xor"))
            .map(|m| m.mean)
            .ok_or_else(|| QrcError::Config(format!("no XOR result at k = {k}, Δx = {d}")))
    })
}

/// Critical-disorder scan that only runs grid points until each degree's XOR
/// accuracy crosses the threshold. Seeds match the full multitask grid.
pub fn run_critical_disorder_scan(
    cfg: &ExperimentConfig,
) -> Result<(BTreeMap<usize, CriticalDisorder>, Vec<SweepResult>)> {
    check_task(cfg, Task::Multitask)?;
    let threshold = cfg
        .critical_threshold
        .ok_or_else(|| QrcError::Config("critical_threshold is not set".into()))?;
    let grid = cfg.grid();
    let names: Vec<String> = MULTITASK_METRICS.iter().map(|s| s.to_string()).collect();
    let mut evaluated = Vec::new();
    let scan = critical_disorder_scan(&cfg.degrees, threshold, &cfg.delta_x, |k, d| {
        let point = *grid
            .iter()
            .find(|p| p.k == k && p.dt == cfg.dts[0] && p.jx == cfg.jx[0] && p.delta_x == d)
            .expect("point is on the grid");
        let (mut res, _) = run_points(cfg, &[point], &names, |p, s| multitask_job(cfg, p, s))?;
        let r = res.remove(0);
        let acc = r.metric("xor").map(|m| m.mean).unwrap_or(f64::NAN);
        log::info!("k = {k}, Δx = {d}: XOR accuracy {acc:.3}");
        evaluated.push(r);
        Ok(acc)
    })?;
    Ok((scan, evaluated))
}

pub fn run_spectra_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    check_task(cfg, Task::Spectra)?;
    let started = Instant::now();
    let names = vec!["r".to_string()];
    let out = run_points(cfg, &cfg.grid(), &names, |p, s| spectra_job(cfg, p, s))?;
    Ok(finish(cfg, started, out))
}

pub fn run_diagnostics_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    check_task(cfg, Task::Diagnostics)?;
    let started = Instant::now();
    let times = cfg.time_grid.times()?;
    let mut names: Vec<String> = (0..times.len()).map(|i| format!("chi_{i}")).collect();
    names.extend((0..times.len()).map(|i| format!("negativity_{i}")));
    let out = run_points(cfg, &cfg.grid(), &names, |p, s| diagnostics_job(cfg, p, s, &times))?;
    let mut output = finish(cfg, started, out);
    output.times = Some(times);
    Ok(output)
}

/// Dispatches on `cfg.task`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.task {
        Task::Memory => run_memory_experiment(cfg),
        Task::Multitask => run_multitask_experiment(cfg),
        Task::Spectra => run_spectra_experiment(cfg),
        Task::Diagnostics => run_diagnostics_experiment(cfg),
    }
}

fn csv_writer(dir: &Path, name: &str, written: &mut Vec<PathBuf>) -> Result<csv::Writer<File>> {
    let path = dir.join(name);
    let w = csv::Writer::from_path(&path)?;
    written.push(path);
    Ok(w)
}

fn metric_or_nan(r: &SweepResult, name: &str) -> MetricStat {
    r.metric(name).cloned().unwrap_or(MetricStat {
        name: name.into(),
        mean: f64::NAN,
        stderr: f64::NAN,
    })
}

/// Writes the per-metric CSV tables and `manifest.json` into `dir`.
pub fn write_outputs(output: &ExperimentOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let fp = &output.fingerprint;
    let s = |v: f64| v.to_string();
    match output.config.task {
        Task::Memory => {
            let mut w = csv_writer(dir, "memory.csv", &mut written)?;
            w.write_record([
                "delta_x", "j_x", "k", "dt", "tau", "capacity_mean", "capacity_stderr", "mse_mean",
                "mse_stderr", "n_realizations", "fingerprint",
            ])?;
            for r in &output.results {
                let p = &r.point;
                for tau in 1..=output.config.tau_max {
                    let c = metric_or_nan(r, &format!("capacity_tau{tau}"));
                    let m = metric_or_nan(r, &format!("mse_tau{tau}"));
                    w.write_record([
                        s(p.delta_x), s(p.jx), p.k.to_string(), s(p.dt), tau.to_string(),
                        s(c.mean), s(c.stderr), s(m.mean), s(m.stderr),
                        r.n_realizations.to_string(), fp.clone(),
                    ])?;
                }
            }
            w.flush()?;
            let mut w = csv_writer(dir, "memory_total.csv", &mut written)?;
            w.write_record([
                "delta_x", "j_x", "k", "dt", "total_capacity_mean", "total_capacity_stderr",
                "n_realizations", "fingerprint",
            ])?;
            for r in &output.results {
                let p = &r.point;
                let c = metric_or_nan(r, "total_capacity");
                w.write_record([
                    s(p.delta_x), s(p.jx), p.k.to_string(), s(p.dt), s(c.mean), s(c.stderr),
                    r.n_realizations.to_string(), fp.clone(),
                ])?;
            }
            w.flush()?;
        }
        Task::Multitask => {
            let mut w = csv_writer(dir, "multitask.csv", &mut written)?;
            w.write_record([
                "delta_x", "j_x", "k", "dt", "task", "accuracy_mean", "accuracy_stderr",
                "n_realizations", "fingerprint",
            ])?;
            for r in &output.results {
                let p = &r.point;
                for name in MULTITASK_METRICS {
                    let a = metric_or_nan(r, name);
                    w.write_record([
                        s(p.delta_x), s(p.jx), p.k.to_string(), s(p.dt), name.to_string(),
                        s(a.mean), s(a.stderr), r.n_realizations.to_string(), fp.clone(),
                    ])?;
                }
            }
            w.flush()?;
            if let Some(crit) = &output.critical_disorder {
                let mut w = csv_writer(dir, "critical_disorder.csv", &mut written)?;
                w.write_record(["k", "delta_x_c", "censored", "threshold", "fingerprint"])?;
                let th = output.config.critical_threshold.unwrap_or(f64::NAN);
                for (k, c) in crit {
                    w.write_record([
                        k.to_string(), s(c.value()), c.is_censored().to_string(), s(th), fp.clone(),
                    ])?;
                }
                w.flush()?;
            }
        }
        Task::Spectra => {
            let mut w = csv_writer(dir, "spectra.csv", &mut written)?;
            w.write_record(["delta_x", "j_x", "k", "r_mean", "r_stderr", "n_realizations", "fingerprint"])?;
            for r in &output.results {
                let p = &r.point;
                let m = metric_or_nan(r, "r");
                w.write_record([
                    s(p.delta_x), s(p.jx), p.k.to_string(), s(m.mean), s(m.stderr),
                    r.n_realizations.to_string(), fp.clone(),
                ])?;
            }
            w.flush()?;
        }
        Task::Diagnostics => {
            let mut w = csv_writer(dir, "diagnostics.csv", &mut written)?;
            w.write_record([
                "delta_x", "j_x", "k", "t", "chi_mean", "chi_stderr", "negativity_mean",
                "negativity_stderr", "n_realizations", "fingerprint",
            ])?;
            let times = output.times.as_deref().unwrap_or(&[]);
            for r in &output.results {
                let p = &r.point;
                for (i, &t) in times.iter().enumerate() {
                    let c = metric_or_nan(r, &format!("chi_{i}"));
                    let n = metric_or_nan(r, &format!("negativity_{i}"));
                    w.write_record([
                        s(p.delta_x), s(p.jx), p.k.to_string(), s(t), s(c.mean), s(c.stderr),
                        s(n.mean), s(n.stderr), r.n_realizations.to_string(), fp.clone(),
                    ])?;
                }
            }
            w.flush()?;
        }
    }
    let path = dir.join("manifest.json");
    serde_json::to_writer_pretty(BufWriter::new(File::create(&path)?), output)?;
    written.push(path);
    Ok(written)
}
