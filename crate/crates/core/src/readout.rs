//! Classical readouts and their metrics.
//!
//! Feature matrices are `rows = time steps`, `cols = observables`.

use faer::{Mat, MatRef, Side};
use faer::linalg::solvers::Solve;
use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};

/// Variance below which a Pearson capacity is reported as 0.
pub const VARIANCE_FLOOR: f64 = 1e-14;

/// Train/test layout of one driven sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainTestSplit {
    pub n_transient: usize,
    pub n_train: usize,
    pub n_test: usize,
}

impl Default for TrainTestSplit {
    fn default() -> Self {
        Self {
            n_transient: 700,
            n_train: 1500,
            n_test: 150,
        }
    }
}

impl TrainTestSplit {
    pub fn total(&self) -> usize {
        self.n_transient + self.n_train + self.n_test
    }

    pub fn train_range(&self) -> std::ops::Range<usize> {
        self.n_transient..self.n_transient + self.n_train
    }

    pub fn test_range(&self) -> std::ops::Range<usize> {
        let start = self.n_transient + self.n_train;
        start..start + self.n_test
    }

    pub fn validate(&self, available: usize) -> Result<()> {
        if self.n_transient == 0 || self.n_train == 0 || self.n_test == 0 {
            return Err(QrcError::Config("split sizes must be positive".into()));
        }
        if self.total() > available {
            return Err(QrcError::Config(format!(
                "split needs {} steps, sequence has {available}",
                self.total()
            )));
        }
        Ok(())
    }
}

/// Per-column affine map to zero mean and unit variance, fitted on training
/// rows. Constant columns are only centered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: MatRef<'_, f64>) -> Self {
        let (n, d) = (x.nrows(), x.ncols());
        let mut mean = vec![0.0; d];
        let mut scale = vec![1.0; d];
        for j in 0..d {
            let m = (0..n).map(|i| x[(i, j)]).sum::<f64>() / n as f64;
            let var = (0..n).map(|i| (x[(i, j)] - m).powi(2)).sum::<f64>() / n as f64;
            mean[j] = m;
            if var.sqrt() > 1e-12 {
                scale[j] = var.sqrt();
            }
        }
        Self { mean, scale }
    }

    pub fn transform(&self, x: MatRef<'_, f64>) -> Mat<f64> {
        Mat::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - self.mean[j]) / self.scale[j])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub regularization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeSummary {
    pub weights_norm: f64,
    pub lambda: f64,
}

impl RidgeModel {
    pub fn summary(&self) -> RidgeSummary {
        RidgeSummary {
            weights_norm: self.weights.iter().map(|w| w * w).sum::<f64>().sqrt(),
            lambda: self.regularization,
        }
    }
}

/// Minimizes `‖y − Xw − b‖² + λ‖w‖²` with an unpenalized bias, through the
/// normal equations of the centered problem.
pub fn ridge_fit(x: MatRef<'_, f64>, y: &[f64], lambda: f64) -> Result<RidgeModel> {
    let (n, d) = (x.nrows(), x.ncols());
    if n == 0 {
        return Err(QrcError::TooShort { needed: 1, got: 0 });
    }
    if y.len() != n {
        return Err(QrcError::LengthMismatch(n, y.len()));
    }
    if !(lambda > 0.0) {
        return Err(QrcError::OutOfRange(format!("ridge λ must be positive, got {lambda}")));
    }
    let x_mean: Vec<f64> = (0..d)
        .map(|j| (0..n).map(|i| x[(i, j)]).sum::<f64>() / n as f64)
        .collect();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let xc = Mat::from_fn(n, d, |i, j| x[(i, j)] - x_mean[j]);
    let yc = Mat::from_fn(n, 1, |i, _| y[i] - y_mean);

    let mut gram = xc.transpose() * &xc;
    for j in 0..d {
        gram[(j, j)] += lambda;
    }
    let rhs = xc.transpose() * &yc;
    let llt = gram
        .llt(Side::Lower)
        .map_err(|e| QrcError::Singular(format!("{e:?}")))?;
    let w = llt.solve(&rhs);
    let weights: Vec<f64> = (0..d).map(|j| w[(j, 0)]).collect();
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(QrcError::Singular("non-finite ridge weights".into()));
    }
    let bias = y_mean - weights.iter().zip(&x_mean).map(|(w, m)| w * m).sum::<f64>();
    Ok(RidgeModel {
        weights,
        bias,
        regularization: lambda,
    })
}

pub fn ridge_predict(model: &RidgeModel, x: MatRef<'_, f64>) -> Result<Vec<f64>> {
    if x.ncols() != model.weights.len() {
        return Err(QrcError::DimensionMismatch(format!(
            "{} feature columns, model has {} weights",
            x.ncols(),
            model.weights.len()
        )));
    }
    Ok((0..x.nrows())
        .map(|i| {
            model.bias
                + model
                    .weights
                    .iter()
                    .enumerate()
                    .map(|(j, w)| w * x[(i, j)])
                    .sum::<f64>()
        })
        .collect())
}

/// Squared Pearson correlation `cov²(y, ŷ) / (var y · var ŷ)`.
pub fn pearson_capacity(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() {
        return Err(QrcError::LengthMismatch(y.len(), yhat.len()));
    }
    if y.len() < 2 {
        return Err(QrcError::TooShort {
            needed: 2,
            got: y.len(),
        });
    }
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let mh = yhat.iter().sum::<f64>() / n;
    let (mut cov, mut vy, mut vh) = (0.0, 0.0, 0.0);
    for (a, b) in y.iter().zip(yhat) {
        cov += (a - my) * (b - mh);
        vy += (a - my).powi(2);
        vh += (b - mh).powi(2);
    }
    let (cov, vy, vh) = (cov / n, vy / n, vh / n);
    if vy < VARIANCE_FLOOR || vh < VARIANCE_FLOOR {
        return Ok(0.0);
    }
    Ok((cov * cov / (vy * vh)).clamp(0.0, 1.0))
}

pub fn mse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() {
        return Err(QrcError::LengthMismatch(y.len(), yhat.len()));
    }
    if y.is_empty() {
        return Err(QrcError::TooShort { needed: 1, got: 0 });
    }
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64)
}

/// `max(0, 2·(fraction correct − 1/2))`.
pub fn accuracy_rescaled(predicted: &[bool], target: &[bool]) -> Result<f64> {
    if predicted.len() != target.len() {
        return Err(QrcError::LengthMismatch(predicted.len(), target.len()));
    }
    if target.is_empty() {
        return Err(QrcError::TooShort { needed: 1, got: 0 });
    }
    let correct = predicted.iter().zip(target).filter(|(a, b)| a == b).count();
    let frac = correct as f64 / target.len() as f64;
    Ok((2.0 * (frac - 0.5)).max(0.0))
}

/// Settings of the SMO solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub length_scale: f64,
    pub penalty: f64,
    pub tolerance: f64,
    /// Iteration budget in units of the training-set size.
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            length_scale: 1.0,
            penalty: 1.0,
            tolerance: 1e-3,
            max_passes: 10_000,
        }
    }
}

/// `exp(−‖a − b‖² / 2l²)`.
pub fn rbf_kernel(a: &[f64], b: &[f64], length_scale: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (-d2 / (2.0 * length_scale * length_scale)).exp()
}

fn row(x: MatRef<'_, f64>, i: usize) -> Vec<f64> {
    (0..x.ncols()).map(|j| x[(i, j)]).collect()
}

/// RBF soft-margin classifier in dual form.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    pub support_vectors: Mat<f64>,
    /// `αᵢ ∈ (0, C]` for each support vector.
    pub dual_coefficients: Vec<f64>,
    /// `±1` label of each support vector.
    pub labels: Vec<f64>,
    pub bias: f64,
    pub length_scale: f64,
    pub penalty: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmSummary {
    pub n_support: usize,
    pub length_scale: f64,
    pub penalty: f64,
    pub bias: f64,
    pub converged: bool,
}

impl KernelModel {
    pub fn decision_function(&self, x: MatRef<'_, f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.support_vectors.ncols() {
            return Err(QrcError::DimensionMismatch(format!(
                "{} feature columns, model trained on {}",
                x.ncols(),
                self.support_vectors.ncols()
            )));
        }
        let svs: Vec<Vec<f64>> = (0..self.support_vectors.nrows())
            .map(|s| row(self.support_vectors.as_ref(), s))
            .collect();
        Ok((0..x.nrows())
            .map(|i| {
                let xi = row(x, i);
                self.bias
                    + svs
                        .iter()
                        .enumerate()
                        .map(|(s, sv)| {
                            self.dual_coefficients[s]
                                * self.labels[s]
                                * rbf_kernel(sv, &xi, self.length_scale)
                        })
                        .sum::<f64>()
            })
            .collect())
    }

    /// `Σα − ½ ΣΣ αᵢαⱼ yᵢyⱼ K(xᵢ, xⱼ)` (non-support vectors have α = 0).
    pub fn dual_objective(&self) -> f64 {
        let m = self.support_vectors.nrows();
        let svs: Vec<Vec<f64>> = (0..m).map(|s| row(self.support_vectors.as_ref(), s)).collect();
        let mut quad = 0.0;
        for a in 0..m {
            for b in 0..m {
                quad += self.dual_coefficients[a]
                    * self.dual_coefficients[b]
                    * self.labels[a]
                    * self.labels[b]
                    * rbf_kernel(&svs[a], &svs[b], self.length_scale);
            }
        }
        self.dual_coefficients.iter().sum::<f64>() - 0.5 * quad
    }

    pub fn summary(&self) -> SvmSummary {
        SvmSummary {
            n_support: self.dual_coefficients.len(),
            length_scale: self.length_scale,
            penalty: self.penalty,
            bias: self.bias,
            converged: self.converged,
        }
    }
}

/// Full RBF Gram matrix of the rows of `x`.
fn gram_matrix(x: MatRef<'_, f64>, length_scale: f64) -> Vec<Vec<f64>> {
    let n = x.nrows();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| row(x, i)).collect();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        k[i][i] = 1.0;
        for j in 0..i {
            let v = rbf_kernel(&rows[i], &rows[j], length_scale);
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

/// Soft-margin SVM by sequential minimal optimization with second-order
/// working-set selection, no shrinking.
pub fn svm_fit(x: MatRef<'_, f64>, labels: &[f64], params: &SvmParams) -> Result<KernelModel> {
    let n = x.nrows();
    if labels.len() != n {
        return Err(QrcError::LengthMismatch(n, labels.len()));
    }
    if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(QrcError::OutOfRange("labels must be ±1".into()));
    }
    if !labels.contains(&1.0) || !labels.contains(&-1.0) {
        return Err(QrcError::SingleClass);
    }
    if !(params.penalty > 0.0 && params.length_scale > 0.0) {
        return Err(QrcError::OutOfRange("C and l must be positive".into()));
    }
    let c = params.penalty;
    let y = labels;
    let k = gram_matrix(x, params.length_scale);
    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀQα − eᵀα with Q = yyᵀ∘K
    let mut grad = vec![-1.0; n];
    let tau = 1e-12;
    let max_iter = params.max_passes.saturating_mul(n.max(1));
    let mut iterations = 0;
    let mut converged = false;

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    while iterations < max_iter {
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && -y[t] * grad[t] >= g_max {
                g_max = -y[t] * grad[t];
                i_sel = t;
            }
        }
        let mut g_max2 = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        let mut obj_min = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            g_max2 = g_max2.max(y[t] * grad[t]);
            if i_sel == usize::MAX {
                continue;
            }
            let b = g_max + y[t] * grad[t];
            if b > 0.0 {
                let a = k[i_sel][i_sel] + k[t][t] - 2.0 * k[i_sel][t];
                let a = if a > 0.0 { a } else { tau };
                let obj = -(b * b) / a;
                if obj <= obj_min {
                    obj_min = obj;
                    j_sel = t;
                }
            }
        }
        if g_max + g_max2 < params.tolerance || i_sel == usize::MAX || j_sel == usize::MAX {
            converged = true;
            break;
        }
        iterations += 1;
        let (i, j) = (i_sel, j_sel);
        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * k[i][j];
        if y[i] != y[j] {
            let quad = k[i][i] + k[j][j] + 2.0 * qij;
            let quad = if quad > 0.0 { quad } else { tau };
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = k[i][i] + k[j][j] - 2.0 * qij;
            let quad = if quad > 0.0 { quad } else { tau };
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (dai, daj) = (alpha[i] - old_ai, alpha[j] - old_aj);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k[t][i] * dai + y[j] * k[t][j] * daj);
        }
    }
    if !converged {
        log::warn!("SMO stopped after {iterations} iterations without meeting tolerance");
    }

    // offset from free vectors, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };

    let sv: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    Ok(KernelModel {
        support_vectors: Mat::from_fn(sv.len(), x.ncols(), |r, col| x[(sv[r], col)]),
        dual_coefficients: sv.iter().map(|&t| alpha[t]).collect(),
        labels: sv.iter().map(|&t| y[t]).collect(),
        bias: -rho,
        length_scale: params.length_scale,
        penalty: c,
        iterations,
        converged,
    })
}

/// Sign of the decision function; exact zeros map to `+1`.
pub fn svm_predict(model: &KernelModel, x: MatRef<'_, f64>) -> Result<Vec<f64>> {
    Ok(model
        .decision_function(x)?
        .into_iter()
        .map(|f| if f >= 0.0 { 1.0 } else { -1.0 })
        .collect())
}
