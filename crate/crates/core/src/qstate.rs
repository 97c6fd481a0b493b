//! Dense linear algebra over multi-qubit Hilbert spaces.
//!
//! Conventions: qubit 0 is the leftmost (most significant) tensor factor, so
//! the basis state `|b0 b1 ... b(n-1)>` sits at row `sum b_i 2^(n-1-i)`.
//! Spin up `|↑> = (1, 0)^T` is basis state 0 and carries `σᶻ = +1`.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};

use crate::c64;
use crate::error::{QrcError, Result};

pub type ComplexMatrix = Mat<c64>;

/// Hermiticity, trace and positivity tolerance for density matrices.
pub const STATE_TOL: f64 = 1e-10;
/// Trace drift above which [`DensityMatrix::renormalize`] rescales.
pub const TRACE_DRIFT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        let (o, z, i) = (c64::new(1.0, 0.0), c64::new(0.0, 0.0), c64::new(0.0, 1.0));
        let m = match self {
            Pauli::X => [[z, o], [o, z]],
            Pauli::Y => [[z, -i], [i, z]],
            Pauli::Z => [[o, z], [z, -o]],
        };
        Mat::from_fn(2, 2, |r, c| m[r][c])
    }
}

/// Bit mask of qubit `site` within an `n`-qubit basis index.
#[inline]
pub fn qubit_mask(site: usize, n_qubits: usize) -> usize {
    1 << (n_qubits - 1 - site)
}

/// `I ⊗ … ⊗ σ ⊗ … ⊗ I` with `σ` on `site`.
pub fn pauli_on_site(direction: Pauli, site: usize, n_qubits: usize) -> Result<ComplexMatrix> {
    if site >= n_qubits {
        return Err(QrcError::SiteOutOfRange { site, n_qubits });
    }
    let mut out = Mat::<c64>::identity(1, 1);
    for q in 0..n_qubits {
        let factor = if q == site {
            direction.matrix()
        } else {
            Mat::identity(2, 2)
        };
        out = kron(out.as_ref(), factor.as_ref());
    }
    Ok(out)
}

/// Kronecker (tensor) product `a ⊗ b`.
pub fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> ComplexMatrix {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn trace(m: MatRef<'_, c64>) -> c64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Largest entrywise `|m - m†|`.
pub fn hermiticity_error(m: MatRef<'_, c64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entrywise `|u u† - I|`.
pub fn unitarity_error(u: MatRef<'_, c64>) -> f64 {
    let prod = u * u.adjoint();
    max_abs_diff(prod.as_ref(), Mat::<c64>::identity(u.nrows(), u.nrows()).as_ref())
}

pub fn max_abs_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// `u m u†`.
pub fn conjugate_by(u: MatRef<'_, c64>, m: MatRef<'_, c64>) -> ComplexMatrix {
    let n = u.nrows();
    let mut tmp = Mat::<c64>::zeros(n, m.ncols());
    matmul(&mut tmp, Accum::Replace, u, m, c64::new(1.0, 0.0), Par::Seq);
    let mut out = Mat::<c64>::zeros(n, n);
    matmul(&mut out, Accum::Replace, &tmp, u.adjoint(), c64::new(1.0, 0.0), Par::Seq);
    out
}

/// Replaces `m` by `(m + m†) / 2`.
pub fn hermitize(m: &mut ComplexMatrix) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
        m[(j, j)] = c64::new(m[(j, j)].re, 0.0);
    }
}

/// A validated `n`-qubit density matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (all to
    /// [`STATE_TOL`]).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Checks only that the shape is `2^n × 2^n`.
    pub fn from_matrix_unchecked(matrix: ComplexMatrix) -> Result<Self> {
        let (r, c) = (matrix.nrows(), matrix.ncols());
        if r != c {
            return Err(QrcError::NotSquare { rows: r, cols: c });
        }
        if r == 0 || !r.is_power_of_two() {
            return Err(QrcError::DimensionMismatch(format!(
                "dimension {r} is not a power of two"
            )));
        }
        Ok(Self {
            n_qubits: r.trailing_zeros() as usize,
            matrix,
        })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let mut m = Mat::<c64>::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = c64::new(1.0 / d as f64, 0.0);
        }
        Self { n_qubits, matrix: m }
    }

    /// `|b><b|` for computational basis index `index`.
    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        let d = 1usize << n_qubits;
        let mut m = Mat::<c64>::zeros(d, d);
        m[(index, index)] = c64::new(1.0, 0.0);
        Self { n_qubits, matrix: m }
    }

    /// `|ψ><ψ|` for a normalized state vector.
    pub fn pure(psi: &[c64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(QrcError::InvalidState(format!("state vector norm² = {norm}")));
        }
        let m = Mat::from_fn(psi.len(), psi.len(), |i, j| psi[i] * psi[j].conj());
        Self::from_matrix_unchecked(m)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn as_ref(&self) -> MatRef<'_, c64> {
        self.matrix.as_ref()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        trace(self.matrix.as_ref()).re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let evals = herm_eigenvalues(self.matrix.as_ref())?;
        Ok(evals[0])
    }

    pub fn validate(&self) -> Result<()> {
        let herm = hermiticity_error(self.as_ref());
        if herm > STATE_TOL {
            return Err(QrcError::InvalidState(format!("not Hermitian ({herm:e})")));
        }
        let tr = trace(self.as_ref());
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(QrcError::InvalidState(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue()?;
        if min < -STATE_TOL {
            return Err(QrcError::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Rescales to unit trace if the drift exceeds [`TRACE_DRIFT_TOL`].
    pub fn renormalize(&mut self) {
        renormalize_trace(&mut self.matrix);
    }

    /// `u ρ u†`.
    pub fn evolve(&self, u: MatRef<'_, c64>) -> Self {
        Self {
            n_qubits: self.n_qubits,
            matrix: conjugate_by(u, self.as_ref()),
        }
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Self {
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: kron(self.as_ref(), other.as_ref()),
        }
    }

    /// `Tr[ρ O]`.
    pub fn expectation(&self, op: MatRef<'_, c64>) -> c64 {
        let n = self.dim();
        let mut acc = c64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.matrix[(i, k)] * op[(k, i)];
            }
        }
        acc
    }
}

pub(crate) fn renormalize_trace(m: &mut ComplexMatrix) {
    let tr = trace(m.as_ref()).re;
    if (tr - 1.0).abs() > TRACE_DRIFT_TOL {
        let s = 1.0 / tr;
        m.for_each_mut(|x| *x *= s);
    }
}

fn check_subsystem(sites: &[usize], n_qubits: usize) -> Result<usize> {
    let mut mask = 0usize;
    for &s in sites {
        if s >= n_qubits {
            return Err(QrcError::SiteOutOfRange { site: s, n_qubits });
        }
        let m = qubit_mask(s, n_qubits);
        if mask & m != 0 {
            return Err(QrcError::InvalidSubsystem(format!("site {s} listed twice")));
        }
        mask |= m;
    }
    Ok(mask)
}

/// For each value of the listed qubits (in the given order, first listed =
/// most significant), the global index bits it contributes.
pub(crate) fn scatter_table(sites: &[usize], n_qubits: usize) -> Vec<usize> {
    let m = sites.len();
    (0..1usize << m)
        .map(|local| {
            sites.iter().enumerate().fold(0, |acc, (pos, &s)| {
                if local & (1 << (m - 1 - pos)) != 0 {
                    acc | qubit_mask(s, n_qubits)
                } else {
                    acc
                }
            })
        })
        .collect()
}

/// Reduced state on `keep` (tensor order ascending by site index).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(QrcError::InvalidSubsystem("empty keep-set".into()));
    }
    let n = rho.n_qubits();
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    check_subsystem(&keep, n)?;
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let kept_idx = scatter_table(&keep, n);
    let traced_idx = scatter_table(&traced, n);
    let dk = kept_idx.len();
    let m = rho.as_ref();
    let out = Mat::from_fn(dk, dk, |i, j| {
        traced_idx
            .iter()
            .map(|&t| m[(kept_idx[i] | t, kept_idx[j] | t)])
            .sum()
    });
    DensityMatrix::from_matrix_unchecked(out)
}

/// Transposes the indices of the listed qubits.
pub fn partial_transpose(rho: &DensityMatrix, subsystem: &[usize]) -> Result<ComplexMatrix> {
    let n = rho.n_qubits();
    let mask = check_subsystem(subsystem, n)?;
    let m = rho.as_ref();
    Ok(Mat::from_fn(rho.dim(), rho.dim(), |i, j| {
        let i2 = (i & !mask) | (j & mask);
        let j2 = (j & !mask) | (i & mask);
        m[(i2, j2)]
    }))
}

/// Sum of singular values.
pub fn trace_norm(m: MatRef<'_, c64>) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(QrcError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    if hermiticity_error(m) <= STATE_TOL {
        return Ok(herm_eigenvalues(m)?.iter().map(|e| e.abs()).sum());
    }
    let sv = m.singular_values().map_err(|_| QrcError::EigenFailed)?;
    Ok(sv.iter().sum())
}

/// Hilbert–Schmidt (Frobenius) norm.
pub fn hs_norm(m: MatRef<'_, c64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

/// Eigenvalues ascending, eigenvectors as columns of a unitary matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(f(E)) V†`.
    pub fn apply_function(&self, f: impl Fn(f64) -> c64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = self.dim();
        let mut scaled = v.clone();
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            let fe = f(e);
            for i in 0..n {
                scaled[(i, j)] *= fe;
            }
        }
        let mut out = Mat::<c64>::zeros(n, n);
        matmul(&mut out, Accum::Replace, &scaled, v.adjoint(), c64::new(1.0, 0.0), Par::Seq);
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_function(|e| c64::new(e, 0.0))
    }
}

fn check_hermitian(h: MatRef<'_, c64>) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(QrcError::NotSquare {
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    let err = hermiticity_error(h);
    if err > STATE_TOL {
        return Err(QrcError::NotHermitian(err));
    }
    Ok(())
}

fn is_real(h: MatRef<'_, c64>) -> bool {
    (0..h.ncols()).all(|j| (0..h.nrows()).all(|i| h[(i, j)].im == 0.0))
}

/// Hermitian eigendecomposition. Purely real input takes the real symmetric
/// path.
pub fn herm_eig(h: MatRef<'_, c64>) -> Result<SpectralDecomposition> {
    check_hermitian(h)?;
    let (eigenvalues, eigenvectors) = if is_real(h) {
        let re = Mat::<f64>::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)].re);
        let evd = re
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| QrcError::EigenFailed)?;
        let vals = evd.S().column_vector().iter().copied().collect();
        let u = evd.U();
        let vecs = Mat::from_fn(u.nrows(), u.ncols(), |i, j| c64::new(u[(i, j)], 0.0));
        (vals, vecs)
    } else {
        let evd = h
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| QrcError::EigenFailed)?;
        let vals = evd.S().column_vector().iter().map(|z| z.re).collect();
        (vals, evd.U().to_owned())
    };
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Real symmetric eigendecomposition.
pub fn sym_eig_real(h: MatRef<'_, f64>) -> Result<SpectralDecomposition> {
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| QrcError::EigenFailed)?;
    let u = evd.U();
    Ok(SpectralDecomposition {
        eigenvalues: evd.S().column_vector().iter().copied().collect(),
        eigenvectors: Mat::from_fn(u.nrows(), u.ncols(), |i, j| c64::new(u[(i, j)], 0.0)),
    })
}

/// Eigenvalues only, ascending.
pub fn herm_eigenvalues(h: MatRef<'_, c64>) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    if is_real(h) {
        let re = Mat::<f64>::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)].re);
        return sym_eigenvalues_real(re.as_ref());
    }
    let vals = h
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| QrcError::EigenFailed)?;
    Ok(vals)
}

pub fn sym_eigenvalues_real(h: MatRef<'_, f64>) -> Result<Vec<f64>> {
    h.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| QrcError::EigenFailed)
}

/// `exp(-i H dt)` from a spectral decomposition of `H`.
pub fn evolution_operator(spec: &SpectralDecomposition, dt: f64) -> ComplexMatrix {
    spec.apply_function(|e| c64::from_polar(1.0, -e * dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64) -> c64 {
        c64::new(re, 0.0)
    }

    fn diag(vals: &[f64]) -> ComplexMatrix {
        Mat::from_fn(vals.len(), vals.len(), |i, j| if i == j { c(vals[i]) } else { c(0.0) })
    }

    pub(crate) fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let a = Mat::<c64>::from_fn(n, n, |_, _| {
            c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let mut h = &a + a.adjoint();
        hermitize(&mut h);
        h
    }

    pub(crate) fn random_density(n_qubits: usize, rng: &mut impl Rng) -> DensityMatrix {
        let d = 1 << n_qubits;
        let a = Mat::<c64>::from_fn(d, d, |_, _| {
            c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let mut m = &a * a.adjoint();
        let tr = trace(m.as_ref()).re;
        m.for_each_mut(|x| *x /= tr);
        hermitize(&mut m);
        DensityMatrix::new(m).unwrap()
    }

    fn singlet() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&[c(0.0), c(s), c(-s), c(0.0)]).unwrap()
    }

    #[test]
    fn pauli_examples() {
        let z = pauli_on_site(Pauli::Z, 0, 1).unwrap();
        assert_eq!(max_abs_diff(z.as_ref(), diag(&[1.0, -1.0]).as_ref()), 0.0);
        let x0 = pauli_on_site(Pauli::X, 0, 2).unwrap();
        let expected = kron(Pauli::X.matrix().as_ref(), Mat::<c64>::identity(2, 2).as_ref());
        assert_eq!(max_abs_diff(x0.as_ref(), expected.as_ref()), 0.0);
        assert_eq!(x0[(0, 2)], c(1.0));
        let z1 = pauli_on_site(Pauli::Z, 1, 2).unwrap();
        assert_eq!(max_abs_diff(z1.as_ref(), diag(&[1.0, -1.0, 1.0, -1.0]).as_ref()), 0.0);
        assert!(matches!(
            pauli_on_site(Pauli::Z, 2, 2),
            Err(QrcError::SiteOutOfRange { site: 2, n_qubits: 2 })
        ));
    }

    #[test]
    fn kron_examples() {
        let i2 = Mat::<c64>::identity(2, 2);
        let i4 = kron(i2.as_ref(), i2.as_ref());
        assert_eq!(max_abs_diff(i4.as_ref(), Mat::<c64>::identity(4, 4).as_ref()), 0.0);
        let z = diag(&[1.0, -1.0]);
        let zz = kron(z.as_ref(), z.as_ref());
        assert_eq!(max_abs_diff(zz.as_ref(), diag(&[1.0, -1.0, -1.0, 1.0]).as_ref()), 0.0);
        let up = diag(&[1.0, 0.0]);
        let half = diag(&[0.5, 0.5]);
        let p = kron(up.as_ref(), half.as_ref());
        assert_eq!(max_abs_diff(p.as_ref(), diag(&[0.5, 0.5, 0.0, 0.0]).as_ref()), 0.0);
    }

    #[test]
    fn partial_trace_of_singlet_is_maximally_mixed() {
        let r = partial_trace(&singlet(), &[1]).unwrap();
        assert!(max_abs_diff(r.as_ref(), diag(&[0.5, 0.5]).as_ref()) < 1e-15);
        assert!(matches!(
            partial_trace(&singlet(), &[]),
            Err(QrcError::InvalidSubsystem(_))
        ));
    }

    #[test]
    fn partial_trace_matches_index_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = random_density(3, &mut rng);
        let r = partial_trace(&rho, &[0, 2]).unwrap();
        // explicit sum over the middle qubit
        for a in 0..2 {
            for b in 0..2 {
                for a2 in 0..2 {
                    for b2 in 0..2 {
                        let mut acc = c(0.0);
                        for j in 0..2 {
                            acc += rho.matrix()[(a * 4 + j * 2 + b, a2 * 4 + j * 2 + b2)];
                        }
                        assert!((r.matrix()[(a * 2 + b, a2 * 2 + b2)] - acc).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_transpose_examples() {
        let pt = partial_transpose(&singlet(), &[1]).unwrap();
        let ev = herm_eigenvalues(pt.as_ref()).unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((trace_norm(pt.as_ref()).unwrap() - 2.0).abs() < 1e-12);

        let mixed = DensityMatrix::maximally_mixed(2);
        let pt = partial_transpose(&mixed, &[0]).unwrap();
        assert_eq!(max_abs_diff(pt.as_ref(), mixed.as_ref()), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let prod = random_density(1, &mut rng).tensor(&random_density(1, &mut rng));
        let before = herm_eigenvalues(prod.as_ref()).unwrap();
        let after = herm_eigenvalues(partial_transpose(&prod, &[1]).unwrap().as_ref()).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_density(3, &mut rng);
        assert!((trace_norm(rho.as_ref()).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(trace_norm(Mat::<c64>::zeros(4, 4).as_ref()).unwrap(), 0.0);
        assert!(trace_norm(Mat::<c64>::zeros(2, 3).as_ref()).is_err());
        assert!((hs_norm(Mat::<c64>::identity(4, 4).as_ref()) - 2.0).abs() < 1e-15);
        assert_eq!(hs_norm(Mat::<c64>::zeros(3, 3).as_ref()), 0.0);
        assert!((hs_norm(Pauli::Z.matrix().as_ref()) - 2f64.sqrt()).abs() < 1e-15);
        // non-Hermitian input goes through the SVD
        let m = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { c(3.0) } else { c(0.0) });
        assert!((trace_norm(m.as_ref()).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eig_examples() {
        let e = herm_eig(Pauli::X.matrix().as_ref()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14 && (e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let z = Pauli::Z.matrix();
        let e = herm_eig(kron(z.as_ref(), z.as_ref()).as_ref()).unwrap();
        for (a, b) in e.eigenvalues.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        let y = Pauli::Y.matrix();
        let e = herm_eig(y.as_ref()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);

        let mut nonherm = Pauli::X.matrix();
        nonherm[(0, 1)] = c(2.0);
        assert!(matches!(herm_eig(nonherm.as_ref()), Err(QrcError::NotHermitian(_))));
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let h = random_hermitian(8, &mut rng);
            let e = herm_eig(h.as_ref()).unwrap();
            let rec = e.reconstruct();
            let rel = hs_norm((&rec - &h).as_ref()) / hs_norm(h.as_ref());
            assert!(rel < 1e-9, "{rel}");
            let vv = e.eigenvectors.adjoint() * &e.eigenvectors;
            assert!(max_abs_diff(vv.as_ref(), Mat::<c64>::identity(8, 8).as_ref()) < 1e-10);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn evolution_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = random_hermitian(8, &mut rng);
        let e = herm_eig(h.as_ref()).unwrap();
        let u0 = evolution_operator(&e, 0.0);
        assert!(max_abs_diff(u0.as_ref(), Mat::<c64>::identity(8, 8).as_ref()) < 1e-12);
        for dt in [0.3, 3.0, 17.0] {
            assert!(unitarity_error(evolution_operator(&e, dt).as_ref()) < 1e-9);
        }
        let ez = herm_eig(Pauli::Z.matrix().as_ref()).unwrap();
        let u = evolution_operator(&ez, FRAC_PI_2);
        assert!((u[(0, 0)] - c64::from_polar(1.0, -FRAC_PI_2)).norm() < 1e-14);
        assert!((u[(1, 1)] - c64::from_polar(1.0, FRAC_PI_2)).norm() < 1e-14);
        assert!(u[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn evolution_is_a_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h = random_hermitian(16, &mut rng);
        let e = herm_eig(h.as_ref()).unwrap();
        let (t1, t2) = (0.7, 2.9);
        let prod = evolution_operator(&e, t1) * evolution_operator(&e, t2);
        let joint = evolution_operator(&e, t1 + t2);
        assert!(max_abs_diff(prod.as_ref(), joint.as_ref()) < 1e-9);
    }

    #[test]
    fn unitary_conjugation_keeps_state_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = random_hermitian(8, &mut rng);
        let u = evolution_operator(&herm_eig(h.as_ref()).unwrap(), 1.3);
        let rho = random_density(3, &mut rng);
        let out = rho.evolve(u.as_ref());
        out.validate().unwrap();
    }

    #[test]
    fn density_validation_rejects_bad_states() {
        assert!(DensityMatrix::new(diag(&[0.5, 0.4])).is_err());
        assert!(DensityMatrix::new(diag(&[1.5, -0.5])).is_err());
        let mut m = diag(&[0.5, 0.5]);
        m[(0, 1)] = c(0.1);
        assert!(DensityMatrix::new(m).is_err());
        assert!(DensityMatrix::from_matrix_unchecked(Mat::zeros(3, 3)).is_err());
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    pub(crate) use super::tests::{random_density, random_hermitian};
}
