use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::{Mat, MatRef, Par};

use super::matrix::{gemm, orthogonality_error, SymmetricMatrix};
use crate::error::{Error, Result};

/// Eigendecomposition of a real symmetric operator.
///
/// Eigenvalues are ascending; column `k` of `eigenvectors` pairs with
/// eigenvalue `k`. Each column is oriented so that its largest-magnitude
/// component is positive (the first such index wins ties).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<f64>,
}

impl Spectrum {
    /// Assembles a spectrum from parts, checking shape, ordering and
    /// orthogonality.
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: Mat<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        if n == 0 || eigenvectors.nrows() != n || eigenvectors.ncols() != n {
            return Err(Error::Dimension(format!(
                "{} eigenvalues with a {}x{} eigenvector matrix",
                n,
                eigenvectors.nrows(),
                eigenvectors.ncols()
            )));
        }
        if eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite eigenvalue".into()));
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput("eigenvalues not ascending".into()));
        }
        let err = orthogonality_error(eigenvectors.as_ref());
        if err > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "eigenvectors not orthonormal (error {err:e})"
            )));
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    /// Spectrum of a diagonal operator; eigenvectors are a permutation.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite diagonal entry".into()));
        }
        let mut order: Vec<usize> = (0..diag.len()).collect();
        order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
        let n = diag.len();
        let mut vecs = Mat::zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            vecs[(i, k)] = 1.0;
        }
        Ok(Self {
            eigenvalues: order.iter().map(|&i| diag[i]).collect(),
            eigenvectors: vecs,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> MatRef<'_, f64> {
        self.eigenvectors.as_ref()
    }

    /// Eigenvector `k` as a contiguous slice.
    pub fn eigenvector(&self, k: usize) -> &[f64] {
        self.eigenvectors.col_as_slice(k)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn max_abs(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    pub fn into_parts(self) -> (Vec<f64>, Mat<f64>) {
        (self.eigenvalues, self.eigenvectors)
    }

    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let n = self.dim();
        let v = self.eigenvectors();
        let scaled = Mat::from_fn(n, n, |i, k| v[(i, k)] * self.eigenvalues[k]);
        let out = gemm(scaled.as_ref(), v.transpose());
        SymmetricMatrix::new_unchecked(super::matrix::symmetrize(out))
    }

    /// Operator expressed in this eigenbasis, `Vᵀ A V`.
    pub fn to_eigenbasis(&self, op: &SymmetricMatrix) -> SymmetricMatrix {
        op.rotate_into(self.eigenvectors())
    }
}

/// Eigendecomposition of a dense symmetric matrix.
///
/// Runs single-threaded so the output does not depend on the worker count.
pub fn eig_sym(matrix: &SymmetricMatrix) -> Result<Spectrum> {
    let a = matrix.as_ref();
    let n = matrix.dim();
    for j in 0..n {
        for i in 0..n {
            if !a[(i, j)].is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite entry {} at ({i}, {j})",
                    a[(i, j)]
                )));
            }
        }
    }
    let mut s = Diag::<f64>::zeros(n);
    let mut u = Mat::<f64>::zeros(n, n);
    let par = Par::Seq;
    let mut mem = MemBuffer::new(evd::self_adjoint_evd_scratch::<f64>(
        n,
        ComputeEigenvectors::Yes,
        par,
        Default::default(),
    ));
    evd::self_adjoint_evd(
        a,
        s.as_mut(),
        Some(u.as_mut()),
        par,
        MemStack::new(&mut mem),
        Default::default(),
    )
    .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;

    let mut values: Vec<f64> = (0..n).map(|k| s[k]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    if values.windows(2).any(|w| w[0] > w[1]) {
        order.sort_by(|&x, &y| values[x].total_cmp(&values[y]));
        values = order.iter().map(|&k| values[k]).collect();
    }
    let mut vecs = Mat::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut pivot = 0usize;
        let mut best = -1.0f64;
        for i in 0..n {
            let m = u[(i, src)].abs();
            if m > best {
                best = m;
                pivot = i;
            }
        }
        let sign = if u[(pivot, src)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vecs[(i, dst)] = sign * u[(i, src)];
        }
    }
    Ok(Spectrum {
        eigenvalues: values,
        eigenvectors: vecs,
    })
}

/// Ascending eigenvalues only.
pub fn eigvals_sym(matrix: &SymmetricMatrix) -> Result<Vec<f64>> {
    let n = matrix.dim();
    let a = matrix.as_ref();
    if (0..n).any(|j| (0..n).any(|i| !a[(i, j)].is_finite())) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let mut s = Diag::<f64>::zeros(n);
    let par = Par::Seq;
    let mut mem = MemBuffer::new(evd::self_adjoint_evd_scratch::<f64>(
        n,
        ComputeEigenvectors::No,
        par,
        Default::default(),
    ));
    evd::self_adjoint_evd(a, s.as_mut(), None, par, MemStack::new(&mut mem), Default::default())
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let mut values: Vec<f64> = (0..n).map(|k| s[k]).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}
