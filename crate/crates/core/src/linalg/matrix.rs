use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};

use crate::error::{Error, Result};

/// Relative tolerance on `|a_ij - a_ji|` accepted as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Dense real symmetric matrix.
///
/// Construction checks squareness, finiteness and symmetry to within
/// [`SYMMETRY_TOL`] relative to the largest absolute entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(Mat<f64>);

impl SymmetricMatrix {
    pub fn new(mat: Mat<f64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, expected square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.nrows() == 0 {
            return Err(Error::Dimension("matrix has dimension 0".into()));
        }
        let n = mat.nrows();
        let mut scale = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let v = mat[(i, j)];
                if !v.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "non-finite entry {v} at ({i}, {j})"
                    )));
                }
                scale = scale.max(v.abs());
            }
        }
        let tol = SYMMETRY_TOL * scale;
        for j in 0..n {
            for i in (j + 1)..n {
                if (mat[(i, j)] - mat[(j, i)]).abs() > tol {
                    return Err(Error::InvalidInput(format!(
                        "matrix not symmetric at ({i}, {j}): {} vs {}",
                        mat[(i, j)],
                        mat[(j, i)]
                    )));
                }
            }
        }
        Ok(Self(mat))
    }

    /// Wraps a matrix that is symmetric by construction.
    pub(crate) fn new_unchecked(mat: Mat<f64>) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        Self(mat)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::new(Mat::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(Mat::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Mat::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(Mat::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 }))
    }

    /// Row-major entries, as used by the on-disk and C interfaces.
    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::new(Mat::from_fn(dim, dim, |i, j| entries[i * dim + j]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_ref(&self) -> MatRef<'_, f64> {
        self.0.as_ref()
    }

    pub fn as_mat(&self) -> &Mat<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Mat<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(self.as_ref())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)]).collect()
    }

    /// `self ⊗ other`.
    pub fn kron(&self, other: &SymmetricMatrix) -> SymmetricMatrix {
        SymmetricMatrix(kron(self.as_ref(), other.as_ref()))
    }

    /// `self ⊗ I_dim`.
    pub fn kron_identity(&self, dim: usize) -> SymmetricMatrix {
        self.kron(&SymmetricMatrix::identity(dim))
    }

    /// `I_dim ⊗ self`.
    pub fn identity_kron(&self, dim: usize) -> SymmetricMatrix {
        SymmetricMatrix::identity(dim).kron(self)
    }

    pub fn add(&self, other: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "cannot add {}x{} and {}x{}",
                self.dim(),
                self.dim(),
                other.dim(),
                other.dim()
            )));
        }
        Ok(SymmetricMatrix(&self.0 + &other.0))
    }

    pub fn scale(&self, factor: f64) -> SymmetricMatrix {
        let n = self.dim();
        SymmetricMatrix(Mat::from_fn(n, n, |i, j| factor * self.0[(i, j)]))
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &SymmetricMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim());
        max_abs((&self.0 - &other.0).as_ref())
    }

    /// `U · self · Uᵀ`, symmetrized.
    pub fn conjugate_by(&self, u: MatRef<'_, f64>) -> SymmetricMatrix {
        let tmp = gemm(u, self.as_ref());
        let out = gemm(tmp.as_ref(), u.transpose());
        SymmetricMatrix(symmetrize(out))
    }

    /// `Uᵀ · self · U`, symmetrized.
    pub fn rotate_into(&self, u: MatRef<'_, f64>) -> SymmetricMatrix {
        self.conjugate_by(u.transpose())
    }
}

pub(crate) fn max_abs(m: MatRef<'_, f64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].abs());
        }
    }
    best
}

pub(crate) fn symmetrize(mut m: Mat<f64>) -> Mat<f64> {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Kronecker product `a ⊗ b`; row index of the result is `ia * b.nrows() + ib`.
pub fn kron(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Mat<f64> {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    let mut out = Mat::zeros(ar * br, ac * bc);
    for ja in 0..ac {
        for ia in 0..ar {
            let s = a[(ia, ja)];
            if s == 0.0 {
                continue;
            }
            for jb in 0..bc {
                for ib in 0..br {
                    out[(ia * br + ib, ja * bc + jb)] = s * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Sequential matrix product. All numerics in this crate run on a single
/// thread per call so results do not depend on the worker count.
pub fn gemm(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Mat<f64> {
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, 1.0, Par::Seq);
    out
}

/// `‖QᵀQ − I‖_max`.
pub fn orthogonality_error(q: MatRef<'_, f64>) -> f64 {
    let qtq = gemm(q.transpose(), q);
    let n = qtq.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((qtq[(i, j)] - target).abs());
        }
    }
    worst
}
