use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, Spectrum, SymmetricMatrix};

/// Eigendata of `H_0 = H_A ⊗ I + I ⊗ H_B`.
///
/// Eigenvalues are the sums `E_i^A + E_j^B`, sorted ascending with ties broken
/// by `(i, j)`; eigenvectors are the products `|E_i^A⟩ ⊗ |E_j^B⟩` and are only
/// materialised on request.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpectrum {
    values: Vec<f64>,
    pairs: Vec<(usize, usize)>,
}

impl ProductSpectrum {
    pub fn new(e_a: &[f64], e_b: &[f64]) -> Self {
        let mut items: Vec<(f64, usize, usize)> = Vec::with_capacity(e_a.len() * e_b.len());
        for (i, &a) in e_a.iter().enumerate() {
            for (j, &b) in e_b.iter().enumerate() {
                items.push((a + b, i, j));
            }
        }
        items.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        Self {
            values: items.iter().map(|t| t.0).collect(),
            pairs: items.iter().map(|t| (t.1, t.2)).collect(),
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// `(i, j)` factor indices of each sorted eigenvalue.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Operator norm `max |E|`.
    pub fn norm(&self) -> f64 {
        self.values[0].abs().max(self.values[self.dim() - 1].abs())
    }

    /// Dense eigenvector form; column `k` is `V_A[:, i] ⊗ V_B[:, j]`.
    pub fn to_spectrum(&self, a: &Spectrum, b: &Spectrum) -> Result<Spectrum> {
        let db = b.dim();
        let n = self.dim();
        let va = a.eigenvectors();
        let vb = b.eigenvectors();
        let mut vecs = Mat::zeros(n, n);
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            for ia in 0..a.dim() {
                let s = va[(ia, i)];
                if s == 0.0 {
                    continue;
                }
                for ib in 0..db {
                    vecs[(ia * db + ib, k)] = s * vb[(ib, j)];
                }
            }
        }
        Spectrum::from_parts(self.values.clone(), vecs)
    }
}

/// `H_T = H_A ⊗ I_B + I_A ⊗ H_B + H_I` with eigendata for every piece.
///
/// The composite index is `i_A · dim_B + i_B`, so factor A occupies the
/// leading tensor slot.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteSystem {
    h_a: SymmetricMatrix,
    h_b: SymmetricMatrix,
    h_i: SymmetricMatrix,
    h_t: SymmetricMatrix,
    spec_a: Spectrum,
    spec_b: Spectrum,
    spec_0: ProductSpectrum,
    spec_t: Spectrum,
    interaction_norm: f64,
}

impl BipartiteSystem {
    /// Builds `H_T` and diagonalizes every piece. `interaction_norm` is the
    /// known operator norm of `h_i`.
    pub fn assemble(
        h_a: SymmetricMatrix,
        h_b: SymmetricMatrix,
        h_i: SymmetricMatrix,
        interaction_norm: f64,
    ) -> Result<Self> {
        Self::assemble_with(h_a, h_b, h_i, interaction_norm, eig_sym)
    }

    /// As [`Self::assemble`], with the total-Hamiltonian eigensolve delegated
    /// to `solve_total` (e.g. a disk cache).
    pub fn assemble_with(
        h_a: SymmetricMatrix,
        h_b: SymmetricMatrix,
        h_i: SymmetricMatrix,
        interaction_norm: f64,
        solve_total: impl FnOnce(&SymmetricMatrix) -> Result<Spectrum>,
    ) -> Result<Self> {
        let (da, db) = (h_a.dim(), h_b.dim());
        if h_i.dim() != da * db {
            return Err(Error::Structural(format!(
                "interaction has dimension {}, expected {da}·{db} = {}",
                h_i.dim(),
                da * db
            )));
        }
        if !(interaction_norm >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "interaction norm must be non-negative, got {interaction_norm}"
            )));
        }
        let h_t = reassemble(&h_a, &h_b, &h_i);
        let spec_a = eig_sym(&h_a)?;
        let spec_b = eig_sym(&h_b)?;
        let spec_0 = ProductSpectrum::new(spec_a.eigenvalues(), spec_b.eigenvalues());
        let spec_t = solve_total(&h_t)?;
        if spec_t.dim() != h_t.dim() {
            return Err(Error::Structural(format!(
                "total spectrum has dimension {}, expected {}",
                spec_t.dim(),
                h_t.dim()
            )));
        }
        Ok(Self {
            h_a,
            h_b,
            h_i,
            h_t,
            spec_a,
            spec_b,
            spec_0,
            spec_t,
            interaction_norm,
        })
    }

    pub fn dim_a(&self) -> usize {
        self.h_a.dim()
    }

    pub fn dim_b(&self) -> usize {
        self.h_b.dim()
    }

    pub fn dim(&self) -> usize {
        self.h_t.dim()
    }

    pub fn h_a(&self) -> &SymmetricMatrix {
        &self.h_a
    }

    pub fn h_b(&self) -> &SymmetricMatrix {
        &self.h_b
    }

    pub fn h_i(&self) -> &SymmetricMatrix {
        &self.h_i
    }

    pub fn h_t(&self) -> &SymmetricMatrix {
        &self.h_t
    }

    pub fn spectrum_a(&self) -> &Spectrum {
        &self.spec_a
    }

    pub fn spectrum_b(&self) -> &Spectrum {
        &self.spec_b
    }

    pub fn spectrum_0(&self) -> &ProductSpectrum {
        &self.spec_0
    }

    pub fn spectrum_t(&self) -> &Spectrum {
        &self.spec_t
    }

    pub fn interaction_norm(&self) -> f64 {
        self.interaction_norm
    }

    /// Largest entry of `H_T − (H_A ⊗ I + I ⊗ H_B + H_I)`.
    pub fn reassembly_error(&self) -> f64 {
        reassemble(&self.h_a, &self.h_b, &self.h_i).max_abs_diff(&self.h_t)
    }
}

/// `H_A ⊗ I_B + I_A ⊗ H_B + H_I` written directly into one buffer.
pub fn reassemble(
    h_a: &SymmetricMatrix,
    h_b: &SymmetricMatrix,
    h_i: &SymmetricMatrix,
) -> SymmetricMatrix {
    let (da, db) = (h_a.dim(), h_b.dim());
    let mut t = h_i.as_mat().clone();
    let (a, b) = (h_a.as_ref(), h_b.as_ref());
    for ja in 0..da {
        for ia in 0..da {
            let v = a[(ia, ja)];
            if v != 0.0 {
                for k in 0..db {
                    t[(ia * db + k, ja * db + k)] += v;
                }
            }
        }
    }
    for blk in 0..da {
        let off = blk * db;
        for jb in 0..db {
            for ib in 0..db {
                let v = b[(ib, jb)];
                if v != 0.0 {
                    t[(off + ib, off + jb)] += v;
                }
            }
        }
    }
    SymmetricMatrix::new_unchecked(t)
}
