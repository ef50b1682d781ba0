//! Random local operators and their matrix elements in the total eigenbasis.

use faer::linalg::matmul::matmul;
use faer::reborrow::ReborrowMut;
use faer::{Accum, Mat, MatMut, MatRef, Par};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{haar_orthogonal, stream_rng, BipartiteSystem};
use crate::linalg::SymmetricMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumLaw {
    /// Uniform on `[-1, 1]`.
    #[default]
    FlatPm1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorEnsembleSpec {
    pub count: usize,
    pub dim_a: usize,
    pub spectrum_law: SpectrumLaw,
    /// Shift to mean 0 and rescale to mean square 1.
    pub normalize: bool,
    pub seed: u64,
}

impl OperatorEnsembleSpec {
    pub const DEFAULT_COUNT: usize = 250;

    pub fn new(dim_a: usize, seed: u64) -> Self {
        Self {
            count: Self::DEFAULT_COUNT,
            dim_a,
            spectrum_law: SpectrumLaw::FlatPm1,
            normalize: true,
            seed,
        }
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Configuration("operator count must be ≥ 1".into()));
        }
        if self.dim_a == 0 {
            return Err(Error::Configuration("operator dimension must be ≥ 1".into()));
        }
        if self.normalize && self.dim_a == 1 {
            return Err(Error::Configuration(
                "a 1×1 operator shifted to mean zero is identically 0 and cannot be rescaled to \
                 mean square 1; use dim_A ≥ 2 or disable normalization"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Operator `index` of the ensemble. Eigenvalues are drawn first, then the
/// Haar rotation, all from stream `index + 1` of `seed`.
pub fn sample_local_operator(spec: &OperatorEnsembleSpec, index: usize) -> Result<SymmetricMatrix> {
    spec.validate()?;
    if index >= spec.count {
        return Err(Error::Range(format!(
            "operator index {index} outside ensemble of {}",
            spec.count
        )));
    }
    let mut rng = stream_rng(spec.seed, index as u64 + 1);
    let d = spec.dim_a;
    let mut values: Vec<f64> = match spec.spectrum_law {
        SpectrumLaw::FlatPm1 => (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect(),
    };
    if spec.normalize {
        let mean = values.iter().sum::<f64>() / d as f64;
        values.iter_mut().for_each(|v| *v -= mean);
        let ms = values.iter().map(|v| v * v).sum::<f64>() / d as f64;
        if !(ms > 0.0) {
            return Err(Error::DegenerateWindow(format!(
                "operator {index} has a constant spectrum and cannot be normalized"
            )));
        }
        let s = ms.sqrt().recip();
        values.iter_mut().for_each(|v| *v *= s);
    }
    let q = haar_orthogonal(d, &mut rng)?;
    Ok(SymmetricMatrix::from_diagonal(&values).conjugate_by(q.as_ref()))
}

fn check_dims(system: &BipartiteSystem, o_a: &SymmetricMatrix) -> Result<()> {
    if o_a.dim() != system.dim_a() {
        return Err(Error::Dimension(format!(
            "operator has dimension {}, factor A has {}",
            o_a.dim(),
            system.dim_a()
        )));
    }
    Ok(())
}

/// Writes `(O_A ⊗ I_B) v` for each column `v` of `src` into `dst`.
pub(crate) fn apply_local(
    o_a: MatRef<'_, f64>,
    dim_b: usize,
    src: MatRef<'_, f64>,
    mut dst: MatMut<'_, f64>,
) {
    let da = o_a.nrows();
    for c in 0..src.ncols() {
        let v = src.col(c).try_as_col_major().expect("contiguous column").as_slice();
        let out = dst.rb_mut().col_mut(c).try_as_col_major_mut().expect("contiguous column").as_slice_mut();
        let m = MatRef::from_column_major_slice(v, dim_b, da);
        let w = MatMut::from_column_major_slice_mut(out, dim_b, da);
        matmul(w, Accum::Replace, m, o_a, 1.0, Par::Seq);
    }
}

/// `V_Tᵀ (O_A ⊗ I_B) V_T`.
pub fn matrix_elements_total_basis(
    system: &BipartiteSystem,
    o_a: &SymmetricMatrix,
) -> Result<SymmetricMatrix> {
    check_dims(system, o_a)?;
    let v = system.spectrum_t().eigenvectors();
    let n = system.dim();
    let mut w = Mat::<f64>::zeros(n, n);
    apply_local(o_a.as_ref(), system.dim_b(), v, w.as_mut());
    let mut out = Mat::<f64>::zeros(n, n);
    matmul(out.as_mut(), Accum::Replace, v.transpose(), w.as_ref(), 1.0, Par::Seq);
    Ok(SymmetricMatrix::new_unchecked(crate::linalg::matrix::symmetrize(out)))
}

/// Matrix elements of `O_A` between eigenstates of `H_A`.
pub fn local_eigenbasis_elements(system: &BipartiteSystem, o_a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    check_dims(system, o_a)?;
    Ok(system.spectrum_a().to_eigenbasis(o_a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{decompose_chain, SpinChainParams};

    fn small() -> BipartiteSystem {
        decompose_chain(&SpinChainParams::new(5, 1.0, 1.05, 0.5), 2).unwrap()
    }

    #[test]
    fn normalized_and_reproducible() {
        let spec = OperatorEnsembleSpec::new(8, 42).with_count(3);
        for k in 0..3 {
            let o = sample_local_operator(&spec, k).unwrap();
            assert!(o.trace().abs() < 1e-12);
            let o2: f64 = (0..8).flat_map(|i| (0..8).map(move |j| (i, j))).map(|(i, j)| o.get(i, j).powi(2)).sum();
            assert!((o2 / 8.0 - 1.0).abs() < 1e-12);
            assert_eq!(o, sample_local_operator(&spec, k).unwrap());
        }
        assert_ne!(sample_local_operator(&spec, 0).unwrap(), sample_local_operator(&spec, 1).unwrap());
    }

    #[test]
    fn scalar_operator_cannot_be_normalized() {
        let spec = OperatorEnsembleSpec::new(1, 0);
        let err = sample_local_operator(&spec, 0).unwrap_err();
        assert!(err.to_string().contains("mean square"));
        let mut raw = spec;
        raw.normalize = false;
        assert!(sample_local_operator(&raw, 0).is_ok());
        assert!(sample_local_operator(&spec.with_count(1), 1).is_err());
    }

    #[test]
    fn identity_maps_to_identity() {
        let sys = small();
        let m = matrix_elements_total_basis(&sys, &SymmetricMatrix::identity(4)).unwrap();
        assert!(m.max_abs_diff(&SymmetricMatrix::identity(32)) < 1e-12);
    }

    #[test]
    fn frobenius_norm_is_preserved() {
        let sys = small();
        let o = sample_local_operator(&OperatorEnsembleSpec::new(4, 7), 0).unwrap();
        let m = matrix_elements_total_basis(&sys, &o).unwrap();
        let f2: f64 = (0..32).flat_map(|i| (0..32).map(move |j| (i, j))).map(|(i, j)| m.get(i, j).powi(2)).sum();
        assert!((f2 - 8.0 * 4.0).abs() < 1e-10);
    }

    #[test]
    fn wrong_dimension_rejected() {
        let sys = small();
        assert!(matches!(
            matrix_elements_total_basis(&sys, &SymmetricMatrix::identity(3)),
            Err(Error::Dimension(_))
        ));
    }
}
