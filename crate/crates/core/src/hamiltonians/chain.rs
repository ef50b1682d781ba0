use faer::Mat;
use serde::{Deserialize, Serialize};

use super::system::BipartiteSystem;
use crate::error::{Error, Result};
use crate::linalg::{eig_sym, Spectrum, SymmetricMatrix};

pub const DEFAULT_MAX_SITES: usize = 13;

/// Mixed-field Ising chain `J Σ Z_r Z_{r+1} + Σ (h_x X_r + h_z Z_r)`, open
/// boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinChainParams {
    pub l: usize,
    pub j: f64,
    pub h_x: f64,
    pub h_z: f64,
    /// Largest `l` accepted for dense construction.
    pub max_sites: usize,
}

impl Default for SpinChainParams {
    fn default() -> Self {
        Self {
            l: 12,
            j: 1.0,
            h_x: 1.05,
            h_z: 0.5,
            max_sites: DEFAULT_MAX_SITES,
        }
    }
}

impl SpinChainParams {
    pub fn new(l: usize, j: f64, h_x: f64, h_z: f64) -> Self {
        Self {
            l,
            j,
            h_x,
            h_z,
            max_sites: DEFAULT_MAX_SITES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(Error::Dimension("chain needs at least one site".into()));
        }
        if self.l > self.max_sites {
            return Err(Error::Dimension(format!(
                "L = {} exceeds the dense guard of {} sites",
                self.l, self.max_sites
            )));
        }
        for (name, v) in [("J", self.j), ("h_x", self.h_x), ("h_z", self.h_z)] {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} = {v} is not finite")));
            }
        }
        Ok(())
    }

    fn with_sites(&self, l: usize) -> Self {
        Self { l, ..*self }
    }
}

/// Dense chain Hamiltonian in the `Z` product basis. Site 1 is the leftmost
/// tensor slot (most significant bit) and `|0⟩` has `Z = +1`.
pub fn build_spin_chain(params: &SpinChainParams) -> Result<SymmetricMatrix> {
    params.validate()?;
    let l = params.l;
    let dim = 1usize << l;
    let mut m = Mat::zeros(dim, dim);
    for s in 0..dim {
        let z = |r: usize| -> f64 {
            if (s >> (l - r)) & 1 == 0 {
                1.0
            } else {
                -1.0
            }
        };
        let mut diag = 0.0;
        for r in 1..l {
            diag += params.j * z(r) * z(r + 1);
        }
        for r in 1..=l {
            diag += params.h_z * z(r);
        }
        m[(s, s)] = diag;
        if params.h_x != 0.0 {
            for r in 1..=l {
                m[(s ^ (1 << (l - r)), s)] += params.h_x;
            }
        }
    }
    Ok(SymmetricMatrix::new_unchecked(m))
}

/// Cuts the chain after site `l_a`. `H_A` and `H_B` are the sub-chains with
/// all their own terms and `H_I = J Z_{l_a} Z_{l_a+1}`.
pub fn decompose_chain(params: &SpinChainParams, l_a: usize) -> Result<BipartiteSystem> {
    decompose_chain_with(params, l_a, eig_sym)
}

/// As [`decompose_chain`], with the total eigensolve delegated to
/// `solve_total`. `H_T` does not depend on the cut.
pub fn decompose_chain_with(
    params: &SpinChainParams,
    l_a: usize,
    solve_total: impl FnOnce(&SymmetricMatrix) -> Result<Spectrum>,
) -> Result<BipartiteSystem> {
    params.validate()?;
    if l_a == 0 || l_a >= params.l {
        return Err(Error::Range(format!(
            "cut position L_A = {l_a} must satisfy 1 ≤ L_A < L = {}",
            params.l
        )));
    }
    let h_a = build_spin_chain(&params.with_sites(l_a))?;
    let h_b = build_spin_chain(&params.with_sites(params.l - l_a))?;
    let dim = 1usize << params.l;
    let l = params.l;
    let h_i = Mat::from_fn(dim, dim, |i, k| {
        if i != k {
            return 0.0;
        }
        let za = if (i >> (l - l_a)) & 1 == 0 { 1.0 } else { -1.0 };
        let zb = if (i >> (l - l_a - 1)) & 1 == 0 { 1.0 } else { -1.0 };
        params.j * za * zb
    });
    BipartiteSystem::assemble_with(
        h_a,
        h_b,
        SymmetricMatrix::new_unchecked(h_i),
        params.j.abs(),
        solve_total,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_site_is_field_only() {
        let h = build_spin_chain(&SpinChainParams::new(1, 3.0, 1.05, 0.5)).unwrap();
        assert_eq!(h.get(0, 0), 0.5);
        assert_eq!(h.get(1, 1), -0.5);
        assert_eq!(h.get(0, 1), 1.05);
    }

    #[test]
    fn two_site_pure_ising() {
        let h = build_spin_chain(&SpinChainParams::new(2, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(h.diagonal(), vec![1.0, -1.0, -1.0, 1.0]);
        assert_eq!(h.max_abs_diff(&SymmetricMatrix::from_diagonal(&[1.0, -1.0, -1.0, 1.0])), 0.0);
    }

    #[test]
    fn guard_and_cut_errors() {
        let p = SpinChainParams::new(20, 1.0, 1.0, 1.0);
        assert!(matches!(build_spin_chain(&p), Err(Error::Dimension(_))));
        let p = SpinChainParams::new(4, 1.0, 1.0, 1.0);
        assert!(matches!(decompose_chain(&p, 0), Err(Error::Range(_))));
        assert!(matches!(decompose_chain(&p, 4), Err(Error::Range(_))));
    }

    #[test]
    fn two_site_cut_without_fields() {
        let p = SpinChainParams::new(2, 1.0, 0.0, 0.0);
        let sys = decompose_chain(&p, 1).unwrap();
        assert_eq!(sys.h_a().max_abs(), 0.0);
        assert_eq!(sys.h_b().max_abs(), 0.0);
        assert_eq!(sys.h_i().max_abs_diff(sys.h_t()), 0.0);
    }
}
