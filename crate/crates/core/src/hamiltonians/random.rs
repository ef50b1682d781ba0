//! GOE sampling, Haar-orthogonal matrices and the random bipartite family.
//!
//! All randomness comes from a [`ChaCha8Rng`] seeded with a 64-bit integer.
//! Matrices are filled row by row from `StandardNormal` draws.

use faer::dyn_stack::{MemBuffer, MemStack, StackReq};
use faer::linalg::householder::{
    apply_block_householder_sequence_on_the_left_in_place_scratch,
    apply_block_householder_sequence_on_the_left_in_place_with_conj,
};
use faer::linalg::qr::no_pivoting::factor::{qr_in_place, qr_in_place_scratch, recommended_block_size};
use faer::{Conj, Mat, Par};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::chain::DEFAULT_MAX_SITES;
use super::system::BipartiteSystem;
use crate::error::{Error, Result};
use crate::linalg::{eig_sym, eigvals_sym, gemm, Spectrum, SymmetricMatrix};

/// Generator used throughout the crate.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Mat<f64> {
    let mut g = Mat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            g[(i, j)] = rng.sample(StandardNormal);
        }
    }
    g
}

/// `(G + Gᵀ)/2` with `G` standard normal: diagonal variance 1, off-diagonal
/// variance 1/2.
pub fn sample_goe<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<SymmetricMatrix> {
    if dim == 0 {
        return Err(Error::Dimension("GOE dimension must be ≥ 1".into()));
    }
    let g = normal_matrix(dim, rng);
    let a = Mat::from_fn(dim, dim, |i, j| 0.5 * (g[(i, j)] + g[(j, i)]));
    Ok(SymmetricMatrix::new_unchecked(a))
}

/// Haar-distributed orthogonal matrix: QR of a standard-normal matrix with
/// the signs of `diag(R)` folded into `Q`.
pub fn haar_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Mat<f64>> {
    if dim == 0 {
        return Err(Error::Dimension("orthogonal dimension must be ≥ 1".into()));
    }
    let mut a = normal_matrix(dim, rng);
    let (q, r_diag) = qr_seq(&mut a);
    let mut q = q;
    for (j, &r) in r_diag.iter().enumerate() {
        if r < 0.0 {
            for i in 0..dim {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    Ok(q)
}

/// Householder QR on one thread. Returns `Q` and the diagonal of `R`; `a` is
/// overwritten with the compact factorization.
pub(crate) fn qr_seq(a: &mut Mat<f64>) -> (Mat<f64>, Vec<f64>) {
    let n = a.nrows();
    let bs = recommended_block_size::<f64>(n, n);
    let mut coeff = Mat::<f64>::zeros(bs, n);
    let par = Par::Seq;
    let mut mem = MemBuffer::new(StackReq::any_of(&[
        qr_in_place_scratch::<f64>(n, n, bs, par, Default::default()),
        apply_block_householder_sequence_on_the_left_in_place_scratch::<f64>(n, bs, n),
    ]));
    qr_in_place(a.as_mut(), coeff.as_mut(), par, MemStack::new(&mut mem), Default::default());
    let r_diag = (0..n).map(|j| a[(j, j)]).collect();
    let mut q = Mat::<f64>::identity(n, n);
    apply_block_householder_sequence_on_the_left_in_place_with_conj(
        a.as_ref(),
        coeff.as_ref(),
        Conj::No,
        q.as_mut(),
        par,
        MemStack::new(&mut mem),
    );
    (q, r_diag)
}

/// Parameters of the random bipartite family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomSystemParams {
    pub l_a: usize,
    pub l_b: usize,
    /// Qubits in the coupling support, straddling the cut with
    /// `floor(l_i/2)` on the A side.
    pub l_i: usize,
    /// Target ratio `‖H_I‖ / ‖H_0‖`.
    pub f: f64,
    pub seed: u64,
    /// Multiplier applied to the sampled A spectrum.
    pub a_scale: f64,
    pub max_sites: usize,
}

impl RandomSystemParams {
    pub fn new(l_a: usize, l_b: usize, l_i: usize, f: f64, seed: u64) -> Self {
        Self {
            l_a,
            l_b,
            l_i,
            f,
            seed,
            a_scale: 1.0,
            max_sites: DEFAULT_MAX_SITES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Configuration(m));
        if self.l_a == 0 || self.l_b == 0 {
            return cfg(format!("L_A = {} and L_B = {} must both be ≥ 1", self.l_a, self.l_b));
        }
        if self.l_a + self.l_b > self.max_sites {
            return Err(Error::Dimension(format!(
                "L_A + L_B = {} exceeds the dense guard of {} qubits",
                self.l_a + self.l_b,
                self.max_sites
            )));
        }
        if self.l_i == 0 {
            return cfg("interaction support L_I must be ≥ 1".into());
        }
        if self.l_i / 2 > self.l_a || self.l_i.div_ceil(2) > self.l_b {
            return cfg(format!(
                "L_I = {} cannot straddle the cut: needs {} qubits on A (have {}) and {} on B (have {})",
                self.l_i,
                self.l_i / 2,
                self.l_a,
                self.l_i.div_ceil(2),
                self.l_b
            ));
        }
        if !(self.f >= 0.0) || !self.f.is_finite() {
            return cfg(format!("interaction fraction f = {} must be finite and ≥ 0", self.f));
        }
        if !(self.a_scale > 0.0) || !self.a_scale.is_finite() {
            return cfg(format!("A-spectrum scale {} must be positive", self.a_scale));
        }
        Ok(())
    }
}

/// Random system with GOE spectra on each factor and a Haar-rotated GOE
/// coupling.
///
/// Sampling order from `seeded_rng(seed)`: GOE(2^L_A), GOE(2^L_B),
/// GOE(2^L_I), Haar(2^L_A), Haar(2^L_B). `H_A` and `H_B` are diagonal with
/// the sorted GOE eigenvalues (A scaled by `a_scale`). The coupling is
/// `(O_A ⊗ O_B)(I ⊗ D ⊗ I)(O_A ⊗ O_B)ᵀ` with `D` the diagonal GOE spectrum,
/// rescaled so that `‖H_I‖ = f · ‖H_0‖`.
pub fn build_random_system(params: &RandomSystemParams) -> Result<BipartiteSystem> {
    build_random_system_with(params, eig_sym)
}

pub fn build_random_system_with(
    params: &RandomSystemParams,
    solve_total: impl FnOnce(&SymmetricMatrix) -> Result<Spectrum>,
) -> Result<BipartiteSystem> {
    params.validate()?;
    let (da, db, di) = (1usize << params.l_a, 1usize << params.l_b, 1usize << params.l_i);
    let mut rng = seeded_rng(params.seed);
    let e_a: Vec<f64> = eigvals_sym(&sample_goe(da, &mut rng)?)?
        .into_iter()
        .map(|e| e * params.a_scale)
        .collect();
    let e_b = eigvals_sym(&sample_goe(db, &mut rng)?)?;
    let d = eigvals_sym(&sample_goe(di, &mut rng)?)?;
    let o_a = haar_orthogonal(da, &mut rng)?;
    let o_b = haar_orthogonal(db, &mut rng)?;

    let h0_norm = (e_a[da - 1] + e_b[db - 1]).abs().max((e_a[0] + e_b[0]).abs());
    let d_max = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if d_max > 0.0 { params.f * h0_norm / d_max } else { 0.0 };

    let left = 1usize << (params.l_a - params.l_i / 2);
    let right = 1usize << (params.l_b - params.l_i.div_ceil(2));
    debug_assert_eq!(left * di * right, da * db);
    let n = da * db;
    let inner: Vec<f64> = (0..n).map(|k| scale * d[(k / right) % di]).collect();

    let u = crate::linalg::kron(o_a.as_ref(), o_b.as_ref());
    let h_i = if scale == 0.0 {
        SymmetricMatrix::zeros(n)
    } else {
        let w = Mat::from_fn(n, n, |i, k| u[(i, k)] * inner[k]);
        SymmetricMatrix::new_unchecked(crate::linalg::matrix::symmetrize(gemm(
            w.as_ref(),
            u.transpose(),
        )))
    };
    drop(u);
    let norm = scale * d_max;
    BipartiteSystem::assemble_with(
        SymmetricMatrix::from_diagonal(&e_a),
        SymmetricMatrix::from_diagonal(&e_b),
        h_i,
        norm,
        solve_total,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthogonality_error;

    #[test]
    fn goe_dim_one_is_a_normal_draw() {
        let mut rng = seeded_rng(3);
        let a = sample_goe(1, &mut rng).unwrap();
        let mut rng = seeded_rng(3);
        let g: f64 = rng.sample(StandardNormal);
        assert_eq!(a.get(0, 0), g);
    }

    #[test]
    fn haar_is_orthogonal_and_reconstructs() {
        let mut rng = seeded_rng(11);
        for n in [1usize, 2, 5, 33] {
            let q = haar_orthogonal(n, &mut rng).unwrap();
            assert!(orthogonality_error(q.as_ref()) < 1e-12);
        }
        let mut rng = seeded_rng(12);
        let a0 = normal_matrix(7, &mut rng);
        let mut a = a0.clone();
        let (q, _) = qr_seq(&mut a);
        let r = Mat::from_fn(7, 7, |i, j| if i <= j { a[(i, j)] } else { 0.0 });
        let qr = gemm(q.as_ref(), r.as_ref());
        assert!(crate::linalg::matrix::max_abs((&qr - &a0).as_ref()) < 1e-12);
    }

    #[test]
    fn support_validation() {
        assert!(matches!(
            RandomSystemParams::new(1, 2, 4, 0.1, 0).validate(),
            Err(Error::Configuration(_))
        ));
        assert!(RandomSystemParams::new(2, 2, 4, 0.1, 0).validate().is_ok());
        assert!(matches!(
            RandomSystemParams::new(2, 2, 0, 0.1, 0).validate(),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn zero_coupling_gives_product_system() {
        let sys = build_random_system(&RandomSystemParams::new(2, 3, 2, 0.0, 9)).unwrap();
        assert_eq!(sys.h_i().max_abs(), 0.0);
        assert_eq!(sys.interaction_norm(), 0.0);
    }

    #[test]
    fn interaction_ratio_is_exact() {
        let p = RandomSystemParams::new(2, 3, 3, 0.2, 5);
        let sys = build_random_system(&p).unwrap();
        let ev = eigvals_sym(sys.h_i()).unwrap();
        let measured = ev[0].abs().max(ev[ev.len() - 1].abs());
        assert!((measured - sys.interaction_norm()).abs() < 1e-9);
        assert!((measured / sys.spectrum_0().norm() - 0.2).abs() < 1e-9);
    }
}
