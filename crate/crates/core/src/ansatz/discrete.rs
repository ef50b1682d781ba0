//! Exact eigenvalue sums for the off-diagonal variance and the Gibbs
//! diagonal.

use crate::error::{Error, Result};
use crate::hamiltonians::BipartiteSystem;
use crate::linalg::{count_in, density_of_states, SpectralDensity, SpectralFunction, SymmetricMatrix};
use crate::scrambling::ScramblingKernel;

/// Factor spectra needed by the exact-sum forms.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSpectra {
    e_a: Vec<f64>,
    e_b: Vec<f64>,
    e_0: Vec<f64>,
}

impl FactorSpectra {
    pub fn new(mut e_a: Vec<f64>, mut e_b: Vec<f64>) -> Result<Self> {
        if e_a.is_empty() || e_b.is_empty() {
            return Err(Error::InvalidInput("factor spectra must be non-empty".into()));
        }
        if e_a.iter().chain(&e_b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite factor eigenvalue".into()));
        }
        e_a.sort_by(f64::total_cmp);
        e_b.sort_by(f64::total_cmp);
        let mut e_0: Vec<f64> = e_a.iter().flat_map(|a| e_b.iter().map(move |b| a + b)).collect();
        e_0.sort_by(f64::total_cmp);
        Ok(Self { e_a, e_b, e_0 })
    }

    pub fn from_system(system: &BipartiteSystem) -> Self {
        Self {
            e_a: system.spectrum_a().eigenvalues().to_vec(),
            e_b: system.spectrum_b().eigenvalues().to_vec(),
            e_0: system.spectrum_0().eigenvalues().to_vec(),
        }
    }

    pub fn e_a(&self) -> &[f64] {
        &self.e_a
    }

    pub fn e_b(&self) -> &[f64] {
        &self.e_b
    }

    /// Sorted `E_i^A + E_j^B`.
    pub fn e_0(&self) -> &[f64] {
        &self.e_0
    }

    pub fn dim_a(&self) -> usize {
        self.e_a.len()
    }

    pub fn sigma_a(&self) -> f64 {
        self.e_a[self.e_a.len() - 1] - self.e_a[0]
    }
}

/// `|O_ij|²` in the A eigenbasis, or the typical-operator value `O²/dim_A`.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorWeights {
    Typical { o2bar: f64 },
    /// Row-major `dim_A × dim_A` squares.
    Concrete { squares: Vec<f64>, dim: usize },
}

impl OperatorWeights {
    /// Squares of `V_Aᵀ O_A V_A` for the eigenvectors of `system`'s `H_A`.
    pub fn concrete(system: &BipartiteSystem, o_a: &SymmetricMatrix) -> Result<Self> {
        if o_a.dim() != system.dim_a() {
            return Err(Error::Dimension(format!(
                "operator has dimension {}, factor A has {}",
                o_a.dim(),
                system.dim_a()
            )));
        }
        let t = system.spectrum_a().to_eigenbasis(o_a);
        let d = t.dim();
        let squares = (0..d * d).map(|k| t.get(k / d, k % d).powi(2)).collect();
        Ok(OperatorWeights::Concrete { squares, dim: d })
    }

    fn table(&self, dim_a: usize) -> Result<Vec<f64>> {
        match self {
            OperatorWeights::Typical { o2bar } => Ok(vec![o2bar / dim_a as f64; dim_a * dim_a]),
            OperatorWeights::Concrete { squares, dim } => {
                if *dim != dim_a {
                    return Err(Error::Dimension(format!(
                        "operator weights for dimension {dim}, factor A has {dim_a}"
                    )));
                }
                Ok(squares.clone())
            }
        }
    }

    /// Mean squared spectrum `tr(O²)/dim_A`.
    pub fn o2bar(&self) -> f64 {
        match self {
            OperatorWeights::Typical { o2bar } => *o2bar,
            OperatorWeights::Concrete { squares, dim } => squares.iter().sum::<f64>() / *dim as f64,
        }
    }
}

/// Off-diagonal variance under perfect microcanonical scrambling, from
/// literal eigenvalue counts in windows `[E − Δ/2, E + Δ/2]`.
pub fn microcanonical_variance(
    spectra: &FactorSpectra,
    weights: &OperatorWeights,
    delta: f64,
    e_alpha: f64,
    e_beta: f64,
) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("window width must be positive, got {delta}")));
    }
    let half = 0.5 * delta;
    let z_a = count_in(&spectra.e_0, e_alpha - half, e_alpha + half);
    let z_b = count_in(&spectra.e_0, e_beta - half, e_beta + half);
    if z_a == 0 || z_b == 0 {
        return Err(Error::DegenerateWindow(format!(
            "no H_0 eigenvalues within Δ/2 = {half} of E = {}",
            if z_a == 0 { e_alpha } else { e_beta }
        )));
    }
    let da = spectra.dim_a();
    let w = weights.table(da)?;
    let mut total = 0.0;
    for (i, &ei) in spectra.e_a.iter().enumerate() {
        let ca = e_alpha - ei;
        for (j, &ej) in spectra.e_a.iter().enumerate() {
            let cb = e_beta - ej;
            let lo = ca.max(cb) - half;
            let hi = ca.min(cb) + half;
            let n = count_in(&spectra.e_b, lo, hi);
            if n > 0 {
                total += n as f64 * w[i * da + j];
            }
        }
    }
    Ok(total / (z_a as f64 * z_b as f64))
}

/// Square root of [`microcanonical_variance`] for a concrete operator on
/// factor A of `system`.
pub fn f_microcanonical_exact(
    system: &BipartiteSystem,
    o_a: &SymmetricMatrix,
    delta: f64,
    e_alpha: f64,
    e_beta: f64,
) -> Result<f64> {
    let weights = OperatorWeights::concrete(system, o_a)?;
    microcanonical_variance(&FactorSpectra::from_system(system), &weights, delta, e_alpha, e_beta)
        .map(f64::sqrt)
}

/// `Z(E) = Σ_ij h(E − E_i^A − E_j^B)`.
fn partition(spectra: &FactorSpectra, h: &dyn SpectralFunction, e: f64) -> f64 {
    let (lo, hi) = h.support();
    let mut z = 0.0;
    for &ea in &spectra.e_a {
        // h(e − ea − eb) ≠ 0 requires eb ∈ [e − ea − hi, e − ea − lo].
        let start = spectra.e_b.partition_point(|&b| b < e - ea - hi);
        for &eb in &spectra.e_b[start..] {
            if eb > e - ea - lo {
                break;
            }
            z += h.eval(e - ea - eb);
        }
    }
    z
}

/// Off-diagonal variance for a smooth scrambling profile `h`:
///
/// `Σ_ijk h(E_α − E_i − E_k) h(E_β − E_j − E_k) |O_ij|² / (Z(E_α) Z(E_β))`.
pub fn smooth_variance(
    spectra: &FactorSpectra,
    weights: &OperatorWeights,
    h: &dyn SpectralFunction,
    e_alpha: f64,
    e_beta: f64,
) -> Result<f64> {
    let z_a = partition(spectra, h, e_alpha);
    let z_b = partition(spectra, h, e_beta);
    if !(z_a > f64::MIN_POSITIVE && z_b > f64::MIN_POSITIVE) {
        return Err(Error::DegenerateWindow(format!(
            "normalization underflows at E = {}",
            if z_a > f64::MIN_POSITIVE { e_beta } else { e_alpha }
        )));
    }
    let da = spectra.dim_a();
    let w = weights.table(da)?;
    let rows = |e: f64| -> Vec<Vec<f64>> {
        spectra
            .e_a
            .iter()
            .map(|&ei| spectra.e_b.iter().map(|&ek| h.eval(e - ei - ek)).collect())
            .collect()
    };
    let ra = rows(e_alpha);
    let rb = rows(e_beta);
    let mut total = 0.0;
    for i in 0..da {
        for j in 0..da {
            let wij = w[i * da + j];
            if wij == 0.0 {
                continue;
            }
            let s: f64 = ra[i].iter().zip(&rb[j]).map(|(x, y)| x * y).sum();
            total += s * wij;
        }
    }
    Ok(total / (z_a * z_b))
}

/// Square root of [`smooth_variance`] for a concrete operator.
pub fn f_smooth_sums(
    system: &BipartiteSystem,
    o_a: &SymmetricMatrix,
    h: &ScramblingKernel,
    e_alpha: f64,
    e_beta: f64,
) -> Result<f64> {
    let weights = OperatorWeights::concrete(system, o_a)?;
    smooth_variance(&FactorSpectra::from_system(system), &weights, h, e_alpha, e_beta).map(f64::sqrt)
}

/// `β = d ln n_B / dE` by central difference.
pub fn log_density_slope(n_b: &SpectralDensity, e: f64, step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!("finite-difference step must be positive, got {step}")));
    }
    let (lo, hi) = (n_b.eval(e - step), n_b.eval(e + step));
    if !(n_b.contains(e - step) && n_b.contains(e + step) && lo > 0.0 && hi > 0.0) {
        return Err(Error::OutOfSupport(format!(
            "ln n_B is not differentiable at E = {e}: the stencil leaves the interior [{}, {}]",
            n_b.spectral_min(),
            n_b.spectral_max()
        )));
    }
    Ok((hi.ln() - lo.ln()) / (2.0 * step))
}

/// `Σ_i e^{−β E_i} O_ii / Σ_i e^{−β E_i}` for diagonal entries `o_diag`
/// in the A eigenbasis.
pub fn gibbs_average(e_a: &[f64], o_diag: &[f64], beta: f64) -> f64 {
    let shift = e_a.iter().map(|&e| -beta * e).fold(f64::NEG_INFINITY, f64::max);
    let mut num = 0.0;
    let mut den = 0.0;
    for (&e, &o) in e_a.iter().zip(o_diag) {
        let w = (-beta * e - shift).exp();
        num += w * o;
        den += w;
    }
    num / den
}

/// Gibbs prediction for `O_αα` at total energy `e_alpha`, with
/// `β = (ln n_B)′(E_α − mean(E^A))` from the given `n_B` and step.
pub fn gibbs_diagonal_with(
    e_a: &[f64],
    o_diag: &[f64],
    n_b: &SpectralDensity,
    e_alpha: f64,
    step: f64,
) -> Result<f64> {
    if e_a.len() != o_diag.len() || e_a.is_empty() {
        return Err(Error::Dimension(format!(
            "{} A energies with {} diagonal entries",
            e_a.len(),
            o_diag.len()
        )));
    }
    let mean = e_a.iter().sum::<f64>() / e_a.len() as f64;
    let beta = log_density_slope(n_b, e_alpha - mean, step)?;
    Ok(gibbs_average(e_a, o_diag, beta))
}

/// Gibbs diagonal for `system` with the default density of states of `H_B`
/// and a step of `σ_0/200`.
pub fn gibbs_diagonal(system: &BipartiteSystem, o_a: &SymmetricMatrix, e_alpha: f64) -> Result<f64> {
    let gp = GibbsPredictor::new(system, crate::linalg::DEFAULT_BINS)?;
    gp.predict(o_a, e_alpha)
}

/// Reusable pieces of [`gibbs_diagonal`] for many operators on one system.
pub struct GibbsPredictor<'a> {
    system: &'a BipartiteSystem,
    n_b: SpectralDensity,
    step: f64,
}

impl<'a> GibbsPredictor<'a> {
    pub fn new(system: &'a BipartiteSystem, bins: usize) -> Result<Self> {
        let n_b = density_of_states(system.spectrum_b().eigenvalues(), bins)?;
        let e0 = system.spectrum_0().eigenvalues();
        let sigma_0 = e0[e0.len() - 1] - e0[0];
        Ok(Self {
            system,
            n_b,
            step: sigma_0 / 200.0,
        })
    }

    pub fn beta(&self, e_alpha: f64) -> Result<f64> {
        let e_a = self.system.spectrum_a().eigenvalues();
        let mean = e_a.iter().sum::<f64>() / e_a.len() as f64;
        log_density_slope(&self.n_b, e_alpha - mean, self.step)
    }

    pub fn predict(&self, o_a: &SymmetricMatrix, e_alpha: f64) -> Result<f64> {
        let t = self.system.spectrum_a().to_eigenbasis(o_a);
        gibbs_diagonal_with(
            self.system.spectrum_a().eigenvalues(),
            &t.diagonal(),
            &self.n_b,
            e_alpha,
            self.step,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> FactorSpectra {
        FactorSpectra::new(vec![-0.5, 0.5], vec![-1.1, -0.2, 0.3, 1.0]).unwrap()
    }

    #[test]
    fn hard_cutoff_is_exact_zero() {
        let s = toy();
        let w = OperatorWeights::Typical { o2bar: 1.0 };
        let delta = 0.4;
        let v = microcanonical_variance(&s, &w, delta, 1.4, -0.2).unwrap();
        assert!(1.6 > delta + s.sigma_a());
        assert_eq!(v, 0.0);
    }

    #[test]
    fn infinite_window_is_rmt() {
        let s = toy();
        let w = OperatorWeights::Typical { o2bar: 1.0 };
        let v = microcanonical_variance(&s, &w, 100.0, 0.1, -0.3).unwrap();
        assert!((v - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn flat_kernel_equals_microcanonical() {
        let s = toy();
        let w = OperatorWeights::Concrete {
            squares: vec![0.1, 0.7, 0.7, 0.3],
            dim: 2,
        };
        let delta = 0.9;
        let k = ScramblingKernel::FlatWindow { delta };
        for &(a, b) in &[(0.0, 0.1), (-0.4, 0.35), (0.8, 0.2)] {
            let m = microcanonical_variance(&s, &w, delta, a, b).unwrap();
            let h = smooth_variance(&s, &w, &k, a, b).unwrap();
            assert!((m - h).abs() < 1e-10);
        }
    }

    #[test]
    fn empty_window_is_degenerate() {
        let s = toy();
        let w = OperatorWeights::Typical { o2bar: 1.0 };
        assert!(matches!(
            microcanonical_variance(&s, &w, 0.1, 50.0, 0.0),
            Err(Error::DegenerateWindow(_))
        ));
    }

    #[test]
    fn gibbs_limits() {
        let e = [-1.0, 0.0, 2.0];
        assert_eq!(gibbs_average(&e, &[1.0, 1.0, 1.0], 3.7), 1.0);
        assert!((gibbs_average(&e, &[1.0, -2.0, 1.0], 0.0)).abs() < 1e-15);
        let n_b = SpectralDensity::from_grid(vec![-2.0, 0.0, 2.0], vec![1.0, 3.0, 1.0]).unwrap();
        let v = gibbs_diagonal_with(&[-1.0, 1.0], &[0.5, -0.5], &n_b, 0.0, 0.01);
        // Kink of n_B at 0 gives a symmetric stencil.
        assert!(v.unwrap().abs() < 1e-12);
        assert!(matches!(
            gibbs_diagonal_with(&[-1.0, 1.0], &[0.5, -0.5], &n_b, 1.995, 0.01),
            Err(Error::OutOfSupport(_))
        ));
    }
}
