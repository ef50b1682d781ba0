//! Overlaps of total eigenstates with product eigenstates, and their energy
//! profile.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatMut, MatRef, Par};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonians::BipartiteSystem;
use crate::linalg::SpectralFunction;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const COLUMN_CHUNK: usize = 256;

/// `c[α, i, j] = ⟨E_i^A E_j^B | E_α^T⟩`.
///
/// Stored with one contiguous column per α; within a column the product
/// index is `i · dim_B + j`.
#[derive(Debug, Clone)]
pub struct ScramblingCoefficients {
    c: Mat<f64>,
    dim_a: usize,
    dim_b: usize,
    e_t: Vec<f64>,
    e_a: Vec<f64>,
    e_b: Vec<f64>,
}

pub fn compute_coefficients(system: &BipartiteSystem) -> Result<ScramblingCoefficients> {
    let (da, db) = (system.dim_a(), system.dim_b());
    let n = system.dim();
    let st = system.spectrum_t();
    let sa = system.spectrum_a();
    let sb = system.spectrum_b();
    if st.dim() != da * db || sa.dim() != da || sb.dim() != db {
        return Err(Error::Structural(format!(
            "spectra of dimension {}, {}, {} do not factor as {da}·{db}",
            st.dim(),
            sa.dim(),
            sb.dim()
        )));
    }
    let va = sa.eigenvectors();
    let vb = sb.eigenvectors();
    let mut c = Mat::<f64>::zeros(n, n);
    let mut buf = vec![0.0; n * COLUMN_CHUNK];
    let mut y = Mat::<f64>::zeros(db, da * COLUMN_CHUNK);
    let mut a0 = 0;
    while a0 < n {
        let k = COLUMN_CHUNK.min(n - a0);
        // Columns a0..a0+k of V_T laid side by side as dim_B × (dim_A·k).
        for t in 0..k {
            buf[t * n..(t + 1) * n].copy_from_slice(st.eigenvector(a0 + t));
        }
        let m = MatRef::from_column_major_slice(&buf[..n * k], db, da * k);
        let mut yk = y.as_mut().subcols_mut(0, da * k);
        matmul(yk.as_mut(), Accum::Replace, vb.transpose(), m, 1.0, Par::Seq);
        for t in 0..k {
            let out = MatMut::from_column_major_slice_mut(c.col_as_slice_mut(a0 + t), db, da);
            matmul(out, Accum::Replace, yk.as_ref().subcols(t * da, da), va, 1.0, Par::Seq);
        }
        a0 += k;
    }
    Ok(ScramblingCoefficients {
        c,
        dim_a: da,
        dim_b: db,
        e_t: st.eigenvalues().to_vec(),
        e_a: sa.eigenvalues().to_vec(),
        e_b: sb.eigenvalues().to_vec(),
    })
}

impl ScramblingCoefficients {
    pub fn dim(&self) -> usize {
        self.e_t.len()
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn get(&self, alpha: usize, i: usize, j: usize) -> f64 {
        self.c[(i * self.dim_b + j, alpha)]
    }

    /// All `c[α, ·, ·]` with product index `i · dim_B + j`.
    pub fn column(&self, alpha: usize) -> &[f64] {
        self.c.col_as_slice(alpha)
    }

    pub fn energies_t(&self) -> &[f64] {
        &self.e_t
    }

    pub fn energies_a(&self) -> &[f64] {
        &self.e_a
    }

    pub fn energies_b(&self) -> &[f64] {
        &self.e_b
    }

    /// `E_i^A + E_j^B` for product index `k = i · dim_B + j`.
    pub fn product_energy(&self, k: usize) -> f64 {
        self.e_a[k / self.dim_b] + self.e_b[k % self.dim_b]
    }

    /// Largest deviation from 1 of the row sums (over `ij`) and column sums
    /// (over α) of `c²`.
    pub fn stochasticity_error(&self) -> f64 {
        let n = self.dim();
        let mut cols = vec![0.0f64; n];
        let mut worst = 0.0f64;
        for alpha in 0..n {
            let col = self.column(alpha);
            let mut s = 0.0;
            for (k, v) in col.iter().enumerate() {
                let sq = v * v;
                s += sq;
                cols[k] += sq;
            }
            worst = worst.max((s - 1.0).abs());
        }
        for s in cols {
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }

    /// Entries with `|c| > threshold` as `(α, i, j, c)`.
    pub fn to_triplets(&self, threshold: f64) -> Vec<(usize, usize, usize, f64)> {
        let mut out = Vec::new();
        for alpha in 0..self.dim() {
            for (k, &v) in self.column(alpha).iter().enumerate() {
                if v.abs() > threshold {
                    out.push((alpha, k / self.dim_b, k % self.dim_b, v));
                }
            }
        }
        out
    }

    /// Indices α whose energy lies in the central `fraction` of the total
    /// spectral range.
    pub fn central_window(&self, fraction: f64) -> Result<Vec<usize>> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::Range(format!(
                "center fraction {fraction} must lie in (0, 1]"
            )));
        }
        let lo = self.e_t[0];
        let hi = self.e_t[self.dim() - 1];
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * fraction * (hi - lo);
        let idx: Vec<usize> = (0..self.dim())
            .filter(|&a| (self.e_t[a] - mid).abs() <= half)
            .collect();
        if idx.is_empty() {
            return Err(Error::Range(format!(
                "no eigenvalues within the central fraction {fraction}"
            )));
        }
        Ok(idx)
    }
}

/// Symmetric scrambling profile `h(E)` of the energy offset
/// `E = E_α − E_i − E_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ScramblingKernel {
    /// `exp(−√2|E|/σ_S)`, truncated at `40 σ_S`.
    Exponential { sigma_s: f64 },
    /// Indicator of `|E| ≤ Δ/2`.
    FlatWindow { delta: f64 },
}

impl ScramblingKernel {
    /// Flat window with the same standard deviation, `Δ = 2√3 σ_S`.
    pub fn flat_from_sigma(sigma_s: f64) -> Self {
        ScramblingKernel::FlatWindow {
            delta: 2.0 * 3f64.sqrt() * sigma_s,
        }
    }

    pub fn sigma_s(&self) -> f64 {
        match *self {
            ScramblingKernel::Exponential { sigma_s } => sigma_s,
            ScramblingKernel::FlatWindow { delta } => delta / (2.0 * 3f64.sqrt()),
        }
    }

    /// `N_h = ∫ h`.
    pub fn norm(&self) -> f64 {
        match *self {
            ScramblingKernel::Exponential { sigma_s } => SQRT_2 * sigma_s,
            ScramblingKernel::FlatWindow { delta } => delta,
        }
    }

    /// `[h⋆h](E)` in closed form.
    pub fn autocorrelation(&self, e: f64) -> f64 {
        match *self {
            ScramblingKernel::Exponential { sigma_s } => {
                (sigma_s / SQRT_2 + e.abs()) * (-SQRT_2 * e.abs() / sigma_s).exp()
            }
            ScramblingKernel::FlatWindow { delta } => (delta - e.abs()).max(0.0),
        }
    }
}

impl SpectralFunction for ScramblingKernel {
    fn eval(&self, e: f64) -> f64 {
        match *self {
            ScramblingKernel::Exponential { sigma_s } => {
                if e.abs() > 40.0 * sigma_s {
                    0.0
                } else {
                    (-SQRT_2 * e.abs() / sigma_s).exp()
                }
            }
            ScramblingKernel::FlatWindow { delta } => {
                if e.abs() <= 0.5 * delta {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        match *self {
            ScramblingKernel::Exponential { sigma_s } => (-40.0 * sigma_s, 40.0 * sigma_s),
            ScramblingKernel::FlatWindow { delta } => (-0.5 * delta, 0.5 * delta),
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match *self {
            ScramblingKernel::Exponential { .. } => vec![0.0],
            ScramblingKernel::FlatWindow { delta } => vec![-0.5 * delta, 0.5 * delta],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScramblingProfile {
    /// Offset bin centres.
    pub offsets: Vec<f64>,
    /// Mean `c²` per offset bin.
    pub mean_sq: Vec<f64>,
    pub sigma_s: f64,
    /// `c²`-weighted mean offset over the window.
    pub mean_offset: f64,
    pub fit: ScramblingKernel,
    pub n_h: f64,
    /// Number of α in the window.
    pub window_states: usize,
}

pub const DEFAULT_CENTER_FRACTION: f64 = 0.5;

/// Second-moment scrambling width over the central `center_fraction` of the
/// total spectrum, with a binned `c²` profile and the exponential kernel of
/// matching width.
pub fn profile(coeffs: &ScramblingCoefficients, center_fraction: f64) -> Result<ScramblingProfile> {
    let window = coeffs.central_window(center_fraction)?;
    let n = coeffs.dim();
    let energies: Vec<f64> = (0..n).map(|k| coeffs.product_energy(k)).collect();
    let (mut w, mut m1, mut m2) = (0.0f64, 0.0f64, 0.0f64);
    for &alpha in &window {
        let ea = coeffs.e_t[alpha];
        for (k, &v) in coeffs.column(alpha).iter().enumerate() {
            let sq = v * v;
            let d = ea - energies[k];
            w += sq;
            m1 += sq * d;
            m2 += sq * d * d;
        }
    }
    let sigma_s = (m2 / w).sqrt();
    let mean_offset = m1 / w;

    let span = if sigma_s > 0.0 { 6.0 * sigma_s } else { 1.0 };
    let nbins = 61usize;
    let width = 2.0 * span / nbins as f64;
    let mut sums = vec![0.0f64; nbins];
    let mut counts = vec![0usize; nbins];
    for &alpha in &window {
        let ea = coeffs.e_t[alpha];
        for (k, &v) in coeffs.column(alpha).iter().enumerate() {
            let d = ea - energies[k];
            if d.abs() < span {
                let b = (((d + span) / width) as usize).min(nbins - 1);
                sums[b] += v * v;
                counts[b] += 1;
            }
        }
    }
    let offsets = (0..nbins).map(|b| -span + (b as f64 + 0.5) * width).collect();
    let mean_sq = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let fit = ScramblingKernel::Exponential { sigma_s };
    Ok(ScramblingProfile {
        offsets,
        mean_sq,
        sigma_s,
        mean_offset,
        n_h: fit.norm(),
        fit,
        window_states: window.len(),
    })
}
