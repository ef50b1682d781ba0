//! Off-diagonal envelopes built from smooth densities of states.

use crate::error::{Error, Result};
use crate::linalg::{
    cross_correlate, integrate_adaptive, CrossCorrelation, SpectralDensity, SpectralFunction,
    Tabulated, DEFAULT_TOL,
};
use crate::scrambling::ScramblingKernel;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn sqrt3() -> f64 {
    3f64.sqrt()
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

/// `(σ_S · n_0(Ē))^{-1/2}`.
pub fn entropic_factor(n_0: &SpectralDensity, ebar: f64, sigma_s: f64) -> Result<f64> {
    check_positive("sigma_S", sigma_s)?;
    let v = n_0.eval(ebar);
    if !n_0.contains(ebar) || !(v > 0.0) {
        return Err(Error::OutOfSupport(format!(
            "Ē = {ebar} outside the support [{}, {}] of n_0",
            n_0.spectral_min(),
            n_0.spectral_max()
        )));
    }
    Ok((sigma_s * v).powf(-0.5))
}

/// `O²/|H|`, the flat random-matrix variance.
pub fn rmt_variance(o2bar: f64, total_dim: usize) -> Result<f64> {
    if total_dim == 0 {
        return Err(Error::InvalidInput("total dimension must be ≥ 1".into()));
    }
    Ok(o2bar / total_dim as f64)
}

/// Narrow-scrambling envelope with general factor densities:
///
/// `f² = (O²/|H_A|) σ_S n_0(Ē) / (n_0(Ē+ω) n_0(Ē−ω)) ∫ dε n_A(ε+ω) n_A(ε−ω) n_B(Ē−ε)`.
#[allow(clippy::too_many_arguments)]
pub fn f_narrow(
    n_a: &SpectralDensity,
    n_b: &SpectralDensity,
    n_0: &SpectralDensity,
    o2bar: f64,
    sigma_s: f64,
    ebar: f64,
    omega: f64,
) -> Result<f64> {
    check_positive("sigma_S", sigma_s)?;
    let plus = n_0.eval(ebar + omega);
    let minus = n_0.eval(ebar - omega);
    let centre = n_0.eval(ebar);
    if !(plus > 0.0 && minus > 0.0 && centre > 0.0) {
        return Err(Error::OutOfSupport(format!(
            "Ē ± ω = {} / {} not inside the support [{}, {}] of n_0",
            ebar + omega,
            ebar - omega,
            n_0.spectral_min(),
            n_0.spectral_max()
        )));
    }
    let w = omega.abs();
    let lo = (n_a.spectral_min() + w).max(ebar - n_b.spectral_max());
    let hi = (n_a.spectral_max() - w).min(ebar - n_b.spectral_min());
    let integral = if hi > lo {
        let mut kinks: Vec<f64> = Vec::new();
        for &g in n_a.grid() {
            kinks.push(g - omega);
            kinks.push(g + omega);
        }
        kinks.extend(n_b.grid().iter().map(|g| ebar - g));
        let scale = n_a.total() * n_a.total() * n_b.total() / (n_a.sigma() * n_b.sigma());
        integrate_adaptive(
            |e| n_a.eval(e + omega) * n_a.eval(e - omega) * n_b.eval(ebar - e),
            lo,
            hi,
            DEFAULT_TOL * scale.max(1.0),
            &kinks,
        )?
    } else {
        0.0
    };
    let f2 = (o2bar / n_a.total()) * sigma_s * centre / (plus * minus) * integral;
    Ok(f2.max(0.0).sqrt())
}

/// Autocorrelation `[ρ⋆ρ]` of a fractional density, exact when it has few
/// kinks and tabulated on 1025 points otherwise.
#[derive(Debug, Clone)]
pub(crate) enum Autocorrelation {
    Exact(CrossCorrelation<SpectralDensity, SpectralDensity>),
    Table(Tabulated),
}

impl Autocorrelation {
    pub(crate) fn new(rho: &SpectralDensity) -> Result<Self> {
        let c = cross_correlate(rho.clone(), rho.clone());
        if rho.grid().len() <= 32 {
            Ok(Self::Exact(c))
        } else {
            Ok(Self::Table(c.tabulate(1025)?))
        }
    }
}

impl SpectralFunction for Autocorrelation {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Exact(c) => c.eval(x),
            Self::Table(t) => t.eval(x),
        }
    }
    fn support(&self) -> (f64, f64) {
        match self {
            Self::Exact(c) => c.support(),
            Self::Table(t) => t.support(),
        }
    }
    fn kinks(&self) -> Vec<f64> {
        match self {
            Self::Exact(c) => c.kinks(),
            Self::Table(t) => t.kinks(),
        }
    }
}

/// `f² = O² σ_S [ρ_A⋆ρ_A](2ω)`.
pub fn f_small_a(rho_a: &SpectralDensity, o2bar: f64, sigma_s: f64, omega: f64) -> Result<f64> {
    check_positive("sigma_S", sigma_s)?;
    let c = cross_correlate(rho_a.fractional(), rho_a.fractional());
    let v = c.try_eval(2.0 * omega)?;
    Ok((o2bar * sigma_s * v).max(0.0).sqrt())
}

/// Closed form of [`f_small_a`] for a flat `ρ_A` of range `σ_A`:
/// `f² = O² (σ_S/σ_A)(1 − 2|ω|/σ_A)` for `|ω| ≤ σ_A/2`, else 0.
pub fn f_small_a_flat(sigma_a: f64, o2bar: f64, sigma_s: f64, omega: f64) -> Result<f64> {
    check_positive("sigma_A", sigma_a)?;
    check_positive("sigma_S", sigma_s)?;
    let t = 1.0 - 2.0 * omega.abs() / sigma_a;
    Ok((o2bar * sigma_s / sigma_a * t.max(0.0)).sqrt())
}

/// Flat `ρ_A` with exponential scrambling:
///
/// `f² = (O²/(2√2)) ∫_{-1}^{1} dx (1−|x|)(1 + √2|2ω−xσ_A|/σ_S) exp(−√2|2ω−xσ_A|/σ_S)`.
pub fn f_exp_decay(sigma_a: f64, sigma_s: f64, o2bar: f64, omega: f64) -> Result<f64> {
    check_positive("sigma_A", sigma_a)?;
    check_positive("sigma_S", sigma_s)?;
    let integrand = |x: f64| {
        let u = (2.0 * omega - x * sigma_a).abs();
        let r = SQRT_2 * u / sigma_s;
        (1.0 - x.abs()) * (1.0 + r) * (-r).exp()
    };
    let centre = 2.0 * omega / sigma_a;
    let w = sigma_s / sigma_a;
    let mut kinks = vec![0.0, centre, 1.0 - w, w - 1.0];
    kinks.extend((1..=5).flat_map(|j| [centre - j as f64 * w, centre + j as f64 * w]));
    let tol = DEFAULT_TOL * (w.min(1.0) * 1e-2);
    let mut v = integrate_adaptive(integrand, -1.0, 1.0, tol, &kinks)?;
    if v < 1e4 * tol {
        // Far tail: tighten to a relative tolerance.
        let rel = (v.abs() * 1e-9).max(f64::MIN_POSITIVE);
        v = integrate_adaptive(integrand, -1.0, 1.0, rel, &kinks)?;
    }
    Ok((o2bar / (2.0 * SQRT_2) * v).max(0.0).sqrt())
}

/// Smooth scrambling kernel with a general `ρ_A` in the small-A limit:
///
/// `f² = (2 O² σ_S / N_h²) ∫ dω′ [ρ_A⋆ρ_A](2ω′) [h⋆h](2ω − 2ω′)`.
pub fn f_smooth_small_a(
    rho_a: &SpectralDensity,
    kernel: &ScramblingKernel,
    o2bar: f64,
    omega: f64,
) -> Result<f64> {
    check_positive("sigma_S", kernel.sigma_s())?;
    let rho = rho_a.fractional();
    smooth_small_a_with(&Autocorrelation::new(&rho)?, rho.sigma(), kernel, o2bar, omega)
}

/// [`f_smooth_small_a`] with a precomputed `[ρ_A⋆ρ_A]` of a density of width `sigma_rho`.
pub(crate) fn smooth_small_a_with(
    corr: &Autocorrelation,
    sigma_rho: f64,
    kernel: &ScramblingKernel,
    o2bar: f64,
    omega: f64,
) -> Result<f64> {
    let sigma_s = kernel.sigma_s();
    check_positive("sigma_S", sigma_s)?;
    let (c_lo, c_hi) = corr.support();
    let (k_lo, k_hi) = kernel.support();
    // 2ω′ ∈ corr support and 2ω − 2ω′ ∈ [2 k_lo, 2 k_hi].
    let lo = (0.5 * c_lo).max(omega - k_hi);
    let hi = (0.5 * c_hi).min(omega - k_lo);
    if !(hi > lo) {
        return Ok(0.0);
    }
    let mut kinks: Vec<f64> = corr.kinks().iter().map(|k| 0.5 * k).collect();
    kinks.push(omega);
    match *kernel {
        ScramblingKernel::FlatWindow { delta } => {
            kinks.push(omega - 0.5 * delta);
            kinks.push(omega + 0.5 * delta);
        }
        ScramblingKernel::Exponential { .. } => {
            kinks.push(omega - 5.0 * sigma_s);
            kinks.push(omega + 5.0 * sigma_s);
        }
    }
    let n_h = kernel.norm();
    let v = integrate_adaptive(
        |wp| corr.eval(2.0 * wp) * kernel.autocorrelation(2.0 * omega - 2.0 * wp),
        lo,
        hi,
        DEFAULT_TOL * 1e-2 * n_h * n_h / sigma_rho,
        &kinks,
    )?;
    Ok((2.0 * o2bar * sigma_s / (n_h * n_h) * v).max(0.0).sqrt())
}

/// Flat-window scrambling of finite width:
///
/// `f² = (O² σ_A/(2√3)) ∫_{-1}^{1} dx [ρ_A⋆ρ_A](xσ_A) (1 − |ω − xσ_A/2|/(√3σ_S)) Θ(·)`.
pub fn f_mc_finite_width(
    rho_a: &SpectralDensity,
    o2bar: f64,
    sigma_a: f64,
    sigma_s: f64,
    omega: f64,
) -> Result<f64> {
    let corr = Autocorrelation::new(&rho_a.fractional())?;
    mc_finite_width_with(&corr, o2bar, sigma_a, sigma_s, omega)
}

/// [`f_mc_finite_width`] with a precomputed `[ρ_A⋆ρ_A]`.
pub(crate) fn mc_finite_width_with(
    corr: &Autocorrelation,
    o2bar: f64,
    sigma_a: f64,
    sigma_s: f64,
    omega: f64,
) -> Result<f64> {
    check_positive("sigma_A", sigma_a)?;
    check_positive("sigma_S", sigma_s)?;
    let r = sqrt3() * sigma_s;
    let tent = |x: f64| {
        let t = 1.0 - (omega - 0.5 * x * sigma_a).abs() / r;
        t.max(0.0)
    };
    // Θ support in x: |ω − xσ_A/2| ≤ √3σ_S.
    let lo = (2.0 * (omega - r) / sigma_a).max(-1.0);
    let hi = (2.0 * (omega + r) / sigma_a).min(1.0);
    if !(hi > lo) {
        return Ok(0.0);
    }
    let mut kinks: Vec<f64> = corr.kinks().iter().map(|k| k / sigma_a).collect();
    kinks.push(2.0 * omega / sigma_a);
    let tol = DEFAULT_TOL * 1e-2 * (r / sigma_a).min(1.0);
    let v = integrate_adaptive(|x| corr.eval(x * sigma_a) * tent(x), lo, hi, tol, &kinks)?;
    Ok((o2bar * sigma_a / (2.0 * sqrt3()) * v).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::trapezoid;

    #[test]
    fn entropic_factor_arithmetic() {
        let n0 = SpectralDensity::flat(-1.0, 1.0, 2000.0).unwrap();
        let e = entropic_factor(&n0, 0.0, 1.0).unwrap();
        assert!((e - 0.0316228).abs() < 1e-7);
        let n1 = n0.with_total(4000.0);
        let e2 = entropic_factor(&n1, 0.0, 1.0).unwrap();
        assert!((e / e2 - 2f64.sqrt()).abs() < 1e-12);
        assert!(matches!(entropic_factor(&n0, 2.0, 1.0), Err(Error::OutOfSupport(_))));
    }

    #[test]
    fn rmt_arithmetic() {
        assert!((rmt_variance(1.0, 4096).unwrap() - 2.44141e-4).abs() < 1e-9);
    }

    #[test]
    fn small_a_flat_values() {
        let rho = SpectralDensity::flat(-2.0, 2.0, 1.0).unwrap();
        let f = f_small_a(&rho, 1.0, 1.0, 0.0).unwrap();
        assert!((f - 0.5).abs() < 1e-10);
        for &w in &[0.1, 0.5, 1.3, 1.99, 2.0, 2.5] {
            let a = f_small_a(&rho, 1.3, 0.7, w).unwrap();
            let b = f_small_a_flat(4.0, 1.3, 0.7, w).unwrap();
            assert!((a - b).abs() < 1e-8, "{w}");
        }
        assert_eq!(f_small_a_flat(4.0, 1.0, 1.0, 2.5).unwrap(), 0.0);
    }

    #[test]
    fn exp_decay_matches_trapezoid() {
        let (sa, ss) = (2.0f64, 1.0f64);
        let integrand = |x: f64| {
            let u = (0.0 - x * sa).abs();
            let r = SQRT_2 * u / ss;
            (1.0 - x.abs()) * (1.0 + r) * (-r).exp()
        };
        let oracle = trapezoid(integrand, -1.0, 1.0, 1_000_000);
        let f = f_exp_decay(sa, ss, 1.0, 0.0).unwrap();
        let got = f * f * 2.0 * SQRT_2;
        assert!((got - oracle).abs() < 1e-6);
    }

    #[test]
    fn exp_decay_far_tail_is_relatively_accurate() {
        let (sa, ss) = (8.0f64, 1.0f64);
        for omega in [6.0, 9.0, 12.0] {
            let integrand = |x: f64| {
                let r = SQRT_2 * (2.0 * omega - x * sa).abs() / ss;
                (1.0 - x.abs()) * (1.0 + r) * (-r).exp()
            };
            let oracle = (trapezoid(integrand, -1.0, 0.0, 200_000)
                + trapezoid(integrand, 0.0, 1.0, 2_000_000))
                / (2.0 * SQRT_2);
            let f = f_exp_decay(sa, ss, 1.0, omega).unwrap();
            assert!((f * f / oracle - 1.0).abs() < 1e-6, "{omega}");
        }
    }

    #[test]
    fn mc_finite_width_matches_trapezoid() {
        let (sa, ss) = (2.0f64, 0.5f64);
        let rho = SpectralDensity::flat(-1.0, 1.0, 1.0).unwrap();
        let r = 3f64.sqrt() * ss;
        let integrand = |x: f64| {
            let c = (1.0 / sa) * (1.0 - x.abs()).max(0.0);
            let t = (1.0 - (0.0 - 0.5 * x * sa).abs() / r).max(0.0);
            c * t
        };
        let oracle = sa / (2.0 * 3f64.sqrt()) * trapezoid(integrand, -1.0, 1.0, 1_000_000);
        let f = f_mc_finite_width(&rho, 1.0, sa, ss, 0.0).unwrap();
        assert!((f * f - oracle).abs() < 1e-6);
    }

    #[test]
    fn mc_finite_width_cutoff() {
        let rho = SpectralDensity::flat(-1.0, 1.0, 1.0).unwrap();
        let (sa, ss) = (2.0, 0.1);
        let beyond = 3f64.sqrt() * ss + sa / 2.0 + 1e-9;
        assert_eq!(f_mc_finite_width(&rho, 1.0, sa, ss, beyond).unwrap(), 0.0);
    }

    #[test]
    fn smooth_small_a_flat_equals_exp_decay() {
        let rho = SpectralDensity::flat(-1.5, 1.5, 1.0).unwrap();
        let k = ScramblingKernel::Exponential { sigma_s: 0.4 };
        for &w in &[0.0, 0.3, 0.9, 1.6, 2.2] {
            let a = f_smooth_small_a(&rho, &k, 1.0, w).unwrap();
            let b = f_exp_decay(3.0, 0.4, 1.0, w).unwrap();
            assert!((a - b).abs() < 1e-6 * b.max(1e-3), "{w}: {a} {b}");
        }
    }

    #[test]
    fn narrow_is_zero_beyond_half_range() {
        let na = SpectralDensity::flat(-1.0, 1.0, 8.0).unwrap();
        let nb = SpectralDensity::flat(-10.0, 10.0, 512.0).unwrap();
        let n0 = SpectralDensity::flat(-11.0, 11.0, 4096.0).unwrap();
        assert_eq!(f_narrow(&na, &nb, &n0, 1.0, 0.5, 0.0, 1.2).unwrap(), 0.0);
        let a = f_narrow(&na, &nb, &n0, 1.0, 0.5, 0.3, 0.4).unwrap();
        let b = f_narrow(&na, &nb, &n0, 1.0, 0.5, 0.3, -0.4).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}
