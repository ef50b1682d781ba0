//! Predictions for off-diagonal matrix-element variances of local operators
//! and for their smooth diagonal.
//!
//! Continuum forms return the envelope `f(Ē, ω)`; the full variance is
//! `(e^{-S/2} f)²` with the entropic factor `(σ_S n_0(Ē))^{-1/2}`. The
//! exact-sum forms produce the variance directly and `f` is recovered by
//! dividing out the same factor.

pub mod continuum;
pub mod discrete;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use continuum::{
    entropic_factor, f_exp_decay, f_mc_finite_width, f_narrow, f_small_a, f_small_a_flat,
    f_smooth_small_a, rmt_variance,
};
pub use discrete::{
    f_microcanonical_exact, f_smooth_sums, gibbs_average, gibbs_diagonal, gibbs_diagonal_with,
    log_density_slope, microcanonical_variance, smooth_variance, FactorSpectra, GibbsPredictor,
    OperatorWeights,
};

use continuum::{mc_finite_width_with, smooth_small_a_with, Autocorrelation};

use crate::error::{Error, Result};
use crate::hamiltonians::BipartiteSystem;
use crate::linalg::{density_of_states, SpectralDensity};
use crate::scrambling::ScramblingKernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnsatzKind {
    #[serde(rename = "microcanonical_exact_sums")]
    MicrocanonicalExactSums,
    #[serde(rename = "narrow_scrambling")]
    NarrowScrambling,
    #[serde(rename = "small_A_narrow")]
    SmallANarrow,
    #[serde(rename = "flat_A_narrow")]
    FlatANarrow,
    #[serde(rename = "smooth_general_sums")]
    SmoothGeneralSums,
    #[serde(rename = "smooth_small_A")]
    SmoothSmallA,
    #[serde(rename = "exp_decay_flat_A")]
    ExpDecayFlatA,
    #[serde(rename = "mc_finite_width_flat_A")]
    McFiniteWidthFlatA,
}

impl AnsatzKind {
    pub const ALL: [AnsatzKind; 8] = [
        AnsatzKind::MicrocanonicalExactSums,
        AnsatzKind::NarrowScrambling,
        AnsatzKind::SmallANarrow,
        AnsatzKind::FlatANarrow,
        AnsatzKind::SmoothGeneralSums,
        AnsatzKind::SmoothSmallA,
        AnsatzKind::ExpDecayFlatA,
        AnsatzKind::McFiniteWidthFlatA,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AnsatzKind::MicrocanonicalExactSums => "microcanonical_exact_sums",
            AnsatzKind::NarrowScrambling => "narrow_scrambling",
            AnsatzKind::SmallANarrow => "small_A_narrow",
            AnsatzKind::FlatANarrow => "flat_A_narrow",
            AnsatzKind::SmoothGeneralSums => "smooth_general_sums",
            AnsatzKind::SmoothSmallA => "smooth_small_A",
            AnsatzKind::ExpDecayFlatA => "exp_decay_flat_A",
            AnsatzKind::McFiniteWidthFlatA => "mc_finite_width_flat_A",
        }
    }

    pub fn uses_exact_sums(&self) -> bool {
        matches!(
            self,
            AnsatzKind::MicrocanonicalExactSums | AnsatzKind::SmoothGeneralSums
        )
    }
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnsatzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AnsatzKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = AnsatzKind::ALL.iter().map(|k| k.as_str()).collect();
                Error::InvalidInput(format!("unknown model `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

/// Densities and spectra a model may draw on.
#[derive(Debug, Clone, Default)]
pub struct AnsatzInputs {
    pub n_a: Option<SpectralDensity>,
    pub n_b: Option<SpectralDensity>,
    pub n_0: Option<SpectralDensity>,
    pub discrete: Option<FactorSpectra>,
}

impl AnsatzInputs {
    /// Histogram densities of `H_A`, `H_B`, `H_0` plus the factor spectra.
    pub fn from_system(system: &BipartiteSystem, bins: usize) -> Result<Self> {
        Self::from_spectra(FactorSpectra::from_system(system), bins)
    }

    pub fn from_spectra(spectra: FactorSpectra, bins: usize) -> Result<Self> {
        Ok(Self {
            n_a: Some(density_of_states(spectra.e_a(), bins)?),
            n_b: Some(density_of_states(spectra.e_b(), bins)?),
            n_0: Some(density_of_states(spectra.e_0(), bins)?),
            discrete: Some(spectra),
        })
    }
}

/// One analytic prediction with everything it needs.
#[derive(Debug, Clone)]
pub struct AnsatzModel {
    kind: AnsatzKind,
    sigma_s: f64,
    o2bar: f64,
    sigma_a: f64,
    n_a: Option<SpectralDensity>,
    n_b: Option<SpectralDensity>,
    n_0: SpectralDensity,
    discrete: Option<FactorSpectra>,
    weights: OperatorWeights,
    /// `[ρ⋆ρ]` of the A density the model integrates over, when it needs one.
    corr: Option<(Autocorrelation, f64)>,
}

impl AnsatzModel {
    /// Typical-operator model. Fails if `kind` needs an input that is absent.
    pub fn new(kind: AnsatzKind, sigma_s: f64, o2bar: f64, inputs: &AnsatzInputs) -> Result<Self> {
        Self::with_weights(kind, sigma_s, OperatorWeights::Typical { o2bar }, inputs)
    }

    /// As [`Self::new`] with explicit operator weights; concrete weights
    /// replace the typical substitution in the exact-sum kinds.
    pub fn with_weights(
        kind: AnsatzKind,
        sigma_s: f64,
        weights: OperatorWeights,
        inputs: &AnsatzInputs,
    ) -> Result<Self> {
        let o2bar = weights.o2bar();
        if !(sigma_s > 0.0) || !sigma_s.is_finite() {
            return Err(Error::InvalidInput(format!("σ_S must be positive, got {sigma_s}")));
        }
        if !(o2bar > 0.0) || !o2bar.is_finite() {
            return Err(Error::InvalidInput(format!("O² must be positive, got {o2bar}")));
        }
        let missing = |what: &str| {
            Error::InvalidInput(format!("model {kind} requires {what}"))
        };
        let n_0 = inputs.n_0.clone().ok_or_else(|| missing("n_0"))?;
        let needs_discrete = kind.uses_exact_sums();
        let needs_na = matches!(
            kind,
            AnsatzKind::NarrowScrambling | AnsatzKind::SmallANarrow | AnsatzKind::SmoothSmallA
        );
        let needs_nb = kind == AnsatzKind::NarrowScrambling;
        if needs_discrete && inputs.discrete.is_none() {
            return Err(missing("discrete factor spectra"));
        }
        if needs_na && inputs.n_a.is_none() {
            return Err(missing("n_A"));
        }
        if needs_nb && inputs.n_b.is_none() {
            return Err(missing("n_B"));
        }
        let sigma_a = match (&inputs.discrete, &inputs.n_a) {
            (Some(d), _) => d.sigma_a(),
            (None, Some(n)) => n.sigma(),
            (None, None) => return Err(missing("an A spectrum")),
        };
        if !(sigma_a > 0.0) {
            return Err(Error::ZeroWidthSpectrum {
                count: inputs.discrete.as_ref().map_or(0, |d| d.dim_a()),
                value: sigma_a,
            });
        }
        let corr = match kind {
            AnsatzKind::SmoothSmallA => {
                let rho = inputs.n_a.as_ref().expect("checked").fractional();
                Some((Autocorrelation::new(&rho)?, rho.sigma()))
            }
            AnsatzKind::McFiniteWidthFlatA => {
                let rho = SpectralDensity::flat(0.0, sigma_a, 1.0)?;
                Some((Autocorrelation::new(&rho)?, sigma_a))
            }
            _ => None,
        };
        Ok(Self {
            kind,
            sigma_s,
            o2bar,
            sigma_a,
            n_a: inputs.n_a.clone(),
            n_b: inputs.n_b.clone(),
            n_0,
            discrete: inputs.discrete.clone(),
            weights,
            corr,
        })
    }

    pub fn kind(&self) -> AnsatzKind {
        self.kind
    }

    pub fn sigma_s(&self) -> f64 {
        self.sigma_s
    }

    pub fn sigma_a(&self) -> f64 {
        self.sigma_a
    }

    pub fn entropic_factor(&self, ebar: f64) -> Result<f64> {
        entropic_factor(&self.n_0, ebar, self.sigma_s)
    }

    /// Envelope `f(Ē, ω)`.
    pub fn f(&self, ebar: f64, omega: f64) -> Result<f64> {
        let e = self.entropic_factor(ebar)?;
        self.f_with_factor(ebar, omega, e)
    }

    fn f_with_factor(&self, ebar: f64, omega: f64, e: f64) -> Result<f64> {
        let s = self.sigma_s;
        let o2 = self.o2bar;
        Ok(match self.kind {
            AnsatzKind::MicrocanonicalExactSums => {
                let d = self.discrete.as_ref().expect("validated");
                let delta = 2.0 * 3f64.sqrt() * s;
                microcanonical_variance(d, &self.weights, delta, ebar + omega, ebar - omega)?.sqrt() / e
            }
            AnsatzKind::SmoothGeneralSums => {
                let d = self.discrete.as_ref().expect("validated");
                let h = ScramblingKernel::Exponential { sigma_s: s };
                smooth_variance(d, &self.weights, &h, ebar + omega, ebar - omega)?.sqrt() / e
            }
            AnsatzKind::NarrowScrambling => f_narrow(
                self.n_a.as_ref().expect("validated"),
                self.n_b.as_ref().expect("validated"),
                &self.n_0,
                o2,
                s,
                ebar,
                omega,
            )?,
            AnsatzKind::SmallANarrow => {
                f_small_a(self.n_a.as_ref().expect("validated"), o2, s, omega)?
            }
            AnsatzKind::FlatANarrow => f_small_a_flat(self.sigma_a, o2, s, omega)?,
            AnsatzKind::SmoothSmallA => {
                let (corr, width) = self.corr.as_ref().expect("built with the model");
                smooth_small_a_with(corr, *width, &ScramblingKernel::Exponential { sigma_s: s }, o2, omega)?
            }
            AnsatzKind::ExpDecayFlatA => f_exp_decay(self.sigma_a, s, o2, omega)?,
            AnsatzKind::McFiniteWidthFlatA => {
                let (corr, _) = self.corr.as_ref().expect("built with the model");
                mc_finite_width_with(corr, o2, self.sigma_a, s, omega)?
            }
        })
    }

    /// Evaluates the model on `omegas` at fixed `Ē`, in grid order.
    pub fn predict(&self, ebar: f64, omegas: &[f64]) -> Result<Prediction> {
        let e = self.entropic_factor(ebar)?;
        let f = omegas
            .iter()
            .map(|&w| self.f_with_factor(ebar, w, e))
            .collect::<Result<Vec<_>>>()?;
        let variance = f.iter().map(|v| (e * v).powi(2)).collect();
        Ok(Prediction {
            model: self.kind,
            ebar,
            omega: omegas.to_vec(),
            f,
            entropic_factor: e,
            variance,
        })
    }
}

/// Model output on an ω grid at one `Ē`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub model: AnsatzKind,
    pub ebar: f64,
    pub omega: Vec<f64>,
    pub f: Vec<f64>,
    pub entropic_factor: f64,
    /// `(entropic_factor · f)²`.
    pub variance: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs() -> AnsatzInputs {
        let e_a: Vec<f64> = (0..8).map(|k| -1.0 + 2.0 * k as f64 / 7.0).collect();
        let e_b: Vec<f64> = (0..512).map(|k| -8.0 + 16.0 * ((k as f64 + 0.5) / 512.0)).collect();
        AnsatzInputs::from_spectra(FactorSpectra::new(e_a, e_b).unwrap(), 16).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for k in AnsatzKind::ALL {
            assert_eq!(k.as_str().parse::<AnsatzKind>().unwrap(), k);
            let j = serde_json::to_string(&k).unwrap();
            assert_eq!(j, format!("\"{}\"", k.as_str()));
        }
        assert!("nope".parse::<AnsatzKind>().is_err());
    }

    #[test]
    fn missing_inputs_are_reported() {
        let mut i = inputs();
        i.n_b = None;
        assert!(AnsatzModel::new(AnsatzKind::NarrowScrambling, 0.1, 1.0, &i).is_err());
        assert!(AnsatzModel::new(AnsatzKind::SmallANarrow, 0.1, 1.0, &i).is_ok());
        assert!(AnsatzModel::new(AnsatzKind::SmallANarrow, 0.0, 1.0, &i).is_err());
    }

    #[test]
    fn every_kind_is_even_and_non_negative() {
        let i = inputs();
        for k in AnsatzKind::ALL {
            let m = AnsatzModel::new(k, 0.05, 1.0, &i).unwrap();
            for &w in &[0.0, 0.2, 0.45, 0.9] {
                let a = m.f(0.1, w).unwrap();
                let b = m.f(0.1, -w).unwrap();
                assert!(a >= 0.0, "{k}");
                assert!((a - b).abs() <= 1e-9 * a.max(1e-12), "{k} at {w}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn prediction_variance_consistency() {
        let i = inputs();
        let m = AnsatzModel::new(AnsatzKind::ExpDecayFlatA, 0.1, 1.0, &i).unwrap();
        let p = m.predict(0.0, &[0.0, 0.1, 0.3]).unwrap();
        for (f, v) in p.f.iter().zip(&p.variance) {
            assert!((v - (p.entropic_factor * f).powi(2)).abs() < 1e-18);
        }
    }
}
