//! TOML run configuration.
//!
//! Every section and key is optional; missing values take the defaults
//! below. Unknown keys are rejected with the line they appear on.
//!
//! ```toml
//! experiment = "fig2"
//! seed = 7
//!
//! [chain]
//! L = 12
//! J = 1.0
//! h_x = 1.05
//! h_z = 0.5
//! L_A = 3
//!
//! [ensemble]
//! count = 250
//!
//! [binning]
//! omega_bin_width = 0.015
//! Ebar_halfwidth = 0.5
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::cache::CachePolicy;
use crate::ansatz::AnsatzKind;
use crate::error::{Error, Result};
use crate::experiments::{BinningParams, Experiment, OperatorEnsembleSpec, SpectrumLaw};
use crate::hamiltonians::{RandomSystemParams, SpinChainParams, DEFAULT_MAX_SITES};

/// Largest dense guard a config may request.
pub const HARD_MAX_SITES: usize = 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    pub seed: u64,
    pub threads: usize,
    pub output_dir: PathBuf,
    /// Defaults to `<output_dir>/cache`.
    pub cache_dir: Option<PathBuf>,
    pub cache: CachePolicy,
    pub plot: bool,
    pub chain: ChainConfig,
    pub random: RandomConfig,
    pub ensemble: EnsembleConfig,
    pub binning: BinningConfig,
    pub ansatz: AnsatzConfig,
    pub figures: FigureConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 0,
            threads: 1,
            output_dir: PathBuf::from("ethlab-out"),
            cache_dir: None,
            cache: CachePolicy::Use,
            plot: false,
            chain: ChainConfig::default(),
            random: RandomConfig::default(),
            ensemble: EnsembleConfig::default(),
            binning: BinningConfig::default(),
            ansatz: AnsatzConfig::default(),
            figures: FigureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "J")]
    pub j: f64,
    pub h_x: f64,
    pub h_z: f64,
    /// Cut used by `coeffs`, `predict` and fig3.
    #[serde(rename = "L_A")]
    pub l_a: usize,
    pub max_sites: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            l: 12,
            j: 1.0,
            h_x: 1.05,
            h_z: 0.5,
            l_a: 3,
            max_sites: DEFAULT_MAX_SITES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomConfig {
    #[serde(rename = "L_A")]
    pub l_a: usize,
    #[serde(rename = "L_B")]
    pub l_b: usize,
    #[serde(rename = "L_I")]
    pub l_i: usize,
    pub f: f64,
    pub a_scale: f64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        Self {
            l_a: 2,
            l_b: 9,
            l_i: 2,
            f: 0.01,
            a_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub count: usize,
    pub spectrum_law: SpectrumLaw,
    pub normalize: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            count: OperatorEnsembleSpec::DEFAULT_COUNT,
            spectrum_law: SpectrumLaw::FlatPm1,
            normalize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BinningConfig {
    pub omega_bin_width: f64,
    #[serde(rename = "Ebar_halfwidth")]
    pub ebar_halfwidth: f64,
    /// Scale the bin width by the spectral range relative to the reference
    /// chain.
    pub rescale_bin_width: bool,
    pub omega_max: Option<f64>,
}

impl Default for BinningConfig {
    fn default() -> Self {
        Self {
            omega_bin_width: crate::experiments::binning::DEFAULT_BIN_WIDTH,
            ebar_halfwidth: crate::experiments::binning::DEFAULT_HALFWIDTH,
            rescale_bin_width: true,
            omega_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnsatzConfig {
    pub models: Vec<AnsatzKind>,
    /// Histogram bins for the interpolated densities.
    pub density_bins: usize,
    /// Fraction of the spectrum over which `σ_S` is measured.
    pub center_fraction: f64,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self {
            models: AnsatzKind::ALL.to_vec(),
            density_bins: crate::linalg::DEFAULT_BINS,
            center_fraction: crate::scrambling::DEFAULT_CENTER_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FigureConfig {
    pub fig1_alphas: usize,
    /// Cuts for the `L_A` scan; unset means the odd cuts 1, 3, 5, 7 that fit
    /// below `L`.
    #[serde(rename = "fig2_L_A", skip_serializing_if = "Option::is_none")]
    pub fig2_l_a: Option<Vec<usize>>,
    /// `Ē = fraction · E_min`.
    #[serde(rename = "fig2_Ebar_fractions")]
    pub fig2_ebar_fractions: Vec<f64>,
    #[serde(rename = "fig3_Ebar_fractions")]
    pub fig3_ebar_fractions: Vec<f64>,
    #[serde(rename = "appB_operators")]
    pub appb_operators: usize,
    /// Defaults to a quarter of the total spectral range.
    #[serde(rename = "appB_Ebar_halfwidth")]
    pub appb_ebar_halfwidth: Option<f64>,
    /// Defaults to `σ_S / 2`.
    #[serde(rename = "appB_bin_width")]
    pub appb_bin_width: Option<f64>,
}

impl Default for FigureConfig {
    fn default() -> Self {
        Self {
            fig1_alphas: 7,
            fig2_l_a: None,
            fig2_ebar_fractions: vec![0.0, 0.5],
            fig3_ebar_fractions: vec![0.0, 0.25, 0.5],
            appb_operators: 50,
            appb_ebar_halfwidth: None,
            appb_bin_width: None,
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates configuration text. `path` only labels errors.
pub fn parse_config_str(text: &str, path: &Path) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::ConfigParse {
        path: path.to_path_buf(),
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, path)
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be a positive number, got {v}")))
    }
}

impl RunConfig {
    /// Full check, including the figure settings.
    pub fn validate(&self) -> Result<()> {
        self.validate_system()?;
        self.validate_figures()
    }

    /// Checks everything except the figure settings, for commands that
    /// build a single system.
    pub fn validate_system(&self) -> Result<()> {
        let c = &self.chain;
        if c.max_sites > HARD_MAX_SITES {
            return Err(Error::validation(
                "chain.max_sites",
                format!("at most {HARD_MAX_SITES} sites can be diagonalized densely, got {}", c.max_sites),
            ));
        }
        if c.l < 2 || c.l > c.max_sites {
            return Err(Error::validation(
                "chain.L",
                format!("must be in 2..={} (dense guard), got {}", c.max_sites, c.l),
            ));
        }
        for (name, v) in [("chain.J", c.j), ("chain.h_x", c.h_x), ("chain.h_z", c.h_z)] {
            if !v.is_finite() {
                return Err(Error::validation(name, format!("must be finite, got {v}")));
            }
        }
        let cut = |field: &str, l_a: usize| {
            if l_a == 0 || l_a >= c.l {
                Err(Error::validation(field, format!("must satisfy 1 ≤ L_A < L = {}, got {l_a}", c.l)))
            } else {
                Ok(())
            }
        };
        cut("chain.L_A", c.l_a)?;
        self.random_params()
            .validate()
            .map_err(|e| Error::validation("random", e.to_string()))?;
        if self.threads == 0 {
            return Err(Error::validation("threads", "must be ≥ 1"));
        }
        if self.ensemble.count == 0 {
            return Err(Error::validation("ensemble.count", "must be ≥ 1"));
        }
        let b = &self.binning;
        positive("binning.omega_bin_width", b.omega_bin_width)?;
        positive("binning.Ebar_halfwidth", b.ebar_halfwidth)?;
        if let Some(m) = b.omega_max {
            positive("binning.omega_max", m)?;
        }
        let a = &self.ansatz;
        if a.models.is_empty() {
            return Err(Error::validation("ansatz.models", "needs at least one model"));
        }
        if a.density_bins < 4 {
            return Err(Error::validation("ansatz.density_bins", format!("must be ≥ 4, got {}", a.density_bins)));
        }
        if !(a.center_fraction > 0.0 && a.center_fraction <= 1.0) {
            return Err(Error::validation(
                "ansatz.center_fraction",
                format!("must be in (0, 1], got {}", a.center_fraction),
            ));
        }
        Ok(())
    }

    fn validate_figures(&self) -> Result<()> {
        let f = &self.figures;
        if let Some(cuts) = &f.fig2_l_a {
            for &l in cuts {
                if l == 0 || l >= self.chain.l {
                    return Err(Error::validation(
                        "figures.fig2_L_A",
                        format!("must satisfy 1 ≤ L_A < L = {}, got {l}", self.chain.l),
                    ));
                }
            }
            if cuts.is_empty() {
                return Err(Error::validation("figures.fig2_L_A", "needs at least one cut"));
            }
        }
        if f.fig1_alphas == 0 {
            return Err(Error::validation("figures.fig1_alphas", "must be ≥ 1"));
        }
        for (name, fr) in [
            ("figures.fig2_Ebar_fractions", &f.fig2_ebar_fractions),
            ("figures.fig3_Ebar_fractions", &f.fig3_ebar_fractions),
        ] {
            if fr.is_empty() || fr.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::validation(name, "needs one or more values in [0, 1]"));
            }
        }
        if f.appb_operators == 0 {
            return Err(Error::validation("figures.appB_operators", "must be ≥ 1"));
        }
        if let Some(v) = f.appb_ebar_halfwidth {
            positive("figures.appB_Ebar_halfwidth", v)?;
        }
        if let Some(v) = f.appb_bin_width {
            positive("figures.appB_bin_width", v)?;
        }
        Ok(())
    }

    /// Cuts scanned by the `L_A` figure.
    pub fn fig2_cuts(&self) -> Vec<usize> {
        match &self.figures.fig2_l_a {
            Some(c) => c.clone(),
            None => (1..self.chain.l.min(8)).step_by(2).collect(),
        }
    }

    pub fn chain_params(&self) -> SpinChainParams {
        let c = &self.chain;
        SpinChainParams {
            max_sites: c.max_sites,
            ..SpinChainParams::new(c.l, c.j, c.h_x, c.h_z)
        }
    }

    pub fn random_params(&self) -> RandomSystemParams {
        let r = &self.random;
        RandomSystemParams {
            a_scale: r.a_scale,
            max_sites: self.chain.max_sites,
            ..RandomSystemParams::new(r.l_a, r.l_b, r.l_i, r.f, self.seed)
        }
    }

    pub fn ensemble_spec(&self, dim_a: usize) -> OperatorEnsembleSpec {
        OperatorEnsembleSpec {
            count: self.ensemble.count,
            dim_a,
            spectrum_law: self.ensemble.spectrum_law,
            normalize: self.ensemble.normalize,
            seed: self.seed,
        }
    }

    /// Binning at `ebar` with the configured (unscaled) bin width.
    pub fn binning_params(&self, ebar: f64) -> BinningParams {
        BinningParams {
            ebar_center: ebar,
            ebar_halfwidth: self.binning.ebar_halfwidth,
            omega_bin_width: self.binning.omega_bin_width,
            omega_max: self.binning.omega_max,
        }
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache_dir.clone().unwrap_or_else(|| self.output_dir.join("cache"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        parse_config_str(text, Path::new("run.toml"))
    }

    #[test]
    fn empty_config_is_the_reference_run() {
        let c = parse("experiment = \"fig2\"").unwrap();
        assert_eq!(c.experiment, Some(Experiment::Fig2ScanLa));
        assert_eq!(c.chain.l, 12);
        assert_eq!(c.chain.j, 1.0);
        assert_eq!(c.chain.h_x, 1.05);
        assert_eq!(c.chain.h_z, 0.5);
        assert_eq!(c.ensemble.count, 250);
        assert_eq!(c.binning.omega_bin_width, 0.015);
        assert_eq!(c.binning.ebar_halfwidth, 0.5);
        assert_eq!(parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn dense_guard() {
        let e = parse("[chain]\nL = 20\n").unwrap_err();
        assert!(matches!(&e, Error::Validation { field, .. } if field == "chain.L"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn negative_bin_width() {
        let e = parse("[binning]\nomega_bin_width = -0.01\n").unwrap_err();
        assert!(matches!(&e, Error::Validation { field, .. } if field == "binning.omega_bin_width"));
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let e = parse("seed = 1\n\n[chain]\nL = 10\nbogus = 3\n").unwrap_err();
        match e {
            Error::ConfigParse { line, message, .. } => {
                assert_eq!(line, 5);
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn malformed_syntax_reports_its_line() {
        let e = parse("seed = 1\nthreads = = 2\n").unwrap_err();
        assert!(matches!(e, Error::ConfigParse { line: 2, .. }), "{e}");
    }

    #[test]
    fn models_and_experiments_by_name() {
        let c = parse("experiment = \"appB\"\n[ansatz]\nmodels = [\"exp_decay_flat_A\"]\n").unwrap();
        assert_eq!(c.experiment, Some(Experiment::AppBBanding));
        assert_eq!(c.ansatz.models, vec![AnsatzKind::ExpDecayFlatA]);
        assert!(parse("[ansatz]\nmodels = [\"nope\"]\n").is_err());
    }

    #[test]
    fn bad_cut_names_its_field() {
        let e = parse("[chain]\nL = 8\n[figures]\nfig2_L_A = [1, 9]\n").unwrap_err();
        assert!(matches!(&e, Error::Validation { field, .. } if field == "figures.fig2_L_A"));
        let e = parse("[random]\nL_I = 0\n").unwrap_err();
        assert!(matches!(&e, Error::Validation { field, .. } if field == "random"));
    }
}
