//! Dataset generation for each reproducible figure.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::bands::{detect_bands, gap_omegas};
use super::binning::{ensemble_statistics, BinnedStatistics, BinningParams, EnsembleStatistics};
use super::ensemble::{matrix_elements_total_basis, sample_local_operator, OperatorEnsembleSpec};
use crate::ansatz::{AnsatzInputs, AnsatzModel, GibbsPredictor};
use crate::error::{Error, Result};
use crate::hamiltonians::{build_random_system_with, decompose_chain_with, BipartiteSystem};
use crate::io::cache::{SystemKey, TotalSolver};
use crate::io::config::RunConfig;
use crate::io::dataset::{Cell, Schema, Table};
use crate::io::svg::{Plot, Series, Style};
use crate::scrambling::{compute_coefficients, profile, ScramblingCoefficients, ScramblingProfile};

/// Spectral range of the reference chain (L = 12, J = 1, h_x = 1.05,
/// h_z = 0.5) that the default bin width belongs to.
pub const REFERENCE_RANGE: f64 = 35.6541;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
pub enum Experiment {
    #[serde(rename = "fig1_coeffs", alias = "fig1")]
    #[value(name = "fig1", alias = "fig1_coeffs")]
    Fig1Coeffs,
    #[serde(rename = "fig2_scan_LA", alias = "fig2")]
    #[value(name = "fig2", alias = "fig2_scan_LA")]
    Fig2ScanLa,
    #[serde(rename = "fig3_scan_E", alias = "fig3")]
    #[value(name = "fig3", alias = "fig3_scan_E")]
    Fig3ScanE,
    #[serde(rename = "appB_banding", alias = "appB")]
    #[value(name = "appB", alias = "appB_banding")]
    AppBBanding,
}

impl Experiment {
    pub fn short_name(&self) -> &'static str {
        match self {
            Experiment::Fig1Coeffs => "fig1",
            Experiment::Fig2ScanLa => "fig2",
            Experiment::Fig3ScanE => "fig3",
            Experiment::AppBBanding => "appB",
        }
    }
}

/// Everything a figure run produces, before it is written out.
#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub experiment: Experiment,
    pub tables: Vec<Table>,
    /// Extra JSON documents as `(file stem, value)`.
    pub documents: Vec<(String, Value)>,
    /// Measured quantities for the manifest.
    pub results: Value,
    pub timings: Vec<(String, f64)>,
    pub plots: Vec<(String, Plot)>,
}

struct Timer {
    start: Instant,
    laps: Vec<(String, f64)>,
}

impl Timer {
    fn new() -> Self {
        Self { start: Instant::now(), laps: Vec::new() }
    }

    fn lap(&mut self, name: impl Into<String>) {
        let now = Instant::now();
        self.laps.push((name.into(), (now - self.start).as_secs_f64()));
        self.start = now;
    }
}

/// Chain cut after `l_a` sites, with `H_T` from `solver`.
pub fn chain_system(cfg: &RunConfig, solver: &dyn TotalSolver, l_a: usize) -> Result<BipartiteSystem> {
    let params = cfg.chain_params();
    decompose_chain_with(&params, l_a, |h| solver.solve(&SystemKey::Chain(params), h))
}

pub fn random_system(cfg: &RunConfig, solver: &dyn TotalSolver) -> Result<BipartiteSystem> {
    let params = cfg.random_params();
    build_random_system_with(&params, |h| solver.solve(&SystemKey::Random(params), h))
}

/// Configured bin width, scaled with the spectral range when enabled.
pub fn bin_width(cfg: &RunConfig, system: &BipartiteSystem) -> f64 {
    let w = cfg.binning.omega_bin_width;
    if cfg.binning.rescale_bin_width {
        w * system.spectrum_t().range() / REFERENCE_RANGE
    } else {
        w
    }
}

/// Mean `λ²` of the ensemble's operator spectra.
pub fn ensemble_o2bar(spec: &OperatorEnsembleSpec) -> f64 {
    if spec.normalize {
        1.0
    } else {
        1.0 / 3.0
    }
}

pub fn measure_profile(system: &BipartiteSystem, center_fraction: f64) -> Result<ScramblingProfile> {
    profile(&compute_coefficients(system)?, center_fraction)
}

fn profile_json(p: &ScramblingProfile) -> Value {
    json!({
        "sigma_s": p.sigma_s,
        "mean_offset": p.mean_offset,
        "n_h": p.n_h,
        "window_states": p.window_states,
    })
}

/// Appends one row per `(model, ω)` on the measured grid. Points outside a
/// model's support are skipped.
pub fn prediction_rows(
    cfg: &RunConfig,
    inputs: &AnsatzInputs,
    sigma_s: f64,
    o2bar: f64,
    ebar: f64,
    omegas: &[f64],
    table: &mut Table,
) -> Result<Vec<(String, usize)>> {
    let mut counts = Vec::new();
    for &kind in &cfg.ansatz.models {
        let model = AnsatzModel::new(kind, sigma_s, o2bar, inputs)?;
        let e = match model.entropic_factor(ebar) {
            Ok(e) => e,
            Err(Error::OutOfSupport(_)) => {
                counts.push((kind.to_string(), 0));
                continue;
            }
            Err(err) => return Err(err),
        };
        let mut n = 0;
        for &w in omegas {
            match model.f(ebar, w) {
                Ok(f) => {
                    table.push(vec![
                        kind.as_str().into(),
                        ebar.into(),
                        w.into(),
                        f.into(),
                        e.into(),
                        (e * f).powi(2).into(),
                    ]);
                    n += 1;
                }
                Err(Error::OutOfSupport(_) | Error::DegenerateWindow(_)) => {}
                Err(err) => return Err(err),
            }
        }
        counts.push((kind.to_string(), n));
    }
    Ok(counts)
}

pub fn binned_rows(b: &BinnedStatistics, table: &mut Table) {
    for bin in &b.bins {
        table.push(vec![
            b.ebar_center.into(),
            bin.omega_mid.into(),
            bin.mean_sq.into(),
            Cell::Count(bin.count),
            bin.std_err.into(),
        ]);
    }
}

/// Measured window diagonals against the Gibbs prediction, per operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalComparison {
    pub ebar: f64,
    pub window_states: usize,
    /// Per operator: window mean of `O_αα`.
    pub measured: Vec<f64>,
    /// Per operator: window mean of the Gibbs prediction at each `E_α`.
    pub predicted: Vec<f64>,
    pub mean_residual: f64,
    /// Standard error of the mean residual over the ensemble.
    pub residual_std_err: f64,
}

pub fn diagonal_comparison(
    system: &BipartiteSystem,
    spec: &OperatorEnsembleSpec,
    stats: &EnsembleStatistics,
    ebar: f64,
    density_bins: usize,
) -> Result<DiagonalComparison> {
    if stats.window_states.is_empty() {
        return Err(Error::EmptyWindow(format!("no eigenstates near Ē = {ebar}")));
    }
    let gibbs = GibbsPredictor::new(system, density_bins)?;
    let e = system.spectrum_t().eigenvalues();
    let mut measured = Vec::with_capacity(spec.count);
    let mut predicted = Vec::with_capacity(spec.count);
    for (k, d) in stats.diagonals.iter().enumerate() {
        let o = sample_local_operator(spec, k)?;
        let mut g = 0.0;
        for &a in &stats.window_states {
            g += gibbs.predict(&o, e[a])?;
        }
        measured.push(d.mean());
        predicted.push(g / stats.window_states.len() as f64);
    }
    let r: Vec<f64> = measured.iter().zip(&predicted).map(|(m, p)| m - p).collect();
    let n = r.len() as f64;
    let mean = r.iter().sum::<f64>() / n;
    let var = if r.len() > 1 {
        r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(DiagonalComparison {
        ebar,
        window_states: stats.window_states.len(),
        measured,
        predicted,
        mean_residual: mean,
        residual_std_err: (var / n).sqrt(),
    })
}

/// Runs `experiment` with `solver` supplying total spectra.
pub fn run_figure(experiment: Experiment, cfg: &RunConfig, solver: &dyn TotalSolver) -> Result<FigureOutput> {
    cfg.validate()?;
    match experiment {
        Experiment::Fig1Coeffs => fig1(cfg, solver),
        Experiment::Fig2ScanLa => {
            let cuts = cfg.fig2_cuts();
            scan(experiment, cfg, solver, &cuts, &cfg.figures.fig2_ebar_fractions)
        }
        Experiment::Fig3ScanE => {
            scan(experiment, cfg, solver, &[cfg.chain.l_a], &cfg.figures.fig3_ebar_fractions)
        }
        Experiment::AppBBanding => appb(cfg, solver),
    }
}

/// `count` indices at evenly spaced quantiles `(k + ½)/count`.
pub fn quantile_indices(n: usize, count: usize) -> Vec<usize> {
    (0..count)
        .map(|k| (((2 * k + 1) * n) / (2 * count)).min(n - 1))
        .collect()
}

/// `(E_α, E_i + E_j, |c^α_ij|)` rows for each `α` in `alphas`, product
/// states in index order.
pub fn coefficient_table(coeffs: &ScramblingCoefficients, alphas: &[usize], name: &str) -> (Table, Plot) {
    let mut table = Table::new(name, Schema::Coeffs);
    let mut plot = Plot::new("Scrambling coefficients", "E_i + E_j", "|c|").log_y();
    let e_t = coeffs.energies_t();
    for &a in alphas {
        let mut pts = Vec::with_capacity(coeffs.dim());
        for (k, &c) in coeffs.column(a).iter().enumerate() {
            let e0 = coeffs.product_energy(k);
            table.push(vec![e_t[a].into(), e0.into(), c.abs().into()]);
            if c != 0.0 {
                pts.push((e0, c.abs()));
            }
        }
        plot.add(Series::new(format!("E = {:.3}", e_t[a]), pts, Style::Points));
    }
    (table, plot)
}

fn fig1(cfg: &RunConfig, solver: &dyn TotalSolver) -> Result<FigureOutput> {
    let mut t = Timer::new();
    let sys = chain_system(cfg, solver, cfg.chain.l_a)?;
    t.lap("system");
    let coeffs = compute_coefficients(&sys)?;
    let prof = profile(&coeffs, cfg.ansatz.center_fraction)?;
    t.lap("coefficients");
    let alphas = quantile_indices(sys.dim(), cfg.figures.fig1_alphas);
    let (table, plot) = coefficient_table(&coeffs, &alphas, "fig1_coeffs");
    let e_t = coeffs.energies_t();
    let results = json!({
        "L": cfg.chain.l,
        "L_A": cfg.chain.l_a,
        "E_min": sys.spectrum_t().min(),
        "E_max": sys.spectrum_t().max(),
        "alphas": alphas,
        "E_alpha": alphas.iter().map(|&a| e_t[a]).collect::<Vec<_>>(),
        "stochasticity_error": coeffs.stochasticity_error(),
        "profile": profile_json(&prof),
        "profile_offsets": prof.offsets,
        "profile_mean_sq": prof.mean_sq,
    });
    t.lap("tables");
    Ok(FigureOutput {
        experiment: Experiment::Fig1Coeffs,
        tables: vec![table],
        documents: Vec::new(),
        results,
        timings: t.laps,
        plots: vec![("fig1_coeffs".into(), plot)],
    })
}

fn scan(
    experiment: Experiment,
    cfg: &RunConfig,
    solver: &dyn TotalSolver,
    cuts: &[usize],
    fractions: &[f64],
) -> Result<FigureOutput> {
    let mut t = Timer::new();
    let prefix = experiment.short_name();
    let mut tables = Vec::new();
    let mut plots = Vec::new();
    let mut per_cut = Vec::new();
    for &l_a in cuts {
        let sys = chain_system(cfg, solver, l_a)?;
        t.lap(format!("L_A={l_a} system"));
        let prof = measure_profile(&sys, cfg.ansatz.center_fraction)?;
        t.lap(format!("L_A={l_a} coefficients"));
        let inputs = AnsatzInputs::from_system(&sys, cfg.ansatz.density_bins)?;
        let spec = cfg.ensemble_spec(sys.dim_a());
        let o2bar = ensemble_o2bar(&spec);
        let width = bin_width(cfg, &sys);
        let e_min = sys.spectrum_t().min();
        let mut binned = Table::new(format!("{prefix}_LA{l_a}_binned"), Schema::Binned);
        let mut pred = Table::new(format!("{prefix}_LA{l_a}_prediction"), Schema::Prediction);
        let mut windows = Vec::new();
        for &fr in fractions {
            let ebar = fr * e_min;
            let params = BinningParams {
                omega_bin_width: width,
                ..cfg.binning_params(ebar)
            };
            let stats = ensemble_statistics(&sys, &spec, &params, cfg.threads)?;
            t.lap(format!("L_A={l_a} Ebar={ebar:.4} ensemble"));
            binned_rows(&stats.binned, &mut binned);
            let omegas = stats.binned.omegas();
            let counts = prediction_rows(cfg, &inputs, prof.sigma_s, o2bar, ebar, &omegas, &mut pred)?;
            t.lap(format!("L_A={l_a} Ebar={ebar:.4} predictions"));
            let diag = match diagonal_comparison(&sys, &spec, &stats, ebar, cfg.ansatz.density_bins) {
                Ok(d) => json!({
                    "window_states": d.window_states,
                    "mean_measured": d.measured.iter().sum::<f64>() / d.measured.len() as f64,
                    "mean_gibbs": d.predicted.iter().sum::<f64>() / d.predicted.len() as f64,
                    "mean_residual": d.mean_residual,
                    "residual_std_err": d.residual_std_err,
                }),
                Err(e) => json!({ "error": e.to_string() }),
            };
            let mut plot = Plot::new(
                format!("L_A = {l_a}, Ebar = {ebar:.3}"),
                "omega",
                "mean |O|^2",
            )
            .log_y();
            plot.add(Series::new(
                "measured",
                stats.binned.bins.iter().map(|b| (b.omega_mid, b.mean_sq)).collect(),
                Style::Points,
            ));
            for &kind in &cfg.ansatz.models {
                let pts: Vec<(f64, f64)> = pred
                    .rows
                    .iter()
                    .filter(|r| matches!(&r[0], Cell::Text(m) if m == kind.as_str()))
                    .filter(|r| matches!(r[1], Cell::Real(e) if e == ebar))
                    .filter_map(|r| match (&r[2], &r[5]) {
                        (Cell::Real(w), Cell::Real(v)) => Some((*w, *v)),
                        _ => None,
                    })
                    .collect();
                plot.add(Series::new(kind.as_str(), pts, Style::Line));
            }
            plots.push((format!("{prefix}_LA{l_a}_E{}", windows.len()), plot));
            windows.push(json!({
                "Ebar": ebar,
                "fraction_of_E_min": fr,
                "pairs": stats.binned.total_count(),
                "bins": stats.binned.bins.len(),
                "prediction_points": counts,
                "diagonal": diag,
            }));
        }
        per_cut.push(json!({
            "L_A": l_a,
            "E_min": e_min,
            "E_max": sys.spectrum_t().max(),
            "sigma_A": inputs.discrete.as_ref().map(|d| d.sigma_a()),
            "omega_bin_width": width,
            "scrambling": profile_json(&prof),
            "windows": windows,
        }));
        tables.push(binned);
        tables.push(pred);
    }
    Ok(FigureOutput {
        experiment,
        tables,
        documents: Vec::new(),
        results: json!({ "cuts": per_cut }),
        timings: t.laps,
        plots,
    })
}

/// Banding run: random system, ensemble bins over a wide `Ē` window and
/// band peaks against the `H_A` gaps.
fn appb(cfg: &RunConfig, solver: &dyn TotalSolver) -> Result<FigureOutput> {
    let mut t = Timer::new();
    let sys = random_system(cfg, solver)?;
    t.lap("system");
    let prof = measure_profile(&sys, cfg.ansatz.center_fraction)?;
    let sigma_s = prof.sigma_s;
    t.lap("coefficients");
    let e_a = sys.spectrum_a().eigenvalues();
    let gaps = gap_omegas(e_a, false, 1e-12);
    let spec_t = sys.spectrum_t();
    let center = 0.5 * (spec_t.min() + spec_t.max());
    let halfwidth = cfg.figures.appb_ebar_halfwidth.unwrap_or(0.25 * spec_t.range());
    let width = cfg.figures.appb_bin_width.unwrap_or(0.5 * sigma_s);
    if !(width > 0.0) {
        return Err(Error::DegenerateWindow(
            "σ_S vanished, so the default band bin width σ_S/2 is zero; set figures.appB_bin_width".into(),
        ));
    }
    let omega_max = cfg
        .binning
        .omega_max
        .unwrap_or(0.5 * (e_a[e_a.len() - 1] - e_a[0]) + 4.0 * sigma_s);
    let params = BinningParams {
        ebar_center: center,
        ebar_halfwidth: halfwidth,
        omega_bin_width: width,
        omega_max: Some(omega_max),
    };
    let spec = OperatorEnsembleSpec {
        count: cfg.figures.appb_operators,
        ..cfg.ensemble_spec(sys.dim_a())
    };
    let stats = ensemble_statistics(&sys, &spec, &params, cfg.threads)?;
    t.lap("ensemble");
    let report = detect_bands(&stats.binned, &gaps, sigma_s)?;

    let o = sample_local_operator(&spec, 0)?;
    let m = matrix_elements_total_basis(&sys, &o)?;
    let e = spec_t.eigenvalues();
    let mut banding = Table::new("appB_banding", Schema::Banding);
    let mut scatter = Vec::new();
    for a in 0..e.len() {
        for b in a + 1..e.len() {
            let ebar = 0.5 * (e[a] + e[b]);
            let w = 0.5 * (e[b] - e[a]);
            if (ebar - center).abs() <= halfwidth && w <= omega_max {
                let v = m.get(a, b).abs();
                banding.push(vec![e[a].into(), e[b].into(), v.into()]);
                scatter.push((w, v));
            }
        }
    }
    t.lap("triplets");
    let mut binned = Table::new("appB_binned", Schema::Binned);
    binned_rows(&stats.binned, &mut binned);

    let mut plot = Plot::new("Banding", "omega", "|O|").log_y();
    plot.add(Series::new("operator 0", scatter, Style::Points));
    plot.mark_x(gaps.clone());
    let mut curve = Plot::new("Banding, ensemble mean", "omega", "mean |O|^2").log_y();
    curve.add(Series::new(
        "measured",
        stats.binned.bins.iter().map(|b| (b.omega_mid, b.mean_sq)).collect(),
        Style::Line,
    ));
    curve.mark_x(gaps.clone());

    let min_gap = gaps.first().copied();
    let results = json!({
        "L_A": cfg.random.l_a,
        "L_B": cfg.random.l_b,
        "L_I": cfg.random.l_i,
        "f": cfg.random.f,
        "E_A": e_a,
        "interaction_norm": sys.interaction_norm(),
        "scrambling": profile_json(&prof),
        "min_gap_omega": min_gap,
        "Ebar_center": center,
        "Ebar_halfwidth": halfwidth,
        "omega_bin_width": width,
        "omega_max": omega_max,
        "operators": spec.count,
        "peaks": report.peaks.len(),
        "matched_fraction": report.matched_fraction,
        "gaps_hit": report.gaps_hit,
    });
    Ok(FigureOutput {
        experiment: Experiment::AppBBanding,
        tables: vec![banding, binned],
        documents: vec![(
            "appB_bands".into(),
            serde_json::to_value(&report).map_err(|e| Error::InvalidInput(e.to_string()))?,
        )],
        results,
        timings: t.laps,
        plots: vec![("appB_banding".into(), plot), ("appB_binned".into(), curve)],
    })
}
