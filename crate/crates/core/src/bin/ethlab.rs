use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ethlab::ansatz::{AnsatzInputs, AnsatzKind};
use ethlab::experiments::figures::{
    chain_system, ensemble_o2bar, measure_profile, prediction_rows, random_system,
};
use ethlab::experiments::{coefficient_table, gap_omegas, quantile_indices, run_figure, Experiment};
use ethlab::hamiltonians::{pauli_string, BipartiteSystem};
use ethlab::io::{
    emit_dataset, emit_json, parse_config, write_figure, CachePolicy, EigenCache, RunConfig, Schema,
    Table, OUT_DIR_ENV,
};
use ethlab::localize::{localizability, operator_localizability, DEFAULT_TOL};
use ethlab::scrambling::{compute_coefficients, profile};
use ethlab::{Error, Result};

/// Eigenstate-thermalization experiments on bipartite Hamiltonians.
#[derive(Debug, Parser)]
#[command(name = "ethlab", version, about)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// TOML run configuration; every key is optional.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for random systems and operator ensembles.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory (overrides the config file and $ETHLAB_OUT_DIR).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for the operator ensemble.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Eigendecomposition cache policy.
    #[arg(long, global = true, value_enum)]
    cache: Option<CachePolicy>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    plot: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Diagonalize the mixed-field Ising chain and report its spectrum and
    /// scrambling width at the configured cut.
    SpinChain {
        /// Number of sites.
        #[arg(short = 'L', long = "sites")]
        l: Option<usize>,
        /// Cut position.
        #[arg(long = "la")]
        l_a: Option<usize>,
    },
    /// Build the random bipartite system and report its spectra.
    RandomSystem {
        #[arg(long = "la")]
        l_a: Option<usize>,
        #[arg(long = "lb")]
        l_b: Option<usize>,
        #[arg(long = "li")]
        l_i: Option<usize>,
        /// Interaction strength ‖H_I‖/‖H_0‖.
        #[arg(long)]
        f: Option<f64>,
    },
    /// Scrambling coefficients for eigenstates spread across the spectrum.
    Coeffs {
        #[arg(long, value_enum, default_value_t = SystemKind::Chain)]
        system: SystemKind,
        /// Number of eigenstates (evenly spaced quantiles).
        #[arg(long)]
        alphas: Option<usize>,
    },
    /// Evaluate ansatz predictions on an ω grid.
    Predict {
        /// Models to evaluate (default: the configured list).
        #[arg(long, value_delimiter = ',')]
        models: Vec<AnsatzKind>,
        /// Mean energies; default 0.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        ebar: Vec<f64>,
        /// Largest ω; default σ_A/2 + 4σ_S.
        #[arg(long)]
        omega_max: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        omega_step: f64,
        /// Use this σ_S instead of measuring it.
        #[arg(long)]
        sigma_s: Option<f64>,
    },
    /// Localizability of a Pauli string or an explicit spectrum.
    Localize {
        /// Pauli label such as XIZ.
        #[arg(long, conflicts_with = "eigenvalues", required_unless_present = "eigenvalues")]
        pauli: Option<String>,
        /// Comma-separated eigenvalues.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eigenvalues: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Regenerate the datasets behind one figure.
    Reproduce {
        #[arg(value_enum)]
        experiment: Experiment,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SystemKind {
    Chain,
    Random,
}

fn load_config(g: &Global) -> Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(p) => parse_config(p)?,
        None => RunConfig::default(),
    };
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        if !dir.is_empty() {
            cfg.output_dir = PathBuf::from(dir);
        }
    }
    if let Some(o) = &g.out {
        cfg.output_dir = o.clone();
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(t) = g.threads {
        cfg.threads = t;
    }
    if let Some(c) = g.cache {
        cfg.cache = c;
    }
    cfg.plot |= g.plot;
    Ok(cfg)
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn system_summary(sys: &BipartiteSystem) -> serde_json::Value {
    let t = sys.spectrum_t();
    json!({
        "dim": sys.dim(),
        "dim_A": sys.dim_a(),
        "dim_B": sys.dim_b(),
        "E_min": t.min(),
        "E_max": t.max(),
        "range": t.range(),
        "E_A": sys.spectrum_a().eigenvalues(),
        "sigma_A": sys.spectrum_a().range(),
        "sigma_B": sys.spectrum_b().range(),
        "interaction_norm": sys.interaction_norm(),
        "reassembly_error": sys.reassembly_error(),
    })
}

fn summarize(sys: &BipartiteSystem, cfg: &RunConfig, name: &str, extra: serde_json::Value) -> Result<()> {
    let prof = measure_profile(sys, cfg.ansatz.center_fraction)?;
    let mut v = system_summary(sys);
    v["sigma_s"] = json!(prof.sigma_s);
    v["mean_offset"] = json!(prof.mean_offset);
    v["extra"] = extra;
    emit_json(&v, &cfg.output_dir.join(format!("{name}.json")))?;
    print_json(&v);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli.global)?;
    match cli.command {
        Command::SpinChain { l, l_a } => {
            if let Some(l) = l {
                cfg.chain.l = l;
            }
            if let Some(a) = l_a {
                cfg.chain.l_a = a;
            }
            cfg.validate_system()?;
            let cache = EigenCache::new(cfg.cache_dir(), cfg.cache);
            let sys = chain_system(&cfg, &cache, cfg.chain.l_a)?;
            summarize(&sys, &cfg, "spin_chain", json!({ "chain": cfg.chain }))
        }
        Command::RandomSystem { l_a, l_b, l_i, f } => {
            let r = &mut cfg.random;
            r.l_a = l_a.unwrap_or(r.l_a);
            r.l_b = l_b.unwrap_or(r.l_b);
            r.l_i = l_i.unwrap_or(r.l_i);
            r.f = f.unwrap_or(r.f);
            cfg.validate_system()?;
            let cache = EigenCache::new(cfg.cache_dir(), cfg.cache);
            let sys = random_system(&cfg, &cache)?;
            let gaps = gap_omegas(sys.spectrum_a().eigenvalues(), false, 1e-12);
            summarize(&sys, &cfg, "random_system", json!({ "random": cfg.random, "seed": cfg.seed, "gap_omegas": gaps }))
        }
        Command::Coeffs { system, alphas } => {
            if let Some(a) = alphas {
                cfg.figures.fig1_alphas = a;
            }
            cfg.validate()?;
            let cache = EigenCache::new(cfg.cache_dir(), cfg.cache);
            let sys = match system {
                SystemKind::Chain => chain_system(&cfg, &cache, cfg.chain.l_a)?,
                SystemKind::Random => random_system(&cfg, &cache)?,
            };
            let coeffs = compute_coefficients(&sys)?;
            let prof = profile(&coeffs, cfg.ansatz.center_fraction)?;
            let idx = quantile_indices(sys.dim(), cfg.figures.fig1_alphas);
            let (table, plot) = coefficient_table(&coeffs, &idx, "coeffs");
            let path = emit_dataset(&table, &cfg.output_dir)?;
            if cfg.plot {
                ethlab::io::dataset::write_text(&cfg.output_dir.join("coeffs.svg"), &plot.render())?;
            }
            let v = json!({
                "file": path,
                "alphas": idx,
                "sigma_s": prof.sigma_s,
                "mean_offset": prof.mean_offset,
                "stochasticity_error": coeffs.stochasticity_error(),
            });
            print_json(&v);
            Ok(())
        }
        Command::Predict { models, ebar, omega_max, omega_step, sigma_s } => {
            if !models.is_empty() {
                cfg.ansatz.models = models;
            }
            cfg.validate_system()?;
            if !(omega_step > 0.0) {
                return Err(Error::validation("omega_step", "must be positive"));
            }
            let cache = EigenCache::new(cfg.cache_dir(), cfg.cache);
            let sys = chain_system(&cfg, &cache, cfg.chain.l_a)?;
            let s = match sigma_s {
                Some(s) => s,
                None => measure_profile(&sys, cfg.ansatz.center_fraction)?.sigma_s,
            };
            let inputs = AnsatzInputs::from_system(&sys, cfg.ansatz.density_bins)?;
            let w_max = omega_max.unwrap_or(0.5 * sys.spectrum_a().range() + 4.0 * s);
            let steps = (w_max / omega_step).floor() as usize;
            let omegas: Vec<f64> = (0..=steps).map(|k| k as f64 * omega_step).collect();
            let ebars = if ebar.is_empty() { vec![0.0] } else { ebar };
            let o2bar = ensemble_o2bar(&cfg.ensemble_spec(sys.dim_a()));
            let mut table = Table::new("prediction", Schema::Prediction);
            for &e in &ebars {
                prediction_rows(&cfg, &inputs, s, o2bar, e, &omegas, &mut table)?;
            }
            let path = emit_dataset(&table, &cfg.output_dir)?;
            print_json(&json!({ "file": path, "rows": table.rows.len(), "sigma_s": s }));
            Ok(())
        }
        Command::Localize { pauli, eigenvalues, tol } => {
            let report = match pauli {
                Some(p) => operator_localizability(&pauli_string(&p)?, tol)?,
                None => localizability(&eigenvalues, tol)?,
            };
            print_json(&serde_json::to_value(&report).expect("serializable"));
            Ok(())
        }
        Command::Reproduce { experiment } => {
            cfg.experiment = Some(experiment);
            cfg.validate()?;
            let cache = EigenCache::new(cfg.cache_dir(), cfg.cache);
            let out = run_figure(experiment, &cfg, &cache)?;
            let files = write_figure(&out, &cfg, &cfg.output_dir, cfg.plot)?;
            for f in files {
                println!("{}", display(&f));
            }
            Ok(())
        }
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
