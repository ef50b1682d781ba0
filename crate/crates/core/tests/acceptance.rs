//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion.
//! Exits nonzero if a criterion could not be evaluated, or on any FAIL when
//! ETHLAB_ACCEPTANCE_STRICT=1.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use ethlab::ansatz::{
    f_exp_decay, f_mc_finite_width, f_microcanonical_exact, f_small_a, gibbs_average, rmt_variance,
    AnsatzInputs, AnsatzKind, AnsatzModel,
};
use ethlab::experiments::figures::measure_profile;
use ethlab::experiments::{
    diagonal_comparison, ensemble_statistics, matrix_elements_total_basis, run_figure,
    sample_local_operator, BinningParams, Experiment, OperatorEnsembleSpec,
};
use ethlab::hamiltonians::{
    build_random_system, build_spin_chain, decompose_chain, decompose_chain_with, pauli_string,
    sample_goe, seeded_rng, BipartiteSystem, RandomSystemParams, SpinChainParams,
};
use ethlab::io::{DirectSolver, RunConfig};
use ethlab::linalg::{cross_correlate, eig_sym, SpectralDensity, Spectrum, SymmetricMatrix};
use ethlab::localize::{localizability, localizing_basis, operator_localizability, DEFAULT_TOL};
use ethlab::scrambling::{compute_coefficients, ScramblingKernel};
use ethlab::Result;

const SEED: u64 = 0;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

/// The L = 12 reference chain, diagonalized once and shared across cuts.
struct Chain12 {
    params: SpinChainParams,
    total: Spectrum,
}

impl Chain12 {
    fn new() -> Result<Self> {
        let params = SpinChainParams::new(12, 1.0, 1.05, 0.5);
        let total = eig_sym(&build_spin_chain(&params)?)?;
        Ok(Self { params, total })
    }

    fn cut(&self, l_a: usize) -> Result<BipartiteSystem> {
        decompose_chain_with(&self.params, l_a, |_| Ok(self.total.clone()))
    }
}

fn c1_scrambling_variance(chain: &Chain12) -> Result<Outcome> {
    let s12 = measure_profile(&chain.cut(3)?, 0.5)?.sigma_s;
    let small = decompose_chain(&SpinChainParams::new(10, 1.0, 1.05, 0.5), 3)?;
    let s10 = measure_profile(&small, 0.5)?.sigma_s;
    let free = BipartiteSystem::assemble(
        small.h_a().clone(),
        small.h_b().clone(),
        SymmetricMatrix::zeros(small.dim()),
        0.0,
    )?;
    let s0 = measure_profile(&free, 0.5)?.sigma_s;
    let pass = (0.86..=1.06).contains(&s12) && (0.5..=1.5).contains(&s10) && s0 < 1e-9;
    Ok(Outcome::new(
        pass,
        format!("sigma_S(L=12)={s12:.4} in [0.86,1.06]; sigma_S(L=10)={s10:.4}; sigma_S(H_I=0)={s0:.1e}"),
    ))
}

fn c2_offdiagonal_curve(chain: &Chain12) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for l_a in [3usize, 5] {
        let sys = chain.cut(l_a)?;
        let sigma_s = measure_profile(&sys, 0.5)?.sigma_s;
        let sigma_a = sys.spectrum_a().range();
        let spec = OperatorEnsembleSpec::new(sys.dim_a(), SEED);
        let params = BinningParams {
            omega_max: Some(0.6 * sigma_a),
            ..BinningParams::new(0.0)
        };
        let stats = ensemble_statistics(&sys, &spec, &params, 1)?;
        let bins = &stats.binned.bins;
        let inputs = AnsatzInputs::from_system(&sys, 64)?;
        let model = AnsatzModel::new(AnsatzKind::ExpDecayFlatA, sigma_s, 1.0, &inputs)?;
        let pred = model.predict(0.0, &stats.binned.omegas())?;

        let (mut checked, mut outside, mut worst, mut first_bad) = (0, 0, 1.0f64, None);
        for (b, v) in bins.iter().zip(&pred.variance) {
            let x = 2.0 * b.omega_mid / sigma_a;
            if !(0.5..=1.2).contains(&x) {
                continue;
            }
            checked += 1;
            let r = b.mean_sq / v;
            if r.max(1.0 / r) > worst.max(1.0 / worst) {
                worst = r;
            }
            if !(0.5..=2.0).contains(&r) {
                outside += 1;
                first_bad.get_or_insert(x);
            }
        }
        let peak = (0..bins.len())
            .max_by(|&i, &j| bins[i].mean_sq.total_cmp(&bins[j].mean_sq))
            .unwrap_or(0);
        let rises = bins[peak..]
            .windows(2)
            .filter(|w| {
                let se = (w[0].std_err.powi(2) + w[1].std_err.powi(2)).sqrt();
                w[1].mean_sq - w[0].mean_sq > 2.0 * se
            })
            .count();
        pass &= checked > 0 && outside == 0 && rises == 0;
        parts.push(format!(
            "L_A={l_a}: {outside}/{checked} bins outside factor 2 (worst ratio {worst:.2}{}), {rises} rises > 2 SE after peak at omega={:.3}",
            first_bad.map_or(String::new(), |x| format!(", first at 2w/sigma_A={x:.3}")),
            bins[peak].omega_mid
        ));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn c3_identities(chain: &Chain12) -> Result<Outcome> {
    let small = decompose_chain(&SpinChainParams::new(10, 1.0, 1.05, 0.5), 3)?;
    let spec = OperatorEnsembleSpec::new(small.dim_a(), SEED);
    let mut sum_rule = 0.0f64;
    for k in 0..spec.count {
        let o = sample_local_operator(&spec, k)?;
        let m = matrix_elements_total_basis(&small, &o)?;
        let o2 = matrix_elements_total_basis(&small, &gemm_sym(&o))?;
        for a in 0..small.dim() {
            let row: f64 = (0..small.dim()).map(|b| m.get(a, b).powi(2)).sum();
            sum_rule = sum_rule.max((row - o2.get(a, a)).abs());
        }
    }
    let sys = chain.cut(3)?;
    let stoch = compute_coefficients(&sys)?.stochasticity_error();
    let reassembly = build_spin_chain(&chain.params)?.max_abs_diff(sys.h_t());
    let mut hh = 0.0f64;
    for sigma_s in [0.5, 1.0, 2.0] {
        let h = ScramblingKernel::Exponential { sigma_s };
        let c = cross_correlate(h, h);
        for k in -40..=40 {
            let e = k as f64 * 0.1 * sigma_s;
            hh = hh.max((c.try_eval(e)? - h.autocorrelation(e)).abs());
        }
    }
    let pass = sum_rule <= 1e-8 && stoch <= 1e-9 && reassembly <= 1e-12 && hh <= 1e-6;
    Ok(Outcome::new(
        pass,
        format!(
            "sum rule {sum_rule:.1e} (250 ops, L=10); stochasticity {stoch:.1e}; reassembly {reassembly:.1e}; h*h {hh:.1e}"
        ),
    ))
}

fn gemm_sym(o: &SymmetricMatrix) -> SymmetricMatrix {
    let d = o.dim();
    SymmetricMatrix::from_fn(d, |i, j| (0..d).map(|k| o.get(i, k) * o.get(k, j)).sum())
        .expect("square of a symmetric matrix")
}

fn c4_rmt_limit() -> Result<Outcome> {
    let mut rng = seeded_rng(SEED);
    let h = sample_goe(256, &mut rng)?;
    let sys = BipartiteSystem::assemble(SymmetricMatrix::zeros(4), SymmetricMatrix::zeros(64), h, 1.0)?;
    let spec = OperatorEnsembleSpec::new(4, SEED).with_count(50);
    let (mut sum, mut n) = (0.0, 0usize);
    for k in 0..spec.count {
        let m = matrix_elements_total_basis(&sys, &sample_local_operator(&spec, k)?)?;
        for a in 0..256 {
            for b in a + 1..256 {
                sum += m.get(a, b).powi(2);
                n += 1;
            }
        }
    }
    let mean = sum / n as f64;
    let target = rmt_variance(1.0, 256)?;
    let rel = (mean / target - 1.0).abs();
    Ok(Outcome::new(
        rel <= 0.10,
        format!("mean |O_ab|^2 = {mean:.5e} vs O2bar/256 = {target:.5e} (rel {rel:.3})"),
    ))
}

fn c5_hard_cutoff() -> Result<Outcome> {
    let systems = vec![
        ("chain L=8 L_A=2", decompose_chain(&SpinChainParams::new(8, 1.0, 1.05, 0.5), 2)?),
        ("chain L=9 L_A=4", decompose_chain(&SpinChainParams::new(9, 1.0, 1.05, 0.5), 4)?),
        ("random 2+6", build_random_system(&RandomSystemParams::new(2, 6, 2, 0.05, SEED))?),
    ];
    let (mut tested, mut nonzero) = (0usize, 0usize);
    for (_, sys) in &systems {
        let e0 = sys.spectrum_0().eigenvalues().to_vec();
        let sigma_a = sys.spectrum_a().range();
        let spec = OperatorEnsembleSpec::new(sys.dim_a(), SEED).with_count(3);
        for sigma_s in [0.1, 0.5, 1.0] {
            let delta = 2.0 * 3f64.sqrt() * sigma_s;
            for k in 0..spec.count {
                let o = sample_local_operator(&spec, k)?;
                let step = (e0.len() / 40).max(1);
                for a in (0..e0.len()).step_by(step) {
                    for b in (0..e0.len()).step_by(step) {
                        if (e0[a] - e0[b]).abs() > delta + sigma_a {
                            tested += 1;
                            if f_microcanonical_exact(sys, &o, delta, e0[a], e0[b])? != 0.0 {
                                nonzero += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(Outcome::new(
        tested > 0 && nonzero == 0,
        format!("{nonzero} nonzero of {tested} pairs beyond Delta+sigma_A on {} systems", systems.len()),
    ))
}

fn c6_ladder() -> Result<Outcome> {
    let sigma_a = 4.0;
    let sigma_s = sigma_a / 100.0;
    let flat = SpectralDensity::flat(0.0, sigma_a, 1.0)?;
    let (mut worst_exp, mut worst_mc) = (0.0f64, 0.0f64);
    for k in 0..=90 {
        let omega = k as f64 * 0.005 * sigma_a;
        let base = f_small_a(&flat, 1.0, sigma_s, omega)?;
        let e = f_exp_decay(sigma_a, sigma_s, 1.0, omega)?;
        let m = f_mc_finite_width(&flat, 1.0, sigma_a, sigma_s, omega)?;
        worst_exp = worst_exp.max((e / base - 1.0).abs());
        worst_mc = worst_mc.max((m / base - 1.0).abs());
    }
    Ok(Outcome::new(
        worst_exp <= 0.02 && worst_mc <= 0.02,
        format!("max rel. deviation from f_small_A: exp-decay {worst_exp:.4}, mc-finite-width {worst_mc:.4}"),
    ))
}

fn c7_localizability() -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for l in [3usize, 4] {
        let mut labels = Vec::new();
        for s in 0..l {
            for p in ['X', 'Y', 'Z'] {
                let mut t = vec!['I'; l];
                t[s] = p;
                labels.push(t.into_iter().collect::<String>());
            }
        }
        for s1 in 0..l {
            for s2 in s1 + 1..l {
                for p in ['X', 'Y', 'Z'] {
                    for q in ['X', 'Y', 'Z'] {
                        let mut t = vec!['I'; l];
                        t[s1] = p;
                        t[s2] = q;
                        labels.push(t.into_iter().collect::<String>());
                    }
                }
            }
        }
        for label in labels {
            // An odd number of Y factors makes the string imaginary; D_O depends
            // only on the spectrum, which the X stand-in shares.
            let real = if label.matches('Y').count() % 2 == 1 { label.replace('Y', "X") } else { label.clone() };
            let op = pauli_string(&real)?;
            let r = operator_localizability(&op, DEFAULT_TOL)?;
            count += 1;
            if r.d_o != 2 {
                failures.push(format!("{label}: D_O={}", r.d_o));
            }
            worst = worst.max(roundtrip(&op)?);
        }
        let mut rng = seeded_rng(SEED + l as u64);
        let g = sample_goe(1 << l, &mut rng)?;
        let r = localizability(&eig_sym(&g)?.eigenvalues().to_vec(), DEFAULT_TOL)?;
        if r.d_o != 1 << l {
            failures.push(format!("random L={l}: D_O={}", r.d_o));
        }
        worst = worst.max(roundtrip(&g)?);
    }
    Ok(Outcome::new(
        failures.is_empty() && worst <= 1e-9,
        format!(
            "{count} Pauli operators with D_O=2, random spectra D_O=2^L{}; reconstruction error {worst:.1e}",
            if failures.is_empty() { String::new() } else { format!("; failures: {}", failures.join(", ")) }
        ),
    ))
}

fn roundtrip(op: &SymmetricMatrix) -> Result<f64> {
    let lb = localizing_basis(op, DEFAULT_TOL)?;
    let g = op.dim() / lb.report.d_o;
    let target = lb.local_block.kron(&SymmetricMatrix::identity(g));
    let back = target.conjugate_by(lb.basis.as_ref());
    Ok(back.max_abs_diff(op))
}

fn c8_gibbs_diagonal(chain: &Chain12) -> Result<Outcome> {
    let sys = chain.cut(3)?;
    let spec = OperatorEnsembleSpec::new(sys.dim_a(), SEED);
    let mut pass = true;
    let mut parts = Vec::new();
    for ebar in [0.0, 0.5 * sys.spectrum_t().min()] {
        let params = BinningParams {
            omega_max: Some(0.05),
            ..BinningParams::new(ebar)
        };
        let stats = ensemble_statistics(&sys, &spec, &params, 1)?;
        let d = diagonal_comparison(&sys, &spec, &stats, ebar, 64)?;
        let z = d.mean_residual.abs() / d.residual_std_err;
        pass &= z <= 5.0;
        parts.push(format!(
            "Ebar={ebar:.2}: residual {:.2e} = {z:.2} SE over {} states",
            d.mean_residual, d.window_states
        ));
    }
    let e_a = sys.spectrum_a().eigenvalues();
    let mut at_zero = 0.0f64;
    for label in ["ZII", "IZI", "ZZI", "ZIZ", "ZZZ"] {
        let o = pauli_string(label)?;
        at_zero = at_zero.max(gibbs_average(e_a, &o.diagonal(), 0.0).abs());
    }
    let mut sampled = 0.0f64;
    for k in 0..spec.count {
        let o = sample_local_operator(&spec, k)?;
        let diag = sys.spectrum_a().to_eigenbasis(&o).diagonal();
        sampled = sampled.max(gibbs_average(e_a, &diag, 0.0).abs());
    }
    pass &= at_zero == 0.0 && sampled <= 1e-14;
    parts.push(format!(
        "beta=0 prediction {at_zero:e} for exactly traceless diagonals, max {sampled:.1e} over sampled operators"
    ));
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn c9_banding() -> Result<Outcome> {
    let cfg = RunConfig::default();
    let out = run_figure(Experiment::AppBBanding, &cfg, &DirectSolver)?;
    let report = &out
        .documents
        .iter()
        .find(|(name, _)| name == "appB_bands")
        .expect("band report")
        .1;
    let sigma_s = report["sigma_s"].as_f64().unwrap_or(f64::NAN);
    let gaps: Vec<f64> = report["gaps"]
        .as_array()
        .map(|a| a.iter().filter_map(|v| v.as_f64()).collect())
        .unwrap_or_default();
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let peaks = report["peaks"].as_array().map_or(0, |p| p.len());
    let frac = report["matched_fraction"].as_f64().unwrap_or(0.0);
    Ok(Outcome::new(
        sigma_s < min_gap && peaks > 0 && frac >= 0.5,
        format!(
            "sigma_S={sigma_s:.3} < min gap {min_gap:.3}; {peaks} peaks, matched fraction {frac:.2}"
        ),
    ))
}

fn c10_reproducibility() -> Result<Outcome> {
    let dir = tempfile::tempdir().expect("temp dir");
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "seed = 7\n\n[chain]\nL = 8\nL_A = 2\n\n[ensemble]\ncount = 20\n\n\
         [random]\nL_A = 2\nL_B = 5\n\n[figures]\nappB_operators = 10\n",
    )
    .expect("write config");
    let mut compared = 0usize;
    let mut differing = Vec::new();
    for exp in ["fig1", "fig3", "appB"] {
        let a = dir.path().join(format!("{exp}-t1"));
        let b = dir.path().join(format!("{exp}-t2"));
        run_cli(&config, &a, 1, exp);
        run_cli(&config, &b, 2, exp);
        for entry in std::fs::read_dir(&a).expect("output dir") {
            let p = entry.expect("entry").path();
            if p.extension().is_some_and(|e| e == "csv") {
                compared += 1;
                let other = b.join(p.file_name().expect("file name"));
                if std::fs::read(&p).ok() != std::fs::read(&other).ok() {
                    differing.push(p.file_name().unwrap().to_string_lossy().into_owned());
                }
            }
        }
    }
    Ok(Outcome::new(
        compared > 0 && differing.is_empty(),
        format!(
            "{compared} CSV files compared across --threads 1 and 2{}",
            if differing.is_empty() { String::new() } else { format!("; differing: {}", differing.join(", ")) }
        ),
    ))
}

fn run_cli(config: &Path, out: &Path, threads: usize, exp: &str) {
    let status = Command::new(env!("CARGO_BIN_EXE_ethlab"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--threads", &threads.to_string(), "--cache", "recompute", "reproduce", exp])
        .stdout(std::process::Stdio::null())
        .status()
        .expect("run ethlab");
    assert!(status.success(), "ethlab reproduce {exp} failed");
}

fn main() -> ExitCode {
    let t0 = Instant::now();
    let chain = match Chain12::new() {
        Ok(c) => c,
        Err(e) => {
            println!("FAIL setup: L=12 chain: {e}");
            return ExitCode::FAILURE;
        }
    };
    type Check<'a> = (&'a str, Box<dyn Fn() -> Result<Outcome> + 'a>);
    let checks: Vec<Check> = vec![
        ("C1 scrambling variance", Box::new(|| c1_scrambling_variance(&chain))),
        ("C2 off-diagonal curve agreement", Box::new(|| c2_offdiagonal_curve(&chain))),
        ("C3 exact identities", Box::new(|| c3_identities(&chain))),
        ("C4 RMT limit", Box::new(c4_rmt_limit)),
        ("C5 hard cutoff", Box::new(c5_hard_cutoff)),
        ("C6 approximation ladder", Box::new(c6_ladder)),
        ("C7 localizability", Box::new(c7_localizability)),
        ("C8 Gibbs diagonal", Box::new(|| c8_gibbs_diagonal(&chain))),
        ("C9 banding", Box::new(c9_banding)),
        ("C10 reproducibility", Box::new(c10_reproducibility)),
    ];
    let (mut failed, mut errored) = (0, 0);
    for (name, check) in checks {
        let t = Instant::now();
        let outcome = check().unwrap_or_else(|e| {
            errored += 1;
            Outcome::new(false, format!("error: {e}"))
        });
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {} [{:.1}s]",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of 10 criteria passed in {:.0}s", 10 - failed, t0.elapsed().as_secs_f64());
    // Criteria that run but miss their tolerance are reported; errors always
    // fail. Set ETHLAB_ACCEPTANCE_STRICT=1 to fail on any miss.
    let strict = std::env::var("ETHLAB_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if errored > 0 || (strict && failed > 0) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
