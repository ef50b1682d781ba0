//! Off-diagonal matrix-element statistics binned in `|ω|` inside an `Ē` window.

use faer::linalg::matmul::matmul;
use faer::reborrow::{Reborrow, ReborrowMut};
use faer::{Accum, Mat, MatRef, Par};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{apply_local, sample_local_operator, OperatorEnsembleSpec};
use crate::error::{Error, Result};
use crate::hamiltonians::BipartiteSystem;

pub const DEFAULT_BIN_WIDTH: f64 = 0.015;
pub const DEFAULT_HALFWIDTH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinningParams {
    pub ebar_center: f64,
    pub ebar_halfwidth: f64,
    pub omega_bin_width: f64,
    /// Pairs with `|ω|` above this are skipped.
    pub omega_max: Option<f64>,
}

impl BinningParams {
    pub fn new(ebar_center: f64) -> Self {
        Self {
            ebar_center,
            ebar_halfwidth: DEFAULT_HALFWIDTH,
            omega_bin_width: DEFAULT_BIN_WIDTH,
            omega_max: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.ebar_center.is_finite() {
            return Err(Error::InvalidInput("Ē centre must be finite".into()));
        }
        if !(self.ebar_halfwidth > 0.0) || !self.ebar_halfwidth.is_finite() {
            return Err(Error::InvalidInput(format!(
                "Ē half-width must be positive, got {}",
                self.ebar_halfwidth
            )));
        }
        if !(self.omega_bin_width > 0.0) || !self.omega_bin_width.is_finite() {
            return Err(Error::InvalidInput(format!(
                "ω bin width must be positive, got {}",
                self.omega_bin_width
            )));
        }
        if let Some(m) = self.omega_max {
            if !(m >= 0.0) {
                return Err(Error::InvalidInput(format!("ω max must be ≥ 0, got {m}")));
            }
        }
        Ok(())
    }

    fn ebar_lo(&self) -> f64 {
        self.ebar_center - self.ebar_halfwidth
    }

    fn ebar_hi(&self) -> f64 {
        self.ebar_center + self.ebar_halfwidth
    }

    fn omega_limit(&self) -> f64 {
        self.omega_max.unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bin {
    pub omega_mid: f64,
    /// Mean of `|O_αβ|²`.
    pub mean_sq: f64,
    pub count: u64,
    /// Standard error of `mean_sq`.
    pub std_err: f64,
    /// Mean of the signed element.
    pub mean: f64,
    /// Standard error of `mean`.
    pub mean_std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedStatistics {
    pub ebar_center: f64,
    pub ebar_halfwidth: f64,
    pub omega_bin_width: f64,
    /// Non-empty bins in ascending `ω ≥ 0`.
    pub bins: Vec<Bin>,
}

impl BinnedStatistics {
    pub fn omegas(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.omega_mid).collect()
    }

    pub fn total_count(&self) -> u64 {
        self.bins.iter().map(|b| b.count).sum()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Acc {
    count: u64,
    s1: f64,
    s2: f64,
    s4: f64,
}

/// Running sums per `|ω|` bin. Merging in a fixed order keeps results
/// independent of how the work was split.
#[derive(Debug, Clone, PartialEq)]
pub struct BinAccumulator {
    width: f64,
    limit: f64,
    bins: Vec<Acc>,
}

impl BinAccumulator {
    pub fn new(params: &BinningParams) -> Self {
        Self {
            width: params.omega_bin_width,
            limit: params.omega_limit(),
            bins: Vec::new(),
        }
    }

    #[inline]
    pub fn push(&mut self, omega_abs: f64, value: f64) {
        if omega_abs > self.limit {
            return;
        }
        let k = (omega_abs / self.width) as usize;
        if k >= self.bins.len() {
            self.bins.resize(k + 1, Acc::default());
        }
        let b = &mut self.bins[k];
        let sq = value * value;
        b.count += 1;
        b.s1 += value;
        b.s2 += sq;
        b.s4 += sq * sq;
    }

    pub fn merge(&mut self, other: &BinAccumulator) {
        if other.bins.len() > self.bins.len() {
            self.bins.resize(other.bins.len(), Acc::default());
        }
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            a.count += b.count;
            a.s1 += b.s1;
            a.s2 += b.s2;
            a.s4 += b.s4;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.bins.iter().all(|b| b.count == 0)
    }

    pub fn finish(&self, params: &BinningParams) -> BinnedStatistics {
        let se = |n: f64, mean: f64, sum_sq: f64| {
            if n < 2.0 {
                0.0
            } else {
                ((sum_sq - n * mean * mean).max(0.0) / (n - 1.0) / n).sqrt()
            }
        };
        let bins = self
            .bins
            .iter()
            .enumerate()
            .filter(|(_, b)| b.count > 0)
            .map(|(k, b)| {
                let n = b.count as f64;
                let mean_sq = b.s2 / n;
                let mean = b.s1 / n;
                Bin {
                    omega_mid: (k as f64 + 0.5) * self.width,
                    mean_sq,
                    count: b.count,
                    std_err: se(n, mean_sq, b.s4),
                    mean,
                    mean_std_err: se(n, mean, b.s2),
                }
            })
            .collect();
        BinnedStatistics {
            ebar_center: params.ebar_center,
            ebar_halfwidth: params.ebar_halfwidth,
            omega_bin_width: params.omega_bin_width,
            bins,
        }
    }
}

fn check_sorted(energies: &[f64]) -> Result<()> {
    if energies.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidInput("energies must be sorted ascending and finite".into()));
    }
    Ok(())
}

fn empty_window(params: &BinningParams) -> Error {
    Error::EmptyWindow(format!(
        "no eigenstate pair has Ē in [{}, {}]",
        params.ebar_lo(),
        params.ebar_hi()
    ))
}

/// Bins every unordered pair `α < β` of a dense symmetric matrix with
/// `Ē_αβ` in the closed window.
pub fn bin_offdiagonal(
    elements: MatRef<'_, f64>,
    energies: &[f64],
    params: &BinningParams,
) -> Result<BinnedStatistics> {
    params.validate()?;
    let n = energies.len();
    if elements.nrows() != n || elements.ncols() != n {
        return Err(Error::Dimension(format!(
            "{}×{} elements for {n} energies",
            elements.nrows(),
            elements.ncols()
        )));
    }
    check_sorted(energies)?;
    let mut acc = BinAccumulator::new(params);
    let mut seen = false;
    for a in 0..n {
        for b in a + 1..n {
            let ebar = 0.5 * (energies[a] + energies[b]);
            if ebar >= params.ebar_lo() && ebar <= params.ebar_hi() {
                seen = true;
                acc.push(0.5 * (energies[b] - energies[a]), elements[(a, b)]);
            }
        }
    }
    if !seen {
        return Err(empty_window(params));
    }
    Ok(acc.finish(params))
}

/// Diagonal elements of one operator for the eigenstates whose energy lies
/// in the `Ē` window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowDiagonal {
    pub values: Vec<f64>,
}

impl WindowDiagonal {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStatistics {
    pub binned: BinnedStatistics,
    /// Indices `α` with `E_α` in the `Ē` window.
    pub window_states: Vec<usize>,
    /// One entry per operator, in index order.
    pub diagonals: Vec<WindowDiagonal>,
}

const ALPHA_BLOCK: usize = 64;

/// Index range `[lo, hi)` of sorted `e` inside the closed `[a, b]`.
fn index_range(e: &[f64], a: f64, b: f64) -> (usize, usize) {
    (e.partition_point(|&x| x < a), e.partition_point(|&x| x <= b))
}

/// Work plan shared by every operator.
struct Plan {
    /// `(α, β_lo, β_hi)`: admissible partners `β > α`.
    rows: Vec<(usize, usize, usize)>,
    window: Vec<usize>,
}

fn plan(energies: &[f64], params: &BinningParams) -> Plan {
    let (lo, hi) = (params.ebar_lo(), params.ebar_hi());
    let wmax = params.omega_limit();
    let n = energies.len();
    let mut rows = Vec::new();
    for (a, &ea) in energies.iter().enumerate() {
        if ea > hi {
            break;
        }
        let mut b_lo = 2.0 * lo - ea;
        let mut b_hi = 2.0 * hi - ea;
        if wmax.is_finite() {
            b_lo = b_lo.max(ea - 2.0 * wmax);
            b_hi = b_hi.min(ea + 2.0 * wmax);
        }
        let (s, t) = index_range(energies, b_lo, b_hi);
        let s = s.max(a + 1);
        if s < t.min(n) {
            rows.push((a, s, t));
        }
    }
    let (ws, wt) = index_range(energies, lo, hi);
    Plan { rows, window: (ws..wt).collect() }
}

fn one_operator(
    system: &BipartiteSystem,
    spec: &OperatorEnsembleSpec,
    params: &BinningParams,
    plan: &Plan,
    index: usize,
) -> Result<(BinAccumulator, WindowDiagonal)> {
    let o_a = sample_local_operator(spec, index)?;
    let v = system.spectrum_t().eigenvectors();
    let e = system.spectrum_t().eigenvalues();
    let n = system.dim();
    let db = system.dim_b();
    let mut acc = BinAccumulator::new(params);
    let mut diag = Vec::with_capacity(plan.window.len());
    let mut w = Mat::<f64>::zeros(n, ALPHA_BLOCK);
    let mut g = Mat::<f64>::zeros(0, 0);

    let mut r = 0;
    while r < plan.rows.len() {
        let rows = &plan.rows[r..(r + ALPHA_BLOCK).min(plan.rows.len())];
        let b0 = rows.iter().map(|t| t.1).min().expect("non-empty");
        let b1 = rows.iter().map(|t| t.2).max().expect("non-empty");
        let k = rows.len();
        let mut wb = w.as_mut().subcols_mut(0, k);
        for (c, &(a, _, _)) in rows.iter().enumerate() {
            apply_local(
                o_a.as_ref(),
                db,
                v.subcols(a, 1),
                wb.rb_mut().subcols_mut(c, 1),
            );
        }
        g.resize_with(k, b1 - b0, |_, _| 0.0);
        matmul(
            g.as_mut(),
            Accum::Replace,
            wb.rb().transpose(),
            v.subcols(b0, b1 - b0),
            1.0,
            Par::Seq,
        );
        for (c, &(a, s, t)) in rows.iter().enumerate() {
            for b in s..t {
                acc.push(0.5 * (e[b] - e[a]), g[(c, b - b0)]);
            }
        }
        r += k;
    }
    for &a in &plan.window {
        let mut col = w.as_mut().subcols_mut(0, 1);
        apply_local(o_a.as_ref(), db, v.subcols(a, 1), col.rb_mut());
        diag.push((0..n).map(|i| col[(i, 0)] * v[(i, a)]).sum());
    }
    Ok((acc, WindowDiagonal { values: diag }))
}

/// How matrix elements are formed for the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    /// `Wᵀ V` with `W = (O_A ⊗ I) V`, once per operator.
    Direct,
    /// `dim_A × dim_A` blocks `M_αᵀ M_β` shared by all operators, then one
    /// contraction with every `O_A`.
    Gram,
}

impl Method {
    /// Cheaper of the two per admissible pair.
    fn choose(dim_a: usize, dim: usize, count: usize) -> Self {
        if dim_a * (dim + count * dim_a) < count * dim {
            Method::Gram
        } else {
            Method::Direct
        }
    }
}

/// Target row count of the stacked `M_α` in one Gram product.
const GRAM_ROWS: usize = 64;

/// Columns of `V_T` copied into one contiguous buffer.
fn flat_eigenvectors(system: &BipartiteSystem) -> Vec<f64> {
    let st = system.spectrum_t();
    let n = st.dim();
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        out.extend_from_slice(st.eigenvector(a));
    }
    out
}

/// Row `k` holds operator `k` flattened column-major.
fn operator_rows(spec: &OperatorEnsembleSpec) -> Result<Mat<f64>> {
    let d = spec.dim_a;
    let ops = (0..spec.count)
        .map(|k| sample_local_operator(spec, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(Mat::from_fn(spec.count, d * d, |k, c| ops[k].get(c % d, c / d)))
}

struct GramContext<'a> {
    v: &'a [f64],
    e: &'a [f64],
    n: usize,
    da: usize,
    db: usize,
    ops: MatRef<'a, f64>,
}

impl GramContext<'_> {
    fn block(&self, rows: &[(usize, usize, usize)], params: &BinningParams) -> BinAccumulator {
        let (n, da, db) = (self.n, self.da, self.db);
        let mut acc = BinAccumulator::new(params);
        let b0 = rows.iter().map(|t| t.1).min().expect("non-empty");
        let b1 = rows.iter().map(|t| t.2).max().expect("non-empty");
        let q = rows.len();
        let m = Mat::from_fn(q * da, db, |r, b| {
            let (a, _, _) = rows[r / da];
            self.v[a * n + (r % da) * db + b]
        });
        let vb = MatRef::from_column_major_slice(&self.v[b0 * n..b1 * n], db, da * (b1 - b0));
        // g[(r·dA + i), j + dA·(β − b0)] = (M_αᵀ M_β)_ij for row r.
        let mut g = Mat::<f64>::zeros(q * da, da * (b1 - b0));
        matmul(g.as_mut(), Accum::Replace, m.as_ref(), vb, 1.0, Par::Seq);
        for (r, &(a, s, t)) in rows.iter().enumerate() {
            let tr = Mat::from_fn(da * da, t - s, |c, col| {
                g[(r * da + c % da, c / da + da * (s - b0 + col))]
            });
            let mut o = Mat::<f64>::zeros(self.ops.nrows(), t - s);
            matmul(o.as_mut(), Accum::Replace, self.ops, tr.as_ref(), 1.0, Par::Seq);
            for k in 0..self.ops.nrows() {
                for b in s..t {
                    acc.push(0.5 * (self.e[b] - self.e[a]), o[(k, b - s)]);
                }
            }
        }
        acc
    }

    /// `O_αα` for every operator.
    fn diagonal(&self, a: usize) -> Vec<f64> {
        let m = MatRef::from_column_major_slice(&self.v[a * self.n..(a + 1) * self.n], self.db, self.da);
        let mut g = Mat::<f64>::zeros(self.da, self.da);
        matmul(g.as_mut(), Accum::Replace, m.transpose(), m, 1.0, Par::Seq);
        (0..self.ops.nrows())
            .map(|k| {
                (0..self.da * self.da)
                    .map(|c| self.ops[(k, c)] * g[(c % self.da, c / self.da)])
                    .sum()
            })
            .collect()
    }
}

fn gram_statistics(
    system: &BipartiteSystem,
    spec: &OperatorEnsembleSpec,
    params: &BinningParams,
    plan: &Plan,
) -> Result<(BinAccumulator, Vec<WindowDiagonal>)> {
    let v = flat_eigenvectors(system);
    let ops = operator_rows(spec)?;
    let ctx = GramContext {
        v: &v,
        e: system.spectrum_t().eigenvalues(),
        n: system.dim(),
        da: system.dim_a(),
        db: system.dim_b(),
        ops: ops.as_ref(),
    };
    let q = (GRAM_ROWS / ctx.da).max(1);
    let parts: Vec<BinAccumulator> = plan
        .rows
        .par_chunks(q)
        .map(|rows| ctx.block(rows, params))
        .collect();
    let mut total = BinAccumulator::new(params);
    for p in &parts {
        total.merge(p);
    }
    let per_state: Vec<Vec<f64>> = plan.window.par_iter().map(|&a| ctx.diagonal(a)).collect();
    let diagonals = (0..spec.count)
        .map(|k| WindowDiagonal { values: per_state.iter().map(|d| d[k]).collect() })
        .collect();
    Ok((total, diagonals))
}

fn direct_statistics(
    system: &BipartiteSystem,
    spec: &OperatorEnsembleSpec,
    params: &BinningParams,
    plan: &Plan,
) -> Result<(BinAccumulator, Vec<WindowDiagonal>)> {
    let parts: Vec<(BinAccumulator, WindowDiagonal)> = (0..spec.count)
        .into_par_iter()
        .map(|k| one_operator(system, spec, params, plan, k))
        .collect::<Result<Vec<_>>>()?;
    let mut total = BinAccumulator::new(params);
    let mut diagonals = Vec::with_capacity(parts.len());
    for (acc, d) in parts {
        total.merge(&acc);
        diagonals.push(d);
    }
    Ok((total, diagonals))
}

/// Off-diagonal bins and window diagonals for every operator of the
/// ensemble. Work runs on a pool of `threads` workers; partial sums are
/// merged in a fixed order, so the output does not depend on `threads`.
pub fn ensemble_statistics(
    system: &BipartiteSystem,
    spec: &OperatorEnsembleSpec,
    params: &BinningParams,
    threads: usize,
) -> Result<EnsembleStatistics> {
    let method = Method::choose(system.dim_a(), system.dim(), spec.count);
    statistics_with(system, spec, params, threads, method)
}

fn statistics_with(
    system: &BipartiteSystem,
    spec: &OperatorEnsembleSpec,
    params: &BinningParams,
    threads: usize,
    method: Method,
) -> Result<EnsembleStatistics> {
    params.validate()?;
    spec.validate()?;
    if spec.dim_a != system.dim_a() {
        return Err(Error::Dimension(format!(
            "ensemble dimension {} does not match factor A dimension {}",
            spec.dim_a,
            system.dim_a()
        )));
    }
    let e = system.spectrum_t().eigenvalues();
    let plan = plan(e, params);
    if plan.rows.is_empty() {
        return Err(empty_window(params));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|err| Error::Configuration(format!("thread pool: {err}")))?;
    let (total, diagonals) = pool.install(|| match method {
        Method::Direct => direct_statistics(system, spec, params, &plan),
        Method::Gram => gram_statistics(system, spec, params, &plan),
    })?;
    if total.is_empty() {
        return Err(empty_window(params));
    }
    Ok(EnsembleStatistics {
        binned: total.finish(params),
        window_states: plan.window,
        diagonals,
    })
}
