//! Peaks of the binned off-diagonal curve and their match to `H_A` gaps.

use serde::Serialize;

use super::binning::BinnedStatistics;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandPeak {
    pub omega: f64,
    pub mean_sq: f64,
    pub prominence: f64,
    /// Closest gap `ω`, if any gaps were given.
    pub nearest_gap: Option<f64>,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandReport {
    pub sigma_s: f64,
    pub prominence_threshold: f64,
    pub gaps: Vec<f64>,
    pub peaks: Vec<BandPeak>,
    /// Matched peaks over detected peaks; 0 when nothing was detected.
    pub matched_fraction: f64,
    /// Gaps with at least one peak within tolerance.
    pub gaps_hit: usize,
}

/// Half-differences `(E_i − E_j)/2` for `i > j` in ascending order, with
/// values closer than `tol` merged. `include_zero` prepends `ω = 0`, the
/// location of the `i = j` terms.
pub fn gap_omegas(e_a: &[f64], include_zero: bool, tol: f64) -> Vec<f64> {
    let mut g: Vec<f64> = Vec::new();
    if include_zero {
        g.push(0.0);
    }
    for i in 0..e_a.len() {
        for j in 0..i {
            g.push(0.5 * (e_a[i] - e_a[j]).abs());
        }
    }
    g.sort_by(f64::total_cmp);
    g.dedup_by(|a, b| (*a - *b).abs() <= tol);
    g
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Topographic prominence of the interior local maximum at `k`.
fn prominence(h: &[f64], k: usize) -> f64 {
    let side_min = |iter: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut m: Option<f64> = None;
        for j in iter {
            if h[j] > h[k] {
                break;
            }
            m = Some(m.map_or(h[j], |x: f64| x.min(h[j])));
        }
        m
    };
    let left = side_min(&mut (0..k).rev());
    let right = side_min(&mut (k + 1..h.len()));
    match (left, right) {
        (Some(l), Some(r)) => h[k] - l.max(r),
        _ => 0.0,
    }
}

/// Local maxima of `mean_sq` over `ω` with prominence at least twice the
/// median standard error, each matched against `gaps` within `2σ_S`.
/// Only interior bins can be peaks, so a monotone curve has none.
pub fn detect_bands(binned: &BinnedStatistics, gaps: &[f64], sigma_s: f64) -> Result<BandReport> {
    let bins = &binned.bins;
    if bins.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "band detection needs at least 3 bins, got {}",
            bins.len()
        )));
    }
    if !(sigma_s >= 0.0) {
        return Err(Error::InvalidInput(format!("σ_S must be ≥ 0, got {sigma_s}")));
    }
    let h: Vec<f64> = bins.iter().map(|b| b.mean_sq).collect();
    let threshold = 2.0 * median(bins.iter().map(|b| b.std_err).collect());
    let tol = 2.0 * sigma_s;
    let mut peaks = Vec::new();
    for k in 1..h.len() - 1 {
        if h[k] <= h[k - 1] || h[k] < h[k + 1] {
            continue;
        }
        // Plateau: keep its first bin only if it descends afterwards.
        let mut end = k;
        while end + 1 < h.len() && h[end + 1] == h[k] {
            end += 1;
        }
        if end == h.len() - 1 {
            continue;
        }
        let p = prominence(&h, k);
        if p < threshold || p <= 0.0 {
            continue;
        }
        let omega = bins[k].omega_mid;
        let nearest = gaps
            .iter()
            .copied()
            .min_by(|a, b| (a - omega).abs().total_cmp(&(b - omega).abs()));
        peaks.push(BandPeak {
            omega,
            mean_sq: h[k],
            prominence: p,
            nearest_gap: nearest,
            matched: nearest.is_some_and(|g| (g - omega).abs() <= tol),
        });
    }
    let matched = peaks.iter().filter(|p| p.matched).count();
    let gaps_hit = gaps
        .iter()
        .filter(|&&g| peaks.iter().any(|p| (p.omega - g).abs() <= tol))
        .count();
    Ok(BandReport {
        sigma_s,
        prominence_threshold: threshold,
        gaps: gaps.to_vec(),
        matched_fraction: if peaks.is_empty() { 0.0 } else { matched as f64 / peaks.len() as f64 },
        peaks,
        gaps_hit,
    })
}
