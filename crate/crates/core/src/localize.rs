//! Operator localizability from eigenvalue multiplicities.
//!
//! An operator whose eigenvalue multiplicities share a common divisor `g` can
//! be written as `M ⊗ I_g` in a suitable basis, so it acts nontrivially on a
//! factor of dimension `D_O = |H| / g`.

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, eigvals_sym, SymmetricMatrix};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenClass {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizabilityReport {
    pub total_dim: usize,
    pub classes: Vec<EigenClass>,
    pub gcd_multiplicity: usize,
    pub d_o: usize,
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Groups sorted values whose neighbour gap is at most `tol · range`.
/// Returns `(start, end)` index ranges.
fn cluster(sorted: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let range = sorted[sorted.len() - 1] - sorted[0];
    let thresh = tol * range;
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..sorted.len() {
        if sorted[k] - sorted[k - 1] > thresh {
            out.push((start, k));
            start = k;
        }
    }
    out.push((start, sorted.len()));
    out
}

fn report_from_sorted(sorted: &[f64], tol: f64) -> Result<(LocalizabilityReport, Vec<(usize, usize)>)> {
    if sorted.is_empty() {
        return Err(Error::InvalidInput("empty spectrum".into()));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be ≥ 0, got {tol}")));
    }
    if sorted.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite eigenvalue".into()));
    }
    let ranges = cluster(sorted, tol);
    let classes: Vec<EigenClass> = ranges
        .iter()
        .map(|&(a, b)| EigenClass {
            value: sorted[a..b].iter().sum::<f64>() / (b - a) as f64,
            multiplicity: b - a,
        })
        .collect();
    let g = classes.iter().fold(0, |acc, c| gcd(acc, c.multiplicity));
    let report = LocalizabilityReport {
        total_dim: sorted.len(),
        gcd_multiplicity: g,
        d_o: sorted.len() / g,
        classes,
    };
    Ok((report, ranges))
}

/// Clusters `eigenvalues` (any order) and reports `D_O = |H| / gcd`.
pub fn localizability(eigenvalues: &[f64], tol: f64) -> Result<LocalizabilityReport> {
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    report_from_sorted(&sorted, tol).map(|r| r.0)
}

pub fn operator_localizability(op: &SymmetricMatrix, tol: f64) -> Result<LocalizabilityReport> {
    localizability(&eigvals_sym(op)?, tol)
}

/// Basis in which `op` reads `local_block ⊗ I_g`.
#[derive(Debug, Clone)]
pub struct LocalizingBasis {
    pub report: LocalizabilityReport,
    /// Orthogonal; column `a·g + c` spans copy `c` of local state `a`.
    pub basis: Mat<f64>,
    /// Diagonal `D_O × D_O` block, distinct values ascending.
    pub local_block: SymmetricMatrix,
}

/// Sorts eigenvectors by eigenvalue so that `basisᵀ · op · basis` equals
/// `local_block ⊗ I_{|H|/D_O}` to within 1e-9 of the operator scale.
pub fn localizing_basis(op: &SymmetricMatrix, tol: f64) -> Result<LocalizingBasis> {
    let spec = eig_sym(op)?;
    let (report, ranges) = report_from_sorted(spec.eigenvalues(), tol)?;
    let g = report.gcd_multiplicity;
    let scale = spec.max_abs().max(f64::MIN_POSITIVE);
    let mut diag = Vec::with_capacity(report.d_o);
    for (class, &(a, b)) in report.classes.iter().zip(&ranges) {
        let spread = spec.eigenvalues()[a..b]
            .iter()
            .map(|v| (v - class.value).abs())
            .fold(0.0, f64::max);
        if spread > 1e-9 * scale {
            return Err(Error::Localization(format!(
                "class at {} (multiplicity {}) spans {:e}, too wide to act as one eigenvalue; lower the tolerance",
                class.value, class.multiplicity, spread
            )));
        }
        if class.multiplicity % g != 0 {
            return Err(Error::Localization(format!(
                "class at {} has multiplicity {} not divisible by {g}",
                class.value, class.multiplicity
            )));
        }
        diag.extend(std::iter::repeat_n(class.value, class.multiplicity / g));
    }
    let (_, basis) = spec.into_parts();
    Ok(LocalizingBasis {
        report,
        basis,
        local_block: SymmetricMatrix::from_diagonal(&diag),
    })
}
