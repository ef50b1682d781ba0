use super::correlate::SpectralFunction;
use super::quadrature::trapezoid_samples;
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 64;

/// Piecewise-linear density of states on an ascending grid.
///
/// `eval` interpolates linearly between grid nodes and returns zero outside
/// `[spectral_min, spectral_max]`. `total` is the trapezoid integral of the
/// tabulated values.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    grid: Vec<f64>,
    values: Vec<f64>,
    total: f64,
}

impl SpectralDensity {
    /// Wraps tabulated values. The grid must be strictly ascending, values
    /// non-negative and the integral positive.
    pub fn from_grid(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::Dimension(format!(
                "density needs matching grid/value arrays of length ≥ 2 (got {} and {})",
                grid.len(),
                values.len()
            )));
        }
        if grid.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite density sample".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("density grid not strictly ascending".into()));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInput("negative density value".into()));
        }
        let total = trapezoid_samples(&grid, &values);
        if !(total > 0.0) {
            return Err(Error::InvalidInput("density integrates to zero".into()));
        }
        Ok(Self { grid, values, total })
    }

    /// Constant density on `[min, max]` integrating to `total`.
    pub fn flat(min: f64, max: f64, total: f64) -> Result<Self> {
        if !(max > min) {
            return Err(Error::ZeroWidthSpectrum { count: 0, value: min });
        }
        let v = total / (max - min);
        Self::from_grid(vec![min, max], vec![v, v])
    }

    /// Samples `f` on `points` equally spaced nodes over `[min, max]`.
    pub fn from_fn(min: f64, max: f64, points: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(max > min) || points < 2 {
            return Err(Error::InvalidInput("from_fn needs max > min and ≥ 2 points".into()));
        }
        let step = (max - min) / (points - 1) as f64;
        let grid: Vec<f64> = (0..points)
            .map(|k| if k + 1 == points { max } else { min + k as f64 * step })
            .collect();
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::from_grid(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn spectral_min(&self) -> f64 {
        self.grid[0]
    }

    pub fn spectral_max(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// Spectral range σ.
    pub fn sigma(&self) -> f64 {
        self.spectral_max() - self.spectral_min()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.spectral_min() && x <= self.spectral_max()
    }

    /// Normalized form ρ = n / total.
    pub fn fractional(&self) -> SpectralDensity {
        let values = self.values.iter().map(|v| v / self.total).collect();
        SpectralDensity {
            grid: self.grid.clone(),
            values,
            total: 1.0,
        }
    }

    /// Same shape, rescaled so that it integrates to `total`.
    pub fn with_total(&self, total: f64) -> SpectralDensity {
        let s = total / self.total;
        SpectralDensity {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
            total,
        }
    }

    /// Linear interpolation; zero outside the spectral range.
    pub fn eval(&self, x: f64) -> f64 {
        let g = &self.grid;
        if !(x >= g[0] && x <= g[g.len() - 1]) {
            return 0.0;
        }
        let k = g.partition_point(|&v| v <= x);
        if k == 0 {
            return self.values[0];
        }
        if k >= g.len() {
            return self.values[g.len() - 1];
        }
        let (x0, x1) = (g[k - 1], g[k]);
        let t = (x - x0) / (x1 - x0);
        self.values[k - 1] + t * (self.values[k] - self.values[k - 1])
    }
}

impl SpectralFunction for SpectralDensity {
    fn eval(&self, x: f64) -> f64 {
        SpectralDensity::eval(self, x)
    }

    fn support(&self) -> (f64, f64) {
        (self.spectral_min(), self.spectral_max())
    }

    fn kinks(&self) -> Vec<f64> {
        self.grid.clone()
    }
}

/// Histogram density of states.
///
/// Eigenvalue counts in `bins` equal bins over `[min, max]` are divided by
/// the bin width and placed at bin centres. The curve is held flat across
/// the outer half-bins, interpolated linearly between centres, and sampled
/// onto `4·bins + 1` nodes with spacing of a quarter bin. Every centre is a
/// node, so the trapezoid integral equals the eigenvalue count up to
/// rounding.
pub fn density_of_states(eigenvalues: &[f64], bins: usize) -> Result<SpectralDensity> {
    if eigenvalues.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "density of states needs at least 2 eigenvalues, got {}",
            eigenvalues.len()
        )));
    }
    if bins < 4 {
        return Err(Error::InvalidInput(format!("bins must be ≥ 4, got {bins}")));
    }
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite eigenvalue".into()));
    }
    let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return Err(Error::ZeroWidthSpectrum {
            count: eigenvalues.len(),
            value: min,
        });
    }
    let width = (max - min) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &e in eigenvalues {
        let k = (((e - min) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let heights: Vec<f64> = counts.iter().map(|&c| c as f64 / width).collect();

    let nodes = 4 * bins + 1;
    let step = width / 4.0;
    let mut grid = Vec::with_capacity(nodes);
    let mut values = Vec::with_capacity(nodes);
    for k in 0..nodes {
        let x = if k + 1 == nodes { max } else { min + k as f64 * step };
        // Position in units of bins, measured from the first centre.
        let u = k as f64 / 4.0 - 0.5;
        let v = if u <= 0.0 {
            heights[0]
        } else if u >= (bins - 1) as f64 {
            heights[bins - 1]
        } else {
            let i = u.floor() as usize;
            let t = u - i as f64;
            heights[i] + t * (heights[i + 1] - heights[i])
        };
        grid.push(x);
        values.push(v);
    }
    SpectralDensity::from_grid(grid, values)
}

/// Number of eigenvalues in `[lo, hi]` of an ascending slice.
pub fn count_in(sorted: &[f64], lo: f64, hi: f64) -> usize {
    if hi < lo {
        return 0;
    }
    let a = sorted.partition_point(|&v| v < lo);
    let b = sorted.partition_point(|&v| v <= hi);
    b.saturating_sub(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_values_total() {
        let d = density_of_states(&[0.0, 1.0], 4).unwrap();
        assert!((d.total() - 2.0).abs() < 1e-12);
        assert_eq!(d.grid().len(), 17);
    }

    #[test]
    fn uniform_spectrum_has_flat_interior() {
        let ev: Vec<f64> = (0..1000).map(|k| -1.0 + 2.0 * k as f64 / 999.0).collect();
        let d = density_of_states(&ev, 10).unwrap();
        for (x, v) in d.grid().iter().zip(d.values()) {
            if x.abs() < 0.8 {
                assert!((v - 500.0).abs() / 500.0 < 0.05, "{x} {v}");
            }
        }
        assert!((d.total() - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn zero_outside_support() {
        let d = density_of_states(&[0.0, 0.5, 1.0], 4).unwrap();
        assert_eq!(d.eval(-0.01), 0.0);
        assert_eq!(d.eval(1.01), 0.0);
        assert!(d.eval(0.5) > 0.0);
    }

    #[test]
    fn identical_values_rejected() {
        assert!(matches!(
            density_of_states(&[1.0, 1.0, 1.0], 8),
            Err(Error::ZeroWidthSpectrum { count: 3, .. })
        ));
    }

    #[test]
    fn fractional_integrates_to_one() {
        let d = density_of_states(&[0.0, 0.1, 0.3, 0.9, 1.0], 6).unwrap();
        let r = d.fractional();
        assert!((trapezoid_samples(r.grid(), r.values()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn counting() {
        let v = [0.0, 1.0, 1.0, 2.0, 3.0];
        assert_eq!(count_in(&v, 1.0, 2.0), 3);
        assert_eq!(count_in(&v, 2.5, 2.0), 0);
        assert_eq!(count_in(&v, -5.0, 5.0), 5);
    }
}
