use super::quadrature::{integrate_adaptive, DEFAULT_TOL};
use crate::error::{Error, Result};

/// A real function of one variable with bounded support.
pub trait SpectralFunction {
    fn eval(&self, x: f64) -> f64;

    /// Closed interval outside which the function vanishes.
    fn support(&self) -> (f64, f64);

    /// Points where the function or its derivative jumps.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<T: SpectralFunction + ?Sized> SpectralFunction for &T {
    fn eval(&self, x: f64) -> f64 {
        (**self).eval(x)
    }
    fn support(&self) -> (f64, f64) {
        (**self).support()
    }
    fn kinks(&self) -> Vec<f64> {
        (**self).kinks()
    }
}

/// Closure-backed function with declared support and kinks.
pub struct Analytic<F> {
    f: F,
    support: (f64, f64),
    kinks: Vec<f64>,
}

impl<F: Fn(f64) -> f64> Analytic<F> {
    pub fn new(f: F, support: (f64, f64), kinks: Vec<f64>) -> Self {
        Self { f, support, kinks }
    }
}

impl<F: Fn(f64) -> f64> SpectralFunction for Analytic<F> {
    fn eval(&self, x: f64) -> f64 {
        if x < self.support.0 || x > self.support.1 {
            0.0
        } else {
            (self.f)(x)
        }
    }
    fn support(&self) -> (f64, f64) {
        self.support
    }
    fn kinks(&self) -> Vec<f64> {
        self.kinks.clone()
    }
}

/// Samples on an ascending grid, linearly interpolated, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpectralFunction for Tabulated {
    fn eval(&self, x: f64) -> f64 {
        let g = &self.grid;
        if g.is_empty() || x < g[0] || x > g[g.len() - 1] {
            return 0.0;
        }
        let k = g.partition_point(|&v| v <= x);
        if k == 0 {
            return self.values[0];
        }
        if k >= g.len() {
            return self.values[g.len() - 1];
        }
        let t = (x - g[k - 1]) / (g[k] - g[k - 1]);
        self.values[k - 1] + t * (self.values[k] - self.values[k - 1])
    }
    fn support(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }
    fn kinks(&self) -> Vec<f64> {
        self.grid.clone()
    }
}

/// `[g1⋆g2](x) = ∫ dy g1(y) g2(x + y)`, evaluated by adaptive quadrature.
#[derive(Debug, Clone)]
pub struct CrossCorrelation<A, B> {
    g1: A,
    g2: B,
    k1: Vec<f64>,
    k2: Vec<f64>,
    tol: f64,
}

pub fn cross_correlate<A: SpectralFunction, B: SpectralFunction>(
    g1: A,
    g2: B,
) -> CrossCorrelation<A, B> {
    let k1 = g1.kinks();
    let k2 = g2.kinks();
    CrossCorrelation {
        g1,
        g2,
        k1,
        k2,
        tol: DEFAULT_TOL * 1e-2,
    }
}

impl<A: SpectralFunction, B: SpectralFunction> CrossCorrelation<A, B> {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn try_eval(&self, x: f64) -> Result<f64> {
        let (a1, b1) = self.g1.support();
        let (a2, b2) = self.g2.support();
        let lo = a1.max(a2 - x);
        let hi = b1.min(b2 - x);
        if !(hi > lo) {
            return Ok(0.0);
        }
        let mut kinks: Vec<f64> = self.k1.clone();
        kinks.extend(self.k2.iter().map(|k| k - x));
        integrate_adaptive(
            |y| self.g1.eval(y) * self.g2.eval(x + y),
            lo,
            hi,
            self.tol,
            &kinks,
        )
    }

    /// Samples on `points` equally spaced nodes across the support.
    pub fn tabulate(&self, points: usize) -> Result<Tabulated> {
        if points < 2 {
            return Err(Error::InvalidInput("tabulation needs ≥ 2 points".into()));
        }
        let (lo, hi) = self.support();
        let step = (hi - lo) / (points - 1) as f64;
        let grid: Vec<f64> = (0..points).map(|k| lo + k as f64 * step).collect();
        let values = grid
            .iter()
            .map(|&x| self.try_eval(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Tabulated { grid, values })
    }
}

impl<A: SpectralFunction, B: SpectralFunction> SpectralFunction for CrossCorrelation<A, B> {
    /// Panics only if quadrature fails, which cannot happen for the
    /// piecewise-smooth inputs used in this crate; see [`Self::try_eval`].
    fn eval(&self, x: f64) -> f64 {
        match self.try_eval(x) {
            Ok(v) => v,
            Err(Error::Quadrature { best_estimate, .. }) => best_estimate,
            Err(e) => panic!("cross-correlation at {x}: {e}"),
        }
    }

    fn support(&self) -> (f64, f64) {
        let (a1, b1) = self.g1.support();
        let (a2, b2) = self.g2.support();
        (a2 - b1, b2 - a1)
    }

    fn kinks(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.k1.len() * self.k2.len().min(64));
        for &p in &self.k2 {
            for &q in &self.k1 {
                out.push(p - q);
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}
