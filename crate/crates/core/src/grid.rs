//! Time and nonlinear-frequency grids plus the complex-array containers
//! that move between the scattering, synthesis, modem and network modules.
//!
//! The nonlinear frequency grid is tied rigidly to the time grid:
//! `lambda_k = pi * k' / (n * dt)` for `k' = -n/2 .. n/2 - 1`, i.e. half of
//! the conjugate DFT angular-frequency grid. This keeps the spectral arrays
//! aligned index-for-index with the DFT of the time samples.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform complex-sample time grid, centered so that `t_start = -n*dt/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    n_samples: usize,
    dt: f64,
    t_start: f64,
}

impl TimeGrid {
    /// Build a grid of `n_samples` points sampled at `sample_rate_hz`.
    ///
    /// `n_samples` must be a power of two (>= 2) and the rate positive.
    pub fn new(n_samples: usize, sample_rate_hz: f64) -> Result<Self> {
        if n_samples < 2 || !n_samples.is_power_of_two() {
            return Err(Error::invalid(format!(
                "n_samples must be a power of two >= 2, got {n_samples}"
            )));
        }
        if !(sample_rate_hz > 0.0) || !sample_rate_hz.is_finite() {
            return Err(Error::invalid(format!(
                "sample_rate must be positive and finite, got {sample_rate_hz}"
            )));
        }
        let dt = 1.0 / sample_rate_hz;
        let t_start = -(n_samples as f64) * dt / 2.0;
        Ok(TimeGrid {
            n_samples,
            dt,
            t_start,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Seconds per sample.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    /// Total window length `n * dt` in seconds.
    pub fn window(&self) -> f64 {
        self.n_samples as f64 * self.dt
    }

    /// Time of sample `k`.
    pub fn t(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }

    /// Grid with the same sample count and `factor`-times finer sampling over
    /// the same window. Used by oversampling oracles and convergence tests.
    pub fn oversampled(&self, factor: usize) -> Result<TimeGrid> {
        TimeGrid::new(self.n_samples * factor, (1.0 / self.dt) * factor as f64)
    }
}

/// Real nonlinear-frequency grid `lambda = omega / 2` of the conjugate DFT grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearGrid {
    n_samples: usize,
    dt: f64,
    lambda: Vec<f64>,
}

impl NonlinearGrid {
    /// Derive the nonlinear-frequency grid from a time grid.
    pub fn from_time_grid(tg: &TimeGrid) -> Self {
        let n = tg.n_samples();
        let span = tg.window();
        let lambda = (0..n)
            .map(|k| {
                let kp = k as f64 - n as f64 / 2.0;
                std::f64::consts::PI * kp / span
            })
            .collect();
        NonlinearGrid {
            n_samples: n,
            dt: tg.dt(),
            lambda,
        }
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn lambda(&self, k: usize) -> f64 {
        self.lambda[k]
    }

    pub fn lambda_values(&self) -> &[f64] {
        &self.lambda
    }

    /// Grid spacing `pi / (n * dt)`.
    pub fn delta_lambda(&self) -> f64 {
        std::f64::consts::PI / (self.n_samples as f64 * self.dt)
    }

    /// Largest grid frequency (one-sided endpoint).
    pub fn lambda_max(&self) -> f64 {
        *self.lambda.last().expect("grid is never empty")
    }
}

/// Complex burst samples on a time grid (the normalized field q(t)).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub grid: TimeGrid,
    pub samples: Vec<Complex64>,
}

impl TimeSignal {
    pub fn new(grid: TimeGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.n_samples() {
            return Err(Error::invalid(format!(
                "sample count {} does not match grid size {}",
                samples.len(),
                grid.n_samples()
            )));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("time signal contains non-finite samples"));
        }
        Ok(TimeSignal { grid, samples })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        let n = grid.n_samples();
        TimeSignal {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Discrete energy `sum |q|^2 dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dt()
    }
}

/// What a spectral array holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Continuous nonlinear spectrum Q = b/a.
    NonlinearQ,
    /// Linear Fourier surrogate evaluated at angular frequency 2*lambda.
    LinearSurrogate,
    /// Scattering coefficient a(lambda).
    CoeffA,
    /// Scattering coefficient b(lambda).
    CoeffB,
}

/// Complex values on a nonlinear-frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSamples {
    pub grid: NonlinearGrid,
    pub values: Vec<Complex64>,
    pub kind: SpectrumKind,
}

impl SpectrumSamples {
    pub fn new(grid: NonlinearGrid, values: Vec<Complex64>, kind: SpectrumKind) -> Result<Self> {
        if values.len() != grid.n_samples() {
            return Err(Error::invalid(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.n_samples()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("spectrum contains non-finite values"));
        }
        Ok(SpectrumSamples { grid, values, kind })
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grid_matches_declared_window() {
        let tg = TimeGrid::new(2048, 96e9).unwrap();
        assert!((tg.dt() - 10.416666666666666e-12).abs() < 1e-24);
        assert!((tg.window() - 21.333333333333332e-9).abs() < 1e-18);
        assert!((tg.t_start() + tg.window() / 2.0).abs() < 1e-24);
    }

    #[test]
    fn smallest_grid() {
        let tg = TimeGrid::new(2, 1.0).unwrap();
        assert_eq!(tg.dt(), 1.0);
        assert_eq!(tg.t(0), -1.0);
        assert_eq!(tg.t(1), 0.0);
    }

    #[test]
    fn window_scales_with_samples() {
        let tg = TimeGrid::new(1024, 96e9).unwrap();
        // n * dt by hand: 1024 / 96e9
        assert!((tg.window() - 1024.0 / 96e9).abs() < 1e-20);
        assert!((tg.window() - 10.666666666666666e-9).abs() < 1e-18);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::new(0, 1.0).is_err());
        assert!(TimeGrid::new(1, 1.0).is_err());
        assert!(TimeGrid::new(100, 1.0).is_err());
        assert!(TimeGrid::new(8, 0.0).is_err());
        assert!(TimeGrid::new(8, -1.0).is_err());
    }

    #[test]
    fn nonlinear_grid_two_point() {
        let tg = TimeGrid::new(2, 1.0).unwrap();
        let ng = NonlinearGrid::from_time_grid(&tg);
        assert_eq!(ng.n_samples(), 2);
        assert!((ng.lambda(0) + std::f64::consts::PI / 2.0).abs() < 1e-15);
        assert!(ng.lambda(1).abs() < 1e-15);
    }

    #[test]
    fn nonlinear_grid_spacing_and_endpoint() {
        let tg = TimeGrid::new(2048, 96e9).unwrap();
        let ng = NonlinearGrid::from_time_grid(&tg);
        let expected_spacing = std::f64::consts::PI / tg.window();
        for k in 1..ng.n_samples() {
            let d = ng.lambda(k) - ng.lambda(k - 1);
            assert!((d - expected_spacing).abs() < 1e-3 * expected_spacing.abs() * 1e-9 + 1e-4);
        }
        // lambda_max = pi/(2 dt) - one bin
        let expected_max = std::f64::consts::PI / (2.0 * tg.dt()) - expected_spacing;
        assert!((ng.lambda_max() - expected_max).abs() < 1.0);
        assert!((ng.lambda_max() - 1.506e11).abs() < 1e9);
    }

    #[test]
    fn spectrum_rejects_length_mismatch() {
        let tg = TimeGrid::new(4, 1.0).unwrap();
        let ng = NonlinearGrid::from_time_grid(&tg);
        assert!(SpectrumSamples::new(ng, vec![Complex64::new(0.0, 0.0); 3], SpectrumKind::NonlinearQ).is_err());
    }
}
