//! Radix-2 discrete Fourier transforms and the linear surrogate spectrum.
//!
//! Convention: `dft` carries no prefactor, `inverse_dft` carries `1/n`, so
//! `inverse_dft(dft(x)) == x` up to roundoff.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{NonlinearGrid, SpectrumKind, SpectrumSamples, TimeSignal};

fn check_len(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::invalid(format!(
            "transform length must be a power of two, got {n}"
        )));
    }
    Ok(())
}

/// In-place radix-2 decimation-in-time transform.
/// `sign = -1` gives the forward kernel `exp(-2 pi i jk/n)`.
fn fft_in_place(x: &mut [Complex64], sign: f64) {
    let n = x.len();
    if n <= 1 {
        return;
    }
    // Bit-reversal permutation.
    let bits = n.trailing_zeros();
    for j in 0..n {
        let r = (j.reverse_bits() >> (usize::BITS - bits)) as usize;
        if r > j {
            x.swap(j, r);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * std::f64::consts::PI / len as f64;
        let wlen = Complex64::new(ang.cos(), ang.sin());
        let half = len / 2;
        for start in (0..n).step_by(len) {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..half {
                let a = x[start + k];
                let b = x[start + k + half] * w;
                x[start + k] = a + b;
                x[start + k + half] = a - b;
                w *= wlen;
            }
        }
        len <<= 1;
    }
}

/// Forward DFT, `X_k = sum_j x_j exp(-2 pi i jk / n)`, no prefactor.
pub fn dft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(x.len())?;
    let mut out = x.to_vec();
    fft_in_place(&mut out, -1.0);
    Ok(out)
}

/// Inverse DFT with the `1/n` prefactor.
pub fn inverse_dft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(x.len())?;
    let mut out = x.to_vec();
    fft_in_place(&mut out, 1.0);
    let scale = 1.0 / x.len() as f64;
    for v in &mut out {
        *v *= scale;
    }
    Ok(out)
}

/// Linear Fourier surrogate of the nonlinear spectrum:
/// `L(lambda_k) = sum_u conj(q(t_u)) exp(-2 i lambda_k t_u) dt`.
///
/// This is the low-power limit of the continuous spectrum and the quantity the
/// learned transform consumes or emits on its linear side. Evaluated with one
/// DFT; the `t_start != 0` phase is applied per bin.
pub fn linear_surrogate_spectrum(q: &TimeSignal) -> SpectrumSamples {
    let n = q.grid.n_samples();
    let dt = q.grid.dt();
    let t_start = q.grid.t_start();
    let grid = NonlinearGrid::from_time_grid(&q.grid);

    let conj: Vec<Complex64> = q.samples.iter().map(|z| z.conj()).collect();
    let bins = dft(&conj).expect("grid length is a power of two");

    let values: Vec<Complex64> = (0..n)
        .map(|k| {
            let lambda = grid.lambda(k);
            let phase = Complex64::from_polar(1.0, -2.0 * lambda * t_start);
            // lambda_k corresponds to DFT bin (k - n/2) mod n.
            let bin = (k + n / 2) % n;
            bins[bin] * phase * dt
        })
        .collect();

    SpectrumSamples {
        grid,
        values,
        kind: SpectrumKind::LinearSurrogate,
    }
}

/// Invert the linear surrogate map: recover the time signal whose surrogate
/// spectrum equals `spec`. Exact inverse of [`linear_surrogate_spectrum`] on
/// the grid; used for low-power synthesis baselines.
pub fn linear_surrogate_inverse(spec: &SpectrumSamples, tg: &crate::grid::TimeGrid) -> Result<TimeSignal> {
    let n = tg.n_samples();
    if spec.grid.n_samples() != n {
        return Err(Error::invalid("spectrum/grid size mismatch"));
    }
    let dt = tg.dt();
    let t_start = tg.t_start();
    let mut bins = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let lambda = spec.grid.lambda(k);
        let phase = Complex64::from_polar(1.0, 2.0 * lambda * t_start);
        bins[(k + n / 2) % n] = spec.values[k] * phase / dt;
    }
    let conj = inverse_dft(&bins)?;
    let samples: Vec<Complex64> = conj.iter().map(|z| z.conj()).collect();
    TimeSignal::new(*tg, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use num_complex::Complex64;
    use proptest::prelude::*;

    /// O(n^2) reference transform used as the independent oracle.
    fn dft_direct(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &v) in x.iter().enumerate() {
                    let ang = -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                    acc += v * Complex64::new(ang.cos(), ang.sin());
                }
                acc
            })
            .collect()
    }

    fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn delta_transforms_to_ones() {
        let mut x = vec![Complex64::new(0.0, 0.0); 8];
        x[0] = Complex64::new(1.0, 0.0);
        let y = dft(&x).unwrap();
        for v in y {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn complex_exponential_hits_single_bin() {
        let n = 64;
        let k0 = 5;
        let x: Vec<Complex64> = (0..n)
            .map(|j| {
                let ang = 2.0 * std::f64::consts::PI * (k0 * j) as f64 / n as f64;
                Complex64::new(ang.cos(), ang.sin())
            })
            .collect();
        let y = dft(&x).unwrap();
        for (k, v) in y.iter().enumerate() {
            if k == k0 {
                assert!((v - Complex64::new(n as f64, 0.0)).norm() < 1e-10);
            } else {
                assert!(v.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        let x = vec![Complex64::new(1.0, 0.0); 12];
        assert!(dft(&x).is_err());
        assert!(inverse_dft(&x).is_err());
    }

    #[test]
    fn matches_direct_oracle() {
        let mut state = 0x12345678u64;
        let mut rand = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for exp in [2usize, 4, 6, 8] {
            let n = 1 << exp;
            let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(rand(), rand())).collect();
            let fast = dft(&x).unwrap();
            let slow = dft_direct(&x);
            let scale = slow.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(max_abs_diff(&fast, &slow) < 1e-10 * scale.max(1.0));
        }
    }

    proptest! {
        #[test]
        fn round_trip_identity(exp in 1usize..13, seed in any::<u64>()) {
            let n = 1usize << exp;
            let mut state = seed | 1;
            let mut rand = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(rand(), rand())).collect();
            let back = inverse_dft(&dft(&x).unwrap()).unwrap();
            let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-30);
            prop_assert!(max_abs_diff(&x, &back) < 1e-12 * scale);
        }

        #[test]
        fn parseval(exp in 1usize..12, seed in any::<u64>()) {
            let n = 1usize << exp;
            let mut state = seed | 1;
            let mut rand = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(rand(), rand())).collect();
            let y = dft(&x).unwrap();
            let ex: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            let ey: f64 = y.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
            prop_assert!((ex - ey).abs() <= 1e-10 * ex.max(1e-30));
        }
    }

    #[test]
    fn surrogate_of_zero_is_zero() {
        let tg = TimeGrid::new(64, 1e9).unwrap();
        let l = linear_surrogate_spectrum(&TimeSignal::zeros(tg));
        assert!(l.values.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn surrogate_of_real_even_gaussian_is_real_even() {
        let tg = TimeGrid::new(256, 2e9).unwrap();
        let tau = 16.0 * tg.dt();
        let samples: Vec<Complex64> = (0..256)
            .map(|k| {
                let t = tg.t(k);
                Complex64::new((-t * t / (2.0 * tau * tau)).exp(), 0.0)
            })
            .collect();
        let q = TimeSignal::new(tg, samples).unwrap();
        let l = linear_surrogate_spectrum(&q);
        let peak = l.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let max_imag = l.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(max_imag < 1e-10 * peak, "imag {max_imag:e} vs peak {peak:e}");
        // Even in lambda: value at +lambda equals value at -lambda.
        let n = 256;
        for k in 1..n / 2 {
            let plus = l.values[n / 2 + k];
            let minus = l.values[n / 2 - k];
            assert!((plus - minus).norm() < 1e-9 * peak);
        }
        // Gaussian-shaped: positive real peak at lambda = 0.
        assert!(l.values[n / 2].re > 0.9 * peak);
    }

    #[test]
    fn surrogate_matches_direct_summation() {
        let tg = TimeGrid::new(128, 3e9).unwrap();
        let mut state = 0xfeedu64;
        let mut rand = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let samples: Vec<Complex64> = (0..128).map(|_| Complex64::new(rand(), rand())).collect();
        let q = TimeSignal::new(tg, samples).unwrap();
        let l = linear_surrogate_spectrum(&q);
        let peak = l.max_modulus();
        for k in 0..128 {
            let lambda = l.grid.lambda(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for (u, &qu) in q.samples.iter().enumerate() {
                let t = tg.t(u);
                acc += qu.conj() * Complex64::from_polar(1.0, -2.0 * lambda * t);
            }
            acc *= tg.dt();
            assert!((acc - l.values[k]).norm() < 1e-9 * peak.max(1e-30));
        }
    }

    #[test]
    fn surrogate_shift_theorem() {
        let tg = TimeGrid::new(128, 3e9).unwrap();
        let tau = 8.0 * tg.dt();
        let make = |shift_bins: i64| -> TimeSignal {
            let samples: Vec<Complex64> = (0..128)
                .map(|k| {
                    let t = tg.t(k) - shift_bins as f64 * tg.dt();
                    let env = (-t * t / (2.0 * tau * tau)).exp();
                    Complex64::new(env, 0.1 * (t / tau) * env)
                })
                .collect();
            TimeSignal::new(tg, samples).unwrap()
        };
        let base = linear_surrogate_spectrum(&make(0));
        let shifted = linear_surrogate_spectrum(&make(5));
        let t0 = 5.0 * tg.dt();
        let peak = base.max_modulus();
        for k in 0..128 {
            let lambda = base.grid.lambda(k);
            let expected = base.values[k] * Complex64::from_polar(1.0, -2.0 * lambda * t0);
            assert!((expected - shifted.values[k]).norm() < 1e-9 * peak);
        }
    }

    #[test]
    fn surrogate_inverse_round_trip() {
        let tg = TimeGrid::new(64, 1e9).unwrap();
        let mut state = 0xabcu64;
        let mut rand = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let samples: Vec<Complex64> = (0..64).map(|_| Complex64::new(rand(), rand())).collect();
        let q = TimeSignal::new(tg, samples).unwrap();
        let l = linear_surrogate_spectrum(&q);
        let back = linear_surrogate_inverse(&l, &tg).unwrap();
        for (a, b) in q.samples.iter().zip(&back.samples) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
