//! Row-wise discrete Fourier transforms in the angle.

use num_complex::Complex64;

use crate::grid::PolarGrid;

/// Forward transform of every radial row; output uses the same `(j, m)` layout.
pub fn to_modes(grid: &PolarGrid, values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.fft_forward().process(&mut buf);
    buf
}

/// Inverse of [`to_modes`], keeping the real part.
pub fn from_modes(grid: &PolarGrid, mut modes: Vec<Complex64>) -> Vec<f64> {
    grid.fft_inverse().process(&mut modes);
    let scale = 1.0 / grid.n_theta() as f64;
    modes.into_iter().map(|c| c.re * scale).collect()
}

/// Transform of a single per-angle array.
pub fn row_to_modes(grid: &PolarGrid, row: &[f64]) -> Vec<Complex64> {
    debug_assert_eq!(row.len(), grid.n_theta());
    to_modes(grid, row)
}

pub fn row_from_modes(grid: &PolarGrid, modes: Vec<Complex64>) -> Vec<f64> {
    from_modes(grid, modes)
}

/// Applies `factor(wavenumber)` to every Fourier coefficient of every row.
pub fn apply_multiplier(grid: &PolarGrid, values: &[f64], factor: impl Fn(i64) -> Complex64) -> Vec<f64> {
    let n_t = grid.n_theta();
    let table: Vec<Complex64> = (0..n_t).map(|m| factor(grid.wavenumber(m))).collect();
    let mut modes = to_modes(grid, values);
    for chunk in modes.chunks_mut(n_t) {
        for (c, f) in chunk.iter_mut().zip(&table) {
            *c *= f;
        }
    }
    from_modes(grid, modes)
}

/// Spectral `d/dtheta` of node values (or of one per-angle row). The Nyquist
/// coefficient is dropped, as it has no real derivative.
pub fn theta_derivative(grid: &PolarGrid, values: &[f64]) -> Vec<f64> {
    let nyquist = grid.n_theta() as i64 / 2;
    apply_multiplier(grid, values, |k| {
        if k == nyquist {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k as f64)
        }
    })
}

/// Spectral `d^2/dtheta^2`.
pub fn theta_second_derivative(grid: &PolarGrid, values: &[f64]) -> Vec<f64> {
    apply_multiplier(grid, values, |k| Complex64::new(-((k * k) as f64), 0.0))
}

/// Two-thirds rule: zero every mode with `|k| > n_theta / 3`.
pub fn dealias(grid: &PolarGrid, values: &[f64]) -> Vec<f64> {
    let cutoff = grid.n_theta() as i64 / 3;
    apply_multiplier(grid, values, |k| {
        if k.abs() > cutoff {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    })
}

/// Two-thirds rule combined with a pole filter: ring `j` keeps only
/// `|k| <= ceil(2 pi (j + 1/2))`, so the angular resolution never exceeds
/// the radial one near the axis.
pub fn dealias_polar(grid: &PolarGrid, values: &[f64]) -> Vec<f64> {
    let n_t = grid.n_theta();
    let cutoff = n_t as i64 / 3;
    let mut modes = to_modes(grid, values);
    for (j, chunk) in modes.chunks_mut(n_t).enumerate() {
        let ring = cutoff.min((std::f64::consts::TAU * (j as f64 + 0.5)).ceil() as i64);
        for (m, c) in chunk.iter_mut().enumerate() {
            if grid.wavenumber(m).abs() > ring {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }
    from_modes(grid, modes)
}
