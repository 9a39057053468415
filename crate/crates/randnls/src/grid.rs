//! Periodic spectral grid.
//!
//! The box is `[0, L)^d` sampled at `m` points per axis, `m` a power of two.
//! Fourier modes are `e^{i ξ·x}` with `ξ ∈ (2π/L) ℤ^d`, so the Laplacian has
//! symbol `-|ξ|²` and the free propagator multiplies mode `ξ` by
//! `e^{-it|ξ|²}`. Requiring `L ≥ 2π` keeps the frequency spacing `2π/L` at or
//! below 1, which is what lets unit frequency cubes be resolved by lattice
//! nodes.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    d: usize,
    points_per_axis: usize,
    box_length: f64,
}

impl Grid {
    /// Validates and builds a grid. `points_per_axis` must be a power of two
    /// at least 8; `box_length` at least `2π`.
    pub fn new(d: usize, points_per_axis: usize, box_length: f64) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::BadDimension(d));
        }
        if points_per_axis < 8 || !points_per_axis.is_power_of_two() {
            return Err(Error::BadGridSize(points_per_axis));
        }
        if !(box_length.is_finite() && box_length >= 2.0 * std::f64::consts::PI) {
            return Err(Error::BoxTooSmall(box_length));
        }
        Ok(Grid {
            d,
            points_per_axis,
            box_length,
        })
    }

    /// Companion grid with the same point count on a rescaled box. Used by
    /// dyadic rescaling; skips the `L ≥ 2π` floor so scaled-down companions
    /// stay representable, but keeps everything else validated.
    pub(crate) fn with_box_length(self, box_length: f64) -> Result<Self> {
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::BoxTooSmall(box_length));
        }
        Ok(Grid { box_length, ..self })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn total_points(&self) -> usize {
        self.points_per_axis.pow(self.d as u32)
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(self.d as i32)
    }

    /// Quadrature weight of one physical sample: `(L/m)^d`.
    pub fn quad_weight(&self) -> f64 {
        (self.box_length / self.points_per_axis as f64).powi(self.d as i32)
    }

    /// Physical lattice spacing `L/m`.
    pub fn dx(&self) -> f64 {
        self.box_length / self.points_per_axis as f64
    }

    /// Frequency lattice spacing `2π/L`.
    pub fn freq_spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_length
    }

    /// Largest resolved frequency magnitude per axis, `(m/2)·(2π/L)`.
    pub fn nyquist(&self) -> f64 {
        self.freq_spacing() * (self.points_per_axis / 2) as f64
    }

    /// Signed mode number of an axis index in FFT storage order:
    /// `0..m/2` map to themselves, `m/2..m` map to negative modes.
    #[inline]
    pub fn signed_mode(&self, axis_index: usize) -> i64 {
        let m = self.points_per_axis;
        if axis_index < m / 2 {
            axis_index as i64
        } else {
            axis_index as i64 - m as i64
        }
    }

    /// Storage axis index of a signed mode, or `None` outside
    /// `[-m/2, m/2)`.
    #[inline]
    pub fn axis_index(&self, mode: i64) -> Option<usize> {
        let half = (self.points_per_axis / 2) as i64;
        if mode >= -half && mode < half {
            Some(if mode >= 0 {
                mode as usize
            } else {
                (mode + self.points_per_axis as i64) as usize
            })
        } else {
            None
        }
    }

    /// Flat row-major index of a signed mode vector.
    pub fn flat_of_modes(&self, modes: &[i64]) -> Option<usize> {
        debug_assert_eq!(modes.len(), self.d);
        let mut flat = 0usize;
        for &k in modes {
            flat = flat * self.points_per_axis + self.axis_index(k)?;
        }
        Some(flat)
    }

    /// Signed mode vector of a flat index (row-major, axis 0 slowest).
    pub fn modes_of_flat(&self, flat: usize, out: &mut [i64]) {
        let m = self.points_per_axis;
        let mut rest = flat;
        for axis in (0..self.d).rev() {
            out[axis] = self.signed_mode(rest % m);
            rest /= m;
        }
    }

    /// Frequency vector `ξ = (2π/L)·k` of a signed mode vector.
    pub fn frequency_of_modes(&self, modes: &[i64], out: &mut [f64]) {
        let h = self.freq_spacing();
        for (o, &k) in out.iter_mut().zip(modes) {
            *o = h * k as f64;
        }
    }

    /// `|ξ|²` of a flat frequency index.
    pub fn freq_norm_sq(&self, flat: usize) -> f64 {
        let m = self.points_per_axis;
        let h = self.freq_spacing();
        let mut rest = flat;
        let mut acc = 0.0;
        for _ in 0..self.d {
            let k = self.signed_mode(rest % m) as f64 * h;
            acc += k * k;
            rest /= m;
        }
        acc
    }

    /// Calls `f(flat, signed_modes)` for every grid point in row-major order.
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, &[i64])) {
        let m = self.points_per_axis as i64;
        let half = m / 2;
        let d = self.d;
        let mut idx = [0i64; MAX_DIM];
        let mut modes = [0i64; MAX_DIM];
        let total = self.total_points();
        for flat in 0..total {
            for axis in 0..d {
                modes[axis] = if idx[axis] < half {
                    idx[axis]
                } else {
                    idx[axis] - m
                };
            }
            f(flat, &modes[..d]);
            for axis in (0..d).rev() {
                idx[axis] += 1;
                if idx[axis] < m {
                    break;
                }
                idx[axis] = 0;
            }
        }
    }

    /// Physical coordinates `x = j·L/m` of a flat index.
    pub fn coordinates_of_flat(&self, flat: usize, out: &mut [f64]) {
        let m = self.points_per_axis;
        let dx = self.dx();
        let mut rest = flat;
        for axis in (0..self.d).rev() {
            out[axis] = (rest % m) as f64 * dx;
            rest /= m;
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match direction {
            FftDirection::Forward => p.plan_fft_forward(len),
            FftDirection::Inverse => p.plan_fft_inverse(len),
        }
    })
}

/// Unnormalized multi-dimensional DFT along every axis, in place.
///
/// Forward computes `X_k = Σ_j x_j e^{-2πi j·k/m}`; inverse the conjugate sum
/// without the `1/m^d` factor. Normalization is the caller's contract.
pub(crate) fn dft_all_axes(grid: &Grid, data: &mut [Complex64], direction: FftDirection) {
    debug_assert_eq!(data.len(), grid.total_points());
    let m = grid.points_per_axis();
    let d = grid.d();
    let fft = plan(m, direction);
    let mut scratch = vec![Complex64::ZERO; fft.get_inplace_scratch_len()];

    // Last axis is contiguous: transform chunks in place.
    for chunk in data.chunks_exact_mut(m) {
        fft.process_with_scratch(chunk, &mut scratch);
    }

    // Remaining axes: gather strided lines, transform, scatter back.
    let mut line = vec![Complex64::ZERO; m];
    for axis in (0..d.saturating_sub(1)).rev() {
        let stride = m.pow((d - 1 - axis) as u32);
        let block = stride * m;
        let blocks = grid.total_points() / block;
        for b in 0..blocks {
            let base = b * block;
            for offset in 0..stride {
                for (t, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + offset + t * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (t, &v) in line.iter().enumerate() {
                    data[base + offset + t * stride] = v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_geometry() {
        assert!(Grid::new(0, 64, 4.0 * PI).is_err());
        assert!(Grid::new(5, 64, 4.0 * PI).is_err());
        assert!(Grid::new(2, 48, 4.0 * PI).is_err());
        assert!(Grid::new(2, 4, 4.0 * PI).is_err());
        assert!(Grid::new(2, 64, 6.0).is_err());
        assert!(Grid::new(2, 64, 2.0 * PI).is_ok());
    }

    #[test]
    fn spacing_and_nyquist_examples() {
        let g = Grid::new(1, 64, 16.0 * PI).unwrap();
        assert!((g.freq_spacing() - 0.125).abs() < 1e-15);
        assert!((g.nyquist() - 4.0).abs() < 1e-14);

        let g = Grid::new(3, 32, 8.0 * PI).unwrap();
        assert!((g.freq_spacing() - 0.25).abs() < 1e-15);
        assert_eq!(g.total_points(), 32768);
    }

    #[test]
    fn mode_maps_round_trip() {
        let g = Grid::new(3, 16, 8.0 * PI).unwrap();
        let mut modes = [0i64; MAX_DIM];
        for flat in [0usize, 1, 255, 4095, 2048] {
            g.modes_of_flat(flat, &mut modes[..3]);
            assert_eq!(g.flat_of_modes(&modes[..3]), Some(flat));
        }
        assert_eq!(g.axis_index(8), None);
        assert_eq!(g.axis_index(-8), Some(8));
        assert_eq!(g.signed_mode(8), -8);
    }

    #[test]
    fn for_each_mode_matches_modes_of_flat() {
        let g = Grid::new(2, 8, 2.0 * PI).unwrap();
        let mut seen = 0usize;
        g.for_each_mode(|flat, modes| {
            let mut expect = [0i64; MAX_DIM];
            g.modes_of_flat(flat, &mut expect[..2]);
            assert_eq!(modes, &expect[..2]);
            assert_eq!(flat, seen);
            seen += 1;
        });
        assert_eq!(seen, g.total_points());
    }

    #[test]
    fn dft_inverts() {
        let g = Grid::new(2, 16, 4.0 * PI).unwrap();
        let n = g.total_points();
        let orig: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((j as f64).sin(), (j as f64 * 0.7).cos()))
            .collect();
        let mut data = orig.clone();
        dft_all_axes(&g, &mut data, FftDirection::Forward);
        dft_all_axes(&g, &mut data, FftDirection::Inverse);
        let scale = 1.0 / n as f64;
        for (a, b) in data.iter().zip(&orig) {
            assert!((a * scale - b).norm() < 1e-12);
        }
    }

    #[test]
    fn dft_matches_direct_sum_3d() {
        let g = Grid::new(3, 8, 2.0 * PI).unwrap();
        let n = g.total_points();
        let orig: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((j as f64 * 0.31).sin(), (j as f64 * 0.17).cos()))
            .collect();
        let mut data = orig.clone();
        dft_all_axes(&g, &mut data, FftDirection::Forward);

        // Direct O(n²) check at a few output indices.
        let m = g.points_per_axis();
        for &flat_k in &[0usize, 1, 73, 511, 300] {
            let (k0, k1, k2) = (flat_k / (m * m), (flat_k / m) % m, flat_k % m);
            let mut acc = Complex64::new(0.0, 0.0);
            for (flat_j, &v) in orig.iter().enumerate() {
                let (j0, j1, j2) = (flat_j / (m * m), (flat_j / m) % m, flat_j % m);
                let phase = -2.0 * PI * ((j0 * k0 + j1 * k1 + j2 * k2) as f64) / m as f64;
                acc += v * Complex64::from_polar(1.0, phase);
            }
            assert!((data[flat_k] - acc).norm() < 1e-9 * (1.0 + acc.norm()));
        }
    }
}
