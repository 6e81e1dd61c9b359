//! Periodic rectangular computational domain and its wavenumber lattice.

use crate::error::FkpError;
use crate::Result;

/// A periodic box [0, lx) x [0, ly) sampled on an nx x ny lattice.
///
/// Wavenumbers are stored in FFT bin order: `xi[j]` is the x-wavenumber of
/// spectral bin `j`, i.e. `2*pi*m/lx` with `m = j` for `j < nx/2` and
/// `m = j - nx` otherwise. As a set the lattice is exactly
/// `{2*pi*m/lx : m = -nx/2, ..., nx/2 - 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    xi: Vec<f64>,
    eta: Vec<f64>,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 8 || ny < 8 {
            return Err(FkpError::InvalidGrid(format!(
                "grid must be at least 8x8, got {nx}x{ny}"
            )));
        }
        if nx % 2 != 0 || ny % 2 != 0 {
            return Err(FkpError::InvalidGrid(format!(
                "grid sizes must be even, got {nx}x{ny}"
            )));
        }
        if !(lx > 0.0) || !(ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
            return Err(FkpError::InvalidGrid(format!(
                "box lengths must be positive finite, got lx={lx}, ly={ly}"
            )));
        }
        Ok(Grid2D {
            nx,
            ny,
            lx,
            ly,
            xi: wavenumbers(nx, lx),
            eta: wavenumbers(ny, ly),
        })
    }

    /// x-wavenumbers in FFT bin order.
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// y-wavenumbers in FFT bin order.
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// Signed integer mode index of spectral bin `j` along an axis of size `n`.
    pub fn mode_index(j: usize, n: usize) -> i64 {
        if j < n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    /// Physical x-coordinates of the lattice.
    pub fn x_coords(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.lx * i as f64 / self.nx as f64).collect()
    }

    /// Physical y-coordinates of the lattice.
    pub fn y_coords(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.ly * j as f64 / self.ny as f64).collect()
    }

    /// Quadrature weight of one lattice cell.
    pub fn cell_area(&self) -> f64 {
        self.lx * self.ly / (self.nx as f64 * self.ny as f64)
    }

    /// Largest retained |xi| (at the Nyquist bin).
    pub fn xi_max(&self) -> f64 {
        std::f64::consts::PI * self.nx as f64 / self.lx
    }
}

fn wavenumbers(n: usize, l: f64) -> Vec<f64> {
    let scale = 2.0 * std::f64::consts::PI / l;
    (0..n)
        .map(|j| scale * Grid2D::mode_index(j, n) as f64)
        .collect()
}

/// Build a grid; rejects odd or tiny sizes and non-positive lengths.
pub fn make_grid(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Grid2D> {
    Grid2D::new(nx, ny, lx, ly)
}
