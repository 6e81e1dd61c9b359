//! Real-space / spectral-space scalar fields on a periodic grid.

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::FkpError;
use crate::grid::Grid2D;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceTag {
    Real,
    Spectral,
}

impl SpaceTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceTag::Real => "real",
            SpaceTag::Spectral => "spectral",
        }
    }
}

/// A scalar state u(x, y) stored either as real lattice values of shape
/// (nx, ny) or as unnormalized DFT coefficients in FFT bin order.
///
/// The forward transform is the plain DFT; the inverse carries the
/// 1/(nx*ny) factor. Coefficients of real data are Hermitian-symmetric and
/// every operator in this crate preserves that property, so the inverse
/// transform is real to round-off.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Grid2D,
    data: FieldData,
}

#[derive(Debug, Clone)]
enum FieldData {
    Real(Array2<f64>),
    Spectral(Array2<Complex64>),
}

impl Field {
    pub fn from_values(grid: Grid2D, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (grid.nx, grid.ny) {
            return Err(FkpError::GridMismatch(format!(
                "values shape {:?} does not match grid {}x{}",
                values.dim(),
                grid.nx,
                grid.ny
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FkpError::InvalidParameter(
                "real-space values must be finite".into(),
            ));
        }
        Ok(Field {
            grid,
            data: FieldData::Real(values),
        })
    }

    pub fn from_coefficients(grid: Grid2D, coeffs: Array2<Complex64>) -> Result<Self> {
        if coeffs.dim() != (grid.nx, grid.ny) {
            return Err(FkpError::GridMismatch(format!(
                "coefficient shape {:?} does not match grid {}x{}",
                coeffs.dim(),
                grid.nx,
                grid.ny
            )));
        }
        Ok(Field {
            grid,
            data: FieldData::Spectral(coeffs),
        })
    }

    /// Sample a closure on the lattice.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let xs = grid.x_coords();
        let ys = grid.y_coords();
        let values = Array2::from_shape_fn((grid.nx, grid.ny), |(i, j)| f(xs[i], ys[j]));
        Field {
            grid,
            data: FieldData::Real(values),
        }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        let values = Array2::zeros((grid.nx, grid.ny));
        Field {
            grid,
            data: FieldData::Real(values),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn space(&self) -> SpaceTag {
        match self.data {
            FieldData::Real(_) => SpaceTag::Real,
            FieldData::Spectral(_) => SpaceTag::Spectral,
        }
    }

    pub fn values(&self) -> Option<&Array2<f64>> {
        match &self.data {
            FieldData::Real(v) => Some(v),
            FieldData::Spectral(_) => None,
        }
    }

    pub fn coefficients(&self) -> Option<&Array2<Complex64>> {
        match &self.data {
            FieldData::Spectral(c) => Some(c),
            FieldData::Real(_) => None,
        }
    }

    /// Forward transform (no-op if already spectral).
    pub fn to_spectral(&self) -> Field {
        match &self.data {
            FieldData::Spectral(_) => self.clone(),
            FieldData::Real(v) => {
                let mut buf: Vec<Complex64> =
                    v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                let mut fft = Fft2::new(self.grid.nx, self.grid.ny);
                fft.forward(&mut buf);
                let coeffs =
                    Array2::from_shape_vec((self.grid.nx, self.grid.ny), buf).unwrap();
                Field {
                    grid: self.grid.clone(),
                    data: FieldData::Spectral(coeffs),
                }
            }
        }
    }

    /// Inverse transform (no-op if already real). Fails if the imaginary
    /// residual exceeds round-off scale, which indicates non-Hermitian
    /// coefficients.
    pub fn to_real(&self) -> Result<Field> {
        match &self.data {
            FieldData::Real(_) => Ok(self.clone()),
            FieldData::Spectral(c) => {
                let mut buf: Vec<Complex64> = c.iter().copied().collect();
                let mut fft = Fft2::new(self.grid.nx, self.grid.ny);
                fft.inverse(&mut buf);
                let scale = buf.iter().map(|z| z.re.abs()).fold(0.0_f64, f64::max);
                let imag = buf.iter().map(|z| z.im.abs()).fold(0.0_f64, f64::max);
                if imag > 1e-8 * scale.max(1e-300) && imag > 1e-12 {
                    return Err(FkpError::ConstraintViolation(format!(
                        "inverse transform not real: max|Im| = {imag:.3e}, max|Re| = {scale:.3e}"
                    )));
                }
                let values = Array2::from_shape_vec(
                    (self.grid.nx, self.grid.ny),
                    buf.iter().map(|z| z.re).collect(),
                )
                .unwrap();
                Field {
                    grid: self.grid.clone(),
                    data: FieldData::Real(values),
                }
                .validated()
            }
        }
    }

    fn validated(self) -> Result<Field> {
        if let FieldData::Real(v) = &self.data {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(FkpError::InvalidParameter(
                    "real-space values must be finite".into(),
                ));
            }
        }
        Ok(self)
    }

    /// Apply a spectral multiplier given the signed mode indices and the
    /// wavenumbers of each bin. Returns a spectral field.
    pub fn map_spectral(
        &self,
        f: impl Fn(i64, i64, f64, f64, Complex64) -> Complex64,
    ) -> Field {
        let spec = self.to_spectral();
        let grid = spec.grid.clone();
        let xi = grid.xi().to_vec();
        let eta = grid.eta().to_vec();
        let coeffs = spec.coefficients().unwrap();
        let out = Array2::from_shape_fn((grid.nx, grid.ny), |(j, k)| {
            let jm = Grid2D::mode_index(j, grid.nx);
            let km = Grid2D::mode_index(k, grid.ny);
            f(jm, km, xi[j], eta[k], coeffs[(j, k)])
        });
        Field {
            grid,
            data: FieldData::Spectral(out),
        }
    }

    /// Return the output in the same space as `like`.
    pub fn into_space_of(self, like: &Field) -> Result<Field> {
        match like.space() {
            SpaceTag::Real => self.to_real(),
            SpaceTag::Spectral => Ok(self.to_spectral()),
        }
    }

    /// Max departure from Hermitian symmetry, relative to the largest
    /// coefficient magnitude.
    pub fn hermitian_defect(&self) -> f64 {
        let spec = self.to_spectral();
        let c = spec.coefficients().unwrap();
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let scale = c.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for j in 0..nx {
            for k in 0..ny {
                let jn = (nx - j) % nx;
                let kn = (ny - k) % ny;
                let d = (c[(j, k)] - c[(jn, kn)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst / scale
    }
}

/// Two-dimensional complex FFT over a flat row-major (nx, ny) buffer.
pub struct Fft2 {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    transpose_buf: Vec<Complex64>,
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            nx,
            ny,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
            transpose_buf: vec![Complex64::new(0.0, 0.0); nx * ny],
        }
    }

    /// Unnormalized forward DFT in place.
    pub fn forward(&mut self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.nx * self.ny);
        // y-direction: rows are contiguous.
        self.fwd_y.process(buf);
        transpose(buf, &mut self.transpose_buf, self.nx, self.ny);
        self.fwd_x.process(&mut self.transpose_buf);
        transpose(&self.transpose_buf, buf, self.ny, self.nx);
    }

    /// Inverse DFT in place, normalized by 1/(nx*ny).
    pub fn inverse(&mut self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.nx * self.ny);
        self.inv_y.process(buf);
        transpose(buf, &mut self.transpose_buf, self.nx, self.ny);
        self.inv_x.process(&mut self.transpose_buf);
        transpose(&self.transpose_buf, buf, self.ny, self.nx);
        let norm = 1.0 / (self.nx as f64 * self.ny as f64);
        for v in buf.iter_mut() {
            *v *= norm;
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}
