//! Fractional and anisotropic Fourier-multiplier operators.
//!
//! Conventions shared by every operator here:
//! - Any multiplier that is singular or sign-ambiguous at xi = 0
//!   (`1/xi`, `eta/xi`, `|xi|^s` with s < 0) acts as zero on the xi = 0
//!   column; callers can retrieve the discarded energy.
//! - The Nyquist bin is kept for even multipliers and zeroed wherever the
//!   multiplier is odd in that variable, which keeps outputs real.

use rustfft::num_complex::Complex64;

use crate::error::FkpError;
use crate::field::Field;
use crate::Result;

/// Fractional x-derivative: coefficients scaled by |xi|^s.
///
/// For s < 0 the xi = 0 column must already be (numerically) empty; its
/// content above round-off of the total energy is a constraint violation.
pub fn frac_deriv_x(u: &Field, s: f64) -> Result<Field> {
    if s == 0.0 {
        return Ok(u.clone());
    }
    if s < 0.0 {
        check_zero_xi_column(u)?;
    }
    let out = u.map_spectral(|jm, _, xi, _, c| {
        if jm == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            c * xi.abs().powf(s)
        }
    });
    out.into_space_of(u)
}

/// Fractional y-derivative: coefficients scaled by |eta|^s.
pub fn frac_deriv_y(u: &Field, s: f64) -> Result<Field> {
    if s < 0.0 {
        let spec = u.to_spectral();
        let c = spec.coefficients().unwrap();
        let total: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        let row: f64 = (0..u.grid().nx).map(|j| c[(j, 0)].norm_sqr()).sum();
        if row > 1e-12 * total && total > 0.0 {
            return Err(FkpError::ConstraintViolation(format!(
                "negative-order y-derivative with eta = 0 energy fraction {:.3e}",
                row / total
            )));
        }
    }
    let out = u.map_spectral(|_, km, _, eta, c| {
        if km == 0 && s != 0.0 {
            Complex64::new(0.0, 0.0)
        } else if s == 0.0 {
            c
        } else {
            c * eta.abs().powf(s)
        }
    });
    out.into_space_of(u)
}

/// First x-derivative (multiplier i*xi, Nyquist zeroed).
pub fn deriv_x(u: &Field) -> Result<Field> {
    let nx = u.grid().nx;
    let out = u.map_spectral(|jm, _, xi, _, c| {
        if jm == -(nx as i64) / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            c * Complex64::new(0.0, xi)
        }
    });
    out.into_space_of(u)
}

/// The anti-derivative/transverse-derivative composition with multiplier
/// eta/xi; xi = 0 columns are projected out. Returns the result together
/// with the discarded energy fraction of those columns.
pub fn antideriv_x_deriv_y_reported(u: &Field) -> Result<(Field, f64)> {
    let spec = u.to_spectral();
    let c = spec.coefficients().unwrap();
    let grid = u.grid();
    let total: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    // Energy the projection drops: the would-be output on the xi = 0 column,
    // i.e. (eta * g_hat) with the 1/xi convention zeroing it.
    let mut discarded = 0.0;
    for k in 0..grid.ny {
        let eta = grid.eta()[k];
        discarded += (c[(0, k)] * eta).norm_sqr();
    }
    let nx2 = grid.nx as i64 / 2;
    let ny2 = grid.ny as i64 / 2;
    let out = spec.map_spectral(|jm, km, xi, eta, cc| {
        if jm == 0 || jm == -nx2 || km == -ny2 {
            Complex64::new(0.0, 0.0)
        } else {
            cc * (eta / xi)
        }
    });
    let frac = if total > 0.0 { discarded / total } else { 0.0 };
    Ok((out.into_space_of(u)?, frac))
}

pub fn antideriv_x_deriv_y(u: &Field) -> Result<Field> {
    antideriv_x_deriv_y_reported(u).map(|(f, _)| f)
}

/// Bessel potential in x: multiplier (1 + xi^2)^(s/2).
pub fn bessel_x(u: &Field, s: f64) -> Result<Field> {
    let out = u.map_spectral(|_, _, xi, _, c| c * (1.0 + xi * xi).powf(0.5 * s));
    out.into_space_of(u)
}

/// Two-thirds dealiasing: zero every coefficient with |j| > nx/3 or
/// |k| > ny/3 (integer mode indices).
pub fn dealias_23(u: &Field) -> Field {
    let nx = u.grid().nx as i64;
    let ny = u.grid().ny as i64;
    u.map_spectral(|jm, km, _, _, c| {
        if 3 * jm.abs() > nx || 3 * km.abs() > ny {
            Complex64::new(0.0, 0.0)
        } else {
            c
        }
    })
}

/// Zero the (xi = 0, eta != 0) columns; returns the projected field and the
/// removed energy fraction. This is the transverse zero-mean projection that
/// keeps the discrete system where 1/xi is meaningful.
pub fn project_zero_mass_reported(u: &Field) -> (Field, f64) {
    let spec = u.to_spectral();
    let c = spec.coefficients().unwrap();
    let total: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    let mut removed = 0.0;
    for k in 1..u.grid().ny {
        removed += c[(0, k)].norm_sqr();
    }
    let out = spec.map_spectral(|jm, km, _, _, cc| {
        if jm == 0 && km != 0 {
            Complex64::new(0.0, 0.0)
        } else {
            cc
        }
    });
    let frac = if total > 0.0 { removed / total } else { 0.0 };
    (out, frac)
}

pub fn project_zero_mass(u: &Field) -> Field {
    project_zero_mass_reported(u).0
}

fn check_zero_xi_column(u: &Field) -> Result<()> {
    let spec = u.to_spectral();
    let c = spec.coefficients().unwrap();
    let total: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    let col: f64 = (0..u.grid().ny).map(|k| c[(0, k)].norm_sqr()).sum();
    if col > 1e-12 * total && total > 0.0 {
        return Err(FkpError::ConstraintViolation(format!(
            "negative-order x-derivative with xi = 0 energy fraction {:.3e}",
            col / total
        )));
    }
    Ok(())
}
