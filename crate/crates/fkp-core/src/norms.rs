//! Discrete norms: L2, L-infinity, W_x^{1,inf}, anisotropic X^s and H^{s1,s2}.
//!
//! L2 uses the uniform quadrature weight lx*ly/(nx*ny); by Parseval the same
//! norm evaluates on coefficients as lx*ly/(nx*ny)^2 * sum |c|^2.

use crate::field::{Field, SpaceTag};
use crate::ops::{antideriv_x_deriv_y, bessel_x, deriv_x};
use crate::quad::pairwise_sum;
use crate::Result;

/// Discrete L2 norm. Works in either space via Parseval.
pub fn norm_l2(u: &Field) -> Result<f64> {
    let grid = u.grid();
    match u.space() {
        SpaceTag::Real => {
            let v = u.values().unwrap();
            let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
            Ok((grid.cell_area() * pairwise_sum(&sq)).sqrt())
        }
        SpaceTag::Spectral => {
            let c = u.coefficients().unwrap();
            let sq: Vec<f64> = c.iter().map(|z| z.norm_sqr()).collect();
            let n2 = (grid.nx * grid.ny) as f64;
            Ok((grid.lx * grid.ly / (n2 * n2) * pairwise_sum(&sq)).sqrt())
        }
    }
}

/// Grid maximum of |u|.
pub fn norm_linf(u: &Field) -> Result<f64> {
    let r = u.to_real()?;
    Ok(r.values()
        .unwrap()
        .iter()
        .map(|x| x.abs())
        .fold(0.0_f64, f64::max))
}

/// ||u||_Linf + ||d_x u||_Linf.
pub fn norm_w1inf_x(u: &Field) -> Result<f64> {
    Ok(norm_linf(u)? + norm_linf(&deriv_x(u)?)?)
}

/// Anisotropic norm (||J_x^s u||^2 + ||dx^{-1} dy u||^2)^(1/2).
pub fn norm_xs(u: &Field, s: f64) -> Result<f64> {
    let a = norm_l2(&bessel_x(u, s)?)?;
    let b = norm_l2(&antideriv_x_deriv_y(u)?)?;
    Ok((a * a + b * b).sqrt())
}

/// Anisotropic Sobolev norm with weight (1+xi^2)^(s1/2) (1+eta^2)^(s2/2).
pub fn norm_hs1s2(u: &Field, s1: f64, s2: f64) -> Result<f64> {
    let w = u.map_spectral(|_, _, xi, eta, c| {
        c * (1.0 + xi * xi).powf(0.5 * s1) * (1.0 + eta * eta).powf(0.5 * s2)
    });
    norm_l2(&w)
}
