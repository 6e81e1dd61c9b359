//! Zero-mass behaviour of the free evolution, computed off the lattice.
//!
//! The free solution u = G * phi is reconstructed by Fourier inversion with
//! a tapered panel quadrature that excludes a small band around xi = 0 (the
//! singular line of the transverse multiplier). Shrinking the band and
//! doubling the panels provides the refinement estimate; the x-integral
//! M(X) over growing windows exhibits the vanishing generalized x-mass at
//! any t != 0.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::FkpError;
use crate::field::Field;
use crate::norms::norm_l2;
use crate::ops::antideriv_x_deriv_y;
use crate::quad::{pairwise_sum, GaussLegendre};
use crate::symbols::{eval_w, KPSymbol};
use crate::Result;

/// Closed-form datum given by its Fourier transform.
#[derive(Debug, Clone, Copy)]
pub enum Datum {
    /// phi_hat = A exp(-(xi^2+eta^2)/(2 sigma^2)); in physical space a
    /// Gaussian bump with nonzero x-mass.
    Gaussian { amplitude: f64, sigma: f64 },
    /// phi_hat = A * i * xi * exp(-(xi^2+eta^2)/(2 sigma^2)): the x-derivative
    /// of the bump, antisymmetric in x with zero x-mass for every y.
    GaussianXDeriv { amplitude: f64, sigma: f64 },
}

impl Datum {
    pub fn sigma(&self) -> f64 {
        match self {
            Datum::Gaussian { sigma, .. } | Datum::GaussianXDeriv { sigma, .. } => *sigma,
        }
    }

    /// xi-dependent factor of the transform (the eta factor is the shared
    /// Gaussian exp(-eta^2/(2 sigma^2))).
    fn hat_xi_factor(&self, xi: f64) -> Complex64 {
        match self {
            Datum::Gaussian { amplitude, sigma } => {
                Complex64::new(amplitude * (-xi * xi / (2.0 * sigma * sigma)).exp(), 0.0)
            }
            Datum::GaussianXDeriv { amplitude, sigma } => {
                Complex64::new(0.0, amplitude * xi * (-xi * xi / (2.0 * sigma * sigma)).exp())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Taper {
    Cosine,
    Gaussian,
}

/// Panel quadrature layout for the Fourier inversion.
#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    /// Half-width of the excluded band around xi = 0.
    pub xi_min_exclusion: f64,
    pub xi_max: f64,
    pub eta_max: f64,
    /// Panels on the positive xi side (mirrored to the negative side).
    pub n_xi: usize,
    /// Panels across the full eta range.
    pub n_eta: usize,
    pub taper: Taper,
    /// Refinement flag threshold, relative to the value scale of the batch.
    pub refine_tol: f64,
}

impl QuadratureSpec {
    /// Defaults sized to the datum width: exclusion 1e-3, truncation at 30
    /// sigma, 2048 panels per axis, cosine taper over the outer 10%.
    pub fn default_for(sigma: f64) -> Self {
        QuadratureSpec {
            xi_min_exclusion: 1e-3,
            xi_max: 30.0 * sigma,
            eta_max: 30.0 * sigma,
            n_xi: 2048,
            n_eta: 2048,
            taper: Taper::Cosine,
            refine_tol: 5e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi_min_exclusion > 0.0 && self.xi_min_exclusion < self.xi_max) {
            return Err(FkpError::InvalidParameter(
                "exclusion band must be positive and smaller than xi_max".into(),
            ));
        }
        if self.n_xi < 64 || self.n_eta < 64 {
            return Err(FkpError::InvalidParameter(
                "panel counts must be at least 64".into(),
            ));
        }
        if !(self.eta_max > 0.0) {
            return Err(FkpError::InvalidParameter("eta_max must be positive".into()));
        }
        Ok(())
    }

    fn refined(&self) -> QuadratureSpec {
        QuadratureSpec {
            xi_min_exclusion: 0.5 * self.xi_min_exclusion,
            n_xi: 2 * self.n_xi,
            n_eta: 2 * self.n_eta,
            ..self.clone()
        }
    }

    /// Smooth cutoff weight: ramps up across [exclusion, 2*exclusion] and
    /// down across the outer 10% of the truncation interval.
    fn xi_weight(&self, r: f64) -> f64 {
        ramp_up(r, self.xi_min_exclusion, 2.0 * self.xi_min_exclusion, self.taper)
            * ramp_down(r, 0.9 * self.xi_max, self.xi_max, self.taper)
    }
}

fn ramp_up(r: f64, lo: f64, hi: f64, taper: Taper) -> f64 {
    if r <= lo {
        0.0
    } else if r >= hi {
        1.0
    } else {
        let s = (r - lo) / (hi - lo);
        match taper {
            Taper::Cosine => 0.5 * (1.0 - (std::f64::consts::PI * s).cos()),
            Taper::Gaussian => 1.0 - (-4.6 * s * s).exp(),
        }
    }
}

fn ramp_down(r: f64, lo: f64, hi: f64, taper: Taper) -> f64 {
    1.0 - ramp_up(r, lo, hi, taper)
}

/// Time-differentiability criterion: the X-type seminorm ||(eta/xi) u0_hat||
/// over xi != 0 modes, plus a flag set when the (xi = 0, eta != 0) columns
/// carry energy (the criterion fails in the discrete-projection sense).
pub fn dt_criterion(u0: &Field) -> Result<(f64, bool)> {
    let value = norm_l2(&antideriv_x_deriv_y(u0)?)?;
    let spec = u0.to_spectral();
    let c = spec.coefficients().unwrap();
    let total: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    let bad: f64 = (1..u0.grid().ny).map(|k| c[(0, k)].norm_sqr()).sum();
    let flag = total > 0.0 && bad > 1e-12 * total;
    Ok((value, flag))
}

/// Values of the free solution at sample points, with refinement estimates.
#[derive(Debug, Clone)]
pub struct FreeSolution {
    pub values: Vec<Complex64>,
    /// |value(refined) - value(base)| per point.
    pub refinement: Vec<f64>,
    /// Set when some refinement change exceeds refine_tol * value scale.
    pub flagged: bool,
}

/// Evaluate u(x, y, t) = (2pi)^-2 iint e^{it omega} phi_hat e^{i(x xi + y eta)}
/// at the given points by tapered panel quadrature, with the |xi| <
/// exclusion band removed. Returns values at the base spec together with
/// the change under halving the exclusion and doubling the panels.
pub fn free_solution_at(
    datum: &Datum,
    symbol: &KPSymbol,
    pts: &[(f64, f64)],
    t: f64,
    q: &QuadratureSpec,
) -> Result<FreeSolution> {
    q.validate()?;
    let base = eval_points(datum, symbol, pts, t, q);
    let fine = eval_points(datum, symbol, pts, t, &q.refined());
    let refinement: Vec<f64> = base
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).norm())
        .collect();
    let scale = base
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    let flagged = refinement.iter().any(|&d| d > q.refine_tol * scale);
    Ok(FreeSolution {
        values: base,
        refinement,
        flagged,
    })
}

/// Quadrature nodes along xi (positive side; the negative side mirrors).
/// Panel widths grow geometrically away from the exclusion edge (resolving
/// the taper ramp and the sqrt(xi)-scale structure of the eta integral near
/// the singular line) and are capped by the uniform width xi_max/n_xi, so
/// oscillations e^{i x xi} stay resolved uniformly. Doubling n_xi halves
/// both the geometric growth and the cap.
fn xi_nodes(q: &QuadratureSpec) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::new(4);
    let excl = q.xi_min_exclusion;
    let h_uni = (q.xi_max - excl) / q.n_xi as f64;
    let growth = 512.0 / q.n_xi as f64;
    let mut edges = vec![excl];
    let mut e = excl;
    while e < q.xi_max {
        let step = (growth * e).max(0.2 * excl).min(h_uni);
        e = (e + step).min(q.xi_max);
        edges.push(e);
    }
    let mut nodes = Vec::with_capacity(4 * (edges.len() - 1));
    for w in edges.windows(2) {
        nodes.extend(gl.mapped(w[0], w[1]));
    }
    nodes
}

/// Per-column eta window for the integrand
/// exp(-eta^2/(2 sigma^2)) * exp(i (c eta^2 + y eta)) with chirp
/// coefficient c = -/+ t kappa / xi. The window spans the datum peak at
/// eta = 0 and the stationary point -y/(2c), and is shrunk until the n_eta
/// panels resolve the phase at its edges; the true contribution beyond it
/// is O(1/(|c| W)) by non-stationary phase, far below the refinement
/// tolerance. With c = 0 this is the full [-eta_max, eta_max] range.
fn eta_window(q: &QuadratureSpec, chirp: f64, y: f64) -> (f64, f64) {
    let n_nodes = (4 * q.n_eta) as f64;
    let w = if chirp == 0.0 {
        q.eta_max
    } else {
        // solve (2W/N)(2|c|W + |y|) = 1.2 for W
        let a = 4.0 * chirp.abs() / n_nodes;
        let b = 2.0 * y.abs() / n_nodes;
        ((-b + (b * b + 4.8 * a).sqrt()) / (2.0 * a)).min(q.eta_max)
    };
    let center = if chirp == 0.0 { 0.0 } else { -y / (2.0 * chirp) };
    let lo = (center.min(0.0) - w).max(-q.eta_max);
    let hi = (center.max(0.0) + w).min(q.eta_max);
    (lo, hi)
}

/// Nodes, weights (with the edge taper folded in) over the eta window.
fn eta_nodes_for(q: &QuadratureSpec, chirp: f64, y: f64) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::new(4);
    let (lo, hi) = eta_window(q, chirp, y);
    let h = (hi - lo) / q.n_eta as f64;
    let mut nodes = Vec::with_capacity(4 * q.n_eta);
    for k in 0..q.n_eta {
        let a = lo + h * k as f64;
        nodes.extend(gl.mapped(a, a + h));
    }
    // smooth the cutoff over the outer 10% of each side of the window
    let width = hi - lo;
    for node in nodes.iter_mut() {
        let d = ((node.0 - lo).min(hi - node.0) / (0.1 * width)).min(1.0);
        if d < 1.0 {
            node.1 *= ramp_up(d, 0.0, 1.0, q.taper);
        }
    }
    nodes
}

/// Tensor quadrature over the truncated plane. Points are grouped by equal
/// y so the eta sums (which depend on (xi, y) but not on x) are shared.
fn eval_points(
    datum: &Datum,
    symbol: &KPSymbol,
    pts: &[(f64, f64)],
    t: f64,
    q: &QuadratureSpec,
) -> Vec<Complex64> {
    let xis = xi_nodes(q);
    let sigma = datum.sigma();
    let kappa = symbol.kappa.sign();
    let inv_two_pi_sq = 1.0 / (4.0 * std::f64::consts::PI * std::f64::consts::PI);

    // distinct y values in first-seen order
    let mut ys: Vec<f64> = Vec::new();
    let mut group: Vec<usize> = Vec::with_capacity(pts.len());
    for &(_, y) in pts {
        match ys.iter().position(|&v| v == y) {
            Some(i) => group.push(i),
            None => {
                ys.push(y);
                group.push(ys.len() - 1);
            }
        }
    }

    // eta sums S[y_index][xi_index] for +xi and -xi nodes
    let eta_sum = |chirp: f64, y: f64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(eta, w) in &eta_nodes_for(q, chirp, y) {
            let ph = chirp * eta * eta + y * eta;
            let amp = w * (-eta * eta / (2.0 * sigma * sigma)).exp();
            acc += amp * Complex64::new(ph.cos(), ph.sin());
        }
        acc
    };
    let sums: Vec<Vec<(Complex64, Complex64)>> = ys
        .par_iter()
        .map(|&y| {
            xis.iter()
                .map(|&(xi, _)| (eta_sum(-t * kappa / xi, y), eta_sum(t * kappa / xi, y)))
                .collect()
        })
        .collect();

    pts.par_iter()
        .enumerate()
        .map(|(i, &(x, _))| {
            let s = &sums[group[i]];
            let mut parts_re = Vec::with_capacity(xis.len());
            let mut parts_im = Vec::with_capacity(xis.len());
            for (j, &(xi, wj)) in xis.iter().enumerate() {
                let w = wj * q.xi_weight(xi);
                if w == 0.0 {
                    parts_re.push(0.0);
                    parts_im.push(0.0);
                    continue;
                }
                // +xi branch
                let ph = t * eval_w(&symbol.family, xi) + x * xi;
                let osc = Complex64::new(ph.cos(), ph.sin());
                let vp = datum.hat_xi_factor(xi) * osc * s[j].0;
                // -xi branch
                let vm = datum.hat_xi_factor(-xi) * osc.conj() * s[j].1;
                let v = w * (vp + vm);
                parts_re.push(v.re);
                parts_im.push(v.im);
            }
            Complex64::new(pairwise_sum(&parts_re), pairwise_sum(&parts_im)) * inv_two_pi_sq
        })
        .collect()
}

/// One row of the windowed-mass table.
#[derive(Debug, Clone, Copy)]
pub struct MassEntry {
    pub x_max: f64,
    pub mass: f64,
    pub imag_residual: f64,
    /// Refinement change exceeded the tolerance for this window.
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct MassTable {
    pub entries: Vec<MassEntry>,
    pub flagged: bool,
}

impl MassTable {
    /// CSV rows `X,mass_real,mass_imag_residual,flag`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("X,mass_real,mass_imag_residual,flag\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{}\n",
                e.x_max,
                e.mass,
                e.imag_residual,
                if e.flagged { 1 } else { 0 }
            ));
        }
        out
    }
}

/// Windowed x-mass M(X) = int_{-X}^{X} u(x, y, t) dx for each X in the
/// (strictly increasing) list, by composite Gauss-Legendre quadrature of
/// free-solution samples; the x-resolution follows the spectral truncation.
pub fn generalized_x_mass(
    datum: &Datum,
    symbol: &KPSymbol,
    y: f64,
    t: f64,
    x_list: &[f64],
    q: &QuadratureSpec,
) -> Result<MassTable> {
    q.validate()?;
    if x_list.is_empty() || x_list.windows(2).any(|w| w[1] <= w[0]) || x_list[0] <= 0.0 {
        return Err(FkpError::InvalidParameter(
            "X list must be strictly increasing and positive".into(),
        ));
    }
    let base = mass_curve(datum, symbol, y, t, x_list, q)?;
    let fine = mass_curve(datum, symbol, y, t, x_list, &q.refined())?;
    let scale = base
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    let mut entries = Vec::with_capacity(x_list.len());
    let mut any = false;
    for i in 0..x_list.len() {
        let d = (base[i] - fine[i]).norm();
        let flagged = d > q.refine_tol * scale;
        any |= flagged;
        entries.push(MassEntry {
            x_max: x_list[i],
            mass: base[i].re,
            imag_residual: base[i].im.abs(),
            flagged,
        });
    }
    Ok(MassTable {
        entries,
        flagged: any,
    })
}

fn mass_curve(
    datum: &Datum,
    symbol: &KPSymbol,
    y: f64,
    t: f64,
    x_list: &[f64],
    q: &QuadratureSpec,
) -> Result<Vec<Complex64>> {
    // x-sample density: several panels per shortest wavelength that the
    // datum actually carries (the transform is negligible beyond 8 sigma)
    let gl = GaussLegendre::new(8);
    let xi_eff = q.xi_max.min(8.0 * datum.sigma());
    let h_max = (2.0 * std::f64::consts::PI / xi_eff / 6.0).min(0.25);
    // window increments 0 = X_0 < X_1 < ...
    let mut segments = Vec::new();
    let mut prev = 0.0;
    for &x in x_list {
        segments.push((prev, x));
        prev = x;
    }
    // collect all x sample points (positive side and mirrored negatives)
    let mut xs: Vec<f64> = Vec::new();
    let mut seg_nodes: Vec<Vec<(usize, f64)>> = Vec::with_capacity(segments.len());
    for &(a, b) in &segments {
        let n_panels = (((b - a) / h_max).ceil() as usize).max(2);
        let h = (b - a) / n_panels as f64;
        let mut nodes = Vec::with_capacity(2 * 8 * n_panels);
        for p in 0..n_panels {
            let lo = a + h * p as f64;
            for &(x, w) in &gl.mapped(lo, lo + h) {
                nodes.push((xs.len(), w));
                xs.push(x);
                nodes.push((xs.len(), w));
                xs.push(-x);
            }
        }
        seg_nodes.push(nodes);
    }
    let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, y)).collect();
    let values = eval_points(datum, symbol, &pts, t, q);

    let mut out = Vec::with_capacity(x_list.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for nodes in &seg_nodes {
        let contrib_re: Vec<f64> = nodes.iter().map(|&(i, w)| w * values[i].re).collect();
        let contrib_im: Vec<f64> = nodes.iter().map(|&(i, w)| w * values[i].im).collect();
        acc += Complex64::new(pairwise_sum(&contrib_re), pairwise_sum(&contrib_im));
        out.push(acc);
    }
    Ok(out)
}
