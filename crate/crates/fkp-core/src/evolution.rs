//! Time evolution: exact linear group, dealiased integrating-factor RK4 for
//! the quadratic nonlinearity, run diagnostics, and the scaling harness.
//!
//! The state advances in spectral space. The linear factor exp(i*omega*dt)
//! is applied exactly; classical RK4 integrates only the transformed
//! nonlinearity N(v) = -1/2 * d/dx dealias(v^2). The transverse zero-mean
//! projection is applied at ingestion and kept invariant by the scheme, so
//! the (0,0) mode (the mass) is conserved to the bit.

use ndarray::Array2;
use rustfft::num_complex::Complex64;

use crate::error::FkpError;
use crate::field::{Fft2, Field};
use crate::grid::Grid2D;
use crate::norms::{norm_l2, norm_w1inf_x, norm_xs};
use crate::ops::{antideriv_x_deriv_y, frac_deriv_x, project_zero_mass_reported};
use crate::quad::pairwise_sum;
use crate::symbols::{eval_omega, KPSymbol};
use crate::Result;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub symbol: KPSymbol,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_every: usize,
    pub dealias: bool,
    pub diagnostics_every: usize,
    /// Sobolev order of the X^s monitor.
    pub xs_order: f64,
    /// Disable the nonlinearity (free evolution through the stepper).
    pub linear_only: bool,
}

impl SolverConfig {
    pub fn new(symbol: KPSymbol, dt: f64, t_end: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(FkpError::InvalidParameter(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if !(t_end >= dt) {
            return Err(FkpError::InvalidParameter(format!(
                "t_end must be at least dt, got t_end={t_end}, dt={dt}"
            )));
        }
        Ok(SolverConfig {
            symbol,
            dt,
            t_end,
            snapshot_every: usize::MAX,
            dealias: true,
            diagnostics_every: 1,
            xs_order: 2.0,
            linear_only: false,
        })
    }
}

/// Diagnostics sampled along a run. `hamiltonian` is NaN for families where
/// it is not defined (non-pure-power dispersion).
#[derive(Debug, Clone, Default)]
pub struct DiagnosticsSeries {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub l2: Vec<f64>,
    pub hamiltonian: Vec<f64>,
    pub xs_norm: Vec<f64>,
    pub w1inf: Vec<f64>,
}

impl DiagnosticsSeries {
    fn push(&mut self, t: f64, u: &Field, cfg: &SolverConfig) -> Result<()> {
        self.times.push(t);
        self.mass.push(mass(u));
        self.l2.push(norm_l2(u)?);
        self.hamiltonian
            .push(hamiltonian(u, &cfg.symbol).unwrap_or(f64::NAN));
        self.xs_norm.push(norm_xs(u, cfg.xs_order)?);
        self.w1inf.push(norm_w1inf_x(u)?);
        Ok(())
    }

    /// CSV rows `t,mass,l2,hamiltonian,xs,w1inf` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mass,l2,hamiltonian,xs,w1inf\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.times[i],
                self.mass[i],
                self.l2[i],
                self.hamiltonian[i],
                self.xs_norm[i],
                self.w1inf[i]
            ));
        }
        out
    }
}

/// Integral of u over the box: the (0,0) coefficient times the cell area.
pub fn mass(u: &Field) -> f64 {
    let spec = u.to_spectral();
    let c = spec.coefficients().unwrap();
    c[(0, 0)].re * u.grid().cell_area()
}

/// Free evolution: multiply coefficients by exp(i*t*omega). The symbol is
/// zero on the xi = 0 column (convention) and on the x-Nyquist row (sign
/// ambiguous), so the multiplier is exactly unitary and keeps data real.
/// The (xi = 0, eta != 0) columns are projected out first.
pub fn linear_propagate(u0: &Field, s: &KPSymbol, t: f64) -> Result<Field> {
    let (proj, _) = project_zero_mass_reported(u0);
    let nx2 = u0.grid().nx as i64 / 2;
    let out = proj.map_spectral(|jm, _, xi, eta, c| {
        if jm == 0 || jm == -nx2 {
            c
        } else {
            let phase = t * eval_omega(s, xi, eta);
            c * Complex64::new(phase.cos(), phase.sin())
        }
    });
    out.into_space_of(u0)
}

/// Hamiltonian 1/2 ||D_x^{a/2} u||^2 - kappa/2 ||dx^{-1} dy u||^2
/// - 1/6 \int u^3; defined for the pure-power family only.
pub fn hamiltonian(u: &Field, s: &KPSymbol) -> Option<f64> {
    let alpha = match &s.family {
        crate::symbols::SymbolFamily::PurePower { alpha } => *alpha,
        _ => return None,
    };
    let half_disp = frac_deriv_x(u, 0.5 * alpha).ok()?;
    let a = norm_l2(&half_disp).ok()?;
    let b = norm_l2(&antideriv_x_deriv_y(u).ok()?).ok()?;
    let ur = u.to_real().ok()?;
    let cubes: Vec<f64> = ur.values().unwrap().iter().map(|v| v * v * v).collect();
    let cubic = pairwise_sum(&cubes) * u.grid().cell_area();
    Some(0.5 * a * a - s.kappa.sign() * 0.5 * b * b - cubic / 6.0)
}

/// Spectral-space integrating-factor RK4 stepper with precomputed tables.
pub struct Stepper {
    grid: Grid2D,
    fft: Fft2,
    /// exp(i*omega*dt/2) and its square
    e_half: Vec<Complex64>,
    e_full: Vec<Complex64>,
    /// -i*xi/2 with dealias mask and Nyquist zeroing folded in
    dx_half: Vec<Complex64>,
    dt: f64,
    linear_only: bool,
    /// largest |xi| among modes kept by the dealias mask
    xi_cut: f64,
    /// largest |omega| over the retained lattice (advisory dt bound)
    pub omega_max: f64,
}

impl Stepper {
    pub fn new(grid: &Grid2D, cfg: &SolverConfig) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let mut e_half = vec![Complex64::new(1.0, 0.0); nx * ny];
        let mut e_full = vec![Complex64::new(1.0, 0.0); nx * ny];
        let mut dx_half = vec![Complex64::new(0.0, 0.0); nx * ny];
        let nxi = nx as i64;
        let nyi = ny as i64;
        let mut omega_max = 0.0_f64;
        for j in 0..nx {
            let jm = Grid2D::mode_index(j, nx);
            let xi = grid.xi()[j];
            for k in 0..ny {
                let km = Grid2D::mode_index(k, ny);
                let eta = grid.eta()[k];
                let idx = j * ny + k;
                let omega = if jm == 0 || jm == -nxi / 2 {
                    0.0
                } else {
                    eval_omega(&cfg.symbol, xi, eta)
                };
                omega_max = omega_max.max(omega.abs());
                let ph = 0.5 * cfg.dt * omega;
                e_half[idx] = Complex64::new(ph.cos(), ph.sin());
                e_full[idx] = e_half[idx] * e_half[idx];
                let keep = if cfg.dealias {
                    3 * jm.abs() <= nxi && 3 * km.abs() <= nyi
                } else {
                    jm != -nxi / 2 && km != -nyi / 2
                };
                if keep && !cfg.linear_only {
                    dx_half[idx] = Complex64::new(0.0, -0.5 * xi);
                }
            }
        }
        let xi_cut = if cfg.dealias {
            2.0 * std::f64::consts::PI / grid.lx * (nx as f64 / 3.0).floor()
        } else {
            grid.xi_max()
        };
        Stepper {
            grid: grid.clone(),
            fft: Fft2::new(nx, ny),
            e_half,
            e_full,
            dx_half,
            dt: cfg.dt,
            linear_only: cfg.linear_only,
            xi_cut,
            omega_max,
        }
    }

    /// Replace `buf` by N(buf) = -1/2 d/dx dealias(buf^2) in spectral space;
    /// returns max|u| in real space for the CFL guard.
    fn nonlinearity_inplace(&mut self, buf: &mut Vec<Complex64>) -> f64 {
        if self.linear_only {
            buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            return 0.0;
        }
        self.fft.inverse(buf);
        let mut umax = 0.0_f64;
        for z in buf.iter_mut() {
            let u = z.re;
            umax = umax.max(u.abs());
            *z = Complex64::new(u * u, 0.0);
        }
        self.fft.forward(buf);
        for (z, d) in buf.iter_mut().zip(&self.dx_half) {
            *z *= d;
        }
        umax
    }

    /// One integrating-factor RK4 step; `t` is only used for error reports.
    pub fn step(&mut self, v: &mut [Complex64], t: f64) -> Result<()> {
        let dt = self.dt;

        // stage 1: a = N(v)
        let mut a: Vec<Complex64> = v.to_vec();
        let umax = self.nonlinearity_inplace(&mut a);
        if !self.linear_only {
            let cfl = umax * self.xi_cut * dt.abs();
            if cfl > 1.0 {
                return Err(FkpError::CflViolation { t, product: cfl });
            }
        }

        // stage 2: b = N(E*(v + dt/2 a))
        let mut b: Vec<Complex64> = v
            .iter()
            .zip(&a)
            .zip(&self.e_half)
            .map(|((&vv, &aa), &e)| e * (vv + 0.5 * dt * aa))
            .collect();
        self.nonlinearity_inplace(&mut b);

        // stage 3: c = N(E*v + dt/2 b)
        let mut c: Vec<Complex64> = v
            .iter()
            .zip(&b)
            .zip(&self.e_half)
            .map(|((&vv, &bb), &e)| e * vv + 0.5 * dt * bb)
            .collect();
        self.nonlinearity_inplace(&mut c);

        // stage 4: d = N(E2*v + dt*E*c)
        let mut d: Vec<Complex64> = v
            .iter()
            .zip(&c)
            .zip(self.e_half.iter().zip(&self.e_full))
            .map(|((&vv, &cc), (&e, &e2))| e2 * vv + dt * e * cc)
            .collect();
        self.nonlinearity_inplace(&mut d);

        // combine: v <- E2 v + dt/6 (E2 a + 2 E (b + c) + d)
        let sixth = dt / 6.0;
        for i in 0..v.len() {
            v[i] = self.e_full[i] * v[i]
                + sixth
                    * (self.e_full[i] * a[i] + 2.0 * self.e_half[i] * (b[i] + c[i]) + d[i]);
        }

        // keep the invariant subspace exact
        for k in 1..self.grid.ny {
            v[k] = Complex64::new(0.0, 0.0);
        }

        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(FkpError::BlowUp {
                t: t + dt,
                detail: "non-finite spectral coefficients".into(),
            });
        }
        Ok(())
    }
}

/// Advance one step from a Field (convenience wrapper over `Stepper`).
/// Output is spectral.
pub fn step_ifrk4(u: &Field, cfg: &SolverConfig) -> Result<Field> {
    let mut stepper = Stepper::new(u.grid(), cfg);
    let (proj, _) = project_zero_mass_reported(u);
    let mut v: Vec<Complex64> = proj.coefficients().unwrap().iter().copied().collect();
    stepper.step(&mut v, 0.0)?;
    let arr = Array2::from_shape_vec((u.grid().nx, u.grid().ny), v).unwrap();
    Field::from_coefficients(u.grid().clone(), arr)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    /// The run stopped early; partial snapshots and diagnostics are kept.
    Aborted { t: f64, reason: String },
}

#[derive(Debug)]
pub struct RunOutput {
    pub snapshots: Vec<(f64, Field)>,
    pub diagnostics: DiagnosticsSeries,
    pub status: RunStatus,
    /// Energy fraction removed by the ingestion projection.
    pub projected_energy_fraction: f64,
}

/// Evolve `u0` to `cfg.t_end` (rounded to a whole number of steps),
/// collecting snapshots and diagnostics at the configured cadences.
pub fn run(u0: &Field, cfg: &SolverConfig) -> Result<RunOutput> {
    let grid = u0.grid().clone();
    let n_steps = ((cfg.t_end / cfg.dt).round() as usize).max(1);
    let (proj, removed) = project_zero_mass_reported(u0);
    let mut v: Vec<Complex64> = proj.coefficients().unwrap().iter().copied().collect();
    let mut stepper = Stepper::new(&grid, cfg);

    // advisory time-step bound from the largest retained phase speed
    let dt_advisory = if stepper.omega_max > 0.0 {
        2.8 / stepper.omega_max
    } else {
        f64::INFINITY
    };
    if cfg.dt > dt_advisory {
        eprintln!(
            "note: dt = {:.3e} exceeds the advisory bound 2.8/max|omega| = {:.3e}",
            cfg.dt, dt_advisory
        );
    }

    let mut snapshots = Vec::new();
    let mut diagnostics = DiagnosticsSeries::default();
    let field_of = |v: &[Complex64]| -> Field {
        let arr = Array2::from_shape_vec((grid.nx, grid.ny), v.to_vec()).unwrap();
        Field::from_coefficients(grid.clone(), arr).unwrap()
    };

    diagnostics.push(0.0, &field_of(&v), cfg)?;
    if cfg.snapshot_every != usize::MAX {
        snapshots.push((0.0, field_of(&v)));
    }

    let diag_every = cfg.diagnostics_every.max(1);
    let mut status = RunStatus::Completed;
    for step in 1..=n_steps {
        let t_before = (step - 1) as f64 * cfg.dt;
        if let Err(e) = stepper.step(&mut v, t_before) {
            status = match e {
                FkpError::BlowUp { t, ref detail } => RunStatus::Aborted {
                    t,
                    reason: detail.clone(),
                },
                FkpError::CflViolation { t, product } => RunStatus::Aborted {
                    t,
                    reason: format!("nonlinear CFL bound violated: {product:.3e} > 1"),
                },
                other => return Err(other),
            };
            break;
        }
        let t = step as f64 * cfg.dt;
        if step % diag_every == 0 || step == n_steps {
            diagnostics.push(t, &field_of(&v), cfg)?;
        }
        if cfg.snapshot_every != usize::MAX
            && (step % cfg.snapshot_every == 0 || step == n_steps)
        {
            snapshots.push((t, field_of(&v)));
        }
    }

    Ok(RunOutput {
        snapshots,
        diagnostics,
        status,
        projected_energy_fraction: removed,
    })
}

/// Final state of a run, without the snapshot/diagnostics machinery.
pub fn evolve_to(u0: &Field, cfg: &SolverConfig) -> Result<Field> {
    run_final(u0, cfg)
}

/// Scaling map u -> lambda^alpha u(lambda x, lambda^{(alpha+2)/2} y) realised
/// by shrinking the box to (lx/lambda, ly/lambda^{(alpha+2)/2}); on the
/// lattice the sample points coincide, so the transform is an exact
/// amplitude scaling plus grid relabeling for every finite lambda > 0.
pub fn scaling_transform(u: &Field, lam: f64, alpha: f64) -> Result<Field> {
    if !(lam > 0.0) || !lam.is_finite() {
        return Err(FkpError::InvalidParameter(format!(
            "scaling parameter must be positive and finite, got {lam}"
        )));
    }
    let g = u.grid();
    let beta = 0.5 * (alpha + 2.0);
    let new_grid = Grid2D::new(g.nx, g.ny, g.lx / lam, g.ly / lam.powf(beta))?;
    let amp = lam.powf(alpha);
    let ur = u.to_real()?;
    let values = ur.values().unwrap().mapv(|x| amp * x);
    Field::from_values(new_grid, values)
}

#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub lambda: f64,
    pub alpha: f64,
    /// || evolve(scale(u0)) - scale(evolve(u0)) ||_L2 relative to the norm
    /// of the scaled evolved state.
    pub discrepancy: f64,
}

/// Check the scaling symmetry: evolving the rescaled datum for the rescaled
/// time must equal rescaling the evolved state.
pub fn verify_scaling(u0: &Field, cfg: &SolverConfig, lam: f64) -> Result<ScalingReport> {
    let alpha = match &cfg.symbol.family {
        crate::symbols::SymbolFamily::PurePower { alpha } => *alpha,
        _ => {
            return Err(FkpError::InvalidParameter(
                "scaling symmetry only holds for the pure-power family".into(),
            ))
        }
    };
    let mut cfg_a = cfg.clone();
    cfg_a.snapshot_every = usize::MAX;
    let evolved = run_final(u0, &cfg_a)?;
    let want = scaling_transform(&evolved, lam, alpha)?;

    let scaled0 = scaling_transform(u0, lam, alpha)?;
    let time_factor = lam.powf(alpha + 1.0);
    let mut cfg_b = cfg.clone();
    cfg_b.dt = cfg.dt / time_factor;
    cfg_b.t_end = cfg.t_end / time_factor;
    cfg_b.snapshot_every = usize::MAX;
    let got = run_final(&scaled0, &cfg_b)?;

    let denom = norm_l2(&want)?;
    let diff = sub_l2(&got, &want)?;
    Ok(ScalingReport {
        lambda: lam,
        alpha,
        discrepancy: if denom > 0.0 { diff / denom } else { diff },
    })
}

fn run_final(u0: &Field, cfg: &SolverConfig) -> Result<Field> {
    let grid = u0.grid().clone();
    let n_steps = ((cfg.t_end / cfg.dt).round() as usize).max(1);
    let (proj, _) = project_zero_mass_reported(u0);
    let mut v: Vec<Complex64> = proj.coefficients().unwrap().iter().copied().collect();
    let mut stepper = Stepper::new(&grid, cfg);
    for step in 1..=n_steps {
        stepper.step(&mut v, (step - 1) as f64 * cfg.dt)?;
    }
    let arr = Array2::from_shape_vec((grid.nx, grid.ny), v).unwrap();
    Field::from_coefficients(grid, arr)
}

/// L2 norm of the difference of two fields on matching lattices (the grids
/// may carry different box lengths, as in the scaling check; the quadrature
/// weight of `b` is used).
fn sub_l2(a: &Field, b: &Field) -> Result<f64> {
    let ar = a.to_real()?;
    let br = b.to_real()?;
    if ar.values().unwrap().dim() != br.values().unwrap().dim() {
        return Err(FkpError::GridMismatch(
            "fields have different lattice sizes".into(),
        ));
    }
    let diff: Vec<f64> = ar
        .values()
        .unwrap()
        .iter()
        .zip(br.values().unwrap().iter())
        .map(|(x, y)| (x - y) * (x - y))
        .collect();
    Ok((b.grid().cell_area() * pairwise_sum(&diff)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::symbols::Kappa;
    use approx::assert_relative_eq;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid2D {
        make_grid(n, n, 2.0 * PI, 2.0 * PI).unwrap()
    }

    fn random_projected(n: usize, seed: u64, amp: f64) -> Field {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let values = Array2::from_shape_fn((n, n), |_| rng.gen_range(-amp..amp));
        let u = Field::from_values(grid(n), values).unwrap();
        crate::ops::project_zero_mass(&u).to_real().unwrap()
    }

    #[test]
    fn propagate_at_zero_time_is_identity() {
        let s = KPSymbol::pure_power(1.5, Kappa::PlusOne).unwrap();
        let u = random_projected(16, 1, 1.0);
        let v = linear_propagate(&u, &s, 0.0).unwrap();
        let d: f64 = u
            .values()
            .unwrap()
            .iter()
            .zip(v.values().unwrap().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-14);
    }

    #[test]
    fn propagate_preserves_l2() {
        for &alpha in &[0.5, 1.0, 2.0] {
            for kappa in [Kappa::PlusOne, Kappa::MinusOne] {
                let s = KPSymbol::pure_power(alpha, kappa).unwrap();
                let u = random_projected(32, 7, 1.0);
                let n0 = norm_l2(&u).unwrap();
                let v = linear_propagate(&u, &s, 0.7).unwrap();
                let n1 = norm_l2(&v).unwrap();
                assert_relative_eq!(n0, n1, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn propagate_group_law() {
        let s = KPSymbol::pure_power(2.0, Kappa::MinusOne).unwrap();
        let u = random_projected(32, 3, 1.0).to_spectral();
        let ab = linear_propagate(&linear_propagate(&u, &s, 0.13).unwrap(), &s, 0.21).unwrap();
        let once = linear_propagate(&u, &s, 0.34).unwrap();
        let ca = ab.coefficients().unwrap();
        let cb = once.coefficients().unwrap();
        let scale = cb.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        let worst = ca
            .iter()
            .zip(cb.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0_f64, f64::max);
        assert!(worst <= 1e-12 * scale, "group law defect {worst:.3e}");
    }

    #[test]
    fn zero_field_stays_zero() {
        let s = KPSymbol::pure_power(2.0, Kappa::PlusOne).unwrap();
        let cfg = SolverConfig::new(s, 1e-2, 1e-1).unwrap();
        let u = Field::zeros(grid(16));
        let v = step_ifrk4(&u, &cfg).unwrap();
        assert!(norm_l2(&v).unwrap() == 0.0);
    }

    #[test]
    fn linear_only_run_matches_exact_group() {
        let s = KPSymbol::pure_power(1.0, Kappa::PlusOne).unwrap();
        let mut cfg = SolverConfig::new(s.clone(), 0.01, 0.5).unwrap();
        cfg.linear_only = true;
        let u = random_projected(16, 11, 0.5);
        let got = run_final(&u, &cfg).unwrap().to_real().unwrap();
        let want = linear_propagate(&u, &s, 0.5).unwrap();
        let scale = norm_l2(&want).unwrap();
        assert!(sub_l2(&got, &want).unwrap() <= 1e-10 * scale);
    }

    #[test]
    fn mass_is_exactly_conserved() {
        let s = KPSymbol::pure_power(2.0, Kappa::PlusOne).unwrap();
        let cfg = SolverConfig::new(s, 2e-3, 0.2).unwrap();
        let u = random_projected(32, 13, 0.1);
        let m0 = mass(&u);
        let out = run(&u, &cfg).unwrap();
        assert_eq!(out.status, RunStatus::Completed);
        let mend = *out.diagnostics.mass.last().unwrap();
        assert!((mend - m0).abs() <= 1e-13 * m0.abs().max(1.0));
    }

    #[test]
    fn step_convergence_is_fourth_order() {
        // Fixed horizon, dt and dt/2, against a dt/8 reference.
        let s = KPSymbol::pure_power(2.0, Kappa::MinusOne).unwrap();
        let u = Field::from_fn(grid(32), |x, y| {
            0.3 * x.sin() * y.cos() + 0.2 * (2.0 * x).cos() * y.sin()
        });
        let u = crate::ops::project_zero_mass(&u);
        let horizon = 0.08;
        let err = |dt: f64| -> f64 {
            let cfg = SolverConfig::new(s.clone(), dt, horizon).unwrap();
            let got = run_final(&u, &cfg).unwrap();
            let cfg_ref = SolverConfig::new(s.clone(), dt / 8.0, horizon).unwrap();
            let want = run_final(&u, &cfg_ref).unwrap();
            sub_l2(&got.to_real().unwrap(), &want.to_real().unwrap()).unwrap()
        };
        let e1 = err(0.02);
        let e2 = err(0.01);
        let ratio = e1 / e2;
        assert!(
            (10.0..26.0).contains(&ratio),
            "expected ~16x error reduction, got {ratio:.2} (e1={e1:.3e}, e2={e2:.3e})"
        );
    }

    #[test]
    fn time_reversal_returns_the_state() {
        // RK4 is not exactly reversible; the defect at the reference step
        // must sit below 1e-10 and shrink at (at least) fourth order.
        let s = KPSymbol::pure_power(2.0, Kappa::PlusOne).unwrap();
        let u0 = Field::from_fn(grid(32), |x, y| {
            0.3 * x.sin() * y.cos() + 0.2 * (2.0 * x).cos() * y.sin() + 0.1 * (3.0 * x).sin()
        });
        let u = crate::ops::project_zero_mass(&u0).to_real().unwrap();
        let scale = norm_l2(&u).unwrap();
        let defect = |dt: f64| -> f64 {
            let fwd = SolverConfig::new(s.clone(), dt, dt).unwrap();
            let mut bwd = fwd.clone();
            bwd.dt = -dt;
            let mut v: Vec<Complex64> =
                u.to_spectral().coefficients().unwrap().iter().copied().collect();
            let mut sf = Stepper::new(u.grid(), &fwd);
            sf.step(&mut v, 0.0).unwrap();
            let mut sb = Stepper::new(u.grid(), &bwd);
            sb.step(&mut v, dt).unwrap();
            let arr = Array2::from_shape_vec((32, 32), v).unwrap();
            let back = Field::from_coefficients(u.grid().clone(), arr)
                .unwrap()
                .to_real()
                .unwrap();
            sub_l2(&back, &u).unwrap() / scale
        };
        let d_ref = defect(2e-3);
        assert!(d_ref <= 1e-10, "reversal defect {d_ref:.3e}");
        let d_coarse = defect(4e-3);
        assert!(
            d_coarse / d_ref.max(1e-15) >= 8.0,
            "defect did not shrink at fourth order: {d_coarse:.3e} -> {d_ref:.3e}"
        );
    }

    #[test]
    fn hamiltonian_of_single_cosine() {
        // H(cos x) with alpha = 2 on the 2pi box: the dispersive term is
        // 1/2 * ||D_x cos x||^2 = 1/2 * pi * 2pi = pi^2; the transverse and
        // cubic terms vanish.
        let u = Field::from_fn(grid(64), |x, _| x.cos());
        for kappa in [Kappa::PlusOne, Kappa::MinusOne] {
            let s = KPSymbol::pure_power(2.0, kappa).unwrap();
            let h = hamiltonian(&u, &s).unwrap();
            assert_relative_eq!(h, PI * PI, max_relative = 1e-12);
        }
        let z = Field::zeros(grid(8));
        let s = KPSymbol::pure_power(1.0, Kappa::PlusOne).unwrap();
        assert_eq!(hamiltonian(&z, &s).unwrap(), 0.0);
    }

    #[test]
    fn hamiltonian_sign_of_transverse_term() {
        // kappa = -1 (fKP-I) adds the transverse term with a plus sign.
        let u = Field::from_fn(grid(32), |x, y| x.sin() * y.sin());
        let hp = hamiltonian(&u, &KPSymbol::pure_power(2.0, Kappa::PlusOne).unwrap()).unwrap();
        let hm = hamiltonian(&u, &KPSymbol::pure_power(2.0, Kappa::MinusOne).unwrap()).unwrap();
        let b = norm_l2(&antideriv_x_deriv_y(&u).unwrap()).unwrap();
        assert_relative_eq!(hm - hp, b * b, max_relative = 1e-12);
        assert!(hm > hp);
    }

    #[test]
    fn hamiltonian_absent_for_nonpure_families() {
        let u = Field::from_fn(grid(16), |x, _| x.cos());
        let s = KPSymbol::new(crate::symbols::SymbolFamily::ilw(1.0).unwrap(), Kappa::PlusOne);
        assert!(hamiltonian(&u, &s).is_none());
    }

    #[test]
    fn scaling_identity_and_l2_law() {
        let u = Field::from_fn(grid(32), |x, y| x.sin() * (2.0 * y).cos());
        let id = scaling_transform(&u, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            norm_l2(&id).unwrap(),
            norm_l2(&u).unwrap(),
            max_relative = 1e-14
        );
        for &alpha in &[1.0, 4.0 / 3.0, 2.0] {
            for &lam in &[0.5, 2.0] {
                let v = scaling_transform(&u, lam, alpha).unwrap();
                let ratio = norm_l2(&v).unwrap() / norm_l2(&u).unwrap();
                let want = lam.powf((3.0 * alpha - 4.0) / 4.0);
                assert_relative_eq!(ratio, want, max_relative = 1e-12);
            }
        }
        // alpha = 4/3 leaves the L2 norm invariant
        let v = scaling_transform(&u, 3.7, 4.0 / 3.0).unwrap();
        assert_relative_eq!(
            norm_l2(&v).unwrap(),
            norm_l2(&u).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn scaling_rejects_bad_lambda() {
        let u = Field::zeros(grid(8));
        assert!(scaling_transform(&u, 0.0, 1.0).is_err());
        assert!(scaling_transform(&u, -2.0, 1.0).is_err());
        assert!(scaling_transform(&u, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn scaling_commutes_with_linear_flow() {
        let s = KPSymbol::pure_power(2.0, Kappa::PlusOne).unwrap();
        let mut cfg = SolverConfig::new(s, 1e-2, 0.1).unwrap();
        cfg.linear_only = true;
        let u = Field::from_fn(grid(32), |x, y| x.sin() * y.cos() + 0.3 * (2.0 * x).cos());
        let u = crate::ops::project_zero_mass(&u).to_real().unwrap();
        let rep = verify_scaling(&u, &cfg, 2.0).unwrap();
        assert!(rep.discrepancy <= 1e-10, "discrepancy {:.3e}", rep.discrepancy);
        let rep1 = verify_scaling(&u, &cfg, 1.0).unwrap();
        assert!(rep1.discrepancy <= 1e-14);
    }

    #[test]
    fn scaling_commutes_with_nonlinear_flow() {
        let s = KPSymbol::pure_power(2.0, Kappa::MinusOne).unwrap();
        let cfg = SolverConfig::new(s, 2e-3, 0.1).unwrap();
        let u = Field::from_fn(grid(32), |x, y| 0.2 * x.sin() * y.cos());
        let u = crate::ops::project_zero_mass(&u).to_real().unwrap();
        let rep = verify_scaling(&u, &cfg, 2.0).unwrap();
        assert!(rep.discrepancy <= 1e-6, "discrepancy {:.3e}", rep.discrepancy);
    }

    #[test]
    fn blow_up_is_reported_with_partial_outputs() {
        // Huge data and a large step violate the CFL guard immediately.
        let s = KPSymbol::pure_power(2.0, Kappa::PlusOne).unwrap();
        let mut cfg = SolverConfig::new(s, 0.5, 5.0).unwrap();
        cfg.diagnostics_every = 1;
        let u = Field::from_fn(grid(32), |x, y| 50.0 * (x.sin() + y.cos() * x.cos()));
        let out = run(&u, &cfg).unwrap();
        match out.status {
            RunStatus::Aborted { .. } => {}
            RunStatus::Completed => panic!("expected an aborted run"),
        }
        assert!(!out.diagnostics.times.is_empty());
    }
}
