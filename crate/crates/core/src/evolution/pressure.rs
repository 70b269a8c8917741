//! Pressure recovery and the local energy inequality residual.

use ndarray::Array3;

use crate::error::CoreError;
use crate::fft;
use crate::field::{ScalarField, TensorField, VectorField};
use crate::grid::Grid3;
use crate::C64;

use super::Trajectory;

/// Pressure of a solenoidal velocity field:
/// `p = (-Laplacian)^{-1} d_i d_j (u_i u_j)` with dealiased products and the
/// mean fixed to zero.
pub fn pressure_field(u: &VectorField) -> Result<ScalarField, CoreError> {
    if !u.is_solenoidal() {
        return Err(CoreError::InvalidParameter(
            "pressure recovery needs a solenoidal field".into(),
        ));
    }
    let grid = u.grid().clone();
    let t = TensorField::outer_product(u, u, true)?;
    let n = grid.n();
    let mut p_hat = Array3::<C64>::zeros((n, n, n));
    for i in 0..n {
        let ki = grid.wavenumber(i);
        for j in 0..n {
            let kj = grid.wavenumber(j);
            for l in 0..n {
                let kl = grid.wavenumber(l);
                let k = [ki, kj, kl];
                let ksq = ki * ki + kj * kj + kl * kl;
                if ksq == 0.0 {
                    continue;
                }
                let mut s = C64::new(0.0, 0.0);
                for a in 0..3 {
                    for b in 0..3 {
                        s += t.component(a, b)[[i, j, l]] * (k[a] * k[b]);
                    }
                }
                p_hat[[i, j, l]] = -s / ksq;
            }
        }
    }
    ScalarField::new(&grid, fft::synthesize_real(&p_hat))
}

/// Quintic radial profile: 1 for `r <= r_in`, 0 for `r >= r_out`, C^2
/// monotone in between. Shared by the energy test functions and the
/// expansion cutoffs.
pub fn radial_bump(r: f64, r_in: f64, r_out: f64) -> f64 {
    let x = ((r - r_in) / (r_out - r_in)).clamp(0.0, 1.0);
    1.0 - x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

/// Separable test function `phi(x, s) = chi(x) eta(s)`: `chi` is either
/// constant 1 or a quintic radial bump (1 inside `r_in`, 0 beyond `r_out`),
/// and `eta` is a quintic ramp rising from 0 on `[ramp_on, ramp_full]` so
/// that `phi` vanishes near `s = 0`. The spatial gradient and Laplacian are
/// taken spectrally from the samples, so every integration by parts behind
/// the residual is exact at the grid level.
pub struct SpaceTimeTest {
    chi: Array3<f64>,
    grad_chi: [Array3<f64>; 3],
    lap_chi: Array3<f64>,
    ramp_on: f64,
    ramp_full: f64,
    grid: Grid3,
}

impl SpaceTimeTest {
    /// Spatially constant test function; the gradient terms drop and the
    /// residual reduces to the global energy balance.
    pub fn constant(grid: &Grid3, ramp_on: f64, ramp_full: f64) -> Result<Self, CoreError> {
        Self::check_ramp(ramp_on, ramp_full)?;
        let n = grid.n();
        let shape = (n, n, n);
        Ok(SpaceTimeTest {
            chi: Array3::from_elem(shape, 1.0),
            grad_chi: [
                Array3::zeros(shape),
                Array3::zeros(shape),
                Array3::zeros(shape),
            ],
            lap_chi: Array3::zeros(shape),
            ramp_on,
            ramp_full,
            grid: grid.clone(),
        })
    }

    /// Radial bump equal to 1 inside `r_in`, gliding to 0 at `r_out` through
    /// a quintic smoothstep, centered at `center`.
    pub fn bump(
        grid: &Grid3,
        center: [f64; 3],
        r_in: f64,
        r_out: f64,
        ramp_on: f64,
        ramp_full: f64,
    ) -> Result<Self, CoreError> {
        Self::check_ramp(ramp_on, ramp_full)?;
        if !(r_in > 0.0 && r_out > r_in && r_out < 0.5 * grid.length()) {
            return Err(CoreError::CutoffSupport(format!(
                "need 0 < r_in < r_out < L/2, got {r_in} and {r_out}"
            )));
        }
        let chi = ScalarField::from_fn(grid, |idx| {
            radial_bump(grid.distance_to(idx, center), r_in, r_out)
        });
        let grad = crate::spectral::gradient(&chi);
        let lap = crate::spectral::laplacian(&chi);
        let [gx, gy, gz] = grad.physical().clone();
        Ok(SpaceTimeTest {
            chi: chi.data().clone(),
            grad_chi: [gx, gy, gz],
            lap_chi: lap.data().clone(),
            ramp_on,
            ramp_full,
            grid: grid.clone(),
        })
    }

    fn check_ramp(ramp_on: f64, ramp_full: f64) -> Result<(), CoreError> {
        if !(ramp_on >= 0.0 && ramp_full > ramp_on && ramp_full.is_finite()) {
            return Err(CoreError::InvalidParameter(format!(
                "temporal ramp needs 0 <= on < full, got [{ramp_on}, {ramp_full}]"
            )));
        }
        Ok(())
    }

    /// Quintic ramp value; 0 before `ramp_on`, 1 after `ramp_full`.
    pub fn eta(&self, s: f64) -> f64 {
        let x = ((s - self.ramp_on) / (self.ramp_full - self.ramp_on)).clamp(0.0, 1.0);
        x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
    }

    /// Time derivative of the ramp.
    pub fn eta_dot(&self, s: f64) -> f64 {
        let w = self.ramp_full - self.ramp_on;
        let x = (s - self.ramp_on) / w;
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        30.0 * x * x * (1.0 - x) * (1.0 - x) / w
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }
}

/// Both sides of the local energy inequality at a fixed evaluation time,
/// their difference, and a magnitude scale for relative comparisons.
#[derive(Debug, Clone)]
pub struct LocalEnergyReport {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`; nonpositive for suitable solutions, quadrature-level
    /// noise for smooth ones.
    pub residual: f64,
    /// sum of the absolute values of the four constituent terms
    pub scale: f64,
}

struct SnapshotTerms {
    /// `int |grad u|^2 chi`
    grad_sq_chi: f64,
    /// `int |u|^2 chi`
    u_sq_chi: f64,
    /// `int |u|^2 lap chi`
    u_sq_lap: f64,
    /// `int (|u|^2 + 2 p) u . grad chi`
    transport: f64,
}

fn snapshot_terms(u: &VectorField, phi: &SpaceTimeTest) -> Result<SnapshotTerms, CoreError> {
    let grid = u.grid();
    let n = grid.n();
    let h3 = grid.cell_volume();
    let work = u.to_spectral();
    // 9 spectral derivatives d_c u_a
    let mut grad_sq = Array3::<f64>::zeros((n, n, n));
    for a in 0..3 {
        for c in 0..3 {
            let mut d = work.spectral()[a].clone();
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let k = match c {
                            0 => grid.wavenumber(i),
                            1 => grid.wavenumber(j),
                            _ => grid.wavenumber(l),
                        };
                        let z = d[[i, j, l]];
                        d[[i, j, l]] = C64::new(-k * z.im, k * z.re);
                    }
                }
            }
            let dphys = fft::synthesize_real(&d);
            grad_sq.zip_mut_with(&dphys, |g, &v| *g += v * v);
        }
    }
    let p = pressure_field(u)?;
    let uphys = work.to_physical();
    let up = uphys.physical();
    let mut grad_sq_chi = 0.0;
    let mut u_sq_chi = 0.0;
    let mut u_sq_lap = 0.0;
    let mut transport = 0.0;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let idx = [i, j, l];
                let usq = up[0][idx] * up[0][idx] + up[1][idx] * up[1][idx] + up[2][idx] * up[2][idx];
                grad_sq_chi += grad_sq[idx] * phi.chi[idx];
                u_sq_chi += usq * phi.chi[idx];
                u_sq_lap += usq * phi.lap_chi[idx];
                let u_dot_grad = up[0][idx] * phi.grad_chi[0][idx]
                    + up[1][idx] * phi.grad_chi[1][idx]
                    + up[2][idx] * phi.grad_chi[2][idx];
                transport += (usq + 2.0 * p.data()[idx]) * u_dot_grad;
            }
        }
    }
    Ok(SnapshotTerms {
        grad_sq_chi: grad_sq_chi * h3,
        u_sq_chi: u_sq_chi * h3,
        u_sq_lap: u_sq_lap * h3,
        transport: transport * h3,
    })
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..times.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
    }
    acc
}

/// Evaluates `LHS - RHS` of the local energy inequality
/// `int phi |u(t)|^2 + 2 int_0^t int |grad u|^2 phi
///  <= int_0^t int |u|^2 (d_s phi + lap phi) + int_0^t int (|u|^2 + 2p) u . grad phi`
/// at a snapshot time `t`, with trapezoid quadrature over the schedule and
/// pressure recovered from each snapshot.
pub fn local_energy_residual(
    traj: &Trajectory,
    phi: &SpaceTimeTest,
    t: f64,
) -> Result<LocalEnergyReport, CoreError> {
    if phi.grid() != traj.grid() {
        return Err(CoreError::GridMismatch(
            "test function and trajectory live on different grids".into(),
        ));
    }
    if phi.chi.iter().any(|&v| v < 0.0) {
        return Err(CoreError::InvalidParameter("test function must be nonnegative".into()));
    }
    if traj.times()[0] != 0.0 {
        return Err(CoreError::Schedule("local energy integrals start at t = 0".into()));
    }
    let jt = traj
        .index_of_time(t)
        .ok_or_else(|| CoreError::Schedule(format!("t = {t} is not a snapshot time")))?;
    if phi.ramp_full > t {
        return Err(CoreError::Schedule(
            "temporal ramp must saturate before the evaluation time".into(),
        ));
    }
    let times = &traj.times()[..=jt];
    let mut dissipation = Vec::with_capacity(jt + 1);
    let mut parabolic = Vec::with_capacity(jt + 1);
    let mut transport = Vec::with_capacity(jt + 1);
    let mut final_energy = 0.0;
    for (j, &s) in times.iter().enumerate() {
        let eta = phi.eta(s);
        let eta_dot = phi.eta_dot(s);
        let terms = snapshot_terms(traj.snapshot(j), phi)?;
        dissipation.push(terms.grad_sq_chi * eta);
        parabolic.push(terms.u_sq_chi * eta_dot + terms.u_sq_lap * eta);
        transport.push(terms.transport * eta);
        if j == jt {
            final_energy = terms.u_sq_chi * eta;
        }
    }
    let diss = 2.0 * trapezoid(times, &dissipation);
    let para = trapezoid(times, &parabolic);
    let trans = trapezoid(times, &transport);
    let lhs = final_energy + diss;
    let rhs = para + trans;
    Ok(LocalEnergyReport {
        t,
        lhs,
        rhs,
        residual: lhs - rhs,
        scale: final_energy.abs() + diss.abs() + para.abs() + trans.abs(),
    })
}
