//! Measurement instruments: Lebesgue and weak-Lebesgue norms, Sobolev
//! seminorms, space-time norms over trajectories, log-log rate fits, the
//! exponent algebra of the decay theory, and a convolution inequality probe.

use crate::error::CoreError;
use crate::evolution::Trajectory;
use crate::fft;
use crate::field::{ScalarField, VectorField};
use crate::C64;

/// Relative tolerances used by grid-based checks, by accuracy class.
pub mod tolerances {
    /// Quantities tied to exact spectral identities, degraded only by
    /// roundoff and grid transcription.
    pub const GRID_EXACT: f64 = 0.01;
    /// Quantities limited by quadrature of time integrals.
    pub const QUADRATURE_LIMITED: f64 = 0.05;
    /// Quantities compared against closed forms for idealized profiles that
    /// the grid can only mimic (mollified cores, finite envelopes).
    pub const PROFILE_MATCH: f64 = 0.15;
}

fn check_p(p: f64) -> Result<(), CoreError> {
    if p.is_nan() || p < 1.0 {
        return Err(CoreError::InvalidParameter(format!("Lebesgue exponent p = {p} must be >= 1")));
    }
    Ok(())
}

fn lp_from_magnitudes(mags: &[f64], h3: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return mags.iter().fold(0.0f64, |m, &v| m.max(v));
    }
    if p == 2.0 {
        let s: f64 = mags.iter().map(|v| v * v).sum();
        return (s * h3).sqrt();
    }
    let s: f64 = mags.iter().map(|v| v.powf(p)).sum();
    (s * h3).powf(1.0 / p)
}

fn weak_lp_from_magnitudes(mags: &mut Vec<f64>, h3: f64, p: f64) -> f64 {
    // sup over lambda of lambda * mu(|f| > lambda)^{1/p} equals, on a grid,
    // the max over the sorted magnitudes a_1 >= a_2 >= ... of a_i (i h^3)^{1/p}.
    mags.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite magnitudes"));
    let inv_p = 1.0 / p;
    let mut best = 0.0f64;
    for (i, &a) in mags.iter().enumerate() {
        if a <= 0.0 {
            break;
        }
        let candidate = a * (((i + 1) as f64) * h3).powf(inv_p);
        best = best.max(candidate);
    }
    best
}

/// `L^p` norm of the pointwise Euclidean magnitude, cell-volume weighted.
/// `p = f64::INFINITY` gives the max norm.
pub fn lp_norm(f: &VectorField, p: f64) -> Result<f64, CoreError> {
    check_p(p)?;
    let mag = f.magnitude();
    Ok(lp_from_magnitudes(mag.as_slice().unwrap(), f.grid().cell_volume(), p))
}

/// `L^p` norm of a scalar field's absolute value.
pub fn lp_norm_scalar(f: &ScalarField, p: f64) -> Result<f64, CoreError> {
    check_p(p)?;
    let mags: Vec<f64> = f.data().iter().map(|v| v.abs()).collect();
    Ok(lp_from_magnitudes(&mags, f.grid().cell_volume(), p))
}

/// Weak `L^p` quasi-norm over the exact grid distribution function.
pub fn weak_lp_norm(f: &VectorField, p: f64) -> Result<f64, CoreError> {
    check_p(p)?;
    if p.is_infinite() {
        return lp_norm(f, p);
    }
    let mut mags: Vec<f64> = f.magnitude().into_iter().collect();
    Ok(weak_lp_from_magnitudes(&mut mags, f.grid().cell_volume(), p))
}

/// Weak `L^p` quasi-norm of a scalar field.
pub fn weak_lp_norm_scalar(f: &ScalarField, p: f64) -> Result<f64, CoreError> {
    check_p(p)?;
    if p.is_infinite() {
        return lp_norm_scalar(f, p);
    }
    let mut mags: Vec<f64> = f.data().iter().map(|v| v.abs()).collect();
    Ok(weak_lp_from_magnitudes(&mut mags, f.grid().cell_volume(), p))
}

/// Homogeneous Sobolev seminorm `|| |k|^s u_hat ||` in the L2 pairing.
pub fn sobolev_seminorm(f: &VectorField, s: f64) -> Result<f64, CoreError> {
    let lam = crate::spectral::fractional_laplacian(f, s)?;
    Ok(lam.l2_norm_sq().sqrt())
}

/// Max of `|u(x)|` over grid cells within `radius` of `center` (periodic metric).
pub fn sup_norm_in_ball(f: &VectorField, center: [f64; 3], radius: f64) -> f64 {
    let g = f.grid().clone();
    let mag = f.magnitude();
    let n = g.n();
    let mut best = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if g.distance_to([i, j, k], center) <= radius {
                    best = best.max(mag[[i, j, k]]);
                }
            }
        }
    }
    best
}

/// `L^r` in time of the spatial `L^q` norm over a trajectory, by trapezoid
/// quadrature on the stored snapshot times. `r = f64::INFINITY` takes the sup.
pub fn spacetime_norm(traj: &Trajectory, r: f64, q: f64) -> Result<f64, CoreError> {
    check_p(q)?;
    if r.is_nan() || r < 1.0 {
        return Err(CoreError::InvalidParameter(format!("time exponent r = {r} must be >= 1")));
    }
    let times = traj.times();
    if times.is_empty() {
        return Err(CoreError::Schedule("empty trajectory".into()));
    }
    let norms: Vec<f64> = traj
        .snapshots()
        .iter()
        .map(|u| lp_norm(u, q))
        .collect::<Result<_, _>>()?;
    if r.is_infinite() {
        return Ok(norms.iter().fold(0.0f64, |m, &v| m.max(v)));
    }
    let mut acc = 0.0f64;
    for i in 1..times.len() {
        let dt = times[i] - times[i - 1];
        acc += 0.5 * dt * (norms[i].powf(r) + norms[i - 1].powf(r));
    }
    Ok(acc.powf(1.0 / r))
}

/// Result of a log-log least-squares fit over a time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub window: (f64, f64),
}

/// Unweighted least squares of `ln v` against `ln t` restricted to
/// `window.0 <= t <= window.1`. Rejects windows selecting fewer than three
/// points and non-positive values inside the window.
pub fn rate_fit(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit, CoreError> {
    if times.len() != values.len() {
        return Err(CoreError::InvalidParameter(format!(
            "series length mismatch: {} times vs {} values",
            times.len(),
            values.len()
        )));
    }
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(CoreError::InvalidParameter(format!("bad fit window [{lo}, {hi}]")));
    }
    let slack = 1e-12;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(values.iter()) {
        if t >= lo * (1.0 - slack) && t <= hi * (1.0 + slack) {
            if !(v > 0.0) {
                return Err(CoreError::NonPositiveSeries(format!("value {v} at t = {t}")));
            }
            xs.push(t.ln());
            ys.push(v.ln());
        }
    }
    let n = xs.len();
    if n < 3 {
        return Err(CoreError::FitWindow { lo, hi, found: n, needed: 3 });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys.iter()) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(CoreError::InvalidParameter("degenerate fit: all times equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(RateFit { slope, intercept, r_squared, n_points: n, window })
}

/// Exponents of the weak-`L^p` decay theory for `p` in `(2, 3]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaExponents {
    pub p: f64,
    /// Short-time error exponent `(p - 2) / (2 (4 - p))`.
    pub sigma: f64,
    /// Late-window envelope exponent `(p - 2) / 2`.
    pub long_time: f64,
}

pub fn sigma_exponents(p: f64) -> Result<SigmaExponents, CoreError> {
    if !(p > 2.0 && p <= 3.0) {
        return Err(CoreError::InvalidParameter(format!("p = {p} outside (2, 3]")));
    }
    Ok(SigmaExponents { p, sigma: 0.5 * (p - 2.0) / (4.0 - p), long_time: 0.5 * (p - 2.0) })
}

/// Time exponent `r(q) = 2q / (2q - 3)` pairing with spatial `L^q`, `q > 3/2`.
pub fn spacetime_exponent(q: f64) -> Result<f64, CoreError> {
    if !(q > 1.5) {
        return Err(CoreError::InvalidParameter(format!("q = {q} must exceed 3/2")));
    }
    Ok(2.0 * q / (2.0 * q - 3.0))
}

/// Convolution inequality probe: returns `(lhs, rhs)` with
/// `lhs = ||f * g||_inf` via transforms and `rhs = ||f||_q ||g||_{p,weak}`
/// for conjugate `1/p + 1/q = 1`. The caller asserts `lhs <= rhs` up to grid
/// tolerance; the probe itself only validates exponents and grids.
pub fn oneil_check(
    f: &ScalarField,
    g: &ScalarField,
    p: f64,
    q: f64,
) -> Result<(f64, f64), CoreError> {
    if f.grid() != g.grid() {
        return Err(CoreError::GridMismatch("convolution over distinct grids".into()));
    }
    check_p(p)?;
    check_p(q)?;
    let sum = 1.0 / p + 1.0 / q;
    if (sum - 1.0).abs() > 1e-12 {
        return Err(CoreError::NotConjugate { p, q, sum });
    }
    let fh = fft::analyze_real(f.data());
    let gh = fft::analyze_real(g.data());
    let mut prod = fh;
    prod.zip_mut_with(&gh, |a, b| *a = *a * *b);
    let conv = fft::synthesize(&prod);
    let l3 = f.grid().length().powi(3);
    let lhs = conv.iter().fold(0.0f64, |m, z: &C64| m.max(z.re.abs())) * l3;
    let rhs = lp_norm_scalar(f, q)? * weak_lp_norm_scalar(g, p)?;
    Ok((lhs, rhs))
}
