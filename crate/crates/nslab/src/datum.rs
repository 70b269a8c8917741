//! Deterministic initial-data factory. Every kind is built in physical
//! space from seeded smooth ingredients, then projected, de-meaned, and
//! band-limited so the solver accepts it as-is.

use crate::error::LabError;
use ndarray::Array3;
use nslab_core::analysis::sup_norm_in_ball;
use nslab_core::evolution::radial_bump;
use nslab_core::spectral::{dealias, leray_project};
use nslab_core::{C64, Grid3, VectorField};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatumKind {
    HomogeneousMimic,
    LocalizedBounded,
    PairAgreeingLocally,
    SingleMode,
    GaussianBump,
}

#[derive(Debug, Clone, Copy)]
pub struct DatumSpec {
    pub kind: DatumKind,
    /// Target weak-L^p index of the mimic profile.
    pub p: f64,
    /// Core mollification radius; must resolve on the grid.
    pub eps_core: Option<f64>,
    /// Outer envelope radius.
    pub r_env: Option<f64>,
    /// Agreement ball radius for the pair kind.
    pub agreement_radius: Option<f64>,
    pub amplitude: f64,
    pub seed: u64,
}

impl DatumSpec {
    pub fn from_config(d: &crate::config::DatumConfig, fallback_seed: u64) -> Self {
        DatumSpec {
            kind: d.kind,
            p: d.p,
            eps_core: d.eps_core,
            r_env: d.r_env,
            agreement_radius: d.agreement_radius,
            amplitude: d.amplitude,
            seed: d.seed.unwrap_or(fallback_seed),
        }
    }

    fn eps_core(&self) -> Result<f64, LabError> {
        self.eps_core
            .ok_or_else(|| LabError::Datum("this kind needs eps_core".into()))
    }

    fn r_env(&self) -> Result<f64, LabError> {
        self.r_env
            .ok_or_else(|| LabError::Datum("this kind needs r_env".into()))
    }

    pub fn agreement_radius(&self) -> Result<f64, LabError> {
        self.agreement_radius
            .ok_or_else(|| LabError::Datum("pair kind needs agreement_radius".into()))
    }

    pub fn validate(&self, grid: &Grid3) -> Result<(), LabError> {
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(LabError::Datum(format!("amplitude = {} must be positive", self.amplitude)));
        }
        let l = grid.length();
        if let Some(r) = self.r_env {
            if !(r > 0.0 && r <= l / 4.0) {
                return Err(LabError::Datum(format!("r_env = {r} outside (0, L/4 = {}]", l / 4.0)));
            }
        }
        if let Some(e) = self.eps_core {
            let min = 2.0 * grid.spacing();
            if e < min {
                return Err(LabError::Datum(format!(
                    "eps_core = {e} below the resolvable 2h = {min:.4}"
                )));
            }
        }
        match self.kind {
            DatumKind::HomogeneousMimic => {
                if !(self.p > 1.0) {
                    return Err(LabError::Datum(format!("profile index p = {} must exceed 1", self.p)));
                }
                self.eps_core()?;
                self.r_env()?;
            }
            DatumKind::LocalizedBounded | DatumKind::GaussianBump => {
                self.r_env()?;
            }
            DatumKind::PairAgreeingLocally => {
                self.r_env()?;
                let ra = self.agreement_radius()?;
                if !(ra > 0.0) {
                    return Err(LabError::Datum(format!("agreement radius {ra} must be positive")));
                }
                let (lo, hi) = ring_extent(ra, l);
                if hi - lo < 0.5 * ra {
                    return Err(LabError::Datum(format!(
                        "agreement ball {ra} leaves no room for a far-field ring inside the box"
                    )));
                }
            }
            DatumKind::SingleMode => {}
        }
        Ok(())
    }
}

/// A constructed datum: one field, or a locally agreeing pair together with
/// the measured in-ball leak of the band-limited difference. The raw pair
/// difference vanishes identically inside the ball; projection and truncation are
/// nonlocal, so the leak is a real, reported quantity.
pub enum Datum {
    Single(VectorField),
    Pair {
        first: VectorField,
        second: VectorField,
        agreement_leak: f64,
    },
}

impl Datum {
    pub fn single(self) -> Result<VectorField, LabError> {
        match self {
            Datum::Single(f) => Ok(f),
            Datum::Pair { .. } => Err(LabError::Datum("expected a single field, got a pair".into())),
        }
    }

    pub fn pair(self) -> Result<(VectorField, VectorField, f64), LabError> {
        match self {
            Datum::Pair { first, second, agreement_leak } => Ok((first, second, agreement_leak)),
            Datum::Single(_) => Err(LabError::Datum("expected a pair, got a single field".into())),
        }
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if (0.04..=1.0).contains(&n2) {
            let n = n2.sqrt();
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

fn zeros3(n: usize) -> [Array3<f64>; 3] {
    [
        Array3::zeros((n, n, n)),
        Array3::zeros((n, n, n)),
        Array3::zeros((n, n, n)),
    ]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Projection, zero mean, band limit: the exact pipeline the solver assumes.
fn finalize(grid: &Grid3, comps: [Array3<f64>; 3]) -> Result<VectorField, LabError> {
    let raw = VectorField::from_physical(grid, comps)?;
    let mut out = dealias(&leray_project(&raw.to_spectral()));
    for c in 0..3 {
        out.set_mode([0, 0, 0], c, C64::new(0.0, 0.0));
    }
    Ok(out)
}

fn fill(grid: &Grid3, mut f: impl FnMut([f64; 3], f64) -> [f64; 3]) -> [Array3<f64>; 3] {
    let n = grid.n();
    let center = grid.center();
    let mut comps = zeros3(n);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let d = [
                    grid.wrapped_delta(grid.coordinate(i), center[0]),
                    grid.wrapped_delta(grid.coordinate(j), center[1]),
                    grid.wrapped_delta(grid.coordinate(l), center[2]),
                ];
                let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                let v = f(d, r);
                comps[0][[i, j, l]] = v[0];
                comps[1][[i, j, l]] = v[1];
                comps[2][[i, j, l]] = v[2];
            }
        }
    }
    comps
}

fn max_magnitude(comps: &[Array3<f64>; 3]) -> f64 {
    let mut worst = 0.0f64;
    for idx in 0..comps[0].len() {
        let (a, b, c) = (
            comps[0].as_slice().unwrap()[idx],
            comps[1].as_slice().unwrap()[idx],
            comps[2].as_slice().unwrap()[idx],
        );
        worst = worst.max((a * a + b * b + c * c).sqrt());
    }
    worst
}

fn rescale(comps: &mut [Array3<f64>; 3], factor: f64) {
    for c in comps.iter_mut() {
        c.mapv_inplace(|v| v * factor);
    }
}

/// `amplitude (r^2+eps^2)^{-3/(2p)}` times a unit direction that swirls
/// around a seeded axis; enveloped to vanish beyond `r_env`.
fn build_mimic(spec: &DatumSpec, grid: &Grid3) -> Result<[Array3<f64>; 3], LabError> {
    let eps = spec.eps_core()?;
    let r_env = spec.r_env()?;
    let mut rng = rng_for(spec.seed, 0);
    let axis = random_unit(&mut rng);
    let amp = spec.amplitude;
    let power = -1.5 / spec.p;
    Ok(fill(grid, |d, r| {
        let rs2 = r * r + eps * eps;
        let profile = amp * rs2.powf(power) * radial_bump(r, 0.65 * r_env, r_env);
        if profile == 0.0 {
            return [0.0; 3];
        }
        let v = cross(axis, d);
        let rs = rs2.sqrt();
        // |v| is orthogonal to axis, so the mix below has unit magnitude
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + 0.0625 * rs2).sqrt();
        [
            profile * (v[0] + 0.25 * rs * axis[0]) / norm,
            profile * (v[1] + 0.25 * rs * axis[1]) / norm,
            profile * (v[2] + 0.25 * rs * axis[2]) / norm,
        ]
    }))
}

/// Smooth compactly supported swirl `psi(r) (axis x d)`, exactly solenoidal
/// in the continuum, peak speed normalized to `amplitude`.
fn build_swirl_bump(
    grid: &Grid3,
    axis: [f64; 3],
    envelope: impl Fn(f64) -> f64,
    amplitude: f64,
) -> Result<[Array3<f64>; 3], LabError> {
    let mut comps = fill(grid, |d, r| {
        let g = envelope(r);
        if g == 0.0 {
            return [0.0; 3];
        }
        let v = cross(axis, d);
        [g * v[0], g * v[1], g * v[2]]
    });
    let peak = max_magnitude(&comps);
    if peak <= 0.0 {
        return Err(LabError::Datum("envelope vanished on the whole grid".into()));
    }
    rescale(&mut comps, amplitude / peak);
    Ok(comps)
}

fn ring_extent(agreement_radius: f64, length: f64) -> (f64, f64) {
    let lo = 1.6 * agreement_radius;
    let hi = (0.49 * length).min(lo + 1.4 * agreement_radius);
    (lo, hi)
}

/// C^2 ring profile: 0 on [0, lo], plateau in the middle, 0 beyond hi.
fn ring_envelope(r: f64, lo: f64, hi: f64) -> f64 {
    let edge = 0.3 * (hi - lo);
    (1.0 - radial_bump(r, lo, lo + edge)) * radial_bump(r, hi - edge, hi)
}

pub fn make_datum(spec: &DatumSpec, grid: &Grid3) -> Result<Datum, LabError> {
    spec.validate(grid)?;
    match spec.kind {
        DatumKind::HomogeneousMimic => {
            let comps = build_mimic(spec, grid)?;
            Ok(Datum::Single(finalize(grid, comps)?))
        }
        DatumKind::LocalizedBounded => {
            let r_env = spec.r_env()?;
            let mut rng = rng_for(spec.seed, 0);
            let axis = random_unit(&mut rng);
            let comps = build_swirl_bump(
                grid,
                axis,
                |r| radial_bump(r, 0.55 * r_env, r_env),
                spec.amplitude,
            )?;
            Ok(Datum::Single(finalize(grid, comps)?))
        }
        DatumKind::GaussianBump => {
            let r_env = spec.r_env()?;
            let width = r_env / 3.0;
            let mut rng = rng_for(spec.seed, 0);
            let axis = random_unit(&mut rng);
            let comps = build_swirl_bump(
                grid,
                axis,
                |r| (-0.5 * (r / width).powi(2)).exp(),
                spec.amplitude,
            )?;
            Ok(Datum::Single(finalize(grid, comps)?))
        }
        DatumKind::SingleMode => {
            let n = grid.n();
            let k = 2.0 * std::f64::consts::PI / grid.length();
            let mut comps = zeros3(n);
            for i in 0..n {
                let s = spec.amplitude * (k * grid.coordinate(i)).sin();
                comps[1].slice_mut(ndarray::s![i, .., ..]).fill(s);
            }
            Ok(Datum::Single(finalize(grid, comps)?))
        }
        DatumKind::PairAgreeingLocally => {
            let r_env = spec.r_env()?;
            let ra = spec.agreement_radius()?;
            let mut rng = rng_for(spec.seed, 0);
            let axis = random_unit(&mut rng);
            let base = build_swirl_bump(
                grid,
                axis,
                |r| radial_bump(r, 0.55 * r_env, r_env),
                spec.amplitude,
            )?;

            let mut far_rng = rng_for(spec.seed, 1);
            let far_axis = random_unit(&mut far_rng);
            let (lo, hi) = ring_extent(ra, grid.length());
            let mut perturbed = build_swirl_bump(
                grid,
                far_axis,
                |r| ring_envelope(r, lo, hi),
                0.5 * spec.amplitude,
            )?;
            for (p, b) in perturbed.iter_mut().zip(base.iter()) {
                *p += b;
            }

            let first = finalize(grid, base)?;
            let second = finalize(grid, perturbed)?;
            let diff = second.sub(&first)?.to_physical();
            let agreement_leak = sup_norm_in_ball(&diff, grid.center(), ra);
            Ok(Datum::Pair { first, second, agreement_leak })
        }
    }
}
