//! Time evolution: exact heat flow, a dealiased pseudo-spectral
//! Navier-Stokes integrator, Duhamel integrals and Picard iterates, pressure
//! recovery, energy ledgers, and kernel synthesis.

mod duhamel;
mod energy;
mod ns;
mod oseen;
mod pressure;
mod quadrature;
mod snapshot;

pub use duhamel::{duhamel_bilinear, expansion_terms, picard_iterates, ExpansionTerms};
pub use energy::{calibrate_ladyzhenskaya, perturbed_energy_check, EnergyLedger};
pub use ns::{evolve_ns, NsOptions};
pub use oseen::{oseen_kernel_check, OseenSample};
pub use pressure::{
    local_energy_residual, pressure_field, radial_bump, LocalEnergyReport, SpaceTimeTest,
};
pub use quadrature::simpson_weights;
pub use snapshot::{read_snapshot, read_trajectory, write_snapshot, write_trajectory};

use crate::error::CoreError;
use crate::field::VectorField;
use crate::grid::Grid3;
use crate::spectral;

/// Which flow produced a trajectory; stored with snapshots on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowTag {
    Heat,
    NavierStokes,
    /// Picard iterate of the given order (0 is the caloric extension).
    Picard(u8),
    /// Assembled from other trajectories (Duhamel terms, cutoff products).
    Derived,
}

impl FlowTag {
    pub fn to_byte(self) -> u8 {
        match self {
            FlowTag::Heat => 0,
            FlowTag::NavierStokes => 1,
            FlowTag::Derived => 2,
            FlowTag::Picard(k) => 16 + k,
        }
    }

    pub fn from_byte(b: u8) -> Result<Self, CoreError> {
        match b {
            0 => Ok(FlowTag::Heat),
            1 => Ok(FlowTag::NavierStokes),
            2 => Ok(FlowTag::Derived),
            k if k >= 16 => Ok(FlowTag::Picard(k - 16)),
            _ => Err(CoreError::SnapshotIo(format!("unknown flow tag byte {b}"))),
        }
    }
}

/// Snapshots of one flow at strictly increasing times on a shared grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    tag: FlowTag,
    times: Vec<f64>,
    snaps: Vec<VectorField>,
}

impl Trajectory {
    pub fn new(tag: FlowTag, times: Vec<f64>, snaps: Vec<VectorField>) -> Result<Self, CoreError> {
        if times.is_empty() || times.len() != snaps.len() {
            return Err(CoreError::Schedule(format!(
                "{} times against {} snapshots",
                times.len(),
                snaps.len()
            )));
        }
        if times[0] < 0.0 || !times.iter().all(|t| t.is_finite()) {
            return Err(CoreError::Schedule("times must be finite and non-negative".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::Schedule("times must be strictly increasing".into()));
        }
        let grid = snaps[0].grid().clone();
        if snaps.iter().any(|s| *s.grid() != grid) {
            return Err(CoreError::GridMismatch("trajectory snapshots on distinct grids".into()));
        }
        Ok(Trajectory { tag, times, snaps })
    }

    pub fn tag(&self) -> FlowTag {
        self.tag
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[VectorField] {
        &self.snaps
    }

    pub fn snapshot(&self, i: usize) -> &VectorField {
        &self.snaps[i]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn grid(&self) -> &Grid3 {
        self.snaps[0].grid()
    }

    /// Index of the snapshot at time `t` (relative slack `1e-12`).
    pub fn index_of_time(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(s.abs()).max(1e-300))
    }

    /// True when the two trajectories share grid and time schedule exactly.
    pub fn aligned_with(&self, other: &Trajectory) -> bool {
        self.grid() == other.grid()
            && self.times.len() == other.times.len()
            && self.times.iter().zip(other.times.iter()).all(|(a, b)| a == b)
    }
}

fn validate_schedule(times: &[f64]) -> Result<(), CoreError> {
    if times.is_empty() {
        return Err(CoreError::Schedule("empty snapshot schedule".into()));
    }
    if !times.iter().all(|t| t.is_finite() && *t >= 0.0) {
        return Err(CoreError::Schedule("schedule times must be finite and >= 0".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::Schedule("schedule times must be strictly increasing".into()));
    }
    Ok(())
}

/// Exact caloric extension: applies the heat multiplier to `u0` at each
/// requested time. No accumulation of stepping error.
pub fn evolve_heat(u0: &VectorField, times: &[f64]) -> Result<Trajectory, CoreError> {
    validate_schedule(times)?;
    let spec = u0.to_spectral();
    let snaps: Vec<VectorField> = times
        .iter()
        .map(|&t| spectral::heat_semigroup(&spec, t))
        .collect::<Result<_, _>>()?;
    Trajectory::new(FlowTag::Heat, times.to_vec(), snaps)
}
