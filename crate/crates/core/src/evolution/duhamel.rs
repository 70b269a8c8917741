//! Duhamel bilinear operator over stored trajectories, Picard iterates, and
//! the localized second-order expansion.

use ndarray::Array3;

use crate::error::CoreError;
use crate::field::{Representation, ScalarField, TensorField, VectorField};
use crate::grid::Grid3;
use crate::spectral;
use crate::C64;

use super::quadrature::simpson_weights;
use super::{evolve_heat, FlowTag, Trajectory};

/// Projected divergence of the (optionally symmetrized) product `f (x) g`
/// at every shared snapshot time. These spectral integrand nodes are reused
/// across evaluation times.
struct IntegrandNodes {
    grid: Grid3,
    times: Vec<f64>,
    nodes: Vec<[Array3<C64>; 3]>,
}

fn integrand_node(
    f: &VectorField,
    g: &VectorField,
    symmetric: bool,
) -> Result<[Array3<C64>; 3], CoreError> {
    let t = TensorField::outer_product(f, g, true)?;
    let mut d = spectral::leray_project(&spectral::divergence(&t));
    if symmetric {
        let t2 = TensorField::outer_product(g, f, true)?;
        let d2 = spectral::leray_project(&spectral::divergence(&t2));
        d = d.add(&d2)?.scale(0.5);
    }
    Ok(d.to_spectral().spectral().clone())
}

fn build_nodes(
    f: &Trajectory,
    g: &Trajectory,
    symmetric: bool,
    up_to: usize,
) -> Result<IntegrandNodes, CoreError> {
    let mut nodes = Vec::with_capacity(up_to + 1);
    for i in 0..=up_to {
        nodes.push(integrand_node(f.snapshot(i), g.snapshot(i), symmetric)?);
    }
    Ok(IntegrandNodes {
        grid: f.grid().clone(),
        times: f.times()[..=up_to].to_vec(),
        nodes,
    })
}

/// `- int_0^t e^{(t - s) Laplacian} P div(f x g)(s) ds` by Simpson weights
/// over the stored nodes `s <= t`.
fn integrate_nodes(cache: &IntegrandNodes, jt: usize) -> VectorField {
    let grid = &cache.grid;
    let n = grid.n();
    let t = cache.times[jt];
    let weights = simpson_weights(&cache.times[..=jt]);
    let ksq: Vec<f64> = {
        let mut v = Vec::with_capacity(n * n * n);
        for i in 0..n {
            let ki = grid.wavenumber(i);
            for j in 0..n {
                let kj = grid.wavenumber(j);
                for l in 0..n {
                    let kl = grid.wavenumber(l);
                    v.push(ki * ki + kj * kj + kl * kl);
                }
            }
        }
        v
    };
    let shape = (n, n, n);
    let mut acc = [
        Array3::<C64>::zeros(shape),
        Array3::<C64>::zeros(shape),
        Array3::<C64>::zeros(shape),
    ];
    for (i, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let tau = t - cache.times[i];
        for c in 0..3 {
            let src = cache.nodes[i][c].as_slice().unwrap();
            let dst = acc[c].as_slice_mut().unwrap();
            for m in 0..src.len() {
                dst[m] += src[m] * (w * (-tau * ksq[m]).exp());
            }
        }
    }
    for comp in acc.iter_mut() {
        comp.mapv_inplace(|z| -z);
    }
    VectorField::from_spectral(grid, acc).expect("quadrature output stays finite")
}

fn check_pair(f: &Trajectory, g: &Trajectory) -> Result<(), CoreError> {
    if !f.aligned_with(g) {
        return Err(CoreError::Schedule(
            "trajectories must share grid and snapshot times".into(),
        ));
    }
    if f.times()[0] != 0.0 {
        return Err(CoreError::Schedule("snapshot schedule must start at t = 0".into()));
    }
    Ok(())
}

/// Duhamel bilinear operator
/// `B(f, g)(t) = - int_0^t e^{(t-s) Laplacian} P div(f (x) g)(s) ds`,
/// with `f (x) g` symmetrized when `symmetric` is set. The shared schedule
/// must start at zero and provide at least nine nodes in `[0, t]`.
pub fn duhamel_bilinear(
    f: &Trajectory,
    g: &Trajectory,
    t: f64,
    symmetric: bool,
) -> Result<VectorField, CoreError> {
    check_pair(f, g)?;
    let jt = f
        .index_of_time(t)
        .ok_or_else(|| CoreError::Schedule(format!("t = {t} is not a snapshot time")))?;
    if jt + 1 < 9 {
        return Err(CoreError::TooFewNodes { needed: 9, found: jt + 1 });
    }
    let cache = build_nodes(f, g, symmetric, jt)?;
    Ok(integrate_nodes(&cache, jt))
}

/// Picard iterates `P_0 = e^{t Laplacian} u0`,
/// `P_k = P_0 + B(P_{k-1}, P_{k-1})`, each evaluated on the full schedule.
/// The schedule must start at zero; early times with fewer than three nodes
/// fall back to the trapezoid inside the shared quadrature.
pub fn picard_iterates(
    u0: &VectorField,
    k_max: usize,
    times: &[f64],
) -> Result<Vec<Trajectory>, CoreError> {
    if times.is_empty() || times[0] != 0.0 {
        return Err(CoreError::Schedule("Picard schedule must start at t = 0".into()));
    }
    let heat = evolve_heat(u0, times)?;
    let p0 = Trajectory::new(FlowTag::Picard(0), times.to_vec(), heat.snapshots().to_vec())?;
    let mut iterates = vec![p0];
    for k in 1..=k_max {
        let prev = &iterates[k - 1];
        let cache = build_nodes(prev, prev, false, times.len() - 1)?;
        let mut snaps = Vec::with_capacity(times.len());
        for j in 0..times.len() {
            let base = iterates[0].snapshot(j);
            let snap = if j == 0 {
                base.clone()
            } else {
                base.add(&integrate_nodes(&cache, j))?
            };
            snaps.push(snap);
        }
        iterates.push(Trajectory::new(
            FlowTag::Picard(k.min(u8::MAX as usize) as u8),
            times.to_vec(),
            snaps,
        )?);
    }
    Ok(iterates)
}

/// First iterate, localized second-order correction, and their sum.
pub struct ExpansionTerms {
    /// `P_1 = P_0 + B(P_0, P_0)`.
    pub p1: Trajectory,
    /// `B(P_0, Q chi) + B(Q, P_0 chi)` with `Q = B(P_0, P_0)` and `chi` the
    /// spatial cutoff; built from the datum only.
    pub p2_localized: Trajectory,
    /// `P_1 + p2_localized`, the model compared against the true flow.
    pub p_omega: Trajectory,
}

/// Builds the localized expansion terms from the datum alone.
///
/// `chi` must take values in `[0, 1]`, vanish outside the ball of radius
/// `support_radius` around the box center, and stay positive on the ball of
/// radius `omega_radius` where the expansion is measured.
pub fn expansion_terms(
    u0: &VectorField,
    chi: &ScalarField,
    omega_radius: f64,
    support_radius: f64,
    times: &[f64],
) -> Result<ExpansionTerms, CoreError> {
    if times.is_empty() || times[0] != 0.0 {
        return Err(CoreError::Schedule("expansion schedule must start at t = 0".into()));
    }
    let grid = u0.grid().clone();
    if *chi.grid() != grid {
        return Err(CoreError::GridMismatch("cutoff lives on a different grid".into()));
    }
    if !(omega_radius > 0.0 && support_radius > omega_radius) {
        return Err(CoreError::CutoffSupport(format!(
            "need 0 < omega_radius < support_radius, got {omega_radius} and {support_radius}"
        )));
    }
    if support_radius >= 0.5 * grid.length() {
        return Err(CoreError::CutoffSupport(
            "support ball must fit strictly inside the box".into(),
        ));
    }
    if chi.min() < -1e-12 || chi.max() > 1.0 + 1e-12 {
        return Err(CoreError::CutoffSupport(format!(
            "cutoff range [{:.3e}, {:.3e}] leaves [0, 1]",
            chi.min(),
            chi.max()
        )));
    }
    let n = grid.n();
    let center = grid.center();
    let mut min_inside = f64::INFINITY;
    let mut max_outside = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let r = grid.distance_to([i, j, l], center);
                let v = chi.data()[[i, j, l]];
                if r <= omega_radius {
                    min_inside = min_inside.min(v);
                }
                if r >= support_radius {
                    max_outside = max_outside.max(v.abs());
                }
            }
        }
    }
    if !(min_inside > 0.0) {
        return Err(CoreError::CutoffSupport(format!(
            "cutoff not positive on the measurement ball (min {min_inside:.3e})"
        )));
    }
    if max_outside > 1e-12 {
        return Err(CoreError::CutoffSupport(format!(
            "cutoff leaks outside its support ball (max {max_outside:.3e})"
        )));
    }

    let heat = evolve_heat(u0, times)?;
    let p0 = Trajectory::new(FlowTag::Picard(0), times.to_vec(), heat.snapshots().to_vec())?;
    let last = times.len() - 1;

    // Q = B(P0, P0) on the whole schedule
    let cache0 = build_nodes(&p0, &p0, false, last)?;
    let mut q_snaps = Vec::with_capacity(times.len());
    for j in 0..times.len() {
        q_snaps.push(if j == 0 {
            VectorField::zeros(&grid, Representation::Spectral)
        } else {
            integrate_nodes(&cache0, j)
        });
    }
    drop(cache0);
    let q = Trajectory::new(FlowTag::Derived, times.to_vec(), q_snaps)?;

    // P1 = P0 + Q
    let mut p1_snaps = Vec::with_capacity(times.len());
    for j in 0..times.len() {
        p1_snaps.push(p0.snapshot(j).add(q.snapshot(j))?);
    }
    let p1 = Trajectory::new(FlowTag::Picard(1), times.to_vec(), p1_snaps)?;

    // cutoff products, dealiased like any other nonlinear product
    let cut = |traj: &Trajectory| -> Result<Trajectory, CoreError> {
        let snaps: Vec<VectorField> = traj
            .snapshots()
            .iter()
            .map(|s| Ok(spectral::dealias(&s.multiply_scalar(chi)?)))
            .collect::<Result<_, CoreError>>()?;
        Trajectory::new(FlowTag::Derived, times.to_vec(), snaps)
    };
    let q_cut = cut(&q)?;
    let p0_cut = cut(&p0)?;

    let cache1 = build_nodes(&p0, &q_cut, false, last)?;
    drop(q_cut);
    let cache2 = build_nodes(&q, &p0_cut, false, last)?;
    drop(p0_cut);
    drop(q);

    let mut p2_snaps = Vec::with_capacity(times.len());
    for j in 0..times.len() {
        p2_snaps.push(if j == 0 {
            VectorField::zeros(&grid, Representation::Spectral)
        } else {
            integrate_nodes(&cache1, j).add(&integrate_nodes(&cache2, j))?
        });
    }
    drop(cache1);
    drop(cache2);
    let p2_localized = Trajectory::new(FlowTag::Derived, times.to_vec(), p2_snaps)?;

    let mut omega_snaps = Vec::with_capacity(times.len());
    for j in 0..times.len() {
        omega_snaps.push(p1.snapshot(j).add(p2_localized.snapshot(j))?);
    }
    let p_omega = Trajectory::new(FlowTag::Derived, times.to_vec(), omega_snaps)?;

    Ok(ExpansionTerms { p1, p2_localized, p_omega })
}
