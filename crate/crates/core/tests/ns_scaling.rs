//! The solver must commute with the Navier-Stokes scaling symmetry
//! `u_lam(x,t) = lam u(lam x, lam^2 t)`: every operation it performs is
//! homogeneous under it, so the discrete flows agree to rounding, not merely
//! to discretization error.

use ndarray::Array3;
use nslab_core::evolution::{evolve_ns, NsOptions};
use nslab_core::{Grid3, VectorField};

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Taylor-Green swirl plus a transverse shear so the nonlinearity is active.
fn datum_arrays(n: usize, scale: f64) -> [Array3<f64>; 3] {
    let mut comps = [
        Array3::<f64>::zeros((n, n, n)),
        Array3::<f64>::zeros((n, n, n)),
        Array3::<f64>::zeros((n, n, n)),
    ];
    for i in 0..n {
        let x = TAU * i as f64 / n as f64;
        for j in 0..n {
            let y = TAU * j as f64 / n as f64;
            for l in 0..n {
                comps[0][[i, j, l]] = scale * x.cos() * y.sin();
                comps[1][[i, j, l]] = -scale * x.sin() * y.cos();
                comps[2][[i, j, l]] = scale * 0.4 * y.cos();
            }
        }
    }
    comps
}

#[test]
fn lambda_two_rescaling_is_an_exact_symmetry_of_the_scheme() {
    let n = 24;
    let t_end = 2e-3;
    let dt = 2.5e-4;

    let coarse_grid = Grid3::new(n, TAU).unwrap();
    let u0 = VectorField::from_physical(&coarse_grid, datum_arrays(n, 1.0)).unwrap();
    let times = [0.0, 0.5 * t_end, t_end];
    let traj = evolve_ns(&u0, &times, NsOptions::with_dt(dt)).unwrap();

    // lam = 2: same samples doubled on a half-size box, quarter time scale
    let fine_grid = Grid3::new(n, TAU / 2.0).unwrap();
    let v0 = VectorField::from_physical(&fine_grid, datum_arrays(n, 2.0)).unwrap();
    let times_fine: Vec<f64> = times.iter().map(|t| t / 4.0).collect();
    let traj_fine = evolve_ns(&v0, &times_fine, NsOptions::with_dt(dt / 4.0)).unwrap();

    for step in 0..times.len() {
        let a = traj.snapshot(step).to_physical();
        let b = traj_fine.snapshot(step).to_physical();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for c in 0..3 {
            for (u, v) in a.physical()[c].iter().zip(b.physical()[c].iter()) {
                worst = worst.max((2.0 * u - v).abs());
                scale = scale.max((2.0 * u).abs());
            }
        }
        assert!(
            worst <= 1e-6 * scale,
            "t={}: rescaled flows differ by {worst:.3e} against scale {scale:.3e}",
            times[step]
        );
    }
}
