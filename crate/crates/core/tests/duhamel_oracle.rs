//! Closed-form oracles for the Duhamel bilinear operator, worked out by hand
//! for a two-mode datum whose interaction spectrum can be followed exactly.

use ndarray::Array3;
use nslab_core::evolution::{duhamel_bilinear, evolve_heat, picard_iterates, FlowTag, Trajectory};
use nslab_core::{C64, Grid3, VectorField};

fn grid() -> Grid3 {
    Grid3::new(16, 2.0 * std::f64::consts::PI).unwrap()
}

/// `u0 = a sin(x1) e2 + b cos(x1 + x2) e3`, solenoidal, with non-orthogonal
/// interacting wavevectors so the Duhamel integrand genuinely varies in `s`.
fn skew_datum(g: &Grid3, a: f64, b: f64) -> VectorField {
    let n = g.n();
    let mut comps = [
        Array3::<f64>::zeros((n, n, n)),
        Array3::<f64>::zeros((n, n, n)),
        Array3::<f64>::zeros((n, n, n)),
    ];
    for i in 0..n {
        let x = g.coordinate(i);
        for j in 0..n {
            let y = g.coordinate(j);
            for l in 0..n {
                comps[1][[i, j, l]] = a * x.sin();
                comps[2][[i, j, l]] = b * (x + y).cos();
            }
        }
    }
    VectorField::from_physical(g, comps).unwrap()
}

/// `u0 = a sin(x1) e2 + b sin(x2) e3`: orthogonal wavevectors, resonant
/// interaction, closed form `B(t) = -ab t e^{-2t} sin(x1) cos(x2) e3`.
fn orthogonal_datum(g: &Grid3, a: f64, b: f64) -> VectorField {
    let n = g.n();
    let mut comps = [
        Array3::<f64>::zeros((n, n, n)),
        Array3::<f64>::zeros((n, n, n)),
        Array3::<f64>::zeros((n, n, n)),
    ];
    for i in 0..n {
        let x = g.coordinate(i);
        for j in 0..n {
            let y = g.coordinate(j);
            for l in 0..n {
                comps[1][[i, j, l]] = a * x.sin();
                comps[2][[i, j, l]] = b * y.sin();
            }
        }
    }
    VectorField::from_physical(g, comps).unwrap()
}

fn uniform_times(t_end: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| t_end * i as f64 / (count - 1) as f64).collect()
}

#[test]
fn resonant_pair_matches_closed_form_exactly() {
    // orthogonal wavevectors make the spectral integrand constant in s, so
    // the quadrature is exact at any node count and the full field must
    // match -ab t e^{-2t} sin(x1) cos(x2) e3 to rounding
    let g = grid();
    let (a, b) = (0.8, 1.3);
    let u0 = orthogonal_datum(&g, a, b);
    let t = 0.35;
    let times = uniform_times(t, 17);
    let p0 = evolve_heat(&u0, &times).unwrap();
    let bb = duhamel_bilinear(&p0, &p0, t, false).unwrap();
    let amp = -a * b * t * (-2.0 * t).exp();
    let n = g.n();
    let phys = bb.to_physical();
    let mut worst = 0.0f64;
    for i in 0..n {
        let x = g.coordinate(i);
        for j in 0..n {
            let y = g.coordinate(j);
            for l in 0..n {
                let idx = [i, j, l];
                let expect = amp * x.sin() * y.cos();
                worst = worst
                    .max((phys.physical()[0][idx]).abs())
                    .max((phys.physical()[1][idx]).abs())
                    .max((phys.physical()[2][idx] - expect).abs());
            }
        }
    }
    assert!(worst <= 1e-12 * amp.abs(), "worst pointwise deviation {worst:.3e}");
}

#[test]
fn skew_pair_matches_closed_form_coefficients() {
    // hand computation for a sin(x1) e2 + b cos(x1+x2) e3:
    //   B_hat_3(t) at ( 2, 1, 0) = -(ab/8) (e^{-3t} - e^{-5t})
    //   B_hat_3(t) at ( 0,-1, 0) =  (ab/8) (e^{-t}  - e^{-3t})
    // all other interaction modes project to zero
    let g = grid();
    let (a, b) = (1.1, 0.7);
    let u0 = skew_datum(&g, a, b);
    let t = 0.3;
    let times = uniform_times(t, 257);
    let p0 = evolve_heat(&u0, &times).unwrap();
    let bb = duhamel_bilinear(&p0, &p0, t, false).unwrap();
    let c = a * b / 8.0;
    let hi = -c * ((-3.0 * t).exp() - (-5.0 * t).exp());
    let lo = c * ((-t).exp() - (-3.0 * t).exp());
    let got_hi = bb.mode([2, 1, 0], 2);
    let got_lo = bb.mode([0, -1, 0], 2);
    let scale = c.abs();
    assert!(
        (got_hi - C64::new(hi, 0.0)).norm() <= 1e-9 * scale,
        "mode (2,1,0): got {got_hi}, want {hi:.6e}"
    );
    assert!(
        (got_lo - C64::new(lo, 0.0)).norm() <= 1e-9 * scale,
        "mode (0,-1,0): got {got_lo}, want {lo:.6e}"
    );
    // conjugate symmetry at the mirrored modes
    let got_hi_conj = bb.mode([-2, -1, 0], 2);
    assert!((got_hi_conj - got_hi.conj()).norm() <= 1e-14 * scale.max(1e-30));
    // the velocity components orthogonal to e3 stay empty
    for m in [[2i64, 1, 0], [0, -1, 0], [2, 2, 0], [2, 0, 0]] {
        assert!(bb.mode(m, 0).norm() <= 1e-13 * scale);
        assert!(bb.mode(m, 1).norm() <= 1e-13 * scale);
    }
}

#[test]
fn second_iterate_correction_is_cubic_in_the_datum() {
    let g = grid();
    let times = uniform_times(0.2, 33);
    let norm_at = |eps: f64| {
        let u0 = skew_datum(&g, eps, eps);
        let iterates = picard_iterates(&u0, 2, &times).unwrap();
        let j = times.len() - 1;
        let diff = iterates[2].snapshot(j).sub(iterates[1].snapshot(j)).unwrap();
        diff.l2_norm_sq().sqrt()
    };
    // P2 - P1 = B(P1,P1) - B(P0,P0) is cubic at leading order; measure the
    // order across a decade of amplitudes
    let low = norm_at(0.02);
    let high = norm_at(0.2);
    let order = (high / low).log10();
    assert!(order >= 2.7, "expected near-cubic scaling, got order {order:.3}");
    assert!(order <= 3.3, "scaling order suspiciously high: {order:.3}");
}

#[test]
fn iterates_inherit_schedule_and_tags() {
    let g = grid();
    let times = uniform_times(0.1, 17);
    let u0 = skew_datum(&g, 0.5, 0.5);
    let iterates = picard_iterates(&u0, 3, &times).unwrap();
    assert_eq!(iterates.len(), 4);
    for (k, traj) in iterates.iter().enumerate() {
        assert_eq!(traj.tag(), FlowTag::Picard(k as u8));
        assert_eq!(traj.times(), &times[..]);
    }
    // zero datum collapses every iterate to zero
    let z = VectorField::zeros(&g, nslab_core::Representation::Spectral);
    let zi = picard_iterates(&z, 2, &times).unwrap();
    for traj in &zi {
        for snap in traj.snapshots() {
            assert_eq!(snap.l2_norm_sq(), 0.0);
        }
    }
    let _: &Trajectory = &zi[0];
}
