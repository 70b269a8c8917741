//! Discrete analogues of the heat-flow estimates in weak Lebesgue spaces:
//! persistence of the weak norm, the L^p smoothing bound against a weak-L^q
//! datum, and the fractional difference bound, each with pinned slack.

use ndarray::Array3;
use nslab_core::analysis::{lp_norm, sobolev_seminorm, weak_lp_norm};
use nslab_core::spectral::heat_semigroup;
use nslab_core::{Grid3, VectorField};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn grid(n: usize) -> Grid3 {
    Grid3::new(n, TAU).unwrap()
}

fn demeaned(g: &Grid3, mut comps: [Array3<f64>; 3]) -> VectorField {
    for c in comps.iter_mut() {
        let mean = c.sum() / c.len() as f64;
        c.mapv_inplace(|v| v - mean);
    }
    VectorField::from_physical(g, comps).unwrap()
}

/// Mollified weak-L^q profile `(r^2 + eps^2)^{-3/(2q)}` as a swirl field
/// around `center`, made exactly mean-free.
fn swirl_mimic(g: &Grid3, q: f64, eps: f64) -> VectorField {
    let n = g.n();
    let center = g.center();
    let mut comps = [
        Array3::<f64>::zeros((n, n, n)),
        Array3::<f64>::zeros((n, n, n)),
        Array3::<f64>::zeros((n, n, n)),
    ];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let dx = g.wrapped_delta(g.coordinate(i), center[0]);
                let dy = g.wrapped_delta(g.coordinate(j), center[1]);
                let dz = g.wrapped_delta(g.coordinate(l), center[2]);
                let prof = (dx * dx + dy * dy + dz * dz + eps * eps).powf(-1.5 / q);
                comps[0][[i, j, l]] = -dy * prof;
                comps[1][[i, j, l]] = dx * prof;
                comps[2][[i, j, l]] = 0.1 * prof;
            }
        }
    }
    demeaned(g, comps)
}

fn gaussian_bump(g: &Grid3, amp: f64, width: f64, center: [f64; 3], demean: bool) -> VectorField {
    let n = g.n();
    let mut comps = [
        Array3::<f64>::zeros((n, n, n)),
        Array3::<f64>::zeros((n, n, n)),
        Array3::<f64>::zeros((n, n, n)),
    ];
    let dir = [0.6, -0.8, 0.2];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let r = g.distance_to([i, j, l], center);
                let v = amp * (-r * r / (2.0 * width * width)).exp();
                for (c, d) in comps.iter_mut().zip(dir) {
                    c[[i, j, l]] = v * d;
                }
            }
        }
    }
    if demean {
        demeaned(g, comps)
    } else {
        VectorField::from_physical(g, comps).unwrap()
    }
}

#[test]
fn weak_norm_persists_under_heat_for_mean_free_data() {
    let g = grid(32);
    let c = g.center();
    let fields: Vec<(VectorField, f64)> = vec![
        (swirl_mimic(&g, 3.0, 0.4), 3.0),
        (swirl_mimic(&g, 2.5, 0.4), 2.5),
        (gaussian_bump(&g, 1.3, 0.45, c, true), 3.0),
    ];
    let t_max = (g.length() / 8.0).powi(2);
    for (f, q) in &fields {
        let base = weak_lp_norm(f, *q).unwrap();
        for t in [1e-4, 1e-3, 1e-2, 0.05, 0.2, t_max] {
            let heated = heat_semigroup(f, t).unwrap();
            let after = weak_lp_norm(&heated, *q).unwrap();
            assert!(
                after <= 1.01 * base,
                "q={q} t={t}: weak norm grew {base:.6e} -> {after:.6e}"
            );
        }
    }
}

#[test]
fn mean_locked_profiles_break_persistence_on_the_torus() {
    // On a finite box the heat flow raises the essential infimum of a
    // positive-mean profile toward its mean, which inflates the bottom
    // levels of lambda d(lambda)^{1/q}. The growth converges to ~11% with
    // resolution, so it is not grid slop; it is why the persistence check
    // above, like the solver itself, insists on mean-free data.
    let g = grid(32);
    let n = g.n();
    let c = g.center();
    let mut comps = [
        Array3::<f64>::zeros((n, n, n)),
        Array3::<f64>::zeros((n, n, n)),
        Array3::<f64>::zeros((n, n, n)),
    ];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let r = g.distance_to([i, j, l], c);
                comps[0][[i, j, l]] = (r * r + 0.16).powf(-0.5);
            }
        }
    }
    let f = VectorField::from_physical(&g, comps).unwrap();
    let base = weak_lp_norm(&f, 3.0).unwrap();
    let mut worst: f64 = 0.0;
    for t in [0.05, 0.2, 0.6] {
        let after = weak_lp_norm(&heat_semigroup(&f, t).unwrap(), 3.0).unwrap();
        worst = worst.max(after / base);
    }
    assert!(worst > 1.05, "expected finite-volume growth, got max ratio {worst:.4}");
    assert!(worst < 1.25, "growth beyond the converged continuum value: {worst:.4}");
}

#[test]
fn lp_smoothing_bound_holds_on_gaussian_profiles() {
    let g = grid(32);
    let l = g.length();
    let centers = [g.center(), [1.1, 2.3, 4.0]];
    let pairs = [(2.0, 3.0), (2.5, 4.0), (2.0, 6.0)];
    let t_max = (l / 8.0).powi(2);
    let mut max_ratio: f64 = 0.0;
    for width in [0.35, 0.5, 0.8] {
        for center in centers {
            let f = gaussian_bump(&g, 1.7, width, center, false);
            for (q, p) in pairs {
                let weak = weak_lp_norm(&f, q).unwrap();
                for k in 0..10 {
                    let t = 1e-3 * (t_max / 1e-3).powf(k as f64 / 9.0);
                    let lhs = lp_norm(&heat_semigroup(&f, t).unwrap(), p).unwrap();
                    let factor = (4.0 * std::f64::consts::PI * t).powf(-1.5 * (1.0 / q - 1.0 / p));
                    let ratio = lhs / (factor * weak);
                    assert!(
                        ratio <= 1.05,
                        "q={q} p={p} w={width} t={t:.4e}: ratio {ratio:.4}"
                    );
                    max_ratio = max_ratio.max(ratio);
                }
            }
        }
    }
    // the bound is genuinely exercised: the (q,p)=(2,3) pair comes within a
    // few percent of saturating it near t ~ 0.17
    assert!(max_ratio >= 0.75, "bound never approached: max ratio {max_ratio:.4}");
}

#[test]
fn fractional_difference_bound_has_constant_one() {
    // mode-level fact: 1 - e^{-x} <= x^s for x >= 0 and s in (0,1]
    for si in 1..=20 {
        let s = si as f64 / 20.0;
        for xi in 0..2000 {
            let x = 10f64.powf(-10.0 + 16.0 * xi as f64 / 1999.0);
            // -expm1(-x) evaluates 1 - e^{-x} without cancellation
            assert!(-(-x).exp_m1() <= x.powf(s) * (1.0 + 1e-14));
        }
    }
    // field-level consequence over 200 seeded rough fields:
    // || e^{tD} f - f ||_2 <= t^{s/2} || |D|^{s/2} f ||_2
    let g = grid(16);
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for trial in 0..200 {
        let mut comps = [
            Array3::<f64>::zeros((n, n, n)),
            Array3::<f64>::zeros((n, n, n)),
            Array3::<f64>::zeros((n, n, n)),
        ];
        for c in comps.iter_mut() {
            for v in c.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
        let f = VectorField::from_physical(&g, comps).unwrap();
        let s = rng.gen_range(0.0..1.0_f64).max(1e-3);
        let t = 10f64.powf(rng.gen_range(-6.0..0.0));
        let heated = heat_semigroup(&f, t).unwrap();
        let diff = heated.sub(&f).unwrap();
        let lhs = diff.l2_norm_sq().sqrt();
        let rhs = t.powf(0.5 * s) * sobolev_seminorm(&f, s).unwrap();
        assert!(
            lhs <= rhs * (1.0 + 1e-12),
            "trial {trial}: s={s:.3} t={t:.3e} lhs={lhs:.6e} rhs={rhs:.6e}"
        );
    }
}
