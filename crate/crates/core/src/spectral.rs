//! Mode-wise operators: Leray projection, heat and Oseen propagators,
//! fractional Laplacian, and the two-thirds dealiasing rule.

use ndarray::Array3;

use crate::error::CoreError;
use crate::field::{Representation, ScalarField, TensorField, VectorField};
use crate::grid::Grid3;
use crate::C64;

/// Per-mode symbol of `e^{t Laplacian} P`: scalar heat multiplier times the
/// solenoidal projection tensor. The projection at mode zero is the identity.
#[derive(Debug, Clone)]
pub struct PropagatorSymbol {
    grid: Grid3,
    t: f64,
}

impl PropagatorSymbol {
    pub fn new(grid: &Grid3, t: f64) -> Result<Self, CoreError> {
        if !(t >= 0.0) {
            return Err(CoreError::InvalidParameter(format!("propagator time {t} must be >= 0")));
        }
        Ok(PropagatorSymbol { grid: grid.clone(), t })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    fn k(&self, m: [i64; 3]) -> [f64; 3] {
        let tau = 2.0 * std::f64::consts::PI / self.grid.length();
        [tau * m[0] as f64, tau * m[1] as f64, tau * m[2] as f64]
    }

    /// Heat multiplier `exp(-|k|^2 t)`, always in `(0, 1]`.
    pub fn multiplier(&self, m: [i64; 3]) -> f64 {
        let k = self.k(m);
        let ksq = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        (-ksq * self.t).exp()
    }

    /// Projection tensor `I - k k^T / |k|^2` (identity at mode zero).
    pub fn projection(&self, m: [i64; 3]) -> [[f64; 3]; 3] {
        let k = self.k(m);
        projection_tensor(k)
    }
}

pub(crate) fn projection_tensor(k: [f64; 3]) -> [[f64; 3]; 3] {
    let ksq = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    let mut p = [[0.0; 3]; 3];
    for i in 0..3 {
        p[i][i] = 1.0;
    }
    if ksq > 0.0 {
        for i in 0..3 {
            for j in 0..3 {
                p[i][j] -= k[i] * k[j] / ksq;
            }
        }
    }
    p
}

/// Removes the gradient part of each mode, leaving `k . u_hat = 0` exactly
/// (up to roundoff). Mode zero passes through unchanged.
pub fn leray_project(field: &VectorField) -> VectorField {
    let mut out = field.to_spectral();
    let grid = out.grid().clone();
    let n = grid.n();
    let [a, b, c] = out.spectral_mut();
    let (af, bf, cf) = (
        a.as_slice_mut().unwrap(),
        b.as_slice_mut().unwrap(),
        c.as_slice_mut().unwrap(),
    );
    let mut idx = 0usize;
    for i in 0..n {
        let ki = grid.wavenumber(i);
        for j in 0..n {
            let kj = grid.wavenumber(j);
            for l in 0..n {
                let kl = grid.wavenumber(l);
                let ksq = ki * ki + kj * kj + kl * kl;
                if ksq > 0.0 {
                    let dot = af[idx] * ki + bf[idx] * kj + cf[idx] * kl;
                    let scale = dot / ksq;
                    af[idx] -= scale * ki;
                    bf[idx] -= scale * kj;
                    cf[idx] -= scale * kl;
                }
                idx += 1;
            }
        }
    }
    out
}

/// Applies `exp(t Laplacian)` mode-wise. Rejects negative `t`.
pub fn heat_semigroup(field: &VectorField, t: f64) -> Result<VectorField, CoreError> {
    if !(t >= 0.0) {
        return Err(CoreError::InvalidParameter(format!("heat time {t} must be >= 0")));
    }
    let mut out = field.to_spectral();
    let grid = out.grid().clone();
    apply_radial_multiplier(&grid, out.spectral_mut(), |ksq| (-ksq * t).exp());
    Ok(out)
}

/// Applies `|k|^s` mode-wise (the fractional Laplacian of order `s/2` in the
/// usual convention `Lambda^s`). `s = 0` is the identity; positive orders
/// annihilate the mean; negative orders require a mean-free field.
pub fn fractional_laplacian(field: &VectorField, s: f64) -> Result<VectorField, CoreError> {
    if !s.is_finite() {
        return Err(CoreError::InvalidParameter(format!("fractional order {s}")));
    }
    if s == 0.0 {
        return Ok(field.to_spectral());
    }
    let spec = field.to_spectral();
    if s < 0.0 {
        let mean = spec.mean();
        let mag = (mean[0] * mean[0] + mean[1] * mean[1] + mean[2] * mean[2]).sqrt();
        let scale = spec
            .spectral()
            .iter()
            .map(|a| a.iter().fold(0.0f64, |m, z| m.max(z.norm())))
            .fold(0.0f64, f64::max);
        if mag > 1e-12 * scale.max(1e-300) {
            return Err(CoreError::MeanNotZero { mean: mag });
        }
    }
    let mut out = spec;
    let grid = out.grid().clone();
    apply_radial_multiplier(&grid, out.spectral_mut(), |ksq| {
        if ksq == 0.0 {
            0.0
        } else {
            ksq.powf(0.5 * s)
        }
    });
    Ok(out)
}

fn apply_radial_multiplier(
    grid: &Grid3,
    comps: &mut [Array3<C64>; 3],
    f: impl Fn(f64) -> f64,
) {
    let n = grid.n();
    // |k|^2 only depends on the three axis values, so precompute per axis.
    let ksq_axis: Vec<f64> = (0..n).map(|j| grid.wavenumber(j).powi(2)).collect();
    let [a, b, c] = comps;
    let (af, bf, cf) = (
        a.as_slice_mut().unwrap(),
        b.as_slice_mut().unwrap(),
        c.as_slice_mut().unwrap(),
    );
    let mut idx = 0usize;
    for i in 0..n {
        for j in 0..n {
            let kij = ksq_axis[i] + ksq_axis[j];
            for l in 0..n {
                let m = f(kij + ksq_axis[l]);
                af[idx] *= m;
                bf[idx] *= m;
                cf[idx] *= m;
                idx += 1;
            }
        }
    }
}

/// Zeroes every coefficient whose integer mode exceeds `n/3` in magnitude on
/// any axis (the two-thirds rule applied after nonlinear products).
pub fn dealias(field: &VectorField) -> VectorField {
    let mut out = field.to_spectral();
    let grid = out.grid().clone();
    for comp in out.spectral_mut().iter_mut() {
        dealias_array(&grid, comp);
    }
    out
}

/// In-place dealiasing of one spectral component.
pub fn dealias_array(grid: &Grid3, a: &mut Array3<C64>) {
    let n = grid.n();
    let cap = grid.dealias_cap();
    let keep: Vec<bool> = (0..n).map(|j| grid.mode(j).abs() <= cap).collect();
    let flat = a.as_slice_mut().unwrap();
    let mut idx = 0usize;
    for i in 0..n {
        let ki = keep[i];
        for j in 0..n {
            let kij = ki && keep[j];
            for l in 0..n {
                if !(kij && keep[l]) {
                    flat[idx] = C64::new(0.0, 0.0);
                }
                idx += 1;
            }
        }
    }
}

/// Divergence of a rank-2 tensor: `(div T)_i = i k_j T_hat_{ij}` per mode.
pub fn divergence(t: &TensorField) -> VectorField {
    let grid = t.grid().clone();
    let n = grid.n();
    let mut out = VectorField::zeros(&grid, Representation::Spectral);
    {
        let comps = out.spectral_mut();
        for i in 0..3 {
            let rows = [t.component(i, 0), t.component(i, 1), t.component(i, 2)];
            let (r0, r1, r2) = (
                rows[0].as_slice().unwrap(),
                rows[1].as_slice().unwrap(),
                rows[2].as_slice().unwrap(),
            );
            let dst = comps[i].as_slice_mut().unwrap();
            let mut idx = 0usize;
            for a in 0..n {
                let ka = grid.wavenumber(a);
                for b in 0..n {
                    let kb = grid.wavenumber(b);
                    for c in 0..n {
                        let kc = grid.wavenumber(c);
                        let dot = r0[idx] * ka + r1[idx] * kb + r2[idx] * kc;
                        dst[idx] = C64::new(-dot.im, dot.re); // multiply by i
                        idx += 1;
                    }
                }
            }
        }
    }
    out
}

/// Oseen propagator applied to a stress tensor:
/// `e^{t Laplacian} P (div T)`, the kernel of the Duhamel integrand.
pub fn oseen_propagate(t_field: &TensorField, t: f64) -> Result<VectorField, CoreError> {
    heat_semigroup(&leray_project(&divergence(t_field)), t)
}

/// Spectral gradient of a scalar field, returned as physical samples.
pub fn gradient(f: &ScalarField) -> VectorField {
    let grid = f.grid().clone();
    let spec = crate::fft::analyze_real(f.data());
    let n = grid.n();
    let mut out = VectorField::zeros(&grid, Representation::Spectral);
    {
        let comps = out.spectral_mut();
        let src = spec.as_slice().unwrap();
        for (axis, comp) in comps.iter_mut().enumerate() {
            let dst = comp.as_slice_mut().unwrap();
            let mut idx = 0usize;
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let k = match axis {
                            0 => grid.wavenumber(a),
                            1 => grid.wavenumber(b),
                            _ => grid.wavenumber(c),
                        };
                        let v = src[idx] * k;
                        dst[idx] = C64::new(-v.im, v.re);
                        idx += 1;
                    }
                }
            }
        }
    }
    out.to_physical()
}

/// Spectral Laplacian of a scalar field, returned as physical samples.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let grid = f.grid().clone();
    let mut spec = crate::fft::analyze_real(f.data());
    let n = grid.n();
    {
        let flat = spec.as_slice_mut().unwrap();
        let ksq_axis: Vec<f64> = (0..n).map(|j| grid.wavenumber(j).powi(2)).collect();
        let mut idx = 0usize;
        for a in 0..n {
            for b in 0..n {
                let kab = ksq_axis[a] + ksq_axis[b];
                for c in 0..n {
                    flat[idx] *= -(kab + ksq_axis[c]);
                    idx += 1;
                }
            }
        }
    }
    ScalarField::new(&grid, crate::fft::synthesize_real(&spec)).expect("laplacian stays finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Representation;

    fn grid() -> Grid3 {
        Grid3::new(12, 2.0 * std::f64::consts::PI).unwrap()
    }

    fn random_field(g: &Grid3, seed: f64) -> VectorField {
        let n = g.n();
        let mut comps = [
            Array3::zeros((n, n, n)),
            Array3::zeros((n, n, n)),
            Array3::zeros((n, n, n)),
        ];
        let mut s = seed;
        for a in comps.iter_mut() {
            for v in a.iter_mut() {
                s = (s * 743.0 + 0.2113).fract();
                *v = s - 0.5;
            }
        }
        VectorField::from_physical(g, comps).unwrap()
    }

    #[test]
    fn leray_is_idempotent_and_annihilates_gradients() {
        let g = grid();
        let f = random_field(&g, 0.42);
        let once = leray_project(&f);
        let twice = leray_project(&once);
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for c in 0..3 {
            for (x, y) in once.spectral()[c].iter().zip(twice.spectral()[c].iter()) {
                err = err.max((x - y).norm());
                scale = scale.max(x.norm());
            }
        }
        assert!(err <= 1e-13 * scale.max(1.0), "idempotence error {err}");
        assert!(once.is_solenoidal());
    }

    #[test]
    fn leray_keeps_mode_zero() {
        let g = grid();
        let mut f = VectorField::zeros(&g, Representation::Spectral);
        f.set_mode([0, 0, 0], 0, C64::new(0.7, 0.0));
        f.set_mode([0, 0, 0], 2, C64::new(-0.2, 0.0));
        let p = leray_project(&f);
        assert_eq!(p.mode([0, 0, 0], 0), C64::new(0.7, 0.0));
        assert_eq!(p.mode([0, 0, 0], 2), C64::new(-0.2, 0.0));
    }

    #[test]
    fn leray_single_mode_closed_form() {
        // mode k = (kappa, 0, 0), coefficients (a, b, 0) -> (0, b, 0)
        let g = grid();
        let mut f = VectorField::zeros(&g, Representation::Spectral);
        f.set_mode([3, 0, 0], 0, C64::new(1.3, -0.4));
        f.set_mode([3, 0, 0], 1, C64::new(0.2, 0.9));
        let p = leray_project(&f);
        assert!(p.mode([3, 0, 0], 0).norm() <= 1e-14);
        assert!((p.mode([3, 0, 0], 1) - C64::new(0.2, 0.9)).norm() <= 1e-14);
        assert!(p.mode([3, 0, 0], 2).norm() <= 1e-14);
    }

    #[test]
    fn heat_semigroup_law() {
        let g = grid();
        let f = random_field(&g, 0.97);
        let (s, t) = (0.13, 0.041);
        let combined = heat_semigroup(&f, s + t).unwrap();
        let stepped = heat_semigroup(&heat_semigroup(&f, s).unwrap(), t).unwrap();
        for c in 0..3 {
            for (x, y) in combined.spectral()[c].iter().zip(stepped.spectral()[c].iter()) {
                assert!((x - y).norm() <= 1e-13, "semigroup violation {x} vs {y}");
            }
        }
    }

    #[test]
    fn heat_identity_at_zero_and_contracts() {
        let g = grid();
        let f = random_field(&g, 0.3).to_spectral();
        let h0 = heat_semigroup(&f, 0.0).unwrap();
        for c in 0..3 {
            for (x, y) in f.spectral()[c].iter().zip(h0.spectral()[c].iter()) {
                assert_eq!(x, y);
            }
        }
        let h = heat_semigroup(&f, 0.37).unwrap();
        assert!(h.l2_norm_sq() <= f.l2_norm_sq());
        assert!(heat_semigroup(&f, -0.1).is_err());
    }

    #[test]
    fn fractional_laplacian_cases() {
        let g = grid();
        let f = random_field(&g, 0.55);
        // identity at s = 0
        let id = fractional_laplacian(&f, 0.0).unwrap();
        let fs = f.to_spectral();
        for c in 0..3 {
            for (x, y) in fs.spectral()[c].iter().zip(id.spectral()[c].iter()) {
                assert_eq!(x, y);
            }
        }
        // negative order rejects non-zero mean
        let mut with_mean = fs.clone();
        with_mean.set_mode([0, 0, 0], 0, C64::new(1.0, 0.0));
        assert!(fractional_laplacian(&with_mean, -1.0).is_err());
        // s = 2 equals minus Laplacian: single mode scales by |k|^2
        let mut single = VectorField::zeros(&g, Representation::Spectral);
        single.set_mode([0, 2, 0], 1, C64::new(1.0, 0.0));
        let lam = fractional_laplacian(&single, 2.0).unwrap();
        let expect = (2.0f64).powi(2); // k = 2 on the 2 pi box
        assert!((lam.mode([0, 2, 0], 1).re - expect).abs() < 1e-12);
    }

    #[test]
    fn dealias_rule_on_twelve() {
        let g = grid(); // n = 12, cap = 4
        let mut f = VectorField::zeros(&g, Representation::Spectral);
        f.set_mode([5, 0, 0], 0, C64::new(1.0, 0.0));
        f.set_mode([4, 0, 0], 1, C64::new(1.0, 0.0));
        f.set_mode([0, -5, 2], 2, C64::new(1.0, 0.0));
        let d = dealias(&f);
        assert_eq!(d.mode([5, 0, 0], 0), C64::new(0.0, 0.0));
        assert_eq!(d.mode([4, 0, 0], 1), C64::new(1.0, 0.0));
        assert_eq!(d.mode([0, -5, 2], 2), C64::new(0.0, 0.0));
    }

    #[test]
    fn dealias_is_idempotent() {
        let g = grid();
        let f = random_field(&g, 0.8);
        let once = dealias(&f);
        let twice = dealias(&once);
        for c in 0..3 {
            for (x, y) in once.spectral()[c].iter().zip(twice.spectral()[c].iter()) {
                assert_eq!(x, y);
            }
        }
    }

    #[test]
    fn oseen_propagate_matches_composition() {
        let g = grid();
        let f = random_field(&g, 0.21);
        let h = random_field(&g, 0.64);
        let t_field = TensorField::outer_product(&f, &h, true).unwrap();
        let fused = oseen_propagate(&t_field, 0.05).unwrap();
        let composed = heat_semigroup(&leray_project(&divergence(&t_field)), 0.05).unwrap();
        let mut err = 0.0f64;
        for c in 0..3 {
            for (x, y) in fused.spectral()[c].iter().zip(composed.spectral()[c].iter()) {
                err = err.max((x - y).norm());
            }
        }
        assert!(err <= 1e-13, "oseen composition error {err}");
        assert!(fused.is_solenoidal());
    }

    #[test]
    fn propagator_symbol_invariants() {
        let g = grid();
        let sym = PropagatorSymbol::new(&g, 0.3).unwrap();
        for m in [[0i64, 0, 0], [1, 0, 0], [2, -3, 1], [-4, 4, 5]] {
            let mult = sym.multiplier(m);
            assert!(mult > 0.0 && mult <= 1.0);
            let p = sym.projection(m);
            // symmetric and idempotent per mode
            for i in 0..3 {
                for j in 0..3 {
                    assert!((p[i][j] - p[j][i]).abs() <= 1e-14);
                    let mut pp = 0.0;
                    for l in 0..3 {
                        pp += p[i][l] * p[l][j];
                    }
                    assert!((pp - p[i][j]).abs() <= 1e-14);
                }
            }
        }
        assert!(PropagatorSymbol::new(&g, -1.0).is_err());
    }

    #[test]
    fn gradient_of_cosine() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |idx| (g.coordinate(idx[0])).cos());
        let grad = gradient(&f);
        let gp = grad.physical();
        for i in 0..g.n() {
            let want = -(g.coordinate(i)).sin();
            assert!((gp[0][[i, 3, 5]] - want).abs() < 1e-12);
            assert!(gp[1][[i, 3, 5]].abs() < 1e-12);
        }
    }
}
