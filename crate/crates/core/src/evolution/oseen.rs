//! Synthesized Oseen tensor and the pointwise decay bound
//! `|S(x, t)| <= C / (|x| + sqrt(t))^3`.

use ndarray::Array3;

use crate::error::CoreError;
use crate::fft;
use crate::grid::Grid3;
use crate::C64;

/// One row of the kernel audit: the snapped sample point, evaluation time,
/// Frobenius magnitude of the kernel matrix, and the scaled ratio
/// `|S| (|x| + sqrt(t))^3` that the decay bound caps.
#[derive(Debug, Clone)]
pub struct OseenSample {
    pub point: [f64; 3],
    pub radius: f64,
    pub t: f64,
    pub magnitude: f64,
    pub ratio: f64,
}

/// Synthesizes the periodic Oseen tensor
/// `S(., t) = F^{-1}[e^{-t |k|^2} (I - k k^T / |k|^2)]`
/// on the grid and samples its Frobenius magnitude at the requested points
/// (snapped to grid nodes, displacements from the origin). The box must
/// dominate both scales: `sqrt(t) <= L / 8` and `|x| <= L / 4`, otherwise
/// wrap-around pollutes the comparison with the whole-space bound.
pub fn oseen_kernel_check(
    grid: &Grid3,
    t_values: &[f64],
    sample_points: &[[f64; 3]],
) -> Result<Vec<OseenSample>, CoreError> {
    if t_values.is_empty() || sample_points.is_empty() {
        return Err(CoreError::InvalidParameter(
            "need at least one time and one sample point".into(),
        ));
    }
    let length = grid.length();
    for &t in t_values {
        if !(t > 0.0 && t.sqrt() <= length / 8.0) {
            return Err(CoreError::InvalidParameter(format!(
                "need 0 < sqrt(t) <= L/8, got t = {t}"
            )));
        }
    }
    let mut snapped = Vec::with_capacity(sample_points.len());
    for x in sample_points {
        let mut idx = [0usize; 3];
        for c in 0..3 {
            if !x[c].is_finite() {
                return Err(CoreError::NonFinite("sample point".into()));
            }
            // nearest grid node of the wrapped coordinate
            let wrapped = x[c].rem_euclid(length);
            idx[c] = (wrapped / grid.spacing()).round() as usize % grid.n();
        }
        let r = grid.distance_to(idx, [0.0, 0.0, 0.0]);
        if r > length / 4.0 {
            return Err(CoreError::InvalidParameter(format!(
                "sample radius {r:.3} beyond L/4 = {:.3}",
                length / 4.0
            )));
        }
        snapped.push((idx, r));
    }

    let n = grid.n();
    let vol = length * length * length;
    let mut out = Vec::with_capacity(t_values.len() * sample_points.len());
    for &t in t_values {
        // magnitude^2 accumulated column by column to keep memory flat
        let mut mag_sq = Array3::<f64>::zeros((n, n, n));
        for b in 0..3 {
            for a in 0..3 {
                let mut spec = Array3::<C64>::zeros((n, n, n));
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
                            let proj = if a == b { 1.0 } else { 0.0 } - k[a] * k[b] / ksq;
                            let w = (-t * ksq).exp() * proj / vol;
                            spec[[i, j, l]] = C64::new(w, 0.0);
                        }
                    }
                }
                let phys = fft::synthesize_real(&spec);
                mag_sq.zip_mut_with(&phys, |m, &v| *m += v * v);
            }
        }
        for &(idx, r) in &snapped {
            let magnitude = mag_sq[idx].sqrt();
            let scale = r + t.sqrt();
            out.push(OseenSample {
                point: [
                    grid.wrapped_delta(grid.coordinate(idx[0]), 0.0),
                    grid.wrapped_delta(grid.coordinate(idx[1]), 0.0),
                    grid.wrapped_delta(grid.coordinate(idx[2]), 0.0),
                ],
                radius: r,
                t,
                magnitude,
                ratio: magnitude * scale * scale * scale,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_scales_self_similarly() {
        // |S(0, t)| ~ t^{-3/2}, so the origin ratio |S| t^{3/2} is flat
        // across a decade
        let grid = Grid3::new(64, 16.0).unwrap();
        let ts = [0.25, 0.5, 1.0, 2.0, 2.5];
        let samples = oseen_kernel_check(&grid, &ts, &[[0.0, 0.0, 0.0]]).unwrap();
        let ratios: Vec<f64> = samples.iter().map(|s| s.magnitude * s.t.powf(1.5)).collect();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
        assert!(hi / lo <= 1.05, "origin scaling drifts: {ratios:?}");
    }

    #[test]
    fn fixed_point_ratio_settles_as_t_shrinks() {
        let grid = Grid3::new(64, 16.0).unwrap();
        let ts = [0.05, 0.1, 0.2];
        let x = [2.0, 0.5, -0.75];
        let samples = oseen_kernel_check(&grid, &ts, &[x]).unwrap();
        // the kernel magnitude itself converges as t -> 0 at fixed x
        let drift = (samples[0].magnitude - samples[1].magnitude).abs() / samples[1].magnitude;
        assert!(drift <= 0.01, "kernel magnitude still moving: {drift:.3e}");
        // and the decay-bound ratio stays within a tight band
        let lo = samples.iter().map(|s| s.ratio).fold(f64::INFINITY, f64::min);
        let hi = samples.iter().map(|s| s.ratio).fold(0.0f64, f64::max);
        assert!(lo > 0.0);
        assert!(hi / lo <= 1.35, "ratio band too wide: [{lo:.4}, {hi:.4}]");
    }

    #[test]
    fn resolution_doubling_is_converged() {
        let coarse = Grid3::new(48, 16.0).unwrap();
        let fine = Grid3::new(96, 16.0).unwrap();
        let x = [2.0, 0.0, 0.0];
        let t = [0.5];
        let a = oseen_kernel_check(&coarse, &t, &[x]).unwrap()[0].magnitude;
        let b = oseen_kernel_check(&fine, &t, &[x]).unwrap()[0].magnitude;
        assert!((a - b).abs() <= 0.01 * b.abs(), "a = {a:.6e}, b = {b:.6e}");
    }

    #[test]
    fn rejects_out_of_range_samples() {
        let grid = Grid3::new(32, 8.0).unwrap();
        // sqrt(t) beyond L/8
        assert!(oseen_kernel_check(&grid, &[1.5], &[[0.0; 3]]).is_err());
        // point beyond L/4
        assert!(oseen_kernel_check(&grid, &[0.5], &[[3.5, 0.0, 0.0]]).is_err());
        assert!(oseen_kernel_check(&grid, &[], &[[0.0; 3]]).is_err());
    }
}
