//! Threshold decomposition of weak-L^p data into a bounded part and a small
//! L^2 remainder, the dimensionally balanced threshold choice, and the
//! scaling audit of both pieces.

use crate::analysis::lp_norm;
use crate::error::CoreError;
use crate::field::VectorField;
use crate::spectral::leray_project;

/// Result of [`lorentz_split`]: `u0 = bar + tilde` exactly, with `bar` the
/// Leray projection of the amplitude-truncated field.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub bar: VectorField,
    pub tilde: VectorField,
    pub threshold: f64,
    /// `max |b|` of the truncated field before projection; at most the
    /// threshold by construction.
    pub truncated_sup: f64,
    /// `max |bar|` after projection; the projection is not sup-contractive,
    /// so this is reported rather than asserted.
    pub bar_sup: f64,
    pub bar_l2_sq: f64,
    pub tilde_l2_sq: f64,
}

/// Splits a solenoidal field at amplitude `threshold`:
/// `b = u0 min(1, N / |u0|)` pointwise, `bar = P b`, `tilde = u0 - bar`.
/// The truncation keeps `|b| <= N` exactly; solenoidality is restored by
/// projection, which costs a bounded (reported) sup-norm inflation.
pub fn lorentz_split(u0: &VectorField, threshold: f64) -> Result<SplitPair, CoreError> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    if !u0.is_solenoidal() {
        return Err(CoreError::InvalidParameter(
            "Lorentz split expects solenoidal data".into(),
        ));
    }
    let phys = u0.to_physical();
    let mag = phys.magnitude();
    let comps = phys.physical();
    let n = u0.grid().n();
    let mut truncated = [comps[0].clone(), comps[1].clone(), comps[2].clone()];
    let mut truncated_sup = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let idx = [i, j, l];
                let m = mag[idx];
                let factor = if m > threshold { threshold / m } else { 1.0 };
                for comp in truncated.iter_mut() {
                    comp[idx] *= factor;
                }
                truncated_sup = truncated_sup.max(m * factor);
            }
        }
    }
    let b = VectorField::from_physical(u0.grid(), truncated)?;
    let bar = leray_project(&b.to_spectral());
    let tilde = u0.to_spectral().sub(&bar)?;
    let bar_sup = bar.max_speed();
    Ok(SplitPair {
        bar_l2_sq: bar.l2_norm_sq(),
        tilde_l2_sq: tilde.l2_norm_sq(),
        bar,
        tilde,
        threshold,
        truncated_sup,
        bar_sup,
    })
}

/// Threshold that balances the two halves of the splitting estimate:
/// `N = t^{(12 - 4 alpha) / (8 (alpha - p))} |u0|^{p / (p - alpha)}`.
/// Requires `p` in `(2, 3]`, `alpha` in `(3, 4]`, positive `t` and norm.
pub fn optimal_threshold(p: f64, alpha: f64, t: f64, u0_norm: f64) -> Result<f64, CoreError> {
    if !(p > 2.0 && p <= 3.0) {
        return Err(CoreError::InvalidParameter(format!("p must lie in (2, 3], got {p}")));
    }
    if !(alpha > 3.0 && alpha <= 4.0) {
        return Err(CoreError::InvalidParameter(format!(
            "alpha must lie in (3, 4], got {alpha}"
        )));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(CoreError::InvalidParameter(format!("t must be positive, got {t}")));
    }
    if !(u0_norm.is_finite() && u0_norm > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "datum norm must be positive, got {u0_norm}"
        )));
    }
    let time_exp = (12.0 - 4.0 * alpha) / (8.0 * (alpha - p));
    let norm_exp = p / (p - alpha);
    Ok(t.powf(time_exp) * u0_norm.powf(norm_exp))
}

/// One row of [`scaling_audit`]: the threshold, both piece norms, and the
/// rescaled products that stay flat exactly when the datum has genuine
/// weak-L^p shape.
#[derive(Debug, Clone)]
pub struct AuditRow {
    pub threshold: f64,
    pub tilde_l2_sq: f64,
    pub bar_alpha: f64,
    /// `|tilde|_2^2 N^{p-2}`
    pub tilde_product: f64,
    /// `|bar|_alpha^alpha N^{p-alpha}`
    pub bar_product: f64,
}

/// Splits `u0` at each threshold and reports how `|tilde|_2^2` and
/// `|bar|_alpha^alpha` scale against the weak-L^p predictions
/// `N^{-(p-2)}` and `N^{alpha-p}`.
pub fn scaling_audit(
    u0: &VectorField,
    p: f64,
    alpha: f64,
    thresholds: &[f64],
) -> Result<Vec<AuditRow>, CoreError> {
    if thresholds.len() < 3 {
        return Err(CoreError::InvalidParameter(
            "scaling audit needs at least three thresholds".into(),
        ));
    }
    if !(p > 2.0 && p <= 3.0) {
        return Err(CoreError::InvalidParameter(format!("p must lie in (2, 3], got {p}")));
    }
    if !(alpha > 3.0 && alpha <= 4.0) {
        return Err(CoreError::InvalidParameter(format!(
            "alpha must lie in (3, 4], got {alpha}"
        )));
    }
    let mut rows = Vec::with_capacity(thresholds.len());
    for &n_thr in thresholds {
        let split = lorentz_split(u0, n_thr)?;
        let bar_alpha = lp_norm(&split.bar, alpha)?.powf(alpha);
        rows.push(AuditRow {
            threshold: n_thr,
            tilde_l2_sq: split.tilde_l2_sq,
            bar_alpha,
            tilde_product: split.tilde_l2_sq * n_thr.powf(p - 2.0),
            bar_product: bar_alpha * n_thr.powf(p - alpha),
        });
    }
    Ok(rows)
}
