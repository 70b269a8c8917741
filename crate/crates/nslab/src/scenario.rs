//! Scenario runners. Each runner measures one statement of the weak-L^p
//! theory on concrete data, records every number it used, and renders a
//! verdict as explicit rules. Slack defaults are pinned here; configs may
//! widen or narrow them, and the report echoes whichever value applied.

use crate::config::{ExperimentConfig, Scenario, Spacing};
use crate::datum::{make_datum, Datum, DatumSpec};
use crate::error::LabError;
use crate::report::{NamedFit, Report, RuleOutcome, RuleStatus, Series};
use nslab_core::analysis::{
    rate_fit, sigma_exponents, sobolev_seminorm, spacetime_exponent, spacetime_norm,
    sup_norm_in_ball, weak_lp_norm,
};
use nslab_core::calderon::{lorentz_split, optimal_threshold, scaling_audit};
use nslab_core::error::CoreError;
use nslab_core::evolution::{
    calibrate_ladyzhenskaya, evolve_heat, evolve_ns, expansion_terms, local_energy_residual,
    oseen_kernel_check, perturbed_energy_check, radial_bump, FlowTag, NsOptions, SpaceTimeTest,
    Trajectory,
};
use nslab_core::spectral::{dealias, heat_semigroup};
use nslab_core::{Grid3, ScalarField, VectorField, C64};

/// Slack on fitted exponents for the global statements (short-time decay,
/// long-time envelope, space-time integrability).
const EXPONENT_SLACK: f64 = 0.10;
/// Slack on fitted exponents for the localized statements (expansion error,
/// pair separation); sup norms in balls carry more quadrature noise.
const LOCALIZED_SLACK: f64 = 0.15;
/// Default bound on the initial agreement gap of a pair datum, relative to
/// its amplitude. Band-limited data cannot agree exactly on a ball, so runs
/// at desk resolutions must override this with the measured leak scale.
const PAIR_LEAK_DEFAULT: f64 = 1e-8;
/// Default relative tolerance on the local energy residual.
const RESIDUAL_REL_DEFAULT: f64 = 1e-5;
/// Default cap on the per-decade spread of the scaled Oseen kernel ratio.
const RATIO_CAP_DEFAULT: f64 = 3.0;
/// Default slack on the fractional heat ratio, which is exact up to
/// round-off.
const HEAT_RATIO_SLACK_DEFAULT: f64 = 1e-12;
/// The weak norm of mean-free data never grows under heat by more than this
/// factor on the grids the lab runs at.
const WEAK_PERSISTENCE_CAP: f64 = 1.01;
/// Safety factor on the empirically calibrated Ladyzhenskaya constant.
const CALIBRATION_MARGIN: f64 = 1.5;
/// A series whose values all sit below this multiple of its natural scale
/// carries no signal worth fitting.
const DEGENERATE_FLOOR: f64 = 1e-24;

/// Runs the configured scenario and returns the full measurement report.
/// Evolution failures (CFL violation, energy blow-up) become failed rules
/// with the diagnostic attached, so a report is still produced.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, LabError> {
    config.validate()?;
    let grid = Grid3::new(config.grid.n, config.grid.length)?;
    let spec = DatumSpec::from_config(&config.datum, config.seed);
    if config.scenario != Scenario::Oseen {
        spec.validate(&grid)?;
    }
    let mut report = Report::new(config);
    match config.scenario {
        Scenario::Decay => run_decay(config, &grid, &spec, &mut report)?,
        Scenario::LongTime => run_long_time(config, &grid, &spec, &mut report)?,
        Scenario::Spacetime => run_spacetime(config, &grid, &spec, &mut report)?,
        Scenario::Expansion => run_expansion(config, &grid, &spec, &mut report)?,
        Scenario::Separation => run_separation(config, &grid, &spec, &mut report)?,
        Scenario::HeatLemma => run_heat_lemma(config, &grid, &spec, &mut report)?,
        Scenario::Splitting => run_splitting(config, &grid, &spec, &mut report)?,
        Scenario::Oseen => run_oseen(config, &grid, &mut report)?,
        Scenario::Lei => run_lei(config, &grid, &spec, &mut report)?,
        Scenario::TimeHolder => run_time_holder(config, &grid, &spec, &mut report)?,
    }
    Ok(report)
}

fn single_datum(grid: &Grid3, spec: &DatumSpec) -> Result<VectorField, LabError> {
    match make_datum(spec, grid)? {
        Datum::Single(u) => Ok(u),
        Datum::Pair { .. } => Err(LabError::Datum(
            "this scenario needs a single datum, but the config builds a pair".into(),
        )),
    }
}

/// Runs the Navier-Stokes integrator, converting CFL violations and energy
/// blow-ups into a failed `evolution completed` rule instead of an error.
fn evolve_reported(
    u0: &VectorField,
    times: &[f64],
    dt: f64,
    label: &str,
    report: &mut Report,
) -> Result<Option<Trajectory>, LabError> {
    match evolve_ns(u0, times, NsOptions::with_dt(dt)) {
        Ok(traj) => Ok(Some(traj)),
        Err(e @ (CoreError::CflViolation { .. } | CoreError::BlowUp { .. })) => {
            report.rules.push(
                RuleOutcome::new(format!("evolution completed ({label})"), RuleStatus::Fail)
                    .note(e.to_string()),
            );
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn is_degenerate(values: &[f64], scale: f64) -> bool {
    values.iter().all(|v| v.abs() <= DEGENERATE_FLOOR * scale.max(f64::MIN_POSITIVE))
}

fn exponent_rule(
    report: &mut Report,
    name: &str,
    fit_name: &str,
    times: &[f64],
    values: &[f64],
    window: (f64, f64),
    target: f64,
    slack: f64,
    scale: f64,
) -> Result<(), LabError> {
    if is_degenerate(values, scale) {
        report.rules.push(
            RuleOutcome::new(name, RuleStatus::Degenerate)
                .note("series has no signal above round-off; nothing to fit"),
        );
        return Ok(());
    }
    let fit = rate_fit(times, values, window)?;
    report
        .fits
        .push(NamedFit::from_fit(fit_name, &fit).against(target, slack));
    let status = if fit.slope >= target - slack {
        RuleStatus::Pass
    } else {
        RuleStatus::Fail
    };
    report.rules.push(
        RuleOutcome::new(name, status)
            .measured(fit.slope)
            .target(target)
            .tolerance(slack)
            .window(window),
    );
    Ok(())
}

/// Short-time strong-convergence rate: `|u(t) - e^{t lap} u0|_2^2` must
/// vanish at least like `t^{sigma(p)}`.
fn run_decay(
    config: &ExperimentConfig,
    grid: &Grid3,
    spec: &DatumSpec,
    report: &mut Report,
) -> Result<(), LabError> {
    let times = config.schedule()?.times_with_origin();
    let u0 = single_datum(grid, spec)?;
    let sig = sigma_exponents(spec.p)?;
    report.quantity("sigma", sig.sigma);
    report.quantity("initial_weak_norm", weak_lp_norm(&u0, spec.p)?);
    let ns = match evolve_reported(&u0, &times, config.dt()?, "flow", report)? {
        Some(t) => t,
        None => return Ok(()),
    };
    let heat = evolve_heat(&u0, &times)?;
    let mut err = Vec::with_capacity(times.len());
    for j in 0..times.len() {
        err.push(ns.snapshot(j).sub(heat.snapshot(j))?.l2_norm_sq());
    }
    report.series.push(Series::new("error_l2_sq", times.clone(), err.clone()));
    let slack = config.tolerances.exponent_slack.unwrap_or(EXPONENT_SLACK);
    exponent_rule(
        report,
        "caloric error exponent at least sigma",
        "error_l2_sq",
        &times,
        &err,
        config.fit_window()?,
        sig.sigma,
        slack,
        u0.l2_norm_sq(),
    )
}

/// Late-window energy envelope: the decay exponent of `|u(t)|_2^2` must be
/// at least `(p - 2) / 2`. On a periodic box the spectral gap makes the
/// decay exponential, so this one-sided envelope holds with a wide margin.
fn run_long_time(
    config: &ExperimentConfig,
    grid: &Grid3,
    spec: &DatumSpec,
    report: &mut Report,
) -> Result<(), LabError> {
    let times = config.schedule()?.times_with_origin();
    let u0 = single_datum(grid, spec)?;
    let sig = sigma_exponents(spec.p)?;
    report.quantity("envelope_exponent", sig.long_time);
    let ns = match evolve_reported(&u0, &times, config.dt()?, "flow", report)? {
        Some(t) => t,
        None => return Ok(()),
    };
    let mut energy = Vec::with_capacity(times.len());
    let mut weak = Vec::with_capacity(times.len());
    for snap in ns.snapshots() {
        energy.push(snap.l2_norm_sq());
        weak.push(weak_lp_norm(snap, spec.p)?);
    }
    report.series.push(Series::new("energy", times.clone(), energy.clone()));
    report.series.push(Series::new("weak_norm", times.clone(), weak));
    let window = config.fit_window()?;
    let scale = u0.l2_norm_sq();
    if is_degenerate(&energy, scale) {
        report.rules.push(
            RuleOutcome::new("energy decay exponent at least (p - 2) / 2", RuleStatus::Degenerate)
                .note("energy series has no signal above round-off"),
        );
        return Ok(());
    }
    let fit = rate_fit(&times, &energy, window)?;
    report
        .fits
        .push(NamedFit::from_fit("energy", &fit).against(-sig.long_time, 0.0));
    let slack = config.tolerances.exponent_slack.unwrap_or(EXPONENT_SLACK);
    let decay = -fit.slope;
    let status = if decay >= sig.long_time - slack {
        RuleStatus::Pass
    } else {
        RuleStatus::Fail
    };
    report.rules.push(
        RuleOutcome::new("energy decay exponent at least (p - 2) / 2", status)
            .measured(decay)
            .target(sig.long_time)
            .tolerance(slack)
            .window(window)
            .note("one-sided envelope; the box spectral gap drives exponential decay"),
    );
    Ok(())
}

/// Space-time integrability of the caloric error: with `r = 2q / (2q - 3)`,
/// `|u - e^{t lap} u0|_{L^r(0,T; L^q)}` must vanish at least like
/// `T^{sigma(p)}`.
fn run_spacetime(
    config: &ExperimentConfig,
    grid: &Grid3,
    spec: &DatumSpec,
    report: &mut Report,
) -> Result<(), LabError> {
    let times = config.schedule()?.times_with_origin();
    let q = config.exponents.q.unwrap_or(2.0);
    let r = spacetime_exponent(q)?;
    let sig = sigma_exponents(spec.p)?;
    report.quantity("q", q);
    report.quantity("r", r);
    report.quantity("sigma", sig.sigma);
    let u0 = single_datum(grid, spec)?;
    let ns = match evolve_reported(&u0, &times, config.dt()?, "flow", report)? {
        Some(t) => t,
        None => return Ok(()),
    };
    let heat = evolve_heat(&u0, &times)?;
    let mut diffs = Vec::with_capacity(times.len());
    for j in 0..times.len() {
        diffs.push(ns.snapshot(j).sub(heat.snapshot(j))?);
    }
    let mut horizons = Vec::new();
    let mut norms = Vec::new();
    for j in 1..times.len() {
        let sub = Trajectory::new(
            FlowTag::Derived,
            times[..=j].to_vec(),
            diffs[..=j].to_vec(),
        )?;
        horizons.push(times[j]);
        norms.push(spacetime_norm(&sub, r, q)?);
    }
    report
        .series
        .push(Series::new("spacetime_error", horizons.clone(), norms.clone()));
    let slack = config.tolerances.exponent_slack.unwrap_or(EXPONENT_SLACK);
    exponent_rule(
        report,
        "space-time error exponent at least sigma",
        "spacetime_error",
        &horizons,
        &norms,
        config.fit_window()?,
        sig.sigma,
        slack,
        u0.l2_norm_sq().sqrt(),
    )
}

/// Localized second-order expansion: inside the ball `Omega`, the flow must
/// track `P1 + localized P2` to order `t^{1 + sigma - delta}` in sup norm.
fn run_expansion(
    config: &ExperimentConfig,
    grid: &Grid3,
    spec: &DatumSpec,
    report: &mut Report,
) -> Result<(), LabError> {
    let exp = config
        .expansion
        .as_ref()
        .ok_or_else(|| LabError::Config("expansion scenario needs an expansion section".into()))?;
    let times = config.schedule()?.times_with_origin();
    let center = grid.center();
    let omega = exp.omega_radius;
    let support = exp.support_radius.unwrap_or((2.0 * omega).min(0.48 * grid.length()));
    let chi_in = exp.chi_r_in.unwrap_or(1.2 * omega);
    let chi_out = exp.chi_r_out.unwrap_or(support);
    if !(omega < chi_in && chi_in < chi_out && chi_out <= support) {
        return Err(LabError::Config(format!(
            "cutoff radii must satisfy omega < chi_r_in < chi_r_out <= support, got \
             {omega}, {chi_in}, {chi_out}, {support}"
        )));
    }
    let chi = ScalarField::from_fn(grid, |idx| {
        radial_bump(grid.distance_to(idx, center), chi_in, chi_out)
    });
    let sig = sigma_exponents(spec.p)?;
    let delta = config.exponents.delta.unwrap_or(sig.sigma / 10.0);
    let target = 1.0 + sig.sigma - delta;
    report.quantity("sigma", sig.sigma);
    report.quantity("delta", delta);
    report.quantity("target_exponent", target);
    let u0 = single_datum(grid, spec)?;
    let terms = expansion_terms(&u0, &chi, omega, support, &times)?;
    let ns = match evolve_reported(&u0, &times, config.dt()?, "flow", report)? {
        Some(t) => t,
        None => return Ok(()),
    };
    let mut sup_err = Vec::with_capacity(times.len());
    let mut sup_p1 = Vec::with_capacity(times.len());
    for j in 0..times.len() {
        let err = ns.snapshot(j).sub(terms.p_omega.snapshot(j))?;
        sup_err.push(sup_norm_in_ball(&err, center, omega));
        let raw = ns.snapshot(j).sub(terms.p1.snapshot(j))?;
        sup_p1.push(sup_norm_in_ball(&raw, center, omega));
    }
    report
        .series
        .push(Series::new("expansion_error", times.clone(), sup_err.clone()));
    report
        .series
        .push(Series::new("first_iterate_error", times.clone(), sup_p1));
    let slack = config.tolerances.exponent_slack.unwrap_or(LOCALIZED_SLACK);
    exponent_rule(
        report,
        "localized expansion error exponent at least 1 + sigma - delta",
        "expansion_error",
        &times,
        &sup_err,
        config.fit_window()?,
        target,
        slack,
        u0.max_speed(),
    )
}

/// Local agreement propagation: two data that agree on a ball must stay
/// close near its center for short times, with the gap growing at most
/// linearly (exponent at least `1 - slack`).
fn run_separation(
    config: &ExperimentConfig,
    grid: &Grid3,
    spec: &DatumSpec,
    report: &mut Report,
) -> Result<(), LabError> {
    let times = config.schedule()?.times_with_origin();
    let (u0, v0, leak) = make_datum(spec, grid)?.pair()?;
    let ra = spec.agreement_radius()?;
    let center = grid.center();
    let measure_radius = 0.6 * ra;
    report.quantity("agreement_leak", leak);
    report.quantity("measure_radius", measure_radius);
    let leak_tol = config.tolerances.pair_leak.unwrap_or(PAIR_LEAK_DEFAULT);
    let leak_status = if leak <= leak_tol * spec.amplitude {
        RuleStatus::Pass
    } else {
        RuleStatus::Fail
    };
    report.rules.push(
        RuleOutcome::new("initial agreement gap within tolerance", leak_status)
            .measured(leak / spec.amplitude)
            .tolerance(leak_tol)
            .note("band-limited data cannot agree exactly on a ball; the gap is resolution-limited"),
    );
    let ns_u = match evolve_reported(&u0, &times, config.dt()?, "first flow", report)? {
        Some(t) => t,
        None => return Ok(()),
    };
    let ns_v = match evolve_reported(&v0, &times, config.dt()?, "second flow", report)? {
        Some(t) => t,
        None => return Ok(()),
    };
    let mut sup = Vec::with_capacity(times.len());
    for j in 0..times.len() {
        let diff = ns_u.snapshot(j).sub(ns_v.snapshot(j))?;
        sup.push(sup_norm_in_ball(&diff, center, measure_radius));
    }
    report
        .series
        .push(Series::new("separation_sup", times.clone(), sup.clone()));
    if is_degenerate(&sup, spec.amplitude) {
        report.rules.push(
            RuleOutcome::new("separation growth exponent at least 1", RuleStatus::Degenerate)
                .note("the two flows coincide to round-off; the pair carries no perturbation"),
        );
        return Ok(());
    }
    let slack = config.tolerances.exponent_slack.unwrap_or(LOCALIZED_SLACK);
    exponent_rule(
        report,
        "separation growth exponent at least 1",
        "separation_sup",
        &times,
        &sup,
        config.fit_window()?,
        1.0,
        slack,
        spec.amplitude,
    )
}

/// Fractional heat difference bound with constant one,
/// `|e^{t lap} u0 - u0|_2 <= t^{s/2} |Lambda^s u0|_2` at `s = 3/2 - 3/p`,
/// plus persistence of the weak norm for mean-free data.
fn run_heat_lemma(
    config: &ExperimentConfig,
    grid: &Grid3,
    spec: &DatumSpec,
    report: &mut Report,
) -> Result<(), LabError> {
    let times = config.schedule()?.positive_times();
    let s = 1.5 - 3.0 / spec.p;
    if !(s > 0.0) {
        return Err(LabError::Config(format!("p = {} gives a non-positive order s", spec.p)));
    }
    report.quantity("s", s);
    let u0 = single_datum(grid, spec)?.to_spectral();
    let seminorm = sobolev_seminorm(&u0, s)?;
    let weak0 = weak_lp_norm(&u0, spec.p)?;
    report.quantity("sobolev_seminorm", seminorm);
    report.quantity("initial_weak_norm", weak0);
    if seminorm == 0.0 || weak0 == 0.0 {
        report.rules.push(
            RuleOutcome::new("fractional heat ratio at most one", RuleStatus::Degenerate)
                .note("datum vanishes; both sides of the bound are zero"),
        );
        return Ok(());
    }
    let mut frac_ratio = Vec::with_capacity(times.len());
    let mut weak_ratio = Vec::with_capacity(times.len());
    for &t in &times {
        let heated = heat_semigroup(&u0, t)?;
        let lhs = heated.sub(&u0)?.l2_norm_sq().sqrt();
        frac_ratio.push(lhs / (t.powf(0.5 * s) * seminorm));
        weak_ratio.push(weak_lp_norm(&heated, spec.p)? / weak0);
    }
    report
        .series
        .push(Series::new("fractional_ratio", times.clone(), frac_ratio.clone()));
    report
        .series
        .push(Series::new("weak_persistence", times.clone(), weak_ratio.clone()));
    let slack = config
        .tolerances
        .heat_ratio_slack
        .unwrap_or(HEAT_RATIO_SLACK_DEFAULT);
    let worst_frac = frac_ratio.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let frac_status = if worst_frac <= 1.0 + slack {
        RuleStatus::Pass
    } else {
        RuleStatus::Fail
    };
    report.rules.push(
        RuleOutcome::new("fractional heat ratio at most one", frac_status)
            .measured(worst_frac)
            .target(1.0)
            .tolerance(slack),
    );
    let worst_weak = weak_ratio.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weak_status = if worst_weak <= WEAK_PERSISTENCE_CAP {
        RuleStatus::Pass
    } else {
        RuleStatus::Fail
    };
    report.rules.push(
        RuleOutcome::new("weak norm persists under heat", weak_status)
            .measured(worst_weak)
            .target(1.0)
            .tolerance(WEAK_PERSISTENCE_CAP - 1.0)
            .note("holds for mean-free data; profiles with mass genuinely grow on a box"),
    );
    Ok(())
}

fn demean(mut f: VectorField) -> VectorField {
    for c in 0..3 {
        f.set_mode([0, 0, 0], c, C64::new(0.0, 0.0));
    }
    f
}

/// Threshold splitting `u0 = bar + tilde` at the optimal level, heat flow of
/// the bounded part as background, and the perturbed energy inequality for
/// the remainder, with the Ladyzhenskaya constant calibrated on the grid.
fn run_splitting(
    config: &ExperimentConfig,
    grid: &Grid3,
    spec: &DatumSpec,
    report: &mut Report,
) -> Result<(), LabError> {
    let sp = config
        .splitting
        .as_ref()
        .ok_or_else(|| LabError::Config("splitting scenario needs a splitting section".into()))?;
    let alpha = sp.alpha;
    let times = config.schedule()?.times_with_origin();
    let u0 = single_datum(grid, spec)?;
    let weak0 = weak_lp_norm(&u0, spec.p)?;
    let threshold = optimal_threshold(spec.p, alpha, sp.time, weak0)?;
    let split = lorentz_split(&u0, threshold)?;
    report.quantity("threshold", threshold);
    report.quantity("initial_weak_norm", weak0);
    report.quantity("truncated_sup", split.truncated_sup);
    report.quantity("bar_sup", split.bar_sup);
    report.quantity("bar_l2_sq", split.bar_l2_sq);
    report.quantity("tilde_l2_sq", split.tilde_l2_sq);

    // The background must live in the working band with zero mean, or the
    // Galerkin cancellations behind the ledger do not apply.
    let v0 = demean(dealias(&split.bar));
    let v_traj = evolve_heat(&v0, &times)?;
    let u_traj = match evolve_reported(&u0, &times, config.dt()?, "flow", report)? {
        Some(t) => t,
        None => return Ok(()),
    };
    let c_l = CALIBRATION_MARGIN
        * calibrate_ladyzhenskaya(grid, sp.calibration_samples, config.seed)?;
    report.quantity("ladyzhenskaya_constant", c_l);
    let ledger = perturbed_energy_check(&u_traj, &v_traj, c_l)?;
    report
        .series
        .push(Series::new("energy_lhs", ledger.times.clone(), ledger.lhs.clone()));
    report
        .series
        .push(Series::new("energy_rhs", ledger.times.clone(), ledger.rhs.clone()));
    let status = if ledger.holds() {
        RuleStatus::Pass
    } else {
        RuleStatus::Fail
    };
    // Both sides agree exactly at t = 0; the positive-time maximum is the
    // informative margin.
    let late_ratio = ledger
        .lhs
        .iter()
        .zip(&ledger.rhs)
        .skip(1)
        .map(|(l, r)| l / r)
        .fold(f64::NEG_INFINITY, f64::max);
    report.rules.push(
        RuleOutcome::new("perturbed energy inequality holds on the schedule", status)
            .measured(late_ratio)
            .target(1.0),
    );

    // Scaling audit: both rescaled products stay flat across thresholds
    // exactly when the datum has weak-L^p shape at those amplitudes. The
    // mimic profile is self-similar only between its envelope skirt and its
    // core plateau, so probe that band. Reported, not asserted.
    let sup = u0.max_speed();
    let (lo, hi) = (0.25 * sup, 0.6 * sup);
    let thresholds: Vec<f64> =
        (0..7).map(|k| lo * (hi / lo).powf(k as f64 / 6.0)).collect();
    let rows = scaling_audit(&u0, spec.p, alpha, &thresholds)?;
    let tilde: Vec<f64> = rows.iter().map(|r| r.tilde_product).collect();
    let bar: Vec<f64> = rows.iter().map(|r| r.bar_product).collect();
    report
        .series
        .push(Series::new("audit_tilde_product", thresholds.clone(), tilde.clone()));
    report
        .series
        .push(Series::new("audit_bar_product", thresholds, bar.clone()));
    let spread = |v: &[f64]| {
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        hi / lo
    };
    report.rules.push(
        RuleOutcome::new("threshold scaling audit spread", RuleStatus::Diagnostic)
            .measured(spread(&tilde).max(spread(&bar)))
            .note("max/min of the rescaled split products across the profile's amplitude band"),
    );
    Ok(())
}

/// Scaled decay of the periodic Oseen kernel: `|S(x, t)| (|x| + sqrt(t))^3`
/// must stay within a bounded band, checked per decade of the scale.
fn run_oseen(
    config: &ExperimentConfig,
    grid: &Grid3,
    report: &mut Report,
) -> Result<(), LabError> {
    let os = config
        .oseen
        .as_ref()
        .ok_or_else(|| LabError::Config("oseen scenario needs an oseen section".into()))?;
    let samples = oseen_kernel_check(grid, &os.t_values, &os.points)?;
    let mut scales: Vec<f64> = Vec::with_capacity(samples.len());
    let mut ratios: Vec<f64> = Vec::with_capacity(samples.len());
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| {
        let sa = samples[a].radius + samples[a].t.sqrt();
        let sb = samples[b].radius + samples[b].t.sqrt();
        sa.total_cmp(&sb)
    });
    for &i in &order {
        scales.push(samples[i].radius + samples[i].t.sqrt());
        ratios.push(samples[i].ratio);
    }
    report
        .series
        .push(Series::new("oseen_ratio", scales.clone(), ratios.clone()));
    let cap = config.tolerances.ratio_cap.unwrap_or(RATIO_CAP_DEFAULT);
    // Bucket by decade of the scale; within each decade the scaled ratio
    // must be flat to within the cap.
    let mut worst = 1.0f64;
    let mut buckets: std::collections::BTreeMap<i64, (f64, f64)> = std::collections::BTreeMap::new();
    for (s, r) in scales.iter().zip(&ratios) {
        let decade = s.log10().floor() as i64;
        let e = buckets.entry(decade).or_insert((f64::INFINITY, f64::NEG_INFINITY));
        e.0 = e.0.min(*r);
        e.1 = e.1.max(*r);
    }
    for (_, (lo, hi)) in &buckets {
        if *lo > 0.0 {
            worst = worst.max(hi / lo);
        }
    }
    report.quantity("decades", buckets.len() as f64);
    let status = if worst <= cap { RuleStatus::Pass } else { RuleStatus::Fail };
    report.rules.push(
        RuleOutcome::new("scaled kernel ratio flat within each decade", status)
            .measured(worst)
            .tolerance(cap),
    );
    Ok(())
}

/// Local energy inequality: the residual of the localized balance must
/// vanish relative to the size of its terms for smooth flows.
fn run_lei(
    config: &ExperimentConfig,
    grid: &Grid3,
    spec: &DatumSpec,
    report: &mut Report,
) -> Result<(), LabError> {
    let lc = config
        .lei
        .as_ref()
        .ok_or_else(|| LabError::Config("lei scenario needs a lei section".into()))?;
    let schedule = config.schedule()?;
    if schedule.spacing != Spacing::Linear {
        return Err(LabError::Config(
            "local energy quadrature needs a uniform (linear) schedule".into(),
        ));
    }
    let times = schedule.times_with_origin();
    let horizon = *times.last().expect("schedule is nonempty");
    let (ramp_on, ramp_full) = lc.ramp;
    if !(ramp_full < horizon) {
        return Err(LabError::Config(format!(
            "temporal ramp must be fully on before the horizon: full = {ramp_full}, \
             horizon = {horizon}"
        )));
    }
    let u0 = single_datum(grid, spec)?;
    let traj = match evolve_reported(&u0, &times, config.dt()?, "flow", report)? {
        Some(t) => t,
        None => return Ok(()),
    };
    let energy: Vec<f64> = traj.snapshots().iter().map(|s| s.l2_norm_sq()).collect();
    report.series.push(Series::new("energy", times.clone(), energy));
    let tol = config.tolerances.residual_rel.unwrap_or(RESIDUAL_REL_DEFAULT);
    let mut probes: Vec<(String, SpaceTimeTest)> = Vec::new();
    for (i, b) in lc.bumps.iter().enumerate() {
        probes.push((
            format!("bump {i}"),
            SpaceTimeTest::bump(grid, b.center, b.r_in, b.r_out, ramp_on, ramp_full)?,
        ));
    }
    if lc.include_constant {
        probes.push((
            "constant".to_string(),
            SpaceTimeTest::constant(grid, ramp_on, ramp_full)?,
        ));
    }
    if probes.is_empty() {
        return Err(LabError::Config("lei scenario needs at least one test function".into()));
    }
    for (label, phi) in &probes {
        let rep = local_energy_residual(&traj, phi, horizon)?;
        report.quantity(format!("residual ({label})"), rep.residual);
        report.quantity(format!("scale ({label})"), rep.scale);
        let status = if rep.residual.abs() <= tol * rep.scale {
            RuleStatus::Pass
        } else {
            RuleStatus::Fail
        };
        report.rules.push(
            RuleOutcome::new(format!("local energy residual vanishes ({label})"), status)
                .measured(rep.residual / rep.scale)
                .tolerance(tol)
                .note("relative residual; smooth flows balance to quadrature error"),
        );
    }
    Ok(())
}

/// Pointwise time regularity probe: central difference quotients and the
/// local modulus of continuity at fixed grid points. Diagnostic only.
fn run_time_holder(
    config: &ExperimentConfig,
    grid: &Grid3,
    spec: &DatumSpec,
    report: &mut Report,
) -> Result<(), LabError> {
    let tp = config
        .time_probe
        .as_ref()
        .ok_or_else(|| LabError::Config("time-holder scenario needs a time_probe section".into()))?;
    if tp.points.is_empty() {
        return Err(LabError::Config("time probe needs at least one point".into()));
    }
    let schedule = config.schedule()?;
    if schedule.spacing != Spacing::Linear {
        return Err(LabError::Config(
            "difference quotients need a uniform (linear) schedule".into(),
        ));
    }
    let times = schedule.times_with_origin();
    if times.len() < 5 {
        return Err(LabError::Config("time probe needs at least five snapshots".into()));
    }
    let u0 = single_datum(grid, spec)?;
    let traj = match evolve_reported(&u0, &times, config.dt()?, "flow", report)? {
        Some(t) => t,
        None => return Ok(()),
    };
    let phys: Vec<VectorField> = traj.snapshots().iter().map(|s| s.to_physical()).collect();
    let n = grid.n();
    let h = grid.spacing();
    for (pi, point) in tp.points.iter().enumerate() {
        let mut idx = [0usize; 3];
        for c in 0..3 {
            idx[c] = ((point[c].rem_euclid(grid.length()) / h).round() as usize) % n;
        }
        let at = |j: usize| -> [f64; 3] {
            let p = phys[j].physical();
            [p[0][idx], p[1][idx], p[2][idx]]
        };
        let mag = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        // central difference quotients at interior snapshots
        let mut dq_t = Vec::new();
        let mut dq = Vec::new();
        for j in 1..times.len() - 1 {
            let a = at(j - 1);
            let b = at(j + 1);
            let dt = times[j + 1] - times[j - 1];
            dq_t.push(times[j]);
            dq.push(mag([b[0] - a[0], b[1] - a[1], b[2] - a[2]]) / dt);
        }
        report
            .series
            .push(Series::new(format!("time_derivative_p{pi}"), dq_t, dq.clone()));
        let worst = dq.iter().cloned().fold(0.0f64, f64::max);
        report.quantity(format!("max_time_derivative (point {pi})"), worst);
        // a probe at a symmetry-pinned node (e.g. the center of an odd
        // datum) reads pure round-off; say so instead of fitting noise
        let signal_floor = 1e-12 * u0.max_speed();
        // modulus of continuity against the first interior snapshot
        let base = at(1);
        let mut taus = Vec::new();
        let mut gaps = Vec::new();
        for j in 2..times.len() {
            let v = at(j);
            taus.push(times[j] - times[1]);
            gaps.push(mag([v[0] - base[0], v[1] - base[1], v[2] - base[2]]));
        }
        report
            .series
            .push(Series::new(format!("modulus_p{pi}"), taus.clone(), gaps.clone()));
        if gaps.iter().all(|g| *g <= signal_floor) {
            report.rules.push(
                RuleOutcome::new(
                    format!("time modulus exponent (point {pi})"),
                    RuleStatus::Degenerate,
                )
                .note("probe velocity is constant to round-off; the point sits on a symmetry node"),
            );
            continue;
        }
        // fit only the first decade of offsets: past that the increment
        // saturates and the exponent reads as spuriously small
        let window = (taus[0], (10.0 * taus[0]).min(*taus.last().expect("nonempty")));
        match rate_fit(&taus, &gaps, window) {
            Ok(fit) => {
                report
                    .fits
                    .push(NamedFit::from_fit(format!("modulus_p{pi}"), &fit));
                report.rules.push(
                    RuleOutcome::new(
                        format!("time modulus exponent (point {pi})"),
                        RuleStatus::Diagnostic,
                    )
                    .measured(fit.slope)
                    .window(window)
                    .note("local-in-time Holder exponent at a fixed point; reported, not asserted"),
                );
            }
            Err(_) => {
                report.rules.push(
                    RuleOutcome::new(
                        format!("time modulus exponent (point {pi})"),
                        RuleStatus::Degenerate,
                    )
                    .note("probe signal too flat to fit"),
                );
            }
        }
    }
    Ok(())
}
