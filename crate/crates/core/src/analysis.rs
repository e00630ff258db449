//! Post-processing of recorded trajectories: the filtered excitation scan,
//! the winding budget, entry and residence times, and analytic state bounds.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::integrator::Trajectory;
use crate::prototype::{winding_allowance, PrototypeConfig};
use crate::signals::{dead_zone, set_distance, SignalClass};

/// Constants of the scalar system `ż = −φ(t, z) + u(t) + η(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeSpec {
    pub phi_min: f64,
    pub phi_max: f64,
    /// Bound on `|η|`.
    pub disturbance: f64,
    pub u_sup: f64,
    pub du_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PEReport {
    #[serde(rename = "L_window")]
    pub l_window: f64,
    /// Requested lower bound on `∫|u|` over every window of length `L`.
    pub delta: f64,
    /// Smallest measured `∫|u|` over windows of length `L`.
    pub delta_lower: f64,
    pub u_excited: bool,
    /// `(δ/L)² − Δ u_∞ > 0`.
    pub condition_ok: bool,
    pub condition_margin: f64,
    #[serde(rename = "L_star")]
    pub l_star: f64,
    pub delta_star: f64,
    /// `(δ²/L − Δ u_∞ L) / δ*`; present when both are positive.
    pub p: Option<f64>,
    pub integral_samples: Vec<f64>,
}

/// Trapezoidal integrals of `|v|` over every window of `w` sample intervals.
pub fn window_integrals(v: &[f64], dt: f64, w: usize) -> Vec<f64> {
    if w == 0 || v.len() <= w {
        return Vec::new();
    }
    let mut prefix = Vec::with_capacity(v.len());
    prefix.push(0.0);
    for pair in v.windows(2) {
        let last = *prefix.last().unwrap_or(&0.0);
        prefix.push(last + 0.5 * dt * (pair[0].abs() + pair[1].abs()));
    }
    (0..v.len() - w)
        .map(|k| prefix[k + w] - prefix[k])
        .collect()
}

fn window_samples(len: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && len > 0.0) {
        return Err(domain("window length and sample step must be positive"));
    }
    Ok(libm::round(len / dt) as usize)
}

/// Scans `∫|u|` and `∫|z|` over sliding windows on a common uniform grid.
/// `l_star` defaults to `l`.
pub fn verify_filtered_pe(
    z: &[f64],
    u: &[f64],
    dt: f64,
    spec: &PeSpec,
    l: f64,
    delta: f64,
    l_star: Option<f64>,
) -> Result<PEReport> {
    if z.len() != u.len() {
        return Err(Error::GridMismatch(alloc::format!(
            "z has {} samples, u has {}",
            z.len(),
            u.len()
        )));
    }
    let wu = window_samples(l, dt)?;
    let u_int = window_integrals(u, dt, wu);
    if u_int.is_empty() {
        return Err(domain("record shorter than one window"));
    }
    let delta_lower = u_int.iter().copied().fold(f64::INFINITY, f64::min);
    let margin = (delta / l) * (delta / l) - spec.disturbance * spec.u_sup;

    let l_star = l_star.unwrap_or(l);
    let integral_samples = window_integrals(z, dt, window_samples(l_star, dt)?);
    if integral_samples.is_empty() {
        return Err(domain("record shorter than one L* window"));
    }
    let delta_star = integral_samples
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let numerator = delta * delta / l - spec.disturbance * spec.u_sup * l;
    let p = (numerator > 0.0 && delta_star > 0.0).then(|| numerator / delta_star);
    Ok(PEReport {
        l_window: l,
        delta,
        delta_lower,
        u_excited: delta_lower >= delta,
        condition_ok: margin > 0.0,
        condition_margin: margin,
        l_star,
        delta_star,
        p,
        integral_samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingBudget {
    /// `γ ∫ ‖h_f‖_ε dt` over the record.
    pub spent: f64,
    /// `π − ν_x + 2π k'`.
    pub budget: f64,
    pub within: bool,
    pub warning: Option<String>,
}

/// Phase consumed by the error integral of class index `i`.
pub fn winding_budget(traj: &Trajectory, config: &PrototypeConfig, i: usize) -> WindingBudget {
    let spent = winding_spent_series(traj, config, i)
        .last()
        .copied()
        .unwrap_or(0.0);
    let budget = winding_allowance(config.nu_x, config.k_prime);
    let warning = (config.delta > 0.0).then(|| {
        String::from(
            "perturbed run: the rotation gain contains a constant term, budget does not apply",
        )
    });
    WindingBudget {
        spent,
        budget,
        within: spent <= budget,
        warning,
    }
}

/// Running value of `γ ∫_0^t ‖h_f‖_ε dτ` at every recorded sample.
pub fn winding_spent_series(traj: &Trajectory, config: &PrototypeConfig, i: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(traj.len());
    let mut acc = 0.0;
    for k in 0..traj.len() {
        if k > 0 {
            let h = traj.times[k] - traj.times[k - 1];
            let e0 = dead_zone(traj.hf(k - 1, i), config.epsilon);
            let e1 = dead_zone(traj.hf(k, i), config.epsilon);
            acc += config.gamma * 0.5 * h * (e0 + e1);
        }
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub class: usize,
    pub true_theta: f64,
    /// First time the estimate is within `bound_used` of the equivalence set.
    pub entry_time: Option<f64>,
    pub entered: bool,
    /// Longest stretch inside the set after entry.
    pub residence: f64,
    pub winding_spent: f64,
    pub bound_used: f64,
    pub final_distance: f64,
    pub decided_class: Option<usize>,
}

/// Tracks the distance of the parameter read-out of class index `i` to the
/// equivalence set of `true_theta`.
pub fn convergence_report(
    traj: &Trajectory,
    i: usize,
    class: &SignalClass,
    config: &PrototypeConfig,
    true_theta: f64,
    bound: f64,
) -> Result<ConvergenceReport> {
    if !(bound > 0.0) {
        return Err(domain("convergence bound must be positive"));
    }
    let target = class.equivalence_set(true_theta);
    let mut entry = None;
    let mut residence: f64 = 0.0;
    let mut run_start: Option<f64> = None;
    let mut final_distance = f64::NAN;
    for k in 0..traj.len() {
        let t = traj.times[k];
        let dist = set_distance(traj.htheta(k, i), &target)?;
        final_distance = dist;
        if dist <= bound {
            entry.get_or_insert(t);
            let start = *run_start.get_or_insert(t);
            residence = residence.max(t - start);
        } else {
            run_start = None;
        }
    }
    let winding_spent = winding_spent_series(traj, config, i)
        .last()
        .copied()
        .unwrap_or(0.0);
    Ok(ConvergenceReport {
        class: class.id,
        true_theta,
        entry_time: entry,
        entered: entry.is_some(),
        residence,
        winding_spent,
        bound_used: bound,
        final_distance,
        decided_class: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub entry_time: Option<f64>,
    pub residence: f64,
    pub winding_spent: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    /// Largest entry time over the grid; absent when any row never entered.
    pub t_prime_max: Option<f64>,
    pub flagged: usize,
    pub rows: Vec<SweepRow>,
}

/// Collects per-parameter convergence reports into the uniformity table.
pub fn summarize_sweep(reports: &[ConvergenceReport]) -> Result<SweepSummary> {
    if reports.is_empty() {
        return Err(domain("empty parameter grid"));
    }
    let rows: Vec<SweepRow> = reports
        .iter()
        .map(|r| SweepRow {
            theta: r.true_theta,
            entry_time: r.entry_time,
            residence: r.residence,
            winding_spent: r.winding_spent,
            flagged: !r.entered,
        })
        .collect();
    let flagged = rows.iter().filter(|r| r.flagged).count();
    let t_prime_max = (flagged == 0).then(|| {
        rows.iter()
            .filter_map(|r| r.entry_time)
            .fold(f64::NEG_INFINITY, f64::max)
    });
    Ok(SweepSummary {
        t_prime_max,
        flagged,
        rows,
    })
}

/// Sequential sweep: `run` simulates one parameter value and reports on it.
pub fn sweep_uniformity<F>(thetas: &[f64], mut run: F) -> Result<SweepSummary>
where
    F: FnMut(f64) -> Result<ConvergenceReport>,
{
    let reports = thetas
        .iter()
        .map(|&th| run(th))
        .collect::<Result<Vec<_>>>()?;
    summarize_sweep(&reports)
}

/// Per-class constants entering the analytic state bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub a: f64,
    pub b: f64,
    pub d_theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub passed: bool,
    /// Largest `|x|, |y|` and its bound per class.
    pub rotator: Vec<(f64, f64)>,
    /// Largest `|ŝ|` and its bound per class.
    pub filter: Vec<(f64, f64)>,
}

/// `|x|, |y| <= max{1, r(0)}` and
/// `|ŝ| <= |ŝ(0)| + (max{|a|,|b|} D_θ + Δ_η) / φ_min`, each up to `tol`.
pub fn verify_state_bounds(
    traj: &Trajectory,
    classes: &[BoundInputs],
    phi_min: f64,
    delta_eta: f64,
    tol: f64,
) -> Result<BoundsReport> {
    if classes.len() != traj.n_classes {
        return Err(Error::ConfigMismatch(alloc::format!(
            "{} bound entries for {} classes",
            classes.len(),
            traj.n_classes
        )));
    }
    if traj.is_empty() {
        return Err(domain("empty trajectory"));
    }
    let mut passed = true;
    let mut rotator = Vec::new();
    let mut filter = Vec::new();
    for (i, c) in classes.iter().enumerate() {
        let [s0, x0, y0] = traj.q(0, i);
        let r_bound = libm::hypot(x0, y0).max(1.0);
        let s_bound = s0.abs() + (c.a.abs().max(c.b.abs()) * c.d_theta + delta_eta) / phi_min;
        let (mut r_max, mut s_max) = (0.0f64, 0.0f64);
        for k in 0..traj.len() {
            let [sh, x, y] = traj.q(k, i);
            r_max = r_max.max(x.abs()).max(y.abs());
            s_max = s_max.max(sh.abs());
        }
        passed &= r_max <= r_bound + tol && s_max <= s_bound + tol;
        rotator.push((r_max, r_bound));
        filter.push((s_max, s_bound));
    }
    Ok(BoundsReport {
        passed,
        rotator,
        filter,
    })
}

/// Unwrapped rotator phase of class index `i` at every sample.
pub fn unwrapped_phase(traj: &Trajectory, i: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(traj.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for k in 0..traj.len() {
        let [_, x, y] = traj.q(k, i);
        let raw = libm::atan2(y, x);
        if let Some(p) = prev {
            let jump = raw - p;
            if jump < -core::f64::consts::PI {
                offset += TAU;
            } else if jump > core::f64::consts::PI {
                offset -= TAU;
            }
        }
        prev = Some(raw);
        out.push(raw + offset);
    }
    out
}

/// Times at which the unwrapped phase first reaches `ν(0) + 2π m`, `m = 1, 2, …`.
/// A full turn brings the rotator back to every arc it started on.
pub fn return_times(traj: &Trajectory, i: usize) -> Vec<f64> {
    let phase = unwrapped_phase(traj, i);
    let Some(&start) = phase.first() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut next = start + TAU;
    for (k, &p) in phase.iter().enumerate() {
        while p >= next {
            // linear interpolation inside the sample interval
            let t = if k == 0 {
                traj.times[0]
            } else {
                let (p0, t0) = (phase[k - 1], traj.times[k - 1]);
                t0 + (next - p0) / (p - p0) * (traj.times[k] - t0)
            };
            out.push(t);
            next += TAU;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{rk4_step, TrajectoryMeta};
    use crate::signals::{Interval, SignalFamily};
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn sampled(f: impl Fn(f64) -> f64, dt: f64, horizon: f64) -> Vec<f64> {
        let n = libm::round(horizon / dt) as usize;
        (0..=n).map(|k| f(k as f64 * dt)).collect()
    }

    fn pe_spec(disturbance: f64) -> PeSpec {
        PeSpec {
            phi_min: 1.0,
            phi_max: 1.0,
            disturbance,
            u_sup: 1.0,
            du_sup: 1.0,
        }
    }

    #[test]
    fn pe_sine_window_integral() {
        let dt = 1e-3;
        let u = sampled(libm::sin, dt, 40.0);
        let z = u.clone();
        let r = verify_filtered_pe(&z, &u, dt, &pe_spec(0.0), TAU, 4.0 - 1e-5, None).unwrap();
        // closed form ∫_t^{t+2π} |sin| = 4 for every t; grid is 2π/dt ≈ 6283 steps
        assert_abs_diff_eq!(r.delta_lower, 4.0, epsilon = 1e-3);
        assert!(r.condition_ok);
        assert!(r.integral_samples.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn pe_filtered_steady_state() {
        // independent route: integrate ż = −z + sin t with RK4 and wait out the transient
        let dt = 1e-3;
        let mut z = vec![-0.5];
        let mut zs = Vec::new();
        let mut us = Vec::new();
        let n = libm::round(60.0 / dt) as usize;
        for k in 0..=n {
            let t = k as f64 * dt;
            if t >= 20.0 {
                zs.push(z[0]);
                us.push(libm::sin(t));
            }
            z = rk4_step(|t, y, dy| dy[0] = -y[0] + libm::sin(t), &z, t, dt).unwrap();
        }
        let r = verify_filtered_pe(&zs, &us, dt, &pe_spec(0.0), TAU, 3.9, None).unwrap();
        assert_abs_diff_eq!(r.delta_star, 4.0 / 2f64.sqrt(), epsilon = 2e-3);
        assert!(r.p.unwrap() > 0.0);
    }

    #[test]
    fn pe_condition_fails_for_large_disturbance() {
        let dt = 1e-2;
        let u = sampled(libm::sin, dt, 20.0);
        let r = verify_filtered_pe(&u, &u, dt, &pe_spec(1.0), TAU, 3.9, None).unwrap();
        assert!(!r.condition_ok);
        assert_eq!(r.p, None);
        assert!(matches!(
            verify_filtered_pe(&u[1..], &u, dt, &pe_spec(0.0), TAU, 1.0, None),
            Err(Error::GridMismatch(_))
        ));
    }

    fn one_class(hf: &[f64], xs: &[(f64, f64)], dt: f64) -> Trajectory {
        let mut states = Vec::new();
        let mut readouts = Vec::new();
        for (k, &(x, y)) in xs.iter().enumerate() {
            states.extend_from_slice(&[0.0, -hf[k], x, y]);
            readouts.extend_from_slice(&[hf[k], crate::prototype::theta_hat(x, 0.25, 2.25)]);
        }
        Trajectory {
            n_classes: 1,
            times: (0..xs.len()).map(|k| k as f64 * dt).collect(),
            states,
            readouts,
            xi: vec![0.0; xs.len()],
            meta: TrajectoryMeta {
                dt,
                record_every: 1,
                spans: vec![(0.25, 2.25)],
                labels: vec![1],
                ..Default::default()
            },
        }
    }

    fn config() -> PrototypeConfig {
        PrototypeConfig {
            gamma: 0.5,
            a: 0.25,
            b: 2.25,
            epsilon: 0.1,
            delta: 0.0,
            nu_x: 0.0,
            k_prime: 1,
            kappa: 2.0,
            d: 0.5,
        }
    }

    #[test]
    fn winding_examples() {
        let t = one_class(&[0.0; 11], &[(1.0, 0.0); 11], 0.1);
        let w = winding_budget(&t, &config(), 0);
        assert_eq!(w.spent, 0.0);
        assert_abs_diff_eq!(w.budget, 3.0 * PI, epsilon = 1e-15);
        // ‖0.3‖_0.1 = 0.2 for one time unit at γ = 0.5
        let t = one_class(&[0.3; 11], &[(1.0, 0.0); 11], 0.1);
        assert_abs_diff_eq!(winding_budget(&t, &config(), 0).spent, 0.1, epsilon = 1e-12);
        let perturbed = PrototypeConfig {
            delta: 1e-3,
            ..config()
        };
        assert!(winding_budget(&t, &perturbed, 0).warning.is_some());
    }

    #[test]
    fn convergence_examples() {
        let class = SignalClass::builtin(
            1,
            SignalFamily::Linear,
            Interval { lo: 0.5, hi: 2.0 },
            Interval { lo: 0.25, hi: 2.25 },
            1.0,
        )
        .unwrap();
        // x = 0 gives θ̂ = 1.25
        let t = one_class(&[0.0; 11], &[(0.0, 1.0); 11], 0.1);
        let r = convergence_report(&t, 0, &class, &config(), 1.25, 1e-3).unwrap();
        assert_eq!(r.entry_time, Some(0.0));
        assert_abs_diff_eq!(r.residence, 1.0, epsilon = 1e-12);
        let r = convergence_report(&t, 0, &class, &config(), 1.9, 1e-3).unwrap();
        assert!(!r.entered);

        let summary = summarize_sweep(core::slice::from_ref(&r)).unwrap();
        assert_eq!(summary.flagged, 1);
        assert_eq!(summary.t_prime_max, None);
        let ok = convergence_report(&t, 0, &class, &config(), 1.25, 1e-3).unwrap();
        assert_eq!(summarize_sweep(&[ok]).unwrap().t_prime_max, Some(0.0));
        assert!(summarize_sweep(&[]).is_err());
    }

    #[test]
    fn phase_returns_uniform_rotation() {
        let dt = 0.01;
        let xs: Vec<(f64, f64)> = (0..2000)
            .map(|k| (libm::cos(k as f64 * dt), libm::sin(k as f64 * dt)))
            .collect();
        let t = one_class(&vec![0.0; xs.len()], &xs, dt);
        let r = return_times(&t, 0);
        assert_eq!(r.len(), 3);
        for (m, tr) in r.iter().enumerate() {
            assert_abs_diff_eq!(*tr, TAU * (m + 1) as f64, epsilon = 1e-4);
        }
    }

    proptest! {
        #[test]
        fn winding_spent_non_decreasing(hf in proptest::collection::vec(-1.0f64..1.0, 2..80)) {
            let xs = vec![(1.0, 0.0); hf.len()];
            let t = one_class(&hf, &xs, 0.1);
            let s = winding_spent_series(&t, &config(), 0);
            prop_assert!(s.windows(2).all(|w| w[1] >= w[0]));
        }
    }
}
