//! Read-out maps and the windowed decision procedure.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::integrator::Trajectory;
use crate::prototype::{error_bound, theta_hat, TuningReport};
use crate::signals::RhoEnvelope;

/// `h_f,i = s − ŝ_i` and `h_θ,i = a_i + (b_i − a_i)/2 · (x_i + 1)` for every class.
///
/// `state` is the joint vector `(s, ŝ_1, x_1, y_1, …)`; `s` overrides `state[0]`.
pub fn readout(state: &[f64], s: f64, spans: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>) {
    let mut hf = Vec::with_capacity(spans.len());
    let mut ht = Vec::with_capacity(spans.len());
    for (i, &(a, b)) in spans.iter().enumerate() {
        hf.push(s - state[1 + 3 * i]);
        ht.push(theta_hat(state[2 + 3 * i], a, b));
    }
    (hf, ht)
}

/// Interleaved `(h_f, h_θ)` pairs written into `out`, reading `s` from `state[0]`.
pub fn readout_into(state: &[f64], spans: &[(f64, f64)], out: &mut [f64]) {
    let s = state[0];
    for (i, &(a, b)) in spans.iter().enumerate() {
        out[2 * i] = s - state[1 + 3 * i];
        out[2 * i + 1] = theta_hat(state[2 + 3 * i], a, b);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionStatus {
    Decided,
    Undecided,
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class: usize,
    /// `max |h_f|` over the reported window.
    pub hf_max: f64,
    /// Smallest windowed `max |h_f|` over all candidate windows.
    pub hf_best: f64,
    pub theta_mean: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub decided: Option<usize>,
    pub theta_estimate: Option<f64>,
    /// Start of the decision window.
    pub t_prime: Option<f64>,
    #[serde(rename = "T_star")]
    pub t_star: f64,
    pub band_hf: f64,
    pub band_theta: Option<f64>,
    pub status: DecisionStatus,
    /// Classes qualifying at `t_prime`.
    pub qualifying: Vec<usize>,
    pub per_class: Vec<ClassSummary>,
}

/// Sliding maximum of `|v|` over windows of `w + 1` consecutive samples.
fn sliding_abs_max(v: impl Iterator<Item = f64>, w: usize, out: &mut Vec<f64>) {
    out.clear();
    let mut dq: VecDeque<(usize, f64)> = VecDeque::new();
    for (k, x) in v.map(f64::abs).enumerate() {
        while dq.back().is_some_and(|&(_, y)| y <= x) {
            dq.pop_back();
        }
        dq.push_back((k, x));
        if k >= w {
            while dq.front().is_some_and(|&(j, _)| j + w < k) {
                dq.pop_front();
            }
            out.push(dq.front().map_or(0.0, |e| e.1));
        }
    }
}

/// Trapezoidal time average over samples `k..=k+w`.
fn window_mean(values: impl Iterator<Item = f64>, w: usize) -> f64 {
    if w == 0 {
        return values.take(1).next().unwrap_or(0.0);
    }
    let mut sum = 0.0;
    for (j, v) in values.take(w + 1).enumerate() {
        sum += if j == 0 || j == w { 0.5 * v } else { v };
    }
    sum / w as f64
}

/// Searches for the earliest `t'` in `[t0, t0 + settle)` at which some class
/// keeps `|h_f|` strictly inside `eps + d_noise` over `[t', t' + T*]`.
pub fn decide(
    traj: &Trajectory,
    t_star: f64,
    eps: f64,
    d_noise: f64,
    settle: f64,
) -> DecisionReport {
    let band = eps + d_noise;
    let n = traj.n_classes;
    let step = traj.meta.dt * traj.meta.record_every as f64;
    let w = libm::round(t_star / step).max(0.0) as usize;
    let t0 = traj.times.first().copied().unwrap_or(traj.meta.t0);
    let labels = |i: usize| traj.meta.labels.get(i).copied().unwrap_or(i + 1);

    let len = traj.len();
    let n_windows = (len + 1).saturating_sub(w + 1).min(len);
    let mut maxima: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut buf = Vec::new();
    for i in 0..n {
        sliding_abs_max((0..len).map(|k| traj.hf(k, i)), w, &mut buf);
        maxima.push(buf.clone());
    }
    // window start k qualifies for the search when t0 <= t_k < t0 + settle
    let n_candidates = traj.times[..n_windows].partition_point(|&t| t < t0 + settle - 1e-9 * step);

    let mut found: Option<(usize, Vec<usize>)> = None;
    for k in 0..n_candidates {
        let q: Vec<usize> = (0..n).filter(|&i| maxima[i][k] < band).collect();
        if !q.is_empty() {
            found = Some((k, q));
            break;
        }
    }

    let summary_at = |k: usize| -> Vec<ClassSummary> {
        (0..n)
            .map(|i| {
                let hf_best = maxima[i][..n_candidates]
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for j in k..=(k + w).min(len.saturating_sub(1)) {
                    let v = traj.htheta(j, i);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                ClassSummary {
                    class: labels(i),
                    hf_max: maxima[i].get(k).copied().unwrap_or(f64::NAN),
                    hf_best,
                    theta_mean: window_mean((k..len).map(|j| traj.htheta(j, i)), w),
                    theta_min: lo,
                    theta_max: hi,
                }
            })
            .collect()
    };

    match found {
        Some((k, q)) => {
            let status = if q.len() == 1 {
                DecisionStatus::Decided
            } else {
                DecisionStatus::Ambiguous
            };
            let per_class = summary_at(k);
            let decided = (q.len() == 1).then(|| q[0]);
            DecisionReport {
                decided: decided.map(labels),
                theta_estimate: decided.map(|i| per_class[i].theta_mean),
                t_prime: Some(traj.times[k]),
                t_star,
                band_hf: band,
                band_theta: None,
                status,
                qualifying: q.into_iter().map(labels).collect(),
                per_class,
            }
        }
        None => DecisionReport {
            decided: None,
            theta_estimate: None,
            t_prime: None,
            t_star,
            band_hf: band,
            band_theta: None,
            status: DecisionStatus::Undecided,
            qualifying: Vec::new(),
            per_class: if n_candidates > 0 {
                summary_at(n_candidates - 1)
            } else {
                Vec::new()
            },
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBands {
    /// `Δ_η / φ_min`, added to the `h_f` tolerance.
    pub hf: f64,
    /// Accuracy radius for the parameter estimate.
    pub theta: f64,
    pub theta_extrapolated: bool,
}

/// Noise-dependent tolerances for the two read-outs of one class.
pub fn band_from_noise(
    delta_eta: f64,
    phi_min: f64,
    tuning: &TuningReport,
    rho: &RhoEnvelope,
) -> Result<NoiseBands> {
    if !(phi_min > 0.0 && delta_eta >= 0.0) {
        return Err(crate::error::domain(
            "band_from_noise needs phi_min > 0 and delta_eta >= 0",
        ));
    }
    let theta = error_bound(
        delta_eta,
        tuning.d_theta,
        tuning.a,
        tuning.b,
        tuning.d_f,
        tuning.l,
        rho,
    )?;
    Ok(NoiseBands {
        hf: delta_eta / phi_min,
        theta: theta.value,
        theta_extrapolated: theta.extrapolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::TrajectoryMeta;
    use alloc::vec;
    use proptest::prelude::*;

    /// Two-class trajectory with the given `h_f` series and `h_θ ≡ 1`.
    fn synthetic(hf: &[Vec<f64>], dt: f64) -> Trajectory {
        let n = hf.len();
        let len = hf[0].len();
        let mut states = Vec::new();
        let mut readouts = Vec::new();
        for k in 0..len {
            states.push(0.0);
            for series in hf {
                states.extend_from_slice(&[-series[k], 0.0, 1.0]);
            }
            for series in hf {
                readouts.extend_from_slice(&[series[k], 1.0]);
            }
        }
        Trajectory {
            n_classes: n,
            times: (0..len).map(|k| k as f64 * dt).collect(),
            states,
            readouts,
            xi: vec![0.0; len],
            meta: TrajectoryMeta {
                dt,
                record_every: 1,
                spans: vec![(0.0, 2.0); n],
                labels: (1..=n).collect(),
                ..TrajectoryMeta::default()
            },
        }
    }

    #[test]
    fn readout_examples() {
        let (hf, ht) = readout(
            &[0.75, 0.75, -1.0, 0.0, 0.25, 0.0, 1.0],
            0.75,
            &[(0.3, 1.7), (0.0, 2.0)],
        );
        assert_eq!(hf, vec![0.0, 0.5]);
        assert_eq!(ht, vec![0.3, 1.0]);
    }

    #[test]
    fn decide_examples() {
        let t = synthetic(&[vec![0.0; 101], vec![1.0; 101]], 0.1);
        let r = decide(&t, 2.0, 0.1, 0.0, 5.0);
        assert_eq!(r.status, DecisionStatus::Decided);
        assert_eq!(r.decided, Some(1));
        assert_eq!(r.t_prime, Some(0.0));
        assert_eq!(r.theta_estimate, Some(1.0));

        let t = synthetic(&[vec![1.0; 101], vec![1.0; 101]], 0.1);
        let r = decide(&t, 2.0, 0.1, 0.0, 5.0);
        assert_eq!(r.status, DecisionStatus::Undecided);
        assert_eq!(r.decided, None);

        let t = synthetic(&[vec![0.0; 101], vec![0.0; 101]], 0.1);
        assert_eq!(
            decide(&t, 2.0, 0.1, 0.0, 5.0).status,
            DecisionStatus::Ambiguous
        );
    }

    #[test]
    fn decide_finds_earliest_window() {
        // class 1 settles at t = 3.0 and stays
        let hf: Vec<f64> = (0..101).map(|k| if k < 30 { 1.0 } else { 0.01 }).collect();
        let t = synthetic(&[hf, vec![1.0; 101]], 0.1);
        let r = decide(&t, 2.0, 0.05, 0.0, 6.0);
        assert_eq!(r.decided, Some(1));
        assert!((r.t_prime.unwrap() - 3.0).abs() < 1e-12);
        assert!(r.per_class[0].hf_max < r.band_hf);
    }

    #[test]
    fn sliding_max_matches_brute_force() {
        let v: Vec<f64> = (0..50)
            .map(|k| libm::sin(k as f64 * 0.7) * (k % 7) as f64)
            .collect();
        let mut out = Vec::new();
        sliding_abs_max(v.iter().copied(), 5, &mut out);
        assert_eq!(out.len(), 45);
        for (k, m) in out.iter().enumerate() {
            let brute = v[k..=k + 5].iter().map(|x| x.abs()).fold(0.0, f64::max);
            assert_eq!(*m, brute);
        }
    }

    proptest! {
        #[test]
        fn wider_band_never_undecides(
            a in proptest::collection::vec(0.0f64..1.0, 60),
            b in proptest::collection::vec(0.0f64..1.0, 60),
            band in 0.0f64..1.0,
            extra in 0.0f64..0.5,
        ) {
            let t = synthetic(&[a, b], 0.1);
            let narrow = decide(&t, 1.0, band, 0.0, 4.0);
            let wide = decide(&t, 1.0, band + extra, 0.0, 4.0);
            if narrow.status != DecisionStatus::Undecided {
                prop_assert_ne!(wide.status, DecisionStatus::Undecided);
            }
        }
    }
}
