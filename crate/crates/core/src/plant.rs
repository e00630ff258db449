//! The measurement filter `ṡ = −φ(s) + f(ξ(t), θ) + η(t)` that produces the
//! signal the classifier observes.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::integrator::{integrate_system, RunSpec, Trajectory};
use crate::rng;
use crate::signals::{InputSignal, Interval, ScalarMap, SignalClass};

/// Filter nonlinearity `φ`.
#[derive(Clone)]
pub enum Filter {
    /// `gain · s + offset`
    Linear {
        gain: f64,
        offset: f64,
    },
    /// `gain · s + ripple · sin s`
    LinearSine {
        gain: f64,
        ripple: f64,
    },
    /// `s³`, whose slope vanishes at the origin.
    Cubic,
    Custom {
        name: &'static str,
        f: ScalarMap,
    },
}

impl Filter {
    pub const IDENTITY: Filter = Filter::Linear {
        gain: 1.0,
        offset: 0.0,
    };

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Self::Linear { gain, offset } => gain * s + offset,
            Self::LinearSine { gain, ripple } => gain * s + ripple * libm::sin(s),
            Self::Cubic => s * s * s,
            Self::Custom { f, .. } => f(s),
        }
    }

    /// Analytic slope bounds `(φ_min, φ_max)` for the built-in shapes.
    pub fn slope_bounds(&self) -> Option<(f64, f64)> {
        match self {
            Self::Linear { gain, .. } => Some((*gain, *gain)),
            Self::LinearSine { gain, ripple } => Some((gain - ripple.abs(), gain + ripple.abs())),
            Self::Cubic | Self::Custom { .. } => None,
        }
    }
}

impl fmt::Debug for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear { gain, offset } => {
                write!(f, "Linear {{ gain: {gain}, offset: {offset} }}")
            }
            Self::LinearSine { gain, ripple } => {
                write!(f, "LinearSine {{ gain: {gain}, ripple: {ripple} }}")
            }
            Self::Cubic => f.write_str("Cubic"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Where the measurement noise comes from.
#[derive(Clone)]
pub enum NoiseSource {
    Zero,
    /// Seeded uniform draws in `[-Δ_η, Δ_η]`, one per integration step.
    Uniform,
    /// Piecewise-constant table of `(t, η)` pairs sorted by `t`.
    Table(Vec<(f64, f64)>),
    Function(ScalarMap),
}

impl fmt::Debug for NoiseSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => f.write_str("Zero"),
            Self::Uniform => f.write_str("Uniform"),
            Self::Table(rows) => write!(f, "Table({} rows)", rows.len()),
            Self::Function(_) => f.write_str("Function"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantSpec {
    pub phi: Filter,
    pub phi_min: f64,
    pub phi_max: f64,
    /// `Ω_s`, the admissible initial conditions.
    pub s0_range: Interval,
    /// `Δ_η`
    pub noise_bound: f64,
    pub noise: NoiseSource,
}

impl PlantSpec {
    /// `φ(s) = s`, no noise.
    pub fn identity(s0_range: Interval) -> Self {
        Self {
            phi: Filter::IDENTITY,
            phi_min: 1.0,
            phi_max: 1.0,
            s0_range,
            noise_bound: 0.0,
            noise: NoiseSource::Zero,
        }
    }

    pub fn with_uniform_noise(mut self, bound: f64) -> Self {
        self.noise_bound = bound;
        self.noise = if bound > 0.0 {
            NoiseSource::Uniform
        } else {
            NoiseSource::Zero
        };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi_min > 0.0 && self.phi_max >= self.phi_min) {
            return Err(domain(
                "filter slope bounds must satisfy 0 < phi_min <= phi_max",
            ));
        }
        if !(self.noise_bound >= 0.0) {
            return Err(domain("noise bound must be non-negative"));
        }
        if let NoiseSource::Table(rows) = &self.noise {
            if rows.windows(2).any(|w| !(w[0].0 < w[1].0)) {
                return Err(domain("noise table times must be strictly increasing"));
            }
        }
        Ok(())
    }
}

/// One realization of the noise of a [`PlantSpec`], sampled once per step.
pub struct NoiseProcess<'a> {
    source: &'a NoiseSource,
    bound: f64,
    rng: ChaCha8Rng,
}

impl<'a> NoiseProcess<'a> {
    pub fn new(spec: &'a PlantSpec, seed: u64) -> Self {
        Self {
            source: &spec.noise,
            bound: spec.noise_bound,
            rng: rng::stream(seed, "plant-noise"),
        }
    }

    pub fn sample(&mut self, t: f64) -> f64 {
        match self.source {
            NoiseSource::Zero => 0.0,
            NoiseSource::Uniform => {
                if self.bound > 0.0 {
                    self.rng.random_range(-self.bound..=self.bound)
                } else {
                    0.0
                }
            }
            NoiseSource::Table(rows) => table_lookup(rows, t),
            NoiseSource::Function(f) => f(t),
        }
    }
}

fn table_lookup(rows: &[(f64, f64)], t: f64) -> f64 {
    match rows.partition_point(|r| r.0 <= t) {
        0 => rows.first().map_or(0.0, |r| r.1),
        k => rows[k - 1].1,
    }
}

/// `−φ(s) + f(ξ(t), θ) + η`, with the noise sample supplied by the caller.
pub fn plant_rhs(
    s: f64,
    t: f64,
    class: &SignalClass,
    input: &InputSignal,
    theta: f64,
    spec: &PlantSpec,
    eta: f64,
) -> f64 {
    -spec.phi.eval(s) + class.eval(input.value(t), theta) + eta
}

/// The true signal source: class, parameter and filter.
#[derive(Debug, Clone, Copy)]
pub struct Plant<'a> {
    pub class: &'a SignalClass,
    pub theta: f64,
    pub spec: &'a PlantSpec,
}

/// Integrates the plant alone, recording every step.
#[allow(clippy::too_many_arguments)]
pub fn simulate_measurement(
    class: &SignalClass,
    input: &InputSignal,
    theta: f64,
    spec: &PlantSpec,
    s0: f64,
    t0: f64,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<Trajectory> {
    if !spec.s0_range.contains(s0) {
        return Err(domain("initial condition outside the admissible interval"));
    }
    let plant = Plant { class, theta, spec };
    let run = RunSpec {
        t0,
        horizon,
        dt,
        record_every: 1,
        seed,
    };
    integrate_system(&plant, &[], &[], input, s0, &run)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub min_slope: f64,
    pub max_slope: f64,
    /// `(u, v, slope)` for every adjacent pair outside the declared band.
    pub violations: Vec<(f64, f64, f64)>,
    pub passed: bool,
}

/// Finite-difference slopes of `φ` on `n` points of `over`.
pub fn verify_slope_bounds(spec: &PlantSpec, over: Interval, n: usize, tol: f64) -> SlopeReport {
    let pts: Vec<f64> = over.grid(n).collect();
    let mut report = SlopeReport {
        min_slope: f64::INFINITY,
        max_slope: f64::NEG_INFINITY,
        violations: Vec::new(),
        passed: true,
    };
    for w in pts.windows(2) {
        let slope = (spec.phi.eval(w[1]) - spec.phi.eval(w[0])) / (w[1] - w[0]);
        report.min_slope = report.min_slope.min(slope);
        report.max_slope = report.max_slope.max(slope);
        if slope < spec.phi_min - tol || slope > spec.phi_max + tol {
            report.violations.push((w[0], w[1], slope));
        }
    }
    report.passed = report.violations.is_empty();
    report
}

/// Checks `|η(t)| <= Δ_η` on the grid `k·dt`, `k = 0..=horizon/dt`.
pub fn verify_noise_bound(
    spec: &PlantSpec,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> core::result::Result<(), String> {
    let mut noise = NoiseProcess::new(spec, seed);
    let n = libm::round(horizon / dt) as usize;
    for k in 0..=n {
        let t = k as f64 * dt;
        let eta = noise.sample(t);
        if eta.abs() > spec.noise_bound {
            return Err(alloc::format!(
                "|eta({t})| = {} exceeds bound {}",
                eta.abs(),
                spec.noise_bound
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{Interval, SignalFamily};
    use approx::assert_abs_diff_eq;

    fn constant_class(c: f64) -> SignalClass {
        SignalClass::builtin(
            1,
            SignalFamily::Constant(c),
            Interval { lo: 0.0, hi: 1.0 },
            Interval { lo: -1.0, hi: 2.0 },
            1.0,
        )
        .unwrap()
    }

    fn omega_s() -> Interval {
        Interval { lo: -2.0, hi: 2.0 }
    }

    #[test]
    fn rhs_examples() {
        let input = InputSignal::sine(1.0, 1.0);
        let spec = PlantSpec::identity(omega_s());
        assert_eq!(
            plant_rhs(3.0, 0.4, &constant_class(0.0), &input, 0.5, &spec, 0.0),
            -3.0
        );
        assert_eq!(
            plant_rhs(0.7, 0.4, &constant_class(0.7), &input, 0.5, &spec, 0.0),
            0.0
        );
        let ripple = PlantSpec {
            phi: Filter::LinearSine {
                gain: 2.0,
                ripple: 0.1,
            },
            phi_min: 1.9,
            phi_max: 2.1,
            ..spec
        };
        assert_abs_diff_eq!(
            plant_rhs(0.0, 0.4, &constant_class(1.0), &input, 0.5, &ripple, 0.0),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn decay_matches_closed_form() {
        let input = InputSignal::sine(1.0, 1.0);
        let spec = PlantSpec::identity(omega_s());
        let traj = simulate_measurement(
            &constant_class(0.0),
            &input,
            1.0,
            &spec,
            1.0,
            0.0,
            1.0,
            1e-3,
            0,
        )
        .unwrap();
        assert_abs_diff_eq!(traj.s(traj.len() - 1), libm::exp(-1.0), epsilon = 1e-8);
        let traj = simulate_measurement(
            &constant_class(1.0),
            &input,
            1.0,
            &spec,
            0.0,
            0.0,
            1.0,
            1e-3,
            0,
        )
        .unwrap();
        assert_abs_diff_eq!(
            traj.s(traj.len() - 1),
            1.0 - libm::exp(-1.0),
            epsilon = 1e-8
        );
        assert_eq!(traj.len(), 1001);
    }

    #[test]
    fn initial_condition_must_be_admissible() {
        let spec = PlantSpec::identity(Interval { lo: 0.0, hi: 1.0 });
        let r = simulate_measurement(
            &constant_class(0.0),
            &InputSignal::constant(0.0),
            1.0,
            &spec,
            5.0,
            0.0,
            1.0,
            1e-2,
            0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn slope_bounds() {
        let id = PlantSpec::identity(omega_s());
        assert!(
            verify_slope_bounds(
                &id,
                Interval {
                    lo: -10.0,
                    hi: 10.0
                },
                1001,
                1e-9
            )
            .passed
        );

        let ripple = PlantSpec {
            phi: Filter::LinearSine {
                gain: 2.0,
                ripple: 0.1,
            },
            phi_min: 1.9,
            phi_max: 2.1,
            ..id.clone()
        };
        let r = verify_slope_bounds(
            &ripple,
            Interval {
                lo: -10.0,
                hi: 10.0,
            },
            20001,
            1e-9,
        );
        assert!(r.passed, "{r:?}");
        assert!(r.min_slope > 1.9 && r.max_slope < 2.1);

        let cubic = PlantSpec {
            phi: Filter::Cubic,
            phi_min: 1.0,
            phi_max: 2.0,
            ..id
        };
        let r = verify_slope_bounds(&cubic, Interval { lo: -1.0, hi: 1.0 }, 201, 1e-9);
        assert!(!r.passed);
        assert!(r.violations.iter().any(|v| v.0.abs() < 0.05));
    }

    #[test]
    fn uniform_noise_respects_bound_and_seed() {
        let spec = PlantSpec::identity(omega_s()).with_uniform_noise(1e-3);
        assert!(verify_noise_bound(&spec, 50.0, 1e-2, 11).is_ok());
        let mut a = NoiseProcess::new(&spec, 3);
        let mut b = NoiseProcess::new(&spec, 3);
        for k in 0..100 {
            assert_eq!(a.sample(k as f64).to_bits(), b.sample(k as f64).to_bits());
        }
    }

    #[test]
    fn noise_table_is_piecewise_constant() {
        let rows = alloc::vec![(0.0, 0.1), (1.0, -0.2), (2.5, 0.05)];
        assert_eq!(table_lookup(&rows, 0.5), 0.1);
        assert_eq!(table_lookup(&rows, 1.0), -0.2);
        assert_eq!(table_lookup(&rows, 9.0), 0.05);
        let spec = PlantSpec {
            noise_bound: 0.1,
            noise: NoiseSource::Table(rows),
            ..PlantSpec::identity(omega_s())
        };
        assert!(verify_noise_bound(&spec, 3.0, 0.5, 0).is_err());
    }
}
