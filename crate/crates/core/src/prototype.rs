//! Convergence-prototype dynamics and the tuning calculator.
//!
//! Each class `i` carries a copy of the measurement filter driven by the
//! current estimate, `dŝ = −φ(ŝ) + f(ξ, θ̂(x))`, and a planar rotator
//!
//! ```text
//! g  = γ (‖ŝ − s‖_ε + δ)
//! dx = g (x − y − x (x² + y²))
//! dy = g (x + y − y (x² + y²))
//! θ̂  = a + (b − a)/2 · (x + 1)
//! ```
//!
//! The unit circle is invariant and attracting. The rotator only turns while
//! the filtered mismatch sits outside the dead zone (or at rate `γδ` when the
//! structural-stability perturbation `δ` is on), so the phase integrates the
//! error and `θ̂` sweeps `[a, b]` until the mismatch disappears.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::integrator::ClassifierUnit;
use crate::plant::{Filter, PlantSpec};
use crate::signals::{dead_zone, InverseValue, RhoEnvelope, SignalClass};

/// Tuned constants of one class subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrototypeConfig {
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    /// Dead-zone width, `Δ_η / φ_min`.
    pub epsilon: f64,
    /// Constant added to the rotation gain.
    pub delta: f64,
    /// Initial phase of the rotator.
    pub nu_x: f64,
    /// Winding budget in full turns.
    pub k_prime: u32,
    pub kappa: f64,
    pub d: f64,
}

impl PrototypeConfig {
    /// Checks that hold independently of the signal class.
    pub fn validate_structure(&self) -> Result<()> {
        let finite = [
            self.gamma,
            self.a,
            self.b,
            self.epsilon,
            self.delta,
            self.nu_x,
            self.kappa,
            self.d,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidConfig(
                "prototype constants must be finite".into(),
            ));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidConfig("gamma must be positive".into()));
        }
        if !(self.a < self.b) {
            return Err(Error::InvalidConfig("need a < b".into()));
        }
        if !(self.epsilon >= 0.0 && self.delta >= 0.0) {
            return Err(Error::InvalidConfig(
                "epsilon and delta must be non-negative".into(),
            ));
        }
        if !(0.0..=TAU).contains(&self.nu_x) {
            return Err(Error::InvalidConfig("nu_x must lie in [0, 2pi]".into()));
        }
        if !(self.kappa > 1.0 && self.d > 0.0 && self.d < 1.0) {
            return Err(Error::InvalidConfig("need kappa > 1 and 0 < d < 1".into()));
        }
        Ok(())
    }

    /// Full admissibility against a class and the filter it observes.
    pub fn validate(&self, class: &SignalClass, plant: &PlantSpec) -> Result<()> {
        self.validate_structure()?;
        if !(self.a < class.theta_range.lo && class.theta_range.hi < self.b) {
            return Err(Error::InvalidConfig(alloc::format!(
                "class {}: need a < theta_min <= theta_max < b",
                class.id
            )));
        }
        if class.window.lo != self.a || class.window.hi != self.b {
            return Err(Error::InvalidConfig(alloc::format!(
                "class {}: estimate window differs from [a, b]",
                class.id
            )));
        }
        let eps = plant.noise_bound / plant.phi_min;
        if (self.epsilon - eps).abs() > 1e-12 * eps.max(1.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "epsilon {} must equal noise_bound / phi_min = {eps}",
                self.epsilon
            )));
        }
        let c = compute_c(class.lipschitz_theta, plant.phi_min, self.a, self.b)?;
        let tuning = tune_gamma(self.kappa, self.d, c, plant.phi_min, 1.0)?;
        if !(self.gamma < tuning.gamma_star) {
            return Err(Error::InvalidConfig(alloc::format!(
                "class {}: gamma {} is not below gamma* = {}",
                class.id,
                self.gamma,
                tuning.gamma_star
            )));
        }
        Ok(())
    }
}

/// `(ŝ, x, y)` of one class subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassState {
    pub shat: f64,
    pub x: f64,
    pub y: f64,
}

impl ClassState {
    pub fn to_array(self) -> [f64; 3] {
        [self.shat, self.x, self.y]
    }

    pub fn from_array(q: [f64; 3]) -> Self {
        Self {
            shat: q[0],
            x: q[1],
            y: q[2],
        }
    }
}

/// State of the whole bank: three numbers per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeState {
    pub classes: Vec<ClassState>,
}

impl PrototypeState {
    pub fn dim(&self) -> usize {
        3 * self.classes.len()
    }
}

#[inline]
pub fn theta_hat(x: f64, a: f64, b: f64) -> f64 {
    a + (b - a) / 2.0 * (x + 1.0)
}

/// Time derivative of `(ŝ, x, y)` given the measured `s` and input `ξ`.
#[inline]
pub fn prototype_rhs(
    state: &ClassState,
    s: f64,
    xi: f64,
    class: &SignalClass,
    filter: &Filter,
    config: &PrototypeConfig,
) -> [f64; 3] {
    let ClassState { shat, x, y } = *state;
    let dshat = -filter.eval(shat) + class.eval(xi, theta_hat(x, config.a, config.b));
    let g = config.gamma * (dead_zone(shat - s, config.epsilon) + config.delta);
    let r2 = x * x + y * y;
    [dshat, g * (x - y - x * r2), g * (x + y - y * r2)]
}

/// Rotator rates in polar form: `ṙ = g r (1 − r²)`, `ν̇ = g`.
pub fn polar_rates(x: f64, y: f64, g: f64) -> Result<(f64, f64)> {
    if x == 0.0 && y == 0.0 {
        return Err(Error::SingularPoint);
    }
    let r = libm::hypot(x, y);
    Ok((g * r * (1.0 - r * r), g))
}

/// `c = D_θ / φ_min · (b − a) / 2`.
pub fn compute_c(d_theta: f64, phi_min: f64, a: f64, b: f64) -> Result<f64> {
    if !(phi_min > 0.0 && b > a) {
        return Err(domain("compute_c needs phi_min > 0 and b > a"));
    }
    Ok(d_theta / phi_min * (b - a) / 2.0)
}

fn check_kappa_d(kappa: f64, d: f64) -> Result<()> {
    if !(kappa > 1.0 && d > 0.0 && d < 1.0) {
        return Err(domain("need kappa > 1 and d in (0, 1)"));
    }
    Ok(())
}

/// `(2 + κ/(1−d))`, shared by both tuning inequalities.
fn spread(kappa: f64, d: f64) -> f64 {
    2.0 + kappa / (1.0 - d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaTuning {
    /// Supremum of admissible gains; `+∞` when `c = 0`.
    pub gamma_star: f64,
    /// `safety · gamma_star`.
    pub gamma: f64,
    /// Set when `c = 0` and any gain is admissible.
    pub unbounded: bool,
}

/// Upper limit on the rotation gain:
/// `γ* = (φ_min / c) · [ln(κ/d) · κ/(κ−1) · (2 + κ/(1−d))]^{-1}`.
pub fn tune_gamma(kappa: f64, d: f64, c: f64, phi_min: f64, safety: f64) -> Result<GammaTuning> {
    check_kappa_d(kappa, d)?;
    if !(phi_min > 0.0 && c >= 0.0) {
        return Err(domain("tune_gamma needs phi_min > 0 and c >= 0"));
    }
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(domain("safety factor must lie in (0, 1]"));
    }
    if c == 0.0 {
        return Ok(GammaTuning {
            gamma_star: f64::INFINITY,
            gamma: f64::INFINITY,
            unbounded: true,
        });
    }
    let gamma_star =
        (phi_min / c) / (libm::log(kappa / d) * kappa / (kappa - 1.0) * spread(kappa, d));
    Ok(GammaTuning {
        gamma_star,
        gamma: safety * gamma_star,
        unbounded: false,
    })
}

/// Inputs of [`tune_hstar`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HStarInputs {
    pub s_min: f64,
    pub s_max: f64,
    pub d_theta: f64,
    pub a: f64,
    pub b: f64,
    pub phi_min: f64,
    pub gamma_star: f64,
    pub kappa: f64,
    pub d: f64,
    pub c: f64,
}

/// Minimal initial phase budget:
/// `h* = [(s_max − s_min) + D_θ (b−a)/φ_min] / [φ_min/γ* · ln(κ/d)^{-1} · (κ−1)/κ − c (2 + κ/(1−d))]`.
pub fn tune_hstar(p: &HStarInputs) -> Result<f64> {
    check_kappa_d(p.kappa, p.d)?;
    if !(p.phi_min > 0.0 && p.gamma_star > 0.0) {
        return Err(domain("tune_hstar needs phi_min > 0 and gamma* > 0"));
    }
    let numerator = (p.s_max - p.s_min) + p.d_theta * (p.b - p.a) / p.phi_min;
    let denominator = p.phi_min / p.gamma_star / libm::log(p.kappa / p.d) * (p.kappa - 1.0)
        / p.kappa
        - p.c * spread(p.kappa, p.d);
    if !(denominator > 0.0) {
        return Err(Error::InfeasibleTuning(alloc::format!(
            "h* denominator {denominator} is not positive; choose a smaller gamma*"
        )));
    }
    Ok(numerator / denominator)
}

/// Smallest `k' >= 0` with `2π k' − ν_x >= h*`.
pub fn choose_winding(h_star: f64, nu_x: f64) -> Result<u32> {
    if !(h_star >= 0.0 && h_star.is_finite()) || !(0.0..=TAU).contains(&nu_x) {
        return Err(domain(
            "choose_winding needs finite h* >= 0 and nu_x in [0, 2pi]",
        ));
    }
    let mut k = libm::ceil((h_star + nu_x) / TAU).max(0.0) as u32;
    // ceil can land one off when the quotient is within rounding of an integer
    while k > 0 && TAU * f64::from(k - 1) - nu_x >= h_star {
        k -= 1;
    }
    while TAU * f64::from(k) - nu_x < h_star {
        k += 1;
    }
    Ok(k)
}

/// Phase budget `π − ν_x + 2π k'`.
pub fn winding_allowance(nu_x: f64, k_prime: u32) -> f64 {
    PI - nu_x + TAU * f64::from(k_prime)
}

/// `L = max{2T, ρ(b−a) / D_f}`.
pub fn compute_l(window_t: f64, rho_of_span: f64, d_f: f64) -> Result<f64> {
    if !(d_f > 0.0) {
        return Err(Error::DegenerateFamily(
            "D_f = 0: the signal family has no slope".into(),
        ));
    }
    Ok((2.0 * window_t).max(rho_of_span / d_f))
}

/// Accuracy radius `ρ^{-1}((8 Δ_η D_θ (b−a) D_f² L²)^{1/4})`.
pub fn error_bound(
    delta_eta: f64,
    d_theta: f64,
    a: f64,
    b: f64,
    d_f: f64,
    l: f64,
    rho: &RhoEnvelope,
) -> Result<InverseValue> {
    if !(delta_eta >= 0.0 && d_theta >= 0.0 && b > a && d_f >= 0.0 && l >= 0.0) {
        return Err(domain("error_bound inputs must be non-negative with b > a"));
    }
    let arg = libm::pow(
        8.0 * delta_eta * d_theta * (b - a) * d_f * d_f * l * l,
        0.25,
    );
    Ok(rho.inverse(arg))
}

/// Starts the rotator on the unit circle at phase `ν_x`.
pub fn init_state(config: &PrototypeConfig, shat0: f64) -> ClassState {
    ClassState {
        shat: shat0,
        x: libm::cos(config.nu_x),
        y: libm::sin(config.nu_x),
    }
}

/// Everything the tuning calculator derives for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    pub class: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gamma_star: f64,
    pub gamma: f64,
    pub h_star: f64,
    pub k_prime: u32,
    #[serde(rename = "L")]
    pub l: f64,
    pub error_bound: f64,
    pub error_bound_extrapolated: bool,
    pub epsilon: f64,
    pub delta: f64,
    pub d_theta: f64,
    pub d_f: f64,
    #[serde(rename = "T_L_star_note")]
    pub t_l_star_note: String,
    pub warnings: Vec<String>,
}

/// A class subsystem of the prototype bank.
#[derive(Debug, Clone)]
pub struct Prototype {
    pub class: SignalClass,
    pub filter: Filter,
    pub config: PrototypeConfig,
}

impl ClassifierUnit for Prototype {
    #[inline]
    fn rhs(&self, q: [f64; 3], s: f64, xi: f64) -> [f64; 3] {
        prototype_rhs(
            &ClassState::from_array(q),
            s,
            xi,
            &self.class,
            &self.filter,
            &self.config,
        )
    }

    fn span(&self) -> (f64, f64) {
        (self.config.a, self.config.b)
    }

    fn label(&self) -> usize {
        self.class.id
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{Interval, SignalFamily};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn config() -> PrototypeConfig {
        PrototypeConfig {
            gamma: 0.03,
            a: 0.25,
            b: 2.25,
            epsilon: 0.0,
            delta: 0.0,
            nu_x: 0.0,
            k_prime: 1,
            kappa: 2.0,
            d: 0.5,
        }
    }

    fn sine_class() -> SignalClass {
        SignalClass::builtin(
            2,
            SignalFamily::Sine,
            Interval { lo: 0.5, hi: 2.0 },
            Interval { lo: 0.25, hi: 2.25 },
            1.0,
        )
        .unwrap()
    }

    /// Independent route: Cartesian velocity projected onto the radial and
    /// angular directions.
    fn polar_from_cartesian(x: f64, y: f64, dx: f64, dy: f64) -> (f64, f64) {
        let r = libm::hypot(x, y);
        ((x * dx + y * dy) / r, (x * dy - y * dx) / (r * r))
    }

    #[test]
    fn theta_hat_examples() {
        assert_eq!(theta_hat(-1.0, 0.3, 1.7), 0.3);
        assert_eq!(theta_hat(1.0, 0.3, 1.7), 1.7);
        assert_eq!(theta_hat(0.0, 0.0, 2.0), 1.0);
    }

    #[test]
    fn rhs_freezes_on_circle_without_error() {
        let q = ClassState {
            shat: 0.4,
            x: libm::cos(1.0),
            y: libm::sin(1.0),
        };
        let d = prototype_rhs(&q, 0.4, 0.3, &sine_class(), &Filter::IDENTITY, &config());
        assert_eq!((d[1], d[2]), (0.0, 0.0));
    }

    #[test]
    fn rhs_perturbed_rotation() {
        let cfg = PrototypeConfig {
            delta: 1e-3,
            ..config()
        };
        let q = ClassState {
            shat: 0.0,
            x: 1.0,
            y: 0.0,
        };
        let d = prototype_rhs(&q, 0.0, 0.0, &sine_class(), &Filter::IDENTITY, &cfg);
        assert_eq!(d[1], 0.0);
        // unit speed on the unit circle: dy = g = γδ
        assert_abs_diff_eq!(d[2], cfg.gamma * cfg.delta, epsilon = 1e-18);
    }

    #[test]
    fn rhs_polar_check_half_radius() {
        // gamma = 1, |ŝ − s| = 1, ε = δ = 0 gives g = 1
        let cfg = PrototypeConfig {
            gamma: 1.0,
            ..config()
        };
        let q = ClassState {
            shat: 1.0,
            x: 0.5,
            y: 0.0,
        };
        let d = prototype_rhs(&q, 0.0, 0.0, &sine_class(), &Filter::IDENTITY, &cfg);
        let (dr, dnu) = polar_from_cartesian(0.5, 0.0, d[1], d[2]);
        assert_abs_diff_eq!(dr, 0.375, epsilon = 1e-15);
        assert_abs_diff_eq!(dnu, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn polar_rate_examples() {
        assert_eq!(polar_rates(1.0, 0.0, 3.0).unwrap().0, 0.0);
        assert_abs_diff_eq!(polar_rates(0.0, 0.5, 2.0).unwrap().0, 0.75, epsilon = 1e-15);
        assert_eq!(polar_rates(0.3, -0.2, 0.0).unwrap(), (0.0, 0.0));
        assert_eq!(polar_rates(0.0, 0.0, 1.0), Err(Error::SingularPoint));
    }

    #[test]
    fn compute_c_examples() {
        assert_eq!(compute_c(2.0, 0.5, 0.0, 3.0).unwrap(), 6.0);
        assert_eq!(compute_c(0.0, 1.0, 0.0, 3.0).unwrap(), 0.0);
        assert_eq!(compute_c(1.0, 1.0, 0.0, 1.0).unwrap(), 0.5);
        assert!(compute_c(1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn tune_gamma_examples() {
        // hand arithmetic: ln 4 · 2 · 6 = 16.63553...
        let oracle = 1.0 / (4.0f64.ln() * 2.0 * 6.0);
        let g = tune_gamma(2.0, 0.5, 1.0, 1.0, 0.5).unwrap();
        assert_abs_diff_eq!(g.gamma_star, oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(g.gamma_star, 0.060_112, epsilon = 1e-6);
        assert_abs_diff_eq!(g.gamma, 0.5 * oracle, epsilon = 1e-15);
        let doubled = tune_gamma(2.0, 0.5, 1.0, 2.0, 0.5).unwrap();
        assert_abs_diff_eq!(doubled.gamma_star, 2.0 * g.gamma_star, epsilon = 1e-15);
        let halved = tune_gamma(2.0, 0.5, 2.0, 1.0, 0.5).unwrap();
        assert_abs_diff_eq!(halved.gamma_star, 0.5 * g.gamma_star, epsilon = 1e-15);
        let flat = tune_gamma(2.0, 0.5, 0.0, 1.0, 0.5).unwrap();
        assert!(flat.unbounded && flat.gamma_star.is_infinite());
    }

    fn hstar_inputs() -> HStarInputs {
        HStarInputs {
            s_min: 0.0,
            s_max: 1.0,
            d_theta: 1.0,
            a: 0.0,
            b: 1.0,
            phi_min: 1.0,
            gamma_star: 0.03,
            kappa: 2.0,
            d: 0.5,
            c: 0.5,
        }
    }

    #[test]
    fn tune_hstar_examples() {
        // hand arithmetic: numerator 1 + 1 = 2;
        // denominator (1/0.03)(1/ln 4)(1/2) − 0.5·6
        let den = (1.0 / 0.03) / 4.0f64.ln() * 0.5 - 3.0;
        let h = tune_hstar(&hstar_inputs()).unwrap();
        assert_abs_diff_eq!(h, 2.0 / den, epsilon = 1e-12);
        assert_abs_diff_eq!(h, 0.221_67, epsilon = 1e-5);

        let tiny = tune_hstar(&HStarInputs {
            gamma_star: 1e-9,
            ..hstar_inputs()
        })
        .unwrap();
        assert!(tiny < 1e-7);

        let too_big = tune_hstar(&HStarInputs {
            gamma_star: 0.2,
            ..hstar_inputs()
        });
        assert!(matches!(too_big, Err(Error::InfeasibleTuning(_))));
    }

    #[test]
    fn choose_winding_examples() {
        // integer search oracle
        let search = |h: f64, nu: f64| (0u32..).find(|&k| TAU * f64::from(k) - nu >= h).unwrap();
        assert_eq!(choose_winding(0.664, 0.0).unwrap(), 1);
        assert_eq!(choose_winding(0.0, 0.0).unwrap(), 0);
        assert_eq!(search(10.0, PI), 3);
        assert_eq!(choose_winding(10.0, PI).unwrap(), 3);
        for h in [0.0, 0.5, TAU, TAU + 1e-12, 20.0] {
            for nu in [0.0, 1.0, PI, TAU] {
                assert_eq!(
                    choose_winding(h, nu).unwrap(),
                    search(h, nu),
                    "h={h} nu={nu}"
                );
            }
        }
        assert!(choose_winding(-1.0, 0.0).is_err());
    }

    #[test]
    fn compute_l_examples() {
        assert_eq!(compute_l(PI, 0.2, 0.4).unwrap(), TAU);
        assert_eq!(compute_l(0.1, 10.0, 1.0).unwrap(), 10.0);
        assert_eq!(compute_l(1.0, 2.0, 1.0).unwrap(), 2.0);
        assert!(matches!(
            compute_l(1.0, 1.0, 0.0),
            Err(Error::DegenerateFamily(_))
        ));
    }

    #[test]
    fn error_bound_examples() {
        let rho = RhoEnvelope::linear(0.1).unwrap();
        // hand arithmetic: (8e-4 · 4π²)^{1/4} · 10
        let oracle = libm::pow(8e-4 * 4.0 * PI * PI, 0.25) * 10.0;
        let e = error_bound(1e-4, 1.0, 0.0, 1.0, 1.0, TAU, &rho).unwrap();
        assert_abs_diff_eq!(e.value, oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(e.value, 4.2156, epsilon = 1e-4);
        assert_eq!(
            error_bound(0.0, 1.0, 0.0, 1.0, 1.0, TAU, &rho)
                .unwrap()
                .value,
            0.0
        );
        let mut prev = 0.0;
        for k in 1..20 {
            let v = error_bound(1e-6 * f64::from(k), 1.0, 0.0, 1.0, 1.0, TAU, &rho)
                .unwrap()
                .value;
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn init_state_on_circle() {
        let s = init_state(&config(), 0.2);
        assert_eq!((s.x, s.y), (1.0, 0.0));
        let s = init_state(
            &PrototypeConfig {
                nu_x: PI / 2.0,
                ..config()
            },
            0.2,
        );
        assert_abs_diff_eq!(s.x, 0.0, epsilon = 1e-16);
        assert_eq!(s.y, 1.0);
        for nu in [0.3, 2.0, 5.9] {
            let s = init_state(
                &PrototypeConfig {
                    nu_x: nu,
                    ..config()
                },
                0.0,
            );
            assert_abs_diff_eq!(s.x * s.x + s.y * s.y, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn validation() {
        let class = sine_class();
        let plant = PlantSpec::identity(Interval { lo: -0.5, hi: 0.5 }).with_uniform_noise(1e-4);
        let good = PrototypeConfig {
            epsilon: 1e-4,
            ..config()
        };
        good.validate(&class, &plant).unwrap();
        assert!(PrototypeConfig {
            gamma: 0.07,
            ..good
        }
        .validate(&class, &plant)
        .is_err());
        assert!(PrototypeConfig { a: 0.6, ..good }
            .validate(&class, &plant)
            .is_err());
        assert!(PrototypeConfig {
            epsilon: 0.0,
            ..good
        }
        .validate(&class, &plant)
        .is_err());
        assert!(PrototypeConfig { nu_x: 7.0, ..good }
            .validate_structure()
            .is_err());
    }

    proptest! {
        #[test]
        fn polar_form_matches_cartesian(x in -3.0f64..3.0, y in -3.0f64..3.0, e in -2.0f64..2.0) {
            prop_assume!(x.abs() + y.abs() > 1e-3);
            let cfg = PrototypeConfig { delta: 1e-3, epsilon: 0.1, ..config() };
            let d = prototype_rhs(&ClassState { shat: e, x, y }, 0.0, 0.5, &sine_class(), &Filter::IDENTITY, &cfg);
            let g = cfg.gamma * (dead_zone(e, cfg.epsilon) + cfg.delta);
            let (dr, dnu) = polar_rates(x, y, g).unwrap();
            let (er, enu) = polar_from_cartesian(x, y, d[1], d[2]);
            prop_assert!((dr - er).abs() < 1e-12 && (dnu - enu).abs() < 1e-12);
        }
    }
}
