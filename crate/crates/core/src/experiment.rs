//! End-to-end experiment description: classes, input, plant, tuning choices,
//! run and decision settings, plus the tuning pipeline that turns it into a
//! bank of prototypes.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::classifier::{decide, DecisionReport};
use crate::error::{Error, Result};
use crate::integrator::{integrate_system, ClassifierUnit, RunSpec, Trajectory};
use crate::plant::{Plant, PlantSpec};
use crate::prototype::{
    choose_winding, compute_c, compute_l, error_bound, init_state, tune_gamma, tune_hstar,
    HStarInputs, Prototype, PrototypeConfig, TuningReport,
};
use crate::signals::{
    estimate_persistency_envelope, natural_window, InputSignal, Interval, InverseValue,
    RhoEnvelope, SignalClass, SignalFamily,
};

/// Free constants of the tuning calculator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningSpec {
    pub kappa: f64,
    pub d: f64,
    /// Operating gain as a fraction of the admissible supremum.
    pub safety: f64,
    pub delta: f64,
    pub nu_x: f64,
    /// Replaces `safety · γ*` when set.
    pub gamma: Option<f64>,
}

impl Default for TuningSpec {
    fn default() -> Self {
        Self {
            kappa: 2.0,
            d: 0.5,
            safety: 0.5,
            delta: 1e-3,
            nu_x: 0.0,
            gamma: None,
        }
    }
}

/// Sampling of the excitation envelope `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RhoSpec {
    pub n_thetas: usize,
    pub n_separations: usize,
    /// Number of persistency windows scanned.
    pub windows: usize,
    pub dt: f64,
}

impl Default for RhoSpec {
    fn default() -> Self {
        Self {
            n_thetas: 9,
            n_separations: 12,
            windows: 3,
            dt: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecisionSpec {
    #[serde(rename = "T_star")]
    pub t_star: f64,
    /// Tolerance added to the noise band on `h_f`.
    pub eps: f64,
    /// Length of the search interval for the window start.
    pub settle: f64,
}

impl Default for DecisionSpec {
    fn default() -> Self {
        Self {
            t_star: 20.0,
            eps: 1e-3,
            settle: 2950.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub classes: Vec<SignalClass>,
    pub input: InputSignal,
    pub plant: PlantSpec,
    /// Id of the class generating the measurement.
    pub true_class: usize,
    pub true_theta: f64,
    pub s0: f64,
    pub shat0: f64,
    pub tuning: TuningSpec,
    pub rho: RhoSpec,
    pub run: RunSpec,
    pub decision: DecisionSpec,
}

/// A tuned class subsystem with everything derived for it.
#[derive(Debug, Clone)]
pub struct TunedClass {
    pub prototype: Prototype,
    pub report: TuningReport,
    /// Absent when the parameter does not enter the signal.
    pub rho: Option<RhoEnvelope>,
}

const SHIPPED_RANGE: Interval = Interval { lo: 0.5, hi: 2.0 };
const SHIPPED_WINDOW: Interval = Interval { lo: 0.25, hi: 2.25 };

impl Experiment {
    /// Linear, sine and quadratic-affine classes driven by `ξ = sin t`, with
    /// the sine class generating the measurement.
    pub fn shipped_three_class() -> Self {
        let families = [
            SignalFamily::Linear,
            SignalFamily::Sine,
            SignalFamily::QuadraticAffine,
        ];
        let classes = families
            .into_iter()
            .enumerate()
            .map(|(k, fam)| SignalClass::builtin(k + 1, fam, SHIPPED_RANGE, SHIPPED_WINDOW, 1.0))
            .collect::<Result<Vec<_>>>()
            .expect("shipped classes are valid");
        Self {
            classes,
            input: InputSignal::sine(1.0, 1.0),
            plant: PlantSpec::identity(Interval { lo: -1.0, hi: 1.0 }).with_uniform_noise(1e-4),
            true_class: 2,
            true_theta: 1.2,
            s0: 0.0,
            shat0: 0.0,
            tuning: TuningSpec::default(),
            rho: RhoSpec::default(),
            run: RunSpec {
                t0: 0.0,
                horizon: 3000.0,
                dt: 1e-3,
                record_every: 10,
                seed: 7,
            },
            decision: DecisionSpec::default(),
        }
    }

    /// The linear class alone, noise-free and unperturbed.
    pub fn shipped_single_linear() -> Self {
        let class =
            SignalClass::builtin(1, SignalFamily::Linear, SHIPPED_RANGE, SHIPPED_WINDOW, 1.0)
                .expect("shipped class is valid");
        Self {
            classes: alloc::vec![class],
            true_class: 1,
            true_theta: 1.2,
            plant: PlantSpec::identity(Interval { lo: -1.0, hi: 1.0 }),
            tuning: TuningSpec {
                delta: 0.0,
                ..TuningSpec::default()
            },
            ..Self::shipped_three_class()
        }
    }

    pub fn class(&self, id: usize) -> Result<&SignalClass> {
        self.classes
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| Error::ConfigMismatch(alloc::format!("no class with id {id}")))
    }

    pub fn true_class(&self) -> Result<&SignalClass> {
        self.class(self.true_class)
    }

    /// Spread of the filter states used in the initial-mismatch bound.
    pub fn s_span(&self) -> f64 {
        let f_sup = self
            .classes
            .iter()
            .map(|c| {
                let t = c.window.abs_max();
                let xi = self.input.xi_sup;
                [
                    c.eval(xi, t),
                    c.eval(-xi, t),
                    c.eval(xi, c.window.lo),
                    c.eval(-xi, c.window.lo),
                ]
                .into_iter()
                .map(f64::abs)
                .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        self.plant.s0_range.width() + 2.0 * (f_sup + self.plant.noise_bound) / self.plant.phi_min
    }

    /// Runs the tuning calculator for one class.
    pub fn tune_class(&self, class: &SignalClass) -> Result<TunedClass> {
        self.plant.validate()?;
        let spec = &self.tuning;
        let (a, b) = (class.window.lo, class.window.hi);
        let phi_min = self.plant.phi_min;
        let mut warnings = Vec::new();

        let c = compute_c(class.lipschitz_theta, phi_min, a, b)?;
        let gamma_t = tune_gamma(spec.kappa, spec.d, c, phi_min, spec.safety)?;
        if gamma_t.unbounded {
            warnings.push(String::from("c = 0: any positive gain is admissible"));
        }
        let gamma = match spec.gamma {
            Some(g) if g >= gamma_t.gamma_star => {
                return Err(Error::InfeasibleTuning(alloc::format!(
                    "class {}: gamma {g} is not below gamma* = {}",
                    class.id,
                    gamma_t.gamma_star
                )))
            }
            Some(g) => g,
            None => gamma_t.gamma,
        };
        if !gamma.is_finite() {
            return Err(Error::InfeasibleTuning(alloc::format!(
                "class {}: unbounded gain needs an explicit gamma",
                class.id
            )));
        }
        let h_star = tune_hstar(&HStarInputs {
            s_min: 0.0,
            s_max: self.s_span(),
            d_theta: class.lipschitz_theta,
            a,
            b,
            phi_min,
            gamma_star: gamma,
            kappa: spec.kappa,
            d: spec.d,
            c,
        })?;
        let k_prime = choose_winding(h_star, spec.nu_x)?;

        let window_t = natural_window(&self.input);
        let d_f = 2.0 * class.lipschitz_xi * self.input.dxi_sup;
        let (rho, l, bound) = if class.lipschitz_theta == 0.0 {
            // no excitation envelope exists when θ does not enter the signal
            warnings.push(String::from(
                "parameter does not enter the signal: accuracy radius is the whole window",
            ));
            (
                None,
                2.0 * window_t,
                InverseValue {
                    value: b - a,
                    extrapolated: false,
                },
            )
        } else {
            let rho = self.rho_envelope(class, window_t)?;
            let l = compute_l(window_t, rho.eval(b - a), d_f)?;
            let bound = error_bound(
                self.plant.noise_bound,
                class.lipschitz_theta,
                a,
                b,
                d_f,
                l,
                &rho,
            )?;
            (Some(rho), l, bound)
        };
        if bound.extrapolated {
            warnings.push(String::from(
                "accuracy radius lies beyond the sampled excitation envelope",
            ));
        }
        if bound.value >= b - a {
            warnings.push(String::from("accuracy radius exceeds the estimate window"));
        }
        let config = PrototypeConfig {
            gamma,
            a,
            b,
            epsilon: self.plant.noise_bound / phi_min,
            delta: spec.delta,
            nu_x: spec.nu_x,
            k_prime,
            kappa: spec.kappa,
            d: spec.d,
        };
        config.validate(class, &self.plant)?;
        let report = TuningReport {
            class: class.id,
            a,
            b,
            c,
            gamma_star: gamma_t.gamma_star,
            gamma,
            h_star,
            k_prime,
            l,
            error_bound: bound.value,
            error_bound_extrapolated: bound.extrapolated,
            epsilon: config.epsilon,
            delta: config.delta,
            d_theta: class.lipschitz_theta,
            d_f,
            t_l_star_note: alloc::format!(
                "T = {window_t} is the input period; L = max(2T, rho(b-a)/D_f); L* and delta* come from the excitation scan"
            ),
            warnings,
        };
        Ok(TunedClass {
            prototype: Prototype {
                class: class.clone(),
                filter: self.plant.phi.clone(),
                config,
            },
            report,
            rho,
        })
    }

    pub fn tune(&self) -> Result<Vec<TunedClass>> {
        self.classes.iter().map(|c| self.tune_class(c)).collect()
    }

    fn rho_envelope(&self, class: &SignalClass, window_t: f64) -> Result<RhoEnvelope> {
        let r = &self.rho;
        let span = class.window.width();
        let thetas: Vec<f64> = class.window.grid(r.n_thetas.max(2)).collect();
        let separations: Vec<f64> = (1..=r.n_separations)
            .map(|k| span * k as f64 / r.n_separations as f64)
            .collect();
        let est = estimate_persistency_envelope(
            class,
            &self.input,
            &thetas,
            &separations,
            window_t,
            window_t * r.windows.max(1) as f64,
            r.dt,
        )?;
        RhoEnvelope::from_estimate(&est)
    }

    /// Simulates the tuned bank against the plant at parameter `theta`.
    pub fn simulate(&self, tuned: &[TunedClass], theta: f64) -> Result<Trajectory> {
        let bank: Vec<&dyn ClassifierUnit> = tuned
            .iter()
            .map(|t| &t.prototype as &dyn ClassifierUnit)
            .collect();
        let init: Vec<[f64; 3]> = tuned
            .iter()
            .map(|t| init_state(&t.prototype.config, self.shat0).to_array())
            .collect();
        self.simulate_bank(&bank, &init, theta, &self.run)
    }

    /// Simulates an arbitrary bank against the plant at parameter `theta`.
    pub fn simulate_bank(
        &self,
        bank: &[&dyn ClassifierUnit],
        init: &[[f64; 3]],
        theta: f64,
        run: &RunSpec,
    ) -> Result<Trajectory> {
        let class = self.true_class()?;
        if !class.theta_range.contains(theta) {
            return Err(Error::InvalidConfig(alloc::format!(
                "true theta {theta} outside the class range"
            )));
        }
        let plant = Plant {
            class,
            theta,
            spec: &self.plant,
        };
        integrate_system(&plant, bank, init, &self.input, self.s0, run)
    }

    /// Applies the decision procedure with the experiment's settings.
    pub fn decide(&self, traj: &Trajectory) -> DecisionReport {
        let d = &self.decision;
        decide(
            traj,
            d.t_star,
            d.eps,
            self.plant.noise_bound / self.plant.phi_min,
            d.settle,
        )
    }

    /// Index of the true class inside the bank.
    pub fn true_index(&self) -> Result<usize> {
        self.classes
            .iter()
            .position(|c| c.id == self.true_class)
            .ok_or_else(|| {
                Error::ConfigMismatch(alloc::format!("no class with id {}", self.true_class))
            })
    }

    /// Evenly spaced parameters over the true class range.
    pub fn theta_grid(&self, n: usize) -> Result<Vec<f64>> {
        Ok(self.true_class()?.theta_range.grid(n).collect())
    }
}
