//! Fixed-step RK4 over the joint state `(s, ŝ_1, x_1, y_1, …, ŝ_n, x_n, y_n)`.
//!
//! The noise is drawn once per step and held across the four stages, so a run
//! is a deterministic function of its seed and step size.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::classifier::readout_into;
use crate::error::{Error, Result};
use crate::plant::{NoiseProcess, Plant};
use crate::signals::InputSignal;

/// Right-hand side of one class subsystem with state `q = (ŝ, x, y)`.
pub trait ClassifierUnit {
    fn rhs(&self, q: [f64; 3], s: f64, xi: f64) -> [f64; 3];

    /// Estimate window `[a, b]` used by the parameter read-out.
    fn span(&self) -> (f64, f64);

    fn label(&self) -> usize;

    /// False when `(ŝ, x, y, s, ξ)` leaves the region the unit is valid on.
    fn in_domain(&self, _q: [f64; 3], _s: f64, _xi: f64) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub t0: f64,
    pub horizon: f64,
    pub dt: f64,
    /// Keep one sample every this many steps.
    pub record_every: usize,
    pub seed: u64,
}

impl RunSpec {
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite() && self.t0.is_finite()) {
            return Err(Error::InvalidConfig(
                "horizon must be finite and non-negative".into(),
            ));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig(
                "record_every must be at least 1".into(),
            ));
        }
        let n = libm::round(self.horizon / self.dt);
        if (n * self.dt - self.horizon).abs() > 1e-9 * self.horizon.max(1.0) {
            return Err(Error::InvalidConfig(
                "horizon must be a multiple of dt".into(),
            ));
        }
        Ok(n as usize)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub dt: f64,
    pub record_every: usize,
    pub seed: u64,
    pub t0: f64,
    pub config_hash: Option<String>,
    /// `[a, b]` of each class, in bank order.
    pub spans: Vec<(f64, f64)>,
    pub labels: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Recorded samples of a run. Row `k` of `states` has stride `1 + 3n` and row
/// `k` of `readouts` has stride `2n` with `(h_f, h_θ)` per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub n_classes: usize,
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    pub readouts: Vec<f64>,
    pub xi: Vec<f64>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn stride(&self) -> usize {
        1 + 3 * self.n_classes
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let w = self.stride();
        &self.states[k * w..(k + 1) * w]
    }

    pub fn s(&self, k: usize) -> f64 {
        self.states[k * self.stride()]
    }

    /// `(ŝ, x, y)` of class index `i` at sample `k`.
    pub fn q(&self, k: usize, i: usize) -> [f64; 3] {
        let o = k * self.stride() + 1 + 3 * i;
        [self.states[o], self.states[o + 1], self.states[o + 2]]
    }

    pub fn hf(&self, k: usize, i: usize) -> f64 {
        self.readouts[k * 2 * self.n_classes + 2 * i]
    }

    pub fn htheta(&self, k: usize, i: usize) -> f64 {
        self.readouts[k * 2 * self.n_classes + 2 * i + 1]
    }

    /// Index of the first sample with time `>= t`.
    pub fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|&u| u < t - 1e-9 * self.meta.dt)
    }
}

/// RK4 stage buffers reused across steps.
pub struct Rk4 {
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k: [
                vec![0.0; dim],
                vec![0.0; dim],
                vec![0.0; dim],
                vec![0.0; dim],
            ],
            tmp: vec![0.0; dim],
        }
    }

    /// Advances `y` in place; `rhs(t, y, dy)` writes the derivative.
    pub fn step<F>(&mut self, rhs: &mut F, t: f64, y: &mut [f64], dt: f64)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let h2 = dt / 2.0;
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        rhs(t, y, k1);
        for ((o, yi), ki) in tmp.iter_mut().zip(y.iter()).zip(k1.iter()) {
            *o = yi + h2 * ki;
        }
        rhs(t + h2, tmp, k2);
        for ((o, yi), ki) in tmp.iter_mut().zip(y.iter()).zip(k2.iter()) {
            *o = yi + h2 * ki;
        }
        rhs(t + h2, tmp, k3);
        for ((o, yi), ki) in tmp.iter_mut().zip(y.iter()).zip(k3.iter()) {
            *o = yi + dt * ki;
        }
        rhs(t + dt, tmp, k4);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// One classical RK4 step. Fails with [`Error::Diverged`] on a non-finite result.
pub fn rk4_step<F>(mut rhs: F, state: &[f64], t: f64, dt: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut y = state.to_vec();
    Rk4::new(y.len()).step(&mut rhs, t, &mut y, dt);
    if y.iter().all(|v| v.is_finite()) {
        Ok(y)
    } else {
        Err(Error::Diverged { t: t + dt })
    }
}

/// Integrates the plant together with a bank of class subsystems.
pub fn integrate_system(
    plant: &Plant<'_>,
    bank: &[&dyn ClassifierUnit],
    init: &[[f64; 3]],
    input: &InputSignal,
    s0: f64,
    run: &RunSpec,
) -> Result<Trajectory> {
    if bank.len() != init.len() {
        return Err(Error::ConfigMismatch(alloc::format!(
            "{} classes but {} initial states",
            bank.len(),
            init.len()
        )));
    }
    let n_steps = run.steps()?;
    let n = bank.len();
    let dim = 1 + 3 * n;
    let mut y = Vec::with_capacity(dim);
    y.push(s0);
    for q in init {
        y.extend_from_slice(q);
    }

    let n_rec = n_steps / run.record_every + 1;
    let spans: Vec<(f64, f64)> = bank.iter().map(|u| u.span()).collect();
    let mut traj = Trajectory {
        n_classes: n,
        times: Vec::with_capacity(n_rec),
        states: Vec::with_capacity(n_rec * dim),
        readouts: Vec::with_capacity(n_rec * 2 * n),
        xi: Vec::with_capacity(n_rec),
        meta: TrajectoryMeta {
            dt: run.dt,
            record_every: run.record_every,
            seed: run.seed,
            t0: run.t0,
            config_hash: None,
            labels: bank.iter().map(|u| u.label()).collect(),
            spans,
            warnings: Vec::new(),
        },
    };
    let mut out_of_domain = vec![false; n];
    record(&mut traj, run.t0, &y, input, bank, &mut out_of_domain);

    let mut noise = NoiseProcess::new(plant.spec, run.seed);
    let mut rk = Rk4::new(dim);
    for k in 0..n_steps {
        let t = run.t0 + k as f64 * run.dt;
        let eta = noise.sample(t);
        let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            let xi = input.value(t);
            let s = y[0];
            dy[0] = -plant.spec.phi.eval(s) + plant.class.eval(xi, plant.theta) + eta;
            for (i, unit) in bank.iter().enumerate() {
                let o = 1 + 3 * i;
                let d = unit.rhs([y[o], y[o + 1], y[o + 2]], s, xi);
                dy[o..o + 3].copy_from_slice(&d);
            }
        };
        rk.step(&mut rhs, t, &mut y, run.dt);
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::Diverged { t: t + run.dt });
        }
        if (k + 1) % run.record_every == 0 {
            record(
                &mut traj,
                run.t0 + (k + 1) as f64 * run.dt,
                &y,
                input,
                bank,
                &mut out_of_domain,
            );
        }
    }
    for (i, flag) in out_of_domain.iter().enumerate() {
        if *flag {
            traj.meta.warnings.push(alloc::format!(
                "class {} left its validity domain",
                bank[i].label()
            ));
        }
    }
    Ok(traj)
}

fn record(
    traj: &mut Trajectory,
    t: f64,
    y: &[f64],
    input: &InputSignal,
    bank: &[&dyn ClassifierUnit],
    out_of_domain: &mut [bool],
) {
    let xi = input.value(t);
    traj.times.push(t);
    traj.xi.push(xi);
    traj.states.extend_from_slice(y);
    let start = traj.readouts.len();
    traj.readouts.resize(start + 2 * bank.len(), 0.0);
    readout_into(y, &traj.meta.spans, &mut traj.readouts[start..]);
    for (i, unit) in bank.iter().enumerate() {
        let o = 1 + 3 * i;
        if !unit.in_domain([y[o], y[o + 1], y[o + 2]], y[0], xi) {
            out_of_domain[i] = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rk4_decay_examples() {
        let decay = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
        let y = rk4_step(decay, &[1.0], 0.0, 0.1).unwrap();
        assert_abs_diff_eq!(y[0], libm::exp(-0.1), epsilon = 1e-7);

        let mut y = vec![1.0];
        let mut rk = Rk4::new(1);
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
        for k in 0..1000 {
            rk.step(&mut f, k as f64 * 1e-3, &mut y, 1e-3);
        }
        assert_abs_diff_eq!(y[0], libm::exp(-1.0), epsilon = 1e-12);
    }

    #[test]
    fn rk4_fourth_order() {
        // halving dt must shrink the error by about 2^4
        let run = |dt: f64| {
            let mut y = vec![1.0, 0.0];
            let mut rk = Rk4::new(2);
            let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| {
                dy[0] = -y[1];
                dy[1] = y[0];
            };
            let n = libm::round(1.0 / dt) as usize;
            for k in 0..n {
                rk.step(&mut f, k as f64 * dt, &mut y, dt);
            }
            (y[0] - libm::cos(1.0)).abs()
        };
        let ratio = run(0.1) / run(0.05);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rk4_reports_blowup() {
        let blow = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0] * 1e300;
        assert!(matches!(
            rk4_step(blow, &[1e10], 0.0, 1.0),
            Err(Error::Diverged { .. })
        ));
    }

    #[test]
    fn run_spec_checks() {
        let ok = RunSpec {
            t0: 0.0,
            horizon: 1.0,
            dt: 1e-3,
            record_every: 1,
            seed: 0,
        };
        assert_eq!(ok.steps().unwrap(), 1000);
        assert!(RunSpec { dt: 0.0, ..ok }.steps().is_err());
        assert!(RunSpec {
            record_every: 0,
            ..ok
        }
        .steps()
        .is_err());
        assert!(RunSpec { dt: 0.3, ..ok }.steps().is_err());
    }
}
