//! Signal families `f(ξ, θ)`, the known input `ξ(t)`, parameter equivalence
//! sets and numerical estimators for the regularity constants the tuning
//! formulas consume.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Closed interval `[lo, hi]`; a point is an interval with `lo == hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(domain("interval bounds must satisfy lo <= hi"));
        }
        Ok(Self { lo, hi })
    }

    pub const fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    pub fn abs_max(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// `n >= 2` evenly spaced points including both endpoints.
    pub fn grid(self, n: usize) -> impl Iterator<Item = f64> {
        let n = n.max(2);
        let step = self.width() / (n - 1) as f64;
        (0..n).map(move |k| {
            if k + 1 == n {
                self.hi
            } else {
                self.lo + step * k as f64
            }
        })
    }
}

/// Finite union of closed intervals and points.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PointSet {
    parts: Vec<Interval>,
}

impl PointSet {
    pub fn new(parts: Vec<Interval>) -> Self {
        Self { parts }
    }

    pub fn point(x: f64) -> Self {
        Self {
            parts: alloc::vec![Interval::point(x)],
        }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.parts.iter().any(|p| p.contains(x))
    }
}

/// Dead-zone norm: `|x| - delta` outside the zone, zero inside.
pub fn deadzone_norm(x: f64, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(domain("dead-zone width must be non-negative"));
    }
    Ok(dead_zone(x, delta))
}

#[inline]
pub(crate) fn dead_zone(x: f64, delta: f64) -> f64 {
    let a = x.abs();
    if a > delta {
        a - delta
    } else {
        0.0
    }
}

/// Distance from `x` to the nearest point of `set`.
pub fn set_distance(x: f64, set: &PointSet) -> Result<f64> {
    set.parts
        .iter()
        .map(|p| p.distance(x))
        .reduce(f64::min)
        .ok_or(Error::EmptySet)
}

pub type ScalarMap2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The parameterized nonlinearity `f(ξ, θ)` of one signal class.
#[derive(Clone)]
pub enum SignalFamily {
    /// `θ ξ`
    Linear,
    /// `sin(θ ξ)`
    Sine,
    /// `θ² ξ + θ`
    QuadraticAffine,
    /// `c`, independent of both arguments.
    Constant(f64),
    Custom {
        name: &'static str,
        f: ScalarMap2,
    },
}

impl SignalFamily {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "linear" => Some(Self::Linear),
            "sine" => Some(Self::Sine),
            "quadratic-affine" => Some(Self::QuadraticAffine),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Sine => "sine",
            Self::QuadraticAffine => "quadratic-affine",
            Self::Constant(_) => "constant",
            Self::Custom { name, .. } => name,
        }
    }

    #[inline]
    pub fn eval(&self, xi: f64, theta: f64) -> f64 {
        match self {
            Self::Linear => theta * xi,
            Self::Sine => libm::sin(theta * xi),
            Self::QuadraticAffine => theta * theta * xi + theta,
            Self::Constant(c) => *c,
            Self::Custom { f, .. } => f(xi, theta),
        }
    }
}

impl fmt::Debug for SignalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            other => f.write_str(other.name()),
        }
    }
}

/// User-declared description of `E(θ) ∩ window`. The library samples these
/// declarations, it never discovers them.
#[derive(Clone)]
pub enum Equivalence {
    /// `E(θ) = {θ}`.
    Singleton,
    /// `E(θ) = {θ, -θ}`.
    Symmetric,
    /// `E(θ) = {θ + k·period}`.
    Periodic(f64),
    /// Every parameter produces the same signal.
    Everything,
    Custom(Arc<dyn Fn(f64, Interval) -> PointSet + Send + Sync>),
}

impl fmt::Debug for Equivalence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Singleton => f.write_str("Singleton"),
            Self::Symmetric => f.write_str("Symmetric"),
            Self::Periodic(p) => write!(f, "Periodic({p})"),
            Self::Everything => f.write_str("Everything"),
            Self::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// One family `f_i(ξ, θ)` with its admissible parameter range, the estimate
/// window `[a, b]`, its equivalence structure and declared Lipschitz data.
#[derive(Debug, Clone)]
pub struct SignalClass {
    pub id: usize,
    pub family: SignalFamily,
    pub theta_range: Interval,
    /// `[a, b]`: the interval estimates range over.
    pub window: Interval,
    pub equivalence: Equivalence,
    pub lipschitz_theta: f64,
    pub lipschitz_xi: f64,
}

impl SignalClass {
    pub fn new(
        id: usize,
        family: SignalFamily,
        theta_range: Interval,
        window: Interval,
        equivalence: Equivalence,
        lipschitz_theta: f64,
        lipschitz_xi: f64,
    ) -> Result<Self> {
        if !(theta_range.lo < theta_range.hi) {
            return Err(domain("theta range must satisfy theta_min < theta_max"));
        }
        if !(window.lo <= theta_range.lo && theta_range.hi <= window.hi) {
            return Err(domain("estimate window must contain the parameter range"));
        }
        if !(lipschitz_theta >= 0.0 && lipschitz_xi >= 0.0) {
            return Err(domain("Lipschitz constants must be non-negative"));
        }
        Ok(Self {
            id,
            family,
            theta_range,
            window,
            equivalence,
            lipschitz_theta,
            lipschitz_xi,
        })
    }

    /// A built-in family with Lipschitz constants computed analytically over
    /// `window × [-xi_sup, xi_sup]`.
    pub fn builtin(
        id: usize,
        family: SignalFamily,
        theta_range: Interval,
        window: Interval,
        xi_sup: f64,
    ) -> Result<Self> {
        let m = window.abs_max();
        let (d_theta, d_xi, equivalence) = match &family {
            SignalFamily::Linear | SignalFamily::Sine => (xi_sup, m, Equivalence::Singleton),
            SignalFamily::QuadraticAffine => {
                (2.0 * m * xi_sup + 1.0, m * m, Equivalence::Singleton)
            }
            SignalFamily::Constant(_) => (0.0, 0.0, Equivalence::Everything),
            SignalFamily::Custom { .. } => {
                return Err(domain(
                    "custom families must declare their constants via SignalClass::new",
                ))
            }
        };
        Self::new(id, family, theta_range, window, equivalence, d_theta, d_xi)
    }

    #[inline]
    pub fn eval(&self, xi: f64, theta: f64) -> f64 {
        self.family.eval(xi, theta)
    }

    /// `E(θ) ∩ window`, always containing `θ` itself.
    pub fn equivalence_set(&self, theta: f64) -> PointSet {
        let w = self.window;
        let mut set = match &self.equivalence {
            Equivalence::Singleton => PointSet::point(theta),
            Equivalence::Symmetric => {
                let mut parts = alloc::vec![Interval::point(theta)];
                if theta != 0.0 && w.contains(-theta) {
                    parts.push(Interval::point(-theta));
                }
                PointSet::new(parts)
            }
            Equivalence::Periodic(p) => {
                let p = p.abs();
                let mut parts = alloc::vec![Interval::point(theta)];
                if p > 0.0 {
                    let k_lo = libm::ceil((w.lo - theta) / p) as i64;
                    let k_hi = libm::floor((w.hi - theta) / p) as i64;
                    for k in k_lo..=k_hi {
                        if k != 0 {
                            parts.push(Interval::point(theta + k as f64 * p));
                        }
                    }
                }
                PointSet::new(parts)
            }
            Equivalence::Everything => PointSet::new(alloc::vec![Interval {
                lo: w.lo.min(theta),
                hi: w.hi.max(theta)
            }]),
            Equivalence::Custom(f) => f(theta, w),
        };
        if !set.contains(theta) {
            set.parts.push(Interval::point(theta));
        }
        set
    }

    /// `dist(θ, E(θ'))`.
    pub fn separation(&self, theta: f64, theta_prime: f64) -> f64 {
        set_distance(theta, &self.equivalence_set(theta_prime)).unwrap_or(f64::INFINITY)
    }
}

/// Shape of the known input `ξ(t)`.
#[derive(Clone)]
pub enum InputShape {
    /// `amplitude · sin(omega t + phase)`
    Sine {
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    Constant(f64),
    /// `slope · t`
    Ramp {
        slope: f64,
    },
    /// `sin²(ln(t − t0 + 1))` while `sin(ln(t − t0 + 1)) ≥ 0`, else 0.
    Degenerate {
        t0: f64,
    },
    Custom {
        name: &'static str,
        f: ScalarMap,
    },
}

impl fmt::Debug for InputShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sine {
                amplitude,
                omega,
                phase,
            } => {
                write!(
                    f,
                    "Sine {{ amplitude: {amplitude}, omega: {omega}, phase: {phase} }}"
                )
            }
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Ramp { slope } => write!(f, "Ramp {{ slope: {slope} }}"),
            Self::Degenerate { t0 } => write!(f, "Degenerate {{ t0: {t0} }}"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// The known input `ξ(t)` with bounds on its magnitude and slope.
#[derive(Debug, Clone)]
pub struct InputSignal {
    pub shape: InputShape,
    pub xi_sup: f64,
    pub dxi_sup: f64,
}

impl InputSignal {
    pub fn sine(amplitude: f64, omega: f64) -> Self {
        Self {
            shape: InputShape::Sine {
                amplitude,
                omega,
                phase: 0.0,
            },
            xi_sup: amplitude.abs(),
            dxi_sup: (amplitude * omega).abs(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            shape: InputShape::Constant(c),
            xi_sup: c.abs(),
            dxi_sup: 0.0,
        }
    }

    pub fn ramp(slope: f64) -> Self {
        Self {
            shape: InputShape::Ramp { slope },
            xi_sup: f64::INFINITY,
            dxi_sup: slope.abs(),
        }
    }

    /// The input whose flat stretches grow without bound, defeating any
    /// fixed identification window.
    pub fn degenerate(t0: f64) -> Result<Self> {
        if !(t0 >= 0.0) {
            return Err(domain("degenerate input needs t0 >= 0"));
        }
        // |d/dt sin²(ln τ)| = |sin(2 ln τ)| / τ <= 1 for τ >= 1
        Ok(Self {
            shape: InputShape::Degenerate { t0 },
            xi_sup: 1.0,
            dxi_sup: 1.0,
        })
    }

    /// Unchecked evaluation, `t` is assumed non-negative.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match &self.shape {
            InputShape::Sine {
                amplitude,
                omega,
                phase,
            } => amplitude * libm::sin(omega * t + phase),
            InputShape::Constant(c) => *c,
            InputShape::Ramp { slope } => slope * t,
            InputShape::Degenerate { t0 } => {
                if t < *t0 {
                    return 0.0;
                }
                let s = libm::sin(libm::log(t - t0 + 1.0));
                if s >= 0.0 {
                    s * s
                } else {
                    0.0
                }
            }
            InputShape::Custom { f, .. } => f(t),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(domain("time must be non-negative"));
        }
        Ok(self.value(t))
    }
}

/// Same as [`InputSignal::degenerate`].
pub fn degenerate_xi(t0: f64) -> Result<InputSignal> {
    InputSignal::degenerate(t0)
}

/// `f_i(ξ(t), θ)`.
pub fn eval_signal(class: &SignalClass, input: &InputSignal, theta: f64, t: f64) -> Result<f64> {
    Ok(class.eval(input.eval(t)?, theta))
}

/// Sampled lower envelope of the excitation function `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistencyEstimate {
    pub window_t: f64,
    /// `(separation, worst-window max deviation)`, separations strictly increasing.
    pub rho_samples: Vec<(f64, f64)>,
    pub satisfied: bool,
    /// Per-window maxima `(window start, max deviation)` of the last pair scanned.
    pub window_maxima: Vec<(f64, f64)>,
}

fn window_scan(
    class: &SignalClass,
    input: &InputSignal,
    theta: f64,
    theta_prime: f64,
    window_t: f64,
    horizon: f64,
    dt: f64,
) -> Vec<(f64, f64)> {
    let per_window = libm::round(window_t / dt).max(1.0) as usize;
    let n_windows = libm::floor(horizon / window_t + 1e-9) as usize;
    (0..n_windows)
        .map(|w| {
            let start = w as f64 * window_t;
            let max = (0..=per_window)
                .map(|j| {
                    let xi = input.value(start + j as f64 * dt);
                    (class.eval(xi, theta) - class.eval(xi, theta_prime)).abs()
                })
                .fold(0.0, f64::max);
            (start, max)
        })
        .collect()
}

fn check_persistency_args(window_t: f64, horizon: f64, dt: f64) -> Result<()> {
    if !(window_t > 0.0 && horizon >= window_t && dt > 0.0) {
        return Err(domain(
            "persistency scan needs window_T > 0, horizon >= window_T and dt > 0",
        ));
    }
    Ok(())
}

/// For every window `[t, t+T]` tiling `[0, horizon]`, take the max of
/// `|f(ξ,θ) − f(ξ,θ')|` over the window; the minimum over windows is the
/// envelope sample at separation `dist(θ, E(θ'))`.
pub fn estimate_persistency(
    class: &SignalClass,
    input: &InputSignal,
    theta: f64,
    theta_prime: f64,
    window_t: f64,
    horizon: f64,
    dt: f64,
) -> Result<PersistencyEstimate> {
    check_persistency_args(window_t, horizon, dt)?;
    let maxima = window_scan(class, input, theta, theta_prime, window_t, horizon, dt);
    let worst = maxima.iter().map(|w| w.1).fold(f64::INFINITY, f64::min);
    Ok(PersistencyEstimate {
        window_t,
        rho_samples: alloc::vec![(class.separation(theta, theta_prime), worst)],
        satisfied: worst > 0.0,
        window_maxima: maxima,
    })
}

/// Envelope over a parameter grid: for each separation, the worst case over
/// all `θ` in `thetas` paired with `θ ± separation` inside the window.
pub fn estimate_persistency_envelope(
    class: &SignalClass,
    input: &InputSignal,
    thetas: &[f64],
    separations: &[f64],
    window_t: f64,
    horizon: f64,
    dt: f64,
) -> Result<PersistencyEstimate> {
    check_persistency_args(window_t, horizon, dt)?;
    if separations.windows(2).any(|w| !(w[0] < w[1]))
        || separations.first().is_some_and(|&s| s <= 0.0)
    {
        return Err(domain(
            "separations must be positive and strictly increasing",
        ));
    }
    let mut samples = Vec::with_capacity(separations.len());
    let mut last_maxima = Vec::new();
    for &sep in separations {
        let mut worst = f64::INFINITY;
        for &theta in thetas {
            for theta_prime in [theta + sep, theta - sep] {
                if !class.window.contains(theta_prime) {
                    continue;
                }
                // pairs closer than `sep` through a non-trivial E(θ') say
                // nothing about ρ(sep)
                if (class.separation(theta, theta_prime) - sep).abs() > 1e-9 * sep.max(1.0) {
                    continue;
                }
                let maxima = window_scan(class, input, theta, theta_prime, window_t, horizon, dt);
                let w = maxima.iter().map(|w| w.1).fold(f64::INFINITY, f64::min);
                if w < worst {
                    worst = w;
                    last_maxima = maxima;
                }
            }
        }
        if worst.is_finite() {
            samples.push((sep, worst));
        }
    }
    let satisfied = !samples.is_empty() && samples.iter().all(|s| s.1 > 0.0);
    Ok(PersistencyEstimate {
        window_t,
        rho_samples: samples,
        satisfied,
        window_maxima: last_maxima,
    })
}

/// Monotone piecewise-linear lower envelope of `ρ` through the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoEnvelope {
    /// Knots `(separation, ρ)` including `(0, 0)`, non-decreasing in both.
    knots: Vec<(f64, f64)>,
    /// Slope used beyond the last knot.
    tail_slope: f64,
    /// Whether arguments beyond the last knot are certified.
    certified_tail: bool,
}

/// Value of `ρ^{-1}` with a flag for arguments outside the certified range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseValue {
    pub value: f64,
    pub extrapolated: bool,
}

impl RhoEnvelope {
    /// `ρ(s) = slope · s` on all of `[0, ∞)`.
    pub fn linear(slope: f64) -> Result<Self> {
        if !(slope > 0.0) {
            return Err(domain("linear rho needs a positive slope"));
        }
        Ok(Self {
            knots: alloc::vec![(0.0, 0.0)],
            tail_slope: slope,
            certified_tail: true,
        })
    }

    /// Builds the envelope from sampled `(separation, ρ)` pairs: each knot is
    /// lowered to the minimum over itself and all larger separations.
    pub fn from_estimate(est: &PersistencyEstimate) -> Result<Self> {
        let samples = &est.rho_samples;
        if samples.is_empty() || samples.iter().any(|s| !(s.1 > 0.0)) {
            return Err(Error::DegenerateFamily(
                "persistency envelope has non-positive samples".into(),
            ));
        }
        let mut knots: Vec<(f64, f64)> = samples.clone();
        for k in (0..knots.len().saturating_sub(1)).rev() {
            knots[k].1 = knots[k].1.min(knots[k + 1].1);
        }
        let &(s_last, r_last) = knots.last().expect("non-empty");
        knots.insert(0, (0.0, 0.0));
        Ok(Self {
            knots,
            tail_slope: r_last / s_last,
            certified_tail: false,
        })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn certified_max(&self) -> f64 {
        if self.certified_tail {
            f64::INFINITY
        } else {
            self.knots.last().map_or(0.0, |k| k.1)
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        for w in self.knots.windows(2) {
            let ((s0, r0), (s1, r1)) = (w[0], w[1]);
            if s <= s1 {
                return r0 + (r1 - r0) * (s - s0) / (s1 - s0);
            }
        }
        let &(s_last, r_last) = self.knots.last().expect("origin knot");
        r_last + self.tail_slope * (s - s_last)
    }

    /// `sup { s : ρ(s) <= u }`, the conservative inverse for a lower envelope.
    pub fn inverse(&self, u: f64) -> InverseValue {
        let u = u.max(0.0);
        let &(s_last, r_last) = self.knots.last().expect("origin knot");
        if u >= r_last {
            return InverseValue {
                value: s_last + (u - r_last) / self.tail_slope,
                extrapolated: !self.certified_tail && u > r_last,
            };
        }
        // first knot strictly above u; answer lies on the segment before it
        let idx = self
            .knots
            .iter()
            .position(|k| k.1 > u)
            .expect("u below last knot");
        let ((s0, r0), (s1, r1)) = (self.knots[idx - 1], self.knots[idx]);
        InverseValue {
            value: s0 + (s1 - s0) * (u - r0) / (r1 - r0),
            extrapolated: false,
        }
    }
}

/// Grid resolution for [`estimate_lipschitz`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzGrid {
    pub n_theta: usize,
    pub n_xi: usize,
    /// Allowed excess of an estimate over the declared constant.
    pub tolerance: f64,
}

impl Default for LipschitzGrid {
    fn default() -> Self {
        Self {
            n_theta: 201,
            n_xi: 201,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    pub d_theta: f64,
    pub d_xi: f64,
    /// `2 · D_ξ · sup|dξ/dt|`, the slope bound on differences of signals.
    pub d_f: f64,
    pub within_declared: bool,
    pub violations: Vec<alloc::string::String>,
}

/// Finite-difference estimates of `D_θ` and `D_ξ` over
/// `window × [-xi_sup, xi_sup]`, checked against the declared constants.
pub fn estimate_lipschitz(
    class: &SignalClass,
    input: &InputSignal,
    grid: LipschitzGrid,
) -> Result<LipschitzEstimate> {
    if !input.xi_sup.is_finite() {
        return Err(domain("Lipschitz estimation needs a bounded input"));
    }
    if grid.n_theta < 2 || grid.n_xi < 2 {
        return Err(domain("Lipschitz grid needs at least two points per axis"));
    }
    let xi_range = Interval {
        lo: -input.xi_sup,
        hi: input.xi_sup,
    };
    let thetas: Vec<f64> = class.window.grid(grid.n_theta).collect();
    let xis: Vec<f64> = xi_range.grid(grid.n_xi).collect();

    let mut d_theta: f64 = 0.0;
    for &xi in &xis {
        for w in thetas.windows(2) {
            let diff = (class.eval(xi, w[1]) - class.eval(xi, w[0])).abs();
            let dist = class.separation(w[1], w[0]);
            if dist > 0.0 {
                d_theta = d_theta.max(diff / dist);
            } else if diff > 0.0 {
                d_theta = f64::INFINITY;
            }
        }
    }
    let mut d_xi: f64 = 0.0;
    if input.xi_sup > 0.0 {
        for &theta in &thetas {
            for w in xis.windows(2) {
                let diff = (class.eval(w[1], theta) - class.eval(w[0], theta)).abs();
                d_xi = d_xi.max(diff / (w[1] - w[0]));
            }
        }
    }
    let mut violations = Vec::new();
    if d_theta > class.lipschitz_theta + grid.tolerance {
        violations.push(alloc::format!(
            "class {}: D_theta estimate {d_theta} exceeds declared {}",
            class.id,
            class.lipschitz_theta
        ));
    }
    if d_xi > class.lipschitz_xi + grid.tolerance {
        violations.push(alloc::format!(
            "class {}: D_xi estimate {d_xi} exceeds declared {}",
            class.id,
            class.lipschitz_xi
        ));
    }
    Ok(LipschitzEstimate {
        d_theta,
        d_xi,
        d_f: 2.0 * d_xi * input.dxi_sup,
        within_declared: violations.is_empty(),
        violations,
    })
}

/// Smallest period of the input, used as the default persistency window.
pub fn natural_window(input: &InputSignal) -> f64 {
    match input.shape {
        InputShape::Sine { omega, .. } if omega != 0.0 => 2.0 * PI / omega.abs(),
        _ => 2.0 * PI,
    }
}
