//! Fixed-weight sigmoid realization of a class subsystem.
//!
//! Each class gets a network `ζ̇ = Σ_j α_j σ(ω_jᵀ(ξ ⊕ s ⊕ ζ) + β_j)` with three
//! states `ζ = (ŝ, x, y)`. Hidden weights are drawn at random from a seeded
//! distribution scaled to the fitting box, and the output coefficients are a
//! ridge least-squares fit to samples of the prototype right-hand side.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::integrator::{ClassifierUnit, Trajectory};
use crate::plant::PlantSpec;
use crate::prototype::{Prototype, PrototypeConfig};
use crate::rng;
use crate::signals::{InputSignal, SignalClass};

/// Input order of the network: `ξ, s, ŝ, x, y`.
pub const INPUT_DIM: usize = 5;
pub const STATE_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sigmoid {
    Logistic,
    Tanh,
}

impl Sigmoid {
    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        match self {
            Self::Logistic => 1.0 / (1.0 + libm::exp(-u)),
            Self::Tanh => libm::tanh(u),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Logistic => "logistic",
            Self::Tanh => "tanh",
        }
    }
}

/// Axis-aligned box over `(ξ, s, ŝ, x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lo: [f64; INPUT_DIM],
    pub hi: [f64; INPUT_DIM],
}

impl DomainBox {
    pub fn new(lo: [f64; INPUT_DIM], hi: [f64; INPUT_DIM]) -> Result<Self> {
        if lo
            .iter()
            .zip(&hi)
            .any(|(l, h)| !(l < h && l.is_finite() && h.is_finite()))
        {
            return Err(domain("degenerate fitting box"));
        }
        Ok(Self { lo, hi })
    }

    /// Analytic state bounds of a class subsystem, inflated by `margin`:
    /// `|x|, |y| <= max{1, r(0)}`, `|ŝ|, |s| <= |s(0)| + (max{|a|,|b|} D_θ + Δ_η)/φ_min`.
    pub fn from_bounds(
        class: &SignalClass,
        config: &PrototypeConfig,
        plant: &PlantSpec,
        input: &InputSignal,
        s0_max: f64,
        r0: f64,
        margin: f64,
    ) -> Result<Self> {
        let grow = 1.0 + margin;
        let v = r0.max(1.0) * grow;
        let s = (s0_max.abs()
            + (config.a.abs().max(config.b.abs()) * class.lipschitz_theta + plant.noise_bound)
                / plant.phi_min)
            * grow;
        let xi = input.xi_sup * grow;
        Self::new([-xi, -s, -s, -v, -v], [xi, s, s, v, v])
    }

    pub fn contains(&self, z: &[f64; INPUT_DIM]) -> bool {
        z.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *l <= *v && *v <= *h)
    }
}

/// Samples of the map `(ξ, s, ŝ, x, y) ↦ (dŝ, dx, dy)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub inputs: Vec<[f64; INPUT_DIM]>,
    pub targets: Vec<[f64; STATE_DIM]>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

fn axis(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
    if n <= 1 {
        0.5 * (lo + hi)
    } else {
        lo + (hi - lo) * k as f64 / (n - 1) as f64
    }
}

/// Tensor-grid samples of a unit's right-hand side over `domain`.
pub fn sample_rhs(
    unit: &dyn ClassifierUnit,
    domain_box: &DomainBox,
    grid: [usize; INPUT_DIM],
) -> Result<Dataset> {
    if grid.contains(&0) {
        return Err(domain("every grid axis needs at least one point"));
    }
    let total: usize = grid.iter().product();
    let mut out = Dataset {
        inputs: Vec::with_capacity(total),
        targets: Vec::with_capacity(total),
    };
    let mut idx = [0usize; INPUT_DIM];
    for _ in 0..total {
        let z: [f64; INPUT_DIM] =
            core::array::from_fn(|k| axis(domain_box.lo[k], domain_box.hi[k], grid[k], idx[k]));
        out.targets.push(unit.rhs([z[2], z[3], z[4]], z[1], z[0]));
        out.inputs.push(z);
        for k in (0..INPUT_DIM).rev() {
            idx[k] += 1;
            if idx[k] < grid[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(out)
}

/// Uniform random samples of a unit's right-hand side over `domain`.
pub fn sample_rhs_random(
    unit: &dyn ClassifierUnit,
    domain_box: &DomainBox,
    n: usize,
    seed: u64,
) -> Dataset {
    let mut rng = rng::stream(seed, "rnn-validation");
    let mut out = Dataset {
        inputs: Vec::with_capacity(n),
        targets: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let z: [f64; INPUT_DIM] =
            core::array::from_fn(|k| rng.random_range(domain_box.lo[k]..=domain_box.hi[k]));
        out.targets.push(unit.rhs([z[2], z[3], z[4]], z[1], z[0]));
        out.inputs.push(z);
    }
    out
}

/// Directions spanning the subspace a group of hidden units looks at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureGroup {
    pub basis: Vec<[f64; INPUT_DIM]>,
    pub count: usize,
}

impl FeatureGroup {
    fn coordinate(k: usize) -> [f64; INPUT_DIM] {
        let mut e = [0.0; INPUT_DIM];
        e[k] = 1.0;
        e
    }

    /// Units looking at all five inputs.
    pub fn dense(count: usize) -> Self {
        Self {
            basis: (0..INPUT_DIM).map(Self::coordinate).collect(),
            count,
        }
    }

    /// The three groups matching the dependencies of a prototype subsystem:
    /// `ŝ` alone, `(ξ, x)`, and `(ŝ − s, x, y)`.
    pub fn prototype_layout(n: usize) -> Vec<Self> {
        let n_shat = (n / 20).max(1).min(n);
        let n_filter = (n - n_shat) / 2;
        let n_rot = n - n_shat - n_filter;
        vec![
            Self {
                basis: vec![Self::coordinate(2)],
                count: n_shat,
            },
            Self {
                basis: vec![Self::coordinate(0), Self::coordinate(3)],
                count: n_filter,
            },
            Self {
                basis: vec![
                    [0.0, -1.0, 1.0, 0.0, 0.0],
                    Self::coordinate(3),
                    Self::coordinate(4),
                ],
                count: n_rot,
            },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Dense,
    Structured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    pub n_units: usize,
    pub ridge: f64,
    pub seed: u64,
    pub sigmoid: Sigmoid,
    pub layout: Layout,
    /// Range of slopes, in units of the inverse half-width of the box.
    pub scale: (f64, f64),
    pub grid: [usize; INPUT_DIM],
    pub validation: usize,
}

impl Default for FitSpec {
    fn default() -> Self {
        Self {
            n_units: 400,
            ridge: 1e-8,
            seed: 11,
            sigmoid: Sigmoid::Logistic,
            layout: Layout::Structured,
            scale: (0.5, 6.0),
            grid: [9, 7, 9, 9, 9],
            validation: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HiddenUnit {
    pub omega: [f64; INPUT_DIM],
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmoidNetwork {
    #[serde(rename = "N")]
    pub n: usize,
    pub sigmoid: Sigmoid,
    pub units: Vec<HiddenUnit>,
    /// Output coefficients, one array per state component.
    pub alpha: [Vec<f64>; STATE_DIM],
    pub domain: DomainBox,
    /// Sup over the fitting and validation samples of the Euclidean output error.
    pub eps_n: f64,
    pub label: usize,
    /// `[a, b]` of the parameter read-out.
    pub span: (f64, f64),
}

impl SigmoidNetwork {
    /// Zero network: every output coefficient vanishes.
    pub fn zero(
        n: usize,
        sigmoid: Sigmoid,
        domain: DomainBox,
        label: usize,
        span: (f64, f64),
    ) -> Self {
        Self {
            n,
            sigmoid,
            units: vec![
                HiddenUnit {
                    omega: [0.0; INPUT_DIM],
                    beta: 0.0
                };
                n
            ],
            alpha: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            domain,
            eps_n: 0.0,
            label,
            span,
        }
    }

    #[inline]
    pub fn eval(&self, z: &[f64; INPUT_DIM]) -> [f64; STATE_DIM] {
        let mut out = [0.0; STATE_DIM];
        for (j, u) in self.units.iter().enumerate() {
            let arg = u.omega.iter().zip(z).map(|(w, v)| w * v).sum::<f64>() + u.beta;
            let h = self.sigmoid.eval(arg);
            for (o, a) in out.iter_mut().zip(&self.alpha) {
                *o += a[j] * h;
            }
        }
        out
    }

    fn features(&self, z: &[f64; INPUT_DIM], out: &mut [f64]) {
        for (o, u) in out.iter_mut().zip(&self.units) {
            let arg = u.omega.iter().zip(z).map(|(w, v)| w * v).sum::<f64>() + u.beta;
            *o = self.sigmoid.eval(arg);
        }
    }

    /// Sup of the Euclidean error and of each component over a dataset.
    pub fn sup_error(&self, data: &Dataset) -> (f64, [f64; STATE_DIM]) {
        let mut sup = 0.0f64;
        let mut rows = [0.0f64; STATE_DIM];
        for (z, t) in data.inputs.iter().zip(&data.targets) {
            let y = self.eval(z);
            let mut sq = 0.0;
            for k in 0..STATE_DIM {
                let e = (y[k] - t[k]).abs();
                rows[k] = rows[k].max(e);
                sq += e * e;
            }
            sup = sup.max(libm::sqrt(sq));
        }
        (sup, rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub train_error_sup: f64,
    pub validation_error_sup: f64,
    /// Per-component validation sup error `(ŝ, x, y)`.
    pub validation_rows: [f64; STATE_DIM],
    pub domain: DomainBox,
    pub seed: u64,
    pub layout: Layout,
    pub samples: usize,
}

fn draw_units(
    spec: &FitSpec,
    domain_box: &DomainBox,
    rng: &mut impl Rng,
) -> Result<Vec<HiddenUnit>> {
    let groups = match spec.layout {
        Layout::Dense => vec![FeatureGroup::dense(spec.n_units)],
        Layout::Structured => FeatureGroup::prototype_layout(spec.n_units),
    };
    let (smin, smax) = spec.scale;
    if !(smin > 0.0 && smax >= smin) {
        return Err(domain("slope range must satisfy 0 < min <= max"));
    }
    let mut units = Vec::with_capacity(spec.n_units);
    for g in &groups {
        // projected range of each basis direction over the box
        let ranges: Vec<(f64, f64)> = g
            .basis
            .iter()
            .map(|d| {
                let mut lo = 0.0;
                let mut hi = 0.0;
                for k in 0..INPUT_DIM {
                    let (p, q) = (d[k] * domain_box.lo[k], d[k] * domain_box.hi[k]);
                    lo += p.min(q);
                    hi += p.max(q);
                }
                (lo, hi)
            })
            .collect();
        for _ in 0..g.count {
            let mut dir: Vec<f64> = (0..g.basis.len())
                .map(|_| rng.random_range(-1.0..=1.0))
                .collect();
            let norm = libm::sqrt(dir.iter().map(|v| v * v).sum::<f64>()).max(1e-12);
            let scale = rng.random_range(smin..=smax);
            let mut omega = [0.0; INPUT_DIM];
            let mut beta = 0.0;
            for (m, w) in dir.iter_mut().enumerate() {
                let (lo, hi) = ranges[m];
                let half = 0.5 * (hi - lo);
                *w = *w / norm * scale / half;
                let center = rng.random_range(lo..=hi);
                beta -= *w * center;
                for (o, b) in omega.iter_mut().zip(&g.basis[m]) {
                    *o += *w * b;
                }
            }
            units.push(HiddenUnit { omega, beta });
        }
    }
    Ok(units)
}

/// Ridge least-squares fit of the output coefficients over random hidden units.
pub fn fit_network(
    data: &Dataset,
    validation: &Dataset,
    domain_box: &DomainBox,
    spec: &FitSpec,
    label: usize,
    span: (f64, f64),
) -> Result<(SigmoidNetwork, FitReport)> {
    if spec.n_units == 0 {
        return Err(domain("network needs at least one unit"));
    }
    if data.is_empty() {
        return Err(domain("empty dataset"));
    }
    if !(spec.ridge >= 0.0) {
        return Err(domain("ridge must be non-negative"));
    }
    let mut rng = rng::stream(spec.seed, "rnn-units");
    let units = draw_units(spec, domain_box, &mut rng)?;
    let n = units.len();
    let mut net = SigmoidNetwork::zero(n, spec.sigmoid, *domain_box, label, span);
    net.units = units;

    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut rhs = [
        DVector::<f64>::zeros(n),
        DVector::<f64>::zeros(n),
        DVector::<f64>::zeros(n),
    ];
    let mut phi = vec![0.0; n];
    for (z, t) in data.inputs.iter().zip(&data.targets) {
        net.features(z, &mut phi);
        for a in 0..n {
            let pa = phi[a];
            if pa == 0.0 {
                continue;
            }
            for b in a..n {
                gram[(a, b)] += pa * phi[b];
            }
            for k in 0..STATE_DIM {
                rhs[k][a] += pa * t[k];
            }
        }
    }
    let m = data.len() as f64;
    for a in 0..n {
        for b in a..n {
            let v = gram[(a, b)] / m;
            gram[(a, b)] = v;
            gram[(b, a)] = v;
        }
        gram[(a, a)] += spec.ridge;
    }
    let chol = gram.cholesky().ok_or_else(|| {
        Error::Singular(String::from(
            "normal equations are not positive definite; increase the ridge parameter",
        ))
    })?;
    for k in 0..STATE_DIM {
        let sol = chol.solve(&(&rhs[k] / m));
        if sol.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular(String::from(
                "non-finite coefficients; increase the ridge parameter",
            )));
        }
        net.alpha[k] = sol.iter().copied().collect();
    }
    let (train, _) = net.sup_error(data);
    let (val, rows) = if validation.is_empty() {
        (train, [0.0; STATE_DIM])
    } else {
        net.sup_error(validation)
    };
    net.eps_n = train.max(val);
    let report = FitReport {
        n,
        train_error_sup: train,
        validation_error_sup: val,
        validation_rows: rows,
        domain: *domain_box,
        seed: spec.seed,
        layout: spec.layout,
        samples: data.len(),
    };
    Ok((net, report))
}

/// Samples a prototype on the grid of `spec`, validates on random points and fits.
pub fn fit_prototype(
    proto: &Prototype,
    domain_box: &DomainBox,
    spec: &FitSpec,
) -> Result<(SigmoidNetwork, FitReport)> {
    let data = sample_rhs(proto, domain_box, spec.grid)?;
    let validation = sample_rhs_random(proto, domain_box, spec.validation, spec.seed);
    fit_network(
        &data,
        &validation,
        domain_box,
        spec,
        proto.class.id,
        (proto.config.a, proto.config.b),
    )
}

impl ClassifierUnit for SigmoidNetwork {
    #[inline]
    fn rhs(&self, q: [f64; 3], s: f64, xi: f64) -> [f64; 3] {
        self.eval(&[xi, s, q[0], q[1], q[2]])
    }

    fn span(&self) -> (f64, f64) {
        self.span
    }

    fn label(&self) -> usize {
        self.label
    }

    fn in_domain(&self, q: [f64; 3], s: f64, xi: f64) -> bool {
        self.domain.contains(&[xi, s, q[0], q[1], q[2]])
    }
}

/// Largest Frobenius norm of the central-difference Jacobian of `unit` with
/// respect to `(ŝ, x, y)` over a grid on `domain`.
pub fn measure_lipschitz(
    unit: &dyn ClassifierUnit,
    domain_box: &DomainBox,
    n: usize,
    h: f64,
) -> f64 {
    let n = n.max(2);
    let mut best = 0.0f64;
    let grid = [n; INPUT_DIM];
    let total: usize = grid.iter().product();
    let mut idx = [0usize; INPUT_DIM];
    for _ in 0..total {
        let z: [f64; INPUT_DIM] =
            core::array::from_fn(|k| axis(domain_box.lo[k], domain_box.hi[k], n, idx[k]));
        let mut fro = 0.0;
        for c in 0..STATE_DIM {
            let mut qp = [z[2], z[3], z[4]];
            let mut qm = qp;
            qp[c] += h;
            qm[c] -= h;
            let fp = unit.rhs(qp, z[1], z[0]);
            let fm = unit.rhs(qm, z[1], z[0]);
            for r in 0..STATE_DIM {
                let d = (fp[r] - fm[r]) / (2.0 * h);
                fro += d * d;
            }
        }
        best = best.max(libm::sqrt(fro));
        for k in (0..INPUT_DIM).rev() {
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
        }
    }
    best
}

/// Smallest box containing every recorded `(ξ, s, ŝ, x, y)` of class index `i`.
pub fn trajectory_box(traj: &Trajectory, i: usize) -> Result<DomainBox> {
    if traj.is_empty() {
        return Err(domain("empty trajectory"));
    }
    let mut lo = [f64::INFINITY; INPUT_DIM];
    let mut hi = [f64::NEG_INFINITY; INPUT_DIM];
    for k in 0..traj.len() {
        let q = traj.q(k, i);
        let z = [traj.xi[k], traj.s(k), q[0], q[1], q[2]];
        for d in 0..INPUT_DIM {
            lo[d] = lo[d].min(z[d]);
            hi[d] = hi[d].max(z[d]);
        }
    }
    for d in 0..INPUT_DIM {
        if lo[d] == hi[d] {
            lo[d] -= 1e-9;
            hi[d] += 1e-9;
        }
    }
    DomainBox::new(lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub passed: bool,
    pub eps_n: f64,
    #[serde(rename = "L_i")]
    pub l_i: f64,
    /// Largest `gap − bound` over the record.
    pub worst_margin: f64,
    pub max_gap: f64,
    /// `(t, gap, bound)` per recorded sample.
    pub samples: Vec<(f64, f64, f64)>,
}

/// Compares class index `i` of two runs against
/// `‖q − ζ‖(t) <= (ε_N / L_i)(e^{L_i (t − t0)} − 1)`.
pub fn divergence_check(
    proto: &Trajectory,
    net: &Trajectory,
    i: usize,
    eps_n: f64,
    l_i: f64,
    tol: f64,
) -> Result<DivergenceReport> {
    if proto.len() != net.len()
        || proto.meta.dt != net.meta.dt
        || proto.meta.record_every != net.meta.record_every
    {
        return Err(Error::GridMismatch(String::from(
            "trajectories were recorded on different grids",
        )));
    }
    if proto.is_empty() {
        return Err(domain("empty trajectories"));
    }
    if !(l_i > 0.0 && eps_n >= 0.0) {
        return Err(domain("divergence check needs L_i > 0 and eps_N >= 0"));
    }
    let t0 = proto.times[0];
    let mut samples = Vec::with_capacity(proto.len());
    let mut worst = f64::NEG_INFINITY;
    let mut max_gap = 0.0f64;
    for k in 0..proto.len() {
        let (a, b) = (proto.q(k, i), net.q(k, i));
        let gap = libm::sqrt(
            (0..STATE_DIM)
                .map(|c| (a[c] - b[c]) * (a[c] - b[c]))
                .sum::<f64>(),
        );
        let bound = eps_n / l_i * libm::expm1(l_i * (proto.times[k] - t0));
        worst = worst.max(gap - bound);
        max_gap = max_gap.max(gap);
        samples.push((proto.times[k], gap, bound));
    }
    Ok(DivergenceReport {
        passed: worst <= tol,
        eps_n,
        l_i,
        worst_margin: worst,
        max_gap,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::Filter;
    use crate::signals::{Interval, SignalFamily};

    fn proto(delta: f64) -> Prototype {
        let class = SignalClass::builtin(
            2,
            SignalFamily::Sine,
            Interval { lo: 0.5, hi: 2.0 },
            Interval { lo: 0.25, hi: 2.25 },
            1.0,
        )
        .unwrap();
        let config = PrototypeConfig {
            gamma: 0.03,
            a: 0.25,
            b: 2.25,
            epsilon: 1e-4,
            delta,
            nu_x: 0.0,
            k_prime: 1,
            kappa: 2.0,
            d: 0.5,
        };
        Prototype {
            class,
            filter: Filter::IDENTITY,
            config,
        }
    }

    fn unit_box() -> DomainBox {
        DomainBox::new([-1.2, -2.7, -2.7, -1.2, -1.2], [1.2, 2.7, 2.7, 1.2, 1.2]).unwrap()
    }

    #[test]
    fn dataset_shape_and_targets() {
        let p = proto(0.0);
        let data = sample_rhs(&p, &unit_box(), [2, 3, 1, 4, 5]).unwrap();
        assert_eq!(data.len(), 120);
        for (z, t) in data.inputs.iter().zip(&data.targets) {
            assert_eq!(*t, p.rhs([z[2], z[3], z[4]], z[1], z[0]));
        }
    }

    #[test]
    fn on_circle_without_error_targets_vanish() {
        let p = proto(0.0);
        for k in 0..16 {
            let nu = k as f64 * 0.4;
            let t = p.rhs([0.3, libm::cos(nu), libm::sin(nu)], 0.3, 0.5);
            assert_eq!((t[1], t[2]), (0.0, 0.0));
        }
    }

    #[test]
    fn zero_targets_give_zero_network() {
        let p = proto(0.0);
        let mut data = sample_rhs(&p, &unit_box(), [3; INPUT_DIM]).unwrap();
        data.targets.iter_mut().for_each(|t| *t = [0.0; 3]);
        let spec = FitSpec {
            n_units: 30,
            ..FitSpec::default()
        };
        let (net, report) = fit_network(
            &data,
            &Dataset::default(),
            &unit_box(),
            &spec,
            2,
            (0.25, 2.25),
        )
        .unwrap();
        assert!(net.alpha.iter().all(|a| a.iter().all(|v| *v == 0.0)));
        assert_eq!(net.eps_n, 0.0);
        assert_eq!(report.train_error_sup, 0.0);
    }

    #[test]
    fn refit_is_deterministic() {
        let p = proto(1e-3);
        let spec = FitSpec {
            n_units: 40,
            grid: [3, 3, 3, 3, 3],
            validation: 100,
            ..FitSpec::default()
        };
        let a = fit_prototype(&p, &unit_box(), &spec).unwrap();
        let b = fit_prototype(&p, &unit_box(), &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_network_is_frozen() {
        let net = SigmoidNetwork::zero(5, Sigmoid::Logistic, unit_box(), 1, (0.0, 1.0));
        assert_eq!(net.rhs([0.3, 0.2, -0.1], 1.0, 0.5), [0.0; 3]);
    }

    #[test]
    fn divergence_of_identical_runs_is_zero() {
        use crate::integrator::TrajectoryMeta;
        let t = Trajectory {
            n_classes: 1,
            times: vec![0.0, 0.1],
            states: vec![0.0, 0.1, 1.0, 0.0, 0.0, 0.2, 1.0, 0.0],
            readouts: vec![0.0; 4],
            xi: vec![0.0; 2],
            meta: TrajectoryMeta {
                dt: 0.1,
                record_every: 1,
                ..Default::default()
            },
        };
        let r = divergence_check(&t, &t, 0, 0.1, 2.0, 0.0).unwrap();
        assert!(r.passed);
        assert_eq!(r.max_gap, 0.0);
        assert_eq!(r.samples[0].2, 0.0);
    }

    #[test]
    fn lipschitz_of_linear_map() {
        struct Lin;
        impl ClassifierUnit for Lin {
            fn rhs(&self, q: [f64; 3], _s: f64, _xi: f64) -> [f64; 3] {
                [-2.0 * q[0], q[1] + q[2], 0.0]
            }
            fn span(&self) -> (f64, f64) {
                (0.0, 1.0)
            }
            fn label(&self) -> usize {
                1
            }
        }
        // Jacobian [[-2,0,0],[0,1,1],[0,0,0]] has Frobenius norm √6
        let l = measure_lipschitz(&Lin, &unit_box(), 3, 1e-4);
        assert!((l - 6f64.sqrt()).abs() < 1e-9);
    }
}
