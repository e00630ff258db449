//! The five pipelines behind the CLI subcommands. Each returns its report
//! together with the exit code it maps to; artifacts are written under the
//! configured output directory.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use itinerant_core::analysis::{
    convergence_report, summarize_sweep, verify_filtered_pe, verify_state_bounds, winding_budget,
    window_integrals, BoundInputs, BoundsReport, ConvergenceReport, PEReport, PeSpec, SweepSummary,
    WindingBudget,
};
use itinerant_core::classifier::{band_from_noise, DecisionReport, DecisionStatus};
use itinerant_core::experiment::{Experiment, TunedClass};
use itinerant_core::integrator::{ClassifierUnit, Rk4, RunSpec, Trajectory};
use itinerant_core::plant::NoiseProcess;
use itinerant_core::prototype::{init_state, TuningReport};
use itinerant_core::rnn::{
    divergence_check, fit_network, measure_lipschitz, sample_rhs, sample_rhs_random,
    trajectory_box, DivergenceReport, DomainBox, FitReport, SigmoidNetwork,
};
use itinerant_core::signals::{estimate_persistency_envelope, natural_window, PersistencyEstimate};

use crate::config::{ExperimentConfig, LoadedConfig};
use crate::error::{exit, CliError};
use crate::io::OutputDir;

/// A loaded config resolved into a library experiment plus its output directory.
pub struct Context {
    pub config: ExperimentConfig,
    /// Directory relative paths in the config resolve against.
    pub base: PathBuf,
    pub experiment: Experiment,
    pub out: OutputDir,
}

impl Context {
    pub fn new(loaded: &LoadedConfig) -> Result<Self, CliError> {
        let experiment = loaded.config.experiment(&loaded.base)?;
        let dir = if loaded.config.output.dir.is_absolute() {
            loaded.config.output.dir.clone()
        } else {
            loaded.base.join(&loaded.config.output.dir)
        };
        let out = OutputDir::create(&dir, &loaded.hash)?;
        Ok(Self {
            config: loaded.config.clone(),
            base: loaded.base.clone(),
            experiment,
            out,
        })
    }
}

#[derive(Debug)]
pub struct Outcome<T> {
    pub code: u8,
    pub report: T,
    /// The JSON document written for this command.
    pub json: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TuneOutput {
    pub classes: Vec<TuningReport>,
}

pub fn cmd_tune(ctx: &Context) -> Result<Outcome<TuneOutput>, CliError> {
    let tuned = ctx.experiment.tune()?;
    let report = TuneOutput {
        classes: tuned.into_iter().map(|t| t.report).collect(),
    };
    let json = ctx.out.json("tuning.json", "tune", &report)?;
    Ok(Outcome {
        code: exit::OK,
        report,
        json,
    })
}

/// Fills in the accuracy radius of the decided class.
fn annotate_band(
    decision: &mut DecisionReport,
    exp: &Experiment,
    tuned: &[TunedClass],
) -> Result<(), CliError> {
    let Some(label) = decision.decided else {
        return Ok(());
    };
    let Some(t) = tuned.iter().find(|t| t.report.class == label) else {
        return Ok(());
    };
    decision.band_theta = Some(match &t.rho {
        Some(rho) => {
            band_from_noise(exp.plant.noise_bound, exp.plant.phi_min, &t.report, rho)?.theta
        }
        None => t.report.error_bound,
    });
    Ok(())
}

fn convergence_bound(cfg: &ExperimentConfig, tuned: &[TunedClass], idx: usize) -> f64 {
    cfg.analysis.bound.unwrap_or(tuned[idx].report.error_bound)
}

struct Run {
    trajectory: Trajectory,
    convergence: ConvergenceReport,
    decision: DecisionReport,
}

fn run_one(ctx: &Context, tuned: &[TunedClass], theta: f64) -> Result<Run, CliError> {
    let exp = &ctx.experiment;
    let idx = exp.true_index()?;
    let mut trajectory = exp.simulate(tuned, theta)?;
    trajectory.meta.config_hash = Some(ctx.out.hash.clone());
    let bound = convergence_bound(&ctx.config, tuned, idx);
    let proto = &tuned[idx].prototype;
    let mut convergence =
        convergence_report(&trajectory, idx, &proto.class, &proto.config, theta, bound)?;
    let mut decision = exp.decide(&trajectory);
    annotate_band(&mut decision, exp, tuned)?;
    convergence.decided_class = decision.decided;
    Ok(Run {
        trajectory,
        convergence,
        decision,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateOutput {
    pub convergence: ConvergenceReport,
    pub decision: DecisionReport,
    pub winding: Vec<WindingBudget>,
    pub warnings: Vec<String>,
}

pub fn cmd_simulate(ctx: &Context) -> Result<Outcome<SimulateOutput>, CliError> {
    let tuned = ctx.experiment.tune()?;
    let run = run_one(ctx, &tuned, ctx.experiment.true_theta)?;
    ctx.out.trajectory_csv("trajectory.csv", &run.trajectory)?;
    let winding = tuned
        .iter()
        .enumerate()
        .map(|(i, t)| winding_budget(&run.trajectory, &t.prototype.config, i))
        .collect();
    let code = if run.convergence.entered {
        exit::OK
    } else {
        exit::NOT_ENTERED
    };
    let report = SimulateOutput {
        convergence: run.convergence,
        decision: run.decision,
        winding,
        warnings: run.trajectory.meta.warnings,
    };
    let json = ctx.out.json("convergence.json", "simulate", &report)?;
    Ok(Outcome { code, report, json })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepDecision {
    pub theta: f64,
    pub status: DecisionStatus,
    pub decided: Option<usize>,
    pub theta_estimate: Option<f64>,
    pub t_prime: Option<f64>,
    /// `dist(θ̂, E(θ))` of the estimate, when decided.
    pub estimate_error: Option<f64>,
    pub band_theta: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportOutput {
    pub true_class: usize,
    pub bound_used: f64,
    pub summary: SweepSummary,
    pub decisions: Vec<SweepDecision>,
    /// Every grid point decided the true class.
    pub all_decided_true: bool,
}

/// θ sweep over the true class range, one simulation per grid point.
pub fn cmd_report(ctx: &Context) -> Result<Outcome<ReportOutput>, CliError> {
    let exp = &ctx.experiment;
    let tuned = exp.tune()?;
    let idx = exp.true_index()?;
    let class = exp.true_class()?;
    let thetas = exp.theta_grid(ctx.config.analysis.sweep_points)?;
    let runs: Vec<Run> = thetas
        .par_iter()
        .map(|&th| run_one(ctx, &tuned, th))
        .collect::<Result<_, _>>()?;

    let decisions: Vec<SweepDecision> = runs
        .iter()
        .zip(&thetas)
        .map(|(r, &th)| SweepDecision {
            theta: th,
            status: r.decision.status,
            decided: r.decision.decided,
            theta_estimate: r.decision.theta_estimate,
            t_prime: r.decision.t_prime,
            estimate_error: r
                .decision
                .theta_estimate
                .map(|est| class.separation(est, th)),
            band_theta: r.decision.band_theta,
        })
        .collect();
    let reports: Vec<ConvergenceReport> = runs.into_iter().map(|r| r.convergence).collect();
    let summary = summarize_sweep(&reports)?;
    ctx.out.sweep_csv("sweep.csv", &summary.rows)?;

    let all_decided_true = decisions.iter().all(|d| d.decided == Some(exp.true_class));
    let code = if summary.flagged > 0 {
        exit::NOT_ENTERED
    } else if !all_decided_true {
        exit::VERIFICATION
    } else {
        exit::OK
    };
    let report = ReportOutput {
        true_class: exp.true_class,
        bound_used: convergence_bound(&ctx.config, &tuned, idx),
        summary,
        decisions,
        all_decided_true,
    };
    let json = ctx.out.json("report.json", "report", &report)?;
    Ok(Outcome { code, report, json })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Pe,
    Persistency,
    Bounds,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "check", rename_all = "lowercase")]
pub enum VerifyOutput {
    Pe {
        passed: bool,
        report: PEReport,
    },
    Persistency {
        passed: bool,
        classes: Vec<PersistencyCheck>,
    },
    Bounds {
        passed: bool,
        report: BoundsReport,
    },
}

impl VerifyOutput {
    pub fn passed(&self) -> bool {
        match self {
            Self::Pe { passed, .. }
            | Self::Persistency { passed, .. }
            | Self::Bounds { passed, .. } => *passed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PersistencyCheck {
    pub class: usize,
    pub estimate: PersistencyEstimate,
    /// Smallest window maximum among windows starting at or after `late_from`.
    pub late_min: Option<f64>,
    pub late_from: f64,
}

pub fn cmd_verify(ctx: &Context, which: Check) -> Result<Outcome<VerifyOutput>, CliError> {
    let report = match which {
        Check::Pe => verify_pe(ctx)?,
        Check::Persistency => verify_persistency(ctx)?,
        Check::Bounds => verify_bounds(ctx)?,
    };
    let name = match which {
        Check::Pe => "verify_pe.json",
        Check::Persistency => "verify_persistency.json",
        Check::Bounds => "verify_bounds.json",
    };
    let json = ctx.out.json(name, "verify", &report)?;
    let code = if report.passed() {
        exit::OK
    } else {
        exit::VERIFICATION
    };
    Ok(Outcome { code, report, json })
}

/// Drives the filter `ż = −φ(z) + u + η` with `u = ξ` and scans both signals.
fn verify_pe(ctx: &Context) -> Result<VerifyOutput, CliError> {
    let exp = &ctx.experiment;
    let a = &ctx.config.analysis;
    let dt = ctx.config.run.dt;
    let steps = RunSpec {
        t0: 0.0,
        horizon: a.pe_horizon,
        dt,
        record_every: 1,
        seed: ctx.config.seed,
    }
    .steps()?;
    let mut noise = NoiseProcess::new(&exp.plant, ctx.config.seed);
    let mut rk = Rk4::new(1);
    let mut z = [exp.s0];
    let (mut zs, mut us) = (Vec::new(), Vec::new());
    for k in 0..=steps {
        let t = k as f64 * dt;
        if t >= a.pe_transient {
            zs.push(z[0]);
            us.push(exp.input.value(t));
        }
        if k == steps {
            break;
        }
        let eta = noise.sample(t);
        let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = -exp.plant.phi.eval(y[0]) + exp.input.value(t) + eta
        };
        rk.step(&mut rhs, t, &mut z, dt);
    }
    let l = a.pe_window.unwrap_or_else(|| natural_window(&exp.input));
    let delta = match a.pe_delta {
        Some(d) => d,
        None => {
            let w = (l / dt).round() as usize;
            0.999
                * window_integrals(&us, dt, w)
                    .into_iter()
                    .fold(f64::INFINITY, f64::min)
        }
    };
    let spec = PeSpec {
        phi_min: exp.plant.phi_min,
        phi_max: exp.plant.phi_max,
        disturbance: exp.plant.noise_bound,
        u_sup: exp.input.xi_sup,
        du_sup: exp.input.dxi_sup,
    };
    let report = verify_filtered_pe(&zs, &us, dt, &spec, l, delta, a.pe_l_star)?;
    let passed = report.u_excited && report.condition_ok && report.p.is_some();
    Ok(VerifyOutput::Pe { passed, report })
}

fn verify_persistency(ctx: &Context) -> Result<VerifyOutput, CliError> {
    let exp = &ctx.experiment;
    let a = &ctx.config.analysis;
    let window_t = a
        .persistency_window
        .unwrap_or_else(|| natural_window(&exp.input));
    let n = ctx.config.rho.n_separations.max(1);
    let classes: Vec<PersistencyCheck> = exp
        .classes
        .par_iter()
        .map(|class| {
            let thetas: Vec<f64> = class.window.grid(ctx.config.rho.n_thetas.max(2)).collect();
            let span = class.window.width();
            let seps: Vec<f64> = (1..=n).map(|k| span * k as f64 / n as f64).collect();
            let estimate = estimate_persistency_envelope(
                class,
                &exp.input,
                &thetas,
                &seps,
                window_t,
                a.persistency_horizon,
                a.persistency_dt,
            )?;
            let late_min = estimate
                .window_maxima
                .iter()
                .filter(|w| w.0 >= a.persistency_late_from)
                .map(|w| w.1)
                .reduce(f64::min);
            Ok(PersistencyCheck {
                class: class.id,
                estimate,
                late_min,
                late_from: a.persistency_late_from,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let passed = classes.iter().all(|c| c.estimate.satisfied);
    Ok(VerifyOutput::Persistency { passed, classes })
}

fn verify_bounds(ctx: &Context) -> Result<VerifyOutput, CliError> {
    let exp = &ctx.experiment;
    let tuned = exp.tune()?;
    let traj = exp.simulate(&tuned, exp.true_theta)?;
    let inputs: Vec<BoundInputs> = tuned
        .iter()
        .map(|t| BoundInputs {
            a: t.report.a,
            b: t.report.b,
            d_theta: t.report.d_theta,
        })
        .collect();
    let report = verify_state_bounds(
        &traj,
        &inputs,
        exp.plant.phi_min,
        exp.plant.noise_bound,
        ctx.config.analysis.bounds_tol,
    )?;
    Ok(VerifyOutput::Bounds {
        passed: report.passed,
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassFit {
    pub class: usize,
    pub report: FitReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecisionComparison {
    pub prototype: DecisionReport,
    pub rnn: DecisionReport,
    pub matched: bool,
    pub rnn_warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitRnnOutput {
    pub fits: Vec<ClassFit>,
    /// Networks with the most units, checked against the prototype.
    pub checked_n: usize,
    pub divergence: Vec<DivergenceReport>,
    pub lipschitz_method: String,
    pub decision_check: Option<DecisionComparison>,
}

/// Fitting box of one class: analytic state bounds inflated by the margin.
pub fn fitting_box(ctx: &Context, t: &TunedClass) -> Result<DomainBox, CliError> {
    let exp = &ctx.experiment;
    let s0_max = exp.plant.s0_range.abs_max().max(exp.shat0.abs());
    Ok(DomainBox::from_bounds(
        &t.prototype.class,
        &t.prototype.config,
        &exp.plant,
        &exp.input,
        s0_max,
        1.0,
        ctx.config.rnn.margin,
    )?)
}

fn fit_one(
    ctx: &Context,
    t: &TunedClass,
    n_units: usize,
) -> Result<(SigmoidNetwork, FitReport), CliError> {
    let spec = ctx.config.fit_spec(n_units);
    let proto = &t.prototype;
    let bx = fitting_box(ctx, t)?;
    let data = match &ctx.config.rnn.dataset {
        Some(path) => crate::io::read_dataset(&ctx.base.join(path), proto.class.id)?,
        None => sample_rhs(proto, &bx, spec.grid)?,
    };
    let validation = sample_rhs_random(proto, &bx, spec.validation, spec.seed);
    Ok(fit_network(
        &data,
        &validation,
        &bx,
        &spec,
        proto.class.id,
        (proto.config.a, proto.config.b),
    )?)
}

fn initial_states(exp: &Experiment, tuned: &[TunedClass]) -> Vec<[f64; 3]> {
    tuned
        .iter()
        .map(|t| init_state(&t.prototype.config, exp.shat0).to_array())
        .collect()
}

pub fn cmd_fit_rnn(ctx: &Context) -> Result<Outcome<FitRnnOutput>, CliError> {
    let exp = &ctx.experiment;
    let cfg = &ctx.config.rnn;
    if cfg.n_units.is_empty() {
        return Err(CliError::Parse("rnn.n_units is empty".into()));
    }
    let tuned = exp.tune()?;
    let jobs: Vec<(usize, usize)> = cfg
        .n_units
        .iter()
        .flat_map(|&n| (0..tuned.len()).map(move |i| (n, i)))
        .collect();
    let fitted: Vec<(SigmoidNetwork, FitReport)> = jobs
        .par_iter()
        .map(|&(n, i)| fit_one(ctx, &tuned[i], n))
        .collect::<Result<_, _>>()?;

    for ((n, i), (net, _)) in jobs.iter().zip(&fitted) {
        ctx.out.json(
            &format!("network_N{n}_class{}.json", tuned[*i].report.class),
            "fit-rnn",
            net,
        )?;
    }
    let checked_n = *cfg.n_units.iter().max().expect("non-empty");
    let nets: Vec<&SigmoidNetwork> = jobs
        .iter()
        .zip(&fitted)
        .filter(|((n, _), _)| *n == checked_n)
        .map(|(_, (net, _))| net)
        .collect();

    let init = initial_states(exp, &tuned);
    let proto_bank: Vec<&dyn ClassifierUnit> = tuned
        .iter()
        .map(|t| &t.prototype as &dyn ClassifierUnit)
        .collect();
    let net_bank: Vec<&dyn ClassifierUnit> =
        nets.iter().map(|n| *n as &dyn ClassifierUnit).collect();
    let short = RunSpec {
        t0: exp.run.t0,
        horizon: cfg.check_horizon,
        dt: cfg.check_dt,
        record_every: 1,
        seed: exp.run.seed,
    };
    let proto_traj = exp.simulate_bank(&proto_bank, &init, exp.true_theta, &short)?;
    let net_traj = exp.simulate_bank(&net_bank, &init, exp.true_theta, &short)?;
    let divergence = (0..tuned.len())
        .map(|i| {
            let l_i = measure_lipschitz(
                &tuned[i].prototype,
                &trajectory_box(&proto_traj, i)?,
                9,
                1e-6,
            );
            divergence_check(&proto_traj, &net_traj, i, nets[i].eps_n, l_i, 1e-12)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let decision_check = if cfg.decision_check {
        let full = RunSpec {
            dt: cfg.decision_dt,
            record_every: ((exp.run.dt * exp.run.record_every as f64) / cfg.decision_dt)
                .round()
                .max(1.0) as usize,
            ..exp.run
        };
        let p = exp.simulate_bank(&proto_bank, &init, exp.true_theta, &full)?;
        let r = exp.simulate_bank(&net_bank, &init, exp.true_theta, &full)?;
        let (prototype, rnn) = (exp.decide(&p), exp.decide(&r));
        let matched = prototype.status == rnn.status && prototype.decided == rnn.decided;
        Some(DecisionComparison {
            prototype,
            rnn,
            matched,
            rnn_warnings: r.meta.warnings,
        })
    } else {
        None
    };

    let passed = divergence.iter().all(|d| d.passed);
    let report = FitRnnOutput {
        fits: jobs.iter().zip(fitted).map(|((_, i), (_, rep))| ClassFit { class: tuned[*i].report.class, report: rep }).collect(),
        checked_n,
        divergence,
        lipschitz_method: String::from(
            "max Frobenius norm of the central-difference Jacobian (h = 1e-6) of the prototype field over a 9^5 grid on the prototype trajectory box",
        ),
        decision_check,
    };
    let json = ctx.out.json("fit_report.json", "fit-rnn", &report)?;
    Ok(Outcome {
        code: if passed { exit::OK } else { exit::VERIFICATION },
        report,
        json,
    })
}
