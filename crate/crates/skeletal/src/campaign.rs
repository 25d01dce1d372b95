//! Per-case sensitivity runs, importance aggregation and ignition-delay
//! validation of skeletal models.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rayon::prelude::*;
use skeletal_core::bdf::Startup;
use skeletal_core::fom::{integrate_state, isvd, FomStepper, MechanismTangent, Trajectory};
use skeletal_core::ignition::{ignition_delay, relative_error, CaseSpec, IgnitionCriterion};
use skeletal_core::ranking::{reaction_weights, ChiAccumulator};
use skeletal_core::tdbcur::{RomIntegrator, SensitivityFactors, StepDiagnostics, TdbCurOptions};
use skeletal_core::{Error, Mechanism};

/// Run `f` over `items` on `jobs` worker threads; results keep input order.
pub fn parallel_map<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if jobs <= 1 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    pool.install(|| items.par_iter().map(f).collect())
}

pub fn simulate(mechanism: &Mechanism, case: &CaseSpec) -> Result<Trajectory, Error> {
    let initial = case.initial_state(mechanism)?;
    integrate_state(mechanism, &initial, case.dt, case.t_end, Startup::Block)
}

/// Ignition delay, or `None` when the trace never ignites.
pub fn delay(trajectory: &Trajectory, criterion: IgnitionCriterion) -> Result<Option<f64>, Error> {
    match ignition_delay(&trajectory.times, &trajectory.temperatures(), criterion) {
        Ok(t) => Ok(Some(t)),
        Err(Error::NoIgnition { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// A saved singular-value sample: `(step, time, σ)`.
pub type SigmaSample = (usize, f64, Vec<f64>);

fn saved(k: usize, last: usize, every: usize) -> bool {
    k % every == 0 || k == last
}

/// Full-order sensitivity run.
pub struct FomRun {
    pub sigma: Vec<SigmaSample>,
    /// Integrator time only; snapshot handling is excluded.
    pub wall: Duration,
    pub steps: usize,
}

/// Integrate the dense sensitivity matrix, reporting the iSVD spectrum (top
/// `keep` values) and passing each saved matrix to `sink`.
pub fn run_fom<S>(
    mechanism: &Mechanism,
    trajectory: &Trajectory,
    save_every: usize,
    keep: usize,
    mut sink: S,
) -> Result<FomRun, Error>
where
    S: FnMut(usize, f64, &DMatrix<f64>) -> Result<(), Error>,
{
    let src = MechanismTangent::new(mechanism, trajectory);
    let last = trajectory.step_count();
    let mut sigma = Vec::new();
    let mut record = |k: usize, t: f64, s: &DMatrix<f64>| -> Result<(), Error> {
        if saved(k, last, save_every) {
            let mut sv = isvd(s).sigma;
            sv.truncate(keep);
            sigma.push((k, t, sv));
            sink(k, t, s)?;
        }
        Ok(())
    };
    let mut wall = Duration::ZERO;
    let start = Instant::now();
    let mut fom = FomStepper::new(&src, Startup::Block);
    wall += start.elapsed();
    record(0, fom.time(), fom.current())?;
    while !fom.finished() {
        let start = Instant::now();
        fom.advance()?;
        wall += start.elapsed();
        record(fom.step(), fom.time(), fom.current())?;
    }
    Ok(FomRun { sigma, wall, steps: last })
}

/// Low-rank sensitivity run.
pub struct RomRun {
    pub sigma: Vec<SigmaSample>,
    /// Running maximum of the reaction weights over every level.
    pub chi: Vec<f64>,
    pub diagnostics: Vec<StepDiagnostics>,
    /// Warmup plus low-rank steps; snapshot handling is excluded.
    pub wall: Duration,
    pub steps: usize,
}

pub fn run_rom<S>(
    mechanism: &Mechanism,
    trajectory: &Trajectory,
    options: TdbCurOptions,
    save_every: usize,
    mut sink: S,
) -> Result<RomRun, Error>
where
    S: FnMut(&SensitivityFactors) -> Result<(), Error>,
{
    let src = MechanismTangent::new(mechanism, trajectory);
    let last = trajectory.step_count();
    let mut chi = ChiAccumulator::new();
    let mut sigma = Vec::new();
    let mut record = |f: &SensitivityFactors| -> Result<(), Error> {
        chi.add(&reaction_weights(&f.sigma, &f.y))?;
        if saved(f.step, last, save_every) {
            sigma.push((f.step, f.time, f.sigma.clone()));
            sink(f)?;
        }
        Ok(())
    };
    let start = Instant::now();
    let mut rom = RomIntegrator::new(&src, options)?;
    let mut wall = start.elapsed();
    for f in rom.levels() {
        record(f)?;
    }
    while !rom.finished() {
        let start = Instant::now();
        rom.advance()?;
        wall += start.elapsed();
        record(rom.current())?;
    }
    Ok(RomRun {
        sigma,
        chi: chi.finish()?,
        diagnostics: rom.diagnostics().to_vec(),
        wall,
        steps: last,
    })
}

/// Singular values below this fraction of the leading one are rounding
/// noise in both solvers and are left out of comparisons.
pub const SIGMA_RESOLUTION: f64 = 1e-12;

/// Largest relative deviation of each of the leading `k` singular values
/// over the steps present in both tracks. Reference values below
/// `SIGMA_RESOLUTION·σ₁` are skipped.
pub fn sigma_deviation(reference: &[SigmaSample], other: &[SigmaSample], k: usize) -> Vec<f64> {
    let mut worst = vec![0.0f64; k];
    let mut j = 0;
    for (step, _, a) in reference {
        while j < other.len() && other[j].0 < *step {
            j += 1;
        }
        if j == other.len() || other[j].0 != *step {
            continue;
        }
        let floor = a.first().map_or(0.0, |s| s * SIGMA_RESOLUTION);
        for i in 0..k.min(a.len()).min(other[j].2.len()) {
            if a[i] > floor && a[i] > 0.0 {
                worst[i] = worst[i].max((other[j].2[i] - a[i]).abs() / a[i]);
            }
        }
    }
    worst
}

/// Maximum of [`sigma_deviation`] over the leading `k` values.
pub fn sigma_discrepancy(reference: &[SigmaSample], other: &[SigmaSample], k: usize) -> f64 {
    sigma_deviation(reference, other, k).into_iter().fold(0.0, f64::max)
}

/// Ignition delay of one (case, model) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayResult {
    pub case: String,
    pub model: String,
    pub n_keep: usize,
    /// `None`: no ignition, or the integration failed (see `failure`).
    pub tau: Option<f64>,
    pub failure: Option<String>,
}

pub fn model_delay(mechanism: &Mechanism, case: &CaseSpec, criterion: IgnitionCriterion) -> (Option<f64>, Option<String>) {
    match simulate(mechanism, case).and_then(|t| delay(&t, criterion)) {
        Ok(Some(t)) => (Some(t), None),
        Ok(None) => (None, Some("no ignition".into())),
        Err(e) => (None, Some(e.to_string())),
    }
}

/// `ε` of a model against the detailed delay, infinite when either is
/// missing.
pub fn delay_error(model: Option<f64>, detailed: Option<f64>) -> f64 {
    match (model, detailed) {
        (Some(m), Some(d)) => relative_error(m, d).unwrap_or(f64::INFINITY),
        _ => f64::INFINITY,
    }
}
