//! Full-order integration: the reactor trajectory and the dense sensitivity
//! matrix `S` of `dS/dt = L(t) S + F(t)`.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, Dyn, LU};

use crate::bdf::{self, bdf_coefficients, NewtonOptions, OdeSystem, Solution, Startup, BLOCK_STARTER};
use crate::error::Error;
use crate::linalg::ThinSvd;
use crate::mechanism::Mechanism;
use crate::reactor::{Reactor, ReactorState};

/// Reactor as an [`OdeSystem`] at unit multipliers.
pub struct ReactorOde<'a>(pub Reactor<'a>);

impl OdeSystem for ReactorOde<'_> {
    fn dim(&self) -> usize {
        self.0.n_eq()
    }
    fn rhs(&self, _t: f64, y: &[f64], out: &mut [f64]) -> Result<(), Error> {
        self.0.rhs(y, None, out)
    }
    fn jacobian(&self, _t: f64, y: &[f64], jac: &mut DMatrix<f64>) -> Result<(), Error> {
        self.0.jacobian(y, jac)
    }
}

/// Resolved reactor trajectory at fixed step size.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub pressure: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    /// `[T, Y…]` per time level
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    /// Number of steps (time levels minus one).
    pub fn step_count(&self) -> usize {
        self.times.len().saturating_sub(1)
    }

    pub fn state(&self, k: usize) -> ReactorState {
        ReactorState::from_vector(&self.states[k], self.pressure, self.times[k])
    }

    pub fn temperatures(&self) -> Vec<f64> {
        self.states.iter().map(|s| s[0]).collect()
    }
}

/// Number of fixed steps of size `dt` needed to reach `t_end`.
pub fn step_count(dt: f64, t_end: f64) -> Result<usize, Error> {
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("dt = {dt}, t_end = {t_end}")));
    }
    Ok(libm::ceil(t_end / dt - 1e-9).max(1.0) as usize)
}

/// Integrate the reactor state with fixed-step BDF4.
pub fn integrate_state(
    mechanism: &Mechanism,
    initial: &ReactorState,
    dt: f64,
    t_end: f64,
    startup: Startup,
) -> Result<Trajectory, Error> {
    initial.validate()?;
    if initial.mass_fractions.len() != mechanism.n_species() {
        return Err(Error::Shape(format!(
            "{} mass fractions for {} species",
            initial.mass_fractions.len(),
            mechanism.n_species()
        )));
    }
    let n = step_count(dt, t_end)?;
    let ode = ReactorOde(Reactor::new(mechanism, initial.pressure));
    let Solution { times, values } = bdf::integrate(
        &ode,
        &initial.to_vector(),
        initial.time,
        dt,
        n,
        startup,
        NewtonOptions::default(),
    )?;
    Ok(Trajectory {
        pressure: initial.pressure,
        dt,
        times,
        states: values,
    })
}

/// Supplies `L` and `F` at each time level of a fixed-step grid.
pub trait TangentSource {
    fn n_eq(&self) -> usize;
    fn n_rc(&self) -> usize;
    /// Number of steps; time levels run `0..=n_steps`.
    fn n_steps(&self) -> usize;
    fn dt(&self) -> f64;
    fn time(&self, k: usize) -> f64;
    fn tangent(&self, k: usize, l: &mut DMatrix<f64>, f: &mut DMatrix<f64>) -> Result<(), Error>;
}

/// Tangents of a mechanism along a stored trajectory.
pub struct MechanismTangent<'a> {
    reactor: Reactor<'a>,
    trajectory: &'a Trajectory,
}

impl<'a> MechanismTangent<'a> {
    pub fn new(mechanism: &'a Mechanism, trajectory: &'a Trajectory) -> Self {
        MechanismTangent {
            reactor: Reactor::new(mechanism, trajectory.pressure),
            trajectory,
        }
    }
}

impl TangentSource for MechanismTangent<'_> {
    fn n_eq(&self) -> usize {
        self.reactor.n_eq()
    }
    fn n_rc(&self) -> usize {
        self.reactor.n_rc()
    }
    fn n_steps(&self) -> usize {
        self.trajectory.step_count()
    }
    fn dt(&self) -> f64 {
        self.trajectory.dt
    }
    fn time(&self, k: usize) -> f64 {
        self.trajectory.times[k]
    }
    fn tangent(&self, k: usize, l: &mut DMatrix<f64>, f: &mut DMatrix<f64>) -> Result<(), Error> {
        self.reactor.tangent(&self.trajectory.states[k], l, f)
    }
}

/// Time-invariant `L`, `F` on a uniform grid.
#[derive(Debug, Clone)]
pub struct ConstantTangent {
    pub l: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub dt: f64,
    pub n_steps: usize,
}

impl TangentSource for ConstantTangent {
    fn n_eq(&self) -> usize {
        self.l.nrows()
    }
    fn n_rc(&self) -> usize {
        self.f.ncols()
    }
    fn n_steps(&self) -> usize {
        self.n_steps
    }
    fn dt(&self) -> f64 {
        self.dt
    }
    fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
    fn tangent(&self, _k: usize, l: &mut DMatrix<f64>, f: &mut DMatrix<f64>) -> Result<(), Error> {
        l.copy_from(&self.l);
        f.copy_from(&self.f);
        Ok(())
    }
}

/// Factorized `I − γ L`.
pub(crate) fn implicit_operator(l: &DMatrix<f64>, gamma: f64, step: usize) -> Result<LU<f64, Dyn, Dyn>, Error> {
    let mut a = -gamma * l;
    for i in 0..a.nrows() {
        a[(i, i)] += 1.0;
    }
    let lu = a.lu();
    if !lu.is_invertible() {
        return Err(Error::Singular { step });
    }
    Ok(lu)
}

/// Solve the block starter for `S^1 … S^4` given `S^0`.
pub(crate) fn block_start_linear<T: TangentSource>(
    src: &T,
    s0: &DMatrix<f64>,
) -> Result<Vec<DMatrix<f64>>, Error> {
    let (n, m) = (src.n_eq(), src.n_rc());
    let h12 = 12.0 * src.dt();
    let mut a = DMatrix::zeros(4 * n, 4 * n);
    let mut b = DMatrix::zeros(4 * n, m);
    let mut l = DMatrix::zeros(n, n);
    let mut f = DMatrix::zeros(n, m);
    for i in 0..4 {
        src.tangent(i + 1, &mut l, &mut f)?;
        let row = &BLOCK_STARTER[i];
        for blk in 0..4 {
            for c in 0..n {
                a[(i * n + c, blk * n + c)] += row[blk + 1];
            }
        }
        for r in 0..n {
            for c in 0..n {
                a[(i * n + r, i * n + c)] -= h12 * l[(r, c)];
            }
            for c in 0..m {
                b[(i * n + r, c)] = h12 * f[(r, c)] - row[0] * s0[(r, c)];
            }
        }
    }
    let lu = a.lu();
    if !lu.is_invertible() {
        return Err(Error::Singular { step: 1 });
    }
    lu.solve_mut(&mut b);
    Ok((0..4).map(|i| b.rows(i * n, n).into_owned()).collect())
}

/// Advances the dense sensitivity matrix one step at a time.
pub struct FomStepper<'s, T: TangentSource> {
    src: &'s T,
    startup: Startup,
    step: usize,
    /// `S^k, S^{k−1}, …` (most recent first), at most four levels
    history: VecDeque<DMatrix<f64>>,
    pending: VecDeque<DMatrix<f64>>,
    l: DMatrix<f64>,
    f: DMatrix<f64>,
}

impl<'s, T: TangentSource> FomStepper<'s, T> {
    /// Starts from `S^0 = 0`.
    pub fn new(src: &'s T, startup: Startup) -> Self {
        let (n, m) = (src.n_eq(), src.n_rc());
        let mut history = VecDeque::with_capacity(4);
        history.push_front(DMatrix::zeros(n, m));
        FomStepper {
            src,
            startup,
            step: 0,
            history,
            pending: VecDeque::new(),
            l: DMatrix::zeros(n, n),
            f: DMatrix::zeros(n, m),
        }
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.src.time(self.step)
    }

    pub fn current(&self) -> &DMatrix<f64> {
        &self.history[0]
    }

    /// `S^{k−j}` for `j < levels()`.
    pub fn level(&self, j: usize) -> &DMatrix<f64> {
        &self.history[j]
    }

    pub fn levels(&self) -> usize {
        self.history.len()
    }

    pub fn finished(&self) -> bool {
        self.step >= self.src.n_steps()
    }

    pub fn advance(&mut self) -> Result<(), Error> {
        if self.finished() {
            return Err(Error::InvalidArgument("no steps left".into()));
        }
        if self.step == 0 && self.startup == Startup::Block && self.src.n_steps() >= 4 {
            self.pending = block_start_linear(self.src, &self.history[0])?.into();
        }
        let next = match self.pending.pop_front() {
            Some(s) => s,
            None => {
                let k = self.step;
                let order = (k + 1).min(4);
                let (hist, beta) = bdf_coefficients(order);
                let gamma = beta * self.src.dt();
                self.src.tangent(k + 1, &mut self.l, &mut self.f)?;
                let lu = implicit_operator(&self.l, gamma, k + 1)?;
                let mut rhs = gamma * &self.f;
                for (j, a) in hist.iter().enumerate() {
                    rhs += *a * &self.history[j];
                }
                lu.solve_mut(&mut rhs);
                rhs
            }
        };
        if self.history.len() == 4 {
            self.history.pop_back();
        }
        self.history.push_front(next);
        self.step += 1;
        Ok(())
    }
}

/// Run the full-order sensitivity integration, calling `observer(k, t, S^k)`
/// for every time level including `k = 0`.
pub fn integrate_fom<T, O>(src: &T, startup: Startup, mut observer: O) -> Result<(), Error>
where
    T: TangentSource,
    O: FnMut(usize, f64, &DMatrix<f64>) -> Result<(), Error>,
{
    let mut stepper = FomStepper::new(src, startup);
    observer(0, src.time(0), stepper.current())?;
    while !stepper.finished() {
        stepper.advance()?;
        observer(stepper.step(), stepper.time(), stepper.current())?;
    }
    Ok(())
}

/// Dense sensitivity matrices at saved steps.
#[derive(Debug, Clone, PartialEq)]
pub struct FullSensitivity {
    pub steps: Vec<usize>,
    pub times: Vec<f64>,
    pub matrices: Vec<DMatrix<f64>>,
}

/// Keep every `stride`-th level (and always the last).
pub fn collect_fom<T: TangentSource>(src: &T, startup: Startup, stride: usize) -> Result<FullSensitivity, Error> {
    let stride = stride.max(1);
    let last = src.n_steps();
    let mut out = FullSensitivity {
        steps: Vec::new(),
        times: Vec::new(),
        matrices: Vec::new(),
    };
    integrate_fom(src, startup, |k, t, s| {
        if k % stride == 0 || k == last {
            out.steps.push(k);
            out.times.push(t);
            out.matrices.push(s.clone());
        }
        Ok(())
    })?;
    Ok(out)
}

/// Instantaneous SVD of a sensitivity snapshot.
pub fn isvd(s: &DMatrix<f64>) -> ThinSvd {
    ThinSvd::new(s)
}
