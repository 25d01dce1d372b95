//! Implicit time-dependent-basis CUR integration of `dS/dt = L S + F`.
//!
//! The sensitivity matrix is carried as `S^k = U^k Σ^k (Y^k)ᵀ`. Each step
//! advances a few sampled columns with the BDF4 solve, advances the sampled
//! rows through a reduced system whose unsampled rows are closed with a
//! low-rank basis, and rebuilds the factors from the two blocks.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, Dyn, LU};

use crate::bdf::{Startup, BDF4_BETA, BDF4_HISTORY};
use crate::error::Error;
use crate::fom::{implicit_operator, FomStepper, TangentSource};
use crate::linalg::{oversample_rows, pivoted_rows, pseudo_inverse, select_columns, select_rows, ThinSvd};

/// Cut-off for every pseudo-inverse, relative to the largest singular value.
pub const PINV_TOLERANCE: f64 = 1e-12;

/// `S = U diag(σ) Yᵀ` at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityFactors {
    /// n_eq × r, orthonormal columns
    pub u: DMatrix<f64>,
    /// descending, non-negative
    pub sigma: Vec<f64>,
    /// n_rc × r, orthonormal columns
    pub y: DMatrix<f64>,
    pub time: f64,
    pub step: usize,
}

impl SensitivityFactors {
    /// Best rank-`r` approximation of a dense matrix.
    pub fn from_matrix(s: &DMatrix<f64>, r: usize, time: f64, step: usize) -> Self {
        let svd = ThinSvd::new(s).truncate(r);
        SensitivityFactors {
            u: svd.u,
            sigma: svd.sigma,
            y: svd.v,
            time,
            step,
        }
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn n_eq(&self) -> usize {
        self.u.nrows()
    }

    pub fn n_rc(&self) -> usize {
        self.y.nrows()
    }

    /// `U Σ`.
    fn u_sigma(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (c, s) in self.sigma.iter().enumerate() {
            us.column_mut(c).scale_mut(*s);
        }
        us
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.u_sigma() * self.y.transpose()
    }

    /// `S(:, cols)`.
    pub fn columns(&self, cols: &[usize]) -> DMatrix<f64> {
        self.u_sigma() * select_rows(&self.y, cols).transpose()
    }

    /// `S(rows, :)`.
    pub fn rows(&self, rows: &[usize]) -> DMatrix<f64> {
        let mut us = select_rows(&self.u, rows);
        for (c, s) in self.sigma.iter().enumerate() {
            us.column_mut(c).scale_mut(*s);
        }
        us * self.y.transpose()
    }

    /// Largest deviation from orthonormality of `U` and `Y`, and whether `Σ`
    /// is sorted descending and non-negative.
    pub fn invariant_error(&self) -> (f64, bool) {
        let r = self.rank();
        let eye = DMatrix::<f64>::identity(r, r);
        let eu = (self.u.transpose() * &self.u - &eye).amax();
        let ey = (self.y.transpose() * &self.y - &eye).amax();
        let sorted = self.sigma.windows(2).all(|w| w[0] >= w[1]) && self.sigma.iter().all(|&s| s >= 0.0);
        (eu.max(ey), sorted)
    }
}

/// Sampled column and row indices, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleIndices {
    pub columns: Vec<usize>,
    pub rows: Vec<usize>,
    pub oversampling: usize,
}

/// Greedy sampling of a basis: pivoted QR for the first `r` indices, then
/// `oversampling` indices minimizing the condition number of the sampled
/// block. Returned sorted.
pub fn select_basis_rows(basis: &DMatrix<f64>, oversampling: usize) -> Vec<usize> {
    let r = basis.ncols();
    let mut chosen = pivoted_rows(basis, r);
    oversample_rows(basis, &mut chosen, oversampling);
    chosen.sort_unstable();
    chosen
}

/// Rows from `U`, columns from `Y`.
pub fn select_samples(factors: &SensitivityFactors, oversampling: usize) -> SampleIndices {
    SampleIndices {
        rows: select_basis_rows(&factors.u, oversampling),
        columns: select_basis_rows(&factors.y, oversampling),
        oversampling,
    }
}

/// `S^{k−j}(:, I_c)` and `S^{k−j}(I_r, :)` for `j = 0..4`, most recent first.
#[derive(Debug, Clone)]
pub struct ColumnHistory {
    pub columns: Vec<DMatrix<f64>>,
    pub rows: Vec<DMatrix<f64>>,
}

impl ColumnHistory {
    pub fn gather<'a, I>(levels: I, samples: &SampleIndices) -> Self
    where
        I: IntoIterator<Item = &'a SensitivityFactors>,
    {
        let mut columns = Vec::with_capacity(4);
        let mut rows = Vec::with_capacity(4);
        for f in levels.into_iter().take(4) {
            columns.push(f.columns(&samples.columns));
            rows.push(f.rows(&samples.rows));
        }
        ColumnHistory { columns, rows }
    }

    pub fn is_complete(&self) -> bool {
        self.columns.len() == 4 && self.rows.len() == 4
    }

    fn bdf_combination(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mut out = BDF4_HISTORY[0] * &blocks[0];
        for j in 1..4 {
            out += BDF4_HISTORY[j] * &blocks[j];
        }
        out
    }
}

/// BDF4 column solve `(I − βΔt L) X = Σ a_j S^{k−j}(:, I_c) + βΔt F(:, I_c)`.
pub fn advance_columns(
    history: &ColumnHistory,
    operator: &LU<f64, Dyn, Dyn>,
    gamma: f64,
    forcing_columns: &DMatrix<f64>,
) -> DMatrix<f64> {
    let mut rhs = ColumnHistory::bdf_combination(&history.columns);
    rhs += gamma * forcing_columns;
    operator.solve_mut(&mut rhs);
    rhs
}

/// Which column differences span the row-closure basis `U_σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaBasis {
    /// `S^{k+1}(:,I_c) − S^k(:,I_c) − S^{k−1}(:,I_c) − S^{k−2}(:,I_c) − S^{k−3}(:,I_c)`
    #[default]
    Unit,
    /// `S^{k+1}(:,I_c) − S^k(:,I_c)`, the actual one-step increment.
    Increment,
}

/// Orthonormal basis of the column differences, truncated to rank at most
/// `r` and to singular values above `tol · σ_max`.
pub fn sigma_basis(
    new_columns: &DMatrix<f64>,
    history: &ColumnHistory,
    variant: SigmaBasis,
    r: usize,
    tol: f64,
) -> DMatrix<f64> {
    let mut diff = new_columns - &history.columns[0];
    if variant == SigmaBasis::Unit {
        for c in &history.columns[1..] {
            diff -= c;
        }
    }
    let svd = ThinSvd::new(&diff);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let keep = svd
        .sigma
        .iter()
        .take(r)
        .take_while(|&&s| s > tol * smax && s > 0.0)
        .count();
    svd.u.columns(0, keep).into_owned()
}

/// Result of the reduced row solve.
#[derive(Debug, Clone)]
pub struct RowAdvance {
    /// `S^{k+1}(I_r, :)`
    pub rows: DMatrix<f64>,
    /// Condition number of `U_σ(I_r, :)`.
    pub closure_condition: f64,
    /// The reduced operator was singular and a pseudo-inverse was used.
    pub truncated: bool,
}

/// Reduced BDF4 row solve in correction form.
///
/// `operator` is the full `A = I − βΔt L`, `l_times_current` is
/// `L(I_r, :) S^k` and `forcing_rows` is `F(I_r, :)`.
pub fn advance_rows(
    history: &ColumnHistory,
    operator: &DMatrix<f64>,
    rows: &[usize],
    u_sigma: &DMatrix<f64>,
    l_times_current: &DMatrix<f64>,
    forcing_rows: &DMatrix<f64>,
    gamma: f64,
    tol: f64,
) -> RowAdvance {
    let n = operator.nrows();
    let nr = rows.len();
    let mut in_rows = alloc::vec![false; n];
    for &i in rows {
        in_rows[i] = true;
    }
    let others: Vec<usize> = (0..n).filter(|&i| !in_rows[i]).collect();

    let mut a_r = DMatrix::from_fn(nr, nr, |i, j| operator[(rows[i], rows[j])]);
    let mut closure_condition = 1.0;
    let mut truncated = false;
    if !others.is_empty() && u_sigma.ncols() > 0 {
        let pinv = pseudo_inverse(&select_rows(u_sigma, rows), tol);
        closure_condition = pinv.condition;
        truncated |= pinv.truncated;
        let coupling = DMatrix::from_fn(nr, others.len(), |i, j| operator[(rows[i], others[j])]);
        a_r += coupling * select_rows(u_sigma, &others) * pinv.matrix;
    }

    let current = &history.rows[0];
    let mut b = ColumnHistory::bdf_combination(&history.rows);
    b -= current;
    b += gamma * (l_times_current + forcing_rows);

    let lu = a_r.clone().lu();
    let delta = if lu.is_invertible() {
        let mut x = b;
        lu.solve_mut(&mut x);
        x
    } else {
        truncated = true;
        pseudo_inverse(&a_r, tol).matrix * b
    };
    RowAdvance {
        rows: current + delta,
        closure_condition,
        truncated,
    }
}

/// Factors at `k+1` from the new column and row blocks.
#[derive(Debug, Clone)]
pub struct Reassembly {
    pub factors: SensitivityFactors,
    /// Condition number of `U(I_r, :)`.
    pub condition: f64,
    pub truncated: bool,
}

/// `U` from the column block, `V = (U(I_r,:)^† R)ᵀ = Y Σ Wᵀ`, `U ← U W`.
pub fn reassemble(
    columns: &DMatrix<f64>,
    rows: &DMatrix<f64>,
    row_indices: &[usize],
    r: usize,
    tol: f64,
    time: f64,
    step: usize,
) -> Reassembly {
    let u_c = ThinSvd::new(columns).truncate(r).u;
    let pinv = pseudo_inverse(&select_rows(&u_c, row_indices), tol);
    let v = (&pinv.matrix * rows).transpose();
    let svd = ThinSvd::new(&v);
    // V = Y Σ Wᵀ: the left factor of V is Y, the right one rotates U.
    let u = &u_c * &svd.v;
    Reassembly {
        factors: SensitivityFactors {
            u,
            sigma: svd.sigma,
            y: svd.u,
            time,
            step,
        },
        condition: pinv.condition,
        truncated: pinv.truncated,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdbCurOptions {
    pub rank: usize,
    pub oversampling: usize,
    /// Reselect samples every this many steps.
    pub refresh_every: usize,
    pub sigma_basis: SigmaBasis,
    pub pinv_tolerance: f64,
    /// Full-order steps before switching to the low-rank integrator.
    pub warmup_steps: usize,
    pub startup: Startup,
    /// Sample every row and column (full-rank checks).
    pub full_sampling: bool,
}

impl TdbCurOptions {
    pub fn new(rank: usize) -> Self {
        TdbCurOptions {
            rank,
            oversampling: 2,
            refresh_every: 1,
            sigma_basis: SigmaBasis::Unit,
            pinv_tolerance: PINV_TOLERANCE,
            warmup_steps: 4,
            startup: Startup::Block,
            full_sampling: false,
        }
    }
}

/// Per-step diagnostics of the low-rank integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub samples_refreshed: bool,
    /// Rank of `U_σ`.
    pub closure_rank: usize,
    pub closure_condition: f64,
    pub reassembly_condition: f64,
    /// A pseudo-inverse dropped singular values during this step.
    pub truncated: bool,
}

/// Stateful TDB-CUR integrator.
pub struct RomIntegrator<'s, T: TangentSource> {
    src: &'s T,
    options: TdbCurOptions,
    step: usize,
    /// most recent first
    levels: VecDeque<SensitivityFactors>,
    samples: SampleIndices,
    since_refresh: usize,
    l: DMatrix<f64>,
    f: DMatrix<f64>,
    diagnostics: Vec<StepDiagnostics>,
}

/// Run the full-order model for the warmup and factor its last four levels.
pub fn initialize<T: TangentSource>(src: &T, options: &TdbCurOptions) -> Result<Vec<SensitivityFactors>, Error> {
    let (n, m) = (src.n_eq(), src.n_rc());
    let r = options.rank;
    if r == 0 || r > n.min(m) {
        return Err(Error::InvalidArgument(format!(
            "rank {r} must lie in 1..={}",
            n.min(m)
        )));
    }
    if options.warmup_steps < 4 {
        return Err(Error::InvalidArgument(format!(
            "warmup of {} steps is shorter than the four-level stencil",
            options.warmup_steps
        )));
    }
    if options.warmup_steps > src.n_steps() {
        return Err(Error::InvalidArgument(format!(
            "warmup of {} steps exceeds the {} available",
            options.warmup_steps,
            src.n_steps()
        )));
    }
    let mut fom = FomStepper::new(src, options.startup);
    for _ in 0..options.warmup_steps {
        fom.advance()?;
    }
    let k = fom.step();
    Ok((0..4)
        .map(|j| SensitivityFactors::from_matrix(fom.level(j), r, src.time(k - j), k - j))
        .collect())
}

impl<'s, T: TangentSource> RomIntegrator<'s, T> {
    pub fn new(src: &'s T, options: TdbCurOptions) -> Result<Self, Error> {
        let levels: VecDeque<SensitivityFactors> = initialize(src, &options)?.into();
        let samples = Self::pick(&levels[0], &options);
        let (n, m) = (src.n_eq(), src.n_rc());
        Ok(RomIntegrator {
            src,
            step: levels[0].step,
            levels,
            samples,
            since_refresh: 0,
            options,
            l: DMatrix::zeros(n, n),
            f: DMatrix::zeros(n, m),
            diagnostics: Vec::new(),
        })
    }

    fn pick(current: &SensitivityFactors, options: &TdbCurOptions) -> SampleIndices {
        if options.full_sampling {
            SampleIndices {
                rows: (0..current.n_eq()).collect(),
                columns: (0..current.n_rc()).collect(),
                oversampling: 0,
            }
        } else {
            select_samples(current, options.oversampling)
        }
    }

    pub fn current(&self) -> &SensitivityFactors {
        &self.levels[0]
    }

    pub fn samples(&self) -> &SampleIndices {
        &self.samples
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn finished(&self) -> bool {
        self.step >= self.src.n_steps()
    }

    pub fn diagnostics(&self) -> &[StepDiagnostics] {
        &self.diagnostics
    }

    /// The warmup levels, oldest first, as produced by [`initialize`].
    pub fn levels(&self) -> impl Iterator<Item = &SensitivityFactors> {
        self.levels.iter().rev()
    }

    pub fn advance(&mut self) -> Result<(), Error> {
        if self.finished() {
            return Err(Error::InvalidArgument("no steps left".into()));
        }
        let opts = self.options;
        let k = self.step;
        let refreshed = self.since_refresh >= opts.refresh_every.max(1);
        if refreshed {
            self.samples = Self::pick(&self.levels[0], &opts);
            self.since_refresh = 0;
        }
        self.src.tangent(k + 1, &mut self.l, &mut self.f)?;
        let gamma = BDF4_BETA * self.src.dt();
        let history = ColumnHistory::gather(self.levels.iter(), &self.samples);
        let lu = implicit_operator(&self.l, gamma, k + 1)?;

        let forcing_cols = select_columns(&self.f, &self.samples.columns);
        let new_cols = advance_columns(&history, &lu, gamma, &forcing_cols);
        let u_sigma = sigma_basis(&new_cols, &history, opts.sigma_basis, opts.rank, opts.pinv_tolerance);

        let mut operator = -gamma * &self.l;
        for i in 0..operator.nrows() {
            operator[(i, i)] += 1.0;
        }
        let cur = &self.levels[0];
        let l_rows = select_rows(&self.l, &self.samples.rows);
        let l_times_current = cur.columns_of(&(l_rows * &cur.u));
        let rows = advance_rows(
            &history,
            &operator,
            &self.samples.rows,
            &u_sigma,
            &l_times_current,
            &select_rows(&self.f, &self.samples.rows),
            gamma,
            opts.pinv_tolerance,
        );
        let re = reassemble(
            &new_cols,
            &rows.rows,
            &self.samples.rows,
            opts.rank,
            opts.pinv_tolerance,
            self.src.time(k + 1),
            k + 1,
        );
        self.diagnostics.push(StepDiagnostics {
            step: k + 1,
            time: self.src.time(k + 1),
            samples_refreshed: refreshed,
            closure_rank: u_sigma.ncols(),
            closure_condition: rows.closure_condition,
            reassembly_condition: re.condition,
            truncated: rows.truncated || re.truncated,
        });
        if self.levels.len() == 4 {
            self.levels.pop_back();
        }
        self.levels.push_front(re.factors);
        self.step += 1;
        self.since_refresh += 1;
        Ok(())
    }
}

impl SensitivityFactors {
    /// `M Σ Yᵀ` for a matrix `M` expressed in the `U` coordinates.
    fn columns_of(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut ms = m.clone();
        for (c, s) in self.sigma.iter().enumerate() {
            ms.column_mut(c).scale_mut(*s);
        }
        ms * self.y.transpose()
    }
}

/// Integrate to the end, calling `observer` with the factors at every level
/// from the end of the warmup on.
pub fn run_rom<T, O>(src: &T, options: TdbCurOptions, mut observer: O) -> Result<Vec<StepDiagnostics>, Error>
where
    T: TangentSource,
    O: FnMut(&SensitivityFactors) -> Result<(), Error>,
{
    let mut rom = RomIntegrator::new(src, options)?;
    observer(rom.current())?;
    while !rom.finished() {
        rom.advance()?;
        observer(rom.current())?;
    }
    Ok(rom.diagnostics)
}
