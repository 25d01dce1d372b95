//! Fixed-step BDF4 with Newton iteration for nonlinear ODE systems.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, LU};

use crate::error::Error;

/// BDF4 history weights applied to `y^k, y^{k−1}, y^{k−2}, y^{k−3}`.
pub const BDF4_HISTORY: [f64; 4] = [48.0 / 25.0, -36.0 / 25.0, 16.0 / 25.0, -3.0 / 25.0];
/// BDF4 implicit weight on `Δt f(y^{k+1})`.
pub const BDF4_BETA: f64 = 12.0 / 25.0;

/// History weights and implicit weight of BDF orders 1 to 4.
pub fn bdf_coefficients(order: usize) -> (&'static [f64], f64) {
    match order {
        1 => (&[1.0], 1.0),
        2 => (&[4.0 / 3.0, -1.0 / 3.0], 2.0 / 3.0),
        3 => (&[18.0 / 11.0, -9.0 / 11.0, 2.0 / 11.0], 6.0 / 11.0),
        _ => (&BDF4_HISTORY, BDF4_BETA),
    }
}

/// Rows of the fourth-order block starter. Row `i` approximates
/// `12 Δt y'(t_{i+1})` from `y_0 … y_4`; the last row is BDF4 itself.
pub const BLOCK_STARTER: [[f64; 5]; 4] = [
    [-3.0, -10.0, 18.0, -6.0, 1.0],
    [1.0, -8.0, 0.0, 8.0, -1.0],
    [-1.0, 6.0, -18.0, 10.0, 3.0],
    [3.0, -16.0, 36.0, -48.0, 25.0],
];

/// How the first three steps are produced before BDF4 has enough history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Startup {
    /// Solve for the first four steps together with fourth-order
    /// differentiation rows. Keeps the global error fourth order.
    #[default]
    Block,
    /// BDF1, BDF2, BDF3 for steps one to three. Cheaper but limits the
    /// global order to about two.
    Ramp,
}

pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<(), Error>;
    fn jacobian(&self, t: f64, y: &[f64], jac: &mut DMatrix<f64>) -> Result<(), Error>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Convergence threshold on `max_i |residual_i| / max(1, |y_i|)`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tolerance: 1e-10,
            max_iterations: 25,
        }
    }
}

/// Fixed-step solution: `values[k]` at `times[k] = t0 + k Δt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

fn scaled_norm(r: &[f64], y: &[f64]) -> f64 {
    r.iter()
        .zip(y)
        .fold(0.0, |m, (ri, yi)| m.max(ri.abs() / yi.abs().max(1.0)))
}

/// Integrate `n_steps` fixed steps of size `dt` from `y0`.
pub fn integrate<S: OdeSystem>(
    system: &S,
    y0: &[f64],
    t0: f64,
    dt: f64,
    n_steps: usize,
    startup: Startup,
    newton: NewtonOptions,
) -> Result<Solution, Error> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    if y0.len() != system.dim() {
        return Err(Error::Shape("initial state length".into()));
    }
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(n_steps + 1);
    times.push(t0);
    values.push(y0.to_vec());
    let mut k = 0;
    if startup == Startup::Block && n_steps >= 4 {
        let block = block_start(system, y0, t0, dt, newton)?;
        for (i, y) in block.into_iter().enumerate() {
            times.push(t0 + (i + 1) as f64 * dt);
            values.push(y);
        }
        k = 4;
    }
    while k < n_steps {
        let order = (k + 1).min(4);
        let (hist, beta) = bdf_coefficients(order);
        let n = system.dim();
        let mut rhs_const = vec![0.0; n];
        for (j, a) in hist.iter().enumerate() {
            for (c, v) in rhs_const.iter_mut().zip(&values[k - j]) {
                *c += a * v;
            }
        }
        let t_new = t0 + (k + 1) as f64 * dt;
        let predictor: Vec<f64> = if k >= 1 {
            values[k].iter().zip(&values[k - 1]).map(|(a, b)| 2.0 * a - b).collect()
        } else {
            values[k].clone()
        };
        let y = match bdf_newton(system, t_new, beta * dt, &rhs_const, &predictor, newton, k + 1) {
            Ok(y) => y,
            Err(_) if k >= 1 => bdf_newton(system, t_new, beta * dt, &rhs_const, &values[k], newton, k + 1)?,
            Err(e) => return Err(e),
        };
        times.push(t_new);
        values.push(y);
        k += 1;
    }
    Ok(Solution { times, values })
}

/// Solve `y − γ f(t, y) = c` by modified Newton starting from `guess`.
fn bdf_newton<S: OdeSystem>(
    system: &S,
    t: f64,
    gamma: f64,
    c: &[f64],
    guess: &[f64],
    opts: NewtonOptions,
    step: usize,
) -> Result<Vec<f64>, Error> {
    let n = system.dim();
    let mut y = guess.to_vec();
    let mut f = vec![0.0; n];
    let mut jac = DMatrix::zeros(n, n);
    let mut lu: Option<LU<f64, nalgebra::Dyn, nalgebra::Dyn>> = None;
    let mut last = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for iter in 0..opts.max_iterations {
        system.rhs(t, &y, &mut f)?;
        let r: Vec<f64> = (0..n).map(|i| y[i] - gamma * f[i] - c[i]).collect();
        residual = scaled_norm(&r, &y);
        if !residual.is_finite() {
            break;
        }
        // at least one correction: during induction the whole update can sit
        // below the tolerance, and accepting the predictor would freeze it
        if residual < opts.tolerance && iter > 0 {
            return Ok(y);
        }
        if lu.is_none() || residual > 0.25 * last {
            system.jacobian(t, &y, &mut jac)?;
            let mut a = -gamma * &jac;
            for i in 0..n {
                a[(i, i)] += 1.0;
            }
            let fact = a.lu();
            if !fact.is_invertible() {
                return Err(Error::Singular { step });
            }
            lu = Some(fact);
        }
        last = residual;
        let mut dy = DVector::from_vec(r);
        lu.as_ref().unwrap().solve_mut(&mut dy);
        for i in 0..n {
            y[i] -= dy[i];
        }
    }
    Err(Error::StepFailure {
        step,
        time: t,
        iterations: opts.max_iterations,
        residual,
    })
}

/// Newton solve of the block starter for `y_1 … y_4`.
fn block_start<S: OdeSystem>(
    system: &S,
    y0: &[f64],
    t0: f64,
    dt: f64,
    opts: NewtonOptions,
) -> Result<Vec<Vec<f64>>, Error> {
    let n = system.dim();
    let big = 4 * n;
    let h12 = 12.0 * dt;
    let mut ys: Vec<Vec<f64>> = vec![y0.to_vec(); 4];
    let mut f = vec![0.0; n];
    let mut jac = DMatrix::zeros(n, n);
    let mut lu: Option<LU<f64, nalgebra::Dyn, nalgebra::Dyn>> = None;
    let mut last = f64::INFINITY;
    let mut residual = f64::INFINITY;
    let mut flat_y = vec![0.0; big];
    for iter in 0..opts.max_iterations {
        let mut r = vec![0.0; big];
        for i in 0..4 {
            system.rhs(t0 + (i + 1) as f64 * dt, &ys[i], &mut f)?;
            let row = &BLOCK_STARTER[i];
            for c in 0..n {
                let mut v = row[0] * y0[c];
                for m in 0..4 {
                    v += row[m + 1] * ys[m][c];
                }
                r[i * n + c] = v - h12 * f[c];
            }
        }
        // residual scaled like a single step
        for i in 0..4 {
            for c in 0..n {
                r[i * n + c] /= 12.0;
                flat_y[i * n + c] = ys[i][c];
            }
        }
        residual = scaled_norm(&r, &flat_y);
        if !residual.is_finite() {
            break;
        }
        if residual < opts.tolerance && iter > 0 {
            return Ok(ys);
        }
        if lu.is_none() || residual > 0.25 * last {
            let mut a = DMatrix::zeros(big, big);
            for i in 0..4 {
                system.jacobian(t0 + (i + 1) as f64 * dt, &ys[i], &mut jac)?;
                let d = 12.0;
                for m in 0..4 {
                    let coef = BLOCK_STARTER[i][m + 1] / d;
                    for c in 0..n {
                        a[(i * n + c, m * n + c)] += coef;
                    }
                }
                for rr in 0..n {
                    for cc in 0..n {
                        a[(i * n + rr, i * n + cc)] -= h12 / d * jac[(rr, cc)];
                    }
                }
            }
            let fact = a.lu();
            if !fact.is_invertible() {
                return Err(Error::Singular { step: 1 });
            }
            lu = Some(fact);
        }
        last = residual;
        let mut dy = DVector::from_vec(r);
        lu.as_ref().unwrap().solve_mut(&mut dy);
        for i in 0..4 {
            for c in 0..n {
                ys[i][c] -= dy[i * n + c];
            }
        }
    }
    Err(Error::StepFailure {
        step: 1,
        time: t0 + dt,
        iterations: opts.max_iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Linear(f64);

    impl OdeSystem for Linear {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], out: &mut [f64]) -> Result<(), Error> {
            out[0] = self.0 * y[0];
            Ok(())
        }
        fn jacobian(&self, _t: f64, _y: &[f64], jac: &mut DMatrix<f64>) -> Result<(), Error> {
            jac[(0, 0)] = self.0;
            Ok(())
        }
    }

    fn final_error(startup: Startup, n: usize) -> f64 {
        let lambda = -100.0;
        let t_end = 0.05;
        let sol = integrate(&Linear(lambda), &[1.0], 0.0, t_end / n as f64, n, startup, NewtonOptions::default()).unwrap();
        (sol.values[n][0] - (lambda * t_end).exp()).abs()
    }

    #[test]
    fn block_start_is_fourth_order() {
        let errs: Vec<f64> = [40, 80, 160, 320].iter().map(|&n| final_error(Startup::Block, n)).collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((3.7..=4.3).contains(&order), "order {order}");
        }
    }

    #[test]
    fn ramp_start_loses_order() {
        let a = final_error(Startup::Ramp, 160);
        let b = final_error(Startup::Ramp, 320);
        assert!((a / b).log2() < 3.0);
    }

    #[test]
    fn constant_solution_is_kept() {
        let sol = integrate(&Linear(0.0), &[3.0], 0.0, 0.1, 10, Startup::Block, NewtonOptions::default()).unwrap();
        for v in &sol.values {
            assert_relative_eq!(v[0], 3.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn block_rows_differentiate_quartics() {
        for (i, row) in BLOCK_STARTER.iter().enumerate() {
            for p in 0..=4 {
                let lhs: f64 = (0..5).map(|m| row[m] * (m as f64).powi(p)).sum();
                let node = (i + 1) as f64;
                let exact = if p == 0 { 0.0 } else { 12.0 * p as f64 * node.powi(p - 1) };
                assert_relative_eq!(lhs, exact, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn bdf4_stencil() {
        assert_eq!(BDF4_HISTORY, [48.0 / 25.0, -36.0 / 25.0, 16.0 / 25.0, -3.0 / 25.0]);
        assert_eq!(BDF4_BETA, 12.0 / 25.0);
        let sum: f64 = BDF4_HISTORY.iter().sum();
        assert_relative_eq!(sum, 1.0, epsilon = 1e-15);
    }
}
