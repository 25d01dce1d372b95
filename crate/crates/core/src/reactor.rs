//! Constant-pressure adiabatic zero-dimensional reactor.
//!
//! State vector ordering is `[T, Y_1, …, Y_nsp]`. The right-hand side is
//!
//! ```text
//! dY_i/dt = ω̇_i W_i / ρ
//! dT/dt   = −Σ_i h_i ω̇_i / (ρ c_p)
//! ```
//!
//! with molar enthalpies `h_i` and `ρ c_p = Σ_k [X_k] c_p,k`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::error::Error;
use crate::mechanism::Mechanism;
use crate::GAS_CONSTANT;

/// Roundoff tolerated on negative mass fractions.
pub const NEGATIVE_FRACTION_TOLERANCE: f64 = 1e-12;
/// Tolerance on `Σ Y = 1`.
pub const MASS_SUM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ReactorState {
    /// K
    pub temperature: f64,
    /// Pa
    pub pressure: f64,
    pub mass_fractions: Vec<f64>,
    /// s
    pub time: f64,
}

impl ReactorState {
    pub fn new(temperature: f64, pressure: f64, mass_fractions: Vec<f64>) -> Result<Self, Error> {
        let s = ReactorState {
            temperature,
            pressure,
            mass_fractions,
            time: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.temperature > 0.0) {
            return Err(Error::Domain(format!("temperature {} K", self.temperature)));
        }
        if !(self.pressure > 0.0) {
            return Err(Error::Domain(format!("pressure {} Pa", self.pressure)));
        }
        if let Some(y) = self
            .mass_fractions
            .iter()
            .find(|&&y| !(y >= -NEGATIVE_FRACTION_TOLERANCE))
        {
            return Err(Error::Domain(format!("mass fraction {y}")));
        }
        let sum: f64 = self.mass_fractions.iter().sum();
        if !((sum - 1.0).abs() <= MASS_SUM_TOLERANCE) {
            return Err(Error::Domain(format!("mass fractions sum to {sum}")));
        }
        Ok(())
    }

    /// `[T, Y…]`.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.mass_fractions.len() + 1);
        v.push(self.temperature);
        v.extend_from_slice(&self.mass_fractions);
        v
    }

    pub fn from_vector(v: &[f64], pressure: f64, time: f64) -> Self {
        ReactorState {
            temperature: v[0],
            pressure,
            mass_fractions: v[1..].to_vec(),
            time,
        }
    }
}

/// Jacobian `L` and forcing `F` of the sensitivity equation at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTangent {
    /// n_eq × n_eq
    pub l: DMatrix<f64>,
    /// n_eq × n_rc
    pub f: DMatrix<f64>,
}

/// Mechanism at a fixed pressure; evaluates the reactor right-hand side and
/// its derivatives on raw `[T, Y…]` slices.
#[derive(Debug, Clone, Copy)]
pub struct Reactor<'a> {
    mechanism: &'a Mechanism,
    pressure: f64,
}

/// Per-state quantities shared by the right-hand side and its derivatives.
struct Eval {
    t: f64,
    rho: f64,
    mean_weight: f64,
    conc: Vec<f64>,
    /// molar cp, h and dcp/dT
    cp: Vec<f64>,
    h: Vec<f64>,
    dcp: Vec<f64>,
    g_rt: Vec<f64>,
    /// ρ c_p
    rho_cp: f64,
}

impl<'a> Reactor<'a> {
    pub fn new(mechanism: &'a Mechanism, pressure: f64) -> Self {
        Reactor { mechanism, pressure }
    }

    pub fn mechanism(&self) -> &'a Mechanism {
        self.mechanism
    }

    pub fn pressure(&self) -> f64 {
        self.pressure
    }

    pub fn n_eq(&self) -> usize {
        self.mechanism.n_eq()
    }

    pub fn n_rc(&self) -> usize {
        self.mechanism.n_reactions()
    }

    fn prepare(&self, y: &[f64]) -> Result<Eval, Error> {
        let mech = self.mechanism;
        let n = mech.n_species();
        if y.len() != n + 1 {
            return Err(Error::Shape(format!("state length {} for n_eq {}", y.len(), n + 1)));
        }
        let t = y[0];
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("temperature {t} K")));
        }
        let w = mech.weights();
        let moles: f64 = y[1..].iter().zip(w).map(|(yi, wi)| yi / wi).sum();
        if !(moles > 0.0) {
            return Err(Error::Domain("composition has no moles".into()));
        }
        let mean_weight = 1.0 / moles;
        let rho = self.pressure * mean_weight / (GAS_CONSTANT * t);
        let conc: Vec<f64> = y[1..].iter().zip(w).map(|(yi, wi)| rho * yi / wi).collect();
        let mut cp = vec![0.0; n];
        let mut h = vec![0.0; n];
        let mut dcp = vec![0.0; n];
        let mut g_rt = vec![0.0; n];
        let mut rho_cp = 0.0;
        for (i, sp) in mech.species().iter().enumerate() {
            let th = &sp.thermo;
            cp[i] = GAS_CONSTANT * th.cp_r(t);
            let hrt = th.h_rt(t);
            h[i] = GAS_CONSTANT * t * hrt;
            dcp[i] = GAS_CONSTANT * th.dcp_r_dt(t);
            g_rt[i] = hrt - th.s_r(t);
            rho_cp += conc[i] * cp[i];
        }
        Ok(Eval {
            t,
            rho,
            mean_weight,
            conc,
            cp,
            h,
            dcp,
            g_rt,
            rho_cp,
        })
    }

    /// Rates of progress at unit multipliers.
    fn progress(&self, ev: &Eval) -> Vec<f64> {
        let mech = self.mechanism;
        let ctot: f64 = ev.conc.iter().sum();
        (0..mech.n_reactions())
            .map(|j| mech.rate_terms(j, ev.t, &ev.conc, ctot, &ev.g_rt).k * mech.concentration_product(j, &ev.conc))
            .collect()
    }

    /// Time derivative of `[T, Y…]`; `multipliers = None` means all ones.
    pub fn rhs(&self, y: &[f64], multipliers: Option<&[f64]>, out: &mut [f64]) -> Result<(), Error> {
        let mech = self.mechanism;
        if let Some(m) = multipliers {
            if m.len() != mech.n_reactions() {
                return Err(Error::Shape(format!(
                    "{} multipliers for {} reactions",
                    m.len(),
                    mech.n_reactions()
                )));
            }
        }
        let ev = self.prepare(y)?;
        let q = self.progress(&ev);
        let mut wdot = vec![0.0; mech.n_species()];
        for (j, qj) in q.iter().enumerate() {
            let rate = multipliers.map_or(1.0, |m| m[j]) * qj;
            for &(s, nu) in mech.net_list(j) {
                wdot[s] += nu * rate;
            }
        }
        self.assemble(&ev, &wdot, out);
        Ok(())
    }

    fn assemble(&self, ev: &Eval, wdot: &[f64], out: &mut [f64]) {
        let w = self.mechanism.weights();
        let mut heat = 0.0;
        for i in 0..wdot.len() {
            out[1 + i] = wdot[i] * w[i] / ev.rho;
            heat += ev.h[i] * wdot[i];
        }
        out[0] = -heat / ev.rho_cp;
    }

    /// Forcing `F`: column `j` is the contribution of reaction `j` alone to
    /// the right-hand side.
    pub fn forcing(&self, y: &[f64], f: &mut DMatrix<f64>) -> Result<(), Error> {
        let ev = self.prepare(y)?;
        let q = self.progress(&ev);
        self.fill_forcing(&ev, &q, f);
        Ok(())
    }

    fn fill_forcing(&self, ev: &Eval, q: &[f64], f: &mut DMatrix<f64>) {
        let mech = self.mechanism;
        let w = mech.weights();
        f.fill(0.0);
        for (j, &qj) in q.iter().enumerate() {
            let mut heat = 0.0;
            for &(s, nu) in mech.net_list(j) {
                f[(1 + s, j)] = nu * qj * w[s] / ev.rho;
                heat += ev.h[s] * nu;
            }
            f[(0, j)] = -heat * qj / ev.rho_cp;
        }
    }

    /// Analytic Jacobian `∂rhs/∂[T, Y…]` at unit multipliers.
    pub fn jacobian(&self, y: &[f64], l: &mut DMatrix<f64>) -> Result<(), Error> {
        let ev = self.prepare(y)?;
        self.fill_jacobian(&ev, l);
        Ok(())
    }

    /// `L` and `F` together, sharing the thermochemistry evaluation.
    pub fn tangent(&self, y: &[f64], l: &mut DMatrix<f64>, f: &mut DMatrix<f64>) -> Result<(), Error> {
        let ev = self.prepare(y)?;
        let q = self.fill_jacobian(&ev, l);
        self.fill_forcing(&ev, &q, f);
        Ok(())
    }

    /// Fills `l` and returns the rates of progress.
    fn fill_jacobian(&self, ev: &Eval, l: &mut DMatrix<f64>) -> Vec<f64> {
        let mech = self.mechanism;
        let n = mech.n_species();
        let w = mech.weights();
        let ctot: f64 = ev.conc.iter().sum();
        let rho = ev.rho;

        let mut q = vec![0.0; mech.n_reactions()];
        let mut wdot = vec![0.0; n];
        // dω̇_i/dT at fixed Y
        let mut wdot_t = vec![0.0; n];
        // Sparse part Σ_j ν_ij ∂q_j/∂C_m, accumulated in a dense n × n block
        let mut dwdc = DMatrix::<f64>::zeros(n, n);
        // Σ_j ν_ij e_j with e_j = Σ_m C_m ∂q_j/∂C_m
        let mut e_sum = vec![0.0; n];
        // Σ_j ν_ij (∂k/∂M) Π_j, the uniform collider part of ∂ω̇/∂C
        let mut collider = vec![0.0; n];

        for j in 0..mech.n_reactions() {
            let rt = mech.rate_terms(j, ev.t, &ev.conc, ctot, &ev.g_rt);
            let prod = mech.concentration_product(j, &ev.conc);
            let qj = rt.k * prod;
            q[j] = qj;
            let net = mech.net_list(j);
            let dq_dm = rt.dk_dm * prod;
            let e_j = rt.k * prod * mech.reaction_order(j) + dq_dm * rt.m;
            let dq_dt = rt.dk_dt * prod - e_j / ev.t;
            for &(s, nu) in net {
                wdot[s] += nu * qj;
                wdot_t[s] += nu * dq_dt;
                e_sum[s] += nu * e_j;
                if dq_dm != 0.0 {
                    collider[s] += nu * dq_dm;
                }
            }
            for &(m, _) in mech.reactant_list(j) {
                let d = rt.k * mech.concentration_product_derivative(j, m, &ev.conc);
                for &(s, nu) in net {
                    dwdc[(s, m)] += nu * d;
                }
            }
            if dq_dm != 0.0 {
                for (&m, &eff) in &mech.reactions()[j].efficiencies {
                    let d = dq_dm * (eff - 1.0);
                    for &(s, nu) in net {
                        dwdc[(s, m)] += nu * d;
                    }
                }
            }
        }

        // dω̇_i/dY_m = (ρ/W_m)(∂ω̇_i/∂C_m) − (W̄/W_m) Σ_j ν_ij e_j
        let mut wdot_y = dwdc;
        for m in 0..n {
            let a = rho / w[m];
            let b = ev.mean_weight / w[m];
            for i in 0..n {
                wdot_y[(i, m)] = a * (wdot_y[(i, m)] + collider[i]) - b * e_sum[i];
            }
        }

        l.fill(0.0);
        let heat: f64 = (0..n).map(|i| ev.h[i] * wdot[i]).sum();
        let rcp = ev.rho_cp;
        for i in 0..n {
            let scale = w[i] / rho;
            for m in 0..n {
                l[(1 + i, 1 + m)] = scale * wdot_y[(i, m)] + wdot[i] * w[i] * ev.mean_weight / (rho * w[m]);
            }
            l[(1 + i, 0)] = scale * wdot_t[i] + wdot[i] * w[i] / (rho * ev.t);
        }
        for m in 0..n {
            let mut hw = 0.0;
            for i in 0..n {
                hw += ev.h[i] * wdot_y[(i, m)];
            }
            let drcp = (rho * ev.cp[m] - ev.mean_weight * rcp) / w[m];
            l[(0, 1 + m)] = -hw / rcp + heat / (rcp * rcp) * drcp;
        }
        let mut num = 0.0;
        let mut dcp_sum = 0.0;
        for i in 0..n {
            num += ev.cp[i] * wdot[i] + ev.h[i] * wdot_t[i];
            dcp_sum += ev.conc[i] * ev.dcp[i];
        }
        l[(0, 0)] = -num / rcp + heat / (rcp * rcp) * (-rcp / ev.t + dcp_sum);
        q
    }

    /// Allocating convenience wrapper around [`Reactor::tangent`].
    pub fn linear_tangent(&self, y: &[f64]) -> Result<LinearTangent, Error> {
        let mut l = DMatrix::zeros(self.n_eq(), self.n_eq());
        let mut f = DMatrix::zeros(self.n_eq(), self.n_rc());
        self.tangent(y, &mut l, &mut f)?;
        Ok(LinearTangent { l, f })
    }
}

/// Right-hand side at a validated state.
pub fn rhs(mechanism: &Mechanism, state: &ReactorState, multipliers: Option<&[f64]>) -> Result<Vec<f64>, Error> {
    state.validate()?;
    let mut out = vec![0.0; mechanism.n_eq()];
    Reactor::new(mechanism, state.pressure).rhs(&state.to_vector(), multipliers, &mut out)?;
    Ok(out)
}

/// Jacobian `L` at a validated state.
pub fn jacobian(mechanism: &Mechanism, state: &ReactorState) -> Result<DMatrix<f64>, Error> {
    state.validate()?;
    let mut l = DMatrix::zeros(mechanism.n_eq(), mechanism.n_eq());
    Reactor::new(mechanism, state.pressure).jacobian(&state.to_vector(), &mut l)?;
    Ok(l)
}

/// Forcing `F` at a validated state.
pub fn forcing(mechanism: &Mechanism, state: &ReactorState) -> Result<DMatrix<f64>, Error> {
    state.validate()?;
    let mut f = DMatrix::zeros(mechanism.n_eq(), mechanism.n_reactions());
    Reactor::new(mechanism, state.pressure).forcing(&state.to_vector(), &mut f)?;
    Ok(f)
}
