//! Case set-up (equivalence ratio, mole to mass fractions) and ignition
//! delay extraction.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::mechanism::Mechanism;
use crate::reactor::ReactorState;

/// Mole fractions keyed by species name.
pub type Composition = BTreeMap<String, f64>;

/// One initial condition of a campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseSpec {
    pub id: String,
    /// K
    pub t0: f64,
    /// Pa
    pub p0: f64,
    pub phi: f64,
    pub fuel: Composition,
    pub oxidizer: Composition,
    /// s
    pub dt: f64,
    /// s
    pub t_end: f64,
}

const FRACTION_SUM_TOLERANCE: f64 = 1e-8;

fn check_fractions(what: &str, c: &Composition) -> Result<(), Error> {
    if c.is_empty() {
        return Err(Error::InvalidArgument(format!("{what} composition is empty")));
    }
    if let Some((name, x)) = c.iter().find(|(_, &x)| !(x >= 0.0)) {
        return Err(Error::InvalidArgument(format!("{what} mole fraction of {name} is {x}")));
    }
    let sum: f64 = c.values().sum();
    if !((sum - 1.0).abs() <= FRACTION_SUM_TOLERANCE) {
        return Err(Error::InvalidArgument(format!("{what} mole fractions sum to {sum}")));
    }
    Ok(())
}

impl CaseSpec {
    pub fn validate(&self) -> Result<(), Error> {
        check_fractions("fuel", &self.fuel)?;
        check_fractions("oxidizer", &self.oxidizer)?;
        for (name, v) in [("T0", self.t0), ("P0", self.p0), ("phi", self.phi), ("dt", self.dt), ("t_end", self.t_end)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("case {}: {name} = {v} must be positive", self.id)));
            }
        }
        if self.dt > self.t_end {
            return Err(Error::InvalidArgument(format!("case {}: dt exceeds t_end", self.id)));
        }
        Ok(())
    }

    /// Initial reactor state for `mechanism`.
    pub fn initial_state(&self, mechanism: &Mechanism) -> Result<ReactorState, Error> {
        self.validate()?;
        let x = equivalence_ratio_to_composition(mechanism, self.phi, &self.fuel, &self.oxidizer)?;
        let y = mole_to_mass_fractions(mechanism, &x)?;
        ReactorState::new(self.t0, self.p0, y)
    }
}

fn element_count(mechanism: &Mechanism, species: usize, element: &str) -> f64 {
    mechanism.species()[species]
        .elements
        .iter()
        .find(|(e, _)| e.eq_ignore_ascii_case(element))
        .map_or(0.0, |(_, &n)| n as f64)
}

/// O2 demand (in moles of O2) per mole of mixture `c`: `Σ x (C + H/4 − O/2)`.
fn oxygen_demand(mechanism: &Mechanism, c: &Composition) -> Result<f64, Error> {
    let mut d = 0.0;
    for (name, &x) in c {
        let s = mechanism
            .species_index(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown species {name}")))?;
        d += x
            * (element_count(mechanism, s, "C") + element_count(mechanism, s, "H") / 4.0
                - element_count(mechanism, s, "O") / 2.0);
    }
    Ok(d)
}

/// Mixture mole fractions for equivalence ratio `phi`.
pub fn equivalence_ratio_to_composition(
    mechanism: &Mechanism,
    phi: f64,
    fuel: &Composition,
    oxidizer: &Composition,
) -> Result<Composition, Error> {
    if !(phi > 0.0) {
        return Err(Error::InvalidArgument(format!("phi = {phi} must be positive")));
    }
    let demand = oxygen_demand(mechanism, fuel)?;
    if !(demand > 0.0) {
        return Err(Error::InvalidArgument("fuel has no oxidizable content".into()));
    }
    let supply = -oxygen_demand(mechanism, oxidizer)?;
    if !(supply > 0.0) {
        return Err(Error::InvalidArgument("oxidizer carries no net oxygen".into()));
    }
    let fuel_moles = phi * supply / demand;
    let mut mix = Composition::new();
    for (name, &x) in fuel {
        *mix.entry(name.clone()).or_insert(0.0) += fuel_moles * x;
    }
    for (name, &x) in oxidizer {
        *mix.entry(name.clone()).or_insert(0.0) += x;
    }
    let total: f64 = mix.values().sum();
    for v in mix.values_mut() {
        *v /= total;
    }
    Ok(mix)
}

/// Mass fractions in mechanism species order.
pub fn mole_to_mass_fractions(mechanism: &Mechanism, x: &Composition) -> Result<Vec<f64>, Error> {
    let mut y = vec![0.0; mechanism.n_species()];
    for (name, &xi) in x {
        let s = mechanism
            .species_index(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown species {name}")))?;
        y[s] += xi * mechanism.weights()[s];
    }
    let total: f64 = y.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("empty composition".into()));
    }
    for v in &mut y {
        *v /= total;
    }
    Ok(y)
}

/// How the ignition instant is located on a temperature trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IgnitionCriterion {
    /// Maximum of dT/dt, refined by a parabola through the discrete peak.
    /// Peaks below `floor` (K/s) count as no ignition.
    MaxRate { floor: f64 },
    /// First crossing of `T0 + rise`.
    TemperatureRise { rise: f64 },
}

impl Default for IgnitionCriterion {
    fn default() -> Self {
        IgnitionCriterion::MaxRate { floor: 1e4 }
    }
}

/// Ignition delay of a temperature trace.
pub fn ignition_delay(times: &[f64], temperatures: &[f64], criterion: IgnitionCriterion) -> Result<f64, Error> {
    if times.len() != temperatures.len() {
        return Err(Error::Shape("times and temperatures differ in length".into()));
    }
    if times.len() < 3 {
        return Err(Error::InvalidArgument("trajectory needs at least three points".into()));
    }
    match criterion {
        IgnitionCriterion::MaxRate { floor } => {
            let n = times.len() - 1;
            let rates: Vec<f64> = (0..n)
                .map(|i| (temperatures[i + 1] - temperatures[i]) / (times[i + 1] - times[i]))
                .collect();
            let mut best = 0;
            for i in 1..n {
                if rates[i] > rates[best] {
                    best = i;
                }
            }
            let peak = rates[best];
            if !(peak > floor) || best + 1 == n {
                return Err(Error::NoIgnition { peak_rate: peak, floor });
            }
            let mid = |i: usize| 0.5 * (times[i] + times[i + 1]);
            if best == 0 {
                return Ok(mid(0));
            }
            let (a, b, c) = (rates[best - 1], rates[best], rates[best + 1]);
            let (ta, tb, tc) = (mid(best - 1), mid(best), mid(best + 1));
            // vertex of the parabola through the three (time, rate) points
            let num = (tb - ta) * (tb - ta) * (b - c) - (tb - tc) * (tb - tc) * (b - a);
            let den = (tb - ta) * (b - c) - (tb - tc) * (b - a);
            if den == 0.0 {
                return Ok(tb);
            }
            Ok(tb - 0.5 * num / den)
        }
        IgnitionCriterion::TemperatureRise { rise } => {
            let target = temperatures[0] + rise;
            for i in 1..times.len() {
                if temperatures[i] >= target {
                    let (t0, t1) = (temperatures[i - 1], temperatures[i]);
                    let frac = if t1 > t0 { (target - t0) / (t1 - t0) } else { 0.0 };
                    return Ok(times[i - 1] + frac * (times[i] - times[i - 1]));
                }
            }
            let peak = temperatures.iter().fold(f64::NEG_INFINITY, |m, &t| m.max(t)) - temperatures[0];
            Err(Error::NoIgnition { peak_rate: peak, floor: rise })
        }
    }
}

/// `|τ_reduced − τ_detailed| / τ_detailed`.
pub fn relative_error(reduced: f64, detailed: f64) -> Result<f64, Error> {
    if !(detailed > 0.0) {
        return Err(Error::InvalidArgument(format!("detailed delay {detailed} must be positive")));
    }
    Ok((reduced - detailed).abs() / detailed)
}
