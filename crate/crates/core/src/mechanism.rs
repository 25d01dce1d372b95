//! Chemical mechanism data model, NASA-7 thermochemistry and rate laws.
//!
//! Units are SI with kmol: concentrations in kmol/m³, activation energies in
//! J/kmol, molar thermodynamic quantities per kmol. Every reaction is
//! irreversible; a reversible input is stored as a forward/reverse pair whose
//! reverse rate follows from the equilibrium constant.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::elements::standard_atomic_weight;
use crate::error::{Error, MechanismError};
use crate::{GAS_CONSTANT, ONE_ATMOSPHERE};

/// Two-range NASA seven-coefficient polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Nasa7 {
    pub low: [f64; 7],
    pub high: [f64; 7],
    pub t_low: f64,
    pub t_mid: f64,
    pub t_high: f64,
}

impl Nasa7 {
    #[inline]
    fn coeffs(&self, t: f64) -> &[f64; 7] {
        if t < self.t_mid {
            &self.low
        } else {
            &self.high
        }
    }

    /// cp/R.
    #[inline]
    pub fn cp_r(&self, t: f64) -> f64 {
        cp_r(self.coeffs(t), t)
    }

    /// h/(R T).
    #[inline]
    pub fn h_rt(&self, t: f64) -> f64 {
        h_rt(self.coeffs(t), t)
    }

    /// s/R at the standard-state pressure.
    #[inline]
    pub fn s_r(&self, t: f64) -> f64 {
        s_r(self.coeffs(t), t)
    }

    /// d(cp/R)/dT.
    #[inline]
    pub fn dcp_r_dt(&self, t: f64) -> f64 {
        let a = self.coeffs(t);
        a[1] + t * (2.0 * a[2] + t * (3.0 * a[3] + t * 4.0 * a[4]))
    }

    /// cp/R evaluated from an explicit branch, for continuity checks.
    pub fn cp_r_branch(&self, high: bool, t: f64) -> f64 {
        cp_r(if high { &self.high } else { &self.low }, t)
    }

    pub fn h_rt_branch(&self, high: bool, t: f64) -> f64 {
        h_rt(if high { &self.high } else { &self.low }, t)
    }

    pub fn s_r_branch(&self, high: bool, t: f64) -> f64 {
        s_r(if high { &self.high } else { &self.low }, t)
    }
}

#[inline]
fn cp_r(a: &[f64; 7], t: f64) -> f64 {
    a[0] + t * (a[1] + t * (a[2] + t * (a[3] + t * a[4])))
}

#[inline]
fn h_rt(a: &[f64; 7], t: f64) -> f64 {
    a[0] + t * (a[1] / 2.0 + t * (a[2] / 3.0 + t * (a[3] / 4.0 + t * a[4] / 5.0))) + a[5] / t
}

/// `x^n` by repeated multiplication; stoichiometric powers are small.
#[inline]
fn ipow(x: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |p, _| p * x)
}

#[inline]
fn s_r(a: &[f64; 7], t: f64) -> f64 {
    a[0] * libm::log(t) + t * (a[1] + t * (a[2] / 2.0 + t * (a[3] / 3.0 + t * a[4] / 4.0))) + a[6]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Species {
    pub name: String,
    /// kg/kmol, computed from the element counts so that mass is conserved
    /// exactly by balanced reactions.
    pub molecular_weight: f64,
    pub elements: BTreeMap<String, u32>,
    pub thermo: Nasa7,
}

/// Molar heat capacity, enthalpy and entropy of one species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thermo {
    /// J/(kmol·K)
    pub cp: f64,
    /// J/kmol
    pub h: f64,
    /// J/(kmol·K)
    pub s: f64,
}

/// Evaluate cp, h and s of `species` at `t`, rejecting temperatures outside
/// the polynomial fit range.
pub fn thermo_eval(species: &Species, t: f64) -> Result<Thermo, Error> {
    let th = &species.thermo;
    if !(t >= th.t_low && t <= th.t_high) {
        return Err(Error::TemperatureOutOfRange {
            species: species.name.clone(),
            temperature: t,
            t_low: th.t_low,
            t_high: th.t_high,
        });
    }
    Ok(Thermo {
        cp: GAS_CONSTANT * th.cp_r(t),
        h: GAS_CONSTANT * t * th.h_rt(t),
        s: GAS_CONSTANT * th.s_r(t),
    })
}

/// Modified Arrhenius parameters `k = A T^b exp(−Ea/(R_u T))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrhenius {
    pub a: f64,
    pub b: f64,
    /// J/kmol
    pub ea: f64,
}

impl Arrhenius {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let mut k = self.a;
        if self.b != 0.0 {
            k *= libm::pow(t, self.b);
        }
        if self.ea != 0.0 {
            k *= libm::exp(-self.ea / (GAS_CONSTANT * t));
        }
        k
    }

    /// d ln k / dT.
    #[inline]
    pub fn dln_dt(&self, t: f64) -> f64 {
        (self.b + self.ea / (GAS_CONSTANT * t)) / t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReactionKind {
    Elementary,
    /// Rate multiplied by the effective collider concentration `[M]`.
    ThreeBody,
    /// Lindemann blending between the high-pressure `arrhenius` limit and the
    /// low-pressure limit `low`.
    Falloff { low: Arrhenius },
}

/// Where an irreversible reaction came from in the input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SourceTag {
    /// Irreversible input reaction number (1-based).
    Irreversible(usize),
    /// Forward half of a reversible input reaction.
    Forward(usize),
    /// Reverse half of a reversible input reaction.
    Reverse(usize),
}

impl SourceTag {
    pub fn input_number(&self) -> usize {
        match *self {
            SourceTag::Irreversible(n) | SourceTag::Forward(n) | SourceTag::Reverse(n) => n,
        }
    }
}

impl fmt::Display for SourceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceTag::Irreversible(n) => write!(f, "R{n}"),
            SourceTag::Forward(n) => write!(f, "fwd of R{n}"),
            SourceTag::Reverse(n) => write!(f, "rev of R{n}"),
        }
    }
}

/// One irreversible reaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    /// species index → stoichiometric coefficient
    pub reactants: BTreeMap<usize, u32>,
    pub products: BTreeMap<usize, u32>,
    /// For a reverse reaction these are the forward parameters; the rate is
    /// then divided by the forward equilibrium constant.
    pub arrhenius: Arrhenius,
    pub kind: ReactionKind,
    /// Third-body efficiencies that differ from 1 (three-body/falloff only).
    pub efficiencies: BTreeMap<usize, f64>,
    /// Rate derived from the paired forward reaction through the equilibrium
    /// constant.
    pub equilibrium_reverse: bool,
    pub source_tag: SourceTag,
}

impl Reaction {
    pub fn elementary(
        reactants: &[(usize, u32)],
        products: &[(usize, u32)],
        arrhenius: Arrhenius,
    ) -> Self {
        Reaction {
            reactants: reactants.iter().copied().collect(),
            products: products.iter().copied().collect(),
            arrhenius,
            kind: ReactionKind::Elementary,
            efficiencies: BTreeMap::new(),
            equilibrium_reverse: false,
            source_tag: SourceTag::Irreversible(0),
        }
    }

    /// Reverse partner of a forward reaction: sides swapped, same rate
    /// parameters, rate divided by the equilibrium constant at run time.
    pub fn reversed(&self) -> Self {
        let mut rev = self.clone();
        core::mem::swap(&mut rev.reactants, &mut rev.products);
        rev.equilibrium_reverse = true;
        rev
    }

    /// All species named by the reaction: reactants then products, each in
    /// ascending index order, without repeats.
    pub fn participants(&self) -> impl Iterator<Item = usize> + '_ {
        self.reactants.keys().copied().chain(
            self.products
                .keys()
                .copied()
                .filter(move |s| !self.reactants.contains_key(s)),
        )
    }

    pub fn involves(&self, species: usize) -> bool {
        self.reactants.contains_key(&species) || self.products.contains_key(&species)
    }

    /// Net stoichiometric coefficient of `species` (products − reactants).
    pub fn net(&self, species: usize) -> i32 {
        self.products.get(&species).copied().unwrap_or(0) as i32
            - self.reactants.get(&species).copied().unwrap_or(0) as i32
    }

    pub fn has_third_body(&self) -> bool {
        !matches!(self.kind, ReactionKind::Elementary)
    }
}

/// An element declared by a mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub symbol: String,
    /// kg/kmol
    pub weight: f64,
}

impl Element {
    /// Standard atomic weight lookup.
    pub fn standard(symbol: &str) -> Option<Self> {
        standard_atomic_weight(symbol).map(|weight| Element {
            symbol: symbol.into(),
            weight,
        })
    }
}

/// Input description of one species before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesInput {
    pub name: String,
    pub stated_weight: Option<f64>,
    pub elements: BTreeMap<String, u32>,
    pub thermo: Nasa7,
}

#[derive(Debug, Clone)]
struct Stoich {
    /// (species, coefficient) pairs of the rate law's concentration product
    reactants: Vec<(usize, u32)>,
    /// (species, net coefficient), non-zero only
    net: Vec<(usize, f64)>,
    order: f64,
    delta_nu: f64,
}

/// A validated, immutable mechanism.
#[derive(Debug, Clone)]
pub struct Mechanism {
    elements: Vec<Element>,
    species: Vec<Species>,
    reactions: Vec<Reaction>,
    stoich: Vec<Stoich>,
    weights: Vec<f64>,
}

impl PartialEq for Mechanism {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements
            && self.species == other.species
            && self.reactions == other.reactions
    }
}

/// Relative tolerance between a stated and an element-derived molecular weight.
pub const WEIGHT_TOLERANCE: f64 = 5e-3;
/// Relative tolerance of cp/R continuity at the polynomial break point.
pub const CP_CONTINUITY_TOLERANCE: f64 = 1e-4;

impl Mechanism {
    /// Validate the inputs and build the mechanism.
    pub fn new(
        elements: Vec<Element>,
        species: Vec<SpeciesInput>,
        reactions: Vec<Reaction>,
    ) -> Result<Self, MechanismError> {
        let mut built = Vec::with_capacity(species.len());
        for (i, sp) in species.into_iter().enumerate() {
            if built.iter().any(|s: &Species| s.name == sp.name) {
                return Err(MechanismError::DuplicateSpecies(sp.name));
            }
            let invalid = |reason: String| MechanismError::InvalidSpecies {
                species: sp.name.clone(),
                reason,
            };
            let mut weight = 0.0;
            for (el, &count) in &sp.elements {
                let e = elements.iter().find(|e| e.symbol == *el).ok_or_else(|| {
                    MechanismError::UnknownElement {
                        species: sp.name.clone(),
                        element: el.clone(),
                    }
                })?;
                weight += e.weight * count as f64;
            }
            if !(weight > 0.0) {
                return Err(invalid("molecular weight must be positive".into()));
            }
            if let Some(stated) = sp.stated_weight {
                if !(stated > 0.0) || ((stated - weight) / weight).abs() > WEIGHT_TOLERANCE {
                    return Err(invalid(format!(
                        "stated weight {stated} differs from element-derived {weight:.6} by more than 0.5%"
                    )));
                }
            }
            let th = &sp.thermo;
            if !(th.t_low < th.t_mid && th.t_mid < th.t_high) {
                return Err(invalid(format!(
                    "temperatures must satisfy t_low < t_mid < t_high, got {}, {}, {}",
                    th.t_low, th.t_mid, th.t_high
                )));
            }
            let lo = th.cp_r_branch(false, th.t_mid);
            let hi = th.cp_r_branch(true, th.t_mid);
            if !(((lo - hi) / hi).abs() <= CP_CONTINUITY_TOLERANCE) {
                return Err(invalid(format!(
                    "cp/R discontinuous at t_mid: {lo} (low) vs {hi} (high)"
                )));
            }
            let _ = i;
            built.push(Species {
                name: sp.name,
                molecular_weight: weight,
                elements: sp.elements,
                thermo: sp.thermo,
            });
        }
        let n_sp = built.len();
        for (j, r) in reactions.iter().enumerate() {
            let bad = |reason: &str| MechanismError::InvalidReaction {
                reaction: j,
                reason: reason.into(),
            };
            for &s in r
                .reactants
                .keys()
                .chain(r.products.keys())
                .chain(r.efficiencies.keys())
            {
                if s >= n_sp {
                    return Err(MechanismError::SpeciesIndexOutOfRange { reaction: j, index: s });
                }
            }
            if r.reactants.is_empty() || r.products.is_empty() {
                return Err(bad("both sides need at least one species"));
            }
            if r.reactants.values().chain(r.products.values()).any(|&c| c == 0) {
                return Err(bad("stoichiometric coefficients must be positive"));
            }
            if !(r.arrhenius.a > 0.0) {
                return Err(bad("pre-exponential factor must be strictly positive"));
            }
            if let ReactionKind::Falloff { low } = &r.kind {
                if !(low.a > 0.0) {
                    return Err(bad("low-pressure pre-exponential factor must be strictly positive"));
                }
            }
            if !r.has_third_body() && !r.efficiencies.is_empty() {
                return Err(bad("efficiencies given for a reaction without third body"));
            }
            if r.efficiencies.values().any(|&e| !(e >= 0.0)) {
                return Err(bad("third-body efficiencies must be non-negative"));
            }
            let mut totals: BTreeMap<&str, (u32, u32)> = BTreeMap::new();
            for (&s, &c) in &r.reactants {
                for (el, &n) in &built[s].elements {
                    totals.entry(el.as_str()).or_default().0 += n * c;
                }
            }
            for (&s, &c) in &r.products {
                for (el, &n) in &built[s].elements {
                    totals.entry(el.as_str()).or_default().1 += n * c;
                }
            }
            if let Some((el, &(a, b))) = totals.iter().find(|(_, (a, b))| a != b) {
                return Err(MechanismError::Unbalanced {
                    reaction: j,
                    element: (*el).into(),
                    reactants: a,
                    products: b,
                });
            }
        }
        let stoich = reactions
            .iter()
            .map(|r| {
                let reactants: Vec<(usize, u32)> = r.reactants.iter().map(|(&s, &c)| (s, c)).collect();
                let mut net = Vec::new();
                for s in r.participants() {
                    let n = r.net(s);
                    if n != 0 {
                        net.push((s, n as f64));
                    }
                }
                let order = reactants.iter().map(|&(_, c)| c as f64).sum::<f64>();
                let delta_nu = r.products.values().map(|&c| c as f64).sum::<f64>() - order;
                Stoich {
                    reactants,
                    net,
                    order,
                    delta_nu,
                }
            })
            .collect();
        let weights = built.iter().map(|s| s.molecular_weight).collect();
        Ok(Mechanism {
            elements,
            species: built,
            reactions,
            stoich,
            weights,
        })
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    /// Number of irreversible reactions (reversible inputs count twice).
    pub fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    /// State size: temperature plus one mass fraction per species.
    pub fn n_eq(&self) -> usize {
        self.species.len() + 1
    }

    /// Molecular weights, kg/kmol.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s.name == name)
    }

    /// Count of reversible input reactions recovered from forward/reverse
    /// tag pairs.
    pub fn reversible_pairs(&self) -> usize {
        self.reactions
            .iter()
            .filter(|r| matches!(r.source_tag, SourceTag::Reverse(_)))
            .count()
    }

    /// Rate coefficient of reaction `j` at temperature `t` with species
    /// concentrations `conc` (kmol/m³). Includes the collider concentration
    /// for three-body reactions and the equilibrium constant for reverse
    /// reactions.
    pub fn rate_coefficient(&self, j: usize, t: f64, conc: &[f64]) -> Result<f64, Error> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("temperature {t} K must be positive")));
        }
        if conc.len() != self.n_species() {
            return Err(Error::Shape(format!(
                "{} concentrations for {} species",
                conc.len(),
                self.n_species()
            )));
        }
        if conc.iter().any(|&c| c < 0.0) {
            return Err(Error::Domain("negative concentration".into()));
        }
        let g_rt: Vec<f64> = self
            .species
            .iter()
            .map(|s| s.thermo.h_rt(t) - s.thermo.s_r(t))
            .collect();
        let ctot = conc.iter().sum::<f64>();
        Ok(self.rate_terms(j, t, conc, ctot, &g_rt).k)
    }

    /// Effective collider concentration `[M] = Σ εᵢ [Xᵢ]`.
    fn collider(&self, r: &Reaction, conc: &[f64], ctot: f64) -> f64 {
        let mut m = ctot;
        for (&s, &e) in &r.efficiencies {
            m += (e - 1.0) * conc[s];
        }
        m
    }

    /// Rate coefficient and its partial derivatives for reaction `j`.
    pub(crate) fn rate_terms(
        &self,
        j: usize,
        t: f64,
        conc: &[f64],
        ctot: f64,
        g_rt: &[f64],
    ) -> RateTerms {
        let r = &self.reactions[j];
        let arr = &r.arrhenius;
        let (mut k, mut dk_dt, mut dk_dm, m) = match &r.kind {
            ReactionKind::Elementary => {
                let k = arr.eval(t);
                (k, k * arr.dln_dt(t), 0.0, 0.0)
            }
            ReactionKind::ThreeBody => {
                let m = self.collider(r, conc, ctot);
                let ka = arr.eval(t);
                (ka * m, ka * m * arr.dln_dt(t), ka, m)
            }
            ReactionKind::Falloff { low } => {
                let m = self.collider(r, conc, ctot);
                let kinf = arr.eval(t);
                let k0 = low.eval(t);
                let d = kinf + k0 * m;
                let k = kinf * k0 * m / d;
                let ainf = arr.dln_dt(t);
                let a0 = low.dln_dt(t);
                (k, k * (ainf * k0 * m + a0 * kinf) / d, kinf * kinf * k0 / (d * d), m)
            }
        };
        if r.equilibrium_reverse {
            // Equilibrium constant of this reaction's own direction, which is
            // the inverse of the forward constant.
            let st = &self.stoich[j];
            let mut dg = 0.0;
            let mut dh = 0.0;
            for &(s, n) in &st.net {
                dg += n * g_rt[s];
                dh += n * (g_rt[s] + self.species[s].thermo.s_r(t));
            }
            let conc_ref = ONE_ATMOSPHERE / (GAS_CONSTANT * t);
            let kc = libm::exp(-dg) * libm::pow(conc_ref, st.delta_nu);
            let dlnkc_dt = dh / t - st.delta_nu / t;
            dk_dt = dk_dt * kc + k * kc * dlnkc_dt;
            k *= kc;
            dk_dm *= kc;
        }
        RateTerms { k, dk_dt, dk_dm, m }
    }

    /// Net molar production rates `ω̇ᵢ` (kmol/(m³·s)) with per-reaction rate
    /// multipliers; `multipliers = None` means all ones.
    pub fn production_rates(
        &self,
        t: f64,
        conc: &[f64],
        multipliers: Option<&[f64]>,
    ) -> Result<Vec<f64>, Error> {
        if let Some(m) = multipliers {
            if m.len() != self.n_reactions() {
                return Err(Error::Shape(format!(
                    "{} multipliers for {} reactions",
                    m.len(),
                    self.n_reactions()
                )));
            }
        }
        let q = self.rates_of_progress(t, conc)?;
        let mut wdot = vec![0.0; self.n_species()];
        for (j, qj) in q.iter().enumerate() {
            let alpha = multipliers.map_or(1.0, |m| m[j]);
            for &(s, n) in &self.stoich[j].net {
                wdot[s] += n * alpha * qj;
            }
        }
        Ok(wdot)
    }

    /// Rates of progress `qⱼ = kⱼ Π [X]^ν′` at unit multipliers.
    pub fn rates_of_progress(&self, t: f64, conc: &[f64]) -> Result<Vec<f64>, Error> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("temperature {t} K must be positive")));
        }
        if conc.len() != self.n_species() {
            return Err(Error::Shape(format!(
                "{} concentrations for {} species",
                conc.len(),
                self.n_species()
            )));
        }
        let g_rt: Vec<f64> = self
            .species
            .iter()
            .map(|s| s.thermo.h_rt(t) - s.thermo.s_r(t))
            .collect();
        let ctot = conc.iter().sum::<f64>();
        Ok((0..self.n_reactions())
            .map(|j| self.rate_terms(j, t, conc, ctot, &g_rt).k * self.concentration_product(j, conc))
            .collect())
    }

    #[inline]
    pub(crate) fn concentration_product(&self, j: usize, conc: &[f64]) -> f64 {
        let mut p = 1.0;
        for &(s, c) in &self.stoich[j].reactants {
            p *= ipow(conc[s], c);
        }
        p
    }

    /// `∂(Π [X]^ν′)/∂[X_s]` for reactant `s` of reaction `j`.
    #[inline]
    pub(crate) fn concentration_product_derivative(&self, j: usize, s: usize, conc: &[f64]) -> f64 {
        let mut p = 1.0;
        for &(l, c) in &self.stoich[j].reactants {
            if l == s {
                p *= c as f64 * ipow(conc[l], c - 1);
            } else {
                p *= ipow(conc[l], c);
            }
        }
        p
    }

    pub(crate) fn reactant_list(&self, j: usize) -> &[(usize, u32)] {
        &self.stoich[j].reactants
    }

    pub(crate) fn net_list(&self, j: usize) -> &[(usize, f64)] {
        &self.stoich[j].net
    }

    pub(crate) fn reaction_order(&self, j: usize) -> f64 {
        self.stoich[j].order
    }
}

/// Rate coefficient `k` with `∂k/∂T` at fixed concentrations and `∂k/∂[M]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RateTerms {
    pub k: f64,
    pub dk_dt: f64,
    pub dk_dm: f64,
    pub m: f64,
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use alloc::string::ToString;

    pub fn constant_cp(cp_r: f64, h_offset: f64) -> Nasa7 {
        let mut a = [0.0; 7];
        a[0] = cp_r;
        a[5] = h_offset;
        Nasa7 {
            low: a,
            high: a,
            t_low: 200.0,
            t_mid: 1000.0,
            t_high: 6000.0,
        }
    }

    pub fn species(name: &str, elements: &[(&str, u32)], thermo: Nasa7) -> SpeciesInput {
        SpeciesInput {
            name: name.to_string(),
            stated_weight: None,
            elements: elements.iter().map(|&(e, n)| (e.to_string(), n)).collect(),
            thermo,
        }
    }

    pub fn element(symbol: &str, weight: f64) -> Element {
        Element {
            symbol: symbol.to_string(),
            weight,
        }
    }

    /// Isomerization A → B with unit molecular weights and no heat release.
    pub fn isomerization(k: f64) -> Mechanism {
        Mechanism::new(
            vec![element("X", 1.0)],
            vec![
                species("A", &[("X", 1)], constant_cp(3.5, 0.0)),
                species("B", &[("X", 1)], constant_cp(3.5, 0.0)),
            ],
            vec![Reaction::elementary(&[(0, 1)], &[(1, 1)], Arrhenius { a: k, b: 0.0, ea: 0.0 })],
        )
        .unwrap()
    }
}
