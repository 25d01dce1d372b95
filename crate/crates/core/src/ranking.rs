//! Reaction importance from sensitivity factors, species ranking and
//! skeletal mechanism construction.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::error::{Error, MechanismError};
use crate::mechanism::{Mechanism, Reaction, SpeciesInput};

/// `W_j = Σ_n |Y[j,n]| σ_n / Σ_n σ_n`. All-zero singular values give a zero
/// vector.
pub fn reaction_weights(sigma: &[f64], y: &DMatrix<f64>) -> Vec<f64> {
    let total: f64 = sigma.iter().sum();
    let mut w = vec![0.0; y.nrows()];
    if !(total > 0.0) {
        return w;
    }
    for (n, s) in sigma.iter().enumerate() {
        let scale = s / total;
        for (j, wj) in w.iter_mut().enumerate() {
            *wj += y[(j, n)].abs() * scale;
        }
    }
    w
}

/// Running elementwise maximum of weight vectors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChiAccumulator {
    chi: Option<Vec<f64>>,
}

impl ChiAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, weights: &[f64]) -> Result<(), Error> {
        match &mut self.chi {
            None => self.chi = Some(weights.to_vec()),
            Some(chi) => {
                if chi.len() != weights.len() {
                    return Err(Error::Shape(format!(
                        "weight vector of length {} after {}",
                        weights.len(),
                        chi.len()
                    )));
                }
                for (c, w) in chi.iter_mut().zip(weights) {
                    *c = c.max(*w);
                }
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &ChiAccumulator) -> Result<(), Error> {
        if let Some(c) = &other.chi {
            self.add(c)?;
        }
        Ok(())
    }

    pub fn chi(&self) -> Option<&[f64]> {
        self.chi.as_deref()
    }

    pub fn finish(self) -> Result<Vec<f64>, Error> {
        self.chi
            .ok_or_else(|| Error::InvalidArgument("no weight vectors supplied".into()))
    }
}

/// Elementwise maximum over all supplied weight vectors.
pub fn chi_aggregate<'a, I>(streams: I) -> Result<Vec<f64>, Error>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut acc = ChiAccumulator::new();
    for w in streams {
        acc.add(w)?;
    }
    acc.finish()
}

/// Reaction indices by descending `chi`, ties by ascending index.
pub fn reaction_order(chi: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..chi.len()).collect();
    order.sort_by(|&a, &b| chi[b].total_cmp(&chi[a]).then(a.cmp(&b)));
    order
}

/// First-presence species order over the ranked reactions. Reactants come
/// before products, each in declaration order; species that never appear
/// are appended in index order.
pub fn rank_species(reaction_order: &[usize], mechanism: &Mechanism) -> Vec<usize> {
    let n = mechanism.n_species();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for &j in reaction_order {
        for s in mechanism.reactions()[j].participants() {
            if !seen[s] {
                seen[s] = true;
                order.push(s);
            }
        }
    }
    order.extend((0..n).filter(|&s| !seen[s]));
    order
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingResult {
    pub chi: Vec<f64>,
    pub reaction_order: Vec<usize>,
    pub species_order: Vec<usize>,
}

pub fn rank(mechanism: &Mechanism, chi: Vec<f64>) -> Result<RankingResult, Error> {
    if chi.len() != mechanism.n_reactions() {
        return Err(Error::Shape(format!(
            "chi of length {} for {} reactions",
            chi.len(),
            mechanism.n_reactions()
        )));
    }
    let reaction_order = reaction_order(&chi);
    let species_order = rank_species(&reaction_order, mechanism);
    Ok(RankingResult {
        chi,
        reaction_order,
        species_order,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletalModel {
    /// Original species indices, ascending.
    pub retained_species: Vec<usize>,
    /// Original reaction indices, ascending.
    pub retained_reactions: Vec<usize>,
    pub mechanism: Mechanism,
    pub n_keep: usize,
}

/// Keep `n_keep` species: every `protected` species plus the best-ranked
/// others. A reaction survives when all its reactants and products survive;
/// third-body efficiencies of removed species are dropped.
pub fn build_skeletal(
    mechanism: &Mechanism,
    species_order: &[usize],
    n_keep: usize,
    protected: &[usize],
) -> Result<SkeletalModel, Error> {
    let n = mechanism.n_species();
    if n_keep == 0 || n_keep > n {
        return Err(Error::InvalidArgument(format!("n_keep {n_keep} outside 1..={n}")));
    }
    let mut keep = vec![false; n];
    let mut count = 0;
    for &p in protected {
        if p >= n {
            return Err(Error::InvalidArgument(format!("protected species index {p}")));
        }
        if !keep[p] {
            keep[p] = true;
            count += 1;
        }
    }
    if count > n_keep {
        return Err(Error::InvalidArgument(format!(
            "{count} protected species exceed n_keep {n_keep}"
        )));
    }
    for &s in species_order {
        if count == n_keep {
            break;
        }
        if !keep[s] {
            keep[s] = true;
            count += 1;
        }
    }
    let retained_species: Vec<usize> = (0..n).filter(|&s| keep[s]).collect();
    let mut new_index = vec![usize::MAX; n];
    for (i, &s) in retained_species.iter().enumerate() {
        new_index[s] = i;
    }
    let mut retained_reactions = Vec::new();
    let mut reactions = Vec::new();
    for (j, r) in mechanism.reactions().iter().enumerate() {
        if !r.participants().all(|s| keep[s]) {
            continue;
        }
        retained_reactions.push(j);
        let remap = |m: &alloc::collections::BTreeMap<usize, u32>| m.iter().map(|(&s, &c)| (new_index[s], c)).collect();
        reactions.push(Reaction {
            reactants: remap(&r.reactants),
            products: remap(&r.products),
            efficiencies: r
                .efficiencies
                .iter()
                .filter(|(s, _)| keep[**s])
                .map(|(&s, &e)| (new_index[s], e))
                .collect(),
            ..r.clone()
        });
    }
    let species = retained_species
        .iter()
        .map(|&s| {
            let sp = &mechanism.species()[s];
            SpeciesInput {
                name: sp.name.clone(),
                stated_weight: Some(sp.molecular_weight),
                elements: sp.elements.clone(),
                thermo: sp.thermo.clone(),
            }
        })
        .collect();
    let reduced = Mechanism::new(mechanism.elements().to_vec(), species, reactions)
        .map_err(|e: MechanismError| Error::InvalidArgument(format!("reduced mechanism invalid: {e}")))?;
    Ok(SkeletalModel {
        retained_species,
        retained_reactions,
        mechanism: reduced,
        n_keep,
    })
}
