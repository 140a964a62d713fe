//! Exhaustive generation of models up to isomorphism.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{canonicalize, Model, MAX_VERTICES};

/// Largest `n` for which exhaustive enumeration is offered.
pub const MAX_ENUMERATION_VERTICES: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("vertex count must be between 1 and {MAX_ENUMERATION_VERTICES}, got {0}")]
    BadSize(usize),
    #[error("max_inputs ({0}) exceeds the vertex count")]
    TooManyInputs(usize),
    #[error("outputs_exactly ({0}) must be between 1 and the vertex count")]
    BadOutputs(usize),
}

/// Which models make up one size class of the database.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationConfig {
    pub n: usize,
    pub max_inputs: usize,
    pub outputs_exactly: usize,
}

impl EnumerationConfig {
    pub fn new(n: usize) -> Self {
        EnumerationConfig {
            n,
            max_inputs: 2.min(n),
            outputs_exactly: 1,
        }
    }

    pub fn validate(&self) -> Result<(), EnumerationError> {
        if self.n == 0 || self.n > MAX_ENUMERATION_VERTICES {
            return Err(EnumerationError::BadSize(self.n));
        }
        if self.max_inputs > self.n {
            return Err(EnumerationError::TooManyInputs(self.max_inputs));
        }
        if self.outputs_exactly == 0 || self.outputs_exactly > self.n {
            return Err(EnumerationError::BadOutputs(self.outputs_exactly));
        }
        Ok(())
    }

    /// Whether a labeled model belongs to this family.
    pub fn admits(&self, m: &Model) -> bool {
        m.n() == self.n
            && m.num_outputs() == self.outputs_exactly
            && m.num_inputs() <= self.max_inputs
            && m.weakly_connected()
            && m.all_reach_output()
    }
}

/// All labeled loop-free digraphs on `n` vertices, as adjacency bitmask rows.
///
/// Digraph number `k` has edge `e` iff bit `e` of `k` is set, with the
/// off-diagonal pairs numbered row by row.
pub fn enumerate_digraphs(n: usize) -> impl Iterator<Item = Vec<u8>> {
    assert!(n <= MAX_ENUMERATION_VERTICES, "exhaustive mode supports n <= 4");
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let total = 1u64 << pairs.len();
    (0..total).map(move |k| digraph_from_index(n, &pairs, k))
}

fn digraph_from_index(n: usize, pairs: &[(usize, usize)], k: u64) -> Vec<u8> {
    let mut adj = vec![0u8; n];
    for (e, &(i, j)) in pairs.iter().enumerate() {
        if k & (1 << e) != 0 {
            adj[i] |= 1 << j;
        }
    }
    adj
}

fn subsets_up_to(n: usize, max_size: usize) -> Vec<u8> {
    (0..1u16 << n)
        .map(|m| m as u8)
        .filter(|m| m.count_ones() as usize <= max_size)
        .collect()
}

fn subsets_exactly(n: usize, size: usize) -> Vec<u8> {
    (0..1u16 << n)
        .map(|m| m as u8)
        .filter(|m| m.count_ones() as usize == size)
        .collect()
}

/// One canonical model per isomorphism class, in ascending key order.
pub fn enumerate_models(cfg: &EnumerationConfig) -> Result<Vec<Model>, EnumerationError> {
    Ok(enumerate_keyed(cfg)?.into_iter().map(|(_, m)| m).collect())
}

/// Like [`enumerate_models`] but keeps the canonical keys.
pub fn enumerate_keyed(cfg: &EnumerationConfig) -> Result<Vec<(String, Model)>, EnumerationError> {
    cfg.validate()?;
    let n = cfg.n;
    debug_assert!(n <= MAX_VERTICES);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let outputs = subsets_exactly(n, cfg.outputs_exactly);
    let inputs = subsets_up_to(n, cfg.max_inputs);
    let leaks = subsets_up_to(n, n);
    let total = 1u64 << pairs.len();

    let keys: BTreeMap<String, Model> = (0..total)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc, k| {
            let adj = digraph_from_index(n, &pairs, k);
            for &out in &outputs {
                let probe = Model::from_masks(n, &adj, 0, out, 0);
                if !probe.weakly_connected() || !probe.all_reach_output() {
                    continue;
                }
                for &inp in &inputs {
                    for &lk in &leaks {
                        let m = Model::from_masks(n, &adj, inp, out, lk);
                        let c = canonicalize(&m);
                        acc.insert(c.key, c.canonical);
                    }
                }
            }
            acc
        })
        .reduce(BTreeMap::new, |mut a, mut b| {
            if a.len() < b.len() {
                std::mem::swap(&mut a, &mut b);
            }
            a.extend(b);
            a
        });
    Ok(keys.into_iter().collect())
}
