//! Strong coincidence for pairs of fixed points.
//!
//! `Δ_k = ab(x_0…x_{k-1}) - ab(y_0…y_{k-1})`. A witness is an index `k ≥ 1`
//! with `Δ_k = 0` and `x_k = y_k`. The scan is horizon-bounded, so a missing
//! witness is reported together with the set of observed `Δ` values and
//! whether that set stopped growing.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{abelian_equivalent, AbelianVector, FixedPointStream, Letter, Word};

pub const DEFAULT_HORIZON: usize = 100_000;
pub const DEEP_HORIZON: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaSequence {
    pub horizon: usize,
    /// `Δ_0, …, Δ_horizon`.
    pub values: Vec<AbelianVector>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceWitness {
    pub k: usize,
    pub c: Letter,
    pub s: Word,
    pub t: Word,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoincidenceVerdict {
    Witness(CoincidenceWitness),
    NoWitnessUpTo {
        horizon: usize,
        delta_values: Vec<AbelianVector>,
        /// No new `Δ` value appeared in the second half of the scan.
        stabilized: bool,
    },
}

impl CoincidenceVerdict {
    pub fn witness(&self) -> Option<&CoincidenceWitness> {
        match self {
            CoincidenceVerdict::Witness(w) => Some(w),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaValueSet {
    pub horizon: usize,
    pub values: Vec<AbelianVector>,
    pub cardinality: usize,
    /// Index at which the last previously unseen value appeared.
    pub last_new_index: usize,
}

fn check_pair(x: &FixedPointStream, y: &FixedPointStream) -> Result<()> {
    if x.alphabet() != y.alphabet() {
        return Err(Error::InvalidArgument("fixed points over different alphabets".into()));
    }
    Ok(())
}

/// Walks `Δ_k` for `k = 0..=horizon` via `Δ_{k+1} = Δ_k + e_{x_k} - e_{y_k}`,
/// calling `visit(k, Δ_k, x_k, y_k)`; the letters are `None` at `k = horizon`.
/// Stops early when `visit` returns `false`.
fn walk_deltas<F>(x: &mut FixedPointStream, y: &mut FixedPointStream, horizon: usize, mut visit: F)
where
    F: FnMut(usize, &[i64], Option<(Letter, Letter)>) -> bool,
{
    let n = x.alphabet().len();
    let xs = x.expand(horizon).to_vec();
    let ys = y.expand(horizon);
    let mut delta = vec![0i64; n];
    for k in 0..horizon {
        let (a, b) = (xs[k], ys[k]);
        if !visit(k, &delta, Some((a, b))) {
            return;
        }
        delta[a as usize] += 1;
        delta[b as usize] -= 1;
    }
    visit(horizon, &delta, None);
}

pub fn delta_sequence(x: &mut FixedPointStream, y: &mut FixedPointStream, horizon: usize) -> Result<DeltaSequence> {
    check_pair(x, y)?;
    let mut values = Vec::with_capacity(horizon + 1);
    walk_deltas(x, y, horizon, |_, d, _| {
        values.push(AbelianVector(d.to_vec()));
        true
    });
    Ok(DeltaSequence { horizon, values })
}

/// Least `k` in `1..horizon` with `Δ_k = 0` and `x_k = y_k`.
pub fn find_strong_coincidence(
    x: &mut FixedPointStream,
    y: &mut FixedPointStream,
    horizon: usize,
) -> Result<CoincidenceVerdict> {
    check_pair(x, y)?;
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut last_new = 0;
    let mut found = None;
    walk_deltas(x, y, horizon, |k, d, letters| {
        let Some((a, b)) = letters else { return false };
        if seen.insert(d.to_vec()) {
            last_new = k;
        }
        if k >= 1 && a == b && d.iter().all(|&c| c == 0) {
            found = Some((k, a));
            return false;
        }
        true
    });
    if let Some((k, c)) = found {
        return Ok(CoincidenceVerdict::Witness(CoincidenceWitness {
            k,
            c,
            s: x.prefix(k),
            t: y.prefix(k),
        }));
    }
    let mut delta_values: Vec<AbelianVector> = seen.into_iter().map(AbelianVector).collect();
    delta_values.sort();
    Ok(CoincidenceVerdict::NoWitnessUpTo {
        horizon,
        delta_values,
        stabilized: last_new < horizon / 2,
    })
}

/// Repeats the scan with doubling horizons from `start` up to `max`, stopping
/// at the first witness.
pub fn find_strong_coincidence_deep(
    x: &mut FixedPointStream,
    y: &mut FixedPointStream,
    start: usize,
    max: usize,
) -> Result<CoincidenceVerdict> {
    let mut h = start.max(1);
    loop {
        let v = find_strong_coincidence(x, y, h)?;
        if v.witness().is_some() || h >= max {
            return Ok(v);
        }
        h = (h * 2).min(max);
    }
}

/// Checks a witness against the actual fixed points.
pub fn validate_witness(x: &mut FixedPointStream, y: &mut FixedPointStream, w: &CoincidenceWitness) -> bool {
    if x.alphabet() != y.alphabet() || w.k == 0 || w.s.len() != w.k || w.t.len() != w.k {
        return false;
    }
    let n = x.alphabet().len();
    if (w.c as usize) >= n || w.s.iter().chain(w.t.iter()).any(|&l| l as usize >= n) {
        return false;
    }
    x.expand(w.k + 1)[..w.k] == w.s[..]
        && y.expand(w.k + 1)[..w.k] == w.t[..]
        && abelian_equivalent(&w.s, &w.t, n)
        && x.letter_at(w.k) == w.c
        && y.letter_at(w.k) == w.c
}

/// Distinct `Δ_k` values for `k < horizon`.
pub fn delta_value_set(x: &mut FixedPointStream, y: &mut FixedPointStream, horizon: usize) -> Result<DeltaValueSet> {
    check_pair(x, y)?;
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut last_new_index = 0;
    walk_deltas(x, y, horizon, |k, d, letters| {
        if letters.is_some() && seen.insert(d.to_vec()) {
            last_new_index = k;
        }
        true
    });
    let mut values: Vec<AbelianVector> = seen.into_iter().map(AbelianVector).collect();
    values.sort();
    Ok(DeltaValueSet {
        horizon,
        cardinality: values.len(),
        values,
        last_new_index,
    })
}
