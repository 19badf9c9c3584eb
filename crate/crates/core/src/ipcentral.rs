//! Finite-sums families inside occurrence sets.
//!
//! From a strong coincidence `x = s c …`, `y = t c …` one gets, after passing
//! to a power `σ = τ^m` where `sc ⊑ σ(a)`, `tc ⊑ σ(b)` and `b` occurs in
//! `σ(c)`, the paths `p_i = s, r, ε^{N_i}` in the prefix graph of `σ`. Their
//! values `n_i` generate a family all of whose finite sums of distinct terms
//! are occurrences of `y`'s prefix in `x`.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::coincidence::{validate_witness, CoincidenceWitness};
use crate::error::{Error, Result};
use crate::numeration::{decode_path, PathRepresentation, PrefixGraph};
use crate::points::OccurrenceSet;
use crate::spectral::abelianization_matrix;
use crate::word::{FixedPointStream, Letter, Word};

pub const DEFAULT_POWER_CAP: u32 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FsOptions {
    /// Largest power of the substitution tried when looking for `σ`.
    pub power_cap: u32,
    /// Length of the prefix `u` of `y` whose occurrences are targeted.
    pub prefix_len: usize,
    /// `N_i = step · i + offset`; `step` must be at least 2.
    pub step: usize,
    /// Added to the least offset that makes `σ^{N}(b)` cover `u`.
    pub extra_offset: usize,
}

impl Default for FsOptions {
    fn default() -> Self {
        FsOptions {
            power_cap: DEFAULT_POWER_CAP,
            prefix_len: 1,
            step: 2,
            extra_offset: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FsProvenance {
    Paths {
        /// `σ = τ^power`, with `τ` the working substitution of the streams.
        power: u32,
        s: Word,
        t: Word,
        c: Letter,
        r: Word,
        target: Word,
        /// `N_i` for each generator.
        schedule: Vec<usize>,
        /// `p_i = s, r, ε^{N_i}` from `x`'s seed.
        paths: Vec<PathRepresentation>,
        /// `q_i = t, r, ε^{N_i}` from `y`'s seed.
        twin_paths: Vec<PathRepresentation>,
    },
    Searched {
        horizon: usize,
        depth: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsFamily {
    #[serde(with = "crate::bigstr::vec")]
    pub generators: Vec<BigUint>,
    pub provenance: FsProvenance,
}

impl FsFamily {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// Builds `count` generators from a validated coincidence witness.
pub fn build_fs_family(
    x: &mut FixedPointStream,
    y: &mut FixedPointStream,
    witness: &CoincidenceWitness,
    count: usize,
    options: &FsOptions,
) -> Result<FsFamily> {
    if x.period() != y.period() {
        return Err(Error::InvalidArgument(format!(
            "fixed points have periods {} and {}",
            x.period(),
            y.period()
        )));
    }
    if !validate_witness(x, y, witness) {
        return Err(Error::InvalidArgument("coincidence witness does not match the fixed points".into()));
    }
    if options.step < 2 {
        return Err(Error::InvalidArgument("schedule step must be at least 2".into()));
    }
    if options.prefix_len == 0 {
        return Err(Error::InvalidArgument("target prefix must be nonempty".into()));
    }
    let target = y.prefix(options.prefix_len);
    let (a, b, c) = (x.seed(), y.seed(), witness.c);
    let s = &witness.s;
    let t = &witness.t;
    let base = x.working().clone();

    let mut found = None;
    for m in 1..=options.power_cap {
        let sigma = base.power(m as usize)?;
        let starts = |img: &[Letter], w: &[Letter]| img.len() > w.len() && img[..w.len()] == *w && img[w.len()] == c;
        if !starts(sigma.image(a), s) || !starts(sigma.image(b), t) {
            continue;
        }
        if let Some(pos) = sigma.image(c).iter().position(|&l| l == b) {
            let r = Word(sigma.image(c)[..pos].to_vec());
            found = Some((m, sigma, r));
            break;
        }
    }
    let Some((power, sigma, r)) = found else {
        return Err(Error::Unsupported(format!(
            "no power up to {} satisfies the prefix conditions",
            options.power_cap
        )));
    };

    let graph = PrefixGraph::new(&sigma);
    graph.check_seed(b)?;
    // Least J with |σ^J(b)| ≥ |u|.
    let m_sigma = abelianization_matrix(&sigma);
    let mut offset = 0;
    let mut lengths = vec![BigUint::from(1u32); sigma.size()];
    while lengths[b as usize] < BigUint::from(target.len()) {
        lengths = m_sigma.left_apply_big(&lengths);
        offset += 1;
    }
    offset += options.extra_offset;

    let mut schedule = Vec::with_capacity(count);
    let mut paths = Vec::with_capacity(count);
    let mut twin_paths = Vec::with_capacity(count);
    let mut generators = Vec::with_capacity(count);
    for i in 0..count {
        let n = options.step * i + offset;
        let tail = std::iter::repeat(Word::empty()).take(n);
        let p = PathRepresentation::new(a, [s.clone(), r.clone()].into_iter().chain(tail.clone()).collect());
        let q = PathRepresentation::new(b, [t.clone(), r.clone()].into_iter().chain(tail).collect());
        generators.push(decode_path(&graph, &p, None)?.value);
        schedule.push(n);
        paths.push(p);
        twin_paths.push(q);
    }
    Ok(FsFamily {
        generators,
        provenance: FsProvenance::Paths {
            power,
            s: s.clone(),
            t: t.clone(),
            c,
            r,
            target,
            schedule,
            paths,
            twin_paths,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FsVerdict {
    Pass,
    Fail,
    /// No failures, but some sums lie beyond the occurrence horizon.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetSum {
    /// Indices into the generator list.
    pub subset: Vec<usize>,
    #[serde(with = "crate::bigstr")]
    pub sum: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsVerification {
    pub generator_count: usize,
    pub horizon: usize,
    pub max_subset_size: usize,
    pub checked: usize,
    pub failures: Vec<SubsetSum>,
    pub unchecked: Vec<SubsetSum>,
    pub verdict: FsVerdict,
}

/// Tests every nonempty subset of at most `max_subset_size` generators:
/// its sum must be a position in `occ`. Sums too large for the horizon are
/// listed as unchecked.
pub fn verify_finite_sums(family: &FsFamily, occ: &OccurrenceSet, max_subset_size: usize) -> FsVerification {
    let m = family.generators.len();
    let limit = occ.horizon.saturating_sub(occ.factor.len().max(1));
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut unchecked = Vec::new();
    let mut subset = Vec::new();
    visit_subsets(m, max_subset_size.min(m), 0, &mut subset, &mut |idx| {
        let sum: BigUint = idx.iter().map(|&i| &family.generators[i]).sum();
        let entry = || SubsetSum { subset: idx.to_vec(), sum: sum.clone() };
        match sum.to_usize().filter(|&v| v <= limit) {
            Some(v) => {
                checked += 1;
                if !occ.contains(v) {
                    failures.push(entry());
                }
            }
            None => unchecked.push(entry()),
        }
    });
    let verdict = if !failures.is_empty() {
        FsVerdict::Fail
    } else if !unchecked.is_empty() {
        FsVerdict::Inconclusive
    } else {
        FsVerdict::Pass
    };
    FsVerification {
        generator_count: m,
        horizon: occ.horizon,
        max_subset_size,
        checked,
        failures,
        unchecked,
        verdict,
    }
}

fn visit_subsets<F: FnMut(&[usize])>(m: usize, max: usize, from: usize, current: &mut Vec<usize>, f: &mut F) {
    if current.len() == max {
        return;
    }
    for i in from..m {
        current.push(i);
        f(current);
        visit_subsets(m, max, i + 1, current, f);
        current.pop();
    }
}

/// Backtracking search for `depth` increasing positive generators whose
/// `2^depth - 1` subset sums are pairwise distinct positions in `occ`.
pub fn search_ip_witness(occ: &OccurrenceSet, depth: usize) -> Result<Option<FsFamily>> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    if depth >= usize::BITS as usize {
        return Err(Error::InvalidArgument(format!("depth {depth} is too large")));
    }
    let positions: HashSet<usize> = occ.positions.iter().copied().collect();
    let max = occ.positions.last().copied().unwrap_or(0);
    let mut chosen = Vec::with_capacity(depth);
    let mut sums = Vec::with_capacity(1 << depth);
    if extend_family(&occ.positions, &positions, max, depth, &mut chosen, &mut sums) {
        Ok(Some(FsFamily {
            generators: chosen.into_iter().map(BigUint::from).collect(),
            provenance: FsProvenance::Searched { horizon: occ.horizon, depth },
        }))
    } else {
        Ok(None)
    }
}

fn extend_family(
    sorted: &[usize],
    positions: &HashSet<usize>,
    max: usize,
    depth: usize,
    chosen: &mut Vec<usize>,
    sums: &mut Vec<usize>,
) -> bool {
    if chosen.len() == depth {
        return true;
    }
    let last = chosen.last().copied().unwrap_or(0);
    let top = sums.iter().copied().max().unwrap_or(0);
    let taken: HashSet<usize> = sums.iter().copied().collect();
    for &n in sorted.iter().filter(|&&n| n > last) {
        if n + top > max {
            break;
        }
        let fresh: Vec<usize> = std::iter::once(n).chain(sums.iter().map(|&v| v + n)).collect();
        if fresh.iter().all(|v| positions.contains(v) && !taken.contains(v)) {
            let before = sums.len();
            sums.extend(fresh);
            chosen.push(n);
            if extend_family(sorted, positions, max, depth, chosen, sums) {
                return true;
            }
            chosen.pop();
            sums.truncate(before);
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coincidence::find_strong_coincidence;
    use crate::points::occurrences;
    use crate::word::Substitution;

    const PAIR: &[(char, &str)] = &[('a', "aab"), ('b', "ba")];
    const FIB: &[(char, &str)] = &[('a', "ab"), ('b', "a")];

    fn pair_family(count: usize) -> (FixedPointStream, FsFamily) {
        let sub = Substitution::from_rules(PAIR).unwrap();
        let mut x = FixedPointStream::new(&sub, 0, 1).unwrap();
        let mut y = FixedPointStream::new(&sub, 1, 1).unwrap();
        let w = find_strong_coincidence(&mut x, &mut y, 100).unwrap().witness().unwrap().clone();
        let fam = build_fs_family(&mut x, &mut y, &w, count, &FsOptions::default()).unwrap();
        (x, fam)
    }

    #[test]
    fn pair_generators() {
        let (_, fam) = pair_family(3);
        let got: Vec<u64> = fam.generators.iter().map(|g| g.to_u64().unwrap()).collect();
        assert_eq!(got[0], 23);
        let FsProvenance::Paths { power, r, .. } = &fam.provenance else { panic!() };
        assert_eq!(*power, 2);
        assert_eq!(r, &Word(vec![0, 0]));
        // |σ^{2i+1}(aab)| + |σ^{2i}(aa)| with |τ^j(a)|, |τ^j(b)| from the recurrence.
        let (mut la, mut lb) = (vec![1u64], vec![1u64]);
        for j in 0..10 {
            la.push(2 * la[j] + lb[j]);
            lb.push(la[j] + lb[j]);
        }
        for (i, &g) in got.iter().enumerate() {
            let k = 2 * (2 * i + 1);
            assert_eq!(g, 2 * la[k] + lb[k] + 2 * la[4 * i]);
        }
    }

    #[test]
    fn pair_sums_are_occurrences() {
        let (mut x, fam) = pair_family(2);
        let top: usize = fam.generators.iter().map(|g| g.to_usize().unwrap()).sum();
        let occ = occurrences(&mut x, &[1], top + 2).unwrap();
        let v = verify_finite_sums(&fam, &occ, 2);
        assert_eq!(v.verdict, FsVerdict::Pass);
        assert_eq!(v.checked, 3);
        assert_eq!(x.letter_at(23), 1);
    }

    #[test]
    fn twin_paths_have_equal_values() {
        let (_, fam) = pair_family(3);
        let sub = Substitution::from_rules(PAIR).unwrap().power(2).unwrap();
        let g = PrefixGraph::new(&sub);
        let FsProvenance::Paths { paths, twin_paths, .. } = &fam.provenance else { panic!() };
        for (p, q) in paths.iter().zip(twin_paths) {
            let (dp, dq) = (decode_path(&g, p, None).unwrap(), decode_path(&g, q, None).unwrap());
            assert_eq!(dp.value, dq.value);
            assert_eq!((dp.terminal, dq.terminal), (1, 1));
        }
    }

    #[test]
    fn empty_family_passes() {
        let (mut x, fam) = pair_family(0);
        assert!(fam.is_empty());
        let occ = occurrences(&mut x, &[1], 10).unwrap();
        assert_eq!(verify_finite_sums(&fam, &occ, 3).verdict, FsVerdict::Pass);
    }

    #[test]
    fn unchecked_sums_are_reported() {
        let (mut x, fam) = pair_family(2);
        let occ = occurrences(&mut x, &[1], 100).unwrap();
        let v = verify_finite_sums(&fam, &occ, 2);
        assert_eq!(v.verdict, FsVerdict::Inconclusive);
        assert_eq!(v.unchecked.len(), 2);
    }

    #[test]
    fn fibonacci_rejects_one() {
        let sub = Substitution::from_rules(FIB).unwrap();
        let mut x = FixedPointStream::new(&sub, 0, 1).unwrap();
        let occ = occurrences(&mut x, &[0], 50).unwrap();
        let fam = FsFamily {
            generators: vec![BigUint::from(1u32)],
            provenance: FsProvenance::Searched { horizon: 50, depth: 1 },
        };
        assert_eq!(verify_finite_sums(&fam, &occ, 1).verdict, FsVerdict::Fail);
    }

    #[test]
    fn fibonacci_search() {
        let sub = Substitution::from_rules(FIB).unwrap();
        let mut x = FixedPointStream::new(&sub, 0, 1).unwrap();
        let occ = occurrences(&mut x, &[0], 20).unwrap();
        let fam = search_ip_witness(&occ, 3).unwrap().unwrap();
        assert_eq!(fam.generators, vec![2u32, 3, 8].into_iter().map(BigUint::from).collect::<Vec<_>>());
        assert_eq!(verify_finite_sums(&fam, &occ, 3).verdict, FsVerdict::Pass);
        let fam = search_ip_witness(&occ, 1).unwrap().unwrap();
        assert_eq!(fam.generators, vec![BigUint::from(2u32)]);
        let empty = OccurrenceSet::from_positions(Word(vec![0]), 20, vec![]).unwrap();
        assert_eq!(search_ip_witness(&empty, 2).unwrap(), None);
    }

    #[test]
    fn longer_target_prefix() {
        let sub = Substitution::from_rules(PAIR).unwrap();
        let mut x = FixedPointStream::new(&sub, 0, 1).unwrap();
        let mut y = FixedPointStream::new(&sub, 1, 1).unwrap();
        let w = find_strong_coincidence(&mut x, &mut y, 100).unwrap().witness().unwrap().clone();
        let opts = FsOptions { prefix_len: 6, ..FsOptions::default() };
        let fam = build_fs_family(&mut x, &mut y, &w, 2, &opts).unwrap();
        let u = y.prefix(6);
        let top: usize = fam.generators.iter().map(|g| g.to_usize().unwrap()).sum();
        let occ = occurrences(&mut x, &u, top + u.len()).unwrap();
        assert_eq!(verify_finite_sums(&fam, &occ, 2).verdict, FsVerdict::Pass);
    }
}
