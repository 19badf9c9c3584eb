//! Occurrence sets, return gaps and agreement-window scans between fixed points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{FixedPointStream, Letter, Word};

/// Positions `k` with `k + |u| ≤ horizon` where the factor `u` occurs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccurrenceSet {
    pub factor: Word,
    pub horizon: usize,
    pub positions: Vec<usize>,
}

impl OccurrenceSet {
    /// Builds an occurrence set from externally supplied positions (for
    /// example piped from another tool). Positions are sorted and deduplicated.
    pub fn from_positions(factor: Word, horizon: usize, mut positions: Vec<usize>) -> Result<Self> {
        positions.sort_unstable();
        positions.dedup();
        if let Some(&p) = positions.iter().find(|&&p| p + factor.len().max(1) > horizon) {
            return Err(Error::InvalidArgument(format!(
                "position {p} does not fit below horizon {horizon}"
            )));
        }
        Ok(OccurrenceSet { factor, horizon, positions })
    }

    pub fn contains(&self, n: usize) -> bool {
        self.positions.binary_search(&n).is_ok()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Scans the fixed point for occurrences of `u` below `horizon`.
pub fn occurrences(stream: &mut FixedPointStream, u: &[Letter], horizon: usize) -> Result<OccurrenceSet> {
    if u.is_empty() {
        return Err(Error::InvalidArgument("factor must be nonempty".into()));
    }
    if horizon < u.len() {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} is shorter than the factor"
        )));
    }
    stream.alphabet().check_word(u)?;
    let prefix = stream.expand(horizon);
    let positions = prefix
        .windows(u.len())
        .enumerate()
        .filter(|(_, w)| *w == u)
        .map(|(k, _)| k)
        .collect();
    Ok(OccurrenceSet {
        factor: Word(u.to_vec()),
        horizon,
        positions,
    })
}

/// Largest gap between consecutive occurrences, counting the gap from 0 to
/// the first occurrence. `None` with fewer than two occurrences.
pub fn max_return_gap(occ: &OccurrenceSet) -> Option<usize> {
    if occ.positions.len() < 2 {
        return None;
    }
    let first = occ.positions[0];
    occ.positions
        .windows(2)
        .map(|w| w[1] - w[0])
        .chain(std::iter::once(first))
        .max()
}

/// A maximal run of positions where two words agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: usize,
    pub len: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProximalityVerdict {
    /// Agreement windows keep growing as the horizon doubles.
    EvidenceFor,
    NoneFound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProximalityEvidence {
    pub horizon: usize,
    pub min_window: usize,
    /// All maximal agreement windows of length at least `min_window`.
    pub windows: Vec<Window>,
    /// `(h, longest window inside [0, h))` for `h = horizon, horizon/2, ...`
    /// down to `min_window`, in increasing order of `h`.
    pub longest_by_horizon: Vec<(usize, usize)>,
    pub verdict: ProximalityVerdict,
}

/// Maximal agreement windows between `x` and `y` below `horizon`.
///
/// Proximality cannot be established by a finite scan; the verdict only says
/// whether the longest window grew when the horizon was doubled.
pub fn proximality_scan(
    x: &mut FixedPointStream,
    y: &mut FixedPointStream,
    min_window: usize,
    horizon: usize,
) -> Result<ProximalityEvidence> {
    if x.alphabet() != y.alphabet() {
        return Err(Error::InvalidArgument("fixed points over different alphabets".into()));
    }
    if min_window == 0 || horizon < min_window {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= min_window <= horizon, got {min_window} and {horizon}"
        )));
    }
    let xs = x.expand(horizon).to_vec();
    let ys = y.expand(horizon);
    let mut all = Vec::new();
    let mut start = None;
    for k in 0..=horizon {
        let agree = k < horizon && xs[k] == ys[k];
        match (agree, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                all.push(Window { start: s, len: k - s });
                start = None;
            }
            _ => {}
        }
    }

    let mut horizons = Vec::new();
    let mut h = horizon;
    while h >= min_window {
        horizons.push(h);
        if h == 1 {
            break;
        }
        h /= 2;
    }
    horizons.reverse();
    let longest_by_horizon: Vec<(usize, usize)> = horizons
        .iter()
        .map(|&h| {
            let best = all
                .iter()
                .filter(|w| w.start < h)
                .map(|w| w.len.min(h - w.start))
                .max()
                .unwrap_or(0);
            (h, best)
        })
        .collect();

    let windows: Vec<Window> = all.into_iter().filter(|w| w.len >= min_window).collect();
    let last = longest_by_horizon.last().map(|t| t.1).unwrap_or(0);
    let previous = if longest_by_horizon.len() >= 2 {
        longest_by_horizon[longest_by_horizon.len() - 2].1
    } else {
        0
    };
    let verdict = if !windows.is_empty() && last > previous {
        ProximalityVerdict::EvidenceFor
    } else {
        ProximalityVerdict::NoneFound
    };
    Ok(ProximalityEvidence {
        horizon,
        min_window,
        windows,
        longest_by_horizon,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Substitution;

    fn stream(rules: &[(char, &str)], seed: char) -> FixedPointStream {
        let s = Substitution::from_rules(rules).unwrap();
        let l = s.alphabet().index_of(seed).unwrap();
        FixedPointStream::new(&s, l, 1).unwrap()
    }

    const FIB: &[(char, &str)] = &[('a', "ab"), ('b', "a")];

    #[test]
    fn fibonacci_occurrences() {
        let mut x = stream(FIB, 'a');
        assert_eq!(occurrences(&mut x, &[0], 12).unwrap().positions, vec![0, 2, 3, 5, 7, 8, 10, 11]);
        assert_eq!(occurrences(&mut x, &[0, 1], 13).unwrap().positions, vec![0, 3, 5, 8, 11]);
        assert!(occurrences(&mut x, &[1, 1], 5000).unwrap().is_empty());
        assert_eq!(occurrences(&mut x, &[2], 10), Err(Error::LetterOutOfRange(2, 2)));
        assert!(occurrences(&mut x, &[], 10).is_err());
    }

    #[test]
    fn return_gaps() {
        let mut x = stream(FIB, 'a');
        assert_eq!(max_return_gap(&occurrences(&mut x, &[0], 12).unwrap()), Some(2));
        assert_eq!(max_return_gap(&occurrences(&mut x, &[1], 13).unwrap()), Some(3));
        let single = OccurrenceSet::from_positions(Word(vec![0]), 10, vec![4]).unwrap();
        assert_eq!(max_return_gap(&single), None);
    }

    #[test]
    fn proximal_uniform_pair() {
        let rules = &[('a', "aaab"), ('b', "bbab")];
        let mut x = stream(rules, 'a');
        let mut y = stream(rules, 'b');
        let ev = proximality_scan(&mut x, &mut y, 4, 16).unwrap();
        assert!(ev.windows.iter().any(|w| w.start <= 8 && w.start + w.len >= 12));
        let ev = proximality_scan(&mut x, &mut y, 4, 1 << 12).unwrap();
        assert_eq!(ev.verdict, ProximalityVerdict::EvidenceFor);
    }

    #[test]
    fn thue_morse_never_agrees() {
        let rules = &[('a', "ab"), ('b', "ba")];
        let mut x = stream(rules, 'a');
        let mut y = stream(rules, 'b');
        let ev = proximality_scan(&mut x, &mut y, 1, 4096).unwrap();
        assert!(ev.windows.is_empty());
        assert_eq!(ev.verdict, ProximalityVerdict::NoneFound);
    }

    #[test]
    fn reflexive_scan_is_one_window() {
        let mut x = stream(FIB, 'a');
        let mut y = stream(FIB, 'a');
        let ev = proximality_scan(&mut x, &mut y, 3, 1000).unwrap();
        assert_eq!(ev.windows, vec![Window { start: 0, len: 1000 }]);
        assert_eq!(ev.verdict, ProximalityVerdict::EvidenceFor);
    }
}
