//! Dumont–Thomas numeration: the prefix automaton of a substitution and the
//! codecs between labeled paths and natural numbers.
//!
//! A path `u_0, …, u_n` from vertex `a` stands for the prefix
//! `τ^n(u_0) τ^{n-1}(u_1) ⋯ u_n` of the fixed point at `a`; its value is the
//! length of that prefix. Values are exact big integers since they grow
//! exponentially in the path length.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{abelianization_matrix, AbelianizationMatrix};
use crate::word::{abelianize, Alphabet, Letter, Substitution, Word};

pub const DEFAULT_MATERIALIZE_CAP: usize = 1_000_000;

/// Edge `(source, target, label)`: `label · target` is a prefix of `τ(source)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub source: Letter,
    pub target: Letter,
    pub label: Word,
}

#[derive(Clone, Debug)]
pub struct PrefixGraph {
    sub: Substitution,
    matrix: AbelianizationMatrix,
    out: Vec<Vec<Edge>>,
}

pub fn build_prefix_graph(sub: &Substitution) -> PrefixGraph {
    PrefixGraph::new(sub)
}

impl PrefixGraph {
    pub fn new(sub: &Substitution) -> Self {
        let out = (0..sub.size())
            .map(|a| {
                let img = sub.image(a as Letter);
                (0..img.len())
                    .map(|k| Edge {
                        source: a as Letter,
                        target: img[k],
                        label: Word(img[..k].to_vec()),
                    })
                    .collect()
            })
            .collect();
        PrefixGraph {
            sub: sub.clone(),
            matrix: abelianization_matrix(sub),
            out,
        }
    }

    pub fn substitution(&self) -> &Substitution {
        &self.sub
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.sub.alphabet()
    }

    /// Out-edges of `v`, ordered by label length.
    pub fn out_edges(&self, v: Letter) -> &[Edge] {
        &self.out[v as usize]
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.out.iter().flatten()
    }

    /// The edge leaving `v` with the given label, if `label` is a proper
    /// prefix of `τ(v)`.
    pub fn edge(&self, v: Letter, label: &[Letter]) -> Option<&Edge> {
        let e = self.out.get(v as usize)?.get(label.len())?;
        (e.label[..] == *label).then_some(e)
    }

    /// Fails unless the fixed point at `start` exists, i.e. `τ(start)`
    /// begins with `start` and is longer than one letter.
    pub fn check_seed(&self, start: Letter) -> Result<()> {
        self.alphabet().check_letter(start)?;
        let img = self.sub.image(start);
        if img[0] == start && img.len() >= 2 {
            Ok(())
        } else {
            Err(Error::NotPeriodicSeed {
                letter: self.alphabet().symbol(start),
                period: 1,
            })
        }
    }

    /// Row vectors `1ᵀ M^j` for `j = 0..=levels`: entry `b` is `|τ^j(b)|`.
    fn length_rows(&self, levels: usize) -> Vec<Vec<BigUint>> {
        let n = self.sub.size();
        let mut rows = Vec::with_capacity(levels + 1);
        rows.push(vec![BigUint::from(1u32); n]);
        for j in 0..levels {
            let next = self.matrix.left_apply_big(&rows[j]);
            rows.push(next);
        }
        rows
    }

    /// `|τ^j(u)|` for every label of every vertex, `j = 0..levels`.
    pub fn weight_table(&self, levels: usize) -> Vec<WeightEntry> {
        let rows = self.length_rows(levels);
        let mut out = Vec::new();
        for (j, row) in rows.iter().enumerate().take(levels) {
            for e in self.edges() {
                out.push(WeightEntry {
                    level: j,
                    vertex: e.source,
                    label: e.label.clone(),
                    weight: dot(row, &e.label),
                });
            }
        }
        out
    }
}

fn dot(row: &[BigUint], word: &[Letter]) -> BigUint {
    let mut acc = BigUint::zero();
    for &l in word {
        acc += &row[l as usize];
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub level: usize,
    pub vertex: Letter,
    pub label: Word,
    #[serde(with = "crate::bigstr")]
    pub weight: BigUint,
}

/// A path in the prefix graph, given by its start vertex and edge labels.
/// The empty label list is the 0th path.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathRepresentation {
    pub start: Letter,
    pub labels: Vec<Word>,
}

impl PathRepresentation {
    pub fn new(start: Letter, labels: Vec<Word>) -> Self {
        PathRepresentation { start, labels }
    }

    pub fn empty(start: Letter) -> Self {
        PathRepresentation { start, labels: Vec::new() }
    }

    fn empty_token(alphabet: &Alphabet) -> &'static str {
        if alphabet.contains('e') {
            "ε"
        } else {
            "e"
        }
    }

    /// Text form `a: a.e.a` (start vertex, dot-separated labels, `e` for the
    /// empty label, or `ε` when `e` is itself a letter).
    pub fn render(&self, alphabet: &Alphabet) -> String {
        let eps = Self::empty_token(alphabet);
        let body = if self.labels.is_empty() {
            eps.to_string()
        } else {
            self.labels
                .iter()
                .map(|l| if l.is_empty() { eps.to_string() } else { alphabet.render(l) })
                .collect::<Vec<_>>()
                .join(".")
        };
        format!("{}: {}", alphabet.symbol(self.start), body)
    }

    /// Parses the text form produced by [`PathRepresentation::render`].
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let (start, body) = text
            .split_once(':')
            .ok_or_else(|| Error::InvalidPath(format!("missing ':' in {text:?}")))?;
        let start = start.trim();
        let mut chars = start.chars();
        let (Some(c), None) = (chars.next(), chars.next()) else {
            return Err(Error::InvalidPath(format!("bad start vertex {start:?}")));
        };
        let start = alphabet.index_of(c)?;
        let body = body.trim();
        if body.is_empty() {
            return Ok(PathRepresentation::empty(start));
        }
        let e_is_letter = alphabet.contains('e');
        let labels = body
            .split('.')
            .map(|tok| {
                let tok = tok.trim();
                if tok == "ε" || tok.is_empty() || (tok == "e" && !e_is_letter) {
                    Ok(Word::empty())
                } else {
                    alphabet.parse_word(tok)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        // A lone empty label is the 0th path.
        if labels.len() == 1 && labels[0].is_empty() {
            return Ok(PathRepresentation::empty(start));
        }
        Ok(PathRepresentation { start, labels })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodedValue {
    #[serde(with = "crate::bigstr")]
    pub value: BigUint,
    /// The realized prefix, when requested and not longer than the cap.
    pub word: Option<Word>,
    pub terminal: Letter,
}

/// Follows the path, checking each label, and returns the terminal vertex.
fn walk(g: &PrefixGraph, s: &PathRepresentation) -> Result<Letter> {
    g.alphabet().check_letter(s.start)?;
    if s.labels.len() > 1 && s.labels[0].is_empty() {
        return Err(Error::ImproperPath(s.labels.len()));
    }
    let mut v = s.start;
    for (i, label) in s.labels.iter().enumerate() {
        let e = g.edge(v, label).ok_or_else(|| {
            Error::InvalidPath(format!(
                "label {} (position {i}) is not an edge at vertex {}",
                if label.is_empty() { "ε".to_string() } else { g.alphabet().render(label) },
                g.alphabet().symbol(v)
            ))
        })?;
        v = e.target;
    }
    Ok(v)
}

/// Value of a path, `|τ^n(u_0)| + |τ^{n-1}(u_1)| + ⋯ + |u_n|`, via Horner's
/// scheme on abelian vectors. With `materialize_cap`, also builds the word
/// `ρ(s)` if its length does not exceed the cap.
pub fn decode_path(g: &PrefixGraph, s: &PathRepresentation, materialize_cap: Option<usize>) -> Result<DecodedValue> {
    let terminal = walk(g, s)?;
    let n = g.sub.size();
    let mut acc = vec![BigUint::zero(); n];
    for label in &s.labels {
        acc = g.matrix.apply_big(&acc);
        for (a, c) in acc.iter_mut().zip(abelianize(label, n).counts()) {
            *a += *c as u64;
        }
    }
    let value: BigUint = acc.iter().sum();
    let word = match materialize_cap {
        Some(cap) if value.to_usize().is_some_and(|v| v <= cap) => {
            let mut w = Word::empty();
            for label in &s.labels {
                w = g.sub.apply(&w).concat(label);
            }
            Some(w)
        }
        _ => None,
    };
    Ok(DecodedValue { value, word, terminal })
}

/// The unique proper path from `start` whose value is `l`.
///
/// Digits are chosen greedily, most significant first: at level `j` the label
/// at the current vertex with the largest `|τ^j(u)|` not exceeding what
/// remains.
pub fn encode_integer(g: &PrefixGraph, start: Letter, l: &BigUint) -> Result<PathRepresentation> {
    g.check_seed(start)?;
    if l.is_zero() {
        return Ok(PathRepresentation::empty(start));
    }
    // Largest n with |τ^n(start)| ≤ l; the path then has n + 1 labels.
    let mut rows = vec![vec![BigUint::from(1u32); g.sub.size()]];
    loop {
        let next = g.matrix.left_apply_big(rows.last().unwrap());
        if &next[start as usize] > l {
            break;
        }
        rows.push(next);
    }
    let top = rows.len() - 1;
    let mut rem = l.clone();
    let mut v = start;
    let mut labels = Vec::with_capacity(top + 1);
    for j in (0..=top).rev() {
        let row = &rows[j];
        let img = g.sub.image(v);
        let mut taken = BigUint::zero();
        let mut k = 0;
        while k + 1 < img.len() {
            let next = &taken + &row[img[k] as usize];
            if next > rem {
                break;
            }
            taken = next;
            k += 1;
        }
        rem -= &taken;
        labels.push(Word(img[..k].to_vec()));
        v = img[k];
    }
    debug_assert!(rem.is_zero());
    Ok(PathRepresentation { start, labels })
}

pub fn encode_u64(g: &PrefixGraph, start: Letter, l: u64) -> Result<PathRepresentation> {
    encode_integer(g, start, &BigUint::from(l))
}

/// The first `count` paths at `start` in increasing order: shorter paths
/// first, equal lengths compared by the first differing label length.
///
/// Generated directly from the graph, without the codecs.
pub fn enumerate_paths(g: &PrefixGraph, start: Letter, count: usize) -> Result<Vec<PathRepresentation>> {
    g.check_seed(start)?;
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let mut out = vec![PathRepresentation::empty(start)];
    let mut len = 1;
    while out.len() < count {
        let mut labels = Vec::with_capacity(len);
        extend_paths(g, start, len, &mut labels, &mut out, count);
        len += 1;
    }
    Ok(out)
}

fn extend_paths(
    g: &PrefixGraph,
    v: Letter,
    remaining: usize,
    labels: &mut Vec<Word>,
    out: &mut Vec<PathRepresentation>,
    count: usize,
) {
    if out.len() >= count {
        return;
    }
    if remaining == 0 {
        out.push(PathRepresentation {
            start: out[0].start,
            labels: labels.clone(),
        });
        return;
    }
    for e in g.out_edges(v) {
        if labels.is_empty() && e.label.is_empty() {
            continue;
        }
        labels.push(e.label.clone());
        extend_paths(g, e.target, remaining - 1, labels, out, count);
        labels.pop();
        if out.len() >= count {
            return;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncEntry {
    #[serde(with = "crate::bigstr")]
    pub value: BigUint,
    pub terminal: Letter,
    pub path_a: PathRepresentation,
    pub path_b: PathRepresentation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncReport {
    pub range: (u64, u64),
    /// Values in range whose representations from both seeds end at the same vertex.
    pub synchronizing: Vec<SyncEntry>,
    pub longest_run: u64,
    pub longest_run_start: Option<u64>,
}

/// Encodes every `l` in `[l_min, l_max]` from both seeds and records the
/// values whose paths share a terminal vertex, with the longest run of
/// consecutive such values.
pub fn synchronizing_scan(g: &PrefixGraph, a: Letter, b: Letter, l_min: u64, l_max: u64) -> Result<SyncReport> {
    g.check_seed(a)?;
    g.check_seed(b)?;
    if l_min > l_max {
        return Err(Error::InvalidArgument(format!("empty range [{l_min}, {l_max}]")));
    }
    let mut synchronizing = Vec::new();
    let (mut run, mut best, mut best_start, mut run_start) = (0u64, 0u64, None, 0u64);
    for l in l_min..=l_max {
        let pa = encode_u64(g, a, l)?;
        let pb = encode_u64(g, b, l)?;
        let ta = walk(g, &pa)?;
        let tb = walk(g, &pb)?;
        if ta == tb {
            if run == 0 {
                run_start = l;
            }
            run += 1;
            if run > best {
                best = run;
                best_start = Some(run_start);
            }
            synchronizing.push(SyncEntry {
                value: BigUint::from(l),
                terminal: ta,
                path_a: pa,
                path_b: pb,
            });
        } else {
            run = 0;
        }
    }
    Ok(SyncReport {
        range: (l_min, l_max),
        synchronizing,
        longest_run: best,
        longest_run_start: best_start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::FixedPointStream;

    fn graph(rules: &[(char, &str)]) -> PrefixGraph {
        PrefixGraph::new(&Substitution::from_rules(rules).unwrap())
    }

    const FIB: &[(char, &str)] = &[('a', "ab"), ('b', "a")];
    const FIG2: &[(char, &str)] = &[('a', "aab"), ('b', "bbaab")];

    fn path(g: &PrefixGraph, text: &str) -> PathRepresentation {
        PathRepresentation::parse(text, g.alphabet()).unwrap()
    }

    fn labels_of(g: &PrefixGraph, v: char, w: char) -> Vec<String> {
        let a = g.alphabet();
        let (v, w) = (a.index_of(v).unwrap(), a.index_of(w).unwrap());
        g.out_edges(v)
            .iter()
            .filter(|e| e.target == w)
            .map(|e| a.render(&e.label))
            .collect()
    }

    #[test]
    fn fibonacci_automaton() {
        let g = graph(FIB);
        assert_eq!(labels_of(&g, 'a', 'a'), vec![""]);
        assert_eq!(labels_of(&g, 'a', 'b'), vec!["a"]);
        assert_eq!(labels_of(&g, 'b', 'a'), vec![""]);
        assert!(labels_of(&g, 'b', 'b').is_empty());
    }

    #[test]
    fn figure_two_automaton() {
        let g = graph(FIG2);
        assert_eq!(labels_of(&g, 'a', 'a'), vec!["", "a"]);
        assert_eq!(labels_of(&g, 'a', 'b'), vec!["aa"]);
        assert_eq!(labels_of(&g, 'b', 'b'), vec!["", "b", "bbaa"]);
        assert_eq!(labels_of(&g, 'b', 'a'), vec!["bb", "bba"]);
    }

    #[test]
    fn degenerate_single_loop() {
        let g = graph(&[('a', "a")]);
        assert_eq!(g.edges().count(), 1);
        assert!(g.check_seed(0).is_err());
    }

    #[test]
    fn decode_examples() {
        let g = graph(FIB);
        let d = decode_path(&g, &path(&g, "a: a.e.a"), Some(100)).unwrap();
        assert_eq!(d.value, BigUint::from(4u32));
        assert_eq!(g.alphabet().render(d.word.as_ref().unwrap()), "abaa");
        assert_eq!(d.terminal, 1);
        let d = decode_path(&g, &PathRepresentation::empty(0), Some(10)).unwrap();
        assert_eq!((d.value, d.terminal), (BigUint::zero(), 0));
        assert_eq!(d.word, Some(Word::empty()));

        let g = graph(FIG2);
        let d = decode_path(&g, &path(&g, "a: a.aa"), Some(100)).unwrap();
        assert_eq!(d.value, BigUint::from(5u32));
        assert_eq!(g.alphabet().render(d.word.as_ref().unwrap()), "aabaa");
        let d = decode_path(&g, &path(&g, "b: b.e"), Some(100)).unwrap();
        assert_eq!(g.alphabet().render(d.word.as_ref().unwrap()), "bbaab");
    }

    #[test]
    fn decode_rejects_bad_paths() {
        let g = graph(FIB);
        assert!(matches!(decode_path(&g, &path(&g, "a: e.a"), None), Err(Error::ImproperPath(2))));
        assert!(matches!(decode_path(&g, &path(&g, "a: a.a"), None), Err(Error::InvalidPath(_))));
        assert!(matches!(decode_path(&g, &path(&g, "a: ab"), None), Err(Error::InvalidPath(_))));
    }

    #[test]
    fn encode_examples() {
        let g = graph(FIB);
        let render = |l: u64| encode_u64(&g, 0, l).unwrap().render(g.alphabet());
        assert_eq!(render(4), "a: a.e.a");
        assert_eq!(render(0), "a: e");
        assert_eq!(render(7), "a: a.e.a.e");
        assert!(encode_u64(&g, 1, 3).is_err());
    }

    #[test]
    fn listing_matches_order() {
        let g = graph(FIB);
        let got: Vec<String> = enumerate_paths(&g, 0, 9)
            .unwrap()
            .iter()
            .map(|p| p.render(g.alphabet())[3..].replace('.', ""))
            .collect();
        assert_eq!(got, vec!["e", "a", "ae", "aee", "aea", "aeee", "aeea", "aeae", "aeeee"]);
        assert_eq!(enumerate_paths(&g, 0, 1).unwrap(), vec![PathRepresentation::empty(0)]);
    }

    #[test]
    fn fibonacci_paths_avoid_double_a() {
        let g = graph(FIB);
        for p in enumerate_paths(&g, 0, 500).unwrap() {
            assert!(p.labels.windows(2).all(|w| !(w[0].len() == 1 && w[1].len() == 1)));
        }
    }

    #[test]
    fn round_trip_and_prefix_law_small() {
        let s = Substitution::from_rules(FIG2).unwrap();
        let g = PrefixGraph::new(&s);
        for seed in [0u8, 1] {
            let mut x = FixedPointStream::new(&s, seed, 1).unwrap();
            let fp = x.prefix(301);
            for l in 0..300u64 {
                let p = encode_u64(&g, seed, l).unwrap();
                let d = decode_path(&g, &p, Some(1000)).unwrap();
                assert_eq!(d.value, BigUint::from(l));
                assert_eq!(&d.word.unwrap()[..], &fp[..l as usize]);
                assert_eq!(d.terminal, fp[l as usize]);
            }
        }
    }

    #[test]
    fn sync_examples() {
        let g = graph(FIG2);
        let r = synchronizing_scan(&g, 0, 1, 5, 5).unwrap();
        assert_eq!(r.synchronizing.len(), 1);
        assert_eq!(r.synchronizing[0].terminal, 1);
        assert_eq!(r.synchronizing[0].path_a.render(g.alphabet()), "a: a.aa");
        assert_eq!(r.synchronizing[0].path_b.render(g.alphabet()), "b: b.e");
        let r = synchronizing_scan(&g, 0, 1, 0, 0).unwrap();
        assert!(r.synchronizing.is_empty());
        let g = graph(FIB);
        assert!(matches!(
            synchronizing_scan(&g, 0, 1, 0, 10),
            Err(Error::NotPeriodicSeed { letter: 'b', period: 1 })
        ));
    }

    #[test]
    fn path_text_with_letter_e() {
        let s = Substitution::from_rules(&[('e', "ef"), ('f', "e")]).unwrap();
        let g = PrefixGraph::new(&s);
        let p = encode_u64(&g, 0, 4).unwrap();
        let text = p.render(g.alphabet());
        assert_eq!(text, "e: e.ε.e");
        assert_eq!(PathRepresentation::parse(&text, g.alphabet()).unwrap(), p);
    }

    #[test]
    fn weight_table_levels() {
        let g = graph(FIB);
        let t = g.weight_table(3);
        let w: Vec<u32> = t
            .iter()
            .filter(|e| e.vertex == 0 && e.label.len() == 1)
            .map(|e| e.weight.to_u32().unwrap())
            .collect();
        assert_eq!(w, vec![1, 2, 3]);
    }
}
