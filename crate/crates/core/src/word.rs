//! Alphabets, finite words, abelianization, substitutions and lazily expanded
//! periodic points.
//!
//! Letters are stored as indices into an [`Alphabet`]; the alphabet order fixes
//! the indexing of abelian vectors and matrices everywhere else in the crate.

use std::fmt;
use std::ops::{Add, AddAssign, Deref, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a letter in its alphabet.
pub type Letter = u8;

/// Largest supported alphabet size (letters are stored in a byte).
pub const MAX_ALPHABET: usize = 256;

/// An ordered set of single-character symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    letters: Vec<char>,
}

impl Alphabet {
    pub fn new<I: IntoIterator<Item = char>>(letters: I) -> Result<Self> {
        let letters: Vec<char> = letters.into_iter().collect();
        if letters.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        if letters.len() > MAX_ALPHABET {
            return Err(Error::InvalidArgument(format!(
                "alphabets are limited to {MAX_ALPHABET} letters"
            )));
        }
        for (i, c) in letters.iter().enumerate() {
            if letters[..i].contains(c) {
                return Err(Error::DuplicateLetter(*c));
            }
        }
        Ok(Alphabet { letters })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn symbol(&self, letter: Letter) -> char {
        self.letters[letter as usize]
    }

    pub fn contains(&self, c: char) -> bool {
        self.letters.contains(&c)
    }

    pub fn index_of(&self, c: char) -> Result<Letter> {
        self.letters
            .iter()
            .position(|&l| l == c)
            .map(|i| i as Letter)
            .ok_or(Error::UnknownSymbol(c))
    }

    /// Parses a word, ignoring whitespace.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        text.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| self.index_of(c))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn render(&self, word: &[Letter]) -> String {
        word.iter().map(|&l| self.symbol(l)).collect()
    }

    pub fn check_letter(&self, letter: Letter) -> Result<()> {
        if (letter as usize) < self.len() {
            Ok(())
        } else {
            Err(Error::LetterOutOfRange(letter as usize, self.len()))
        }
    }

    pub fn check_word(&self, word: &[Letter]) -> Result<()> {
        word.iter().try_for_each(|&l| self.check_letter(l))
    }
}

/// A finite word stored as a sequence of letter indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn into_inner(self) -> Vec<Letter> {
        self.0
    }

    pub fn as_slice(&self) -> &[Letter] {
        &self.0
    }

    pub fn concat(&self, other: &[Letter]) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(other);
        Word(v)
    }
}

impl Deref for Word {
    type Target = [Letter];
    fn deref(&self) -> &[Letter] {
        &self.0
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

impl From<&[Letter]> for Word {
    fn from(v: &[Letter]) -> Self {
        Word(v.to_vec())
    }
}

/// Letter-count vector. Nonnegative for images of words, signed when used as
/// a difference.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AbelianVector(pub Vec<i64>);

impl AbelianVector {
    pub fn zero(n: usize) -> Self {
        AbelianVector(vec![0; n])
    }

    pub fn unit(n: usize, i: Letter) -> Self {
        let mut v = vec![0; n];
        v[i as usize] = 1;
        AbelianVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn counts(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Sum of coordinates; equals the word length for abelianized words.
    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&c| c as f64).collect()
    }
}

impl fmt::Display for AbelianVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl AddAssign<&AbelianVector> for AbelianVector {
    fn add_assign(&mut self, rhs: &AbelianVector) {
        assert_eq!(self.dim(), rhs.dim(), "abelian vectors of different dimension");
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl SubAssign<&AbelianVector> for AbelianVector {
    fn sub_assign(&mut self, rhs: &AbelianVector) {
        assert_eq!(self.dim(), rhs.dim(), "abelian vectors of different dimension");
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a -= b;
        }
    }
}

impl Add for &AbelianVector {
    type Output = AbelianVector;
    fn add(self, rhs: &AbelianVector) -> AbelianVector {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &AbelianVector {
    type Output = AbelianVector;
    fn sub(self, rhs: &AbelianVector) -> AbelianVector {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for AbelianVector {
    type Output = AbelianVector;
    fn neg(mut self) -> AbelianVector {
        self.0.iter_mut().for_each(|c| *c = -*c);
        self
    }
}

/// Letter counts of `word` over an alphabet of size `n`.
pub fn abelianize(word: &[Letter], n: usize) -> AbelianVector {
    let mut counts = vec![0i64; n];
    for &l in word {
        counts[l as usize] += 1;
    }
    AbelianVector(counts)
}

/// Whether two words have the same letter counts.
pub fn abelian_equivalent(u: &[Letter], v: &[Letter], n: usize) -> bool {
    u.len() == v.len() && abelianize(u, n) == abelianize(v, n)
}

/// A substitution: every letter maps to a nonempty word over the same alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    alphabet: Alphabet,
    images: Vec<Word>,
}

impl Substitution {
    pub fn new(alphabet: Alphabet, images: Vec<Word>) -> Result<Self> {
        if images.len() != alphabet.len() {
            return Err(Error::InvalidArgument(format!(
                "{} images given for an alphabet of {} letters",
                images.len(),
                alphabet.len()
            )));
        }
        for (i, img) in images.iter().enumerate() {
            if img.is_empty() {
                return Err(Error::EmptyImage(alphabet.symbol(i as Letter)));
            }
            alphabet.check_word(img)?;
        }
        Ok(Substitution { alphabet, images })
    }

    /// Builds a substitution from `(letter, image)` pairs; the alphabet is the
    /// left-hand letters in the order given.
    pub fn from_rules(rules: &[(char, &str)]) -> Result<Self> {
        let alphabet = Alphabet::new(rules.iter().map(|(c, _)| *c))?;
        let images = rules
            .iter()
            .map(|(_, img)| alphabet.parse_word(img))
            .collect::<Result<Vec<_>>>()?;
        Substitution::new(alphabet, images)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn image(&self, letter: Letter) -> &Word {
        &self.images[letter as usize]
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image_lengths(&self) -> Vec<usize> {
        self.images.iter().map(|w| w.len()).collect()
    }

    /// Common image length, if all images have the same length.
    pub fn uniform_length(&self) -> Option<usize> {
        let k = self.images[0].len();
        self.images.iter().all(|w| w.len() == k).then_some(k)
    }

    /// `τ(u)`, the concatenation of images in order.
    pub fn apply(&self, word: &[Letter]) -> Word {
        let total: usize = word.iter().map(|&l| self.images[l as usize].len()).sum();
        let mut out = Vec::with_capacity(total);
        for &l in word {
            out.extend_from_slice(&self.images[l as usize]);
        }
        Word(out)
    }

    /// `τ^power(u)`.
    pub fn apply_power(&self, word: &[Letter], power: usize) -> Result<Word> {
        if power == 0 {
            return Err(Error::ZeroPower);
        }
        self.alphabet.check_word(word)?;
        let mut w = self.apply(word);
        for _ in 1..power {
            w = self.apply(&w);
        }
        Ok(w)
    }

    /// The substitution `τ^m`.
    pub fn power(&self, m: usize) -> Result<Substitution> {
        if m == 0 {
            return Err(Error::ZeroPower);
        }
        let images = (0..self.size())
            .map(|l| self.apply_power(&[l as Letter], m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Substitution {
            alphabet: self.alphabet.clone(),
            images,
        })
    }

    /// Renders the substitution in the `letter -> word` text format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, img) in self.images.iter().enumerate() {
            out.push(self.alphabet.symbol(i as Letter));
            out.push_str(" -> ");
            out.push_str(&self.alphabet.render(img));
            out.push('\n');
        }
        out
    }
}

/// Every `(letter, m)` with `m ≤ max_period` the least exponent such that
/// `τ^m(letter)` begins with `letter` and has length at least 2.
pub fn list_periodic_seeds(sub: &Substitution, max_period: usize) -> Vec<(Letter, usize)> {
    (0..sub.size() as Letter)
        .filter_map(|a| least_period(sub, a, max_period).map(|m| (a, m)))
        .collect()
}

/// Least period of `letter` as a periodic seed, searching up to `max_period`.
pub fn least_period(sub: &Substitution, letter: Letter, max_period: usize) -> Option<usize> {
    let mut first = letter;
    // Length of τ^m(letter) saturates quickly; only "> 1" matters.
    let mut counts = abelianize(&[letter], sub.size()).0;
    for m in 1..=max_period {
        first = sub.image(first)[0];
        let mut next = vec![0i64; sub.size()];
        for (j, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &l in sub.image(j as Letter).iter() {
                next[l as usize] = next[l as usize].saturating_add(c);
            }
        }
        counts = next.into_iter().map(|c| c.min(1 << 40)).collect();
        let len: i64 = counts.iter().sum();
        if first == letter && len > 1 {
            return Some(m);
        }
    }
    None
}

/// Lazily expanded one-sided periodic point of `τ` seeded at a letter.
///
/// The working substitution is `σ = τ^m`; the buffer is always a prefix of
/// the unique fixed point of `σ` starting with the seed and only grows.
#[derive(Clone, Debug)]
pub struct FixedPointStream {
    base: Substitution,
    working: Substitution,
    seed: Letter,
    period: usize,
    buffer: Vec<Letter>,
}

impl FixedPointStream {
    pub fn new(sub: &Substitution, seed: Letter, period: usize) -> Result<Self> {
        sub.alphabet().check_letter(seed)?;
        if period == 0 {
            return Err(Error::ZeroPower);
        }
        let working = sub.power(period)?;
        let img = working.image(seed);
        if img[0] != seed || img.len() < 2 {
            return Err(Error::NotPeriodicSeed {
                letter: sub.alphabet().symbol(seed),
                period,
            });
        }
        let buffer = img.to_vec();
        Ok(FixedPointStream {
            base: sub.clone(),
            working,
            seed,
            period,
            buffer,
        })
    }

    /// Stream at `seed` using its least period (searched up to 64).
    pub fn from_seed(sub: &Substitution, seed: Letter) -> Result<Self> {
        sub.alphabet().check_letter(seed)?;
        match least_period(sub, seed, 64) {
            Some(m) => Self::new(sub, seed, m),
            None => Err(Error::NotPeriodicSeed {
                letter: sub.alphabet().symbol(seed),
                period: 1,
            }),
        }
    }

    pub fn base(&self) -> &Substitution {
        &self.base
    }

    /// The working substitution `τ^period`.
    pub fn working(&self) -> &Substitution {
        &self.working
    }

    pub fn seed(&self) -> Letter {
        self.seed
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.base.alphabet()
    }

    /// Number of symbols materialized so far.
    pub fn materialized(&self) -> usize {
        self.buffer.len()
    }

    /// The prefix of length `len`, growing the buffer as needed.
    pub fn expand(&mut self, len: usize) -> &[Letter] {
        while self.buffer.len() < len {
            let target = len.max(self.buffer.len().saturating_mul(2));
            let mut next = Vec::with_capacity(target);
            for &l in &self.buffer {
                next.extend_from_slice(self.working.image(l));
                if next.len() >= target {
                    break;
                }
            }
            next.truncate(target);
            self.buffer = next;
        }
        &self.buffer[..len]
    }

    pub fn prefix(&mut self, len: usize) -> Word {
        Word(self.expand(len).to_vec())
    }

    pub fn letter_at(&mut self, index: usize) -> Letter {
        self.expand(index + 1)[index]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib() -> Substitution {
        Substitution::from_rules(&[('a', "ab"), ('b', "a")]).unwrap()
    }

    #[test]
    fn apply_examples() {
        let s = fib();
        let ab = s.alphabet().parse_word("ab").unwrap();
        assert_eq!(s.alphabet().render(&s.apply_power(&ab, 1).unwrap()), "aba");
        assert_eq!(s.apply_power(&[], 3).unwrap(), Word::empty());
        assert_eq!(s.alphabet().render(&s.apply_power(&[0], 3).unwrap()), "abaab");
        assert_eq!(s.apply_power(&[0], 0), Err(Error::ZeroPower));
        assert_eq!(s.apply_power(&[5], 1), Err(Error::LetterOutOfRange(5, 2)));
    }

    #[test]
    fn foreign_symbol_is_rejected() {
        assert_eq!(fib().alphabet().parse_word("abc"), Err(Error::UnknownSymbol('c')));
    }

    #[test]
    fn abelianize_examples() {
        let s = fib();
        let a = s.alphabet();
        assert_eq!(abelianize(&a.parse_word("aabaa").unwrap(), 2).0, vec![4, 1]);
        assert_eq!(abelianize(&[], 2).0, vec![0, 0]);
        let img = s.apply(&a.parse_word("aab").unwrap());
        assert_eq!(abelianize(&img, 2).0, vec![3, 2]);
    }

    #[test]
    fn periodic_seed_examples() {
        assert_eq!(list_periodic_seeds(&fib(), 4), vec![(0, 1)]);
        let tm = Substitution::from_rules(&[('a', "ab"), ('b', "ba")]).unwrap();
        assert_eq!(list_periodic_seeds(&tm, 4), vec![(0, 1), (1, 1)]);
        let swap = Substitution::from_rules(&[('a', "b"), ('b', "ab")]).unwrap();
        assert_eq!(list_periodic_seeds(&swap, 4), vec![(0, 2), (1, 2)]);
        assert!(list_periodic_seeds(&swap, 1).is_empty());
        let id = Substitution::from_rules(&[('a', "a")]).unwrap();
        assert!(list_periodic_seeds(&id, 8).is_empty());
    }

    #[test]
    fn expand_examples() {
        let s = fib();
        let mut x = FixedPointStream::new(&s, 0, 1).unwrap();
        assert_eq!(s.alphabet().render(x.expand(13)), "abaababaabaab");
        assert!(x.expand(0).is_empty());
        assert_eq!(
            FixedPointStream::new(&s, 1, 1).unwrap_err(),
            Error::NotPeriodicSeed { letter: 'b', period: 1 }
        );
    }

    #[test]
    fn period_two_stream() {
        let swap = Substitution::from_rules(&[('a', "b"), ('b', "ab")]).unwrap();
        let mut x = FixedPointStream::from_seed(&swap, 0).unwrap();
        assert_eq!(x.period(), 2);
        let p = x.prefix(20);
        let sigma = swap.power(2).unwrap();
        assert_eq!(&sigma.apply(&p)[..20], &p[..]);
    }

    #[test]
    fn expansion_is_prefix_stable() {
        let s = Substitution::from_rules(&[('a', "ab"), ('b', "ac"), ('c', "a")]).unwrap();
        let mut x = FixedPointStream::new(&s, 0, 1).unwrap();
        let long = x.prefix(1000);
        let mut y = FixedPointStream::new(&s, 0, 1).unwrap();
        for len in [0, 1, 7, 100, 999] {
            assert_eq!(&y.prefix(len)[..], &long[..len]);
        }
        assert_eq!(&x.prefix(10)[..], &long[..10]);
    }

    #[test]
    fn alphabet_rejects_duplicates() {
        assert_eq!(Alphabet::new("aba".chars()), Err(Error::DuplicateLetter('a')));
        assert_eq!(Alphabet::new("".chars()), Err(Error::EmptyAlphabet));
    }

    #[test]
    fn render_round_trip() {
        let s = fib();
        assert_eq!(s.render(), "a -> ab\nb -> a\n");
    }
}
