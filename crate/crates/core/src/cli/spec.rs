//! The `.sub` text format: one rule `letter -> word` per line, `#` starts a
//! comment, whitespace is ignored. The alphabet is the list of left-hand
//! letters in order of appearance.

use crate::error::{Error, Result};
use crate::word::{Alphabet, Substitution, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstitutionSpec {
    pub source: String,
    pub substitution: Substitution,
    pub name: Option<String>,
}

impl SubstitutionSpec {
    /// Canonical text, one rule per line.
    pub fn render(&self) -> String {
        self.substitution.render()
    }
}

fn reserved(c: char) -> bool {
    matches!(c, '#' | '-' | '>' | '.' | ':' | ',')
}

pub fn parse_substitution_spec(text: &str) -> Result<SubstitutionSpec> {
    // (line number, letter, image symbols with their columns)
    let mut rules: Vec<(usize, char, Vec<(usize, char)>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let Some(arrow) = body.find("->") else {
            let column = body.chars().take_while(|c| c.is_whitespace()).count() + 1;
            return Err(Error::Syntax { line, column, message: "expected `letter -> word`".into() });
        };
        let lhs: Vec<(usize, char)> = body[..arrow]
            .chars()
            .enumerate()
            .filter(|(_, c)| !c.is_whitespace())
            .map(|(k, c)| (k + 1, c))
            .collect();
        let letter = match lhs.as_slice() {
            [] => {
                return Err(Error::Syntax { line, column: 1, message: "missing letter before `->`".into() });
            }
            [(col, c)] if reserved(*c) => {
                return Err(Error::Syntax { line, column: *col, message: format!("{c:?} cannot be a letter") });
            }
            [(_, c)] => *c,
            [_, (col, _), ..] => {
                return Err(Error::Syntax {
                    line,
                    column: *col,
                    message: "left-hand side must be a single letter".into(),
                });
            }
        };
        let offset = body[..arrow + 2].chars().count();
        let image: Vec<(usize, char)> = body[arrow + 2..]
            .chars()
            .enumerate()
            .filter(|(_, c)| !c.is_whitespace())
            .map(|(k, c)| (offset + k + 1, c))
            .collect();
        if let Some(&(column, c)) = image.iter().find(|(_, c)| reserved(*c)) {
            return Err(Error::Syntax { line, column, message: format!("unexpected {c:?} in image") });
        }
        if image.is_empty() {
            return Err(Error::EmptyImage(letter));
        }
        if rules.iter().any(|r| r.1 == letter) {
            return Err(Error::DuplicateRule { line, letter });
        }
        rules.push((line, letter, image));
    }
    if rules.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    let alphabet = Alphabet::new(rules.iter().map(|r| r.1))?;
    let mut images = Vec::with_capacity(rules.len());
    for (line, letter, image) in &rules {
        let mut w = Vec::with_capacity(image.len());
        for &(_, symbol) in image {
            let l = alphabet.index_of(symbol).map_err(|_| Error::UndeclaredSymbol {
                line: *line,
                letter: *letter,
                symbol,
            })?;
            w.push(l);
        }
        images.push(Word(w));
    }
    Ok(SubstitutionSpec {
        source: text.to_string(),
        substitution: Substitution::new(alphabet, images)?,
        name: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fibonacci_spec() {
        let s = parse_substitution_spec("a -> ab\nb -> a").unwrap();
        assert_eq!(s.substitution, Substitution::from_rules(&[('a', "ab"), ('b', "a")]).unwrap());
        let again = parse_substitution_spec(&s.render()).unwrap();
        assert_eq!(again.substitution, s.substitution);
    }

    #[test]
    fn comments_and_spacing() {
        let s = parse_substitution_spec("# fib\n\n  a->a b  # first\nb   ->   a\n").unwrap();
        assert_eq!(s.substitution.render(), "a -> ab\nb -> a\n");
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_substitution_spec("a -> ab\na -> ba"),
            Err(Error::DuplicateRule { line: 2, letter: 'a' })
        );
        assert_eq!(
            parse_substitution_spec("a -> ax"),
            Err(Error::UndeclaredSymbol { line: 1, letter: 'a', symbol: 'x' })
        );
        assert_eq!(parse_substitution_spec("a -> "), Err(Error::EmptyImage('a')));
        assert_eq!(
            parse_substitution_spec("a -> a\n  b = a"),
            Err(Error::Syntax { line: 2, column: 3, message: "expected `letter -> word`".into() })
        );
        assert!(matches!(parse_substitution_spec("ab -> a"), Err(Error::Syntax { line: 1, column: 2, .. })));
        assert!(matches!(parse_substitution_spec("a -> a-b"), Err(Error::Syntax { line: 1, column: 7, .. })));
        assert_eq!(parse_substitution_spec("# nothing\n"), Err(Error::EmptyAlphabet));
    }
}
