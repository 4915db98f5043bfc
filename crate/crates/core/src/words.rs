//! Signed letters and freely reduced words of the free group.

use std::fmt;

use crate::error::{Error, Result};

/// An ordered alphabet of single-character symbols, `N >= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet(Vec<char>);

impl Alphabet {
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Self> {
        let symbols: Vec<char> = symbols.into_iter().collect();
        for (i, c) in symbols.iter().enumerate() {
            if symbols[..i].contains(c) {
                return Err(Error::Input(format!("duplicate symbol '{c}' in alphabet")));
            }
            if c.is_whitespace() || c.is_control() {
                return Err(Error::Input(format!("symbol {c:?} is not printable")));
            }
        }
        if symbols.len() < 2 {
            return Err(Error::Input(format!("alphabet needs at least 2 symbols, got {}", symbols.len())));
        }
        Ok(Alphabet(symbols))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[char] {
        &self.0
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        self.0.iter().position(|&x| x == c)
    }

    pub fn contains(&self, c: char) -> bool {
        self.0.contains(&c)
    }

    pub fn symbol(&self, i: usize) -> char {
        self.0[i]
    }
}

/// A generator or its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Letter {
    symbol: char,
    inverse: bool,
}

impl Letter {
    pub const fn pos(symbol: char) -> Self {
        Letter { symbol, inverse: false }
    }

    pub const fn neg(symbol: char) -> Self {
        Letter { symbol, inverse: true }
    }

    pub fn symbol(self) -> char {
        self.symbol
    }

    pub fn is_inverse(self) -> bool {
        self.inverse
    }

    pub fn is_positive(self) -> bool {
        !self.inverse
    }

    pub fn inverse(self) -> Self {
        Letter { symbol: self.symbol, inverse: !self.inverse }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "{}^-1", self.symbol)
        } else {
            write!(f, "{}", self.symbol)
        }
    }
}

/// A freely reduced word; the empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct ReducedWord(Vec<Letter>);

/// Cancels adjacent inverse pairs with a single stack pass.
pub fn free_reduce(letters: impl IntoIterator<Item = Letter>) -> ReducedWord {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    ReducedWord(out)
}

/// Like [`free_reduce`] but rejects symbols outside `alphabet`.
pub fn free_reduce_in(alphabet: &Alphabet, letters: impl IntoIterator<Item = Letter>) -> Result<ReducedWord> {
    let mut v = Vec::new();
    for l in letters {
        if !alphabet.contains(l.symbol()) {
            return Err(Error::UnknownSymbol(l.symbol()));
        }
        v.push(l);
    }
    Ok(free_reduce(v))
}

pub fn invert_word(w: &ReducedWord) -> ReducedWord {
    ReducedWord(w.0.iter().rev().map(|l| l.inverse()).collect())
}

impl ReducedWord {
    pub fn empty() -> Self {
        ReducedWord(Vec::new())
    }

    /// A word of positive letters, one per character.
    pub fn positive(s: &str) -> Self {
        // positive letters never cancel
        ReducedWord(s.chars().map(Letter::pos).collect())
    }

    /// Parses `a`, `a^-1` tokens, e.g. `"ab^-1c"`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        let mut chars = s.chars().filter(|c| !c.is_whitespace()).peekable();
        while let Some(c) = chars.next() {
            if c == '^' {
                return Err(Error::Input(format!("dangling exponent in {s:?}")));
            }
            if chars.peek() == Some(&'^') {
                chars.next();
                if chars.next() != Some('-') || chars.next() != Some('1') {
                    return Err(Error::Input(format!("bad exponent in {s:?}")));
                }
                letters.push(Letter::neg(c));
            } else {
                letters.push(Letter::pos(c));
            }
        }
        Ok(free_reduce(letters))
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        free_reduce(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn inverse(&self) -> ReducedWord {
        invert_word(self)
    }

    /// Reduced product `self * other`.
    pub fn concat(&self, other: &ReducedWord) -> ReducedWord {
        let mut out = self.0.clone();
        let mut skip = 0;
        while skip < other.0.len() && out.last() == Some(&other.0[skip].inverse()) {
            out.pop();
            skip += 1;
        }
        out.extend_from_slice(&other.0[skip..]);
        ReducedWord(out)
    }

    /// All letters in `A_N`.
    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|l| l.is_positive())
    }

    /// All letters in `A_N^{-1}`.
    pub fn is_negative(&self) -> bool {
        self.0.iter().all(|l| l.is_inverse())
    }

    pub fn prefix(&self, n: usize) -> ReducedWord {
        ReducedWord(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn starts_with(&self, other: &ReducedWord) -> bool {
        self.0.starts_with(&other.0)
    }

    pub fn ends_with(&self, other: &ReducedWord) -> bool {
        self.0.ends_with(&other.0)
    }

    /// Drops the first letter; a suffix of a reduced word is reduced.
    pub fn tail(&self) -> ReducedWord {
        ReducedWord(self.0.get(1..).unwrap_or(&[]).to_vec())
    }

    /// Drops the last letter.
    pub fn init(&self) -> ReducedWord {
        let n = self.0.len().saturating_sub(1);
        ReducedWord(self.0[..n].to_vec())
    }

    /// Number of occurrences of the positive letter `c`.
    pub fn count_positive(&self, c: char) -> usize {
        self.0.iter().filter(|l| l.is_positive() && l.symbol() == c).count()
    }

    /// Appends a letter that is known not to cancel.
    pub(crate) fn push_unchecked(&mut self, l: Letter) {
        debug_assert!(self.0.last() != Some(&l.inverse()));
        self.0.push(l);
    }

    pub(crate) fn extend_unchecked(&mut self, w: &ReducedWord) {
        debug_assert!(w.first().is_none_or(|f| self.0.last() != Some(&f.inverse())));
        self.0.extend_from_slice(&w.0);
    }

    /// Length of the longest common prefix.
    pub fn common_prefix_len(&self, other: &ReducedWord) -> usize {
        self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count()
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromIterator<Letter> for ReducedWord {
    fn from_iter<T: IntoIterator<Item = Letter>>(iter: T) -> Self {
        free_reduce(iter)
    }
}
