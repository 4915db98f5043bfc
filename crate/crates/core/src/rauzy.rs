//! Permutation pairs, Rauzy induction on pairs and Rauzy classes.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::automorphisms::{ElementaryTwist, Placement};
use crate::error::{Error, Result};
use crate::words::Alphabet;

/// Rauzy induction type: 0 when `λ_{α₀} > λ_{α₁}`, 1 otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InductionType {
    Zero,
    One,
}

impl InductionType {
    pub fn as_u8(self) -> u8 {
        match self {
            InductionType::Zero => 0,
            InductionType::One => 1,
        }
    }
}

impl fmt::Display for InductionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

impl Serialize for InductionType {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.as_u8())
    }
}

/// `(π₀, π₁)`, both bijections from the alphabet onto `0..N`.
///
/// Positions are stored by alphabet index, so equal pairs compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PermutationPair {
    alphabet: Alphabet,
    pi0: Vec<usize>,
    pi1: Vec<usize>,
}

fn is_bijection(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&i| i < p.len() && !std::mem::replace(&mut seen[i], true))
}

impl PermutationPair {
    pub fn new(alphabet: Alphabet, pi0: Vec<usize>, pi1: Vec<usize>) -> Result<Self> {
        let n = alphabet.len();
        if pi0.len() != n || pi1.len() != n || !is_bijection(&pi0) || !is_bijection(&pi1) {
            return Err(Error::Input("permutation pair must consist of two bijections onto 0..N".into()));
        }
        Ok(PermutationPair { alphabet, pi0, pi1 })
    }

    /// Rows list the letters in interval order, e.g. `("abcd", "dacb")`.
    pub fn from_rows(alphabet: &Alphabet, top: &str, bottom: &str) -> Result<Self> {
        let positions = |row: &str| -> Result<Vec<usize>> {
            let chars: Vec<char> = row.chars().collect();
            if chars.len() != alphabet.len() {
                return Err(Error::Input(format!("row {row:?} must list all {} letters", alphabet.len())));
            }
            let mut pos = vec![usize::MAX; alphabet.len()];
            for (i, c) in chars.into_iter().enumerate() {
                let x = alphabet.index_of(c).ok_or(Error::UnknownSymbol(c))?;
                pos[x] = i;
            }
            Ok(pos)
        };
        PermutationPair::new(alphabet.clone(), positions(top)?, positions(bottom)?)
    }

    /// Parses `"top/bottom"` over the sorted letters of the top row.
    pub fn parse(s: &str) -> Result<Self> {
        let (top, bottom) = s.split_once('/').ok_or_else(|| Error::Input(format!("expected top/bottom, got {s:?}")))?;
        let (top, bottom) = (top.trim(), bottom.trim());
        let mut letters: Vec<char> = top.chars().collect();
        letters.sort_unstable();
        PermutationPair::from_rows(&Alphabet::new(letters)?, top, bottom)
    }

    /// Like [`PermutationPair::parse`] but over a given alphabet.
    pub fn parse_with(alphabet: &Alphabet, s: &str) -> Result<Self> {
        let (top, bottom) = s.split_once('/').ok_or_else(|| Error::Input(format!("expected top/bottom, got {s:?}")))?;
        PermutationPair::from_rows(alphabet, top.trim(), bottom.trim())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.pi0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi0.is_empty()
    }

    fn idx(&self, c: char) -> usize {
        self.alphabet.index_of(c).expect("letter of the pair's alphabet")
    }

    pub fn pi0(&self, c: char) -> usize {
        self.pi0[self.idx(c)]
    }

    pub fn pi1(&self, c: char) -> usize {
        self.pi1[self.idx(c)]
    }

    /// `π₀⁻¹(i)`.
    pub fn letter0(&self, i: usize) -> char {
        self.alphabet.symbol(self.pi0.iter().position(|&p| p == i).expect("position in range"))
    }

    /// `π₁⁻¹(i)`.
    pub fn letter1(&self, i: usize) -> char {
        self.alphabet.symbol(self.pi1.iter().position(|&p| p == i).expect("position in range"))
    }

    pub fn alpha0(&self) -> char {
        self.letter0(self.len() - 1)
    }

    pub fn alpha1(&self) -> char {
        self.letter1(self.len() - 1)
    }

    pub fn top_row(&self) -> String {
        (0..self.len()).map(|i| self.letter0(i)).collect()
    }

    pub fn bottom_row(&self) -> String {
        (0..self.len()).map(|i| self.letter1(i)).collect()
    }

    /// Letter-position form, e.g. `a0 b1 c2 d3`.
    pub fn describe_row(&self, bottom: bool) -> String {
        let row = if bottom { self.bottom_row() } else { self.top_row() };
        row.chars().enumerate().map(|(i, c)| format!("{c}{i}")).collect::<Vec<_>>().join(" ")
    }

    /// No `k < N − 1` with `π₁∘π₀⁻¹({0..k}) = {0..k}`.
    pub fn is_irreducible(&self) -> bool {
        let n = self.len();
        let mut max = 0;
        for k in 0..n - 1 {
            max = max.max(self.pi1(self.letter0(k)));
            if max == k {
                return false;
            }
        }
        true
    }

    /// `π' = N − 1 − π` on both rows.
    pub fn mirror(&self) -> PermutationPair {
        let n = self.len();
        PermutationPair {
            alphabet: self.alphabet.clone(),
            pi0: self.pi0.iter().map(|&p| n - 1 - p).collect(),
            pi1: self.pi1.iter().map(|&p| n - 1 - p).collect(),
        }
    }
}

impl fmt::Display for PermutationPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.top_row(), self.bottom_row())
    }
}

/// The pair of the completed Rauzy induction of the given type.
pub fn induce_pair(p: &PermutationPair, ty: InductionType) -> Result<PermutationPair> {
    if !p.is_irreducible() {
        return Err(Error::Reducible);
    }
    let (a0, a1) = (p.idx(p.alpha0()), p.idx(p.alpha1()));
    let mut q = p.clone();
    // type 0 moves α₁ right after α₀ on the bottom row, type 1 moves α₀ after α₁ on top
    let (row, winner, loser) = match ty {
        InductionType::Zero => (&mut q.pi1, a0, a1),
        InductionType::One => (&mut q.pi0, a1, a0),
    };
    let anchor = row[winner];
    let old = row[loser];
    for x in row.iter_mut() {
        if *x > anchor && *x < old {
            *x += 1;
        }
    }
    row[loser] = anchor + 1;
    Ok(q)
}

/// `α₁ ↦ α₁α₀` for type 0, `α₀ ↦ α₁α₀` for type 1.
pub fn edge_twist(p: &PermutationPair, ty: InductionType) -> Result<ElementaryTwist> {
    if !p.is_irreducible() {
        return Err(Error::Reducible);
    }
    let (a0, a1) = (p.alpha0(), p.alpha1());
    match ty {
        InductionType::Zero => ElementaryTwist::new(a1, a0, Placement::Append),
        InductionType::One => ElementaryTwist::new(a0, a1, Placement::Prepend),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RauzyEdge {
    pub from: usize,
    pub ty: InductionType,
    pub to: usize,
    pub twist: ElementaryTwist,
}

/// A connected component of the Rauzy graph, nodes in BFS order.
#[derive(Clone, Debug)]
pub struct RauzyClass {
    pub nodes: Vec<PermutationPair>,
    pub edges: Vec<RauzyEdge>,
}

impl RauzyClass {
    /// `(in, out)` degree of every node.
    pub fn degrees(&self) -> Vec<(usize, usize)> {
        let mut deg = vec![(0, 0); self.nodes.len()];
        for e in &self.edges {
            deg[e.from].1 += 1;
            deg[e.to].0 += 1;
        }
        deg
    }
}

pub fn enumerate_class(seed: &PermutationPair) -> Result<RauzyClass> {
    if !seed.is_irreducible() {
        return Err(Error::Reducible);
    }
    let mut nodes = vec![seed.clone()];
    let mut index = HashMap::from([(seed.clone(), 0)]);
    let mut queue = VecDeque::from([0]);
    let mut edges = Vec::new();
    while let Some(i) = queue.pop_front() {
        for ty in [InductionType::Zero, InductionType::One] {
            let next = induce_pair(&nodes[i], ty)?;
            let twist = edge_twist(&nodes[i], ty)?;
            let to = match index.get(&next) {
                Some(&j) => j,
                None => {
                    nodes.push(next.clone());
                    index.insert(next, nodes.len() - 1);
                    queue.push_back(nodes.len() - 1);
                    nodes.len() - 1
                }
            };
            edges.push(RauzyEdge { from: i, ty, to, twist });
        }
    }
    let class = RauzyClass { nodes, edges };
    if let Some(bad) = class.degrees().iter().position(|&d| d != (2, 2)) {
        return Err(Error::Input(format!("node {} of the class does not have degree 2", class.nodes[bad])));
    }
    Ok(class)
}
