//! Lazily extended infinite reduced words and points of the double boundary.
//!
//! A coordinate is described by a generator and exposes a prefix that only
//! ever grows. `U` coordinates of subshift points use inverse letters only,
//! `V` coordinates positive letters only.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use serde::Serialize;

use crate::automorphisms::Endomorphism;
use crate::error::{Error, Result};
use crate::words::{Letter, ReducedWord};

pub const DEFAULT_DEPTH: usize = 32;
pub const DEFAULT_DEPTH_CAP: usize = 4096;

/// Which coordinate of a point a generator produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// The `U` coordinate, built from prefixes.
    Prefix,
    /// The `V` coordinate, built from suffixes.
    Suffix,
}

#[derive(Debug)]
pub enum Generator {
    /// `a s θ(s) θ²(s) …` on the suffix side, `p⁻¹ θ(p⁻¹) θ²(p⁻¹) …` on the prefix side.
    Development { theta: Arc<Endomorphism>, p: ReducedWord, a: char, s: ReducedWord, side: Side },
    /// `lim θⁿ(seed)`; requires `θ(seed)` to begin with `seed`.
    LetterLimit { theta: Arc<Endomorphism>, seed: Letter },
    /// `left · θ(source)`, reduced.
    Transformed { source: LazyInfiniteWord, left: ReducedWord, action: Option<Arc<Endomorphism>> },
}

/// An infinite reduced word known through a growing prefix buffer.
#[derive(Debug, Clone)]
pub struct LazyInfiniteWord {
    generator: Rc<Generator>,
    buffer: RefCell<ReducedWord>,
    positive: bool,
    cap: usize,
}

impl LazyInfiniteWord {
    fn from_generator(generator: Generator, positive: bool, cap: usize) -> Self {
        LazyInfiniteWord { generator: Rc::new(generator), buffer: RefCell::new(ReducedWord::empty()), positive, cap }
    }

    pub fn development(
        theta: Arc<Endomorphism>,
        p: ReducedWord,
        a: char,
        s: ReducedWord,
        side: Side,
        cap: usize,
    ) -> Result<Self> {
        let block = match side {
            Side::Prefix => &p,
            Side::Suffix => &s,
        };
        if block.is_empty() {
            return Err(Error::MalformedGenerator(format!("empty {side:?} word in development of '{a}'")));
        }
        Ok(Self::from_generator(Generator::Development { theta, p, a, s, side }, side == Side::Suffix, cap))
    }

    pub fn letter_limit(theta: Arc<Endomorphism>, seed: Letter, cap: usize) -> Result<Self> {
        let one = ReducedWord::from_letters([seed]);
        let img = theta.apply(&one)?;
        if img.len() < 2 || !img.starts_with(&one) {
            return Err(Error::MalformedGenerator(format!("{seed} is not extended by θ")));
        }
        Ok(Self::from_generator(Generator::LetterLimit { theta, seed }, seed.is_positive(), cap))
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn is_positive_side(&self) -> bool {
        self.positive
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// The first `n` letters.
    pub fn prefix(&self, n: usize) -> Result<ReducedWord> {
        {
            let buf = self.buffer.borrow();
            if buf.len() >= n {
                return Ok(buf.prefix(n));
            }
        }
        if n > self.cap {
            return Err(Error::DepthCap(self.cap));
        }
        let grown = self.extend_to(n)?;
        if let Some(bad) = grown.letters().iter().find(|l| l.is_positive() != self.positive) {
            let msg = format!("letter {bad} in {grown}");
            return Err(match &*self.generator {
                Generator::Transformed { action: None, .. } => Error::InvalidTranslation(msg),
                _ => Error::ExcludedPoint(msg),
            });
        }
        let out = grown.prefix(n);
        *self.buffer.borrow_mut() = grown;
        Ok(out)
    }

    pub fn first(&self) -> Result<Letter> {
        Ok(self.prefix(1)?.first().expect("infinite word"))
    }

    fn extend_to(&self, n: usize) -> Result<ReducedWord> {
        match &*self.generator {
            Generator::Development { theta, p, a, s, side } => {
                let mut out = ReducedWord::empty();
                let mut block = match side {
                    Side::Suffix => {
                        out.push_unchecked(Letter::pos(*a));
                        s.clone()
                    }
                    Side::Prefix => p.clone(),
                };
                loop {
                    match side {
                        Side::Suffix => out.extend_unchecked(&block),
                        Side::Prefix => out.extend_unchecked(&block.inverse()),
                    }
                    if out.len() >= n {
                        return Ok(out);
                    }
                    block = theta.apply_unchecked(block.letters());
                }
            }
            Generator::LetterLimit { theta, seed } => {
                let mut w = ReducedWord::from_letters([*seed]);
                while w.len() < n {
                    let next = theta.apply_unchecked(w.letters());
                    if next.len() <= w.len() || !next.starts_with(&w) {
                        return Err(Error::MalformedGenerator(format!("{seed} stalls at {w}")));
                    }
                    w = next;
                }
                Ok(w)
            }
            Generator::Transformed { source, left, action } => {
                let image = |m: usize| -> Result<ReducedWord> {
                    let src = source.prefix(m)?;
                    let mapped = match action {
                        Some(t) => t.apply_unchecked(src.letters()),
                        None => src,
                    };
                    Ok(left.concat(&mapped))
                };
                let mut m = n + left.len() + 1;
                if m > source.cap {
                    return Err(Error::DepthCap(source.cap));
                }
                // Translations and positive actions on sign-pure words only
                // cancel at the junction with `left`.
                let margin = match action {
                    Some(t) if !t.is_positive() => t.max_image_length(),
                    _ => return image(m),
                };
                // Compare against a slightly longer source prefix; grow by the
                // observed shrink ratio so nested transforms stay linear.
                loop {
                    let m2 = (m + margin + 1).min(source.cap);
                    let short = image(m)?;
                    let long = image(m2)?;
                    let stable = short.common_prefix_len(&long).min(long.len().saturating_sub(margin));
                    if stable >= n {
                        return Ok(long.prefix(stable));
                    }
                    if m2 >= source.cap {
                        return Err(Error::DepthCap(source.cap));
                    }
                    let want = (n + margin + 1) as f64 / stable.max(1) as f64;
                    m = ((m as f64 * want).ceil() as usize).max(m + 1).min(source.cap);
                }
            }
        }
    }

    /// `w · self`, reduced.
    pub fn with_left(&self, w: &ReducedWord) -> Self {
        self.transformed(w.clone(), None)
    }

    fn transformed(&self, left: ReducedWord, action: Option<Arc<Endomorphism>>) -> Self {
        let positive = self.positive;
        LazyInfiniteWord::from_generator(
            Generator::Transformed { source: self.clone(), left, action },
            positive,
            self.cap,
        )
    }
}

/// A point `(U, V)` of the double boundary.
#[derive(Debug, Clone)]
pub struct BiPoint {
    pub u: LazyInfiniteWord,
    pub v: LazyInfiniteWord,
}

/// Exposed prefixes of a point at a fixed depth; used as its identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointKey {
    pub u: ReducedWord,
    pub v: ReducedWord,
}

impl fmt::Display for PointKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}…, {}…)", self.u, self.v)
    }
}

impl BiPoint {
    pub fn new(u: LazyInfiniteWord, v: LazyInfiniteWord) -> Result<Self> {
        if u.is_positive_side() || !v.is_positive_side() {
            return Err(Error::Input("U must use inverse letters and V positive letters".into()));
        }
        Ok(BiPoint { u, v })
    }

    pub fn first_letters(&self) -> Result<(Letter, Letter)> {
        Ok((self.u.first()?, self.v.first()?))
    }

    pub fn key(&self, depth: usize) -> Result<PointKey> {
        Ok(PointKey { u: self.u.prefix(depth)?, v: self.v.prefix(depth)? })
    }

    /// `(wU, wV)`, checked for sign purity on the first letters.
    pub fn translate(&self, w: &ReducedWord) -> Result<BiPoint> {
        let pt = BiPoint { u: self.u.transformed(w.clone(), None), v: self.v.transformed(w.clone(), None) };
        pt.u.prefix(1)?;
        pt.v.prefix(1)?;
        Ok(pt)
    }

    /// The shift `S(U, V) = (V₀⁻¹U, V₀⁻¹V)`.
    pub fn shift(&self) -> Result<BiPoint> {
        let v0 = self.v.first()?;
        self.translate(&ReducedWord::from_letters([v0.inverse()]))
    }

    /// `S⁻¹(U, V) = (U₀⁻¹U, U₀⁻¹V)`.
    pub fn unshift(&self) -> Result<BiPoint> {
        let u0 = self.u.first()?;
        self.translate(&ReducedWord::from_letters([u0.inverse()]))
    }

    /// `S^n` for any integer `n`.
    pub fn shift_by(&self, n: i64) -> Result<BiPoint> {
        let mut pt = self.clone();
        for _ in 0..n.unsigned_abs() {
            pt = if n > 0 { pt.shift()? } else { pt.unshift()? };
        }
        Ok(pt)
    }

    /// Coordinatewise image under `∂²e`.
    pub fn transform(&self, e: &Arc<Endomorphism>) -> Result<BiPoint> {
        self.act(e, &ReducedWord::empty())
    }

    /// Image under `∂²(i_w ∘ θ)`, i.e. `w⁻¹ θ(·)` on each coordinate.
    pub fn act(&self, theta: &Arc<Endomorphism>, w: &ReducedWord) -> Result<BiPoint> {
        let left = w.inverse();
        let pt = BiPoint {
            u: self.u.transformed(left.clone(), Some(theta.clone())),
            v: self.v.transformed(left, Some(theta.clone())),
        };
        pt.u.prefix(1)?;
        pt.v.prefix(1)?;
        Ok(pt)
    }
}

/// Result of a depth-bounded fixed-point test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedCheck {
    pub fixed: bool,
    pub depth: usize,
    /// False only when generator identity proves the answer.
    pub approximate: bool,
}

/// Whether `∂²(i_w ∘ θ)` fixes `pt` on the first `depth` letters of both coordinates.
pub fn is_fixed_by_action(
    pt: &BiPoint,
    theta: &Arc<Endomorphism>,
    w: &ReducedWord,
    depth: usize,
) -> Result<FixedCheck> {
    let depth = depth.max(1);
    let image = pt.act(theta, w)?;
    let fixed = image.u.prefix(depth)? == pt.u.prefix(depth)? && image.v.prefix(depth)? == pt.v.prefix(depth)?;
    let exact = w.is_empty() && fixed && [&pt.u, &pt.v].iter().all(|c| letter_limit_of(c, theta));
    Ok(FixedCheck { fixed, depth, approximate: !exact })
}

/// Whether `∂²e` fixes `pt` to the given depth.
pub fn is_fixed_by(pt: &BiPoint, e: &Endomorphism, depth: usize) -> Result<FixedCheck> {
    is_fixed_by_action(pt, &Arc::new(e.clone()), &ReducedWord::empty(), depth)
}

fn letter_limit_of(c: &LazyInfiniteWord, theta: &Endomorphism) -> bool {
    matches!(&*c.generator, Generator::LetterLimit { theta: t, .. } if **t == *theta)
}

/// Letters `x` such that `θ^h(x)` ends (prefix side) or begins (suffix side)
/// with `x` for some `h` in `1..=max_h`, together with the least such `h`.
pub fn periodic_letters(theta: &Endomorphism, side: Side, max_h: usize) -> Result<Vec<(char, usize)>> {
    let mut out: Vec<(char, usize)> = Vec::new();
    let mut power = theta.clone();
    for h in 1..=max_h {
        for &x in theta.alphabet().symbols() {
            let img = power.image(x)?;
            let hit = match side {
                Side::Prefix => img.last() == Some(Letter::pos(x)),
                Side::Suffix => img.first() == Some(Letter::pos(x)),
            };
            if hit && img.len() >= 2 && !out.iter().any(|o| o.0 == x) {
                out.push((x, h));
            }
        }
        if h < max_h {
            power = Endomorphism::compose(theta, &power)?;
        }
    }
    out.sort();
    Ok(out)
}

/// Candidates for an undetermined coordinate of an ε-tailed development.
///
/// `partner` is the letter `a` of the development `(p, a, s)*`. On the
/// prefix side the candidate `x` sits just left of `a` (`U = lim θⁿ(x⁻¹)`);
/// on the suffix side it follows `a` (`V = a · lim θⁿ(x)`). A candidate
/// survives when the resulting two-letter word is a factor.
pub fn resolve_undetermined(
    theta: &Endomorphism,
    side: Side,
    partner: char,
    two_factors: &BTreeSet<(char, char)>,
) -> Result<Vec<(char, usize)>> {
    let n = theta.alphabet().len();
    let cands = periodic_letters(theta, side, n)?;
    Ok(cands
        .into_iter()
        .filter(|&(x, _)| match side {
            Side::Prefix => two_factors.contains(&(x, partner)),
            Side::Suffix => two_factors.contains(&(partner, x)),
        })
        .collect())
}
