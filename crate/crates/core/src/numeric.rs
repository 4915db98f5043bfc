//! Numeric CIETs in double precision: the exchange map, Rauzy induction,
//! orbit codings, Perron lengths and a language cross-check.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::automorphisms::{ElementaryTwist, Endomorphism, IncidenceMatrix};
use crate::error::{Error, Result};
use crate::rauzy::{edge_twist, induce_pair, InductionType, PermutationPair};
use crate::words::ReducedWord;

/// Relative tolerance for length comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

/// `(π, λ)` with offsets `Λ₀`, `Λ₁`; vectors are indexed by alphabet position.
#[derive(Clone, Debug, PartialEq)]
pub struct Ciet {
    pair: PermutationPair,
    lengths: Vec<f64>,
    offset0: Vec<f64>,
    offset1: Vec<f64>,
}

impl Ciet {
    pub fn build(pair: PermutationPair, lengths: Vec<f64>) -> Result<Self> {
        if lengths.len() != pair.len() {
            return Err(Error::Input(format!("{} lengths for {} letters", lengths.len(), pair.len())));
        }
        if let Some(&bad) = lengths.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::NonPositiveLength(bad));
        }
        let offsets = |pos: &dyn Fn(char) -> usize| -> Vec<f64> {
            let symbols = pair.alphabet().symbols();
            symbols
                .iter()
                .map(|&a| symbols.iter().zip(&lengths).filter(|(&b, _)| pos(b) < pos(a)).map(|(_, l)| l).sum())
                .collect()
        };
        let offset0 = offsets(&|c| pair.pi0(c));
        let offset1 = offsets(&|c| pair.pi1(c));
        Ok(Ciet { pair, lengths, offset0, offset1 })
    }

    pub fn pair(&self) -> &PermutationPair {
        &self.pair
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    fn idx(&self, c: char) -> usize {
        self.pair.alphabet().index_of(c).expect("letter of the pair")
    }

    pub fn length(&self, c: char) -> f64 {
        self.lengths[self.idx(c)]
    }

    /// `Λ₀(c)`.
    pub fn offset0(&self, c: char) -> f64 {
        self.offset0[self.idx(c)]
    }

    /// `Λ₁(c)`.
    pub fn offset1(&self, c: char) -> f64 {
        self.offset1[self.idx(c)]
    }

    /// `|λ|`.
    pub fn total(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// Lengths scaled to sum 1.
    pub fn normalized(&self) -> Vec<f64> {
        let t = self.total();
        self.lengths.iter().map(|l| l / t).collect()
    }

    fn check_range(&self, x: f64) -> Result<()> {
        if !(0.0..self.total()).contains(&x) {
            return Err(Error::OutOfRange { x, total: self.total() });
        }
        Ok(())
    }

    /// The letter whose half-open domain `[Λ₀(a), Λ₀(a) + λ_a)` holds `x`.
    pub fn letter_at(&self, x: f64) -> Result<char> {
        self.check_range(x)?;
        Ok(self.locate(x, &self.offset0))
    }

    fn locate(&self, x: f64, offsets: &[f64]) -> char {
        let symbols = self.pair.alphabet().symbols();
        // the last interval starting at or before x; rounding can push x past |λ| by an ulp
        (0..symbols.len())
            .filter(|&i| offsets[i] <= x)
            .max_by(|&i, &j| offsets[i].total_cmp(&offsets[j]))
            .map(|i| symbols[i])
            .unwrap_or(symbols[0])
    }
}

/// `f(x) = x − Λ₀(a) + Λ₁(a)` on the domain of `a`.
pub fn iet_apply(c: &Ciet, x: f64) -> Result<f64> {
    let a = c.letter_at(x)?;
    Ok(x - c.offset0(a) + c.offset1(a))
}

/// `f⁻¹`, using the half-open image intervals `[Λ₁(a), Λ₁(a) + λ_a)`.
pub fn iet_apply_inverse(c: &Ciet, y: f64) -> Result<f64> {
    c.check_range(y)?;
    let a = c.locate(y, &c.offset1);
    Ok(y - c.offset1(a) + c.offset0(a))
}

#[derive(Clone, Debug)]
pub struct InductionStep {
    pub ty: InductionType,
    pub twist: ElementaryTwist,
    pub ciet: Ciet,
}

/// One completed Rauzy induction.
pub fn rauzy_induce_numeric(c: &Ciet, tol: f64) -> Result<InductionStep> {
    let (a0, a1) = (c.pair.alpha0(), c.pair.alpha1());
    let (l0, l1) = (c.length(a0), c.length(a1));
    if (l0 - l1).abs() <= tol * l0.max(l1) {
        return Err(Error::Connection(l0, l1));
    }
    let ty = if l0 > l1 { InductionType::Zero } else { InductionType::One };
    let mut lengths = c.lengths.clone();
    match ty {
        InductionType::Zero => lengths[c.idx(a0)] = l0 - l1,
        InductionType::One => lengths[c.idx(a1)] = l1 - l0,
    }
    let twist = edge_twist(&c.pair, ty)?;
    let ciet = Ciet::build(induce_pair(&c.pair, ty)?, lengths)?;
    Ok(InductionStep { ty, twist, ciet })
}

/// The first `steps` inductions.
pub fn induction_trajectory(c: &Ciet, steps: usize, tol: f64) -> Result<Vec<InductionStep>> {
    let mut out: Vec<InductionStep> = Vec::with_capacity(steps);
    for _ in 0..steps {
        let cur = out.last().map_or(c, |s| &s.ciet);
        out.push(rauzy_induce_numeric(cur, tol)?);
    }
    Ok(out)
}

fn same_shape(a: &Ciet, b: &Ciet, tol: f64) -> bool {
    a.pair == b.pair
        && a.normalized().iter().zip(b.normalized()).all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()))
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfInduction {
    pub n: usize,
    /// `η` with `λ⁽ⁿ⁾ = η⁻¹ λ⁽⁰⁾`.
    pub dilation: f64,
    pub types: Vec<InductionType>,
    #[serde(serialize_with = "serialize_twists")]
    pub twists: Vec<ElementaryTwist>,
}

fn serialize_twists<S: serde::Serializer>(t: &[ElementaryTwist], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(t.iter().map(|x| x.to_string()))
}

/// First `n ≤ max_steps` with `R^n(δ) = (π, λ/η)`.
pub fn detect_self_induction(c: &Ciet, max_steps: usize, tol: f64) -> Result<Option<SelfInduction>> {
    let mut cur = c.clone();
    let (mut types, mut twists) = (Vec::new(), Vec::new());
    for n in 1..=max_steps {
        let step = rauzy_induce_numeric(&cur, tol)?;
        types.push(step.ty);
        twists.push(step.twist);
        cur = step.ciet;
        if same_shape(c, &cur, tol) {
            return Ok(Some(SelfInduction { n, dilation: c.total() / cur.total(), types, twists }));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// Domain letters along the orbit of `x` under `f`, or image-interval
/// letters along its orbit under `f⁻¹`.
pub fn orbit_coding(c: &Ciet, x: f64, n: usize, dir: Direction) -> Result<Vec<char>> {
    c.check_range(x)?;
    let mut out = Vec::with_capacity(n);
    let mut y = x;
    for _ in 0..n {
        let a = match dir {
            Direction::Forward => c.locate(y, &c.offset0),
            Direction::Backward => c.locate(y, &c.offset1),
        };
        out.push(a);
        y = match dir {
            Direction::Forward => y - c.offset0(a) + c.offset1(a),
            Direction::Backward => y - c.offset1(a) + c.offset0(a),
        };
        y = y.clamp(0.0, c.total());
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct PerronResult {
    pub eta: f64,
    /// Normalized to sum 1, indexed by alphabet position.
    pub lambda: Vec<f64>,
    pub residual: f64,
}

/// Dominant eigenpair `Mλ = ηλ` of a primitive matrix by power iteration.
pub fn perron(m: &IncidenceMatrix, tol: f64) -> Result<PerronResult> {
    if !m.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    let n = m.dim();
    let rows: Vec<Vec<f64>> = m.entries.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let apply = |v: &[f64]| -> Vec<f64> { rows.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect() };
    let mut v = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..200_000 {
        let w = apply(&v);
        let eta: f64 = w.iter().sum();
        let next: Vec<f64> = w.iter().map(|x| x / eta).collect();
        let mv = apply(&next);
        residual = mv.iter().zip(&next).map(|(a, b)| (a - eta * b).abs()).fold(0.0, f64::max);
        v = next;
        if residual < tol {
            // Σλ = 1 makes η the sum of Mλ
            return Ok(PerronResult { eta: mv.iter().sum(), lambda: v, residual });
        }
    }
    Err(Error::NoConvergence(residual))
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossValidation {
    pub max_len: usize,
    pub depth: usize,
    pub matched: bool,
    pub substitution_factors: usize,
    pub coding_factors: usize,
    /// Shortest factor found on one side only.
    pub first_mismatch: Option<String>,
}

/// Compares the factors of a generic orbit coding with the substitution language.
pub fn cross_validate(e: &Endomorphism, c: &Ciet, max_len: usize, depth: usize) -> Result<CrossValidation> {
    let want: BTreeSet<String> = e.factors(max_len)?.iter().map(ReducedWord::to_string).collect();
    // an irrational offset keeps the orbit away from the countably many singular points
    let x = c.total() * (std::f64::consts::SQRT_2 - 1.0);
    let coding: String = orbit_coding(c, x, depth, Direction::Forward)?.into_iter().collect();
    let mut got = BTreeSet::new();
    for len in 1..=max_len {
        for i in 0..=coding.len().saturating_sub(len) {
            got.insert(coding[i..i + len].to_string());
        }
    }
    let first_mismatch = want.symmetric_difference(&got).min_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b))).cloned();
    Ok(CrossValidation {
        max_len,
        depth,
        matched: first_mismatch.is_none(),
        substitution_factors: want.len(),
        coding_factors: got.len(),
        first_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mirror_example() -> (Ciet, f64) {
        let eta = 2.0 + 3f64.sqrt();
        let c = Ciet::build(PermutationPair::parse("abc/cab").unwrap(), vec![2.0 * eta - 1.0, eta, 2.0 * eta]).unwrap();
        (c, eta)
    }

    fn golden() -> Ciet {
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        Ciet::build(PermutationPair::parse("ab/ba").unwrap(), vec![g, 1.0]).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn offsets() {
        let (c, eta) = mirror_example();
        assert_eq!(c.offset0('a'), 0.0);
        assert!(close(c.offset0('c'), 3.0 * eta - 1.0));
        assert!(close(c.total(), (0..3).map(|i| c.lengths()[i]).sum()));
        assert!(matches!(
            Ciet::build(PermutationPair::parse("ab/ba").unwrap(), vec![1.0, 0.0]),
            Err(Error::NonPositiveLength(_))
        ));
    }

    #[test]
    fn exchange_map() {
        let (c, eta) = mirror_example();
        assert!(close(iet_apply(&c, 0.0).unwrap(), 2.0 * eta));
        assert!(close(iet_apply(&c, 1.0).unwrap(), 1.0 + c.offset1('a')));
        assert!(matches!(iet_apply(&c, c.total()), Err(Error::OutOfRange { .. })));
        for i in 0..50 {
            let x = c.total() * (i as f64 + 0.37) / 50.0;
            assert!(close(iet_apply_inverse(&c, iet_apply(&c, x).unwrap()).unwrap(), x));
        }
    }

    #[test]
    fn mirror_example_first_step() {
        let (c, eta) = mirror_example();
        let s = rauzy_induce_numeric(&c, DEFAULT_TOL).unwrap();
        assert_eq!(s.ty, InductionType::Zero);
        assert!(close(s.ciet.length('c'), eta));
    }

    #[test]
    fn mirror_example_is_self_induced() {
        let (c, eta) = mirror_example();
        let si = detect_self_induction(&c, 20, DEFAULT_TOL).unwrap().unwrap();
        assert_eq!(si.n, 5);
        assert!(close(si.dilation, eta));
    }

    #[test]
    fn golden_rotation() {
        let c = golden();
        assert_eq!(rauzy_induce_numeric(&c, DEFAULT_TOL).unwrap().ty, InductionType::One);
        let si = detect_self_induction(&c, 10, DEFAULT_TOL).unwrap().unwrap();
        assert_eq!(si.n, 2);
        let t: Vec<String> = si.twists.iter().map(|t| t.to_string()).collect();
        assert_eq!(t, ["b->ab", "a->ab"]);
    }

    #[test]
    fn equal_last_lengths_are_a_connection() {
        let c = Ciet::build(PermutationPair::parse("ab/ba").unwrap(), vec![1.0, 1.0]).unwrap();
        assert!(matches!(rauzy_induce_numeric(&c, DEFAULT_TOL), Err(Error::Connection(..))));
    }

    #[test]
    fn coding_starts_in_the_right_interval() {
        let (c, _) = mirror_example();
        for &a in &['a', 'b', 'c'] {
            let x = c.offset0(a) + 0.5 * c.length(a);
            assert_eq!(orbit_coding(&c, x, 1, Direction::Forward).unwrap(), vec![a]);
        }
    }

    #[test]
    fn perron_examples() {
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        let p = perron(&IncidenceMatrix::from_rows(vec![vec![1, 1], vec![1, 0]]), 1e-12).unwrap();
        assert!(close(p.eta, g));
        assert!(close(p.lambda[0] / p.lambda[1], g));
        assert!(matches!(perron(&IncidenceMatrix::identity(3), 1e-10), Err(Error::NotPrimitive)));
    }

    #[test]
    fn fibonacci_matches_golden_rotation() {
        let fib = Endomorphism::from_rules(&[('a', "ab"), ('b', "a")]).unwrap();
        let cv = cross_validate(&fib, &golden(), 10, 5000).unwrap();
        assert!(cv.matched, "{cv:?}");
        let off = Ciet::build(PermutationPair::parse("ab/ba").unwrap(), vec![1.5, 1.0]).unwrap();
        assert!(!cross_validate(&fib, &off, 10, 5000).unwrap().matched);
    }
}
