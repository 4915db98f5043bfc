//! Prefix-suffix automaton, constant developments, γ maps and singularity
//! detection.
//!
//! A point whose development under `ψᵏ` is constant, `(p, a, s)*`, is
//! determined by `(p, a, s)` up to its undetermined tails. Two such points lie
//! in a common singularity exactly when their γ-orbits meet; the meeting index
//! fixes the shift that places them inside the singularity.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::automorphisms::Endomorphism;
use crate::boundary::{
    resolve_undetermined, BiPoint, LazyInfiniteWord, PointKey, Side, DEFAULT_DEPTH, DEFAULT_DEPTH_CAP,
};
use crate::error::{Error, Result};
use crate::words::{Letter, ReducedWord};

/// Edge `a → b` labelled `(p, a, s)` for every decomposition `ψ(b) = p·a·s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsEdge {
    pub from: char,
    pub to: char,
    pub p: ReducedWord,
    pub a: char,
    pub s: ReducedWord,
}

#[derive(Clone, Debug)]
pub struct PsAutomaton {
    pub vertices: Vec<char>,
    pub edges: Vec<PsEdge>,
}

impl PsAutomaton {
    /// Self-loops, i.e. decompositions `ψ(a) = p·a·s`.
    pub fn loops(&self) -> impl Iterator<Item = &PsEdge> {
        self.edges.iter().filter(|e| e.from == e.to)
    }
}

fn require_positive(e: &Endomorphism) -> Result<()> {
    for (i, img) in e.images().iter().enumerate() {
        if !img.is_positive() {
            return Err(Error::NotPositive(e.alphabet().symbol(i)));
        }
    }
    Ok(())
}

pub fn build_automaton(e: &Endomorphism) -> Result<PsAutomaton> {
    require_positive(e)?;
    let mut edges = Vec::with_capacity(e.total_image_length());
    for (bi, img) in e.images().iter().enumerate() {
        let to = e.alphabet().symbol(bi);
        let letters = img.letters();
        for (i, l) in letters.iter().enumerate() {
            edges.push(PsEdge {
                from: l.symbol(),
                to,
                p: img.prefix(i),
                a: l.symbol(),
                s: ReducedWord::from_letters(letters[i + 1..].iter().copied()),
            });
        }
    }
    Ok(PsAutomaton { vertices: e.alphabet().symbols().to_vec(), edges })
}

/// `(p, a, s)*` with `ψᵏ(a) = p·a·s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstantDevelopment {
    pub k: usize,
    pub p: ReducedWord,
    pub a: char,
    pub s: ReducedWord,
}

impl fmt::Display for ConstantDevelopment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})*", self.p, self.a, self.s)
    }
}

pub fn constant_developments(psi: &Endomorphism, k: usize) -> Result<Vec<ConstantDevelopment>> {
    if k == 0 {
        return Err(Error::Input("development power must be at least 1".into()));
    }
    developments_of(&psi.power(k)?, k)
}

/// Developments of an already computed power `θ = ψᵏ`.
fn developments_of(theta: &Endomorphism, k: usize) -> Result<Vec<ConstantDevelopment>> {
    let aut = build_automaton(theta)?;
    Ok(aut.loops().map(|e| ConstantDevelopment { k, p: e.p.clone(), a: e.a, s: e.s.clone() }).collect())
}

/// `γ₋(u) = θ(last)·(u without last)` on the prefix side,
/// `γ₊(u) = (u without first)·θ(first)` on the suffix side.
pub fn gamma(theta: &Endomorphism, side: Side, u: &ReducedWord) -> Result<ReducedWord> {
    if u.is_empty() {
        return Err(Error::Input("γ of the empty word".into()));
    }
    if !u.is_positive() {
        return Err(Error::Input(format!("γ needs a positive word, got {u}")));
    }
    Ok(match side {
        Side::Prefix => {
            let mut out = theta.image(u.last().unwrap().symbol())?.clone();
            out.extend_unchecked(&u.init());
            out
        }
        Side::Suffix => {
            let mut out = u.tail();
            out.extend_unchecked(theta.image(u.first().unwrap().symbol())?);
            out
        }
    })
}

/// Iteration and word-length limits for γ-orbits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GammaCaps {
    pub iterations: usize,
    pub max_len: usize,
}

impl GammaCaps {
    /// 64 iterations, length `factor · N · max|θ(x)|`.
    pub fn for_power(theta: &Endomorphism, iterations: usize, factor: usize) -> Self {
        GammaCaps { iterations, max_len: factor * theta.alphabet().len() * theta.max_image_length() }
    }
}

struct Orbit {
    entries: Vec<ReducedWord>,
    /// The orbit revisited an entry, so every entry is listed.
    closed: bool,
}

fn gamma_orbit(theta: &Endomorphism, side: Side, u: &ReducedWord, caps: GammaCaps) -> Result<Orbit> {
    let mut entries = vec![u.clone()];
    let mut seen: HashMap<ReducedWord, usize> = HashMap::from([(u.clone(), 0)]);
    while entries.len() < caps.iterations.max(1) {
        let next = gamma(theta, side, entries.last().unwrap())?;
        if seen.contains_key(&next) {
            return Ok(Orbit { entries, closed: true });
        }
        if next.len() > caps.max_len {
            break;
        }
        seen.insert(next.clone(), entries.len());
        entries.push(next);
    }
    Ok(Orbit { entries, closed: false })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchResult {
    pub side: Side,
    pub i: usize,
    pub j: usize,
    /// The fixing word: `γ₋ⁱ(p)` on the prefix side, `γ₊ⁱ(s)⁻¹` on the suffix side.
    pub w: ReducedWord,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchOutcome {
    Matched(MatchResult),
    /// `proven` is false when the orbits were cut by a cap rather than closed.
    NoMatch {
        proven: bool,
    },
}

fn side_word(d: &ConstantDevelopment, side: Side) -> &ReducedWord {
    match side {
        Side::Prefix => &d.p,
        Side::Suffix => &d.s,
    }
}

fn fixing_word(side: Side, entry: &ReducedWord) -> ReducedWord {
    match side {
        Side::Prefix => entry.clone(),
        Side::Suffix => entry.inverse(),
    }
}

pub fn match_development_pair(
    theta: &Endomorphism,
    d1: &ConstantDevelopment,
    d2: &ConstantDevelopment,
    side: Side,
    caps: GammaCaps,
) -> Result<MatchOutcome> {
    if d1.k != d2.k {
        return Err(Error::Input(format!("developments of different powers: {} and {}", d1.k, d2.k)));
    }
    let (u1, u2) = (side_word(d1, side), side_word(d2, side));
    match (u1.is_empty(), u2.is_empty()) {
        (true, true) => return Ok(MatchOutcome::Matched(MatchResult { side, i: 0, j: 0, w: ReducedWord::empty() })),
        (true, false) | (false, true) => return Ok(MatchOutcome::NoMatch { proven: true }),
        _ => {}
    }
    let o1 = gamma_orbit(theta, side, u1, caps)?;
    let o2 = gamma_orbit(theta, side, u2, caps)?;
    let index: HashMap<&ReducedWord, usize> = o1.entries.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let best = o2.entries.iter().enumerate().filter_map(|(j, w)| index.get(w).map(|&i| (i, j))).min();
    Ok(match best {
        Some((i, j)) => MatchOutcome::Matched(MatchResult { side, i, j, w: fixing_word(side, &o1.entries[i]) }),
        None => MatchOutcome::NoMatch { proven: o1.closed && o2.closed },
    })
}

/// Limits for [`detect_singularities`].
#[derive(Clone, Debug)]
pub struct DetectConfig {
    /// Prefix length used to identify points.
    pub depth: usize,
    pub depth_cap: usize,
    pub gamma_iterations: usize,
    pub gamma_len_factor: usize,
    /// Largest development power tried; `4N − 4` when unset.
    pub k_max: Option<usize>,
    /// Largest power of a fixing action tried; `N·(4N − 4)` when unset.
    pub h_cap: Option<usize>,
    /// The power search stops once some `|ψᵏ(x)|` exceeds this.
    pub max_image_len: usize,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            depth: DEFAULT_DEPTH,
            depth_cap: DEFAULT_DEPTH_CAP,
            gamma_iterations: 64,
            gamma_len_factor: 16,
            k_max: None,
            h_cap: None,
            max_image_len: 4000,
        }
    }
}

impl DetectConfig {
    pub fn k_max_for(&self, n: usize) -> usize {
        self.k_max.unwrap_or(4 * n - 4).max(1)
    }

    pub fn h_cap_for(&self, n: usize) -> usize {
        self.h_cap.unwrap_or(n * (4 * n - 4)).max(1)
    }
}

/// Which coordinate the points of a singularity share.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Common `U`, distinct `V₀`.
    Forward,
    /// Common `V`, distinct `U₀`.
    Backward,
    /// Neither coordinate is shared by all points.
    Mixed,
}

#[derive(Clone, Debug)]
pub struct SingPoint {
    pub point: BiPoint,
    pub key: PointKey,
    /// How the point was produced, e.g. `(bd, a, cda)* S^0`.
    pub origins: Vec<String>,
}

/// The action `∂²(i_w ∘ ψᵏ)` fixing every point of a singularity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixing {
    pub k: usize,
    pub w: ReducedWord,
}

impl Fixing {
    /// The conjugator `W` with `(i_w ∘ ψᵏ)^m = i_W ∘ ψ^{km}`, for `big_k = km`.
    pub fn at_power(&self, psi: &Endomorphism, big_k: usize) -> Result<ReducedWord> {
        if big_k == 0 || !big_k.is_multiple_of(self.k) {
            return Err(Error::Input(format!("power {big_k} is not a multiple of {}", self.k)));
        }
        let theta = psi.power(self.k)?;
        iterate_conjugator(&theta, &self.w, big_k / self.k)
    }
}

/// `θ^{m−1}(w) ⋯ θ(w) w`.
fn iterate_conjugator(theta: &Endomorphism, w: &ReducedWord, m: usize) -> Result<ReducedWord> {
    let mut acc = w.clone();
    for _ in 1..m {
        acc = theta.apply(&acc)?.concat(w);
    }
    Ok(acc)
}

#[derive(Clone, Debug)]
pub struct Singularity {
    pub kind: Kind,
    pub points: Vec<SingPoint>,
    pub fixing: Fixing,
}

impl Singularity {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Recomputes keys and kind after the points were replaced.
    pub fn rekey(&mut self, depth: usize) -> Result<()> {
        for p in &mut self.points {
            p.key = p.point.key(depth)?;
        }
        self.points.sort_by(|a, b| a.key.cmp(&b.key));
        self.kind = classify(&self.points);
        Ok(())
    }
}

fn classify(points: &[SingPoint]) -> Kind {
    let shared = |f: fn(&PointKey) -> &ReducedWord| points.windows(2).all(|w| f(&w[0].key) == f(&w[1].key));
    if shared(|k| &k.u) {
        Kind::Forward
    } else if shared(|k| &k.v) {
        Kind::Backward
    } else {
        Kind::Mixed
    }
}

#[derive(Clone, Debug)]
pub struct Detection {
    /// Least `K` such that every singularity is fixed by some `i_w ∘ ψ^K`.
    pub k: usize,
    /// Development power at which the grouping was taken.
    pub search_power: usize,
    pub singularities: Vec<Singularity>,
    pub diagnostics: Vec<String>,
    /// False when the power search ended on a cap without a stable grouping.
    pub stable: bool,
    /// Development pairs whose γ-orbits were cut by a cap without meeting.
    pub unproven_no_match: usize,
}

impl Detection {
    /// `Σ (|Ω| − 1)/2`, doubled to stay integral.
    pub fn doubled_index(&self) -> usize {
        self.singularities.iter().map(|s| s.len() - 1).sum()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Lists the singularities of a positive primitive `ψ`.
pub fn detect_singularities(psi: &Endomorphism, cfg: &DetectConfig) -> Result<Detection> {
    require_positive(psi)?;
    let n = psi.alphabet().len();
    let f2 = psi.two_factors();
    let k_max = cfg.k_max_for(n);
    let mut diagnostics = Vec::new();
    let mut theta = psi.clone();
    let mut prev: Option<Level> = None;
    let mut chosen: Option<Level> = None;
    for k in 1..=k_max {
        if k > 1 {
            theta = Endomorphism::compose(psi, &theta)?;
            if theta.max_image_length() > cfg.max_image_len {
                diagnostics.push(format!("power search stopped before k = {k}: images exceed {}", cfg.max_image_len));
                break;
            }
        }
        let level = detect_level(&Arc::new(theta.clone()), k, cfg, &f2, 0)?;
        if level.doubled_index() >= 2 * (n - 1) {
            chosen = Some(level);
            break;
        }
        if let Some(p) = &prev {
            if p.grouping == level.grouping {
                chosen = prev.take();
                break;
            }
        }
        prev = Some(level);
    }
    let stable = chosen.is_some();
    let mut level = match chosen.or(prev) {
        Some(l) => l,
        None => return Err(Error::Input("no development power could be examined".into())),
    };
    if !stable {
        diagnostics.push("no stable grouping within the power limits".into());
    }
    if level.singularities.len() < 2 * n - 2 {
        let theta = Arc::new(psi.power(level.k)?);
        let retry = detect_level(&theta, level.k, cfg, &f2, 2)?;
        if retry.singularities.len() > level.singularities.len() {
            level.diagnostics.push("singularities found only through non-minimal γ matches".into());
            level = Level { diagnostics: [level.diagnostics, retry.diagnostics].concat(), ..retry };
        } else {
            level
                .diagnostics
                .push(format!("{} singularities found; non-minimal γ matches added none", level.singularities.len()));
        }
    }
    diagnostics.extend(level.diagnostics);
    let big_k = level.singularities.iter().fold(1, |acc, s| lcm(acc, s.fixing.k));
    Ok(Detection {
        k: big_k,
        search_power: level.k,
        singularities: level.singularities,
        diagnostics,
        stable,
        unproven_no_match: level.unproven,
    })
}

struct Level {
    k: usize,
    singularities: Vec<Singularity>,
    grouping: BTreeSet<BTreeSet<PointKey>>,
    diagnostics: Vec<String>,
    unproven: usize,
}

impl Level {
    fn doubled_index(&self) -> usize {
        self.singularities.iter().map(|s| s.len() - 1).sum()
    }
}

/// Points keyed by their exposed prefixes, merged with a union-find.
struct Arena {
    depth: usize,
    points: Vec<SingPoint>,
    index: HashMap<PointKey, usize>,
    uf: UnionFind<usize>,
    /// `(member, w)` in insertion order; the first one of a group is its action.
    actions: Vec<(usize, ReducedWord)>,
}

impl Arena {
    fn add(&mut self, point: BiPoint, origin: String) -> Result<usize> {
        let key = point.key(self.depth)?;
        if let Some(&i) = self.index.get(&key) {
            if !self.points[i].origins.contains(&origin) {
                self.points[i].origins.push(origin);
            }
            return Ok(i);
        }
        let i = self.uf.new_set();
        self.index.insert(key.clone(), i);
        self.points.push(SingPoint { point, key, origins: vec![origin] });
        Ok(i)
    }

    fn join(&mut self, members: &[usize], w: ReducedWord) {
        if let Some(&first) = members.first() {
            for &m in &members[1..] {
                self.uf.union(first, m);
            }
            self.actions.push((first, w));
        }
    }
}

/// Every admissible point with development `d`, one per resolved tail.
fn instantiate(
    d: &ConstantDevelopment,
    powers: &[Arc<Endomorphism>],
    f2: &BTreeSet<(char, char)>,
    cap: usize,
    diagnostics: &mut Vec<String>,
) -> Result<Vec<BiPoint>> {
    let theta = &powers[0];
    let tails = |side: Side| -> Result<Vec<LazyInfiniteWord>> {
        let resolved = resolve_undetermined(theta, side, d.a, f2)?;
        resolved
            .into_iter()
            .map(|(x, h)| match side {
                Side::Prefix => LazyInfiniteWord::letter_limit(powers[h - 1].clone(), Letter::neg(x), cap),
                Side::Suffix => Ok(LazyInfiniteWord::letter_limit(powers[h - 1].clone(), Letter::pos(x), cap)?
                    .with_left(&ReducedWord::from_letters([Letter::pos(d.a)]))),
            })
            .collect()
    };
    let us = if d.p.is_empty() {
        tails(Side::Prefix)?
    } else {
        vec![LazyInfiniteWord::development(theta.clone(), d.p.clone(), d.a, d.s.clone(), Side::Prefix, cap)?]
    };
    let vs = if d.s.is_empty() {
        tails(Side::Suffix)?
    } else {
        vec![LazyInfiniteWord::development(theta.clone(), d.p.clone(), d.a, d.s.clone(), Side::Suffix, cap)?]
    };
    if us.len() * vs.len() != 1 {
        diagnostics.push(format!("k = {}: {d} has {} admissible tail assignments", d.k, us.len() * vs.len()));
    }
    let mut out = Vec::new();
    for u in &us {
        for v in &vs {
            out.push(BiPoint::new(u.clone(), v.clone())?);
        }
    }
    Ok(out)
}

fn detect_level(
    theta: &Arc<Endomorphism>,
    k: usize,
    cfg: &DetectConfig,
    f2: &BTreeSet<(char, char)>,
    extra: usize,
) -> Result<Level> {
    let n = theta.alphabet().len();
    let mut diagnostics = Vec::new();
    let mut powers = vec![theta.clone()];
    while powers.len() < n {
        powers.push(Arc::new(Endomorphism::compose(theta, powers.last().unwrap())?));
    }
    let devs = developments_of(theta, k)?;
    let mut variants = Vec::with_capacity(devs.len());
    for d in &devs {
        if d.p.is_empty() && d.s.is_empty() {
            diagnostics.push(format!("k = {k}: letter {} is fixed by ψᵏ", d.a));
            variants.push(Vec::new());
            continue;
        }
        variants.push(instantiate(d, &powers, f2, cfg.depth_cap, &mut diagnostics)?);
    }
    let mut arena = Arena {
        depth: cfg.depth,
        points: Vec::new(),
        index: HashMap::new(),
        uf: UnionFind::new_empty(),
        actions: Vec::new(),
    };
    // Shifted copies of every variant of `d`, skipping excluded ones.
    let place = |arena: &mut Arena, di: usize, shift: i64, diagnostics: &mut Vec<String>| -> Vec<usize> {
        let mut ids = Vec::new();
        for pt in &variants[di] {
            match pt.shift_by(shift).and_then(|p| arena.add(p, format!("{} S^{shift}", devs[di]))) {
                Ok(i) => ids.push(i),
                Err(e) => diagnostics.push(format!("k = {k}: {} S^{shift} skipped: {e}", devs[di])),
            }
        }
        ids
    };

    // Points fixed by a plain power of ψ form one singularity.
    let mut pure = Vec::new();
    for (di, d) in devs.iter().enumerate() {
        if d.p.is_empty() {
            pure.extend(place(&mut arena, di, 0, &mut diagnostics));
        }
        if d.s.is_empty() {
            pure.extend(place(&mut arena, di, 1, &mut diagnostics));
        }
    }
    arena.join(&pure, ReducedWord::empty());

    let caps = GammaCaps::for_power(theta, cfg.gamma_iterations, cfg.gamma_len_factor);
    let mut unproven = 0;
    for side in [Side::Prefix, Side::Suffix] {
        let mut orbits: Vec<Option<Orbit>> = Vec::with_capacity(devs.len());
        let mut meets: HashMap<ReducedWord, Vec<(usize, usize)>> = HashMap::new();
        for (di, d) in devs.iter().enumerate() {
            let u = side_word(d, side);
            if u.is_empty() || variants[di].is_empty() {
                orbits.push(None);
                continue;
            }
            let o = gamma_orbit(theta, side, u, caps)?;
            for (i, e) in o.entries.iter().enumerate() {
                meets.entry(e.clone()).or_default().push((di, i));
            }
            orbits.push(Some(o));
        }
        let mut best: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for hits in meets.values() {
            for (x, &(d1, i)) in hits.iter().enumerate() {
                for &(d2, j) in &hits[x + 1..] {
                    let (key, ij) = if d1 < d2 { ((d1, d2), (i, j)) } else { ((d2, d1), (j, i)) };
                    let slot = best.entry(key).or_insert(ij);
                    *slot = (*slot).min(ij);
                }
            }
        }
        let live: Vec<usize> = (0..devs.len()).filter(|&d| orbits[d].is_some()).collect();
        for (x, &d1) in live.iter().enumerate() {
            for &d2 in &live[x + 1..] {
                if !best.contains_key(&(d1, d2))
                    && !(orbits[d1].as_ref().unwrap().closed && orbits[d2].as_ref().unwrap().closed)
                {
                    unproven += 1;
                }
            }
        }
        let mut pairs: Vec<_> = best.into_iter().collect();
        pairs.sort();
        for ((d1, d2), (i, j)) in pairs {
            let mut entry = orbits[d1].as_ref().unwrap().entries[i].clone();
            for t in 0..=extra {
                if t > 0 {
                    entry = gamma(theta, side, &entry)?;
                }
                let (si, sj) = match side {
                    Side::Prefix => (-((i + t) as i64), -((j + t) as i64)),
                    Side::Suffix => ((i + t + 1) as i64, (j + t + 1) as i64),
                };
                let mut ids = place(&mut arena, d1, si, &mut diagnostics);
                ids.extend(place(&mut arena, d2, sj, &mut diagnostics));
                arena.join(&ids, fixing_word(side, &entry));
            }
        }
    }

    let h_cap = cfg.h_cap_for(n);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of = HashMap::new();
    for i in 0..arena.points.len() {
        let r = arena.uf.find(i);
        let g = *root_of.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    let mut action_of = HashMap::new();
    for (m, w) in &arena.actions {
        action_of.entry(arena.uf.find(*m)).or_insert_with(|| w.clone());
    }

    let mut singularities = Vec::new();
    for members in groups.into_iter().filter(|g| g.len() >= 2) {
        let mut points: Vec<SingPoint> = members.iter().map(|&i| arena.points[i].clone()).collect();
        points.sort_by(|a, b| a.key.cmp(&b.key));
        let label = points.iter().map(|p| p.origins[0].as_str()).collect::<Vec<_>>().join(", ");
        let firsts: BTreeSet<_> = points.iter().map(|p| (p.key.u.first(), p.key.v.first())).collect();
        if firsts.len() < 2 {
            diagnostics.push(format!("k = {k}: group [{label}] has equal first letters on both sides, discarded"));
            continue;
        }
        let w = action_of[&arena.uf.find(members[0])].clone();
        let mut h = 1;
        let mut fixed = true;
        for p in &points {
            match period(&p.point, theta, &w, cfg.depth, h_cap) {
                Some(ph) => h = lcm(h, ph),
                None => fixed = false,
            }
        }
        if !fixed {
            diagnostics
                .push(format!("k = {k}: group [{label}] is not fixed by i_w∘ψᵏ (w = {w}) within {h_cap} powers"));
            continue;
        }
        let kind = classify(&points);
        if kind == Kind::Mixed {
            diagnostics.push(format!("k = {k}: group [{label}] shares neither coordinate"));
        }
        let fixing = Fixing { k: k * h, w: iterate_conjugator(theta, &w, h)? };
        singularities.push(Singularity { kind, points, fixing });
    }
    singularities.sort_by(|a, b| a.points[0].key.cmp(&b.points[0].key));
    let grouping = singularities.iter().map(|s| s.points.iter().map(|p| p.key.clone()).collect()).collect();
    Ok(Level { k, singularities, grouping, diagnostics, unproven })
}

/// Least `h ≤ cap` with `(∂²(i_w ∘ θ))ʰ` fixing `pt` to `depth`.
fn period(pt: &BiPoint, theta: &Arc<Endomorphism>, w: &ReducedWord, depth: usize, cap: usize) -> Option<usize> {
    let target = pt.key(depth).ok()?;
    let mut cur = pt.clone();
    for h in 1..=cap {
        cur = cur.act(theta, w).ok()?;
        if cur.key(depth).ok()? == target {
            return Some(h);
        }
    }
    None
}
