//! Forward and backward graphs of a singularity list, and the conditions
//! they must satisfy for the automorphism to come from a CIET.

use std::collections::VecDeque;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::prefix_suffix::{Kind, Singularity};
use crate::rauzy::{InductionType, PermutationPair};
use crate::words::{Alphabet, Letter};

/// The necessary condition an automorphism failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    Positivity,
    C1,
    C2,
    C31,
    C32,
    C33,
    /// Preconditions of the equal-label case of the pair construction.
    Step23,
    Reducible,
    C4,
    C5,
    /// Neither base candidate is positive.
    Step3,
    /// A remainder of the induction loop is not positive.
    Step6,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Positivity => "positivity",
            Condition::C1 => "C1",
            Condition::C2 => "C2",
            Condition::C31 => "C3.1",
            Condition::C32 => "C3.2",
            Condition::C33 => "C3.3",
            Condition::Step23 => "step 2.3",
            Condition::Reducible => "reducible",
            Condition::C4 => "C4",
            Condition::C5 => "C5",
            Condition::Step3 => "step 3",
            Condition::Step6 => "step 6",
        })
    }
}

impl Serialize for Condition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionFailure {
    pub condition: Condition,
    pub detail: String,
}

impl ConditionFailure {
    pub fn new(condition: Condition, detail: impl Into<String>) -> Self {
        ConditionFailure { condition, detail: detail.into() }
    }
}

impl fmt::Display for ConditionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.condition, self.detail)
    }
}

pub type Check<T> = std::result::Result<T, ConditionFailure>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphEdge {
    pub x: char,
    pub y: char,
    pub label: char,
    /// Index of the singularity the edge comes from.
    pub singularity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SingGraph {
    pub nodes: Vec<char>,
    pub edges: Vec<GraphEdge>,
}

impl SingGraph {
    pub fn new(alphabet: &Alphabet, edges: Vec<GraphEdge>) -> Self {
        SingGraph { nodes: alphabet.symbols().to_vec(), edges }
    }

    pub fn degree(&self, x: char) -> usize {
        self.edges.iter().map(|e| (e.x == x) as usize + (e.y == x) as usize).sum()
    }

    /// Breadth-first distances from `from`; `None` for unreachable nodes.
    pub fn distances(&self, from: char) -> Vec<Option<usize>> {
        let idx = |c: char| self.nodes.iter().position(|&n| n == c);
        let mut dist = vec![None; self.nodes.len()];
        let Some(start) = idx(from) else { return dist };
        dist[start] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            let d = dist[idx(x).unwrap()].unwrap();
            for e in &self.edges {
                let other = if e.x == x {
                    e.y
                } else if e.y == x {
                    e.x
                } else {
                    continue;
                };
                if let Some(j) = idx(other) {
                    if dist[j].is_none() {
                        dist[j] = Some(d + 1);
                        queue.push_back(other);
                    }
                }
            }
        }
        dist
    }

    pub fn distance(&self, from: char, to: char) -> Option<usize> {
        let j = self.nodes.iter().position(|&n| n == to)?;
        self.distances(from)[j]
    }

    /// Node-to-edge distance; the path does not contain the edge.
    pub fn edge_distance(&self, from: char, e: &GraphEdge) -> Option<usize> {
        Some(self.distance(from, e.x)?.min(self.distance(from, e.y)?))
    }

    /// The degree-1 nodes, in alphabet order.
    pub fn leaves(&self) -> Vec<char> {
        self.nodes.iter().copied().filter(|&c| self.degree(c) == 1).collect()
    }

    pub fn labels(&self) -> Vec<char> {
        let mut l: Vec<char> = self.edges.iter().map(|e| e.label).collect();
        l.sort_unstable();
        l.dedup();
        l
    }

    /// The edges adjacent to `x`.
    pub fn edges_at(&self, x: char) -> impl Iterator<Item = &GraphEdge> {
        self.edges.iter().filter(move |e| e.x == x || e.y == x)
    }
}

fn first_letters(s: &Singularity, i: usize) -> (Letter, Letter) {
    let k = &s.points[i].key;
    (k.u.first().expect("nonempty key"), k.v.first().expect("nonempty key"))
}

/// Exactly `2N − 2` singularities of two points each, `N − 1` of each kind.
pub fn check_c1_c2(sings: &[Singularity], n: usize) -> Check<()> {
    let sizes: Vec<usize> = sings.iter().map(|s| s.len()).collect();
    if sings.len() != 2 * n - 2 || sizes.iter().any(|&s| s != 2) {
        return Err(ConditionFailure::new(
            Condition::C1,
            format!("expected {} singularities of 2 points, found {} with sizes {sizes:?}", 2 * n - 2, sings.len()),
        ));
    }
    let count = |k: Kind| sings.iter().filter(|s| s.kind == k).count();
    let (fw, bw) = (count(Kind::Forward), count(Kind::Backward));
    if fw != n - 1 || bw != n - 1 {
        return Err(ConditionFailure::new(
            Condition::C2,
            format!("expected {} forward and {} backward singularities, found {fw} and {bw}", n - 1, n - 1),
        ));
    }
    Ok(())
}

/// `G₊` and `G₋`. Singularities that are not two-point forward or backward
/// sets contribute no edge; C1 and C2 rule them out upstream.
pub fn build_graphs(alphabet: &Alphabet, sings: &[Singularity]) -> (SingGraph, SingGraph) {
    let (mut plus, mut minus) = (Vec::new(), Vec::new());
    for (id, s) in sings.iter().enumerate() {
        if s.len() != 2 {
            continue;
        }
        let ((u0, v0), (u1, v1)) = (first_letters(s, 0), first_letters(s, 1));
        match s.kind {
            Kind::Forward => {
                plus.push(GraphEdge { x: v0.symbol(), y: v1.symbol(), label: u0.symbol(), singularity: id })
            }
            Kind::Backward => {
                minus.push(GraphEdge { x: u0.symbol(), y: u1.symbol(), label: v0.symbol(), singularity: id })
            }
            Kind::Mixed => {}
        }
    }
    (SingGraph::new(alphabet, plus), SingGraph::new(alphabet, minus))
}

/// Connected, two nodes of degree 1, all others of degree 2.
pub fn check_c31(g: &SingGraph) -> bool {
    let n = g.nodes.len();
    let degrees: Vec<usize> = g.nodes.iter().map(|&c| g.degree(c)).collect();
    let leaves = degrees.iter().filter(|&&d| d == 1).count();
    let connected = g.distances(g.nodes[0]).iter().all(Option::is_some);
    connected && leaves == 2 && degrees.iter().all(|&d| d == 1 || d == 2) && g.edges.len() == n - 1
}

/// `π` from the graphs, with `α` the first degree-1 node of `G₊` (the other
/// one when the equal-label case needs it).
pub fn derive_pair(plus: &SingGraph, minus: &SingGraph) -> Check<PermutationPair> {
    for (g, name) in [(plus, "G+"), (minus, "G-")] {
        if !check_c31(g) {
            return Err(ConditionFailure::new(Condition::C31, format!("{name} is not a path")));
        }
    }
    let leaves = plus.leaves();
    match derive_pair_from(plus, minus, leaves[0]) {
        // the equal-label case reads π₁ off α itself, which only works from
        // the leaf that ends G₋ too; the other leaf yields the mirror pair
        Err(f) if f.condition == Condition::Step23 && minus.degree(leaves[0]) != 1 => {
            derive_pair_from(plus, minus, leaves[1]).map_err(|_| f)
        }
        other => other,
    }
}

/// Like [`derive_pair`] with an explicit degree-1 node `α` of `G₊`.
pub fn derive_pair_from(plus: &SingGraph, minus: &SingGraph, alpha: char) -> Check<PermutationPair> {
    let n = plus.nodes.len();
    if plus.degree(alpha) != 1 {
        return Err(ConditionFailure::new(Condition::C32, format!("{alpha} is not a leaf of G+")));
    }
    let pi0: Vec<usize> = plus.distances(alpha).into_iter().map(|d| d.expect("connected")).collect();
    let pos0 = |c: char| pi0[plus.nodes.iter().position(|&x| x == c).unwrap()];
    let pi1 = if let Some((ea, eb)) = distinct_pair(plus, |e| plus.edge_distance(alpha, e).unwrap()) {
        // step 2.1: the label of the closer edge is closer to β
        let beta = pick_leaf(minus, |beta| minus.distance(beta, ea.label) < minus.distance(beta, eb.label))?;
        distances_from(minus, beta)
    } else if let Some((ea, eb)) = distinct_pair(minus, |e| pos0(e.label)) {
        // step 2.2: the edge whose label is closer to α is closer to β
        let beta = pick_leaf(minus, |beta| minus.edge_distance(beta, ea) < minus.edge_distance(beta, eb))?;
        distances_from(minus, beta)
    } else {
        let (b0, b1) = (plus.edges[0].label, minus.edges[0].label);
        if b0 != b1 {
            return Err(ConditionFailure::new(Condition::Step23, format!("common labels differ: {b0} vs {b1}")));
        }
        if minus.degree(alpha) != 1 {
            return Err(ConditionFailure::new(Condition::Step23, format!("{alpha} is not a leaf of G-")));
        }
        distances_from(minus, alpha).into_iter().map(|d| n - 1 - d).collect()
    };
    let alphabet = Alphabet::new(plus.nodes.clone()).expect("graph nodes form an alphabet");
    PermutationPair::new(alphabet, pi0, pi1).map_err(|e| ConditionFailure::new(Condition::C32, e.to_string()))
}

/// Two edges with distinct labels, the first one smaller under `rank`.
fn distinct_pair(g: &SingGraph, rank: impl Fn(&GraphEdge) -> usize) -> Option<(&GraphEdge, &GraphEdge)> {
    let mut edges: Vec<&GraphEdge> = g.edges.iter().collect();
    edges.sort_by_key(|e| rank(e));
    let first = edges.first()?;
    let other = edges.iter().find(|e| e.label != first.label)?;
    Some((first, other))
}

fn pick_leaf(g: &SingGraph, good: impl Fn(char) -> bool) -> Check<char> {
    g.leaves()
        .into_iter()
        .find(|&b| good(b))
        .ok_or_else(|| ConditionFailure::new(Condition::C33, "no leaf of G- orders the labels"))
}

fn distances_from(g: &SingGraph, from: char) -> Vec<usize> {
    g.distances(from).into_iter().map(|d| d.expect("connected")).collect()
}

/// The point with `U₀⁻¹ = α₁`, `V₀ = α₀`, and the induction type it forces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distinguished {
    pub ty: InductionType,
    pub singularity: usize,
    pub point: usize,
}

/// C3.2: `π₀`, `π₁` are distances from leaves of `G₊`, `G₋`.
pub fn check_c32(plus: &SingGraph, minus: &SingGraph, pair: &PermutationPair) -> Check<()> {
    for (g, bottom) in [(plus, false), (minus, true)] {
        let root = if bottom { pair.letter1(0) } else { pair.letter0(0) };
        let pos = |c: char| if bottom { pair.pi1(c) } else { pair.pi0(c) };
        let ok = g.degree(root) == 1 && g.nodes.iter().all(|&c| g.distance(root, c) == Some(pos(c)));
        if !ok {
            let name = if bottom { "π1 on G-" } else { "π0 on G+" };
            return Err(ConditionFailure::new(Condition::C32, format!("{name} is not a leaf distance")));
        }
    }
    Ok(())
}

/// C3.3: distinct labels are ordered like their edges' distances to the root.
pub fn check_c33(plus: &SingGraph, minus: &SingGraph, pair: &PermutationPair) -> Check<()> {
    for (g, root, pos, name) in [
        (plus, pair.letter0(0), (|p: &PermutationPair, c| p.pi1(c)) as fn(&PermutationPair, char) -> usize, "G+"),
        (minus, pair.letter1(0), |p: &PermutationPair, c| p.pi0(c), "G-"),
    ] {
        for ea in &g.edges {
            for eb in &g.edges {
                if ea.label == eb.label {
                    continue;
                }
                let closer = g.edge_distance(root, ea) < g.edge_distance(root, eb);
                if (pos(pair, ea.label) < pos(pair, eb.label)) != closer {
                    return Err(ConditionFailure::new(
                        Condition::C33,
                        format!("labels {} and {} of {name} are out of order", ea.label, eb.label),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// C3.2, C3.3 and C4, with the C4 type checked against the `G₊` edge at `α₀`.
pub fn check_c33_c4(
    plus: &SingGraph,
    minus: &SingGraph,
    pair: &PermutationPair,
    sings: &[Singularity],
) -> Check<Distinguished> {
    check_c32(plus, minus, pair)?;
    check_c33(plus, minus, pair)?;
    let (a0, a1) = (pair.alpha0(), pair.alpha1());
    let hits: Vec<(usize, usize)> = sings
        .iter()
        .enumerate()
        .flat_map(|(i, s)| (0..s.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| first_letters(&sings[i], j) == (Letter::neg(a1), Letter::pos(a0)))
        .collect();
    let &[(singularity, point)] = hits.as_slice() else {
        return Err(ConditionFailure::new(
            Condition::C4,
            format!("{} points start with ({a1}^-1, {a0}), expected exactly one", hits.len()),
        ));
    };
    let ty = match sings[singularity].kind {
        Kind::Backward => InductionType::Zero,
        Kind::Forward => InductionType::One,
        Kind::Mixed => {
            return Err(ConditionFailure::new(Condition::C4, "distinguished point lies in a mixed singularity"))
        }
    };
    let edge_type = match plus.edges_at(a0).next() {
        Some(e) if e.label == a1 => InductionType::One,
        _ => InductionType::Zero,
    };
    if edge_type != ty {
        return Err(ConditionFailure::new(
            Condition::C4,
            format!("singularity kind gives type {ty} but the G+ edge at {a0} gives type {edge_type}"),
        ));
    }
    Ok(Distinguished { ty, singularity, point })
}
