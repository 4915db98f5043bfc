//! The decision procedure: condition gates, the base automorphism, the
//! twist-peeling induction loop and the final report.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::automorphisms::{ElementaryTwist, Endomorphism};
use crate::boundary::{is_fixed_by, BiPoint};
use crate::error::Error;
use crate::numeric::{cross_validate, detect_self_induction, perron, Ciet, CrossValidation, DEFAULT_TOL};
use crate::prefix_suffix::{detect_singularities, DetectConfig, Detection, Kind, Singularity};
use crate::rauzy::{edge_twist, induce_pair, InductionType, PermutationPair};
use crate::singularity_graphs::{
    build_graphs, check_c1_c2, check_c31, check_c33_c4, derive_pair, Check, Condition, ConditionFailure, SingGraph,
};
use crate::words::{Letter, ReducedWord};

#[derive(Clone, Debug)]
pub struct DecideConfig {
    pub detect: DetectConfig,
    /// Depth of the fixed-point test for `Z`.
    pub c5_depth: usize,
    pub tol: f64,
    /// Run the numeric cross-checks on acceptance.
    pub verify: bool,
    pub verify_len: usize,
    pub verify_depth: usize,
}

impl Default for DecideConfig {
    fn default() -> Self {
        DecideConfig {
            detect: DetectConfig::default(),
            c5_depth: 32,
            tol: 1e-10,
            verify: true,
            verify_len: 10,
            verify_depth: 20_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    AsIs,
    Mirror,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Accepted,
    Rejected { condition: Condition, stage: usize },
    Inconclusive { cap: String },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Accepted => "accepted",
            Verdict::Rejected { .. } => "rejected",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// One row of the stage log.
#[derive(Clone, Debug, Serialize)]
pub struct StageRecord {
    pub stage: usize,
    pub pair: String,
    #[serde(rename = "type")]
    pub ty: InductionType,
    pub twist: String,
    /// Total image length of the remainder before this stage's twist is peeled.
    pub remainder_length: usize,
    pub plus: SingGraph,
    pub minus: SingGraph,
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularityRow {
    pub kind: Kind,
    pub fixing_k: usize,
    pub fixing_w: String,
    /// `(U, V)` prefixes and origins of each point.
    pub points: Vec<(String, String, Vec<String>)>,
}

#[derive(Clone, Debug, Default)]
pub struct DecisionReport {
    pub verdict: Option<Verdict>,
    pub k: Option<usize>,
    pub phi: Option<Endomorphism>,
    pub orientation: Option<Orientation>,
    pub pair: Option<PermutationPair>,
    pub lambda: Option<Vec<f64>>,
    pub eta: Option<f64>,
    pub twists: Vec<ElementaryTwist>,
    pub delta_automorphism: Option<Endomorphism>,
    pub period: Option<usize>,
    pub stages: Vec<StageRecord>,
    pub singularities: Vec<SingularityRow>,
    pub messages: Vec<String>,
    pub c5_depth: Option<usize>,
    pub cross_validation: Option<CrossValidation>,
    pub numeric_twists_agree: Option<bool>,
}

impl DecisionReport {
    pub fn verdict(&self) -> &Verdict {
        self.verdict.as_ref().expect("report is finished")
    }

    fn reject(mut self, f: ConditionFailure, stage: usize) -> Self {
        self.messages.push(f.to_string());
        self.verdict = Some(Verdict::Rejected { condition: f.condition, stage });
        self
    }

    fn inconclusive(mut self, cap: &str, detail: String) -> Self {
        self.messages.push(detail);
        self.verdict = Some(Verdict::Inconclusive { cap: cap.into() });
        self
    }
}

fn table(sings: &[Singularity]) -> Vec<SingularityRow> {
    sings
        .iter()
        .map(|s| SingularityRow {
            kind: s.kind,
            fixing_k: s.fixing.k,
            fixing_w: s.fixing.w.to_string(),
            points: s
                .points
                .iter()
                .map(|p| (p.key.u.prefix(8).to_string(), p.key.v.prefix(8).to_string(), p.origins.clone()))
                .collect(),
        })
        .collect()
}

/// `φ = i_u ∘ ψ^K` fixing `Z = x·P`, where `P` is the point of the backward
/// singularity with `U₀ = x⁻¹`, `x = π₀⁻¹(0)`.
fn base_candidate(
    psi_k: &Endomorphism,
    psi: &Endomorphism,
    big_k: usize,
    sings: &[Singularity],
    pair: &PermutationPair,
) -> Check<(Endomorphism, BiPoint)> {
    let fail = |d: String| ConditionFailure::new(Condition::C5, d);
    let x = pair.letter0(0);
    let p1 = pair.pi1(x);
    let found = sings.iter().filter(|s| s.kind == Kind::Backward).find_map(|s| {
        let at = |l: char| s.points.iter().position(|p| p.key.u.first() == Some(Letter::neg(l)));
        let i = at(x)?;
        let other = s
            .points
            .iter()
            .any(|q| q.key.u.first().is_some_and(|u| u.symbol() != x && p1 > 0 && pair.pi1(u.symbol()) == p1 - 1));
        other.then_some((s, i))
    });
    let (s, i) = found.ok_or_else(|| fail(format!("no backward singularity at {x}^-1")))?;
    let xw = ReducedWord::positive(&x.to_string());
    let z = s.points[i].point.translate(&xw).map_err(|e| fail(e.to_string()))?;
    let w = s.fixing.at_power(psi, big_k).map_err(|e| fail(e.to_string()))?;
    // u⁻¹ ψ^K(x) w = x
    let u = psi_k.image(x).expect("letter").concat(&w).concat(&xw.inverse());
    let phi = psi_k.conjugated_by(&u).map_err(|e| fail(e.to_string()))?;
    Ok((phi, z))
}

/// Step (3): the positive one of `φ′` (as-is pair) and `φ″` (mirror pair).
pub fn base_automorphism(
    psi: &Endomorphism,
    big_k: usize,
    sings: &[Singularity],
    pair: &PermutationPair,
) -> Check<(Endomorphism, Orientation, BiPoint)> {
    let psi_k = psi.power(big_k).map_err(|e| ConditionFailure::new(Condition::C5, e.to_string()))?;
    let mut notes = Vec::new();
    for (orientation, p) in [(Orientation::AsIs, pair.clone()), (Orientation::Mirror, pair.mirror())] {
        match base_candidate(&psi_k, psi, big_k, sings, &p) {
            Ok((phi, z)) if phi.is_positive() => return Ok((phi, orientation, z)),
            Ok((phi, _)) => notes.push(format!("{orientation:?} candidate {phi} is not positive")),
            Err(e) => notes.push(format!("{orientation:?}: {e}")),
        }
    }
    Err(ConditionFailure::new(Condition::Step3, notes.join("; ")))
}

/// Shared state of the induction loop.
#[derive(Clone, Debug)]
pub struct DecisionState {
    pub stage: usize,
    pub remainder: Endomorphism,
    pub pair: PermutationPair,
    pub sings: Vec<Singularity>,
    pub twists: Vec<ElementaryTwist>,
    pub depth: usize,
}

pub enum StepOutcome {
    Continue(DecisionState),
    Success(DecisionState),
    Rejected(ConditionFailure),
}

/// Steps (5)–(7) for one stage.
pub fn induction_step(mut st: DecisionState, log: &mut Vec<StageRecord>) -> StepOutcome {
    let alphabet = st.remainder.alphabet().clone();
    let (plus, minus) = build_graphs(&alphabet, &st.sings);
    let dist = match check_c33_c4(&plus, &minus, &st.pair, &st.sings) {
        Ok(d) => d,
        Err(f) => return StepOutcome::Rejected(f),
    };
    let sigma = edge_twist(&st.pair, dist.ty).expect("pair stays irreducible");
    log.push(StageRecord {
        stage: st.stage,
        pair: st.pair.to_string(),
        ty: dist.ty,
        twist: sigma.to_string(),
        remainder_length: st.remainder.total_image_length(),
        plus,
        minus,
    });
    let inv = Arc::new(sigma.inverse_endomorphism(&alphabet).expect("twist over the alphabet"));
    let remainder = Endomorphism::compose(&inv, &st.remainder).expect("same alphabet");
    st.twists.push(sigma);
    if remainder.is_identity() {
        st.remainder = remainder;
        st.stage += 1;
        return StepOutcome::Success(st);
    }
    if !remainder.is_positive() {
        return StepOutcome::Rejected(ConditionFailure::new(
            Condition::Step6,
            format!("remainder {remainder} is not positive"),
        ));
    }
    if remainder.total_image_length() >= st.remainder.total_image_length() {
        return StepOutcome::Rejected(ConditionFailure::new(Condition::Step6, "remainder did not get shorter"));
    }
    let mut sings = Vec::with_capacity(st.sings.len());
    for (j, s) in st.sings.iter().enumerate() {
        let mut s = s.clone();
        for p in &mut s.points {
            let moved = if j == dist.singularity {
                match dist.ty {
                    InductionType::Zero => p.point.shift(),
                    InductionType::One => p.point.unshift(),
                }
            } else {
                Ok(p.point.clone())
            };
            match moved.and_then(|q| q.transform(&inv)) {
                Ok(q) => p.point = q,
                Err(e) => {
                    return StepOutcome::Rejected(ConditionFailure::new(
                        Condition::C4,
                        format!("recoding singularity {j} failed: {e}"),
                    ))
                }
            }
        }
        if let Err(e) = s.rekey(st.depth) {
            return StepOutcome::Rejected(ConditionFailure::new(Condition::C4, format!("recoding failed: {e}")));
        }
        sings.push(s);
    }
    st.pair = induce_pair(&st.pair, dist.ty).expect("irreducible");
    st.sings = sings;
    st.remainder = remainder;
    st.stage += 1;
    StepOutcome::Continue(st)
}

/// Smallest `p` with `σ_{j+p} = σ_j` for all `j` and `π⁽ᵖ⁾ = π⁽⁰⁾`.
pub fn smallest_period(twists: &[ElementaryTwist], pairs: &[PermutationPair]) -> Option<usize> {
    (1..=twists.len()).find(|&p| pairs.get(p) == pairs.first() && (p..twists.len()).all(|j| twists[j] == twists[j - p]))
}

pub fn compose_twists(alphabet: &crate::words::Alphabet, twists: &[ElementaryTwist]) -> Endomorphism {
    twists.iter().fold(Endomorphism::identity(alphabet), |acc, t| {
        Endomorphism::compose(&acc, &t.to_endomorphism(alphabet).expect("twist over the alphabet"))
            .expect("same alphabet")
    })
}

fn detection_failure(e: Error) -> (&'static str, String) {
    match e {
        Error::DepthCap(_) => ("max-depth", e.to_string()),
        Error::Overflow(_) => ("overflow", e.to_string()),
        other => ("detection", other.to_string()),
    }
}

pub fn decide(psi: &Endomorphism, cfg: &DecideConfig) -> DecisionReport {
    let mut rep = DecisionReport::default();
    let n = psi.alphabet().len();
    let validation = psi.validate_positive_primitive();
    if let Some(why) = validation.failure() {
        return rep.reject(ConditionFailure::new(Condition::Positivity, why), 0);
    }
    let det: Detection = match detect_singularities(psi, &cfg.detect) {
        Ok(d) => d,
        Err(e) => {
            let (cap, detail) = detection_failure(e);
            return rep.inconclusive(cap, detail);
        }
    };
    rep.k = Some(det.k);
    rep.singularities = table(&det.singularities);
    rep.messages.extend(det.diagnostics.iter().cloned());
    if det.unproven_no_match > 0 {
        rep.messages.push(format!("{} development pairs exhausted the γ caps without meeting", det.unproven_no_match));
    }
    if !det.stable {
        return rep.inconclusive("k-max", "singularity grouping did not stabilize".into());
    }
    let sings = det.singularities;
    if let Err(f) = check_c1_c2(&sings, n) {
        return rep.reject(f, 0);
    }
    let (plus, minus) = build_graphs(psi.alphabet(), &sings);
    if !check_c31(&plus) || !check_c31(&minus) {
        return rep.reject(ConditionFailure::new(Condition::C31, "a singularity graph is not a path"), 0);
    }
    let pair = match derive_pair(&plus, &minus) {
        Ok(p) => p,
        Err(f) => return rep.reject(f, 0),
    };
    if !pair.is_irreducible() {
        return rep.reject(ConditionFailure::new(Condition::Reducible, format!("{pair} is reducible")), 0);
    }
    if let Err(f) = check_c33_c4(&plus, &minus, &pair, &sings) {
        return rep.reject(f, 0);
    }
    let (phi, orientation, z) = match base_automorphism(psi, det.k, &sings, &pair) {
        Ok(x) => x,
        Err(f) => {
            if det.k > 1 {
                rep.messages.push("higher multiples of k were not tried".into());
            }
            return rep.reject(f, 0);
        }
    };
    let pair = match orientation {
        Orientation::AsIs => pair,
        Orientation::Mirror => pair.mirror(),
    };
    match is_fixed_by(&z, &phi, cfg.c5_depth) {
        Ok(c) if c.fixed => rep.c5_depth = Some(c.depth),
        Ok(_) => return rep.reject(ConditionFailure::new(Condition::C5, "φ does not fix Z"), 0),
        Err(e) => return rep.reject(ConditionFailure::new(Condition::C5, e.to_string()), 0),
    }
    rep.phi = Some(phi.clone());
    rep.orientation = Some(orientation);
    rep.pair = Some(pair.clone());

    let cap = phi.total_image_length() - n + 1;
    let mut pairs = vec![pair.clone()];
    let mut st =
        DecisionState { stage: 0, remainder: phi.clone(), pair, sings, twists: Vec::new(), depth: cfg.detect.depth };
    let mut log = Vec::new();
    let done = loop {
        if st.stage >= cap {
            rep.stages = log;
            return rep.inconclusive("stage-cap", format!("no decision after {cap} stages"));
        }
        let stage = st.stage;
        match induction_step(st, &mut log) {
            StepOutcome::Continue(next) => {
                pairs.push(next.pair.clone());
                st = next;
            }
            StepOutcome::Success(s) => break s,
            StepOutcome::Rejected(f) => {
                rep.stages = log;
                return rep.reject(f, stage);
            }
        }
    };
    rep.stages = log;
    rep.twists = done.twists.clone();
    pairs.push(induce_pair(&done.pair, rep.stages.last().unwrap().ty).expect("irreducible"));
    rep.period = smallest_period(&done.twists, &pairs);
    rep.delta_automorphism = Some(match rep.period {
        Some(p) => compose_twists(psi.alphabet(), &done.twists[..p]),
        None => phi.clone(),
    });

    let m = match psi.power(det.k).and_then(|e| e.incidence_matrix()) {
        Ok(m) => m,
        Err(e) => return rep.inconclusive("overflow", e.to_string()),
    };
    match perron(&m, cfg.tol) {
        Ok(pr) => {
            rep.lambda = Some(pr.lambda.clone());
            rep.eta = Some(pr.eta);
            if cfg.verify {
                verify(psi, &mut rep, &pr.lambda, cfg);
            }
        }
        Err(e) => return rep.inconclusive("perron", e.to_string()),
    }
    rep.verdict = Some(Verdict::Accepted);
    rep
}

/// Numeric checks recorded in the report; they never change the verdict.
fn verify(psi: &Endomorphism, rep: &mut DecisionReport, lambda: &[f64], cfg: &DecideConfig) {
    let pair = rep.pair.clone().expect("pair on acceptance");
    let ciet = match Ciet::build(pair, lambda.to_vec()) {
        Ok(c) => c,
        Err(e) => {
            rep.messages.push(format!("numeric check skipped: {e}"));
            return;
        }
    };
    match detect_self_induction(&ciet, rep.twists.len().max(1) * 2, DEFAULT_TOL) {
        Ok(Some(si)) => {
            let p = rep.period.unwrap_or(rep.twists.len());
            rep.numeric_twists_agree = Some(si.twists[..] == rep.twists[..p.min(rep.twists.len())]);
        }
        Ok(None) => rep.numeric_twists_agree = Some(false),
        Err(e) => rep.messages.push(format!("numeric induction stopped: {e}")),
    }
    match cross_validate(psi, &ciet, cfg.verify_len, cfg.verify_depth) {
        Ok(cv) => rep.cross_validation = Some(cv),
        Err(e) => rep.messages.push(format!("cross-validation skipped: {e}")),
    }
}

#[derive(Serialize)]
struct PairJson {
    pi0: Vec<String>,
    pi1: Vec<String>,
}

#[derive(Serialize)]
struct DiagnosticsJson<'a> {
    messages: &'a [String],
    singularities: &'a [SingularityRow],
    stages: &'a [StageRecord],
    c5_depth: Option<usize>,
    numeric_twists_agree: Option<bool>,
    cross_validation: &'a Option<CrossValidation>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    verdict: &'static str,
    condition: Option<String>,
    stage: Option<usize>,
    k: Option<usize>,
    phi: Option<Vec<String>>,
    orientation: Option<Orientation>,
    pair: Option<PairJson>,
    lambda: Option<BTreeMap<String, f64>>,
    eta: Option<f64>,
    twists: Vec<String>,
    delta_automorphism: Option<Vec<String>>,
    period: Option<usize>,
    diagnostics: DiagnosticsJson<'a>,
}

fn letters(row: &str) -> Vec<String> {
    row.chars().map(String::from).collect()
}

impl DecisionReport {
    pub fn to_json(&self) -> serde_json::Value {
        let verdict = self.verdict();
        let (condition, stage) = match verdict {
            Verdict::Rejected { condition, stage } => (Some(condition.to_string()), Some(*stage)),
            Verdict::Inconclusive { cap } => (Some(cap.clone()), None),
            Verdict::Accepted => (None, None),
        };
        let lambda = match (&self.lambda, &self.pair) {
            (Some(l), Some(p)) => {
                Some(p.alphabet().symbols().iter().zip(l).map(|(c, x)| (c.to_string(), *x)).collect())
            }
            _ => None,
        };
        let json = ReportJson {
            verdict: verdict.name(),
            condition,
            stage,
            k: self.k,
            phi: self.phi.as_ref().map(Endomorphism::rules),
            orientation: self.orientation,
            pair: self.pair.as_ref().map(|p| PairJson { pi0: letters(&p.top_row()), pi1: letters(&p.bottom_row()) }),
            lambda,
            eta: self.eta,
            twists: self.twists.iter().map(|t| t.to_string()).collect(),
            delta_automorphism: self.delta_automorphism.as_ref().map(Endomorphism::rules),
            period: self.period,
            diagnostics: DiagnosticsJson {
                messages: &self.messages,
                singularities: &self.singularities,
                stages: &self.stages,
                c5_depth: self.c5_depth,
                numeric_twists_agree: self.numeric_twists_agree,
                cross_validation: &self.cross_validation,
            },
        };
        serde_json::to_value(json).expect("report serializes")
    }
}
