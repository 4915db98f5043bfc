//! Command-line front end: substitution files, subcommands, JSON output.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::decision::{decide, DecideConfig, Verdict};
use crate::error::{Error, Result};
use crate::numeric::{cross_validate, induction_trajectory, Ciet};
use crate::prefix_suffix::detect_singularities;
use crate::rauzy::{enumerate_class, PermutationPair};
use crate::words::{Alphabet, ReducedWord};
use crate::Endomorphism;

pub const EXIT_ACCEPTED: u8 = 0;
pub const EXIT_REJECTED: u8 = 1;
pub const EXIT_INCONCLUSIVE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;

/// A parsed substitution file.
#[derive(Clone, Debug, PartialEq)]
pub struct InputSpec {
    /// Rule heads in order of first appearance.
    pub alphabet: Alphabet,
    pub rules: Vec<(char, ReducedWord)>,
}

impl InputSpec {
    pub fn endomorphism(&self) -> Result<Endomorphism> {
        Endomorphism::new(self.alphabet.clone(), self.rules.iter().map(|r| r.1.clone()).collect())
    }
}

/// Parses `x -> word` lines; `#` starts a comment.
pub fn parse_input(text: &str) -> Result<InputSpec> {
    let mut heads: Vec<(usize, char, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let (lhs, rhs) = line.split_once("->").ok_or_else(|| err("expected `x -> word`".into()))?;
        let mut lhs_chars = lhs.trim().chars();
        let head = match (lhs_chars.next(), lhs_chars.next()) {
            (Some(c), None) => c,
            _ => return Err(err(format!("rule head {:?} is not a single symbol", lhs.trim()))),
        };
        if heads.iter().any(|h| h.1 == head) {
            return Err(err(format!("duplicate rule for '{head}'")));
        }
        let rhs = rhs.trim();
        if rhs.is_empty() {
            return Err(err(format!("empty image for '{head}'")));
        }
        if let Some(c) = rhs.chars().find(|c| c.is_whitespace()) {
            return Err(err(format!("unexpected {c:?} in image of '{head}'")));
        }
        heads.push((line_no, head, rhs));
    }
    if heads.len() < 2 {
        return Err(Error::Input(format!("need at least 2 rules, found {}", heads.len())));
    }
    let alphabet = Alphabet::new(heads.iter().map(|h| h.1))?;
    let mut rules = Vec::with_capacity(heads.len());
    for &(line, head, rhs) in &heads {
        if let Some(c) = rhs.chars().find(|&c| !alphabet.contains(c)) {
            return Err(Error::Parse { line, msg: format!("unknown symbol '{c}' in image of '{head}'") });
        }
        rules.push((head, ReducedWord::positive(rhs)));
    }
    Ok(InputSpec { alphabet, rules })
}

#[derive(Parser, Debug)]
#[command(
    name = "ciet",
    version,
    about = "Decide whether a positive automorphism comes from a self-induced interval exchange"
)]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Largest prefix length computed for a boundary point.
    #[arg(long, global = true)]
    pub max_depth: Option<usize>,
    /// Iteration cap of the γ orbits in pair matching.
    #[arg(long, global = true)]
    pub gamma_cap: Option<usize>,
    /// Largest development power tried.
    #[arg(long, global = true)]
    pub k_max: Option<usize>,
    /// Numeric tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Skip the numeric cross-checks after acceptance.
    #[arg(long, global = true)]
    pub no_verify: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the full decision procedure on a substitution file.
    Decide { file: PathBuf },
    /// Print the singularity table.
    Singularities { file: PathBuf },
    /// Enumerate the Rauzy class of a pair such as `abcd/dacb`.
    RauzyClass {
        #[arg(long)]
        pair: String,
    },
    /// Numeric Rauzy induction; lengths are listed in alphabetical letter order.
    Simulate {
        #[arg(long)]
        pair: String,
        #[arg(long)]
        lengths: String,
        #[arg(long)]
        steps: usize,
    },
    /// Decide, then compare factor sets with the interval exchange coding.
    Verify { file: PathBuf },
}

/// Exit code and stdout of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: u8,
    pub report: Value,
    pub diagnostics: Vec<String>,
}

pub fn exit_code(v: &Verdict) -> u8 {
    match v {
        Verdict::Accepted => EXIT_ACCEPTED,
        Verdict::Rejected { .. } => EXIT_REJECTED,
        Verdict::Inconclusive { .. } => EXIT_INCONCLUSIVE,
    }
}

impl GlobalOpts {
    pub fn decide_config(&self) -> DecideConfig {
        let mut cfg = DecideConfig::default();
        if let Some(d) = self.max_depth {
            cfg.detect.depth_cap = d;
        }
        if let Some(g) = self.gamma_cap {
            cfg.detect.gamma_iterations = g;
        }
        cfg.detect.k_max = self.k_max.or(cfg.detect.k_max);
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        cfg.verify = !self.no_verify;
        cfg
    }
}

fn load(file: &PathBuf) -> Result<Endomorphism> {
    let text = fs::read_to_string(file).map_err(|e| Error::Input(format!("{}: {e}", file.display())))?;
    parse_input(&text)?.endomorphism()
}

fn parse_lengths(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| Error::Input(format!("bad length {x:?}: {e}")))).collect()
}

pub fn run(cli: &Cli) -> Outcome {
    match dispatch(cli) {
        Ok(o) => o,
        Err(e) => Outcome {
            code: EXIT_INPUT,
            report: json!({ "verdict": "input-error", "error": e.to_string() }),
            diagnostics: vec![e.to_string()],
        },
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Decide { file } => {
            let rep = decide(&load(file)?, &opts.decide_config());
            Ok(Outcome { code: exit_code(rep.verdict()), report: rep.to_json(), diagnostics: rep.messages.clone() })
        }
        Command::Verify { file } => {
            let psi = load(file)?;
            let mut cfg = opts.decide_config();
            cfg.verify = false;
            let rep = decide(&psi, &cfg);
            let mut report = rep.to_json();
            let mut code = exit_code(rep.verdict());
            if let (Some(pair), Some(lambda)) = (&rep.pair, &rep.lambda) {
                let c = Ciet::build(pair.clone(), lambda.clone())?;
                let cv = cross_validate(&psi, &c, cfg.verify_len, cfg.verify_depth)?;
                if !cv.matched {
                    code = EXIT_REJECTED;
                }
                report["cross_validation"] = serde_json::to_value(cv).expect("serializable");
            }
            Ok(Outcome { code, report, diagnostics: rep.messages.clone() })
        }
        Command::Singularities { file } => {
            let psi = load(file)?;
            let det = match detect_singularities(&psi, &opts.decide_config().detect) {
                Ok(d) => d,
                Err(e) => {
                    return Ok(Outcome {
                        code: EXIT_INCONCLUSIVE,
                        report: json!({ "verdict": "inconclusive", "error": e.to_string() }),
                        diagnostics: vec![e.to_string()],
                    })
                }
            };
            let sings: Vec<Value> = det
                .singularities
                .iter()
                .map(|s| {
                    let points: Vec<Value> = s
                        .points
                        .iter()
                        .map(|p| {
                            json!({
                                "origins": p.origins,
                                "first_letters": [
                                    p.key.u.first().map(|l| l.to_string()),
                                    p.key.v.first().map(|l| l.to_string()),
                                ],
                                "u": p.key.u.prefix(12).to_string(),
                                "v": p.key.v.prefix(12).to_string(),
                            })
                        })
                        .collect();
                    json!({ "kind": s.kind, "k": s.fixing.k, "w": s.fixing.w.to_string(), "points": points })
                })
                .collect();
            let report = json!({
                "k": det.k,
                "search_power": det.search_power,
                "stable": det.stable,
                "count": det.singularities.len(),
                "singularities": sings,
            });
            Ok(Outcome { code: EXIT_ACCEPTED, report, diagnostics: det.diagnostics })
        }
        Command::RauzyClass { pair } => {
            let class = enumerate_class(&PermutationPair::parse(pair)?)?;
            let nodes: Vec<String> = class.nodes.iter().map(|p| p.to_string()).collect();
            let edges: Vec<Value> = class
                .edges
                .iter()
                .map(|e| json!({ "from": nodes[e.from], "type": e.ty.as_u8(), "to": nodes[e.to], "twist": e.twist.to_string() }))
                .collect();
            Ok(Outcome { code: EXIT_ACCEPTED, report: json!({ "nodes": nodes, "edges": edges }), diagnostics: vec![] })
        }
        Command::Simulate { pair, lengths, steps } => {
            let c = Ciet::build(PermutationPair::parse(pair)?, parse_lengths(lengths)?)?;
            let tol = opts.tol.unwrap_or(crate::numeric::DEFAULT_TOL);
            let traj = match induction_trajectory(&c, *steps, tol) {
                Ok(t) => t,
                Err(e) => {
                    return Ok(Outcome {
                        code: EXIT_INCONCLUSIVE,
                        report: json!({ "verdict": "inconclusive", "error": e.to_string() }),
                        diagnostics: vec![e.to_string()],
                    })
                }
            };
            let rows: Vec<Value> = traj
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    json!({
                        "step": i + 1,
                        "type": s.ty.as_u8(),
                        "twist": s.twist.to_string(),
                        "pair": s.ciet.pair().to_string(),
                        "lengths": s.ciet.lengths(),
                    })
                })
                .collect();
            let last = traj.last().map_or(&c, |s| &s.ciet);
            let report = json!({
                "initial": { "pair": c.pair().to_string(), "lengths": c.lengths() },
                "steps": rows,
                "final": { "pair": last.pair().to_string(), "lengths": last.lengths() },
            });
            Ok(Outcome { code: EXIT_ACCEPTED, report, diagnostics: vec![] })
        }
    }
}

/// Indented `key: value` rendering of a JSON document.
pub fn render_pretty(v: &Value) -> String {
    let mut out = String::new();
    render(v, 0, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::String(s) => Some(s.clone()),
        Value::Bool(_) | Value::Number(_) => Some(v.to_string()),
        Value::Array(a)
            if a.iter().all(|x| matches!(x, Value::Number(_)) || x.as_str().is_some_and(|s| !s.contains(' '))) =>
        {
            Some(a.iter().map(|x| scalar(x).unwrap()).collect::<Vec<_>>().join(" "))
        }
        _ => None,
    }
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render(x, indent + 1, out);
                    }
                }
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}[{i}]\n"));
                        render(x, indent + 1, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}

/// Serialized stdout for an outcome.
pub fn render_outcome(o: &Outcome, pretty: bool) -> String {
    if pretty {
        render_pretty(&o.report)
    } else {
        let mut s = serde_json::to_string(&o.report).expect("serializable");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rule_file() {
        let text = "# psi\na -> bdacda\nb -> bdbda\nc -> ccda  # trailing\nd -> cda\n";
        let spec = parse_input(text).unwrap();
        assert_eq!(spec.alphabet.symbols(), ['a', 'b', 'c', 'd']);
        assert_eq!(spec.endomorphism().unwrap().rules(), ["a->bdacda", "b->bdbda", "c->ccda", "d->cda"]);
    }

    #[test]
    fn alphabet_follows_first_appearance() {
        let spec = parse_input("b -> a\na -> ab").unwrap();
        assert_eq!(spec.alphabet.symbols(), ['b', 'a']);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_input("a -> ab"), Err(Error::Input(_))));
        assert!(matches!(parse_input("a -> ab\nb -> a\na -> b"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_input("a -> ab\nb -> \n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_input("a -> ax\nb -> a"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_input("a = ab\nb -> a"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn exit_codes_follow_verdicts() {
        assert_eq!(exit_code(&Verdict::Accepted), 0);
        assert_eq!(exit_code(&Verdict::Rejected { condition: crate::singularity_graphs::Condition::C1, stage: 0 }), 1);
        assert_eq!(exit_code(&Verdict::Inconclusive { cap: "k-max".into() }), 2);
    }

    #[test]
    fn simulate_mirror_example() {
        let cli = Cli::parse_from([
            "ciet",
            "simulate",
            "--pair",
            "abc/cab",
            "--lengths",
            "6.464,3.732,7.464",
            "--steps",
            "5",
        ]);
        let o = run(&cli);
        assert_eq!(o.code, 0);
        assert_eq!(o.report["final"]["pair"], "abc/cab");
        let eta = 2.0 + 3f64.sqrt();
        let fin = o.report["final"]["lengths"].as_array().unwrap();
        for (x, y) in fin.iter().zip([6.464, 3.732, 7.464]) {
            assert!((x.as_f64().unwrap() - y / eta).abs() < 1e-3);
        }
    }

    #[test]
    fn pretty_rendering_is_line_based() {
        let s = render_pretty(&json!({ "verdict": "accepted", "pair": { "pi0": ["a", "b"] } }));
        assert_eq!(s, "pair:\n  pi0: a b\nverdict: accepted\n");
    }
}
