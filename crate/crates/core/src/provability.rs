//! The provability-side machines run against mock oracles: the auxiliary
//! machine `A^η_C` and the Ψ-T main loop driven by a proof-event stream.
//!
//! A number `t` witnesses `¬π` for a Π₁ sentence `π` once `t` passes the
//! least counterexample; the mock records that point as `negwitness`. True
//! sentences are never witnessed negative.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::hyperint::HyperInt;
use crate::machine::{Enumeration, MachineError, MachineIndex, RunOutcome};
use crate::trace::{Fields, TraceRecord};

/// Identifier of the canonical true sentence.
pub const TRUE_SENTENCE: &str = "0=0";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProvError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Machine(#[from] MachineError),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct SentenceId(pub String);

impl SentenceId {
    pub fn new(s: impl Into<String>) -> Self {
        SentenceId(s.into())
    }

    pub fn canonical_true() -> Self {
        SentenceId::new(TRUE_SENTENCE)
    }
}

impl fmt::Display for SentenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub trait Pi1Oracle {
    /// Whether `t` witnesses `¬s`. Monotone in `t`.
    fn witnesses_neg(&self, s: &SentenceId, t: u64) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MockSentence {
    pub truth: bool,
    /// least `t` witnessing the negation; `None` exactly for true sentences
    pub neg_witness: Option<u64>,
}

/// How the reserved machine `SELF` behaves under this mock.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfBehavior {
    Total,
    /// diverges on inputs `>= n`
    PartialFrom(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MockTheory {
    pub sentences: BTreeMap<SentenceId, MockSentence>,
    pub self_behavior: SelfBehavior,
}

impl Default for MockTheory {
    fn default() -> Self {
        let mut sentences = BTreeMap::new();
        sentences.insert(SentenceId::canonical_true(), MockSentence { truth: true, neg_witness: None });
        MockTheory { sentences, self_behavior: SelfBehavior::Total }
    }
}

impl MockTheory {
    pub fn insert(&mut self, id: SentenceId, truth: bool, neg_witness: Option<u64>) {
        let neg_witness = if truth { None } else { Some(neg_witness.unwrap_or(0)) };
        self.sentences.insert(id, MockSentence { truth, neg_witness });
    }

    pub fn is_true(&self, s: &SentenceId) -> Option<bool> {
        self.sentences.get(s).map(|m| m.truth)
    }

    /// Lines `sentence <id> true|false [negwitness <t>]` and
    /// `self total|partial <n>`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ProvError> {
        let mut theory = MockTheory::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: &str| ProvError::Parse { line, msg: msg.to_string() };
            let words: Vec<&str> = raw.split('#').next().unwrap().split_whitespace().collect();
            match words.as_slice() {
                [] => {}
                ["sentence", id, truth, rest @ ..] => {
                    let truth = match *truth {
                        "true" => true,
                        "false" => false,
                        _ => return Err(err("truth must be `true` or `false`")),
                    };
                    let neg = match rest {
                        [] => None,
                        ["negwitness", t] => Some(t.parse::<u64>().map_err(|_| err("bad witness"))?),
                        _ => return Err(err("expected `negwitness <t>`")),
                    };
                    if truth && neg.is_some() {
                        return Err(err("a true sentence has no negative witness"));
                    }
                    if *id == TRUE_SENTENCE && !truth {
                        return Err(err("`0=0` is reserved as true"));
                    }
                    theory.insert(SentenceId::new(*id), truth, neg);
                }
                ["self", "total"] => theory.self_behavior = SelfBehavior::Total,
                ["self", "partial", n] => {
                    theory.self_behavior = SelfBehavior::PartialFrom(n.parse().map_err(|_| err("bad bound"))?)
                }
                _ => return Err(err("unrecognized line")),
            }
        }
        Ok(theory)
    }
}

impl Pi1Oracle for MockTheory {
    fn witnesses_neg(&self, s: &SentenceId, t: u64) -> bool {
        matches!(self.sentences.get(s), Some(MockSentence { neg_witness: Some(w), .. }) if t >= *w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum MachineRef {
    Index(MachineIndex),
    /// the running Ψ itself, resolved by the mock
    SelfRef,
}

impl fmt::Display for MachineRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MachineRef::Index(e) => write!(f, "{e}"),
            MachineRef::SelfRef => f.write_str("SELF"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ProofEvent {
    /// `T + π ⊢ (tot(Φ_e) ∧ tot(Ψ)) → tot(Γ)`
    CupProof { pi: SentenceId, e: MachineRef },
    /// `T + η ⊢ tot(Ψ) ∨ tot(Γ)`
    DisjProof { eta: SentenceId },
    Nothing,
}

/// Proof events by position; positions not listed hold `Nothing`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ProofStream {
    pub events: BTreeMap<u64, ProofEvent>,
}

impl ProofStream {
    pub fn at(&self, p: u64) -> ProofEvent {
        self.events.get(&p).cloned().unwrap_or(ProofEvent::Nothing)
    }

    /// Lines `proof <p> cup <pi> <e>` and `proof <p> disj <eta>`, where `<e>`
    /// is an index, a builtin name or `SELF`.
    pub fn parse(text: &str, machines: &Enumeration) -> Result<Self, ProvError> {
        let mut stream = ProofStream::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: &str| ProvError::Parse { line, msg: msg.to_string() };
            let words: Vec<&str> = raw.split('#').next().unwrap().split_whitespace().collect();
            let (p, event) = match words.as_slice() {
                [] => continue,
                ["proof", p, "cup", pi, e] => {
                    let e = match *e {
                        "SELF" => MachineRef::SelfRef,
                        other => MachineRef::Index(machines.resolve(other).map_err(|m| err(&m.to_string()))?),
                    };
                    (p, ProofEvent::CupProof { pi: SentenceId::new(*pi), e })
                }
                ["proof", p, "disj", eta] => (p, ProofEvent::DisjProof { eta: SentenceId::new(*eta) }),
                _ => return Err(err("unrecognized line")),
            };
            let p: u64 = p.parse().map_err(|_| err("bad proof position"))?;
            if stream.events.insert(p, event).is_some() {
                return Err(err("duplicate proof position"));
            }
        }
        Ok(stream)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AOutcome {
    Halted(u64),
    ExceededHorizon,
}

/// Total steps of `Φ_e` on `0..=s` if all of them halt within `horizon`
/// steps altogether.
fn cumulative_steps(
    machines: &Enumeration,
    theory: &MockTheory,
    e: MachineRef,
    s: u64,
    horizon: u64,
    cap: u64,
) -> Result<Option<u64>, MachineError> {
    match e {
        MachineRef::SelfRef => Ok(match theory.self_behavior {
            SelfBehavior::Total => Some(s + 1),
            SelfBehavior::PartialFrom(n) if s < n => Some(s + 1),
            SelfBehavior::PartialFrom(_) => None,
        }
        .filter(|steps| *steps <= horizon)),
        MachineRef::Index(e) => {
            let hat = machines.hat_index(e)?;
            Ok(match machines.run(hat, s, &HyperInt::from(horizon), cap)? {
                RunOutcome::Halted { steps, .. } => crate::machine::steps_u64(&steps),
                RunOutcome::StillRunning { .. } => None,
            })
        }
    }
}

/// `A^η_C(s)`: the least `t >= s` (up to `horizon`) at which `t` witnesses
/// `¬η`, or some `(π, e) ∈ C` has `Φ_e` halting on `0..=s` within `t` steps
/// while `t` does not witness `¬π`.
pub fn a_machine_run(
    eta: &SentenceId,
    c: &[(SentenceId, MachineRef)],
    s: u64,
    theory: &MockTheory,
    horizon: u64,
    machines: &Enumeration,
    cap: u64,
) -> Result<AOutcome, MachineError> {
    let mut halting = Vec::with_capacity(c.len());
    for (pi, e) in c {
        halting.push((pi, cumulative_steps(machines, theory, *e, s, horizon, cap)?));
    }
    for t in s..=horizon {
        if theory.witnesses_neg(eta, t) {
            return Ok(AOutcome::Halted(t));
        }
        let fires = halting
            .iter()
            .any(|(pi, steps)| matches!(steps, Some(st) if *st <= t) && !theory.witnesses_neg(pi, t));
        if fires {
            return Ok(AOutcome::Halted(t));
        }
    }
    Ok(AOutcome::ExceededHorizon)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum PsiTEvent {
    RunAEnter { m: u64, eta: SentenceId },
    AHalt { m: u64, t: u64 },
    RunAExit { m: u64 },
    RunAReset { m: u64 },
    CAdd { m: u64, p: u64, pi: SentenceId, e: MachineRef },
    EtaSet { m: u64, p: u64, eta: SentenceId },
    PAdvance { m: u64, p: u64 },
}

impl TraceRecord for PsiTEvent {
    fn kind(&self) -> &'static str {
        match self {
            PsiTEvent::RunAEnter { .. } => "RunAEnter",
            PsiTEvent::AHalt { .. } => "AHalt",
            PsiTEvent::RunAExit { .. } => "RunAExit",
            PsiTEvent::RunAReset { .. } => "RunAReset",
            PsiTEvent::CAdd { .. } => "CAdd",
            PsiTEvent::EtaSet { .. } => "EtaSet",
            PsiTEvent::PAdvance { .. } => "pAdvance",
        }
    }

    fn fields(&self) -> Map<String, Value> {
        let f = Fields::new();
        match self {
            PsiTEvent::RunAEnter { m, eta } => f.put("m", m).put("eta", eta),
            PsiTEvent::AHalt { m, t } => f.put("m", m).put("t", t),
            PsiTEvent::RunAExit { m } | PsiTEvent::RunAReset { m } => f.put("m", m),
            PsiTEvent::CAdd { m, p, pi, e } => f.put("m", m).put("p", p).put("pi", pi).put("e", e.to_string()),
            PsiTEvent::EtaSet { m, p, eta } => f.put("m", m).put("p", p).put("eta", eta),
            PsiTEvent::PAdvance { m, p } => f.put("m", m).put("p", p),
        }
        .done()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PsiTState {
    pub run_a: bool,
    pub c: Vec<(SentenceId, MachineRef)>,
    pub p: u64,
    pub eta: SentenceId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum PsiTOutcome {
    /// output 0 after iteration `s`
    Halted,
    ExceededHorizon { m: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PsiTRun {
    pub outcome: PsiTOutcome,
    pub trace: Vec<PsiTEvent>,
    pub state: PsiTState,
}

/// The Ψ-T main loop over `m <= s`.
pub fn psi_t_run(
    stream: &ProofStream,
    theory: &MockTheory,
    s: u64,
    horizon: u64,
    machines: &Enumeration,
    cap: u64,
) -> Result<PsiTRun, MachineError> {
    let mut state = PsiTState { run_a: false, c: Vec::new(), p: 0, eta: SentenceId::canonical_true() };
    let mut trace = Vec::new();
    for m in 0..=s {
        if state.run_a && !theory.witnesses_neg(&state.eta, m) {
            trace.push(PsiTEvent::RunAEnter { m, eta: state.eta.clone() });
            match a_machine_run(&state.eta, &state.c, m, theory, horizon, machines, cap)? {
                AOutcome::Halted(t) => trace.push(PsiTEvent::AHalt { m, t }),
                AOutcome::ExceededHorizon => {
                    return Ok(PsiTRun { outcome: PsiTOutcome::ExceededHorizon { m }, trace, state });
                }
            }
            trace.push(PsiTEvent::RunAExit { m });
            continue;
        }
        if state.run_a {
            state.run_a = false;
            trace.push(PsiTEvent::RunAReset { m });
        }
        match stream.at(state.p) {
            ProofEvent::CupProof { pi, e } => {
                trace.push(PsiTEvent::CAdd { m, p: state.p, pi: pi.clone(), e });
                if !state.c.contains(&(pi.clone(), e)) {
                    state.c.push((pi, e));
                }
            }
            ProofEvent::DisjProof { eta } => {
                trace.push(PsiTEvent::EtaSet { m, p: state.p, eta: eta.clone() });
                state.eta = eta;
                state.run_a = true;
            }
            ProofEvent::Nothing => {}
        }
        state.p += 1;
        trace.push(PsiTEvent::PAdvance { m, p: state.p });
    }
    Ok(PsiTRun { outcome: PsiTOutcome::Halted, trace, state })
}

/// Converges on `n` when both machines do.
pub fn prov_join(machines: &Enumeration, a: MachineIndex, b: MachineIndex) -> Result<MachineIndex, MachineError> {
    machines.both_index(a, b)
}

/// Converges on `n` when either machine does.
pub fn prov_meet(machines: &Enumeration, a: MachineIndex, b: MachineIndex) -> Result<MachineIndex, MachineError> {
    machines.either_index(a, b)
}
