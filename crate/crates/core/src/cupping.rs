//! The anti-cupping machine Ψ, its trace, and its honest-function wrapper.
//!
//! Iteration `m` dovetails the honest associates `Φ̂_e(m)` for `e ∈ C` with
//! per-task budget `B(k, m)`. If one halts, every `(e, ℓ)` with `e ∈ C` and
//! `ℓ < m` is checked for removal and `M` absorbs the winner's output; if none
//! halts, `k` grows and the least index never yet in `C` joins it. `Ψ(m)` is
//! `M` after iteration `m`.

use std::cell::{Cell, RefCell};
use std::collections::BTreeSet;
use std::rc::Rc;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::honest::{EvalError, Evaluate, HonestFn, Point, Source};
use crate::hyperint::HyperInt;
use crate::machine::{DovetailOutcome, Enumeration, Formula, MachineError, MachineIndex, RunOutcome};
use crate::ordinals::{fund_seq, trans_iterate, trans_iterate_hyper, FundSource, IterBudget, OrdError, OrdinalCnf};
use crate::trace::{Fields, TraceRecord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PsiError {
    #[error("machine {e} exceeded the step cap at iteration {m}")]
    CapExceeded { e: MachineIndex, m: u64 },
    #[error("gamma diverges at {0}")]
    GammaDiverged(u64),
    #[error("schedule: {0}")]
    Schedule(String),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// `B(k, m) = 2_k^m`
    Tower,
    /// `B(k, m) = (m + 2)^k`
    Scaled,
    /// `B(k, m) = (2^x)_{α_k}(m)`
    Ordinal(FundSource),
}

impl Schedule {
    pub fn budget(&self, k: u64, m: u64) -> Result<HyperInt, PsiError> {
        match self {
            Schedule::Tower => Ok(HyperInt::tower(k, &HyperInt::from(m))),
            Schedule::Scaled => {
                let d = u32::try_from(k).map_err(|_| PsiError::Schedule(format!("k = {k}")))?;
                Ok(HyperInt::from(m + 2).pow_small(d).value)
            }
            Schedule::Ordinal(alpha) => {
                let ak = fund_seq(alpha, k).map_err(|e| PsiError::Schedule(e.to_string()))?;
                let pow2 = HonestFn::builtin("POW2", Formula::Pow2);
                trans_iterate(&pow2, &ak, m, IterBudget::default())
                    .map_err(|e| PsiError::Schedule(e.to_string()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IterateMode {
    /// `max[Ψ, Φ̂_e]^e`
    FinitePower,
    /// `max[Ψ, Φ̂_e]_{α_e}`
    OrdinalIterate(FundSource),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalStepMode {
    /// the whole iterate shares one budget of `m` steps
    TotalPerSide,
    /// every `Φ̂_e` evaluation inside the iterate gets its own `m` steps
    PerEvaluation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PsiConfig {
    pub gamma: MachineIndex,
    pub schedule: Schedule,
    pub iterate_mode: IterateMode,
    pub cap: u64,
    pub removal_step_mode: RemovalStepMode,
    /// sole member of `C` before iteration 0
    pub initial: MachineIndex,
}

impl PsiConfig {
    pub fn scaled(gamma: MachineIndex) -> Self {
        PsiConfig {
            gamma,
            schedule: Schedule::Scaled,
            iterate_mode: IterateMode::FinitePower,
            cap: crate::machine::DEFAULT_CAP,
            removal_step_mode: RemovalStepMode::TotalPerSide,
            initial: MachineIndex(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CheckOutcome {
    Halted { value: HyperInt, steps: HyperInt },
    TimedOut { spent: HyperInt },
    /// a produced number reached `m`
    Aborted { at: HyperInt, spent: HyperInt },
}

impl CheckOutcome {
    fn value(&self) -> Option<&HyperInt> {
        match self {
            CheckOutcome::Halted { value, .. } => Some(value),
            _ => None,
        }
    }

    fn spent(&self) -> &HyperInt {
        match self {
            CheckOutcome::Halted { steps, .. } => steps,
            CheckOutcome::TimedOut { spent } | CheckOutcome::Aborted { spent, .. } => spent,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TraceEvent {
    IterStart { m: u64, k: u64 },
    HaltObserved { m: u64, e: MachineIndex, value: HyperInt, steps: HyperInt, ties: usize },
    RemovalCheck { m: u64, e: MachineIndex, l: u64, gamma: CheckOutcome, iterate: CheckOutcome, removed: bool },
    Removal { m: u64, e: MachineIndex },
    ElseBranch { m: u64, k: u64, added: MachineIndex },
    MUpdate { m: u64, big_m: HyperInt },
    Output { m: u64, big_m: HyperInt },
}

impl TraceRecord for TraceEvent {
    fn kind(&self) -> &'static str {
        match self {
            TraceEvent::IterStart { .. } => "IterStart",
            TraceEvent::HaltObserved { .. } => "HaltObserved",
            TraceEvent::RemovalCheck { .. } => "RemovalCheck",
            TraceEvent::Removal { .. } => "Removal",
            TraceEvent::ElseBranch { .. } => "ElseBranch",
            TraceEvent::MUpdate { .. } => "MUpdate",
            TraceEvent::Output { .. } => "Output",
        }
    }

    fn fields(&self) -> Map<String, Value> {
        let f = Fields::new();
        match self {
            TraceEvent::IterStart { m, k } => f.put("m", m).put("k", k),
            TraceEvent::HaltObserved { m, e, value, steps, ties } => {
                f.put("m", m).put("e", e).put("value", value).put("steps", steps).put("ties", ties)
            }
            TraceEvent::RemovalCheck { m, e, l, gamma, iterate, removed } => f
                .put("m", m)
                .put("e", e)
                .put("l", l)
                .put("gamma", gamma)
                .put("iterate", iterate)
                .put("removed", removed),
            TraceEvent::Removal { m, e } => f.put("m", m).put("e", e),
            TraceEvent::ElseBranch { m, k, added } => f.put("m", m).put("k", k).put("e", added),
            TraceEvent::MUpdate { m, big_m } | TraceEvent::Output { m, big_m } => {
                f.put("m", m).put("M", big_m)
            }
        }
        .done()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PsiState {
    pub k: u64,
    #[serde(rename = "M")]
    pub big_m: HyperInt,
    /// insertion order
    pub c: Vec<MachineIndex>,
    pub ever_in_c: BTreeSet<MachineIndex>,
    pub removed: BTreeSet<MachineIndex>,
    /// `m_table[ℓ] = Ψ(ℓ)`
    pub m_table: Vec<HyperInt>,
    /// cumulative steps through iteration `ℓ`
    pub step_table: Vec<HyperInt>,
}

impl PsiState {
    fn initial(e: MachineIndex) -> Self {
        PsiState {
            k: 2,
            big_m: HyperInt::one(),
            c: vec![e],
            ever_in_c: BTreeSet::from([e]),
            removed: BTreeSet::new(),
            m_table: Vec::new(),
            step_table: Vec::new(),
        }
    }

    pub fn step_account(&self) -> HyperInt {
        self.step_table.last().cloned().unwrap_or_else(HyperInt::zero)
    }

    fn fresh_index(&self) -> MachineIndex {
        let mut i = 0;
        while self.ever_in_c.contains(&MachineIndex(i)) {
            i += 1;
        }
        MachineIndex(i)
    }
}

/// Ψ, resumable one iteration at a time.
pub struct PsiMachine {
    machines: Arc<Enumeration>,
    config: PsiConfig,
    state: PsiState,
    events: Vec<TraceEvent>,
}

/// `max[Ψ, Φ̂_e]` evaluated inside a removal check under an `m`-step budget.
/// Any produced number `>= m` aborts.
struct Probe<'a> {
    machines: &'a Enumeration,
    assoc: MachineIndex,
    table: &'a [HyperInt],
    m: u64,
    cap: u64,
    per_eval: bool,
    spent: Cell<u64>,
    stop: RefCell<Option<CheckOutcome>>,
}

impl Probe<'_> {
    fn fail(&self, outcome: CheckOutcome) -> EvalError {
        *self.stop.borrow_mut() = Some(outcome);
        EvalError::Aborted("removal check".into())
    }

    fn charge(&self, s: u64) -> Result<(), EvalError> {
        let total = self.spent.get().saturating_add(s);
        self.spent.set(total);
        if !self.per_eval && total > self.m {
            return Err(self.fail(CheckOutcome::TimedOut { spent: HyperInt::from(self.m) }));
        }
        Ok(())
    }

    fn spent(&self) -> HyperInt {
        HyperInt::from(self.spent.get())
    }
}

impl Evaluate for Probe<'_> {
    fn point(&self, x: u64) -> Result<Point, EvalError> {
        let psi = match self.table.get(x as usize) {
            Some(v) => v.clone(),
            None => return Err(self.fail(CheckOutcome::Aborted { at: HyperInt::from(x), spent: self.spent() })),
        };
        self.charge(1)?;
        let budget = if self.per_eval { self.m } else { self.m - self.spent.get() };
        let (output, steps) = match self.machines.run(self.assoc, x, &HyperInt::from(budget), self.cap)? {
            RunOutcome::Halted { output, steps } => (output, steps),
            RunOutcome::StillRunning { .. } => {
                let spent = if self.per_eval { self.spent.get().saturating_add(budget) } else { self.m };
                self.spent.set(spent);
                return Err(self.fail(CheckOutcome::TimedOut { spent: HyperInt::from(spent) }));
            }
        };
        self.charge(crate::machine::steps_u64(&steps).unwrap_or(u64::MAX))?;
        let value = HyperInt::max_h(&psi, &output);
        if value >= HyperInt::from(self.m) {
            return Err(self.fail(CheckOutcome::Aborted { at: value, spent: self.spent() }));
        }
        Ok(Point { value, cost: HyperInt::from(1) })
    }

    fn value_at_hyper(&self, x: &HyperInt) -> Result<HyperInt, EvalError> {
        match x.to_u64() {
            Some(n) => self.value_at(n),
            None => Err(self.fail(CheckOutcome::Aborted { at: x.clone(), spent: self.spent() })),
        }
    }

    fn label(&self) -> String {
        format!("max[psi, assoc({})]", self.assoc)
    }
}

impl PsiMachine {
    pub fn new(machines: Arc<Enumeration>, config: PsiConfig) -> Self {
        let state = PsiState::initial(config.initial);
        PsiMachine { machines, config, state, events: Vec::new() }
    }

    pub fn config(&self) -> &PsiConfig {
        &self.config
    }

    pub fn state(&self) -> &PsiState {
        &self.state
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    /// Number of completed iterations.
    pub fn completed(&self) -> u64 {
        self.state.m_table.len() as u64
    }

    /// Runs iterations until `Ψ(n)` is known.
    pub fn advance_to(&mut self, n: u64) -> Result<(), PsiError> {
        while self.completed() <= n {
            self.iterate_once()?;
        }
        Ok(())
    }

    fn cap_error(&self, err: MachineError, m: u64) -> PsiError {
        match err {
            MachineError::CapExceeded { index, .. } => {
                let e = self
                    .state
                    .c
                    .iter()
                    .copied()
                    .find(|e| *e == index || self.machines.associate_index(*e).ok() == Some(index))
                    .unwrap_or(index);
                PsiError::CapExceeded { e, m }
            }
            other => PsiError::Machine(other),
        }
    }

    fn iterate_once(&mut self) -> Result<(), PsiError> {
        let m = self.completed();
        self.events.push(TraceEvent::IterStart { m, k: self.state.k });
        let budget = self.config.schedule.budget(self.state.k, m)?;
        let tasks = self
            .state
            .c
            .iter()
            .map(|e| Ok((self.machines.associate_index(*e)?, m)))
            .collect::<Result<Vec<_>, MachineError>>()?;
        let outcome = self
            .machines
            .dovetail(&tasks, &budget, self.config.cap)
            .map_err(|err| self.cap_error(err, m))?;
        let mut spent = HyperInt::one();
        let pow2m = HyperInt::pow2(m);
        match outcome {
            DovetailOutcome::FirstHalt { position, output, steps, ties, quanta, .. } => {
                spent = HyperInt::add_saturating(&spent, &quanta).value;
                let winner = self.state.c[position];
                self.events.push(TraceEvent::HaltObserved { m, e: winner, value: output.clone(), steps, ties });
                let snapshot = self.state.c.clone();
                let mut doomed = Vec::new();
                for e in snapshot {
                    for l in 0..m {
                        let (gamma, iterate) = self.removal_check(e, l, m)?;
                        spent = HyperInt::add_saturating(&spent, gamma.spent()).value;
                        spent = HyperInt::add_saturating(&spent, iterate.spent()).value;
                        let removed = match (gamma.value(), iterate.value()) {
                            (Some(g), Some(v)) => v < g,
                            _ => false,
                        };
                        self.events.push(TraceEvent::RemovalCheck { m, e, l, gamma, iterate, removed });
                        if removed && !doomed.contains(&e) {
                            doomed.push(e);
                        }
                    }
                }
                for e in doomed {
                    self.state.c.retain(|x| *x != e);
                    self.state.removed.insert(e);
                    self.events.push(TraceEvent::Removal { m, e });
                }
                let big_m = HyperInt::max_h(&HyperInt::max_h(&self.state.big_m, &output), &pow2m);
                self.state.big_m = big_m;
            }
            DovetailOutcome::NoneHalted { quanta } => {
                spent = HyperInt::add_saturating(&spent, &quanta).value;
                self.state.k += 1;
                let added = self.state.fresh_index();
                self.state.c.push(added);
                self.state.ever_in_c.insert(added);
                self.events.push(TraceEvent::ElseBranch { m, k: self.state.k, added });
                let b = self.config.schedule.budget(self.state.k, m)?;
                self.state.big_m = HyperInt::max_h(&HyperInt::max_h(&self.state.big_m, &b), &pow2m);
            }
        }
        let big_m = self.state.big_m.clone();
        self.events.push(TraceEvent::MUpdate { m, big_m: big_m.clone() });
        spent = HyperInt::add_saturating(&spent, &HyperInt::one()).value;
        let total = HyperInt::add_saturating(&self.state.step_account(), &spent).value;
        self.state.step_table.push(total);
        self.state.m_table.push(big_m.clone());
        self.events.push(TraceEvent::Output { m, big_m });
        Ok(())
    }

    /// Runs `Γ(ℓ)` and the iterate for `m` steps each.
    fn removal_check(&self, e: MachineIndex, l: u64, m: u64) -> Result<(CheckOutcome, CheckOutcome), PsiError> {
        let gamma = self.config.gamma;
        if self.machines.declared_divergent(gamma, l) {
            return Err(PsiError::GammaDiverged(l));
        }
        let gamma_outcome = match self
            .machines
            .run(gamma, l, &HyperInt::from(m), self.config.cap)
            .map_err(|err| self.cap_error(err, m))?
        {
            RunOutcome::Halted { output, steps } => CheckOutcome::Halted { value: output, steps },
            RunOutcome::StillRunning { spent } => CheckOutcome::TimedOut { spent },
        };
        let probe = Probe {
            machines: &self.machines,
            assoc: self.machines.associate_index(e)?,
            table: &self.state.m_table,
            m,
            cap: self.config.cap,
            per_eval: self.config.removal_step_mode == RemovalStepMode::PerEvaluation,
            spent: Cell::new(0),
            stop: RefCell::new(None),
        };
        let result: Result<HyperInt, OrdError> = match &self.config.iterate_mode {
            IterateMode::FinitePower => {
                let mut v = HyperInt::from(l);
                let mut i = 0;
                // values strictly increase, so at most m rounds precede an abort
                loop {
                    if i == e.0 {
                        break Ok(v);
                    }
                    match probe.value_at_hyper(&v) {
                        Ok(w) => v = w,
                        Err(err) => break Err(err.into()),
                    }
                    i += 1;
                }
            }
            IterateMode::OrdinalIterate(alpha) => {
                let ae: OrdinalCnf = fund_seq(alpha, e.0).map_err(|err| PsiError::Schedule(err.to_string()))?;
                let budget = IterBudget { max_recursion_nodes: m.max(1), max_value_bits: 64 };
                trans_iterate_hyper(&probe, &ae, &HyperInt::from(l), budget)
            }
        };
        let iterate_outcome = match result {
            Ok(value) => CheckOutcome::Halted { value, steps: probe.spent() },
            Err(OrdError::Eval(EvalError::Machine(err))) => return Err(self.cap_error(err, m)),
            Err(OrdError::Eval(EvalError::Aborted(_))) => probe.stop.borrow().clone().expect("abort recorded"),
            Err(OrdError::BudgetExhausted { .. }) => CheckOutcome::TimedOut { spent: probe.spent() },
            Err(_) => CheckOutcome::Aborted { at: HyperInt::from(m), spent: probe.spent() },
        };
        Ok((gamma_outcome, iterate_outcome))
    }

    pub fn into_parts(self) -> (Vec<TraceEvent>, PsiState) {
        (self.events, self.state)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PsiRun {
    #[serde(rename = "M")]
    pub big_m: HyperInt,
    pub trace: Vec<TraceEvent>,
    pub state: PsiState,
}

/// Iterations `0..=n`.
pub fn psi_run(machines: Arc<Enumeration>, config: PsiConfig, n: u64) -> Result<PsiRun, PsiError> {
    let mut psi = PsiMachine::new(machines, config);
    psi.advance_to(n)?;
    let (trace, state) = psi.into_parts();
    Ok(PsiRun { big_m: state.m_table[n as usize].clone(), trace, state })
}

/// Backing store of the Ψ handle: iterations already run are reused.
pub struct PsiSource {
    machine: RefCell<PsiMachine>,
}

impl PsiSource {
    pub fn new(machines: Arc<Enumeration>, config: PsiConfig) -> Self {
        PsiSource { machine: RefCell::new(PsiMachine::new(machines, config)) }
    }

    pub fn point(&self, n: u64) -> Result<Point, EvalError> {
        let mut psi = self.machine.borrow_mut();
        psi.advance_to(n)?;
        let state = psi.state();
        Ok(Point { value: state.m_table[n as usize].clone(), cost: state.step_table[n as usize].clone() })
    }

    pub fn events(&self) -> Vec<TraceEvent> {
        self.machine.borrow().events().to_vec()
    }
}

/// `Ψ` as a function handle whose cost is the step account.
pub fn psi_as_honest_fn(machines: Arc<Enumeration>, config: PsiConfig) -> HonestFn {
    HonestFn::new("psi", Source::Psi(PsiSource::new(machines, config)), true)
}

/// `min[x, b]`, the `a` of the cap trick.
pub fn cap_witness_config(x: Rc<HonestFn>, b: Rc<HonestFn>) -> HonestFn {
    crate::lattice::cap_witness(x, b)
}
