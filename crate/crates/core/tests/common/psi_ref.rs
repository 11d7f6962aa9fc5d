use std::sync::Arc;

use nocup::cupping::{CheckOutcome, IterateMode, PsiConfig, RemovalStepMode, TraceEvent};
use nocup::hyperint::HyperInt;
use nocup::machine::{DovetailOutcome, Enumeration, MachineIndex, RegisterProgram, RunOutcome};

pub fn machines() -> Arc<Enumeration> {
    Arc::new(Enumeration::default())
}

pub fn looping_index(m: &Enumeration) -> MachineIndex {
    let p: RegisterProgram = "DECJZ 0 0".parse().unwrap();
    m.program_index(&p).unwrap()
}

/// The three configurations used for reference comparison.
pub fn fixtures(m: &Enumeration) -> Vec<(&'static str, PsiConfig)> {
    let diag = m.builtin_named("TOWERDIAG").unwrap();
    let mut looping = PsiConfig::scaled(diag);
    looping.initial = looping_index(m);
    let mut per_eval = PsiConfig::scaled(m.builtin_named("TOWER_2").unwrap());
    per_eval.initial = m.builtin_named("SUCC").unwrap();
    per_eval.removal_step_mode = RemovalStepMode::PerEvaluation;
    vec![("diag-zero", PsiConfig::scaled(diag)), ("diag-looping", looping), ("tower2-succ-pereval", per_eval)]
}

/// Ψ without a value table: every lookup of `Ψ(x)` inside a removal check
/// re-simulates iterations `0..=x` from scratch.
pub struct NaivePsi<'a> {
    pub machines: &'a Enumeration,
    pub config: &'a PsiConfig,
}

pub struct NaiveRun {
    pub events: Vec<TraceEvent>,
    pub values: Vec<HyperInt>,
}

fn add(a: &HyperInt, b: &HyperInt) -> HyperInt {
    HyperInt::add_saturating(a, b).value
}

fn spent_of(o: &CheckOutcome) -> HyperInt {
    match o {
        CheckOutcome::Halted { steps, .. } => steps.clone(),
        CheckOutcome::TimedOut { spent } | CheckOutcome::Aborted { spent, .. } => spent.clone(),
    }
}

impl NaivePsi<'_> {
    pub fn value(&self, x: u64) -> HyperInt {
        self.run(x).values[x as usize].clone()
    }

    pub fn run(&self, n: u64) -> NaiveRun {
        assert_eq!(self.config.iterate_mode, IterateMode::FinitePower, "reference covers finite powers only");
        let mut k = 2u64;
        let mut big_m = HyperInt::one();
        let mut c = vec![self.config.initial];
        let mut ever = vec![self.config.initial];
        let mut events = Vec::new();
        let mut values = Vec::new();
        for m in 0..=n {
            events.push(TraceEvent::IterStart { m, k });
            let budget = self.config.schedule.budget(k, m).unwrap();
            let tasks: Vec<_> = c.iter().map(|e| (self.machines.associate_index(*e).unwrap(), m)).collect();
            let pow2m = HyperInt::pow2(m);
            match self.machines.dovetail(&tasks, &budget, self.config.cap).unwrap() {
                DovetailOutcome::FirstHalt { position, output, steps, ties, .. } => {
                    events.push(TraceEvent::HaltObserved { m, e: c[position], value: output.clone(), steps, ties });
                    let mut doomed: Vec<MachineIndex> = Vec::new();
                    for &e in &c.clone() {
                        for l in 0..m {
                            let gamma = match self.machines.run(self.config.gamma, l, &HyperInt::from(m), self.config.cap).unwrap() {
                                RunOutcome::Halted { output, steps } => CheckOutcome::Halted { value: output, steps },
                                RunOutcome::StillRunning { spent } => CheckOutcome::TimedOut { spent },
                            };
                            let iterate = self.check_iterate(e, l, m);
                            let removed = match (&gamma, &iterate) {
                                (CheckOutcome::Halted { value: g, .. }, CheckOutcome::Halted { value: v, .. }) => v < g,
                                _ => false,
                            };
                            events.push(TraceEvent::RemovalCheck { m, e, l, gamma, iterate, removed });
                            if removed && !doomed.contains(&e) {
                                doomed.push(e);
                            }
                        }
                    }
                    for e in doomed {
                        c.retain(|x| *x != e);
                        events.push(TraceEvent::Removal { m, e });
                    }
                    big_m = HyperInt::max_h(&HyperInt::max_h(&big_m, &output), &pow2m);
                }
                DovetailOutcome::NoneHalted { .. } => {
                    k += 1;
                    let added = (0..).map(MachineIndex).find(|i| !ever.contains(i)).unwrap();
                    c.push(added);
                    ever.push(added);
                    events.push(TraceEvent::ElseBranch { m, k, added });
                    let b = self.config.schedule.budget(k, m).unwrap();
                    big_m = HyperInt::max_h(&HyperInt::max_h(&big_m, &b), &pow2m);
                }
            }
            events.push(TraceEvent::MUpdate { m, big_m: big_m.clone() });
            values.push(big_m.clone());
            events.push(TraceEvent::Output { m, big_m: big_m.clone() });
        }
        NaiveRun { events, values }
    }

    /// `max[Ψ, Φ̂_e]^e(ℓ)` for at most `m` steps, aborting at any value `>= m`.
    fn check_iterate(&self, e: MachineIndex, l: u64, m: u64) -> CheckOutcome {
        let per_eval = self.config.removal_step_mode == RemovalStepMode::PerEvaluation;
        let assoc = self.machines.associate_index(e).unwrap();
        let mut spent = 0u64;
        let mut v = l;
        for _ in 0..e.0 {
            // every produced value is < m, so the re-simulated prefix exists
            let psi = self.value(v);
            spent += 1;
            if !per_eval && spent > m {
                return CheckOutcome::TimedOut { spent: HyperInt::from(m) };
            }
            let budget = if per_eval { m } else { m - spent };
            let out = match self.machines.run(assoc, v, &HyperInt::from(budget), self.config.cap).unwrap() {
                RunOutcome::Halted { output, steps } => {
                    spent += steps.to_u64().unwrap();
                    if !per_eval && spent > m {
                        return CheckOutcome::TimedOut { spent: HyperInt::from(m) };
                    }
                    output
                }
                RunOutcome::StillRunning { .. } => {
                    let total = if per_eval { spent + budget } else { m };
                    return CheckOutcome::TimedOut { spent: HyperInt::from(total) };
                }
            };
            let w = HyperInt::max_h(&psi, &out);
            if w >= HyperInt::from(m) {
                return CheckOutcome::Aborted { at: w, spent: HyperInt::from(spent) };
            }
            v = w.to_u64().unwrap();
        }
        CheckOutcome::Halted { value: HyperInt::from(v), steps: HyperInt::from(spent) }
    }
}

/// Replays a trace and recomputes the step account it implies; used to cross
/// check the engine's own bookkeeping.
pub fn removal_spent(events: &[TraceEvent]) -> HyperInt {
    let mut total = HyperInt::zero();
    for ev in events {
        if let TraceEvent::RemovalCheck { gamma, iterate, .. } = ev {
            total = add(&total, &add(&spent_of(gamma), &spent_of(iterate)));
        }
    }
    total
}

