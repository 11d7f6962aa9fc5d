use nocup::hyperint::HyperInt;
use nocup::machine::{Enumeration, MachineIndex, RunOutcome};

use super::looping_index;
use nocup::provability::{a_machine_run, AOutcome, MachineRef, MockTheory, SentenceId};

/// Whether `Φ_e` halts on every input `0..=s` with at most `horizon` steps in
/// total, by direct runs.
pub fn halts_through(m: &Enumeration, e: MachineIndex, s: u64, horizon: u64) -> bool {
    let mut left = horizon;
    for n in 0..=s {
        match m.run(e, n, &HyperInt::from(left), nocup::machine::DEFAULT_CAP).unwrap() {
            RunOutcome::Halted { steps, .. } => left -= steps.to_u64().unwrap(),
            RunOutcome::StillRunning { .. } => return false,
        }
    }
    true
}

pub struct HelperSummary {
    pub cases: usize,
    pub mismatches: Vec<String>,
}

/// Every `C` over three candidate pairs, every truth assignment of the three
/// `π` and of `η`, every `S <= 4`: the A machine halts on all `s <= S` iff
/// `η` is false or some `(π, e) ∈ C` has `π` true and `Φ_e` halting on
/// `0..=S`. False sentences are witnessed from 0.
pub fn helper_a_suite(horizon: u64) -> HelperSummary {
    let m = Enumeration::default();
    let machines = [m.builtin_named("ZERO").unwrap(), m.builtin_named("PARTIAL_AT_2").unwrap(), looping_index(&m)];
    let pis: Vec<SentenceId> = (0..3).map(|i| SentenceId::new(format!("pi{i}"))).collect();
    let eta = SentenceId::new("eta");
    let mut cases = 0;
    let mut mismatches = Vec::new();
    for truths in 0u32..16 {
        let mut theory = MockTheory::default();
        for (i, pi) in pis.iter().enumerate() {
            theory.insert(pi.clone(), truths & (1 << i) != 0, None);
        }
        let eta_true = truths & 8 != 0;
        theory.insert(eta.clone(), eta_true, None);
        for subset in 0u32..8 {
            let c: Vec<(SentenceId, MachineRef)> = (0..3)
                .filter(|i| subset & (1 << i) != 0)
                .map(|i| (pis[i].clone(), MachineRef::Index(machines[i])))
                .collect();
            for big_s in 0..=4u64 {
                cases += 1;
                let expected = !eta_true
                    || (0..3).any(|i| {
                        subset & (1 << i) != 0 && truths & (1 << i) != 0 && halts_through(&m, machines[i], big_s, horizon)
                    });
                let observed = (0..=big_s).all(|s| {
                    matches!(
                        a_machine_run(&eta, &c, s, &theory, horizon, &m, nocup::machine::DEFAULT_CAP).unwrap(),
                        AOutcome::Halted(_)
                    )
                });
                if expected != observed {
                    mismatches.push(format!("truths={truths:04b} C={subset:03b} S={big_s}: expected {expected}"));
                }
            }
        }
    }
    HelperSummary { cases, mismatches }
}

