use std::collections::BTreeSet;

use nocup::cupping::{CheckOutcome, TraceEvent};
use nocup::hyperint::HyperInt;

/// Removals not backed by an earlier check at the same iteration in which
/// both sides halted within `m` steps and the iterate fell below `Γ(ℓ)`.
pub fn uncertified_removals(events: &[TraceEvent]) -> Vec<String> {
    let mut bad = Vec::new();
    for (i, ev) in events.iter().enumerate() {
        let TraceEvent::Removal { m, e } = ev else { continue };
        let certified = events[..i].iter().any(|c| match c {
            TraceEvent::RemovalCheck {
                m: cm,
                e: ce,
                removed: true,
                gamma: CheckOutcome::Halted { value: g, steps: gs },
                iterate: CheckOutcome::Halted { value: v, steps: vs },
                ..
            } => cm == m && ce == e && v < g && *gs <= HyperInt::from(*m) && *vs <= HyperInt::from(*m),
            _ => false,
        });
        if !certified {
            bad.push(format!("removal of {e} at {m}"));
        }
    }
    bad
}

/// Removed indices that later win a dovetail or are added again.
pub fn resurrections(events: &[TraceEvent]) -> Vec<String> {
    let mut gone = BTreeSet::new();
    let mut bad = Vec::new();
    for ev in events {
        match ev {
            TraceEvent::Removal { e, .. } => {
                gone.insert(*e);
            }
            TraceEvent::ElseBranch { added: e, m, .. } | TraceEvent::HaltObserved { e, m, .. }
                if gone.contains(e) =>
            {
                bad.push(format!("{e} reappeared at {m}"));
            }
            _ => {}
        }
    }
    bad
}
