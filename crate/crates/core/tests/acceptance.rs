//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::audit::{resurrections, uncertified_removals};
use common::corpus::{corpus, full_cmp};
use common::ordinal_oracle::{brute_all, brute_norm, Succ, Unfold};
use common::{cli_determinism, distributivity, fixtures, helper_a_suite, machines, NaivePsi};
use nocup::cupping::{psi_as_honest_fn, psi_run, PsiConfig, TraceEvent};
use nocup::growth::{leq_e_proxy, ll_e_proxy, ComparatorVerdict, DominanceVerdict};
use nocup::honest::{check_honesty, HonestFn};
use nocup::hyperint::HyperInt;
use nocup::machine::Enumeration;
use nocup::ordinals::{enum_below_with_norm, norm, trans_iterate, IterBudget, OrdinalCnf};
use nocup::trace;

/// Smallest `c` with `stepAccount(n) <= c * Ψ(n)^4` on `0..=20`, measured
/// under the scaled schedule with Γ = TOWERDIAG; the account is 3 at `n = 0`
/// where `Ψ(0) = 1`.
const PSI_POLY_CONSTANT: u64 = 3;

/// Name, check and time limit in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn psi_honesty() -> Outcome {
    let m = machines();
    let config = PsiConfig::scaled(m.builtin_named("TOWERDIAG").unwrap());
    let psi = psi_as_honest_fn(m.clone(), config.clone());
    let report = check_honesty(&psi, 0..=20, 4, PSI_POLY_CONSTANT).unwrap();
    let run = psi_run(m, config, 20).unwrap();
    let mut measured = 0u64;
    for n in 0..=20 {
        let steps = run.state.step_table[n].to_u64().unwrap() as u128;
        let v = run.state.m_table[n].to_u64().unwrap() as u128;
        let c = steps.div_ceil(v.pow(4)) as u64;
        measured = measured.max(c);
    }
    outcome(
        report.all_ok() && measured <= PSI_POLY_CONSTANT,
        format!("monotone, >= 2^n and stepAccount <= c*psi^4 on 0..20; measured c = {measured}, pinned c = {PSI_POLY_CONSTANT}"),
    )
}

fn psi_combinatorics() -> Outcome {
    let m = machines();
    let (_, config) = fixtures(&m).remove(0);
    let run = psi_run(m, config, 40).unwrap();
    let elses = run.trace.iter().filter(|e| matches!(e, TraceEvent::ElseBranch { .. })).count();
    let removals = run.trace.iter().filter(|e| matches!(e, TraceEvent::Removal { .. })).count();
    let unsound = uncertified_removals(&run.trace);
    let back = resurrections(&run.trace);
    outcome(
        elses >= 2 && removals >= 1 && unsound.is_empty() && back.is_empty(),
        format!(
            "n = 40: {elses} else branches, {removals} removals, {} uncertified, {} resurrected",
            unsound.len(),
            back.len()
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let m = machines();
    let mut differing = Vec::new();
    let fx = fixtures(&m);
    for (name, config) in &fx {
        let fast = psi_run(m.clone(), config.clone(), 12).unwrap();
        let naive = NaivePsi { machines: &m, config }.run(12);
        if trace::render("psi", config, &fast.trace) != trace::render("psi", config, &naive.events) {
            differing.push(*name);
        }
    }
    outcome(differing.is_empty(), format!("{} fixtures, n = 12, differing: {differing:?}", fx.len()))
}

fn ordinal_suite() -> Outcome {
    let mut problems = Vec::new();
    let all6 = brute_all(6);
    let alphas = brute_all(5);
    for a in &alphas {
        for b in 0..=6 {
            let expected: Vec<_> = all6.iter().filter(|x| *x < a && brute_norm(x) <= b).cloned().collect();
            if enum_below_with_norm(a, b) != expected {
                problems.push(format!("enum {a} {b}"));
            }
        }
    }
    let norms: Vec<u64> = ["0", "1", "w", "w^w", "w^w + 3"]
        .iter()
        .map(|s| norm(&s.parse::<OrdinalCnf>().unwrap()))
        .collect();
    if norms != [0, 1, 2, 3, 6] {
        problems.push(format!("norms {norms:?}"));
    }
    for k in 0..=3 {
        for n in 0..=8 {
            let v = trans_iterate(&Succ, &OrdinalCnf::nat(k), n, IterBudget::default()).unwrap();
            if v != HyperInt::from(n + (1 << k)) {
                problems.push(format!("f_{k}({n}) = {v}"));
            }
        }
    }
    let fast = trans_iterate(&Succ, &OrdinalCnf::omega(), 1, IterBudget::default()).unwrap();
    let slow = Unfold::new().eval(&Succ, &OrdinalCnf::omega(), 1);
    if fast != HyperInt::from(17) || slow != 17 {
        problems.push(format!("f_w(1) = {fast}, unfold {slow}"));
    }
    outcome(
        problems.is_empty(),
        format!("{} alphas x 7 bounds, norms {norms:?}, f_w(1) = {fast}; problems: {problems:?}", alphas.len()),
    )
}

fn growth_comparator() -> Outcome {
    let m = Enumeration::default();
    let f = |n: &str| HonestFn::named(&m, n).unwrap();
    let (pow2, t2, diag) = (f("POW2"), f("TOWER_2"), f("TOWERDIAG"));
    let a = leq_e_proxy(&pow2, &t2, 6, 0..=16).unwrap();
    let b = leq_e_proxy(&diag, &pow2, 6, 0..=10).unwrap();
    let c = ll_e_proxy(&pow2, &diag, 2, 4, 5, 0..=10).unwrap();
    // TOWERDIAG(7) = 2_7^7 already beats the sixth iterate of 2^x at 7
    let at_seven = match &b {
        ComparatorVerdict::NoWitnessUpTo { k_max: 6, counterexamples } => {
            (1..=6).all(|k| counterexamples.iter().any(|ce| ce.k == k && ce.x == 7))
        }
        _ => false,
    };
    let pass = a == ComparatorVerdict::WitnessK(1) && at_seven && matches!(c, DominanceVerdict::WitnessK(_));
    outcome(pass, format!("leq(POW2, TOWER_2) = {a}; leq(TOWERDIAG, POW2) = {b}; ll(POW2, TOWERDIAG) = {c}"))
}

fn hyperint_correctness() -> Outcome {
    let c = corpus();
    let mut wrong = 0;
    let mut pairs = 0;
    for a in &c {
        for b in &c {
            pairs += 1;
            if a.cmp(b) != full_cmp(a, b) {
                wrong += 1;
            }
        }
    }
    let mut identities = 0;
    for v in &c {
        identities += 1;
        let ok = v.exp2() == HyperInt::tower(1, v)
            && HyperInt::tower(2, &HyperInt::tower(1, v)) == HyperInt::tower(3, v)
            && v.to_string().parse::<HyperInt>().ok().as_ref() == Some(v);
        if !ok {
            wrong += 1;
        }
    }
    outcome(wrong == 0, format!("{} values, {pairs} ordered pairs, {identities} identity checks, {wrong} wrong", c.len()))
}

fn helper_lemma() -> Outcome {
    let s = helper_a_suite(1000);
    outcome(s.mismatches.is_empty(), format!("{} cases, mismatches: {:?}", s.cases, s.mismatches))
}

fn distributive() -> Outcome {
    let d = distributivity(100, 7);
    outcome(d.failures.is_empty(), format!("{} point checks over all catalog triples, {} failures", d.checks, d.failures.len()))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = cli_determinism(dir.path());
    outcome(d.mismatched.is_empty(), format!("{} commands run twice, differing: {:?}", d.commands, d.mismatched))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 psi honesty", psi_honesty, 10),
        ("2 psi combinatorics", psi_combinatorics, 10),
        ("3 oracle equivalence", oracle_equivalence, 60),
        ("4 ordinal suite", ordinal_suite, 30),
        ("5 growth comparator", growth_comparator, 10),
        ("6 hyperint correctness", hyperint_correctness, 10),
        ("7 helper machine lemma", helper_lemma, 10),
        ("8 pointwise distributivity", distributive, 5),
        ("9 end-to-end determinism", determinism, 30),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.2}s of {limit}s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
