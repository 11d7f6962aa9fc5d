use nocup::machine::Enumeration;
use std::path::Path;
use std::process::{Command, Output};
use std::rc::Rc;

use nocup::honest::{Evaluate, HonestFn};
use nocup::lattice::{join, meet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn nocup(args: &[String]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nocup")).args(args).output().expect("binary runs")
}

/// One invocation of every command, each writing to `out` inside `dir`.
pub fn cli_cases(dir: &Path) -> Vec<Vec<String>> {
    let mock = dir.join("theory.mock");
    let stream = dir.join("proofs.stream");
    std::fs::write(&mock, "sentence eta true\nsentence pi true\nsentence neg false negwitness 3\n").unwrap();
    std::fs::write(&stream, "proof 0 cup pi ZERO\nproof 1 disj neg\nproof 2 disj eta\n").unwrap();
    let s = |x: &str| x.to_string();
    let cases: Vec<Vec<String>> = vec![
        vec![s("psi"), s("--n"), s("20")],
        vec![s("psi"), s("--schedule"), s("tower"), s("--n"), s("2")],
        vec![s("psi"), s("--schedule"), s("ordinal:w"), s("--n"), s("4")],
        vec![s("psi"), s("--iterate"), s("ordinal:e0"), s("--subject"), s("9"), s("--n"), s("10")],
        vec![s("psi"), s("--step-mode"), s("per-eval"), s("--gamma"), s("TOWER_2"), s("--n"), s("12")],
        vec![s("compare"), s("--f"), s("POW2"), s("--g"), s("TOWER_2")],
        vec![s("compare"), s("--f"), s("TOWERDIAG"), s("--g"), s("POW2"), s("--kmax"), s("6"), s("--to"), s("10")],
        vec![
            s("compare"), s("--mode"), s("ll"), s("--f"), s("POW2"), s("--g"), s("TOWERDIAG"),
            s("--kmax"), s("2"), s("--mmax"), s("4"), s("--tail"), s("5"), s("--to"), s("10"),
        ],
        vec![s("ord"), s("norm"), s("w^w + 3")],
        vec![s("ord"), s("enum"), s("w^2"), s("--normbound"), s("3")],
        vec![s("ord"), s("iterate"), s("w"), s("--n"), s("1")],
        vec![s("ord"), s("fundseq"), s("e0"), s("--k"), s("3")],
        vec![
            s("prov"), s("--s"), s("10"), s("--mock"), mock.display().to_string(),
            s("--stream"), stream.display().to_string(),
        ],
    ];
    cases
}

pub struct Determinism {
    pub commands: usize,
    pub mismatched: Vec<String>,
}

/// Runs every case twice and compares the written files byte for byte.
pub fn cli_determinism(dir: &Path) -> Determinism {
    let mut mismatched = Vec::new();
    let cases = cli_cases(dir);
    for (i, case) in cases.iter().enumerate() {
        let mut outputs = Vec::new();
        for round in 0..2 {
            let path = dir.join(format!("out-{i}-{round}"));
            let mut args = case.clone();
            args.push("--out".into());
            args.push(path.display().to_string());
            let out = nocup(&args);
            assert!(out.status.success(), "{case:?}: {}", String::from_utf8_lossy(&out.stderr));
            outputs.push((std::fs::read(&path).unwrap(), out.stdout));
        }
        if outputs[0] != outputs[1] {
            mismatched.push(case.join(" "));
        }
    }
    Determinism { commands: cases.len(), mismatched }
}

/// Total catalog entries as functions.
pub fn total_catalog() -> Vec<Rc<HonestFn>> {
    let m = Enumeration::default();
    m.catalog()
        .entries()
        .iter()
        .filter(|b| !b.name.starts_with("PARTIAL"))
        .map(|b| Rc::new(HonestFn::builtin(b.name.clone(), b.formula)))
        .collect()
}

pub struct Distributivity {
    pub checks: usize,
    pub failures: Vec<String>,
}

/// `min[max[x,c], max[b,c]] = max[min[x,b], c]` and its dual at random points
/// for every ordered triple of total catalog entries.
pub fn distributivity(points: usize, seed: u64) -> Distributivity {
    let fns = total_catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<u64> = (0..points).map(|_| rng.gen_range(0..=4096)).collect();
    let mut checks = 0;
    let mut failures = Vec::new();
    for x in &fns {
        for b in &fns {
            for c in &fns {
                let lhs = meet(Rc::new(join(x.clone(), c.clone())), Rc::new(join(b.clone(), c.clone())));
                let rhs = join(Rc::new(meet(x.clone(), b.clone())), c.clone());
                let lhs2 = join(Rc::new(meet(x.clone(), c.clone())), Rc::new(meet(b.clone(), c.clone())));
                let rhs2 = meet(Rc::new(join(x.clone(), b.clone())), c.clone());
                for &n in &xs {
                    checks += 1;
                    // independent pointwise evaluation of both sides
                    let (vx, vb, vc) = (x.value_at(n).unwrap(), b.value_at(n).unwrap(), c.value_at(n).unwrap());
                    let expect = std::cmp::max(std::cmp::min(vx.clone(), vb.clone()), vc.clone());
                    let expect2 = std::cmp::min(std::cmp::max(vx, vb), vc);
                    if lhs.value_at(n).unwrap() != expect
                        || rhs.value_at(n).unwrap() != expect
                        || lhs2.value_at(n).unwrap() != expect2
                        || rhs2.value_at(n).unwrap() != expect2
                    {
                        failures.push(format!("{} {} {} at {n}", x.label(), b.label(), c.label()));
                    }
                }
            }
        }
    }
    Distributivity { checks, failures }
}
