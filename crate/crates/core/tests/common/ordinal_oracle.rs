use std::collections::HashMap;

use nocup::honest::{EvalError, Evaluate, Point};
use nocup::hyperint::HyperInt;
use nocup::ordinals::OrdinalCnf;

/// `x + 1`, deliberately not honest.
pub struct Succ;

impl Evaluate for Succ {
    fn point(&self, n: u64) -> Result<Point, EvalError> {
        Ok(Point { value: HyperInt::from(n + 1), cost: HyperInt::one() })
    }

    fn label(&self) -> String {
        "x+1".into()
    }
}

/// Every CNF ordinal of norm at most `b`, built from non-increasing exponent
/// sequences whose weights `1 + N(e)` sum to at most `b`.
pub fn brute_all(b: u64) -> Vec<OrdinalCnf> {
    if b == 0 {
        return vec![OrdinalCnf::zero()];
    }
    let mut exps = brute_all(b - 1);
    exps.sort_by(|x, y| y.cmp(x));
    let weights: Vec<u64> = exps.iter().map(|e| 1 + brute_norm(e)).collect();
    let mut out = Vec::new();
    let mut seq = Vec::new();
    extend(&exps, &weights, 0, b, &mut seq, &mut out);
    out.sort();
    out.dedup();
    out
}

fn extend(exps: &[OrdinalCnf], w: &[u64], from: usize, left: u64, seq: &mut Vec<usize>, out: &mut Vec<OrdinalCnf>) {
    out.push(from_seq(exps, seq));
    for i in from..exps.len() {
        if w[i] <= left {
            seq.push(i);
            extend(exps, w, i, left - w[i], seq, out);
            seq.pop();
        }
    }
}

fn from_seq(exps: &[OrdinalCnf], seq: &[usize]) -> OrdinalCnf {
    let mut terms: Vec<(OrdinalCnf, u64)> = Vec::new();
    for &i in seq {
        match terms.last_mut() {
            Some((e, c)) if *e == exps[i] => *c += 1,
            _ => terms.push((exps[i].clone(), 1)),
        }
    }
    OrdinalCnf::from_terms(terms).expect("exponents are non-increasing")
}

pub fn brute_norm(a: &OrdinalCnf) -> u64 {
    a.terms().iter().map(|(e, c)| c * (1 + brute_norm(e))).sum()
}

/// The definition unfolded with no sharing of values; candidate sets come
/// from the brute-force generator at the required norm bound.
pub struct Unfold {
    universes: HashMap<u64, Vec<OrdinalCnf>>,
}

impl Unfold {
    pub fn new() -> Self {
        Unfold { universes: HashMap::new() }
    }

    fn candidates(&mut self, a: &OrdinalCnf, bound: u64) -> Vec<OrdinalCnf> {
        // below a natural every candidate has norm < a <= bound
        if let Some(k) = a.as_nat() {
            return (0..k).map(OrdinalCnf::nat).collect();
        }
        let universe = self.universes.entry(bound).or_insert_with(|| brute_all(bound));
        universe.iter().filter(|b| *b < a).cloned().collect()
    }

    pub fn eval(&mut self, f: &impl Evaluate, a: &OrdinalCnf, n: u64) -> u64 {
        if a.is_zero() {
            return f.value_at(n).unwrap().to_u64().unwrap();
        }
        let mut best = 0;
        for b in self.candidates(a, brute_norm(a) + n) {
            let inner = self.eval(f, &b, n);
            best = best.max(self.eval(f, &b, inner));
        }
        best
    }
}

