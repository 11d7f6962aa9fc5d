//! Cantor-normal-form ordinals below epsilon-zero, norms, bounded-norm
//! enumeration, transfinite iterates and fundamental sequences.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::honest::{EvalError, Evaluate};
use crate::hyperint::HyperInt;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrdError {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("{0} is not of the form w^b with b > 0")]
    NotSLim(String),
    #[error("recursion budget of {max_recursion_nodes} nodes exhausted")]
    BudgetExhausted { max_recursion_nodes: u64 },
    #[error("iterate at index {beta} left the representable regime")]
    IterateOverflow { beta: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `sum w^e_i * c_i` with strictly decreasing exponents and `c_i >= 1`.
/// The empty sum is 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrdinalCnf {
    terms: Vec<(OrdinalCnf, u64)>,
}

impl OrdinalCnf {
    pub fn zero() -> Self {
        OrdinalCnf { terms: Vec::new() }
    }

    pub fn nat(n: u64) -> Self {
        if n == 0 {
            Self::zero()
        } else {
            OrdinalCnf { terms: vec![(Self::zero(), n)] }
        }
    }

    pub fn omega() -> Self {
        Self::omega_pow(Self::nat(1), 1)
    }

    /// `w^e * c`.
    pub fn omega_pow(e: OrdinalCnf, c: u64) -> Self {
        assert!(c >= 1);
        OrdinalCnf { terms: vec![(e, c)] }
    }

    /// Builds from terms, which must already be in normal form.
    pub fn from_terms(terms: Vec<(OrdinalCnf, u64)>) -> Option<Self> {
        let ok = terms.iter().all(|(_, c)| *c >= 1)
            && terms.windows(2).all(|w| w[0].0 > w[1].0);
        ok.then_some(OrdinalCnf { terms })
    }

    pub fn terms(&self) -> &[(OrdinalCnf, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(n)` when the ordinal is a natural number.
    pub fn as_nat(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(e, c)] if e.is_zero() => Some(*c),
            _ => None,
        }
    }

    pub fn is_limit(&self) -> bool {
        matches!(self.terms.last(), Some((e, _)) if !e.is_zero())
    }

    /// Predecessor of a successor ordinal.
    pub fn predecessor(&self) -> Option<OrdinalCnf> {
        let (e, c) = self.terms.last()?;
        if !e.is_zero() {
            return None;
        }
        let mut terms = self.terms.clone();
        if *c == 1 {
            terms.pop();
        } else {
            terms.last_mut().unwrap().1 -= 1;
        }
        Some(OrdinalCnf { terms })
    }

    /// Commutative sum: terms are merged by exponent.
    pub fn natural_sum(&self, other: &OrdinalCnf) -> OrdinalCnf {
        let mut merged: BTreeMap<OrdinalCnf, u64> = BTreeMap::new();
        for (e, c) in self.terms.iter().chain(other.terms.iter()) {
            *merged.entry(e.clone()).or_insert(0) += c;
        }
        OrdinalCnf { terms: merged.into_iter().rev().collect() }
    }
}

impl PartialOrd for OrdinalCnf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdinalCnf {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(other.terms.iter()) {
            let ord = a.0.cmp(&b.0).then(a.1.cmp(&b.1));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

pub fn compare_ord(a: &OrdinalCnf, b: &OrdinalCnf) -> Ordering {
    a.cmp(b)
}

/// `N(0) = 0`, `N(b + c) = N(b) + N(c)`, `N(w^b) = 1 + N(b)`.
pub fn norm(a: &OrdinalCnf) -> u64 {
    a.terms.iter().fold(0u64, |acc, (e, c)| acc.saturating_add(c.saturating_mul(1 + norm(e))))
}

impl fmt::Display for OrdinalCnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match e.as_nat() {
                Some(0) => {
                    write!(f, "{c}")?;
                    continue;
                }
                Some(1) => write!(f, "w")?,
                Some(n) => write!(f, "w^{n}")?,
                None if *e == OrdinalCnf::omega() => write!(f, "w^w")?,
                None => write!(f, "w^({e})")?,
            }
            if *c > 1 {
                write!(f, "*{c}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for OrdinalCnf {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, OrdError> {
        Err(OrdError::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn natural(&mut self) -> Result<u64, OrdError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a natural number");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse().or_else(|_| {
            self.pos = start;
            self.err("natural number out of range")
        })
    }

    fn expr(&mut self) -> Result<OrdinalCnf, OrdError> {
        let mut terms: Vec<(OrdinalCnf, u64)> = Vec::new();
        loop {
            self.skip_ws();
            let at = self.pos;
            if let Some((e, c)) = self.term()? {
                match terms.last_mut() {
                    Some((last, lc)) if *last == e => *lc += c,
                    Some((last, _)) if *last < e => {
                        self.pos = at;
                        return self.err("exponents must be decreasing");
                    }
                    _ => terms.push((e, c)),
                }
            }
            if !self.eat(b'+') {
                return Ok(OrdinalCnf { terms });
            }
        }
    }

    fn term(&mut self) -> Result<Option<(OrdinalCnf, u64)>, OrdError> {
        match self.peek() {
            Some(b) if b.is_ascii_digit() => {
                let n = self.natural()?;
                Ok((n > 0).then(|| (OrdinalCnf::zero(), n)))
            }
            Some(b'w') => {
                self.pos += 1;
                let e = if self.eat(b'^') { self.atom()? } else { OrdinalCnf::nat(1) };
                let c = if self.eat(b'*') {
                    let c = self.natural()?;
                    if c == 0 {
                        return self.err("coefficient must be positive");
                    }
                    c
                } else {
                    1
                };
                Ok(Some((e, c)))
            }
            _ => self.err("expected a term"),
        }
    }

    fn atom(&mut self) -> Result<OrdinalCnf, OrdError> {
        match self.peek() {
            Some(b) if b.is_ascii_digit() => Ok(OrdinalCnf::nat(self.natural()?)),
            Some(b'w') => {
                self.pos += 1;
                Ok(OrdinalCnf::omega())
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            _ => self.err("expected an exponent"),
        }
    }
}

impl FromStr for OrdinalCnf {
    type Err = OrdError;

    fn from_str(s: &str) -> Result<Self, OrdError> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let a = p.expr()?;
        if p.peek().is_some() {
            return p.err("trailing input");
        }
        Ok(a)
    }
}

/// A fundamental-sequence source: an ordinal in SLim or epsilon-zero itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FundSource {
    Ordinal(OrdinalCnf),
    EpsilonZero,
}

impl FromStr for FundSource {
    type Err = OrdError;

    fn from_str(s: &str) -> Result<Self, OrdError> {
        match s.trim() {
            "e0" => Ok(FundSource::EpsilonZero),
            other => other.parse().map(FundSource::Ordinal),
        }
    }
}

impl fmt::Display for FundSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FundSource::Ordinal(a) => write!(f, "{a}"),
            FundSource::EpsilonZero => write!(f, "e0"),
        }
    }
}

impl Serialize for FundSource {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Single term, coefficient 1, positive exponent.
pub fn in_slim(a: &FundSource) -> bool {
    match a {
        FundSource::EpsilonZero => true,
        FundSource::Ordinal(a) => matches!(a.terms.as_slice(), [(e, 1)] if !e.is_zero()),
    }
}

/// Standard sequence of a limit ordinal `d + w^m`:
/// `(w^(g+1))[k] = w^g * (k+1)` and `(w^l)[k] = w^(l[k])` for limit `l`.
fn limit_fund(l: &OrdinalCnf, k: u64) -> OrdinalCnf {
    let mut terms = l.terms.clone();
    let (m, c) = terms.pop().expect("limit ordinals are nonzero");
    if c > 1 {
        terms.push((m.clone(), c - 1));
    }
    let tail = match m.predecessor() {
        Some(g) => (g, k + 1),
        None => (limit_fund(&m, k), 1),
    };
    terms.push(tail);
    OrdinalCnf { terms }
}

/// `alpha_k`: strictly increasing in `k` with supremum `alpha`.
pub fn fund_seq(a: &FundSource, k: u64) -> Result<OrdinalCnf, OrdError> {
    if !in_slim(a) {
        return Err(OrdError::NotSLim(a.to_string()));
    }
    match a {
        FundSource::EpsilonZero => {
            let mut cur = OrdinalCnf::nat(1);
            for _ in 0..k {
                cur = OrdinalCnf::omega_pow(cur, 1);
            }
            Ok(cur)
        }
        FundSource::Ordinal(a) => Ok(limit_fund(a, k)),
    }
}

/// Generates every ordinal with norm at most a bound, caching by bound.
struct NormGenerator {
    cache: BTreeMap<u64, Vec<OrdinalCnf>>,
    produced: u64,
    limit: u64,
}

impl NormGenerator {
    fn new(limit: u64) -> Self {
        NormGenerator { cache: BTreeMap::new(), produced: 0, limit }
    }

    /// All ordinals of norm `<= b` whose leading exponent is `<= cap`,
    /// ascending. `None` once `limit` ordinals have been produced.
    fn up_to(&mut self, b: u64, cap: Option<&OrdinalCnf>) -> Option<Vec<OrdinalCnf>> {
        if cap.is_none() {
            if let Some(v) = self.cache.get(&b) {
                return Some(v.clone());
            }
        }
        let mut exps = if b == 0 { Vec::new() } else { self.up_to(b - 1, None)? };
        if let Some(cap) = cap {
            exps.retain(|e| e <= cap);
        }
        exps.reverse();
        let norms: Vec<u64> = exps.iter().map(norm).collect();
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        self.build(&exps, &norms, 0, b, &mut prefix, &mut out)?;
        out.sort();
        if cap.is_none() {
            self.cache.insert(b, out.clone());
        }
        Some(out)
    }

    fn build(
        &mut self,
        exps: &[OrdinalCnf],
        norms: &[u64],
        from: usize,
        left: u64,
        prefix: &mut Vec<(OrdinalCnf, u64)>,
        out: &mut Vec<OrdinalCnf>,
    ) -> Option<()> {
        self.produced += 1;
        if self.produced > self.limit {
            return None;
        }
        out.push(OrdinalCnf { terms: prefix.clone() });
        for i in from..exps.len() {
            let unit = 1 + norms[i];
            let mut c = 1;
            while c * unit <= left {
                prefix.push((exps[i].clone(), c));
                self.build(exps, norms, i + 1, left - c * unit, prefix, out)?;
                prefix.pop();
                c += 1;
            }
        }
        Some(())
    }
}

/// `{b < a : N(b) <= bound}`, ascending.
pub fn enum_below_with_norm(a: &OrdinalCnf, bound: u64) -> Vec<OrdinalCnf> {
    enum_below_limited(a, bound, u64::MAX).expect("unlimited")
}

fn enum_below_limited(a: &OrdinalCnf, bound: u64, limit: u64) -> Option<Vec<OrdinalCnf>> {
    if let Some(n) = a.as_nat() {
        return Some((0..n.min(bound.saturating_add(1))).map(OrdinalCnf::nat).collect());
    }
    let lead = &a.terms[0].0;
    let mut all = NormGenerator::new(limit).up_to(bound, Some(lead))?;
    all.retain(|b| b < a);
    Some(all)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IterBudget {
    pub max_recursion_nodes: u64,
    pub max_value_bits: u64,
}

impl Default for IterBudget {
    fn default() -> Self {
        IterBudget { max_recursion_nodes: 200_000, max_value_bits: 1 << 20 }
    }
}

struct TransIterator<'a, F: Evaluate> {
    f: &'a F,
    budget: IterBudget,
    nodes: u64,
    memo: BTreeMap<(OrdinalCnf, HyperInt), HyperInt>,
}

impl<F: Evaluate> TransIterator<'_, F> {
    fn overflow(beta: &OrdinalCnf) -> OrdError {
        OrdError::IterateOverflow { beta: beta.to_string() }
    }

    fn checked(&self, beta: &OrdinalCnf, v: HyperInt) -> Result<HyperInt, OrdError> {
        match v.exact_bits() {
            Some(bits) if bits > self.budget.max_value_bits => Err(Self::overflow(beta)),
            _ => Ok(v),
        }
    }

    fn exhausted(&self) -> OrdError {
        OrdError::BudgetExhausted { max_recursion_nodes: self.budget.max_recursion_nodes }
    }

    fn eval(&mut self, beta: &OrdinalCnf, x: &HyperInt) -> Result<HyperInt, OrdError> {
        let key = (beta.clone(), x.clone());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        self.nodes += 1;
        if self.nodes > self.budget.max_recursion_nodes {
            return Err(self.exhausted());
        }
        let value = if beta.is_zero() {
            match self.f.value_at_hyper(x) {
                Ok(v) => v,
                Err(EvalError::Unfeedable { .. }) => return Err(Self::overflow(beta)),
                Err(e) => return Err(e.into()),
            }
        } else {
            let candidates = match beta.as_nat() {
                Some(b) => (0..b).map(OrdinalCnf::nat).collect(),
                None => {
                    let n = x.to_u64().ok_or_else(|| Self::overflow(beta))?;
                    let bound = norm(beta).saturating_add(n);
                    let left = self.budget.max_recursion_nodes - self.nodes;
                    enum_below_limited(beta, bound, left).ok_or_else(|| self.exhausted())?
                }
            };
            let mut best = HyperInt::zero();
            for gamma in candidates {
                let inner = self.eval(&gamma, x)?;
                let outer = self.eval(&gamma, &inner)?;
                best = HyperInt::max_h(&best, &outer);
            }
            best
        };
        let value = self.checked(beta, value)?;
        self.memo.insert(key, value.clone());
        Ok(value)
    }
}

/// `f_0 = f`, `f_a(n) = max{ f_b(f_b(n)) : b < a, N(b) <= N(a) + n }`.
pub fn trans_iterate(
    f: &impl Evaluate,
    alpha: &OrdinalCnf,
    n: u64,
    budget: IterBudget,
) -> Result<HyperInt, OrdError> {
    trans_iterate_hyper(f, alpha, &HyperInt::from(n), budget)
}

/// As [`trans_iterate`] at a possibly symbolic argument; only finite `alpha`
/// accept tower arguments.
pub fn trans_iterate_hyper(
    f: &impl Evaluate,
    alpha: &OrdinalCnf,
    x: &HyperInt,
    budget: IterBudget,
) -> Result<HyperInt, OrdError> {
    let mut it = TransIterator { f, budget, nodes: 0, memo: BTreeMap::new() };
    it.eval(alpha, x)
}

impl From<u64> for OrdinalCnf {
    fn from(n: u64) -> Self {
        OrdinalCnf::nat(n)
    }
}
