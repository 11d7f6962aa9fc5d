//! Honest functions: memoized unary handles, honest associates of arbitrary
//! machines, and the operational honesty check.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::rc::Rc;
use std::sync::Arc;

use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::cupping::{PsiError, PsiSource};
use crate::hyperint::HyperInt;
use crate::machine::{Enumeration, Formula, MachineError, MachineIndex, RunOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("evaluation diverged at input {n} under the supplied budget")]
    Diverged { n: u64 },
    #[error("value {input} cannot be fed back as an input")]
    Unfeedable { input: HyperInt },
    #[error("aborted: {0}")]
    Aborted(String),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Psi(Box<PsiError>),
}

impl From<PsiError> for EvalError {
    fn from(e: PsiError) -> Self {
        EvalError::Psi(Box::new(e))
    }
}

/// A memoized value and what it cost to compute.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Point {
    pub value: HyperInt,
    pub cost: HyperInt,
}

/// Anything that can be evaluated as a unary function on naturals.
pub trait Evaluate {
    fn point(&self, n: u64) -> Result<Point, EvalError>;

    fn value_at(&self, n: u64) -> Result<HyperInt, EvalError> {
        Ok(self.point(n)?.value)
    }

    /// Evaluation at a possibly symbolic argument. The default only accepts
    /// arguments that fit a machine word.
    fn value_at_hyper(&self, x: &HyperInt) -> Result<HyperInt, EvalError> {
        match x.to_u64() {
            Some(n) => self.value_at(n),
            None => Err(EvalError::Unfeedable { input: x.clone() }),
        }
    }

    fn label(&self) -> String;
}

pub struct AssociateSource {
    e: MachineIndex,
    machines: Arc<Enumeration>,
    budget: HyperInt,
    cap: u64,
    // prefix[m] = total steps of Φ_e on 0..=m
    prefix: RefCell<Vec<HyperInt>>,
}

pub enum Source {
    Associate(AssociateSource),
    Builtin(Formula),
    Psi(PsiSource),
    Join(Rc<HonestFn>, Rc<HonestFn>),
    Meet(Rc<HonestFn>, Rc<HonestFn>),
    Iterate(Rc<HonestFn>, u64),
}

/// Memoized unary function handle. Single-threaded; memo entries are written
/// once and never change.
pub struct HonestFn {
    label: String,
    source: Source,
    honest: bool,
    memo: RefCell<BTreeMap<u64, Point>>,
}

impl fmt::Debug for HonestFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HonestFn").field("label", &self.label).field("honest", &self.honest).finish()
    }
}

impl HonestFn {
    pub fn new(label: impl Into<String>, source: Source, honest: bool) -> Self {
        HonestFn { label: label.into(), source, honest, memo: RefCell::new(BTreeMap::new()) }
    }

    /// A catalog formula as a function. Flagged honest only for the towers.
    pub fn builtin(name: impl Into<String>, formula: Formula) -> Self {
        let honest = matches!(formula, Formula::Pow2 | Formula::Tower(_));
        HonestFn::new(name, Source::Builtin(formula), honest)
    }

    /// Looks a builtin up by catalog name.
    pub fn named(machines: &Enumeration, name: &str) -> Result<Self, MachineError> {
        let b = machines
            .catalog()
            .position(name)
            .ok_or_else(|| MachineError::UnknownBuiltin(name.to_string()))?;
        Ok(HonestFn::builtin(name, machines.catalog().get(b).unwrap().formula))
    }

    pub fn label_str(&self) -> &str {
        &self.label
    }

    pub fn is_flagged_honest(&self) -> bool {
        self.honest
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn memo_snapshot(&self) -> BTreeMap<u64, Point> {
        self.memo.borrow().clone()
    }

    /// Adjacent memo entries violating `f(n) >= 2^n` or monotonicity.
    pub fn memo_violations(&self) -> Vec<u64> {
        let memo = self.memo.borrow();
        let mut bad = Vec::new();
        for (n, p) in memo.iter() {
            if p.value < HyperInt::pow2(*n) {
                bad.push(*n);
            }
            if let Some(next) = memo.get(&(n + 1)) {
                if p.value > next.value {
                    bad.push(*n);
                }
            }
        }
        bad
    }

    fn compute(&self, n: u64) -> Result<Point, EvalError> {
        match &self.source {
            Source::Builtin(f) => match (f.output(n), f.cost(n)) {
                (Some(value), Some(cost)) => Ok(Point { value, cost }),
                _ => Err(EvalError::Diverged { n }),
            },
            Source::Associate(a) => a.point(n),
            Source::Psi(p) => p.point(n),
            Source::Join(f, g) | Source::Meet(f, g) => {
                let (pf, pg) = (f.point(n)?, g.point(n)?);
                let value = if matches!(self.source, Source::Join(..)) {
                    HyperInt::max_h(&pf.value, &pg.value)
                } else {
                    HyperInt::min_h(&pf.value, &pg.value)
                };
                let cost = HyperInt::add_saturating(&pf.cost, &pg.cost).value;
                Ok(Point { value, cost: HyperInt::add_saturating(&cost, &HyperInt::one()).value })
            }
            Source::Iterate(f, k) => {
                let mut x = n;
                let mut cost = HyperInt::zero();
                let mut value = HyperInt::from(n);
                for j in 1..=*k {
                    let p = f.point(x)?;
                    cost = HyperInt::add_saturating(&cost, &p.cost).value;
                    value = p.value;
                    if j < *k {
                        x = value.to_u64().ok_or(EvalError::Unfeedable { input: value.clone() })?;
                    }
                }
                Ok(Point { value, cost })
            }
        }
    }

    fn symbolic(&self, x: &HyperInt) -> Result<HyperInt, EvalError> {
        let unfeedable = || EvalError::Unfeedable { input: x.clone() };
        match &self.source {
            Source::Builtin(f) => f.output_symbolic(x).ok_or_else(unfeedable),
            Source::Join(f, g) => {
                Ok(HyperInt::max_h(&f.value_at_hyper(x)?, &g.value_at_hyper(x)?))
            }
            Source::Meet(f, g) => {
                Ok(HyperInt::min_h(&f.value_at_hyper(x)?, &g.value_at_hyper(x)?))
            }
            Source::Iterate(f, k) => {
                let mut v = x.clone();
                for _ in 0..*k {
                    v = f.value_at_hyper(&v)?;
                }
                Ok(v)
            }
            _ => Err(unfeedable()),
        }
    }
}

impl Evaluate for HonestFn {
    fn point(&self, n: u64) -> Result<Point, EvalError> {
        if let Some(p) = self.memo.borrow().get(&n) {
            return Ok(p.clone());
        }
        let p = self.compute(n)?;
        self.memo.borrow_mut().entry(n).or_insert_with(|| p.clone());
        Ok(p)
    }

    fn value_at_hyper(&self, x: &HyperInt) -> Result<HyperInt, EvalError> {
        match x.to_u64() {
            Some(n) => self.value_at(n),
            None => self.symbolic(x),
        }
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

impl Evaluate for Rc<HonestFn> {
    fn point(&self, n: u64) -> Result<Point, EvalError> {
        (**self).point(n)
    }

    fn value_at_hyper(&self, x: &HyperInt) -> Result<HyperInt, EvalError> {
        (**self).value_at_hyper(x)
    }

    fn label(&self) -> String {
        (**self).label()
    }
}

impl AssociateSource {
    fn point(&self, n: u64) -> Result<Point, EvalError> {
        let mut prefix = self.prefix.borrow_mut();
        while (prefix.len() as u64) <= n {
            let m = prefix.len() as u64;
            let spent = prefix.last().cloned().unwrap_or_else(HyperInt::zero);
            let left = match (&self.budget, &spent) {
                (HyperInt::Exact(b), HyperInt::Exact(s)) if b >= s => HyperInt::Exact(b - s),
                (HyperInt::Exact(_), _) => return Err(EvalError::Diverged { n }),
                _ => self.budget.clone(),
            };
            match self.machines.run(self.e, m, &left, self.cap)? {
                RunOutcome::Halted { steps, .. } => {
                    prefix.push(HyperInt::add_saturating(&spent, &steps).value);
                }
                RunOutcome::StillRunning { .. } => return Err(EvalError::Diverged { n }),
            }
        }
        let total = prefix[n as usize].clone();
        let value = HyperInt::max_h(&HyperInt::pow2(n), &total);
        // one bookkeeping action per constituent run plus the final max
        let cost = HyperInt::add_saturating(&total, &HyperInt::from(n + 2)).value;
        Ok(Point { value, cost })
    }
}

/// `Φ̂_e`: on `n`, runs `Φ_e` on `0..=n` and returns `max(2^n, total steps)`.
/// Divergence is reported relative to `budget`, which bounds the total steps
/// of one evaluation.
pub fn honest_associate(
    machines: Arc<Enumeration>,
    e: MachineIndex,
    budget: HyperInt,
    cap: u64,
) -> HonestFn {
    HonestFn::new(
        format!("assoc({e})"),
        Source::Associate(AssociateSource { e, machines, budget, cap, prefix: RefCell::new(Vec::new()) }),
        true,
    )
}

/// Index of the machine that runs `Φ_e(0..=n)` in succession and halts with
/// output 0 iff all of them halt.
pub fn cumulative_hat(machines: &Enumeration, e: MachineIndex) -> Result<MachineIndex, MachineError> {
    machines.hat_index(e)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "n", rename_all = "snake_case")]
pub enum Witness {
    NotMonotone(u64),
    BelowPow2(u64),
    RuntimeExceeded(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HonestyReport {
    pub name: String,
    pub range: (u64, u64),
    pub degree: u32,
    pub constant: u64,
    pub monotone_ok: bool,
    pub dominates2x_ok: bool,
    pub runtime_poly_ok: bool,
    pub witnesses: Vec<Witness>,
    /// `max cost(n) / f(n)^d` over the range, when every term is exact
    pub measured_constant: Option<f64>,
    /// some bound involved a tower and was decided conservatively
    pub saturated: bool,
}

impl HonestyReport {
    pub fn all_ok(&self) -> bool {
        self.monotone_ok && self.dominates2x_ok && self.runtime_poly_ok
    }
}

fn ratio(cost: &HyperInt, denom: &HyperInt) -> Option<f64> {
    let (c, d) = (cost.as_exact()?, denom.as_exact()?);
    let shift = d.bits().saturating_sub(900).max(c.bits().saturating_sub(900));
    let c = (c >> shift).to_f64()?;
    let d = (d >> shift).to_f64()?;
    if d == 0.0 {
        None
    } else {
        Some(c / d)
    }
}

/// Checks monotonicity, domination of `2^n`, and `cost(n) <= c * f(n)^d` over
/// `range`.
pub fn check_honesty(
    f: &impl Evaluate,
    range: RangeInclusive<u64>,
    degree: u32,
    constant: u64,
) -> Result<HonestyReport, EvalError> {
    let points: Vec<(u64, Point)> =
        range.clone().map(|n| Ok((n, f.point(n)?))).collect::<Result<_, EvalError>>()?;
    let mut report = HonestyReport {
        name: f.label(),
        range: (*range.start(), *range.end()),
        degree,
        constant,
        monotone_ok: true,
        dominates2x_ok: true,
        runtime_poly_ok: true,
        witnesses: Vec::new(),
        measured_constant: Some(0.0),
        saturated: false,
    };
    for (i, (n, p)) in points.iter().enumerate() {
        if let Some((_, next)) = points.get(i + 1) {
            if p.value > next.value {
                report.monotone_ok = false;
                report.witnesses.push(Witness::NotMonotone(*n));
            }
        }
        if p.value < HyperInt::pow2(*n) {
            report.dominates2x_ok = false;
            report.witnesses.push(Witness::BelowPow2(*n));
        }
        let power = p.value.pow_small(degree);
        let bound = power.value.mul_small(constant);
        report.saturated |= power.saturated || bound.saturated;
        if p.cost > bound.value {
            report.runtime_poly_ok = false;
            report.witnesses.push(Witness::RuntimeExceeded(*n));
        }
        report.measured_constant = match (report.measured_constant, ratio(&p.cost, &power.value)) {
            (Some(best), Some(r)) => Some(best.max(r)),
            _ => None,
        };
    }
    Ok(report)
}
