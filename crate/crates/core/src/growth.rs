//! Finite iteration and bounded-range growth comparators.
//!
//! The proxies here are semi-decisions: a witness is checked only on the
//! supplied range, and the absence of one refutes nothing beyond
//! `(k_max, range)`.

use std::fmt;
use std::ops::RangeInclusive;

use serde::Serialize;
use thiserror::Error;

use crate::honest::{EvalError, Evaluate};
use crate::hyperint::HyperInt;

pub const DEFAULT_RANGE: RangeInclusive<u64> = 0..=16;
pub const DEFAULT_K_MAX: u64 = 6;
pub const DEFAULT_M_MAX: u64 = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error("iterate left the concrete regime at step {step}")]
    IterateOverflow { step: u64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A value of an iterate, where `Overflow` stands for a value too large to
/// represent. Overflow dominates every representable value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Iterated {
    Value(HyperInt),
    Overflow,
}

impl Iterated {
    /// `self >= other`, with overflow on the left counting as success and
    /// overflow on the right as failure.
    fn covers(&self, other: &Iterated) -> bool {
        match (self, other) {
            (Iterated::Overflow, _) => true,
            (Iterated::Value(_), Iterated::Overflow) => false,
            (Iterated::Value(a), Iterated::Value(b)) => a >= b,
        }
    }
}

impl fmt::Display for Iterated {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Iterated::Value(v) => write!(f, "{v}"),
            Iterated::Overflow => write!(f, "OVERFLOW"),
        }
    }
}

/// `f^k(x)` with every intermediate fed back concretely. Any intermediate
/// that is a tower, or too large to be an input, is an overflow.
pub fn iterate(f: &impl Evaluate, k: u64, x: u64) -> Result<HyperInt, GrowthError> {
    let mut value = HyperInt::from(x);
    let mut input = x;
    for step in 1..=k {
        value = f.value_at(input)?;
        if !value.is_exact() {
            return Err(GrowthError::IterateOverflow { step });
        }
        if step < k {
            input = value.to_u64().ok_or(GrowthError::IterateOverflow { step })?;
        }
    }
    Ok(value)
}

/// `f^0(x), ..., f^k(x)`, continuing through towers wherever `f` has a
/// symbolic extension.
pub fn iterates_symbolic(f: &impl Evaluate, k: u64, x: u64) -> Result<Vec<Iterated>, GrowthError> {
    let mut out = vec![Iterated::Value(HyperInt::from(x))];
    let mut cur = Iterated::Value(HyperInt::from(x));
    for _ in 0..k {
        cur = match &cur {
            Iterated::Overflow => Iterated::Overflow,
            Iterated::Value(v) => match f.value_at_hyper(v) {
                Ok(w) => Iterated::Value(w),
                Err(EvalError::Unfeedable { .. }) => Iterated::Overflow,
                Err(e) => return Err(e.into()),
            },
        };
        out.push(cur.clone());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Domination {
    pub holds: bool,
    /// first `(x, f(x), g(x))` with `f(x) > g(x)`
    pub counterexample: Option<(u64, HyperInt, HyperInt)>,
}

/// Pointwise `f <= g` on `range`.
pub fn dominated_on(
    f: &impl Evaluate,
    g: &impl Evaluate,
    range: RangeInclusive<u64>,
) -> Result<Domination, GrowthError> {
    for x in range {
        let (fx, gx) = (f.value_at(x)?, g.value_at(x)?);
        if fx > gx {
            return Ok(Domination { holds: false, counterexample: Some((x, fx, gx)) });
        }
    }
    Ok(Domination { holds: true, counterexample: None })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub k: u64,
    pub x: u64,
    pub fx: HyperInt,
    pub gkx: Iterated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ComparatorVerdict {
    WitnessK(u64),
    NoWitnessUpTo { k_max: u64, counterexamples: Vec<Counterexample> },
}

impl fmt::Display for ComparatorVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComparatorVerdict::WitnessK(k) => write!(f, "WitnessK({k})"),
            ComparatorVerdict::NoWitnessUpTo { k_max, counterexamples } => {
                write!(f, "NoWitnessUpTo({k_max}; {} counterexamples)", counterexamples.len())
            }
        }
    }
}

/// Smallest `k <= k_max` with `f <= g^k` on `range`.
pub fn leq_e_proxy(
    f: &impl Evaluate,
    g: &impl Evaluate,
    k_max: u64,
    range: RangeInclusive<u64>,
) -> Result<ComparatorVerdict, GrowthError> {
    let mut failures: Vec<Counterexample> = Vec::new();
    for x in range {
        let fx = f.value_at(x)?;
        let left = Iterated::Value(fx.clone());
        for (k, gkx) in iterates_symbolic(g, k_max, x)?.into_iter().enumerate() {
            if !gkx.covers(&left) {
                failures.push(Counterexample { k: k as u64, x, fx: fx.clone(), gkx });
            }
        }
    }
    for k in 0..=k_max {
        if !failures.iter().any(|c| c.k == k) {
            return Ok(ComparatorVerdict::WitnessK(k));
        }
    }
    failures.sort_by_key(|c| (c.k, c.x));
    Ok(ComparatorVerdict::NoWitnessUpTo { k_max, counterexamples: failures })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TailFailure {
    pub k: u64,
    pub m: u64,
    pub x: u64,
    pub fmx: Iterated,
    pub gkx: Iterated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum DominanceVerdict {
    WitnessK(u64),
    /// first failure found for each `k <= k_max`
    Fails { k_max: u64, first_failures: Vec<TailFailure> },
}

impl fmt::Display for DominanceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DominanceVerdict::WitnessK(k) => write!(f, "WitnessK({k})"),
            DominanceVerdict::Fails { k_max, .. } => write!(f, "Fails({k_max})"),
        }
    }
}

/// Smallest `k <= k_max` such that `f^m(x) <= g^k(x)` for every `m <= m_max`
/// and every `x` in `range` with `x >= tail_start`.
pub fn ll_e_proxy(
    f: &impl Evaluate,
    g: &impl Evaluate,
    k_max: u64,
    m_max: u64,
    tail_start: u64,
    range: RangeInclusive<u64>,
) -> Result<DominanceVerdict, GrowthError> {
    let xs: Vec<u64> = range.filter(|x| *x >= tail_start).collect();
    let mut table = Vec::with_capacity(xs.len());
    for &x in &xs {
        table.push((x, iterates_symbolic(f, m_max, x)?, iterates_symbolic(g, k_max, x)?));
    }
    let mut first_failures = Vec::new();
    for k in 0..=k_max {
        let failure = table.iter().find_map(|(x, fms, gks)| {
            let gkx = &gks[k as usize];
            fms.iter().enumerate().find(|(_, fmx)| !gkx.covers(fmx)).map(|(m, fmx)| TailFailure {
                k,
                m: m as u64,
                x: *x,
                fmx: fmx.clone(),
                gkx: gkx.clone(),
            })
        });
        match failure {
            None => return Ok(DominanceVerdict::WitnessK(k)),
            Some(fail) => first_failures.push(fail),
        }
    }
    Ok(DominanceVerdict::Fails { k_max, first_failures })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CurveRow {
    pub x: u64,
    pub fx: HyperInt,
    /// `g^1(x), ..., g^k_max(x)`
    pub g_iterates: Vec<Iterated>,
}

pub fn growth_curve(
    f: &impl Evaluate,
    g: &impl Evaluate,
    k_max: u64,
    range: RangeInclusive<u64>,
) -> Result<Vec<CurveRow>, GrowthError> {
    range
        .map(|x| {
            let fx = f.value_at(x)?;
            let mut its = iterates_symbolic(g, k_max, x)?;
            its.remove(0);
            Ok(CurveRow { x, fx, g_iterates: its })
        })
        .collect()
}

/// CSV body: `x,f(x),g^1(x),...,g^k(x)`.
pub fn curve_csv(rows: &[CurveRow], k_max: u64) -> String {
    let mut out = String::from("x,f(x)");
    for k in 1..=k_max {
        if k == 1 {
            out.push_str(",g(x)");
        } else {
            out.push_str(&format!(",g^{k}(x)"));
        }
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{}", r.x, r.fx));
        for v in &r.g_iterates {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}
