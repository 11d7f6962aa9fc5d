//! Step-counted machine model and its effective enumeration.
//!
//! Indices decode as follows:
//!
//! * odd `e`: `(e - 1) / 2` is the Gödel code of a [`RegisterProgram`];
//!   ill-formed codes decode to the one-instruction program `HALT`.
//! * even `e = 2 * pair(b, j)`: the padding `j` is ignored. If `b` is below the
//!   catalog length it names builtin `b`; otherwise `c = b - len` names a
//!   combinator over smaller indices, selected by `c mod 4`: cumulative hat,
//!   honest associate, parallel-both, parallel-either.
//!
//! Builtins carry a declared step cost, which lets astronomically large budgets
//! such as `2_k^m` be decided by symbolic comparison.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hyperint::HyperInt;

pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error("concrete execution of index {index} on input {input} reached the cap of {cap} steps")]
    CapExceeded { index: MachineIndex, input: u64, cap: u64 },
    #[error("index arithmetic overflowed")]
    IndexOverflow,
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MachineIndex(pub u64);

impl fmt::Display for MachineIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Cantor pairing.
pub fn pair(x: u64, y: u64) -> Option<u64> {
    let s = (x as u128) + (y as u128);
    let v = s * (s + 1) / 2 + y as u128;
    u64::try_from(v).ok()
}

pub fn unpair(z: u64) -> (u64, u64) {
    let z = z as u128;
    let w = ((8 * z + 1).isqrt() - 1) / 2;
    let t = w * (w + 1) / 2;
    let y = z - t;
    let x = w - y;
    (x as u64, y as u64)
}

// ---------------------------------------------------------------------------
// Register programs

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Instr {
    Inc(u64),
    DecJz(u64, usize),
    Halt,
}

/// Argument in register 0, result in register 0. Running past the last
/// instruction halts without charging a step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterProgram {
    instrs: Vec<Instr>,
    // dense register slots; slot 0 is register 0
    slots: Vec<u64>,
}

impl RegisterProgram {
    pub fn new(instrs: Vec<Instr>) -> Option<Self> {
        if instrs.is_empty() {
            return None;
        }
        let len = instrs.len();
        let mut slots = vec![0u64];
        for i in &instrs {
            match *i {
                Instr::Inc(r) | Instr::DecJz(r, _) if !slots.contains(&r) => slots.push(r),
                _ => {}
            }
            if let Instr::DecJz(_, l) = *i {
                if l >= len {
                    return None;
                }
            }
        }
        Some(RegisterProgram { instrs, slots })
    }

    pub fn halting() -> Self {
        RegisterProgram::new(vec![Instr::Halt]).unwrap()
    }

    pub fn instructions(&self) -> &[Instr] {
        &self.instrs
    }

    fn slot(&self, r: u64) -> usize {
        self.slots.iter().position(|&s| s == r).expect("register slot")
    }

    /// Executes at most `limit` instructions.
    pub fn execute(&self, input: u64, limit: u64) -> Execution {
        let code: Vec<(u8, usize, usize)> = self
            .instrs
            .iter()
            .map(|i| match *i {
                Instr::Inc(r) => (0, self.slot(r), 0),
                Instr::DecJz(r, l) => (1, self.slot(r), l),
                Instr::Halt => (2, 0, 0),
            })
            .collect();
        let mut regs = vec![0u64; self.slots.len()];
        regs[0] = input;
        let mut pc = 0usize;
        let mut steps = 0u64;
        while pc < code.len() {
            if steps == limit {
                return Execution::Running { steps };
            }
            steps += 1;
            let (op, r, l) = code[pc];
            match op {
                0 => {
                    regs[r] += 1;
                    pc += 1;
                }
                1 => {
                    if regs[r] == 0 {
                        pc = l;
                    } else {
                        regs[r] -= 1;
                        pc += 1;
                    }
                }
                _ => return Execution::Halted { output: regs[0], steps },
            }
        }
        Execution::Halted { output: regs[0], steps }
    }

    fn instr_code(i: Instr) -> Option<u64> {
        match i {
            Instr::Halt => Some(0),
            Instr::Inc(r) => r.checked_mul(3)?.checked_add(1),
            Instr::DecJz(r, l) => pair(r, l as u64)?.checked_mul(3)?.checked_add(2),
        }
    }

    fn decode_instr(c: u64) -> Instr {
        match c % 3 {
            0 => Instr::Halt,
            1 => Instr::Inc(c / 3),
            _ => {
                let (r, l) = unpair(c / 3);
                Instr::DecJz(r, usize::try_from(l).unwrap_or(usize::MAX))
            }
        }
    }

    /// Gödel code: `[] -> 0`, `h :: t -> pair(code(h), code(t)) + 1`.
    pub fn godel_code(&self) -> Option<u64> {
        let mut acc = 0u64;
        for i in self.instrs.iter().rev() {
            acc = pair(Self::instr_code(*i)?, acc)?.checked_add(1)?;
        }
        Some(acc)
    }

    /// Total: ill-formed codes give the halting program.
    pub fn from_godel_code(code: u64) -> Self {
        let mut instrs = Vec::new();
        let mut c = code;
        while c > 0 {
            let (h, t) = unpair(c - 1);
            instrs.push(Self::decode_instr(h));
            c = t;
        }
        RegisterProgram::new(instrs).unwrap_or_else(RegisterProgram::halting)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Halted { output: u64, steps: u64 },
    Running { steps: u64 },
}

impl fmt::Display for RegisterProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.instrs {
            match i {
                Instr::Inc(r) => writeln!(f, "INC {r}")?,
                Instr::DecJz(r, l) => writeln!(f, "DECJZ {r} {l}")?,
                Instr::Halt => writeln!(f, "HALT")?,
            }
        }
        Ok(())
    }
}

impl FromStr for RegisterProgram {
    type Err = MachineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut instrs = Vec::new();
        for (no, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| MachineError::Parse { line: no + 1, msg: msg.to_string() };
            let parts: Vec<&str> = line.split_whitespace().collect();
            let num = |t: &str| t.parse::<u64>().map_err(|_| err("expected a number"));
            let instr = match parts.as_slice() {
                ["HALT"] => Instr::Halt,
                ["INC", r] => Instr::Inc(num(r)?),
                ["DECJZ", r, l] => Instr::DecJz(num(r)?, num(l)? as usize),
                _ => return Err(err("expected `INC r`, `DECJZ r L` or `HALT`")),
            };
            instrs.push(instr);
        }
        RegisterProgram::new(instrs).ok_or(MachineError::Parse {
            line: 0,
            msg: "empty program or jump label out of range".into(),
        })
    }
}

// ---------------------------------------------------------------------------
// Builtin catalog

/// Closed-form formulas available to builtins. Not user-extensible.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formula {
    Zero,
    Id,
    Succ,
    Pow2,
    /// `2_k^n`, `k >= 1`
    Tower(u32),
    /// `2_n^n`
    TowerDiag,
    /// identity below `j`, diverges on inputs `>= j`
    PartialAt(u64),
}

impl Formula {
    pub fn is_defined(&self, n: u64) -> bool {
        match self {
            Formula::PartialAt(j) => n < *j,
            _ => true,
        }
    }

    pub fn output(&self, n: u64) -> Option<HyperInt> {
        if !self.is_defined(n) {
            return None;
        }
        Some(match self {
            Formula::Zero => HyperInt::zero(),
            Formula::Id | Formula::PartialAt(_) => HyperInt::from(n),
            Formula::Succ => HyperInt::Exact(BigUint::from(n) + 1u32),
            Formula::Pow2 => HyperInt::pow2(n),
            Formula::Tower(k) => HyperInt::tower(*k as u64, &HyperInt::from(n)),
            Formula::TowerDiag => HyperInt::tower(n, &HyperInt::from(n)),
        })
    }

    /// Declared step cost; at least 1 wherever defined.
    pub fn cost(&self, n: u64) -> Option<HyperInt> {
        if !self.is_defined(n) {
            return None;
        }
        Some(match self {
            Formula::Zero => HyperInt::one(),
            Formula::Id | Formula::Succ | Formula::PartialAt(_) => {
                HyperInt::Exact(BigUint::from(n) + 1u32)
            }
            Formula::Pow2 | Formula::Tower(_) => self.output(n)?,
            Formula::TowerDiag => HyperInt::max_h(&HyperInt::one(), &self.output(n)?),
        })
    }

    /// Extension of the output to symbolic arguments where a closed form
    /// exists. `None` means no faithful symbolic value is available.
    pub fn output_symbolic(&self, x: &HyperInt) -> Option<HyperInt> {
        if let Some(n) = x.to_u64() {
            return self.output(n);
        }
        match self {
            Formula::Zero => Some(HyperInt::zero()),
            Formula::Id => Some(x.clone()),
            Formula::Succ => match x {
                HyperInt::Exact(v) => Some(HyperInt::Exact(v + 1u32)),
                HyperInt::Tower { .. } => None,
            },
            Formula::Pow2 => Some(x.exp2()),
            Formula::Tower(k) => Some(HyperInt::tower(*k as u64, x)),
            Formula::TowerDiag | Formula::PartialAt(_) => None,
        }
    }

    pub fn monotone_output(&self) -> bool {
        true
    }

    pub fn monotone_cost(&self) -> bool {
        true
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Zero => write!(f, "zero"),
            Formula::Id => write!(f, "id"),
            Formula::Succ => write!(f, "succ"),
            Formula::Pow2 => write!(f, "pow2"),
            Formula::Tower(k) => write!(f, "tower({k})"),
            Formula::TowerDiag => write!(f, "towerdiag"),
            Formula::PartialAt(j) => write!(f, "partial_at({j})"),
        }
    }
}

impl FromStr for Formula {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let arg = |prefix: &str| -> Option<u64> {
            s.strip_prefix(prefix)?.strip_suffix(')')?.trim().parse().ok()
        };
        match s {
            "zero" => Ok(Formula::Zero),
            "id" => Ok(Formula::Id),
            "succ" => Ok(Formula::Succ),
            "pow2" => Ok(Formula::Pow2),
            "towerdiag" => Ok(Formula::TowerDiag),
            _ => {
                if let Some(k) = arg("tower(") {
                    if (1..=u32::MAX as u64).contains(&k) {
                        return Ok(Formula::Tower(k as u32));
                    }
                } else if let Some(j) = arg("partial_at(") {
                    return Ok(Formula::PartialAt(j));
                }
                Err(format!("unknown formula `{s}`"))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuiltinSpec {
    pub name: String,
    pub formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Catalog {
    entries: Vec<BuiltinSpec>,
}

impl Default for Catalog {
    fn default() -> Self {
        let mut entries = vec![
            ("ZERO", Formula::Zero),
            ("ID", Formula::Id),
            ("SUCC", Formula::Succ),
            ("POW2", Formula::Pow2),
        ];
        let towers: Vec<(String, Formula)> =
            (1..=6).map(|k| (format!("TOWER_{k}"), Formula::Tower(k))).collect();
        let mut out: Vec<BuiltinSpec> = entries
            .drain(..)
            .map(|(n, f)| BuiltinSpec { name: n.into(), formula: f })
            .collect();
        out.extend(towers.into_iter().map(|(name, formula)| BuiltinSpec { name, formula }));
        out.push(BuiltinSpec { name: "TOWERDIAG".into(), formula: Formula::TowerDiag });
        for j in [1u64, 2, 4] {
            out.push(BuiltinSpec { name: format!("PARTIAL_AT_{j}"), formula: Formula::PartialAt(j) });
        }
        Catalog { entries: out }
    }
}

impl Catalog {
    pub fn new(entries: Vec<BuiltinSpec>) -> Self {
        Catalog { entries }
    }

    /// Parses `NAME = formula` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, MachineError> {
        let mut entries = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| MachineError::Parse { line: no + 1, msg };
            let (name, formula) =
                line.split_once('=').ok_or_else(|| err("expected `NAME = formula`".into()))?;
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(err(format!("bad builtin name `{name}`")));
            }
            if entries.iter().any(|b: &BuiltinSpec| b.name == name) {
                return Err(err(format!("duplicate builtin `{name}`")));
            }
            let formula = formula.parse::<Formula>().map_err(err)?;
            entries.push(BuiltinSpec { name: name.to_string(), formula });
        }
        if entries.is_empty() {
            return Err(MachineError::Parse { line: 0, msg: "empty catalog".into() });
        }
        Ok(Catalog { entries })
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|b| format!("{} = {}\n", b.name, b.formula)).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, b: usize) -> Option<&BuiltinSpec> {
        self.entries.get(b)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|b| b.name == name)
    }

    pub fn entries(&self) -> &[BuiltinSpec] {
        &self.entries
    }
}

// ---------------------------------------------------------------------------
// Enumeration and execution

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Program {
    Register(RegisterProgram),
    Builtin(usize),
    /// Runs the inner machine on `0..=n`, halts with 0 iff all halt.
    Hat(MachineIndex),
    /// Like `Hat` but outputs `max(2^n, total steps)`.
    Associate(MachineIndex),
    /// Parallel run, converges when both arms converge.
    Both(MachineIndex, MachineIndex),
    /// Parallel run, converges when either arm converges.
    Either(MachineIndex, MachineIndex),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Halted { output: HyperInt, steps: HyperInt },
    StillRunning { spent: HyperInt },
}

impl RunOutcome {
    pub fn halted(&self) -> Option<(&HyperInt, &HyperInt)> {
        match self {
            RunOutcome::Halted { output, steps } => Some((output, steps)),
            RunOutcome::StillRunning { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DovetailOutcome {
    FirstHalt {
        /// position of the winner in the task list
        position: usize,
        index: MachineIndex,
        input: u64,
        output: HyperInt,
        steps: HyperInt,
        /// tasks that halted at the same quantum as the winner, winner included
        ties: usize,
        /// total quanta consumed across all tasks
        quanta: HyperInt,
    },
    NoneHalted {
        quanta: HyperInt,
    },
}

/// The enumeration `e -> Φ_e` over a fixed catalog.
#[derive(Clone, Debug, Default)]
pub struct Enumeration {
    catalog: Catalog,
}

fn remaining(budget: &HyperInt, spent: &HyperInt) -> HyperInt {
    match (budget, spent) {
        (HyperInt::Exact(b), HyperInt::Exact(s)) if b >= s => HyperInt::Exact(b - s),
        (HyperInt::Exact(_), _) => HyperInt::zero(),
        // a tower budget is not measurably reduced by anything below it
        (HyperInt::Tower { .. }, _) if spent < budget => budget.clone(),
        _ => HyperInt::zero(),
    }
}

fn half(budget: &HyperInt) -> HyperInt {
    match budget {
        HyperInt::Exact(b) => HyperInt::Exact(b >> 1u32),
        HyperInt::Tower { .. } => budget.clone(),
    }
}

impl Enumeration {
    pub fn new(catalog: Catalog) -> Self {
        Enumeration { catalog }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn decode(&self, e: MachineIndex) -> Program {
        let e = e.0;
        if e % 2 == 1 {
            return Program::Register(RegisterProgram::from_godel_code((e - 1) / 2));
        }
        let (b, _padding) = unpair(e / 2);
        let len = self.catalog.len() as u64;
        if b < len {
            return Program::Builtin(b as usize);
        }
        let c = b - len;
        let inner = c / 4;
        match c % 4 {
            0 => Program::Hat(MachineIndex(inner)),
            1 => Program::Associate(MachineIndex(inner)),
            2 => {
                let (x, y) = unpair(inner);
                Program::Both(MachineIndex(x), MachineIndex(y))
            }
            _ => {
                let (x, y) = unpair(inner);
                Program::Either(MachineIndex(x), MachineIndex(y))
            }
        }
    }

    fn even_index(b: u64, padding: u64) -> Result<MachineIndex, MachineError> {
        pair(b, padding)
            .and_then(|p| p.checked_mul(2))
            .map(MachineIndex)
            .ok_or(MachineError::IndexOverflow)
    }

    pub fn builtin_index(&self, b: usize, padding: u64) -> Result<MachineIndex, MachineError> {
        if b >= self.catalog.len() {
            return Err(MachineError::UnknownBuiltin(b.to_string()));
        }
        Self::even_index(b as u64, padding)
    }

    pub fn builtin_named(&self, name: &str) -> Result<MachineIndex, MachineError> {
        let b = self
            .catalog
            .position(name)
            .ok_or_else(|| MachineError::UnknownBuiltin(name.to_string()))?;
        self.builtin_index(b, 0)
    }

    fn combinator_index(&self, kind: u64, inner: u64) -> Result<MachineIndex, MachineError> {
        let c = inner.checked_mul(4).and_then(|v| v.checked_add(kind));
        let b = c.and_then(|c| c.checked_add(self.catalog.len() as u64));
        Self::even_index(b.ok_or(MachineError::IndexOverflow)?, 0)
    }

    pub fn hat_index(&self, e: MachineIndex) -> Result<MachineIndex, MachineError> {
        self.combinator_index(0, e.0)
    }

    pub fn associate_index(&self, e: MachineIndex) -> Result<MachineIndex, MachineError> {
        self.combinator_index(1, e.0)
    }

    pub fn both_index(&self, a: MachineIndex, b: MachineIndex) -> Result<MachineIndex, MachineError> {
        self.combinator_index(2, pair(a.0, b.0).ok_or(MachineError::IndexOverflow)?)
    }

    pub fn either_index(&self, a: MachineIndex, b: MachineIndex) -> Result<MachineIndex, MachineError> {
        self.combinator_index(3, pair(a.0, b.0).ok_or(MachineError::IndexOverflow)?)
    }

    pub fn program_index(&self, p: &RegisterProgram) -> Result<MachineIndex, MachineError> {
        p.godel_code()
            .and_then(|c| c.checked_mul(2))
            .and_then(|c| c.checked_add(1))
            .map(MachineIndex)
            .ok_or(MachineError::IndexOverflow)
    }

    /// Resolves a textual machine reference: a decimal index or a builtin name.
    pub fn resolve(&self, text: &str) -> Result<MachineIndex, MachineError> {
        match text.parse::<u64>() {
            Ok(e) => Ok(MachineIndex(e)),
            Err(_) => self.builtin_named(text),
        }
    }

    /// True when `Φ_e(n)` is known to diverge from the declared catalog alone.
    pub fn declared_divergent(&self, e: MachineIndex, n: u64) -> bool {
        match self.decode(e) {
            Program::Builtin(b) => !self.catalog.entries[b].formula.is_defined(n),
            _ => false,
        }
    }

    pub fn run(
        &self,
        e: MachineIndex,
        n: u64,
        budget: &HyperInt,
        cap: u64,
    ) -> Result<RunOutcome, MachineError> {
        match self.decode(e) {
            Program::Register(p) => {
                let (limit, capped) = match budget.to_u64() {
                    Some(b) if b <= cap => (b, false),
                    _ => (cap, true),
                };
                match p.execute(n, limit) {
                    Execution::Halted { output, steps } => Ok(RunOutcome::Halted {
                        output: HyperInt::from(output),
                        steps: HyperInt::from(steps),
                    }),
                    Execution::Running { .. } if capped => {
                        Err(MachineError::CapExceeded { index: e, input: n, cap })
                    }
                    Execution::Running { steps } => {
                        Ok(RunOutcome::StillRunning { spent: HyperInt::from(steps) })
                    }
                }
            }
            Program::Builtin(b) => {
                let formula = self.catalog.entries[b].formula;
                match (formula.output(n), formula.cost(n)) {
                    (Some(output), Some(cost)) if cost <= *budget => {
                        Ok(RunOutcome::Halted { output, steps: cost })
                    }
                    _ => Ok(RunOutcome::StillRunning { spent: budget.clone() }),
                }
            }
            Program::Hat(inner) => self.run_cumulative(inner, n, budget, cap, false),
            Program::Associate(inner) => self.run_cumulative(inner, n, budget, cap, true),
            Program::Both(a, b) => {
                let arm = half(budget);
                let ra = self.run(a, n, &arm, cap)?;
                let rb = self.run(b, n, &arm, cap)?;
                match (ra.halted(), rb.halted()) {
                    (Some((_, sa)), Some((_, sb))) => {
                        let steps = HyperInt::max_h(sa, sb).mul_small(2).value;
                        Ok(self.settle(steps, budget))
                    }
                    _ => Ok(RunOutcome::StillRunning { spent: budget.clone() }),
                }
            }
            Program::Either(a, b) => {
                let arm = half(budget);
                let ra = self.run(a, n, &arm, cap)?;
                let rb = self.run(b, n, &arm, cap)?;
                let first = match (ra.halted(), rb.halted()) {
                    (Some((_, sa)), Some((_, sb))) => Some(HyperInt::min_h(sa, sb)),
                    (Some((_, s)), None) | (None, Some((_, s))) => Some(s.clone()),
                    (None, None) => None,
                };
                match first {
                    Some(s) => Ok(self.settle(s.mul_small(2).value, budget)),
                    None => Ok(RunOutcome::StillRunning { spent: budget.clone() }),
                }
            }
        }
    }

    fn settle(&self, steps: HyperInt, budget: &HyperInt) -> RunOutcome {
        if steps <= *budget {
            RunOutcome::Halted { output: HyperInt::zero(), steps }
        } else {
            RunOutcome::StillRunning { spent: budget.clone() }
        }
    }

    fn run_cumulative(
        &self,
        inner: MachineIndex,
        n: u64,
        budget: &HyperInt,
        cap: u64,
        associate: bool,
    ) -> Result<RunOutcome, MachineError> {
        let mut total = HyperInt::zero();
        for m in 0..=n {
            let left = remaining(budget, &total);
            match self.run(inner, m, &left, cap)? {
                RunOutcome::Halted { steps, .. } => {
                    total = HyperInt::add_saturating(&total, &steps).value;
                }
                RunOutcome::StillRunning { .. } => {
                    return Ok(RunOutcome::StillRunning { spent: budget.clone() });
                }
            }
        }
        if total > *budget {
            return Ok(RunOutcome::StillRunning { spent: budget.clone() });
        }
        let output = if associate {
            HyperInt::max_h(&HyperInt::pow2(n), &total)
        } else {
            HyperInt::zero()
        };
        Ok(RunOutcome::Halted { output, steps: total })
    }

    /// Round-robin simulation, one step per task per round. The task halting
    /// at the earliest round wins; ties go to the earlier list position.
    pub fn dovetail(
        &self,
        tasks: &[(MachineIndex, u64)],
        budget: &HyperInt,
        cap: u64,
    ) -> Result<DovetailOutcome, MachineError> {
        let mut best: Option<(usize, HyperInt, HyperInt)> = None;
        let mut ties = 0usize;
        let mut cap_error: Option<MachineError> = None;
        for (pos, &(e, input)) in tasks.iter().enumerate() {
            let b = match &best {
                Some((_, _, steps)) => HyperInt::min_h(budget, steps),
                None => budget.clone(),
            };
            match self.run(e, input, &b, cap) {
                Ok(RunOutcome::Halted { output, steps }) => match &best {
                    Some((_, _, s)) if steps == *s => ties += 1,
                    Some((_, _, s)) if steps > *s => {}
                    _ => {
                        best = Some((pos, output, steps));
                        ties = 1;
                    }
                },
                Ok(RunOutcome::StillRunning { .. }) => {}
                Err(err @ MachineError::CapExceeded { .. }) => {
                    cap_error.get_or_insert(err);
                }
                Err(err) => return Err(err),
            }
        }
        // A concrete task stuck at the cap is reached before any later quantum.
        if let Some(err) = cap_error {
            let winner_before_cap = matches!(&best, Some((_, _, s)) if *s <= HyperInt::from(cap));
            if !winner_before_cap {
                return Err(err);
            }
        }
        let count = tasks.len() as u64;
        Ok(match best {
            Some((position, output, steps)) => {
                // earlier tasks ran `steps` quanta, later ones one fewer
                let earlier = steps.mul_small(position as u64 + 1).value;
                let later_each = match &steps {
                    HyperInt::Exact(s) => HyperInt::Exact(s - 1u32),
                    t => t.clone(),
                };
                let later = later_each.mul_small(count - position as u64 - 1).value;
                let quanta = HyperInt::add_saturating(&earlier, &later).value;
                let (index, input) = tasks[position];
                DovetailOutcome::FirstHalt { position, index, input, output, steps, ties, quanta }
            }
            None => DovetailOutcome::NoneHalted { quanta: budget.mul_small(count).value },
        })
    }

    /// Sequential `Φ_e` on a list of inputs, used by tests and the FFI layer.
    pub fn run_many(
        &self,
        e: MachineIndex,
        inputs: impl IntoIterator<Item = u64>,
        budget: &HyperInt,
        cap: u64,
    ) -> Result<BTreeMap<u64, RunOutcome>, MachineError> {
        inputs.into_iter().map(|n| Ok((n, self.run(e, n, budget, cap)?))).collect()
    }
}

/// Converts an exact step count to `u64` where one is needed for indexing.
pub fn steps_u64(h: &HyperInt) -> Option<u64> {
    h.as_exact().and_then(|v| v.to_u64())
}
