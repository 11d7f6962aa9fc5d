//! Join and meet of degree representatives as pointwise max and min.
//!
//! Degrees are never reified; every statement here is about a representative
//! function and its values.

use std::ops::RangeInclusive;
use std::rc::Rc;

use crate::honest::{check_honesty, EvalError, HonestFn, HonestyReport, Source};

/// `max[f, g]`.
pub fn join(f: Rc<HonestFn>, g: Rc<HonestFn>) -> HonestFn {
    let honest = f.is_flagged_honest() && g.is_flagged_honest();
    let label = format!("max[{}, {}]", f.label_str(), g.label_str());
    HonestFn::new(label, Source::Join(f, g), honest)
}

/// `min[f, g]`.
pub fn meet(f: Rc<HonestFn>, g: Rc<HonestFn>) -> HonestFn {
    let honest = f.is_flagged_honest() && g.is_flagged_honest();
    let label = format!("min[{}, {}]", f.label_str(), g.label_str());
    HonestFn::new(label, Source::Meet(f, g), honest)
}

/// `a = min[x, b]`: below both arms, and `(x ∪ c) ∩ (b ∪ c)` computes `a ∪ c`
/// pointwise.
pub fn cap_witness(x: Rc<HonestFn>, b: Rc<HonestFn>) -> HonestFn {
    let honest = x.is_flagged_honest() && b.is_flagged_honest();
    let label = format!("a = min[{}, {}]", x.label_str(), b.label_str());
    HonestFn::new(label, Source::Meet(x, b), honest)
}

/// A function standing for its degree, certified honest on a range.
pub struct DegreeRep {
    pub rep: Rc<HonestFn>,
    pub label: String,
    pub report: HonestyReport,
}

impl DegreeRep {
    /// Fails with the report when the honesty check does not pass.
    pub fn certify(
        rep: Rc<HonestFn>,
        label: impl Into<String>,
        range: RangeInclusive<u64>,
        degree: u32,
        constant: u64,
    ) -> Result<Result<Self, HonestyReport>, EvalError> {
        let report = check_honesty(&rep, range, degree, constant)?;
        Ok(if report.all_ok() { Ok(DegreeRep { rep, label: label.into(), report }) } else { Err(report) })
    }
}
