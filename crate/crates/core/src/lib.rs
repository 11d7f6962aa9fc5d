//! Desk-scale laboratory for the anti-cupping construction in the honest
//! elementary degrees and its provability analogue.
//!
//! [`hyperint`] supplies exact integers extended with symbolic towers,
//! [`machine`] the enumeration of step-counted machines, and the remaining
//! modules build the constructions on top of them.

pub mod cupping;
pub mod growth;
pub mod honest;
pub mod hyperint;
pub mod lattice;
pub mod machine;
pub mod ordinals;
pub mod provability;
pub mod trace;

pub use cupping::{psi_as_honest_fn, psi_run, PsiConfig, PsiError, PsiMachine, TraceEvent};
pub use honest::{check_honesty, honest_associate, EvalError, Evaluate, HonestFn};
pub use hyperint::HyperInt;
pub use machine::{Catalog, Enumeration, MachineIndex};
pub use ordinals::{OrdinalCnf, FundSource};
