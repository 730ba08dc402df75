//! Rule learning from examples and background knowledge, with detection of
//! pointless rules and pruning of everything built on top of them.

pub mod bench;
pub mod engine;
pub mod generator;
pub mod logic;
pub mod micro;
pub mod oracle;
pub mod par;
pub mod parse;
pub mod pointless;
pub mod search;
pub mod symbol;
pub mod task;

pub use engine::{Background, FactStore, Program};
pub use generator::{Bias, Constraint, Generator};
pub use logic::{Hypothesis, Literal, Pred, Rule, Term};
pub use pointless::{PointlessEvidence, PointlessKind};
pub use search::{learn, CostScore, LearnConfig, LearnResult, PointlessMode, Termination};
pub use task::Task;
