//! Exact multiplicative measures on integer partitions.

pub mod arith;
pub mod cfp;
pub mod diagnostics;
pub mod error;
pub mod limits;
pub mod logseries;
pub mod measure;
pub mod oracle;
pub mod series;
pub mod specfile;
pub mod verify;
pub mod weights;

pub use arith::{Number, Rational};
pub use error::{Error, Result};
pub use limits::WorkLimits;
pub use measure::{CountLawTable, LawKind, Measure, PartitionState, TiltedSpec};
pub use series::{ScaledTables, Series};
pub use weights::{Factor, Family, ParamGen, Preset, ScaledWeights, TailRule, WeightSpec};
