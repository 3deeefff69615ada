//! Exact maximal operators on trees of bounded geometry.

pub mod certified;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod function;
pub mod graph;
pub mod lorentz;
pub mod maximal;
pub mod tree;

pub use certified::{Exponent, PowProduct, Real};
pub use error::{Error, Result};
pub use experiments::{Experiment, ExperimentReport, Verdict};
pub use function::FiniteFunction;
pub use graph::{DistanceTable, SimpleGraph};
pub use lorentz::LorentzIndex;
pub use maximal::{MaximalKind, MaximalValue};
pub use tree::{Family, Tree, TreeSpec, VertexAddress, DEFAULT_GUARD};
