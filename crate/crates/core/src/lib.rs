//! Synthesis of past-time Signal Temporal Logic formulas from traces whose
//! time points are labeled with a binary property.
//!
//! The pipeline is:
//!
//! 1. [`trace`] loads labeled traces into a [`Dataset`].
//! 2. [`enumerate`] builds the space of templates up to an operator budget.
//! 3. [`search`] fits the parameters of each template under a false-positive
//!    bound, exploiting monotonicity to visit few grid points.
//! 4. [`synthesis`] greedily combines fitted templates into a disjunction.

pub mod bits;
pub mod cli;
pub mod datagen;
pub mod domains;
pub mod enumerate;
pub mod eval;
pub mod formula;
pub mod parse;
pub mod search;
pub mod synthesis;
pub mod template;
pub mod trace;

pub use bits::BitVector;
pub use datagen::{planted_dataset, traffic_dataset};
pub use domains::DomainConfig;
pub use enumerate::{formula_space, prune, shift_wrap};
pub use eval::{label_vector, metrics, EvalError, Metrics, Score};
pub use formula::{Cmp, Expr, Formula, Interval};
pub use parse::{parse_formula, ParseError};
pub use search::{binary_search_1p, diagonal_search, parameter_synthesis, SearchResult};
pub use synthesis::{formula_synthesis, SynthesisResult};
pub use template::{Monotonicity, ParamDomain, Template, Valuation};
pub use trace::{Dataset, DatasetError, LabeledTrace};
