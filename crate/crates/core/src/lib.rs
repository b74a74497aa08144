//! Exact-arithmetic equivalence checking for probabilistic automata.
//!
//! * [`model`]: rationals, distributions, automata and the text format.
//! * [`ratlp`]: exact LP feasibility kernel.
//! * [`lifting`]: couplings, convex hulls, convex transitions.
//! * [`bisim`]: strong and convex bisimilarity by partition refinement.
//! * [`algebra`]: convex algebras of sets, termination and label families.
//! * [`transformer`]: the belief-state transformer on distributions.
//! * [`upto`]: bisimulation up-to convex hull certificates, search, refuter.

pub mod algebra;
pub mod bisim;
pub mod lifting;
pub mod model;
pub mod ratlp;
pub mod transformer;
pub mod upto;

pub use model::{Dist, Label, Pa, Rational, StateId};
