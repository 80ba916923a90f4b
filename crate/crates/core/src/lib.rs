//! Shift spaces over free groups and free monoids: pseudo-orbits and
//! shadowing, internal chain transitivity, and limit sets along words.

pub mod codec;
pub mod dyadic;
pub mod error;
pub mod fixtures;
pub mod limits;
pub mod orbits;
pub mod patterns;
pub mod shifts;
pub mod transitivity;
pub mod words;

pub use dyadic::{Dyadic, DyadicDistance};
pub use error::{Error, Result};
pub use limits::{LimitApproximation, LimitKind, Realization, RealizeMode};
pub use orbits::{PseudoOrbit, ShadowingOracle, TailRule};
pub use patterns::{distance, hausdorff, Alphabet, Block, Configuration, SiteTree, Sym, WordAutomaton};
pub use shifts::{ForbiddenFamily, ShiftSystem};
pub use words::{EventuallyPeriodicWord, Letter, ReducedWord, Signature, SignatureKind};
