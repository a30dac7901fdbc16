//! Nominal rewriting and combinatory reduction systems, with translations in both directions.

pub mod error;
pub mod fresh;
pub mod names;
pub mod nominal;
pub mod crs;
pub mod perm;
pub mod rewrite;
pub mod nrs_to_crs;
pub mod crs_to_nrs;
pub mod syntax;

pub use error::{Error, Result};
pub use fresh::FreshNameSource;
pub use names::{Atom, FunSym, VarName};
pub use nominal::{derive_alpha, derive_fresh, FreshCtx, Position, Subst, Term};
pub use perm::{ds, ArrayMapping, Permutation, Swapping};
