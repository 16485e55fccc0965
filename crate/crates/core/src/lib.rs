//! Revealed-preference analysis of finite consumer-choice data.
//!
//! The crate decides the classical consistency axioms (WARP, WGARP, SARP,
//! GARP, the law of demand and its cyclical strengthening), constructs the
//! number systems that certify them, and builds the *maximin preference
//! function*: a skew-symmetric, possibly intransitive preference
//! `r(x, y)` assembled from pairwise Afriat utilities through a zero-sum
//! matrix game. On top of that sit preference-recovery bounds and
//! counterfactual demand sets.
//!
//! ```
//! use weakrp::{axioms, fixtures, DEFAULT_TOL};
//!
//! let d = fixtures::example1();
//! assert!(axioms::check_wgarp(&d, DEFAULT_TOL).holds);
//! assert!(!axioms::check_garp(&d, DEFAULT_TOL).holds);
//! ```
//!
//! Observation indices are zero-based throughout the library.

pub mod afriat;
pub mod axioms;
pub mod counterfactual;
pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod lp;
pub mod maximin;
pub mod quasilinear;
pub mod random;
pub mod recover;
#[cfg(feature = "selfcheck")]
pub mod selfcheck;

pub use dataset::{
    direct_relations, expenditure_matrix, transitive_closure, Dataset, ExpenditureMatrix,
    RelationMatrices, DEFAULT_TOL,
};
pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data-and-relations.md")]
    mod data_and_relations {}
    #[doc = include_str!("../../../book/src/axioms.md")]
    mod axioms {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/maximin.md")]
    mod maximin {}
    #[doc = include_str!("../../../book/src/recoverability.md")]
    mod recoverability {}
    #[doc = include_str!("../../../book/src/counterfactuals.md")]
    mod counterfactuals {}
    #[doc = include_str!("../../../book/src/quasilinear.md")]
    mod quasilinear {}
}
