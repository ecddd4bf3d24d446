//! Exact transportation distances on finite pointed metric spaces, the
//! induced norm on formal chains, Graev metrics on free abelian words with
//! integer optimality witnesses, and finite GNS constructions for positive
//! definite functions.
//!
//! The exact modules ([`space`], [`transport`], [`norm`], [`graev`]) work in
//! arbitrary-precision rational arithmetic throughout: optimal costs, dual
//! certificates, and integrality statements are checked with equality, not
//! tolerances. The spectral modules ([`gns`], [`quotient`]) use double
//! precision with explicit tolerances.
//!
//! Everything is immutable after construction and all operations are pure
//! functions, so values can be shared freely across threads.
//!
//! ```
//! use std::sync::Arc;
//! use graevkit::rational::parse_rational;
//! use graevkit::{solve_with_certificate, verify_optimality, Chain, PointedMetricSpace};
//!
//! let space = Arc::new(PointedMetricSpace::from_str_parts(
//!     &["*", "a", "b"],
//!     "*",
//!     &[&["0", "1", "1"], &["1", "0", "3/2"], &["1", "3/2", "0"]],
//! )?);
//! let chain = Chain::new(&space, [
//!     ("a".to_string(), parse_rational("2")?),
//!     ("b".to_string(), parse_rational("-1")?),
//! ])?;
//! let (plan, cost, potential) = solve_with_certificate(&space, &chain)?;
//! assert_eq!(potential.objective(&chain)?, cost);        // exact strong duality
//! assert!(verify_optimality(&space, &plan, &potential)?); // complementary slackness
//! assert!(plan.is_integral());                            // integer chain, integer optimum
//! # Ok::<(), graevkit::Error>(())
//! ```

pub mod error;
pub mod rational;
pub mod space;
pub mod transport;
pub mod norm;
pub mod certificate;
pub mod graev;
pub mod gns;
pub mod quotient;

pub use error::{Error, Result};
pub use rational::Rat;
pub use space::{
    dagger_augment, dagger_chain, rebase, validate_space, Chain, PointedMetricSpace,
    RebaseTransform, SpaceRef, ValidationReport, Violation,
};
pub use transport::{
    dual_potentials, round_to_integer_plan, solve_min_cost, solve_with_certificate,
    verify_optimality, DualPotential, TransportPlan,
};
pub use norm::{free_distance, free_norm, kantorovich_distance, ProbMeasure, RawMeasure};
pub use certificate::{certificate_for, verify_certificate, Certificate};
pub use graev::{
    enumerate_words, extend_hom, graev_distance, integer_witness, LipschitzExtension,
    LipschitzReport, MetricAbelianGroup, RawWord, Word,
};
pub use gns::{
    complexify, gns_construct, gram_matrix, psd_check, schoenberg_gram, schoenberg_value,
    verify_representation, FiniteAbelianGroup, GnsModel, GnsReport, PdFunction, RawPdFunction,
};
pub use quotient::{
    build_net, evaluate_preimage, greedy_preimage, GreedyRun, NormKind, NormedSpaceSpec, SphereNet,
};
