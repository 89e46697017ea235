//! Recognition of lattices generated by chip-firing games.
//!
//! The pipeline: parse a finite poset given by its cover relation
//! ([`lattice`]), certify that it is an upper locally distributive lattice,
//! derive the per-meet-irreducible constraint systems ([`feasibility`]),
//! decide membership in the game-generated lattice classes and synthesize a
//! witness game ([`recognize`]), then certify the witness by simulating it
//! ([`engine`]) and checking isomorphism with the input ([`verify`]).
//!
//! ```
//! use cfgkit::lattice::{validate_lattice, check_uld, compute_context, CoverDag};
//! use cfgkit::recognize::{recognize_cfg, Recognition};
//! use cfgkit::verify::verify_witness;
//!
//! let dag = CoverDag::parse("0 a\n0 b\na 1\nb 1")?;
//! let lat = validate_lattice(dag)?;
//! let cert = check_uld(&lat)?;
//! let ctx = compute_context(&lat, &cert)?;
//! let Recognition::Accepted(witness) = recognize_cfg(&lat, &cert, &ctx)? else {
//!     unreachable!("the diamond is game-generated");
//! };
//! assert!(verify_witness(&witness, &lat, &cert, 1_000_000)?.passed());
//! # Ok::<(), cfgkit::Error>(())
//! ```

pub mod engine;
pub mod error;
pub mod feasibility;
pub mod lattice;
pub mod recognize;
pub mod verify;

pub use error::{Error, Result};

/// Reserved vertex id used for the sink of synthesized games. Never valid as
/// a lattice element id.
pub const SINK_ID: &str = "__sink";
