//! Exact combinatorics of quasitoric manifolds and small covers: simple
//! polytopes, characteristic matrices, degree-4 cohomology, spin and string
//! tests, structural decompositions and bounded enumeration campaigns.

pub mod error;
pub mod intmat;
pub mod charmat;
pub mod cohomology;
pub mod polytope;
pub mod stringcheck;
pub mod structure;
pub mod smallcover;
pub mod harness;
pub mod io;

pub use error::{Error, Result};
pub use charmat::{CharMatrix, Dedup};
pub use polytope::SimplePolytope;
