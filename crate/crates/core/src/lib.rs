//! Hamiltonian vector fields on the two-torus and their orbital invariants.
//!
//! - [`field`]: the analytic family, its Jacobian and generic planar fields
//! - [`singularity`]: zeros, their classification and the saddle triple
//! - [`flow`]: trajectories, the meridian return map, separatrices, level curves
//! - [`connection`]: the connection surface `d = D(phi, b, c)` and the grid verification
//! - [`rotation`]: rotation numbers and the bounded-horizon `E_phi` equivalence
//! - [`synthetic`]: the combinatorial model family and its equivalence oracle
//! - [`dulac`]: Dulac maps of saddles and exponent fits
//! - [`portrait`]: SVG phase portraits

pub mod connection;
pub mod dulac;
pub mod error;
pub mod field;
pub mod flow;
pub mod ode;
pub mod portrait;
pub mod rotation;
pub mod singularity;
pub mod synthetic;

pub use error::{Error, Result};
pub use field::{FieldParams, PlanarField, TorusPoint, Vec2};
pub use flow::TorusFlow;
pub use singularity::{find_zeros, Kind, Singularity};
