//! Numerics for bipartite qubit entanglement monogamy: tangle, linear
//! entropy, the one-way correlation measure, the linear Holevo capacity of
//! qubit channels, and batch verification campaigns over random and named
//! multiqubit states.

pub mod campaign;
pub mod channels;
pub mod error;
pub mod io;
pub mod measures;
pub mod monogamy;
pub mod qlinalg;
pub mod states;

pub use error::{Error, Result};
