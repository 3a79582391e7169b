pub mod affinization;
pub mod cache;
pub mod cartan;
pub mod cli;
pub mod cluster;
pub mod error;
pub mod monomial;
pub mod poly;
pub mod qchar;
pub mod sl2;

pub use cartan::CartanData;
pub use error::{Error, Result};
pub use monomial::{a_monomial, decompose_in_a_lattice, leq, ALatticePoint, Monomial};
