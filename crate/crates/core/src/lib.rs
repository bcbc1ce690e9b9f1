pub mod character_table;
pub mod characters;
pub mod equivariant;
pub mod error;
pub mod finite_group;
pub mod group_ring;
pub mod linalg;
pub mod quotient;
pub mod rational;
pub mod runner;
pub mod spectral;
pub mod words;

pub use error::{Error, Result};
