//! Exact and numerical tools for the concordance of real algebraic
//! surfaces: lattice isometries and their entropy, Néron-Severi models,
//! abelian-surface certificates, rank-2 fundamental domains, Vieta dynamics
//! on a K3 deformation family, and Cauchy-Crofton length estimation.

pub mod crofton;
pub mod error;
pub mod fdomain;
pub mod lattice;
pub mod ns_models;
pub mod torus;
pub mod vieta;
pub mod poly;

pub use error::{Error, Result};
