//! Evolutionary molecular design over heavy-atom graphs, with bandit-guided
//! mutation selection and a fingerprint-based realism filter.

pub mod engine;
pub mod fingerprint;
pub mod harness;
pub mod molgraph;
pub mod policy;
pub mod realism;
pub mod smiles;
