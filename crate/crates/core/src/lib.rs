//! Dynamical embeddings of networks: similarity and distance matrices
//! derived from linear dynamics, spectral embeddings, multiscale clustering,
//! and a leaky integrate-and-fire network generator and simulator.

pub mod cli;
pub mod clustering;
pub mod datasets;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod io;
pub mod lif;
pub mod linalg;
pub mod linsys;
pub mod partition;
pub mod similarity;

pub use error::{Error, Result};
