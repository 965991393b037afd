//! Variational quantum regression toolkit.
pub mod circuits;
pub mod data;
pub mod engine;
pub mod linalg;
pub mod optim;
pub mod sim;
pub mod sweep;
pub mod synth;
