//! Polynomial-time simulation of surface-code error correction under
//! coherent Z-rotation noise, via fermionic Gaussian states.

pub mod engine;

pub use engine::{EngineError, GaussianState, ModeId, ModePair};

pub mod oracle;

pub mod layout;

pub mod decoder;

pub mod storage;

pub mod prep;

pub mod runner;
