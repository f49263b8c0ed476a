//! Numerical regularity classification of Wiener-Hopf plus Hankel operators
//! `W_φ + H_φ` on the half-line from their Fourier symbol `φ`.

pub mod classify;
pub mod dsl;
pub mod error;
pub mod grid;
pub mod hardy;
pub mod lab;
pub mod nehari;
pub mod symbol;

pub use error::{Error, Result};
