//! Slepian-Wolf compression of quantized continuous-valued sources with LDPC
//! syndromes, modeling the binary correlation with one binary symmetric
//! channel per bit-plane.

pub mod bitplane;
pub mod cache;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiment;
pub mod ldpc;
pub mod par;
pub mod quantizer;
pub mod schemes;
pub mod seed;

pub use error::{Error, Result};
