//! LDPC codes for syndrome-based Slepian-Wolf coding.

mod alist;
mod code;
mod decoder;
mod degree;
mod peg;

pub use alist::{load_alist, save_alist};
pub use code::LdpcCode;
pub use decoder::{bp_decode, llr_init, BpDecoder, DecodeReport, LLR_CLAMP};
pub use degree::{DegreeDistribution, NodeCounts};
pub use peg::{build_code, CONSTRUCTION_VERSION};

/// `s = H·x`, the compressed representation of `x`.
pub fn compute_syndrome(code: &LdpcCode, x: &[u8]) -> crate::Result<Vec<u8>> {
    code.compute_syndrome(x)
}
