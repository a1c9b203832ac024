//! Multibiometric template protection.
//!
//! Face and iris embeddings are fused ([`fusion`]), binarized against the
//! population median and reduced to a user-specific set of reliable bits
//! ([`quantizer`]). Those bits are decoded as a noisy Reed-Solomon codeword
//! ([`rs_codec`]) and the hashed message becomes the stored template
//! ([`sketch`]). A fuzzy-commitment variant of the same construction is also
//! provided. [`eval`] measures genuine and false accept rates over code-rate
//! sweeps and [`oracle`] supplies brute-force complete decoding for small codes.

pub mod bits;
pub mod cli;
mod error;
pub mod eval;
pub mod fusion;
pub mod gf;
pub mod oracle;
pub mod pipeline;
pub mod quantizer;
pub mod rs_codec;
pub mod sketch;
pub mod store;
pub mod synth;

pub use bits::BitVector;
pub use error::{Error, Result};
pub use gf::{Field, FieldElement, Symbol};
pub use rs_codec::{DecodeOutcome, DecodePolicy, DecodeStatus, RsCode};
pub use sketch::{Decision, DecisionReason, EnrollmentRecord, Scheme};
