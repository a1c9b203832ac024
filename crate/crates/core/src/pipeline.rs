//! End-to-end enrollment and verification from fused feature vectors.
//!
//! Enrollment averages the user's enrollment vectors, binarizes the mean
//! against the population median, selects `G = m·(2^m − 1)` reliable
//! components and runs the configured scheme on those bits. Verification
//! binarizes one probe vector, gathers the bits named by the presented key
//! and authenticates against the stored record.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::quantizer::{
    binarize, extract, reliability, select_reliable, Nonce, PopulationStats, ReliableKey, UserStats,
    DEFAULT_WINDOW,
};
use crate::rs_codec::{DecodePolicy, RsCode};
use crate::sketch::{authenticate, enroll_fc, enroll_ss, Decision, EnrollmentRecord, Salt, Scheme};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineConfig {
    pub m: u32,
    /// Message length in symbols.
    pub k: usize,
    pub scheme: Scheme,
    pub policy: DecodePolicy,
    /// Candidate pool factor for reliable-component selection.
    pub window: f64,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(m: u32, k: usize) -> Self {
        PipelineConfig {
            m,
            k,
            scheme: Scheme::SecureSketch,
            policy: DecodePolicy::FallbackSystematic,
            window: DEFAULT_WINDOW,
            seed: 0,
        }
    }

    pub fn code(&self) -> Result<RsCode> {
        RsCode::with_m(self.m, self.k)
    }

    /// Number of reliable components, equal to the codeword size in bits.
    pub fn g(&self) -> usize {
        self.m as usize * ((1usize << self.m) - 1)
    }

    pub fn security_bits(&self) -> usize {
        self.m as usize * self.k
    }
}

/// Deterministic per-purpose RNG derived from a master seed.
pub fn derived_rng(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Per-enrollment randomness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnrollmentSecrets {
    pub nonce: Nonce,
    pub salt: Salt,
    pub message_seed: u64,
}

impl EnrollmentSecrets {
    pub fn derive(seed: u64, subject_index: u64, attempt: u64) -> Self {
        let mut rng = derived_rng(seed, "enroll", subject_index ^ (attempt << 32));
        EnrollmentSecrets {
            nonce: Nonce::random(&mut rng),
            salt: Salt::random(&mut rng),
            message_seed: rand::Rng::random(&mut rng),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Enrollment {
    pub record: EnrollmentRecord,
    pub key: ReliableKey,
    /// The averaged vector whose bits were enrolled; never persisted.
    pub reference: Vec<f64>,
}

impl Enrollment {
    pub fn reliable_bits(&self, pop: &PopulationStats) -> Result<BitVector> {
        probe_bits(&self.reference, pop, &self.key)
    }
}

pub fn enroll<V: AsRef<[f64]>>(
    subject_id: &str,
    samples: &[V],
    pop: &PopulationStats,
    code: &RsCode,
    cfg: &PipelineConfig,
    secrets: EnrollmentSecrets,
) -> Result<Enrollment> {
    if code.m() != cfg.m || code.k() != cfg.k {
        return Err(Error::ParameterMismatch("code does not match pipeline config".into()));
    }
    let user = UserStats::from_samples(samples)?;
    let scores = reliability(&user, pop)?;
    let key = select_reliable(&scores, cfg.g(), secrets.nonce, cfg.window)?;
    let r_a = extract(&binarize(&user.mean, pop)?, &key)?;
    let record = match cfg.scheme {
        Scheme::SecureSketch => enroll_ss(subject_id, &r_a, code, cfg.policy, secrets.salt)?,
        Scheme::FuzzyCommitment => {
            enroll_fc(subject_id, &r_a, code, cfg.policy, secrets.message_seed, secrets.salt)?
        }
    };
    Ok(Enrollment {
        record,
        key,
        reference: user.mean,
    })
}

/// Cancelable template of a probe vector under a presented key.
pub fn probe_bits(e: &[f64], pop: &PopulationStats, key: &ReliableKey) -> Result<BitVector> {
    extract(&binarize(e, pop)?, key)
}

pub fn verify(
    e: &[f64],
    pop: &PopulationStats,
    key: &ReliableKey,
    record: &EnrollmentRecord,
    code: &RsCode,
) -> Result<Decision> {
    authenticate(&probe_bits(e, pop, key)?, record, code)
}
