//! Secure-sketch and fuzzy-commitment enrollment and authentication.
//!
//! Secure sketch: the reliable bits are decoded as a noisy RS codeword and the
//! `K·m` message bits of the result (the sketch) are hashed with a salt. Only
//! the digest is stored.
//!
//! Fuzzy commitment: a random message is encoded to a codeword `c`, the offset
//! `w = c ⊕ r_a` and the salted digest of the message are stored. A probe
//! `r_b` is accepted when `w ⊕ r_b` decodes back to the message.
//!
//! # Record format
//!
//! UTF-8 text, one `key=value` per line, in this order:
//!
//! ```text
//! mbsketch-record
//! version=1
//! subject_id=<id>
//! scheme=ss | fc
//! m=<symbol bits>
//! k=<message symbols>
//! poly=0x<primitive polynomial, lowercase hex>
//! policy=fallback | fail-deny
//! salt=<32 lowercase hex digits>
//! digest=<64 lowercase hex digits>
//! offset=<hex, m·(2^m−1) bits packed MSB-first, zero padded>   (fc only)
//! ```

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest as _, Sha256};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::gf::Symbol;
use crate::rs_codec::{bits_to_symbols, symbols_to_bits, DecodePolicy, RsCode};

const RECORD_HEADER: &str = "mbsketch-record";
const RECORD_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Scheme {
    #[default]
    SecureSketch,
    FuzzyCommitment,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::SecureSketch => "ss",
            Scheme::FuzzyCommitment => "fc",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ss" => Ok(Scheme::SecureSketch),
            "fc" => Ok(Scheme::FuzzyCommitment),
            _ => Err(Error::Parse(format!("unknown scheme {s:?}"))),
        }
    }
}

/// Per-enrollment random salt mixed into the digest.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Salt(pub [u8; 16]);

impl Salt {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut b = [0u8; 16];
        rng.fill(&mut b);
        Salt(b)
    }
}

impl fmt::Debug for Salt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Salt({})", hex::encode(self.0))
    }
}

pub type Digest = [u8; 32];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecisionReason {
    HashMatch,
    HashMismatch,
    DecodeFailure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub accepted: bool,
    pub reason: DecisionReason,
}

impl Decision {
    fn from_match(matched: bool) -> Self {
        if matched {
            Decision {
                accepted: true,
                reason: DecisionReason::HashMatch,
            }
        } else {
            Decision {
                accepted: false,
                reason: DecisionReason::HashMismatch,
            }
        }
    }

    fn decode_failure() -> Self {
        Decision {
            accepted: false,
            reason: DecisionReason::DecodeFailure,
        }
    }
}

/// The stored template. It never holds the reliable bits, the sketch or the
/// key indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnrollmentRecord {
    pub subject_id: String,
    pub scheme: Scheme,
    pub m: u32,
    pub k: usize,
    pub poly: u32,
    pub policy: DecodePolicy,
    pub salt: Salt,
    pub hash_digest: Digest,
    /// Fuzzy commitment only: `c ⊕ r_a`.
    pub offset: Option<BitVector>,
}

/// Subject ids double as file names: ASCII letters, digits, `.`, `_`, `-`,
/// not starting with `.`.
pub fn validate_subject_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidSubjectId(id.to_owned()))
    }
}

/// SHA-256 over `salt ‖ u64_le(bit length) ‖ MSB-first packed bits`.
pub fn hash_sketch(bits: &BitVector, salt: &Salt) -> Digest {
    let mut h = Sha256::new();
    h.update(salt.0);
    h.update((bits.len() as u64).to_le_bytes());
    h.update(bits.to_bytes());
    h.finalize().into()
}

fn check_len(bits: &BitVector, code: &RsCode) -> Result<()> {
    if bits.len() != code.n_bits() {
        return Err(Error::LengthMismatch {
            expected: code.n_bits(),
            actual: bits.len(),
        });
    }
    Ok(())
}

/// Decodes a bit vector and returns the message symbols, or `None` on
/// decode failure.
fn decode_message(bits: &BitVector, code: &RsCode, policy: DecodePolicy) -> Result<Option<Vec<Symbol>>> {
    let received = bits_to_symbols(bits, code.m())?;
    Ok(code.decode(&received, policy)?.message)
}

pub fn enroll_ss(
    subject_id: &str,
    r_a: &BitVector,
    code: &RsCode,
    policy: DecodePolicy,
    salt: Salt,
) -> Result<EnrollmentRecord> {
    validate_subject_id(subject_id)?;
    check_len(r_a, code)?;
    let message = decode_message(r_a, code, policy)?.ok_or(Error::EnrollmentDecodeFailure)?;
    let sketch = symbols_to_bits(&message, code.m())?;
    Ok(EnrollmentRecord {
        subject_id: subject_id.to_owned(),
        scheme: Scheme::SecureSketch,
        m: code.m(),
        k: code.k(),
        poly: code.field().poly(),
        policy,
        salt,
        hash_digest: hash_sketch(&sketch, &salt),
        offset: None,
    })
}

fn check_params(record: &EnrollmentRecord, code: &RsCode, scheme: Scheme) -> Result<()> {
    if record.scheme != scheme {
        return Err(Error::ParameterMismatch(format!(
            "record uses scheme {}, expected {scheme}",
            record.scheme
        )));
    }
    if (record.m, record.k, record.poly) != (code.m(), code.k(), code.field().poly()) {
        return Err(Error::ParameterMismatch(format!(
            "record is for RS(m={}, K={}, poly={:#x}), code is RS(m={}, K={}, poly={:#x})",
            record.m,
            record.k,
            record.poly,
            code.m(),
            code.k(),
            code.field().poly()
        )));
    }
    Ok(())
}

fn probe_len(r_b: &BitVector, code: &RsCode) -> Result<()> {
    if r_b.len() != code.n_bits() {
        return Err(Error::ParameterMismatch(format!(
            "probe has {} bits, code expects {}",
            r_b.len(),
            code.n_bits()
        )));
    }
    Ok(())
}

pub fn auth_ss(r_b: &BitVector, record: &EnrollmentRecord, code: &RsCode) -> Result<Decision> {
    check_params(record, code, Scheme::SecureSketch)?;
    probe_len(r_b, code)?;
    Ok(match decode_message(r_b, code, record.policy)? {
        None => Decision::decode_failure(),
        Some(message) => {
            let estimate = symbols_to_bits(&message, code.m())?;
            Decision::from_match(hash_sketch(&estimate, &record.salt) == record.hash_digest)
        }
    })
}

pub fn enroll_fc(
    subject_id: &str,
    r_a: &BitVector,
    code: &RsCode,
    policy: DecodePolicy,
    rng_seed: u64,
    salt: Salt,
) -> Result<EnrollmentRecord> {
    validate_subject_id(subject_id)?;
    check_len(r_a, code)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let q = code.field().size() as Symbol;
    let message: Vec<Symbol> = (0..code.k()).map(|_| rng.random_range(0..q)).collect();
    let codeword = symbols_to_bits(&code.encode(&message)?, code.m())?;
    let message_bits = symbols_to_bits(&message, code.m())?;
    Ok(EnrollmentRecord {
        subject_id: subject_id.to_owned(),
        scheme: Scheme::FuzzyCommitment,
        m: code.m(),
        k: code.k(),
        poly: code.field().poly(),
        policy,
        salt,
        hash_digest: hash_sketch(&message_bits, &salt),
        offset: Some(codeword.xor(r_a)?),
    })
}

pub fn auth_fc(r_b: &BitVector, record: &EnrollmentRecord, code: &RsCode) -> Result<Decision> {
    check_params(record, code, Scheme::FuzzyCommitment)?;
    probe_len(r_b, code)?;
    let offset = record
        .offset
        .as_ref()
        .ok_or_else(|| Error::ParameterMismatch("fuzzy-commitment record has no offset".into()))?;
    let shifted = offset
        .xor(r_b)
        .map_err(|_| Error::ParameterMismatch("offset length differs from code".into()))?;
    Ok(match decode_message(&shifted, code, record.policy)? {
        None => Decision::decode_failure(),
        Some(message) => {
            let estimate = symbols_to_bits(&message, code.m())?;
            Decision::from_match(hash_sketch(&estimate, &record.salt) == record.hash_digest)
        }
    })
}

/// Dispatches on the record's scheme.
pub fn authenticate(r_b: &BitVector, record: &EnrollmentRecord, code: &RsCode) -> Result<Decision> {
    match record.scheme {
        Scheme::SecureSketch => auth_ss(r_b, record, code),
        Scheme::FuzzyCommitment => auth_fc(r_b, record, code),
    }
}

impl EnrollmentRecord {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{RECORD_HEADER}\nversion={RECORD_VERSION}\nsubject_id={}\nscheme={}\nm={}\nk={}\npoly={:#x}\npolicy={}\nsalt={}\ndigest={}\n",
            self.subject_id,
            self.scheme,
            self.m,
            self.k,
            self.poly,
            self.policy,
            hex::encode(self.salt.0),
            hex::encode(self.hash_digest),
        );
        if let Some(offset) = &self.offset {
            s.push_str(&format!("offset={}\n", offset.to_hex()));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(RECORD_HEADER) {
            return Err(Error::Parse("bad record header".into()));
        }
        let mut field = |name: &str| -> Result<String> {
            lines
                .next()
                .and_then(|l| l.strip_prefix(name)?.strip_prefix('='))
                .map(str::to_owned)
                .ok_or_else(|| Error::Parse(format!("missing {name}= line")))
        };
        let bad = |name: &str, v: &str| Error::Parse(format!("bad {name} value {v:?}"));

        let version = field("version")?;
        if version != RECORD_VERSION.to_string() {
            return Err(Error::Parse(format!("unsupported record version {version}")));
        }
        let subject_id = field("subject_id")?;
        validate_subject_id(&subject_id)?;
        let scheme: Scheme = field("scheme")?.parse()?;
        let m_str = field("m")?;
        let m: u32 = m_str.parse().map_err(|_| bad("m", &m_str))?;
        let k_str = field("k")?;
        let k: usize = k_str.parse().map_err(|_| bad("k", &k_str))?;
        let poly_str = field("poly")?;
        let poly = poly_str
            .strip_prefix("0x")
            .and_then(|h| u32::from_str_radix(h, 16).ok())
            .ok_or_else(|| bad("poly", &poly_str))?;
        let policy: DecodePolicy = field("policy")?.parse()?;
        let salt_str = field("salt")?;
        let salt = hex::decode(&salt_str)
            .ok()
            .and_then(|b| <[u8; 16]>::try_from(b).ok())
            .map(Salt)
            .ok_or_else(|| bad("salt", &salt_str))?;
        let digest_str = field("digest")?;
        let hash_digest = hex::decode(&digest_str)
            .ok()
            .and_then(|b| <Digest>::try_from(b).ok())
            .ok_or_else(|| bad("digest", &digest_str))?;
        if !(crate::gf::MIN_M..=crate::gf::MAX_M).contains(&m) {
            return Err(Error::UnsupportedM(m));
        }
        let n_bits = m as usize * ((1usize << m) - 1);
        let offset = match scheme {
            Scheme::SecureSketch => None,
            Scheme::FuzzyCommitment => Some(BitVector::from_hex(&field("offset")?, n_bits)?),
        };
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::Parse("trailing content in record".into()));
        }
        Ok(EnrollmentRecord {
            subject_id,
            scheme,
            m,
            k,
            poly,
            policy,
            salt,
            hash_digest,
            offset,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::nearest_codeword;

    fn code73() -> RsCode {
        RsCode::with_m(3, 3).unwrap()
    }

    fn bits_of(code: &RsCode, symbols: &[Symbol]) -> BitVector {
        symbols_to_bits(symbols, code.m()).unwrap()
    }

    #[test]
    fn hash_properties() {
        let bits = BitVector::from_str01("10110").unwrap();
        let s1 = Salt([1; 16]);
        let s2 = Salt([2; 16]);
        assert_eq!(hash_sketch(&bits, &s1), hash_sketch(&bits, &s1));
        assert_ne!(hash_sketch(&bits, &s1), hash_sketch(&bits, &s2));
        // empty input hashes salt ‖ 0u64
        let mut h = Sha256::new();
        h.update([1u8; 16]);
        h.update(0u64.to_le_bytes());
        let expected: Digest = h.finalize().into();
        assert_eq!(hash_sketch(&BitVector::default(), &s1), expected);
        // length prefix separates vectors with equal packed bytes
        assert_ne!(
            hash_sketch(&BitVector::from_str01("1").unwrap(), &s1),
            hash_sketch(&BitVector::from_str01("10").unwrap(), &s1)
        );
    }

    #[test]
    fn ss_enroll_on_codeword_hashes_message() {
        let code = code73();
        let msg = [3, 1, 4];
        let r_a = bits_of(&code, &code.encode(&msg).unwrap());
        let salt = Salt([9; 16]);
        let rec = enroll_ss("alice", &r_a, &code, DecodePolicy::FailDeny, salt).unwrap();
        assert_eq!(rec.hash_digest, hash_sketch(&bits_of(&code, &msg), &salt));
        assert!(rec.offset.is_none());
    }

    #[test]
    fn ss_fallback_hashes_systematic_bits() {
        let code = RsCode::with_m(3, 5).unwrap();
        // 7 symbols chosen so that no codeword lies within distance 1
        let far = far_word(&code);
        assert!(nearest_codeword(&code, &far).unwrap().distance > code.t());
        let r_a = bits_of(&code, &far);
        let salt = Salt([4; 16]);
        let rec = enroll_ss("bob", &r_a, &code, DecodePolicy::FallbackSystematic, salt).unwrap();
        assert_eq!(rec.hash_digest, hash_sketch(&bits_of(&code, &far[..5]), &salt));
        assert!(matches!(
            enroll_ss("bob", &r_a, &code, DecodePolicy::FailDeny, salt),
            Err(Error::EnrollmentDecodeFailure)
        ));
    }

    fn far_word(code: &RsCode) -> Vec<Symbol> {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        loop {
            let w: Vec<Symbol> = (0..code.n()).map(|_| rng.random_range(0..8)).collect();
            if nearest_codeword(code, &w).unwrap().distance > code.t() {
                return w;
            }
        }
    }

    #[test]
    fn ss_accepts_same_column_probe() {
        let code = code73();
        let cw = code.encode(&[6, 6, 2]).unwrap();
        let mut a = cw.clone();
        a[0] ^= 1;
        a[3] ^= 5;
        let mut b = cw.clone();
        b[5] ^= 2;
        b[6] ^= 3;
        for w in [&a, &b] {
            let near = nearest_codeword(&code, w).unwrap();
            assert_eq!(near.head(), &cw[..]);
            assert!(near.distance <= code.t());
        }
        let rec = enroll_ss("c", &bits_of(&code, &a), &code, DecodePolicy::FailDeny, Salt([0; 16])).unwrap();
        let d = auth_ss(&bits_of(&code, &b), &rec, &code).unwrap();
        assert!(d.accepted);
        assert_eq!(d.reason, DecisionReason::HashMatch);
        let same = auth_ss(&bits_of(&code, &a), &rec, &code).unwrap();
        assert!(same.accepted);
    }

    #[test]
    fn ss_fail_deny_reports_decode_failure() {
        let code = RsCode::with_m(3, 5).unwrap();
        let cw = code.encode(&[1, 2, 3, 4, 5]).unwrap();
        let rec = enroll_ss("d", &bits_of(&code, &cw), &code, DecodePolicy::FailDeny, Salt([0; 16])).unwrap();
        let d = auth_ss(&bits_of(&code, &far_word(&code)), &rec, &code).unwrap();
        assert_eq!(d, Decision::decode_failure());
    }

    #[test]
    fn fc_offsets() {
        let code = code73();
        let salt = Salt([5; 16]);
        let zero = BitVector::zeros(code.n_bits());
        let rec = enroll_fc("e", &zero, &code, DecodePolicy::FailDeny, 42, salt).unwrap();
        let c = rec.offset.clone().unwrap();
        assert!(code.is_codeword(&bits_to_symbols(&c, 3).unwrap()).unwrap());
        // enrolling the drawn codeword itself gives a zero offset
        let rec2 = enroll_fc("e", &c, &code, DecodePolicy::FailDeny, 42, salt).unwrap();
        assert_eq!(rec2.offset.unwrap(), zero);
        assert!(auth_fc(&zero, &rec, &code).unwrap().accepted);
        let msg_bits = bits_of(&code, &bits_to_symbols(&c, 3).unwrap()[..3]);
        assert_eq!(rec.hash_digest, hash_sketch(&msg_bits, &salt));
    }

    #[test]
    fn fc_tolerates_t_errors_and_rejects_complement() {
        let code = code73();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r_a: BitVector = (0..21).map(|_| rng.random_bool(0.5)).collect();
        let rec = enroll_fc("f", &r_a, &code, DecodePolicy::FailDeny, 7, Salt([1; 16])).unwrap();
        let mut sym = bits_to_symbols(&r_a, 3).unwrap();
        sym[2] ^= 7;
        sym[4] ^= 1;
        assert!(auth_fc(&bits_of(&code, &sym), &rec, &code).unwrap().accepted);

        let comp = r_a.complement();
        // complement differs in all 7 symbols: offset ⊕ comp = c ⊕ 1…1
        let shifted = bits_to_symbols(&rec.offset.clone().unwrap().xor(&comp).unwrap(), 3).unwrap();
        let near = nearest_codeword(&code, &shifted).unwrap();
        let c = bits_to_symbols(&rec.offset.clone().unwrap().xor(&r_a).unwrap(), 3).unwrap();
        assert!(near.best_codewords.iter().all(|w| w != &c));
        assert!(!auth_fc(&comp, &rec, &code).unwrap().accepted);
    }

    #[test]
    fn parameter_mismatch() {
        let code = code73();
        let other = RsCode::with_m(3, 1).unwrap();
        let r = BitVector::zeros(21);
        let rec = enroll_ss("g", &r, &code, DecodePolicy::FallbackSystematic, Salt::default()).unwrap();
        assert!(matches!(auth_ss(&r, &rec, &other), Err(Error::ParameterMismatch(_))));
        assert!(matches!(auth_fc(&r, &rec, &code), Err(Error::ParameterMismatch(_))));
        assert!(matches!(
            auth_ss(&BitVector::zeros(18), &rec, &code),
            Err(Error::ParameterMismatch(_))
        ));
        assert!(matches!(
            enroll_ss("g", &BitVector::zeros(20), &code, DecodePolicy::FailDeny, Salt::default()),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn record_text_roundtrip() {
        let code = code73();
        let r: BitVector = (0..21).map(|i| i % 3 == 0).collect();
        let ss = enroll_ss("s-01", &r, &code, DecodePolicy::FallbackSystematic, Salt([3; 16])).unwrap();
        let fc = enroll_fc("s.02", &r, &code, DecodePolicy::FailDeny, 1, Salt([4; 16])).unwrap();
        for rec in [ss, fc] {
            let text = rec.to_text();
            assert_eq!(EnrollmentRecord::from_text(&text).unwrap(), rec);
        }
        assert!(EnrollmentRecord::from_text("mbsketch-record\nversion=2\n").is_err());
        assert!(enroll_ss("../x", &r, &code, DecodePolicy::FailDeny, Salt::default()).is_err());
    }
}
