//! Systematic Reed-Solomon codes over GF(2^m) with bounded-distance decoding.
//!
//! Codeword layout: symbol `i` of an `N`-symbol vector is the coefficient of
//! `x^(N-1-i)`. The `K` message symbols occupy positions `0..K` verbatim and
//! the `N-K` parity symbols occupy `K..N`. The generator polynomial has roots
//! `α^1, …, α^(N-K)`.
//!
//! Decoding runs syndromes → Berlekamp-Massey → Chien search → Forney. A
//! corrected word is re-checked against the syndromes before it is accepted.
//! Received words more than `t` symbols from every codeword either fail or,
//! under [`DecodePolicy::FallbackSystematic`], map to the codeword whose
//! message equals their systematic symbols. Words beyond distance `t` may also
//! be miscorrected to a different codeword; that is inherent to bounded-distance
//! decoding.

use std::fmt;
use std::str::FromStr;

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::gf::{Field, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum DecodePolicy {
    /// Strict bounded-distance decoding; undecodable words fail.
    FailDeny,
    /// Undecodable words map to their systematic symbols, making decoding total.
    #[default]
    FallbackSystematic,
}

impl DecodePolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            DecodePolicy::FailDeny => "fail-deny",
            DecodePolicy::FallbackSystematic => "fallback",
        }
    }
}

impl fmt::Display for DecodePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecodePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fail-deny" => Ok(DecodePolicy::FailDeny),
            "fallback" => Ok(DecodePolicy::FallbackSystematic),
            _ => Err(Error::Parse(format!("unknown decode policy {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeStatus {
    ExactCodeword,
    Corrected(usize),
    Fallback,
    Failure,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub status: DecodeStatus,
    pub codeword: Option<Vec<Symbol>>,
    pub message: Option<Vec<Symbol>>,
}

impl DecodeOutcome {
    pub fn is_failure(&self) -> bool {
        self.status == DecodeStatus::Failure
    }
}

/// An (N, K) Reed-Solomon code, N = 2^m − 1.
#[derive(Clone, Debug)]
pub struct RsCode {
    field: Field,
    n: usize,
    k: usize,
    t: usize,
    /// Generator coefficients, highest degree first; `generator[0] == 1`.
    generator: Vec<Symbol>,
}

impl RsCode {
    pub fn new(field: Field, k: usize) -> Result<Self> {
        let n = field.order();
        if k == 0 || k > n {
            return Err(Error::InvalidK { k, n });
        }
        let p = n - k;
        // Π (x − α^j), built highest degree first.
        let mut generator: Vec<Symbol> = vec![1];
        for j in 1..=p {
            let root = field.exp(j);
            let mut next = vec![0; generator.len() + 1];
            for (i, &g) in generator.iter().enumerate() {
                next[i] ^= g;
                next[i + 1] ^= field.mul_sym(g, root);
            }
            generator = next;
        }
        Ok(RsCode {
            field,
            n,
            k,
            t: p / 2,
            generator,
        })
    }

    /// Convenience constructor using the default primitive polynomial.
    pub fn with_m(m: u32, k: usize) -> Result<Self> {
        Self::new(Field::new(m, None)?, k)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn m(&self) -> u32 {
        self.field.m()
    }

    /// Codeword length in symbols.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Message length in symbols.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Minimum distance `N − K + 1`.
    pub fn min_distance(&self) -> usize {
        self.n - self.k + 1
    }

    /// Codeword length in bits, `m·N`.
    pub fn n_bits(&self) -> usize {
        self.n * self.m() as usize
    }

    /// Message length in bits, `m·K`.
    pub fn k_bits(&self) -> usize {
        self.k * self.m() as usize
    }

    /// Generator polynomial, highest-degree coefficient first.
    pub fn generator(&self) -> &[Symbol] {
        &self.generator
    }

    fn check_symbols(&self, symbols: &[Symbol], expected: usize) -> Result<()> {
        if symbols.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: symbols.len(),
            });
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s as usize >= self.field.size()) {
            return Err(Error::ValueOutOfRange {
                value: bad as u32,
                m: self.m(),
            });
        }
        Ok(())
    }

    pub fn encode(&self, message: &[Symbol]) -> Result<Vec<Symbol>> {
        self.check_symbols(message, self.k)?;
        let f = &self.field;
        let mut buf = message.to_vec();
        buf.resize(self.n, 0);
        // long division of m(x)·x^(N−K) by the monic generator
        for i in 0..self.k {
            let coef = buf[i];
            if coef == 0 {
                continue;
            }
            for (j, &g) in self.generator.iter().enumerate().skip(1) {
                buf[i + j] ^= f.mul_sym(coef, g);
            }
        }
        buf[..self.k].copy_from_slice(message);
        Ok(buf)
    }

    /// `S_j = r(α^j)` for `j = 1..=N−K`.
    pub fn syndromes(&self, received: &[Symbol]) -> Result<Vec<Symbol>> {
        self.check_symbols(received, self.n)?;
        Ok(self.syndromes_unchecked(received))
    }

    fn syndromes_unchecked(&self, received: &[Symbol]) -> Vec<Symbol> {
        let f = &self.field;
        (1..=self.n - self.k)
            .map(|j| {
                let x = f.exp(j);
                received
                    .iter()
                    .fold(0, |acc, &c| f.mul_sym(acc, x) ^ c)
            })
            .collect()
    }

    pub fn is_codeword(&self, received: &[Symbol]) -> Result<bool> {
        Ok(self.syndromes(received)?.iter().all(|&s| s == 0))
    }

    pub fn decode(&self, received: &[Symbol], policy: DecodePolicy) -> Result<DecodeOutcome> {
        self.check_symbols(received, self.n)?;
        let syndromes = self.syndromes_unchecked(received);
        if syndromes.iter().all(|&s| s == 0) {
            return Ok(DecodeOutcome {
                status: DecodeStatus::ExactCodeword,
                codeword: Some(received.to_vec()),
                message: Some(received[..self.k].to_vec()),
            });
        }
        if let Some((codeword, errors)) = self.correct(received, &syndromes) {
            let message = codeword[..self.k].to_vec();
            return Ok(DecodeOutcome {
                status: DecodeStatus::Corrected(errors),
                codeword: Some(codeword),
                message: Some(message),
            });
        }
        Ok(match policy {
            DecodePolicy::FailDeny => DecodeOutcome {
                status: DecodeStatus::Failure,
                codeword: None,
                message: None,
            },
            DecodePolicy::FallbackSystematic => {
                let message = received[..self.k].to_vec();
                DecodeOutcome {
                    status: DecodeStatus::Fallback,
                    codeword: Some(self.encode(&message)?),
                    message: Some(message),
                }
            }
        })
    }

    /// Returns the corrected word and the number of symbols changed, or
    /// `None` when no codeword lies within distance `t`.
    fn correct(&self, received: &[Symbol], syndromes: &[Symbol]) -> Option<(Vec<Symbol>, usize)> {
        let f = &self.field;
        let locator = berlekamp_massey(f, syndromes);
        let degree = locator.len() - 1;
        if degree == 0 || degree > self.t {
            return None;
        }

        // Ω(x) = S(x)Λ(x) mod x^(N−K), lowest degree first
        let p = syndromes.len();
        let mut omega = vec![0 as Symbol; p];
        for (i, &l) in locator.iter().enumerate() {
            for (j, &s) in syndromes.iter().enumerate() {
                if i + j < p {
                    omega[i + j] ^= f.mul_sym(l, s);
                }
            }
        }

        let mut corrected = received.to_vec();
        let mut found = 0;
        for (i, sym) in corrected.iter_mut().enumerate() {
            let power = self.n - 1 - i;
            // X^{-1} for X = α^power
            let x_inv = f.exp(f.order() - power);
            if poly_eval_low(f, &locator, x_inv) != 0 {
                continue;
            }
            found += 1;
            let num = poly_eval_low(f, &omega, x_inv);
            let den = formal_derivative_eval(f, &locator, x_inv);
            if den == 0 {
                return None;
            }
            *sym ^= f.div_sym(num, den);
        }
        if found != degree {
            return None;
        }
        if self.syndromes_unchecked(&corrected).iter().any(|&s| s != 0) {
            return None;
        }
        Some((corrected, found))
    }
}

/// Error-locator polynomial Λ(x), lowest degree first, trimmed to its degree.
fn berlekamp_massey(f: &Field, syndromes: &[Symbol]) -> Vec<Symbol> {
    let mut c: Vec<Symbol> = vec![1];
    let mut b: Vec<Symbol> = vec![1];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut last_d: Symbol = 1;

    for n in 0..syndromes.len() {
        let mut d = syndromes[n];
        for i in 1..=l.min(c.len() - 1) {
            d ^= f.mul_sym(c[i], syndromes[n - i]);
        }
        if d == 0 {
            shift += 1;
            continue;
        }
        let coef = f.div_sym(d, last_d);
        let mut next = c.clone();
        if next.len() < b.len() + shift {
            next.resize(b.len() + shift, 0);
        }
        for (i, &bi) in b.iter().enumerate() {
            next[i + shift] ^= f.mul_sym(coef, bi);
        }
        if 2 * l <= n {
            b = std::mem::replace(&mut c, next);
            l = n + 1 - l;
            last_d = d;
            shift = 1;
        } else {
            c = next;
            shift += 1;
        }
    }
    c.truncate(l + 1);
    c.resize(l + 1, 0);
    c
}

fn poly_eval_low(f: &Field, poly: &[Symbol], x: Symbol) -> Symbol {
    poly.iter().rev().fold(0, |acc, &c| f.mul_sym(acc, x) ^ c)
}

/// Λ'(x) in characteristic 2 keeps only the odd-degree terms.
fn formal_derivative_eval(f: &Field, poly: &[Symbol], x: Symbol) -> Symbol {
    let x2 = f.mul_sym(x, x);
    let mut acc = 0;
    let mut xp: Symbol = 1;
    for i in (1..poly.len()).step_by(2) {
        acc ^= f.mul_sym(poly[i], xp);
        xp = f.mul_sym(xp, x2);
    }
    acc
}

/// Packs bits into `m`-bit symbols, most significant bit first within each
/// symbol.
pub fn bits_to_symbols(bits: &BitVector, m: u32) -> Result<Vec<Symbol>> {
    let m = m as usize;
    if m == 0 || !bits.len().is_multiple_of(m) {
        return Err(Error::LengthMismatch {
            expected: bits.len().next_multiple_of(m.max(1)),
            actual: bits.len(),
        });
    }
    Ok(bits
        .as_slice()
        .chunks(m)
        .map(|chunk| chunk.iter().fold(0, |acc, &b| (acc << 1) | b as Symbol))
        .collect())
}

/// Inverse of [`bits_to_symbols`].
pub fn symbols_to_bits(symbols: &[Symbol], m: u32) -> Result<BitVector> {
    if let Some(&bad) = symbols.iter().find(|&&s| (s as u32) >> m != 0) {
        return Err(Error::ValueOutOfRange {
            value: bad as u32,
            m,
        });
    }
    Ok(symbols
        .iter()
        .flat_map(|&s| (0..m).rev().map(move |i| (s >> i) & 1 == 1))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parameters() {
        let c = RsCode::with_m(5, 10).unwrap();
        assert_eq!((c.n(), c.n_bits()), (31, 155));
        let c = RsCode::with_m(6, 10).unwrap();
        assert_eq!((c.n(), c.n_bits()), (63, 378));
        let c = RsCode::with_m(7, 10).unwrap();
        assert_eq!((c.n(), c.n_bits()), (127, 889));
        let c = RsCode::with_m(3, 3).unwrap();
        assert_eq!((c.t(), c.min_distance()), (2, 5));
        assert!(matches!(RsCode::with_m(3, 0), Err(Error::InvalidK { .. })));
        assert!(matches!(RsCode::with_m(3, 8), Err(Error::InvalidK { .. })));
    }

    #[test]
    fn generator_has_expected_roots() {
        let c = RsCode::with_m(4, 9).unwrap();
        let f = c.field();
        assert_eq!(c.generator().len(), 7);
        let low: Vec<Symbol> = c.generator().iter().rev().copied().collect();
        for j in 1..=6 {
            assert_eq!(poly_eval_low(f, &low, f.exp(j)), 0);
        }
        assert_ne!(poly_eval_low(f, &low, f.exp(7)), 0);
    }

    #[test]
    fn zero_message_encodes_to_zero() {
        let c = RsCode::with_m(5, 11).unwrap();
        assert_eq!(c.encode(&[0; 11]).unwrap(), vec![0; 31]);
    }

    #[test]
    fn encode_is_systematic_with_zero_syndromes() {
        let c = RsCode::with_m(6, 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let msg: Vec<Symbol> = (0..20).map(|_| rng.random_range(0..64)).collect();
        let cw = c.encode(&msg).unwrap();
        assert_eq!(&cw[..20], &msg[..]);
        assert!(c.is_codeword(&cw).unwrap());
        let d = c.decode(&cw, DecodePolicy::FailDeny).unwrap();
        assert_eq!(d.status, DecodeStatus::ExactCodeword);
        assert_eq!(d.message.unwrap(), msg);
    }

    #[test]
    fn corrects_two_errors_in_rs_7_3() {
        let c = RsCode::with_m(3, 3).unwrap();
        let msg = [5, 0, 3];
        let mut r = c.encode(&msg).unwrap();
        r[1] ^= 4;
        r[6] ^= 7;
        let d = c.decode(&r, DecodePolicy::FailDeny).unwrap();
        assert_eq!(d.status, DecodeStatus::Corrected(2));
        assert_eq!(d.message.unwrap(), msg);
    }

    #[test]
    fn full_rate_code_accepts_everything() {
        let c = RsCode::with_m(3, 7).unwrap();
        assert_eq!(c.t(), 0);
        let r = [1, 2, 3, 4, 5, 6, 7];
        let d = c.decode(&r, DecodePolicy::FailDeny).unwrap();
        assert_eq!(d.status, DecodeStatus::ExactCodeword);
    }

    #[test]
    fn fallback_uses_systematic_symbols() {
        let c = RsCode::with_m(3, 5).unwrap();
        // distance ≥ 2 from every codeword: found by scanning with the strict policy
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = loop {
            let r: Vec<Symbol> = (0..7).map(|_| rng.random_range(0..8)).collect();
            if c.decode(&r, DecodePolicy::FailDeny).unwrap().is_failure() {
                break r;
            }
        };
        let d = c.decode(&r, DecodePolicy::FallbackSystematic).unwrap();
        assert_eq!(d.status, DecodeStatus::Fallback);
        assert_eq!(d.message.as_deref(), Some(&r[..5]));
        assert_eq!(d.codeword.unwrap(), c.encode(&r[..5]).unwrap());
    }

    #[test]
    fn length_errors() {
        let c = RsCode::with_m(3, 3).unwrap();
        assert!(matches!(c.encode(&[1, 2]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(
            c.decode(&[0; 6], DecodePolicy::FailDeny),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(c.encode(&[1, 2, 8]), Err(Error::ValueOutOfRange { .. })));
    }

    #[test]
    fn packing() {
        let bits = BitVector::from_str01("101110").unwrap();
        assert_eq!(bits_to_symbols(&bits, 3).unwrap(), vec![5, 6]);
        assert_eq!(symbols_to_bits(&[5, 6], 3).unwrap(), bits);
        assert!(bits_to_symbols(&BitVector::zeros(7), 3).is_err());
        assert_eq!(bits_to_symbols(&BitVector::zeros(155), 5).unwrap().len(), 31);
        assert!(symbols_to_bits(&[8], 3).is_err());
    }
}
