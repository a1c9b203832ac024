//! Brute-force complete decoding for small codes.
//!
//! Every codeword is enumerated, so a received word is mapped to the codeword
//! heading its standard-array column: the nearest codeword in symbol Hamming
//! distance, ties broken by the lexicographically smallest message. This is the
//! ground truth for the bounded-distance decoder and for the 2^(−k)
//! column-collision argument behind the false-accept rate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf::Symbol;
use crate::rs_codec::RsCode;

pub const DEFAULT_BUDGET: u128 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NearestResult {
    /// Codewords at the minimum distance, in lexicographic message order.
    pub best_codewords: Vec<Vec<Symbol>>,
    pub distance: usize,
}

impl NearestResult {
    pub fn is_unique(&self) -> bool {
        self.best_codewords.len() == 1
    }

    /// The complete-decoder choice (first in tie order).
    pub fn head(&self) -> &[Symbol] {
        &self.best_codewords[0]
    }
}

/// All codewords of a small code, indexed by message in lexicographic order.
pub struct Codebook<'a> {
    code: &'a RsCode,
    codewords: Vec<Vec<Symbol>>,
}

impl<'a> Codebook<'a> {
    pub fn new(code: &'a RsCode) -> Result<Self> {
        Self::with_budget(code, DEFAULT_BUDGET)
    }

    pub fn with_budget(code: &'a RsCode, budget: u128) -> Result<Self> {
        let q = code.field().size() as u128;
        let needed = q.checked_pow(code.k() as u32).unwrap_or(u128::MAX);
        if needed > budget {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        let mut message = vec![0 as Symbol; code.k()];
        let mut codewords = Vec::with_capacity(needed as usize);
        loop {
            codewords.push(code.encode(&message)?);
            if !increment(&mut message, q as Symbol) {
                break;
            }
        }
        Ok(Codebook { code, codewords })
    }

    pub fn codewords(&self) -> &[Vec<Symbol>] {
        &self.codewords
    }

    pub fn code(&self) -> &RsCode {
        self.code
    }

    pub fn nearest(&self, received: &[Symbol]) -> Result<NearestResult> {
        if received.len() != self.code.n() {
            return Err(Error::LengthMismatch {
                expected: self.code.n(),
                actual: received.len(),
            });
        }
        let mut best = usize::MAX;
        let mut winners = Vec::new();
        for (i, cw) in self.codewords.iter().enumerate() {
            let d = symbol_distance(cw, received);
            if d < best {
                best = d;
                winners.clear();
            }
            if d == best {
                winners.push(i);
            }
        }
        Ok(NearestResult {
            best_codewords: winners.into_iter().map(|i| self.codewords[i].clone()).collect(),
            distance: best,
        })
    }

    /// Index (message rank) of the standard-array column holding `received`.
    ///
    /// Ties are broken by the lexicographically smallest error pattern
    /// `received − c`, which fixes one leader per coset. Every column then
    /// holds exactly `q^(N−K)` words.
    pub fn column_of(&self, received: &[Symbol]) -> usize {
        let mut best = usize::MAX;
        let mut col = 0;
        for (i, cw) in self.codewords.iter().enumerate() {
            let d = symbol_distance(cw, received);
            if d < best || (d == best && error_pattern_less(received, cw, &self.codewords[col])) {
                best = d;
                col = i;
            }
        }
        col
    }
}

/// `received ⊕ a < received ⊕ b` lexicographically.
fn error_pattern_less(received: &[Symbol], a: &[Symbol], b: &[Symbol]) -> bool {
    let ea = received.iter().zip(a).map(|(r, x)| r ^ x);
    let eb = received.iter().zip(b).map(|(r, x)| r ^ x);
    ea.lt(eb)
}

/// Lexicographic increment; returns false on wrap-around.
fn increment(digits: &mut [Symbol], base: Symbol) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

pub fn symbol_distance(a: &[Symbol], b: &[Symbol]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Exhaustive nearest-codeword search with the default budget.
pub fn nearest_codeword(code: &RsCode, received: &[Symbol]) -> Result<NearestResult> {
    Codebook::new(code)?.nearest(received)
}

/// Fraction of uniformly random word pairs that fall in the same
/// standard-array column. Expected value `2^(−K·m)`.
///
/// Columns come from [`Codebook::column_of`]; breaking ties by message
/// instead would favour low messages and bias the rate upward.
pub fn column_collision_rate(code: &RsCode, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    let book = Codebook::new(code)?;
    let q = code.field().size() as Symbol;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let word = |rng: &mut ChaCha8Rng| -> Vec<Symbol> {
        (0..code.n()).map(|_| rng.random_range(0..q)).collect()
    };
    let mut hits = 0usize;
    for _ in 0..trials {
        let a = word(&mut rng);
        let b = word(&mut rng);
        if book.column_of(&a) == book.column_of(&b) {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}
