//! Binarization and user-specific reliable-component selection.
//!
//! A fused vector is binarized against the per-dimension population median,
//! so over the reference population every bit is balanced. Each user's
//! reliability for component `j` is the Gaussian probability that a fresh
//! sample lands on the same side of the median as the user's mean:
//! `Φ(|μ_j − median_j| / σ_j)`.
//!
//! Selection keeps the `G` most reliable components, but draws them from the
//! top `⌈window·G⌉` candidates with a nonce-keyed pseudorandom choice. With
//! `window = 1` the result is exactly the top-`G` set; with `window > 1` a
//! fresh nonce yields a different key, which is what makes the template
//! revocable.

use std::fmt;

use rand::Rng;
use sha2::{Digest, Sha256};
use statrs::function::erf::erfc;

use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Standard deviations below this are treated as zero.
pub const SIGMA_FLOOR: f64 = 1e-9;
pub const DEFAULT_WINDOW: f64 = 2.0;

const KEY_HEADER: &str = "mbsketch-key";
const KEY_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct PopulationStats {
    pub mean: Vec<f64>,
    pub median: Vec<f64>,
}

impl PopulationStats {
    pub fn dim(&self) -> usize {
        self.median.len()
    }

    /// Text form: a header line, `d=<d>`, then one `mean median` line per
    /// dimension with round-trip float formatting.
    pub fn to_text(&self) -> String {
        let mut s = format!("mbsketch-population v1\nd={}\n", self.dim());
        for (m, md) in self.mean.iter().zip(&self.median) {
            s.push_str(&format!("{m:?} {md:?}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some("mbsketch-population v1") {
            return Err(Error::Parse("bad population header".into()));
        }
        let d: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("d="))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Parse("missing d= line".into()))?;
        let mut mean = Vec::with_capacity(d);
        let mut median = Vec::with_capacity(d);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let mut parts = line.split_whitespace();
            let mut next = || -> Result<f64> {
                parts
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad population line {line:?}")))
            };
            mean.push(next()?);
            median.push(next()?);
        }
        if mean.len() != d {
            return Err(Error::Parse(format!("expected {d} rows, found {}", mean.len())));
        }
        Ok(PopulationStats { mean, median })
    }
}

/// Per-dimension mean and median over every sample of every subject.
///
/// `subjects[s]` holds the fused vectors of subject `s`.
pub fn population_stats<V: AsRef<[f64]>>(subjects: &[Vec<V>]) -> Result<PopulationStats> {
    if subjects.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "population statistics need at least 2 subjects, got {}",
            subjects.len()
        )));
    }
    let samples: Vec<&[f64]> = subjects.iter().flatten().map(|v| v.as_ref()).collect();
    let d = samples
        .first()
        .map(|s| s.len())
        .ok_or_else(|| Error::InsufficientData("no samples".into()))?;
    if d == 0 || samples.iter().any(|s| s.len() != d) {
        return Err(Error::DimensionMismatch("population vectors differ in length".into()));
    }
    if samples.iter().flat_map(|s| s.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("population values must be finite".into()));
    }
    let count = samples.len() as f64;
    let mut mean = vec![0.0; d];
    let mut median = vec![0.0; d];
    let mut column = vec![0.0; samples.len()];
    for j in 0..d {
        for (c, s) in column.iter_mut().zip(&samples) {
            *c = s[j];
        }
        mean[j] = column.iter().sum::<f64>() / count;
        column.sort_by(|a, b| a.total_cmp(b));
        let mid = column.len() / 2;
        median[j] = if column.len().is_multiple_of(2) {
            0.5 * (column[mid - 1] + column[mid])
        } else {
            column[mid]
        };
    }
    Ok(PopulationStats { mean, median })
}

/// `a_j = 1` iff `e_j > median_j`.
pub fn binarize(e: &[f64], pop: &PopulationStats) -> Result<BitVector> {
    if e.len() != pop.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector has {} components, population has {}",
            e.len(),
            pop.dim()
        )));
    }
    Ok(e.iter().zip(&pop.median).map(|(x, m)| x > m).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct UserStats {
    pub mean: Vec<f64>,
    /// Sample standard deviation (n − 1 denominator); zero for a single sample.
    pub std: Vec<f64>,
    pub count: usize,
}

impl UserStats {
    pub fn from_samples<V: AsRef<[f64]>>(samples: &[V]) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::InsufficientData("user has no samples".into()))?;
        let d = first.as_ref().len();
        if samples.iter().any(|s| s.as_ref().len() != d) {
            return Err(Error::DimensionMismatch("user samples differ in length".into()));
        }
        let n = samples.len() as f64;
        let mut mean = vec![0.0; d];
        for s in samples {
            for (m, v) in mean.iter_mut().zip(s.as_ref()) {
                *m += v / n;
            }
        }
        let mut std = vec![0.0; d];
        if samples.len() > 1 {
            for s in samples {
                for ((acc, v), m) in std.iter_mut().zip(s.as_ref()).zip(&mean) {
                    *acc += (v - m) * (v - m);
                }
            }
            for acc in std.iter_mut() {
                *acc = (*acc / (n - 1.0)).sqrt();
            }
        }
        Ok(UserStats {
            mean,
            std,
            count: samples.len(),
        })
    }
}

pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Per-component probability that a fresh sample binarizes to the enrolled bit.
pub fn reliability(user: &UserStats, pop: &PopulationStats) -> Result<Vec<f64>> {
    if user.mean.len() != pop.dim() {
        return Err(Error::DimensionMismatch(format!(
            "user stats have {} components, population has {}",
            user.mean.len(),
            pop.dim()
        )));
    }
    Ok(user
        .mean
        .iter()
        .zip(&user.std)
        .zip(&pop.median)
        .map(|((&mu, &sigma), &med)| {
            let gap = (mu - med).abs();
            if sigma < SIGMA_FLOOR {
                if gap > 0.0 {
                    1.0
                } else {
                    0.5
                }
            } else {
                std_normal_cdf(gap / sigma)
            }
        })
        .collect())
}

/// 128-bit random value keying the selection; a new nonce revokes a key.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Nonce(pub [u8; 16]);

impl Nonce {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut b = [0u8; 16];
        rng.fill(&mut b);
        Nonce(b)
    }

    pub fn to_hex(self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::Parse(format!("bad nonce hex: {e}")))?;
        let arr: [u8; 16] = bytes
            .try_into()
            .map_err(|_| Error::Parse("nonce must be 16 bytes".into()))?;
        Ok(Nonce(arr))
    }
}

impl fmt::Debug for Nonce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Nonce({})", self.to_hex())
    }
}

/// The user-specific key **g**: sorted indices of the selected components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReliableKey {
    indices: Vec<u32>,
    d: usize,
    nonce: Nonce,
}

impl ReliableKey {
    pub fn new(mut indices: Vec<u32>, d: usize, nonce: Nonce) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParams("key indices must be unique".into()));
        }
        if let Some(&last) = indices.last() {
            if last as usize >= d {
                return Err(Error::IndexOutOfRange {
                    index: last as usize,
                    len: d,
                });
            }
        }
        Ok(ReliableKey { indices, d, nonce })
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    /// Number of selected components, `G`.
    pub fn g(&self) -> usize {
        self.indices.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nonce(&self) -> Nonce {
        self.nonce
    }

    /// Key file text:
    ///
    /// ```text
    /// mbsketch-key
    /// version=1
    /// d=<d>
    /// G=<G>
    /// nonce=<32 hex digits>
    /// <index>        one decimal index per line, ascending
    /// ```
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{KEY_HEADER}\nversion={KEY_VERSION}\nd={}\nG={}\nnonce={}\n",
            self.d,
            self.g(),
            self.nonce.to_hex()
        );
        for i in &self.indices {
            s.push_str(&format!("{i}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(KEY_HEADER) {
            return Err(Error::Parse("bad key header".into()));
        }
        let mut field = |name: &str| -> Result<String> {
            lines
                .next()
                .and_then(|l| l.strip_prefix(name)?.strip_prefix('='))
                .map(str::to_owned)
                .ok_or_else(|| Error::Parse(format!("missing {name}= line")))
        };
        let parse_usize = |v: String, name: &str| -> Result<usize> {
            v.parse().map_err(|_| Error::Parse(format!("bad {name} value {v:?}")))
        };
        let version = parse_usize(field("version")?, "version")?;
        if version != KEY_VERSION as usize {
            return Err(Error::Parse(format!("unsupported key version {version}")));
        }
        let d = parse_usize(field("d")?, "d")?;
        let g = parse_usize(field("G")?, "G")?;
        let nonce = Nonce::from_hex(&field("nonce")?)?;
        let indices = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad key index {l:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if indices.len() != g {
            return Err(Error::Parse(format!("G={g} but {} indices listed", indices.len())));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse("key indices must be strictly increasing".into()));
        }
        ReliableKey::new(indices, d, nonce)
    }
}

fn keyed_rank(nonce: Nonce, domain: u8, index: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(nonce.0);
    h.update([domain]);
    h.update((index as u64).to_le_bytes());
    let out = h.finalize();
    u64::from_be_bytes(out[..8].try_into().unwrap())
}

/// Selects `g` reliable components.
///
/// Components are ranked by score (descending) with ties ordered by a
/// nonce-keyed hash. The top `⌈window·g⌉` (capped at `d`) form the candidate
/// pool, and `g` of them are chosen by a second keyed hash.
pub fn select_reliable(scores: &[f64], g: usize, nonce: Nonce, window: f64) -> Result<ReliableKey> {
    let d = scores.len();
    if g > d {
        return Err(Error::GTooLarge { g, d });
    }
    if g == 0 {
        return Err(Error::InvalidParams("G must be positive".into()));
    }
    if !(window >= 1.0 && window.is_finite()) {
        return Err(Error::InvalidParams(format!("selection window {window} must be ≥ 1")));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParams("scores must not be NaN".into()));
    }
    let mut order: Vec<(usize, u64)> = (0..d).map(|j| (j, keyed_rank(nonce, 0, j))).collect();
    order.sort_by(|a, b| scores[b.0].total_cmp(&scores[a.0]).then(a.1.cmp(&b.1)));

    let pool = ((window * g as f64).ceil() as usize).clamp(g, d);
    let mut candidates: Vec<(usize, u64)> = order[..pool]
        .iter()
        .map(|&(j, _)| (j, keyed_rank(nonce, 1, j)))
        .collect();
    if pool > g {
        candidates.sort_by_key(|&(j, r)| (r, j));
    }
    let indices = candidates[..g].iter().map(|&(j, _)| j as u32).collect();
    ReliableKey::new(indices, d, nonce)
}

/// Gathers `a[g_0], a[g_1], …` in key order.
pub fn extract(a: &BitVector, key: &ReliableKey) -> Result<BitVector> {
    key.indices
        .iter()
        .map(|&i| {
            a.get(i as usize).ok_or(Error::IndexOutOfRange {
                index: i as usize,
                len: a.len(),
            })
        })
        .collect()
}
