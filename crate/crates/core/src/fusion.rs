//! Joint representation layer: fuses a face and an iris embedding into one
//! feature vector.
//!
//! * FCA: `e = act(W·[face; iris] + b)`.
//! * BLA: `e = act(P·vec(face·irisᵀ))`, or the raw row-major outer product
//!   when no projection `P` is stored.
//!
//! # Weights file
//!
//! Little-endian binary:
//!
//! ```text
//! offset size  field
//! 0      4     magic "MBFW"
//! 4      4     u32 version (= 1)
//! 8      1     u8 mode        0 = FCA, 1 = BLA
//! 9      1     u8 activation  0 = identity, 1 = rectifier
//! 10     1     u8 has_projection (BLA only; 0 for FCA)
//! 11     1     u8 reserved (= 0)
//! 12     4     u32 d_face
//! 16     4     u32 d_iris
//! 20     4     u32 out_dim
//! 24     ...   f32 payload, row-major:
//!                FCA: W (out_dim × (d_face+d_iris)) then b (out_dim)
//!                BLA with projection: P (out_dim × d_face·d_iris)
//!                BLA without projection: empty; out_dim = d_face·d_iris
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub const DEFAULT_OUT_DIM: usize = 4096;

const MAGIC: &[u8; 4] = b"MBFW";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Modality {
    Face,
    Iris,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Face => "face",
            Modality::Iris => "iris",
        }
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "face" => Ok(Modality::Face),
            "iris" => Ok(Modality::Iris),
            _ => Err(Error::Parse(format!("unknown modality {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    values: Vec<f64>,
    modality: Modality,
}

impl Embedding {
    pub fn new(values: Vec<f64>, modality: Modality) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DimensionMismatch("embedding must be non-empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("embedding values must be finite".into()));
        }
        Ok(Embedding { values, modality })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FusionMode {
    Fca,
    Bla,
}

impl fmt::Display for FusionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FusionMode::Fca => "fca",
            FusionMode::Bla => "bla",
        })
    }
}

impl FromStr for FusionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fca" => Ok(FusionMode::Fca),
            "bla" => Ok(FusionMode::Bla),
            _ => Err(Error::Parse(format!("unknown fusion mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    Identity,
    Rectifier,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Rectifier => x.max(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FusionWeights {
    mode: FusionMode,
    d_face: usize,
    d_iris: usize,
    out_dim: usize,
    activation: Activation,
    /// FCA: W, row-major out_dim × (d_face + d_iris). BLA: P if present.
    matrix: Option<Vec<f32>>,
    /// FCA only.
    bias: Option<Vec<f32>>,
}

impl FusionWeights {
    pub fn fca(
        d_face: usize,
        d_iris: usize,
        w: Vec<f32>,
        b: Vec<f32>,
        activation: Activation,
    ) -> Result<Self> {
        let out_dim = b.len();
        let weights = FusionWeights {
            mode: FusionMode::Fca,
            d_face,
            d_iris,
            out_dim,
            activation,
            matrix: Some(w),
            bias: Some(b),
        };
        weights.validate()?;
        Ok(weights)
    }

    /// BLA weights; `projection` is `out_dim × (d_face·d_iris)` row-major.
    pub fn bla(
        d_face: usize,
        d_iris: usize,
        projection: Option<(usize, Vec<f32>)>,
        activation: Activation,
    ) -> Result<Self> {
        let (out_dim, matrix) = match projection {
            Some((out_dim, p)) => (out_dim, Some(p)),
            None => (d_face * d_iris, None),
        };
        let weights = FusionWeights {
            mode: FusionMode::Bla,
            d_face,
            d_iris,
            out_dim,
            activation,
            matrix,
            bias: None,
        };
        weights.validate()?;
        Ok(weights)
    }

    /// Seeded Gaussian FCA weights with variance `1/(d_face + d_iris)`, zero bias.
    pub fn random_fca(
        d_face: usize,
        d_iris: usize,
        out_dim: usize,
        activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        let fan_in = d_face + d_iris;
        let w = gaussian_matrix(out_dim * fan_in, fan_in, seed);
        Self::fca(d_face, d_iris, w, vec![0.0; out_dim], activation)
    }

    /// Seeded Gaussian BLA projection to `out_dim` components.
    pub fn random_bla(
        d_face: usize,
        d_iris: usize,
        out_dim: usize,
        activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        let fan_in = d_face * d_iris;
        let p = gaussian_matrix(out_dim * fan_in, fan_in, seed);
        Self::bla(d_face, d_iris, Some((out_dim, p)), activation)
    }

    fn validate(&self) -> Result<()> {
        if self.d_face == 0 || self.d_iris == 0 || self.out_dim == 0 {
            return Err(Error::DimensionMismatch("dimensions must be positive".into()));
        }
        let expect = |name: &str, v: &Option<Vec<f32>>, len: usize| -> Result<()> {
            match v {
                Some(v) if v.len() != len => Err(Error::DimensionMismatch(format!(
                    "{name} has {} entries, expected {len}",
                    v.len()
                ))),
                None => Err(Error::DimensionMismatch(format!("{name} missing"))),
                _ => Ok(()),
            }
        };
        match self.mode {
            FusionMode::Fca => {
                expect("W", &self.matrix, self.out_dim * (self.d_face + self.d_iris))?;
                expect("b", &self.bias, self.out_dim)?;
            }
            FusionMode::Bla => {
                if self.bias.is_some() {
                    return Err(Error::DimensionMismatch("BLA weights carry no bias".into()));
                }
                match &self.matrix {
                    Some(_) => expect("P", &self.matrix, self.out_dim * self.d_face * self.d_iris)?,
                    None if self.out_dim != self.d_face * self.d_iris => {
                        return Err(Error::DimensionMismatch(
                            "BLA without projection must have out_dim = d_face·d_iris".into(),
                        ))
                    }
                    None => {}
                }
            }
        }
        if self.matrix.iter().chain(&self.bias).flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("weights must be finite".into()));
        }
        Ok(())
    }

    pub fn mode(&self) -> FusionMode {
        self.mode
    }

    pub fn d_face(&self) -> usize {
        self.d_face
    }

    pub fn d_iris(&self) -> usize {
        self.d_iris
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn has_projection(&self) -> bool {
        self.mode == FusionMode::Bla && self.matrix.is_some()
    }

    /// Dispatches on the weights' mode.
    pub fn fuse(&self, face: &Embedding, iris: &Embedding) -> Result<Vec<f64>> {
        match self.mode {
            FusionMode::Fca => fuse_fca(face, iris, self),
            FusionMode::Bla => fuse_bla(face, iris, self),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(match self.mode {
            FusionMode::Fca => 0,
            FusionMode::Bla => 1,
        });
        out.push(match self.activation {
            Activation::Identity => 0,
            Activation::Rectifier => 1,
        });
        out.push(self.has_projection() as u8);
        out.push(0);
        for d in [self.d_face, self.d_iris, self.out_dim] {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in self.matrix.iter().chain(&self.bias).flatten() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Parse("weights file shorter than header".into()));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Parse("bad weights magic".into()));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(Error::Parse(format!("unsupported weights version {version}")));
        }
        let mode = match bytes[8] {
            0 => FusionMode::Fca,
            1 => FusionMode::Bla,
            b => return Err(Error::Parse(format!("bad mode byte {b}"))),
        };
        let activation = match bytes[9] {
            0 => Activation::Identity,
            1 => Activation::Rectifier,
            b => return Err(Error::Parse(format!("bad activation byte {b}"))),
        };
        let has_projection = match bytes[10] {
            0 => false,
            1 => true,
            b => return Err(Error::Parse(format!("bad projection flag {b}"))),
        };
        let (d_face, d_iris, out_dim) = (u32_at(12) as usize, u32_at(16) as usize, u32_at(20) as usize);

        let (matrix_len, bias_len) = match mode {
            FusionMode::Fca => (Some(out_dim * (d_face + d_iris)), Some(out_dim)),
            FusionMode::Bla if has_projection => (Some(out_dim * d_face * d_iris), None),
            FusionMode::Bla => (None, None),
        };
        let floats = matrix_len.unwrap_or(0) + bias_len.unwrap_or(0);
        let payload = &bytes[HEADER_LEN..];
        if payload.len() != floats * 4 {
            return Err(Error::Parse(format!(
                "weights payload has {} bytes, header implies {}",
                payload.len(),
                floats * 4
            )));
        }
        let mut values = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()));
        let matrix = matrix_len.map(|n| values.by_ref().take(n).collect());
        let bias = bias_len.map(|n| values.by_ref().take(n).collect());
        let weights = FusionWeights {
            mode,
            d_face,
            d_iris,
            out_dim,
            activation,
            matrix,
            bias,
        };
        weights.validate()?;
        Ok(weights)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<FusionWeights> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    FusionWeights::from_bytes(&bytes)
}

fn gaussian_matrix(len: usize, fan_in: usize, seed: u64) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (fan_in as f64).sqrt();
    (0..len)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            (z * scale) as f32
        })
        .collect()
}

fn check_inputs(face: &Embedding, iris: &Embedding, w: &FusionWeights, mode: FusionMode) -> Result<()> {
    if w.mode != mode {
        return Err(Error::DimensionMismatch(format!(
            "weights are for {}, not {mode}",
            w.mode
        )));
    }
    if face.modality != Modality::Face || iris.modality != Modality::Iris {
        return Err(Error::DimensionMismatch("expected (face, iris) embeddings".into()));
    }
    if face.dim() != w.d_face || iris.dim() != w.d_iris {
        return Err(Error::DimensionMismatch(format!(
            "embeddings are {}+{}, weights expect {}+{}",
            face.dim(),
            iris.dim(),
            w.d_face,
            w.d_iris
        )));
    }
    Ok(())
}

fn mat_vec<'a>(matrix: &'a [f32], cols: usize, x: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
    matrix
        .chunks_exact(cols)
        .map(move |row| row.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum())
}

pub fn fuse_fca(face: &Embedding, iris: &Embedding, w: &FusionWeights) -> Result<Vec<f64>> {
    check_inputs(face, iris, w, FusionMode::Fca)?;
    let x: Vec<f64> = face.values.iter().chain(&iris.values).copied().collect();
    let matrix = w.matrix.as_deref().expect("validated FCA weights");
    let bias = w.bias.as_deref().expect("validated FCA weights");
    Ok(mat_vec(matrix, x.len(), &x)
        .zip(bias)
        .map(|(v, &b)| w.activation.apply(v + b as f64))
        .collect())
}

pub fn fuse_bla(face: &Embedding, iris: &Embedding, w: &FusionWeights) -> Result<Vec<f64>> {
    check_inputs(face, iris, w, FusionMode::Bla)?;
    let outer: Vec<f64> = face
        .values
        .iter()
        .flat_map(|&f| iris.values.iter().map(move |&i| f * i))
        .collect();
    let act = w.activation;
    Ok(match &w.matrix {
        Some(p) => mat_vec(p, outer.len(), &outer).map(|v| act.apply(v)).collect(),
        None => outer.into_iter().map(|v| act.apply(v)).collect(),
    })
}
