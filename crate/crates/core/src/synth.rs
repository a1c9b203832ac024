//! Embedding datasets: seeded synthetic populations and CSV ingestion.
//!
//! # Synthetic model
//!
//! Each subject gets a latent face mean and iris mean with i.i.d.
//! `N(0, between_std²)` components; each sample adds i.i.d.
//! `N(0, within_std²)` noise to both. Randomness comes from
//! `rand_chacha::ChaCha8Rng::seed_from_u64(seed)` and normals from
//! `rand_distr::StandardNormal` (ziggurat), drawn in this order: for each
//! subject, the face mean then the iris mean; then for each sample, face noise
//! then iris noise.
//!
//! # CSV schema
//!
//! No header. One row per embedding:
//! `subject_id,sample_id,modality,v0,v1,...` with `modality` ∈ {`face`,
//! `iris`}. A sample is a face row and an iris row sharing
//! `(subject_id, sample_id)`. Values are written with Rust's shortest
//! round-trip float formatting, so a write/read cycle is exact.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fusion::{Embedding, FusionWeights, Modality};

#[derive(Clone, Debug, PartialEq)]
pub struct SamplePair {
    pub sample_id: String,
    pub face: Embedding,
    pub iris: Embedding,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Subject {
    pub id: String,
    pub samples: Vec<SamplePair>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthParams {
    pub num_subjects: usize,
    pub samples_per_subject: usize,
    pub d_face: usize,
    pub d_iris: usize,
    pub between_std: f64,
    pub within_std: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingDataset {
    pub subjects: Vec<Subject>,
    /// Present for generated datasets.
    pub synth: Option<SynthParams>,
}

impl EmbeddingDataset {
    pub fn d_face(&self) -> usize {
        self.subjects[0].samples[0].face.dim()
    }

    pub fn d_iris(&self) -> usize {
        self.subjects[0].samples[0].iris.dim()
    }

    pub fn num_pairs(&self) -> usize {
        self.subjects.iter().map(|s| s.samples.len()).sum()
    }

    /// Fused vectors, grouped by subject in dataset order.
    pub fn fuse(&self, weights: &FusionWeights) -> Result<Vec<Vec<Vec<f64>>>> {
        self.subjects
            .iter()
            .map(|s| s.samples.iter().map(|p| weights.fuse(&p.face, &p.iris)).collect())
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let first = self
            .subjects
            .first()
            .and_then(|s| s.samples.first())
            .ok_or_else(|| Error::Parse("dataset is empty".into()))?;
        let (df, di) = (first.face.dim(), first.iris.dim());
        for s in &self.subjects {
            if s.samples.is_empty() {
                return Err(Error::InsufficientData(format!("subject {} has no samples", s.id)));
            }
            for p in &s.samples {
                if p.face.dim() != df || p.iris.dim() != di {
                    return Err(Error::InconsistentDimensions(format!(
                        "subject {} sample {} is {}+{}, expected {df}+{di}",
                        s.id,
                        p.sample_id,
                        p.face.dim(),
                        p.iris.dim()
                    )));
                }
            }
        }
        Ok(())
    }
}

fn normal_vec(rng: &mut ChaCha8Rng, center: Option<&[f64]>, len: usize, std: f64) -> Vec<f64> {
    (0..len)
        .map(|i| {
            let z: f64 = StandardNormal.sample(rng);
            center.map_or(0.0, |c| c[i]) + std * z
        })
        .collect()
}

pub fn gen_population(p: SynthParams) -> Result<EmbeddingDataset> {
    if p.num_subjects == 0 || p.samples_per_subject == 0 || p.d_face == 0 || p.d_iris == 0 {
        return Err(Error::InvalidParams("counts and dimensions must be positive".into()));
    }
    if !(p.between_std > 0.0 && p.between_std.is_finite()) {
        return Err(Error::InvalidParams("between_std must be positive".into()));
    }
    if !(p.within_std >= 0.0 && p.within_std.is_finite()) {
        return Err(Error::InvalidParams("within_std must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let width = (p.num_subjects.max(2) - 1).to_string().len();
    let mut subjects = Vec::with_capacity(p.num_subjects);
    for s in 0..p.num_subjects {
        let face_mean = normal_vec(&mut rng, None, p.d_face, p.between_std);
        let iris_mean = normal_vec(&mut rng, None, p.d_iris, p.between_std);
        let samples = (0..p.samples_per_subject)
            .map(|i| {
                let face = normal_vec(&mut rng, Some(&face_mean), p.d_face, p.within_std);
                let iris = normal_vec(&mut rng, Some(&iris_mean), p.d_iris, p.within_std);
                Ok(SamplePair {
                    sample_id: i.to_string(),
                    face: Embedding::new(face, Modality::Face)?,
                    iris: Embedding::new(iris, Modality::Iris)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        subjects.push(Subject {
            id: format!("s{s:0width$}"),
            samples,
        });
    }
    Ok(EmbeddingDataset {
        subjects,
        synth: Some(p),
    })
}

pub fn write_embeddings(dataset: &EmbeddingDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let to_err = |e: csv::Error| Error::Parse(format!("{}: {e}", path.display()));
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(to_err)?;
    for s in &dataset.subjects {
        for p in &s.samples {
            for e in [&p.face, &p.iris] {
                let mut row = vec![s.id.clone(), p.sample_id.clone(), e.modality().as_str().to_owned()];
                row.extend(e.values().iter().map(|v| format!("{v:?}")));
                w.write_record(&row).map_err(to_err)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&text)
}

pub fn parse_embeddings(text: &str) -> Result<EmbeddingDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    type Partial = (String, Option<Embedding>, Option<Embedding>);
    let mut subjects: Vec<(String, Vec<Partial>)> = Vec::new();
    let mut dims: [Option<usize>; 2] = [None, None];

    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
        if row.len() < 4 {
            return Err(Error::Parse(format!("row {} has no values", line + 1)));
        }
        let (sid, sample, modality) = (&row[0], &row[1], row[2].parse::<Modality>()?);
        let values = row
            .iter()
            .skip(3)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: bad value {v:?}", line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        let slot = &mut dims[(modality == Modality::Iris) as usize];
        match *slot {
            None => *slot = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(Error::InconsistentDimensions(format!(
                    "row {}: {} {} values, expected {d}",
                    line + 1,
                    values.len(),
                    modality.as_str()
                )))
            }
            Some(_) => {}
        }
        let emb = Embedding::new(values, modality)?;

        let idx = match subjects.iter().position(|(id, _)| id == sid) {
            Some(i) => i,
            None => {
                subjects.push((sid.to_owned(), Vec::new()));
                subjects.len() - 1
            }
        };
        let samples = &mut subjects[idx].1;
        let entry = match samples.iter().position(|(id, _, _)| id == sample) {
            Some(i) => &mut samples[i],
            None => {
                samples.push((sample.to_owned(), None, None));
                samples.last_mut().unwrap()
            }
        };
        let target = match modality {
            Modality::Face => &mut entry.1,
            Modality::Iris => &mut entry.2,
        };
        if target.replace(emb).is_some() {
            return Err(Error::Parse(format!(
                "duplicate {} row for subject {sid} sample {sample}",
                modality.as_str()
            )));
        }
    }
    if subjects.is_empty() {
        return Err(Error::Parse("no embeddings found".into()));
    }
    let subjects = subjects
        .into_iter()
        .map(|(id, samples)| {
            let samples = samples
                .into_iter()
                .map(|(sample_id, face, iris)| match (face, iris) {
                    (Some(face), Some(iris)) => Ok(SamplePair { sample_id, face, iris }),
                    _ => Err(Error::Parse(format!(
                        "subject {id} sample {sample_id} lacks a face or iris row"
                    ))),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Subject { id, samples })
        })
        .collect::<Result<Vec<_>>>()?;
    let ds = EmbeddingDataset { subjects, synth: None };
    ds.validate()?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SynthParams {
        SynthParams {
            num_subjects: 4,
            samples_per_subject: 3,
            d_face: 5,
            d_iris: 3,
            between_std: 1.0,
            within_std: 0.2,
            seed: 11,
        }
    }

    #[test]
    fn deterministic_and_shaped() {
        let a = gen_population(params()).unwrap();
        let b = gen_population(params()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_pairs(), 12);
        assert_eq!((a.d_face(), a.d_iris()), (5, 3));
        let c = gen_population(SynthParams { seed: 12, ..params() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn fifty_by_twenty_shape() {
        let ds = gen_population(SynthParams {
            num_subjects: 50,
            samples_per_subject: 20,
            d_face: 2,
            d_iris: 2,
            ..params()
        })
        .unwrap();
        assert_eq!(ds.num_pairs(), 1000);
        assert_eq!(ds.subjects[7].id, "s07");
    }

    #[test]
    fn zero_within_noise_repeats_samples() {
        let ds = gen_population(SynthParams { within_std: 0.0, ..params() }).unwrap();
        for s in &ds.subjects {
            assert!(s.samples.iter().all(|p| p.face == s.samples[0].face && p.iris == s.samples[0].iris));
        }
    }

    #[test]
    fn invalid_params() {
        assert!(gen_population(SynthParams { between_std: 0.0, ..params() }).is_err());
        assert!(gen_population(SynthParams { num_subjects: 0, ..params() }).is_err());
        assert!(gen_population(SynthParams { within_std: -1.0, ..params() }).is_err());
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let ds = gen_population(params()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        write_embeddings(&ds, &path).unwrap();
        let back = read_embeddings(&path).unwrap();
        assert_eq!(back.subjects, ds.subjects);
        assert!(back.synth.is_none());
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(parse_embeddings(""), Err(Error::Parse(_))));
        let bad = "a,0,face,1,2\na,0,iris,1\nb,0,face,1\nb,0,iris,2\n";
        assert!(matches!(parse_embeddings(bad), Err(Error::InconsistentDimensions(_))));
        let missing = "a,0,face,1,2\n";
        assert!(matches!(parse_embeddings(missing), Err(Error::Parse(_))));
        let ok = "a,0,face,1,2\na,0,iris,3\n";
        assert_eq!(parse_embeddings(ok).unwrap().subjects[0].samples[0].face.values(), &[1.0, 2.0]);
    }
}
