#![allow(dead_code)]

use mbsketch::fusion::{Activation, FusionWeights};
use mbsketch::synth::{gen_population, SynthParams};

/// Seed of the pinned evaluation dataset.
pub const PINNED_SEED: u64 = 2024;

/// 50 subjects × 20 face/iris pairs, 64 + 64 dimensions.
pub fn pinned_params(within_std: f64) -> SynthParams {
    SynthParams {
        num_subjects: 50,
        samples_per_subject: 20,
        d_face: 64,
        d_iris: 64,
        between_std: 1.0,
        within_std,
        seed: PINNED_SEED,
    }
}

/// Fused vectors grouped by subject, using raw bilinear (outer-product) fusion.
pub fn fused_bla(p: SynthParams) -> Vec<Vec<Vec<f64>>> {
    let ds = gen_population(p).unwrap();
    let w = FusionWeights::bla(p.d_face, p.d_iris, None, Activation::Identity).unwrap();
    ds.fuse(&w).unwrap()
}

/// A small dataset for fast tests: `subjects × samples`, 8 + 8 dims (64 fused).
pub fn small(subjects: usize, samples: usize, within_std: f64, seed: u64) -> Vec<Vec<Vec<f64>>> {
    fused_bla(SynthParams {
        num_subjects: subjects,
        samples_per_subject: samples,
        d_face: 8,
        d_iris: 8,
        between_std: 1.0,
        within_std,
        seed,
    })
}

/// `|observed − p| ≤ 3·sqrt(p(1−p)/trials)`.
pub fn within_3_sigma(observed: f64, p: f64, trials: usize) -> bool {
    (observed - p).abs() <= 3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Relative comparison: `|a − b| ≤ tol · max(|a|, |b|, floor)`.
pub fn close(a: f64, b: f64, tol: f64, floor: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(floor)
}
