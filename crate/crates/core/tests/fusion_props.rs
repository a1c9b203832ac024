mod common;

use common::close;
use mbsketch::fusion::{Activation, Embedding, FusionWeights, Modality};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INSTANCES: usize = 1_000;
const TOL: f64 = 1e-6;

fn vec_in(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-2.0..2.0)).collect()
}

fn emb(v: Vec<f64>, m: Modality) -> Embedding {
    Embedding::new(v, m).unwrap()
}

fn lincomb(a: f64, x: &[f64], b: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(x, y)| a * x + b * y).collect()
}

/// Reference: W·[face; iris] + b with plain nested loops.
fn naive_fca(w: &[f32], b: &[f32], face: &[f64], iris: &[f64]) -> Vec<f64> {
    let x: Vec<f64> = face.iter().chain(iris).copied().collect();
    (0..b.len())
        .map(|i| {
            let mut acc = b[i] as f64;
            for j in 0..x.len() {
                acc += w[i * x.len() + j] as f64 * x[j];
            }
            acc
        })
        .collect()
}

/// Reference: vec(face ⊗ iris), optionally projected by P.
fn naive_bla(p: Option<&[f32]>, out: usize, face: &[f64], iris: &[f64]) -> Vec<f64> {
    let mut z = Vec::new();
    for f in face {
        for i in iris {
            z.push(f * i);
        }
    }
    match p {
        None => z,
        Some(p) => (0..out)
            .map(|r| (0..z.len()).map(|c| p[r * z.len() + c] as f64 * z[c]).sum())
            .collect(),
    }
}

fn assert_close(a: &[f64], b: &[f64], scale: f64, what: &str) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!(close(*x, *y, TOL, scale), "{what}: {x} vs {y}");
    }
}

fn scale_of(v: &[f64]) -> f64 {
    v.iter().fold(1e-12, |m, x| m.max(x.abs()))
}

#[test]
fn fca_matches_reference_and_is_affine() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..INSTANCES {
        let (df, di, out) = (rng.random_range(1..9), rng.random_range(1..9), rng.random_range(1..12));
        let w: Vec<f32> = (0..out * (df + di)).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f32> = (0..out).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fw = FusionWeights::fca(df, di, w.clone(), b.clone(), Activation::Identity).unwrap();
        let (f1, i1, f2, i2) = (vec_in(&mut rng, df), vec_in(&mut rng, di), vec_in(&mut rng, df), vec_in(&mut rng, di));
        let lam: f64 = rng.random_range(-1.5..1.5);

        let y1 = fw.fuse(&emb(f1.clone(), Modality::Face), &emb(i1.clone(), Modality::Iris)).unwrap();
        let y2 = fw.fuse(&emb(f2.clone(), Modality::Face), &emb(i2.clone(), Modality::Iris)).unwrap();
        assert_close(&y1, &naive_fca(&w, &b, &f1, &i1), scale_of(&y1), "fca reference");

        // f(λx + (1−λ)y) = λf(x) + (1−λ)f(y)
        let mixed = fw
            .fuse(
                &emb(lincomb(lam, &f1, 1.0 - lam, &f2), Modality::Face),
                &emb(lincomb(lam, &i1, 1.0 - lam, &i2), Modality::Iris),
            )
            .unwrap();
        let expect = lincomb(lam, &y1, 1.0 - lam, &y2);
        let scale = scale_of(&y1).max(scale_of(&y2));
        assert_close(&mixed, &expect, scale, "fca affinity");

        let relu = FusionWeights::fca(df, di, w.clone(), b.clone(), Activation::Rectifier).unwrap();
        let r1 = relu.fuse(&emb(f1.clone(), Modality::Face), &emb(i1.clone(), Modality::Iris)).unwrap();
        let expect: Vec<f64> = y1.iter().map(|v| v.max(0.0)).collect();
        assert_close(&r1, &expect, scale_of(&y1), "fca rectifier");
    }
}

#[test]
fn bla_matches_reference_and_is_bilinear() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 0..INSTANCES {
        let (df, di) = (rng.random_range(1..7), rng.random_range(1..7));
        let projection = (n % 2 == 1).then(|| {
            let out = rng.random_range(1..10);
            let p: Vec<f32> = (0..out * df * di).map(|_| rng.random_range(-1.0..1.0)).collect();
            (out, p)
        });
        let fw = FusionWeights::bla(df, di, projection.clone(), Activation::Identity).unwrap();
        let out = fw.out_dim();
        let f = |a: &[f64], b: &[f64]| fw.fuse(&emb(a.to_vec(), Modality::Face), &emb(b.to_vec(), Modality::Iris)).unwrap();

        let (a1, a2, b1, b2) = (vec_in(&mut rng, df), vec_in(&mut rng, df), vec_in(&mut rng, di), vec_in(&mut rng, di));
        let (s, t): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));

        let y11 = f(&a1, &b1);
        let p = projection.as_ref().map(|(_, p)| p.as_slice());
        assert_close(&y11, &naive_bla(p, out, &a1, &b1), scale_of(&y11), "bla reference");

        let (y21, y12) = (f(&a2, &b1), f(&a1, &b2));
        let scale = scale_of(&y11).max(scale_of(&y21)).max(scale_of(&y12)) * (s.abs() + t.abs()).max(1.0);
        // linear in the face argument
        let left = f(&lincomb(s, &a1, t, &a2), &b1);
        assert_close(&left, &lincomb(s, &y11, t, &y21), scale, "bla left linearity");
        // linear in the iris argument
        let right = f(&a1, &lincomb(s, &b1, t, &b2));
        assert_close(&right, &lincomb(s, &y11, t, &y12), scale, "bla right linearity");
    }
}

#[test]
fn weights_file_roundtrip_preserves_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.bin");
    let w = FusionWeights::random_fca(5, 3, 7, Activation::Rectifier, 9).unwrap();
    w.save(&path).unwrap();
    let loaded = mbsketch::fusion::load_weights(&path).unwrap();
    assert_eq!(loaded, w);
}
