use mbsketch::synth::{gen_population, parse_embeddings, write_embeddings, SynthParams};

fn params(seed: u64) -> SynthParams {
    SynthParams {
        num_subjects: 20,
        samples_per_subject: 6,
        d_face: 16,
        d_iris: 12,
        between_std: 1.0,
        within_std: 0.4,
        seed,
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn inter_subject_distances_exceed_intra_subject() {
    let ds = gen_population(params(3)).unwrap();
    let vecs: Vec<Vec<Vec<f64>>> = ds
        .subjects
        .iter()
        .map(|s| s.samples.iter().map(|p| [p.face.values(), p.iris.values()].concat()).collect())
        .collect();
    let (mut intra, mut inter) = (Vec::new(), Vec::new());
    for (i, a) in vecs.iter().enumerate() {
        for x in 0..a.len() {
            for y in x + 1..a.len() {
                intra.push(dist(&a[x], &a[y]));
            }
        }
        for b in &vecs[i + 1..] {
            inter.push(dist(&a[0], &b[0]));
        }
    }
    let ((mi, si), (me, se)) = (mean_sd(&intra), mean_sd(&inter));
    assert!(me - mi > 3.0 * (si * si + se * se).sqrt(), "intra {mi}±{si} inter {me}±{se}");
}

#[test]
fn generation_is_seeded() {
    assert_eq!(gen_population(params(9)).unwrap(), gen_population(params(9)).unwrap());
    assert_ne!(gen_population(params(9)).unwrap(), gen_population(params(10)).unwrap());
}

#[test]
fn csv_roundtrip_is_exact() {
    let ds = gen_population(params(4)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.csv");
    write_embeddings(&ds, &path).unwrap();
    let back = parse_embeddings(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back.subjects, ds.subjects);
}

#[test]
fn zero_within_noise_repeats_samples() {
    let ds = gen_population(SynthParams { within_std: 0.0, ..params(1) }).unwrap();
    for s in &ds.subjects {
        assert!(s.samples.iter().all(|p| p.face == s.samples[0].face && p.iris == s.samples[0].iris));
    }
}
