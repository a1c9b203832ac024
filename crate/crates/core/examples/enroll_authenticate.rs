// Enroll one synthetic subject with each scheme and verify genuine and
// impostor probes.

use mbsketch::fusion::{Activation, FusionWeights};
use mbsketch::pipeline::{enroll, verify, EnrollmentSecrets, PipelineConfig};
use mbsketch::quantizer::population_stats;
use mbsketch::synth::{gen_population, SynthParams};
use mbsketch::Scheme;

pub fn run() -> mbsketch::Result<()> {
    let ds = gen_population(SynthParams {
        num_subjects: 10,
        samples_per_subject: 6,
        d_face: 16,
        d_iris: 16,
        between_std: 1.0,
        within_std: 0.2,
        seed: 11,
    })?;
    let fused = ds.fuse(&FusionWeights::bla(16, 16, None, Activation::Identity)?)?;
    let pop = population_stats(&fused)?;

    for scheme in [Scheme::SecureSketch, Scheme::FuzzyCommitment] {
        let cfg = PipelineConfig { scheme, ..PipelineConfig::new(4, 5) };
        let code = cfg.code()?;
        let en = enroll(&ds.subjects[0].id, &fused[0][..3], &pop, &code, &cfg, EnrollmentSecrets::derive(1, 0, 0))?;
        println!("{scheme}: record\n{}", en.record.to_text());
        for (who, probe) in [("genuine", &fused[0][4]), ("impostor", &fused[1][0])] {
            let d = verify(probe, &pop, &en.key, &en.record, &code)?;
            println!("  {who}: accepted={} ({:?})", d.accepted, d.reason);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> mbsketch::Result<()> {
    run()
}
