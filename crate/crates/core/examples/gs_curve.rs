// GAR versus security on a synthetic population, written as CSV.

use mbsketch::eval::{run_gs_curve, write_gs_csv, GsOptions, ImpostorSource, Scenario};
use mbsketch::fusion::{Activation, FusionWeights};
use mbsketch::synth::{gen_population, SynthParams};

pub fn run() -> mbsketch::Result<()> {
    let ds = gen_population(SynthParams {
        num_subjects: 20,
        samples_per_subject: 6,
        d_face: 32,
        d_iris: 32,
        between_std: 1.0,
        within_std: 0.15,
        seed: 2024,
    })?;
    let fused = ds.fuse(&FusionWeights::bla(32, 32, None, Activation::Identity)?)?;
    let opts = GsOptions {
        scenario: Scenario::StolenKey,
        impostors: ImpostorSource::Dataset,
        far_trials: 2_000,
        seed: 1,
        ..GsOptions::default()
    };
    let points = run_gs_curve(&fused, 5, &[2, 6, 11, 16, 20], &opts)?;
    write_gs_csv(&points, std::io::stdout().lock()).map_err(|e| mbsketch::Error::Io { path: "<stdout>".into(), source: e })?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> mbsketch::Result<()> {
    run()
}
