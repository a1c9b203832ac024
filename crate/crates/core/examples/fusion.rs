// Feature-level fusion of a face and an iris embedding, and the weights file.

use mbsketch::fusion::{load_weights, Activation, Embedding, FusionWeights, Modality};

pub fn run() -> mbsketch::Result<()> {
    let face = Embedding::new(vec![0.5, -1.0, 2.0, 0.25], Modality::Face)?;
    let iris = Embedding::new(vec![1.0, -0.5, 0.75], Modality::Iris)?;

    let fca = FusionWeights::random_fca(4, 3, 8, Activation::Rectifier, 1)?;
    println!("FCA output: {:?}", fca.fuse(&face, &iris)?);

    let raw = FusionWeights::bla(4, 3, None, Activation::Identity)?;
    let outer = raw.fuse(&face, &iris)?;
    println!("BLA outer product has {} components, first row {:?}", outer.len(), &outer[..3]);

    let projected = FusionWeights::random_bla(4, 3, 5, Activation::Identity, 2)?;
    println!("projected BLA: {:?}", projected.fuse(&face, &iris)?);

    let dir = std::env::temp_dir().join(format!("mbsketch-fusion-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| mbsketch::Error::Io { path: dir.clone(), source: e })?;
    let path = dir.join("fca.bin");
    fca.save(&path)?;
    assert_eq!(load_weights(&path)?, fca);
    println!("weights round-trip through {}", path.display());
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}

#[allow(dead_code)]
fn main() -> mbsketch::Result<()> {
    run()
}
