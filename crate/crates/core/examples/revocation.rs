// Store a template and key, revoke them, and re-enroll under a fresh key.

use mbsketch::pipeline::{enroll, EnrollmentSecrets, PipelineConfig};
use mbsketch::quantizer::population_stats;
use mbsketch::store::{open_stores, revoke};

pub fn run() -> mbsketch::Result<()> {
    let subjects: Vec<Vec<Vec<f64>>> = (0..4)
        .map(|s| (0..3).map(|i| (0..64).map(|j| ((s * 31 + j * 17 + i) % 13) as f64 - 6.0).collect()).collect())
        .collect();
    let pop = population_stats(&subjects)?;
    let cfg = PipelineConfig::new(3, 2);
    let code = cfg.code()?;

    let root = std::env::temp_dir().join(format!("mbsketch-revocation-{}", std::process::id()));
    let (db, keys) = open_stores(root.join("templates"), root.join("keys"))?;

    let first = enroll("alice", &subjects[0], &pop, &code, &cfg, EnrollmentSecrets::derive(5, 0, 0))?;
    db.save_record("alice", &first.record, false)?;
    keys.save_key("alice", &first.key, false)?;
    println!("enrolled alice with key nonce {}", first.key.nonce().to_hex());

    revoke(&db, &keys, "alice")?;
    println!("revoked; nonce log holds {} entries", keys.revoked_nonces()?.len());
    assert!(keys.save_key("alice", &first.key, false).is_err());

    let second = enroll("alice", &subjects[0], &pop, &code, &cfg, EnrollmentSecrets::derive(5, 0, 1))?;
    keys.save_key("alice", &second.key, false)?;
    db.save_record("alice", &second.record, false)?;
    let shared = first.key.indices().iter().filter(|i| second.key.indices().contains(i)).count();
    println!("re-enrolled with nonce {}; {shared} of {} indices shared", second.key.nonce().to_hex(), second.key.g());
    let _ = std::fs::remove_dir_all(&root);
    Ok(())
}

#[allow(dead_code)]
fn main() -> mbsketch::Result<()> {
    run()
}
