// Worst-case leakage when helper data is exposed.

use mbsketch::eval::privacy_report;

pub fn run() -> mbsketch::Result<()> {
    for (d, n) in [(4096, 155), (4096, 378), (4096, 889)] {
        let r = privacy_report(d, n)?;
        println!(
            "d={} n={}: at most {} bits leak, {} bits of uncertainty remain",
            r.d, r.n, r.max_leakage_bits, r.residual_uncertainty_bits
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> mbsketch::Result<()> {
    run()
}
