// Choose K for a target security level and report the resulting code rate.

use mbsketch::eval::params_for_security;

pub fn run() -> mbsketch::Result<()> {
    println!("m,N,n,security,K,achieved,rate");
    for m in [5, 6, 7] {
        for security in [53, 80, 100] {
            let p = params_for_security(m, security)?;
            println!(
                "{},{},{},{},{},{},{:.3}",
                p.m, p.n_symbols, p.n_bits, p.requested_security, p.k, p.achieved_security, p.rate
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> mbsketch::Result<()> {
    run()
}
