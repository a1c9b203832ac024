// Encode a message with RS(31, 11), corrupt t symbols and decode it back.

use mbsketch::{DecodePolicy, DecodeStatus, RsCode};

pub fn run() -> mbsketch::Result<()> {
    let code = RsCode::with_m(5, 11)?;
    println!("RS({}, {}) over GF(32): t = {}, d = {}, n = {} bits", code.n(), code.k(), code.t(), code.min_distance(), code.n_bits());

    let message: Vec<u16> = (0..11).map(|i| (i * 7 + 3) % 32).collect();
    let codeword = code.encode(&message)?;
    let mut received = codeword.clone();
    for i in 0..code.t() {
        received[3 * i] ^= i as u16 + 1;
    }
    let out = code.decode(&received, DecodePolicy::FailDeny)?;
    assert_eq!(out.status, DecodeStatus::Corrected(code.t()));
    assert_eq!(out.message.as_deref(), Some(&message[..]));
    println!("corrected {} errors, message recovered", code.t());

    // past t the strict decoder gives up; the fallback policy still maps to a message
    for pos in [1, 2, 4] {
        received[pos] ^= 1;
    }
    let strict = code.decode(&received, DecodePolicy::FailDeny)?;
    let total = code.decode(&received, DecodePolicy::FallbackSystematic)?;
    println!("beyond t: fail-deny -> {:?}, fallback -> {:?}", strict.status, total.status);
    Ok(())
}

#[allow(dead_code)]
fn main() -> mbsketch::Result<()> {
    run()
}
