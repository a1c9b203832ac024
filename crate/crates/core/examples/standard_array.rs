// Brute-force complete decoding of a small code and the column-collision rate
// that underlies the false-accept analysis.

use mbsketch::oracle::{column_collision_rate, Codebook};
use mbsketch::{DecodePolicy, RsCode};

pub fn run() -> mbsketch::Result<()> {
    let code = RsCode::with_m(3, 3)?;
    let book = Codebook::new(&code)?;
    println!("RS(7,3) has {} codewords", book.codewords().len());

    let mut r = code.encode(&[1, 2, 3])?;
    r[0] ^= 5;
    r[6] ^= 1;
    let near = book.nearest(&r)?;
    let fast = code.decode(&r, DecodePolicy::FailDeny)?;
    println!("nearest at distance {}, decoder agrees: {}", near.distance, fast.codeword.as_deref() == Some(near.head()));

    for k in 1..=2 {
        let code = RsCode::with_m(3, k)?;
        let rate = column_collision_rate(&code, 20_000, 1)?;
        println!("RS(7,{k}) column collision rate {rate:.4} (expected {:.4})", (-(3.0 * k as f64)).exp2());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> mbsketch::Result<()> {
    run()
}
