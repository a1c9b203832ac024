// Arithmetic in GF(2^m): checked elements and the raw symbol API.

use mbsketch::gf::Field;

pub fn run() -> mbsketch::Result<()> {
    let f = Field::new(3, None)?;
    println!("GF(8) with primitive polynomial {:#x}", f.poly());

    let a = f.alpha();
    let a2 = f.mul(a, a)?;
    let a3 = f.mul(a, a2)?;
    println!("alpha^3 = {:03b}", a3.value());

    for v in 1..8 {
        let x = f.element(v)?;
        let inv = f.inv(x)?;
        println!("{v} * {} = {}   log({v}) = {}", inv.value(), f.mul(x, inv)?.value(), f.log(v as u16));
    }

    // elements of different fields do not mix
    let g = Field::new(4, None)?;
    assert!(f.add(a, g.alpha()).is_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> mbsketch::Result<()> {
    run()
}
