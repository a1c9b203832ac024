//! Table-driven arithmetic in GF(2^m), 2 ≤ m ≤ 10.
//!
//! Elements are represented in the polynomial basis: bit `i` of a value is the
//! coefficient of `x^i`. The generator `α` is the class of `x`, so the field
//! polynomial must be primitive; [`Field::new`] verifies that by walking the
//! powers of `α`.
//!
//! Any primitive polynomial of degree `m` yields an isomorphic field and hence
//! an equivalent Reed-Solomon code. The defaults in [`default_primitive_poly`]
//! are the conventional lowest-weight choices and are fixed so that outputs are
//! reproducible.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const MIN_M: u32 = 2;
pub const MAX_M: u32 = 10;

/// Raw symbol value; always `< 2^m` for the field it belongs to.
pub type Symbol = u16;

/// Default primitive polynomial for each supported `m`.
///
/// | m  | polynomial              | mask    |
/// |----|-------------------------|---------|
/// | 2  | x²+x+1                  | `0x7`   |
/// | 3  | x³+x+1                  | `0xB`   |
/// | 4  | x⁴+x+1                  | `0x13`  |
/// | 5  | x⁵+x²+1                 | `0x25`  |
/// | 6  | x⁶+x+1                  | `0x43`  |
/// | 7  | x⁷+x³+1                 | `0x89`  |
/// | 8  | x⁸+x⁴+x³+x²+1           | `0x11D` |
/// | 9  | x⁹+x⁴+1                 | `0x211` |
/// | 10 | x¹⁰+x³+1                | `0x409` |
pub fn default_primitive_poly(m: u32) -> Result<u32> {
    Ok(match m {
        2 => 0x7,
        3 => 0xB,
        4 => 0x13,
        5 => 0x25,
        6 => 0x43,
        7 => 0x89,
        8 => 0x11D,
        9 => 0x211,
        10 => 0x409,
        _ => return Err(Error::UnsupportedM(m)),
    })
}

struct Tables {
    m: u32,
    poly: u32,
    // exp is doubled so that exp[log a + log b] needs no reduction.
    exp: Vec<Symbol>,
    log: Vec<u16>,
}

/// GF(2^m) with precomputed exp/log tables. Cheap to clone.
#[derive(Clone)]
pub struct Field {
    tables: Arc<Tables>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("m", &self.m())
            .field("poly", &format_args!("{:#x}", self.poly()))
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.poly() == other.poly()
    }
}

impl Eq for Field {}

/// A field element tagged with the polynomial of the field it lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: Symbol,
    poly: u16,
}

impl FieldElement {
    pub fn value(self) -> Symbol {
        self.value
    }
}

impl Field {
    /// Builds GF(2^m). When `primitive_poly` is `None` the documented default
    /// for `m` is used.
    pub fn new(m: u32, primitive_poly: Option<u32>) -> Result<Self> {
        if !(MIN_M..=MAX_M).contains(&m) {
            return Err(Error::UnsupportedM(m));
        }
        let poly = match primitive_poly {
            Some(p) => p,
            None => default_primitive_poly(m)?,
        };
        if poly >> m != 1 {
            return Err(Error::NonPrimitivePolynomial { m, poly });
        }
        let order = (1usize << m) - 1;
        let mut exp = vec![0 as Symbol; 2 * order];
        let mut log = vec![0u16; order + 1];
        let mut seen = vec![false; order + 1];
        let mut x: u32 = 1;
        for (i, e) in exp.iter_mut().take(order).enumerate() {
            if seen[x as usize] {
                // α has order < 2^m − 1
                return Err(Error::NonPrimitivePolynomial { m, poly });
            }
            seen[x as usize] = true;
            *e = x as Symbol;
            log[x as usize] = i as u16;
            x <<= 1;
            if x >> m != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(Error::NonPrimitivePolynomial { m, poly });
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Field {
            tables: Arc::new(Tables { m, poly, exp, log }),
        })
    }

    pub fn m(&self) -> u32 {
        self.tables.m
    }

    pub fn poly(&self) -> u32 {
        self.tables.poly
    }

    /// Number of elements, `2^m`.
    pub fn size(&self) -> usize {
        1 << self.tables.m
    }

    /// Order of the multiplicative group, `2^m − 1`.
    pub fn order(&self) -> usize {
        self.size() - 1
    }

    pub fn element(&self, value: u32) -> Result<FieldElement> {
        if value as usize >= self.size() {
            return Err(Error::ValueOutOfRange { value, m: self.m() });
        }
        Ok(FieldElement {
            value: value as Symbol,
            poly: self.tables.poly as u16,
        })
    }

    pub fn zero(&self) -> FieldElement {
        self.wrap(0)
    }

    pub fn one(&self) -> FieldElement {
        self.wrap(1)
    }

    /// The generator `α`.
    pub fn alpha(&self) -> FieldElement {
        self.wrap(self.exp(1))
    }

    fn wrap(&self, value: Symbol) -> FieldElement {
        FieldElement {
            value,
            poly: self.tables.poly as u16,
        }
    }

    fn check(&self, a: FieldElement) -> Result<Symbol> {
        if a.poly as u32 != self.tables.poly {
            return Err(Error::FieldMismatch);
        }
        Ok(a.value)
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.wrap(self.check(a)? ^ self.check(b)?))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.wrap(self.mul_sym(self.check(a)?, self.check(b)?)))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        let a = self.check(a)?;
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.wrap(self.inv_sym(a)))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        let (a, b) = (self.check(a)?, self.check(b)?);
        if b == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.wrap(self.div_sym(a, b)))
    }

    /// `a^e`; negative exponents are allowed for nonzero `a`. `0^0 = 1`.
    pub fn pow(&self, a: FieldElement, e: i64) -> Result<FieldElement> {
        let a = self.check(a)?;
        if a == 0 {
            return match e {
                0 => Ok(self.one()),
                e if e > 0 => Ok(self.zero()),
                _ => Err(Error::DivisionByZero),
            };
        }
        Ok(self.wrap(self.pow_sym(a, e)))
    }

    // Unchecked symbol-level arithmetic used by the codec hot paths. Callers
    // guarantee every operand is < 2^m.

    #[inline]
    pub fn exp(&self, i: usize) -> Symbol {
        self.tables.exp[i % self.order()]
    }

    /// Discrete log of a nonzero symbol.
    #[inline]
    pub fn log(&self, a: Symbol) -> usize {
        debug_assert!(a != 0);
        self.tables.log[a as usize] as usize
    }

    #[inline]
    pub fn mul_sym(&self, a: Symbol, b: Symbol) -> Symbol {
        if a == 0 || b == 0 {
            return 0;
        }
        let t = &self.tables;
        t.exp[t.log[a as usize] as usize + t.log[b as usize] as usize]
    }

    #[inline]
    pub fn inv_sym(&self, a: Symbol) -> Symbol {
        debug_assert!(a != 0);
        let t = &self.tables;
        t.exp[self.order() - t.log[a as usize] as usize]
    }

    #[inline]
    pub fn div_sym(&self, a: Symbol, b: Symbol) -> Symbol {
        debug_assert!(b != 0);
        if a == 0 {
            return 0;
        }
        let t = &self.tables;
        let order = self.order();
        t.exp[t.log[a as usize] as usize + order - t.log[b as usize] as usize]
    }

    pub fn pow_sym(&self, a: Symbol, e: i64) -> Symbol {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let order = self.order() as i64;
        let l = (self.log(a) as i64 * e.rem_euclid(order)).rem_euclid(order);
        self.tables.exp[l as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Shift-and-reduce multiplication, independent of the tables.
    fn slow_mul(a: u32, b: u32, m: u32, poly: u32) -> u32 {
        let mut acc = 0u32;
        let mut a = a;
        let mut b = b;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a >> m != 0 {
                a ^= poly;
            }
        }
        acc
    }

    #[test]
    fn gf8_alpha_cubed() {
        let f = Field::new(3, Some(0b1011)).unwrap();
        assert_eq!(f.exp(3), 0b011);
        let a = f.alpha();
        let a2 = f.pow(a, 2).unwrap();
        assert_eq!(f.mul(a, a2).unwrap().value(), 0b011);
        assert_eq!(f.pow(a, 7).unwrap(), f.one());
    }

    #[test]
    fn reducible_polynomial_rejected() {
        assert!(matches!(
            Field::new(3, Some(0b1111)),
            Err(Error::NonPrimitivePolynomial { .. })
        ));
        // irreducible but not primitive: x⁴+x³+x²+x+1 has α of order 5
        assert!(matches!(
            Field::new(4, Some(0b11111)),
            Err(Error::NonPrimitivePolynomial { .. })
        ));
        // wrong degree
        assert!(matches!(
            Field::new(4, Some(0b1011)),
            Err(Error::NonPrimitivePolynomial { .. })
        ));
    }

    #[test]
    fn unsupported_m() {
        assert!(matches!(Field::new(1, None), Err(Error::UnsupportedM(1))));
        assert!(matches!(Field::new(11, None), Err(Error::UnsupportedM(11))));
    }

    #[test]
    fn defaults_are_primitive() {
        for m in MIN_M..=MAX_M {
            let f = Field::new(m, None).unwrap();
            assert_eq!(f.order(), (1 << m) - 1);
        }
        assert_eq!(Field::new(6, None).unwrap().order(), 63);
    }

    #[test]
    fn exp_log_inverse_and_enumeration() {
        for m in [3, 5, 8] {
            let f = Field::new(m, None).unwrap();
            let mut seen = vec![false; f.size()];
            for i in 0..f.order() {
                assert_eq!(f.log(f.exp(i)), i);
                assert!(!seen[f.exp(i) as usize]);
                seen[f.exp(i) as usize] = true;
            }
            assert!(!seen[0]);
            assert_eq!(f.exp(f.order()), 1);
        }
    }

    #[test]
    fn table_mul_matches_slow_path_exhaustively() {
        for m in [3, 4] {
            let f = Field::new(m, None).unwrap();
            for a in 0..f.size() as u32 {
                for b in 0..f.size() as u32 {
                    assert_eq!(
                        f.mul_sym(a as Symbol, b as Symbol) as u32,
                        slow_mul(a, b, m, f.poly()),
                        "m={m} a={a} b={b}"
                    );
                }
            }
        }
    }

    #[test]
    fn add_examples() {
        let f = Field::new(3, None).unwrap();
        let a = f.element(0b101).unwrap();
        let b = f.element(0b011).unwrap();
        assert_eq!(f.add(a, b).unwrap().value(), 0b110);
        assert_eq!(f.add(a, a).unwrap(), f.zero());
        assert_eq!(f.add(a, f.zero()).unwrap(), a);
        assert_eq!(f.mul(a, f.one()).unwrap(), a);
    }

    #[test]
    fn errors() {
        let f3 = Field::new(3, None).unwrap();
        let f4 = Field::new(4, None).unwrap();
        let a = f3.element(3).unwrap();
        let b = f4.element(3).unwrap();
        assert!(matches!(f3.add(a, b), Err(Error::FieldMismatch)));
        assert!(matches!(f3.inv(f3.zero()), Err(Error::DivisionByZero)));
        assert!(matches!(f3.element(8), Err(Error::ValueOutOfRange { .. })));
    }

    #[test]
    fn every_nonzero_has_inverse() {
        for m in MIN_M..=MAX_M {
            let f = Field::new(m, None).unwrap();
            for v in 1..f.size() as u32 {
                let a = f.element(v).unwrap();
                assert_eq!(f.mul(a, f.inv(a).unwrap()).unwrap(), f.one());
            }
        }
    }
}
