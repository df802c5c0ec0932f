//! Exact scalars over the active field: arbitrary-precision rationals or a
//! prime field `F_p`. No floating point anywhere; every arithmetic identity
//! downstream is checked as an exact equality.

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{DgError, Result};

/// The active coefficient field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    /// Rational numbers with big-integer numerator/denominator.
    Q,
    /// Integers modulo a prime `p`.
    Fp(u64),
}

impl Field {
    pub fn zero(&self) -> Scalar {
        match self {
            Field::Q => Scalar::Q(BigRational::zero()),
            Field::Fp(p) => Scalar::Fp { p: *p, v: 0 },
        }
    }

    pub fn one(&self) -> Scalar {
        match self {
            Field::Q => Scalar::Q(BigRational::one()),
            Field::Fp(p) => Scalar::Fp { p: *p, v: 1 },
        }
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match self {
            Field::Q => Scalar::Q(BigRational::from(BigInt::from(n))),
            Field::Fp(p) => {
                let m = n.rem_euclid(*p as i64) as u64;
                Scalar::Fp { p: *p, v: m }
            }
        }
    }

    /// Parses "3/2", "-5", or "5 mod 7". A bare integer in an `F_p` context is
    /// reduced mod p; an explicit "mod q" must agree with the active prime.
    pub fn parse(&self, s: &str) -> Result<Scalar> {
        let s = s.trim();
        if let Some((lhs, rhs)) = s.split_once("mod") {
            let v: i64 = lhs
                .trim()
                .parse()
                .map_err(|_| DgError::Parse(format!("bad residue `{s}`")))?;
            let q: u64 = rhs
                .trim()
                .parse()
                .map_err(|_| DgError::Parse(format!("bad modulus `{s}`")))?;
            match self {
                Field::Fp(p) if *p == q => Ok(self.from_i64(v)),
                _ => Err(DgError::Parse(format!(
                    "scalar `{s}` does not live in the active field {self:?}"
                ))),
            }
        } else if let Some((num, den)) = s.split_once('/') {
            let n: BigInt = num
                .trim()
                .parse()
                .map_err(|_| DgError::Parse(format!("bad numerator `{s}`")))?;
            let d: BigInt = den
                .trim()
                .parse()
                .map_err(|_| DgError::Parse(format!("bad denominator `{s}`")))?;
            if d.is_zero() {
                return Err(DgError::Parse(format!("zero denominator in `{s}`")));
            }
            match self {
                Field::Q => Ok(Scalar::Q(BigRational::new(n, d))),
                Field::Fp(_) => {
                    let a = self.from_bigint(&n);
                    let b = self.from_bigint(&d);
                    b.inv().map(|bi| a.mul(&bi)).ok_or_else(|| {
                        DgError::Parse(format!("denominator of `{s}` vanishes mod p"))
                    })
                }
            }
        } else {
            let n: BigInt = s
                .parse()
                .map_err(|_| DgError::Parse(format!("bad scalar `{s}`")))?;
            Ok(self.from_bigint(&n))
        }
    }

    fn from_bigint(&self, n: &BigInt) -> Scalar {
        match self {
            Field::Q => Scalar::Q(BigRational::from(n.clone())),
            Field::Fp(p) => {
                let m = n.mod_floor_u64(*p);
                Scalar::Fp { p: *p, v: m }
            }
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Q => write!(f, "q"),
            Field::Fp(p) => write!(f, "fp:{p}"),
        }
    }
}

trait ModFloor {
    fn mod_floor_u64(&self, p: u64) -> u64;
}

impl ModFloor for BigInt {
    fn mod_floor_u64(&self, p: u64) -> u64 {
        use num::Integer;
        let m = self.mod_floor(&BigInt::from(p));
        let (_, digits) = m.to_u64_digits();
        *digits.first().unwrap_or(&0)
    }
}

/// An exact element of the active field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Q(BigRational),
    Fp { p: u64, v: u64 },
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Q(_) => Field::Q,
            Scalar::Fp { p, .. } => Field::Fp(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(r) => r.is_zero(),
            Scalar::Fp { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Q(r) => r.is_one(),
            Scalar::Fp { v, .. } => *v == 1,
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a + b),
            (Scalar::Fp { p, v }, Scalar::Fp { p: q, v: w }) => {
                assert_eq!(p, q, "mixed prime fields");
                Scalar::Fp {
                    p: *p,
                    v: (v + w) % p,
                }
            }
            _ => panic!("mixed fields in scalar arithmetic"),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Q(a) => Scalar::Q(-a),
            Scalar::Fp { p, v } => Scalar::Fp {
                p: *p,
                v: if *v == 0 { 0 } else { p - v },
            },
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a * b),
            (Scalar::Fp { p, v }, Scalar::Fp { p: q, v: w }) => {
                assert_eq!(p, q, "mixed prime fields");
                let prod = (*v as u128 * *w as u128) % (*p as u128);
                Scalar::Fp {
                    p: *p,
                    v: prod as u64,
                }
            }
            _ => panic!("mixed fields in scalar arithmetic"),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Scalar::Q(a) => Scalar::Q(a.recip()),
            Scalar::Fp { p, v } => Scalar::Fp {
                p: *p,
                v: pow_mod(*v, p - 2, *p),
            },
        })
    }

    pub fn div(&self, other: &Scalar) -> Option<Scalar> {
        other.inv().map(|i| self.mul(&i))
    }

    /// `(-1)^n` over the active field.
    pub fn sign(field: Field, n: i64) -> Scalar {
        if n.rem_euclid(2) == 0 {
            field.one()
        } else {
            field.one().neg()
        }
    }
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut bb = b as u128 % p as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % p as u128;
        }
        bb = bb * bb % p as u128;
        e >>= 1;
    }
    b = acc as u64;
    b
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Q(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else if r.denom().is_negative() {
                    write!(f, "{}/{}", -r.numer(), -r.denom())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Fp { p, v } => write!(f, "{v} mod {p}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parse_round_trip() {
        let f = Field::Q;
        for s in ["3/2", "-5", "0", "7/3"] {
            let x = f.parse(s).unwrap();
            assert_eq!(f.parse(&x.to_string()).unwrap(), x);
        }
    }

    #[test]
    fn fp_inverse() {
        let f = Field::Fp(7);
        for v in 1..7 {
            let x = f.from_i64(v);
            let i = x.inv().unwrap();
            assert!(x.mul(&i).is_one());
        }
        assert_eq!(f.parse("5 mod 7").unwrap(), f.from_i64(5));
        assert!(f.zero().inv().is_none());
    }

    #[test]
    fn signs() {
        assert!(Scalar::sign(Field::Q, 2).is_one());
        assert_eq!(Scalar::sign(Field::Q, -1), Field::Q.one().neg());
    }
}
