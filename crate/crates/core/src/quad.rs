//! Arithmetic in the residue ring `Z_n[sqrt(c)]`.

use serde::Serialize;

use crate::arith::{self, add_mod, mul_mod, reduce_signed, sub_mod, Factorization};
use crate::error::{invalid, Error, Result};

/// `a + b*sqrt(c)` with both parts reduced modulo the ring's modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct QuadElem {
    pub a: u64,
    pub b: u64,
}

impl QuadElem {
    pub const fn new(a: u64, b: u64) -> Self {
        QuadElem { a, b }
    }
}

/// The ring `Z_n[sqrt(c)]` for an odd modulus `n >= 3` and a square-free
/// radicand `c` (`c = -1` allowed).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadRing {
    n: u64,
    c: i64,
    c_mod: u64,
}

impl QuadRing {
    pub fn new(n: u64, c: i64) -> Result<Self> {
        if n < 3 || n & 1 == 0 {
            return Err(invalid(format!("ring modulus {n} must be odd and >= 3")));
        }
        if c == 0 || c == 1 {
            return Err(invalid(format!("radicand {c} is not allowed")));
        }
        if c.unsigned_abs() >= 1 << 31 {
            return Err(invalid(format!("radicand {c} out of range")));
        }
        if !is_square_free(c.unsigned_abs()) {
            return Err(invalid(format!("radicand {c} is not square-free")));
        }
        Ok(Self::new_unchecked(n, c))
    }

    /// Skips radicand validation; `c` comes from the index sequence.
    #[inline]
    pub(crate) fn new_unchecked(n: u64, c: i64) -> Self {
        QuadRing { n, c, c_mod: reduce_signed(c, n) }
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn radicand(&self) -> i64 {
        self.c
    }

    /// Element from signed integer parts, reduced into the ring.
    pub fn elem(&self, a: i64, b: i64) -> QuadElem {
        QuadElem { a: reduce_signed(a, self.n), b: reduce_signed(b, self.n) }
    }

    pub fn one(&self) -> QuadElem {
        QuadElem { a: 1, b: 0 }
    }

    pub fn contains(&self, z: QuadElem) -> bool {
        z.a < self.n && z.b < self.n
    }

    #[inline]
    pub fn mul(&self, x: QuadElem, y: QuadElem) -> QuadElem {
        let n = self.n;
        let bb = mul_mod(x.b, y.b, n);
        QuadElem {
            a: add_mod(mul_mod(x.a, y.a, n), mul_mod(self.c_mod, bb, n), n),
            b: add_mod(mul_mod(x.a, y.b, n), mul_mod(x.b, y.a, n), n),
        }
    }

    /// `(a^2 + c b^2) + 2ab sqrt(c)`.
    #[inline]
    pub fn square(&self, x: QuadElem) -> QuadElem {
        let n = self.n;
        let ab = mul_mod(x.a, x.b, n);
        QuadElem {
            a: add_mod(mul_mod(x.a, x.a, n), mul_mod(self.c_mod, mul_mod(x.b, x.b, n), n), n),
            b: add_mod(ab, ab, n),
        }
    }

    /// Multiplication that first checks both operands belong to this ring.
    pub fn try_mul(&self, x: QuadElem, y: QuadElem) -> Result<QuadElem> {
        if !self.contains(x) || !self.contains(y) {
            return Err(invalid(format!("operand not reduced modulo {}", self.n)));
        }
        Ok(self.mul(x, y))
    }

    /// `z^e` by left-to-right binary exponentiation.
    pub fn pow(&self, z: QuadElem, e: u64) -> QuadElem {
        if e == 0 {
            return self.one();
        }
        let mut acc = z;
        for bit in (0..63 - e.leading_zeros()).rev() {
            acc = self.square(acc);
            if (e >> bit) & 1 == 1 {
                acc = self.mul(acc, z);
            }
        }
        acc
    }

    pub fn conj(&self, z: QuadElem) -> QuadElem {
        QuadElem { a: z.a, b: if z.b == 0 { 0 } else { self.n - z.b } }
    }

    /// `a^2 - c b^2 mod n`.
    pub fn norm(&self, z: QuadElem) -> u64 {
        let n = self.n;
        sub_mod(mul_mod(z.a, z.a, n), mul_mod(self.c_mod, mul_mod(z.b, z.b, n), n), n)
    }
}

fn is_square_free(m: u64) -> bool {
    let mut d = 2u64;
    while d * d <= m {
        if m.is_multiple_of(d * d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Factorization of `p^2 - 1 = (p - 1)(p + 1)`, the order of `GF(p^2)^*`.
/// Requires `p < 2^32`.
pub fn inert_group_order(p: u64) -> Result<Factorization> {
    if p < 3 || p > u32::MAX as u64 {
        return Err(Error::OutOfRange(format!("p = {p} must lie in [3, 2^32)")));
    }
    arith::factorize(p - 1)?.mul(&arith::factorize(p + 1)?)
}

/// Multiplicative order of `z` in `Z_p[sqrt(c)]` (`ring` has prime modulus
/// `p`). `group_order` must be a multiple of that order, normally the
/// factorization of `p^2 - 1`.
pub fn quad_order(z: QuadElem, ring: &QuadRing, group_order: &Factorization) -> Result<u64> {
    let p = ring.modulus();
    if !ring.contains(z) {
        return Err(invalid(format!("element not reduced modulo {p}")));
    }
    if ring.norm(z) == 0 {
        return Err(Error::NormNotInvertible { p });
    }
    let mut t = group_order.value();
    if ring.pow(z, t) != ring.one() {
        return Err(invalid(format!("{t} is not a multiple of the element order")));
    }
    for &(q, e) in group_order.factors() {
        for _ in 0..e {
            if ring.pow(z, t / q) == ring.one() {
                t /= q;
            } else {
                break;
            }
        }
    }
    Ok(t)
}
