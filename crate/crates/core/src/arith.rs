//! Exact 64-bit modular arithmetic and the number-theoretic primitives the
//! rest of the crate is built on: Jacobi symbols, square detection, square
//! roots modulo a prime, deterministic primality, factorization and
//! multiplicative orders.
//!
//! Hot-path helpers (`mul_mod`, `pow_mod`, ...) are crate-private and assume
//! reduced operands. The public entry points validate their arguments.

use std::sync::OnceLock;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Miller-Rabin witnesses. The first twelve primes form a deterministic
/// witness set for every n < 2^64 (Sorenson & Webster bound 3.18e23).
pub const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

const TRIAL_LIMIT: u64 = 1024;

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    debug_assert!(a < n && b < n);
    if n <= u32::MAX as u64 {
        a * b % n
    } else {
        ((a as u128 * b as u128) % n as u128) as u64
    }
}

#[inline]
pub(crate) fn add_mod(a: u64, b: u64, n: u64) -> u64 {
    debug_assert!(a < n && b < n);
    let (s, overflow) = a.overflowing_add(b);
    if overflow || s >= n {
        s.wrapping_sub(n)
    } else {
        s
    }
}

#[inline]
pub(crate) fn sub_mod(a: u64, b: u64, n: u64) -> u64 {
    debug_assert!(a < n && b < n);
    if a >= b {
        a - b
    } else {
        a + (n - b)
    }
}

pub(crate) fn pow_mod(mut base: u64, mut e: u64, n: u64) -> u64 {
    debug_assert!(base < n);
    let mut acc = 1 % n;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        e >>= 1;
    }
    acc
}

/// Reduces a signed value into `[0, n)`.
#[inline]
pub(crate) fn reduce_signed(a: i64, n: u64) -> u64 {
    (a as i128).rem_euclid(n as i128) as u64
}

/// `(a * b) mod n` for any operands, using a 128-bit intermediate.
pub fn mulmod(a: u64, b: u64, n: u64) -> Result<u64> {
    if n < 2 {
        return Err(invalid(format!("modulus {n} < 2")));
    }
    Ok(mul_mod(a % n, b % n, n))
}

/// `a^e mod n` by square-and-multiply. `e = 0` gives 1.
pub fn powmod(a: u64, e: u64, n: u64) -> Result<u64> {
    if n < 2 {
        return Err(invalid(format!("modulus {n} < 2")));
    }
    Ok(pow_mod(a % n, e, n))
}

/// Jacobi symbol of an unsigned numerator over an odd denominator.
pub(crate) fn jacobi_u64(a: u64, n: u64) -> i8 {
    debug_assert!(n & 1 == 1);
    let (mut a, mut n) = (a % n, n);
    let mut t = 1i8;
    while a != 0 {
        let z = a.trailing_zeros();
        a >>= z;
        // (2/n) = -1 iff n = 3, 5 mod 8
        if z & 1 == 1 && matches!(n & 7, 3 | 5) {
            t = -t;
        }
        if a & 3 == 3 && n & 3 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

pub(crate) fn jacobi_u128(a: u128, n: u128) -> i8 {
    debug_assert!(n & 1 == 1);
    let (mut a, mut n) = (a % n, n);
    let mut t = 1i8;
    while a != 0 {
        let z = a.trailing_zeros();
        a >>= z;
        if z & 1 == 1 && matches!(n & 7, 3 | 5) {
            t = -t;
        }
        if a & 3 == 3 && n & 3 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

#[inline]
pub(crate) fn jacobi_signed(a: i64, n: u64) -> i8 {
    jacobi_u64(reduce_signed(a, n), n)
}

/// Jacobi symbol `J(a/n)` for odd positive `n`; negative `a` is reduced
/// modulo `n` first. `J(a/1) = 1`.
pub fn jacobi(a: i64, n: u64) -> Result<i8> {
    if n == 0 || n & 1 == 0 {
        return Err(invalid(format!("Jacobi denominator {n} must be odd and positive")));
    }
    Ok(jacobi_signed(a, n))
}

/// Exact integer square root of `n` when `n` is a perfect square.
pub fn is_perfect_square(n: u64) -> Option<u64> {
    let r = n.isqrt();
    (r * r == n).then_some(r)
}

/// A square root of `c` modulo the odd prime `p`, canonicalised to the
/// smaller of the two roots.
pub fn sqrt_mod_prime(c: u64, p: u64) -> Result<u64> {
    if p < 3 || p & 1 == 0 {
        return Err(invalid(format!("{p} is not an odd prime")));
    }
    let c = c % p;
    if jacobi_u64(c, p) != 1 {
        return Err(Error::NoSquareRoot { value: c, modulus: p });
    }
    let root = if p & 3 == 3 { pow_mod(c, (p + 1) / 4, p) } else { tonelli_shanks(c, p) };
    debug_assert_eq!(mul_mod(root, root, p), c);
    Ok(root.min(p - root))
}

fn tonelli_shanks(c: u64, p: u64) -> u64 {
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let z = (2..p).find(|&z| jacobi_u64(z, p) == -1).expect("odd prime has a non-residue");

    let mut m = s;
    let mut cz = pow_mod(z, q, p);
    let mut t = pow_mod(c, q, p);
    let mut r = pow_mod(c, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let mut b = cz;
        for _ in 0..m - i - 1 {
            b = mul_mod(b, b, p);
        }
        m = i;
        cz = mul_mod(b, b, p);
        t = mul_mod(t, cz, p);
        r = mul_mod(r, b, p);
    }
    r
}

/// One strong-probable-prime round. `n` odd, `n > 2`.
pub(crate) fn is_strong_probable_prime(n: u64, base: u64) -> bool {
    let base = base % n;
    if base == 0 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let mut x = pow_mod(base, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Deterministic primality for every 64-bit input: trial division by the
/// witness primes, then Miller-Rabin over [`MR_WITNESSES`].
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    MR_WITNESSES.iter().all(|&a| is_strong_probable_prime(n, a))
}

/// Sieve of Eratosthenes over `[0, limit]`.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = usize::try_from(limit).expect("sieve limit fits in memory");
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    out
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(TRIAL_LIMIT))
}

/// Prime factorization of a 64-bit value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Factorization {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn value(&self) -> u64 {
        self.value
    }

    /// `(prime, exponent)` pairs, primes strictly increasing.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_prime(&self) -> bool {
        matches!(self.factors.as_slice(), [(_, 1)])
    }

    /// Factorization of the product `self * other`.
    pub fn mul(&self, other: &Factorization) -> Result<Factorization> {
        let value = self
            .value
            .checked_mul(other.value)
            .ok_or_else(|| Error::OutOfRange(format!("{} * {} overflows 64 bits", self.value, other.value)))?;
        let mut factors = self.factors.clone();
        for &(p, e) in &other.factors {
            match factors.binary_search_by_key(&p, |&(q, _)| q) {
                Ok(i) => factors[i].1 += e,
                Err(i) => factors.insert(i, (p, e)),
            }
        }
        Ok(Factorization { value, factors })
    }

    fn from_primes(value: u64, mut primes: Vec<u64>) -> Self {
        primes.sort_unstable();
        let mut factors: Vec<(u64, u32)> = Vec::new();
        for p in primes {
            match factors.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => factors.push((p, 1)),
            }
        }
        Factorization { value, factors }
    }
}

/// Complete factorization of `n >= 1` (1 has no factors): trial division by
/// primes below 1024, then Pollard-Brent rho with the increment sequence
/// 1, 2, 3, ... on cofactors that fail the primality oracle.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(invalid("cannot factor 0"));
    }
    let mut primes = Vec::new();
    let mut rest = n;
    for &p in small_primes() {
        if p * p > rest {
            break;
        }
        while rest.is_multiple_of(p) {
            primes.push(p);
            rest /= p;
        }
    }
    if rest > 1 {
        split_into(rest, &mut primes);
    }
    Ok(Factorization::from_primes(n, primes))
}

fn split_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    if let Some(r) = is_perfect_square(n) {
        split_into(r, out);
        split_into(r, out);
        return;
    }
    if n & 1 == 0 {
        out.push(2);
        split_into(n / 2, out);
        return;
    }
    let d = (1..).find_map(|increment| pollard_brent(n, increment)).expect("rho eventually splits a composite");
    split_into(d, out);
    split_into(n / d, out);
}

/// One Pollard-Brent run with `f(x) = x^2 + increment`. Returns a proper
/// divisor of the odd composite `n`, or `None` when the cycle closes first.
fn pollard_brent(n: u64, increment: u64) -> Option<u64> {
    const BATCH: u64 = 128;
    let inc = increment % n;
    let f = |x: u64| add_mod(mul_mod(x, x, n), inc, n);

    let mut y = 2 % n;
    let mut x = y;
    let mut ys = y;
    let mut g = 1;
    let mut r = 1u64;
    let mut q = 1u64;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..BATCH.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = q.gcd(&n);
            k += BATCH;
        }
        r <<= 1;
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

/// Smallest `t >= 1` with `a^t = 1 (mod modulus)`, found by dividing prime
/// factors out of a known multiple of the order (`group_order`, normally the
/// factorization of `p - 1`).
pub fn multiplicative_order(a: u64, modulus: u64, group_order: &Factorization) -> Result<u64> {
    if modulus < 2 {
        return Err(invalid(format!("modulus {modulus} < 2")));
    }
    let a = a % modulus;
    if a == 0 || a.gcd(&modulus) != 1 {
        return Err(invalid(format!("{a} is not invertible modulo {modulus}")));
    }
    let mut t = group_order.value();
    if pow_mod(a, t, modulus) != 1 {
        return Err(invalid(format!("{t} is not a multiple of the order of {a} modulo {modulus}")));
    }
    for &(q, e) in group_order.factors() {
        for _ in 0..e {
            if pow_mod(a, t / q, modulus) == 1 {
                t /= q;
            } else {
                break;
            }
        }
    }
    Ok(t)
}

/// Modular inverse of `a` modulo `m` when it exists.
pub(crate) fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    (e.gcd == 1).then(|| e.x.rem_euclid(m as i128) as u64)
}

/// Merges `x = r1 (mod m1)` and `x = r2 (mod m2)` for arbitrary moduli.
/// Returns `None` when the congruences are incompatible.
pub(crate) fn crt_merge(r1: u128, m1: u128, r2: u128, m2: u128) -> Option<(u128, u128)> {
    let g = m1.gcd(&m2);
    let (r1, r2) = (r1 % m1, r2 % m2);
    if r1 % g != r2 % g {
        return None;
    }
    let m2g = m2 / g;
    let lcm = m1.checked_mul(m2g)?;
    if m2g == 1 {
        return Some((r1, lcm));
    }
    // x = r1 + m1 * k, m1 * k = r2 - r1 (mod m2)  =>  k = (r2 - r1)/g * (m1/g)^-1 (mod m2/g)
    let diff = (r2 as i128 - r1 as i128).rem_euclid(m2 as i128) as u128 / g;
    let inv = {
        let e = ((m1 / g) as i128 % m2g as i128).extended_gcd(&(m2g as i128));
        e.x.rem_euclid(m2g as i128) as u128
    };
    let k = mul_mod_u128(diff % m2g, inv, m2g);
    Some(((r1 + m1 * k) % lcm, lcm))
}

pub(crate) fn mul_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    if let Some(p) = a.checked_mul(b) {
        return p % m;
    }
    let (mut a, mut b, mut acc) = (a % m, b, 0u128);
    while b > 0 {
        if b & 1 == 1 {
            acc = (acc + a) % m;
        }
        a = (a + a) % m;
        b >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mulmod_examples() {
        assert_eq!(mulmod(3, 4, 5).unwrap(), 2);
        let n = u64::MAX - 58;
        assert_eq!(mulmod(n - 1, n - 1, n).unwrap(), 1);
        assert_eq!(mulmod(123_456_789, 1, n).unwrap(), 123_456_789);
        assert!(matches!(mulmod(1, 1, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn powmod_examples() {
        // naive repeated multiplication
        let mut acc = 1u64;
        for _ in 0..340 {
            acc = acc * 2 % 341;
        }
        assert_eq!(acc, 1);
        assert_eq!(powmod(2, 340, 341).unwrap(), acc);
        assert_eq!(powmod(7, 0, 13).unwrap(), 1);
        assert_eq!(powmod(2, 10, 1000).unwrap(), 24);
        assert!(powmod(2, 10, 0).is_err());
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi(-1, 19).unwrap(), -1);
        assert_eq!(jacobi(2, 15).unwrap(), 1);
        assert_eq!(jacobi(5, 13).unwrap(), -1);
        assert_eq!(jacobi(0, 9).unwrap(), 0);
        assert_eq!(jacobi(0, 1).unwrap(), 1);
        assert_eq!(jacobi(7, 1).unwrap(), 1);
        assert_eq!(jacobi(3, 21).unwrap(), 0);
        assert!(jacobi(3, 10).is_err());
        assert!(jacobi(3, 0).is_err());
    }

    #[test]
    fn jacobi_u128_matches_u64() {
        for n in (1..2001u64).step_by(2) {
            for a in 0..60u64 {
                assert_eq!(jacobi_u64(a, n), jacobi_u128(a as u128, n as u128));
            }
        }
    }

    #[test]
    fn perfect_squares() {
        assert_eq!(is_perfect_square(9), Some(3));
        assert_eq!(is_perfect_square(10), None);
        assert_eq!(is_perfect_square(0), Some(0));
        let r = 67_108_865u64;
        assert_eq!(r * r, 4_503_599_761_588_225);
        assert_eq!(is_perfect_square(4_503_599_761_588_225), Some(r));
        assert_eq!(is_perfect_square(4_503_599_761_588_224), None);
        assert_eq!(is_perfect_square(u64::MAX), None);
        let big = (u32::MAX as u64) * (u32::MAX as u64);
        assert_eq!(is_perfect_square(big), Some(u32::MAX as u64));
    }

    #[test]
    fn sqrt_mod_prime_examples() {
        let brute = |c: u64, p: u64| (0..p).find(|d| d * d % p == c % p).unwrap();
        assert_eq!(brute(5, 31).min(31 - brute(5, 31)), 6);
        assert_eq!(sqrt_mod_prime(5, 31).unwrap(), 6);
        assert_eq!(sqrt_mod_prime(4, 101).unwrap(), 2);
        assert_eq!(sqrt_mod_prime(2, 7).unwrap(), 3);
        assert!(matches!(sqrt_mod_prime(3, 7), Err(Error::NoSquareRoot { .. })));
        assert!(sqrt_mod_prime(0, 7).is_err());
    }

    #[test]
    fn sqrt_mod_prime_exhaustive_small() {
        for p in primes_up_to(1000).into_iter().skip(1) {
            for c in 1..p {
                match sqrt_mod_prime(c, p) {
                    Ok(d) => {
                        assert_eq!(d * d % p, c, "p={p} c={c}");
                        assert!(d <= p - d);
                    }
                    Err(_) => assert_eq!(jacobi_u64(c, p), -1),
                }
            }
        }
    }

    #[test]
    fn sqrt_mod_large_prime() {
        let p = (1u64 << 61) - 1;
        for c in [2u64, 3, 10, 12345678901] {
            if jacobi_u64(c, p) == 1 {
                let d = sqrt_mod_prime(c, p).unwrap();
                assert_eq!(mul_mod(d, d, p), c);
            }
        }
        // p = 1 mod 2^k exercises the Tonelli-Shanks loop
        let p = 998_244_353;
        for c in (2..200).filter(|&c| jacobi_u64(c, p) == 1) {
            let d = sqrt_mod_prime(c, p).unwrap();
            assert_eq!(mul_mod(d, d, p), c);
        }
    }

    #[test]
    fn factorize_examples() {
        let f = factorize(104_005).unwrap();
        assert_eq!(f.factors(), &[(5, 1), (11, 1), (31, 1), (61, 1)]);
        let f = factorize(5719).unwrap();
        assert_eq!(f.factors(), &[(7, 1), (19, 1), (43, 1)]);
        let m61 = (1u64 << 61) - 1;
        assert!(factorize(m61).unwrap().is_prime());
        assert_eq!(factorize(1).unwrap().factors(), &[]);
        assert!(factorize(0).is_err());
    }

    #[test]
    fn factorize_hard_cofactors() {
        let cases = [
            4_294_967_291u64 * 4_294_967_279,
            (1u64 << 32) - 5,
            1_000_003u64 * 1_000_003 * 1_009,
            u64::MAX,
            18_446_744_073_709_551_557,
            65_537u64.pow(3) * 251,
        ];
        for n in cases {
            let f = factorize(n).unwrap();
            let mut prod = 1u64;
            for &(p, e) in f.factors() {
                assert!(is_prime(p));
                prod *= p.pow(e);
            }
            assert_eq!(prod, n);
        }
    }

    #[test]
    fn factorization_mul() {
        let a = factorize(12).unwrap();
        let b = factorize(45).unwrap();
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab, factorize(540).unwrap());
        assert!(factorize(u64::MAX).unwrap().mul(&a).is_err());
    }

    #[test]
    fn is_prime_examples() {
        assert!(is_prime(19));
        assert!(!is_prime(5719));
        assert!(!is_prime(341));
        assert!(!is_prime(0) && !is_prime(1));
        assert!(is_prime(2) && is_prime(37) && is_prime(1_000_003));
        // strong pseudoprime to bases 2..37 is composite: 3825123056546413051
        assert!(!is_prime(3_825_123_056_546_413_051));
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn order_examples() {
        let f6 = factorize(6).unwrap();
        assert_eq!(multiplicative_order(2, 7, &f6).unwrap(), 3);
        assert_eq!(multiplicative_order(1, 7, &f6).unwrap(), 1);
        assert_eq!(multiplicative_order(6, 7, &f6).unwrap(), 2);
        assert!(multiplicative_order(0, 7, &f6).is_err());
        assert!(multiplicative_order(14, 7, &f6).is_err());
        // brute-force cross-check
        let p = 1009;
        let fp = factorize(p - 1).unwrap();
        for a in 1..p {
            let brute = (1..p).find(|&t| pow_mod(a, t, p) == 1).unwrap();
            assert_eq!(multiplicative_order(a, p, &fp).unwrap(), brute);
        }
    }

    #[test]
    fn crt_merge_cases() {
        assert_eq!(crt_merge(2, 3, 3, 5), Some((8, 15)));
        assert_eq!(crt_merge(1, 4, 3, 6), Some((9, 12)));
        assert_eq!(crt_merge(1, 4, 2, 6), None);
        assert_eq!(crt_merge(5, 10, 1, 2), Some((5, 10)));
        let (r, m) = crt_merge(7, 1u128 << 62, 11, (1u128 << 61) - 1).unwrap();
        assert_eq!(r % (1u128 << 62), 7);
        assert_eq!(r % ((1u128 << 61) - 1), 11);
        assert_eq!(m, (1u128 << 62) * ((1u128 << 61) - 1));
    }

    #[test]
    fn inverse() {
        assert_eq!(inv_mod(3, 7), Some(5));
        assert_eq!(inv_mod(6, 9), None);
    }
}
