//! Exact quadratic integers `a + b sqrt(c)` over unbounded integers, and the
//! cofactor search built on them.
//!
//! If `n = p q` passes the Frobenius relation for `z = a + b sqrt(c)` and
//! `z^q = a_q + b_q sqrt(c)` exactly, then `p` divides
//! `D = gcd(a_q - a, b_q - b)` when `J(c/q) = +1`, or `gcd(a_q - a, b_q + b)`
//! when `J(c/q) = -1`. Scanning `q` and factoring `D` enumerates every prime
//! that could complete `q` to a pseudoprime.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{self, jacobi_signed, jacobi_u128, mul_mod_u128};
use crate::error::{invalid, Error, Result};
use crate::frob::{self, index_sequence, standard_base};
use crate::par::{map_ordered, Execution};

const TRIAL_BOUND: u64 = 1_000_000;
const CHUNK: u64 = 128;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigQuadInt {
    pub a: BigInt,
    pub b: BigInt,
    pub c: i64,
}

impl BigQuadInt {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: i64) -> Self {
        BigQuadInt { a: a.into(), b: b.into(), c }
    }

    pub fn one(c: i64) -> Self {
        Self::new(1, 0, c)
    }

    pub fn mul(&self, other: &BigQuadInt) -> BigQuadInt {
        debug_assert_eq!(self.c, other.c);
        let bb = &self.b * &other.b;
        BigQuadInt { a: &self.a * &other.a + bb * self.c, b: &self.a * &other.b + &self.b * &other.a, c: self.c }
    }

    pub fn square(&self) -> BigQuadInt {
        let ab = &self.a * &self.b;
        BigQuadInt { a: &self.a * &self.a + &self.b * &self.b * self.c, b: &ab + &ab, c: self.c }
    }

    pub fn conj(&self) -> BigQuadInt {
        BigQuadInt { a: self.a.clone(), b: -&self.b, c: self.c }
    }

    /// `a^2 - c b^2`.
    pub fn norm(&self) -> BigInt {
        &self.a * &self.a - &self.b * &self.b * self.c
    }

    /// Both parts reduced into `[0, n)`.
    pub fn reduce(&self, n: u64) -> (u64, u64) {
        let m = BigInt::from(n);
        let r = |x: &BigInt| x.mod_floor(&m).to_u64().expect("residue below n");
        (r(&self.a), r(&self.b))
    }
}

/// `(a + b sqrt(c))^q` computed exactly by binary exponentiation.
pub fn exact_pow(a: i64, b: i64, c: i64, q: u64) -> BigQuadInt {
    let base = BigQuadInt::new(a, b, c);
    let mut acc = BigQuadInt::one(c);
    if q == 0 {
        return acc;
    }
    acc = base.clone();
    for bit in (0..63 - q.leading_zeros()).rev() {
        acc = acc.square();
        if (q >> bit) & 1 == 1 {
            acc = acc.mul(&base);
        }
    }
    acc
}

fn divisor_from_power(zq: &BigQuadInt, a: i64, b: i64, sign: i8) -> BigUint {
    let da = &zq.a - a;
    let db = if sign > 0 { &zq.b - b } else { &zq.b + b };
    da.gcd(&db).magnitude().clone()
}

/// The gcd that every matching prime factor `p` of a pseudoprime `p q`
/// must divide.
pub fn cofactor_divisor_gcd(q: u64, a: i64, b: i64, c: i64) -> Result<BigUint> {
    if q == 0 || q & 1 == 0 {
        return Err(invalid(format!("cofactor {q} must be odd and positive")));
    }
    let sign = jacobi_signed(c, q);
    if sign == 0 {
        return Err(Error::SharedFactor { q, c });
    }
    Ok(divisor_from_power(&exact_pow(a, b, c, q), a, b, sign))
}

fn trial_primes() -> &'static [u64] {
    static P: OnceLock<Vec<u64>> = OnceLock::new();
    P.get_or_init(|| arith::primes_up_to(TRIAL_BOUND))
}

/// Prime factors of `d` findable with 64-bit tools, plus whatever cofactor
/// is left over.
fn split_divisor(d: &BigUint) -> (Vec<u64>, Option<BigUint>) {
    if d.is_zero() {
        return (Vec::new(), Some(d.clone()));
    }
    let mut primes = Vec::new();
    let mut rest = d.clone();
    if rest.to_u64().is_none() {
        for &p in trial_primes() {
            let bp = BigUint::from(p);
            let mut hit = false;
            loop {
                let (quot, rem) = rest.div_rem(&bp);
                if !rem.is_zero() {
                    break;
                }
                rest = quot;
                hit = true;
            }
            if hit {
                primes.push(p);
                if rest.to_u64().is_some() {
                    break;
                }
            }
        }
    }
    match rest.to_u64() {
        Some(small) => {
            if small > 1 {
                primes.extend(arith::factorize(small).expect("nonzero").primes());
            }
            primes.sort_unstable();
            primes.dedup();
            (primes, None)
        }
        None => {
            primes.sort_unstable();
            (primes, Some(rest))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum CandidateVerdict {
    Rejected,
    /// The relation holds; `index_matches` tells whether `c` is also the
    /// Frobenius index of `n`, which makes `n` a genuine pseudoprime.
    RelationHolds {
        index_matches: bool,
    },
    SkippedEven,
    SkippedSquare,
    AboveBound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub p: u64,
    pub n: u128,
    pub verdict: CandidateVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExceptOneRow {
    pub q: u64,
    pub jacobi: i8,
    pub d_bits: u64,
    pub primes: Vec<u64>,
    /// Decimal cofactor of `D` left unfactored.
    pub unresolved: Option<String>,
    pub candidates: Vec<Candidate>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExceptOneReport {
    pub c: i64,
    pub q_max: u64,
    pub n_bound: Option<u128>,
    pub rows: Vec<ExceptOneRow>,
}

impl ExceptOneReport {
    /// `(q, p)` pairs where `q p` passes the relation.
    pub fn relation_passes(&self) -> Vec<(u64, u64)> {
        self.hits(|_| true)
    }

    /// Passing pairs whose product also has Frobenius index `c`.
    pub fn fpp_hits(&self) -> Vec<(u64, u64)> {
        self.hits(|m| m)
    }

    fn hits(&self, keep: impl Fn(bool) -> bool) -> Vec<(u64, u64)> {
        self.rows
            .iter()
            .flat_map(|r| r.candidates.iter().map(move |cand| (r.q, cand)))
            .filter_map(|(q, cand)| match cand.verdict {
                CandidateVerdict::RelationHolds { index_matches } if keep(index_matches) => Some((q, cand.p)),
                _ => None,
            })
            .collect()
    }

    pub fn unresolved_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.unresolved.is_some()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,d_bits,primes,verdicts\n");
        for r in &self.rows {
            let primes: Vec<String> = r.primes.iter().map(u64::to_string).collect();
            let verdicts: Vec<String> =
                r.candidates.iter().map(|cand| format!("{}:{}", cand.p, verdict_tag(&cand.verdict))).collect();
            let mut primes = primes.join(";");
            if let Some(u) = &r.unresolved {
                if !primes.is_empty() {
                    primes.push(';');
                }
                primes.push_str(&format!("?{u}"));
            }
            out.push_str(&format!("{},{},{},{}\n", r.q, r.d_bits, primes, verdicts.join(";")));
        }
        out
    }
}

fn verdict_tag(v: &CandidateVerdict) -> &'static str {
    match v {
        CandidateVerdict::Rejected => "rejected",
        CandidateVerdict::RelationHolds { index_matches: true } => "FPP",
        CandidateVerdict::RelationHolds { index_matches: false } => "relation-holds",
        CandidateVerdict::SkippedEven => "even",
        CandidateVerdict::SkippedSquare => "square",
        CandidateVerdict::AboveBound => "above-bound",
    }
}

fn judge(n: u128, a: i64, b: i64, c: i64, bound: Option<u128>) -> CandidateVerdict {
    if n & 1 == 0 {
        return CandidateVerdict::SkippedEven;
    }
    if bound.is_some_and(|bnd| n > bnd) {
        return CandidateVerdict::AboveBound;
    }
    let r = n.isqrt();
    if r * r == n {
        return CandidateVerdict::SkippedSquare;
    }
    let holds = match u64::try_from(n) {
        Ok(small) => frob::raw_frobenius_relation(small, a, b, c).expect("odd modulus >= 3"),
        Err(_) => relation_u128(n, a, b, c),
    };
    if !holds {
        return CandidateVerdict::Rejected;
    }
    let index =
        index_sequence().iter().copied().find(|&cc| jacobi_u128((cc as i128).rem_euclid(n as i128) as u128, n) != 1);
    CandidateVerdict::RelationHolds { index_matches: index == Some(c) }
}

/// Relation check for moduli beyond 64 bits (`n < 2^127`).
fn relation_u128(n: u128, a: i64, b: i64, c: i64) -> bool {
    assert!(n < 1 << 127, "modulus {n} too large");
    let red = |x: i64| (x as i128).rem_euclid(n as i128) as u128;
    let mul = |x: u128, y: u128| mul_mod_u128(x, y, n);
    let add = |x: u128, y: u128| (x + y) % n;
    let cm = red(c);
    let qmul = |x: (u128, u128), y: (u128, u128)| {
        (add(mul(x.0, y.0), mul(cm, mul(x.1, y.1))), add(mul(x.0, y.1), mul(x.1, y.0)))
    };
    let z = (red(a), red(b));
    let mut acc = z;
    for bit in (0..127 - n.leading_zeros()).rev() {
        acc = qmul(acc, acc);
        if (n >> bit) & 1 == 1 {
            acc = qmul(acc, z);
        }
    }
    acc == (z.0, (n - z.1) % n)
}

fn process_row(q: u64, zq: &BigQuadInt, a: i64, b: i64, c: i64, bound: Option<u128>) -> Option<ExceptOneRow> {
    let sign = jacobi_signed(c, q);
    if sign == 0 {
        return None;
    }
    let d = divisor_from_power(zq, a, b, sign);
    let (primes, unresolved) = split_divisor(&d);
    let candidates = primes
        .iter()
        .map(|&p| {
            let n = q as u128 * p as u128;
            Candidate { p, n, verdict: judge(n, a, b, c, bound) }
        })
        .collect();
    Some(ExceptOneRow {
        q,
        jacobi: sign,
        d_bits: d.bits(),
        primes,
        unresolved: unresolved.map(|u| u.to_string()),
        candidates,
    })
}

/// For every odd `q` in `[3, q_max]` with `J(c/q) != 0`, factors the cofactor
/// gcd `D` and tests each `n = q p` for `p | D` against the relation with the
/// standard base for `c`. Candidates above `n_bound` are listed but not
/// tested.
pub fn factors_except_one_scan(c: i64, q_max: u64, n_bound: Option<u128>, exec: Execution) -> Result<ExceptOneReport> {
    let (a, b) = standard_base(c)?;
    if q_max >= 1 << 32 {
        return Err(Error::OutOfRange(format!("q_max {q_max} must be below 2^32")));
    }
    let chunks: Vec<u64> = (3..=q_max.max(2)).step_by(2 * CHUNK as usize).collect();
    let z2 = BigQuadInt::new(a, b, c).square();
    let rows = map_ordered(exec, chunks, |start| {
        let end = (start + 2 * CHUNK).min(q_max + 1);
        let mut zq = exact_pow(a, b, c, start);
        let mut rows = Vec::new();
        let mut q = start;
        while q < end {
            rows.extend(process_row(q, &zq, a, b, c, n_bound));
            q += 2;
            if q < end {
                zq = zq.mul(&z2);
            }
        }
        rows
    });
    Ok(ExceptOneReport { c, q_max, n_bound, rows: rows.into_iter().flatten().collect() })
}
