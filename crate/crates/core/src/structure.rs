//! Constraints any prime factor `p` of a Frobenius pseudoprime `n = p q`
//! must satisfy, for the standard base `z` of a fixed index `c`.
//!
//! * Inert primes (`J(c/p) = -1`): `z^q = z (mod p)`, so `q = 1 mod Q_p` with
//!   `Q_p` the order of `z` in `GF(p^2)`. Hence `n = p (mod Q_p)`.
//! * Split primes (`J(c/p) = +1`, `d^2 = c`): with `z1 = a + b d` and
//!   `z2 = a - b d`, both `z1^q = z2` and `z2^q = z1 (mod p)`. When solvable
//!   this pins `q = A_p (mod M_p)`, `M_p = lcm(ord z1, ord z2)`, and
//!   `n = p A_p (mod M_p)`.
//! * Two prime factors are consistent when their `n`-congruences agree
//!   modulo `gcd(M_p1, M_p2)`.
//! * A repeated factor `p^2 | n` forces `z^p = conj(z) (mod p^2)`.

use std::collections::HashMap;

use num_integer::Integer;
use serde::Serialize;

use crate::arith::{self, crt_merge, inv_mod, is_prime, jacobi_signed, mul_mod, pow_mod};
use crate::error::{invalid, Error, Result};
use crate::frob::{self, index_sequence, standard_base};
use crate::par::{map_ordered, Execution};
use crate::quad::{inert_group_order, quad_order, QuadRing};

/// Above this prime the admissibility solver switches from brute force to
/// baby-step/giant-step discrete logarithms.
pub const BRUTE_FORCE_LIMIT: u64 = 1 << 20;

fn check_prime(p: u64) -> Result<()> {
    if p < 3 || p > u32::MAX as u64 || !is_prime(p) {
        return Err(invalid(format!("{p} is not an odd prime below 2^32")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MultipleFactorCheck {
    /// `z^p = conj(z) (mod p^2)`.
    pub full: bool,
    /// `N(z)^(p-1) = 1 (mod p^2)`, the weaker consequence.
    pub norm: bool,
}

/// Evaluates the repeated-factor condition for `p` (below 2^32) and `c`.
pub fn multiple_factor_check(p: u64, c: i64) -> Result<MultipleFactorCheck> {
    if p > u32::MAX as u64 {
        return Err(Error::OutOfRange(format!("p = {p}: p^2 must fit in 64 bits")));
    }
    check_prime(p)?;
    if jacobi_signed(c, p) == 0 {
        return Err(Error::SharedFactor { q: p, c });
    }
    let (a, b) = standard_base(c)?;
    let ring = QuadRing::new(p * p, c)?;
    let z = ring.elem(a, b);
    let full = ring.pow(z, p) == ring.conj(z);
    let norm = ring.norm(z);
    let norm = norm % p != 0 && pow_mod(norm, p - 1, p * p) == 1;
    Ok(MultipleFactorCheck { full, norm })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PhiDetail {
    Negative {
        /// Order of `z` in `GF(p^2)`.
        order: u64,
    },
    Positive {
        /// Canonical square root of `c` mod `p`.
        d: u64,
        z1: u64,
        z2: u64,
        ord_z1: u64,
        ord_z2: u64,
        /// Order of the norm `z1 z2`.
        alpha: u64,
        /// Order of `w = z1 / z2`.
        beta: u64,
        /// `A_p`: the residue of the cofactor `q` modulo `M_p`.
        cofactor_residue: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PhiProfile {
    pub p: u64,
    pub c: i64,
    pub sign: i8,
    /// `M_p`.
    pub modulus: u64,
    /// `D_p`, with `n = D_p (mod M_p)`; absent for an inadmissible split prime.
    pub residue: Option<u64>,
    pub detail: PhiDetail,
}

impl PhiProfile {
    pub fn is_admissible(&self) -> bool {
        self.residue.is_some()
    }

    /// `(D_p, M_p)`.
    pub fn constraint(&self) -> Option<(u64, u64)> {
        self.residue.map(|d| (d, self.modulus))
    }
}

/// Which discrete-log strategy the split-prime solver uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    Auto,
    BruteForce,
    BabyStepGiantStep,
}

pub fn phi_profile(p: u64, c: i64) -> Result<PhiProfile> {
    phi_profile_with(p, c, Solver::Auto)
}

pub fn phi_profile_with(p: u64, c: i64, solver: Solver) -> Result<PhiProfile> {
    check_prime(p)?;
    let sign = jacobi_signed(c, p);
    if sign == 0 {
        return Err(Error::SharedFactor { q: p, c });
    }
    let (a, b) = standard_base(c)?;
    let ring = QuadRing::new(p, c)?;
    let z = ring.elem(a, b);
    if ring.norm(z) == 0 {
        return Err(Error::NormNotInvertible { p });
    }
    if sign < 0 {
        let order = quad_order(z, &ring, &inert_group_order(p)?)?;
        return Ok(PhiProfile {
            p,
            c,
            sign,
            modulus: order,
            residue: Some(p % order),
            detail: PhiDetail::Negative { order },
        });
    }

    let d = arith::sqrt_mod_prime(arith::reduce_signed(c, p), p)?;
    let bd = mul_mod(arith::reduce_signed(b, p), d, p);
    let a = arith::reduce_signed(a, p);
    let z1 = arith::add_mod(a, bd, p);
    let z2 = arith::sub_mod(a, bd, p);
    let group = arith::factorize(p - 1)?;
    let ord_z1 = arith::multiplicative_order(z1, p, &group)?;
    let ord_z2 = arith::multiplicative_order(z2, p, &group)?;
    let norm = mul_mod(z1, z2, p);
    let w = mul_mod(z1, inv_mod(z2, p).expect("z2 invertible"), p);
    let alpha = arith::multiplicative_order(norm, p, &group)?;
    let beta = arith::multiplicative_order(w, p, &group)?;
    let modulus = ord_z1.lcm(&ord_z2);

    let cofactor_residue = if alpha.gcd(&beta) > 2 {
        None
    } else {
        let solver = match solver {
            Solver::Auto if p < BRUTE_FORCE_LIMIT => Solver::BruteForce,
            Solver::Auto => Solver::BabyStepGiantStep,
            s => s,
        };
        match solver {
            Solver::BruteForce => swap_exponent_brute(z1, z2, p, modulus),
            _ => swap_exponent_bsgs(z1, z2, p, ord_z1, ord_z2),
        }
    };
    let residue = cofactor_residue.map(|t| ((p as u128 * t as u128) % modulus as u128) as u64);
    Ok(PhiProfile {
        p,
        c,
        sign,
        modulus,
        residue,
        detail: PhiDetail::Positive { d, z1, z2, ord_z1, ord_z2, alpha, beta, cofactor_residue },
    })
}

/// Smallest `t` in `[0, m)` with `z1^t = z2` and `z2^t = z1`.
fn swap_exponent_brute(z1: u64, z2: u64, p: u64, m: u64) -> Option<u64> {
    let (mut x1, mut x2) = (1u64, 1u64);
    for t in 0..m {
        if x1 == z2 && x2 == z1 {
            return Some(t);
        }
        x1 = mul_mod(x1, z1, p);
        x2 = mul_mod(x2, z2, p);
    }
    None
}

fn swap_exponent_bsgs(z1: u64, z2: u64, p: u64, ord1: u64, ord2: u64) -> Option<u64> {
    let t1 = discrete_log(z1, z2, p, ord1)?;
    let t2 = discrete_log(z2, z1, p, ord2)?;
    crt_merge(t1 as u128, ord1 as u128, t2 as u128, ord2 as u128).map(|(t, _)| t as u64)
}

/// `t` in `[0, order)` with `g^t = target (mod p)`, if `target` lies in the
/// subgroup generated by `g`.
fn discrete_log(g: u64, target: u64, p: u64, order: u64) -> Option<u64> {
    if pow_mod(target, order, p) != 1 {
        return None;
    }
    let m = order.isqrt() + 1;
    let mut baby = HashMap::with_capacity(m as usize);
    let mut x = 1u64;
    for j in 0..m {
        baby.entry(x).or_insert(j);
        x = mul_mod(x, g, p);
    }
    let giant = pow_mod(inv_mod(g, p)?, m, p);
    let mut gamma = target;
    for i in 0..m {
        if let Some(&j) = baby.get(&gamma) {
            return Some((i * m + j) % order);
        }
        gamma = mul_mod(gamma, giant, p);
    }
    None
}

/// `(A_p, M_p)` for a split prime when the swap equations are solvable.
pub fn phi_positive_admissible(p: u64, c: i64) -> Result<Option<(u64, u64)>> {
    let profile = phi_profile(p, c)?;
    match profile.detail {
        PhiDetail::Positive { cofactor_residue, .. } => Ok(cofactor_residue.map(|a| (a, profile.modulus))),
        PhiDetail::Negative { .. } => Err(invalid(format!("J({c}/{p}) = -1: {p} is not a split prime"))),
    }
}

/// `n = p (1 + k Q_p) <= n_bound` for `k >= 1`, the only products with
/// inert factor `p` that can pass the relation. Candidates are capped at
/// `u64::MAX`.
pub fn phi_negative_candidates(p: u64, c: i64, n_bound: u128) -> Result<Vec<u64>> {
    let profile = phi_profile(p, c)?;
    let PhiDetail::Negative { order } = profile.detail else {
        return Err(invalid(format!("J({c}/{p}) = +1: {p} is not an inert prime")));
    };
    let bound = n_bound.min(u64::MAX as u128);
    let step = p as u128 * order as u128;
    let mut out = Vec::new();
    let mut n = p as u128 + step;
    while n <= bound {
        out.push(n as u64);
        n += step;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PairCheck {
    Consistent,
    Inconsistent,
    /// A split member has no admissible cofactor residue.
    Inadmissible {
        p: u64,
    },
}

impl PairCheck {
    pub fn is_consistent(&self) -> bool {
        matches!(self, PairCheck::Consistent)
    }
}

fn profiles_consistent(x: &PhiProfile, y: &PhiProfile) -> PairCheck {
    let (Some((d1, m1)), Some((d2, m2))) = (x.constraint(), y.constraint()) else {
        let p = if x.is_admissible() { y.p } else { x.p };
        return PairCheck::Inadmissible { p };
    };
    let g = m1.gcd(&m2);
    if d1 % g == d2 % g {
        PairCheck::Consistent
    } else {
        PairCheck::Inconsistent
    }
}

pub fn pair_consistent(p1: u64, p2: u64, c: i64) -> Result<PairCheck> {
    if p1 == p2 {
        return Err(invalid("pair members must differ"));
    }
    Ok(profiles_consistent(&phi_profile(p1, c)?, &phi_profile(p2, c)?))
}

/// Congruence the whole of `n` must satisfy given the index `c`.
pub fn index_congruence(c: i64) -> (u64, u64) {
    match c {
        -1 => (3, 4),
        2 => (5, 8),
        3 => (17, 24),
        _ => (1, 24),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ResidueFilter {
    pub prime: u64,
    /// Whether `n mod prime` must be a quadratic residue (else non-residue).
    pub residue: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TupleConstraint {
    pub n_residue: u128,
    pub n_modulus: u128,
    /// Constraint on `q = n / (p1 p2 ...)`.
    pub q_residue: u128,
    pub q_modulus: u128,
    /// Character conditions from the index that the modulus does not decide.
    pub filters: Vec<ResidueFilter>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TupleClash {
    Inadmissible { p: u64 },
    Pair { p1: u64, p2: u64 },
    Index { detail: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "outcome")]
pub enum TupleOutcome {
    Constrained(TupleConstraint),
    Clash(TupleClash),
}

/// Combines the per-prime congruences of a tuple of factors with the index
/// congruences for `c`, and derives the constraint on the remaining
/// cofactor.
pub fn tuple_residue(primes: &[u64], c: i64) -> Result<TupleOutcome> {
    if primes.len() < 2 {
        return Err(invalid("need at least two primes"));
    }
    let mut sorted = primes.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("primes must be distinct"));
    }
    let profiles = primes.iter().map(|&p| phi_profile(p, c)).collect::<Result<Vec<_>>>()?;
    if let Some(bad) = profiles.iter().find(|pr| !pr.is_admissible()) {
        return Ok(TupleOutcome::Clash(TupleClash::Inadmissible { p: bad.p }));
    }
    for (i, x) in profiles.iter().enumerate() {
        for y in &profiles[i + 1..] {
            if !profiles_consistent(x, y).is_consistent() {
                return Ok(TupleOutcome::Clash(TupleClash::Pair { p1: x.p, p2: y.p }));
            }
        }
    }
    let clash = |detail: String| Ok(TupleOutcome::Clash(TupleClash::Index { detail }));

    let mut acc = (0u128, 1u128);
    for pr in &profiles {
        let (d, m) = pr.constraint().expect("admissible");
        acc = crt_merge(acc.0, acc.1, d as u128, m as u128).expect("pairwise consistent congruences merge");
    }
    let (ir, im) = index_congruence(c);
    let Some(merged) = crt_merge(acc.0, acc.1, ir as u128, im as u128) else {
        return clash(format!("n = {ir} mod {im} required by index {c}"));
    };
    acc = merged;
    let product: u128 = primes.iter().map(|&p| p as u128).product();
    let Some(merged) = crt_merge(acc.0, acc.1, 0, product) else {
        return clash(format!("n must be divisible by {product}"));
    };
    acc = merged;
    let (n_residue, n_modulus) = acc;

    let mut filters = Vec::new();
    if c >= 5 {
        let conditions =
            index_sequence().iter().copied().filter(|&cc| cc >= 5 && cc <= c).map(|cc| (cc as u64, cc != c));
        for (prime, residue) in conditions {
            // n = 1 mod 4, so J(prime/n) = J(n/prime)
            if n_modulus % prime as u128 == 0 {
                let j = arith::jacobi_u64((n_residue % prime as u128) as u64, prime);
                if j != if residue { 1 } else { -1 } {
                    return clash(format!("J({prime}/n) = {j} forced by the factors"));
                }
            } else {
                filters.push(ResidueFilter { prime, residue });
            }
        }
    }
    Ok(TupleOutcome::Constrained(TupleConstraint {
        n_residue,
        n_modulus,
        q_residue: n_residue / product,
        q_modulus: n_modulus / product,
        filters,
    }))
}

/// Index values in the sequence below `c_max`.
pub fn index_values_below(c_max: i64) -> Vec<i64> {
    index_sequence().iter().copied().filter(|&c| c < c_max).collect()
}

fn odd_primes_up_to(p_max: u64) -> Vec<u64> {
    arith::primes_up_to(p_max).into_iter().skip(1).collect()
}

/// Profiles of every prime `c < p <= p_max` for index `c`, optionally
/// restricted to one sign. Primes dividing the norm are skipped.
pub fn phi_sweep(c: i64, p_max: u64, sign: Option<i8>, exec: Execution) -> Result<Vec<PhiProfile>> {
    standard_base(c)?;
    if p_max > u32::MAX as u64 {
        return Err(Error::OutOfRange(format!("p_max {p_max} must be below 2^32")));
    }
    let primes: Vec<u64> = odd_primes_up_to(p_max)
        .into_iter()
        .filter(|&p| p as i64 > c && sign.is_none_or(|s| s == jacobi_signed(c, p)))
        .collect();
    let profiles = map_ordered(exec, primes, |p| match phi_profile(p, c) {
        Ok(pr) => Some(pr),
        Err(Error::NormNotInvertible { .. }) => None,
        Err(e) => panic!("profile of {p}: {e}"),
    });
    Ok(profiles.into_iter().flatten().collect())
}

/// Consistent pairs among all primes `<= p_max` that carry a constraint
/// (every inert prime and every admissible split prime).
pub fn consistent_pairs(c: i64, p_max: u64, exec: Execution) -> Result<Vec<(u64, u64)>> {
    let profiles: Vec<PhiProfile> =
        phi_sweep(c, p_max, None, exec)?.into_iter().filter(PhiProfile::is_admissible).collect();
    let idx: Vec<usize> = (0..profiles.len()).collect();
    let rows = map_ordered(exec, idx, |i| {
        profiles[i + 1..]
            .iter()
            .filter(|y| profiles_consistent(&profiles[i], y).is_consistent())
            .map(|y| (profiles[i].p, y.p))
            .collect::<Vec<_>>()
    });
    Ok(rows.into_iter().flatten().collect())
}

pub fn profiles_to_csv(profiles: &[PhiProfile]) -> String {
    let mut out = String::from("c,p,sign,M,D,admissible\n");
    for pr in profiles {
        let d = pr.residue.map(|d| d.to_string()).unwrap_or_default();
        let sign = if pr.sign > 0 { "+" } else { "-" };
        out.push_str(&format!("{},{},{},{},{},{}\n", pr.c, pr.p, sign, pr.modulus, d, pr.is_admissible()));
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MultipleFactorReport {
    pub p_max: u64,
    pub c_max: i64,
    pub primes: u64,
    pub checks: u64,
    /// `(p, c)` satisfying `z^p = conj(z) mod p^2`.
    pub hits: Vec<(u64, i64)>,
    /// `(p, c)` satisfying only the norm condition.
    pub norm_hits: Vec<(u64, i64)>,
}

/// Runs [`multiple_factor_check`] for every odd prime `p <= p_max` and every
/// index value `c < min(c_max, p)`. A prime `p <= c` cannot divide a number
/// of index `c`: the symbol `J(p/n) = 0` would stop the index search at `p`.
pub fn multiple_factor_sweep(p_max: u64, c_max: i64, exec: Execution) -> Result<MultipleFactorReport> {
    if p_max > u32::MAX as u64 {
        return Err(Error::OutOfRange(format!("p_max {p_max} must be below 2^32")));
    }
    let cs = index_values_below(c_max);
    let primes = odd_primes_up_to(p_max);
    let rows = map_ordered(exec, primes.clone(), |p| {
        let mut checks = 0u64;
        let mut hits = Vec::new();
        let mut norm_hits = Vec::new();
        for &c in cs.iter().take_while(|&&c| c < p as i64) {
            let r = multiple_factor_check(p, c).expect("valid prime and index");
            checks += 1;
            if r.full {
                hits.push((p, c));
            }
            if r.norm {
                norm_hits.push((p, c));
            }
        }
        (checks, hits, norm_hits)
    });
    let mut rep = MultipleFactorReport { p_max, c_max, primes: primes.len() as u64, ..Default::default() };
    for (checks, hits, norm_hits) in rows {
        rep.checks += checks;
        rep.hits.extend(hits);
        rep.norm_hits.extend(norm_hits);
    }
    Ok(rep)
}

/// Whether any odd multiple `P m <= bound` of `product` satisfies the
/// relation for index `c`; returns every such multiple.
pub fn multiples_passing(product: u64, c: i64, bound: u64, exec: Execution) -> Result<(u64, Vec<u64>)> {
    let (a, b) = standard_base(c)?;
    if product & 1 == 0 || product < 3 {
        return Err(invalid(format!("{product} must be odd and >= 3")));
    }
    let m_max = bound / product;
    const BLOCK: u64 = 1 << 14;
    let starts: Vec<u64> = (1..=m_max).step_by(BLOCK as usize).collect();
    let hits = map_ordered(exec, starts, |s| {
        let mut hits = Vec::new();
        let mut m = s | 1;
        while m < (s + BLOCK).min(m_max + 1) {
            let n = product * m;
            if frob::raw_frobenius_relation(n, a, b, c).expect("odd modulus") {
                hits.push(n);
            }
            m += 2;
        }
        hits
    });
    Ok((m_max.div_ceil(2), hits.into_iter().flatten().collect()))
}
