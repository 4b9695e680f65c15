//! The Frobenius primality test with a fixed base, plus the classic Fermat
//! and Miller-Rabin rounds used as comparators.
//!
//! For odd non-square `n` the Frobenius index `c` is the first value of
//! `-1, 2, 3, 5, 7, 11, ...` with `J(c/n) != 1`. The base is `2 + sqrt(c)`
//! for `c in {-1, 2}` and `1 + sqrt(c)` otherwise, and `n` is declared a
//! Frobenius prime when `z^n = conj(z)` in `Z_n[sqrt(c)]`.

use std::sync::OnceLock;

use num_integer::Integer;
use serde::Serialize;

use crate::arith::{self, is_perfect_square, jacobi_signed, pow_mod};
use crate::error::{invalid, Error, Result};
use crate::quad::{QuadElem, QuadRing};

/// Largest index value searched before giving up.
pub const INDEX_CAP: i64 = 1021;

/// The index sequence `-1, 2, 3, 5, 7, ...` up to [`INDEX_CAP`].
pub fn index_sequence() -> &'static [i64] {
    static SEQ: OnceLock<Vec<i64>> = OnceLock::new();
    SEQ.get_or_init(|| {
        std::iter::once(-1).chain(arith::primes_up_to(INDEX_CAP as u64).into_iter().map(|p| p as i64)).collect()
    })
}

/// Smallest `c` in the index sequence with `J(c/n) != 1`. A zero symbol is
/// still returned; the caller decides what to do with the shared factor.
pub fn frobenius_index(n: u64) -> Result<i64> {
    if n < 3 || n & 1 == 0 {
        return Err(Error::NotApplicable(format!("{n} is not an odd number >= 3")));
    }
    if is_perfect_square(n).is_some() {
        return Err(Error::NotApplicable(format!("{n} is a perfect square")));
    }
    index_sequence()
        .iter()
        .copied()
        .find(|&c| jacobi_signed(c, n) != 1)
        .ok_or(Error::IndexCapExceeded { n, cap: INDEX_CAP })
}

/// `(a, b)` of the standard base `a + b sqrt(c)`.
pub fn standard_base(c: i64) -> Result<(i64, i64)> {
    match c {
        -1 | 2 => Ok((2, 1)),
        c if c >= 3 && arith::is_prime(c as u64) => Ok((1, 1)),
        _ => Err(invalid(format!("{c} is not a Frobenius index value"))),
    }
}

/// `z^n == conj(z)` in `Z_n[sqrt(c)]` for `z = a + b sqrt(c)`.
pub fn raw_frobenius_relation(n: u64, a: i64, b: i64, c: i64) -> Result<bool> {
    let ring = QuadRing::new(n, c)?;
    let z = ring.elem(a, b);
    Ok(ring.pow(z, n) == ring.conj(z))
}

/// Hot-path variant for an index value `c` (prime or -1) and odd `n >= 3`.
pub(crate) fn relation_residue(n: u64, c: i64) -> (QuadElem, QuadElem) {
    let (a, b) = standard_base(c).expect("index value");
    let ring = QuadRing::new_unchecked(n, c);
    let z = ring.elem(a, b);
    (ring.pow(z, n), ring.conj(z))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "reason")]
pub enum CompositeReason {
    Even,
    /// 0 or 1.
    Unit,
    Square {
        root: u64,
    },
    FrobeniusEqualityFailed,
    FermatFailed {
        base: u64,
    },
    MrWitness {
        base: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum Verdict {
    FrobeniusPrime,
    /// Probable prime under a classic comparator test.
    ProbablePrime,
    Composite(CompositeReason),
    FactorFound {
        divisor: u64,
    },
    IndexCapExceeded,
}

impl Verdict {
    /// Whether the verdict claims primality.
    pub fn says_prime(&self) -> bool {
        matches!(self, Verdict::FrobeniusPrime | Verdict::ProbablePrime)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::FrobeniusPrime => "frobenius-prime",
            Verdict::ProbablePrime => "probable-prime",
            Verdict::Composite(CompositeReason::Even) => "composite (even)",
            Verdict::Composite(CompositeReason::Unit) => "composite (unit)",
            Verdict::Composite(CompositeReason::Square { .. }) => "composite (square)",
            Verdict::Composite(CompositeReason::FrobeniusEqualityFailed) => "composite",
            Verdict::Composite(CompositeReason::FermatFailed { .. }) => "composite (fermat)",
            Verdict::Composite(CompositeReason::MrWitness { .. }) => "composite (mr-witness)",
            Verdict::FactorFound { .. } => "composite",
            Verdict::IndexCapExceeded => "index-cap-exceeded",
        }
    }
}

/// Values seen while evaluating the Frobenius equality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub index: i64,
    pub base: (i64, i64),
    /// `z^n mod n`.
    pub residue: QuadElem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TestOutcome {
    pub n: u64,
    #[serde(flatten)]
    pub verdict: Verdict,
    /// Present exactly when the Frobenius equality was evaluated.
    pub diagnostics: Option<Diagnostics>,
}

impl TestOutcome {
    fn bare(n: u64, verdict: Verdict) -> Self {
        TestOutcome { n, verdict, diagnostics: None }
    }
}

/// Runs the Frobenius test on any 64-bit input.
///
/// Inputs below 3 and even inputs short-circuit (2 is reported prime), perfect
/// squares are composite with their root, a zero Jacobi symbol at the index
/// yields the index as a factor.
pub fn frobenius_test(n: u64) -> TestOutcome {
    match n {
        0 => return TestOutcome::bare(n, Verdict::Composite(CompositeReason::Even)),
        1 => return TestOutcome::bare(n, Verdict::Composite(CompositeReason::Unit)),
        2 => return TestOutcome::bare(n, Verdict::FrobeniusPrime),
        _ if n & 1 == 0 => return TestOutcome::bare(n, Verdict::Composite(CompositeReason::Even)),
        _ => {}
    }
    if let Some(root) = is_perfect_square(n) {
        return TestOutcome::bare(n, Verdict::Composite(CompositeReason::Square { root }));
    }
    let c = match frobenius_index(n) {
        Ok(c) => c,
        Err(_) => return TestOutcome::bare(n, Verdict::IndexCapExceeded),
    };
    if jacobi_signed(c, n) == 0 {
        // c > 0 here: J(-1/n) is never 0 for odd n
        let g = (c as u64).gcd(&n);
        debug_assert!(g > 1 && g < n);
        return TestOutcome::bare(n, Verdict::FactorFound { divisor: g });
    }
    let base = standard_base(c).expect("index value");
    let (residue, conj) = relation_residue(n, c);
    let verdict = if residue == conj {
        Verdict::FrobeniusPrime
    } else {
        Verdict::Composite(CompositeReason::FrobeniusEqualityFailed)
    };
    TestOutcome { n, verdict, diagnostics: Some(Diagnostics { index: c, base, residue }) }
}

fn check_odd(n: u64) -> Result<()> {
    if n < 3 || n & 1 == 0 {
        return Err(invalid(format!("{n} must be odd and >= 3")));
    }
    Ok(())
}

/// `base^(n-1) == 1 mod n`. A base sharing a factor with `n` is reported as
/// [`Error::FactorFound`].
pub fn fermat_test(n: u64, base: u64) -> Result<bool> {
    check_odd(n)?;
    let base = base % n;
    let g = base.gcd(&n);
    if base == 0 {
        return Err(invalid(format!("base is divisible by {n}")));
    }
    if g > 1 {
        return Err(Error::FactorFound { n, divisor: g });
    }
    Ok(pow_mod(base, n - 1, n) == 1)
}

/// One strong-probable-prime round, `2 <= base <= n - 2`.
pub fn miller_rabin_round(n: u64, base: u64) -> Result<bool> {
    check_odd(n)?;
    if base < 2 || base > n - 2 {
        return Err(invalid(format!("base {base} outside [2, {}]", n.saturating_sub(2))));
    }
    Ok(arith::is_strong_probable_prime(n, base))
}

fn comparator_prelude(n: u64) -> Option<TestOutcome> {
    match n {
        0 => Some(TestOutcome::bare(n, Verdict::Composite(CompositeReason::Even))),
        1 => Some(TestOutcome::bare(n, Verdict::Composite(CompositeReason::Unit))),
        2 | 3 => Some(TestOutcome::bare(n, Verdict::ProbablePrime)),
        _ if n & 1 == 0 => Some(TestOutcome::bare(n, Verdict::Composite(CompositeReason::Even))),
        _ => None,
    }
}

/// Fermat test over several bases.
pub fn fermat_outcome(n: u64, bases: &[u64]) -> TestOutcome {
    if let Some(o) = comparator_prelude(n) {
        return o;
    }
    for &b in bases {
        match fermat_test(n, b) {
            Ok(true) | Err(Error::InvalidArgument(_)) => {}
            Ok(false) => return TestOutcome::bare(n, Verdict::Composite(CompositeReason::FermatFailed { base: b })),
            Err(Error::FactorFound { divisor, .. }) => return TestOutcome::bare(n, Verdict::FactorFound { divisor }),
            Err(e) => unreachable!("fermat_test: {e}"),
        }
    }
    TestOutcome::bare(n, Verdict::ProbablePrime)
}

/// Miller-Rabin over several bases; bases outside `[2, n-2]` are skipped.
pub fn miller_rabin_outcome(n: u64, bases: &[u64]) -> TestOutcome {
    if let Some(o) = comparator_prelude(n) {
        return o;
    }
    for &b in bases {
        if let Ok(false) = miller_rabin_round(n, b) {
            return TestOutcome::bare(n, Verdict::Composite(CompositeReason::MrWitness { base: b }));
        }
    }
    TestOutcome::bare(n, Verdict::ProbablePrime)
}
