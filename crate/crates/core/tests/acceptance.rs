//! Acceptance criteria, one line per criterion. Run with
//! `cargo test -p frob-core --test acceptance`; set `FROB_LONG_RUN=1` to
//! include the hours-long pseudoprime counts.

use std::io::Write as _;
use std::time::{Duration, Instant};

use frob_core::arith::{factorize, jacobi, powmod};
use frob_core::exact::{cofactor_divisor_gcd, exact_pow};
use frob_core::frob::{frobenius_test, raw_frobenius_relation, standard_base, Verdict};
use frob_core::harness::{check_list, count_fermat_pseudoprimes, scan_range, scan_range_with, ScanOptions};
use frob_core::quad::{inert_group_order, quad_order};
use frob_core::structure::{multiple_factor_sweep, pair_consistent, phi_positive_admissible};
use frob_core::{Execution, QuadElem, QuadRing};
use num_bigint::BigUint;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

/// Criteria whose published input data does not hold; reported, never hidden.
const KNOWN_UNATTAINABLE: &[&str] = &["1b"];

struct Outcome {
    id: &'static str,
    title: &'static str,
    status: Status,
    detail: String,
    elapsed: Duration,
}

enum Status {
    Pass,
    Fail,
    Skip,
}

fn run(id: &'static str, title: &'static str, limit: Duration, f: impl FnOnce() -> Result<String, String>) -> Outcome {
    let started = Instant::now();
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|e| {
        Err(format!(
            "panicked: {:?}",
            e.downcast_ref::<String>().map(String::as_str).or(e.downcast_ref::<&str>().copied())
        ))
    });
    let elapsed = started.elapsed();
    let (status, detail) = match result {
        Ok(d) if elapsed <= limit => (Status::Pass, d),
        Ok(d) => (Status::Fail, format!("{d}; exceeded {:.0?} limit", limit)),
        Err(d) => (Status::Fail, d),
    };
    Outcome { id, title, status, detail, elapsed }
}

fn skip(id: &'static str, title: &'static str, detail: &str) -> Outcome {
    Outcome { id, title, status: Status::Skip, detail: detail.into(), elapsed: Duration::ZERO }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden_vectors() -> Result<String, String> {
    let cases: [(u64, i64, (i64, i64), QuadElem); 3] = [
        (19, -1, (2, 1), QuadElem::new(2, 18)),
        (33, -1, (2, 1), QuadElem::new(2, 22)),
        (17, 3, (1, 1), QuadElem::new(1, 16)),
    ];
    for (n, c, (a, b), want) in cases {
        let r = QuadRing::new(n, c).map_err(|e| e.to_string())?;
        let got = r.pow(r.elem(a, b), n);
        ensure(got == want, || format!("({a}+{b}sqrt{c})^{n} mod {n} = {got:?}"))?;
    }
    let v = frobenius_test(5719).verdict;
    ensure(matches!(v, Verdict::Composite(_)), || format!("frobenius_test(5719) = {v:?}"))?;
    Ok("3 powers exact; frobenius_test(5719) composite".into())
}

fn liar_relation() -> Result<String, String> {
    let holds = raw_frobenius_relation(5719, 4689, 1, -1).map_err(|e| e.to_string())?;
    let liars = (0..5719i64).filter(|&a| raw_frobenius_relation(5719, a, 1, -1).unwrap()).count();
    ensure(holds, || {
        format!(
            "(4689+i)^5719 != 4689-i mod 5719; {liars} bases a+i do satisfy it (e.g. 204+i), 4689 is not among them"
        )
    })?;
    Ok("4689+i is a liar".into())
}

fn big_quad_vectors() -> Result<String, String> {
    let z = exact_pow(1, 1, 5, 31);
    ensure(z.a == 3_232_337_626_136_576u64.into() && z.b == 1_445_545_331_654_656u64.into(), || {
        format!("(1+sqrt5)^31 = {} + {} sqrt5", z.a, z.b)
    })?;
    let d = cofactor_divisor_gcd(31, 1, 1, 5).map_err(|e| e.to_string())?;
    ensure(d == BigUint::from(104_005u32), || format!("D(31) = {d}"))?;
    let f = factorize(104_005).map_err(|e| e.to_string())?;
    ensure(f.factors() == [(5, 1), (11, 1), (31, 1), (61, 1)], || format!("{:?}", f.factors()))?;
    let d = cofactor_divisor_gcd(37, 1, 1, 5).map_err(|e| e.to_string())?;
    ensure(d == BigUint::from(37u32), || format!("D(37) = {d}"))?;
    Ok("D(31) = 104005 = 5*11*31*61, D(37) = 37".into())
}

fn order_vectors() -> Result<String, String> {
    let order = |p: u64| {
        let r = QuadRing::new(p, -1).unwrap();
        quad_order(r.elem(2, 1), &r, &inert_group_order(p).unwrap()).unwrap()
    };
    let o1 = order(1_000_003);
    ensure(o1 == 1_000_006_000_008, || format!("ord mod 1000003 = {o1}"))?;
    let o2 = order(100_003);
    ensure(o2 == 434_808_696, || format!("ord mod 100003 = {o2}"))?;
    let p = 10_000_019u64;
    let o3 = order(p);
    ensure(o3 == (p * p - 1) / 6, || format!("ord mod {p} = {o3}"))?;
    Ok(format!("ord mod 10000019 = {o3} = (p^2-1)/6 (printed value 1666730000060 drops a digit)"))
}

/// Independent oracle: odd composite non-squares in `[lo, hi)` by sieve.
fn composite_count(lo: u64, hi: u64) -> u64 {
    let sieve = sieve(hi);
    (lo | 1..hi).step_by(2).filter(|&n| !sieve[n as usize] && (n as f64).sqrt().round().powi(2) as u64 != n).count()
        as u64
}

/// `is_prime[i]` for `i < n`.
fn sieve(n: u64) -> Vec<bool> {
    let n = n as usize;
    let mut s = vec![true; n.max(2)];
    s[0] = false;
    s[1] = false;
    let mut i = 2;
    while i * i < n {
        if s[i] {
            (i * i..n).step_by(i).for_each(|j| s[j] = false);
        }
        i += 1;
    }
    s
}

fn desk_scan() -> Result<String, String> {
    let small = scan_range(3, 1_000_000, 1).map_err(|e| e.to_string())?;
    ensure(small.body.is_clean(), || format!("[3,1e6): {:?}", small.body.disagreements))?;
    ensure(small.elapsed_secs <= 30.0, || format!("[3,1e6) took {:.1}s", small.elapsed_secs))?;
    let opts = ScanOptions { shard_count: 1, exec: Execution::Sequential, ..Default::default() };
    let full = scan_range_with(3, 10_000_000, opts, None).map_err(|e| e.to_string())?;
    ensure(full.body.is_clean(), || format!("[3,1e7): {:?}", full.body.disagreements))?;
    let expect = composite_count(3, 10_000_000);
    ensure(full.body.tested == expect, || format!("tested {} vs oracle {expect}", full.body.tested))?;
    Ok(format!(
        "[3,1e7): {} composites, 0 hits, 0 disagreements, {:.1}s sequential; [3,1e6) {:.1}s",
        full.body.tested, full.elapsed_secs, small.elapsed_secs
    ))
}

fn oracle_powmod(b: u64, mut e: u64, n: u64) -> u64 {
    let (mut acc, mut base) = (1u128, b as u128 % n as u128);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % n as u128;
        }
        base = base * base % n as u128;
        e >>= 1;
    }
    acc as u64
}

fn base2_pseudoprimes(hi: u64) -> Vec<u64> {
    let s = sieve(hi);
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()) as u64;
    let step = hi.div_ceil(threads);
    std::thread::scope(|sc| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let s = &s;
                sc.spawn(move || {
                    let (lo, end) = ((t * step).max(3) | 1, ((t + 1) * step).min(hi));
                    (lo..end)
                        .step_by(2)
                        .filter(|&n| !s[n as usize] && oracle_powmod(2, n - 1, n) == 1)
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    })
}

fn pseudoprime_rejection() -> Result<String, String> {
    let list = base2_pseudoprimes(100_000_000);
    let below_1e6 = list.iter().filter(|&&n| n < 1_000_000).count() as u64;
    let lib = count_fermat_pseudoprimes(1_000_000, &[2], Execution::Parallel).map_err(|e| e.to_string())?;
    ensure(lib == below_1e6, || format!("library count {lib} vs oracle {below_1e6}"))?;
    let mut file = tempfile::NamedTempFile::new().map_err(|e| e.to_string())?;
    for n in &list {
        writeln!(file, "{n}").map_err(|e| e.to_string())?;
    }
    file.flush().map_err(|e| e.to_string())?;
    let rep = check_list(file.path()).map_err(|e| e.to_string())?;
    ensure(rep.entries == list.len() as u64, || format!("entries {} vs {}", rep.entries, list.len()))?;
    ensure(rep.passed.is_empty(), || format!("passed: {:?}", rep.passed))?;
    ensure(rep.rejected_by_frobenius == list.len() as u64, || format!("rejected {}", rep.rejected_by_frobenius))?;
    Ok(format!("{} base-2 pseudoprimes < 1e8 all rejected; {below_1e6} below 1e6 (oracle = library)", list.len()))
}

fn long_run_counts() -> Result<String, String> {
    let hi = 1u64 << 32;
    let c2 = count_fermat_pseudoprimes(hi, &[2], Execution::Parallel).map_err(|e| e.to_string())?;
    let c23 = count_fermat_pseudoprimes(hi, &[2, 3], Execution::Parallel).map_err(|e| e.to_string())?;
    ensure(c2 == 10403 && c23 == 2318, || format!("base 2: {c2}, bases 2,3: {c23}"))?;
    Ok("10403 and 2318".into())
}

const REDUCED_TABLE: [(i64, u64); 8] =
    [(2, 8191), (7, 31), (7, 3923), (11, 98641), (29, 12637), (61, 271), (83, 3278741), (101, 137)];

fn phi_positive_membership() -> Result<String, String> {
    for (c, p) in REDUCED_TABLE {
        let r = phi_positive_admissible(p, c).map_err(|e| e.to_string())?;
        ensure(r.is_some(), || format!("({c}, {p}) inadmissible"))?;
    }
    Ok("8/8 admissible".into())
}

fn pair_membership() -> Result<String, String> {
    let tuples: [(&[u64], i64); 5] =
        [(&[13, 37, 97], 5), (&[13, 37, 433], 5), (&[11, 47, 71], -1), (&[29, 53, 157], 2), (&[5, 53, 157], 2)];
    let mut n = 0;
    for (t, c) in tuples {
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                let r = pair_consistent(t[i], t[j], c).map_err(|e| e.to_string())?;
                ensure(r.is_consistent(), || format!("({}, {}) c={c}: {r:?}", t[i], t[j]))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n}/{n} pairs consistent"))
}

const CASES: u32 = 10_000;

fn runner() -> TestRunner {
    TestRunner::new(Config { cases: CASES, failure_persistence: None, ..Config::default() })
}

fn index_values() -> Vec<i64> {
    frob_core::frob::index_sequence().iter().copied().take(30).collect()
}

fn properties() -> Result<String, String> {
    let primes: Vec<u64> =
        sieve(10_000).iter().enumerate().filter(|(i, &p)| p && *i > 2).map(|(i, _)| i as u64).collect();
    let cs = index_values();
    let mut failures = Vec::new();
    let mut record = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };

    let ps = primes.clone();
    record(
        "euler",
        runner()
            .run(&(prop::sample::select(ps), any::<i64>()), |(p, a)| {
                let j = jacobi(a, p).unwrap();
                let e = oracle_powmod(a.rem_euclid(p as i64) as u64, (p - 1) / 2, p);
                let want = match j {
                    1 => 1,
                    -1 => p - 1,
                    _ => 0,
                };
                prop_assert_eq!(e, want);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    record(
        "norm multiplicativity",
        runner()
            .run(
                &((1u64..u64::MAX / 2).prop_map(|n| 2 * n + 1), prop::sample::select(cs.clone()), any::<[u64; 4]>()),
                |(n, c, v)| {
                    let r = QuadRing::new(n, c).unwrap();
                    let x = QuadElem::new(v[0] % n, v[1] % n);
                    let y = QuadElem::new(v[2] % n, v[3] % n);
                    let lhs = r.norm(r.mul(x, y));
                    let rhs = (r.norm(x) as u128 * r.norm(y) as u128 % n as u128) as u64;
                    prop_assert_eq!(lhs, rhs);
                    Ok(())
                },
            )
            .map_err(|e| e.to_string()),
    );

    record(
        "frobenius automorphism",
        runner()
            .run(
                &(prop::sample::select(primes.clone()), prop::sample::select(cs.clone()), any::<(u64, u64)>()),
                |(p, c, (a, b))| {
                    let j = jacobi(c, p).unwrap();
                    prop_assume!(j != 0);
                    let r = QuadRing::new(p, c).unwrap();
                    let z = QuadElem::new(a % p, b % p);
                    let want = if j < 0 { r.conj(z) } else { z };
                    prop_assert_eq!(r.pow(z, p), want);
                    Ok(())
                },
            )
            .map_err(|e| e.to_string()),
    );

    record(
        "frobenius implies fermat",
        runner()
            .run(&(1u64..5_000_000).prop_map(|n| 2 * n + 1), |n| {
                let o = frobenius_test(n);
                if o.verdict.says_prime() {
                    let d = o.diagnostics.unwrap();
                    let (a, b) = standard_base(d.index).unwrap();
                    let norm = QuadRing::new(n, d.index).unwrap().norm(QuadRing::new(n, d.index).unwrap().elem(a, b));
                    prop_assume!(norm != 0);
                    prop_assert_eq!(powmod(norm, n - 1, n).unwrap(), 1);
                    prop_assert_eq!(powmod(2, n - 1, n).unwrap(), 1);
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    record(
        "shard independence",
        runner()
            .run(&(3u64..1u64 << 40, 1u64..3000, 1usize..16, 1u64..512), |(lo, w, shards, width)| {
                let base = scan_range_with(
                    lo,
                    lo + w,
                    ScanOptions { shard_count: 1, exec: Execution::Sequential, ..Default::default() },
                    None,
                )
                .unwrap();
                let opts = ScanOptions { shard_count: shards, block_width: width, exec: Execution::Parallel };
                let other = scan_range_with(lo, lo + w, opts, None).unwrap();
                prop_assert_eq!(base.body, other.body);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    if failures.is_empty() {
        Ok(format!("5 suites x {CASES} cases, 0 failures"))
    } else {
        Err(failures.join("; "))
    }
}

fn multiple_factor() -> Result<String, String> {
    let rep = multiple_factor_sweep(1_000_000, 128, Execution::Parallel).map_err(|e| e.to_string())?;
    ensure(rep.hits.is_empty(), || format!("hits: {:?}", rep.hits))?;
    Ok(format!("{} (p, c) checks over {} primes, 0 hits", rep.checks, rep.primes))
}

fn main() {
    let long_run = std::env::var("FROB_LONG_RUN").is_ok_and(|v| v == "1");
    let s = Duration::from_secs;
    let mut outcomes = vec![
        run("1", "golden test vectors", s(1), golden_vectors),
        run("1b", "liar base 4689+i for 5719", s(1), liar_relation),
        run("2", "exact big-quad vectors", s(1), big_quad_vectors),
        run("3", "order vectors", s(3), order_vectors),
        run("4", "no-FPP desk scan [3, 1e7)", s(300), desk_scan),
        run("5", "base-2 pseudoprime rejection < 1e8", s(600), pseudoprime_rejection),
    ];
    outcomes.push(if long_run {
        run("6", "Fermat pseudoprime counts below 2^32", s(86_400), long_run_counts)
    } else {
        skip("6", "Fermat pseudoprime counts below 2^32", "set FROB_LONG_RUN=1")
    });
    outcomes.extend([
        run("7", "split-prime table membership", s(60), phi_positive_membership),
        run("8", "pair consistency membership", s(60), pair_membership),
        run("9", "property suites", s(600), properties),
        run("10", "multiple-factor sweep p < 1e6, c < 128", s(600), multiple_factor),
    ]);

    let mut unexpected = 0;
    for o in &outcomes {
        let tag = match o.status {
            Status::Pass => "PASS",
            Status::Skip => "SKIP",
            Status::Fail if KNOWN_UNATTAINABLE.contains(&o.id) => "FAIL (known)",
            Status::Fail => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!(
            "{:<14} {:>3} {:<42} {:>8.2}s  {}",
            format!("[{tag}]"),
            o.id,
            o.title,
            o.elapsed.as_secs_f64(),
            o.detail
        );
    }
    if unexpected > 0 {
        eprintln!("{unexpected} acceptance criteria failed");
        std::process::exit(1);
    }
}
