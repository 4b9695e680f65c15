//! Range scans against a Miller-Rabin oracle, pseudoprime list ingestion,
//! Fermat pseudoprime counts, and the suite of structural checks.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::arith::{is_perfect_square, is_prime, pow_mod};
use crate::error::{invalid, Error, Result};
use crate::exact::factors_except_one_scan;
use crate::frob::{frobenius_index, frobenius_test, raw_frobenius_relation, standard_base};
use crate::par::{map_ordered, Execution};
use crate::structure::{
    multiple_factor_sweep, multiples_passing, pair_consistent, phi_negative_candidates, phi_positive_admissible,
    tuple_residue, TupleOutcome,
};

pub const DEFAULT_BLOCK_WIDTH: u64 = 1 << 20;

/// Called once per finished block with `(blocks_done, blocks_total)`.
pub type Progress<'a> = &'a (dyn Fn(usize, usize) + Sync);

#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    /// Minimum number of blocks the range is cut into.
    pub shard_count: usize,
    pub block_width: u64,
    pub exec: Execution,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { shard_count: 1, block_width: DEFAULT_BLOCK_WIDTH, exec: Execution::Parallel }
    }
}

/// Contiguous `[start, end)` blocks covering `[lo, hi)` in ascending order.
fn blocks(lo: u64, hi: u64, shard_count: usize, block_width: u64) -> Vec<(u64, u64)> {
    let span = hi - lo;
    let count = (shard_count.max(1) as u64).max(span.div_ceil(block_width.max(1))).min(span);
    let width = span.div_ceil(count);
    (0..count).map(|i| (lo + i * width, (lo + (i + 1) * width).min(hi))).filter(|(s, e)| s < e).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub n: u64,
    pub frobenius: &'static str,
    pub oracle_prime: bool,
}

/// The shard-independent part of a scan report.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ScanBody {
    pub lo: u64,
    pub hi: u64,
    /// Odd composite non-squares evaluated.
    pub tested: u64,
    pub primes: u64,
    pub squares: u64,
    /// Composites declared Frobenius primes.
    pub fpp_hits: Vec<u64>,
    pub disagreements: Vec<Disagreement>,
}

impl ScanBody {
    fn absorb(&mut self, other: ScanBody) {
        self.tested += other.tested;
        self.primes += other.primes;
        self.squares += other.squares;
        self.fpp_hits.extend(other.fpp_hits);
        self.disagreements.extend(other.disagreements);
    }

    pub fn is_clean(&self) -> bool {
        self.fpp_hits.is_empty() && self.disagreements.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    #[serde(flatten)]
    pub body: ScanBody,
    pub shards: usize,
    pub elapsed_secs: f64,
}

fn scan_block(start: u64, end: u64) -> ScanBody {
    let mut body = ScanBody::default();
    let mut n = start | 1;
    while n < end {
        if is_perfect_square(n).is_some() {
            body.squares += 1;
        } else {
            let oracle = is_prime(n);
            let verdict = frobenius_test(n).verdict;
            if oracle {
                body.primes += 1;
            } else {
                body.tested += 1;
                if verdict.says_prime() {
                    body.fpp_hits.push(n);
                }
            }
            if verdict.says_prime() != oracle {
                body.disagreements.push(Disagreement { n, frobenius: verdict.tag(), oracle_prime: oracle });
            }
        }
        match n.checked_add(2) {
            Some(next) => n = next,
            None => break,
        }
    }
    body
}

/// Runs the Frobenius test on every odd non-square `n` in `[lo, hi)` and
/// compares the verdict with the deterministic Miller-Rabin oracle.
pub fn scan_range(lo: u64, hi: u64, shard_count: usize) -> Result<ScanReport> {
    scan_range_with(lo, hi, ScanOptions { shard_count, ..Default::default() }, None)
}

pub fn scan_range_with(lo: u64, hi: u64, opts: ScanOptions, progress: Option<Progress>) -> Result<ScanReport> {
    if lo < 3 || lo >= hi {
        return Err(invalid(format!("scan range [{lo}, {hi}) must satisfy 3 <= lo < hi")));
    }
    if opts.shard_count == 0 {
        return Err(invalid("shard count must be positive"));
    }
    let started = Instant::now();
    let parts = blocks(lo, hi, opts.shard_count, opts.block_width);
    let shards = parts.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let bodies = map_ordered(opts.exec, parts, |(s, e)| {
        let body = scan_block(s, e);
        if let Some(report) = progress {
            report(done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1, shards);
        }
        body
    });
    let mut body = ScanBody { lo, hi, ..Default::default() };
    for b in bodies {
        body.absorb(b);
    }
    Ok(ScanReport { body, shards, elapsed_secs: started.elapsed().as_secs_f64() })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ListCheckReport {
    pub source: String,
    /// Non-blank lines.
    pub entries: u64,
    pub rejected_by_frobenius: u64,
    /// Composites that pass: Frobenius pseudoprimes.
    pub passed: Vec<u64>,
    /// Prime entries, which pass as they should.
    pub primes_skipped: u64,
    pub malformed_lines: u64,
}

const LIST_CHUNK: usize = 1 << 16;

/// Runs every integer of a one-per-line list through the Frobenius test.
pub fn check_list(path: impl AsRef<Path>) -> Result<ListCheckReport> {
    check_list_with(path, Execution::Parallel)
}

pub fn check_list_with(path: impl AsRef<Path>, exec: Execution) -> Result<ListCheckReport> {
    let path = path.as_ref();
    let io_err = |source| Error::Io { path: path.to_path_buf(), source };
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut report = ListCheckReport { source: path.display().to_string(), ..Default::default() };
    let mut chunk = Vec::with_capacity(LIST_CHUNK);
    for line in reader.lines() {
        let line = line.map_err(io_err)?;
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        report.entries += 1;
        match line.parse::<u64>() {
            Ok(n) => chunk.push(n),
            Err(_) => report.malformed_lines += 1,
        }
        if chunk.len() == LIST_CHUNK {
            check_chunk(&mut report, std::mem::take(&mut chunk), exec);
        }
    }
    check_chunk(&mut report, chunk, exec);
    Ok(report)
}

fn check_chunk(report: &mut ListCheckReport, chunk: Vec<u64>, exec: Execution) {
    let results = map_ordered(exec, chunk, |n| (n, frobenius_test(n).verdict.says_prime(), is_prime(n)));
    for (n, passes, prime) in results {
        match (passes, prime) {
            (_, true) => report.primes_skipped += 1,
            (true, false) => report.passed.push(n),
            (false, false) => report.rejected_by_frobenius += 1,
        }
    }
}

fn is_fermat_pseudoprime(n: u64, bases: &[u64]) -> bool {
    bases.iter().all(|&b| pow_mod(b % n, n - 1, n) == 1) && !is_prime(n)
}

/// Odd composites `n < hi` with `b^(n-1) = 1 (mod n)` for every base.
pub fn count_fermat_pseudoprimes(hi: u64, bases: &[u64], exec: Execution) -> Result<u64> {
    Ok(list_fermat_pseudoprimes(hi, bases, exec, None)?.len() as u64)
}

pub fn list_fermat_pseudoprimes(
    hi: u64,
    bases: &[u64],
    exec: Execution,
    progress: Option<Progress>,
) -> Result<Vec<u64>> {
    if bases.is_empty() || bases.iter().any(|&b| b < 2) {
        return Err(invalid("bases must be non-empty and >= 2"));
    }
    if hi <= 3 {
        return Ok(Vec::new());
    }
    let parts = blocks(3, hi, 1, DEFAULT_BLOCK_WIDTH);
    let total = parts.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let found = map_ordered(exec, parts, |(s, e)| {
        let mut v = Vec::new();
        let mut n = s | 1;
        while n < e {
            if is_fermat_pseudoprime(n, bases) {
                v.push(n);
            }
            n += 2;
        }
        if let Some(report) = progress {
            report(done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1, total);
        }
        v
    });
    Ok(found.into_iter().flatten().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Proposition {
    DirectScan,
    MultipleFactors,
    ExceptOne,
    PhiPositive,
    PhiNegative,
    Pairs,
    Triples,
    Quadruples,
}

impl Proposition {
    pub const ALL: [Proposition; 8] = [
        Proposition::DirectScan,
        Proposition::MultipleFactors,
        Proposition::ExceptOne,
        Proposition::PhiPositive,
        Proposition::PhiNegative,
        Proposition::Pairs,
        Proposition::Triples,
        Proposition::Quadruples,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Proposition::DirectScan => "direct-scan",
            Proposition::MultipleFactors => "multiple-factors",
            Proposition::ExceptOne => "except-one",
            Proposition::PhiPositive => "phi-positive",
            Proposition::PhiNegative => "phi-negative",
            Proposition::Pairs => "pairs",
            Proposition::Triples => "triples",
            Proposition::Quadruples => "quadruples",
        }
    }

    pub fn parse(s: &str) -> Option<Proposition> {
        Proposition::ALL.into_iter().find(|p| p.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteConfig {
    /// Empty selects everything.
    pub which: Vec<Proposition>,
    pub scan_hi: u64,
    pub multiple_p_max: u64,
    pub except_one_q_max: u64,
    pub except_one_indices: Vec<i64>,
    /// Upper bound for multiples of listed triples and quadruples.
    pub tuple_bound: u64,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            which: Vec::new(),
            scan_hi: 1_000_000,
            multiple_p_max: 100_000,
            except_one_q_max: 1000,
            except_one_indices: vec![-1, 2, 3, 5, 7],
            tuple_bound: 1 << 40,
            exec: Execution::Parallel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropositionResult {
    pub name: &'static str,
    pub passed: bool,
    /// Number of individual checks performed.
    pub checked: u64,
    /// Counterexamples; empty on success.
    pub hits: Vec<String>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub results: Vec<PropositionResult>,
    pub all_passed: bool,
}

/// Split primes that any pseudoprime with the given index could contain.
pub const REDUCED_SPLIT_TABLE: [(i64, u64); 8] =
    [(2, 8191), (7, 31), (7, 3923), (11, 98641), (29, 12637), (61, 271), (83, 3278741), (101, 137)];

pub const LISTED_TRIPLES: [(i64, [u64; 3]); 4] =
    [(5, [13, 37, 97]), (5, [13, 37, 433]), (-1, [11, 47, 71]), (-1, [7, 19, 79])];

pub fn listed_quadruples() -> Vec<(i64, [u64; 4])> {
    let mut out = vec![(2, [29, 53, 157, 197]), (2, [5, 53, 157, 197]), (5, [13, 37, 97, 433])];
    for last in [1999, 919, 859, 739, 619, 599, 499, 487, 439, 199] {
        out.push((-1, [7, 19, 79, last]));
    }
    for last in [1999, 859, 599, 499, 487] {
        out.push((-1, [7, 19, 199, last]));
    }
    out.extend([(-1, [11, 47, 71, 691]), (-1, [11, 47, 71, 431]), (-1, [19, 31, 79, 1279]), (-1, [31, 79, 139, 599])]);
    out
}

fn result(name: &'static str, checked: u64, hits: Vec<String>, note: String) -> PropositionResult {
    PropositionResult { name, passed: hits.is_empty(), checked, hits, note }
}

/// Genuine pseudoprime: the relation holds and `c` is the index of `n`.
fn is_fpp_for(n: u64, c: i64) -> bool {
    let (a, b) = standard_base(c).expect("index value");
    n & 1 == 1
        && is_perfect_square(n).is_none()
        && raw_frobenius_relation(n, a, b, c).unwrap_or(false)
        && frobenius_index(n).ok() == Some(c)
}

pub fn run_proposition_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let which: Vec<Proposition> =
        if config.which.is_empty() { Proposition::ALL.to_vec() } else { config.which.clone() };
    let exec = config.exec;
    let mut results = Vec::new();
    for prop in which {
        let name = prop.name();
        let r = match prop {
            Proposition::DirectScan => {
                let rep = scan_range_with(3, config.scan_hi.max(4), ScanOptions { exec, ..Default::default() }, None)?;
                let hits = rep.body.disagreements.iter().map(|d| d.n.to_string()).collect();
                result(name, rep.body.tested, hits, format!("odd composites in [3, {})", config.scan_hi))
            }
            Proposition::MultipleFactors => {
                let rep = multiple_factor_sweep(config.multiple_p_max, 128, exec)?;
                let hits = rep.hits.iter().map(|(p, c)| format!("p={p} c={c}")).collect();
                result(name, rep.checks, hits, format!("p <= {}, c < 128", config.multiple_p_max))
            }
            Proposition::ExceptOne => {
                let mut checked = 0;
                let mut hits = Vec::new();
                let mut unresolved = 0;
                for &c in &config.except_one_indices {
                    let rep = factors_except_one_scan(c, config.except_one_q_max, None, exec)?;
                    checked += rep.rows.iter().map(|r| r.candidates.len() as u64).sum::<u64>();
                    unresolved += rep.unresolved_rows();
                    hits.extend(rep.fpp_hits().into_iter().map(|(q, p)| format!("c={c} q={q} p={p}")));
                }
                let note = format!(
                    "q <= {}, c in {:?}, {unresolved} rows with an unfactored part",
                    config.except_one_q_max, config.except_one_indices
                );
                result(name, checked, hits, note)
            }
            Proposition::PhiPositive => {
                let mut hits = Vec::new();
                for (c, p) in REDUCED_SPLIT_TABLE {
                    if phi_positive_admissible(p, c)?.is_none() {
                        hits.push(format!("c={c} p={p} inadmissible"));
                    }
                }
                result(name, REDUCED_SPLIT_TABLE.len() as u64, hits, "reduced table membership".into())
            }
            Proposition::PhiNegative => {
                let mut checked = 0;
                let mut hits = Vec::new();
                let mut counts = Vec::new();
                for p in [100_003u64, 1_000_003, 10_000_019] {
                    let cands = phi_negative_candidates(p, -1, 1 << 64)?;
                    counts.push(format!("{p}: {}", cands.len()));
                    checked += cands.len() as u64;
                    let found = map_ordered(exec, cands, |n| is_fpp_for(n, -1).then_some(n));
                    hits.extend(found.into_iter().flatten().map(|n| n.to_string()));
                }
                result(name, checked, hits, format!("c=-1 candidates below 2^64: {}", counts.join(", ")))
            }
            Proposition::Pairs => {
                let mut checked = 0;
                let mut hits = Vec::new();
                let tuples = LISTED_TRIPLES
                    .iter()
                    .map(|(c, t)| (*c, t.to_vec()))
                    .chain([(2, vec![29, 53, 157]), (2, vec![5, 53, 157])]);
                for (c, t) in tuples {
                    for i in 0..t.len() {
                        for j in i + 1..t.len() {
                            checked += 1;
                            if !pair_consistent(t[i], t[j], c)?.is_consistent() {
                                hits.push(format!("c={c} ({}, {})", t[i], t[j]));
                            }
                        }
                    }
                }
                result(name, checked, hits, "pairs within listed triples".into())
            }
            Proposition::Triples => {
                let mut checked = 0;
                let mut hits = Vec::new();
                for (c, t) in LISTED_TRIPLES {
                    let (n, h) = triple_sweep(&t, c, config.tuple_bound, exec)?;
                    checked += n;
                    hits.extend(h.into_iter().map(|n| format!("c={c} n={n}")));
                }
                result(name, checked, hits, format!("residue-class multiples up to {}", config.tuple_bound))
            }
            Proposition::Quadruples => {
                let quads = listed_quadruples();
                let mut checked = 0;
                let mut hits = Vec::new();
                for (c, q) in &quads {
                    let product = q.iter().product();
                    let (n, passing) = multiples_passing(product, *c, config.tuple_bound, exec)?;
                    checked += n;
                    hits.extend(
                        passing
                            .into_iter()
                            .filter(|&n| frobenius_index(n).ok() == Some(*c))
                            .map(|n| format!("c={c} n={n}")),
                    );
                }
                result(
                    name,
                    checked,
                    hits,
                    format!("{} quadruples, odd multiples up to {}", quads.len(), config.tuple_bound),
                )
            }
        };
        results.push(r);
    }
    let all_passed = results.iter().all(|r| r.passed);
    Ok(SuiteReport { results, all_passed })
}

/// Tests every `n <= bound` in the residue class forced by a tuple of
/// factors. Returns `(candidates tested, pseudoprimes)`.
pub fn triple_sweep(primes: &[u64], c: i64, bound: u64, exec: Execution) -> Result<(u64, Vec<u64>)> {
    let TupleOutcome::Constrained(t) = tuple_residue(primes, c)? else {
        return Ok((0, Vec::new()));
    };
    if t.n_modulus > bound as u128 {
        let n = t.n_residue;
        let ok = n > 0 && n <= bound as u128 && is_fpp_for(n as u64, c);
        return Ok((u64::from(n > 0 && n <= bound as u128), if ok { vec![n as u64] } else { Vec::new() }));
    }
    let (r, m) = (t.n_residue as u64, t.n_modulus as u64);
    let start = if r == 0 { m } else { r };
    let count = if start > bound { 0 } else { (bound - start) / m + 1 };
    const BLOCK: u64 = 1 << 14;
    let starts: Vec<u64> = (0..count).step_by(BLOCK as usize).collect();
    let filters = &t.filters;
    let found = map_ordered(exec, starts, |k0| {
        let mut v = Vec::new();
        for k in k0..(k0 + BLOCK).min(count) {
            let n = start + k * m;
            let pass_filters = filters.iter().all(|f| {
                let j = crate::arith::jacobi_u64(n % f.prime, f.prime);
                j == if f.residue { 1 } else { -1 }
            });
            if pass_filters && is_fpp_for(n, c) {
                v.push(n);
            }
        }
        v
    });
    Ok((count, found.into_iter().flatten().collect()))
}
