//! `frob`: command-line front end for the Frobenius test and the
//! pseudoprime search tools.
//!
//! Exit codes: 0 success or Frobenius prime, 1 composite or a failed check,
//! 2 invalid input or I/O error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use frob_core::exact::factors_except_one_scan;
use frob_core::frob::{frobenius_index, frobenius_test, Verdict};
use frob_core::harness::{
    check_list, list_fermat_pseudoprimes, run_proposition_suite, scan_range_with, Proposition, ScanOptions,
    SuiteConfig, DEFAULT_BLOCK_WIDTH,
};
use frob_core::report::{Envelope, Table};
use frob_core::structure::{consistent_pairs, phi_sweep, profiles_to_csv};
use frob_core::Execution;

/// Ranges wider than this need `--long-run`.
const LONG_RUN_WIDTH: u64 = 1_000_000_000;

#[derive(Parser, Debug)]
#[command(name = "frob", version, about = "Frobenius primality test and pseudoprime search tools")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    output: Format,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
    /// Write the report to a file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Allow jobs beyond desk scale; prints progress to standard error.
    #[arg(long, global = true)]
    long_run: bool,
    /// Reserved; every algorithm is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
enum Command {
    /// Run the Frobenius test on n.
    Test { n: u64 },
    /// Print the Frobenius index of n.
    Index { n: u64 },
    /// Test every odd n in [lo, hi) and compare with a primality oracle.
    Scan {
        lo: u64,
        hi: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        shards: u64,
        #[arg(long, default_value_t = DEFAULT_BLOCK_WIDTH, value_parser = clap::value_parser!(u64).range(1..))]
        block_width: u64,
    },
    /// Run every integer of a one-per-line file through the test.
    CheckList { path: PathBuf },
    /// Profiles of the primes up to p-max for index c.
    Phi {
        #[arg(long, allow_negative_numbers = true)]
        c: i64,
        #[arg(long)]
        p_max: u64,
        /// `+` for split primes, `-` for inert primes.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_sign)]
        sign: Option<i8>,
    },
    /// Consistent prime pairs up to p-max for index c.
    Pairs {
        #[arg(long, allow_negative_numbers = true)]
        c: i64,
        #[arg(long)]
        p_max: u64,
    },
    /// Cofactor search over q <= q-max for index c.
    ExceptOne {
        #[arg(long, allow_negative_numbers = true)]
        c: i64,
        #[arg(long)]
        q_max: u64,
        /// Skip candidates n = q p above this bound.
        #[arg(long)]
        n_bound: Option<u64>,
    },
    /// Run the structural checks.
    Props {
        /// Comma-separated subset, e.g. `pairs,triples`.
        #[arg(long, value_delimiter = ',', value_parser = parse_prop)]
        which: Vec<String>,
        /// Bound for multiples of listed triples and quadruples.
        #[arg(long, default_value_t = 1 << 40)]
        bound: u64,
        #[arg(long, default_value_t = 1_000_000)]
        scan_hi: u64,
        #[arg(long, default_value_t = 100_000)]
        multiple_p_max: u64,
        #[arg(long, default_value_t = 1000)]
        q_max: u64,
    },
    /// Count odd composites below hi that pass Fermat for every base.
    CountPsp {
        hi: u64,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        bases: Vec<u64>,
        /// Also list the pseudoprimes.
        #[arg(long)]
        list: bool,
    },
}

fn parse_sign(s: &str) -> Result<i8, String> {
    match s {
        "+" | "+1" | "1" => Ok(1),
        "-" | "-1" => Ok(-1),
        _ => Err(format!("sign must be + or -, got {s:?}")),
    }
}

fn parse_prop(s: &str) -> Result<String, String> {
    Proposition::parse(s).map(|p| p.name().to_string()).ok_or_else(|| {
        let names: Vec<&str> = Proposition::ALL.iter().map(|p| p.name()).collect();
        format!("unknown check {s:?}; expected one of {}", names.join(", "))
    })
}

/// Rendered output plus the process status.
struct Rendered {
    body: String,
    code: u8,
}

fn emit<R: Serialize>(
    cli: &Cli,
    report: &R,
    text: impl FnOnce() -> String,
    csv: Option<String>,
    code: u8,
) -> Result<Rendered> {
    let body = match cli.output {
        Format::Json => Envelope::new(&cli.command, report).to_json() + "\n",
        Format::Text => text(),
        Format::Csv => match csv {
            Some(csv) => csv,
            None => bail!("csv output is not available for this command"),
        },
    };
    Ok(Rendered { body, code })
}

fn progress_printer(label: &'static str) -> impl Fn(usize, usize) + Sync {
    move |done, total| eprintln!("{label}: block {done}/{total}")
}

fn run(cli: &Cli) -> Result<Rendered> {
    let exec = if cli.threads == Some(1) { Execution::Sequential } else { Execution::Parallel };
    match &cli.command {
        &Command::Test { n } => {
            let o = frobenius_test(n);
            let mut text = o.verdict.tag().to_string();
            if let (Verdict::FrobeniusPrime, Some(d)) = (o.verdict, o.diagnostics) {
                write!(text, " c={}", d.index)?;
            }
            text.push('\n');
            if let Some(d) = o.diagnostics {
                let (a, b) = d.base;
                writeln!(text, "index: {}", d.index)?;
                writeln!(text, "base: {a}+{b}*sqrt({})", d.index)?;
                writeln!(text, "z^n: {}+{}*sqrt({})", d.residue.a, d.residue.b, d.index)?;
            }
            if let Verdict::FactorFound { divisor } = o.verdict {
                writeln!(text, "divisor: {divisor}")?;
            }
            let csv = format!("n,verdict\n{n},{}\n", o.verdict.tag());
            emit(cli, &o, || text, Some(csv), if o.verdict.says_prime() { 0 } else { 1 })
        }
        &Command::Index { n } => {
            let c = frobenius_index(n)?;
            let jacobi = frob_core::arith::jacobi(c, n)?;
            #[derive(Serialize)]
            struct IndexReport {
                n: u64,
                index: i64,
                jacobi: i8,
            }
            let csv = format!("n,index,jacobi\n{n},{c},{jacobi}\n");
            emit(cli, &IndexReport { n, index: c, jacobi }, || format!("{c}\n"), Some(csv), 0)
        }
        &Command::Scan { lo, hi, shards, block_width } => {
            if lo < 3 || lo >= hi {
                bail!("invalid range [{lo}, {hi}): need 3 <= lo < hi");
            }
            if hi - lo > LONG_RUN_WIDTH && !cli.long_run {
                bail!("range wider than {LONG_RUN_WIDTH} needs --long-run");
            }
            let opts = ScanOptions { shard_count: shards as usize, block_width, exec };
            let printer = progress_printer("scan");
            let progress = cli.long_run.then_some(&printer as &(dyn Fn(usize, usize) + Sync));
            let rep = scan_range_with(lo, hi, opts, progress)?;
            let b = &rep.body;
            let text = || {
                let mut t = Table::new(["field", "value"]);
                t.row(["range", &format!("[{lo}, {hi})")])
                    .row(["tested", &b.tested.to_string()])
                    .row(["primes", &b.primes.to_string()])
                    .row(["squares", &b.squares.to_string()])
                    .row(["fpp_hits", &b.fpp_hits.len().to_string()])
                    .row(["disagreements", &b.disagreements.len().to_string()])
                    .row(["shards", &rep.shards.to_string()])
                    .row(["elapsed_secs", &format!("{:.3}", rep.elapsed_secs)]);
                let mut s = t.to_string();
                for d in &b.disagreements {
                    let _ = writeln!(
                        s,
                        "disagreement: n={} frobenius={} oracle_prime={}",
                        d.n, d.frobenius, d.oracle_prime
                    );
                }
                s
            };
            let csv = format!(
                "lo,hi,tested,primes,squares,fpp_hits,disagreements\n{lo},{hi},{},{},{},{},{}\n",
                b.tested,
                b.primes,
                b.squares,
                b.fpp_hits.len(),
                b.disagreements.len()
            );
            emit(cli, &rep, text, Some(csv), if b.is_clean() { 0 } else { 1 })
        }
        Command::CheckList { path } => {
            let rep = check_list(path)?;
            let text = || {
                let mut t = Table::new(["field", "value"]);
                t.row(["source", rep.source.as_str()])
                    .row(["entries", &rep.entries.to_string()])
                    .row(["rejected_by_frobenius", &rep.rejected_by_frobenius.to_string()])
                    .row(["passed", &rep.passed.len().to_string()])
                    .row(["primes_skipped", &rep.primes_skipped.to_string()])
                    .row(["malformed_lines", &rep.malformed_lines.to_string()]);
                let mut s = t.to_string();
                for n in &rep.passed {
                    let _ = writeln!(s, "passed: {n}");
                }
                s
            };
            let csv = format!(
                "source,entries,rejected,passed,primes,malformed\n{},{},{},{},{},{}\n",
                rep.source,
                rep.entries,
                rep.rejected_by_frobenius,
                rep.passed.len(),
                rep.primes_skipped,
                rep.malformed_lines
            );
            emit(cli, &rep, text, Some(csv), if rep.passed.is_empty() { 0 } else { 1 })
        }
        &Command::Phi { c, p_max, sign } => {
            let profiles = phi_sweep(c, p_max, sign, exec)?;
            let text = || {
                let mut t = Table::new(["p", "sign", "M", "D", "admissible"]);
                for pr in &profiles {
                    let d = pr.residue.map(|d| d.to_string()).unwrap_or_else(|| "-".into());
                    t.row([
                        pr.p.to_string(),
                        sign_str(pr.sign).into(),
                        pr.modulus.to_string(),
                        d,
                        pr.is_admissible().to_string(),
                    ]);
                }
                t.to_string()
            };
            emit(cli, &profiles, text, Some(profiles_to_csv(&profiles)), 0)
        }
        &Command::Pairs { c, p_max } => {
            let pairs = consistent_pairs(c, p_max, exec)?;
            let text = || {
                let mut t = Table::new(["p1", "p2"]);
                for (a, b) in &pairs {
                    t.row([a, b]);
                }
                t.to_string()
            };
            let csv = pairs.iter().fold(String::from("c,p1,p2\n"), |mut s, (a, b)| {
                let _ = writeln!(s, "{c},{a},{b}");
                s
            });
            emit(cli, &pairs, text, Some(csv), 0)
        }
        &Command::ExceptOne { c, q_max, n_bound } => {
            let rep = factors_except_one_scan(c, q_max, n_bound.map(u128::from), exec)?;
            let hits = rep.fpp_hits();
            let text = || {
                let mut t = Table::new(["q", "d_bits", "primes", "unresolved"]);
                for r in &rep.rows {
                    let primes: Vec<String> = r.primes.iter().map(u64::to_string).collect();
                    t.row([
                        r.q.to_string(),
                        r.d_bits.to_string(),
                        primes.join(" "),
                        r.unresolved.clone().unwrap_or_default(),
                    ]);
                }
                let mut s = t.to_string();
                let _ = writeln!(s, "relation passes: {:?}", rep.relation_passes());
                let _ = writeln!(s, "pseudoprimes: {hits:?}");
                s
            };
            emit(cli, &rep, text, Some(rep.to_csv()), if hits.is_empty() { 0 } else { 1 })
        }
        Command::Props { which, bound, scan_hi, multiple_p_max, q_max } => {
            let config = SuiteConfig {
                which: which.iter().filter_map(|w| Proposition::parse(w)).collect(),
                scan_hi: *scan_hi,
                multiple_p_max: *multiple_p_max,
                except_one_q_max: *q_max,
                tuple_bound: *bound,
                exec,
                ..SuiteConfig::default()
            };
            if *scan_hi > LONG_RUN_WIDTH && !cli.long_run {
                bail!("--scan-hi above {LONG_RUN_WIDTH} needs --long-run");
            }
            let rep = run_proposition_suite(&config)?;
            let text = || {
                let mut t = Table::new(["check", "passed", "checked", "note"]);
                for r in &rep.results {
                    t.row([r.name.to_string(), r.passed.to_string(), r.checked.to_string(), r.note.clone()]);
                }
                let mut s = t.to_string();
                for r in rep.results.iter().filter(|r| !r.passed) {
                    let _ = writeln!(s, "{}: {}", r.name, r.hits.join(", "));
                }
                s
            };
            let csv = rep.results.iter().fold(String::from("check,passed,checked,hits\n"), |mut s, r| {
                let _ = writeln!(s, "{},{},{},{}", r.name, r.passed, r.checked, r.hits.join(" "));
                s
            });
            emit(cli, &rep, text, Some(csv), if rep.all_passed { 0 } else { 1 })
        }
        Command::CountPsp { hi, bases, list } => {
            if *hi > LONG_RUN_WIDTH && !cli.long_run {
                bail!("bound above {LONG_RUN_WIDTH} needs --long-run");
            }
            let printer = progress_printer("count-psp");
            let progress = cli.long_run.then_some(&printer as &(dyn Fn(usize, usize) + Sync));
            let found = list_fermat_pseudoprimes(*hi, bases, exec, progress)?;
            #[derive(Serialize)]
            struct CountReport<'a> {
                hi: u64,
                bases: &'a [u64],
                count: usize,
                #[serde(skip_serializing_if = "Option::is_none")]
                pseudoprimes: Option<&'a [u64]>,
            }
            let rep = CountReport { hi: *hi, bases, count: found.len(), pseudoprimes: list.then_some(&found) };
            let text = || {
                let mut s = format!("{}\n", found.len());
                if *list {
                    for n in &found {
                        let _ = writeln!(s, "{n}");
                    }
                }
                s
            };
            let joined: Vec<String> = bases.iter().map(u64::to_string).collect();
            let csv = format!("hi,bases,count\n{hi},{},{}\n", joined.join(" "), found.len());
            emit(cli, &rep, text, Some(csv), 0)
        }
    }
}

fn sign_str(sign: i8) -> &'static str {
    if sign > 0 {
        "+"
    } else {
        "-"
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let rendered = run(&cli).and_then(|r| {
        match &cli.out {
            Some(path) => std::fs::write(path, &r.body).with_context(|| format!("writing {}", path.display()))?,
            None => print!("{}", r.body),
        }
        Ok(r.code)
    });
    match rendered {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
