//! Instrumented benchmark grid.
//!
//! Every cell of the grid generates a seeded random array of `n` reals and
//! `k` random-rank queries, answers them with one structure and records the
//! operation counters next to the wall time. Counters depend only on the
//! seed and the cell, never on timing or on the number of threads.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::cascade::CascadeTree;
use crate::compact::CompactTree;
use crate::datagen;
use crate::dynamic::DynamicTree;
use crate::error::Result;
use crate::oracle::oracle_select_counted;
use crate::par::{self, Parallelism};
use crate::selection::{splitmix64, SelectionStrategy};
use crate::types::{elements_of, Stats};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    Cascade,
    Compact,
    Dynamic,
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Lazy,
    Eager,
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Structure::Cascade => "cascade",
            Structure::Compact => "compact",
            Structure::Dynamic => "dynamic",
            Structure::Oracle => "oracle",
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Lazy => "lazy",
            Mode::Eager => "eager",
        })
    }
}

/// Grid axis values; `k` may be tied to `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KAxis {
    Values(Vec<usize>),
    SameAsN,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    pub ns: Vec<usize>,
    pub ks: KAxis,
}

impl Grid {
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for &n in &self.ns {
            match &self.ks {
                KAxis::SameAsN => out.push((n, n)),
                KAxis::Values(ks) => out.extend(ks.iter().map(|&k| (n, k))),
            }
        }
        out
    }
}

fn parse_number(s: &str) -> std::result::Result<usize, String> {
    let s = s.trim();
    if let Some((base, exp)) = s.split_once('^') {
        let base: usize = base.parse().map_err(|_| format!("bad number `{s}`"))?;
        let exp: u32 = exp.parse().map_err(|_| format!("bad exponent in `{s}`"))?;
        return base
            .checked_pow(exp)
            .ok_or_else(|| format!("`{s}` overflows"));
    }
    s.parse().map_err(|_| format!("bad number `{s}`"))
}

/// Parses `a`, `a:b` (doubling from `a` up to `b`), `a:b:f` (multiplying by
/// `f`) or `a/b/c` (explicit list).
fn parse_axis(s: &str) -> std::result::Result<Vec<usize>, String> {
    if s.contains('/') {
        return s.split('/').map(parse_number).collect();
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [one] => Ok(vec![parse_number(one)?]),
        [a, b] | [a, b, _] => {
            let (a, b) = (parse_number(a)?, parse_number(b)?);
            let factor = match parts.get(2) {
                Some(f) => parse_number(f)?,
                None => 2,
            };
            if factor < 2 || a == 0 || a > b {
                return Err(format!("empty or unbounded range `{s}`"));
            }
            let mut out = vec![a];
            while let Some(next) = out.last().unwrap().checked_mul(factor).filter(|&x| x <= b) {
                out.push(next);
            }
            Ok(out)
        }
        _ => Err(format!("bad range `{s}`")),
    }
}

impl FromStr for Grid {
    type Err = String;

    /// Accepts `n=<axis>,k=<axis>` where `k` may also be `n`, for example
    /// `n=2^10:2^16:4,k=0/1/64` or `n=1024:8192,k=n`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut ns = None;
        let mut ks = None;
        for part in s.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got `{part}`"))?;
            match key.trim() {
                "n" => ns = Some(parse_axis(value)?),
                "k" if value.trim() == "n" => ks = Some(KAxis::SameAsN),
                "k" => ks = Some(KAxis::Values(parse_axis(value)?)),
                other => return Err(format!("unknown grid key `{other}`")),
            }
        }
        let ns = ns.ok_or("grid needs n=...")?;
        if ns.contains(&0) {
            return Err("n must be positive".into());
        }
        Ok(Grid {
            ns,
            ks: ks.ok_or("grid needs k=...")?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub structure: Structure,
    pub mode: Mode,
    pub strategy: SelectionStrategy,
    pub seed: u64,
    pub grid: Grid,
    pub reps: usize,
    pub parallelism: Parallelism,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub structure: Structure,
    pub mode: Mode,
    pub n: usize,
    pub k: usize,
    /// Fastest of the repetitions.
    pub wall: Duration,
    pub comparisons: u64,
    pub elements_partitioned: u64,
    pub cascade_steps: u64,
    pub nodes_visited: u64,
    pub splits: u64,
    /// Bits of split information (compact tree) at the end of the run.
    pub peak_bits: u64,
    /// Memory held by the structure at the end of the run, in words.
    pub peak_words: u64,
    pub rebuild_elements: u64,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str =
        "structure,mode,n,k,wall_ms,comparisons,elements_partitioned,\
cascade_steps,nodes_visited,splits,peak_bits,peak_words,rebuild_elements";

    fn wall_ms(&self) -> f64 {
        self.wall.as_secs_f64() * 1e3
    }

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{:.3},{},{},{},{},{},{},{},{}",
            self.structure,
            self.mode,
            self.n,
            self.k,
            self.wall_ms(),
            self.comparisons,
            self.elements_partitioned,
            self.cascade_steps,
            self.nodes_visited,
            self.splits,
            self.peak_bits,
            self.peak_words,
            self.rebuild_elements
        )
    }
}

struct Measured {
    stats: Stats,
    peak_bits: u64,
    peak_words: u64,
}

fn cell_seed(seed: u64, n: usize, k: usize) -> u64 {
    splitmix64(seed ^ splitmix64(n as u64) ^ splitmix64(k as u64).rotate_left(17))
}

fn run_cell(cfg: &BenchConfig, n: usize, k: usize) -> Result<Measured> {
    let seed = cell_seed(cfg.seed, n, k);
    let values = datagen::random_reals(n, seed);
    let queries = datagen::random_queries(n, k, true, seed);
    let strategy = match cfg.strategy {
        SelectionStrategy::Randomized { .. } => SelectionStrategy::Randomized { seed },
        s => s,
    };
    // parallel reps already saturate the pool; builds stay sequential inside them
    let inner = if cfg.reps > 1 {
        Parallelism::Sequential
    } else {
        cfg.parallelism
    };
    let measured = match cfg.structure {
        Structure::Cascade => {
            let mut tree = CascadeTree::with_strategy(&values, strategy)?;
            if cfg.mode == Mode::Eager {
                tree.build_eager(inner);
            }
            for q in &queries {
                tree.query(q)?;
            }
            Measured {
                stats: tree.stats().clone(),
                peak_bits: 0,
                peak_words: tree.memory_words() as u64,
            }
        }
        Structure::Compact => {
            let mut tree = CompactTree::with_strategy(&values, strategy)?;
            if cfg.mode == Mode::Eager {
                tree.build_eager(inner);
            }
            for q in &queries {
                tree.query(q)?;
            }
            let space = tree.space_report();
            Measured {
                stats: tree.stats().clone(),
                peak_bits: space.payload_bits,
                peak_words: space.total_words,
            }
        }
        Structure::Dynamic => {
            let (mut tree, handles) = DynamicTree::from_values(&values)?;
            for q in &queries {
                tree.query(handles[q.left - 1], handles[q.right - 1], q.rank)?;
            }
            Measured {
                stats: tree.stats().clone(),
                peak_bits: 0,
                peak_words: tree.memory_words() as u64,
            }
        }
        Structure::Oracle => {
            let elements = elements_of(&values)?;
            let mut stats = Stats::default();
            for q in &queries {
                let (_, c) = oracle_select_counted(&elements, q)?;
                stats.comparisons += c;
                stats.queries += 1;
            }
            Measured {
                stats,
                peak_bits: 0,
                peak_words: (elements.len() * std::mem::size_of_val(&elements[0])).div_ceil(8)
                    as u64,
            }
        }
    };
    Ok(measured)
}

/// Runs every cell `reps` times (at least once) and keeps the fastest run.
pub fn run_grid(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for (n, k) in cfg.grid.cells() {
        let reps = cfg.reps.max(1);
        let runs = par::map_vec(cfg.parallelism, (0..reps).collect(), |_| {
            let start = Instant::now();
            let m = run_cell(cfg, n, k);
            (start.elapsed(), m)
        });
        let mut best: Option<(Duration, Measured)> = None;
        for (wall, m) in runs {
            let m = m?;
            if let Some((_, prev)) = &best {
                debug_assert_eq!(prev.stats, m.stats, "counters must not depend on the run");
            }
            if best.as_ref().is_none_or(|(w, _)| wall < *w) {
                best = Some((wall, m));
            }
        }
        let (wall, m) = best.expect("at least one repetition");
        rows.push(BenchRow {
            structure: cfg.structure,
            mode: cfg.mode,
            n,
            k,
            wall,
            comparisons: m.stats.comparisons,
            elements_partitioned: m.stats.elements_partitioned,
            cascade_steps: m.stats.cascade_steps,
            nodes_visited: m.stats.nodes_visited,
            splits: m.stats.total_splits(),
            peak_bits: m.peak_bits,
            peak_words: m.peak_words,
            rebuild_elements: m.stats.rebuild_elements,
        });
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BenchRow::CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv());
        out.push('\n');
    }
    out
}

/// Whitespace-separated columns with one blank-line-separated block per `n`,
/// ready for `plot 'file' using 2:6 with linespoints`.
pub fn to_gnuplot(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "# n k wall_ms comparisons elements_partitioned cascade_steps nodes_visited splits peak_bits peak_words rebuild_elements\n",
    );
    let mut last_n = None;
    for row in rows {
        if last_n.is_some_and(|n| n != row.n) {
            out.push_str("\n\n");
        }
        last_n = Some(row.n);
        let _ = writeln!(
            out,
            "{} {} {:.3} {} {} {} {} {} {} {} {}",
            row.n,
            row.k,
            row.wall_ms(),
            row.comparisons,
            row.elements_partitioned,
            row.cascade_steps,
            row.nodes_visited,
            row.splits,
            row.peak_bits,
            row.peak_words,
            row.rebuild_elements
        );
    }
    out
}
