//! Seeded generators for arrays, query batches, list operation streams and
//! images, plus the text formats they are exchanged in.
//!
//! Static instance format: the first line holds `n`, the second line the `n`
//! values, and every further line one query `L R [p]`.
//!
//! Operation stream format, one operation per line:
//!
//! ```text
//! I <after-id|0> <value>   insert after element <after-id>, or at the front
//! D <id>                   delete
//! Q <id> <id> [p]          rank-p element between two elements
//! ```
//!
//! Element ids count insertions from 1.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::median_filter::GrayImage;
use crate::types::RangeQuery;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform integers in `0..range`; small ranges produce many ties.
pub fn random_ints(n: usize, range: i64, seed: u64) -> Vec<i64> {
    let mut rng = rng(seed);
    (0..n).map(|_| rng.gen_range(0..range)).collect()
}

/// Uniform doubles in `[0, 1)` rounded to three decimals.
pub fn random_reals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng(seed);
    (0..n)
        .map(|_| (rng.gen::<f64>() * 1000.0).floor() / 1000.0)
        .collect()
}

/// `k` uniformly random ranges over `1..=n`. With `random_rank` each query
/// asks for a uniform rank, otherwise for the lower median.
pub fn random_queries(n: usize, k: usize, random_rank: bool, seed: u64) -> Vec<RangeQuery> {
    assert!(n > 0 || k == 0, "queries need a non-empty array");
    let mut rng = rng(seed ^ 0x0005_eed0_f9e7);
    (0..k)
        .map(|_| {
            let a = rng.gen_range(1..=n);
            let b = rng.gen_range(1..=n);
            let (left, right) = (a.min(b), a.max(b));
            if random_rank {
                RangeQuery::with_rank(left, right, rng.gen_range(1..=right - left + 1))
            } else {
                RangeQuery::median(left, right)
            }
        })
        .collect()
}

pub fn format_static<V: fmt::Display>(values: &[V], queries: &[RangeQuery]) -> String {
    let mut out = format!("{}\n", values.len());
    let row: Vec<String> = values.iter().map(ToString::to_string).collect();
    out.push_str(&row.join(" "));
    out.push('\n');
    for q in queries {
        out.push_str(&q.to_string());
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum Op<V> {
    Insert {
        after: usize,
        value: V,
    },
    Delete {
        id: usize,
    },
    Query {
        from: usize,
        to: usize,
        rank: Option<usize>,
    },
}

impl<V: fmt::Display> fmt::Display for Op<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Insert { after, value } => write!(f, "I {after} {value}"),
            Op::Delete { id } => write!(f, "D {id}"),
            Op::Query {
                from,
                to,
                rank: None,
            } => write!(f, "Q {from} {to}"),
            Op::Query {
                from,
                to,
                rank: Some(p),
            } => write!(f, "Q {from} {to} {p}"),
        }
    }
}

impl<V: std::str::FromStr> Op<V> {
    pub fn parse(line: &str) -> Result<Self, String> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| format!("bad number `{s}`"));
        match fields.as_slice() {
            ["I", after, value] => Ok(Op::Insert {
                after: num(after)?,
                value: value.parse().map_err(|_| format!("bad value `{value}`"))?,
            }),
            ["D", id] => Ok(Op::Delete { id: num(id)? }),
            ["Q", from, to] => Ok(Op::Query {
                from: num(from)?,
                to: num(to)?,
                rank: None,
            }),
            ["Q", from, to, p] => Ok(Op::Query {
                from: num(from)?,
                to: num(to)?,
                rank: Some(num(p)?),
            }),
            _ => Err(format!("unrecognised operation `{line}`")),
        }
    }
}

/// A valid stream of `count` operations: about 45% inserts, 20% deletes and
/// 35% queries. Queries always name two live elements in list order.
pub fn random_ops(count: usize, value_range: i64, seed: u64) -> Vec<Op<i64>> {
    let mut rng = rng(seed ^ 0x0b5_7ea4);
    let mut list: Vec<usize> = Vec::new();
    let mut next_id = 1;
    let mut ops = Vec::with_capacity(count);
    for _ in 0..count {
        let roll = rng.gen_range(0..20);
        if list.is_empty() || roll < 9 {
            let pos = rng.gen_range(0..=list.len());
            let after = if pos == 0 { 0 } else { list[pos - 1] };
            list.insert(pos, next_id);
            next_id += 1;
            ops.push(Op::Insert {
                after,
                value: rng.gen_range(0..value_range),
            });
        } else if roll < 13 {
            let pos = rng.gen_range(0..list.len());
            ops.push(Op::Delete {
                id: list.remove(pos),
            });
        } else {
            let a = rng.gen_range(0..list.len());
            let b = rng.gen_range(a..list.len());
            let rank = rng.gen_bool(0.5).then(|| rng.gen_range(1..=b - a + 1));
            ops.push(Op::Query {
                from: list[a],
                to: list[b],
                rank,
            });
        }
    }
    ops
}

pub fn random_image(width: usize, height: usize, maxval: u16, seed: u64) -> GrayImage {
    let mut rng = rng(seed ^ 0x1_3a6e);
    let pixels = (0..width * height)
        .map(|_| rng.gen_range(0..=maxval))
        .collect();
    GrayImage::new(width, height, maxval, pixels).expect("generated image is well formed")
}
