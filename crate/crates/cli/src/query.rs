//! Streaming query front end.
//!
//! Answers are written and flushed before the next input line is read, so
//! a producer may wait for each answer before sending the next query.

use std::io::{BufRead, Write};
use std::str::FromStr;

use range_median::datagen::Op;
use range_median::oracle::oracle_select;
use range_median::types::elements_of;
use range_median::{
    CascadeTree, CompactTree, DynamicTree, Element, ElementHandle, Parallelism, RangeQuery,
    SelectionStrategy, Value,
};

use crate::args::{Mode, Structure};
use crate::Failure;

enum Engine<V> {
    Cascade(CascadeTree<V>),
    Compact(CompactTree<V>),
    Oracle(Vec<Element<V>>),
}

impl<V: Value> Engine<V> {
    fn build(
        structure: Structure,
        mode: Mode,
        strategy: SelectionStrategy,
        values: &[V],
    ) -> Result<Self, Failure> {
        let input = |e: range_median::Error| Failure::Input(e.to_string());
        let engine = match structure {
            Structure::Cascade => {
                let mut tree = CascadeTree::with_strategy(values, strategy).map_err(input)?;
                if mode == Mode::Eager {
                    tree.build_eager(Parallelism::default());
                }
                Engine::Cascade(tree)
            }
            Structure::Compact => {
                let mut tree = CompactTree::with_strategy(values, strategy).map_err(input)?;
                if mode == Mode::Eager {
                    tree.build_eager(Parallelism::default());
                }
                Engine::Compact(tree)
            }
            Structure::Oracle => Engine::Oracle(elements_of(values).map_err(input)?),
            Structure::Dynamic => unreachable!("dynamic input is an operation stream"),
        };
        Ok(engine)
    }

    fn query(&mut self, q: &RangeQuery) -> range_median::Result<Element<V>> {
        match self {
            Engine::Cascade(t) => t.query(q),
            Engine::Compact(t) => t.query(q),
            Engine::Oracle(e) => oracle_select(e, q),
        }
    }
}

struct Lines<R> {
    reader: R,
    number: usize,
    buf: String,
}

impl<R: BufRead> Lines<R> {
    fn new(reader: R) -> Self {
        Lines {
            reader,
            number: 0,
            buf: String::new(),
        }
    }

    /// Next line that is not blank, with its 1-based line number.
    fn next_nonblank(&mut self) -> Result<Option<(usize, &str)>, Failure> {
        loop {
            self.buf.clear();
            let read = self
                .reader
                .read_line(&mut self.buf)
                .map_err(|e| Failure::Input(format!("read failed: {e}")))?;
            if read == 0 {
                return Ok(None);
            }
            self.number += 1;
            if !self.buf.trim().is_empty() {
                return Ok(Some((self.number, self.buf.trim())));
            }
        }
    }
}

fn line_error(line: usize, msg: impl std::fmt::Display) -> Failure {
    Failure::Input(format!("line {line}: {msg}"))
}

fn answer(out: &mut impl Write, text: std::fmt::Arguments<'_>) -> Result<(), Failure> {
    out.write_fmt(text)
        .and_then(|_| out.write_all(b"\n"))
        .and_then(|_| out.flush())
        .map_err(|e| Failure::Io(format!("write failed: {e}")))
}

fn parse_query(line: usize, text: &str) -> Result<RangeQuery, Failure> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| line_error(line, format!("`{s}` is not a non-negative integer")))
    };
    match fields.as_slice() {
        [l, r] => Ok(RangeQuery::median(num(l)?, num(r)?)),
        [l, r, p] => Ok(RangeQuery::with_rank(num(l)?, num(r)?, num(p)?)),
        _ => Err(line_error(line, "expected `L R` or `L R p`")),
    }
}

fn parse_values<V: FromStr + Value>(line: usize, tokens: &[&str]) -> Result<Vec<V>, Failure> {
    let mut values = Vec::with_capacity(tokens.len());
    for tok in tokens {
        let v: V = tok
            .parse()
            .map_err(|_| line_error(line, format!("`{tok}` is not a number")))?;
        if v.is_nan() {
            return Err(line_error(line, "NaN is not allowed"));
        }
        values.push(v);
    }
    Ok(values)
}

/// Static input: `n`, then the values, then one query per line.
pub fn run_static(
    structure: Structure,
    mode: Mode,
    strategy: SelectionStrategy,
    input: impl BufRead,
    out: &mut impl Write,
) -> Result<(), Failure> {
    let mut lines = Lines::new(input);
    let (ln, text) = lines
        .next_nonblank()?
        .ok_or_else(|| Failure::Input("empty input: expected the array length".into()))?;
    let n: usize = text
        .parse()
        .map_err(|_| line_error(ln, format!("`{text}` is not an array length")))?;
    let (ln, text) = lines
        .next_nonblank()?
        .ok_or_else(|| Failure::Input("missing the line of values".into()))?;
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() != n {
        return Err(line_error(
            ln,
            format!("expected {n} values, found {}", tokens.len()),
        ));
    }
    if tokens.iter().all(|t| t.parse::<i64>().is_ok()) {
        let values = parse_values::<i64>(ln, &tokens)?;
        serve(
            Engine::build(structure, mode, strategy, &values)?,
            lines,
            out,
        )
    } else {
        let values = parse_values::<f64>(ln, &tokens)?;
        serve(
            Engine::build(structure, mode, strategy, &values)?,
            lines,
            out,
        )
    }
}

fn serve<V: Value, R: BufRead>(
    mut engine: Engine<V>,
    mut lines: Lines<R>,
    out: &mut impl Write,
) -> Result<(), Failure> {
    while let Some((ln, text)) = lines.next_nonblank()? {
        let q = parse_query(ln, text)?;
        match engine.query(&q) {
            Ok(e) => answer(out, format_args!("{}\t{}", e.value, e.index))?,
            Err(e) => answer(out, format_args!("error: line {ln}: {e}"))?,
        }
    }
    Ok(())
}

/// Operation stream against the dynamic structure. Only queries produce
/// output; rejected operations print an error line and are skipped.
pub fn run_dynamic(input: impl BufRead, out: &mut impl Write) -> Result<(), Failure> {
    let mut lines = Lines::new(input);
    let mut tree = DynamicTree::<f64>::new();
    // element id `i` is stored at index `i - 1`
    let mut ids: Vec<ElementHandle> = Vec::new();
    let lookup = |ids: &[ElementHandle], id: usize| {
        id.checked_sub(1)
            .and_then(|i| ids.get(i).copied())
            .ok_or_else(|| format!("unknown element id {id}"))
    };
    while let Some((ln, text)) = lines.next_nonblank()? {
        let op = Op::<f64>::parse(text).map_err(|e| line_error(ln, e))?;
        if matches!(op, Op::Insert { value, .. } if value.is_nan()) {
            return Err(line_error(ln, "NaN is not allowed"));
        }
        let result: Result<Option<f64>, String> = match op {
            Op::Insert { after, value } => {
                let anchor = if after == 0 {
                    Ok(None)
                } else {
                    lookup(&ids, after).map(Some)
                };
                anchor
                    .and_then(|a| tree.insert(a, value).map_err(|e| e.to_string()))
                    .map(|h| {
                        ids.push(h);
                        None
                    })
            }
            Op::Delete { id } => lookup(&ids, id)
                .and_then(|h| tree.delete(h).map_err(|e| e.to_string()))
                .map(|_| None),
            Op::Query { from, to, rank } => lookup(&ids, from)
                .and_then(|a| Ok((a, lookup(&ids, to)?)))
                .and_then(|(a, b)| tree.query(a, b, rank).map_err(|e| e.to_string()))
                .map(Some),
        };
        match result {
            Ok(Some(v)) => answer(out, format_args!("{v}"))?,
            Ok(None) => {}
            Err(e) => answer(out, format_args!("error: line {ln}: {e}"))?,
        }
    }
    Ok(())
}
