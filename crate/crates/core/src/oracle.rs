//! Brute-force reference answers.

use crate::error::Result;
use crate::types::{total_cmp, Element, RangeQuery, Value};

/// Copies `A[L..=R]`, sorts it under [`total_cmp`] and picks the requested rank.
pub fn oracle_select<V: Value>(elements: &[Element<V>], q: &RangeQuery) -> Result<Element<V>> {
    let (picked, _) = oracle_select_counted(elements, q)?;
    Ok(picked)
}

/// Same as [`oracle_select`], also returning the number of comparisons the sort used.
pub fn oracle_select_counted<V: Value>(
    elements: &[Element<V>],
    q: &RangeQuery,
) -> Result<(Element<V>, u64)> {
    let p = q.resolve(elements.len())?;
    let mut window = elements[q.left - 1..q.right].to_vec();
    let mut comparisons = 0u64;
    window.sort_unstable_by(|a, b| {
        comparisons += 1;
        total_cmp(a, b)
    });
    Ok((window[p - 1], comparisons))
}

/// Oracle over raw values (indices are assigned `1..=n`).
pub fn oracle_select_values<V: Value>(values: &[V], q: &RangeQuery) -> Result<Element<V>> {
    let elements = crate::types::elements_of(values)?;
    oracle_select(&elements, q)
}
