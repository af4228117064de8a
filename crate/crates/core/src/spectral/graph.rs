//! Primitivity of nonnegative matrices through their directed graphs.

use std::collections::VecDeque;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exactmat::IntMatrix;
use crate::recurrence::Recurrence;

fn adjacency(a: &IntMatrix) -> Result<Vec<Vec<usize>>> {
    let k = a.dim();
    let mut adj = vec![Vec::new(); k];
    for i in 0..k {
        for j in 0..k {
            let v = a.get(i, j);
            if v.is_negative() {
                return Err(Error::NegativeEntry { row: i, col: j });
            }
            if !v.is_zero() {
                adj[i].push(j);
            }
        }
    }
    Ok(adj)
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let next = level[u].unwrap() + 1;
        for &v in &adj[u] {
            if level[v].is_none() {
                level[v] = Some(next);
                queue.push_back(v);
            }
        }
    }
    level
}

/// True iff the graph of `a` is strongly connected and aperiodic.
///
/// Errors with [`Error::NegativeEntry`] on the first negative entry.
pub fn is_primitive(a: &IntMatrix) -> Result<bool> {
    let adj = adjacency(a)?;
    let k = adj.len();
    let forward = bfs_levels(&adj, 0);
    if forward.iter().any(Option::is_none) {
        return Ok(false);
    }
    let mut rev = vec![Vec::new(); k];
    for (u, out) in adj.iter().enumerate() {
        for &v in out {
            rev[v].push(u);
        }
    }
    if bfs_levels(&rev, 0).iter().any(Option::is_none) {
        return Ok(false);
    }
    let mut g = 0usize;
    for (u, out) in adj.iter().enumerate() {
        let lu = forward[u].unwrap();
        for &v in out {
            let lv = forward[v].unwrap();
            g = g.gcd(&(lu + 1).abs_diff(lv));
        }
    }
    Ok(g == 1)
}

/// Shortcut for companion matrices with nonnegative coefficients.
///
/// The companion graph has a cycle of length `k - i` for every `a_i != 0`
/// and is strongly connected iff `a_0 != 0`. Returns `None` when some
/// coefficient is negative.
pub fn is_primitive_companion(rec: &Recurrence) -> Option<bool> {
    if rec.coeffs().iter().any(Signed::is_negative) {
        return None;
    }
    if rec.a0().is_zero() {
        return Some(false);
    }
    let k = rec.order();
    let g = rec
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .fold(0usize, |g, (i, _)| g.gcd(&(k - i)));
    Some(g == 1)
}
