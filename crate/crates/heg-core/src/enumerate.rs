//! Bounded enumeration of coalitions and partitions.
//!
//! Canonical coalition order is by size first, then lexicographically on the
//! sorted member list; witnesses reported by the brute-force checkers are
//! always the first hit in this order. Partitions are produced by assigning
//! agents in index order to existing blocks or a fresh block, which emits
//! every partition with block sizes <= kappa exactly once, blocks already
//! ordered by smallest member.

use std::ops::ControlFlow;

/// Number of non-empty subsets of an `n`-element pool with size <= `max_size`,
/// saturating at `u128::MAX`.
pub fn count_subsets_up_to(n: usize, max_size: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for j in 1..=max_size.min(n) {
        binom = match binom
            .checked_mul((n - j + 1) as u128)
            .map(|b| b / j as u128)
        {
            Some(b) => b,
            None => return u128::MAX,
        };
        total = match total.checked_add(binom) {
            Some(t) => t,
            None => return u128::MAX,
        };
    }
    total
}

/// Visits every non-empty subset of `pool` with size <= `max_size` in
/// canonical order. The visitor receives the subset as a sorted slice of
/// pool elements and may break early.
pub fn for_each_subset_up_to<F>(pool: &[usize], max_size: usize, mut f: F) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    let mut buf = Vec::with_capacity(max_size.min(pool.len()));
    for size in 1..=max_size.min(pool.len()) {
        combinations(pool, size, 0, &mut buf, &mut f)?;
    }
    ControlFlow::Continue(())
}

fn combinations<F>(
    pool: &[usize],
    size: usize,
    start: usize,
    buf: &mut Vec<usize>,
    f: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    if buf.len() == size {
        return f(buf);
    }
    let remaining = size - buf.len();
    for i in start..=pool.len().saturating_sub(remaining) {
        buf.push(pool[i]);
        combinations(pool, size, i + 1, buf, f)?;
        buf.pop();
    }
    ControlFlow::Continue(())
}

/// Visits every partition of `0..n` whose blocks have size <= `kappa`.
/// Blocks are passed ordered by smallest member, members ascending.
pub fn for_each_partition<F>(n: usize, kappa: usize, mut f: F) -> ControlFlow<()>
where
    F: FnMut(&[Vec<usize>]) -> ControlFlow<()>,
{
    if n == 0 {
        return f(&[]);
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    assign(0, n, kappa, &mut blocks, &mut f)
}

fn assign<F>(
    agent: usize,
    n: usize,
    kappa: usize,
    blocks: &mut Vec<Vec<usize>>,
    f: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[Vec<usize>]) -> ControlFlow<()>,
{
    if agent == n {
        return f(blocks);
    }
    for i in 0..blocks.len() {
        if blocks[i].len() < kappa {
            blocks[i].push(agent);
            assign(agent + 1, n, kappa, blocks, f)?;
            blocks[i].pop();
        }
    }
    blocks.push(vec![agent]);
    assign(agent + 1, n, kappa, blocks, f)?;
    blocks.pop();
    ControlFlow::Continue(())
}

/// Number of partitions `for_each_partition(n, kappa, ..)` will visit.
pub fn count_partitions(n: usize, kappa: usize) -> u128 {
    let mut count = 0u128;
    let _ = for_each_partition(n, kappa, |_| {
        count += 1;
        ControlFlow::Continue(())
    });
    count
}
