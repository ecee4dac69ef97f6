//! Word-sized bitset branch and bound for AP-free subsets of `{0, …, ℓ-1}`.
//!
//! Elements are decided in increasing order, include before exclude, so the
//! first set of the requested size reached by the search is the
//! lexicographically least one.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::exec::Parallelism;

/// Widest ground set the solver handles.
pub const MAX_ELL: usize = 128;

/// Below this ground-set size the search is not split across threads.
const PARALLEL_MIN_ELL: usize = 24;

/// Frontier depth for parallel splitting.
const SPLIT_DEPTH: usize = 14;

const FLUSH_EVERY: u64 = 1 << 12;

#[inline]
pub(crate) fn bit(e: usize) -> u128 {
    1u128 << e
}

#[inline]
fn low_mask(n: usize) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// Elements that would become the last term of a `k`-term AP once `e` joins
/// `chosen`. All elements of `chosen` are below `e`.
#[inline]
pub(crate) fn newly_forbidden(k: usize, chosen: u128, e: usize) -> u128 {
    match k {
        2 => !low_mask(e + 1),
        3 => {
            // reflect chosen through e: a -> 2e - a
            let rev = chosen.reverse_bits();
            let target = 2 * e;
            if target >= 127 {
                rev.checked_shl((target - 127) as u32).unwrap_or(0)
            } else {
                rev >> (127 - target)
            }
        }
        _ => {
            let mut out = 0u128;
            let mut d = 1;
            while (k - 2) * d <= e {
                if e + d >= MAX_ELL {
                    break;
                }
                if (1..=k - 2).all(|j| chosen & bit(e - j * d) != 0) {
                    out |= bit(e + d);
                }
                d += 1;
            }
            out
        }
    }
}

/// Does `e` complete a `k`-term AP whose other terms lie in `chosen`?
pub(crate) fn completes_ap(k: usize, chosen: u128, e: usize) -> bool {
    let mut d = 1;
    while (k - 1) * d <= e {
        if (1..k).all(|j| chosen & bit(e - j * d) != 0) {
            return true;
        }
        d += 1;
    }
    false
}

#[derive(Debug)]
pub(crate) struct Exhausted;

pub(crate) struct Budget {
    limit: u64,
    used: AtomicU64,
}

impl Budget {
    pub(crate) fn new(limit: Option<u64>) -> Self {
        Budget {
            limit: limit.unwrap_or(u64::MAX),
            used: AtomicU64::new(0),
        }
    }

    fn charge(&self, nodes: u64) -> Result<(), Exhausted> {
        let before = self.used.fetch_add(nodes, Ordering::Relaxed);
        if before.saturating_add(nodes) > self.limit {
            Err(Exhausted)
        } else {
            Ok(())
        }
    }
}

/// One lexicographic "find the first AP-free set of exactly `target`
/// elements" query.
pub(crate) struct Query<'a> {
    pub k: usize,
    pub ell: usize,
    /// `bound[len]` is an upper bound on `r_k(len)` for `len` in `0..=ell`.
    pub bound: &'a [usize],
    pub target: usize,
    /// Elements every solution must contain.
    pub required: u128,
}

#[derive(Clone, Copy)]
struct Node {
    e: usize,
    chosen: u128,
    count: usize,
    forbidden: u128,
}

struct Walker<'q, 'b> {
    q: &'q Query<'q>,
    budget: &'b Budget,
    ground: u128,
    pending: u64,
}

enum Step {
    Found(u128),
    Prune,
    Branch,
}

impl<'q, 'b> Walker<'q, 'b> {
    fn new(q: &'q Query<'q>, budget: &'b Budget) -> Self {
        Walker {
            q,
            budget,
            ground: low_mask(q.ell),
            pending: 0,
        }
    }

    fn tick(&mut self) -> Result<(), Exhausted> {
        self.pending += 1;
        if self.pending >= FLUSH_EVERY {
            let n = std::mem::take(&mut self.pending);
            self.budget.charge(n)?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<(), Exhausted> {
        let n = std::mem::take(&mut self.pending);
        self.budget.charge(n)
    }

    fn classify(&self, node: &Node) -> Step {
        let q = self.q;
        if node.count == q.target {
            return if q.required & !node.chosen == 0 {
                Step::Found(node.chosen)
            } else {
                Step::Prune
            };
        }
        if node.e >= q.ell || node.forbidden & q.required != 0 {
            return Step::Prune;
        }
        let rest = self.ground & !low_mask(node.e);
        let open = (rest & !node.forbidden).count_ones() as usize;
        let cap = open.min(q.bound[q.ell - node.e]);
        if node.count + cap < q.target {
            Step::Prune
        } else {
            Step::Branch
        }
    }

    fn children(&self, node: &Node) -> (Option<Node>, Option<Node>) {
        let e = node.e;
        let include = (node.forbidden & bit(e) == 0).then(|| Node {
            e: e + 1,
            chosen: node.chosen | bit(e),
            count: node.count + 1,
            forbidden: (node.forbidden | newly_forbidden(self.q.k, node.chosen, e)) & self.ground,
        });
        let exclude = (self.q.required & bit(e) == 0).then(|| Node { e: e + 1, ..*node });
        (include, exclude)
    }

    fn dfs(&mut self, node: Node) -> Result<Option<u128>, Exhausted> {
        self.tick()?;
        match self.classify(&node) {
            Step::Found(set) => Ok(Some(set)),
            Step::Prune => Ok(None),
            Step::Branch => {
                let (include, exclude) = self.children(&node);
                if let Some(child) = include {
                    if let Some(found) = self.dfs(child)? {
                        return Ok(Some(found));
                    }
                }
                match exclude {
                    Some(child) => self.dfs(child),
                    None => Ok(None),
                }
            }
        }
    }

    /// Collects the open nodes at depth `split` in lexicographic order.
    /// Returns early with a solution found above the split depth.
    fn frontier(
        &mut self,
        node: Node,
        split: usize,
        out: &mut Vec<Node>,
    ) -> Result<Option<u128>, Exhausted> {
        self.tick()?;
        match self.classify(&node) {
            Step::Found(set) => Ok(Some(set)),
            Step::Prune => Ok(None),
            Step::Branch if node.e >= split => {
                out.push(node);
                Ok(None)
            }
            Step::Branch => {
                let (include, exclude) = self.children(&node);
                for child in [include, exclude].into_iter().flatten() {
                    if let Some(found) = self.frontier(child, split, out)? {
                        return Ok(Some(found));
                    }
                }
                Ok(None)
            }
        }
    }
}

/// Lexicographically least AP-free subset of `{0..ell-1}` with exactly
/// `q.target` elements that contains `q.required`, or `None`.
pub(crate) fn find_first(
    q: &Query<'_>,
    budget: &Budget,
    par: Parallelism,
) -> Result<Option<u128>, Exhausted> {
    debug_assert!(q.ell <= MAX_ELL && q.bound.len() > q.ell);
    let root = Node {
        e: 0,
        chosen: 0,
        count: 0,
        forbidden: 0,
    };
    let mut walker = Walker::new(q, budget);

    if !par.is_parallel() || q.ell < PARALLEL_MIN_ELL {
        let res = walker.dfs(root);
        walker.flush()?;
        return res;
    }

    let mut frontier = Vec::new();
    let early = walker.frontier(root, SPLIT_DEPTH.min(q.ell), &mut frontier);
    walker.flush()?;
    if let Some(found) = early? {
        return Ok(Some(found));
    }

    // Each task yields Some(Ok) on a hit, Some(Err) when the budget runs
    // out and None on a miss; the first Some in frontier order wins.
    par.find_map_first(frontier, |node| {
        let mut w = Walker::new(q, budget);
        let res = w.dfs(node).and_then(|r| w.flush().map(|_| r));
        match res {
            Ok(Some(set)) => Some(Ok(set)),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        }
    })
    .transpose()
}

pub(crate) fn to_bits(set: &[usize]) -> u128 {
    set.iter().fold(0, |acc, &e| acc | bit(e))
}

pub(crate) fn from_bits(mut bits: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(bits.count_ones() as usize);
    while bits != 0 {
        let e = bits.trailing_zeros() as usize;
        out.push(e);
        bits &= bits - 1;
    }
    out
}
