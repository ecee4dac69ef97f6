//! The AP-free extremal function `r_k(ℓ)`.
//!
//! `r_k(ℓ)` is the size of the largest subset of `{0, …, ℓ-1}` containing no
//! `k`-term arithmetic progression with common difference `d ≥ 1`. Tables are
//! built incrementally: since `r_k(ℓ+1) - r_k(ℓ) ∈ {0, 1}`, each new row only
//! has to decide whether a set one larger than the previous maximum exists,
//! and every shorter row bounds how much a suffix of the ground set can add.

mod oracle;
mod search;

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Parallelism;

pub use oracle::{rk_bruteforce_oracle, rk_bruteforce_oracle_with, DEFAULT_ORACLE_CAP};
pub use search::MAX_ELL;

use search::{bit, completes_ap, find_first, from_bits, to_bits, Budget, Exhausted, Query};

/// Knobs for the branch-and-bound solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolverConfig {
    /// Maximum number of search nodes over a whole table build. `None` is
    /// unlimited.
    pub node_budget: Option<u64>,
    pub parallelism: Parallelism,
}

impl SolverConfig {
    pub fn sequential() -> Self {
        SolverConfig {
            node_budget: None,
            parallelism: Parallelism::Sequential,
        }
    }

    pub fn with_budget(mut self, nodes: u64) -> Self {
        self.node_budget = Some(nodes);
        self
    }
}

/// Does `set` contain `{a, a+d, …, a+(k-1)d}` for some `d ≥ 1`?
pub fn has_k_term_ap(set: &[u64], k: usize) -> Result<bool> {
    if k < 2 {
        return Err(Error::invalid(format!(
            "progression length k = {k} must be at least 2"
        )));
    }
    let members: HashSet<u64> = set.iter().copied().collect();
    let mut sorted: Vec<u64> = members.iter().copied().collect();
    sorted.sort_unstable();
    for (i, &a) in sorted.iter().enumerate() {
        for &b in &sorted[i + 1..] {
            let d = b - a;
            let hit = (2..k as u64).all(|j| {
                d.checked_mul(j)
                    .and_then(|step| a.checked_add(step))
                    .is_some_and(|x| members.contains(&x))
            });
            if hit {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Exact values `r_k(1..=ell_max)` with the lexicographically least extremal
/// witness for each `ℓ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RkTable {
    k: usize,
    values: Vec<usize>,
    witnesses: Vec<Vec<usize>>,
}

impl RkTable {
    /// Builds a table from raw rows (row `i` is `ℓ = i + 1`) after checking
    /// every structural invariant.
    pub fn from_rows(k: usize, values: Vec<usize>, witnesses: Vec<Vec<usize>>) -> Result<Self> {
        let table = RkTable {
            k,
            values,
            witnesses,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ell_max(&self) -> usize {
        self.values.len()
    }

    /// `r_k(ℓ)` for `ℓ = 1..=ell_max`, in order.
    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn value(&self, ell: usize) -> Option<usize> {
        ell.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }

    pub fn witness(&self, ell: usize) -> Option<&[usize]> {
        ell.checked_sub(1)
            .and_then(|i| self.witnesses.get(i))
            .map(Vec::as_slice)
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, usize, &[usize])> + '_ {
        self.values
            .iter()
            .zip(&self.witnesses)
            .enumerate()
            .map(|(i, (&v, w))| (i + 1, v, w.as_slice()))
    }

    /// Table restricted to `ℓ ≤ ell_max`.
    pub fn truncated(&self, ell_max: usize) -> RkTable {
        let n = ell_max.min(self.ell_max());
        RkTable {
            k: self.k,
            values: self.values[..n].to_vec(),
            witnesses: self.witnesses[..n].to_vec(),
        }
    }

    /// Checks step, boundary and witness invariants. Maximality is not
    /// (and cannot cheaply be) re-verified here.
    pub fn validate(&self) -> Result<()> {
        let k = self.k;
        let bad = |msg: String| Err(Error::InvalidTable(msg));
        if k < 2 {
            return bad(format!("k = {k} < 2"));
        }
        if self.values.is_empty() {
            return bad("table is empty".into());
        }
        if self.values.len() != self.witnesses.len() {
            return bad("values and witnesses differ in length".into());
        }
        if self.values.len() > MAX_ELL {
            return bad(format!("ell_max {} exceeds {MAX_ELL}", self.values.len()));
        }
        let mut prev = 0;
        for (ell, value, witness) in self.rows() {
            if value < prev || value > prev + 1 {
                return bad(format!(
                    "r({ell}) = {value} does not follow r({}) = {prev} by a step of 0 or 1",
                    ell - 1
                ));
            }
            let expected = match ell.cmp(&k) {
                std::cmp::Ordering::Less => Some(ell),
                std::cmp::Ordering::Equal => Some(k - 1),
                std::cmp::Ordering::Greater => None,
            };
            if let Some(expected) = expected {
                if value != expected {
                    return bad(format!("r({ell}) = {value}, expected {expected}"));
                }
            }
            if witness.len() != value {
                return bad(format!(
                    "witness for ell = {ell} has {} elements, expected {value}",
                    witness.len()
                ));
            }
            if witness.windows(2).any(|w| w[0] >= w[1]) || witness.last().is_some_and(|&x| x >= ell)
            {
                return bad(format!(
                    "witness for ell = {ell} is not a sorted subset of 0..{ell}"
                ));
            }
            let as_u64: Vec<u64> = witness.iter().map(|&x| x as u64).collect();
            if has_k_term_ap(&as_u64, k)? {
                return bad(format!("witness for ell = {ell} contains a {k}-term AP"));
            }
            prev = value;
        }
        Ok(())
    }

    /// Extends the table to `ell_max` rows. Shorter targets are a no-op.
    pub fn extend(&self, ell_max: usize, config: &SolverConfig) -> Result<RkTable> {
        if ell_max <= self.ell_max() {
            return Ok(self.clone());
        }
        if ell_max > MAX_ELL {
            return Err(Error::invalid(format!(
                "ell = {ell_max} exceeds the solver limit {MAX_ELL}"
            )));
        }
        let budget = Budget::new(config.node_budget);
        let mut table = self.clone();
        for ell in self.ell_max() + 1..=ell_max {
            let prev = table.values[ell - 2];
            match next_row(&table, ell, &budget, config.parallelism) {
                Ok((value, witness)) => {
                    table.values.push(value);
                    table.witnesses.push(witness);
                }
                Err(Exhausted) => {
                    return Err(Error::BudgetExhausted {
                        budget: config.node_budget.unwrap_or(u64::MAX),
                        ell,
                        lower: prev,
                        upper: prev + 1,
                        prefix: Some(Box::new(table)),
                    })
                }
            }
        }
        Ok(table)
    }

    fn seed(k: usize) -> RkTable {
        RkTable {
            k,
            values: vec![1],
            witnesses: vec![vec![0]],
        }
    }
}

/// Decides row `ell` given rows `1..ell`.
fn next_row(
    table: &RkTable,
    ell: usize,
    budget: &Budget,
    par: Parallelism,
) -> Result<(usize, Vec<usize>), Exhausted> {
    let k = table.k;
    let prev = table.values[ell - 2];
    let prev_witness = to_bits(&table.witnesses[ell - 2]);
    let last = ell - 1;

    // Any set of prev + 1 elements must use both endpoints, otherwise a
    // translate fits in {0..ell-2}. So the least such set, if the previous
    // witness extends, is that extension.
    if !completes_ap(k, prev_witness, last) {
        return Ok((prev + 1, from_bits(prev_witness | bit(last))));
    }

    let mut bound: Vec<usize> = Vec::with_capacity(ell + 1);
    bound.push(0);
    bound.extend_from_slice(&table.values[..ell - 1]);
    bound.push(prev + 1);

    let grow = Query {
        k,
        ell,
        bound: &bound,
        target: prev + 1,
        required: bit(0) | bit(last),
    };
    if let Some(set) = find_first(&grow, budget, par)? {
        return Ok((prev + 1, from_bits(set)));
    }

    bound[ell] = prev;
    let same = Query {
        k,
        ell,
        bound: &bound,
        target: prev,
        required: 0,
    };
    let set = find_first(&same, budget, par)?
        .expect("the previous witness is a candidate of the same size");
    Ok((prev, from_bits(set)))
}

/// `r_k(ℓ)` for `ℓ = 1..=ell_max`.
pub fn rk_table(k: usize, ell_max: usize, config: &SolverConfig) -> Result<RkTable> {
    if k < 2 {
        return Err(Error::invalid(format!(
            "progression length k = {k} must be at least 2"
        )));
    }
    if ell_max == 0 {
        return Err(Error::invalid("ell_max must be at least 1"));
    }
    RkTable::seed(k).extend(ell_max, config)
}

/// `r_k(ell)` and its lexicographically least witness.
pub fn rk_exact(k: usize, ell: usize, config: &SolverConfig) -> Result<(usize, Vec<usize>)> {
    let table = rk_table(k, ell, config)?;
    let witness = table.witness(ell).expect("row exists").to_vec();
    Ok((table.value(ell).expect("row exists"), witness))
}

/// The sequence `u_m = min{ℓ : r_k(ℓ) = m}` read off a table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapSequence {
    k: usize,
    /// Row count of the table the sequence came from.
    ell_max: usize,
    u: Vec<usize>,
    /// `max r_k⁻¹(m)` for every `m` whose preimage is closed within the table.
    last: Vec<usize>,
    /// True when the sequence provably has no further terms (`k = 2`).
    complete: bool,
}

impl GapSequence {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ell_max(&self) -> usize {
        self.ell_max
    }

    /// `u_1, u_2, …` (index 0 holds `u_1`).
    pub fn u(&self) -> &[usize] {
        &self.u
    }

    /// `u_m` for 1-based `m`.
    pub fn get(&self, m: usize) -> Option<usize> {
        m.checked_sub(1).and_then(|i| self.u.get(i).copied())
    }

    /// `max r_k⁻¹(m)` when it is determined by the table.
    pub fn preimage_max(&self, m: usize) -> Option<usize> {
        m.checked_sub(1).and_then(|i| self.last.get(i).copied())
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn gaps(&self) -> Vec<usize> {
        self.u.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Every `u_m ≤ limit` is known.
    pub fn covers(&self, limit: usize) -> bool {
        self.complete || limit <= self.ell_max
    }
}

/// First occurrences of each value in the table.
pub fn min_inverse(table: &RkTable) -> GapSequence {
    let mut u = Vec::new();
    let mut last = Vec::new();
    let mut prev = 0;
    for (ell, value, _) in table.rows() {
        if value != prev {
            if prev > 0 {
                last.push(ell - 1);
            }
            u.push(ell);
            prev = value;
        }
    }
    let complete = table.k == 2;
    if complete {
        // r_2 ≡ 1: the single preimage is unbounded
        last.clear();
    }
    GapSequence {
        k: table.k,
        ell_max: table.ell_max(),
        u,
        last,
        complete,
    }
}
