//! `g_k^(s)(n)`: the largest subset of `{1, …, n}` with no `k`-term geometric
//! progression whose ratio is a power of `s`.
//!
//! Writing `a = b·s^v` with `s ∤ b` splits `{1, …, n}` into chains
//! `T(b) = {b, b·s, b·s², …} ∩ [1, n]`. A progression with ratio `s^d` lives in
//! one chain and its exponents form a `k`-term AP, so each chain of length `ℓ`
//! contributes exactly `r_k(ℓ)` and `g` is a sum over chain lengths.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::apfree::RkTable;
use crate::constant::count_nondivisible;
use crate::error::{Error, Result};
use crate::exec::Parallelism;

pub const DEFAULT_G_ORACLE_CAP: u64 = 24;

/// Above this `n`, per-chain breakdowns are not materialised.
pub const DIRECT_LIMIT: u64 = 100_000;

/// Largest `n` for which [`g_witness`] builds an explicit set.
pub const WITNESS_LIMIT: u64 = 10_000_000;

fn check_base(s: u64) -> Result<()> {
    if s < 2 {
        return Err(Error::invalid(format!(
            "ratio base s = {s} must be at least 2"
        )));
    }
    Ok(())
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::invalid(format!(
            "progression length k = {k} must be at least 2"
        )));
    }
    Ok(())
}

/// Largest `i ≥ 0` with `b·s^i ≤ n`, in integer arithmetic.
pub fn ilog(s: u64, n: u64, b: u64) -> Result<u32> {
    check_base(s)?;
    if b == 0 || b > n {
        return Err(Error::invalid(format!(
            "need 1 <= b <= n, got b = {b}, n = {n}"
        )));
    }
    let mut i = 0;
    let mut t = b;
    while let Some(next) = t.checked_mul(s) {
        if next > n {
            break;
        }
        t = next;
        i += 1;
    }
    Ok(i)
}

/// The chains `T(b)` of `{1, …, n}`, indexed by their roots `b` (`s ∤ b`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainPartition {
    pub n: u64,
    pub s: u64,
    pub roots: Vec<u64>,
    /// `1 + ilog(s, n, b)` for each root, aligned with `roots`.
    pub chain_lengths: Vec<u32>,
}

impl ChainPartition {
    pub fn total(&self) -> u64 {
        self.chain_lengths.iter().map(|&l| l as u64).sum()
    }

    /// Elements of the chain rooted at `roots[idx]`.
    pub fn chain(&self, idx: usize) -> Vec<u64> {
        let b = self.roots[idx];
        std::iter::successors(Some(b), |&t| t.checked_mul(self.s).filter(|&x| x <= self.n))
            .collect()
    }
}

pub fn chain_partition(n: u64, s: u64) -> Result<ChainPartition> {
    check_base(s)?;
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let roots: Vec<u64> = (1..=n).filter(|b| b % s != 0).collect();
    let chain_lengths = roots
        .iter()
        .map(|&b| ilog(s, n, b).map(|i| i + 1))
        .collect::<Result<_>>()?;
    Ok(ChainPartition {
        n,
        s,
        roots,
        chain_lengths,
    })
}

/// Roots sharing one chain length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LengthGroup {
    pub ell: usize,
    pub roots: u64,
    /// `r_k(ell)`, the contribution of each such chain.
    pub per_chain: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GResult {
    pub k: usize,
    pub s: u64,
    pub n: u64,
    pub value: u64,
    pub per_length: Vec<LengthGroup>,
    /// `(b, r_k(chain length))` for every root; only for `n ≤ DIRECT_LIMIT`.
    pub per_chain: Option<Vec<(u64, usize)>>,
    pub witness: Option<Vec<u64>>,
}

/// `1 + ⌊log_s n⌋`, the longest chain length in `{1..n}`.
pub fn required_depth(s: u64, n: u64) -> Result<usize> {
    Ok(ilog(s, n, 1)? as usize + 1)
}

fn check_table(k: usize, s: u64, n: u64, table: &RkTable) -> Result<usize> {
    check_k(k)?;
    check_base(s)?;
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if table.k() != k {
        return Err(Error::invalid(format!(
            "table is for k = {}, requested k = {k}",
            table.k()
        )));
    }
    let depth = required_depth(s, n)?;
    if table.ell_max() < depth {
        return Err(Error::TableInsufficient {
            k,
            required: depth,
            available: table.ell_max(),
        });
    }
    Ok(depth)
}

/// Root counts per chain length from interval counts: a root has chain length
/// `ℓ` exactly when `n/s^ℓ < b ≤ n/s^(ℓ-1)`.
fn grouped(s: u64, n: u64, depth: usize, table: &RkTable) -> Result<Vec<LengthGroup>> {
    let n_big = BigInt::from(n);
    let mut groups = Vec::with_capacity(depth);
    let mut hi_den = BigInt::from(1u32);
    for ell in 1..=depth {
        let lo_den = &hi_den * s;
        let lo = BigRational::new(n_big.clone(), lo_den.clone());
        let hi = BigRational::new(n_big.clone(), hi_den);
        let roots = count_nondivisible(&lo, &hi, s)?
            .to_u64()
            .ok_or_else(|| Error::Overflow("root count exceeds u64".into()))?;
        groups.push(LengthGroup {
            ell,
            roots,
            per_chain: table.value(ell).expect("depth checked"),
        });
        hi_den = lo_den;
    }
    Ok(groups)
}

fn sum_groups(groups: &[LengthGroup]) -> Result<u64> {
    groups.iter().try_fold(0u64, |acc, g| {
        g.roots
            .checked_mul(g.per_chain as u64)
            .and_then(|c| acc.checked_add(c))
            .ok_or_else(|| Error::Overflow("g value exceeds u64".into()))
    })
}

/// `Σ_b r_k(1 + ilog(s, n, b))` by iterating every root.
pub fn g_direct(k: usize, s: u64, n: u64, table: &RkTable) -> Result<Vec<(u64, usize)>> {
    check_table(k, s, n, table)?;
    (1..=n)
        .filter(|b| b % s != 0)
        .map(|b| {
            let ell = ilog(s, n, b)? as usize + 1;
            Ok((b, table.value(ell).expect("depth checked")))
        })
        .collect()
}

/// `g_k^(s)(n)` via the chain decomposition. Runs in `O(log_s n)` table
/// lookups; for `n ≤ DIRECT_LIMIT` the per-chain breakdown is filled in too.
pub fn g_formula(k: usize, s: u64, n: u64, table: &RkTable) -> Result<GResult> {
    let depth = check_table(k, s, n, table)?;
    let per_length = grouped(s, n, depth, table)?;
    let value = sum_groups(&per_length)?;
    let per_chain = if n <= DIRECT_LIMIT {
        let chains = g_direct(k, s, n, table)?;
        debug_assert_eq!(chains.iter().map(|&(_, r)| r as u64).sum::<u64>(), value);
        Some(chains)
    } else {
        None
    };
    Ok(GResult {
        k,
        s,
        n,
        value,
        per_length,
        per_chain,
        witness: None,
    })
}

/// An extremal set: each chain's exponents follow the table's AP-free
/// witness for its length.
pub fn g_witness(k: usize, s: u64, n: u64, table: &RkTable) -> Result<Vec<u64>> {
    check_table(k, s, n, table)?;
    if n > WITNESS_LIMIT {
        return Err(Error::invalid(format!(
            "explicit witness for n = {n} is too large (limit {WITNESS_LIMIT})"
        )));
    }
    let mut out = Vec::new();
    for b in (1..=n).filter(|b| b % s != 0) {
        let ell = ilog(s, n, b)? as usize + 1;
        for &i in table.witness(ell).expect("depth checked") {
            // b·s^i ≤ n for i < ell, so no overflow
            out.push(b * s.pow(i as u32));
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Is there `a` in `set` and `d ≥ 1` with `a·s^(dj)` in `set` for
/// `j = 0..k`?
pub fn has_k_term_gp(set: &[u64], k: usize, s: u64) -> Result<bool> {
    check_k(k)?;
    check_base(s)?;
    let members: HashSet<u64> = set.iter().copied().collect();
    let Some(&top) = members.iter().max() else {
        return Ok(false);
    };
    for &a in &members {
        if a == 0 {
            continue;
        }
        let mut ratio = s;
        'ratios: loop {
            let mut t = a;
            let mut len = 1;
            while len < k {
                match t.checked_mul(ratio).filter(|&x| x <= top) {
                    Some(x) if members.contains(&x) => {
                        t = x;
                        len += 1;
                    }
                    Some(_) => break,
                    // every larger ratio overshoots as well
                    None if len == 1 => break 'ratios,
                    None => break,
                }
            }
            if len == k {
                return Ok(true);
            }
            match ratio.checked_mul(s) {
                Some(r) => ratio = r,
                None => break,
            }
        }
    }
    Ok(false)
}

/// Exhaustive search over subsets of `{1..n}` avoiding GPs with ratio a
/// power of any base in `ratios`. Elements are decided in increasing order;
/// an element is admissible unless it is the top of a forbidden progression.
struct GpSearch<'a> {
    k: usize,
    n: u64,
    ratios: &'a [u64],
    best: u64,
}

impl GpSearch<'_> {
    fn closes_progression(&self, chosen: u64, x: u64) -> bool {
        let in_set = |v: u64| v >= 1 && v <= self.n && chosen >> (v - 1) & 1 == 1;
        for &s in self.ratios {
            let mut q = s;
            while q <= x {
                // x = a·q^(k-1) with a, a·q, … all chosen
                let mut v = x;
                let mut ok = true;
                for _ in 1..self.k {
                    if !v.is_multiple_of(q) {
                        ok = false;
                        break;
                    }
                    v /= q;
                    if !in_set(v) {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    return true;
                }
                match q.checked_mul(s) {
                    Some(next) => q = next,
                    None => break,
                }
            }
        }
        false
    }

    fn dfs(&mut self, x: u64, chosen: u64, count: u64) {
        if count + (self.n + 1 - x) <= self.best {
            return;
        }
        if x > self.n {
            self.best = count;
            return;
        }
        if !self.closes_progression(chosen, x) {
            self.dfs(x + 1, chosen | 1 << (x - 1), count + 1);
        }
        self.dfs(x + 1, chosen, count);
    }
}

fn gp_free_max(k: usize, ratios: &[u64], n: u64, cap: u64) -> Result<u64> {
    check_k(k)?;
    for &s in ratios {
        check_base(s)?;
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if n > cap || n > 63 {
        return Err(Error::OverOracleCap {
            what: "n",
            value: n,
            cap: cap.min(63),
        });
    }
    let mut search = GpSearch {
        k,
        n,
        ratios,
        best: 0,
    };
    search.dfs(1, 0, 0);
    Ok(search.best)
}

/// Exhaustive `g_k^(s)(n)` for `n ≤ DEFAULT_G_ORACLE_CAP`.
pub fn g_bruteforce(k: usize, s: u64, n: u64) -> Result<u64> {
    g_bruteforce_with_cap(k, s, n, DEFAULT_G_ORACLE_CAP)
}

pub fn g_bruteforce_with_cap(k: usize, s: u64, n: u64, cap: u64) -> Result<u64> {
    gp_free_max(k, &[s], n, cap)
}

/// Largest subset of `{1..n}` with no `k`-term GP whose ratio is a power of
/// some base in `ratios`.
pub fn g_multi_ratio_bruteforce(k: usize, ratios: &[u64], n: u64) -> Result<u64> {
    g_multi_ratio_bruteforce_with_cap(k, ratios, n, DEFAULT_G_ORACLE_CAP)
}

pub fn g_multi_ratio_bruteforce_with_cap(
    k: usize,
    ratios: &[u64],
    n: u64,
    cap: u64,
) -> Result<u64> {
    if ratios.is_empty() {
        return Err(Error::invalid("ratio set is empty"));
    }
    let mut sorted = ratios.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    gp_free_max(k, &sorted, n, cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CompareRow {
    pub n: u64,
    pub g_s: u64,
    pub g_s2: u64,
}

impl CompareRow {
    /// `g^(s')(n) ≤ g^(s)(n)`.
    pub fn holds(&self) -> bool {
        self.g_s2 <= self.g_s
    }

    pub fn strict(&self) -> bool {
        self.g_s2 < self.g_s
    }

    pub fn relation(&self) -> &'static str {
        match self.g_s2.cmp(&self.g_s) {
            std::cmp::Ordering::Less => "<",
            std::cmp::Ordering::Equal => "=",
            std::cmp::Ordering::Greater => ">",
        }
    }
}

/// Rows comparing `g_k^(s)` and `g_k^(s')` on `n = 1..=n_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonotonicityReport {
    pub k: usize,
    pub s: u64,
    pub s2: u64,
    pub rows: Vec<CompareRow>,
    /// First `n` with `g^(s')(n) > g^(s)(n)`.
    pub first_violation: Option<u64>,
    pub violations: usize,
    /// First `n` with `g^(s')(n) < g^(s)(n)`.
    pub first_strict: Option<u64>,
    /// Least `n₀` such that the strict inequality holds on `n₀..=n_max`.
    pub strict_from: Option<u64>,
}

/// Tabulates both sides of the conjectured inequality `g^(s') ≤ g^(s)` for
/// `s < s'`. Both sides use the same `r_k` table, which must reach
/// `1 + ⌊log_s n_max⌋`.
pub fn monotonicity_experiment(
    k: usize,
    s: u64,
    s2: u64,
    n_max: u64,
    table: &RkTable,
    par: Parallelism,
) -> Result<MonotonicityReport> {
    check_base(s)?;
    if s2 <= s {
        return Err(Error::invalid(format!(
            "need s < s', got s = {s}, s' = {s2}"
        )));
    }
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    // fail early on the deeper requirement
    check_table(k, s, n_max, table)?;

    let ns: Vec<u64> = (1..=n_max).collect();
    let rows = par
        .map(ns, |n| -> Result<CompareRow> {
            Ok(CompareRow {
                n,
                g_s: g_formula_value(k, s, n, table)?,
                g_s2: g_formula_value(k, s2, n, table)?,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let first_violation = rows.iter().find(|r| !r.holds()).map(|r| r.n);
    let violations = rows.iter().filter(|r| !r.holds()).count();
    let first_strict = rows.iter().find(|r| r.strict()).map(|r| r.n);
    let strict_from = match rows.iter().rposition(|r| !r.strict()) {
        None => Some(1),
        Some(i) if i + 1 < rows.len() => Some(rows[i + 1].n),
        Some(_) => None,
    };
    Ok(MonotonicityReport {
        k,
        s,
        s2,
        rows,
        first_violation,
        violations,
        first_strict,
        strict_from,
    })
}

/// Value-only `g_formula`, skipping the per-chain breakdown.
pub fn g_formula_value(k: usize, s: u64, n: u64, table: &RkTable) -> Result<u64> {
    let depth = check_table(k, s, n, table)?;
    sum_groups(&grouped(s, n, depth, table)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apfree::{rk_table, SolverConfig};

    fn table(k: usize, ell: usize) -> RkTable {
        rk_table(k, ell, &SolverConfig::sequential()).unwrap()
    }

    #[test]
    fn ilog_examples() {
        assert_eq!(ilog(2, 10, 3).unwrap(), 1);
        assert_eq!(ilog(3, 9, 1).unwrap(), 2);
        assert_eq!(ilog(2, 7, 7).unwrap(), 0);
        assert_eq!(ilog(2, u64::MAX, 1).unwrap(), 63);
        assert_eq!(ilog(u64::MAX, u64::MAX, 1).unwrap(), 1);
        assert!(ilog(2, 7, 8).is_err());
        assert!(ilog(1, 7, 3).is_err());
    }

    #[test]
    fn partition_examples() {
        let p = chain_partition(10, 2).unwrap();
        assert_eq!(p.roots, vec![1, 3, 5, 7, 9]);
        assert_eq!(p.chain_lengths, vec![4, 2, 2, 1, 1]);
        assert_eq!(p.total(), 10);
        assert_eq!(p.chain(0), vec![1, 2, 4, 8]);

        let p = chain_partition(1, 2).unwrap();
        assert_eq!((p.roots, p.chain_lengths), (vec![1], vec![1]));

        let p = chain_partition(9, 3).unwrap();
        assert_eq!(p.roots, vec![1, 2, 4, 5, 7, 8]);
        assert_eq!(p.chain_lengths, vec![3, 2, 1, 1, 1, 1]);
        assert_eq!(p.total(), 9);
    }

    #[test]
    fn formula_examples() {
        let t3 = table(3, 10);
        assert_eq!(g_formula(3, 2, 4, &t3).unwrap().value, 3);
        assert_eq!(g_formula(3, 3, 9, &t3).unwrap().value, 8);
        assert_eq!(g_formula(2, 2, 10, &table(2, 10)).unwrap().value, 5);
        for k in 2..=5 {
            assert_eq!(g_formula(k, 2, 1, &table(k, 1)).unwrap().value, 1);
        }
        let r = g_formula(3, 3, 9, &t3).unwrap();
        assert_eq!(
            r.per_length,
            vec![
                LengthGroup {
                    ell: 1,
                    roots: 4,
                    per_chain: 1
                },
                LengthGroup {
                    ell: 2,
                    roots: 1,
                    per_chain: 2
                },
                LengthGroup {
                    ell: 3,
                    roots: 1,
                    per_chain: 2
                },
            ]
        );
        assert_eq!(
            r.per_chain
                .unwrap()
                .iter()
                .map(|&(_, v)| v as u64)
                .sum::<u64>(),
            8
        );
    }

    #[test]
    fn formula_requires_deep_enough_table() {
        let short = table(3, 3);
        match g_formula(3, 2, 16, &short) {
            Err(Error::TableInsufficient {
                required,
                available,
                ..
            }) => {
                assert_eq!((required, available), (5, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(g_formula(4, 2, 4, &short).is_err());
    }

    #[test]
    fn formula_handles_u64_max() {
        let t = table(2, 64);
        let r = g_formula(2, 2, u64::MAX, &t).unwrap();
        assert!(r.per_chain.is_none());
        assert_eq!(
            r.per_length
                .iter()
                .map(|g| g.roots as u128 * (g.ell as u128))
                .sum::<u128>(),
            u64::MAX as u128
        );
    }

    #[test]
    fn gp_examples() {
        assert!(has_k_term_gp(&[1, 2, 4], 3, 2).unwrap());
        assert!(has_k_term_gp(&[1, 4, 16], 3, 2).unwrap());
        assert!(!has_k_term_gp(&[1, 2, 3], 3, 2).unwrap());
        assert!(!has_k_term_gp(&[1, 3, 9], 3, 2).unwrap());
        assert!(has_k_term_gp(&[5, 10], 2, 2).unwrap());
        assert!(!has_k_term_gp(&[], 2, 2).unwrap());
        let big = 1u64 << 62;
        assert!(has_k_term_gp(&[1 << 60, 1 << 61, big], 3, 2).unwrap());
    }

    #[test]
    fn bruteforce_examples() {
        assert_eq!(g_bruteforce(3, 2, 4).unwrap(), 3);
        assert_eq!(g_bruteforce(3, 2, 1).unwrap(), 1);
        assert_eq!(g_bruteforce(2, 2, 10).unwrap(), 5);
        assert!(matches!(
            g_bruteforce(3, 2, 25),
            Err(Error::OverOracleCap { .. })
        ));
    }

    #[test]
    fn witness_examples() {
        let t = table(3, 4);
        let w = g_witness(3, 2, 8, &t).unwrap();
        assert_eq!(w, vec![1, 2, 3, 5, 6, 7, 8]);
        assert_eq!(w.len() as u64, g_bruteforce(3, 2, 8).unwrap());
        assert!(!has_k_term_gp(&w, 3, 2).unwrap());
        assert_eq!(g_witness(3, 2, 1, &t).unwrap(), vec![1]);
        assert_eq!(g_witness(2, 2, 6, &table(2, 3)).unwrap(), vec![1, 3, 5]);
    }

    #[test]
    fn multi_ratio_examples() {
        assert_eq!(g_multi_ratio_bruteforce(3, &[2, 3], 9).unwrap(), 7);
        assert_eq!(
            g_multi_ratio_bruteforce(3, &[2], 9).unwrap(),
            g_bruteforce(3, 2, 9).unwrap()
        );
        assert_eq!(g_multi_ratio_bruteforce(2, &[2, 3], 1).unwrap(), 1);
        assert!(g_multi_ratio_bruteforce(3, &[], 5).is_err());
        assert!(g_multi_ratio_bruteforce(3, &[2], 30).is_err());
    }

    #[test]
    fn compare_examples() {
        let t = table(3, 4);
        let rep = monotonicity_experiment(3, 2, 3, 9, &t, Parallelism::Sequential).unwrap();
        assert_eq!(
            rep.rows[8],
            CompareRow {
                n: 9,
                g_s: 8,
                g_s2: 8
            }
        );
        assert_eq!(
            rep.rows[0],
            CompareRow {
                n: 1,
                g_s: 1,
                g_s2: 1
            }
        );

        let rep =
            monotonicity_experiment(2, 2, 3, 6, &table(2, 3), Parallelism::Sequential).unwrap();
        assert_eq!(
            rep.rows[5],
            CompareRow {
                n: 6,
                g_s: 3,
                g_s2: 4
            }
        );
        assert_eq!(rep.rows[5].relation(), ">");
        assert!(monotonicity_experiment(3, 3, 2, 9, &t, Parallelism::Sequential).is_err());
    }
}
