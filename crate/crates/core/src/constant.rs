//! The limit constant `θ(k, s) = (s−1)·Σ_m s^(−u_m)` and related statistics.
//!
//! All sums are exact rationals. A truncated sum is reported together with a
//! rigorous upper bound on the omitted tail, so `[partial, partial + tail]`
//! always encloses `θ`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::apfree::{min_inverse, GapSequence, RkTable};
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::geoprog::g_formula_value;
use crate::rational::inv_pow;

/// Number of integers `m` with `x < m ≤ y` and `s ∤ m`.
pub fn count_nondivisible(x: &BigRational, y: &BigRational, s: u64) -> Result<BigInt> {
    if s < 2 {
        return Err(Error::invalid(format!("s = {s} must be at least 2")));
    }
    if x >= y {
        return Err(Error::invalid("interval (x, y] is empty: need x < y"));
    }
    let s = BigInt::from(s);
    let floor = |q: &BigRational| q.numer().div_floor(q.denom());
    let floor_div = |q: &BigRational| q.numer().div_floor(&(q.denom() * &s));
    let all = floor(y) - floor(x);
    let multiples = floor_div(y) - floor_div(x);
    Ok(all - multiples)
}

/// An exact enclosure `partial ≤ θ ≤ partial + tail_bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaApproximation {
    pub k: usize,
    pub s: u64,
    /// Number of series terms summed.
    pub terms: usize,
    pub partial: BigRational,
    pub tail_bound: BigRational,
    /// The series has no further terms; `partial` is `θ` itself.
    pub finite: bool,
}

impl ThetaApproximation {
    pub fn lower(&self) -> &BigRational {
        &self.partial
    }

    pub fn upper(&self) -> BigRational {
        &self.partial + &self.tail_bound
    }

    pub fn midpoint(&self) -> BigRational {
        &self.partial + &self.tail_bound / BigInt::from(2)
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        x >= &self.partial && x <= &self.upper()
    }
}

/// Sums the first `terms` terms of `(s−1)·Σ s^(−u_m)`.
///
/// The tail after `u_M` is at most `(s−1)·Σ_{j ≥ u_{M+1}} s^(−j) =
/// s^(1−u_{M+1})`; when `u_{M+1}` is not in `gaps` the bound `u_{M+1} ≥
/// u_M + 1` is used instead.
pub fn theta_partial(
    k: usize,
    s: u64,
    gaps: &GapSequence,
    terms: usize,
) -> Result<ThetaApproximation> {
    if s < 2 {
        return Err(Error::invalid(format!("s = {s} must be at least 2")));
    }
    if gaps.k() != k {
        return Err(Error::invalid(format!(
            "gap sequence is for k = {}, requested k = {k}",
            gaps.k()
        )));
    }
    let u = gaps.u();
    let finite = gaps.is_complete() && terms >= u.len();
    if terms > u.len() && !finite {
        return Err(Error::invalid(format!(
            "{terms} terms requested but only u_1..u_{} are known",
            u.len()
        )));
    }
    let used = terms.min(u.len());
    let scale = BigRational::from_integer(BigInt::from(s - 1));
    let sum: BigRational = u[..used]
        .iter()
        .map(|&um| inv_pow(s, um as i64))
        .fold(BigRational::zero(), |acc, t| acc + t);
    let partial = sum * &scale;

    let tail_bound = if finite {
        BigRational::zero()
    } else if let Some(&next) = u.get(used) {
        inv_pow(s, next as i64 - 1)
    } else {
        inv_pow(s, u[used - 1] as i64)
    };
    Ok(ThetaApproximation {
        k,
        s,
        terms: used,
        partial,
        tail_bound,
        finite,
    })
}

/// Base-`s` digits of `θ` at positions `1..=len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitStream {
    pub k: usize,
    pub s: u64,
    /// Digits of `θ`: `s−1` at each `u_m`, `0` elsewhere.
    pub digits: Vec<u64>,
    /// The `u_m ≤ len`.
    pub one_positions: Vec<usize>,
}

impl DigitStream {
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Digits of the unscaled series `Σ s^(−u_m)`, all 0 or 1.
    pub fn unscaled(&self) -> Vec<u8> {
        self.digits.iter().map(|&d| u8::from(d != 0)).collect()
    }

    /// `Σ_ℓ digit_ℓ · s^(−ℓ)`.
    pub fn value(&self) -> BigRational {
        self.digits
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != 0)
            .map(|(i, &d)| inv_pow(self.s, i as i64 + 1) * BigInt::from(d))
            .fold(BigRational::zero(), |acc, t| acc + t)
    }
}

pub fn theta_digits(k: usize, s: u64, gaps: &GapSequence, len: usize) -> Result<DigitStream> {
    if s < 2 {
        return Err(Error::invalid(format!("s = {s} must be at least 2")));
    }
    if gaps.k() != k {
        return Err(Error::invalid(format!(
            "gap sequence is for k = {}, requested k = {k}",
            gaps.k()
        )));
    }
    if len == 0 {
        return Err(Error::invalid("digit prefix length must be at least 1"));
    }
    if !gaps.covers(len) {
        return Err(Error::TableInsufficient {
            k,
            required: len,
            available: gaps.ell_max(),
        });
    }
    let one_positions: Vec<usize> = gaps.u().iter().copied().take_while(|&p| p <= len).collect();
    let mut digits = vec![0; len];
    for &p in &one_positions {
        digits[p - 1] = s - 1;
    }
    Ok(DigitStream {
        k,
        s,
        digits,
        one_positions,
    })
}

/// Differences `u_{m+1} − u_m` and where their running maximum grows.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct GapStats {
    pub k: usize,
    pub u: Vec<usize>,
    /// `diffs[i] = u_{i+2} − u_{i+1}`.
    pub diffs: Vec<usize>,
    pub running_max: Vec<usize>,
    /// `m` such that `u_{m+1} − u_m` exceeds every earlier difference.
    pub record_positions: Vec<usize>,
}

impl GapStats {
    /// Number of times the running maximum strictly increased after its
    /// first value.
    pub fn increases(&self) -> usize {
        self.record_positions.len().saturating_sub(1)
    }

    pub fn max_gap(&self) -> Option<usize> {
        self.running_max.last().copied()
    }
}

pub fn gap_stats(gaps: &GapSequence) -> GapStats {
    let diffs = gaps.gaps();
    let mut running_max = Vec::with_capacity(diffs.len());
    let mut record_positions = Vec::new();
    let mut best = 0;
    for (i, &d) in diffs.iter().enumerate() {
        if d > best {
            best = d;
            record_positions.push(i + 1);
        }
        running_max.push(best);
    }
    GapStats {
        k: gaps.k(),
        u: gaps.u().to_vec(),
        diffs,
        running_max,
        record_positions,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceRow {
    pub n: u64,
    pub g: u64,
    pub ratio: BigRational,
    pub theta: ThetaApproximation,
    /// `g/n` minus the enclosure midpoint.
    pub deviation: BigRational,
}

impl ConvergenceRow {
    pub fn abs_deviation(&self) -> BigRational {
        self.deviation.abs()
    }
}

/// `g_k^(s)(n)/n` against the best `θ` enclosure the table allows.
pub fn convergence_experiment(
    k: usize,
    s: u64,
    ns: &[u64],
    table: &RkTable,
    par: Parallelism,
) -> Result<Vec<ConvergenceRow>> {
    let gaps = min_inverse(table);
    let theta = theta_partial(k, s, &gaps, gaps.len())?;
    let mid = theta.midpoint();
    par.map(ns.to_vec(), |n| {
        let g = g_formula_value(k, s, n, table)?;
        let ratio = BigRational::new(BigInt::from(g), BigInt::from(n));
        let deviation = &ratio - &mid;
        Ok(ConvergenceRow {
            n,
            g,
            ratio,
            theta: theta.clone(),
            deviation,
        })
    })
    .into_iter()
    .collect()
}

/// `(s−1)/s`, the value of `θ(2, s)`.
pub fn degenerate_theta(s: u64) -> BigRational {
    BigRational::new(BigInt::from(s - 1), BigInt::from(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apfree::{rk_table, SolverConfig};

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn gaps(k: usize, ell: usize) -> GapSequence {
        min_inverse(&rk_table(k, ell, &SolverConfig::sequential()).unwrap())
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_nondivisible(&q(0, 1), &q(4, 1), 2).unwrap(), 2.into());
        assert_eq!(count_nondivisible(&q(5, 2), &q(5, 1), 2).unwrap(), 2.into());
        for s in 2..7i64 {
            for h in 0..5i64 {
                if h > 0 {
                    assert_eq!(
                        count_nondivisible(&q(0, 1), &q(s * h, 1), s as u64).unwrap(),
                        ((s - 1) * h).into()
                    );
                }
            }
        }
        assert_eq!(
            count_nondivisible(&q(-7, 2), &q(1, 3), 3).unwrap(),
            2.into()
        );
        assert!(count_nondivisible(&q(1, 1), &q(1, 1), 2).is_err());
        assert!(count_nondivisible(&q(0, 1), &q(1, 1), 1).is_err());
    }

    #[test]
    fn partial_examples() {
        let g = gaps(3, 14);
        let t = theta_partial(3, 2, &g, 4).unwrap();
        assert_eq!(t.partial, q(27, 32));
        assert_eq!(t.tail_bound, q(1, 256));
        assert!(!t.finite);

        let t = theta_partial(3, 2, &g, 0).unwrap();
        assert_eq!((t.partial, t.tail_bound), (q(0, 1), q(1, 1)));

        // u_9 unknown at ell = 14: fall back to u_8 + 1
        let t = theta_partial(3, 2, &g, 8).unwrap();
        assert_eq!(t.tail_bound, q(1, 1 << 14));
        assert!(theta_partial(3, 2, &g, 9).is_err());
        assert!(theta_partial(4, 2, &g, 1).is_err());
    }

    #[test]
    fn degenerate_k2() {
        let g = gaps(2, 3);
        let t = theta_partial(2, 3, &g, 1).unwrap();
        assert_eq!(t.partial, q(2, 3));
        assert!(t.tail_bound.is_zero() && t.finite);
        let more = theta_partial(2, 3, &g, 50).unwrap();
        assert_eq!(more, t);
        assert_eq!(t.partial, degenerate_theta(3));
    }

    #[test]
    fn digit_examples() {
        let g = gaps(3, 14);
        let d = theta_digits(3, 2, &g, 6).unwrap();
        assert_eq!(d.digits, vec![1, 1, 0, 1, 1, 0]);
        assert_eq!(d.one_positions, vec![1, 2, 4, 5]);

        let g2 = gaps(2, 1);
        for s in [2u64, 3, 7] {
            let d = theta_digits(2, s, &g2, 3).unwrap();
            assert_eq!(d.digits, vec![s - 1, 0, 0]);
            assert_eq!(d.unscaled(), vec![1, 0, 0]);
            assert_eq!(
                theta_digits(3, s, &gaps(3, 1), 1).unwrap().digits,
                vec![s - 1]
            );
        }
        assert!(matches!(
            theta_digits(3, 2, &g, 15),
            Err(Error::TableInsufficient {
                required: 15,
                available: 14,
                ..
            })
        ));
    }

    #[test]
    fn digits_agree_with_partial_sums() {
        let g = gaps(3, 30);
        for s in [2u64, 3, 10] {
            for len in 1..=30 {
                let d = theta_digits(3, s, &g, len).unwrap();
                let t = theta_partial(3, s, &g, d.one_positions.len()).unwrap();
                assert_eq!(d.value(), t.partial);
            }
        }
    }

    #[test]
    fn gap_examples() {
        let stats = gap_stats(&gaps(3, 20));
        assert_eq!(stats.u, vec![1, 2, 4, 5, 9, 11, 13, 14, 20]);
        assert_eq!(stats.diffs, vec![1, 2, 1, 4, 2, 2, 1, 6]);
        assert_eq!(stats.running_max[3], 4);
        assert_eq!(stats.max_gap(), Some(6));
        assert_eq!(stats.record_positions, vec![1, 2, 4, 8]);
        assert_eq!(stats.increases(), 3);

        let short = gap_stats(&gaps(3, 2));
        assert_eq!(short.diffs, vec![1]);
    }

    #[test]
    fn convergence_examples() {
        let t = rk_table(3, 4, &SolverConfig::sequential()).unwrap();
        let rows = convergence_experiment(3, 2, &[4], &t, Parallelism::Sequential).unwrap();
        assert_eq!(rows[0].g, 3);
        assert_eq!(rows[0].ratio, q(3, 4));

        let t2 = rk_table(2, 10, &SolverConfig::sequential()).unwrap();
        for s in [2u64, 3, 5] {
            let ns: Vec<u64> = (1..=4).map(|h| s * h).collect();
            for row in convergence_experiment(2, s, &ns, &t2, Parallelism::Sequential).unwrap() {
                assert!(row.deviation.is_zero(), "n = {}", row.n);
                assert!(row.theta.finite);
            }
        }
    }
}
