//! Exhaustive `r_k(ℓ)`: every subset of `{0..ℓ-1}` is enumerated as a bit
//! mask and checked pairwise. Shares no code with the branch-and-bound path.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::exec::Parallelism;

pub const DEFAULT_ORACLE_CAP: usize = 25;

/// Low bits of the mask enumerated inside one parallel chunk.
const CHUNK_BITS: usize = 16;

fn ap_free(mask: u32, k: usize) -> bool {
    let mut rest = mask;
    while rest != 0 {
        let a = rest.trailing_zeros();
        rest &= rest - 1;
        let mut later = rest;
        while later != 0 {
            let b = later.trailing_zeros();
            later &= later - 1;
            let d = b - a;
            let mut term = b;
            let mut len = 2;
            while len < k {
                term += d;
                if term >= 32 || mask >> term & 1 == 0 {
                    break;
                }
                len += 1;
            }
            if len >= k {
                return false;
            }
        }
    }
    true
}

/// Largest AP-free mask size in `lo..hi`, skipping masks no larger than the
/// best size any chunk has seen so far.
fn best_in(lo: u32, hi: u32, k: usize, seen: &AtomicUsize) -> usize {
    let mut best = seen.load(Ordering::Relaxed);
    for mask in lo..hi {
        let size = mask.count_ones() as usize;
        if size > best && ap_free(mask, k) {
            best = size;
            best = seen.fetch_max(best, Ordering::Relaxed).max(best);
        }
    }
    best
}

/// Exhaustive `r_k(ell)` with the default cap.
pub fn rk_bruteforce_oracle(k: usize, ell: usize) -> Result<usize> {
    rk_bruteforce_oracle_with(k, ell, DEFAULT_ORACLE_CAP, Parallelism::default())
}

pub fn rk_bruteforce_oracle_with(
    k: usize,
    ell: usize,
    cap: usize,
    par: Parallelism,
) -> Result<usize> {
    if k < 2 {
        return Err(Error::invalid(format!(
            "progression length k = {k} must be at least 2"
        )));
    }
    if ell == 0 {
        return Err(Error::invalid("ell must be at least 1"));
    }
    if ell > cap || ell > 31 {
        return Err(Error::OverOracleCap {
            what: "ell",
            value: ell as u64,
            cap: cap.min(31) as u64,
        });
    }
    let total: u32 = 1 << ell;
    let seen = AtomicUsize::new(0);
    if ell <= CHUNK_BITS {
        return Ok(best_in(0, total, k, &seen));
    }
    let chunk = 1u32 << CHUNK_BITS;
    let starts: Vec<u32> = (0..total / chunk).map(|i| i * chunk).collect();
    let best = par.map(starts, |lo| best_in(lo, lo + chunk, k, &seen));
    Ok(best.into_iter().max().unwrap_or(0))
}
