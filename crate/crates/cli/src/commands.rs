use std::path::PathBuf;

use anyhow::{anyhow, bail, Context as _, Result};
use clap::Args;
use serde_json::json;

use gpfree_core::geoprog::{
    g_multi_ratio_bruteforce_with_cap, required_depth, DEFAULT_G_ORACLE_CAP,
};
use gpfree_core::rational::{decimal_ceil, decimal_floor};
use gpfree_core::{
    convergence_experiment, g_formula, g_witness, gap_stats, min_inverse, monotonicity_experiment,
    theta_digits, theta_partial, Error, GapSequence, RkTable,
};

use crate::output::{join, Doc};
use crate::Session;

/// Table depth used by `theta`, `digits` and `gaps` when no `--lmax` is given.
const DEFAULT_DEPTH: usize = 40;

#[derive(Debug, Args)]
pub struct RkArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    lmax: usize,
}

#[derive(Debug, Args)]
pub struct GArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    s: u64,
    /// Upper end of the range {1..n}; must fit in 64 bits.
    #[arg(long)]
    n: u64,
    /// Print an explicit extremal set.
    #[arg(long)]
    witness: bool,
    /// Print one row per chain instead of per chain length.
    #[arg(long)]
    chains: bool,
}

#[derive(Debug, Args)]
pub struct ThetaArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    s: u64,
    /// Number of series terms (default: every term the table determines).
    #[arg(long)]
    terms: Option<usize>,
    /// Length of the digit prefix to print.
    #[arg(long = "digits", default_value_t = 32)]
    digits_len: usize,
    /// Use the r_k table cut at this depth (extending the cache if needed).
    #[arg(long)]
    lmax: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DigitsArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    s: u64,
    #[arg(long)]
    len: usize,
    #[arg(long)]
    lmax: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GapsArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    lmax: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    s: u64,
    /// Comma-separated list of n values.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u64>,
    /// Also write plot-ready CSV (n,g,g_over_n,theta_lo,theta_hi) here.
    #[arg(long)]
    emit_plot_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    s: u64,
    #[arg(long)]
    s2: u64,
    #[arg(long)]
    nmax: u64,
}

#[derive(Debug, Args)]
pub struct MultiArgs {
    #[arg(long)]
    k: usize,
    /// Comma-separated ratio bases.
    #[arg(long, value_delimiter = ',', required = true)]
    ratios: Vec<u64>,
    #[arg(long)]
    n: u64,
    /// Raise the exhaustive-search cap on n (cost doubles per unit).
    #[arg(long, default_value_t = DEFAULT_G_ORACLE_CAP)]
    oracle_cap: u64,
}

fn table(ctx: &Session, k: usize, depth: usize) -> Result<RkTable> {
    ctx.store
        .ensure(k, depth, &ctx.solver)
        .map_err(anyhow::Error::from)
}

fn rk_doc(t: &RkTable) -> Doc {
    let mut doc = Doc::default();
    doc.note("k", t.k().to_string());
    doc.note("ell_max", t.ell_max().to_string());
    doc.columns(&["ell", "r_k", "witness"]);
    for (ell, value, w) in t.rows() {
        doc.rows
            .push(vec![ell.to_string(), value.to_string(), join(w, ",")]);
    }
    doc.json = json!({
        "k": t.k(),
        "ell_max": t.ell_max(),
        "rows": t.rows().map(|(ell, value, w)| json!({"ell": ell, "value": value, "witness": w})).collect::<Vec<_>>(),
    });
    doc
}

pub fn rk(ctx: &Session, a: RkArgs) -> Result<()> {
    match ctx.store.ensure(a.k, a.lmax, &ctx.solver) {
        Ok(t) => ctx.out.emit(&rk_doc(&t.truncated(a.lmax))),
        Err(Error::BudgetExhausted {
            prefix: Some(prefix),
            budget,
            ell,
            lower,
            upper,
        }) => {
            ctx.out.emit(&rk_doc(&prefix))?;
            Err(Error::BudgetExhausted {
                prefix: None,
                budget,
                ell,
                lower,
                upper,
            }
            .into())
        }
        Err(e) => Err(e.into()),
    }
}

pub fn g(ctx: &Session, a: GArgs) -> Result<()> {
    let depth = required_depth(a.s, a.n)?;
    let t = table(ctx, a.k, depth)?;
    let mut res = g_formula(a.k, a.s, a.n, &t)?;
    if a.witness {
        res.witness = Some(g_witness(a.k, a.s, a.n, &t)?);
    }
    let mut doc = Doc::default();
    doc.note("k", a.k.to_string());
    doc.note("s", a.s.to_string());
    doc.note("n", a.n.to_string());
    doc.note("g", res.value.to_string());
    doc.note("table depth used", depth.to_string());
    if let Some(w) = &res.witness {
        doc.note("witness", join(w, ","));
    }
    if a.chains {
        let chains = res.per_chain.as_ref().ok_or_else(|| {
            anyhow!(
                "per-chain output is limited to n <= {}",
                gpfree_core::geoprog::DIRECT_LIMIT
            )
        })?;
        doc.columns(&["root", "r_k(chain length)"]);
        for (b, r) in chains {
            doc.rows.push(vec![b.to_string(), r.to_string()]);
        }
    } else {
        doc.columns(&["chain_length", "roots", "r_k", "contribution"]);
        for grp in &res.per_length {
            doc.rows.push(vec![
                grp.ell.to_string(),
                grp.roots.to_string(),
                grp.per_chain.to_string(),
                (grp.roots as u128 * grp.per_chain as u128).to_string(),
            ]);
        }
    }
    doc.json = json!({
        "k": a.k, "s": a.s, "n": a.n, "value": res.value,
        "per_length": res.per_length,
        "per_chain": if a.chains { json!(res.per_chain) } else { json!(null) },
        "witness": res.witness,
    });
    ctx.out.emit(&doc)
}

/// Gap sequence from the table cut at `lmax`, or from the whole cached table
/// (at least `DEFAULT_DEPTH` rows) when no depth is given.
fn gap_sequence(ctx: &Session, k: usize, lmax: Option<usize>) -> Result<GapSequence> {
    let t = match lmax {
        Some(l) => table(ctx, k, l)?.truncated(l),
        None => table(ctx, k, DEFAULT_DEPTH)?,
    };
    Ok(min_inverse(&t))
}

fn more_depth_hint(k: usize, gaps: &GapSequence, err: Error) -> anyhow::Error {
    match err {
        Error::TableInsufficient { required, available, .. } => anyhow!(
            "the r_k table for k = {k} reaches ell = {available}; digits need ell = {required}. \
             Build it with `gpfree rk --k {k} --lmax {required}` or pass --lmax {required}"
        ),
        Error::InvalidArgument(msg) if msg.contains("terms requested") => anyhow!(
            "{msg} (table reaches ell = {}). Extend it with `gpfree rk --k {k} --lmax <larger>` or pass --lmax",
            gaps.ell_max()
        ),
        other => other.into(),
    }
}

fn digit_string(digits: &[u64], s: u64) -> String {
    if s <= 10 {
        digits
            .iter()
            .map(|d| char::from_digit(*d as u32, 10).unwrap())
            .collect()
    } else {
        join(digits, ":")
    }
}

pub fn theta(ctx: &Session, a: ThetaArgs) -> Result<()> {
    let gaps = gap_sequence(ctx, a.k, a.lmax)?;
    let terms = a.terms.unwrap_or(gaps.len());
    let approx =
        theta_partial(a.k, a.s, &gaps, terms).map_err(|e| more_depth_hint(a.k, &gaps, e))?;
    let upper = approx.upper();
    let p = ctx.out.precision;

    let mut doc = Doc::default();
    doc.note("k", a.k.to_string());
    doc.note("s", a.s.to_string());
    doc.note("terms", approx.terms.to_string());
    doc.note("partial", ctx.out.lower(&approx.partial));
    doc.note("tail bound", ctx.out.upper(&approx.tail_bound));
    doc.note(
        "enclosure",
        format!(
            "{} ≤ θ ≤ {}",
            decimal_floor(&approx.partial, p),
            decimal_ceil(&upper, p)
        ),
    );
    if approx.finite {
        doc.note(
            "note",
            "finite series: θ is exactly the partial sum (k = 2)",
        );
    }
    let mut digits_json = json!(null);
    if a.digits_len > 0 {
        let len = if gaps.covers(a.digits_len) {
            a.digits_len
        } else {
            gaps.ell_max()
        };
        let stream =
            theta_digits(a.k, a.s, &gaps, len).map_err(|e| more_depth_hint(a.k, &gaps, e))?;
        doc.note(
            format!("digits (base {}, {len})", a.s),
            format!("0.{}", digit_string(&stream.digits, a.s)),
        );
        doc.note(
            "unscaled digits",
            format!(
                "0.{}",
                digit_string(
                    &stream
                        .unscaled()
                        .iter()
                        .map(|&d| d as u64)
                        .collect::<Vec<_>>(),
                    10
                )
            ),
        );
        digits_json =
            json!({"len": len, "digits": stream.digits, "one_positions": stream.one_positions});
    }
    doc.json = json!({
        "k": a.k, "s": a.s, "terms": approx.terms,
        "partial": ctx.out.rational_json(&approx.partial),
        "tail_bound": ctx.out.rational_json(&approx.tail_bound),
        "upper": ctx.out.rational_json(&upper),
        "finite": approx.finite,
        "digits": digits_json,
    });
    ctx.out.emit(&doc)
}

pub fn digits(ctx: &Session, a: DigitsArgs) -> Result<()> {
    let gaps = gap_sequence(ctx, a.k, Some(a.lmax.unwrap_or(a.len.max(DEFAULT_DEPTH))))?;
    let stream =
        theta_digits(a.k, a.s, &gaps, a.len).map_err(|e| more_depth_hint(a.k, &gaps, e))?;
    let mut doc = Doc::default();
    doc.note("k", a.k.to_string());
    doc.note("s", a.s.to_string());
    doc.note("prefix", format!("0.{}", digit_string(&stream.digits, a.s)));
    doc.columns(&["position", "digit", "unscaled"]);
    for (i, (&d, u)) in stream.digits.iter().zip(stream.unscaled()).enumerate() {
        doc.rows
            .push(vec![(i + 1).to_string(), d.to_string(), u.to_string()]);
    }
    doc.json = json!({
        "k": a.k, "s": a.s, "len": stream.len(),
        "digits": stream.digits, "unscaled": stream.unscaled(), "one_positions": stream.one_positions,
    });
    ctx.out.emit(&doc)
}

pub fn gaps(ctx: &Session, a: GapsArgs) -> Result<()> {
    let gaps = gap_sequence(ctx, a.k, a.lmax)?;
    let stats = gap_stats(&gaps);
    let mut doc = Doc::default();
    doc.note("k", a.k.to_string());
    doc.note("table depth", gaps.ell_max().to_string());
    doc.note("terms", gaps.len().to_string());
    doc.note("running max increases", stats.increases().to_string());
    if gaps.is_complete() {
        doc.note("note", "k = 2: u has a single term");
    }
    doc.columns(&["m", "u_m", "gap", "running_max", "record"]);
    for (i, &u) in stats.u.iter().enumerate() {
        let (gap, run, rec) = match stats.diffs.get(i) {
            Some(&d) => (
                d.to_string(),
                stats.running_max[i].to_string(),
                stats.record_positions.contains(&(i + 1)).to_string(),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        doc.rows
            .push(vec![(i + 1).to_string(), u.to_string(), gap, run, rec]);
    }
    doc.json = json!({
        "k": a.k, "table_depth": gaps.ell_max(), "complete": gaps.is_complete(),
        "stats": stats, "increases": stats.increases(),
    });
    ctx.out.emit(&doc)
}

pub fn convergence(ctx: &Session, a: ConvergenceArgs) -> Result<()> {
    if a.n.contains(&0) {
        bail!("n values must be positive");
    }
    let n_max = *a.n.iter().max().expect("clap requires at least one n");
    let t = table(ctx, a.k, required_depth(a.s, n_max)?)?;
    let rows = convergence_experiment(a.k, a.s, &a.n, &t, ctx.parallelism())?;
    let p = ctx.out.precision;

    let mut doc = Doc::default();
    doc.note("k", a.k.to_string());
    doc.note("s", a.s.to_string());
    if let Some(r) = rows.first() {
        doc.note(
            "enclosure",
            format!(
                "{} ≤ θ ≤ {} ({} terms)",
                decimal_floor(r.theta.lower(), p),
                decimal_ceil(&r.theta.upper(), p),
                r.theta.terms
            ),
        );
    }
    doc.columns(&[
        "n",
        "g",
        "g_over_n",
        "g_over_n_decimal",
        "theta_lo",
        "theta_hi",
        "deviation",
    ]);
    let mut plot = csv::Writer::from_writer(Vec::new());
    plot.write_record(["n", "g", "g_over_n", "theta_lo", "theta_hi"])?;
    for r in &rows {
        let lo = decimal_floor(r.theta.lower(), p);
        let hi = decimal_ceil(&r.theta.upper(), p);
        let ratio = decimal_floor(&r.ratio, p);
        doc.rows.push(vec![
            r.n.to_string(),
            r.g.to_string(),
            gpfree_core::rational::fraction(&r.ratio),
            ratio.clone(),
            lo.clone(),
            hi.clone(),
            format!("{:+.3e}", gpfree_core::rational::to_f64(&r.deviation)),
        ]);
        plot.write_record([r.n.to_string(), r.g.to_string(), ratio, lo, hi])?;
    }
    doc.json = json!({
        "k": a.k, "s": a.s,
        "rows": rows.iter().map(|r| json!({
            "n": r.n, "g": r.g,
            "g_over_n": ctx.out.rational_json(&r.ratio),
            "theta_lo": ctx.out.rational_json(r.theta.lower()),
            "theta_hi": ctx.out.rational_json(&r.theta.upper()),
            "deviation": ctx.out.rational_json(&r.deviation),
        })).collect::<Vec<_>>(),
    });
    if let Some(path) = &a.emit_plot_data {
        std::fs::write(path, plot.into_inner()?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    ctx.out.emit(&doc)
}

pub fn compare(ctx: &Session, a: CompareArgs) -> Result<()> {
    let t = table(ctx, a.k, required_depth(a.s.max(2), a.nmax.max(1))?)?;
    let rep = monotonicity_experiment(a.k, a.s, a.s2, a.nmax, &t, ctx.parallelism())?;
    let show = |x: Option<u64>| x.map_or_else(|| "none".to_string(), |n| n.to_string());
    let mut doc = Doc::default();
    doc.note("k", a.k.to_string());
    doc.note("s", a.s.to_string());
    doc.note("s'", a.s2.to_string());
    doc.note("inequality", format!("g^({})(n) <= g^({})(n)", a.s2, a.s));
    doc.note("violations", rep.violations.to_string());
    doc.note("first violation", show(rep.first_violation));
    doc.note("first strict <", show(rep.first_strict));
    doc.note("strict on n0..nmax from", show(rep.strict_from));
    doc.columns(&["n", "g_s", "g_s2", "relation"]);
    for r in &rep.rows {
        doc.rows.push(vec![
            r.n.to_string(),
            r.g_s.to_string(),
            r.g_s2.to_string(),
            r.relation().to_string(),
        ]);
    }
    doc.json = serde_json::to_value(&rep)?;
    ctx.out.emit(&doc)
}

pub fn multi(ctx: &Session, a: MultiArgs) -> Result<()> {
    let value = g_multi_ratio_bruteforce_with_cap(a.k, &a.ratios, a.n, a.oracle_cap)?;
    let mut doc = Doc::default();
    doc.note("k", a.k.to_string());
    doc.note("ratios", join(&a.ratios, ","));
    doc.note("n", a.n.to_string());
    doc.note("g", value.to_string());
    doc.json = json!({"k": a.k, "ratios": a.ratios, "n": a.n, "value": value});
    ctx.out.emit(&doc)
}
