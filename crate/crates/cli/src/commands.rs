//! Subcommand implementations. Each returns the process exit code.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use delcap_core::bounds::{
    convergence_diagnostic, limit_report, round_up, ExactInput, LimitEntryKind, LimitPoint, LimitReport,
};
use delcap_core::kernel::{build_exact_kernel_with, build_iid_kernel_with, cached_kernel, save_kernel, BuildOptions};
use delcap_core::{capacity_cn, capacity_cnk, CapacityBracket, ChannelModel, Exec};

use crate::args::{parse_f64_list, parse_n_list, DGrid, ExternalPoint};
use crate::plot::CURVE_HEADER;
use crate::{CommonArgs, EXIT_NOT_CONVERGED};

pub const REPORT_HEADER: [&str; 7] = ["kind", "n", "k", "d", "eps", "value", "citation"];
pub const DIAG_HEADER: [&str; 8] = ["n", "d", "k", "cn_lower", "cn_upper", "cnk_lower", "cnk_upper", "gap"];
pub const CAPACITY_HEADER: [&str; 7] = ["n", "d", "k", "lower", "upper", "iterations", "converged"];

fn fmt(x: f64) -> String {
    format!("{x:.12}")
}

fn model_of(d: Option<f64>, k: Option<usize>) -> Result<ChannelModel> {
    match (d, k) {
        (Some(d), None) => {
            ensure!((0.0..=1.0).contains(&d), "deletion probability {d} outside [0, 1]");
            Ok(ChannelModel::Iid { d })
        }
        (None, Some(k)) => Ok(ChannelModel::Exact { k }),
        _ => bail!("exactly one of --d and --k is required"),
    }
}

fn sorted_lengths(s: &str) -> Result<Vec<usize>> {
    let mut n = parse_n_list(s)?;
    n.sort_unstable();
    n.dedup();
    Ok(n)
}

fn csv_sink(out: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn warn_unconverged(label: &str, b: &CapacityBracket) {
    eprintln!(
        "warning: {label} did not reach tol {:e} in {} iterations (width {:e} bits)",
        b.tol,
        b.iterations,
        b.width()
    );
}

pub fn capacity(common: &CommonArgs, n: usize, d: Option<f64>, k: Option<usize>, out: Option<&Path>) -> Result<u8> {
    let opts = common.solve_options();
    let model = model_of(d, k)?;
    let (label, b) = match model {
        ChannelModel::Iid { d } => (format!("C_{n}({})", fmt(d)), capacity_cn(n, d, &opts)?),
        ChannelModel::Exact { k } => (format!("C_{{{n},{k}}}"), capacity_cnk(n, k, &opts)?),
    };
    println!("{label} in [{}, {}] bits per input bit", fmt(b.normalized_lower), fmt(b.normalized_upper));
    println!("iterations: {}", b.iterations);
    println!("converged: {}", b.converged);
    if let Some(path) = out {
        let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("cannot open {}", path.display()))?;
        let mut w = csv::Writer::from_writer(file);
        if fresh {
            w.write_record(CAPACITY_HEADER)?;
        }
        w.write_record([
            n.to_string(),
            d.map(fmt).unwrap_or_default(),
            k.map(|k| k.to_string()).unwrap_or_default(),
            fmt(b.normalized_lower),
            fmt(b.normalized_upper),
            b.iterations.to_string(),
            b.converged.to_string(),
        ])?;
        w.flush()?;
    }
    if !b.converged {
        warn_unconverged(&label, &b);
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(0)
}

/// Number of strictly negative second differences along a row of midpoints.
fn convexity_violations(values: &[f64], slack: f64) -> usize {
    values.windows(3).filter(|w| w[0] - 2.0 * w[1] + w[2] < -slack).count()
}

pub fn curve(common: &CommonArgs, n_spec: &str, grid: DGrid, out: Option<&Path>) -> Result<u8> {
    let opts = common.solve_options();
    let lengths = sorted_lengths(n_spec)?;
    let ds = grid.values();
    let jobs: Vec<(usize, f64)> = lengths.iter().flat_map(|&n| ds.iter().map(move |&d| (n, d))).collect();
    let results = Exec::Parallel.map(jobs.len(), |i| capacity_cn(jobs[i].0, jobs[i].1, &opts));
    let results: Vec<CapacityBracket> = results.into_iter().collect::<delcap_core::Result<_>>()?;

    let mut w = csv_sink(out)?;
    w.write_record(CURVE_HEADER)?;
    let mut unconverged = 0;
    for (&(n, d), b) in jobs.iter().zip(&results) {
        w.write_record([n.to_string(), fmt(d), fmt(b.normalized_lower), fmt(b.normalized_upper)])?;
        if !b.converged {
            unconverged += 1;
            warn_unconverged(&format!("C_{n}({})", fmt(d)), b);
        }
    }
    w.flush()?;

    // report where the midpoint curve fails to be convex in d
    for (row, &n) in results.chunks(ds.len()).zip(&lengths) {
        let mids: Vec<f64> = row.iter().map(|b| 0.5 * (b.normalized_lower + b.normalized_upper)).collect();
        let slack = row.iter().map(CapacityBracket::width).fold(0.0, f64::max) / n as f64;
        let bad = convexity_violations(&mids, 2.0 * slack + 1e-12);
        if bad > 0 {
            eprintln!("n = {n}: {bad} negative second differences along d");
        }
    }
    if unconverged > 0 {
        eprintln!("{unconverged} of {} rows did not converge", jobs.len());
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(0)
}

fn report_rows(report: &LimitReport) -> Vec<[String; 7]> {
    let mut rows = Vec::new();
    let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    for e in &report.entries {
        let kind = match e.kind {
            LimitEntryKind::Point => "point",
            LimitEntryKind::External => "external",
            LimitEntryKind::FertonaniDuman => "fertonani_duman",
        };
        rows.push([
            kind.to_string(),
            opt(e.n),
            opt(e.k),
            e.d.map(fmt).unwrap_or_default(),
            String::new(),
            fmt(e.value),
            e.citation.clone().unwrap_or_default(),
        ]);
    }
    let best = report.best_entry();
    rows.push([
        "best".to_string(),
        opt(best.n),
        opt(best.k),
        best.d.map(fmt).unwrap_or_default(),
        String::new(),
        fmt(report.best),
        best.citation.clone().unwrap_or_default(),
    ]);
    for r in report.references {
        rows.push([
            "reference".to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            fmt(r.value),
            format!("{}: {}", r.name, r.citation),
        ]);
    }
    rows
}

pub fn report(
    common: &CommonArgs,
    n_spec: Option<&str>,
    grid: Option<DGrid>,
    d_spec: Option<&str>,
    k_spec: Option<&str>,
    external: &[ExternalPoint],
    out: Option<&Path>,
) -> Result<u8> {
    let opts = common.solve_options();
    let lengths = n_spec.map(sorted_lengths).transpose()?.unwrap_or_default();
    let mut ds = grid.map(|g| g.values()).unwrap_or_default();
    if let Some(s) = d_spec {
        ds.extend(parse_f64_list(s)?);
    }
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    for &d in &ds {
        ensure!(d > 0.0 && d < 1.0, "report points need d in (0, 1), got {d}");
    }
    let mut ks = k_spec.map(parse_n_list).transpose()?.unwrap_or_default();
    ks.sort_unstable();
    ks.dedup();
    if !lengths.is_empty() {
        ensure!(!ds.is_empty() || !ks.is_empty(), "--n needs --d, --d-grid or --k");
    }

    let point_jobs: Vec<(usize, f64)> = lengths.iter().flat_map(|&n| ds.iter().map(move |&d| (n, d))).collect();
    let exact_jobs: Vec<(usize, usize)> =
        lengths.iter().flat_map(|&n| ks.iter().filter(move |&&k| k <= n).map(move |&k| (n, k))).collect();
    ensure!(
        exact_jobs.len() == lengths.len() * ks.len(),
        "every --k must be at most every --n"
    );

    let point_brackets = Exec::Parallel.map(point_jobs.len(), |i| capacity_cn(point_jobs[i].0, point_jobs[i].1, &opts));
    let exact_brackets = Exec::Parallel.map(exact_jobs.len(), |i| capacity_cnk(exact_jobs[i].0, exact_jobs[i].1, &opts));

    let mut points = Vec::new();
    let mut unconverged = 0;
    for (&(_, d), b) in point_jobs.iter().zip(point_brackets) {
        let b = b?;
        if !b.converged {
            unconverged += 1;
        }
        points.push(LimitPoint::computed(d, &b));
    }
    for e in external {
        points.push(LimitPoint::external(e.d, e.c, e.cite.clone())?);
    }
    let mut exact = Vec::new();
    for (&(_, k), b) in exact_jobs.iter().zip(exact_brackets) {
        let b = b?;
        if !b.converged {
            unconverged += 1;
        }
        exact.push(ExactInput::computed(k, &b));
    }
    let report = limit_report(&points, &exact)?;

    for e in &report.entries {
        let what = match e.kind {
            LimitEntryKind::Point => format!("C_{}({}) / (1 - d)", e.n.unwrap_or(0), fmt(e.d.unwrap_or(0.0))),
            LimitEntryKind::External => format!(
                "external C({}) / (1 - d) [{}]",
                fmt(e.d.unwrap_or(0.0)),
                e.citation.as_deref().unwrap_or("")
            ),
            LimitEntryKind::FertonaniDuman => {
                format!("(n C_{{{0},{1}}} + 1) / ({1} + 1)", e.n.unwrap_or(0), e.k.unwrap_or(0))
            }
        };
        println!("{what}: {}", fmt(e.value));
    }
    println!("best bound on lim C(d)/(1-d) as d -> 1: {}", fmt(report.best));
    println!("lim C(d)/(1-d) ≤ {:.4}", round_up(report.best, 4));
    if let Some(c) = report.best_computed() {
        println!("best computed bound: {}", fmt(c));
    }
    for r in report.references {
        println!("reference {} = {} ({})", r.name, r.value, r.citation);
    }
    for &i in &report.suspicious {
        eprintln!("warning: entry {} lies below the known lower bound; check its inputs", i + 1);
    }
    if unconverged > 0 {
        eprintln!("note: {unconverged} solves stopped before tol; their upper bounds are still certified");
    }

    if let Some(path) = out {
        let mut w = csv_sink(Some(path))?;
        w.write_record(REPORT_HEADER)?;
        for row in report_rows(&report) {
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    Ok(0)
}

pub fn diag(common: &CommonArgs, d: f64, n_spec: &str, out: Option<&Path>) -> Result<u8> {
    let opts = common.solve_options();
    let lengths = sorted_lengths(n_spec)?;
    let rows = convergence_diagnostic(d, &lengths, &opts)?;
    let mut w = csv_sink(out)?;
    w.write_record(DIAG_HEADER)?;
    let mut unconverged = 0;
    for r in &rows {
        w.write_record([
            r.n.to_string(),
            fmt(r.d),
            r.k.to_string(),
            fmt(r.cn.normalized_lower),
            fmt(r.cn.normalized_upper),
            fmt(r.cnk.normalized_lower),
            fmt(r.cnk.normalized_upper),
            fmt(r.gap),
        ])?;
        unconverged += usize::from(!r.cn.converged) + usize::from(!r.cnk.converged);
    }
    w.flush()?;
    if unconverged > 0 {
        eprintln!("{unconverged} solves did not converge");
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(0)
}

pub fn kernel_build(common: &CommonArgs, n: usize, d: Option<f64>, k: Option<usize>, out: Option<&Path>) -> Result<u8> {
    let model = model_of(d, k)?;
    let opts = common.solve_options();
    let build = BuildOptions { max_n: opts.max_n, exec: Exec::Parallel };
    let kernel = match (out, opts.cache_dir.as_deref()) {
        (Some(path), _) => {
            let kernel = match model {
                ChannelModel::Iid { d } => build_iid_kernel_with(n, d, &build)?,
                ChannelModel::Exact { k } => build_exact_kernel_with(n, k, &build)?,
            };
            save_kernel(&kernel, path)?;
            println!("wrote {}", path.display());
            kernel
        }
        (None, Some(dir)) => {
            let kernel = cached_kernel(Some(dir), n, model, &build)?;
            println!("cached under {}", dir.display());
            kernel
        }
        (None, None) => bail!("kernel build needs --out or --cache-dir (or DELCAP_CACHE_DIR)"),
    };
    println!("{} kernel, n = {}, {} nonzero entries", kernel.model().name(), kernel.n(), kernel.nnz());
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_decimals() {
        assert_eq!(fmt(0.7), "0.700000000000");
        assert_eq!(fmt(1.0 / 3.0), "0.333333333333");
    }

    #[test]
    fn convexity_count() {
        assert_eq!(convexity_violations(&[1.0, 0.5, 0.2, 0.0], 0.0), 0);
        assert_eq!(convexity_violations(&[1.0, 0.9, 0.2, 0.0], 0.0), 1);
    }

    #[test]
    fn model_selection() {
        assert!(model_of(Some(1.5), None).is_err());
        assert!(model_of(None, None).is_err());
        assert_eq!(model_of(None, Some(2)).unwrap(), ChannelModel::Exact { k: 2 });
    }
}
