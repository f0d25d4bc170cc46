//! Limit-bound aggregation and the finite-length convergence diagnostic.

use super::{fertonani_duman_limit_upper, limit_upper_from_points};
use crate::error::{domain, Error, Result};
use crate::numeric::snap;
use crate::solver::{capacity_cn, capacity_cnk, CapacityBracket, SolveOptions};

/// A literature value shown next to computed results, never fed into them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceConstant {
    pub name: &'static str,
    pub value: f64,
    pub citation: &'static str,
}

/// Known lower bound on `liminf C(d)/(1-d)`; a computed upper bound below
/// it means something is broken.
pub const REFERENCE_LOWER: f64 = 0.1185;

pub const REFERENCES: [ReferenceConstant; 4] = [
    ReferenceConstant {
        name: "liminf C(d)/(1-d) lower bound",
        value: REFERENCE_LOWER,
        citation: "Drinea-Mitzenmacher",
    },
    ReferenceConstant {
        name: "limsup C(d)/(1-d) upper bound",
        value: 0.49,
        citation: "Fertonani-Duman",
    },
    ReferenceConstant {
        name: "lim C(d)/(1-d) upper bound via C(0.65)",
        value: 0.4143,
        citation: "C(0.65) <= C_17(0.65) = 0.145 / 0.35",
    },
    ReferenceConstant {
        name: "C_17(0.65)",
        value: 0.145,
        citation: "Fertonani-Duman numerics",
    },
];

#[derive(Debug, Clone, PartialEq)]
pub enum PointSource {
    /// Computed here; `n` is the block length of the solve.
    Computed { n: usize },
    /// Quoted from the literature; accepted only with a citation.
    External { citation: String },
}

/// A certified upper bound on `C(d)` at one deletion probability.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitPoint {
    pub d: f64,
    pub c_upper: f64,
    pub source: PointSource,
}

impl LimitPoint {
    /// From a solved `C_n(d)` bracket: the upper endpoint plus the solver
    /// tolerance, which upper-bounds `C(d)` since `C(d) <= C_n(d)`.
    pub fn computed(d: f64, bracket: &CapacityBracket) -> Self {
        Self {
            d,
            c_upper: bracket.normalized_upper + bracket.tol,
            source: PointSource::Computed { n: bracket.n },
        }
    }

    pub fn external(d: f64, c_upper: f64, citation: impl Into<String>) -> Result<Self> {
        let citation = citation.into();
        if citation.trim().is_empty() {
            return Err(domain("external points need a citation"));
        }
        Ok(Self { d, c_upper, source: PointSource::External { citation } })
    }
}

/// An upper bound on `C_{n,k}` for the Fertonani–Duman limit formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactInput {
    pub n: usize,
    pub k: usize,
    pub cnk_upper: f64,
}

impl ExactInput {
    pub fn computed(k: usize, bracket: &CapacityBracket) -> Self {
        Self { n: bracket.n, k, cnk_upper: bracket.normalized_upper + bracket.tol }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitEntryKind {
    /// `upper(C(d)) / (1 - d)` from a computed point.
    Point,
    /// Same, from a quoted point.
    External,
    /// `(n C_{n,k} + 1)/(k + 1)`.
    FertonaniDuman,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitEntry {
    pub kind: LimitEntryKind,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub d: Option<f64>,
    /// Upper bound on `lim_{d->1} C(d)/(1-d)`.
    pub value: f64,
    pub citation: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub entries: Vec<LimitEntry>,
    /// Index into `entries` of the smallest bound.
    pub best_index: usize,
    pub best: f64,
    /// Entries whose value falls below [`REFERENCE_LOWER`].
    pub suspicious: Vec<usize>,
    pub references: &'static [ReferenceConstant],
}

impl LimitReport {
    pub fn best_entry(&self) -> &LimitEntry {
        &self.entries[self.best_index]
    }

    /// Best bound over computed entries only.
    pub fn best_computed(&self) -> Option<f64> {
        self.entries
            .iter()
            .filter(|e| e.kind != LimitEntryKind::External)
            .map(|e| e.value)
            .min_by(f64::total_cmp)
    }
}

/// Combines point bounds and Fertonani–Duman bounds into one report.
pub fn limit_report(points: &[LimitPoint], exact: &[ExactInput]) -> Result<LimitReport> {
    if points.is_empty() && exact.is_empty() {
        return Err(Error::Empty("no points or exact-channel inputs for the report"));
    }
    let mut entries = Vec::with_capacity(points.len() + exact.len());
    for p in points {
        let value = limit_upper_from_points(&[(p.d, p.c_upper)])?;
        let (kind, n, citation) = match &p.source {
            PointSource::Computed { n } => (LimitEntryKind::Point, Some(*n), None),
            PointSource::External { citation } => (LimitEntryKind::External, None, Some(citation.clone())),
        };
        entries.push(LimitEntry { kind, n, k: None, d: Some(p.d), value, citation });
    }
    for e in exact {
        if e.k > e.n {
            return Err(domain(format!("kept count {} exceeds block length {}", e.k, e.n)));
        }
        entries.push(LimitEntry {
            kind: LimitEntryKind::FertonaniDuman,
            n: Some(e.n),
            k: Some(e.k),
            d: None,
            value: fertonani_duman_limit_upper(e.n, e.k, e.cnk_upper),
            citation: None,
        });
    }
    let (best_index, best) = entries
        .iter()
        .enumerate()
        .map(|(i, e)| (i, e.value))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    let suspicious = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.value < REFERENCE_LOWER)
        .map(|(i, _)| i)
        .collect();
    Ok(LimitReport { entries, best_index, best, suspicious, references: &REFERENCES })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub n: usize,
    pub d: f64,
    /// `round((1 - d) n)`.
    pub k: usize,
    pub cn: CapacityBracket,
    pub cnk: CapacityBracket,
    /// Distance between the normalized bracket midpoints.
    pub gap: f64,
}

/// `k_n = round((1 - d) n)`, half away from zero.
pub fn matched_exact_index(n: usize, d: f64) -> usize {
    snap((1.0 - d) * n as f64).round().clamp(0.0, n as f64) as usize
}

/// `C_n(d)` next to `C_{n, round((1-d)n)}` for each `n`.
///
/// Both sequences converge to `C(d)`; the gap column shows how fast.
pub fn convergence_diagnostic(d: f64, n_list: &[usize], opts: &SolveOptions) -> Result<Vec<DiagnosticRow>> {
    if !(0.0..=1.0).contains(&d) {
        return Err(domain(format!("deletion probability {d} outside [0, 1]")));
    }
    let jobs = opts.exec.map(n_list.len(), |i| {
        let n = n_list[i];
        let k = matched_exact_index(n, d);
        let cn = capacity_cn(n, d, opts)?;
        let cnk = capacity_cnk(n, k, opts)?;
        let mid = |b: &CapacityBracket| 0.5 * (b.normalized_lower + b.normalized_upper);
        Ok(DiagnosticRow { n, d, k, cn, cnk, gap: (mid(&cn) - mid(&cnk)).abs() })
    });
    jobs.into_iter().collect()
}
