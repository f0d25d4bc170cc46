//! Interval calculus relating `C_n(d)`, `C_{n,k}`, `C(d)` and the limit of
//! `C(d) / (1 - d)` as `d -> 1`.
//!
//! Every value here is in bits per input bit. Outputs are clamped to
//! `[0, 1]`; the Chernoff slack `2 e^{-2 ε² n}` routinely exceeds 1 at the
//! block lengths that are computable.

mod report;

pub use self::report::{
    convergence_diagnostic, limit_report, DiagnosticRow, ExactInput, LimitEntry, LimitEntryKind, LimitPoint,
    LimitReport, PointSource, ReferenceConstant, REFERENCES, REFERENCE_LOWER,
};

use crate::error::{domain, Result};
use crate::numeric::snap;
use crate::solver::CapacityBracket;

/// A closed interval in bits per input bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn point(value: f64) -> Self {
        Self { lower: value, upper: value }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, other: &Interval, slack: f64) -> bool {
        self.lower - slack <= other.lower && other.upper <= self.upper + slack
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lower.max(other.lower);
        let hi = self.upper.min(other.upper);
        (lo <= hi).then_some(Interval::new(lo, hi))
    }
}

impl From<&CapacityBracket> for Interval {
    fn from(b: &CapacityBracket) -> Self {
        Interval::new(b.normalized_lower, b.normalized_upper)
    }
}

impl From<CapacityBracket> for Interval {
    fn from(b: CapacityBracket) -> Self {
        (&b).into()
    }
}

/// Quantity a [`BoundBracket`] encloses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundTarget {
    /// `C(d)`.
    Capacity { d: f64 },
    /// `C_n(d)`.
    BlockCapacity { n: usize, d: f64 },
    /// `C_{n,k}`.
    ExactCapacity { n: usize, k: usize },
    /// `lim_{d -> 1} C(d) / (1 - d)`.
    Limit,
}

/// Which relation produced a bracket, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    /// `(1 - d^n)/n <= C_n(d) <= 1 - d`: antipodal inputs vs. the erasure channel.
    ErasureSandwich { n: usize, d: f64 },
    /// `C_n(d) - log2(n+1)/n <= C(d) <= C_n(d)`.
    BlockLength { n: usize },
    /// `C_{n,k_lo} - s <= C_n(d) <= C_{n,k_hi} + s` from output-length concentration.
    LengthConcentration { n: usize, d: f64, eps: f64, k_low: usize, k_high: usize },
    /// `C(1-k/n+ε) - s <= C_{n,k} <= C(1-k/n-ε) + s + log2(n+1)/n`.
    ExactFromCapacity { n: usize, k: usize, eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundBracket {
    pub target: BoundTarget,
    pub lower: f64,
    pub upper: f64,
    pub provenance: Provenance,
}

impl BoundBracket {
    fn clamped(target: BoundTarget, lower: f64, upper: f64, provenance: Provenance) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() {
            return Err(domain("bound inputs are NaN"));
        }
        let lower = lower.clamp(0.0, 1.0);
        let upper = upper.clamp(0.0, 1.0);
        if lower > upper {
            return Err(domain(format!("inconsistent inputs: lower {lower} exceeds upper {upper}")));
        }
        Ok(Self { target, lower, upper, provenance })
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.lower, self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, inner: &Interval, slack: f64) -> bool {
        self.interval().contains(inner, slack)
    }
}

fn check_prob(d: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&d) {
        return Err(domain(format!("deletion probability {d} outside [0, 1]")));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(domain("block length must be at least 1"));
    }
    Ok(())
}

/// `2 e^{-2 ε² n}` (natural exponent: it bounds a probability).
pub fn chernoff_slack(n: usize, eps: f64) -> f64 {
    2.0 * (-2.0 * eps * eps * n as f64).exp()
}

/// `log2(n + 1) / n`, the price of not knowing the sub-block output lengths.
pub fn block_penalty(n: usize) -> f64 {
    ((n + 1) as f64).log2() / n as f64
}

/// `[(1 - d^n)/n, 1 - d]` on `C_n(d)`.
pub fn erasure_sandwich(n: usize, d: f64) -> Result<BoundBracket> {
    check_n(n)?;
    check_prob(d)?;
    let lower = (1.0 - d.powi(n as i32)) / n as f64;
    BoundBracket::clamped(
        BoundTarget::BlockCapacity { n, d },
        lower,
        1.0 - d,
        Provenance::ErasureSandwich { n, d },
    )
}

/// `C(d)` from a bracket on `C_n(d)`: `[C_n - log2(n+1)/n, C_n]`.
pub fn capacity_from_block(n: usize, d: f64, cn: Interval) -> Result<BoundBracket> {
    check_n(n)?;
    check_prob(d)?;
    BoundBracket::clamped(
        BoundTarget::Capacity { d },
        cn.lower - block_penalty(n),
        cn.upper,
        Provenance::BlockLength { n },
    )
}

/// The exact-channel indices `(⌈(1-d-ε)n⌉, ⌊(1-d+ε)n⌋)`.
///
/// Products that land within 1e-9 of an integer are taken as that integer.
pub fn block_exact_indices(n: usize, d: f64, eps: f64) -> (usize, usize) {
    let nf = n as f64;
    let lo = snap((1.0 - d - eps) * nf).ceil().max(0.0) as usize;
    let hi = snap((1.0 - d + eps) * nf).floor().max(0.0) as usize;
    (lo.min(n), hi.min(n))
}

/// Bracket on `C_n(d)` from brackets on `C_{n,k_low}` and `C_{n,k_high}`,
/// where the indices come from [`block_exact_indices`].
///
/// Requires `ε > 0` and `d ∈ [ε, 1 - ε]`.
pub fn block_from_exact(n: usize, d: f64, eps: f64, exact_low: Interval, exact_high: Interval) -> Result<BoundBracket> {
    check_n(n)?;
    if !(eps > 0.0) {
        return Err(domain(format!("ε must be positive, got {eps}")));
    }
    if !(snap_unit(d - eps) >= 0.0 && snap_unit(1.0 - eps - d) >= 0.0) {
        return Err(domain(format!("d = {d} outside [ε, 1 - ε] for ε = {eps}")));
    }
    let (k_low, k_high) = block_exact_indices(n, d, eps);
    let s = chernoff_slack(n, eps);
    BoundBracket::clamped(
        BoundTarget::BlockCapacity { n, d },
        exact_low.lower - s,
        exact_high.upper + s,
        Provenance::LengthConcentration { n, d, eps, k_low, k_high },
    )
}

/// The two deletion probabilities `(1 - k/n + ε, 1 - k/n - ε)` that
/// [`exact_from_capacity`] needs brackets for.
pub fn exact_shifted_arguments(n: usize, k: usize, eps: f64) -> (f64, f64) {
    let base = 1.0 - k as f64 / n as f64;
    (snap_unit(base + eps), snap_unit(base - eps))
}

/// Bracket on `C_{n,k}` from brackets on `C(1-k/n+ε)` (`c_plus`) and
/// `C(1-k/n-ε)` (`c_minus`).
pub fn exact_from_capacity(n: usize, k: usize, eps: f64, c_plus: Interval, c_minus: Interval) -> Result<BoundBracket> {
    check_n(n)?;
    if k > n {
        return Err(domain(format!("kept count {k} exceeds block length {n}")));
    }
    if !(eps > 0.0) {
        return Err(domain(format!("ε must be positive, got {eps}")));
    }
    let (plus, minus) = exact_shifted_arguments(n, k, eps);
    if !(0.0..=1.0).contains(&plus) || !(0.0..=1.0).contains(&minus) {
        return Err(domain(format!("shifted deletion probabilities {minus}, {plus} leave [0, 1]")));
    }
    let s = chernoff_slack(n, eps);
    BoundBracket::clamped(
        BoundTarget::ExactCapacity { n, k },
        c_plus.lower - s,
        c_minus.upper + s + block_penalty(n),
        Provenance::ExactFromCapacity { n, k, eps },
    )
}

/// Tightest [`block_from_exact`] bracket over `ε ∈ {i/n : 1 <= i <= n/4}`.
///
/// `exact(k)` supplies a bracket on `C_{n,k}`. Returns `None` when no ε in
/// the sweep admits `d`.
pub fn tightest_block_bracket(
    n: usize,
    d: f64,
    mut exact: impl FnMut(usize) -> Result<Interval>,
) -> Result<Option<BoundBracket>> {
    let mut best: Option<BoundBracket> = None;
    for i in 1..=n / 4 {
        let eps = i as f64 / n as f64;
        if snap_unit(d - eps) < 0.0 || snap_unit(1.0 - eps - d) < 0.0 {
            continue;
        }
        let (lo, hi) = block_exact_indices(n, d, eps);
        let b = block_from_exact(n, d, eps, exact(lo)?, exact(hi)?)?;
        if best.map_or(true, |cur| b.width() < cur.width()) {
            best = Some(b);
        }
    }
    Ok(best)
}

/// `(n·C_{n,k} + 1) / (k + 1)`: upper bound on `limsup_{d->1} C(d)/(1-d)`
/// from any upper bound on `C_{n,k}` (Fertonani–Duman).
pub fn fertonani_duman_limit_upper(n: usize, k: usize, cnk_upper: f64) -> f64 {
    (n as f64 * cnk_upper + 1.0) / (k as f64 + 1.0)
}

/// `min_i upper_i / (1 - d_i)` over certified upper bounds on `C(d_i)`.
///
/// Valid because the limit equals `inf_d C(d)/(1-d)`.
pub fn limit_upper_from_points(points: &[(f64, f64)]) -> Result<f64> {
    if points.is_empty() {
        return Err(crate::Error::Empty("no points for the limit bound"));
    }
    let mut best = f64::INFINITY;
    for &(d, upper) in points {
        if !(d > 0.0 && d < 1.0) {
            return Err(domain(format!("point deletion probability {d} outside (0, 1)")));
        }
        best = best.min(upper / (1.0 - d));
    }
    Ok(best)
}

/// Rounds an upper bound up to `decimals` places, so the printed value is
/// still an upper bound.
pub fn round_up(value: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    snap(value * scale).ceil() / scale
}

/// Snaps values within 1e-12 of 0 or 1 onto the endpoint.
fn snap_unit(x: f64) -> f64 {
    if x.abs() <= 1e-12 {
        0.0
    } else if (x - 1.0).abs() <= 1e-12 {
        1.0
    } else {
        x
    }
}
