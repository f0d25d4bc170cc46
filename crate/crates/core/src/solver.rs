//! Certified channel capacity by alternating maximization.
//!
//! At input law `p` with output law `q = pW`, the mutual information
//! `I(p) = Σ p(x) D(W(·|x) ‖ q)` is a lower bound on capacity and
//! `max_x D(W(·|x) ‖ q)` an upper bound. The update
//! `p'(x) ∝ p(x) 2^{D(W(·|x) ‖ q)}` never decreases `I`, and the gap closes
//! as `p` approaches a capacity-achieving law.
//!
//! With symmetry reduction the iterate is kept constant on
//! reverse/complement orbits of the input; only one row per orbit is touched
//! and `q` is recovered by averaging over the output-side group action.

use std::path::PathBuf;

use crate::bitseq::{canonical_class, orbit_size, BitString};
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::kernel::{cached_kernel, BuildOptions, ChannelKernel, ChannelModel, OutputAlphabet, Row, DEFAULT_MAX_N};
use crate::numeric::CompensatedSum;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 200_000;
/// Input length from which [`Symmetry::Auto`] turns the reduction on.
pub const AUTO_SYMMETRY_MIN_N: usize = 10;
/// Per-bit rounding allowance added outside every reported bracket.
pub const ROUNDING_ALLOWANCE: f64 = 64.0 * f64::EPSILON;

const STEP_GROWTH: f64 = 1.5;
const MAX_STEP: f64 = 64.0;
/// Smallest class weight; lets classes that were pushed down early recover.
const WEIGHT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Symmetry {
    #[default]
    Auto,
    On,
    Off,
}

impl Symmetry {
    pub fn enabled_for(self, n: usize) -> bool {
        match self {
            Symmetry::Auto => n >= AUTO_SYMMETRY_MIN_N,
            Symmetry::On => true,
            Symmetry::Off => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Requested gap `upper - lower`, in bits (not normalized).
    pub tol: f64,
    pub max_iters: usize,
    pub symmetry: Symmetry,
    pub exec: Exec,
    pub cache_dir: Option<PathBuf>,
    /// Kernel construction cap (see [`crate::kernel::HARD_MAX_N`]).
    pub max_n: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            symmetry: Symmetry::Auto,
            exec: Exec::default(),
            cache_dir: None,
            max_n: DEFAULT_MAX_N,
        }
    }
}

impl SolveOptions {
    fn build_options(&self) -> BuildOptions {
        BuildOptions { max_n: self.max_n, exec: self.exec }
    }
}

/// One certificate: the capacity lies in `[lower, upper]` (bits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub lower: f64,
    pub upper: f64,
}

impl Certificate {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityBracket {
    pub n: usize,
    /// Bits per channel use.
    pub lower: f64,
    pub upper: f64,
    /// Bits per input bit.
    pub normalized_lower: f64,
    pub normalized_upper: f64,
    pub iterations: usize,
    pub tol: f64,
    pub converged: bool,
}

impl CapacityBracket {
    fn from_certificate(n: usize, cert: Certificate, iterations: usize, tol: f64, converged: bool) -> Self {
        let nf = n as f64;
        Self {
            n,
            lower: cert.lower,
            upper: cert.upper,
            normalized_lower: cert.lower / nf,
            normalized_upper: cert.upper / nf,
            iterations,
            tol,
            converged,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Whether `value` (bits per input bit) lies in the normalized bracket,
    /// widened by `slack`.
    pub fn contains_normalized(&self, value: f64, slack: f64) -> bool {
        self.normalized_lower - slack <= value && value <= self.normalized_upper + slack
    }
}

/// Input law over `{0,1}^n`, indexed by packed input value.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution {
    pub n: usize,
    pub weights: Vec<f64>,
}

/// Iteration state for one kernel.
pub struct AlternatingMaximizer<'k> {
    kernel: &'k ChannelKernel,
    exec: Exec,
    /// Representative input of each optimized class.
    reps: Vec<usize>,
    /// Members per class.
    class_size: Vec<usize>,
    /// Σ W log2 W over each representative row.
    neg_entropy: Vec<f64>,
    col_offsets: Vec<usize>,
    col_class: Vec<u32>,
    col_prob: Vec<f64>,
    /// Output index maps for reversal and complementation.
    output_maps: Option<(Vec<u32>, Vec<u32>)>,
    weights: Vec<f64>,
    q_rep: Vec<f64>,
    q: Vec<f64>,
    log_q: Vec<f64>,
    divergence: Vec<f64>,
    iterations: usize,
}

impl<'k> AlternatingMaximizer<'k> {
    pub fn new(kernel: &'k ChannelKernel, symmetric: bool, exec: Exec) -> Result<Self> {
        kernel.validate()?;
        let n = kernel.n();
        let alphabet = kernel.alphabet();
        let (reps, class_size) = if symmetric {
            let mut reps = Vec::new();
            let mut sizes = Vec::new();
            for x in BitString::all(n) {
                if canonical_class(x) == x {
                    reps.push(x.bits() as usize);
                    sizes.push(orbit_size(x));
                }
            }
            (reps, sizes)
        } else {
            ((0..kernel.num_inputs()).collect(), vec![1; kernel.num_inputs()])
        };
        let output_maps = symmetric.then(|| output_maps(alphabet));
        if let Some((rev, comp)) = &output_maps {
            check_invariance(kernel, rev, comp)?;
        }

        let neg_entropy = exec.map(reps.len(), |c| {
            kernel.row(reps[c]).iter().filter(|&(_, p)| p > 0.0).map(|(_, p)| p * p.log2()).collect::<CompensatedSum>().value()
        });

        // transpose the representative rows; class order within a column is ascending
        let size = alphabet.size();
        let mut col_offsets = vec![0usize; size + 1];
        for &r in &reps {
            for &y in kernel.row(r).outputs {
                col_offsets[y as usize + 1] += 1;
            }
        }
        for i in 0..size {
            col_offsets[i + 1] += col_offsets[i];
        }
        let nnz = col_offsets[size];
        let mut fill = col_offsets.clone();
        let mut col_class = vec![0u32; nnz];
        let mut col_prob = vec![0.0; nnz];
        for (c, &r) in reps.iter().enumerate() {
            for (y, p) in kernel.row(r).iter() {
                let slot = &mut fill[y as usize];
                col_class[*slot] = c as u32;
                col_prob[*slot] = p;
                *slot += 1;
            }
        }

        let total = kernel.num_inputs() as f64;
        let weights = class_size.iter().map(|&s| s as f64 / total).collect();
        let classes = reps.len();
        Ok(Self {
            kernel,
            exec,
            reps,
            class_size,
            neg_entropy,
            col_offsets,
            col_class,
            col_prob,
            output_maps,
            weights,
            q_rep: vec![0.0; size],
            q: vec![0.0; size],
            log_q: vec![0.0; size],
            divergence: vec![0.0; classes],
            iterations: 0,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.reps.len()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Certificate for the current input law.
    pub fn evaluate(&mut self) -> Certificate {
        let exec = self.exec;
        let (offsets, classes, probs, weights) = (&self.col_offsets, &self.col_class, &self.col_prob, &self.weights);
        exec.fill(&mut self.q_rep, |y| {
            let (a, b) = (offsets[y], offsets[y + 1]);
            let mut acc = CompensatedSum::new();
            for (&c, &p) in classes[a..b].iter().zip(&probs[a..b]) {
                acc.add(weights[c as usize] * p);
            }
            acc.value()
        });
        match &self.output_maps {
            Some((rev, comp)) => {
                let q_rep = &self.q_rep;
                exec.fill(&mut self.q, |y| {
                    let r = rev[y] as usize;
                    let c = comp[y] as usize;
                    let rc = comp[r] as usize;
                    0.25 * ((q_rep[y] + q_rep[r]) + (q_rep[c] + q_rep[rc]))
                });
            }
            None => self.q.copy_from_slice(&self.q_rep),
        }
        let q = &self.q;
        exec.fill(&mut self.log_q, |y| q[y].log2());

        let (kernel, reps, neg_entropy, log_q) = (self.kernel, &self.reps, &self.neg_entropy, &self.log_q);
        exec.fill(&mut self.divergence, |c| {
            let row: Row<'_> = kernel.row(reps[c]);
            let mut acc = CompensatedSum::new();
            acc.add(neg_entropy[c]);
            for (&y, &p) in row.outputs.iter().zip(row.probs) {
                if p > 0.0 {
                    acc.add(-p * log_q[y as usize]);
                }
            }
            acc.value()
        });

        let mut lower = CompensatedSum::new();
        let mut upper = f64::NEG_INFINITY;
        for (&w, &dv) in self.weights.iter().zip(&self.divergence) {
            if w > 0.0 {
                lower.add(w * dv);
            }
            upper = upper.max(dv);
        }
        self.iterations += 1;
        let n = self.kernel.n() as f64;
        Certificate { lower: lower.value().max(0.0), upper: upper.min(n).max(0.0) }
    }

    /// Multiplicative update from the divergences of the last evaluation.
    pub fn update(&mut self) {
        self.update_with_step(1.0);
    }

    /// Update `w ∝ w · 2^{step · D}`; `step = 1` is the classical iteration.
    pub fn update_with_step(&mut self, step: f64) {
        let top = self.divergence.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (w, &dv) in self.weights.iter_mut().zip(&self.divergence) {
            if *w > 0.0 {
                *w = (*w * (step * (dv - top)).exp2()).max(WEIGHT_FLOOR);
            }
        }
        let total = self.weights.iter().copied().collect::<CompensatedSum>().value();
        for w in &mut self.weights {
            *w /= total;
        }
    }

    /// Current law expanded to every input.
    pub fn input_distribution(&self) -> InputDistribution {
        let n = self.kernel.n();
        let mut weights = vec![0.0; 1 << n];
        if self.output_maps.is_some() {
            for x in BitString::all(n) {
                let rep = canonical_class(x).bits() as usize;
                let c = self.reps.binary_search(&rep).expect("representative");
                weights[x.bits() as usize] = self.weights[c] / self.class_size[c] as f64;
            }
        } else {
            weights.copy_from_slice(&self.weights);
        }
        InputDistribution { n, weights }
    }

    /// Runs until the gap is at most `tol` or `max_iters` evaluations.
    ///
    /// The returned bracket combines the best lower and upper certificates
    /// seen over the run.
    pub fn run(&mut self, tol: f64, max_iters: usize) -> CapacityBracket {
        let mut best = Certificate { lower: 0.0, upper: f64::INFINITY };
        let mut converged = false;
        // last accepted law, its divergences and its lower certificate
        let mut accepted: Option<(Vec<f64>, Vec<f64>, f64)> = None;
        let mut step = 1.0;
        for _ in 0..max_iters.max(1) {
            let cert = self.evaluate();
            best.lower = best.lower.max(cert.lower);
            best.upper = best.upper.min(cert.upper);
            if best.gap() <= tol {
                converged = true;
                break;
            }
            match &mut accepted {
                Some((w, dv, lower)) if step > 1.0 && cert.lower < *lower => {
                    // overshoot: return to the accepted law and take a plain step
                    self.weights.copy_from_slice(w);
                    self.divergence.copy_from_slice(dv);
                    step = 1.0;
                    self.update_with_step(step);
                    continue;
                }
                Some((w, dv, lower)) => {
                    w.copy_from_slice(&self.weights);
                    dv.copy_from_slice(&self.divergence);
                    *lower = cert.lower;
                }
                None => accepted = Some((self.weights.clone(), self.divergence.clone(), cert.lower)),
            }
            self.update_with_step(step);
            step = (step * STEP_GROWTH).min(MAX_STEP);
        }
        // outward allowance for floating-point rounding in the divergences
        let n = self.kernel.n() as f64;
        let slack = ROUNDING_ALLOWANCE * n.max(1.0);
        best.lower = (best.lower - slack).max(0.0);
        best.upper = (best.upper + slack).min(n);
        CapacityBracket::from_certificate(self.kernel.n(), best, self.iterations, tol, converged)
    }
}

/// Output index maps for reversal and complementation at each length.
pub(crate) fn output_maps(alphabet: OutputAlphabet) -> (Vec<u32>, Vec<u32>) {
    let size = alphabet.size() as u32;
    let rev = (0..size).map(|i| alphabet.index(alphabet.word(i).reverse())).collect();
    let comp = (0..size).map(|i| alphabet.index(alphabet.word(i).complement())).collect();
    (rev, comp)
}

/// Checks `W(g y | g x) = W(y | x)` for reversal and complementation.
fn check_invariance(kernel: &ChannelKernel, rev: &[u32], comp: &[u32]) -> Result<()> {
    for x in BitString::all(kernel.n()) {
        let row = kernel.row(x.bits() as usize);
        for (g, map) in [(x.reverse(), rev), (x.complement(), comp)] {
            let image = kernel.row(g.bits() as usize);
            if image.len() != row.len() || row.iter().any(|(y, p)| image.get(map[y as usize]) != p) {
                return Err(Error::Validation(format!("kernel is not reverse/complement invariant at input {x}")));
            }
        }
    }
    Ok(())
}

/// Capacity bracket of an arbitrary kernel.
pub fn capacity_bracket(kernel: &ChannelKernel, tol: f64, max_iters: usize, symmetry: bool) -> Result<CapacityBracket> {
    capacity_bracket_with(kernel, tol, max_iters, symmetry, Exec::default())
}

pub fn capacity_bracket_with(
    kernel: &ChannelKernel,
    tol: f64,
    max_iters: usize,
    symmetry: bool,
    exec: Exec,
) -> Result<CapacityBracket> {
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    if let Some(bits) = degenerate_capacity(kernel) {
        let cert = Certificate { lower: bits, upper: bits };
        return Ok(CapacityBracket::from_certificate(kernel.n(), cert, 1, tol, true));
    }
    Ok(AlternatingMaximizer::new(kernel, symmetry, exec)?.run(tol, max_iters))
}

/// Exact capacity of noiseless and constant-output kernels.
fn degenerate_capacity(kernel: &ChannelKernel) -> Option<f64> {
    let n = kernel.n();
    match kernel.model() {
        ChannelModel::Iid { d } if d == 0.0 => Some(n as f64),
        ChannelModel::Exact { k } if k == n => Some(n as f64),
        ChannelModel::Iid { d } if d == 1.0 => Some(0.0),
        ChannelModel::Exact { k: 0 } => Some(0.0),
        _ => None,
    }
    .filter(|_| kernel.validate().is_ok())
}

fn solve_model(n: usize, model: ChannelModel, opts: &SolveOptions) -> Result<CapacityBracket> {
    let kernel = cached_kernel(opts.cache_dir.as_deref(), n, model, &opts.build_options())?;
    capacity_bracket_with(&kernel, opts.tol, opts.max_iters, opts.symmetry.enabled_for(n), opts.exec)
}

/// `C_n(d)`: capacity of `n` uses of the i.i.d. deletion channel.
pub fn capacity_cn(n: usize, d: f64, opts: &SolveOptions) -> Result<CapacityBracket> {
    solve_model(n, ChannelModel::Iid { d }, opts)
}

/// `C_{n,k}`: capacity of the exact deletion channel keeping `k` of `n` bits.
pub fn capacity_cnk(n: usize, k: usize, opts: &SolveOptions) -> Result<CapacityBracket> {
    solve_model(n, ChannelModel::Exact { k }, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_exact_kernel, build_iid_kernel};

    #[test]
    fn identity_is_exact_at_first_iteration() {
        for n in 1..=6 {
            let k = build_exact_kernel(n, n).unwrap();
            for sym in [false, true] {
                let b = capacity_bracket(&k, 1e-9, 10, sym).unwrap();
                assert_eq!((b.lower, b.upper), (n as f64, n as f64));
                assert_eq!(b.iterations, 1);
                assert!(b.converged);
                // the general iteration gets there too
                let c = AlternatingMaximizer::new(&k, sym, Exec::Serial).unwrap().evaluate();
                assert_eq!((c.lower, c.upper), (n as f64, n as f64));
            }
        }
    }

    #[test]
    fn constant_output_has_zero_capacity() {
        let k = build_iid_kernel(4, 1.0).unwrap();
        let b = capacity_bracket(&k, 1e-9, 10, false).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
    }

    #[test]
    fn erasure_channel() {
        let b = capacity_cn(1, 0.3, &SolveOptions::default()).unwrap();
        assert!(b.converged);
        assert!(b.contains_normalized(0.7, 0.0));
        assert!(b.width() <= 1e-9);
    }

    #[test]
    fn lower_is_monotone_and_below_upper() {
        let k = build_iid_kernel(5, 0.4).unwrap();
        let mut m = AlternatingMaximizer::new(&k, false, Exec::Serial).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for _ in 0..300 {
            let c = m.evaluate();
            assert!(c.lower <= c.upper);
            assert!(c.lower >= prev - 1e-12);
            prev = c.lower;
            m.update();
        }
        let p = m.input_distribution();
        let s: f64 = p.weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(p.weights.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn long_steps_keep_a_distribution_and_valid_certificates() {
        let k = build_iid_kernel(5, 0.6).unwrap();
        let exact = capacity_bracket(&k, 1e-10, 200_000, false).unwrap();
        let mut m = AlternatingMaximizer::new(&k, false, Exec::Serial).unwrap();
        for step in [64.0, 8.0, 1.0, 32.0] {
            let c = m.evaluate();
            assert!(c.lower <= exact.upper && exact.lower <= c.upper);
            m.update_with_step(step);
            let p = m.input_distribution();
            assert!((p.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn accelerated_run_beats_plain_iteration() {
        let k = build_iid_kernel(6, 0.5).unwrap();
        let fast = capacity_bracket(&k, 1e-9, 200_000, false).unwrap();
        let mut m = AlternatingMaximizer::new(&k, false, Exec::Serial).unwrap();
        let mut plain = 0;
        loop {
            let c = m.evaluate();
            plain += 1;
            if c.upper - c.lower <= 1e-9 {
                break;
            }
            m.update();
        }
        assert!(fast.converged);
        assert!(fast.iterations < plain, "{} vs {plain}", fast.iterations);
    }

    #[test]
    fn symmetric_iterates_match_full_iterates() {
        let k = build_iid_kernel(6, 0.55).unwrap();
        let mut full = AlternatingMaximizer::new(&k, false, Exec::Serial).unwrap();
        let mut red = AlternatingMaximizer::new(&k, true, Exec::Serial).unwrap();
        assert!(red.num_classes() < full.num_classes());
        for _ in 0..50 {
            let a = full.evaluate();
            let b = red.evaluate();
            assert!((a.lower - b.lower).abs() < 1e-12);
            assert!((a.upper - b.upper).abs() < 1e-12);
            full.update();
            red.update();
        }
        let pa = full.input_distribution();
        let pb = red.input_distribution();
        for (a, b) in pa.weights.iter().zip(&pb.weights) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn serial_and_parallel_runs_are_identical() {
        let k = build_iid_kernel(8, 0.65).unwrap();
        let a = capacity_bracket_with(&k, 1e-9, 500, true, Exec::Serial).unwrap();
        let b = capacity_bracket_with(&k, 1e-9, 500, true, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_convergence_is_reported_not_raised() {
        let k = build_iid_kernel(6, 0.5).unwrap();
        let b = capacity_bracket(&k, 1e-12, 3, false).unwrap();
        assert!(!b.converged);
        assert_eq!(b.iterations, 3);
        assert!(b.lower <= b.upper);
    }

    #[test]
    fn rejects_bad_input() {
        let k = build_iid_kernel(2, 0.5).unwrap();
        assert!(capacity_bracket(&k, 0.0, 10, false).is_err());
        let rows = vec![vec![(0, 0.9)], vec![(0, 1.0)]];
        let bad = ChannelKernel::from_rows(1, ChannelModel::Exact { k: 0 }, rows).unwrap();
        assert!(matches!(capacity_bracket(&bad, 1e-9, 10, false), Err(Error::Validation(_))));
    }

    #[test]
    fn symmetry_requires_invariant_kernel() {
        // a kernel that treats 0 and 1 differently
        let rows = vec![vec![(0, 1.0)], vec![(2, 1.0)]];
        let k = ChannelKernel::from_rows(1, ChannelModel::Iid { d: 0.5 }, rows).unwrap();
        assert!(capacity_bracket(&k, 1e-9, 10, false).is_ok());
        assert!(matches!(capacity_bracket(&k, 1e-9, 10, true), Err(Error::Validation(_))));
    }

    #[test]
    fn exact_endpoints() {
        let o = SolveOptions::default();
        let b = capacity_cnk(7, 7, &o).unwrap();
        assert_eq!((b.normalized_lower, b.normalized_upper), (1.0, 1.0));
        let b = capacity_cnk(7, 0, &o).unwrap();
        assert_eq!((b.normalized_lower, b.normalized_upper), (0.0, 0.0));
        let b = capacity_cn(4, 0.0, &o).unwrap();
        assert_eq!((b.normalized_lower, b.normalized_upper), (1.0, 1.0));
    }
}
