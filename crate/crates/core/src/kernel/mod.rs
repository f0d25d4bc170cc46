//! Conditional laws of the i.i.d. deletion channel and of the exact
//! (fixed output length) deletion channel on `n`-bit inputs.

mod io;

pub use self::io::{cached_kernel, load_kernel, load_kernel_with_cap, save_kernel, KERNEL_MAGIC, KERNEL_VERSION};

use crate::bitseq::{for_each_subsequence, for_each_subsequence_of_len, BitString};
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::numeric::{binomial, compensated_sum, power_table};

/// Default cap on the input length for kernel construction.
pub const DEFAULT_MAX_N: usize = 14;
/// Largest cap that may be requested explicitly.
pub const HARD_MAX_N: usize = 16;

const ROW_SUM_TOL: f64 = 1e-12;

/// Index bijection between words of length `<= n` and `0..2^(n+1)-1`,
/// ordered by length and then by packed value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputAlphabet {
    n: usize,
}

impl OutputAlphabet {
    pub fn new(n: usize) -> Self {
        assert!(n <= crate::bitseq::MAX_LEN);
        Self { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        (1usize << (self.n + 1)) - 1
    }

    #[inline]
    pub fn index_of(len: usize, bits: u32) -> u32 {
        ((1u32 << len) - 1) + bits
    }

    pub fn index(&self, y: BitString) -> u32 {
        debug_assert!(y.len() <= self.n);
        Self::index_of(y.len(), y.bits())
    }

    pub fn word(&self, index: u32) -> BitString {
        debug_assert!((index as usize) < self.size());
        let len = (31 - (index + 1).leading_zeros()) as usize;
        BitString::from_raw(len, index + 1 - (1 << len))
    }

    /// Length of the word at `index`.
    #[inline]
    pub fn len_of(index: u32) -> usize {
        (31 - (index + 1).leading_zeros()) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    /// Each bit deleted independently with probability `d`.
    Iid { d: f64 },
    /// Output uniform over the `C(n, k)` length-`k` subsequences.
    Exact { k: usize },
}

impl ChannelModel {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelModel::Iid { .. } => "iid",
            ChannelModel::Exact { .. } => "exact",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub max_n: usize,
    pub exec: Exec,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { max_n: DEFAULT_MAX_N, exec: Exec::default() }
    }
}

impl BuildOptions {
    pub fn with_exec(exec: Exec) -> Self {
        Self { exec, ..Self::default() }
    }
}

/// Sparse row-stochastic matrix `P(y | x)`, one row per input in packed order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelKernel {
    n: usize,
    model: ChannelModel,
    offsets: Vec<usize>,
    outputs: Vec<u32>,
    probs: Vec<f64>,
}

/// One kernel row: ascending output indices with their probabilities.
#[derive(Debug, Clone, Copy)]
pub struct Row<'a> {
    pub outputs: &'a [u32],
    pub probs: &'a [f64],
}

impl<'a> Row<'a> {
    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + 'a {
        self.outputs.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn get(&self, output: u32) -> f64 {
        self.outputs.binary_search(&output).map_or(0.0, |i| self.probs[i])
    }
}

pub(crate) fn check_n(n: usize, cap: usize) -> Result<()> {
    let cap = cap.min(HARD_MAX_N);
    if n == 0 || n > cap {
        return Err(Error::Size { n, cap });
    }
    Ok(())
}

impl ChannelKernel {
    /// Assembles a kernel from explicit rows.
    ///
    /// Checks shape only (row count, index range and ordering); use
    /// [`ChannelKernel::validate`] for stochasticity.
    pub fn from_rows(n: usize, model: ChannelModel, rows: Vec<Vec<(u32, f64)>>) -> Result<Self> {
        check_n(n, HARD_MAX_N)?;
        if rows.len() != 1 << n {
            return Err(Error::Validation(format!("expected {} rows, got {}", 1 << n, rows.len())));
        }
        let alphabet = OutputAlphabet::new(n).size() as u32;
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut outputs = Vec::new();
        let mut probs = Vec::new();
        offsets.push(0);
        for (x, row) in rows.into_iter().enumerate() {
            for (i, &(y, p)) in row.iter().enumerate() {
                if y >= alphabet {
                    return Err(Error::Validation(format!("row {x}: output index {y} out of range")));
                }
                if i > 0 && row[i - 1].0 >= y {
                    return Err(Error::Validation(format!("row {x}: output indices not ascending")));
                }
                outputs.push(y);
                probs.push(p);
            }
            offsets.push(outputs.len());
        }
        Ok(Self { n, model, offsets, outputs, probs })
    }

    fn from_row_vecs(n: usize, model: ChannelModel, rows: Vec<Vec<(u32, f64)>>) -> Self {
        let total = rows.iter().map(Vec::len).sum();
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut outputs = Vec::with_capacity(total);
        let mut probs = Vec::with_capacity(total);
        offsets.push(0);
        for row in rows {
            for (y, p) in row {
                outputs.push(y);
                probs.push(p);
            }
            offsets.push(outputs.len());
        }
        Self { n, model, offsets, outputs, probs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> ChannelModel {
        self.model
    }

    pub fn alphabet(&self) -> OutputAlphabet {
        OutputAlphabet::new(self.n)
    }

    pub fn num_inputs(&self) -> usize {
        1 << self.n
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.outputs.len()
    }

    #[inline]
    pub fn row(&self, x: usize) -> Row<'_> {
        let (a, b) = (self.offsets[x], self.offsets[x + 1]);
        Row { outputs: &self.outputs[a..b], probs: &self.probs[a..b] }
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        (0..self.num_inputs()).map(move |x| self.row(x))
    }

    /// `P(y | x)`.
    pub fn prob(&self, x: BitString, y: BitString) -> f64 {
        if x.len() != self.n || y.len() > self.n {
            return 0.0;
        }
        self.row(x.bits() as usize).get(self.alphabet().index(y))
    }

    /// Checks that every row is a probability vector (sum within 1e-12).
    pub fn validate(&self) -> Result<()> {
        for (x, row) in self.rows().enumerate() {
            if let Some(p) = row.probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
                return Err(Error::Validation(format!("row {x}: invalid probability {p}")));
            }
            let s = compensated_sum(row.probs.iter().copied());
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Validation(format!("row {x}: sums to {s}")));
            }
        }
        Ok(())
    }
}

/// Kernel of the i.i.d. deletion channel on `n` bits with the default cap.
pub fn build_iid_kernel(n: usize, d: f64) -> Result<ChannelKernel> {
    build_iid_kernel_with(n, d, &BuildOptions::default())
}

pub fn build_iid_kernel_with(n: usize, d: f64, opts: &BuildOptions) -> Result<ChannelKernel> {
    check_n(n, opts.max_n)?;
    if !(0.0..=1.0).contains(&d) {
        return Err(domain(format!("deletion probability {d} outside [0, 1]")));
    }
    let model = ChannelModel::Iid { d };
    if d == 0.0 {
        return Ok(identity(n, model));
    }
    if d == 1.0 {
        return Ok(all_to_empty(n, model));
    }
    let keep = power_table(1.0 - d, n);
    let drop = power_table(d, n);
    // probability of one particular keep-mask with j survivors
    let weight: Vec<f64> = (0..=n).map(|j| keep[j] * drop[n - j]).collect();
    let alphabet = OutputAlphabet::new(n).size();
    let rows = opts.exec.map_with_scratch(
        1 << n,
        || RowScratch::new(alphabet),
        |scratch, x| {
            let x = BitString::from_raw(n, x as u32);
            for_each_subsequence(x, |len, bits| scratch.bump(OutputAlphabet::index_of(len, bits)));
            scratch.drain(|y| weight[OutputAlphabet::len_of(y)])
        },
    );
    Ok(ChannelKernel::from_row_vecs(n, model, rows))
}

/// Kernel of the exact deletion channel keeping `k` of `n` bits.
pub fn build_exact_kernel(n: usize, k: usize) -> Result<ChannelKernel> {
    build_exact_kernel_with(n, k, &BuildOptions::default())
}

pub fn build_exact_kernel_with(n: usize, k: usize, opts: &BuildOptions) -> Result<ChannelKernel> {
    check_n(n, opts.max_n)?;
    if k > n {
        return Err(domain(format!("kept count {k} exceeds input length {n}")));
    }
    let model = ChannelModel::Exact { k };
    if k == n {
        return Ok(identity(n, model));
    }
    if k == 0 {
        return Ok(all_to_empty(n, model));
    }
    let total = binomial(n, k) as f64;
    // only length-k outputs are touched; index them relative to 2^k - 1
    let base = OutputAlphabet::index_of(k, 0);
    let rows = opts.exec.map_with_scratch(
        1 << n,
        || RowScratch::new(1 << k),
        |scratch, x| {
            let x = BitString::from_raw(n, x as u32);
            for_each_subsequence_of_len(x, k, |bits| scratch.bump(bits));
            let mut row = scratch.drain(|_| 1.0);
            for (y, p) in &mut row {
                *y += base;
                *p /= total;
            }
            row
        },
    );
    Ok(ChannelKernel::from_row_vecs(n, model, rows))
}

fn identity(n: usize, model: ChannelModel) -> ChannelKernel {
    let rows = (0..1u32 << n).map(|x| vec![(OutputAlphabet::index_of(n, x), 1.0)]).collect();
    ChannelKernel::from_row_vecs(n, model, rows)
}

fn all_to_empty(n: usize, model: ChannelModel) -> ChannelKernel {
    let rows = (0..1usize << n).map(|_| vec![(0, 1.0)]).collect();
    ChannelKernel::from_row_vecs(n, model, rows)
}

/// Dense occurrence counter with a touched list, reused across rows.
struct RowScratch {
    counts: Vec<u64>,
    touched: Vec<u32>,
}

impl RowScratch {
    fn new(size: usize) -> Self {
        Self { counts: vec![0; size], touched: Vec::new() }
    }

    #[inline]
    fn bump(&mut self, y: u32) {
        let c = &mut self.counts[y as usize];
        if *c == 0 {
            self.touched.push(y);
        }
        *c += 1;
    }

    /// Emits `(y, count * scale(y))` in ascending `y` and resets.
    fn drain(&mut self, scale: impl Fn(u32) -> f64) -> Vec<(u32, f64)> {
        self.touched.sort_unstable();
        let row = self
            .touched
            .iter()
            .map(|&y| {
                let c = std::mem::take(&mut self.counts[y as usize]);
                (y, c as f64 * scale(y))
            })
            .collect();
        self.touched.clear();
        row
    }
}

/// `Σ_{|y| = j} P(y | x)` for an i.i.d. kernel.
pub fn length_law(kernel: &ChannelKernel, x: BitString, j: usize) -> Result<f64> {
    if !matches!(kernel.model, ChannelModel::Iid { .. }) {
        return Err(Error::UnsupportedModel(kernel.model.name()));
    }
    if x.len() != kernel.n {
        return Err(domain(format!("input has length {}, kernel expects {}", x.len(), kernel.n)));
    }
    if j > kernel.n {
        return Err(Error::OutputLongerThanInput { input: kernel.n, output: j });
    }
    let row = kernel.row(x.bits() as usize);
    Ok(compensated_sum(row.iter().filter(|&(y, _)| OutputAlphabet::len_of(y) == j).map(|(_, p)| p)))
}
