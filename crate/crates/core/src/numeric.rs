//! Small numeric helpers shared by the kernel and solver.

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        let (big, small) = if self.sum.abs() >= x.abs() { (self.sum, x) } else { (x, self.sum) };
        self.carry += (big - t) + small;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Exact binomial coefficient; panics on overflow (never reached for n <= 62).
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1)
        acc = acc
            .checked_mul((n - i) as u64)
            .expect("binomial overflow")
            / (i as u64 + 1);
    }
    acc
}

/// `[base^0, base^1, ..., base^max_exp]` by repeated multiplication.
pub fn power_table(base: f64, max_exp: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_exp + 1);
    let mut p = 1.0;
    for _ in 0..=max_exp {
        out.push(p);
        p *= base;
    }
    out
}

/// Rounds `x` to the nearest integer when it is within `1e-9` of one.
///
/// Grid arithmetic such as `(1 - 0.3 - 0.1) * 10` lands a few ulps away
/// from the integer it denotes; ceil/floor must not jump across it.
pub fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 {
        r
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_beats_naive() {
        let mut xs = vec![1.0];
        xs.extend(std::iter::repeat(1e-16).take(10_000));
        let naive: f64 = xs.iter().sum();
        let comp = compensated_sum(xs.iter().copied());
        assert_eq!(naive, 1.0);
        assert!((comp - (1.0 + 1e-12)).abs() < 1e-20);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(24, 12), 2_704_156);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(0, 0), 1);
        let row: u64 = (0..=20).map(|k| binomial(20, k)).sum();
        assert_eq!(row, 1 << 20);
    }

    #[test]
    fn powers() {
        assert_eq!(power_table(0.5, 3), vec![1.0, 0.5, 0.25, 0.125]);
        assert_eq!(power_table(0.0, 2), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn snapping() {
        assert_eq!(snap((1.0 - 0.3 - 0.1) * 10.0), 6.0);
        assert_eq!(snap(2.5), 2.5);
    }
}
