//! Compensated summation.

/// Kahan summation in binary64. Results depend only on the order in which
/// values are added.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
    abs_total: f64,
    count: u64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
        self.abs_total += value.abs();
        self.count += 1;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// `count * eps * sum |terms|`.
    pub fn error_bound(&self) -> f64 {
        self.count as f64 * f64::EPSILON * self.abs_total
    }
}

impl Extend<f64> for KahanSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        acc.extend(iter);
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_lost_by_naive_sum() {
        let values = std::iter::once(1.0).chain(std::iter::repeat_n(1e-16, 10_000));
        let acc: KahanSum = values.clone().collect();
        let naive: f64 = values.sum();
        assert_eq!(naive, 1.0);
        assert!((acc.value() - (1.0 + 1e-12)).abs() < 1e-15);
        assert_eq!(acc.count(), 10_001);
    }
}
