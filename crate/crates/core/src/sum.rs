//! Compensated summation in a fixed order.
//!
//! Every quadrature in the crate reduces through [`NeumaierSum`], so results
//! are bitwise reproducible and insensitive to the length of the sum.

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl Extend<f64> for NeumaierSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Compensated sum of an iterator, consumed in order.
pub fn sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut s = NeumaierSum::new();
    s.extend(iter);
    s.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        assert_eq!(sum([1.0, 1e100, 1.0, -1e100]), 2.0);
    }

    #[test]
    fn long_harmonic_tail() {
        let n = 1_000_000;
        let naive: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
        let comp = sum((1..=n).map(|k| 1.0 / k as f64));
        let reference = 14.392_726_722_865_724; // ln n + gamma + 1/2n - 1/12n^2
        assert!((comp - reference).abs() <= (naive - reference).abs());
        assert!((comp - reference).abs() < 1e-13);
    }
}
