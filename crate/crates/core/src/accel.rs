//! Compensated summation and Richardson extrapolation with known exponents.

use num_complex::Complex64 as C64;

/// Neumaier-compensated running sum over complex terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    re: (f64, f64),
    im: (f64, f64),
    abs_mass: f64,
}

fn neumaier_add((sum, comp): (f64, f64), x: f64) -> (f64, f64) {
    let t = sum + x;
    let c = if sum.abs() >= x.abs() {
        (sum - t) + x
    } else {
        (x - t) + sum
    };
    (t, comp + c)
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: C64) {
        self.re = neumaier_add(self.re, x.re);
        self.im = neumaier_add(self.im, x.im);
        self.abs_mass += x.norm();
    }

    pub fn add_real(&mut self, x: f64) {
        self.add(C64::new(x, 0.0));
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }

    /// Sum of term magnitudes; scales the round-off floor of the result.
    pub fn abs_mass(&self) -> f64 {
        self.abs_mass
    }
}

/// Richardson table for a sequence sampled at `n0, 2 n0, 4 n0, ...` whose error
/// behaves like `Σ_i c_i n^(-p_i)` for a known increasing list of `p_i`.
#[derive(Debug, Clone)]
pub struct Richardson {
    exponents: Vec<f64>,
    rows: Vec<Vec<C64>>,
}

impl Richardson {
    /// Exponents `p0, p0 + step, ...`, at most `max_levels - 1` eliminations.
    pub fn new(p0: f64, step: f64, max_levels: usize) -> Self {
        let n = max_levels.max(1) - 1;
        Self::with_exponents((0..n).map(|i| p0 + i as f64 * step).collect())
    }

    /// Explicit exponent list; its length caps the elimination depth.
    pub fn with_exponents(exponents: Vec<f64>) -> Self {
        Self {
            exponents,
            rows: Vec::new(),
        }
    }

    /// Merged, sorted exponents `{p0 + i} ∪ {p1 + i}` (duplicates dropped).
    pub fn two_families(p0: f64, p1: f64, count: usize) -> Self {
        let mut e: Vec<f64> = (0..count)
            .flat_map(|i| [p0 + i as f64, p1 + i as f64])
            .collect();
        e.sort_by(|x, y| x.partial_cmp(y).unwrap());
        e.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
        e.truncate(count);
        Self::with_exponents(e)
    }

    /// Add the next sample; returns the current best estimate and the
    /// difference to the previous best estimate.
    pub fn push(&mut self, s: C64) -> (C64, f64) {
        let mut row = vec![s];
        if let Some(prev) = self.rows.last() {
            let depth = prev.len().min(self.exponents.len());
            for i in 0..depth {
                let f = 2f64.powf(self.exponents[i]);
                let next = (row[i] * f - prev[i]) / (f - 1.0);
                row.push(next);
            }
        }
        let best = *row.last().unwrap();
        let delta = match self.rows.last() {
            Some(prev) => (best - *prev.last().unwrap()).norm(),
            None => f64::INFINITY,
        };
        self.rows.push(row);
        (best, delta)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_mass() {
        let mut s = Neumaier::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add_real(x);
        }
        assert_eq!(s.value().re, 2.0);
    }

    #[test]
    fn richardson_removes_known_powers() {
        // S(n) = 1 + 1/n + 3/n^2 - 2/n^3
        let f = |n: f64| 1.0 + 1.0 / n + 3.0 / (n * n) - 2.0 / (n * n * n);
        let mut r = Richardson::new(1.0, 1.0, 6);
        let mut best = C64::new(0.0, 0.0);
        for j in 0..5 {
            best = r.push(C64::new(f(8.0 * 2f64.powi(j)), 0.0)).0;
        }
        assert!((best.re - 1.0).abs() < 1e-13, "{best}");
    }
}
