//! Exact threshold comparisons of the form `count ⋈ d · num / den`.
//!
//! Thresholds such as `d/5` or `d/20` are compared by cross-multiplying,
//! `count · den` against `d · num`, so integral degree parameters never hit
//! a floating point tie.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u32,
    pub den: u32,
}

impl Fraction {
    pub const fn new(num: u32, den: u32) -> Self {
        assert!(den > 0);
        Fraction { num, den }
    }

    pub fn of(self, d: f64) -> f64 {
        d * self.num as f64 / self.den as f64
    }

    /// `count >= d · self`
    pub fn reached_by(self, count: usize, d: f64) -> bool {
        count as f64 * self.den as f64 >= d * self.num as f64
    }

    /// `count < d · self`
    pub fn not_reached_by(self, count: usize, d: f64) -> bool {
        !self.reached_by(count, d)
    }

    /// `count <= d · self`
    pub fn bounds(self, count: usize, d: f64) -> bool {
        count as f64 * self.den as f64 <= d * self.num as f64
    }
}

#[cfg(test)]
mod tests {
    use super::Fraction;

    #[test]
    fn exact_boundaries() {
        let fifth = Fraction::new(1, 5);
        assert!(fifth.reached_by(12, 60.0));
        assert!(!fifth.reached_by(11, 60.0));
        let twentieth = Fraction::new(1, 20);
        assert!(twentieth.bounds(3, 60.0));
        assert!(!twentieth.bounds(4, 60.0));
        // 6/4 = 1.5
        let quarter = Fraction::new(1, 4);
        assert!(quarter.reached_by(2, 6.0));
        assert!(!quarter.reached_by(1, 6.0));
    }
}
