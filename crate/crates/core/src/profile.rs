//! Piecewise-constant density profiles on the real line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `breakpoints` split the line into `breakpoints.len() + 1` open intervals,
/// the first and last unbounded. `values[i]` is the density on interval `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

/// One interval of a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

impl PiecewiseProfile {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidSpec(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidSpec("breakpoints must be finite".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpec("breakpoints must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("values must be finite".into()));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn zero() -> Self {
        Self {
            breakpoints: Vec::new(),
            values: vec![0.0],
        }
    }

    /// `value` on `(lo, hi)`, zero elsewhere. Empty when `lo >= hi`.
    pub fn boxcar(lo: f64, hi: f64, value: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidSpec("boxcar ends must be finite".into()));
        }
        if lo >= hi || value == 0.0 {
            return Ok(Self::zero());
        }
        Self::new(vec![lo, hi], vec![0.0, value, 0.0])
    }

    /// Build from possibly repeated breakpoints: a zero-width interval is
    /// dropped together with its value.
    pub fn from_merged(breakpoints: &[f64], values: &[f64]) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Self::new(breakpoints.to_vec(), values.to_vec());
        }
        let mut bps = Vec::with_capacity(breakpoints.len());
        let mut vals = vec![values[0]];
        for (i, &b) in breakpoints.iter().enumerate() {
            if bps.last() == Some(&b) {
                // Interval (b, b) is empty; the value after it replaces it.
                *vals.last_mut().unwrap() = values[i + 1];
                continue;
            }
            bps.push(b);
            vals.push(values[i + 1]);
        }
        Self::new(bps, vals)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn intervals(&self) -> impl Iterator<Item = Interval> + '_ {
        let n = self.breakpoints.len();
        (0..=n).map(move |i| Interval {
            lo: if i == 0 { f64::NEG_INFINITY } else { self.breakpoints[i - 1] },
            hi: if i == n { f64::INFINITY } else { self.breakpoints[i] },
            value: self.values[i],
        })
    }

    /// Density at `x`; at a breakpoint the interval to its right is used.
    pub fn value_at(&self, x: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        self.values[idx]
    }

    /// `sum value * width` over bounded intervals. Unbounded intervals must
    /// carry zero density, otherwise the result is infinite.
    pub fn total_energy(&self) -> f64 {
        let first = self.values[0];
        let last = *self.values.last().unwrap();
        if first != 0.0 || last != 0.0 {
            let s = if first < 0.0 || last < 0.0 { -1.0 } else { 1.0 };
            return s * f64::INFINITY;
        }
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for iv in self.intervals().filter(Interval::is_bounded) {
            let term = iv.value * iv.width();
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }

    /// Pointwise sum. Coincident breakpoints of the two operands merge.
    pub fn add(&self, other: &Self) -> Self {
        let mut bps: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let mut values = Vec::with_capacity(bps.len() + 1);
        values.push(self.values[0] + other.values[0]);
        values.extend(bps.iter().map(|&b| self.value_at(b) + other.value_at(b)));
        Self { breakpoints: bps, values }
    }

    /// Profile translated by `dx`: `p.shifted(dx).value_at(x) == p.value_at(x - dx)`.
    pub fn shifted(&self, dx: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.iter().map(|b| b + dx).collect(),
            values: self.values.clone(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v * factor + 0.0).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Rows `(x_lo, x_hi, density)` formatted with [`format_float`].
    pub fn csv_rows(&self) -> Vec<[String; 3]> {
        self.intervals()
            .map(|iv| [format_float(iv.lo), format_float(iv.hi), format_float(iv.value)])
            .collect()
    }
}

/// Shortest round-trip text: plain notation for moderate magnitudes,
/// scientific otherwise, `inf`/`-inf`/`NaN` for non-finite values.
pub fn format_float(x: f64) -> String {
    let m = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&m) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert!(PiecewiseProfile::new(vec![1.0, 0.0], vec![0.0; 3]).is_err());
        assert!(PiecewiseProfile::new(vec![0.0], vec![0.0; 3]).is_err());
        assert!(PiecewiseProfile::new(vec![0.0, 1.0], vec![0.0, -2.0, 0.0]).is_ok());
    }

    #[test]
    fn zero_profile() {
        let z = PiecewiseProfile::zero();
        assert_eq!(z.total_energy(), 0.0);
        assert_eq!(z.value_at(3.0), 0.0);
        assert_eq!(z.intervals().count(), 1);
    }

    #[test]
    fn lookup_and_total() {
        let p = PiecewiseProfile::new(vec![-1.0, 0.5, 2.0], vec![0.0, -3.0, 1.0, 0.0]).unwrap();
        assert_eq!(p.value_at(-5.0), 0.0);
        assert_eq!(p.value_at(-1.0), -3.0);
        assert_eq!(p.value_at(1.0), 1.0);
        assert_eq!(p.value_at(2.0), 0.0);
        assert_eq!(p.total_energy(), -4.5 + 1.5);
    }

    #[test]
    fn merging_drops_empty_interval() {
        let p = PiecewiseProfile::from_merged(&[-1.0, 0.0, 0.0, 1.0], &[0.0, -1.0, -2.0, -1.0, 0.0])
            .unwrap();
        assert_eq!(p.breakpoints(), &[-1.0, 0.0, 1.0]);
        assert_eq!(p.values(), &[0.0, -1.0, -1.0, 0.0]);
    }

    #[test]
    fn float_text_round_trips() {
        for x in [0.0, 1e-4, 9.99e-5, 0.25, -3.5e14, 1e15, 1e-300, f64::MAX, f64::MIN_POSITIVE] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(2.5e-7), "2.5e-7");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
    }

    proptest::proptest! {
        #[test]
        fn any_finite_float_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            proptest::prop_assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_uses_inf_literals() {
        let p = PiecewiseProfile::new(vec![-0.5, 0.5], vec![0.0, -1.0, 0.0]).unwrap();
        let rows = p.csv_rows();
        assert_eq!(rows[0][0], "-inf");
        assert_eq!(rows[2][1], "inf");
        assert_eq!(rows[1][0].parse::<f64>().unwrap(), -0.5);
    }

    #[test]
    fn sum_of_shifted_boxes() {
        let boxed = PiecewiseProfile::new(vec![-0.5, 0.5], vec![0.0, -1.0, 0.0]).unwrap();
        let s = boxed.shifted(-0.25).add(&boxed.shifted(0.25));
        assert_eq!(s.breakpoints(), &[-0.75, -0.25, 0.25, 0.75]);
        assert_eq!(s.values(), &[0.0, -1.0, -2.0, -1.0, 0.0]);
        let touching = boxed.shifted(-0.5).add(&boxed.shifted(0.5));
        assert_eq!(touching.breakpoints(), &[-1.0, 0.0, 1.0]);
        assert_eq!(touching.values(), &[0.0, -1.0, -1.0, 0.0]);
        assert_eq!(boxed.shifted(0.0).add(&boxed.shifted(0.0)), boxed.scaled(2.0));
    }

    #[test]
    fn unbounded_mass_is_infinite() {
        let p = PiecewiseProfile::new(vec![0.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(p.total_energy(), f64::INFINITY);
    }
}
