//! Reference tanh and the conventional approximations it is compared with.
//! Everything here runs in `f64`; callers quantize the result if needed.

use crate::error::{Error, Result};

/// `(e^x - e^-x) / (e^x + e^-x)` at full `f64` precision.
pub fn reference_tanh(x: f64) -> f64 {
    x.tanh()
}

/// Knots `(x, tanh x)` for piecewise-linear interpolation on `[0, last]`,
/// extended as an odd function.
#[derive(Debug, Clone, PartialEq)]
pub struct PwlTable {
    knots: Vec<(f64, f64)>,
}

impl PwlTable {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        match knots.first() {
            Some(&(0.0, 0.0)) => {}
            _ => return Err(Error::PwlTable("first knot must be (0, 0)".into())),
        }
        for w in knots.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x1.partial_cmp(&x0) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::PwlTable(format!("knot inputs not ascending at {x1}")));
            }
            if y1 < y0 {
                return Err(Error::PwlTable(format!("knot values decrease at {x1}")));
            }
        }
        Ok(Self { knots })
    }

    /// Knots of the reference function every `spacing` from 0, plus one at
    /// `end` if the spacing does not land on it.
    pub fn uniform(spacing: f64, end: f64) -> Result<Self> {
        if !(spacing > 0.0 && end > 0.0) {
            return Err(Error::PwlTable("spacing and end must be positive".into()));
        }
        let steps = (end / spacing).floor() as usize;
        let mut xs: Vec<f64> = (0..=steps).map(|i| i as f64 * spacing).collect();
        if end - xs[steps] > 1e-12 {
            xs.push(end);
        }
        Self::new(xs.into_iter().map(|x| (x, reference_tanh(x))).collect())
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }
}

pub fn pwl_tanh(x: f64, table: &PwlTable) -> f64 {
    let a = x.abs();
    let knots = &table.knots;
    let (last_x, last_y) = knots[knots.len() - 1];
    let y = if a >= last_x {
        last_y
    } else {
        // first knot strictly above a
        let i = knots.partition_point(|&(k, _)| k <= a);
        let ((x0, y0), (x1, y1)) = (knots[i - 1], knots[i]);
        y0 + (y1 - y0) * (a - x0) / (x1 - x0)
    };
    y.copysign(x)
}

/// Coefficients of `x, x^3, x^5, ...` in the Maclaurin series of tanh.
const TAYLOR: [f64; 6] = [
    1.0,
    -1.0 / 3.0,
    2.0 / 15.0,
    -17.0 / 315.0,
    62.0 / 2835.0,
    -1382.0 / 155_925.0,
];

pub const MAX_TAYLOR_TERMS: usize = TAYLOR.len();

/// Partial sum of the first `terms` odd-power terms.
pub fn taylor_tanh(x: f64, terms: usize) -> Result<f64> {
    if !(1..=MAX_TAYLOR_TERMS).contains(&terms) {
        return Err(Error::TaylorTerms {
            got: terms,
            max: MAX_TAYLOR_TERMS,
        });
    }
    let x2 = x * x;
    let sum = TAYLOR[..terms].iter().rev().fold(0.0, |acc, c| acc * x2 + c);
    Ok(x * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert_eq!(reference_tanh(0.0), 0.0);
        assert!((reference_tanh(2.0) - 0.964_027_58).abs() < 1e-8);
        for x in [0.1, 0.7, 3.3] {
            assert_eq!(reference_tanh(-x), -reference_tanh(x));
        }
    }

    #[test]
    fn reference_is_odd_increasing_bounded() {
        let grid: Vec<f64> = (-4000..=4000).map(|i| f64::from(i) * 2e-3).collect();
        for w in grid.windows(2) {
            assert!(reference_tanh(w[1]) > reference_tanh(w[0]) || reference_tanh(w[0]).abs() == 1.0);
        }
        for &x in &grid {
            let t = reference_tanh(x);
            assert!(t > -1.0 && t < 1.0);
            assert_eq!(t, -reference_tanh(-x));
        }
    }

    #[test]
    fn pwl_examples() {
        let t = PwlTable::uniform(0.25, 5.55).unwrap();
        assert_eq!(pwl_tanh(0.0, &t), 0.0);
        for &(x, y) in t.knots() {
            assert_eq!(pwl_tanh(x, &t), y);
            assert_eq!(pwl_tanh(-x, &t), -y);
        }
        let coarse = PwlTable::new(vec![(0.0, 0.0), (1.0, 1f64.tanh()), (2.0, 2f64.tanh())]).unwrap();
        assert!((pwl_tanh(1.5, &coarse) - 0.862_81).abs() < 1e-5);
        assert_eq!(pwl_tanh(10.0, &coarse), 2f64.tanh());
        assert_eq!(t.knots().last().unwrap().0, 5.55);
    }

    #[test]
    fn pwl_error_within_second_difference_bound() {
        let t = PwlTable::uniform(0.25, 5.5).unwrap();
        let k = t.knots();
        // largest |second difference| of adjacent knot values
        let bound = k
            .windows(3)
            .map(|w| (w[2].1 - 2.0 * w[1].1 + w[0].1).abs())
            .fold(0.0, f64::max);
        for i in 0..=5500 {
            let x = f64::from(i) * 1e-3;
            assert!((pwl_tanh(x, &t) - reference_tanh(x)).abs() <= bound, "x = {x}");
        }
    }

    #[test]
    fn pwl_rejects_bad_tables() {
        assert!(PwlTable::new(vec![]).is_err());
        assert!(PwlTable::new(vec![(0.1, 0.0)]).is_err());
        assert!(PwlTable::new(vec![(0.0, 0.0), (1.0, 0.5), (1.0, 0.6)]).is_err());
        assert!(PwlTable::new(vec![(0.0, 0.0), (1.0, 0.5), (2.0, 0.4)]).is_err());
        assert!(PwlTable::uniform(0.0, 1.0).is_err());
    }

    #[test]
    fn taylor_examples() {
        assert_eq!(taylor_tanh(0.0, 3).unwrap(), 0.0);
        // 0.1 - 0.001/3 + 2e-5/15
        assert!((taylor_tanh(0.1, 3).unwrap() - 0.099_668_00).abs() < 1e-8);
        let err = |x: f64, n| (taylor_tanh(x, n).unwrap() - x.tanh()).abs();
        assert!(err(2.0, 3) > 1e3 * err(0.25, 3));
        assert!(taylor_tanh(1.0, 0).is_err());
        assert!(taylor_tanh(1.0, 7).is_err());
    }

    #[test]
    fn four_terms_beat_three_near_zero() {
        // below ~0.02 both errors sink under f64 rounding
        for i in 20..=500 {
            let x = f64::from(i) * 1e-3;
            let e3 = (taylor_tanh(x, 3).unwrap() - x.tanh()).abs();
            let e4 = (taylor_tanh(x, 4).unwrap() - x.tanh()).abs();
            assert!(e4 < e3, "x = {x}");
        }
    }
}
