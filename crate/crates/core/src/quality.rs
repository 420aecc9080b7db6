//! Unsupervised line-detection quality: the share of detected lines whose
//! height lies within `[α·h̃, (1+α)·h̃]` of the page median `h̃`.
//!
//! The computation is generic over any ordered numeric field, so exact
//! rational heights (`num_rational::Ratio`) avoid rounding at the window
//! boundaries.

use std::fmt;

use serde::{Deserialize, Serialize};

use num_traits::{Num, ToPrimitive};

use crate::domain::TextLine;
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.5;

/// Bad-line buckets on `1 − q_line`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BadLineClass {
    #[serde(rename = "≤1%")]
    AtMost1,
    #[serde(rename = "1−5%")]
    From1To5,
    #[serde(rename = "5−25%")]
    From5To25,
    #[serde(rename = "25−50%")]
    From25To50,
    #[serde(rename = ">50%")]
    Over50,
}

impl BadLineClass {
    pub const ALL: [BadLineClass; 5] = [
        BadLineClass::AtMost1,
        BadLineClass::From1To5,
        BadLineClass::From5To25,
        BadLineClass::From25To50,
        BadLineClass::Over50,
    ];

    /// Left-open, right-closed buckets except the first: `≤0.01, (0.01,0.05], (0.05,0.25], (0.25,0.50], >0.50`.
    pub fn from_bad_ratio(bad: f64) -> Self {
        if bad <= 0.01 {
            BadLineClass::AtMost1
        } else if bad <= 0.05 {
            BadLineClass::From1To5
        } else if bad <= 0.25 {
            BadLineClass::From5To25
        } else if bad <= 0.50 {
            BadLineClass::From25To50
        } else {
            BadLineClass::Over50
        }
    }

    /// Exact variant over the counts `bad / total`, free of float rounding.
    pub fn from_counts(bad: usize, total: usize) -> Self {
        let (b, t) = (bad as u128, total as u128);
        if 100 * b <= t {
            BadLineClass::AtMost1
        } else if 100 * b <= 5 * t {
            BadLineClass::From1To5
        } else if 100 * b <= 25 * t {
            BadLineClass::From5To25
        } else if 100 * b <= 50 * t {
            BadLineClass::From25To50
        } else {
            BadLineClass::Over50
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            BadLineClass::AtMost1 => "≤1%",
            BadLineClass::From1To5 => "1−5%",
            BadLineClass::From5To25 => "5−25%",
            BadLineClass::From25To50 => "25−50%",
            BadLineClass::Over50 => ">50%",
        }
    }
}

impl fmt::Display for BadLineClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityReport<T> {
    pub q_line: f64,
    pub bad_ratio: f64,
    pub class: BadLineClass,
    pub alpha: T,
    pub median_height: T,
    pub good: usize,
    pub total: usize,
}

/// Median with the even-length case resolved to the mean of the middle pair.
pub fn median<T>(values: &[T]) -> Option<T>
where
    T: Num + PartialOrd + Copy,
{
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("comparable heights"));
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        let two = T::one() + T::one();
        (v[n / 2 - 1] + v[n / 2]) / two
    })
}

/// Line quality ratio over a list of line heights.
pub fn q_line<T>(heights: &[T], alpha: T) -> Result<QualityReport<T>>
where
    T: Num + PartialOrd + Copy,
{
    if heights.is_empty() {
        return Err(Error::Model("q_line needs at least one line height".into()));
    }
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::Model("alpha must lie in [0, 1]".into()));
    }
    if heights.iter().any(|h| !(*h > T::zero())) {
        return Err(Error::Model("line heights must be positive".into()));
    }
    let med = median(heights).expect("non-empty");
    let lo = alpha * med;
    let hi = (T::one() + alpha) * med;
    let good = heights.iter().filter(|h| **h >= lo && **h <= hi).count();
    let total = heights.len();
    let q = good as f64 / total as f64;
    Ok(QualityReport {
        q_line: q,
        bad_ratio: (total - good) as f64 / total as f64,
        class: BadLineClass::from_counts(total - good, total),
        alpha,
        median_height: med,
        good,
        total,
    })
}

/// Height of the line polygon's bounding box.
pub fn line_height(line: &TextLine) -> Result<i64> {
    if line.polygon.points.len() < 3 {
        return Err(Error::Geometry(format!("line {}: degenerate polygon", line.id)));
    }
    match line.polygon.height() {
        Some(h) if h > 0 => Ok(h),
        _ => Err(Error::Geometry(format!("line {}: zero height", line.id))),
    }
}

/// Quality report for all lines of a page; `None` when the page has no lines.
pub fn page_quality(lines: &[TextLine], alpha: f64) -> Result<Option<QualityReport<f64>>> {
    if lines.is_empty() {
        return Ok(None);
    }
    let heights = lines
        .iter()
        .map(|l| line_height(l).map(|h| h as f64))
        .collect::<Result<Vec<_>>>()?;
    q_line(&heights, alpha).map(Some)
}

/// Converts a report to `f64` fields, e.g. for a rational computation.
pub fn to_f64_report<T: ToPrimitive + Copy>(r: &QualityReport<T>) -> QualityReport<f64> {
    QualityReport {
        q_line: r.q_line,
        bad_ratio: r.bad_ratio,
        class: r.class,
        alpha: r.alpha.to_f64().unwrap_or(f64::NAN),
        median_height: r.median_height.to_f64().unwrap_or(f64::NAN),
        good: r.good,
        total: r.total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Polygon;
    use num_rational::Ratio;

    #[test]
    fn uniform_heights() {
        let r = q_line(&[10.0, 10.0, 10.0], 0.5).unwrap();
        assert_eq!(r.q_line, 1.0);
        assert_eq!(r.class, BadLineClass::AtMost1);
    }

    #[test]
    fn one_tall_line_of_four() {
        let r = q_line(&[10.0, 10.0, 10.0, 30.0], 0.5).unwrap();
        assert_eq!(r.median_height, 10.0);
        assert_eq!(r.q_line, 0.75);
        assert_eq!(r.bad_ratio, 0.25);
        assert_eq!(r.class, BadLineClass::From5To25);
    }

    #[test]
    fn class_boundaries() {
        assert_eq!(BadLineClass::from_bad_ratio(0.03), BadLineClass::From1To5);
        assert_eq!(BadLineClass::from_bad_ratio(0.01), BadLineClass::AtMost1);
        assert_eq!(BadLineClass::from_bad_ratio(0.05), BadLineClass::From1To5);
        assert_eq!(BadLineClass::from_bad_ratio(0.5), BadLineClass::From25To50);
        assert_eq!(BadLineClass::from_bad_ratio(0.51), BadLineClass::Over50);
        assert_eq!(BadLineClass::from_counts(1, 100), BadLineClass::AtMost1);
        assert_eq!(BadLineClass::from_counts(1, 4), BadLineClass::From5To25);
    }

    #[test]
    fn window_is_closed() {
        // median 10, window [5, 15]
        let r = q_line(&[5.0, 10.0, 15.0], 0.5).unwrap();
        assert_eq!(r.q_line, 1.0);
    }

    #[test]
    fn alpha_extremes() {
        let r = q_line(&[10.0, 10.0, 20.0], 1.0).unwrap();
        assert_eq!(r.good, 3);
        let r = q_line(&[10.0, 10.0, 11.0], 0.0).unwrap();
        // window is [0, h̃]: every height up to the median counts
        assert_eq!(r.good, 2);
    }

    #[test]
    fn rational_heights() {
        let h: Vec<Ratio<i64>> = [7, 9, 21, 10].iter().map(|v| Ratio::from_integer(*v)).collect();
        let r = q_line(&h, Ratio::new(1, 2)).unwrap();
        assert_eq!(r.median_height, Ratio::new(19, 2));
        assert_eq!(r.good, 3);
    }

    #[test]
    fn errors() {
        assert!(q_line::<f64>(&[], 0.5).is_err());
        assert!(q_line(&[1.0, 0.0], 0.5).is_err());
        assert!(q_line(&[1.0], 1.5).is_err());
    }

    #[test]
    fn heights_from_polygons() {
        let rect = TextLine::new("a", Polygon::rect(0, 0, 100, 12), "");
        assert_eq!(line_height(&rect).unwrap(), 12);
        let tri = TextLine::new("b", Polygon { points: vec![[0, 0], [10, 0], [5, 7]] }, "");
        assert_eq!(line_height(&tri).unwrap(), 7);
        let quad = TextLine::new("c", Polygon { points: vec![[0, 10], [100, 0], [102, 8], [2, 19]] }, "");
        assert_eq!(line_height(&quad).unwrap(), 19);
        let flat = TextLine::new("d", Polygon { points: vec![[0, 0], [10, 0]] }, "");
        assert!(line_height(&flat).is_err());
    }
}
