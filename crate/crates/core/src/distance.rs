//! Histogram distance measures.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::descriptor::Descriptor;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMeasure {
    Euclidean,
    Cosine,
    L1,
    D1,
    #[default]
    #[serde(rename = "chisq")]
    ChiSquare,
}

impl DistanceMeasure {
    pub const ALL: [DistanceMeasure; 5] = [
        DistanceMeasure::Euclidean,
        DistanceMeasure::Cosine,
        DistanceMeasure::L1,
        DistanceMeasure::D1,
        DistanceMeasure::ChiSquare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistanceMeasure::Euclidean => "euclidean",
            DistanceMeasure::Cosine => "cosine",
            DistanceMeasure::L1 => "l1",
            DistanceMeasure::D1 => "d1",
            DistanceMeasure::ChiSquare => "chisq",
        }
    }

    /// Distance between two equal-length slices.
    ///
    /// # Panics
    ///
    /// If the slices differ in length.
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        assert_eq!(a.len(), b.len(), "descriptor lengths differ");
        match self {
            DistanceMeasure::Euclidean => sum4(a, b, |x, y| (x - y) * (x - y)).sqrt(),
            DistanceMeasure::L1 => sum4(a, b, |x, y| (x - y).abs()),
            DistanceMeasure::D1 => sum4(a, b, |x, y| (x - y).abs() / (1.0 + (x + y))),
            DistanceMeasure::ChiSquare => {
                0.5 * sum4(a, b, |x, y| {
                    let s = x + y;
                    if s > 0.0 {
                        (x - y) * (x - y) / s
                    } else {
                        0.0
                    }
                })
            }
            DistanceMeasure::Cosine => cosine(a, b),
        }
    }
}

impl fmt::Display for DistanceMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(DistanceMeasure::Euclidean),
            "cosine" => Ok(DistanceMeasure::Cosine),
            "l1" => Ok(DistanceMeasure::L1),
            "d1" => Ok(DistanceMeasure::D1),
            "chisq" | "chi-square" | "chisquare" => Ok(DistanceMeasure::ChiSquare),
            other => Err(Error::argument(format!(
                "unknown distance {other:?} (expected euclidean, cosine, l1, d1 or chisq)"
            ))),
        }
    }
}

/// Distance between two descriptors of the same layout.
pub fn distance(a: &Descriptor, b: &Descriptor, measure: DistanceMeasure) -> Result<f64> {
    if a.layout() != b.layout() {
        return Err(Error::argument("descriptor layouts differ"));
    }
    Ok(measure.eval(a.values(), b.values()))
}

/// Four independent accumulators so the loop vectorises; the summation
/// order is fixed, so results are reproducible.
#[inline]
fn sum4(a: &[f64], b: &[f64], term: impl Fn(f64, f64) -> f64) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..4 {
            acc[i] += term(x[i], y[i]);
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(&x, &y)| term(x, y)).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot = sum4(a, b, |x, y| x * y);
    let na = sum4(a, a, |x, _| x * x);
    let nb = sum4(b, b, |x, _| x * x);
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    (1.0 - dot / (na * nb).sqrt()).max(0.0)
}
