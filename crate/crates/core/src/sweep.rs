//! Radius sweeps: one F-score per radius setting.
//!
//! A setting is written as a single radius (`"3"`), a two-digit range where
//! each digit is a radius (`"24"` = radii 2 to 4), or an explicit range
//! (`"2-4"`, `"2..4"`, needed once radii reach 10).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::descriptor::Layout;
use crate::distance::DistanceMeasure;
use crate::encoder::extract;
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::retrieval::{evaluate, DatasetIndex};
use crate::sampling::MAX_RADIUS;

/// Cut-off at which sweeps report the F-score.
pub const SWEEP_GAMMA: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RadiusSpec {
    pub first: usize,
    pub last: usize,
}

impl RadiusSpec {
    pub fn new(first: usize, last: usize) -> Result<Self> {
        if first < 2 || first > last || last > MAX_RADIUS {
            return Err(Error::argument(format!(
                "radius setting needs 2 <= R1 <= R2 <= {MAX_RADIUS}, got {first}..{last}"
            )));
        }
        Ok(RadiusSpec { first, last })
    }

    pub fn layout(&self, neighbors: usize) -> Result<Layout> {
        Layout::ldop_range(neighbors, self.first, self.last)
    }

    /// Parses a comma-separated list such as `"2,3,4,23,24"`.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        s.split(',').map(|p| p.trim().parse()).collect()
    }
}

impl fmt::Display for RadiusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.first == self.last {
            write!(f, "{}", self.first)
        } else if self.last < 10 {
            write!(f, "{}{}", self.first, self.last)
        } else {
            write!(f, "{}-{}", self.first, self.last)
        }
    }
}

impl FromStr for RadiusSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::argument(format!("invalid radius setting {s:?}"));
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        if let Some((a, b)) = s.split_once("..").or_else(|| s.split_once('-')) {
            return RadiusSpec::new(num(a)?, num(b)?);
        }
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        match s.len() {
            1 => {
                let r = num(s)?;
                RadiusSpec::new(r, r)
            }
            2 => RadiusSpec::new(num(&s[..1])?, num(&s[1..])?),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub spec: RadiusSpec,
    pub f_score: f64,
}

/// Describes the (already preprocessed) images with each setting and
/// reports the F-score at [`SWEEP_GAMMA`].
pub fn sweep(
    images: &[(String, String, GrayImage)],
    specs: &[RadiusSpec],
    neighbors: usize,
    measure: DistanceMeasure,
) -> Result<Vec<SweepRow>> {
    specs
        .iter()
        .map(|spec| {
            let layout = spec.layout(neighbors)?;
            let described = images
                .par_iter()
                .map(|(id, label, img)| Ok((id.clone(), label.clone(), extract(img, &layout)?)))
                .collect::<Result<Vec<_>>>()?;
            let index = DatasetIndex::build(described)?;
            let report = evaluate(&index, &[SWEEP_GAMMA], measure)?;
            Ok(SweepRow {
                spec: *spec,
                f_score: report.rows[0].f_score,
            })
        })
        .collect()
}
