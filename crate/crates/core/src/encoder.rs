//! Per-pixel LDOP and LBP codes and their histograms.
//!
//! For every interior pixel and direction `k`, the order index `ω_k` of the
//! `R` directional samples is compared against the centre intensity mapped
//! linearly from `[0, 2^B - 1]` onto `[1, R!]`; bit `k` of the code is set
//! when `ω_k >= T`. Histograms are normalised by the interior pixel count
//! `(height - 2R) * (width - 2R)`.

use rayon::prelude::*;

use crate::descriptor::{Descriptor, Layout, PatternKind, Segment};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::order::{factorial, lehmer_rank, order_into, order_vector};
use crate::sampling::{directional_neighbors, NeighborSpec, SamplingPlan, MAX_RADIUS};

/// Maps an intensity onto the order-index range `[1, R!]`.
pub fn center_transform(intensity: f64, radius: usize, bit_depth: u8) -> f64 {
    let span = (factorial(radius) - 1) as f64;
    let max = ((1u32 << bit_depth) - 1) as f64;
    intensity * span / max + 1.0
}

fn check_ldop_radius(spec: &NeighborSpec) -> Result<()> {
    if spec.radius() < 2 {
        return Err(Error::argument(format!(
            "LDOP needs radius >= 2 (R = {} collapses the centre transform)",
            spec.radius()
        )));
    }
    Ok(())
}

/// LDOP code of one interior pixel.
pub fn ldop_code(img: &GrayImage, row: usize, col: usize, spec: &NeighborSpec) -> Result<u16> {
    check_ldop_radius(spec)?;
    let t = center_transform(img.get_checked(row, col)?, spec.radius(), img.bit_depth());
    let mut code = 0u16;
    for k in 0..spec.neighbors() {
        let p = directional_neighbors(img, row, col, k, spec)?;
        if order_vector(&p.values).rank() as f64 >= t {
            code |= 1 << k;
        }
    }
    Ok(code)
}

/// Codes over the interior of an image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternMap {
    pub kind: PatternKind,
    pub radius: usize,
    pub neighbors: usize,
    pub width: usize,
    pub height: usize,
    pub codes: Vec<u16>,
}

impl PatternMap {
    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.codes[row * self.width + col]
    }

    /// Normalised `2^N`-bin histogram of the codes.
    pub fn histogram(&self) -> Vec<f64> {
        let mut counts = vec![0u64; 1 << self.neighbors];
        for &c in &self.codes {
            counts[c as usize] += 1;
        }
        let total = self.codes.len() as f64;
        counts.into_iter().map(|c| c as f64 / total).collect()
    }

    /// Codes rescaled onto `0..=255`; identity when `N = 8`.
    pub fn to_image(&self) -> GrayImage {
        let max = ((1u32 << self.neighbors) - 1) as f64;
        GrayImage::from_fn(self.width, self.height, |r, c| {
            (self.get(r, c) as f64 * 255.0 / max).round() as u8
        })
    }
}

/// Shared walk over interior pixels; `encode` sees the flat pixel buffer,
/// the centre index and the sampling plan.
fn interior_map(
    img: &GrayImage,
    spec: &NeighborSpec,
    kind: PatternKind,
    mut encode: impl FnMut(&[f64], usize, &SamplingPlan) -> u16,
) -> Result<PatternMap> {
    spec.check_fits(img)?;
    let r = spec.radius();
    let (width, height) = (img.width() - 2 * r, img.height() - 2 * r);
    let plan = SamplingPlan::new(spec, img.width());
    let data = img.to_f64();
    let mut codes = Vec::with_capacity(width * height);
    for row in r..img.height() - r {
        for col in r..img.width() - r {
            codes.push(encode(&data, row * img.width() + col, &plan));
        }
    }
    Ok(PatternMap {
        kind,
        radius: r,
        neighbors: spec.neighbors(),
        width,
        height,
        codes,
    })
}

pub fn ldop_map(img: &GrayImage, spec: &NeighborSpec) -> Result<PatternMap> {
    check_ldop_radius(spec)?;
    let r = spec.radius();
    let n = spec.neighbors();
    let span = (factorial(r) - 1) as f64;
    let max = img.max_value() as f64;
    let mut samples = [0.0f64; MAX_RADIUS];
    let mut order = [0u8; MAX_RADIUS];

    interior_map(img, spec, PatternKind::Ldop, |data, center, plan| {
        let t = data[center] * span / max + 1.0;
        let mut code = 0u16;
        for k in 0..n {
            for (s, tap) in samples.iter_mut().zip(plan.taps(k)) {
                *s = tap.sample(data, center);
            }
            order_into(&samples[..r], &mut order[..r]);
            if lehmer_rank(&order[..r]) as f64 >= t {
                code |= 1 << k;
            }
        }
        code
    })
}

/// Classic LBP: bit `k` set when the radius-`R` neighbour is `>=` the centre.
pub fn lbp_map(img: &GrayImage, spec: &NeighborSpec) -> Result<PatternMap> {
    let n = spec.neighbors();
    let r = spec.radius();
    interior_map(img, spec, PatternKind::Lbp, |data, center, plan| {
        let c = data[center];
        let mut code = 0u16;
        for k in 0..n {
            if plan.taps(k)[r - 1].sample(data, center) >= c {
                code |= 1 << k;
            }
        }
        code
    })
}

pub fn ldop_histogram(img: &GrayImage, spec: &NeighborSpec) -> Result<Descriptor> {
    let layout = Layout::ldop(spec.neighbors(), spec.radius())?;
    Descriptor::new(layout, ldop_map(img, spec)?.histogram())
}

/// LDOP histograms for radii `first..=last`, concatenated in ascending order.
pub fn multi_res_ldop(
    img: &GrayImage,
    first: usize,
    last: usize,
    neighbors: usize,
) -> Result<Descriptor> {
    extract(img, &Layout::ldop_range(neighbors, first, last)?)
}

pub fn lbp_histogram(img: &GrayImage, radius: usize, neighbors: usize) -> Result<Descriptor> {
    let spec = NeighborSpec::new(neighbors, radius)?;
    Descriptor::new(
        Layout::lbp(neighbors, radius)?,
        lbp_map(img, &spec)?.histogram(),
    )
}

/// Computes every segment of `layout` on `img`.
pub fn extract(img: &GrayImage, layout: &Layout) -> Result<Descriptor> {
    let mut values = Vec::with_capacity(layout.len());
    for seg in layout.segments() {
        values.extend(segment_histogram(img, layout.neighbors(), seg)?);
    }
    Descriptor::new(layout.clone(), values)
}

fn segment_histogram(img: &GrayImage, neighbors: usize, seg: &Segment) -> Result<Vec<f64>> {
    let spec = NeighborSpec::new(neighbors, seg.radius as usize)?;
    let map = match seg.kind {
        PatternKind::Ldop => ldop_map(img, &spec)?,
        PatternKind::Lbp => lbp_map(img, &spec)?,
    };
    Ok(map.histogram())
}

/// [`extract`] over many images on the current rayon pool, results in
/// input order.
pub fn extract_all(images: &[GrayImage], layout: &Layout) -> Result<Vec<Descriptor>> {
    images.par_iter().map(|img| extract(img, layout)).collect()
}

impl GrayImage {
    fn get_checked(&self, row: usize, col: usize) -> Result<f64> {
        if row >= self.height() || col >= self.width() {
            return Err(Error::OutOfBounds {
                row: row as f64,
                col: col as f64,
            });
        }
        Ok(self.get(row, col) as f64)
    }
}
