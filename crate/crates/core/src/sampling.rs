//! Circular neighbourhood geometry and sub-pixel sampling.
//!
//! Pixel coordinates are zero-based `(row, col)` with rows growing
//! downwards. Direction `k` (zero-based, `0..N`) sits at angle
//! `k * 2π / N` measured counter-clockwise from the positive column axis,
//! so direction 0 points right and, for `N = 8`, direction 2 points up.
//! The neighbour of `(row, col)` at radius `r` in direction `k` is
//! `(row - r sin θ, col + r cos θ)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Radius cap: `12!` still fits a `u32` order index.
pub const MAX_RADIUS: usize = 12;
/// Direction cap: codes are stored as `u16`.
pub const MAX_NEIGHBORS: usize = 16;

/// Offsets closer than this to an integer are snapped onto the grid.
const GRID_SNAP: f64 = 1e-9;

/// Number of directions `N` and maximum radius `R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NeighborSpec {
    neighbors: usize,
    radius: usize,
}

impl NeighborSpec {
    pub fn new(neighbors: usize, radius: usize) -> Result<Self> {
        if !(2..=MAX_NEIGHBORS).contains(&neighbors) {
            return Err(Error::argument(format!(
                "neighbor count must be in 2..={MAX_NEIGHBORS}, got {neighbors}"
            )));
        }
        if !(1..=MAX_RADIUS).contains(&radius) {
            return Err(Error::argument(format!(
                "radius must be in 1..={MAX_RADIUS}, got {radius}"
            )));
        }
        Ok(NeighborSpec { neighbors, radius })
    }

    pub fn neighbors(&self) -> usize {
        self.neighbors
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Angle of direction `k` in radians.
    pub fn angle(&self, direction: usize) -> f64 {
        direction_angle(direction, self.neighbors)
    }

    /// Whether `(row, col)` is at least `R` pixels from every border.
    pub fn is_interior(&self, img: &GrayImage, row: usize, col: usize) -> bool {
        let r = self.radius;
        row >= r && col >= r && row + r < img.height() && col + r < img.width()
    }

    pub(crate) fn check_fits(&self, img: &GrayImage) -> Result<()> {
        if img.height() <= 2 * self.radius || img.width() <= 2 * self.radius {
            return Err(Error::TooSmall {
                width: img.width(),
                height: img.height(),
                radius: self.radius,
            });
        }
        Ok(())
    }
}

fn direction_angle(direction: usize, neighbors: usize) -> f64 {
    direction as f64 * 2.0 * PI / neighbors as f64
}

fn snap(v: f64) -> f64 {
    let nearest = v.round();
    if (v - nearest).abs() < GRID_SNAP {
        nearest
    } else {
        v
    }
}

/// `(Δrow, Δcol)` of the neighbour at `radius` in `direction`.
pub fn neighbor_offset(direction: usize, radius: usize, neighbors: usize) -> (f64, f64) {
    let theta = direction_angle(direction, neighbors);
    let r = radius as f64;
    (snap(-r * theta.sin()), snap(r * theta.cos()))
}

/// Fractional position of the neighbour; may lie outside the image.
pub fn neighbor_coords(
    row: usize,
    col: usize,
    direction: usize,
    radius: usize,
    neighbors: usize,
) -> (f64, f64) {
    let (dr, dc) = neighbor_offset(direction, radius, neighbors);
    (row as f64 + dr, col as f64 + dc)
}

#[inline]
fn lerp2(v00: f64, v01: f64, v10: f64, v11: f64, t: f64, s: f64) -> f64 {
    // differences vanish on flat patches, keeping constants exact
    let top = v00 + (v01 - v00) * s;
    let bottom = v10 + (v11 - v10) * s;
    top + (bottom - top) * t
}

/// Bilinear interpolation at a fractional `(row, col)`.
///
/// Integer coordinates return the stored pixel exactly.
pub fn sample_bilinear(img: &GrayImage, row: f64, col: f64) -> Result<f64> {
    let max_row = (img.height() - 1) as f64;
    let max_col = (img.width() - 1) as f64;
    if !(0.0..=max_row).contains(&row) || !(0.0..=max_col).contains(&col) {
        return Err(Error::OutOfBounds { row, col });
    }
    let (r0, r1, t) = split(row);
    let (c0, c1, s) = split(col);
    let p = |r, c| img.get(r, c) as f64;
    Ok(lerp2(p(r0, c0), p(r0, c1), p(r1, c0), p(r1, c1), t, s))
}

fn split(v: f64) -> (usize, usize, f64) {
    let lo = v.floor();
    let frac = v - lo;
    let lo = lo as usize;
    (lo, if frac > 0.0 { lo + 1 } else { lo }, frac)
}

/// The `R` samples along one direction, radius 1 first.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionalNeighborhood {
    pub direction: usize,
    pub values: Vec<f64>,
}

/// Samples the `R` neighbours of an interior pixel along `direction`.
pub fn directional_neighbors(
    img: &GrayImage,
    row: usize,
    col: usize,
    direction: usize,
    spec: &NeighborSpec,
) -> Result<DirectionalNeighborhood> {
    if direction >= spec.neighbors() {
        return Err(Error::argument(format!(
            "direction {direction} out of range for {} neighbors",
            spec.neighbors()
        )));
    }
    if !spec.is_interior(img, row, col) {
        return Err(Error::OutOfBounds {
            row: row as f64,
            col: col as f64,
        });
    }
    let plan = SamplingPlan::new(spec, img.width());
    let data = img.to_f64();
    let center = row * img.width() + col;
    let values = plan
        .taps(direction)
        .iter()
        .map(|tap| tap.sample(&data, center))
        .collect();
    Ok(DirectionalNeighborhood { direction, values })
}

/// Precomputed bilinear stencil for one `(direction, radius)` pair,
/// expressed as flat offsets into a row-major buffer.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Tap {
    o00: isize,
    o01: isize,
    o10: isize,
    o11: isize,
    t: f64,
    s: f64,
}

impl Tap {
    #[inline]
    pub(crate) fn sample(&self, data: &[f64], center: usize) -> f64 {
        let at = |o: isize| data[center.wrapping_add_signed(o)];
        lerp2(
            at(self.o00),
            at(self.o01),
            at(self.o10),
            at(self.o11),
            self.t,
            self.s,
        )
    }
}

/// Stencils for every direction and radius of a [`NeighborSpec`] over an
/// image of a given width. Valid for any interior centre.
#[derive(Clone, Debug)]
pub(crate) struct SamplingPlan {
    radius: usize,
    taps: Vec<Tap>,
}

impl SamplingPlan {
    pub(crate) fn new(spec: &NeighborSpec, width: usize) -> Self {
        let w = width as isize;
        let mut taps = Vec::with_capacity(spec.neighbors() * spec.radius());
        for k in 0..spec.neighbors() {
            for r in 1..=spec.radius() {
                let (dr, dc) = neighbor_offset(k, r, spec.neighbors());
                let (r0, t) = (dr.floor(), dr - dr.floor());
                let (c0, s) = (dc.floor(), dc - dc.floor());
                let (r0, c0) = (r0 as isize, c0 as isize);
                let r1 = if t > 0.0 { r0 + 1 } else { r0 };
                let c1 = if s > 0.0 { c0 + 1 } else { c0 };
                taps.push(Tap {
                    o00: r0 * w + c0,
                    o01: r0 * w + c1,
                    o10: r1 * w + c0,
                    o11: r1 * w + c1,
                    t,
                    s,
                });
            }
        }
        SamplingPlan {
            radius: spec.radius(),
            taps,
        }
    }

    /// Taps for one direction, ordered by radius.
    #[inline]
    pub(crate) fn taps(&self, direction: usize) -> &[Tap] {
        &self.taps[direction * self.radius..(direction + 1) * self.radius]
    }
}
