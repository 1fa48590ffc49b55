//! Directional intensity orders and their lexicographic permutation index.
//!
//! The `R` samples along a direction are replaced by their ranks (an
//! [`OrderVector`]) and the ranks are collapsed into the 1-based position
//! `ω ∈ [1, R!]` of that permutation in lexicographic order. The position is
//! computed from the Lehmer code; no permutation table is ever built.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::sampling::{NeighborSpec, SamplingPlan, MAX_RADIUS};

/// Samples closer than this are the same intensity. Interpolation round-off
/// is several orders of magnitude smaller; distinct interpolated values of
/// integer pixels are several orders larger.
pub const TIE_EPSILON: f64 = 1e-9;

const FACTORIALS: [u32; MAX_RADIUS + 1] = {
    let mut f = [1u32; MAX_RADIUS + 1];
    let mut i = 1;
    while i <= MAX_RADIUS {
        f[i] = f[i - 1] * i as u32;
        i += 1;
    }
    f
};

/// `n!` for `n <= 12`.
pub fn factorial(n: usize) -> u32 {
    FACTORIALS[n]
}

/// A permutation of `1..=R` giving each sample's rank.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderVector(Vec<u8>);

impl OrderVector {
    /// Validates that `entries` is a permutation of `1..=len`.
    pub fn new(entries: Vec<u8>) -> Result<Self> {
        validate_permutation(&entries)?;
        Ok(OrderVector(entries))
    }

    pub fn entries(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 1-based lexicographic rank.
    pub fn rank(&self) -> u32 {
        lehmer_rank(&self.0)
    }
}

fn validate_permutation(entries: &[u8]) -> Result<()> {
    let n = entries.len();
    if n == 0 || n > MAX_RADIUS {
        return Err(Error::argument(format!(
            "order length must be in 1..={MAX_RADIUS}, got {n}"
        )));
    }
    let mut seen = [false; MAX_RADIUS + 1];
    for &e in entries {
        let e = e as usize;
        if e == 0 || e > n || std::mem::replace(&mut seen[e], true) {
            return Err(Error::argument(format!(
                "{entries:?} is not a permutation of 1..={n}"
            )));
        }
    }
    Ok(())
}

/// Ranks each sample among the others.
///
/// Equal samples (within [`TIE_EPSILON`], chained) are ordered by position,
/// so the smaller radius receives the smaller rank.
pub fn order_vector(values: &[f64]) -> OrderVector {
    assert!(
        (1..=MAX_RADIUS).contains(&values.len()),
        "neighbourhood length must be in 1..={MAX_RADIUS}"
    );
    let mut out = vec![0u8; values.len()];
    order_into(values, &mut out);
    OrderVector(out)
}

/// Allocation-free core of [`order_vector`]; `out.len() == values.len()`.
#[inline]
pub(crate) fn order_into(values: &[f64], out: &mut [u8]) {
    let n = values.len();
    let mut idx = [0u8; MAX_RADIUS];
    for (i, slot) in idx[..n].iter_mut().enumerate() {
        *slot = i as u8;
    }
    let idx = &mut idx[..n];

    // stable insertion sort by value
    for i in 1..n {
        let mut j = i;
        while j > 0 && values[idx[j - 1] as usize] > values[idx[j] as usize] {
            idx.swap(j - 1, j);
            j -= 1;
        }
    }

    // inside each tie group restore position order
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[idx[end] as usize] - values[idx[end - 1] as usize] <= TIE_EPSILON {
            end += 1;
        }
        if end - start > 1 {
            idx[start..end].sort_unstable();
        }
        start = end;
    }

    for (pos, &i) in idx.iter().enumerate() {
        out[i as usize] = pos as u8 + 1;
    }
}

/// 1-based lexicographic rank of a permutation of `1..=R`.
pub fn perm_rank(order: &[u8]) -> Result<u32> {
    validate_permutation(order)?;
    Ok(lehmer_rank(order))
}

#[inline]
pub(crate) fn lehmer_rank(order: &[u8]) -> u32 {
    let n = order.len();
    let mut rank = 0u32;
    for i in 0..n {
        let smaller_after = order[i + 1..].iter().filter(|&&o| o < order[i]).count() as u32;
        rank += smaller_after * FACTORIALS[n - 1 - i];
    }
    rank + 1
}

/// Inverse of [`perm_rank`].
pub fn perm_unrank(index: u32, len: usize) -> Result<OrderVector> {
    if !(1..=MAX_RADIUS).contains(&len) {
        return Err(Error::argument(format!(
            "order length must be in 1..={MAX_RADIUS}, got {len}"
        )));
    }
    if index == 0 || index > FACTORIALS[len] {
        return Err(Error::argument(format!(
            "index {index} outside 1..={} for length {len}",
            FACTORIALS[len]
        )));
    }
    let mut remaining: Vec<u8> = (1..=len as u8).collect();
    let mut rest = index - 1;
    let mut out = Vec::with_capacity(len);
    for i in (0..len).rev() {
        let digit = (rest / FACTORIALS[i]) as usize;
        rest %= FACTORIALS[i];
        out.push(remaining.remove(digit));
    }
    Ok(OrderVector(out))
}

/// Per-pixel order index for one direction over the interior of an image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderIndexMap {
    pub direction: usize,
    pub radius: usize,
    pub width: usize,
    pub height: usize,
    /// Row-major, `width * height` values in `[1, R!]`.
    pub values: Vec<u32>,
}

impl OrderIndexMap {
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.values[row * self.width + col]
    }

    /// Linear rescale of `[1, R!]` onto `0..=255` for viewing.
    pub fn to_image(&self) -> GrayImage {
        let span = (factorial(self.radius) - 1).max(1) as f64;
        GrayImage::from_fn(self.width, self.height, |r, c| {
            ((self.get(r, c) - 1) as f64 * 255.0 / span).round() as u8
        })
    }
}

/// Order index map for one direction.
pub fn order_map(img: &GrayImage, direction: usize, spec: &NeighborSpec) -> Result<OrderIndexMap> {
    if direction >= spec.neighbors() {
        return Err(Error::argument(format!(
            "direction {direction} out of range for {} neighbors",
            spec.neighbors()
        )));
    }
    spec.check_fits(img)?;
    let r = spec.radius();
    let (width, height) = (img.width() - 2 * r, img.height() - 2 * r);
    let plan = SamplingPlan::new(spec, img.width());
    let taps = plan.taps(direction);
    let data = img.to_f64();

    let mut samples = [0.0f64; MAX_RADIUS];
    let mut order = [0u8; MAX_RADIUS];
    let mut values = Vec::with_capacity(width * height);
    for row in r..img.height() - r {
        for col in r..img.width() - r {
            let center = row * img.width() + col;
            for (s, tap) in samples.iter_mut().zip(taps) {
                *s = tap.sample(&data, center);
            }
            order_into(&samples[..r], &mut order[..r]);
            values.push(lehmer_rank(&order[..r]));
        }
    }
    Ok(OrderIndexMap {
        direction,
        radius: r,
        width,
        height,
        values,
    })
}
