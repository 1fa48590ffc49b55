//! Local directional order pattern (LDOP) face descriptors.
//!
//! For every pixel, the intensities sampled at radii `1..=R` along each of
//! `N` directions are ranked, the ranking is turned into its lexicographic
//! permutation index, and each index is compared with the centre intensity
//! rescaled into `[1, R!]`. The resulting `N`-bit codes are histogrammed;
//! several radii can be concatenated into a multi-resolution descriptor.
//!
//! The crate also carries a classic LBP baseline, five histogram distances
//! and an exhaustive retrieval harness reporting precision, recall, F-score
//! and ANMRR.
//!
//! ```
//! use ldop::{multi_res_ldop, GrayImage};
//!
//! let img = GrayImage::from_fn(64, 64, |r, c| ((r * 5 + c * 3) % 256) as u8);
//! let d = multi_res_ldop(&img, 2, 4, 8).unwrap();
//! assert_eq!(d.len(), 768);
//! ```

pub mod dataset;
pub mod descriptor;
pub mod distance;
pub mod encoder;
mod error;
pub mod image;
pub mod io;
pub mod order;
pub mod retrieval;
pub mod sampling;
pub mod sweep;

pub use crate::descriptor::{Descriptor, DescriptorSet, Layout, PatternKind, Record, Segment};
pub use crate::distance::{distance, DistanceMeasure};
pub use crate::encoder::{
    center_transform, extract, extract_all, lbp_histogram, lbp_map, ldop_code, ldop_histogram,
    ldop_map, multi_res_ldop, PatternMap,
};
pub use crate::error::{Error, Result};
pub use crate::image::{resize_bilinear, to_gray, GrayImage};
pub use crate::io::{load_gray, write_pgm};
pub use crate::order::{
    order_map, order_vector, perm_rank, perm_unrank, OrderIndexMap, OrderVector,
};
pub use crate::retrieval::{evaluate, precision_recall, DatasetIndex, Hit, MetricsReport};
pub use crate::sampling::{
    directional_neighbors, neighbor_coords, sample_bilinear, DirectionalNeighborhood, NeighborSpec,
};
