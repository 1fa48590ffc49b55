//! Directory-per-class datasets and batch extraction.
//!
//! A dataset root holds one sub-directory per class; the directory name is
//! the class label and every PGM/PNG file inside is one image. Files
//! directly under the root and hidden entries are ignored. Entries are
//! sorted by label, then by file name, so extraction order is stable.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::descriptor::{DescriptorSet, Layout};
use crate::encoder::extract;
use crate::error::{Error, Result};
use crate::image::{resize_bilinear, GrayImage};
use crate::io::load_gray;

/// Side length every image is resampled to before description.
pub const CANONICAL_SIZE: usize = 64;

const IMAGE_EXTENSIONS: &[&str] = &["pgm", "pnm", "png"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetEntry {
    pub path: PathBuf,
    pub label: String,
}

fn is_hidden(path: &Path) -> bool {
    path.file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.starts_with('.'))
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

fn sorted_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let read = fs::read_dir(dir).map_err(|e| Error::from(e).with_path(dir))?;
    let mut paths = read
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::from(e).with_path(dir))?;
    paths.retain(|p| !is_hidden(p));
    paths.sort();
    Ok(paths)
}

/// Lists the images of a directory-per-class dataset.
pub fn scan_dataset(root: impl AsRef<Path>) -> Result<Vec<DatasetEntry>> {
    let root = root.as_ref();
    let mut entries = Vec::new();
    for class_dir in sorted_dir(root)?.into_iter().filter(|p| p.is_dir()) {
        let label = class_dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| {
                Error::argument("class directory name is not UTF-8").with_path(&class_dir)
            })?
            .to_string();
        for path in sorted_dir(&class_dir)? {
            if path.is_file() && is_image(&path) {
                entries.push(DatasetEntry {
                    path,
                    label: label.clone(),
                });
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::argument("dataset contains no images").with_path(root));
    }
    Ok(entries)
}

/// Resamples to the canonical `64x64` input size.
pub fn preprocess(img: &GrayImage) -> Result<GrayImage> {
    resize_bilinear(img, CANONICAL_SIZE, CANONICAL_SIZE)
}

pub fn load_preprocessed(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    preprocess(&load_gray(path)?).map_err(|e| e.with_path(path))
}

/// Loads and preprocesses every entry on the current rayon pool.
/// Failures are returned per file in input order.
pub fn load_all(entries: &[DatasetEntry]) -> Vec<Result<GrayImage>> {
    entries
        .par_iter()
        .map(|e| load_preprocessed(&e.path))
        .collect()
}

/// Result of a batch extraction: descriptors for every image that could be
/// read, and the failures.
#[derive(Debug)]
pub struct Extraction {
    pub set: DescriptorSet,
    pub failures: Vec<(PathBuf, Error)>,
}

/// Loads, preprocesses and describes every entry. Output order matches
/// `entries` regardless of pool size.
pub fn extract_dataset(entries: &[DatasetEntry], layout: &Layout) -> Extraction {
    let results: Vec<_> = entries
        .par_iter()
        .map(|e| load_preprocessed(&e.path).and_then(|img| extract(&img, layout)))
        .collect();
    let mut set = DescriptorSet::new(layout.clone());
    let mut failures = Vec::new();
    for (entry, result) in entries.iter().zip(results) {
        let path = entry.path.to_string_lossy().into_owned();
        match result.and_then(|d| set.push(path, entry.label.clone(), d)) {
            Ok(()) => {}
            Err(e) => failures.push((entry.path.clone(), e)),
        }
    }
    Extraction { set, failures }
}
