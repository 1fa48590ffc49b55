//! Histogram descriptors, their layouts and on-disk formats.
//!
//! # Binary layout
//!
//! All integers are little-endian.
//!
//! ```text
//! "LDOPDESC"                     8 bytes
//! version                        u16 (= 1)
//! N (directions)                 u8
//! segment count                  u16
//! per segment: kind u8, R u8     (kind 0 = LDOP, 1 = LBP)
//! values                         f64 x (segments * 2^N)
//! ```
//!
//! A [`DescriptorSet`] file uses the same header and replaces the single
//! value block with a `u32` record count followed by, per record, a
//! `u32`-length-prefixed UTF-8 path, a `u32`-length-prefixed UTF-8 label and
//! the record's `f64` values.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling::{MAX_NEIGHBORS, MAX_RADIUS};

pub const MAGIC: &[u8; 8] = b"LDOPDESC";
pub const FORMAT_VERSION: u16 = 1;

/// Which per-pixel code a histogram segment counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    Ldop,
    Lbp,
}

impl PatternKind {
    fn tag(self) -> u8 {
        match self {
            PatternKind::Ldop => 0,
            PatternKind::Lbp => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(PatternKind::Ldop),
            1 => Ok(PatternKind::Lbp),
            other => Err(Error::format(format!("unknown segment kind {other}"))),
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatternKind::Ldop => "ldop",
            PatternKind::Lbp => "lbp",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Segment {
    pub kind: PatternKind,
    pub radius: u8,
}

/// Shape of a descriptor: direction count plus an ordered list of segments,
/// each `2^N` bins long.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Layout {
    neighbors: u8,
    segments: Vec<Segment>,
}

impl Layout {
    pub fn new(neighbors: usize, segments: Vec<Segment>) -> Result<Self> {
        if !(2..=MAX_NEIGHBORS).contains(&neighbors) {
            return Err(Error::argument(format!(
                "neighbor count must be in 2..={MAX_NEIGHBORS}, got {neighbors}"
            )));
        }
        if segments.is_empty() {
            return Err(Error::argument("a layout needs at least one segment"));
        }
        for s in &segments {
            let min = match s.kind {
                PatternKind::Ldop => 2,
                PatternKind::Lbp => 1,
            };
            if !(min..=MAX_RADIUS as u8).contains(&s.radius) {
                return Err(Error::argument(format!(
                    "{} radius must be in {min}..={MAX_RADIUS}, got {}",
                    s.kind, s.radius
                )));
            }
        }
        Ok(Layout {
            neighbors: neighbors as u8,
            segments,
        })
    }

    /// A single LDOP histogram at `radius`.
    pub fn ldop(neighbors: usize, radius: usize) -> Result<Self> {
        Self::ldop_range(neighbors, radius, radius)
    }

    /// Concatenated LDOP histograms for radii `first..=last`.
    pub fn ldop_range(neighbors: usize, first: usize, last: usize) -> Result<Self> {
        if first < 2 || first > last || last > MAX_RADIUS {
            return Err(Error::argument(format!(
                "radius range must satisfy 2 <= R1 <= R2 <= {MAX_RADIUS}, got {first}..{last}"
            )));
        }
        let segments = (first..=last)
            .map(|r| Segment {
                kind: PatternKind::Ldop,
                radius: r as u8,
            })
            .collect();
        Self::new(neighbors, segments)
    }

    pub fn lbp(neighbors: usize, radius: usize) -> Result<Self> {
        if radius > MAX_RADIUS {
            return Err(Error::argument(format!(
                "radius {radius} exceeds {MAX_RADIUS}"
            )));
        }
        Self::new(
            neighbors,
            vec![Segment {
                kind: PatternKind::Lbp,
                radius: radius as u8,
            }],
        )
    }

    pub fn neighbors(&self) -> usize {
        self.neighbors as usize
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Bins per segment, `2^N`.
    pub fn bins(&self) -> usize {
        1 << self.neighbors
    }

    /// Total descriptor length.
    pub fn len(&self) -> usize {
        self.bins() * self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    fn write_header(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&[self.neighbors])?;
        w.write_all(&(self.segments.len() as u16).to_le_bytes())?;
        for s in &self.segments {
            w.write_all(&[s.kind.tag(), s.radius])?;
        }
        Ok(())
    }

    fn read_header(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        read_exact(r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::format("not an LDOP descriptor file (bad magic)"));
        }
        let version = u16::from_le_bytes(read_array(r)?);
        if version != FORMAT_VERSION {
            return Err(Error::format(format!(
                "unsupported descriptor format version {version}"
            )));
        }
        let [neighbors] = read_array(r)?;
        let count = u16::from_le_bytes(read_array(r)?);
        let mut segments = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let [kind, radius] = read_array(r)?;
            segments.push(Segment {
                kind: PatternKind::from_tag(kind)?,
                radius,
            });
        }
        Layout::new(neighbors as usize, segments).map_err(|e| Error::format(e.to_string()))
    }
}

/// A normalised histogram vector tagged with its layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Descriptor {
    layout: Layout,
    values: Vec<f64>,
}

impl Descriptor {
    pub fn new(layout: Layout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::argument(format!(
                "layout expects {} values, got {}",
                layout.len(),
                values.len()
            )));
        }
        Ok(Descriptor { layout, values })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn segment(&self, i: usize) -> &[f64] {
        let bins = self.layout.bins();
        &self.values[i * bins..(i + 1) * bins]
    }

    /// Appends `other`'s segments after this descriptor's.
    pub fn concat(mut self, other: Descriptor) -> Result<Self> {
        if self.layout.neighbors != other.layout.neighbors {
            return Err(Error::argument(
                "cannot concatenate descriptors with different N",
            ));
        }
        self.layout.segments.extend(other.layout.segments);
        self.values.extend(other.values);
        Ok(self)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(15 + 2 * self.layout.segments.len() + 8 * self.len());
        self.layout
            .write_header(&mut out)
            .expect("writing to a Vec cannot fail");
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let layout = Layout::read_header(&mut r)?;
        let values = read_values(&mut r, layout.len())?;
        if !r.is_empty() {
            return Err(Error::format("trailing bytes after descriptor"));
        }
        Descriptor::new(layout, values)
    }
}

/// One image's descriptor inside a [`DescriptorSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub path: String,
    pub label: String,
    pub values: Vec<f64>,
}

/// Descriptors of a whole dataset sharing one layout.
#[derive(Clone, Debug, PartialEq)]
pub struct DescriptorSet {
    pub layout: Layout,
    pub records: Vec<Record>,
}

impl DescriptorSet {
    pub fn new(layout: Layout) -> Self {
        DescriptorSet {
            layout,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, path: String, label: String, descriptor: Descriptor) -> Result<()> {
        if descriptor.layout != self.layout {
            return Err(Error::argument(format!(
                "descriptor for {path} has a different layout"
            )));
        }
        self.records.push(Record {
            path,
            label,
            values: descriptor.values,
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn descriptor(&self, i: usize) -> Descriptor {
        Descriptor {
            layout: self.layout.clone(),
            values: self.records[i].values.clone(),
        }
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        self.layout.write_header(w)?;
        let count = u32::try_from(self.records.len())
            .map_err(|_| Error::argument("too many records for the descriptor format"))?;
        w.write_all(&count.to_le_bytes())?;
        for rec in &self.records {
            write_str(w, &rec.path)?;
            write_str(w, &rec.label)?;
            for v in &rec.values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let layout = Layout::read_header(r)?;
        let count = u32::from_le_bytes(read_array(r)?);
        let mut records = Vec::with_capacity(count.min(1 << 20) as usize);
        for _ in 0..count {
            let path = read_str(r)?;
            let label = read_str(r)?;
            let values = read_values(r, layout.len())?;
            records.push(Record {
                path,
                label,
                values,
            });
        }
        let mut probe = [0u8; 1];
        if r.read(&mut probe)? != 0 {
            return Err(Error::format("trailing bytes after last record"));
        }
        Ok(DescriptorSet { layout, records })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let run = || -> Result<()> {
            let mut w = BufWriter::new(File::create(path)?);
            self.write_to(&mut w)?;
            w.flush()?;
            Ok(())
        };
        run().map_err(|e| e.with_path(path))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let run = || -> Result<Self> {
            let mut r = BufReader::new(File::open(path)?);
            Self::read_from(&mut r)
        };
        run().map_err(|e| e.with_path(path))
    }

    /// One row per image: the path followed by the descriptor values.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["path".to_string()];
        header.extend((0..self.layout.len()).map(|i| format!("v{i}")));
        out.write_record(&header).map_err(csv_error)?;
        for rec in &self.records {
            let mut row = Vec::with_capacity(rec.values.len() + 1);
            row.push(rec.path.clone());
            row.extend(rec.values.iter().map(|v| v.to_string()));
            out.write_record(&row).map_err(csv_error)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::format(format!("{other:?}")),
    }
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::format("descriptor data is truncated")
        } else {
            Error::Io(e)
        }
    })
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    read_exact(r, &mut buf)?;
    Ok(buf)
}

fn read_values(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(f64::from_le_bytes(read_array(r)?));
    }
    Ok(values)
}

fn write_str(w: &mut impl Write, s: &str) -> Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_str(r: &mut impl Read) -> Result<String> {
    let len = u32::from_le_bytes(read_array(r)?) as usize;
    if len > 1 << 16 {
        return Err(Error::format(format!("string length {len} is implausible")));
    }
    let mut buf = vec![0u8; len];
    read_exact(r, &mut buf)?;
    String::from_utf8(buf).map_err(|_| Error::format("record string is not UTF-8"))
}
