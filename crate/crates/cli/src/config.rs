//! Run configuration: command-line flags over a `key = value` file over
//! built-in defaults.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use ldop::sweep::RadiusSpec;
use ldop::{DistanceMeasure, Layout};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DescriptorKind {
    Ldop,
    LdopMulti,
    Lbp,
}

impl FromStr for DescriptorKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s, true).map_err(|e| anyhow!(e))
    }
}

/// Flags shared by every subcommand. Everything is optional here so that a
/// config file can fill the gaps.
#[derive(Args, Debug, Default, Clone)]
pub struct Options {
    /// Descriptor to compute.
    #[arg(long, value_enum)]
    pub descriptor: Option<DescriptorKind>,

    /// Radius for the single-radius descriptors (ldop, lbp).
    #[arg(long)]
    pub radius: Option<usize>,

    /// Radius settings: "2-4" or "24" for ldop-multi, a comma list for sweep and maps.
    #[arg(long)]
    pub radii: Option<String>,

    /// Number of directions N.
    #[arg(long)]
    pub neighbors: Option<usize>,

    /// euclidean, cosine, l1, d1 or chisq.
    #[arg(long)]
    pub distance: Option<String>,

    /// Cut-offs: "1-10", "1,5,10" or a single value.
    #[arg(long)]
    pub gamma: Option<String>,

    /// Dataset root with one sub-directory per class.
    #[arg(long)]
    pub dataset: Option<PathBuf>,

    /// Descriptor file written by `extract`.
    #[arg(long)]
    pub descriptors: Option<PathBuf>,

    /// Output file (or directory for `maps`).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Worker threads; 0 lets the pool decide.
    #[arg(long)]
    pub workers: Option<usize>,

    /// File of `key = value` lines using the flag names above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Fully resolved settings.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub descriptor: DescriptorKind,
    pub radius: Option<usize>,
    pub radii: Option<String>,
    pub neighbors: usize,
    pub distance: DistanceMeasure,
    pub gammas: Vec<usize>,
    pub dataset: Option<PathBuf>,
    pub descriptors: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub workers: usize,
}

pub const DEFAULT_NEIGHBORS: usize = 8;
pub const DEFAULT_MULTI_RADII: &str = "2-4";

impl RunConfig {
    pub fn resolve(opts: &Options) -> Result<Self> {
        let file = match &opts.config {
            Some(path) => read_config_file(path)?,
            None => HashMap::new(),
        };
        let pick = |cli: Option<String>, key: &str| cli.or_else(|| file.get(key).cloned());
        let parse = |cli: Option<String>, key: &str| -> Result<Option<usize>> {
            pick(cli, key)
                .map(|v| {
                    v.parse::<usize>()
                        .with_context(|| format!("invalid {key} {v:?}"))
                })
                .transpose()
        };

        let cli_kind = opts
            .descriptor
            .and_then(|d| d.to_possible_value())
            .map(|v| v.get_name().to_string());
        let descriptor = match pick(cli_kind, "descriptor") {
            Some(s) => s
                .parse()
                .with_context(|| format!("invalid descriptor {s:?}"))?,
            None => DescriptorKind::LdopMulti,
        };
        let distance = match pick(opts.distance.clone(), "distance") {
            Some(s) => s.parse()?,
            None => DistanceMeasure::ChiSquare,
        };
        let gammas = match pick(opts.gamma.clone(), "gamma") {
            Some(s) => parse_gammas(&s)?,
            None => (1..=10).collect(),
        };

        Ok(RunConfig {
            descriptor,
            radius: parse(opts.radius.map(|v| v.to_string()), "radius")?,
            radii: pick(opts.radii.clone(), "radii"),
            neighbors: parse(opts.neighbors.map(|v| v.to_string()), "neighbors")?
                .unwrap_or(DEFAULT_NEIGHBORS),
            distance,
            gammas,
            dataset: pick(opts.dataset.as_ref().map(path_str), "dataset").map(PathBuf::from),
            descriptors: pick(opts.descriptors.as_ref().map(path_str), "descriptors")
                .map(PathBuf::from),
            out: pick(opts.out.as_ref().map(path_str), "out").map(PathBuf::from),
            workers: parse(opts.workers.map(|v| v.to_string()), "workers")?.unwrap_or(0),
        })
    }

    /// Descriptor layout implied by the kind and radius flags.
    pub fn layout(&self) -> Result<Layout> {
        let n = self.neighbors;
        let layout = match self.descriptor {
            DescriptorKind::Ldop => Layout::ldop(n, self.radius.unwrap_or(2))?,
            DescriptorKind::Lbp => Layout::lbp(n, self.radius.unwrap_or(1))?,
            DescriptorKind::LdopMulti => {
                let text = self.radii.as_deref().unwrap_or(DEFAULT_MULTI_RADII);
                match RadiusSpec::parse_list(text)?.as_slice() {
                    [spec] => spec.layout(n)?,
                    _ => bail!("ldop-multi takes one radius range such as \"2-4\", got {text:?}"),
                }
            }
        };
        Ok(layout)
    }

    pub fn dataset(&self) -> Result<&Path> {
        self.dataset
            .as_deref()
            .ok_or_else(|| anyhow!(ldop::Error::Argument("--dataset is required".into())))
    }
}

fn path_str(p: &PathBuf) -> String {
    p.to_string_lossy().into_owned()
}

fn read_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| ldop::Error::from(e).with_path(path))?;
    parse_config(&text).with_context(|| format!("{}", path.display()))
}

pub fn parse_config(text: &str) -> Result<HashMap<String, String>> {
    const KEYS: &[&str] = &[
        "descriptor",
        "radius",
        "radii",
        "neighbors",
        "distance",
        "gamma",
        "dataset",
        "descriptors",
        "out",
        "workers",
    ];
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ldop::Error::Argument(format!("line {}: expected key = value", i + 1))
        })?;
        let key = key.trim().trim_start_matches("--").to_string();
        if !KEYS.contains(&key.as_str()) {
            bail!(ldop::Error::Argument(format!(
                "line {}: unknown key {key:?}",
                i + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

pub fn parse_gammas(s: &str) -> Result<Vec<usize>> {
    let bad = || ldop::Error::Argument(format!("invalid gamma list {s:?}"));
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once('-') {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a == 0 || a > b {
                bail!(bad());
            }
            out.extend(a..=b);
        } else {
            let g: usize = part.parse().map_err(|_| bad())?;
            if g == 0 {
                bail!(bad());
            }
            out.push(g);
        }
    }
    Ok(out)
}
