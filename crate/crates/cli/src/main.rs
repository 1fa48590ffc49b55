mod config;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use ldop::dataset::{extract_dataset, load_all, load_preprocessed, scan_dataset};
use ldop::sweep::{sweep, RadiusSpec, SWEEP_GAMMA};
use ldop::{
    evaluate, extract, lbp_map, ldop_map, order_map, write_pgm, DatasetIndex, DescriptorSet,
    NeighborSpec,
};

use crate::config::{Options, RunConfig};

const EXIT_INPUT: u8 = 1;
const EXIT_IO: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "ldop",
    version,
    about = "LDOP descriptors and face retrieval evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Describe every image of a dataset and write a descriptor file.
    Extract {
        #[command(flatten)]
        opts: Options,
        /// Also write the descriptors as CSV.
        #[arg(long)]
        csv: Option<std::path::PathBuf>,
    },
    /// Use every image as a query and report ARP, ARR, F-score and ANMRR.
    Evaluate {
        #[command(flatten)]
        opts: Options,
        /// Also write the metrics as JSON.
        #[arg(long)]
        json: Option<std::path::PathBuf>,
    },
    /// F-score at gamma = 10 for a list of radius settings.
    Sweep {
        #[command(flatten)]
        opts: Options,
    },
    /// Rank the database against one query image.
    Query {
        #[command(flatten)]
        opts: Options,
        /// Query image (PGM or PNG).
        image: std::path::PathBuf,
    },
    /// Dump LDOP, directional order and LBP maps of one image as PGM.
    Maps {
        #[command(flatten)]
        opts: Options,
        /// Input image (PGM or PNG).
        image: std::path::PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let io = err.chain().any(|e| {
        e.downcast_ref::<ldop::Error>()
            .is_some_and(ldop::Error::is_io)
            || e.downcast_ref::<io::Error>().is_some()
    });
    if io {
        EXIT_IO
    } else {
        EXIT_INPUT
    }
}

fn run(cli: Cli) -> Result<()> {
    let opts = match &cli.command {
        Command::Extract { opts, .. }
        | Command::Evaluate { opts, .. }
        | Command::Sweep { opts }
        | Command::Query { opts, .. }
        | Command::Maps { opts, .. } => opts,
    };
    let cfg = RunConfig::resolve(opts)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .context("failed to start worker pool")?;
    pool.install(|| match &cli.command {
        Command::Extract { csv, .. } => cmd_extract(&cfg, csv.as_deref()),
        Command::Evaluate { json, .. } => cmd_evaluate(&cfg, json.as_deref()),
        Command::Sweep { .. } => cmd_sweep(&cfg),
        Command::Query { image, .. } => cmd_query(&cfg, image),
        Command::Maps { image, .. } => cmd_maps(&cfg, image),
    })
}

/// Writes to `--out` when given, stdout otherwise.
fn with_output(cfg: &RunConfig, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &cfg.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| ldop::Error::from(e).with_path(path))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()
                .map_err(|e| ldop::Error::from(e).with_path(path))?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
        }
    }
    Ok(())
}

fn cmd_extract(cfg: &RunConfig, csv: Option<&Path>) -> Result<()> {
    let layout = cfg.layout()?;
    let out = cfg
        .out
        .as_deref()
        .ok_or_else(|| anyhow!(ldop::Error::Argument("extract needs --out".into())))?;
    let entries = scan_dataset(cfg.dataset()?)?;
    let result = extract_dataset(&entries, &layout);

    result.set.save(out)?;
    if let Some(csv) = csv {
        let file = File::create(csv).map_err(|e| ldop::Error::from(e).with_path(csv))?;
        result
            .set
            .write_csv(BufWriter::new(file))
            .map_err(|e| e.with_path(csv))?;
    }
    eprintln!(
        "extracted {} of {} images ({} values each) to {}",
        result.set.len(),
        entries.len(),
        layout.len(),
        out.display()
    );

    if result.failures.is_empty() {
        return Ok(());
    }
    for (_, err) in &result.failures {
        eprintln!("failed: {err}");
    }
    let any_io = result.failures.iter().any(|(_, e)| e.is_io());
    let summary = format!("{} image(s) could not be described", result.failures.len());
    if any_io {
        Err(anyhow!(io::Error::other(summary)))
    } else {
        bail!(summary)
    }
}

/// Descriptor set from `--descriptors`, or extracted on the fly from
/// `--dataset`.
fn load_or_extract(cfg: &RunConfig) -> Result<DescriptorSet> {
    if let Some(path) = &cfg.descriptors {
        return Ok(DescriptorSet::load(path)?);
    }
    let layout = cfg.layout()?;
    let entries = scan_dataset(cfg.dataset().context("need --descriptors or --dataset")?)?;
    let result = extract_dataset(&entries, &layout);
    if let Some((_, err)) = result.failures.into_iter().next() {
        return Err(err.into());
    }
    Ok(result.set)
}

fn cmd_evaluate(cfg: &RunConfig, json: Option<&Path>) -> Result<()> {
    let set = load_or_extract(cfg)?;
    let index = DatasetIndex::from_set(&set)?;
    let report = evaluate(&index, &cfg.gammas, cfg.distance)?;
    with_output(cfg, |w| Ok(report.write_csv(w)?))?;
    if let Some(path) = json {
        fs::write(path, report.to_json() + "\n")
            .map_err(|e| ldop::Error::from(e).with_path(path))?;
    }
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig) -> Result<()> {
    let specs = RadiusSpec::parse_list(cfg.radii.as_deref().unwrap_or("2,3,4,5,6,23,24,25,26"))?;
    let entries = scan_dataset(cfg.dataset()?)?;
    let mut images = Vec::with_capacity(entries.len());
    for (entry, img) in entries.iter().zip(load_all(&entries)) {
        images.push((
            entry.path.to_string_lossy().into_owned(),
            entry.label.clone(),
            img?,
        ));
    }
    let rows = sweep(&images, &specs, cfg.neighbors, cfg.distance)?;
    with_output(cfg, |w| {
        writeln!(w, "radii,f_score_at_{SWEEP_GAMMA}")?;
        for row in &rows {
            writeln!(w, "{},{:.6}", row.spec, row.f_score)?;
        }
        Ok(())
    })
}

fn cmd_query(cfg: &RunConfig, image: &Path) -> Result<()> {
    let path = cfg
        .descriptors
        .as_deref()
        .ok_or_else(|| anyhow!(ldop::Error::Argument("query needs --descriptors".into())))?;
    let set = DescriptorSet::load(path)?;
    let index = DatasetIndex::from_set(&set)?;
    let query = extract(&load_preprocessed(image)?, &set.layout)?;
    // the deepest configured cut-off
    let gamma = cfg.gammas.iter().copied().max().unwrap_or(10);
    let hits = index.query(&query, gamma, cfg.distance)?;
    with_output(cfg, |w| {
        writeln!(w, "rank\tpath\tclass\tdistance")?;
        for (rank, hit) in hits.iter().enumerate() {
            writeln!(
                w,
                "{}\t{}\t{}\t{:.9}",
                rank + 1,
                index.id(hit.index),
                index.label(hit.index),
                hit.distance
            )?;
        }
        Ok(())
    })
}

fn cmd_maps(cfg: &RunConfig, image: &Path) -> Result<()> {
    let img = load_preprocessed(image)?;
    let out = cfg.out.as_deref().unwrap_or(Path::new("."));
    fs::create_dir_all(out).map_err(|e| ldop::Error::from(e).with_path(out))?;
    let n = cfg.neighbors;

    let mut radii = Vec::new();
    for spec in RadiusSpec::parse_list(cfg.radii.as_deref().unwrap_or("2,3,4"))? {
        radii.extend(spec.first..=spec.last);
    }
    radii.dedup();

    let mut written = 0;
    for &r in &radii {
        let spec = NeighborSpec::new(n, r)?;
        write_pgm(
            out.join(format!("ldop_r{r}.pgm")),
            &ldop_map(&img, &spec)?.to_image(),
        )?;
        written += 1;
        for k in 0..n {
            let map = order_map(&img, k, &spec)?;
            write_pgm(
                out.join(format!("order_r{r}_k{}.pgm", k + 1)),
                &map.to_image(),
            )?;
            written += 1;
        }
    }
    let lbp_radius = cfg.radius.unwrap_or(1);
    let lbp = lbp_map(&img, &NeighborSpec::new(n, lbp_radius)?)?;
    write_pgm(out.join(format!("lbp_r{lbp_radius}.pgm")), &lbp.to_image())?;
    written += 1;
    eprintln!("wrote {written} maps to {}", out.display());
    Ok(())
}
