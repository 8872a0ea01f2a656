//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use geoseg::eval::{parameter_sweep, save_sweep_heatmap, sweep_csv_string, SweepSpec};
use geoseg::io::{self, grid_to_gray8, save_png};
use geoseg::{
    generate_synthetic, normalize, run_pipeline, tanimoto, DistanceBundle, GridIndex, MarkerSet,
    SyntheticKind,
};

use crate::params::{DistanceFlags, Params};

#[derive(Debug, Parser)]
#[command(
    name = "geoseg",
    version,
    about = "Marker-driven selective segmentation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment the object under the markers.
    Segment(SegmentArgs),
    /// Write the distance maps as heatmap PNGs and CSVs.
    Distance(DistanceArgs),
    /// Generate a synthetic test image with ground truth and markers.
    Synth(SynthArgs),
    /// Run a λ × θ grid and report the Tanimoto coefficient of each point.
    Sweep(SweepArgs),
    /// Serve the REST API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// PNG or PGM image.
    #[arg(long)]
    pub image: PathBuf,
    /// JSON `{"markers": [[i, j], ...], "anti_markers": [...]}` or a bare
    /// `[[i, j], ...]` list.
    #[arg(long)]
    pub markers: PathBuf,
    /// Extra anti-markers, same formats; a full document contributes its
    /// `anti_markers`.
    #[arg(long = "anti-markers")]
    pub anti_markers: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: Params,
    /// Mask PNG, or the output directory with `--distance-only`.
    #[arg(long, default_value = "mask.png")]
    pub out: PathBuf,
    /// CSV of the final relaxed indicator u.
    #[arg(long = "out-u")]
    pub out_u: Option<PathBuf>,
    /// CSV of per-iteration residual, energy and region means.
    #[arg(long = "out-residuals")]
    pub out_residuals: Option<PathBuf>,
    /// Binary mask PNG; prints the Tanimoto coefficient of the result.
    #[arg(long = "ground-truth")]
    pub ground_truth: Option<PathBuf>,
    /// Stop after the distance maps and write them into `--out`.
    #[arg(long = "distance-only")]
    pub distance_only: bool,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub distance: DistanceFlags,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// circle_among_shapes, two_touching_circles_blurred_bridge or
    /// bright_object_dark_distractors.
    #[arg(long)]
    pub kind: SyntheticKind,
    #[arg(long, default_value_t = 128)]
    pub size: usize,
    /// Standard deviation of the additive Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory for image.png, ground_truth.png and markers.json.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long = "ground-truth")]
    pub ground_truth: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "2,5,10,20")]
    pub lambdas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10")]
    pub thetas: Vec<f64>,
    /// Fixed values for everything but λ and θ.
    #[command(flatten)]
    pub params: Params,
    #[arg(long, default_value = "sweep.csv")]
    pub out: PathBuf,
    /// Optional PNG heatmap of the Tanimoto grid.
    #[arg(long)]
    pub heatmap: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Overridden by GEOSEG_PORT.
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

/// Process exit status of a finished segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    MaxIterations,
}

fn read_anti_markers(path: &Path) -> Result<Vec<GridIndex>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(points) = serde_json::from_str::<Vec<GridIndex>>(&text) {
        return Ok(points);
    }
    let doc = MarkerSet::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(doc.anti_markers)
}

/// Loads the image and the merged marker set.
pub fn load_inputs(input: &InputArgs) -> Result<(geoseg::ScalarGrid, MarkerSet)> {
    let raw = io::load_image(&input.image)
        .with_context(|| format!("loading {}", input.image.display()))?;
    let text = fs::read_to_string(&input.markers)
        .with_context(|| format!("reading {}", input.markers.display()))?;
    let mut markers = match serde_json::from_str::<Vec<GridIndex>>(&text) {
        Ok(points) => MarkerSet::new(points, vec![]),
        Err(_) => MarkerSet::from_json(&text)
            .with_context(|| format!("parsing {}", input.markers.display()))?,
    };
    if let Some(path) = &input.anti_markers {
        let mut anti = markers.anti_markers.clone();
        anti.extend(read_anti_markers(path)?);
        markers = MarkerSet::new(markers.markers, anti);
    }
    markers.validate(raw.width(), raw.height())?;
    Ok((raw, markers))
}

/// Writes `D_E`, `D_M`, `D_G` and, with anti-markers, `D_AM` as
/// `<name>.png` (8-bit, 0 black to 1 white) and `<name>.csv`.
pub fn write_distance_maps(bundle: &DistanceBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut maps = vec![
        ("euclidean", &bundle.euclidean),
        ("geodesic", &bundle.marker_geodesic),
        ("combined", &bundle.combined),
    ];
    if bundle.has_anti_markers {
        maps.push(("anti", &bundle.anti_marker));
    }
    let mut written = Vec::new();
    for (name, grid) in maps {
        let png = dir.join(format!("{name}.png"));
        save_png(&grid_to_gray8(grid), &png)?;
        let csv = dir.join(format!("{name}.csv"));
        io::write_grid_csv(grid, &csv)?;
        written.extend([png, csv]);
    }
    Ok(written)
}

pub fn segment(args: &SegmentArgs) -> Result<Outcome> {
    let (raw, markers) = load_inputs(&args.input)?;
    let cfg = args.params.config()?;
    let truth = match &args.ground_truth {
        Some(p) => {
            let m = io::load_mask(p).with_context(|| format!("loading {}", p.display()))?;
            if (m.width(), m.height()) != (raw.width(), raw.height()) {
                bail!(
                    "ground truth is {}x{}, image is {}x{}",
                    m.width(),
                    m.height(),
                    raw.width(),
                    raw.height()
                );
            }
            Some(m)
        }
        None => None,
    };
    if args.distance_only {
        let bundle = DistanceBundle::build(&normalize(&raw), &markers, &cfg.distance)?;
        for p in write_distance_maps(&bundle, &args.out)? {
            println!("wrote {}", p.display());
        }
        return Ok(Outcome::Converged);
    }

    let out = run_pipeline(&raw, &markers, &cfg, None)?;
    let r = &out.result;
    io::save_mask_png(&r.mask, &args.out)?;
    if let Some(p) = &args.out_u {
        io::write_grid_csv(&r.u, p)?;
    }
    if let Some(p) = &args.out_residuals {
        io::write_residual_csv(r, p)?;
    }
    println!(
        "iterations={} converged={} c1={} c2={} area={}",
        r.iterations,
        r.converged,
        r.c1,
        r.c2,
        r.mask.count()
    );
    if let Some(gt) = truth {
        println!("tc={}", tanimoto(&r.mask, &gt)?);
    }
    Ok(if r.converged {
        Outcome::Converged
    } else {
        Outcome::MaxIterations
    })
}

pub fn distance(args: &DistanceArgs) -> Result<()> {
    let (raw, markers) = load_inputs(&args.input)?;
    let cfg = args.distance.config();
    let bundle = DistanceBundle::build(&normalize(&raw), &markers, &cfg)?;
    for p in write_distance_maps(&bundle, &args.out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let s = generate_synthetic(args.kind, args.size, args.noise, args.seed)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    io::save_grid_png(&s.image, args.out.join("image.png"))?;
    io::save_mask_png(&s.ground_truth, args.out.join("ground_truth.png"))?;
    fs::write(args.out.join("markers.json"), s.markers.to_json())?;
    println!("wrote {}", args.out.display());
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let (raw, markers) = load_inputs(&args.input)?;
    let cfg = args.params.config()?;
    let spec = SweepSpec {
        lambda_values: args.lambdas.clone(),
        theta_values: args.thetas.clone(),
        fixed: cfg.solver,
        ground_truth: io::load_mask(&args.ground_truth)?,
    };
    let rows = parameter_sweep(&normalize(&raw), &markers, &cfg.distance, &spec)?;
    fs::write(&args.out, sweep_csv_string(&rows)?)?;
    if let Some(p) = &args.heatmap {
        save_sweep_heatmap(&spec, &rows, p)?;
    }
    let worst = rows.iter().map(|r| r.tc).fold(f64::INFINITY, f64::min);
    let best = rows.iter().map(|r| r.tc).fold(f64::NEG_INFINITY, f64::max);
    println!("points={} min_tc={worst} max_tc={best}", rows.len());
    Ok(())
}
