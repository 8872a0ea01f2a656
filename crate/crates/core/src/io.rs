//! Image, grid and table input/output.
//!
//! Images are read as luma (`0.299 R + 0.587 G + 0.114 B` for colour input)
//! scaled by the bit depth to `[0, 1]`. Grids round-trip through CSV
//! without loss: every value is written in shortest round-trip form.

use std::fs;
use std::io::{Cursor, Write};
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, ImageReader, Luma};

use crate::distance::MarkerSet;
use crate::error::{Error, Result};
use crate::grid::{Mask, ScalarGrid};
use crate::solver::SegmentationResult;

fn luma_of(img: DynamicImage) -> Result<ScalarGrid> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values: Vec<f64> = match img {
        DynamicImage::ImageLuma8(buf) => buf.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(buf) => buf.pixels().map(|p| p.0[0] as f64 / 65535.0).collect(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        DynamicImage::ImageLumaA16(buf) => buf.pixels().map(|p| p.0[0] as f64 / 65535.0).collect(),
        other => other
            .to_rgb32f()
            .pixels()
            .map(|p| {
                let [r, g, b] = p.0.map(f64::from);
                0.299 * r + 0.587 * g + 0.114 * b
            })
            .collect(),
    };
    ScalarGrid::new(w, h, values)
}

/// Reads a PNG or PGM file as luma in `[0, 1]` (not min-max normalized).
pub fn load_image(path: impl AsRef<Path>) -> Result<ScalarGrid> {
    let path = path.as_ref();
    let read_err = |source: image::ImageError| Error::ImageRead {
        path: path.to_path_buf(),
        source,
    };
    let img = ImageReader::open(path)?
        .with_guessed_format()?
        .decode()
        .map_err(read_err)?;
    luma_of(img)
}

/// Decodes an in-memory PNG or PGM.
pub fn decode_image(bytes: &[u8]) -> Result<ScalarGrid> {
    let img = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()?
        .decode()
        .map_err(|source| Error::ImageRead {
            path: "<memory>".into(),
            source,
        })?;
    luma_of(img)
}

/// 8-bit rendering of a grid in `[0, 1]` (values are clamped).
pub fn grid_to_gray8(grid: &ScalarGrid) -> GrayImage {
    GrayImage::from_fn(grid.width() as u32, grid.height() as u32, |i, j| {
        let v = grid.get(i as usize, j as usize).clamp(0.0, 1.0);
        Luma([(v * 255.0).round() as u8])
    })
}

/// 8-bit rendering stretched from the grid minimum (black) to its
/// maximum (white); a constant grid renders black.
pub fn grid_to_heatmap8(grid: &ScalarGrid) -> GrayImage {
    grid_to_gray8(&crate::grid::normalize(grid))
}

pub fn mask_to_gray8(mask: &Mask) -> GrayImage {
    GrayImage::from_fn(mask.width() as u32, mask.height() as u32, |i, j| {
        Luma([if mask.get(i as usize, j as usize) {
            255
        } else {
            0
        }])
    })
}

pub fn png_bytes(img: &GrayImage) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

pub fn save_png(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, png_bytes(img)?)?;
    Ok(())
}

/// Writes a grid in `[0, 1]` as an 8-bit PNG.
pub fn save_grid_png(grid: &ScalarGrid, path: impl AsRef<Path>) -> Result<()> {
    save_png(&grid_to_gray8(grid), path)
}

pub fn save_mask_png(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    save_png(&mask_to_gray8(mask), path)
}

/// Reads a binary mask; pixels with luma above one half are set.
pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let g = load_image(path)?;
    Ok(Mask::from_fn(g.width(), g.height(), |i, j| {
        g.get(i, j) > 0.5
    }))
}

/// In-memory counterpart of [`load_mask`].
pub fn decode_mask(bytes: &[u8]) -> Result<Mask> {
    let g = decode_image(bytes)?;
    Ok(Mask::from_fn(g.width(), g.height(), |i, j| {
        g.get(i, j) > 0.5
    }))
}

/// One CSV line per grid row.
pub fn grid_csv_string(grid: &ScalarGrid) -> String {
    let mut out = String::with_capacity(grid.len() * 20);
    for j in 0..grid.height() {
        for i in 0..grid.width() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&grid.get(i, j).to_string());
        }
        out.push('\n');
    }
    out
}

pub fn write_grid_csv(grid: &ScalarGrid, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, grid_csv_string(grid))?;
    Ok(())
}

pub fn parse_grid_csv(text: &str) -> Result<ScalarGrid> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut width = None;
    let mut height = 0;
    for record in reader.records() {
        let record = record?;
        if *width.get_or_insert(record.len()) != record.len() {
            return Err(crate::error::invalid("csv", "rows have different lengths"));
        }
        for field in record.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| crate::error::invalid("csv", format!("not a number: `{field}`")))?;
            values.push(v);
        }
        height += 1;
    }
    ScalarGrid::new(width.unwrap_or(0), height, values)
}

pub fn read_grid_csv(path: impl AsRef<Path>) -> Result<ScalarGrid> {
    parse_grid_csv(&fs::read_to_string(path)?)
}

/// `iteration,residual,energy,c1,c2`; iteration 0 is the initial state and
/// has an empty residual.
pub fn residual_csv_string(result: &SegmentationResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iteration", "residual", "energy", "c1", "c2"])?;
    let first = result
        .c_history
        .first()
        .copied()
        .unwrap_or((result.c1, result.c2));
    let e0 = result.energy_history.first().copied().unwrap_or(f64::NAN);
    w.write_record([
        "0".to_string(),
        String::new(),
        e0.to_string(),
        first.0.to_string(),
        first.1.to_string(),
    ])?;
    for (k, res) in result.residual_history.iter().enumerate() {
        let (c1, c2) = result.c_history[k];
        w.write_record([
            (k + 1).to_string(),
            res.to_string(),
            result.energy_history[k + 1].to_string(),
            c1.to_string(),
            c2.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_residual_csv(result: &SegmentationResult, path: impl AsRef<Path>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(residual_csv_string(result)?.as_bytes())?;
    Ok(())
}

pub fn read_markers(path: impl AsRef<Path>) -> Result<MarkerSet> {
    MarkerSet::from_json(&fs::read_to_string(path)?)
}
