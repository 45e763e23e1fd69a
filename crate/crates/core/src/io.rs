//! Point-cloud CSV, orthogonal-matrix CSV and grayscale image I/O.
//!
//! Point clouds use a header `x0,...,x{n-1}` with an optional trailing `w`
//! weight column; without it weights are uniform. Coordinates are written in
//! shortest round-trip form (`{:?}`), so a written file re-parses to an equal
//! measure.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, IntensityGrid};
use crate::slicing::OrthoMatrix;

pub fn parse_measure_csv(text: &str) -> Result<DiscreteMeasure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Parse(format!("point-cloud header: {e}")))?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    let weighted = names.last() == Some(&"w");
    let dim = names.len() - usize::from(weighted);
    if dim == 0 {
        return Err(Error::Parse("point-cloud header has no coordinate columns".into()));
    }
    for (i, name) in names[..dim].iter().enumerate() {
        if *name != format!("x{i}") {
            return Err(Error::Parse(format!("expected column `x{i}`, found `{name}`")));
        }
    }

    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("row {}: {e}", row + 2)))?;
        if record.len() != names.len() {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                row + 2,
                record.len(),
                names.len()
            )));
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: `{field}` is not a number", row + 2)))?;
            if col < dim {
                points.push(v);
            } else {
                weights.push(v);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::InvalidMeasure("point cloud has no rows".into()));
    }
    if weighted {
        DiscreteMeasure::from_flat(dim, points, weights)
    } else {
        DiscreteMeasure::uniform_flat(dim, points)
    }
}

pub fn read_measure_csv(path: &Path) -> Result<DiscreteMeasure> {
    parse_measure_csv(&fs::read_to_string(path)?)
}

/// The weight column is omitted when every weight is exactly `1/m`.
pub fn measure_to_csv(m: &DiscreteMeasure) -> String {
    let uniform = 1.0 / m.len() as f64;
    let weighted = m.weights().iter().any(|w| *w != uniform);
    let mut out = String::new();
    let mut header: Vec<String> = (0..m.dim()).map(|i| format!("x{i}")).collect();
    if weighted {
        header.push("w".into());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (x, w) in m.points().zip(m.weights()) {
        let mut fields: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
        if weighted {
            fields.push(format!("{w:?}"));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_measure_csv(path: &Path, m: &DiscreteMeasure) -> Result<()> {
    Ok(fs::write(path, measure_to_csv(m))?)
}

/// Headerless `n×n` CSV, one matrix row per line.
pub fn parse_ortho_csv(text: &str) -> Result<OrthoMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("matrix row {}: {e}", i + 1)))?;
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("matrix row {}: `{f}` is not a number", i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("matrix file is empty".into()));
    }
    if rows.iter().any(|r| r.len() != rows.len()) {
        return Err(Error::Parse(format!("matrix with {} rows is not square", rows.len())));
    }
    OrthoMatrix::from_rows(&rows)
}

pub fn read_ortho_csv(path: &Path) -> Result<OrthoMatrix> {
    parse_ortho_csv(&fs::read_to_string(path)?)
}

pub fn ortho_to_csv(p: &OrthoMatrix) -> String {
    let mut out = String::new();
    for row in p.rows() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// True for file extensions read as grayscale images (`png`, `pgm`, `pnm`).
pub fn is_image_path(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "pgm" | "pnm"))
        .unwrap_or(false)
}

/// Reads an 8-bit grayscale PNG or PGM (P2/P5) into raw intensities 0–255.
pub fn read_intensity_image(path: &Path) -> Result<IntensityGrid> {
    let img = image::ImageReader::open(path)?
        .with_guessed_format()?
        .decode()
        .map_err(|e| Error::Image(format!("{}: {e}", path.display())))?
        .into_luma8();
    let (w, h) = img.dimensions();
    IntensityGrid::new(h as usize, w as usize, img.into_raw().into_iter().map(f64::from).collect())
}

/// Reads a point-cloud CSV, or an image converted with [`DiscreteMeasure::from_image`].
pub fn read_measure(path: &Path) -> Result<(DiscreteMeasure, Option<IntensityGrid>)> {
    if is_image_path(path) {
        let grid = read_intensity_image(path)?;
        Ok((DiscreteMeasure::from_image(&grid)?, Some(grid)))
    } else {
        Ok((read_measure_csv(path)?, None))
    }
}

/// Bins atom masses onto an `height×width` grid by nearest pixel.
///
/// The point `(x, y)` lands in row `H−1−round(y)`, column `round(x)`; mass
/// falling outside the grid is dropped and its total returned alongside.
pub fn render_measure(m: &DiscreteMeasure, height: usize, width: usize) -> Result<(IntensityGrid, f64)> {
    if m.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: m.dim(),
        });
    }
    let mut data = vec![0.0; height * width];
    let mut lost = 0.0;
    for (p, w) in m.points().zip(m.weights()) {
        let (col, up) = (p[0].round(), p[1].round());
        let row = height as f64 - 1.0 - up;
        if col >= 0.0 && row >= 0.0 && col < width as f64 && row < height as f64 {
            data[row as usize * width + col as usize] += w;
        } else {
            lost += w;
        }
    }
    Ok((IntensityGrid::new(height, width, data)?, lost))
}

/// Rescales intensities so the maximum maps to 255 and writes an 8-bit image.
///
/// The format follows the extension: `.pgm`/`.pnm` give binary PGM, anything else PNG.
pub fn write_intensity_image(path: &Path, grid: &IntensityGrid) -> Result<()> {
    let max = grid.data.iter().cloned().fold(0.0, f64::max);
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    let pixels: Vec<u8> = grid.data.iter().map(|v| (v * scale).round().clamp(0.0, 255.0) as u8).collect();
    let img = image::GrayImage::from_raw(grid.width as u32, grid.height as u32, pixels)
        .ok_or_else(|| Error::Image("grid size overflow".into()))?;
    let format = if is_image_path(path) && path.extension().is_some_and(|e| e != "png") {
        image::ImageFormat::Pnm
    } else {
        image::ImageFormat::Png
    };
    img.save_with_format(path, format)
        .map_err(|e| Error::Image(format!("{}: {e}", path.display())))
}
