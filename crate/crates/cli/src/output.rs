//! CSV tables and 16-bit PGM heatmaps.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use subquantum::dynamics::TrajectorySet;
use subquantum::ScalarField;

/// Anything that can be written as a CSV table.
pub trait CsvTable {
    fn write_rows(&self, out: &mut dyn Write) -> io::Result<()>;
}

/// Values use 17 significant digits, which round-trips every `f64`.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl CsvTable for ScalarField {
    fn write_rows(&self, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "x,value")?;
        for (x, v) in self.grid().points().zip(self.values()) {
            writeln!(out, "{},{}", num(x), num(*v))?;
        }
        Ok(())
    }
}

impl CsvTable for TrajectorySet {
    fn write_rows(&self, out: &mut dyn Write) -> io::Result<()> {
        write!(out, "t,y")?;
        for i in 0..self.len() {
            write!(out, ",x_seed_{i}")?;
        }
        writeln!(out)?;
        for (k, (t, y)) in self.times.iter().zip(self.y()).enumerate() {
            write!(out, "{},{}", num(*t), num(y))?;
            for p in &self.positions {
                write!(out, ",{}", num(p[k]))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Named numeric columns of equal length.
pub struct Columns<'a> {
    pub names: &'a [&'a str],
    pub columns: &'a [&'a [f64]],
}

impl CsvTable for Columns<'_> {
    fn write_rows(&self, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "{}", self.names.join(","))?;
        let rows = self.columns.iter().map(|c| c.len()).min().unwrap_or(0);
        for r in 0..rows {
            let row: Vec<String> = self.columns.iter().map(|c| num(c[r])).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn write_csv(table: &dyn CsvTable, path: &Path) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    table.write_rows(&mut out)?;
    out.flush()
}

/// Pixel rows, top row first.
struct Raster {
    width: usize,
    height: usize,
    pixels: Vec<u16>,
}

impl Raster {
    fn from_frames(frames: &[ScalarField]) -> io::Result<Self> {
        let Some(first) = frames.first() else {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                "a heatmap needs at least one frame",
            ));
        };
        let width = first.grid().len();
        if frames.iter().any(|f| f.grid() != first.grid()) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                "all frames must share one grid",
            ));
        }
        let max = frames.iter().map(|f| f.peak()).fold(0.0, f64::max);
        let height = frames.len();
        let mut pixels = Vec::with_capacity(width * height);
        // last frame on top so y grows upward
        for frame in frames.iter().rev() {
            pixels.extend(frame.values().iter().map(|&v| {
                if max > 0.0 {
                    ((v.max(0.0) / max) * 65535.0).round() as u16
                } else {
                    0
                }
            }));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    fn set(&mut self, row_from_bottom: usize, col: usize) {
        let row = self.height - 1 - row_from_bottom;
        self.pixels[row * self.width + col] = u16::MAX;
    }

    fn write(&self, path: &Path, comment: &str) -> io::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "P5")?;
        for line in comment.lines() {
            writeln!(out, "# {line}")?;
        }
        write!(out, "{} {}\n65535\n", self.width, self.height)?;
        for p in &self.pixels {
            out.write_all(&p.to_be_bytes())?;
        }
        out.flush()
    }
}

const LAYOUT: &str = "rows are frames in time order, y = v_y t increasing upward \
(bottom row is the first frame); columns are grid points, x increasing to the right";

/// Intensity frames as a binary 16-bit graymap scaled to the global maximum.
pub fn write_heatmap(frames: &[ScalarField], path: &Path) -> io::Result<()> {
    Raster::from_frames(frames)?.write(path, LAYOUT)
}

/// The same heatmap with trajectories drawn as full-scale pixels.
///
/// Trajectory samples are placed by linear interpolation of their time
/// between frame times and joined by straight segments.
pub fn write_overlay(frames: &[ScalarField], set: &TrajectorySet, path: &Path) -> io::Result<()> {
    let mut raster = Raster::from_frames(frames)?;
    let grid = *frames[0].grid();
    let frame_times: Vec<f64> = frames.iter().map(|f| f.time()).collect();
    let row_of = |t: f64| -> Option<f64> {
        let (t_first, t_last) = (frame_times[0], *frame_times.last().unwrap());
        if frame_times.len() == 1 {
            return (t == t_first).then_some(0.0);
        }
        if t < t_first || t > t_last {
            return None;
        }
        let k = frame_times.partition_point(|&ft| ft <= t).clamp(1, frame_times.len() - 1);
        let (a, b) = (frame_times[k - 1], frame_times[k]);
        Some((k - 1) as f64 + (t - a) / (b - a))
    };
    let col_of = |x: f64| (x - grid.x_min()) / grid.dx();
    let (w, h) = (raster.width as f64, raster.height as f64);
    for path_x in &set.positions {
        let pts: Vec<(f64, f64)> = set
            .times
            .iter()
            .zip(path_x)
            .filter_map(|(&t, &x)| row_of(t).map(|r| (r, col_of(x))))
            .collect();
        let mut plot = |r: f64, c: f64| {
            let (r, c) = (r.round(), c.round());
            if r >= 0.0 && r < h && c >= 0.0 && c < w {
                raster.set(r as usize, c as usize);
            }
        };
        if let [(r, c)] = pts[..] {
            plot(r, c);
        }
        for seg in pts.windows(2) {
            let ((r0, c0), (r1, c1)) = (seg[0], seg[1]);
            let steps = (r1 - r0).abs().max((c1 - c0).abs()).ceil().max(1.0) as usize;
            for s in 0..=steps {
                let f = s as f64 / steps as f64;
                plot(r0 + f * (r1 - r0), c0 + f * (c1 - c0));
            }
        }
    }
    raster.write(path, &format!("{LAYOUT}\ntrajectories drawn at maxval"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use subquantum::Grid;

    #[test]
    fn number_format_round_trips() {
        for &x in &[0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn raster_orientation() {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        let early = ScalarField::new(g, vec![1.0, 0.0, 0.0], 0.0).unwrap();
        let late = ScalarField::new(g, vec![0.0, 0.0, 2.0], 1.0).unwrap();
        let r = Raster::from_frames(&[early, late]).unwrap();
        // top row is the later frame
        assert_eq!(r.pixels, vec![0, 0, 65535, 32768, 0, 0]);
    }
}
