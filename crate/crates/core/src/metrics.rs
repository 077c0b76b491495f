//! Occupancy-grid dwell bookkeeping, coverage, heatmap artifacts and
//! mission energy.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::{Arena, Vec2};

/// Dwell time at which the heatmap saturates to white, seconds.
pub const HEATMAP_SATURATION: f64 = 18.0;
/// Pixels per cell edge in the PGM heatmap.
pub const HEATMAP_SCALE: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    cell_size: f64,
    width: f64,
    height: f64,
    cols: usize,
    rows: usize,
    /// Row-major, row 0 = south.
    dwell: Vec<f64>,
    visited: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(width: f64, height: f64, cell_size: f64) -> Result<Self> {
        if !(cell_size > 0.0) {
            return Err(Error::validation("grid.cell_size", "must be > 0"));
        }
        if !(width > 0.0 && height > 0.0) {
            return Err(Error::validation("grid", "room dimensions must be > 0"));
        }
        // tolerate float noise so 6.5 / 0.5 stays 13 columns
        let count = |len: f64| ((len / cell_size) - 1e-9).ceil().max(1.0) as usize;
        let (cols, rows) = (count(width), count(height));
        Ok(Self {
            cell_size,
            width,
            height,
            cols,
            rows,
            dwell: vec![0.0; cols * rows],
            visited: vec![false; cols * rows],
        })
    }

    pub fn for_arena(arena: &Arena, cell_size: f64) -> Result<Self> {
        Self::new(arena.width(), arena.height(), cell_size)
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn total_cells(&self) -> usize {
        self.cols * self.rows
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    /// `(col, row)` of the cell containing `p`, with row 0 at the south wall.
    pub fn cell_of(&self, p: Vec2) -> Result<(usize, usize)> {
        let inside = p.is_finite() && p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width && p.y <= self.height;
        if !inside {
            return Err(Error::OutOfBounds { x: p.x, y: p.y });
        }
        let col = ((p.x / self.cell_size).floor() as usize).min(self.cols - 1);
        let row = ((p.y / self.cell_size).floor() as usize).min(self.rows - 1);
        Ok((col, row))
    }

    pub fn dwell(&self, col: usize, row: usize) -> f64 {
        self.dwell[row * self.cols + col]
    }

    pub fn visited(&self, col: usize, row: usize) -> bool {
        self.visited[row * self.cols + col]
    }

    /// Adds `dt` seconds to the cell containing `position`.
    pub fn mark(&mut self, position: Vec2, dt: f64) -> Result<()> {
        let (c, r) = self.cell_of(position)?;
        let i = r * self.cols + c;
        self.dwell[i] += dt;
        self.visited[i] = true;
        Ok(())
    }

    pub fn visited_count(&self) -> usize {
        self.visited.iter().filter(|&&v| v).count()
    }

    /// Visited cells over total cells.
    pub fn coverage(&self) -> f64 {
        self.visited_count() as f64 / self.total_cells() as f64
    }

    pub fn total_dwell(&self) -> f64 {
        self.dwell.iter().sum()
    }

    /// Dwell rows ordered north to south, as rendered.
    pub fn rows_north_first(&self) -> impl Iterator<Item = &[f64]> {
        self.dwell.chunks(self.cols).rev()
    }

    /// Builds a grid from a dwell matrix given north row first.
    pub fn from_dwell_rows(rows: &[Vec<f64>], cell_size: f64) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 {
            return Err(Error::validation("heatmap", "empty dwell matrix"));
        }
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::validation("heatmap", "ragged dwell matrix"));
        }
        let mut grid = Self::new(ncols as f64 * cell_size, nrows as f64 * cell_size, cell_size)?;
        for (k, row) in rows.iter().rev().enumerate() {
            for (c, &d) in row.iter().enumerate() {
                if !(d >= 0.0 && d.is_finite()) {
                    return Err(Error::validation(
                        format!("heatmap[{}][{c}]", nrows - 1 - k),
                        "dwell must be finite and >= 0",
                    ));
                }
                grid.dwell[k * ncols + c] = d;
                grid.visited[k * ncols + c] = d > 0.0;
            }
        }
        Ok(grid)
    }

    /// Cell-wise mean of several grids with identical shape.
    pub fn mean_of(grids: &[&OccupancyGrid]) -> Option<Self> {
        let first = grids.first()?;
        let mut out = Self::new(first.width, first.height, first.cell_size).ok()?;
        let n = grids.len() as f64;
        for g in grids {
            for (i, d) in g.dwell.iter().enumerate() {
                out.dwell[i] += d / n;
                out.visited[i] |= g.visited[i];
            }
        }
        Some(out)
    }
}

/// Dwell matrix as CSV, north row first, 6 decimals.
pub fn heatmap_csv(grid: &OccupancyGrid) -> String {
    let mut out = String::new();
    for row in grid.rows_north_first() {
        let cells: Vec<String> = row.iter().map(|d| format!("{d:.6}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Parses a dwell CSV produced by [`heatmap_csv`] back into north-first rows.
pub fn parse_heatmap_csv(text: &str, origin: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            line.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::parse(format!("{origin}:{}", i + 1), e.to_string()))
                })
                .collect()
        })
        .collect()
}

/// 8-bit intensity for a dwell time; round-half-up of the linear scale.
pub fn gray_level(dwell: f64, saturation: f64) -> u8 {
    if !(dwell > 0.0) {
        return 0;
    }
    let x = dwell.min(saturation) / saturation;
    (x * 255.0 + 0.5).floor() as u8
}

/// Binary PGM (P5, maxval 255), one `scale × scale` block per cell, north up.
pub fn heatmap_pgm(rows_north_first: &[Vec<f64>], saturation: f64, scale: usize) -> Vec<u8> {
    let nrows = rows_north_first.len();
    let ncols = rows_north_first.first().map_or(0, Vec::len);
    let (w, h) = (ncols * scale, nrows * scale);
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h);
    for row in rows_north_first {
        let line: Vec<u8> = row
            .iter()
            .flat_map(|&d| std::iter::repeat_n(gray_level(d, saturation), scale))
            .collect();
        for _ in 0..scale {
            out.extend_from_slice(&line);
        }
    }
    out
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes `<stem>.csv` and `<stem>.pgm` under `dir`.
pub fn export_heatmap(grid: &OccupancyGrid, dir: &Path, stem: &str, saturation: f64) -> Result<()> {
    let rows: Vec<Vec<f64>> = grid.rows_north_first().map(<[f64]>::to_vec).collect();
    write_file(&dir.join(format!("{stem}.csv")), heatmap_csv(grid).as_bytes())?;
    write_file(
        &dir.join(format!("{stem}.pgm")),
        &heatmap_pgm(&rows, saturation, HEATMAP_SCALE),
    )
}

/// Constant-power platform model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    pub p_motors: f64,
    pub p_cf: f64,
    pub p_aideck: f64,
    pub p_multiranger: f64,
    /// Measured platform total. The rounded components sum to 8.017 W.
    pub p_total: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            p_motors: 7.32,
            p_cf: 0.277,
            p_aideck: 0.134,
            p_multiranger: 0.286,
            p_total: 8.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub motors: f64,
    pub cf: f64,
    pub aideck: f64,
    pub multiranger: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn aideck_share(&self) -> f64 {
        if self.total > 0.0 {
            self.aideck / self.total
        } else {
            0.0
        }
    }
}

impl EnergyModel {
    pub fn component_sum(&self) -> f64 {
        self.p_motors + self.p_cf + self.p_aideck + self.p_multiranger
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in [
            ("energy.p_motors", self.p_motors),
            ("energy.p_cf", self.p_cf),
            ("energy.p_aideck", self.p_aideck),
            ("energy.p_multiranger", self.p_multiranger),
            ("energy.p_total", self.p_total),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(k, "must be >= 0"));
            }
        }
        if (self.component_sum() - self.p_total).abs() > 0.005 {
            return Err(Error::validation(
                "energy.p_total",
                format!("differs from component sum {:.4} by more than 0.005 W", self.component_sum()),
            ));
        }
        Ok(())
    }
}

pub fn mission_energy(em: &EnergyModel, duration: f64) -> EnergyBreakdown {
    EnergyBreakdown {
        motors: em.p_motors * duration,
        cf: em.p_cf * duration,
        aideck: em.p_aideck * duration,
        multiranger: em.p_multiranger * duration,
        total: em.p_total * duration,
    }
}

/// Human-readable dump of a grid, mostly for debugging.
pub fn render_ascii(grid: &OccupancyGrid) -> String {
    let mut s = String::new();
    for row in grid.rows_north_first() {
        for &d in row {
            let c = match d {
                d if d <= 0.0 => '.',
                d if d < 2.0 => '-',
                d if d < 6.0 => '+',
                d if d < 12.0 => '*',
                _ => '#',
            };
            s.push(c);
        }
        let _ = writeln!(s);
    }
    s
}
