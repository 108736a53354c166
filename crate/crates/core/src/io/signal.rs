//! Signal files: CSV (one value per line in 1D, comma-separated rows in 2D)
//! and PGM (P2/P5, mapped affinely from `[0, maxval]` to `[0, 1]`).
//!
//! 2D rows follow the first axis, so row `i`, column `j` is node `i·n + j`.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, GridSignal};

use super::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalFormat {
    Csv,
    Pgm,
}

impl SignalFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
            Some(e) if e == "pgm" => SignalFormat::Pgm,
            _ => SignalFormat::Csv,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            SignalFormat::Csv => "csv",
            SignalFormat::Pgm => "pgm",
        }
    }
}

/// Values as stored in a file, before they are attached to a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSignal {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl RawSignal {
    /// 1D when one of the two extents is 1.
    pub fn is_line(&self) -> bool {
        self.rows == 1 || self.cols == 1
    }

    /// Attaches the values to `grid`, checking the layout.
    pub fn on_grid(self, grid: &Arc<Grid>, origin: &str) -> Result<GridSignal> {
        let n = grid.points_per_axis();
        let ok = match grid.dim() {
            1 => self.is_line() && self.values.len() == n,
            _ => self.rows == n && self.cols == n,
        };
        if !ok {
            return Err(Error::Format {
                path: origin.into(),
                msg: format!(
                    "{}×{} values do not fit a {}D grid with {} points per axis",
                    self.rows,
                    self.cols,
                    grid.dim(),
                    n
                ),
            });
        }
        GridSignal::new(grid, self.values)
    }

    /// Default grid: `(0, 1)` or `(0, 1)²` sized from the file.
    pub fn default_grid(&self, origin: &str) -> Result<Arc<Grid>> {
        if self.is_line() {
            Grid::new(Domain::Interval { a: 0.0, b: 1.0 }, self.values.len())
        } else if self.rows == self.cols {
            Grid::new(Domain::Rect { a1: 0.0, b1: 1.0, a2: 0.0, b2: 1.0 }, self.rows)
        } else {
            Err(Error::Format {
                path: origin.into(),
                msg: format!("2D signals must be square, got {}×{}", self.rows, self.cols),
            })
        }
    }
}

fn format_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        msg: msg.into(),
    }
}

pub fn read_raw(path: &Path) -> Result<RawSignal> {
    let bytes = std::fs::read(path)?;
    match SignalFormat::from_path(path) {
        SignalFormat::Csv => parse_csv(&bytes, path),
        SignalFormat::Pgm => parse_pgm(&bytes, path),
    }
}

/// Reads a signal; without a grid the default `(0, 1)`/`(0, 1)²` grid is used.
pub fn read_signal(path: &Path, grid: Option<&Arc<Grid>>) -> Result<GridSignal> {
    let raw = read_raw(path)?;
    let origin = path.display().to_string();
    let grid = match grid {
        Some(g) => g.clone(),
        None => raw.default_grid(&origin)?,
    };
    raw.on_grid(&grid, &origin)
}

pub fn write_signal(u: &GridSignal, path: &Path) -> Result<()> {
    let bytes = match SignalFormat::from_path(path) {
        SignalFormat::Csv => csv_bytes(u)?,
        SignalFormat::Pgm => pgm_bytes(u)?,
    };
    write_atomic(path, &bytes)
}

pub fn parse_csv(bytes: &[u8], path: &Path) -> Result<RawSignal> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(bytes);
    let mut values = Vec::new();
    let mut rows = 0;
    let mut cols = 0;
    for rec in reader.records() {
        let rec = rec.map_err(|e| format_err(path, e.to_string()))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        cols = rec.len();
        for field in rec.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| format_err(path, format!("not a number: `{field}` on row {}", rows + 1)))?;
            if !v.is_finite() {
                return Err(format_err(path, format!("non-finite value on row {}", rows + 1)));
            }
            values.push(v);
        }
        rows += 1;
    }
    if values.is_empty() {
        return Err(format_err(path, "no values"));
    }
    Ok(RawSignal { rows, cols, values })
}

/// Whitespace-separated header tokens, skipping `#` comments.
struct PgmHeader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmHeader<'a> {
    fn token(&mut self) -> Option<&'a str> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.bytes[start..self.pos]).ok())?
    }

    fn number(&mut self, what: &str, path: &Path) -> Result<usize> {
        self.token()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format_err(path, format!("malformed header: missing {what}")))
    }
}

pub fn parse_pgm(bytes: &[u8], path: &Path) -> Result<RawSignal> {
    let mut h = PgmHeader { bytes, pos: 0 };
    let magic = h.token().ok_or_else(|| format_err(path, "empty file"))?;
    let binary = match magic {
        "P2" => false,
        "P5" => true,
        m => return Err(format_err(path, format!("malformed header: magic `{m}`, expected P2 or P5"))),
    };
    let width = h.number("width", path)?;
    let height = h.number("height", path)?;
    let maxval = h.number("maxval", path)?;
    if width == 0 || height == 0 {
        return Err(format_err(path, "malformed header: zero extent"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format_err(path, format!("malformed header: maxval {maxval} outside 1..=65535")));
    }
    let count = width * height;
    let scale = maxval as f64;
    let mut values = Vec::with_capacity(count);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        let start = h.pos + 1;
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        let raster = bytes
            .get(start..start + need)
            .ok_or_else(|| format_err(path, format!("raster too short: need {need} bytes")))?;
        for k in 0..count {
            let v = if wide {
                u16::from_be_bytes([raster[2 * k], raster[2 * k + 1]]) as usize
            } else {
                raster[k] as usize
            };
            if v > maxval {
                return Err(format_err(path, format!("pixel {k} exceeds maxval")));
            }
            values.push(v as f64 / scale);
        }
    } else {
        for k in 0..count {
            let v = h.number("pixel", path).map_err(|_| format_err(path, format!("pixel {k} missing or malformed")))?;
            if v > maxval {
                return Err(format_err(path, format!("pixel {k} exceeds maxval")));
            }
            values.push(v as f64 / scale);
        }
        if h.token().is_some() {
            return Err(format_err(path, "trailing data after raster"));
        }
    }
    Ok(RawSignal {
        rows: height,
        cols: width,
        values,
    })
}

/// Nine significant digits per value.
pub fn csv_bytes(u: &GridSignal) -> Result<Vec<u8>> {
    let n = u.grid().points_per_axis();
    let cols = if u.grid().dim() == 1 { 1 } else { n };
    let mut out = Vec::with_capacity(u.len() * 16);
    for row in u.values().chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.8e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(out)
}

/// P2 with maxval 65535. Values are clamped to `[0, 1]` before quantization.
pub fn pgm_bytes(u: &GridSignal) -> Result<Vec<u8>> {
    let n = u.grid().points_per_axis();
    let (w, h) = if u.grid().dim() == 1 { (n, 1) } else { (n, n) };
    let mut out = Vec::with_capacity(u.len() * 6 + 32);
    writeln!(out, "P2\n{w} {h}\n65535")?;
    for row in u.values().chunks(w) {
        let line: Vec<String> = row
            .iter()
            .map(|v| ((v.clamp(0.0, 1.0) * 65535.0).round() as u32).to_string())
            .collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn p() -> &'static Path {
        Path::new("mem")
    }

    #[test]
    fn csv_examples() {
        let g = Grid::interval(0.0, 1.0, 4).unwrap();
        let col = parse_csv(b"0\n1\n2\n3\n", p()).unwrap().on_grid(&g, "mem").unwrap();
        assert_eq!(col.values(), &[0.0, 1.0, 2.0, 3.0]);
        let row = parse_csv(b"0,1,2,3\n", p()).unwrap().on_grid(&g, "mem").unwrap();
        assert_eq!(row.values(), &[0.0, 1.0, 2.0, 3.0]);
        let g5 = Grid::interval(0.0, 1.0, 5).unwrap();
        assert!(parse_csv(b"0\n1\n2\n3\n", p()).unwrap().on_grid(&g5, "mem").is_err());
        assert!(parse_csv(b"0,1\n2\n", p()).is_err());
        assert!(parse_csv(b"0\nx\n", p()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = Grid::square(0.0, 1.0, 17).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let u = GridSignal::new(&g, (0..g.len()).map(|_| rng.gen_range(-50.0..50.0)).collect()).unwrap();
        let raw = parse_csv(&csv_bytes(&u).unwrap(), p()).unwrap();
        assert_eq!((raw.rows, raw.cols), (17, 17));
        let back = raw.on_grid(&g, "mem").unwrap();
        let gap = u.values().iter().zip(back.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap <= 1e-6, "{gap}");
    }

    #[test]
    fn pgm_examples() {
        let raw = parse_pgm(b"P2\n# comment\n2 2\n255\n0 255\n128 64\n", p()).unwrap();
        assert_eq!(raw.values, vec![0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
        assert!((raw.values[2] - 0.50196).abs() < 1e-5);
        let bin = parse_pgm(b"P5 2 1 65535\n\x00\x01\xff\xff", p()).unwrap();
        assert_eq!(bin.values, vec![1.0 / 65535.0, 1.0]);
        assert!(parse_pgm(b"P3\n2 2\n255\n", p()).is_err());
        assert!(parse_pgm(b"P2\n2 2\n255\n0 1 2\n", p()).is_err());
        assert!(parse_pgm(b"P2\n1 1\n70000\n0\n", p()).is_err());
        assert!(parse_pgm(b"P2\n1 1\n10\n11\n", p()).is_err());
    }

    #[test]
    fn pgm_round_trip() {
        let g = Grid::square(0.0, 1.0, 9).unwrap();
        let u = GridSignal::from_fn(&g, |x| 0.5 + 0.4 * (5.0 * x[0] - 3.0 * x[1]).sin());
        let back = parse_pgm(&pgm_bytes(&u).unwrap(), p()).unwrap().on_grid(&g, "mem").unwrap();
        let gap = u.values().iter().zip(back.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap <= 1.0 / 65535.0);
    }
}
