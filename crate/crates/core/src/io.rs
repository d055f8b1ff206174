//! CSV output with a `#`-prefixed metadata header.

use std::fmt::Display;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::Result;

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const UNIT_CONVENTION: &str = "lengths in l = (q^2/(4 pi eps0 m nu_x^2))^(1/3); energies in m nu_x^2 l^2; \
times in 1/nu_x; angular frequencies in nu_x; quantum coordinates in sigma l with sigma = sqrt(hbar/(m nu_x))/l";

pub const PHASE_CONVENTION: &str = "I(t) = <phi(0)|phi(t)>; energy zero at the ground level (classical minimum \
plus zero-point energy) of the all-ground crystal; excited-crystal classical offset and zero-point energy enter \
the phase; P2 measured after the gate |e> -> -i|e>";

/// Hex SHA-256 digest of a configuration text.
pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Ordered key/value lines written before the column header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    /// Header with tool version, command, configuration hash and the unit
    /// and phase conventions.
    pub fn new(command: &str, config_hash: &str) -> Self {
        Self::default()
            .with("tool", format!("{TOOL_NAME} {TOOL_VERSION}"))
            .with("command", command)
            .with("config_sha256", config_hash)
            .with("units", UNIT_CONVENTION)
            .with("phase_convention", PHASE_CONVENTION)
    }

    pub fn with(mut self, key: &str, value: impl Display) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_string(), value.to_string().replace('\n', " ")));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn lines(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
    }
}

/// Shortest round-trip decimal representation, independent of locale.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Writes a CSV file: metadata lines, the column names, then one line per
/// row.
pub fn write_csv<R, C>(path: &Path, meta: &Metadata, columns: &[&str], rows: R) -> Result<()>
where
    R: IntoIterator<Item = Vec<C>>,
    C: Display,
{
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(meta.lines().as_bytes())?;
    writeln!(w, "{}", columns.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a text artifact such as an SVG, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Minimal SVG line chart of `(label, x, y)` series sharing both axes.
pub fn line_plot_svg(x_label: &str, y_label: &str, series: &[(String, Vec<f64>, Vec<f64>)]) -> String {
    let (w, h, l, r, t, b) = (720.0, 420.0, 70.0, 150.0, 20.0, 50.0);
    let finite = |v: &Vec<f64>| v.iter().copied().filter(|x| x.is_finite()).collect::<Vec<_>>();
    let xs: Vec<f64> = series.iter().flat_map(|s| finite(&s.1)).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| finite(&s.2)).collect();
    let lo = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (x0, mut x1) = (lo(&xs), hi(&xs));
    let (y0, mut y1) = (lo(&ys).min(0.0), hi(&ys));
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let pw = w - l - r;
    let ph = h - t - b;
    let sx = |x: f64| l + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| t + (y1 - y) / (y1 - y0) * ph;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    for (n, (label, x, y)) in series.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let pts: Vec<String> = x
            .iter()
            .zip(y)
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(a, b)| format!("{:.2},{:.2}", sx(*a), sy(*b)))
            .collect();
        s += &format!("<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1\"/>\n", pts.join(" "));
        let ly = t + 10.0 + 20.0 * n as f64;
        s += &format!(
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\">{label}</text>\n",
            w - r + 10.0,
            w - r + 30.0,
            w - r + 36.0,
            ly + 4.0
        );
    }
    s += &format!("<rect x=\"{l}\" y=\"{t}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>\n");
    for k in 0..=5 {
        let x = x0 + (x1 - x0) * k as f64 / 5.0;
        let y = y0 + (y1 - y0) * k as f64 / 5.0;
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            sx(x),
            t + ph + 18.0,
            tick(x)
        );
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            l - 6.0,
            sy(y) + 4.0,
            tick(y)
        );
    }
    s += &format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{x_label}</text>\n",
        l + pw / 2.0,
        h - 10.0
    );
    s += &format!(
        "<text x=\"18\" y=\"{0:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.1})\">{y_label}</text>\n",
        t + ph / 2.0
    );
    s + "</svg>\n"
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Parsed CSV: metadata lines and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub metadata: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Reads a numeric CSV written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = fs::read_to_string(path)?;
    let mut metadata = Vec::new();
    let mut columns = None;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if let Some(m) = line.strip_prefix('#') {
            metadata.push(m.trim().to_string());
        } else if line.trim().is_empty() {
            continue;
        } else if columns.is_none() {
            columns = Some(line.split(',').map(|c| c.trim().to_string()).collect::<Vec<_>>());
        } else {
            let row = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| crate::error::Error::Invalid(format!("{}:{}: {e}", path.display(), n + 1)))?;
            rows.push(row);
        }
    }
    let columns = columns.ok_or_else(|| crate::error::Error::Invalid(format!("{}: no header", path.display())))?;
    Ok(CsvTable { metadata, columns, rows })
}
