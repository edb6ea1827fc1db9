//! Plots from task outputs: SVG line charts and plain PGM heatmaps.
//!
//! Output bytes depend only on the CSV contents.

use crate::error::CliError;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#555555"];

#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .filter(|h| !h.is_empty())
            .ok_or_else(|| CliError::Parse(format!("{}: empty file", path.display())))?
            .split(',')
            .map(str::to_string)
            .collect();
        let rows: Vec<Vec<String>> = lines.filter(|l| !l.is_empty()).map(|l| l.split(',').map(str::to_string).collect()).collect();
        if rows.is_empty() {
            return Err(CliError::Parse(format!("{}: no data rows", path.display())));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != header.len()) {
            return Err(CliError::Parse(format!("{}: row {} has the wrong width", path.display(), bad + 2)));
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Parse(format!("missing column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[i].parse().unwrap_or(f64::NAN)).collect())
    }

    pub fn text_column(&self, name: &str) -> Result<Vec<&str>, CliError> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Parse(format!("missing column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    /// Draw markers instead of a polyline.
    pub scatter: bool,
}

impl Series {
    pub fn line(name: &str, x: &[f64], y: &[f64]) -> Self {
        Self { name: name.into(), points: x.iter().copied().zip(y.iter().copied()).collect(), dashed: false, scatter: false }
    }
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let finite = series.iter().flat_map(|s| &s.points).filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| if hi - lo > 0.0 { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);
    let dy = 0.05 * (y1 - y0);
    (x0, x1, y0 - dy, y1 + dy)
}

pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1, y0, y1) = bounds(series);
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(fx),
            HEIGHT - MARGIN + 16.0,
            tick(fx)
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, MARGIN - 4.0, sy(fy) + 4.0, tick(fy));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if ser.scatter {
            for &(x, y) in ser.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{color}"/>"#, sx(x), sy(y));
            }
        } else {
            // NaN gaps split the polyline
            for run in ser.points.split(|(x, y)| !(x.is_finite() && y.is_finite())).filter(|r| r.len() > 1) {
                let pts: Vec<String> = run.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                let dash = if ser.dashed { r#" stroke-dasharray="6,4""# } else { "" };
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
                    pts.join(" ")
                );
            }
        }
        let ly = MARGIN + 14.0 + 14.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{ly:.2}" fill="{color}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN - 6.0,
            escape(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e4) {
        format!("{x:.2e}")
    } else {
        format!("{x:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Plain (ASCII) PGM with rows in time order and columns in space; black is
/// the minimum.
pub fn heatmap(values: &[Vec<f64>]) -> (String, f64, f64) {
    let (lo, hi) = values
        .iter()
        .flatten()
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let width = values.first().map_or(0, Vec::len);
    let mut s = format!("P2\n{} {}\n255\n", width, values.len());
    for row in values {
        let line: Vec<String> = row
            .iter()
            .map(|&x| if x.is_finite() { (((x - lo) / span) * 255.0).round().clamp(0.0, 255.0) as u8 } else { 0 })
            .map(|g| g.to_string())
            .collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    (s, lo, hi)
}

fn write(dir: &Path, name: &str, body: &str, made: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, body)?;
    made.push(path);
    Ok(())
}

fn frames_heatmaps(dir: &Path, csv: &Csv, made: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let t = csv.column("t")?;
    let mut sidecar = String::new();
    for field in ["u", "v"] {
        let vals = csv.column(field)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut last_t = f64::NAN;
        for (ti, x) in t.iter().zip(vals) {
            if *ti != last_t {
                rows.push(Vec::new());
                last_t = *ti;
            }
            rows.last_mut().expect("row started").push(x);
        }
        let (pgm, lo, hi) = heatmap(&rows);
        write(dir, &format!("frames_{field}.pgm"), &pgm, made)?;
        let _ = writeln!(sidecar, "frames_{field}.pgm min={lo:.16e} max={hi:.16e}");
    }
    write(dir, "frames_pgm.txt", &sidecar, made)
}

/// Render every recognised CSV in `dir`. Errors if none is present.
pub fn render_dir(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut made = Vec::new();
    let mut found = false;
    let load = |name: &str| -> Result<Option<Csv>, CliError> {
        let path = dir.join(name);
        if path.is_file() {
            Csv::read(&path).map(Some)
        } else {
            Ok(None)
        }
    };

    if let Some(csv) = load("trajectory.csv")? {
        found = true;
        let t = csv.column("t")?;
        let chart = line_chart(
            "trajectory",
            "t",
            "density",
            &[Series::line("u", &t, &csv.column("u")?), Series::line("v", &t, &csv.column("v")?)],
        );
        write(dir, "trajectory.svg", &chart, &mut made)?;
        let phase = line_chart("phase plane", "u", "v", &[Series::line("orbit", &csv.column("u")?, &csv.column("v")?)]);
        write(dir, "phase.svg", &phase, &mut made)?;
    }
    if let Some(csv) = load("branch.csv")? {
        found = true;
        let x = csv.column("value")?;
        let u = csv.column("u")?;
        let stab = csv.text_column("stability")?;
        let pick = |want: bool| -> Vec<(f64, f64)> {
            x.iter().zip(&u).zip(&stab).filter(|(_, s)| (**s == "stable") == want).map(|((x, u), _)| (*x, *u)).collect()
        };
        let series = [
            Series { name: "stable".into(), points: pick(true), dashed: false, scatter: true },
            Series { name: "unstable".into(), points: pick(false), dashed: false, scatter: true },
        ];
        write(dir, "branch.svg", &line_chart("equilibrium branches", "control", "u", &series), &mut made)?;
    }
    if let Some(csv) = load("dispersion.csv")? {
        found = true;
        let k = csv.column("k")?;
        let series = [Series::line("Re lambda", &k, &csv.column("re_lambda")?), Series::line("H", &k, &csv.column("H")?)];
        write(dir, "dispersion.svg", &line_chart("dispersion relation", "k", "", &series), &mut made)?;
    }
    if let Some(csv) = load("amplitude.csv")? {
        found = true;
        let c = csv.column("c")?;
        // both signs of the symmetric amplitude, separated by a NaN gap
        let with_mirror = |name: &str, y: Vec<f64>, dashed: bool| {
            let mut s = Series::line(name, &c, &y);
            let mirrored: Vec<(f64, f64)> = s.points.iter().map(|&(x, y)| (x, -y)).collect();
            s.points.push((f64::NAN, f64::NAN));
            s.points.extend(mirrored);
            s.dashed = dashed;
            s
        };
        let series = [with_mirror("stable", csv.column("B_stable")?, false), with_mirror("unstable", csv.column("B_unstable")?, true)];
        write(dir, "amplitude.svg", &line_chart("pattern amplitude", "c", "B", &series), &mut made)?;
    }
    if let Some(csv) = load("series.csv")? {
        found = true;
        let t = csv.column("t")?;
        let series = [Series::line("<u>", &t, &csv.column("mean_u")?), Series::line("<v>", &t, &csv.column("mean_v")?)];
        write(dir, "series.svg", &line_chart("spatial averages", "t", "density", &series), &mut made)?;
    }
    if let Some(csv) = load("frames.csv")? {
        found = true;
        frames_heatmaps(dir, &csv, &mut made)?;
    }
    if !found {
        return Err(CliError::Parse(format!("no renderable CSV in {}", dir.display())));
    }
    Ok(made)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_scales_to_full_range() {
        let (pgm, lo, hi) = heatmap(&[vec![0.0, 1.0], vec![0.5, 1.0]]);
        assert_eq!((lo, hi), (0.0, 1.0));
        assert_eq!(pgm, "P2\n2 2\n255\n0 255\n128 255\n");
    }

    #[test]
    fn chart_is_deterministic_and_splits_gaps() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0.0, 1.0, f64::NAN, 2.0];
        let a = line_chart("t", "x", "y", &[Series::line("s", &x, &y)]);
        assert_eq!(a, line_chart("t", "x", "y", &[Series::line("s", &x, &y)]));
        assert_eq!(a.matches("<polyline").count(), 1);
    }
}
