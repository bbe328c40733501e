//! Outlier map: each training sample plotted at `(f(x), outlyingness)`.
//!
//! Samples labeled +1 are circles, -1 are crosses, and a solid vertical line
//! marks `f = 0`. Infinite outlyingness is drawn as a triangle in the top
//! margin, above the finite data.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pipeline::FitResult;

pub const CSV_HEADER: [&str; 6] = ["id", "label", "f", "outlyingness", "trimmed", "misclassified"];

#[derive(Clone, Debug, PartialEq)]
pub struct OutlierMapPoint {
    pub id: String,
    pub label: i8,
    pub f: f64,
    /// `+inf` allowed.
    pub r: f64,
    pub trimmed: bool,
    pub misclassified: bool,
}

/// `f = 0` predicts +1, so only a -1 sample can be misclassified there.
pub fn is_misclassified(label: i8, f: f64) -> bool {
    crate::svm::sign_label(f) != label
}

pub fn build_map(fit: &FitResult) -> Vec<OutlierMapPoint> {
    (0..fit.len())
        .map(|i| OutlierMapPoint {
            id: fit.ids[i].clone(),
            label: fit.labels[i],
            f: fit.decision[i],
            r: fit.plan.outlyingness[i],
            trimmed: fit.plan.trimmed[i],
            misclassified: is_misclassified(fit.labels[i], fit.decision[i]),
        })
        .collect()
}

pub fn write_csv<W: Write>(points: &[OutlierMapPoint], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Parse {
        line: 0,
        message: e.to_string(),
    };
    writer.write_record(CSV_HEADER).map_err(csv_err)?;
    for p in points {
        writer
            .write_record([
                p.id.clone(),
                p.label.to_string(),
                p.f.to_string(),
                p.r.to_string(),
                p.trimmed.to_string(),
                p.misclassified.to_string(),
            ])
            .map_err(csv_err)?;
    }
    writer.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<OutlierMapPoint>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {}", CSV_HEADER.join(",")),
        });
    }
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let flag = |s: &str| match s {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(Error::Parse {
                line,
                message: format!("bad flag {other:?}"),
            }),
        };
        let label = match &record[1] {
            "-1" => -1,
            "1" => 1,
            other => {
                return Err(Error::Label {
                    line,
                    message: format!("{other:?} is not -1 or 1"),
                })
            }
        };
        points.push(OutlierMapPoint {
            id: record[0].to_string(),
            label,
            f: crate::svm::parse_f64(&record[2], line)?,
            r: crate::svm::parse_f64(&record[3], line)?,
            trimmed: flag(&record[4])?,
            misclassified: flag(&record[5])?,
        });
    }
    Ok(points)
}

pub fn emit_csv(points: &[OutlierMapPoint], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(points, std::io::BufWriter::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapStyle {
    pub width: f64,
    pub height: f64,
    /// Label this many largest-outlyingness points, plus every misclassified one.
    pub label_top: usize,
    /// Optional horizontal cutoff, drawn dashed.
    pub threshold: Option<f64>,
}

impl Default for MapStyle {
    fn default() -> Self {
        Self {
            width: 640.0,
            height: 480.0,
            label_top: 5,
            threshold: None,
        }
    }
}

const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const MARKER: f64 = 4.0;
const POS_COLOR: &str = "#1f5fa8";
const NEG_COLOR: &str = "#b2182b";

struct Viewport {
    x_half: f64,
    y_max: f64,
    width: f64,
    height: f64,
}

impl Viewport {
    fn new(points: &[OutlierMapPoint], style: &MapStyle) -> Self {
        let max_f = points.iter().map(|p| p.f.abs()).filter(|v| v.is_finite()).fold(0.0, f64::max);
        let max_r = points.iter().map(|p| p.r).filter(|v| v.is_finite()).fold(0.0, f64::max);
        let max_r = style.threshold.filter(|t| t.is_finite()).map_or(max_r, |t| max_r.max(t));
        Self {
            x_half: if max_f > 0.0 { 1.05 * max_f } else { 1.0 },
            y_max: if max_r > 0.0 { 1.05 * max_r } else { 1.0 },
            width: style.width,
            height: style.height,
        }
    }

    fn x(&self, f: f64) -> f64 {
        let inner = self.width - LEFT - RIGHT;
        LEFT + (f + self.x_half) / (2.0 * self.x_half) * inner
    }

    fn y(&self, r: f64) -> f64 {
        if r.is_infinite() {
            return TOP / 2.0;
        }
        let inner = self.height - TOP - BOTTOM;
        self.height - BOTTOM - r / self.y_max * inner
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Indices of points that get an id label.
fn labeled_points(points: &[OutlierMapPoint], top: usize) -> Vec<bool> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[b].r.total_cmp(&points[a].r).then(a.cmp(&b)));
    let mut labeled: Vec<bool> = points.iter().map(|p| p.misclassified).collect();
    for &i in order.iter().take(top) {
        labeled[i] = true;
    }
    labeled
}

pub fn render_svg(points: &[OutlierMapPoint], style: &MapStyle) -> Result<String> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let vp = Viewport::new(points, style);
    let (w, h) = (style.width, style.height);
    let bottom = h - BOTTOM;
    let right = w - RIGHT;
    let mut s = String::new();
    let out = &mut s;

    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#).unwrap();

    // Frame and ticks.
    writeln!(
        out,
        r#"<rect class="frame" x="{LEFT}" y="{TOP}" width="{:.3}" height="{:.3}" fill="none" stroke="black"/>"#,
        right - LEFT,
        bottom - TOP
    )
    .unwrap();
    for i in -2i32..=2 {
        let v = vp.x_half * i as f64 / 2.0;
        let x = vp.x(v);
        writeln!(out, r#"<line x1="{x:.3}" y1="{bottom:.3}" x2="{x:.3}" y2="{:.3}" stroke="black"/>"#, bottom + 5.0).unwrap();
        writeln!(out, r#"<text x="{x:.3}" y="{:.3}" text-anchor="middle">{}</text>"#, bottom + 18.0, tick_label(v)).unwrap();
    }
    for i in 0..=4 {
        let v = vp.y_max * i as f64 / 4.0;
        let y = vp.y(v);
        writeln!(out, r#"<line x1="{:.3}" y1="{y:.3}" x2="{LEFT}" y2="{y:.3}" stroke="black"/>"#, LEFT - 5.0).unwrap();
        writeln!(out, r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, tick_label(v)).unwrap();
    }
    writeln!(
        out,
        r#"<text class="axis-label" x="{:.3}" y="{:.3}" text-anchor="middle" font-size="13">f(x)</text>"#,
        (LEFT + right) / 2.0,
        h - 12.0
    )
    .unwrap();
    writeln!(
        out,
        r#"<text class="axis-label" x="{:.3}" y="{:.3}" text-anchor="middle" font-size="13" transform="rotate(-90 {:.3} {:.3})">Stahel–Donoho outlyingness</text>"#,
        18.0,
        (TOP + bottom) / 2.0,
        18.0,
        (TOP + bottom) / 2.0
    )
    .unwrap();

    let zero = vp.x(0.0);
    writeln!(
        out,
        r#"<line class="decision-boundary" x1="{zero:.3}" y1="{TOP}" x2="{zero:.3}" y2="{bottom:.3}" stroke="black" stroke-width="1.5"/>"#
    )
    .unwrap();
    if let Some(t) = style.threshold.filter(|t| t.is_finite()) {
        let y = vp.y(t);
        writeln!(
            out,
            r#"<line class="threshold" x1="{LEFT}" y1="{y:.3}" x2="{right:.3}" y2="{y:.3}" stroke="gray" stroke-dasharray="6,4"/>"#
        )
        .unwrap();
    }

    let labeled = labeled_points(points, style.label_top);
    for (p, &with_label) in points.iter().zip(&labeled) {
        let x = vp.x(p.f);
        let y = vp.y(p.r);
        let (group, color) = if p.label > 0 { ("pos", POS_COLOR) } else { ("neg", NEG_COLOR) };
        let id = escape(&p.id);
        if p.r.is_infinite() {
            writeln!(
                out,
                r#"<path class="point {group} inf" data-id="{id}" d="M{x:.3},{:.3} L{:.3},{:.3} L{:.3},{:.3} Z" fill="{color}" stroke="{color}"/>"#,
                y - 1.5 * MARKER,
                x - 1.3 * MARKER,
                y + MARKER,
                x + 1.3 * MARKER,
                y + MARKER
            )
            .unwrap();
        } else if p.label > 0 {
            writeln!(
                out,
                r#"<circle class="point {group}" data-id="{id}" cx="{x:.3}" cy="{y:.3}" r="{MARKER}" fill="none" stroke="{color}"/>"#
            )
            .unwrap();
        } else {
            writeln!(
                out,
                r#"<path class="point {group}" data-id="{id}" d="M{:.3},{:.3} L{:.3},{:.3} M{:.3},{:.3} L{:.3},{:.3}" stroke="{color}" stroke-width="1.3"/>"#,
                x - MARKER,
                y - MARKER,
                x + MARKER,
                y + MARKER,
                x - MARKER,
                y + MARKER,
                x + MARKER,
                y - MARKER
            )
            .unwrap();
        }
        if with_label {
            writeln!(out, r#"<text class="point-label" x="{:.3}" y="{:.3}">{id}</text>"#, x + 5.0, y - 5.0).unwrap();
        }
    }
    writeln!(out, "</svg>").unwrap();
    Ok(s)
}

pub fn emit_svg(points: &[OutlierMapPoint], style: &MapStyle, path: &Path) -> Result<()> {
    let svg = render_svg(points, style)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
