use std::fmt::Write;

use super::{CurveSource, StabilityDiagram};
use crate::crystal::StructureKind;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

fn color(kind: StructureKind) -> [u8; 3] {
    match kind {
        StructureKind::LinX | StructureKind::LinXStar => [76, 114, 176],
        StructureKind::ZigzagX => [221, 132, 82],
        StructureKind::ZigzagY => [85, 168, 104],
        StructureKind::TriaStar => [196, 78, 82],
        StructureKind::Other => [129, 114, 179],
    }
}

fn blend(kinds: &[StructureKind]) -> String {
    if kinds.is_empty() {
        return "#ffffff".into();
    }
    let mut acc = [0u32; 3];
    for k in kinds {
        for (a, c) in acc.iter_mut().zip(color(*k)) {
            *a += c as u32;
        }
    }
    let n = kinds.len() as u32;
    format!("#{:02x}{:02x}{:02x}", acc[0] / n, acc[1] / n, acc[2] / n)
}

/// Renders the diagram: cells colored by their stable structures (mixed
/// colors mark overlaps), analytic boundaries as lines and numeric
/// boundary points as dots. For scans with an excited outer ion only the
/// starred structures are colored; remaining cells stay white.
pub fn render_svg(d: &StabilityDiagram) -> String {
    let starred = d.settings.spins.single_excited().is_some_and(|i| i != 1);
    let shown = |k: StructureKind| !starred || matches!(k, StructureKind::LinXStar | StructureKind::TriaStar);
    let (a0, a1) = d.settings.alpha_range;
    let (d0, d1) = d.settings.delta_alpha_range;
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |a: f64| LEFT + (a - a0) / (a1 - a0) * pw;
    let sy = |v: f64| TOP + (d1 - v) / (d1 - d0) * ph;
    let (ha, hd) = d.cell_size();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let nd = d.delta_alphas.len();
    for (i, &alpha) in d.alphas.iter().enumerate() {
        let mut j = 0;
        while j < nd {
            let fill = cell_fill(d, i, j, &shown);
            let mut k = j + 1;
            while k < nd && cell_fill(d, i, k, &shown) == fill {
                k += 1;
            }
            if fill != "#ffffff" {
                let x = sx(alpha - 0.5 * ha);
                let y = sy(d.delta_alphas[k - 1] + 0.5 * hd);
                let h = sy(d.delta_alphas[j] - 0.5 * hd) - y;
                let w = sx(alpha + 0.5 * ha) - x;
                let _ = writeln!(s, r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{h:.2}" fill="{fill}"/>"#, w + 0.3);
            }
            j = k;
        }
    }
    for curve in &d.curves {
        match curve.source {
            CurveSource::Numeric => {
                for p in &curve.points {
                    let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="0.8" fill="#333333"/>"##, sx(p[0]), sy(p[1]));
                }
            }
            CurveSource::Analytic => {
                let step = 3.0 * (a1 - a0) / curve.points.len().max(1) as f64;
                let mut segment: Vec<[f64; 2]> = Vec::new();
                let flush = |seg: &mut Vec<[f64; 2]>, s: &mut String| {
                    if seg.len() > 1 {
                        let pts: Vec<String> = seg.iter().map(|p| format!("{:.2},{:.2}", sx(p[0]), sy(p[1]))).collect();
                        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#, pts.join(" "));
                    }
                    seg.clear();
                };
                for p in &curve.points {
                    let gap = segment.last().is_some_and(|q| p[0] - q[0] > step);
                    let pole = segment.last().is_some_and(|q| d.excluded_alphas.iter().any(|&a| q[0] < a && p[0] > a));
                    if gap || pole {
                        flush(&mut segment, &mut s);
                    }
                    segment.push(*p);
                }
                flush(&mut segment, &mut s);
            }
        }
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let a = a0 + (a1 - a0) * k as f64 / 5.0;
        let v = d0 + (d1 - d0) * k as f64 / 5.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{a:.2}</text>"#, sx(a), TOP + ph + 18.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#, LEFT - 6.0, sy(v) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">α</text>"#, LEFT + pw / 2.0, HEIGHT - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">δα</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    let legend: Vec<StructureKind> = StructureKind::ALL.into_iter().filter(|k| shown(*k) && d.count(*k) > 0).collect();
    for (n, k) in legend.iter().enumerate() {
        let y = TOP + 10.0 + 22.0 * n as f64;
        let _ = writeln!(s, r#"<rect x="{:.1}" y="{y:.1}" width="14" height="14" fill="{}"/>"#, WIDTH - RIGHT + 15.0, blend(&[*k]));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, WIDTH - RIGHT + 35.0, y + 11.0, k.label());
    }
    s.push_str("</svg>\n");
    s
}

fn cell_fill(d: &StabilityDiagram, i: usize, j: usize, shown: &impl Fn(StructureKind) -> bool) -> String {
    let c = d.cell(i, j);
    if c.unknown {
        return "#bbbbbb".into();
    }
    let kinds: Vec<StructureKind> = c.kinds().into_iter().filter(|k| shown(*k)).collect();
    blend(&kinds)
}
