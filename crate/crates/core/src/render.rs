//! Deterministic rendering of plot specifications to SVG 1.1 or ASCII text.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::interpret::{LayoutNode, PlotData, PlotSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Svg,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Svg => "svg",
            Format::Text => "txt",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svg" => Ok(Format::Svg),
            "text" | "txt" => Ok(Format::Text),
            other => Err(Error::Render(format!("unsupported format {other:?}"))),
        }
    }
}

pub const TEXT_WIDTH: usize = 80;
const TEXT_HEIGHT: usize = 20;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;

pub fn render(spec: &PlotSpec, format: Format) -> Result<Vec<u8>> {
    spec.validate()?;
    let out = match (format, &spec.data) {
        (Format::Svg, PlotData::Curve { .. }) => svg_curve(spec),
        (Format::Svg, PlotData::Heatmap { .. }) => svg_heatmap(spec),
        (Format::Svg, PlotData::TreeDiagram { nodes, edges }) => svg_tree(spec, nodes, edges),
        (Format::Text, PlotData::Curve { x, y, .. }) => text_curve(spec, x, y),
        (Format::Text, PlotData::Heatmap { x, y, z }) => text_heatmap(spec, x, y, z),
        (Format::Text, PlotData::TreeDiagram { nodes, edges }) => text_tree(spec, nodes, edges),
    };
    Ok(out.into_bytes())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, v: f64) -> f64 {
        MARGIN + (v - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - (v - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn svg_open(spec: &PlotSpec) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>",
        WIDTH / 2.0,
        escape(&spec.title)
    );
    s
}

fn svg_axes(s: &mut String, spec: &PlotSpec, frame: &Frame) {
    let (x0, x1) = (MARGIN, WIDTH - MARGIN);
    let (y0, y1) = (HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        s,
        "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\"><line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\"/><line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\"/></g>"
    );
    let font = "font-family=\"sans-serif\" font-size=\"12\"";
    let _ = writeln!(
        s,
        "<text x=\"{x0}\" y=\"{:.2}\" text-anchor=\"middle\" {font}>{}</text>",
        y0 + 16.0,
        fmt_tick(frame.x.0)
    );
    let _ = writeln!(
        s,
        "<text x=\"{x1}\" y=\"{:.2}\" text-anchor=\"middle\" {font}>{}</text>",
        y0 + 16.0,
        fmt_tick(frame.x.1)
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{y0}\" text-anchor=\"end\" {font}>{}</text>",
        x0 - 6.0,
        fmt_tick(frame.y.0)
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{y1}\" text-anchor=\"end\" {font}>{}</text>",
        x0 - 6.0,
        fmt_tick(frame.y.1)
    );
    let _ = writeln!(
        s,
        "<text class=\"xlabel\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" {font}>{}</text>",
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        s,
        "<text class=\"ylabel\" x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\" {font}>{}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&spec.y_label)
    );
}

fn fmt_tick(v: f64) -> String {
    format!("{v:.4}")
}

fn svg_curve(spec: &PlotSpec) -> String {
    let PlotData::Curve {
        x,
        y,
        extrapolation,
    } = &spec.data
    else {
        unreachable!()
    };
    let xs = x
        .iter()
        .copied()
        .chain(extrapolation.iter().flat_map(|s| [s.x0, s.x1]));
    let ys = y
        .iter()
        .copied()
        .chain(extrapolation.iter().flat_map(|s| [s.y0, s.y1]));
    let frame = Frame {
        x: bounds(xs),
        y: bounds(ys),
    };
    let mut s = svg_open(spec);
    svg_axes(&mut s, spec, &frame);
    let points: Vec<String> = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| format!("{:.2},{:.2}", frame.px(a), frame.py(b)))
        .collect();
    let _ = writeln!(
        s,
        "<polyline class=\"series\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"{}\"/>",
        points.join(" ")
    );
    for seg in extrapolation {
        let _ = writeln!(
            s,
            "<line class=\"extrapolation\" stroke=\"steelblue\" stroke-width=\"2\" stroke-dasharray=\"6,4\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\"/>",
            frame.px(seg.x0),
            frame.py(seg.y0),
            frame.px(seg.x1),
            frame.py(seg.y1)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn svg_heatmap(spec: &PlotSpec) -> String {
    let PlotData::Heatmap { x, y, z } = &spec.data else {
        unreachable!()
    };
    let frame = Frame {
        x: bounds(x.iter().copied()),
        y: bounds(y.iter().copied()),
    };
    let (zlo, zhi) = bounds(z.iter().flatten().copied());
    let mut s = svg_open(spec);
    let cell_w = (WIDTH - 2.0 * MARGIN) / x.len() as f64;
    let cell_h = (HEIGHT - 2.0 * MARGIN) / y.len() as f64;
    s.push_str("<g class=\"cells\">\n");
    for (r, row) in z.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let t = (v - zlo) / (zhi - zlo);
            let shade = (255.0 * (1.0 - t)).round() as u8;
            let _ = writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({shade},{shade},255)\"><title>{}</title></rect>",
                MARGIN + c as f64 * cell_w,
                HEIGHT - MARGIN - (r + 1) as f64 * cell_h,
                cell_w,
                cell_h,
                fmt_tick(v)
            );
        }
    }
    s.push_str("</g>\n");
    svg_axes(&mut s, spec, &frame);
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"44\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">range {} .. {}</text>",
        WIDTH / 2.0,
        fmt_tick(zlo),
        fmt_tick(zhi)
    );
    s.push_str("</svg>\n");
    s
}

fn svg_tree(spec: &PlotSpec, nodes: &[LayoutNode], edges: &[(usize, usize)]) -> String {
    let slots = nodes.iter().fold(0.0f64, |a, n| a.max(n.x)) + 1.0;
    let depth = nodes.iter().map(|n| n.depth).max().unwrap_or(0) + 1;
    let px = |n: &LayoutNode| MARGIN + (n.x + 0.5) / slots * (WIDTH - 2.0 * MARGIN);
    let py =
        |n: &LayoutNode| MARGIN + (n.depth as f64 + 0.5) / depth as f64 * (HEIGHT - 2.0 * MARGIN);
    let mut s = svg_open(spec);
    for &(a, b) in edges {
        let _ = writeln!(
            s,
            "<line class=\"edge\" stroke=\"gray\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\"/>",
            px(&nodes[a]),
            py(&nodes[a]),
            px(&nodes[b]),
            py(&nodes[b])
        );
    }
    for n in nodes {
        let fill = if n.leaf { "honeydew" } else { "aliceblue" };
        let _ = writeln!(
            s,
            "<g class=\"node\"><circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"6\" fill=\"{fill}\" stroke=\"black\"/><text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text></g>",
            px(n),
            py(n),
            px(n),
            py(n) - 10.0,
            escape(&n.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn text_curve(spec: &PlotSpec, x: &[f64], y: &[f64]) -> String {
    let (ylo, yhi) = bounds(y.iter().copied());
    let (xlo, xhi) = bounds(x.iter().copied());
    let gutter = 12;
    let cols = TEXT_WIDTH - gutter - 1;
    let mut canvas = vec![vec![b' '; cols]; TEXT_HEIGHT];
    for (&a, &b) in x.iter().zip(y) {
        let c = (((a - xlo) / (xhi - xlo)) * (cols - 1) as f64).round() as usize;
        let r = (((yhi - b) / (yhi - ylo)) * (TEXT_HEIGHT - 1) as f64).round() as usize;
        canvas[r.min(TEXT_HEIGHT - 1)][c.min(cols - 1)] = b'*';
    }
    let mut s = String::new();
    let _ = writeln!(s, "{}", ascii(&spec.title));
    for (r, row) in canvas.iter().enumerate() {
        let label = match r {
            0 => format!("{:>11.4}", yhi),
            _ if r == TEXT_HEIGHT - 1 => format!("{:>11.4}", ylo),
            _ => " ".repeat(11),
        };
        let line = String::from_utf8_lossy(row).trim_end().to_string();
        let _ = writeln!(s, "{label}|{line}");
    }
    let _ = writeln!(s, "{}+{}", " ".repeat(11), "-".repeat(cols));
    let left = format!("{xlo:.4}");
    let right = format!("{xhi:.4}");
    let pad = cols.saturating_sub(left.len() + right.len());
    let _ = writeln!(s, "{}{left}{}{right}", " ".repeat(gutter), " ".repeat(pad));
    let _ = writeln!(s, "{}{}", " ".repeat(gutter), ascii(&spec.x_label));
    s
}

fn text_heatmap(spec: &PlotSpec, x: &[f64], y: &[f64], z: &[Vec<f64>]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", ascii(&spec.title));
    let _ = writeln!(
        s,
        "rows: {}, columns: {}",
        ascii(&spec.y_label),
        ascii(&spec.x_label)
    );
    let mut header = format!("{:>11}", "");
    for v in x {
        let _ = write!(header, " {v:>11.4}");
    }
    let _ = writeln!(s, "{header}");
    for (vy, row) in y.iter().zip(z).rev() {
        let mut line = format!("{vy:>11.4}");
        for v in row {
            let _ = write!(line, " {v:>11.4}");
        }
        let _ = writeln!(s, "{line}");
    }
    s
}

fn text_tree(spec: &PlotSpec, nodes: &[LayoutNode], edges: &[(usize, usize)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", ascii(&spec.title));
    let mut children = vec![Vec::new(); nodes.len()];
    for &(a, b) in edges {
        children[a].push(b);
    }
    // preorder; the root is node 0
    fn walk(i: usize, nodes: &[LayoutNode], children: &[Vec<usize>], s: &mut String, branch: &str) {
        let n = &nodes[i];
        let _ = writeln!(s, "{}{}{}", "    ".repeat(n.depth), branch, ascii(&n.label));
        for (k, &c) in children[i].iter().enumerate() {
            walk(
                c,
                nodes,
                children,
                s,
                if k == 0 { "yes: " } else { "no:  " },
            );
        }
    }
    walk(0, nodes, &children, &mut s, "");
    s
}

fn ascii(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii() { c } else { '?' })
        .collect()
}
