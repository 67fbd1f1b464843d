//! Diagram description, SVG output and transient plot payloads.
//!
//! Boxes are sized in pixels; their centres are in layout units and mapped
//! onto the canvas only when the SVG is written.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::csr_model::ConductorKind;
use crate::error::{Error, Result};
use crate::layout::{LayoutKind, LayoutResult, Point};
use crate::thermal_graph::{classify_load, LoadClass, PairFlowSeries, SubmodelGraph, TemperatureSeries};
use crate::units::DisplayUnits;

pub const DIAGRAM_SCHEMA: &str = "hfv-diagram/1";

pub const BOX_HEIGHT: f64 = 54.0;
const CHAR_WIDTH: f64 = 7.5;
const BOX_PADDING: f64 = 16.0;
const LINE_HEIGHT: f64 = 15.0;
const MARGIN_FRACTION: f64 = 0.05;
const DASH_PATTERN: &str = "6 4";
/// Perpendicular spacing between arrows sharing a pair of boxes.
const PARALLEL_OFFSET: f64 = 8.0;

pub const MIN_STROKE: f64 = 1.0;
pub const MAX_STROKE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeStyle {
    /// 0 is the blue end, 1 the red end.
    pub color_scalar: f64,
    pub stroke_width: f64,
}

/// Linear ramp over `[q_min, q_max]`; a degenerate range maps to the middle.
pub fn edge_style(q: f64, q_min: f64, q_max: f64) -> EdgeStyle {
    let color_scalar = if q_max > q_min {
        ((q - q_min) / (q_max - q_min)).clamp(0.0, 1.0)
    } else {
        0.5
    };
    EdgeStyle {
        color_scalar,
        stroke_width: MIN_STROKE + (MAX_STROKE - MIN_STROKE) * color_scalar,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramBox {
    pub name: String,
    pub center: Point,
    /// Pixels.
    pub width: f64,
    /// Pixels.
    pub height: f64,
    pub fill_class: LoadClass,
    /// Name, average temperature, net load.
    pub label_lines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramArrow {
    pub from: String,
    pub to: String,
    pub kind: ConductorKind,
    pub q_watts: f64,
    pub q_label: String,
    /// `[G W/K]`, linear arrows only.
    pub g_label: Option<String>,
    pub color: f64,
    pub weight: f64,
    pub dashed: bool,
}

impl DiagramArrow {
    /// Full annotation, e.g. `20.0 W [2.00 W/K]`.
    pub fn label(&self) -> String {
        match &self.g_label {
            Some(g) => format!("{} {g}", self.q_label),
            None => self.q_label.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramSpec {
    pub schema: String,
    pub units: DisplayUnits,
    pub timestep: usize,
    pub layout_kind: LayoutKind,
    pub boxes: Vec<DiagramBox>,
    pub arrows: Vec<DiagramArrow>,
    /// Largest radiative flow, W; upper end of the threshold slider.
    /// [`build_diagram`] takes it from the graph it is given, so callers
    /// that threshold first should set it from the unfiltered graph.
    pub radiative_q_max: f64,
}

impl DiagramSpec {
    pub fn radiative_arrow_count(&self) -> usize {
        self.arrows.iter().filter(|a| a.kind == ConductorKind::Radiative).count()
    }
}

/// Formats `v` with `sig` significant figures, e.g. `20.0`, `2.00`, `0.0123`.
pub fn format_sig(v: f64, sig: usize) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return format!("{:.*}", sig.saturating_sub(1), 0.0);
    }
    let sig = sig.max(1) as i32;
    let mut exp = v.abs().log10().floor() as i32;
    // rounding can carry into the next decade (9.996 -> 10.0)
    let rounded = round_to(v, sig - 1 - exp);
    if rounded != 0.0 && rounded.abs().log10().floor() as i32 > exp {
        exp += 1;
    }
    let decimals = sig - 1 - exp;
    if decimals >= 0 {
        format!("{:.*}", decimals as usize, round_to(v, decimals))
    } else {
        format!("{:.0}", round_to(v, decimals))
    }
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let p = 10f64.powi(decimals);
    (v * p).round() / p
}

fn box_for(name: &str, center: Point, lines: Vec<String>, fill_class: LoadClass) -> DiagramBox {
    let longest = lines.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    DiagramBox {
        name: name.to_owned(),
        center,
        width: longest as f64 * CHAR_WIDTH + BOX_PADDING,
        height: BOX_HEIGHT,
        fill_class,
        label_lines: lines,
    }
}

/// Styles a laid-out graph.
pub fn build_diagram(graph: &SubmodelGraph, layout: &LayoutResult, units: DisplayUnits) -> Result<DiagramSpec> {
    let t_sym = units.temperature.symbol();
    let p_sym = units.power.symbol();

    let mut boxes = Vec::with_capacity(graph.nodes.len());
    for node in &graph.nodes {
        let center = layout
            .get(&node.name)
            .filter(|p| p.x.is_finite() && p.y.is_finite())
            .ok_or_else(|| Error::Validation(format!("layout has no position for `{}`", node.name)))?;
        let temp = match node.avg_temp {
            Some(k) => format!("{} {t_sym}", format_sig(units.temperature.from_kelvin(k), 3)),
            None => format!("n/a {t_sym}"),
        };
        let net = units.power.from_watts(node.net_load);
        let lines = vec![node.name.clone(), temp, format!("{} {p_sym}", format_sig(net, 3))];
        boxes.push(box_for(&node.name, center, lines, classify_load(net)));
    }

    for e in &graph.edges {
        for end in [&e.from, &e.to] {
            if graph.node(end).is_none() {
                return Err(Error::Validation(format!("edge endpoint `{end}` is not a node")));
            }
        }
    }
    let (q_min, q_max) = graph
        .edges
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.q_watts.abs()), hi.max(e.q_watts.abs())));
    let arrows = graph
        .edges
        .iter()
        .map(|e| {
            let style = edge_style(e.q_watts.abs(), q_min, q_max);
            let q_label = format!("{} {p_sym}", format_sig(units.power.from_watts(e.q_watts), 3));
            let g_label = match e.kind {
                ConductorKind::Linear => e
                    .g_total
                    .map(|g| format!("[{} {}]", format_sig(g, 3), units.power.conductance_symbol())),
                ConductorKind::Radiative => None,
            };
            DiagramArrow {
                from: e.from.clone(),
                to: e.to.clone(),
                kind: e.kind,
                q_watts: e.q_watts,
                q_label,
                g_label,
                color: style.color_scalar,
                weight: style.stroke_width,
                dashed: e.kind == ConductorKind::Radiative,
            }
        })
        .collect();

    let radiative_q_max = graph
        .edges_of_kind(ConductorKind::Radiative)
        .map(|e| e.q_watts)
        .fold(0.0, f64::max);

    Ok(DiagramSpec {
        schema: DIAGRAM_SCHEMA.to_owned(),
        units,
        timestep: graph.timestep,
        layout_kind: layout.layout_kind,
        boxes,
        arrows,
        radiative_q_max,
    })
}

pub fn fill_color(class: LoadClass) -> &'static str {
    match class {
        LoadClass::Neutral => "#D3D3D3",
        LoadClass::ExcessOutgoing => "#606060",
        LoadClass::ExcessIncoming => "#CC3333",
    }
}

fn text_color(class: LoadClass) -> &'static str {
    match class {
        LoadClass::Neutral => "#000000",
        _ => "#FFFFFF",
    }
}

/// Blue `#1F4FCC` to red `#CC1F1F`.
pub fn edge_color(color_scalar: f64) -> String {
    let c = color_scalar.clamp(0.0, 1.0);
    let lerp = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * c).round() as u8;
    format!("#{:02X}{:02X}{:02X}", lerp(0x1F, 0xCC), lerp(0x4F, 0x1F), lerp(0xCC, 0x1F))
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Maps one layout axis onto `[lo, hi]` pixels; a zero span lands in the
/// middle.
fn axis_map(min: f64, max: f64, lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    move |v| {
        if max > min {
            lo + (v - min) / (max - min) * (hi - lo)
        } else {
            (lo + hi) / 2.0
        }
    }
}

/// Point where the segment from the centre of a `w x h` box towards `toward`
/// leaves the box.
fn clip_to_box(center: (f64, f64), w: f64, h: f64, toward: (f64, f64)) -> (f64, f64) {
    let (dx, dy) = (toward.0 - center.0, toward.1 - center.1);
    let tx = if dx != 0.0 { (w / 2.0) / dx.abs() } else { f64::INFINITY };
    let ty = if dy != 0.0 { (h / 2.0) / dy.abs() } else { f64::INFINITY };
    let t = tx.min(ty).min(1.0);
    (center.0 + dx * t, center.1 + dy * t)
}

/// Writes a standalone SVG 1.1 document for `diagram` on a
/// `width x height` pixel canvas.
pub fn render_svg(diagram: &DiagramSpec, width: u32, height: u32) -> String {
    let (w, h) = (width.max(1) as f64, height.max(1) as f64);
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    if diagram.boxes.is_empty() && diagram.arrows.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }

    let (mx, my) = (w * MARGIN_FRACTION, h * MARGIN_FRACTION);
    let max_w = diagram.boxes.iter().map(|b| b.width).fold(0.0, f64::max);
    let max_h = diagram.boxes.iter().map(|b| b.height).fold(0.0, f64::max);
    // keep whole boxes inside the margin when the canvas allows it
    let (x_lo, x_hi) = if w - 2.0 * mx > max_w { (mx + max_w / 2.0, w - mx - max_w / 2.0) } else { (mx, w - mx) };
    let (y_lo, y_hi) = if h - 2.0 * my > max_h { (my + max_h / 2.0, h - my - max_h / 2.0) } else { (my, h - my) };
    let bounds = diagram.boxes.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), bx| (a.min(bx.center.x), b.max(bx.center.x), c.min(bx.center.y), d.max(bx.center.y)),
    );
    let map_x = axis_map(bounds.0, bounds.1, x_lo, x_hi);
    let map_y = axis_map(bounds.2, bounds.3, y_lo, y_hi);
    let pixel = |b: &DiagramBox| (map_x(b.center.x), map_y(b.center.y));
    let find = |name: &str| diagram.boxes.iter().find(|b| b.name == name);

    if !diagram.arrows.is_empty() {
        svg.push_str("<defs>\n");
        for (i, a) in diagram.arrows.iter().enumerate() {
            let _ = writeln!(
                svg,
                r#"<marker id="ah{i}" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="5" markerHeight="5" orient="auto"><polygon points="0,0 10,5 0,10" fill="{}"/></marker>"#,
                edge_color(a.color)
            );
        }
        svg.push_str("</defs>\n");
    }

    // arrows sharing an unordered pair are spread apart
    let pair_key = |a: &DiagramArrow| {
        if a.from <= a.to {
            (a.from.clone(), a.to.clone())
        } else {
            (a.to.clone(), a.from.clone())
        }
    };
    let mut pair_total = std::collections::HashMap::new();
    for a in &diagram.arrows {
        *pair_total.entry(pair_key(a)).or_insert(0usize) += 1;
    }
    let mut pair_seen = std::collections::HashMap::new();

    for (i, a) in diagram.arrows.iter().enumerate() {
        let (Some(fb), Some(tb)) = (find(&a.from), find(&a.to)) else {
            continue;
        };
        let key = pair_key(a);
        let total = pair_total[&key];
        let slot = pair_seen.entry(key.clone()).or_insert(0usize);
        let offset = (*slot as f64 - (total as f64 - 1.0) / 2.0) * PARALLEL_OFFSET;
        *slot += 1;

        let (p0, p1) = (pixel(fb), pixel(tb));
        // perpendicular measured on the canonical direction so both
        // directions of a pair shift consistently
        let (c0, c1) = if key.0 == a.from { (p0, p1) } else { (p1, p0) };
        let len = ((c1.0 - c0.0).powi(2) + (c1.1 - c0.1).powi(2)).sqrt();
        let (nx, ny) = if len > 0.0 { (-(c1.1 - c0.1) / len, (c1.0 - c0.0) / len) } else { (0.0, 0.0) };
        let shift = |p: (f64, f64)| (p.0 + nx * offset, p.1 + ny * offset);
        let (s0, s1) = (shift(p0), shift(p1));
        let start = clip_to_box(s0, fb.width, fb.height, s1);
        let end = clip_to_box(s1, tb.width, tb.height, s0);

        let color = edge_color(a.color);
        let dash = if a.dashed {
            format!(r#" stroke-dasharray="{DASH_PATTERN}""#)
        } else {
            String::new()
        };
        let _ = writeln!(
            svg,
            r#"<path d="M {:.2} {:.2} L {:.2} {:.2}" fill="none" stroke="{color}" stroke-width="{:.2}"{dash} marker-end="url(#ah{i})"/>"#,
            start.0, start.1, end.0, end.1, a.weight
        );
        let mid = ((start.0 + end.0) / 2.0, (start.1 + end.1) / 2.0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle" fill="{color}">{}</text>"#,
            mid.0,
            mid.1 - 3.0,
            escape(&a.label())
        );
    }

    for b in &diagram.boxes {
        let (cx, cy) = pixel(b);
        let _ = writeln!(
            svg,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" rx="4" fill="{}" stroke="#333333" stroke-width="1"/>"##,
            cx - b.width / 2.0,
            cy - b.height / 2.0,
            b.width,
            b.height,
            fill_color(b.fill_class)
        );
        let first = cy - LINE_HEIGHT * (b.label_lines.len() as f64 - 1.0) / 2.0 + 4.0;
        for (k, line) in b.label_lines.iter().enumerate() {
            let weight = if k == 0 { r#" font-weight="bold""# } else { "" };
            let _ = writeln!(
                svg,
                r#"<text x="{cx:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" fill="{}"{weight}>{}</text>"#,
                first + LINE_HEIGHT * k as f64,
                text_color(b.fill_class),
                escape(line)
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Temperature,
    Flow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransientSeries {
    Temperature(Vec<TemperatureSeries>),
    Flow(Vec<PairFlowSeries>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub label: String,
    /// Conductor kind for flow series.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component: Option<ConductorKind>,
    pub y: Vec<f64>,
}

/// Line-chart payload: shared x axis (seconds) and one y vector per series
/// in display units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPayload {
    pub kind: SeriesKind,
    pub x: Vec<f64>,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<PlotSeries>,
}

pub fn build_series_payload(series: &TransientSeries, units: DisplayUnits) -> Result<PlotPayload> {
    match series {
        TransientSeries::Temperature(list) => {
            let first = list
                .first()
                .ok_or_else(|| Error::Validation("no submodels requested".into()))?;
            Ok(PlotPayload {
                kind: SeriesKind::Temperature,
                x: first.timestamps.clone(),
                x_label: "time (s)".into(),
                y_label: format!("temperature ({})", units.temperature.symbol()),
                series: list
                    .iter()
                    .map(|s| PlotSeries {
                        label: s.name.clone(),
                        component: None,
                        y: s.kelvin.iter().map(|&k| units.temperature.from_kelvin(k)).collect(),
                    })
                    .collect(),
            })
        }
        TransientSeries::Flow(list) => {
            let first = list
                .first()
                .ok_or_else(|| Error::Validation("no submodel pair requested".into()))?;
            let mut out = Vec::with_capacity(2 * list.len());
            for s in list {
                for (kind, ys) in [(ConductorKind::Linear, &s.linear), (ConductorKind::Radiative, &s.radiative)] {
                    out.push(PlotSeries {
                        label: s.label(),
                        component: Some(kind),
                        y: ys.iter().map(|&q| units.power.from_watts(q)).collect(),
                    });
                }
            }
            Ok(PlotPayload {
                kind: SeriesKind::Flow,
                x: first.timestamps.clone(),
                x_label: "time (s)".into(),
                y_label: format!("heat flow ({})", units.power.symbol()),
                series: out,
            })
        }
    }
}
