//! Plot-ready export of planar trajectory documents.
//!
//! One CSV table with columns `kind,id,index,x,y,heading`:
//! * `trace` rows: player `id`, timestep `index`, position and heading;
//! * `goal` rows: player `id`'s goal position (`index` is 0);
//! * `wall` rows: corridor wall `id` (0 lower, 1 upper), endpoints 0 and 1.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::document::TrajectoryDocument;
use crate::error::{CliError, Result};

pub const PLOT_HEADER: &str = "kind,id,index,x,y,heading";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Trace,
    Goal,
    Wall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub kind: RowKind,
    pub id: usize,
    pub index: usize,
    pub x: f64,
    pub y: f64,
    pub heading: Option<f64>,
}

pub fn plot_rows(doc: &TrajectoryDocument) -> Result<Vec<PlotRow>> {
    let layout = doc
        .layout
        .as_ref()
        .ok_or_else(|| CliError::Document(format!("scenario `{}` has no planar layout to plot", doc.scenario)))?;
    let mut rows = Vec::new();
    for (player, (&p, &h)) in layout.position_indices.iter().zip(&layout.heading_indices).enumerate() {
        rows.extend(doc.states.iter().enumerate().map(|(t, x)| PlotRow {
            kind: RowKind::Trace,
            id: player,
            index: t,
            x: x[p],
            y: x[p + 1],
            heading: Some(x[h]),
        }));
    }
    for (player, goal) in layout.goals.iter().enumerate() {
        rows.push(PlotRow {
            kind: RowKind::Goal,
            id: player,
            index: 0,
            x: goal[0],
            y: goal[1],
            heading: None,
        });
    }
    if let Some(c) = &layout.corridor {
        for (wall, y) in [c.y_min, c.y_max].into_iter().enumerate() {
            for (index, x) in [c.x_min, c.x_max].into_iter().enumerate() {
                rows.push(PlotRow {
                    kind: RowKind::Wall,
                    id: wall,
                    index,
                    x,
                    y,
                    heading: None,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_plot_csv(out: impl Write, rows: &[PlotRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_plot_csv(text: &str) -> Result<Vec<PlotRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    Ok(reader.deserialize().collect::<std::result::Result<_, _>>()?)
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Static SVG of the planar paths, goals and walls.
pub fn render_svg(rows: &[PlotRow]) -> String {
    let (width, height, pad) = (800.0, 600.0, 20.0);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for r in rows {
        x0 = x0.min(r.x);
        x1 = x1.max(r.x);
        y0 = y0.min(r.y);
        y1 = y1.max(r.y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let scale = ((width - 2.0 * pad) / span).min((height - 2.0 * pad) / span);
    let px = |x: f64| pad + (x - x0) * scale;
    let py = |y: f64| height - pad - (y - y0) * scale;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let walls: Vec<&PlotRow> = rows.iter().filter(|r| r.kind == RowKind::Wall).collect();
    for id in 0..2 {
        let wall: Vec<&&PlotRow> = walls.iter().filter(|r| r.id == id).collect();
        if wall.len() != 2 {
            continue;
        }
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="3"/>"#,
            px(wall[0].x),
            py(wall[0].y),
            px(wall[1].x),
            py(wall[1].y)
        );
    }
    let players = rows.iter().filter(|r| r.kind == RowKind::Trace).map(|r| r.id + 1).max().unwrap_or(0);
    for player in 0..players {
        let color = COLORS[player % COLORS.len()];
        let points: Vec<String> = rows
            .iter()
            .filter(|r| r.kind == RowKind::Trace && r.id == player)
            .map(|r| format!("{:.2},{:.2}", px(r.x), py(r.y)))
            .collect();
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, points.join(" "));
        for goal in rows.iter().filter(|r| r.kind == RowKind::Goal && r.id == player) {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="6" fill="none" stroke="{color}" stroke-width="2"/>"#, px(goal.x), py(goal.y));
        }
    }
    svg.push_str("</svg>\n");
    svg
}
