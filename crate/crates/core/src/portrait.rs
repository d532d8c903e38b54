//! SVG phase portrait of the analytic family on the torus.
//!
//! Stroke classes:
//! - `sep-s1`: the four separatrices of `s1` (orange)
//! - `sep-s23`: the separatrices of `s2` and `s3` (blue)
//! - `level`: the dashed level curves `u = 1` and `u = 5`
//! - `zero saddle|minimum|maximum`: red markers at the zeros

use std::fmt::Write as _;

use crate::error::Result;
use crate::field::{wrap_scalar, FieldParams, Vec2, PERIOD};
use crate::flow::{ArcBudget, Branch, LevelCurveEnd, TorusFlow};
use crate::singularity::{order_saddles, Kind, Singularity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortraitOptions {
    pub mesh_n: usize,
    pub tol: f64,
    /// Meridian crossings after which an open separatrix is cut off.
    pub max_meridian_hits: usize,
    pub levels: [f64; 2],
    /// Pixel size of the square image.
    pub pixels: u32,
}

impl Default for PortraitOptions {
    fn default() -> Self {
        Self {
            mesh_n: 64,
            tol: 1e-12,
            max_meridian_hits: 3,
            levels: [1.0, 5.0],
            pixels: 720,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrokeClass {
    SeparatrixS1,
    SeparatrixS23,
    Level,
}

impl StrokeClass {
    pub fn css(self) -> &'static str {
        match self {
            StrokeClass::SeparatrixS1 => "sep-s1",
            StrokeClass::SeparatrixS23 => "sep-s23",
            StrokeClass::Level => "level",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub class: StrokeClass,
    pub label: String,
    /// Points on the lift.
    pub points: Vec<Vec2>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Portrait {
    pub params: FieldParams,
    pub zeros: Vec<Singularity>,
    pub curves: Vec<Curve>,
}

/// Traces every separatrix and the requested level curves.
pub fn compute(params: FieldParams, opts: &PortraitOptions) -> Result<Portrait> {
    let mut flow = TorusFlow::compute(params, opts.mesh_n, opts.tol)?;
    flow.opts.integrator.h_max = 0.05;
    flow.opts.t_max = 200.0;
    let triple = order_saddles(&flow.zeros)?;
    let mut curves = Vec::new();
    for (idx, saddle) in triple.as_array().iter().enumerate() {
        let class = if idx == 0 {
            StrokeClass::SeparatrixS1
        } else {
            StrokeClass::SeparatrixS23
        };
        for branch in Branch::ALL {
            let trace = flow.trace_separatrix(saddle, branch, opts.max_meridian_hits)?;
            let mut points = vec![saddle.point];
            points.extend(trace.trajectory.samples.iter().map(|s| s.q));
            curves.push(Curve {
                class,
                label: format!("s{} {}", idx + 1, branch.name()),
                points,
            });
        }
    }
    for level in opts.levels {
        let curve = flow.trace_level_curve(level, Vec2::new(level, 0.0), -1.0, ArcBudget::default())?;
        if curve.end == LevelCurveEnd::StripTop || curve.end == LevelCurveEnd::Closed {
            curves.push(Curve {
                class: StrokeClass::Level,
                label: format!("u={level}"),
                points: curve.points,
            });
        }
    }
    Ok(Portrait {
        params,
        zeros: flow.zeros.clone(),
        curves,
    })
}

/// Splits a lifted polyline into pieces that do not jump across the
/// fundamental square once wrapped.
fn wrapped_pieces(points: &[Vec2]) -> Vec<Vec<Vec2>> {
    let mut pieces: Vec<Vec<Vec2>> = Vec::new();
    let mut prev: Option<Vec2> = None;
    for p in points {
        let w = Vec2::new(wrap_scalar(p.x, PERIOD), wrap_scalar(p.y, PERIOD));
        // keep the top edge of the strip on the top edge
        let w = if p.y == PERIOD { Vec2::new(w.x, PERIOD) } else { w };
        let jump = prev
            .map(|q| (q.x - w.x).abs() > 0.5 * PERIOD || (q.y - w.y).abs() > 0.5 * PERIOD)
            .unwrap_or(true);
        if jump {
            pieces.push(Vec::new());
        }
        pieces.last_mut().unwrap().push(w);
        prev = Some(w);
    }
    pieces.retain(|p| p.len() > 1);
    pieces
}

fn polyline(out: &mut String, class: &str, label: &str, pts: &[Vec2]) {
    let coords: Vec<String> = pts
        .iter()
        .map(|p| format!("{:.3},{:.3}", p.x, PERIOD - p.y))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline class="{class}" data-label="{label}" points="{}"/>"#,
        coords.join(" ")
    );
}

/// Renders the portrait; `header` lines become an XML comment at the top.
pub fn render_svg(portrait: &Portrait, header: &[String], pixels: u32) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    if !header.is_empty() {
        out.push_str("<!--\n");
        for line in header {
            let _ = writeln!(out, "{}", line.replace("--", "- -"));
        }
        out.push_str("-->\n");
    }
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{pixels}" height="{pixels}" viewBox="0 0 {:.6} {:.6}">"#,
        PERIOD, PERIOD
    );
    out.push_str(
        "<style>\n\
         polyline { fill: none; stroke-width: 0.018; }\n\
         .sep-s1 { stroke: #e07000; }\n\
         .sep-s23 { stroke: #1f5fbf; }\n\
         .level { stroke: #333333; stroke-dasharray: 0.08 0.05; }\n\
         .zero { fill: #d01010; }\n\
         </style>\n",
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{:.6}" height="{:.6}" fill="white" stroke="black" stroke-width="0.01"/>"#,
        PERIOD, PERIOD
    );
    let p = portrait.params;
    let _ = writeln!(
        out,
        "<title>phi={} b={} c={} d={}</title>",
        p.phi, p.b, p.c, p.d
    );
    for curve in &portrait.curves {
        for piece in wrapped_pieces(&curve.points) {
            polyline(&mut out, curve.class.css(), &curve.label, &piece);
        }
    }
    for z in &portrait.zeros {
        let kind = match z.kind {
            Kind::Saddle => "saddle",
            Kind::Minimum => "minimum",
            Kind::Maximum => "maximum",
        };
        let _ = writeln!(
            out,
            r#"<circle class="zero {kind}" cx="{:.3}" cy="{:.3}" r="0.06"/>"#,
            z.point.x,
            PERIOD - z.point.y
        );
    }
    out.push_str("</svg>\n");
    out
}
