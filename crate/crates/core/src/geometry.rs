//! Canonical plan outlines and the envelope quantities derived from them.
//!
//! All outlines are rectilinear, counter-clockwise, and enclose exactly
//! 100 m². Azimuths are outward-normal directions measured clockwise from
//! north (+y), so an edge whose outside faces -y has azimuth 180 (south).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FLOOR_AREA: f64 = 100.0;
pub const MIN_EDGE_LENGTH: f64 = 3.6;
pub const DEFAULT_WALL_HEIGHT: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate polygon: {0}")]
    Degenerate(String),
    #[error("polygon is self-intersecting (edges {0} and {1})")]
    SelfIntersecting(usize, usize),
    #[error("polygon is clockwise; counter-clockwise winding required")]
    Clockwise,
    #[error("edge {0} is not axis-aligned")]
    NotRectilinear(usize),
    #[error("window-to-wall ratio {0} outside [0, 1)")]
    InvalidWwr(f64),
    #[error("wall height {0} must be positive")]
    InvalidWallHeight(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ShapeKind {
    #[serde(rename = "square")]
    Square,
    #[serde(rename = "t")]
    TShape,
    #[serde(rename = "u")]
    UShape,
    #[serde(rename = "l")]
    LShape,
}

impl ShapeKind {
    /// Output order used everywhere: square, t, u, l.
    pub const ALL: [ShapeKind; 4] = [
        ShapeKind::Square,
        ShapeKind::TShape,
        ShapeKind::UShape,
        ShapeKind::LShape,
    ];

    pub fn token(self) -> &'static str {
        match self {
            ShapeKind::Square => "square",
            ShapeKind::TShape => "t",
            ShapeKind::UShape => "u",
            ShapeKind::LShape => "l",
        }
    }

    pub fn index(self) -> usize {
        match self {
            ShapeKind::Square => 0,
            ShapeKind::TShape => 1,
            ShapeKind::UShape => 2,
            ShapeKind::LShape => 3,
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ShapeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "square" => Ok(ShapeKind::Square),
            "t" => Ok(ShapeKind::TShape),
            "u" => Ok(ShapeKind::UShape),
            "l" => Ok(ShapeKind::LShape),
            other => Err(format!(
                "unknown shape token {other:?} (expected square, t, u or l)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// Metres.
    pub length: f64,
    /// Outward-normal azimuth in degrees, clockwise from north.
    pub azimuth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlineSpec {
    pub kind: ShapeKind,
    pub vertices: Vec<Point>,
    pub floor_area: f64,
    pub perimeter: f64,
    pub edges: Vec<Edge>,
}

impl OutlineSpec {
    /// Builds an outline from a counter-clockwise rectilinear vertex list.
    pub fn new(kind: ShapeKind, vertices: Vec<Point>) -> Result<Self, GeometryError> {
        let vertices = strip_closing_vertex(&vertices);
        let floor_area = polygon_area(&vertices)?;
        let n = vertices.len();
        let mut edges = Vec::with_capacity(n);
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            // Outward normal of a CCW edge is the direction rotated -90°.
            let (length, azimuth) = if dy == 0.0 && dx > 0.0 {
                (dx, 180.0)
            } else if dy == 0.0 && dx < 0.0 {
                (-dx, 0.0)
            } else if dx == 0.0 && dy > 0.0 {
                (dy, 90.0)
            } else if dx == 0.0 && dy < 0.0 {
                (-dy, 270.0)
            } else {
                return Err(GeometryError::NotRectilinear(i));
            };
            edges.push(Edge { length, azimuth });
        }
        let perimeter = edges.iter().map(|e| e.length).sum();
        Ok(OutlineSpec {
            kind,
            vertices,
            floor_area,
            perimeter,
            edges,
        })
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.length)
            .fold(f64::INFINITY, f64::min)
    }
}

fn pts(coords: &[(f64, f64)]) -> Vec<Point> {
    coords.iter().map(|&(x, y)| Point::new(x, y)).collect()
}

/// The fixed 100 m² outline for each shape.
pub fn canonical_outline(kind: ShapeKind) -> OutlineSpec {
    let vertices = match kind {
        ShapeKind::Square => pts(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]),
        // Legs 14×4 and 4×11.
        ShapeKind::LShape => pts(&[
            (0.0, 0.0),
            (14.0, 0.0),
            (14.0, 4.0),
            (4.0, 4.0),
            (4.0, 15.0),
            (0.0, 15.0),
        ]),
        // Bar (0,11)-(14,15) on a stem (5,0)-(9,11).
        ShapeKind::TShape => pts(&[
            (5.0, 0.0),
            (9.0, 0.0),
            (9.0, 11.0),
            (14.0, 11.0),
            (14.0, 15.0),
            (0.0, 15.0),
            (0.0, 11.0),
            (5.0, 11.0),
        ]),
        // Base 12×4 with two 4×6.5 prongs.
        ShapeKind::UShape => pts(&[
            (0.0, 0.0),
            (12.0, 0.0),
            (12.0, 10.5),
            (8.0, 10.5),
            (8.0, 4.0),
            (4.0, 4.0),
            (4.0, 10.5),
            (0.0, 10.5),
        ]),
    };
    OutlineSpec::new(kind, vertices).expect("canonical outlines are valid")
}

fn strip_closing_vertex(vertices: &[Point]) -> Vec<Point> {
    let mut v = vertices.to_vec();
    if v.len() > 1 && v.first() == v.last() {
        v.pop();
    }
    v
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_touch(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d))
        || (d2 == 0.0 && on_segment(b, c, d))
        || (d3 == 0.0 && on_segment(c, a, b))
        || (d4 == 0.0 && on_segment(d, a, b))
}

/// Shoelace area of a simple counter-clockwise polygon.
///
/// A trailing copy of the first vertex is accepted. Degenerate,
/// self-intersecting and clockwise inputs are rejected.
pub fn polygon_area(vertices: &[Point]) -> Result<f64, GeometryError> {
    let v = strip_closing_vertex(vertices);
    let n = v.len();
    let mut distinct: Vec<Point> = Vec::with_capacity(n);
    for p in &v {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(GeometryError::Degenerate("non-finite vertex".into()));
        }
        if !distinct.contains(p) {
            distinct.push(*p);
        }
    }
    if distinct.len() < 3 {
        return Err(GeometryError::Degenerate(format!(
            "{} distinct vertices",
            distinct.len()
        )));
    }
    if distinct.len() != n {
        return Err(GeometryError::Degenerate("repeated vertex".into()));
    }

    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        for j in (i + 1)..n {
            let (c, d) = (v[j], v[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Adjacent edges share one vertex; they may only overlap by folding back.
                let shared = if j == i + 1 { b } else { a };
                let (p, q, r) = if j == i + 1 {
                    (a, shared, d)
                } else {
                    (c, shared, b)
                };
                let folded = cross(p, q, r) == 0.0
                    && ((q.x - p.x) * (r.x - q.x) + (q.y - p.y) * (r.y - q.y)) < 0.0;
                if folded {
                    return Err(GeometryError::SelfIntersecting(i, j));
                }
            } else if segments_touch(a, b, c, d) {
                return Err(GeometryError::SelfIntersecting(i, j));
            }
        }
    }

    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum();
    if twice == 0.0 {
        return Err(GeometryError::Degenerate("zero area".into()));
    }
    if twice < 0.0 {
        return Err(GeometryError::Clockwise);
    }
    Ok(twice / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacadeBreakdown {
    pub wall_height: f64,
    /// Glazed area per edge, m², aligned with `OutlineSpec::edges`.
    pub glazed: Vec<f64>,
    pub opaque: Vec<f64>,
    pub total_glazed: f64,
    pub total_opaque: f64,
}

pub fn facade_breakdown(
    outline: &OutlineSpec,
    wall_height: f64,
    wwr: f64,
) -> Result<FacadeBreakdown, GeometryError> {
    if !(0.0..1.0).contains(&wwr) {
        return Err(GeometryError::InvalidWwr(wwr));
    }
    if !(wall_height > 0.0 && wall_height.is_finite()) {
        return Err(GeometryError::InvalidWallHeight(wall_height));
    }
    let gross: Vec<f64> = outline
        .edges
        .iter()
        .map(|e| e.length * wall_height)
        .collect();
    let glazed: Vec<f64> = gross.iter().map(|g| wwr * g).collect();
    let opaque: Vec<f64> = gross.iter().zip(&glazed).map(|(g, w)| g - w).collect();
    Ok(FacadeBreakdown {
        wall_height,
        total_glazed: glazed.iter().sum(),
        total_opaque: opaque.iter().sum(),
        glazed,
        opaque,
    })
}

/// Wraps an angle in degrees to [0, 360).
pub fn wrap_degrees(angle: f64) -> f64 {
    let w = angle.rem_euclid(360.0);
    // rem_euclid of a tiny negative value rounds up to exactly 360.
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Edge azimuths after rotating the building by `orientation` degrees.
pub fn rotate_azimuths(outline: &OutlineSpec, orientation: f64) -> Vec<f64> {
    let shift = wrap_degrees(orientation);
    outline
        .edges
        .iter()
        .map(|e| wrap_degrees(e.azimuth + shift))
        .collect()
}
