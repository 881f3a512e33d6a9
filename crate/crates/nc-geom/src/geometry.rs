//! Planar primitives: distance, Boolean connectivity, convex hulls, and the
//! convex-position test used to sanity-check coding witnesses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the plane. Coordinates are in units of the cell radius R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    /// Distance from the origin.
    pub fn norm(self) -> f64 {
        distance(self, Point2D::ORIGIN)
    }
}

/// Communication radius; finite and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Radius(f64);

impl Radius {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Radius(value))
        } else {
            Err(Error::BadRadius(value))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Radius {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Radius::new(value)
    }
}

impl From<Radius> for f64 {
    fn from(r: Radius) -> f64 {
        r.0
    }
}

pub fn distance(a: Point2D, b: Point2D) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// Link test under the Boolean model: connected iff distance <= r.
/// The comparison is exact on the computed distance; there is no epsilon band.
pub fn is_connected(a: Point2D, b: Point2D, r: Radius) -> bool {
    distance(a, b) <= r.get()
}

/// Twice the signed area of the triangle (o, a, b); positive for a left turn.
fn cross(o: Point2D, a: Point2D, b: Point2D) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull by monotone chain. Vertices are returned counter-clockwise,
/// starting from the lowest point (ties toward smaller x). Collinear points on
/// hull edges are dropped, so an all-collinear input yields the two segment
/// endpoints. Deterministic given input order.
pub fn convex_hull(points: &[Point2D]) -> Vec<Point2D> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    if pts.len() <= 2 {
        return rotate_to_lowest(pts);
    }
    let mut lower: Vec<Point2D> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2D> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    rotate_to_lowest(lower)
}

fn rotate_to_lowest(mut hull: Vec<Point2D>) -> Vec<Point2D> {
    if hull.len() > 1 {
        let start = hull
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)))
            .map(|(i, _)| i)
            .unwrap();
        hull.rotate_left(start);
    }
    hull
}

/// Tolerance for "strictly inside" in units of R (coordinates are in units of
/// R). Grid layouts produce many exactly-collinear triples; anything within
/// this band of a hull edge counts as on the boundary.
const CONVEX_TOL: f64 = 1e-9;

/// True iff no input point lies strictly interior to the convex hull of the
/// set. Points on the hull boundary (vertices, edge points, collinear runs)
/// are permitted. Sets of one or two distinct locations are always true.
pub fn is_convex_position(points: &[Point2D]) -> bool {
    let hull = convex_hull(points);
    if hull.len() <= 2 {
        return true;
    }
    points.iter().all(|&p| !strictly_inside(&hull, p))
}

fn strictly_inside(hull: &[Point2D], p: Point2D) -> bool {
    let n = hull.len();
    (0..n).all(|i| {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        // perpendicular distance from the edge line, signed toward the interior
        cross(a, b, p) > CONVEX_TOL * distance(a, b)
    })
}
