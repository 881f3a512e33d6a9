//! Node layout generators for a single relay cell: square grid, cyclic grid,
//! uniform-count random, and Poisson random, all clipped to the disk of radius
//! R around the relay at the origin.
//!
//! Randomness comes from ChaCha8 seeded with a caller-supplied 64-bit seed, so
//! every layout is a pure function of its spec. Disk points are drawn by
//! inverse CDF: radius = R*sqrt(u), angle = 2*pi*v, with u drawn before v.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::bounds::cyclic_ring_count;
use crate::error::{Error, Result};
use crate::geometry::{distance, Point2D, Radius};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A relay cell: the relay sits at the origin and every stored node lies
/// within `radius` of it (node ids are unique). Nodes exactly at distance
/// `radius` are kept; the membership test is an exact `<=`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "CellRepr", into = "CellRepr")]
pub struct Cell {
    radius: Radius,
    nodes: Vec<(NodeId, Point2D)>,
    index: HashMap<NodeId, usize>,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.radius == other.radius && self.nodes == other.nodes
    }
}

impl Cell {
    pub fn new(radius: Radius, nodes: Vec<(NodeId, Point2D)>) -> Result<Self> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, &(id, p)) in nodes.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::NonFiniteCoordinate(id, p.x, p.y));
            }
            let dist = distance(p, Point2D::ORIGIN);
            if dist > radius.get() {
                return Err(Error::NodeOutsideCell(id, dist, radius.get()));
            }
            if index.insert(id, i).is_some() {
                return Err(Error::DuplicateNodeId(id));
            }
        }
        Ok(Cell { radius, nodes, index })
    }

    pub fn radius(&self) -> Radius {
        self.radius
    }

    pub fn relay(&self) -> Point2D {
        Point2D::ORIGIN
    }

    pub fn nodes(&self) -> &[(NodeId, Point2D)] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn position(&self, id: NodeId) -> Result<Point2D> {
        self.index
            .get(&id)
            .map(|&i| self.nodes[i].1)
            .ok_or(Error::UnknownNode(id))
    }
}

#[derive(Serialize, Deserialize)]
struct NodeRepr {
    id: NodeId,
    x: f64,
    y: f64,
}

/// JSON shape: {"radius": 1.0, "nodes": [{"id": 0, "x": 0.5, "y": -0.25}, ...]}
#[derive(Serialize, Deserialize)]
struct CellRepr {
    radius: Radius,
    nodes: Vec<NodeRepr>,
}

impl TryFrom<CellRepr> for Cell {
    type Error = Error;
    fn try_from(repr: CellRepr) -> Result<Self> {
        let nodes = repr
            .nodes
            .into_iter()
            .map(|n| (n.id, Point2D::new(n.x, n.y)))
            .collect();
        Cell::new(repr.radius, nodes)
    }
}

impl From<Cell> for CellRepr {
    fn from(cell: Cell) -> CellRepr {
        CellRepr {
            radius: cell.radius,
            nodes: cell
                .nodes
                .into_iter()
                .map(|(id, p)| NodeRepr { id, x: p.x, y: p.y })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Square,
    Cyclic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Pitch d, in units of R.
    pub separation: f64,
    pub kind: GridKind,
    /// Square grids only: lattice offset from the origin, in units of the
    /// pitch. At the default (0, 0) the relay occupies a lattice point.
    #[serde(default)]
    pub offset: (f64, f64),
    /// Cyclic grids only: ring i is rotated by i * ring_twist radians; at the
    /// default 0 the first node of every ring sits at angle 0.
    #[serde(default)]
    pub ring_twist: f64,
}

impl GridSpec {
    pub fn square(separation: f64) -> Result<Self> {
        Self::checked(separation, GridKind::Square)
    }

    pub fn cyclic(separation: f64) -> Result<Self> {
        Self::checked(separation, GridKind::Cyclic)
    }

    fn checked(separation: f64, kind: GridKind) -> Result<Self> {
        if !separation.is_finite() || separation <= 0.0 {
            return Err(Error::BadSeparation(separation));
        }
        Ok(GridSpec { separation, kind, offset: (0.0, 0.0), ring_twist: 0.0 })
    }

    pub fn with_offset(mut self, ox: f64, oy: f64) -> Self {
        self.offset = (ox, oy);
        self
    }

    pub fn with_ring_twist(mut self, twist: f64) -> Self {
        self.ring_twist = twist;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RandomSpec {
    /// Exactly `count` nodes, i.i.d. uniform on the disk.
    UniformCount { count: usize, seed: u64 },
    /// Node count drawn Poisson(density * pi * R^2), positions uniform.
    Poisson { density: f64, seed: u64 },
}

/// Axis-aligned lattice of pitch d clipped to the disk. A lattice point that
/// falls exactly on the origin is the relay's own and is excluded from the
/// node list.
pub fn gen_square_grid(spec: &GridSpec, r: Radius) -> Result<Cell> {
    if spec.kind != GridKind::Square {
        return Err(Error::GridKindMismatch { expected: "square", found: "cyclic" });
    }
    let d = spec.separation;
    let (ox, oy) = spec.offset;
    let span = (r.get() / d + ox.abs().max(oy.abs()) + 1.0).ceil() as i64;
    let mut nodes = Vec::new();
    let mut next = 0u32;
    for j in -span..=span {
        for i in -span..=span {
            let p = Point2D::new((i as f64 + ox) * d, (j as f64 + oy) * d);
            if p.x == 0.0 && p.y == 0.0 {
                continue;
            }
            if distance(p, Point2D::ORIGIN) <= r.get() {
                nodes.push((NodeId(next), p));
                next += 1;
            }
        }
    }
    Cell::new(r, nodes)
}

/// Concentric rings at radii i*d for i = 1, 2, ... while i*d <= R; ring i
/// carries cyclic_ring_count(i) equally spaced nodes, which keeps every
/// within-ring chord at least d. The center position is the relay's.
pub fn gen_cyclic_grid(spec: &GridSpec, r: Radius) -> Result<Cell> {
    if spec.kind != GridKind::Cyclic {
        return Err(Error::GridKindMismatch { expected: "cyclic", found: "square" });
    }
    let d = spec.separation;
    let mut nodes = Vec::new();
    let mut next = 0u32;
    let mut i = 1u64;
    while i as f64 * d <= r.get() {
        let ring_radius = i as f64 * d;
        let count = cyclic_ring_count(i);
        let base = spec.ring_twist * i as f64;
        for k in 0..count {
            let theta = base + std::f64::consts::TAU * k as f64 / count as f64;
            nodes.push((
                NodeId(next),
                Point2D::new(ring_radius * theta.cos(), ring_radius * theta.sin()),
            ));
            next += 1;
        }
        i += 1;
    }
    Cell::new(r, nodes)
}

pub fn gen_uniform(spec: &RandomSpec, r: Radius) -> Result<Cell> {
    match *spec {
        RandomSpec::UniformCount { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Cell::new(r, draw_disk_points(&mut rng, count, r))
        }
        RandomSpec::Poisson { .. } => {
            Err(Error::RandomKindMismatch { expected: "uniform-count", found: "poisson" })
        }
    }
}

pub fn gen_poisson(spec: &RandomSpec, r: Radius) -> Result<Cell> {
    match *spec {
        RandomSpec::Poisson { density, seed } => {
            let mean = density * std::f64::consts::PI * r.get() * r.get();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let count = if mean > 0.0 {
                Poisson::new(mean).expect("mean is positive").sample(&mut rng) as usize
            } else {
                0
            };
            Cell::new(r, draw_disk_points(&mut rng, count, r))
        }
        RandomSpec::UniformCount { .. } => {
            Err(Error::RandomKindMismatch { expected: "poisson", found: "uniform-count" })
        }
    }
}

pub(crate) fn draw_disk_points(
    rng: &mut ChaCha8Rng,
    count: usize,
    r: Radius,
) -> Vec<(NodeId, Point2D)> {
    (0..count)
        .map(|i| {
            let u: f64 = rng.gen();
            let theta = rng.gen::<f64>() * std::f64::consts::TAU;
            let rad = r.get() * u.sqrt();
            (NodeId(i as u32), Point2D::new(rad * theta.cos(), rad * theta.sin()))
        })
        .collect()
}

/// The open-closed pitch interval over which a zero-offset square grid keeps a
/// given lattice point count, plus a canonical pitch strictly inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchInterval {
    /// Exclusive lower end: at this pitch the next lattice shell enters the disk.
    pub d_min: f64,
    /// Inclusive upper end: at this pitch the outermost kept shell touches the boundary.
    pub d_max: f64,
    /// Midpoint of the interval. Strictly inside, so no lattice point lands
    /// exactly on the disk boundary and counts are float-robust.
    pub canonical: f64,
}

/// Find the pitch interval for which the zero-offset square grid has exactly
/// `target` lattice points inside the closed disk, counting the origin point
/// occupied by the relay (the generated cell then has `target - 1` nodes).
/// Counts are step values of the shell structure, so not every target is
/// attainable; unattainable targets report the nearest attainable neighbors.
pub fn square_pitch_for_count(target: usize, r: Radius) -> Result<PitchInterval> {
    assert!((2..=100_000).contains(&target), "target out of supported range");
    // cumulative lattice point counts by squared integer norm
    let mut shells: Vec<usize> = Vec::new(); // shells[k] = #{(i,j): i^2+j^2 = k}
    let mut norms: Vec<(u64, usize)> = Vec::new(); // (squared norm, cumulative count)
    let mut k_max = 64u64;
    loop {
        let m = (k_max as f64).sqrt() as i64 + 1;
        shells.clear();
        shells.resize(k_max as usize + 1, 0);
        for i in -m..=m {
            for j in -m..=m {
                let n = (i * i + j * j) as u64;
                if n <= k_max {
                    shells[n as usize] += 1;
                }
            }
        }
        let mut cum = 0usize;
        norms.clear();
        for (k, &c) in shells.iter().enumerate() {
            if c > 0 {
                cum += c;
                norms.push((k as u64, cum));
            }
        }
        if cum > target {
            break;
        }
        k_max *= 2;
    }
    let mut below = 1usize; // cumulative count of the last shell under target
    for w in norms.windows(2) {
        let (k, c) = w[0];
        let (k_next, _) = w[1];
        if c == target {
            let d_max = r.get() / (k as f64).sqrt();
            let d_min = r.get() / (k_next as f64).sqrt();
            return Ok(PitchInterval { d_min, d_max, canonical: 0.5 * (d_min + d_max) });
        }
        if c > target {
            return Err(Error::UnattainableGridCount { target, below, above: c });
        }
        below = c;
    }
    // the growth loop stops as soon as the total exceeds the target, so the
    // first count above it can be the final entry, which windows(2) never
    // visits on the left
    let (_, above) = *norms.last().expect("norm list is never empty");
    debug_assert!(above > target);
    Err(Error::UnattainableGridCount { target, below, above })
}
