//! Planar circle domains, puncture sets and the flat-metric distance helpers.
//!
//! The background surface is a bounded circle domain: an open outer disk with
//! finitely many closed inner disks removed. The background metric is the
//! Euclidean metric of the plane throughout, so every distance below is a
//! plain Euclidean distance.

mod loops;
mod series;
mod strip;

pub use loops::{winding_vector, SmoothLoop, TangentRotation};
pub use series::TrigSeries;
pub use strip::{build_fermi_strip, parallel_curve, FermiStrip, StripNode};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point (or vector) of the Euclidean plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product: positive when `o` is
    /// counterclockwise from `self`.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Rotation by +90 degrees (counterclockwise).
    pub fn rot90(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A closed disk of the plane.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Disk {
    pub center: Vec2,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Vec2, radius: f64) -> Self {
        Disk { center, radius }
    }

    pub fn contains(&self, z: Vec2) -> bool {
        z.dist(self.center) <= self.radius
    }
}

/// A bounded planar circle domain: the open outer disk minus the closed
/// inner disks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircleDomain {
    outer: Disk,
    inner: Vec<Disk>,
}

impl CircleDomain {
    /// Builds the domain, checking that the inner disks are strictly inside
    /// the outer disk and pairwise disjoint.
    pub fn new(outer: Disk, inner: Vec<Disk>) -> Result<Self> {
        if !(outer.radius > 0.0) {
            return Err(Error::InvalidInput("outer radius must be positive".into()));
        }
        for (i, d) in inner.iter().enumerate() {
            if !(d.radius > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "inner disk {i} has nonpositive radius"
                )));
            }
            if d.center.dist(outer.center) + d.radius >= outer.radius {
                return Err(Error::InvalidInput(format!(
                    "inner disk {i} is not strictly contained in the outer disk"
                )));
            }
            for (j, e) in inner.iter().enumerate().take(i) {
                if d.center.dist(e.center) <= d.radius + e.radius {
                    return Err(Error::InvalidInput(format!(
                        "inner disks {j} and {i} are not disjoint"
                    )));
                }
            }
        }
        Ok(CircleDomain { outer, inner })
    }

    pub fn unit_disk() -> Self {
        CircleDomain::new(Disk::new(Vec2::ZERO, 1.0), Vec::new()).unwrap()
    }

    pub fn outer(&self) -> Disk {
        self.outer
    }

    pub fn inner(&self) -> &[Disk] {
        &self.inner
    }

    pub fn contains(&self, z: Vec2) -> bool {
        self.dist_to_boundary(z) > 0.0
    }

    /// Distance from `z` to the domain boundary, clamped to 0 outside.
    ///
    /// The minimum of the distance to the outer circle and to every inner
    /// circle; a value of 0 signals that `z` lies on the boundary or outside
    /// the domain.
    pub fn dist_to_boundary(&self, z: Vec2) -> f64 {
        let mut d = self.outer.radius - z.dist(self.outer.center);
        for disk in &self.inner {
            d = d.min(z.dist(disk.center) - disk.radius);
        }
        d.max(0.0)
    }
}

/// A finite set of punctures inside the domain.
#[derive(Debug, Clone)]
pub struct PunctureSet {
    points: Vec<Vec2>,
    index: GridIndex,
}

impl PunctureSet {
    /// Builds the set, checking that every point lies in the open domain and
    /// that the points are pairwise distinct.
    pub fn new(domain: &CircleDomain, points: Vec<Vec2>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !domain.contains(*p) {
                return Err(Error::InvalidInput(format!(
                    "puncture {i} lies outside the open domain"
                )));
            }
        }
        let mut sorted: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidInput("punctures are not distinct".into()));
            }
        }
        let index = GridIndex::build(&points);
        Ok(PunctureSet { points, index })
    }

    pub fn empty(domain: &CircleDomain) -> Self {
        PunctureSet::new(domain, Vec::new()).unwrap()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    /// Distance from `z` to the nearest puncture; infinite for the empty set.
    ///
    /// Errors when `z` coincides with a puncture.
    pub fn dist_to_punctures(&self, z: Vec2) -> Result<f64> {
        let d = self.min_dist(z);
        if d == 0.0 && !self.points.is_empty() {
            return Err(Error::PointIsPuncture);
        }
        Ok(d)
    }

    /// Distance to the nearest puncture without the membership check
    /// (infinite for the empty set).
    pub fn min_dist(&self, z: Vec2) -> f64 {
        match self.nearest(z) {
            Some((_, d)) => d,
            None => f64::INFINITY,
        }
    }

    /// Index and distance of the nearest puncture, lowest index on ties.
    pub fn nearest(&self, z: Vec2) -> Option<(usize, f64)> {
        self.index.nearest(&self.points, z)
    }
}

/// Uniform-grid nearest-neighbor index over a fixed point cloud.
///
/// Cells are searched in expanding rings; ties resolve to the lowest point
/// index so queries are deterministic.
#[derive(Debug, Clone)]
struct GridIndex {
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    // start offsets into `entries` per cell, CSR style
    starts: Vec<u32>,
    entries: Vec<u32>,
}

impl GridIndex {
    fn build(points: &[Vec2]) -> Self {
        if points.is_empty() {
            return GridIndex {
                origin: Vec2::ZERO,
                cell: 1.0,
                nx: 0,
                ny: 0,
                starts: vec![0],
                entries: Vec::new(),
            };
        }
        let mut lo = points[0];
        let mut hi = points[0];
        for p in points {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
        // aim for O(1) points per cell
        let target = (points.len() as f64).sqrt().ceil().max(1.0);
        let cell = span / target;
        let nx = ((hi.x - lo.x) / cell).floor() as usize + 1;
        let ny = ((hi.y - lo.y) / cell).floor() as usize + 1;
        let mut counts = vec![0u32; nx * ny + 1];
        let cell_of = |p: &Vec2| -> usize {
            let ix = (((p.x - lo.x) / cell).floor() as usize).min(nx - 1);
            let iy = (((p.y - lo.y) / cell).floor() as usize).min(ny - 1);
            iy * nx + ix
        };
        for p in points {
            counts[cell_of(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut cursor = starts.clone();
        let mut entries = vec![0u32; points.len()];
        for (i, p) in points.iter().enumerate() {
            let c = cell_of(p);
            entries[cursor[c] as usize] = i as u32;
            cursor[c] += 1;
        }
        GridIndex {
            origin: lo,
            cell,
            nx,
            ny,
            starts,
            entries,
        }
    }

    fn nearest(&self, points: &[Vec2], z: Vec2) -> Option<(usize, f64)> {
        if points.is_empty() {
            return None;
        }
        // clamp the starting cell into the grid: distances measured from the
        // query only shrink under clamping, so the ring bound below remains
        // a valid lower bound for unvisited rings
        let cx = (((z.x - self.origin.x) / self.cell).floor() as i64).clamp(0, self.nx as i64 - 1);
        let cy = (((z.y - self.origin.y) / self.cell).floor() as i64).clamp(0, self.ny as i64 - 1);
        let mut best: Option<(usize, f64)> = None;
        let max_ring = self.nx.max(self.ny) as i64 + 1;
        for ring in 0..=max_ring {
            // Once a candidate is known, stop as soon as the untested rings
            // cannot beat it.
            if let Some((_, d)) = best {
                let ring_min = (ring - 1).max(0) as f64 * self.cell;
                if ring_min > d {
                    break;
                }
            }
            let visit = |ix: i64, iy: i64, best: &mut Option<(usize, f64)>| {
                if ix < 0 || iy < 0 || ix >= self.nx as i64 || iy >= self.ny as i64 {
                    return;
                }
                let c = iy as usize * self.nx + ix as usize;
                let s = self.starts[c] as usize;
                let e = self.starts[c + 1] as usize;
                for &pi in &self.entries[s..e] {
                    let d = points[pi as usize].dist(z);
                    let better = match *best {
                        None => true,
                        Some((bi, bd)) => d < bd || (d == bd && (pi as usize) < bi),
                    };
                    if better {
                        *best = Some((pi as usize, d));
                    }
                }
            };
            if ring == 0 {
                visit(cx, cy, &mut best);
            } else {
                for ix in (cx - ring)..=(cx + ring) {
                    visit(ix, cy - ring, &mut best);
                    visit(ix, cy + ring, &mut best);
                }
                for iy in (cy - ring + 1)..=(cy + ring - 1) {
                    visit(cx - ring, iy, &mut best);
                    visit(cx + ring, iy, &mut best);
                }
            }
        }
        best
    }
}
