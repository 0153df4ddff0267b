//! Planar carriers: disks, circular annuli, polar sample grids, homology cycles,
//! exhaustion towers and admissible sets (a region plus attached arcs).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on grid size accepted by [`sample_grid`].
pub const MAX_GRID_NODES: usize = 4_000_000;
/// Tolerance for arc endpoints lying on the region boundary.
pub const ARC_ENDPOINT_TOL: f64 = 1e-9;
/// Vertex count of the polyline returned by [`generator_cycle`].
pub const CYCLE_VERTICES: usize = 512;

fn origin() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusChart {
    pub inner_radius: f64,
    pub outer_radius: f64,
    #[serde(default = "origin")]
    pub center: Complex64,
}

impl AnnulusChart {
    pub fn new(inner_radius: f64, outer_radius: f64, center: Complex64) -> Result<Self> {
        if !(inner_radius > 0.0 && inner_radius < outer_radius && outer_radius.is_finite()) {
            return Err(Error::DomainDegenerate(format!(
                "annulus needs 0 < r < R, got r = {inner_radius}, R = {outer_radius}"
            )));
        }
        Ok(Self {
            inner_radius,
            outer_radius,
            center,
        })
    }

    pub fn width(&self) -> f64 {
        self.outer_radius - self.inner_radius
    }

    pub fn modulus_ratio(&self) -> f64 {
        self.outer_radius / self.inner_radius
    }

    /// Whether a labyrinth with parameter `n` fits, i.e. `2/n < R - r`.
    pub fn fits_labyrinth(&self, n: usize) -> bool {
        n > 0 && 2.0 / (n as f64) < self.width()
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        let m = (z - self.center).norm();
        m >= self.inner_radius - tol && m <= self.outer_radius + tol
    }
}

pub fn make_annulus(r: f64, big_r: f64) -> Result<AnnulusChart> {
    AnnulusChart::new(r, big_r, origin())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    #[serde(default = "origin")]
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::DomainDegenerate(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    Disk(Disk),
    Annulus(AnnulusChart),
}

impl Region {
    pub fn disk(radius: f64) -> Result<Self> {
        Ok(Self::Disk(Disk::new(origin(), radius)?))
    }

    pub fn annulus(r: f64, big_r: f64) -> Result<Self> {
        Ok(Self::Annulus(make_annulus(r, big_r)?))
    }

    pub fn center(&self) -> Complex64 {
        match self {
            Self::Disk(d) => d.center,
            Self::Annulus(a) => a.center,
        }
    }

    pub fn outer_radius(&self) -> f64 {
        match self {
            Self::Disk(d) => d.radius,
            Self::Annulus(a) => a.outer_radius,
        }
    }

    /// Zero for disks.
    pub fn inner_radius(&self) -> f64 {
        match self {
            Self::Disk(_) => 0.0,
            Self::Annulus(a) => a.inner_radius,
        }
    }

    pub fn is_disk(&self) -> bool {
        matches!(self, Self::Disk(_))
    }

    /// Signed distance to the boundary, positive inside.
    pub fn depth(&self, z: Complex64) -> f64 {
        let m = (z - self.center()).norm();
        match self {
            Self::Disk(d) => d.radius - m,
            Self::Annulus(a) => (m - a.inner_radius).min(a.outer_radius - m),
        }
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.depth(z) >= -tol
    }

    /// Boundary circles as `(center, radius)` pairs, outer first.
    pub fn boundary_circles(&self) -> Vec<(Complex64, f64)> {
        match self {
            Self::Disk(d) => vec![(d.center, d.radius)],
            Self::Annulus(a) => vec![(a.center, a.outer_radius), (a.center, a.inner_radius)],
        }
    }

    pub fn boundary_samples(&self, per_circle: usize) -> Vec<Complex64> {
        self.boundary_circles()
            .into_iter()
            .flat_map(|(c, r)| {
                (0..per_circle).map(move |k| c + Complex64::from_polar(r, 2.0 * PI * k as f64 / per_circle as f64))
            })
            .collect()
    }

    /// Smallest depth of this region's boundary inside `outer`; positive means
    /// `self ⊂ outer°` as far as boundary samples can tell.
    pub fn gap_inside(&self, outer: &Region) -> f64 {
        let mut gap = self
            .boundary_samples(720)
            .into_iter()
            .map(|z| outer.depth(z))
            .fold(f64::INFINITY, f64::min);
        if let Region::Annulus(a) = outer {
            // the hole of `outer` must not sit inside `self`
            if self.contains(a.center, 0.0) {
                gap = gap.min(-1.0);
            }
        }
        gap
    }

    /// Whether the ring between `self` and `outer` is made of concentric annuli
    /// (disk in disk, or annulus in annulus, sharing a center).
    pub fn concentric_with(&self, outer: &Region) -> bool {
        (self.center() - outer.center()).norm() < 1e-12 && self.is_disk() == outer.is_disk()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridNode {
    pub z: Complex64,
    pub area: f64,
}

/// Polar sample grid. Annuli use `radial_count` rings including both boundary
/// circles; disks use a center node plus `radial_count - 1` rings, the last
/// one on the boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Grid {
    parent: Region,
    radial_count: usize,
    angular_count: usize,
    nodes: Vec<GridNode>,
}

pub fn sample_grid(region: &Region, radial_count: usize, angular_count: usize) -> Result<Grid> {
    Grid::new(*region, radial_count, angular_count)
}

impl Grid {
    pub fn new(parent: Region, radial_count: usize, angular_count: usize) -> Result<Self> {
        if radial_count < 2 || angular_count < 8 {
            return Err(Error::Resolution(format!(
                "grid needs radial_count >= 2 and angular_count >= 8, got {radial_count}x{angular_count}"
            )));
        }
        let total = match parent {
            Region::Disk(_) => 1 + (radial_count - 1) * angular_count,
            Region::Annulus(_) => radial_count * angular_count,
        };
        if total > MAX_GRID_NODES {
            return Err(Error::Resolution(format!(
                "grid of {total} nodes exceeds the cap of {MAX_GRID_NODES}"
            )));
        }
        let mut g = Self {
            parent,
            radial_count,
            angular_count,
            nodes: Vec::with_capacity(total),
        };
        let c = parent.center();
        let dth = 2.0 * PI / angular_count as f64;
        let step = g.radial_step();
        let (lo, hi) = (parent.inner_radius(), parent.outer_radius());
        let ring_area = |rho: f64| {
            let a = (rho - 0.5 * step).max(lo);
            let b = (rho + 0.5 * step).min(hi);
            0.5 * dth * (b * b - a * a)
        };
        if parent.is_disk() {
            g.nodes.push(GridNode {
                z: c,
                area: PI * (0.5 * step).powi(2),
            });
        }
        let first = usize::from(parent.is_disk());
        for i in first..radial_count {
            let rho = g.row_radius(i);
            let area = ring_area(rho);
            for j in 0..angular_count {
                g.nodes.push(GridNode {
                    z: c + Complex64::from_polar(rho, dth * j as f64),
                    area,
                });
            }
        }
        Ok(g)
    }

    pub fn parent(&self) -> &Region {
        &self.parent
    }

    pub fn radial_count(&self) -> usize {
        self.radial_count
    }

    pub fn angular_count(&self) -> usize {
        self.angular_count
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn z(&self, idx: usize) -> Complex64 {
        self.nodes[idx].z
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.nodes.iter().map(|n| n.z).collect()
    }

    pub fn radial_step(&self) -> f64 {
        (self.parent.outer_radius() - self.parent.inner_radius()) / (self.radial_count - 1) as f64
    }

    pub fn angular_step(&self) -> f64 {
        2.0 * PI / self.angular_count as f64
    }

    pub fn row_radius(&self, i: usize) -> f64 {
        self.parent.inner_radius() + self.radial_step() * i as f64
    }

    pub fn angle(&self, j: usize) -> f64 {
        self.angular_step() * j as f64
    }

    /// Node index of ring `i`, angle `j` (wrapping). Ring 0 of a disk is the center.
    pub fn index(&self, i: usize, j: usize) -> usize {
        let j = j % self.angular_count;
        if self.parent.is_disk() {
            if i == 0 {
                0
            } else {
                1 + (i - 1) * self.angular_count + j
            }
        } else {
            i * self.angular_count + j
        }
    }

    /// `(ring, angle)` of a node; the disk center reports `(0, 0)`.
    pub fn position(&self, idx: usize) -> (usize, usize) {
        if self.parent.is_disk() {
            if idx == 0 {
                (0, 0)
            } else {
                (1 + (idx - 1) / self.angular_count, (idx - 1) % self.angular_count)
            }
        } else {
            (idx / self.angular_count, idx % self.angular_count)
        }
    }

    pub fn row(&self, i: usize) -> Vec<usize> {
        if self.parent.is_disk() && i == 0 {
            return vec![0];
        }
        (0..self.angular_count).map(|j| self.index(i, j)).collect()
    }

    pub fn outer_boundary(&self) -> Vec<usize> {
        self.row(self.radial_count - 1)
    }

    /// Empty for disks.
    pub fn inner_boundary(&self) -> Vec<usize> {
        if self.parent.is_disk() {
            Vec::new()
        } else {
            self.row(0)
        }
    }

    pub fn boundary(&self) -> Vec<usize> {
        let mut b = self.outer_boundary();
        b.extend(self.inner_boundary());
        b
    }

    pub fn nearest_node(&self, z: Complex64) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (k, n) in self.nodes.iter().enumerate() {
            let d = (n.z - z).norm_sqr();
            if d < best.0 {
                best = (d, k);
            }
        }
        best.1
    }

    /// Undirected edges of the 8-neighbour stencil: radial, angular (wrapping)
    /// and both diagonals; the disk center joins every node of ring 1.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let na = self.angular_count;
        let nr = self.radial_count;
        let first = usize::from(self.parent.is_disk());
        let mut e = Vec::with_capacity(4 * self.nodes.len());
        if self.parent.is_disk() {
            for j in 0..na {
                e.push((0, self.index(1, j)));
            }
        }
        for i in first..nr {
            for j in 0..na {
                let a = self.index(i, j);
                e.push((a, self.index(i, j + 1)));
                if i + 1 < nr {
                    e.push((a, self.index(i + 1, j)));
                    e.push((a, self.index(i + 1, j + 1)));
                    e.push((a, self.index(i + 1, j + na - 1)));
                }
            }
        }
        e
    }

    /// Resolution error when the radial step is not below `max_step`.
    pub fn require_radial_step(&self, max_step: f64, what: &str) -> Result<()> {
        let step = self.radial_step();
        if step < max_step {
            Ok(())
        } else {
            Err(Error::Resolution(format!(
                "radial step {step:.3e} does not resolve {what} (needs < {max_step:.3e})"
            )))
        }
    }

    /// Branch of `log` of nonvanishing samples, continuous along a spanning
    /// tree of the grid (rays from the center or from the inner ring).
    pub fn unwrap_log(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = values.iter().map(|v| v.ln()).collect();
        let fix = |prev: Complex64, cur: &mut Complex64| {
            let k = ((prev.im - cur.im) / (2.0 * PI)).round();
            cur.im += 2.0 * PI * k;
        };
        let na = self.angular_count;
        if !self.parent.is_disk() {
            for j in 1..na {
                let prev = out[self.index(0, j - 1)];
                fix(prev, &mut out[self.index(0, j)]);
            }
        }
        for j in 0..na {
            for i in 1..self.radial_count {
                let prev = out[self.index(i - 1, j)];
                fix(prev, &mut out[self.index(i, j)]);
            }
        }
        out
    }
}

/// Information kept when a cycle is a parametrized circle, so periods can use
/// the trapezoid rule instead of polyline quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleInfo {
    pub center: Complex64,
    pub radius: f64,
    pub turns: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub points: Vec<Complex64>,
    pub winding_number: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circle: Option<CircleInfo>,
}

impl Cycle {
    /// Circle traversed `turns` times (negative for clockwise).
    pub fn circle(center: Complex64, radius: f64, vertices: usize, turns: i32) -> Self {
        let total = vertices * turns.unsigned_abs() as usize;
        let sign = f64::from(turns.signum());
        let mut points: Vec<Complex64> = (0..total)
            .map(|k| center + Complex64::from_polar(radius, sign * 2.0 * PI * k as f64 / vertices as f64))
            .collect();
        points.push(points[0]);
        Self {
            points,
            winding_number: turns,
            circle: Some(CircleInfo { center, radius, turns }),
        }
    }

    pub fn from_points(points: Vec<Complex64>, winding_number: i32) -> Result<Self> {
        if points.len() < 3 || (points[0] - points[points.len() - 1]).norm() > 1e-12 {
            return Err(Error::DomainDegenerate("cycle polyline must be closed".into()));
        }
        Ok(Self {
            points,
            winding_number,
            circle: None,
        })
    }

    pub fn is_closed(&self) -> bool {
        self.points.len() >= 2 && (self.points[0] - self.points[self.points.len() - 1]).norm() <= 1e-12
    }

    pub fn winding_about(&self, p: Complex64) -> i32 {
        let total: f64 = self
            .points
            .windows(2)
            .map(|w| ((w[1] - p) / (w[0] - p)).arg())
            .sum();
        (total / (2.0 * PI)).round() as i32
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self {
            points,
            winding_number: -self.winding_number,
            circle: self.circle.map(|c| CircleInfo { turns: -c.turns, ..c }),
        }
    }

    /// Concatenation of two closed loops sharing their first point.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if (self.points[0] - other.points[0]).norm() > 1e-12 {
            return Err(Error::DomainDegenerate("cycles must share a base point".into()));
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points[1..]);
        let circle = match (self.circle, other.circle) {
            (Some(a), Some(b)) if a.center == b.center && a.radius == b.radius => Some(CircleInfo {
                turns: a.turns + b.turns,
                ..a
            }),
            _ => None,
        };
        Ok(Self {
            points,
            winding_number: self.winding_number + other.winding_number,
            circle,
        })
    }
}

/// Circle of radius `sqrt(rR)` generating the first homology of the annulus.
pub fn generator_cycle(annulus: &AnnulusChart) -> Cycle {
    let rho = (annulus.inner_radius * annulus.outer_radius).sqrt();
    Cycle::circle(annulus.center, rho, CYCLE_VERTICES, 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TowerKind {
    DiskTower,
    AnnulusTower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionTower {
    regions: Vec<Region>,
}

pub fn make_exhaustion(kind: TowerKind, stages: usize) -> Result<ExhaustionTower> {
    if stages == 0 {
        return Err(Error::Precondition("an exhaustion needs at least one stage".into()));
    }
    let regions = (1..=stages)
        .map(|n| match kind {
            TowerKind::DiskTower => Region::disk(n as f64),
            TowerKind::AnnulusTower => {
                let t = n as f64 / (n as f64 + 1.0);
                Region::annulus((-t).exp(), t.exp())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ExhaustionTower::from_regions(regions)
}

impl ExhaustionTower {
    pub fn from_regions(regions: Vec<Region>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::Precondition("an exhaustion needs at least one region".into()));
        }
        for (n, w) in regions.windows(2).enumerate() {
            let gap = w[0].gap_inside(&w[1]);
            if gap <= 0.0 {
                return Err(Error::DomainDegenerate(format!(
                    "V_{} is not inside the interior of V_{} (gap {gap:.3e})",
                    n + 1,
                    n + 2
                )));
            }
        }
        Ok(Self { regions })
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Region `V_n`, 1-based.
    pub fn stage(&self, n: usize) -> &Region {
        &self.regions[n - 1]
    }

    /// Minimum over boundary samples of `V_n` of the distance to `∂V_{n+1}`.
    pub fn gap(&self, n: usize) -> f64 {
        self.regions[n - 1].gap_inside(&self.regions[n])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleSet {
    pub region: Region,
    pub arcs: Vec<Vec<Complex64>>,
}

fn segments_cross(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let cross = |o: Complex64, p: Complex64, q: Complex64| (p - o).re * (q - o).im - (p - o).im * (q - o).re;
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0))
}

impl AdmissibleSet {
    /// Validates endpoint placement, disjointness and connectivity. Analyticity
    /// of the arcs is not certified.
    pub fn new(region: Region, arcs: Vec<Vec<Complex64>>) -> Result<Self> {
        for (k, arc) in arcs.iter().enumerate() {
            if arc.len() < 2 {
                return Err(Error::DomainDegenerate(format!("arc {k} has fewer than two points")));
            }
            for end in [arc[0], arc[arc.len() - 1]] {
                let d = region.depth(end).abs();
                if d > ARC_ENDPOINT_TOL {
                    return Err(Error::DomainDegenerate(format!(
                        "arc {k} endpoint {end} is {d:.3e} away from the region boundary"
                    )));
                }
            }
            if let Some(p) = arc[1..arc.len() - 1].iter().find(|&&p| region.depth(p) >= 0.0) {
                return Err(Error::DomainDegenerate(format!("arc {k} enters the region at {p}")));
            }
        }
        for a in 0..arcs.len() {
            for b in a + 1..arcs.len() {
                for s in arcs[a].windows(2) {
                    for t in arcs[b].windows(2) {
                        if segments_cross(s[0], s[1], t[0], t[1]) {
                            return Err(Error::DomainDegenerate(format!("arcs {a} and {b} intersect")));
                        }
                    }
                }
            }
        }
        // every arc has both endpoints on the region, so the union is connected
        Ok(Self { region, arcs })
    }
}

/// Polyline sampling of the circular arc `center + radius·e^{iθ}`, `θ ∈ [t0, t1]`.
pub fn circular_arc(center: Complex64, radius: f64, t0: f64, t1: f64, segments: usize) -> Vec<Complex64> {
    (0..=segments)
        .map(|k| center + Complex64::from_polar(radius, t0 + (t1 - t0) * k as f64 / segments as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature;

    #[test]
    fn annulus_construction() {
        let a = make_annulus(0.5, 1.0).unwrap();
        assert_eq!(a.modulus_ratio(), 2.0);
        assert!(matches!(make_annulus(1.0, 1.0), Err(Error::DomainDegenerate(_))));
        let thin = make_annulus(0.25, 1.0).unwrap();
        assert!(!thin.fits_labyrinth(2));
        assert!(thin.fits_labyrinth(3));
    }

    #[test]
    fn small_grid_layout() {
        let region = Region::annulus(0.5, 1.0).unwrap();
        let g = sample_grid(&region, 4, 8).unwrap();
        assert_eq!(g.len(), 32);
        assert!((g.radial_step() - 0.5 / 3.0).abs() < 1e-15);
        for n in g.nodes() {
            assert!(region.contains(n.z, 1e-12));
        }
        let total: f64 = g.nodes().iter().map(|n| n.area).sum();
        assert!((total - PI * 0.75).abs() < 1e-12);
    }

    #[test]
    fn disk_grid_area_and_center() {
        let g = sample_grid(&Region::disk(2.0).unwrap(), 5, 16).unwrap();
        assert_eq!(g.len(), 1 + 4 * 16);
        assert_eq!(g.z(0), Complex64::new(0.0, 0.0));
        let total: f64 = g.nodes().iter().map(|n| n.area).sum();
        assert!((total - 4.0 * PI).abs() < 1e-12);
        assert_eq!(g.position(g.index(3, 5)), (3, 5));
    }

    #[test]
    fn labyrinth_resolution_threshold() {
        // thickness 1/(2N^3) = 1/54 for N = 3; 28 rings on width 0.5 give a
        // step of exactly 1/54, which is not strictly below it
        let band = 1.0 / 54.0;
        let region = Region::annulus(0.5, 1.0).unwrap();
        let coarse = sample_grid(&region, 28, 64).unwrap();
        let fine = sample_grid(&region, 29, 64).unwrap();
        assert!(coarse.require_radial_step(band, "band").is_err());
        assert!(fine.require_radial_step(band, "band").is_ok());
    }

    #[test]
    fn generator_cycle_residue() {
        let a = make_annulus(0.5, 1.0).unwrap();
        let c = generator_cycle(&a);
        assert!((c.points[0].norm() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.winding_number, 1);
        assert_eq!(c.winding_about(Complex64::new(0.0, 0.0)), 1);
        let val = quadrature::polyline(&|z: Complex64| z.inv(), &c.points);
        assert!((val - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-10);
    }

    #[test]
    fn towers_nest() {
        let t = make_exhaustion(TowerKind::DiskTower, 3).unwrap();
        assert_eq!(t.stage(3), &Region::disk(3.0).unwrap());
        assert!((t.gap(1) - 1.0).abs() < 1e-12);
        let a = make_exhaustion(TowerKind::AnnulusTower, 2).unwrap();
        assert!(a.gap(1) > 0.0);
        assert!(a.stage(2).outer_radius() < 1f64.exp());
        assert!(ExhaustionTower::from_regions(vec![Region::disk(2.0).unwrap(), Region::disk(1.0).unwrap()]).is_err());
    }

    #[test]
    fn admissible_set_checks() {
        let u = Region::Disk(Disk::new(Complex64::new(1.0, 0.0), 0.4).unwrap());
        let p1 = Complex64::new(1.0, 0.4);
        let p2 = Complex64::new(1.0, -0.4);
        let through = vec![p1, Complex64::new(1.0, 0.0), p2];
        assert!(AdmissibleSet::new(u, vec![through]).is_err());
        let loose = vec![Complex64::new(1.0, 0.5), Complex64::new(0.0, 1.0)];
        assert!(AdmissibleSet::new(u, vec![loose]).is_err());
        let arc = circular_arc(Complex64::new(0.0, 0.0), p1.norm(), p1.arg(), 2.0 * PI + p2.arg(), 200);
        assert!(AdmissibleSet::new(u, vec![arc]).is_ok());
    }
}
