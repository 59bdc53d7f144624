//! Planar primitives: points, the circular observation window, nearest-AP
//! lookup and single Voronoi cells as convex polygons.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn from_polar(radius: T, angle: T) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn norm_sq(self) -> T {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn dist_sq(self, other: Self) -> T {
        (self - other).norm_sq()
    }

    pub fn dist(self, other: Self) -> T {
        (self - other).norm()
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Self) -> T {
        self.x * other.y - self.y * other.x
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl<T: Real> Add for Point2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> Sub for Point2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Mul<T> for Point2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

/// Expected AP count inside the default observation window.
pub const DEFAULT_EXPECTED_APS: f64 = 30.0;

/// Circular observation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimWindow<T> {
    pub center: Point2<T>,
    pub radius: T,
}

impl<T: Real> SimWindow<T> {
    pub fn new(center: Point2<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::param("radius", format!("must be finite and > 0, got {radius}")));
        }
        if !center.is_finite() {
            return Err(Error::param("center", "must be finite"));
        }
        Ok(Self { center, radius })
    }

    /// Window centred at the origin holding `expected` points of a PPP with
    /// the given density on average.
    pub fn for_expected_count(density: T, expected: T) -> Result<Self> {
        if !(density > T::zero()) {
            return Err(Error::param("density", format!("must be > 0, got {density}")));
        }
        if !(expected > T::zero()) {
            return Err(Error::param("expected", format!("must be > 0, got {expected}")));
        }
        Self::new(Point2::origin(), (expected / (T::PI() * density)).sqrt())
    }

    /// The default window: 30 APs on average around the typical receiver.
    pub fn default_for(lambda_a: T) -> Result<Self> {
        Self::for_expected_count(lambda_a, T::of(DEFAULT_EXPECTED_APS))
    }

    pub fn area(&self) -> T {
        T::PI() * self.radius * self.radius
    }

    pub fn contains(&self, p: Point2<T>) -> bool {
        p.dist_sq(self.center) <= self.radius * self.radius
    }

    /// Axis-aligned bounding square as a counter-clockwise polygon.
    pub fn bounding_square(&self) -> ConvexPolygon<T> {
        let (c, r) = (self.center, self.radius);
        ConvexPolygon {
            vertices: vec![
                Point2::new(c.x - r, c.y - r),
                Point2::new(c.x + r, c.y - r),
                Point2::new(c.x + r, c.y + r),
                Point2::new(c.x - r, c.y + r),
            ],
        }
    }

    /// Inscribed regular polygon with `sides` vertices.
    pub fn inscribed_polygon(&self, sides: usize) -> ConvexPolygon<T> {
        let step = T::TAU() / T::of_usize(sides);
        ConvexPolygon {
            vertices: (0..sides)
                .map(|k| self.center + Point2::from_polar(self.radius, step * T::of_usize(k)))
                .collect(),
        }
    }
}

/// Index of the point nearest to `query`; ties go to the lowest index.
pub fn nearest_brute_force<T: Real>(points: &[Point2<T>], query: Point2<T>) -> Option<usize> {
    let mut best: Option<(T, usize)> = None;
    for (i, p) in points.iter().enumerate() {
        let d = p.dist_sq(query);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, i));
        }
    }
    best.map(|(_, i)| i)
}

/// Uniform bucket grid for nearest-point queries over a fixed point set.
#[derive(Debug, Clone)]
pub struct NearestIndex<T> {
    origin: Point2<T>,
    cell: T,
    cols: usize,
    rows: usize,
    /// Start offsets into `items`, one per bucket plus a sentinel.
    offsets: Vec<usize>,
    items: Vec<usize>,
    points: Vec<Point2<T>>,
}

impl<T: Real> NearestIndex<T> {
    /// Builds an index over `points`, sized for roughly one point per bucket
    /// inside `window`.
    pub fn new(points: &[Point2<T>], window: &SimWindow<T>) -> Self {
        let side = window.radius + window.radius;
        let per_axis = (T::of_usize(points.len().max(1))).sqrt().ceil();
        let cols = per_axis.to_usize().unwrap_or(1).clamp(1, 1024);
        let rows = cols;
        let cell = side / T::of_usize(cols);
        let origin = Point2::new(window.center.x - window.radius, window.center.y - window.radius);

        let mut counts = vec![0usize; cols * rows + 1];
        let buckets: Vec<usize> = points
            .iter()
            .map(|&p| {
                let (c, r) = Self::bucket_of(origin, cell, cols, rows, p);
                r * cols + c
            })
            .collect();
        for &b in &buckets {
            counts[b + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let mut items = vec![0usize; points.len()];
        for (i, &b) in buckets.iter().enumerate() {
            items[fill[b]] = i;
            fill[b] += 1;
        }
        Self {
            origin,
            cell,
            cols,
            rows,
            offsets,
            items,
            points: points.to_vec(),
        }
    }

    fn bucket_of(origin: Point2<T>, cell: T, cols: usize, rows: usize, p: Point2<T>) -> (usize, usize) {
        let fx = ((p.x - origin.x) / cell).floor().to_isize().unwrap_or(0);
        let fy = ((p.y - origin.y) / cell).floor().to_isize().unwrap_or(0);
        (
            fx.clamp(0, cols as isize - 1) as usize,
            fy.clamp(0, rows as isize - 1) as usize,
        )
    }

    pub fn points(&self) -> &[Point2<T>] {
        &self.points
    }

    /// Nearest indexed point; ties go to the lowest index. `None` when empty.
    pub fn nearest(&self, query: Point2<T>) -> Option<usize> {
        if self.points.is_empty() {
            return None;
        }
        let (qc, qr) = Self::bucket_of(self.origin, self.cell, self.cols, self.rows, query);
        let mut best: Option<(T, usize)> = None;
        let max_ring = self.cols.max(self.rows);
        for ring in 0..=max_ring {
            self.scan_ring(qc as isize, qr as isize, ring as isize, query, &mut best);
            if let Some((bd, _)) = best {
                // Unscanned points lie beyond the edges of the block of
                // buckets `q -+ ring` that still have buckets behind them.
                let inf = T::infinity();
                let edge = |o: T, b: usize| o + self.cell * T::of_usize(b);
                let left = if qc > ring { query.x - edge(self.origin.x, qc - ring) } else { inf };
                let right = if qc + ring + 1 < self.cols { edge(self.origin.x, qc + ring + 1) - query.x } else { inf };
                let down = if qr > ring { query.y - edge(self.origin.y, qr - ring) } else { inf };
                let up = if qr + ring + 1 < self.rows { edge(self.origin.y, qr + ring + 1) - query.y } else { inf };
                let reach = left.min(right).min(down).min(up);
                let covered = reach == inf;
                if covered || (reach > T::zero() && reach * reach > bd) {
                    break;
                }
            }
        }
        best.map(|(_, i)| i)
    }

    /// Nearest indexed point for every query, as [`NearestIndex::nearest`].
    ///
    /// Each bucket keeps the points that can be nearest to anything inside
    /// it: with `d` the distance from the bucket centre to its nearest
    /// point and `h` the half diagonal, those all lie within `d + 2h` of
    /// the centre. Queries then scan only that short list.
    pub fn nearest_all(&self, queries: &[Point2<T>]) -> Option<Vec<usize>> {
        if self.points.is_empty() {
            return None;
        }
        let half_diag = self.cell * T::of(std::f64::consts::FRAC_1_SQRT_2);
        let mut lists: Vec<Option<Vec<usize>>> = vec![None; self.cols * self.rows];
        let w = self.cell * T::of_usize(self.cols);
        let h = self.cell * T::of_usize(self.rows);
        let out = queries
            .iter()
            .map(|&q| {
                let inside = q.x >= self.origin.x && q.y >= self.origin.y && q.x < self.origin.x + w && q.y < self.origin.y + h;
                if !inside {
                    return self.nearest(q).expect("non-empty");
                }
                let (c, r) = Self::bucket_of(self.origin, self.cell, self.cols, self.rows, q);
                let list = lists[r * self.cols + c].get_or_insert_with(|| self.candidates(c, r, half_diag));
                let mut best = (T::infinity(), usize::MAX);
                for &i in list.iter() {
                    let d = self.points[i].dist_sq(q);
                    if d < best.0 || (d == best.0 && i < best.1) {
                        best = (d, i);
                    }
                }
                best.1
            })
            .collect();
        Some(out)
    }

    fn candidates(&self, c: usize, r: usize, half_diag: T) -> Vec<usize> {
        let half = T::of(0.5);
        let center = Point2::new(
            self.origin.x + self.cell * (T::of_usize(c) + half),
            self.origin.y + self.cell * (T::of_usize(r) + half),
        );
        let nearest = self.nearest(center).expect("non-empty");
        // Small slack so rounding cannot drop a tied point.
        let reach = (self.points[nearest].dist(center) + half_diag + half_diag) * T::of(1.0 + 1e-9) + self.cell * T::of(1e-9);
        let reach_sq = reach * reach;
        let rings = (reach / self.cell).ceil().to_usize().unwrap_or(self.cols).min(self.cols.max(self.rows)) + 1;
        let mut list = Vec::new();
        for ring in 0..=rings as isize {
            self.for_ring(c as isize, r as isize, ring, |i| {
                if self.points[i].dist_sq(center) <= reach_sq {
                    list.push(i);
                }
            });
        }
        list
    }

    fn for_ring(&self, qc: isize, qr: isize, ring: isize, mut f: impl FnMut(usize)) {
        let mut visit = |c: isize, r: isize| {
            if c < 0 || r < 0 || c >= self.cols as isize || r >= self.rows as isize {
                return;
            }
            let b = r as usize * self.cols + c as usize;
            for &i in &self.items[self.offsets[b]..self.offsets[b + 1]] {
                f(i);
            }
        };
        if ring == 0 {
            visit(qc, qr);
            return;
        }
        for c in (qc - ring)..=(qc + ring) {
            visit(c, qr - ring);
            visit(c, qr + ring);
        }
        for r in (qr - ring + 1)..=(qr + ring - 1) {
            visit(qc - ring, r);
            visit(qc + ring, r);
        }
    }

    fn scan_ring(&self, qc: isize, qr: isize, ring: isize, query: Point2<T>, best: &mut Option<(T, usize)>) {
        self.for_ring(qc, qr, ring, |i| {
            let d = self.points[i].dist_sq(query);
            let better = match *best {
                None => true,
                Some((bd, bi)) => d < bd || (d == bd && i < bi),
            };
            if better {
                *best = Some((d, i));
            }
        });
    }
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon<T> {
    pub vertices: Vec<Point2<T>>,
}

impl<T: Real> ConvexPolygon<T> {
    pub fn area(&self) -> T {
        let n = self.vertices.len();
        if n < 3 {
            return T::zero();
        }
        let twice: T = (0..n)
            .map(|i| self.vertices[i].cross(self.vertices[(i + 1) % n]))
            .sum();
        twice.abs() / T::of(2.0)
    }

    pub fn contains(&self, p: Point2<T>) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            (b - a).cross(p - a) >= T::zero()
        })
    }

    /// Largest vertex distance from `p`.
    pub fn max_distance_from(&self, p: Point2<T>) -> T {
        self.vertices
            .iter()
            .map(|v| v.dist(p))
            .fold(T::zero(), T::max)
    }

    /// Keeps the part satisfying `normal · x <= offset` (Sutherland–Hodgman).
    pub fn clip_half_plane(&self, normal: Point2<T>, offset: T) -> Self {
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let fa = normal.dot(a) - offset;
            let fb = normal.dot(b) - offset;
            if fa <= T::zero() {
                out.push(a);
            }
            if (fa < T::zero() && fb > T::zero()) || (fa > T::zero() && fb < T::zero()) {
                let t = fa / (fa - fb);
                out.push(a + (b - a) * t);
            }
        }
        Self { vertices: out }
    }

    /// Intersection with another convex polygon.
    pub fn intersect(&self, other: &Self) -> Self {
        let n = other.vertices.len();
        let mut poly = self.clone();
        for i in 0..n {
            let a = other.vertices[i];
            let b = other.vertices[(i + 1) % n];
            let edge = b - a;
            // Interior is on the left of each counter-clockwise edge.
            let normal = Point2::new(edge.y, -edge.x);
            poly = poly.clip_half_plane(normal, normal.dot(a));
            if poly.vertices.is_empty() {
                break;
            }
        }
        poly
    }
}

/// Voronoi cell of `sites[index]` intersected with `bound`.
pub fn voronoi_cell<T: Real>(sites: &[Point2<T>], index: usize, bound: &ConvexPolygon<T>) -> ConvexPolygon<T> {
    let s = sites[index];
    let mut others: Vec<(T, usize)> = sites
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != index)
        .map(|(j, p)| (p.dist_sq(s), j))
        .collect();
    others.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));

    let mut poly = bound.clone();
    for (d2, j) in others {
        // A bisector lies at half the site distance; once that exceeds the
        // farthest vertex it cannot cut the polygon any more.
        let reach = poly.max_distance_from(s);
        if d2 > T::of(4.0) * reach * reach {
            break;
        }
        let q = sites[j];
        let normal = q - s;
        let offset = (q.norm_sq() - s.norm_sq()) / T::of(2.0);
        poly = poly.clip_half_plane(normal, offset);
        if poly.vertices.is_empty() {
            break;
        }
    }
    poly
}

/// Area of the Voronoi cell of `sites[index]` inside the circular window.
pub fn cell_area_in_window<T: Real>(sites: &[Point2<T>], index: usize, window: &SimWindow<T>) -> T {
    let cell = voronoi_cell(sites, index, &window.bounding_square());
    if cell.vertices.iter().all(|&v| window.contains(v)) {
        cell.area()
    } else {
        cell.intersect(&window.inscribed_polygon(720)).area()
    }
}
