//! Planar domains, membership tests and Halton point generation.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};

/// A point (or vector) in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn dist2(self, other: Point2) -> f64 {
        let d = self - other;
        d.x * d.x + d.y * d.y
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Axis-aligned rectangle `[ax, bx] x [ay, by]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub ax: f64,
    pub bx: f64,
    pub ay: f64,
    pub by: f64,
}

impl Rect {
    pub fn new(ax: f64, bx: f64, ay: f64, by: f64) -> Result<Self> {
        if ![ax, bx, ay, by].iter().all(|v| v.is_finite()) {
            return Err(Error::Value("rectangle bounds must be finite".into()));
        }
        if !(ax < bx && ay < by) {
            return Err(Error::Value(format!(
                "degenerate rectangle [{ax}, {bx}] x [{ay}, {by}]"
            )));
        }
        Ok(Self { ax, bx, ay, by })
    }

    pub fn unit() -> Self {
        Self {
            ax: 0.0,
            bx: 1.0,
            ay: 0.0,
            by: 1.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.bx - self.ax
    }

    pub fn height(&self) -> f64 {
        self.by - self.ay
    }

    pub fn center(&self) -> Point2 {
        Point2::new(0.5 * (self.ax + self.bx), 0.5 * (self.ay + self.by))
    }

    pub fn half_diagonal(&self) -> f64 {
        0.5 * self.width().hypot(self.height())
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.ax && p.x <= self.bx && p.y >= self.ay && p.y <= self.by
    }

    /// Squared distance from `p` to the closed rectangle (zero inside).
    pub fn dist2_to(&self, p: Point2) -> f64 {
        let dx = (self.ax - p.x).max(0.0).max(p.x - self.bx);
        let dy = (self.ay - p.y).max(0.0).max(p.y - self.by);
        dx * dx + dy * dy
    }

    pub fn corners(&self) -> [Point2; 4] {
        [
            Point2::new(self.ax, self.ay),
            Point2::new(self.bx, self.ay),
            Point2::new(self.bx, self.by),
            Point2::new(self.ax, self.by),
        ]
    }
}

/// Closed disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disk {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl Disk {
    pub fn new(cx: f64, cy: f64, r: f64) -> Result<Self> {
        if ![cx, cy, r].iter().all(|v| v.is_finite()) {
            return Err(Error::Value("disk parameters must be finite".into()));
        }
        if r <= 0.0 {
            return Err(Error::Value(format!(
                "disk radius must be positive, got {r}"
            )));
        }
        Ok(Self { cx, cy, r })
    }

    pub fn center(&self) -> Point2 {
        Point2::new(self.cx, self.cy)
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.dist2(self.center()) <= self.r * self.r
    }

    pub fn strictly_contains(&self, p: Point2) -> bool {
        p.dist2(self.center()) < self.r * self.r
    }

    pub fn bbox(&self) -> Rect {
        Rect {
            ax: self.cx - self.r,
            bx: self.cx + self.r,
            ay: self.cy - self.r,
            by: self.cy + self.r,
        }
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.r * self.r
    }
}

/// Area of the intersection of two disks.
fn lens_area(a: &Disk, b: &Disk) -> f64 {
    let d = a.center().dist(b.center());
    let (r1, r2) = (a.r, b.r);
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return std::f64::consts::PI * r * r;
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1))
        .clamp(-1.0, 1.0)
        .acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2))
        .clamp(-1.0, 1.0)
        .acos();
    let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0);
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k.sqrt()
}

/// Compact integration region.
///
/// `DiskDifference` is the outer closed disk with the *open* inner disk
/// removed, so points on the inner circle belong to the region. This covers
/// both annuli (inner disk inside) and lunes (inner disk crossing the outer
/// circle).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Rectangle(Rect),
    Disk(Disk),
    DiskDifference { outer: Disk, inner: Disk },
}

impl Domain {
    pub fn rectangle(ax: f64, bx: f64, ay: f64, by: f64) -> Result<Self> {
        Rect::new(ax, bx, ay, by).map(Domain::Rectangle)
    }

    pub fn unit_square() -> Self {
        Domain::Rectangle(Rect::unit())
    }

    pub fn disk(cx: f64, cy: f64, r: f64) -> Result<Self> {
        Disk::new(cx, cy, r).map(Domain::Disk)
    }

    pub fn disk_difference(outer: Disk, inner: Disk) -> Result<Self> {
        // Empty iff the outer disk sits inside the closed inner disk.
        let d = outer.center().dist(inner.center());
        if d + outer.r <= inner.r {
            return Err(Error::Value("disk difference is empty".into()));
        }
        Ok(Domain::DiskDifference { outer, inner })
    }

    pub fn bbox(&self) -> Rect {
        match self {
            Domain::Rectangle(r) => *r,
            Domain::Disk(d) => d.bbox(),
            Domain::DiskDifference { outer, .. } => outer.bbox(),
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        match self {
            Domain::Rectangle(r) => r.contains(p),
            Domain::Disk(d) => d.contains(p),
            Domain::DiskDifference { outer, inner } => {
                outer.contains(p) && !inner.strictly_contains(p)
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Domain::Rectangle(r) => r.area(),
            Domain::Disk(d) => d.area(),
            Domain::DiskDifference { outer, inner } => outer.area() - lens_area(outer, inner),
        }
    }

    /// Distance from a point of the region to its boundary.
    pub fn boundary_distance(&self, p: Point2) -> f64 {
        match self {
            Domain::Rectangle(r) => (p.x - r.ax).min(r.bx - p.x).min(p.y - r.ay).min(r.by - p.y),
            Domain::Disk(d) => d.r - p.dist(d.center()),
            Domain::DiskDifference { outer, inner } => {
                (outer.r - p.dist(outer.center())).min(p.dist(inner.center()) - inner.r)
            }
        }
    }

    /// Conservative test whether the closed rectangle `cell` meets the region.
    /// Exact for rectangles and disks; for disk differences a cell that
    /// meets the outer disk is kept unless it lies strictly inside the
    /// removed disk.
    pub fn meets_rect(&self, cell: &Rect) -> bool {
        match self {
            Domain::Rectangle(r) => {
                cell.ax <= r.bx && cell.bx >= r.ax && cell.ay <= r.by && cell.by >= r.ay
            }
            Domain::Disk(d) => cell.dist2_to(d.center()) <= d.r * d.r,
            Domain::DiskDifference { outer, inner } => {
                cell.dist2_to(outer.center()) <= outer.r * outer.r
                    && !cell.corners().iter().all(|&c| inner.strictly_contains(c))
            }
        }
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("domain spec '{s}' lacks a ':' separator")))?;
        let nums = rest
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number '{t}' in domain spec")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let expect = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "domain '{kind}' expects {n} numbers, got {}",
                    nums.len()
                )))
            }
        };
        match kind.trim() {
            "rect" => {
                expect(4)?;
                Domain::rectangle(nums[0], nums[1], nums[2], nums[3])
            }
            "disk" => {
                expect(3)?;
                Domain::disk(nums[0], nums[1], nums[2])
            }
            "diskdiff" => {
                expect(6)?;
                let outer = Disk::new(nums[0], nums[1], nums[2])?;
                let inner = Disk::new(nums[3], nums[4], nums[5])?;
                Domain::disk_difference(outer, inner)
            }
            other => Err(Error::Config(format!("unknown domain kind '{other}'"))),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Rectangle(r) => write!(f, "rect:{},{},{},{}", r.ax, r.bx, r.ay, r.by),
            Domain::Disk(d) => write!(f, "disk:{},{},{}", d.cx, d.cy, d.r),
            Domain::DiskDifference { outer: o, inner: i } => write!(
                f,
                "diskdiff:{},{},{},{},{},{}",
                o.cx, o.cy, o.r, i.cx, i.cy, i.r
            ),
        }
    }
}

/// Scattered sites with optional sampled values.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    points: Vec<Point2>,
    values: Option<Vec<f64>>,
}

impl PointSet {
    /// Builds a point set, rejecting non-finite coordinates and duplicates.
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Value("point set must not be empty".into()));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::Value(format!(
                "point {i} has a non-finite coordinate"
            )));
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| {
            let (p, q) = (points[a], points[b]);
            p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y))
        });
        if let Some(w) = order.windows(2).find(|w| points[w[0]] == points[w[1]]) {
            return Err(Error::Value(format!(
                "points {} and {} coincide",
                w[0].min(w[1]),
                w[0].max(w[1])
            )));
        }
        Ok(Self {
            points,
            values: None,
        })
    }

    pub fn with_values(points: Vec<Point2>, values: Vec<f64>) -> Result<Self> {
        Self::new(points)?.set_values(values)
    }

    /// Attaches values, replacing any present.
    pub fn set_values(mut self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.points.len() {
            return Err(Error::Value(format!(
                "{} values for {} points",
                values.len(),
                self.points.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Value(format!("value {i} is not finite")));
        }
        self.values = Some(values);
        Ok(self)
    }

    /// Samples `f` at every point.
    pub fn sample(self, f: impl Fn(Point2) -> f64) -> Result<Self> {
        let values = self.points.iter().map(|&p| f(p)).collect();
        self.set_values(values)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    /// Values, or an error naming the operation that needed them.
    pub fn require_values(&self) -> Result<&[f64]> {
        self.values()
            .ok_or_else(|| Error::Value("point set carries no sample values".into()))
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, &p) in self.points.iter().enumerate() {
            for &q in &self.points[i + 1..] {
                best = best.max(p.dist2(q));
            }
        }
        best.sqrt()
    }

    /// Smallest pairwise distance (infinite for a single point).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, &p) in self.points.iter().enumerate() {
            for &q in &self.points[i + 1..] {
                best = best.min(p.dist2(q));
            }
        }
        best.sqrt()
    }

    /// Keeps the entries selected by `keep`, preserving order.
    fn retain_indices(&self, keep: &[usize]) -> Self {
        Self {
            points: keep.iter().map(|&i| self.points[i]).collect(),
            values: self
                .values
                .as_ref()
                .map(|v| keep.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Base-`b` radical inverse of `i`, computed as an exact integer ratio.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut reversed: u64 = 0;
    let mut denom: u64 = 1;
    while i > 0 {
        reversed = reversed * base + i % base;
        denom *= base;
        i /= base;
    }
    reversed as f64 / denom as f64
}

/// The 2-D Halton points with indices `skip + 1 ..= skip + n_points`.
pub fn halton(n_points: usize, skip: usize) -> Result<PointSet> {
    if n_points == 0 {
        return Err(Error::Value("halton needs at least one point".into()));
    }
    let points = (skip + 1..=skip + n_points)
        .map(|i| {
            let i = i as u64;
            Point2::new(radical_inverse(i, 2), radical_inverse(i, 3))
        })
        .collect();
    PointSet::new(points)
}

/// Subsequence of `candidates` lying in the closed region.
pub fn filter_to_domain(candidates: &PointSet, domain: &Domain) -> Result<PointSet> {
    let keep: Vec<usize> = candidates
        .points()
        .iter()
        .enumerate()
        .filter(|(_, &p)| domain.contains(p))
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyResult);
    }
    Ok(candidates.retain_indices(&keep))
}

/// Affine image of unit-square points on the domain's bounding box.
pub fn map_to_bbox(unit_points: &PointSet, domain: &Domain) -> PointSet {
    let b = domain.bbox();
    let points = unit_points
        .points()
        .iter()
        .map(|p| Point2::new(b.ax + p.x * b.width(), b.ay + p.y * b.height()))
        .collect();
    PointSet {
        points,
        values: unit_points.values.clone(),
    }
}

/// Inverse of [`map_to_bbox`].
pub fn map_from_bbox(points: &PointSet, domain: &Domain) -> PointSet {
    let b = domain.bbox();
    let points = points
        .points()
        .iter()
        .map(|p| Point2::new((p.x - b.ax) / b.width(), (p.y - b.ay) / b.height()))
        .collect();
    PointSet {
        points,
        values: None,
    }
}
