//! Product compacta in ℂᵈ and deterministic boundary sampling.
//!
//! A [`PlanarCompact`] is a disc, segment, or closed polygon in ℂ; a
//! [`ProductCompact`] is a finite (possibly empty) product of planar factors.
//! Sup norms over these sets are estimated on deterministic boundary grids;
//! per-monomial sup bounds use the exact per-factor radius, so they are upper
//! bounds rather than sampled estimates.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CompactError {
    #[error("disc radius must be finite and positive, got {0}")]
    InvalidRadius(f64),
    #[error("compact coordinates must be finite")]
    NonFiniteCoordinate,
    #[error("segment endpoints must be distinct")]
    DegenerateSegment,
    #[error("polygon needs at least 3 vertices, got {0}")]
    PolygonTooFewVertices(usize),
    #[error("polygon boundary must be simple; edges {first} and {second} cross")]
    SelfIntersectingPolygon { first: usize, second: usize },
    #[error("sample grid would hold {requested} points, above the cap of {cap}")]
    GridTooLarge { requested: u128, cap: u64 },
}

/// A compact subset of ℂ: disc, segment, or filled closed polygon.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanarCompact {
    Disc { center: Complex64, radius: f64 },
    Segment { a: Complex64, b: Complex64 },
    Polygon { vertices: Vec<Complex64> },
}

impl PlanarCompact {
    pub fn disc(center: Complex64, radius: f64) -> Result<Self, CompactError> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(CompactError::InvalidRadius(radius));
        }
        if !center.re.is_finite() || !center.im.is_finite() {
            return Err(CompactError::NonFiniteCoordinate);
        }
        Ok(PlanarCompact::Disc { center, radius })
    }

    pub fn segment(a: Complex64, b: Complex64) -> Result<Self, CompactError> {
        for p in [a, b] {
            if !p.re.is_finite() || !p.im.is_finite() {
                return Err(CompactError::NonFiniteCoordinate);
            }
        }
        if a == b {
            return Err(CompactError::DegenerateSegment);
        }
        Ok(PlanarCompact::Segment { a, b })
    }

    pub fn polygon(vertices: Vec<Complex64>) -> Result<Self, CompactError> {
        if vertices.len() < 3 {
            return Err(CompactError::PolygonTooFewVertices(vertices.len()));
        }
        if vertices
            .iter()
            .any(|p| !p.re.is_finite() || !p.im.is_finite())
        {
            return Err(CompactError::NonFiniteCoordinate);
        }
        let n = vertices.len();
        let edges: Vec<(Complex64, Complex64)> = vertices
            .iter()
            .zip(vertices.iter().cycle().skip(1))
            .map(|(a, b)| (*a, *b))
            .collect();
        for i in 0..n {
            for j in (i + 1)..n {
                // Edges that share a vertex (consecutive around the closed
                // loop) may touch at that vertex; all other pairs must stay
                // disjoint for the boundary to be simple.
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if !adjacent && segments_intersect(edges[i], edges[j]) {
                    return Err(CompactError::SelfIntersectingPolygon {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        Ok(PlanarCompact::Polygon { vertices })
    }

    /// Exact sup of |z| over the compact.
    pub fn sup_abs(&self) -> f64 {
        match self {
            PlanarCompact::Disc { center, radius } => center.norm() + radius,
            PlanarCompact::Segment { a, b } => a.norm().max(b.norm()),
            PlanarCompact::Polygon { vertices } => {
                vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
            }
        }
    }

    /// Max of |z| over `count` boundary samples (offset 0).
    pub fn sampled_sup_abs(&self, count: usize) -> f64 {
        self.boundary_samples(count, 0.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Closed-set membership with a 1e−12 boundary tolerance.
    pub fn contains(&self, z: Complex64) -> bool {
        const EPS: f64 = 1e-12;
        match self {
            PlanarCompact::Disc { center, radius } => (z - center).norm() <= radius + EPS,
            PlanarCompact::Segment { a, b } => segment_distance_to_origin(a - z, b - z) <= EPS,
            PlanarCompact::Polygon { vertices } => {
                let on_boundary = closed_edges(vertices)
                    .any(|(a, b)| segment_distance_to_origin(a - z, b - z) <= EPS);
                let shifted: Vec<Complex64> = vertices.iter().map(|v| v - z).collect();
                on_boundary || origin_inside(&shifted)
            }
        }
    }

    /// True when 0 is not in the compact.
    pub fn excludes_zero(&self) -> bool {
        !self.contains(Complex64::new(0.0, 0.0))
    }

    /// `count` deterministic boundary points; `offset` in [0, 1) rotates the
    /// pattern by a fraction of one step so distinct grids avoid shared nodes.
    pub fn boundary_samples(&self, count: usize, offset: f64) -> Vec<Complex64> {
        let count = count.max(1);
        match self {
            PlanarCompact::Disc { center, radius } => {
                if *radius == 0.0 {
                    return vec![*center];
                }
                (0..count)
                    .map(|j| {
                        let theta = 2.0 * std::f64::consts::PI * (j as f64 + offset) / count as f64;
                        center + radius * Complex64::new(theta.cos(), theta.sin())
                    })
                    .collect()
            }
            PlanarCompact::Segment { a, b } => {
                if a == b {
                    return vec![*a];
                }
                if offset == 0.0 {
                    if count == 1 {
                        return vec![(a + b) / 2.0];
                    }
                    (0..count)
                        .map(|j| a + (b - a) * (j as f64 / (count - 1) as f64))
                        .collect()
                } else {
                    (0..count)
                        .map(|j| a + (b - a) * ((j as f64 + offset) / count as f64))
                        .collect()
                }
            }
            PlanarCompact::Polygon { vertices } => {
                let edges: Vec<(Complex64, Complex64)> = closed_edges(vertices).collect();
                let lengths: Vec<f64> = edges.iter().map(|(a, b)| (b - a).norm()).collect();
                let total: f64 = lengths.iter().sum();
                if total == 0.0 {
                    return vec![vertices[0]];
                }
                (0..count)
                    .map(|j| {
                        let mut s = total * (j as f64 + offset) / count as f64;
                        for (edge, len) in edges.iter().zip(&lengths) {
                            if s <= *len || std::ptr::eq(edge, edges.last().unwrap()) {
                                let t = if *len == 0.0 { 0.0 } else { (s / len).min(1.0) };
                                return edge.0 + (edge.1 - edge.0) * t;
                            }
                            s -= len;
                        }
                        vertices[0]
                    })
                    .collect()
            }
        }
    }
}

fn closed_edges(vertices: &[Complex64]) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
    (0..vertices.len()).map(move |i| (vertices[i], vertices[(i + 1) % vertices.len()]))
}

fn segment_distance_to_origin(a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return a.norm();
    }
    let t = ((-a.re * ab.re - a.im * ab.im) / len2).clamp(0.0, 1.0);
    (a + ab * t).norm()
}

/// Closed-segment intersection test, including endpoint touches and overlaps.
fn segments_intersect(p: (Complex64, Complex64), q: (Complex64, Complex64)) -> bool {
    let dist =
        |s: (Complex64, Complex64), z: Complex64| segment_distance_to_origin(s.0 - z, s.1 - z);
    let cross = |o: Complex64, a: Complex64, b: Complex64| {
        (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
    };
    let d1 = cross(p.0, p.1, q.0);
    let d2 = cross(p.0, p.1, q.1);
    let d3 = cross(q.0, q.1, p.0);
    let d4 = cross(q.0, q.1, p.1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    const EPS: f64 = 1e-12;
    dist(p, q.0) <= EPS || dist(p, q.1) <= EPS || dist(q, p.0) <= EPS || dist(q, p.1) <= EPS
}

/// Even-odd ray cast along the positive real axis.
fn origin_inside(vertices: &[Complex64]) -> bool {
    let mut inside = false;
    for (a, b) in closed_edges(vertices) {
        if (a.im > 0.0) != (b.im > 0.0) {
            let x_cross = a.re + (0.0 - a.im) / (b.im - a.im) * (b.re - a.re);
            if x_cross > 0.0 {
                inside = !inside;
            }
        }
    }
    inside
}

/// Finite product of planar compacta; the empty product is a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductCompact {
    factors: Vec<PlanarCompact>,
}

impl ProductCompact {
    pub fn new(factors: Vec<PlanarCompact>) -> Self {
        ProductCompact { factors }
    }

    /// The empty product: one point, no coordinates.
    pub fn point() -> Self {
        ProductCompact {
            factors: Vec::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[PlanarCompact] {
        &self.factors
    }

    /// Index of the preferred factor whose compact excludes 0: smallest
    /// sampled sup |z| (256 boundary points) wins, ties broken by index.
    pub fn zero_free_factor(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, f) in self.factors.iter().enumerate() {
            if f.excludes_zero() {
                let sup = f.sampled_sup_abs(256);
                if best.is_none_or(|(_, s)| sup < s) {
                    best = Some((i, sup));
                }
            }
        }
        best.map(|(i, _)| i)
    }

    /// Exact upper bound for sup |z^m| over the product.
    pub fn monomial_sup(&self, exponents: &[u32]) -> f64 {
        assert_eq!(
            exponents.len(),
            self.factors.len(),
            "exponent arity mismatch"
        );
        self.factors
            .iter()
            .zip(exponents)
            .map(|(f, &e)| f.sup_abs().powi(e as i32))
            .product()
    }

    /// Per-factor boundary samples with the shared offset.
    pub fn factor_samples(&self, counts: &[usize], offset: f64) -> Vec<Vec<Complex64>> {
        assert_eq!(counts.len(), self.factors.len(), "count arity mismatch");
        self.factors
            .iter()
            .zip(counts)
            .map(|(f, &c)| f.boundary_samples(c, offset))
            .collect()
    }

    /// Full product grid over per-factor boundary samples.
    pub fn boundary_grid(
        &self,
        counts: &[usize],
        offset: f64,
        cap: u64,
    ) -> Result<SampleGrid, CompactError> {
        product_grid(&self.factor_samples(counts, offset), cap)
    }
}

/// Flat point list over a product of factors: `arity` coordinates per point.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    arity: usize,
    n_points: usize,
    data: Vec<Complex64>,
}

impl SampleGrid {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Coordinates of point `i` as a slice of length `arity`.
    pub fn point(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.arity..(i + 1) * self.arity]
    }

    pub fn points(&self) -> impl Iterator<Item = &[Complex64]> {
        (0..self.n_points).map(move |i| self.point(i))
    }
}

/// Cartesian product of per-factor sample lists; earlier factors vary slowest.
pub fn product_grid(
    factor_samples: &[Vec<Complex64>],
    cap: u64,
) -> Result<SampleGrid, CompactError> {
    let mut total: u128 = 1;
    for s in factor_samples {
        total *= s.len().max(1) as u128;
    }
    if total > cap as u128 {
        return Err(CompactError::GridTooLarge {
            requested: total,
            cap,
        });
    }
    let arity = factor_samples.len();
    let n_points = total as usize;
    let mut data = Vec::with_capacity(arity * n_points);
    let mut cursor = vec![0usize; arity];
    for _ in 0..n_points {
        for (v, &c) in cursor.iter().enumerate() {
            data.push(factor_samples[v][c]);
        }
        for v in (0..arity).rev() {
            cursor[v] += 1;
            if cursor[v] < factor_samples[v].len() {
                break;
            }
            cursor[v] = 0;
        }
    }
    Ok(SampleGrid {
        arity,
        n_points,
        data,
    })
}
