//! Background metrics and integration domains.
//!
//! Three conformal metrics on an affine chart: Fubini-Study on the sphere
//! (total area pi), a flat Euclidean metric on the plane, and the hyperbolic
//! metric on the unit disk. Domains are disks, annuli, or simple polygons in
//! the chart; spherical regions containing infinity are handled by
//! complementation rather than a second chart.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::{gauss_legendre, gauss_legendre_2pt, KahanSum};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("boundary quadrature needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),
}

/// Smallest admissible polygon interior angle, in radians. Corners sharper
/// than this count as cusps and are rejected.
pub const MIN_CORNER_ANGLE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    #[serde(rename = "fs")]
    FubiniStudy,
    Flat,
    Hyperbolic,
}

/// A conformal background metric `omega = rho(z) dx dy` on the chart.
///
/// `scale` multiplies the flat area form (the curvature multiple carried by
/// an ensemble, when a caller wants it); it is fixed to 1 for the other two
/// models.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometryModel {
    pub kind: GeometryKind,
    pub scale: f64,
}

impl GeometryModel {
    pub fn fubini_study() -> Self {
        Self { kind: GeometryKind::FubiniStudy, scale: 1.0 }
    }

    pub fn flat() -> Self {
        Self { kind: GeometryKind::Flat, scale: 1.0 }
    }

    pub fn flat_with_scale(scale: f64) -> Self {
        assert!(scale > 0.0, "flat metric scale must be positive");
        Self { kind: GeometryKind::Flat, scale }
    }

    pub fn hyperbolic() -> Self {
        Self { kind: GeometryKind::Hyperbolic, scale: 1.0 }
    }

    /// Area density `rho(z)` of `omega` against Lebesgue measure `dx dy`.
    pub fn area_density(&self, z: Complex64) -> f64 {
        match self.kind {
            GeometryKind::FubiniStudy => {
                let d = 1.0 + z.norm_sqr();
                1.0 / (d * d)
            }
            GeometryKind::Flat => self.scale,
            GeometryKind::Hyperbolic => {
                let d = 1.0 - z.norm_sqr();
                debug_assert!(d > 0.0, "hyperbolic metric evaluated outside the disk");
                1.0 / (d * d)
            }
        }
    }

    /// Length density: the Riemannian length element is `length_density(z) |dz|`.
    pub fn length_density(&self, z: Complex64) -> f64 {
        match self.kind {
            GeometryKind::FubiniStudy => 1.0 / (1.0 + z.norm_sqr()),
            GeometryKind::Flat => self.scale.sqrt(),
            GeometryKind::Hyperbolic => 1.0 / (1.0 - z.norm_sqr()),
        }
    }

    /// Geodesic distance between two chart points.
    pub fn distance(&self, z: Complex64, w: Complex64) -> f64 {
        match self.kind {
            GeometryKind::FubiniStudy => {
                let num = (z - w).norm();
                let den = (Complex64::new(1.0, 0.0) + z.conj() * w).norm();
                (num / den).atan()
            }
            GeometryKind::Flat => self.scale.sqrt() * (z - w).norm(),
            GeometryKind::Hyperbolic => {
                let num = (z - w).norm();
                let den = (Complex64::new(1.0, 0.0) - z.conj() * w).norm();
                (num / den).atanh()
            }
        }
    }

    /// Radial potential `h(r)` with `curl[( -y, x ) h] = rho`; used to turn
    /// area integrals into boundary line integrals.
    fn area_potential(&self, r_sqr: f64) -> f64 {
        match self.kind {
            GeometryKind::FubiniStudy => 0.5 / (1.0 + r_sqr),
            GeometryKind::Flat => 0.5 * self.scale,
            GeometryKind::Hyperbolic => 0.5 / (1.0 - r_sqr),
        }
    }

    /// Total area of the model surface, when finite.
    pub fn total_area(&self) -> Option<f64> {
        match self.kind {
            GeometryKind::FubiniStudy => Some(std::f64::consts::PI),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Disk { center: Complex64, radius: f64 },
    Annulus { center: Complex64, r_in: f64, r_out: f64 },
    Polygon { vertices: Vec<Complex64> },
}

/// Classification of a point against a domain at a caller-supplied tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Outside,
    Boundary,
}

/// A region of the model surface: a chart shape under a background metric,
/// possibly complemented (Fubini-Study only; the complement of a chart shape
/// is the region through infinity).
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    shape: Shape,
    geometry: GeometryModel,
    complemented: bool,
}

/// One directed boundary piece with constant chart speed.
#[derive(Clone, Copy, Debug)]
pub(crate) enum BoundaryArc {
    /// Circle traversed from `start_angle` through `start_angle + sweep`
    /// (sweep is `+2pi` counterclockwise, `-2pi` clockwise).
    Circle { center: Complex64, radius: f64, start_angle: f64, sweep: f64 },
    Segment { a: Complex64, b: Complex64 },
}

impl BoundaryArc {
    pub(crate) fn point(&self, t: f64) -> Complex64 {
        match *self {
            BoundaryArc::Circle { center, radius, start_angle, sweep } => {
                let th = start_angle + sweep * t;
                center + Complex64::from_polar(radius, th)
            }
            BoundaryArc::Segment { a, b } => a + (b - a) * t,
        }
    }

    /// dz/dt; the chart speed |dz/dt| is constant on each arc.
    pub(crate) fn velocity(&self, t: f64) -> Complex64 {
        match *self {
            BoundaryArc::Circle { center: _, radius, start_angle, sweep } => {
                let th = start_angle + sweep * t;
                Complex64::new(0.0, sweep) * Complex64::from_polar(radius, th)
            }
            BoundaryArc::Segment { a, b } => b - a,
        }
    }

    pub(crate) fn chart_length(&self) -> f64 {
        match *self {
            BoundaryArc::Circle { radius, sweep, .. } => radius * sweep.abs(),
            BoundaryArc::Segment { a, b } => (b - a).norm(),
        }
    }
}

/// Quadrature node on a domain boundary: position, unit conjugate tangent
/// `dzbar/ds` (s = chart arclength), and arclength weight.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryNode {
    pub z: Complex64,
    pub conj_tangent: Complex64,
    pub weight: f64,
}

impl Domain {
    pub fn new(shape: Shape, geometry: GeometryModel) -> Result<Self, GeometryError> {
        validate_shape(&shape, &geometry)?;
        Ok(Self { shape, geometry, complemented: false })
    }

    pub fn disk(center: Complex64, radius: f64, geometry: GeometryModel) -> Result<Self, GeometryError> {
        Self::new(Shape::Disk { center, radius }, geometry)
    }

    pub fn annulus(
        center: Complex64,
        r_in: f64,
        r_out: f64,
        geometry: GeometryModel,
    ) -> Result<Self, GeometryError> {
        Self::new(Shape::Annulus { center, r_in, r_out }, geometry)
    }

    pub fn polygon(vertices: Vec<Complex64>, geometry: GeometryModel) -> Result<Self, GeometryError> {
        Self::new(Shape::Polygon { vertices }, geometry)
    }

    /// The full sphere (Fubini-Study chart plus the point at infinity).
    pub fn full_sphere() -> Self {
        Self {
            shape: Shape::Disk { center: Complex64::new(0.0, 0.0), radius: f64::INFINITY },
            geometry: GeometryModel::fubini_study(),
            complemented: false,
        }
    }

    /// The complement region (through infinity). Fubini-Study only.
    pub fn complement(&self) -> Result<Self, GeometryError> {
        if self.geometry.kind != GeometryKind::FubiniStudy {
            return Err(GeometryError::Unsupported(
                "complement domains are defined for the Fubini-Study geometry only",
            ));
        }
        Ok(Self { shape: self.shape.clone(), geometry: self.geometry, complemented: !self.complemented })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn geometry(&self) -> &GeometryModel {
        &self.geometry
    }

    pub fn is_complemented(&self) -> bool {
        self.complemented
    }

    pub fn is_full_sphere(&self) -> bool {
        matches!(self.shape, Shape::Disk { radius, .. } if radius.is_infinite()) && !self.complemented
    }

    /// A chart radius bounding the domain boundary away from the origin;
    /// infinite for the full sphere.
    pub fn chart_radius_bound(&self) -> f64 {
        match &self.shape {
            Shape::Disk { center, radius } => center.norm() + radius,
            Shape::Annulus { center, r_out, .. } => center.norm() + r_out,
            Shape::Polygon { vertices } => vertices.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    pub(crate) fn boundary_arcs(&self) -> Vec<BoundaryArc> {
        if self.is_full_sphere() {
            return Vec::new();
        }
        let mut arcs = match &self.shape {
            Shape::Disk { center, radius } => vec![BoundaryArc::Circle {
                center: *center,
                radius: *radius,
                start_angle: 0.0,
                sweep: std::f64::consts::TAU,
            }],
            Shape::Annulus { center, r_in, r_out } => vec![
                BoundaryArc::Circle {
                    center: *center,
                    radius: *r_out,
                    start_angle: 0.0,
                    sweep: std::f64::consts::TAU,
                },
                BoundaryArc::Circle {
                    center: *center,
                    radius: *r_in,
                    start_angle: 0.0,
                    sweep: -std::f64::consts::TAU,
                },
            ],
            Shape::Polygon { vertices } => {
                let m = vertices.len();
                (0..m)
                    .map(|i| BoundaryArc::Segment { a: vertices[i], b: vertices[(i + 1) % m] })
                    .collect()
            }
        };
        if self.complemented {
            for arc in &mut arcs {
                match arc {
                    BoundaryArc::Circle { sweep, .. } => *sweep = -*sweep,
                    BoundaryArc::Segment { a, b } => std::mem::swap(a, b),
                }
            }
            arcs.reverse();
        }
        arcs
    }

    /// Euclidean (chart) perimeter of the boundary.
    pub fn chart_perimeter(&self) -> f64 {
        self.boundary_arcs().iter().map(|a| a.chart_length()).sum()
    }

    /// Chart distance from `z` to the boundary.
    pub fn chart_boundary_distance(&self, z: Complex64) -> f64 {
        match &self.shape {
            Shape::Disk { center, radius } => {
                if radius.is_infinite() {
                    f64::INFINITY
                } else {
                    ((z - center).norm() - radius).abs()
                }
            }
            Shape::Annulus { center, r_in, r_out } => {
                let d = (z - center).norm();
                ((d - r_in).abs()).min((d - r_out).abs())
            }
            Shape::Polygon { vertices } => {
                let m = vertices.len();
                (0..m)
                    .map(|i| segment_distance(vertices[i], vertices[(i + 1) % m], z))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

fn validate_shape(shape: &Shape, geometry: &GeometryModel) -> Result<(), GeometryError> {
    match shape {
        Shape::Disk { center, radius } => {
            if !(*radius > 0.0) {
                return Err(GeometryError::InvalidDomain("disk radius must be positive".into()));
            }
            if radius.is_infinite() && geometry.kind != GeometryKind::FubiniStudy {
                return Err(GeometryError::InvalidDomain(
                    "an infinite disk (full surface) is only meaningful on the sphere".into(),
                ));
            }
            if geometry.kind == GeometryKind::Hyperbolic && center.norm() + radius >= 1.0 {
                return Err(GeometryError::InvalidDomain(
                    "hyperbolic domains must close up strictly inside the unit disk".into(),
                ));
            }
        }
        Shape::Annulus { center, r_in, r_out } => {
            if !(*r_in > 0.0 && r_out > r_in) {
                return Err(GeometryError::InvalidDomain(
                    "annulus requires 0 < r_in < r_out".into(),
                ));
            }
            if geometry.kind == GeometryKind::Hyperbolic && center.norm() + r_out >= 1.0 {
                return Err(GeometryError::InvalidDomain(
                    "hyperbolic domains must close up strictly inside the unit disk".into(),
                ));
            }
        }
        Shape::Polygon { vertices } => {
            validate_polygon(vertices)?;
            if geometry.kind == GeometryKind::Hyperbolic
                && vertices.iter().any(|v| v.norm() >= 1.0)
            {
                return Err(GeometryError::InvalidDomain(
                    "hyperbolic domains must close up strictly inside the unit disk".into(),
                ));
            }
        }
    }
    Ok(())
}

fn validate_polygon(vertices: &[Complex64]) -> Result<(), GeometryError> {
    let m = vertices.len();
    if m < 3 {
        return Err(GeometryError::InvalidDomain("polygon needs at least 3 vertices".into()));
    }
    for i in 0..m {
        let d = vertices[(i + 1) % m] - vertices[i];
        if d.norm() == 0.0 {
            return Err(GeometryError::InvalidDomain("polygon has a zero-length edge".into()));
        }
    }
    // Positively oriented boundary (counterclockwise).
    let signed: f64 = (0..m)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % m];
            a.re * b.im - b.re * a.im
        })
        .sum();
    if signed <= 0.0 {
        return Err(GeometryError::InvalidDomain(
            "polygon must be positively oriented (counterclockwise)".into(),
        ));
    }
    // No cusps: interior angles bounded away from 0 and 2pi.
    for i in 0..m {
        let prev = vertices[(i + m - 1) % m];
        let v = vertices[i];
        let next = vertices[(i + 1) % m];
        let din = v - prev;
        let dout = next - v;
        let cross = din.re * dout.im - din.im * dout.re;
        let dot = din.re * dout.re + din.im * dout.im;
        let turn = cross.atan2(dot);
        let interior = std::f64::consts::PI - turn;
        if interior < MIN_CORNER_ANGLE || interior > std::f64::consts::TAU - MIN_CORNER_ANGLE {
            return Err(GeometryError::InvalidDomain(format!(
                "polygon corner {i} forms a cusp (interior angle {interior:.2e} rad)"
            )));
        }
    }
    // Simple boundary: no crossing between non-adjacent edges.
    for i in 0..m {
        for j in (i + 1)..m {
            if j == i || (j + 1) % m == i || (i + 1) % m == j {
                continue;
            }
            if segments_cross(
                vertices[i],
                vertices[(i + 1) % m],
                vertices[j],
                vertices[(j + 1) % m],
            ) {
                return Err(GeometryError::InvalidDomain(format!(
                    "polygon edges {i} and {j} intersect"
                )));
            }
        }
    }
    Ok(())
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

fn segments_cross(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    (o1 * o2 < 0.0) && (o3 * o4 < 0.0)
}

fn segment_distance(a: Complex64, b: Complex64, z: Complex64) -> f64 {
    let ab = b - a;
    let len_sqr = ab.norm_sqr();
    let t = (((z - a).re * ab.re + (z - a).im * ab.im) / len_sqr).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

/// omega-area of the domain, computed as an exact boundary line integral of
/// the closed-form radial potential; additive over disjoint unions.
pub fn area(domain: &Domain) -> Result<f64, GeometryError> {
    area_with_resolution(domain, 64, false)
}

/// Area with an explicit panel count per arc; `low_order` switches to a
/// 2-point Gauss rule so refinement convergence rates can be measured.
pub fn area_with_resolution(
    domain: &Domain,
    panels_per_arc: usize,
    low_order: bool,
) -> Result<f64, GeometryError> {
    if domain.is_full_sphere() {
        return Ok(std::f64::consts::PI);
    }
    if domain.is_complemented() {
        let total = domain.geometry().total_area().ok_or(GeometryError::Unsupported(
            "complement area needs a finite total area (Fubini-Study)",
        ))?;
        let inner = Domain { complemented: false, ..domain.clone() };
        return Ok(total - area_with_resolution(&inner, panels_per_arc, low_order)?);
    }
    let geometry = *domain.geometry();
    let mut acc = KahanSum::new();
    for arc in domain.boundary_arcs() {
        let f = |t: f64| {
            let z = arc.point(t);
            let v = arc.velocity(t);
            // Im(conj(z) dz) picks out x dy - y dx.
            geometry.area_potential(z.norm_sqr()) * (z.conj() * v).im
        };
        let val = if low_order {
            gauss_legendre_2pt(f, 0.0, 1.0, panels_per_arc)
        } else {
            gauss_legendre(f, 0.0, 1.0, panels_per_arc)
        };
        acc.add(val);
    }
    Ok(acc.value())
}

/// Length of the boundary in the Riemannian metric of `omega`.
pub fn boundary_length(domain: &Domain) -> Result<f64, GeometryError> {
    boundary_length_with_resolution(domain, 64, false)
}

pub fn boundary_length_with_resolution(
    domain: &Domain,
    panels_per_arc: usize,
    low_order: bool,
) -> Result<f64, GeometryError> {
    if domain.is_full_sphere() {
        return Ok(0.0);
    }
    let geometry = *domain.geometry();
    let mut acc = KahanSum::new();
    for arc in domain.boundary_arcs() {
        let f = |t: f64| {
            let z = arc.point(t);
            geometry.length_density(z) * arc.velocity(t).norm()
        };
        let val = if low_order {
            gauss_legendre_2pt(f, 0.0, 1.0, panels_per_arc)
        } else {
            gauss_legendre(f, 0.0, 1.0, panels_per_arc)
        };
        acc.add(val);
    }
    Ok(acc.value())
}

/// Classify `z` against the domain. Points within chart distance `tol` of the
/// boundary report `Boundary`; the result is deterministic.
pub fn contains(domain: &Domain, z: Complex64, tol: f64) -> Containment {
    assert!(tol > 0.0, "containment tolerance must be positive");
    if domain.is_full_sphere() {
        return Containment::Inside;
    }
    if domain.chart_boundary_distance(z) < tol {
        return Containment::Boundary;
    }
    let inside_shape = match &domain.shape {
        Shape::Disk { center, radius } => (z - center).norm() < *radius,
        Shape::Annulus { center, r_in, r_out } => {
            let d = (z - center).norm();
            *r_in < d && d < *r_out
        }
        Shape::Polygon { vertices } => point_in_polygon(vertices, z),
    };
    if inside_shape != domain.complemented {
        Containment::Inside
    } else {
        Containment::Outside
    }
}

fn point_in_polygon(vertices: &[Complex64], z: Complex64) -> bool {
    let m = vertices.len();
    let mut inside = false;
    for i in 0..m {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        if (a.im > z.im) != (b.im > z.im) {
            let x = a.re + (z.im - a.im) / (b.im - a.im) * (b.re - a.re);
            if z.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Boundary quadrature nodes: `n` nodes distributed over the arcs in
/// proportion to chart length, open (midpoint) rule on each arc so corners
/// are never nodes; weights sum to the chart perimeter.
pub fn boundary_nodes(domain: &Domain, n: usize) -> Result<Vec<BoundaryNode>, GeometryError> {
    boundary_nodes_with_shift(domain, n, 0.0)
}

/// Same as [`boundary_nodes`] with each node shifted by `shift` cells within
/// its arc (|shift| < 1/2). Two grids at shifts -1/4 and +1/4 are offset by
/// half a spacing and share no points; the diagonal-avoiding product rule
/// uses this.
pub(crate) fn boundary_nodes_with_shift(
    domain: &Domain,
    n: usize,
    shift: f64,
) -> Result<Vec<BoundaryNode>, GeometryError> {
    let arcs = domain.boundary_arcs();
    if arcs.is_empty() {
        return Ok(Vec::new());
    }
    let min = 16.max(2 * arcs.len());
    if n < min {
        return Err(GeometryError::TooFewNodes { min, got: n });
    }
    debug_assert!(shift.abs() < 0.5);
    let total_len: f64 = arcs.iter().map(|a| a.chart_length()).sum();
    // Largest-remainder apportionment, at least one node per arc.
    let mut counts: Vec<usize> = arcs
        .iter()
        .map(|a| ((n as f64) * a.chart_length() / total_len).floor().max(1.0) as usize)
        .collect();
    let mut assigned: usize = counts.iter().sum();
    while assigned < n {
        let (k, _) = arcs
            .iter()
            .enumerate()
            .map(|(i, a)| (i, a.chart_length() / counts[i] as f64))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("nonempty arcs");
        counts[k] += 1;
        assigned += 1;
    }
    let mut nodes = Vec::with_capacity(n);
    for (arc, &k) in arcs.iter().zip(&counts) {
        let w = arc.chart_length() / k as f64;
        for i in 0..k {
            let t = (i as f64 + 0.5 + shift) / k as f64;
            let v = arc.velocity(t);
            nodes.push(BoundaryNode {
                z: arc.point(t),
                conj_tangent: (v / v.norm()).conj(),
                weight: w,
            });
        }
    }
    Ok(nodes)
}

// -- run-config literals --------------------------------------------------

/// Serde image of the domain literal used in run configs, e.g.
/// `{"shape":"disk","center":[0,0],"radius":1.0,"geometry":"fs"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainLiteral {
    pub shape: String,
    pub geometry: GeometryKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_in: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_out: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<[f64; 2]>>,
}

impl DomainLiteral {
    pub fn build(&self) -> Result<Domain, GeometryError> {
        let geometry = match (self.geometry, self.scale) {
            (GeometryKind::Flat, Some(s)) => GeometryModel::flat_with_scale(s),
            (GeometryKind::Flat, None) => GeometryModel::flat(),
            (GeometryKind::FubiniStudy, _) => GeometryModel::fubini_study(),
            (GeometryKind::Hyperbolic, _) => GeometryModel::hyperbolic(),
        };
        let center = self.center.map(|[re, im]| Complex64::new(re, im)).unwrap_or_default();
        match self.shape.as_str() {
            "disk" => {
                let radius = self
                    .radius
                    .ok_or_else(|| GeometryError::InvalidDomain("disk literal needs a radius".into()))?;
                Domain::disk(center, radius, geometry)
            }
            "annulus" => {
                let (r_in, r_out) = match (self.r_in, self.r_out) {
                    (Some(a), Some(b)) => (a, b),
                    _ => {
                        return Err(GeometryError::InvalidDomain(
                            "annulus literal needs r_in and r_out".into(),
                        ))
                    }
                };
                Domain::annulus(center, r_in, r_out, geometry)
            }
            "polygon" => {
                let vertices = self
                    .vertices
                    .as_ref()
                    .ok_or_else(|| GeometryError::InvalidDomain("polygon literal needs vertices".into()))?
                    .iter()
                    .map(|&[re, im]| Complex64::new(re, im))
                    .collect();
                Domain::polygon(vertices, geometry)
            }
            "full_sphere" => Ok(Domain::full_sphere()),
            other => Err(GeometryError::InvalidDomain(format!("unknown shape {other:?}"))),
        }
    }

    pub fn of(domain: &Domain) -> Self {
        let geometry = domain.geometry().kind;
        let scale = match geometry {
            GeometryKind::Flat if domain.geometry().scale != 1.0 => Some(domain.geometry().scale),
            _ => None,
        };
        match domain.shape() {
            Shape::Disk { center, radius } if radius.is_infinite() => DomainLiteral {
                shape: "full_sphere".into(),
                geometry,
                scale,
                center: None,
                radius: None,
                r_in: None,
                r_out: None,
                vertices: None,
            },
            Shape::Disk { center, radius } => DomainLiteral {
                shape: "disk".into(),
                geometry,
                scale,
                center: Some([center.re, center.im]),
                radius: Some(*radius),
                r_in: None,
                r_out: None,
                vertices: None,
            },
            Shape::Annulus { center, r_in, r_out } => DomainLiteral {
                shape: "annulus".into(),
                geometry,
                scale,
                center: Some([center.re, center.im]),
                radius: None,
                r_in: Some(*r_in),
                r_out: Some(*r_out),
                vertices: None,
            },
            Shape::Polygon { vertices } => DomainLiteral {
                shape: "polygon".into(),
                geometry,
                scale,
                center: None,
                radius: None,
                r_in: None,
                r_out: None,
                vertices: Some(vertices.iter().map(|v| [v.re, v.im]).collect()),
            },
        }
    }
}
