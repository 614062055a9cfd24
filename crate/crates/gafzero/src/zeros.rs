//! Zero location and zero statistics of sampled sections.
//!
//! Roots come from simultaneous Aberth-Ehrlich iteration on the rescaled
//! chart polynomial; evaluation switches to the reversed polynomial outside
//! the unit circle of the rescaled variable, so the huge dynamic range of the
//! weighted coefficients never hits the iteration. Counts inside a domain are
//! cross-checkable against the argument principle (winding of the phase along
//! the boundary), which shares no code path with the root finder beyond
//! polynomial evaluation.

use num_complex::Complex64;
use thiserror::Error;

use crate::ensembles::{ChartPolynomial, EnsembleError, SectionSample};
use crate::geometry::{self, Containment, Domain, GeometryError, GeometryModel};
use crate::quad::gauss_legendre;

#[derive(Debug, Error)]
pub enum ZeroError {
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("root finding did not converge within {max_iterations} iterations ({unconverged} roots outstanding)")]
    NonConvergence { max_iterations: usize, unconverged: usize, partial: Vec<Complex64> },
    #[error("winding residual {residual:.3} exceeds 0.1: a zero sits too close to the boundary")]
    NearBoundaryZero { residual: f64 },
    #[error("domain geometry does not match the ensemble's background geometry")]
    GeometryMismatch,
    #[error("argument principle needs a plain chart domain with nonempty boundary")]
    UnsupportedDomain,
}

const MAX_ABERTH_ITERATIONS: usize = 200;
/// Per-root relative stopping tolerance on the Aberth correction.
const ABERTH_STEP_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroMethod {
    Roots,
    ArgumentPrinciple,
}

/// Zeros of one sampled section in the chart.
#[derive(Clone, Debug)]
pub struct ZeroSet {
    pub points: Vec<Complex64>,
    /// log |s(z_k)| minus the max of log |s| over a reference circle grid;
    /// a converged root sits many orders below zero.
    pub residual_log_moduli: Vec<f64>,
    pub method: ZeroMethod,
}

/// All roots of the (truncated) chart polynomial.
///
/// Exact zero leading coefficients reduce the root count (`fundamental
/// theorem of algebra` on the effective degree); exact zero trailing
/// coefficients contribute roots at the origin directly.
pub fn find_zeros(sample: &SectionSample) -> Result<ZeroSet, ZeroError> {
    let poly = ChartPolynomial::from_sample(sample)?;
    let coeffs = poly.scaled_coeffs();
    let eff_degree = poly.effective_degree();
    let mut origin_zeros = 0usize;
    while origin_zeros < eff_degree && coeffs[origin_zeros].norm_sqr() == 0.0 {
        origin_zeros += 1;
    }
    let deflated = &coeffs[origin_zeros..=eff_degree];

    let mut points: Vec<Complex64> =
        std::iter::repeat(Complex64::new(0.0, 0.0)).take(origin_zeros).collect();
    if deflated.len() > 1 {
        let init = initial_guesses(sample, origin_zeros, deflated.len() - 1, poly.scale());
        let roots_u = aberth(deflated, init)?;
        points.extend(roots_u.into_iter().map(|u| u * poly.scale()));
    }

    // Residuals relative to the section's scale on the profile circle.
    let ref_scale = reference_log_scale(&poly);
    let residual_log_moduli = points
        .iter()
        .map(|&z| {
            let (logm, _) = poly.log_polar(z);
            logm - ref_scale
        })
        .collect();
    Ok(ZeroSet { points, residual_log_moduli, method: ZeroMethod::Roots })
}

fn reference_log_scale(poly: &ChartPolynomial) -> f64 {
    let r = poly.scale();
    (0..64)
        .map(|k| {
            let th = std::f64::consts::TAU * (k as f64 + 0.5) / 64.0;
            poly.log_polar(Complex64::from_polar(r, th)).0
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Initial guesses: roots of unity scaled to the coefficient-profile radius,
/// a slightly irrational global twist breaking real-axis symmetry.
fn initial_guesses(
    sample: &SectionSample,
    origin_zeros: usize,
    degree: usize,
    alpha: f64,
) -> Vec<Complex64> {
    let spec = &sample.ensemble;
    (1..=degree)
        .map(|j| {
            let r = (spec.profile_radius(origin_zeros + j) / alpha).clamp(1e-3, 8.0);
            let th = std::f64::consts::TAU * (j as f64 + 0.25) / degree as f64 + 0.377;
            Complex64::from_polar(r, th)
        })
        .collect()
}

/// Newton ratio p/p' at `u`, through the reversed polynomial when |u| > 1.
#[inline]
fn newton_ratio(coeffs: &[Complex64], reversed: &[Complex64], u: Complex64) -> Complex64 {
    let d = (coeffs.len() - 1) as f64;
    if u.norm_sqr() <= 1.0 {
        let (p, dp) = horner2(coeffs, u);
        p / dp
    } else {
        let v = 1.0 / u;
        let (q, dq) = horner2(reversed, v);
        u * q / (q * d - v * dq)
    }
}

#[inline]
fn horner2(coeffs: &[Complex64], u: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * u + p;
        p = p * u + c;
    }
    (p, dp)
}

fn aberth(coeffs: &[Complex64], mut roots: Vec<Complex64>) -> Result<Vec<Complex64>, ZeroError> {
    let degree = coeffs.len() - 1;
    debug_assert_eq!(roots.len(), degree);
    let reversed: Vec<Complex64> = coeffs.iter().rev().copied().collect();
    let mut frozen = vec![false; degree];
    for _ in 0..MAX_ABERTH_ITERATIONS {
        let mut all_done = true;
        for k in 0..degree {
            if frozen[k] {
                continue;
            }
            let u = roots[k];
            let w = newton_ratio(coeffs, &reversed, u);
            if !w.is_finite() {
                // Evaluation blew up or landed on a critical point; nudge.
                roots[k] = u * 1.000_001 + Complex64::new(1e-9, 1e-9);
                all_done = false;
                continue;
            }
            if w.norm_sqr() == 0.0 {
                frozen[k] = true;
                continue;
            }
            let mut repulsion = Complex64::new(0.0, 0.0);
            for (j, &other) in roots.iter().enumerate() {
                if j != k {
                    repulsion += 1.0 / (u - other);
                }
            }
            let denom = Complex64::new(1.0, 0.0) - w * repulsion;
            let correction = if denom.norm_sqr() > 0.0 { w / denom } else { w };
            if !correction.is_finite() {
                roots[k] = u * 1.000_001 + Complex64::new(1e-9, -1e-9);
                all_done = false;
                continue;
            }
            roots[k] = u - correction;
            if correction.norm() <= ABERTH_STEP_TOL * (1.0 + roots[k].norm()) {
                frozen[k] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            return Ok(roots);
        }
    }
    let unconverged = frozen.iter().filter(|f| !**f).count();
    Err(ZeroError::NonConvergence {
        max_iterations: MAX_ABERTH_ITERATIONS,
        unconverged,
        partial: roots,
    })
}

/// Spec'd default boundary tolerance: 1e-9 times the domain's chart radius.
pub fn default_boundary_tolerance(domain: &Domain) -> f64 {
    let r = domain.chart_radius_bound();
    if r.is_finite() {
        1e-9 * r.max(1.0)
    } else {
        1e-9
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountOutcome {
    pub count: usize,
    /// Some zero fell within `tol` of the boundary; callers record the trial
    /// as degenerate.
    pub boundary_flag: bool,
}

fn check_geometry(sample: &SectionSample, domain: &Domain) -> Result<(), ZeroError> {
    if sample.ensemble.geometry().kind == domain.geometry().kind {
        Ok(())
    } else {
        Err(ZeroError::GeometryMismatch)
    }
}

/// Count zeros strictly inside the domain by locating all roots.
pub fn count_in_domain(
    sample: &SectionSample,
    domain: &Domain,
    tol: f64,
) -> Result<CountOutcome, ZeroError> {
    check_geometry(sample, domain)?;
    let zeros = find_zeros(sample)?;
    Ok(classify_count(&zeros, sample, domain, tol))
}

/// Containment bookkeeping shared by callers that already hold the roots.
pub fn classify_count(
    zeros: &ZeroSet,
    sample: &SectionSample,
    domain: &Domain,
    tol: f64,
) -> CountOutcome {
    let mut count = 0usize;
    let mut boundary_flag = false;
    for &z in &zeros.points {
        if !sample.ensemble.chart_contains(z) {
            continue;
        }
        match geometry::contains(domain, z, tol) {
            Containment::Inside => count += 1,
            Containment::Boundary => boundary_flag = true,
            Containment::Outside => {}
        }
    }
    CountOutcome { count, boundary_flag }
}

/// Count zeros inside the domain by the argument principle: the winding
/// number of `s` along the positively oriented boundary, from phase
/// increments, rounded with a residual guard.
pub fn count_by_argument_principle(
    sample: &SectionSample,
    domain: &Domain,
    n_nodes: usize,
) -> Result<i64, ZeroError> {
    check_geometry(sample, domain)?;
    if domain.is_complemented() || domain.is_full_sphere() {
        return Err(ZeroError::UnsupportedDomain);
    }
    let poly = ChartPolynomial::from_sample(sample)?;
    let arcs = domain.boundary_arcs();
    let total_len: f64 = arcs.iter().map(|a| a.chart_length()).sum();
    let mut total_turn = 0.0;
    for arc in &arcs {
        let n = ((n_nodes as f64 * arc.chart_length() / total_len).ceil() as usize).max(8);
        let phase_at = |t: f64| -> Result<f64, ZeroError> {
            let (logm, phase) = poly.log_polar(arc.point(t));
            if logm == f64::NEG_INFINITY {
                return Err(ZeroError::NearBoundaryZero { residual: 0.5 });
            }
            Ok(phase)
        };
        let mut prev = phase_at(0.0)?;
        for i in 1..=n {
            let t = i as f64 / n as f64;
            let phase = phase_at(t)?;
            total_turn += phase_step(
                &phase_at,
                (i - 1) as f64 / n as f64,
                t,
                prev,
                phase,
                0,
            )?;
            prev = phase;
        }
    }
    let winding = total_turn / std::f64::consts::TAU;
    let rounded = winding.round();
    let residual = (winding - rounded).abs();
    if residual > 0.1 {
        return Err(ZeroError::NearBoundaryZero { residual });
    }
    Ok(rounded as i64)
}

/// Phase increment over [t0, t1], bisecting while any step turns by more
/// than 1 radian so a wrap is never mistaken for a small step.
fn phase_step(
    phase_at: &impl Fn(f64) -> Result<f64, ZeroError>,
    t0: f64,
    t1: f64,
    p0: f64,
    p1: f64,
    depth: u32,
) -> Result<f64, ZeroError> {
    let delta = wrap_angle(p1 - p0);
    if delta.abs() <= 1.0 {
        return Ok(delta);
    }
    if depth >= 48 {
        // Phase still turning violently on a vanishing interval: a zero is
        // effectively on the contour.
        return Err(ZeroError::NearBoundaryZero { residual: delta.abs() / std::f64::consts::TAU });
    }
    let tm = 0.5 * (t0 + t1);
    let pm = phase_at(tm)?;
    Ok(phase_step(phase_at, t0, tm, p0, pm, depth + 1)?
        + phase_step(phase_at, tm, t1, pm, p1, depth + 1)?)
}

#[inline]
fn wrap_angle(a: f64) -> f64 {
    let mut x = a % std::f64::consts::TAU;
    if x > std::f64::consts::PI {
        x -= std::f64::consts::TAU;
    } else if x <= -std::f64::consts::PI {
        x += std::f64::consts::TAU;
    }
    x
}

// -- test functions -----------------------------------------------------------

/// Log of the peak-to-edge ratio defining the effective support radius.
const SUPPORT_LOG: f64 = 27.631_021_115_928_55; // ln(1e12)

/// Smooth test function `phi(z) = A exp(-|z-a|^2 / sigma^2)` with closed-form
/// Laplacian, tracked against a background metric for its L2 norms.
#[derive(Clone, Debug)]
pub struct TestFunction {
    center: Complex64,
    sigma: f64,
    amplitude: f64,
    geometry: GeometryModel,
    support_radius: f64,
    norm_sqr_laplacian: f64,
    norm_sqr_ddbar: f64,
}

impl TestFunction {
    /// Gaussian bump of unit peak height.
    pub fn gaussian_bump(
        center: Complex64,
        sigma: f64,
        geometry: GeometryModel,
    ) -> Result<Self, GeometryError> {
        Self::gaussian_bump_scaled(center, sigma, 1.0, geometry)
    }

    pub fn gaussian_bump_scaled(
        center: Complex64,
        sigma: f64,
        amplitude: f64,
        geometry: GeometryModel,
    ) -> Result<Self, GeometryError> {
        if !(sigma > 0.0) {
            return Err(GeometryError::InvalidDomain("bump width must be positive".into()));
        }
        let support_radius = sigma * SUPPORT_LOG.sqrt();
        if matches!(geometry.kind, crate::geometry::GeometryKind::Hyperbolic)
            && center.norm() + support_radius >= 1.0
        {
            return Err(GeometryError::InvalidDomain(
                "test function support must stay inside the unit disk".into(),
            ));
        }
        let mut tf = Self {
            center,
            sigma,
            amplitude,
            geometry,
            support_radius,
            norm_sqr_laplacian: 0.0,
            norm_sqr_ddbar: 0.0,
        };
        if amplitude != 0.0 {
            // ||Delta phi||^2 = int (Delta_E phi)^2 / rho dxdy over the chart;
            // the Euclidean Laplacian is radial about the center, the metric
            // density is not, so integrate in polar coordinates around `a`.
            let nrm = tf.norm_sqr_laplacian_quadrature(256, 64);
            tf.norm_sqr_laplacian = nrm;
            tf.norm_sqr_ddbar = 0.25 * nrm;
        }
        Ok(tf)
    }

    /// The identically-zero test function.
    pub fn zero(geometry: GeometryModel) -> Self {
        Self {
            center: Complex64::new(0.0, 0.0),
            sigma: 1.0,
            amplitude: 0.0,
            geometry,
            support_radius: 0.0,
            norm_sqr_laplacian: 0.0,
            norm_sqr_ddbar: 0.0,
        }
    }

    fn norm_sqr_laplacian_quadrature(&self, n_r: usize, n_th: usize) -> f64 {
        let geo = self.geometry;
        let a = self.center;
        gauss_legendre(
            |r| {
                let lap = self.laplacian_euclid_radial(r);
                let angular = gauss_legendre(
                    |th| 1.0 / geo.area_density(a + Complex64::from_polar(r, th)),
                    0.0,
                    std::f64::consts::TAU,
                    n_th / 16,
                );
                lap * lap * r * angular
            },
            0.0,
            self.support_radius,
            n_r / 16,
        )
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn geometry(&self) -> &GeometryModel {
        &self.geometry
    }

    /// Radius beyond which phi is negligible (peak times 1e-12).
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Squared L2 norm of the metric Laplacian of phi.
    pub fn norm_sqr_laplacian(&self) -> f64 {
        self.norm_sqr_laplacian
    }

    /// Squared L2 norm of ddbar phi; equals a quarter of
    /// [`Self::norm_sqr_laplacian`] in one complex dimension.
    pub fn norm_sqr_ddbar(&self) -> f64 {
        self.norm_sqr_ddbar
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        let r2 = (z - self.center).norm_sqr();
        self.amplitude * (-r2 / (self.sigma * self.sigma)).exp()
    }

    fn laplacian_euclid_radial(&self, r: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        let r2 = r * r;
        self.amplitude * (4.0 * r2 / (s2 * s2) - 4.0 / s2) * (-r2 / s2).exp()
    }

    /// Euclidean Laplacian of phi (closed form).
    pub fn laplacian_euclid(&self, z: Complex64) -> f64 {
        self.laplacian_euclid_radial((z - self.center).norm())
    }

    /// Metric Laplacian: `Delta_omega = rho^{-1} Delta_E` for a conformal
    /// metric of area density rho.
    pub fn laplacian_metric(&self, z: Complex64) -> f64 {
        self.laplacian_euclid(z) / self.geometry.area_density(z)
    }

    /// Density psi with `i ddbar phi = psi omega`; equals half the metric
    /// Laplacian.
    pub fn ddbar_density(&self, z: Complex64) -> f64 {
        0.5 * self.laplacian_metric(z)
    }
}

/// Smooth linear statistic: the sum of phi over the chart zeros.
pub fn linear_statistic(sample: &SectionSample, phi: &TestFunction) -> Result<f64, ZeroError> {
    if phi.geometry().kind != sample.ensemble.geometry().kind {
        return Err(ZeroError::GeometryMismatch);
    }
    let zeros = find_zeros(sample)?;
    Ok(linear_statistic_of(&zeros, sample, phi))
}

pub fn linear_statistic_of(zeros: &ZeroSet, sample: &SectionSample, phi: &TestFunction) -> f64 {
    zeros
        .points
        .iter()
        .filter(|z| sample.ensemble.chart_contains(**z))
        .map(|&z| phi.eval(z))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample, EnsembleSpec, SectionSample};
    use crate::geometry::GeometryModel;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn su2_section(n: u32, coeffs: Vec<Complex64>) -> SectionSample {
        SectionSample::from_coefficients(EnsembleSpec::su2(n).unwrap(), coeffs).unwrap()
    }

    fn fs_disk(r: f64) -> Domain {
        Domain::disk(c(0.0, 0.0), r, GeometryModel::fubini_study()).unwrap()
    }

    #[test]
    fn finds_roots_of_constructed_quadratic() {
        // (z - 0.5)(z - 2) = z^2 - 2.5 z + 1 against weights (1, sqrt2, 1).
        let s = su2_section(2, vec![c(1.0, 0.0), c(-2.5 / 2f64.sqrt(), 0.0), c(1.0, 0.0)]);
        let zeros = find_zeros(&s).unwrap();
        let mut pts: Vec<f64> = zeros.points.iter().map(|z| z.re).collect();
        pts.sort_by(f64::total_cmp);
        assert_eq!(zeros.points.len(), 2);
        assert!((pts[0] - 0.5).abs() < 1e-8);
        assert!((pts[1] - 2.0).abs() < 1e-8);
        assert!(zeros.points.iter().all(|z| z.im.abs() < 1e-8));
        for r in &zeros.residual_log_moduli {
            assert!(*r < -23.0, "residual above the 1e-10 relative tolerance: {r}");
        }
    }

    #[test]
    fn constant_section_has_no_chart_zeros() {
        let s = su2_section(1, vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let zeros = find_zeros(&s).unwrap();
        assert!(zeros.points.is_empty());
    }

    #[test]
    fn root_count_follows_effective_degree() {
        // Vanishing leading coefficient drops the degree by one.
        let s = su2_section(3, vec![c(0.3, 0.1), c(1.0, 0.0), c(-0.7, 0.2), c(0.0, 0.0)]);
        assert_eq!(find_zeros(&s).unwrap().points.len(), 2);
        // Vanishing constant term contributes an exact root at the origin.
        let s = su2_section(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.4, 0.0)]);
        let zeros = find_zeros(&s).unwrap();
        assert_eq!(zeros.points.len(), 2);
        assert!(zeros.points.iter().any(|z| z.norm() == 0.0));
    }

    #[test]
    fn count_examples() {
        let tol = 1e-9;
        // s(z) = z in Disk(0, 0.5).
        let s = su2_section(1, vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(count_in_domain(&s, &fs_disk(0.5), tol).unwrap().count, 1);
        // s(z) = z - 2 in Disk(0, 1).
        let s = su2_section(1, vec![c(-2.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(count_in_domain(&s, &fs_disk(1.0), tol).unwrap().count, 0);
        // (z - 0.5)(z - 2) in Disk(0, 1).
        let s = su2_section(2, vec![c(1.0, 0.0), c(-2.5 / 2f64.sqrt(), 0.0), c(1.0, 0.0)]);
        assert_eq!(count_in_domain(&s, &fs_disk(1.0), tol).unwrap().count, 1);
    }

    #[test]
    fn boundary_zero_sets_flag() {
        let s = su2_section(1, vec![c(-1.0, 0.0), c(1.0, 0.0)]); // zero at z = 1
        let out = count_in_domain(&s, &fs_disk(1.0), 1e-6).unwrap();
        assert!(out.boundary_flag);
    }

    #[test]
    fn winding_counts_simple_zeros() {
        let s = su2_section(1, vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(count_by_argument_principle(&s, &fs_disk(1.0), 64).unwrap(), 1);
        // Double zero: s(z) = z^2.
        let s = su2_section(2, vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(count_by_argument_principle(&s, &fs_disk(1.0), 64).unwrap(), 2);
        // Annulus excluding the origin zero.
        let s = su2_section(1, vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let ring = Domain::annulus(c(0.0, 0.0), 0.5, 2.0, GeometryModel::fubini_study()).unwrap();
        assert_eq!(count_by_argument_principle(&s, &ring, 64).unwrap(), 0);
        let s = su2_section(1, vec![c(-1.0, 0.0), c(1.0, 0.0)]); // zero at 1
        assert_eq!(count_by_argument_principle(&s, &ring, 64).unwrap(), 1);
    }

    #[test]
    fn winding_flags_boundary_zero() {
        let s = su2_section(1, vec![c(-1.0, 0.0), c(1.0, 0.0)]); // zero exactly on |z|=1
        assert!(matches!(
            count_by_argument_principle(&s, &fs_disk(1.0), 64),
            Err(ZeroError::NearBoundaryZero { .. })
        ));
    }

    #[test]
    fn linear_statistic_examples() {
        let flat = GeometryModel::fubini_study();
        let phi = TestFunction::gaussian_bump(c(0.0, 0.0), 0.5, flat).unwrap();
        let s = su2_section(1, vec![c(0.0, 0.0), c(1.0, 0.0)]); // zero at 0
        let v = linear_statistic(&s, &phi).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "peak-1 bump at the zero");

        let zero_phi = TestFunction::zero(flat);
        assert_eq!(linear_statistic(&s, &zero_phi).unwrap(), 0.0);

        // (z-0.5)(z-2) against a bump buried inside |z| < 1 only sees 0.5.
        let s = su2_section(2, vec![c(1.0, 0.0), c(-2.5 / 2f64.sqrt(), 0.0), c(1.0, 0.0)]);
        let phi = TestFunction::gaussian_bump(c(0.5, 0.0), 0.08, flat).unwrap();
        let v = linear_statistic(&s, &phi).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "phi(0.5) = 1, phi(2) negligible: {v}");
    }

    #[test]
    fn gaussian_bump_norms_flat_closed_form() {
        // ||Delta phi||^2 = 4 pi / sigma^2 in the flat unit metric.
        for sigma in [0.3, 0.5, 1.0] {
            let phi = TestFunction::gaussian_bump(c(0.2, -0.1), sigma, GeometryModel::flat()).unwrap();
            let expect = 4.0 * PI / (sigma * sigma);
            assert!(
                (phi.norm_sqr_laplacian() - expect).abs() < 1e-9 * expect,
                "sigma={sigma}: {} vs {expect}",
                phi.norm_sqr_laplacian()
            );
            assert!((phi.norm_sqr_ddbar() - 0.25 * expect).abs() < 1e-9 * expect);
        }
    }

    #[test]
    fn method_agreement_on_random_trials() {
        // The full sweep over N in {8, 32, 128} runs in the integration
        // suite; keep a fast N=8 slice here.
        let spec = EnsembleSpec::su2(8).unwrap();
        let domain = fs_disk(1.0);
        let tol = default_boundary_tolerance(&domain);
        let mut checked = 0;
        for trial in 0..200 {
            let s = sample(&spec, 99, trial);
            let by_roots = count_in_domain(&s, &domain, tol).unwrap();
            if by_roots.boundary_flag {
                continue;
            }
            match count_by_argument_principle(&s, &domain, 256) {
                Ok(w) => {
                    assert_eq!(w as usize, by_roots.count, "trial {trial}");
                    checked += 1;
                }
                Err(ZeroError::NearBoundaryZero { .. }) => {}
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
        assert!(checked > 150);
    }

    #[test]
    fn total_count_conservation() {
        let spec = EnsembleSpec::su2(24).unwrap();
        let domain = fs_disk(1.0);
        let complement = domain.complement().unwrap();
        let tol = default_boundary_tolerance(&domain);
        for trial in 0..100 {
            let s = sample(&spec, 3, trial);
            let zeros = find_zeros(&s).unwrap();
            assert_eq!(zeros.points.len(), 24, "all roots accounted for");
            let inside = classify_count(&zeros, &s, &domain, tol);
            let outside = classify_count(&zeros, &s, &complement, tol);
            let flagged = zeros
                .points
                .iter()
                .filter(|&&z| geometry::contains(&domain, z, tol) == Containment::Boundary)
                .count();
            assert_eq!(inside.count + outside.count + flagged, 24);
        }
    }
}
