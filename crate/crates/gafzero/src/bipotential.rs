//! The variance bipotential `Q_N = Gtilde(P_N)` and exact finite-N variance
//! formulas: the smooth-statistic double integral over the surface and the
//! number-variance boundary integral, plus the Gaussian pair-log-moment
//! identity as a self-test.
//!
//! `Gtilde(t) = Li2(t^2) / (4 pi^2)` rises from 0 to 1/24; with
//! `F(lambda) = Gtilde(e^{-lambda})`,
//!
//! ```text
//! F'(lambda)  = log(1 - e^{-2 lambda}) / (2 pi^2) <= 0,
//! F''(lambda) = 1 / (pi^2 (e^{2 lambda} - 1))      > 0,
//! ```
//!
//! and the boundary integrand for the number variance is the chain rule
//! `d2 Q / dzbar dwbar = F'' L_zbar L_wbar + F' L_zbar_wbar` contracted with
//! the conjugate boundary tangents. For the three model kernels the second
//! term vanishes identically (the kernel splits into a factor holomorphic in
//! `(z, wbar)` and its conjugate), which is why the integrand stays bounded
//! on the diagonal even though `Q_N` is only C^1 there.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::ensembles::{
    standard_complex_gaussian, trial_rng, EnsembleError, EnsembleSpec, KernelEvaluator,
};
use crate::geometry::{self, Domain, GeometryError};
use crate::quad::{adaptive_simpson, KahanSum};
use crate::zeros::TestFunction;

#[derive(Debug, Error)]
pub enum BipotentialError {
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("argument {t} outside the kernel range [0, 1]")]
    OutOfRange { t: f64 },
    #[error("quadrature did not converge: last delta {delta:.3e} at {nodes} nodes (tol {tol:.1e})")]
    NonConvergent { nodes: usize, delta: f64, tol: f64 },
    #[error("imaginary residual {imag:.3e} exceeds tolerance for value {value:.6e}")]
    ImaginaryResidual { value: f64, imag: f64 },
    #[error("variance quadrature returned {value:.3e} < 0 beyond tolerance: quadrature breakdown")]
    NegativeVariance { value: f64 },
    #[error("domain geometry does not match the ensemble")]
    GeometryMismatch,
}

/// `Gtilde(1) = Li2(1) / (4 pi^2) = 1/24`.
pub const G_TILDE_AT_ONE: f64 = 1.0 / 24.0;

/// `Gtilde(t) = (1/4pi^2) sum_{n>=1} t^{2n} / n^2 = Li2(t^2) / (4 pi^2)`
/// on `[0, 1]`, evaluated by the dilogarithm series (tail below 1e-14).
pub fn g_tilde(t: f64) -> Result<f64, BipotentialError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(BipotentialError::OutOfRange { t });
    }
    Ok(dilog_unit(t * t) / (4.0 * std::f64::consts::PI * std::f64::consts::PI))
}

/// Dilogarithm on [0, 1]. Direct series for x <= 1/2; the Euler reflection
/// `Li2(x) = pi^2/6 - ln(x) ln(1-x) - Li2(1-x)` otherwise, so the series
/// argument never exceeds 1/2 and the tail drops below 1e-15 within 60 terms.
fn dilog_unit(x: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&x));
    if x == 1.0 {
        return std::f64::consts::PI * std::f64::consts::PI / 6.0;
    }
    if x <= 0.5 {
        return dilog_series(x);
    }
    let y = 1.0 - x;
    std::f64::consts::PI * std::f64::consts::PI / 6.0 - x.ln() * y.ln() - dilog_series(y)
}

fn dilog_series(x: f64) -> f64 {
    debug_assert!((0.0..=0.5).contains(&x));
    let mut acc = KahanSum::new();
    let mut pow = 1.0;
    for n in 1..=60u32 {
        pow *= x;
        let term = pow / (n as f64 * n as f64);
        acc.add(term);
        if term < 1e-17 {
            break;
        }
    }
    acc.value()
}

/// The defining integral `-(1/4pi^2) int_0^{t^2} log(1-s)/s ds`, by adaptive
/// quadrature. Slow; the independent cross-check for [`g_tilde`].
pub fn g_tilde_integral_oracle(t: f64) -> Result<f64, BipotentialError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(BipotentialError::OutOfRange { t });
    }
    let upper = (t * t).min(1.0 - 1e-15);
    let integrand = |s: f64| {
        if s < 1e-300 {
            1.0
        } else {
            -(-s).ln_1p() / s
        }
    };
    let v = adaptive_simpson(&integrand, 0.0, upper, 1e-14);
    Ok(v / (4.0 * std::f64::consts::PI * std::f64::consts::PI))
}

/// `F'(lambda) = log(1 - e^{-2 lambda}) / (2 pi^2)`, lambda > 0.
pub fn f_prime(lambda: f64) -> f64 {
    debug_assert!(lambda > 0.0);
    (-(-2.0 * lambda).exp()).ln_1p() / (2.0 * std::f64::consts::PI * std::f64::consts::PI)
}

/// `F''(lambda) = 1 / (pi^2 (e^{2 lambda} - 1))`, lambda > 0.
pub fn f_double_prime(lambda: f64) -> f64 {
    debug_assert!(lambda > 0.0);
    1.0 / (std::f64::consts::PI * std::f64::consts::PI * (2.0 * lambda).exp_m1())
}

// -- pair log moment ----------------------------------------------------------

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug)]
pub struct PairLogMoment {
    pub mean: f64,
    pub stderr: f64,
    pub n_draws: u64,
}

/// `E[ log|c1| * log|c1 t + c2 sqrt(1-t^2)| ]` over i.i.d. standard complex
/// Gaussians. The exact value is `k0 + pi^2 Gtilde(t)` with
/// `k0 = (E log|c|)^2 = gamma^2 / 4`; this estimator verifies that identity.
pub fn pair_log_moment(t: f64, n_draws: u64, seed: u64) -> Result<PairLogMoment, BipotentialError> {
    if !(0.0..1.0).contains(&t) {
        return Err(BipotentialError::OutOfRange { t });
    }
    let s = (1.0 - t * t).sqrt();
    const BLOCK: u64 = 1 << 16;
    let blocks = n_draws.div_ceil(BLOCK);
    // Per-block counter streams keep the estimate independent of threading;
    // the final reduction is a sequential pass over ordered partials.
    let partials: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = trial_rng(seed ^ 0x70ac_9d13_55aa_00ff, b);
            let in_block = BLOCK.min(n_draws - b * BLOCK);
            let mut sum = KahanSum::new();
            let mut sq = KahanSum::new();
            for _ in 0..in_block {
                let c1 = standard_complex_gaussian(&mut rng);
                let c2 = standard_complex_gaussian(&mut rng);
                let x = c1.norm().ln() * (c1 * t + c2 * s).norm().ln();
                sum.add(x);
                sq.add(x * x);
            }
            (sum.value(), sq.value())
        })
        .collect();
    let mut sum = KahanSum::new();
    let mut sq = KahanSum::new();
    for (a, b) in &partials {
        sum.add(*a);
        sq.add(*b);
    }
    let n = n_draws as f64;
    let mean = sum.value() / n;
    let var = (sq.value() / n - mean * mean).max(0.0);
    Ok(PairLogMoment { mean, stderr: (var / n).sqrt(), n_draws })
}

// -- the bipotential ----------------------------------------------------------

/// Result of a refinement-controlled variance quadrature.
#[derive(Clone, Debug)]
pub struct VarianceEstimate {
    pub value: f64,
    /// Change across the last grid doubling.
    pub error_estimate: f64,
    /// Imaginary residual of the boundary integral (the exact formula is real).
    pub imag_residual: f64,
    /// (resolution, value, delta-from-previous) per refinement level.
    pub refinement_table: Vec<(usize, f64, f64)>,
}

/// How the boundary product rule treats the diagonal, where the integrand is
/// bounded but only directionally continuous.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagonalHandling {
    /// Two node grids offset by half a spacing, so s = t never occurs.
    OffsetGrids,
    /// Aligned grids with graded subdivision of the near-diagonal band.
    LocalRefinement,
}

/// Configuration for the boundary-times-boundary quadrature.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryQuadrature {
    /// Nodes per boundary factor at the coarsest level.
    pub nodes: usize,
    pub mode: DiagonalHandling,
    /// Grid doublings attempted beyond the base resolution.
    pub refinement_levels: u32,
    /// Stop once successive values agree to this relative tolerance.
    pub rel_tol: f64,
}

impl BoundaryQuadrature {
    /// Default resolution: the integrand's diagonal feature has chart width
    /// ~1/sqrt(N), so nodes scale with sqrt(N) times the chart perimeter.
    pub fn default_for(n: u32, domain: &Domain) -> Self {
        let nodes =
            (16.0 * (n as f64).sqrt().ceil() * domain.chart_perimeter()).ceil().max(256.0) as usize;
        Self { nodes, mode: DiagonalHandling::OffsetGrids, refinement_levels: 3, rel_tol: 1e-6 }
    }
}

/// Configuration for the surface-times-surface tensor quadrature used by the
/// smooth-statistic variance.
#[derive(Clone, Copy, Debug)]
pub struct TensorQuadrature {
    /// Cartesian nodes per axis over the test-function support.
    pub base_grid: usize,
    /// Radial and angular nodes of the polar difference grid.
    pub base_radial: usize,
    pub base_angular: usize,
    pub refinement_levels: u32,
    pub rel_tol: f64,
}

impl Default for TensorQuadrature {
    fn default() -> Self {
        Self { base_grid: 48, base_radial: 24, base_angular: 24, refinement_levels: 2, rel_tol: 2e-3 }
    }
}

/// Normalized pairs farther apart than this contribute quadratically little
/// (`Gtilde(t) ~ t^2 / 4pi^2`) and are skipped.
const KERNEL_CUTOFF: f64 = 1e-14;

/// The bipotential of one ensemble: `Q_N(z, w) = Gtilde(P_N(z, w))` together
/// with the exact variance quadratures built on it.
#[derive(Clone, Copy, Debug)]
pub struct Bipotential {
    pub kernel: KernelEvaluator,
}

impl Bipotential {
    pub fn new(ensemble: EnsembleSpec) -> Self {
        Self { kernel: KernelEvaluator::new(ensemble) }
    }

    /// `Q_N(z, w) in [0, 1/24]`.
    pub fn q_n(&self, z: Complex64, w: Complex64) -> Result<f64, BipotentialError> {
        let lambda = self.kernel.lambda(z, w)?;
        g_tilde((-lambda).exp())
    }

    /// `d2 Q_N / dzbar dwbar` by the chain rule with closed-form kernel
    /// derivatives. Off-diagonal points only.
    pub fn q_n_second_derivative(
        &self,
        z: Complex64,
        w: Complex64,
    ) -> Result<Complex64, BipotentialError> {
        let lam = self.kernel.lambda_and_derivatives(z, w)?;
        debug_assert!(!lam.on_diagonal, "second derivative requested on the diagonal");
        if (-lam.lambda).exp() < KERNEL_CUTOFF {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(f_double_prime(lam.lambda) * lam.d_zbar * lam.d_wbar
            + f_prime(lam.lambda) * lam.d2_dzbar_dwbar)
    }

    /// Exact number variance: `-int_{dU x dU} d2Q/dzbar dwbar dzbar dwbar`,
    /// evaluated by the configured product rule with refinement control.
    pub fn variance_count(
        &self,
        domain: &Domain,
        quad: &BoundaryQuadrature,
    ) -> Result<VarianceEstimate, BipotentialError> {
        if self.kernel.ensemble.geometry().kind != domain.geometry().kind {
            return Err(BipotentialError::GeometryMismatch);
        }
        if domain.is_full_sphere() {
            // Empty boundary: the count is deterministic.
            return Ok(VarianceEstimate {
                value: 0.0,
                error_estimate: 0.0,
                imag_residual: 0.0,
                refinement_table: vec![(0, 0.0, 0.0)],
            });
        }
        let mut table = Vec::new();
        let mut prev: Option<f64> = None;
        let mut prev_imag = 0.0;
        let mut n = quad.nodes;
        for level in 0..=quad.refinement_levels {
            let raw = match quad.mode {
                DiagonalHandling::OffsetGrids => self.boundary_sum_offset(domain, n)?,
                DiagonalHandling::LocalRefinement => {
                    self.boundary_sum_aligned(domain, n, 2 + level)?
                }
            };
            let value = raw.re;
            let delta = prev.map(|p| value - p).unwrap_or(f64::NAN);
            table.push((n, value, delta));
            prev_imag = raw.im.abs();
            if let Some(p) = prev {
                if (value - p).abs() <= quad.rel_tol * value.abs().max(1e-12) {
                    return self.finish_boundary(value, (value - p).abs(), prev_imag, table);
                }
            }
            prev = Some(value);
            if level < quad.refinement_levels {
                n *= 2;
            }
        }
        let value = prev.expect("at least one level ran");
        let delta = table.last().map(|r| r.2.abs()).unwrap_or(f64::NAN);
        // Accept a slow tail only if the drift is already tiny in absolute
        // terms; otherwise report the failure with diagnostics.
        if delta <= quad.rel_tol * value.abs().max(1e-9) * 10.0 {
            return self.finish_boundary(value, delta, prev_imag, table);
        }
        Err(BipotentialError::NonConvergent { nodes: n, delta, tol: quad.rel_tol })
    }

    fn finish_boundary(
        &self,
        value: f64,
        error: f64,
        imag: f64,
        table: Vec<(usize, f64, f64)>,
    ) -> Result<VarianceEstimate, BipotentialError> {
        if imag > 1e-8 * value.abs().max(1e-12) {
            return Err(BipotentialError::ImaginaryResidual { value, imag });
        }
        if value < -1e-8 * value.abs().max(1e-9) - 1e-12 {
            return Err(BipotentialError::NegativeVariance { value });
        }
        Ok(VarianceEstimate {
            value: value.max(0.0),
            error_estimate: error,
            imag_residual: imag,
            refinement_table: table,
        })
    }

    /// Product rule over two grids offset by half a spacing.
    fn boundary_sum_offset(&self, domain: &Domain, n: usize) -> Result<Complex64, BipotentialError> {
        let grid_z = geometry::boundary_nodes_with_shift(domain, n, -0.25)?;
        let grid_w = geometry::boundary_nodes_with_shift(domain, n, 0.25)?;
        let rows: Vec<Complex64> = grid_z
            .par_iter()
            .map(|nz| {
                let mut acc = Complex64::new(0.0, 0.0);
                for nw in &grid_w {
                    if let Ok(d2) = self.q_n_second_derivative(nz.z, nw.z) {
                        acc += d2 * nz.conj_tangent * nw.conj_tangent * (nz.weight * nw.weight);
                    }
                }
                acc
            })
            .collect();
        let mut re = KahanSum::new();
        let mut im = KahanSum::new();
        for r in rows {
            re.add(r.re);
            im.add(r.im);
        }
        Ok(-Complex64::new(re.value(), im.value()))
    }

    /// Product rule over one aligned grid, with the cells in the diagonal
    /// band `|s - t| < 10/sqrt(N)` refined by graded subdivision.
    fn boundary_sum_aligned(
        &self,
        domain: &Domain,
        n: usize,
        levels: u32,
    ) -> Result<Complex64, BipotentialError> {
        let grid = geometry::boundary_nodes_with_shift(domain, n, 0.0)?;
        let band = 10.0 / (self.kernel.ensemble.n() as f64).sqrt();
        let rows: Vec<Complex64> = grid
            .par_iter()
            .enumerate()
            .map(|(i, nz)| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, nw) in grid.iter().enumerate() {
                    let cell = nz.conj_tangent * nw.conj_tangent * (nz.weight * nw.weight);
                    if i == j {
                        acc += self.diagonal_cell(nz.z, nz.conj_tangent, nz.weight, levels) * cell;
                    } else if (nz.z - nw.z).norm() < band {
                        acc += self.banded_cell(nz.z, nw.z, nz.weight, nw.weight) * cell;
                    } else if let Ok(d2) = self.q_n_second_derivative(nz.z, nw.z) {
                        acc += d2 * cell;
                    }
                }
                acc
            })
            .collect();
        let mut re = KahanSum::new();
        let mut im = KahanSum::new();
        for r in rows {
            re.add(r.re);
            im.add(r.im);
        }
        Ok(-Complex64::new(re.value(), im.value()))
    }

    /// Mean integrand over a diagonal cell: recurse on the two diagonal
    /// quadrants, sample the off-diagonal quadrants on the cell antidiagonal.
    fn diagonal_cell(&self, z: Complex64, conj_tangent: Complex64, h: f64, depth: u32) -> Complex64 {
        let dir = conj_tangent.conj();
        self.diagonal_cell_rec(z, dir, h, depth)
    }

    fn diagonal_cell_rec(&self, z: Complex64, dir: Complex64, h: f64, depth: u32) -> Complex64 {
        let q = h * 0.25;
        let zero = Complex64::new(0.0, 0.0);
        let off1 = self.q_n_second_derivative(z + dir * q, z - dir * q).unwrap_or(zero);
        let off2 = self.q_n_second_derivative(z - dir * q, z + dir * q).unwrap_or(zero);
        if depth == 0 {
            return 0.5 * (off1 + off2);
        }
        let diag = self.diagonal_cell_rec(z, dir, h * 0.5, depth - 1);
        0.25 * (off1 + off2) + 0.5 * diag
    }

    /// 2x2 midpoint subdivision of a near-diagonal cell, displacing along the
    /// local boundary direction.
    fn banded_cell(&self, z: Complex64, w: Complex64, hz: f64, hw: f64) -> Complex64 {
        let d = w - z;
        let dz = d / d.norm();
        let zero = Complex64::new(0.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for sz in [-0.25, 0.25] {
            for sw in [-0.25, 0.25] {
                acc += self
                    .q_n_second_derivative(z + dz * (sz * hz), w + dz * (sw * hw))
                    .unwrap_or(zero);
            }
        }
        acc * 0.25
    }

    /// Exact smooth-statistic variance
    /// `int int Q_N(z,w) (i ddbar phi)(z) (i ddbar phi)(w)` by a tensor rule:
    /// a Cartesian grid on the support of phi times a polar grid in the
    /// difference variable, refined until stable.
    pub fn variance_smooth(
        &self,
        phi: &TestFunction,
        quad: &TensorQuadrature,
    ) -> Result<VarianceEstimate, BipotentialError> {
        if self.kernel.ensemble.geometry().kind != phi.geometry().kind {
            return Err(BipotentialError::GeometryMismatch);
        }
        if phi.support_radius() == 0.0 {
            return Ok(VarianceEstimate {
                value: 0.0,
                error_estimate: 0.0,
                imag_residual: 0.0,
                refinement_table: vec![(0, 0.0, 0.0)],
            });
        }
        let mut table = Vec::new();
        let mut prev: Option<f64> = None;
        let mut scale = 1usize;
        for level in 0..=quad.refinement_levels {
            let value = self.smooth_sum(
                phi,
                quad.base_grid * scale,
                quad.base_radial * scale,
                quad.base_angular * scale,
            );
            let delta = prev.map(|p| value - p).unwrap_or(f64::NAN);
            table.push((quad.base_grid * scale, value, delta));
            if let Some(p) = prev {
                if (value - p).abs() <= quad.rel_tol * value.abs().max(1e-15) {
                    if value < -1e-8 {
                        return Err(BipotentialError::NegativeVariance { value });
                    }
                    return Ok(VarianceEstimate {
                        value: value.max(0.0),
                        error_estimate: (value - p).abs(),
                        imag_residual: 0.0,
                        refinement_table: table,
                    });
                }
            }
            prev = Some(value);
            if level < quad.refinement_levels {
                scale *= 2;
            }
        }
        let (nodes, _, delta) = *table.last().expect("at least one level");
        Err(BipotentialError::NonConvergent { nodes, delta: delta.abs(), tol: quad.rel_tol })
    }

    fn smooth_sum(&self, phi: &TestFunction, n_grid: usize, n_r: usize, n_th: usize) -> f64 {
        let geo = *phi.geometry();
        let a = phi.center();
        let r_sup = phi.support_radius();
        let nf = self.kernel.ensemble.n() as f64;

        // Chart radius of the kernel's effective support around the test
        // function: Lambda ~ (N/2) (metric distance)^2 reaches the cutoff at
        // metric distance sqrt(2 * 32.3 / N); convert with the slowest length
        // density near the support and cap by the support diameter.
        let lambda_cut = -(KERNEL_CUTOFF.ln()); // ~32.3
        let mut min_density = geo.length_density(a);
        for k in 0..32 {
            let th = std::f64::consts::TAU * k as f64 / 32.0;
            let p = a + Complex64::from_polar(r_sup, th);
            if self.kernel.ensemble.chart_contains(p) {
                min_density = min_density.min(geo.length_density(p));
            }
        }
        let v_max = ((2.0 * lambda_cut / nf).sqrt() / min_density * 1.2).min(2.2 * r_sup);

        let h = 2.0 * r_sup / n_grid as f64;
        let dr = v_max / n_r as f64;
        let dth = std::f64::consts::TAU / n_th as f64;
        let rows: Vec<f64> = (0..n_grid)
            .into_par_iter()
            .map(|ix| {
                let mut acc = KahanSum::new();
                for iy in 0..n_grid {
                    let z = a + Complex64::new(
                        -r_sup + (ix as f64 + 0.5) * h,
                        -r_sup + (iy as f64 + 0.5) * h,
                    );
                    if !self.kernel.ensemble.chart_contains(z) {
                        continue;
                    }
                    let psi_z = phi.ddbar_density(z) * geo.area_density(z);
                    if psi_z == 0.0 {
                        continue;
                    }
                    let mut inner = KahanSum::new();
                    for ir in 0..n_r {
                        let r = (ir as f64 + 0.5) * dr;
                        for it in 0..n_th {
                            let th = (it as f64 + 0.5) * dth;
                            let w = z + Complex64::from_polar(r, th);
                            if !self.kernel.ensemble.chart_contains(w) {
                                continue;
                            }
                            let lam = match self.kernel.lambda(z, w) {
                                Ok(l) => l,
                                Err(_) => continue,
                            };
                            let p = (-lam).exp();
                            if p < KERNEL_CUTOFF {
                                continue;
                            }
                            let q = g_tilde(p).expect("P in [0,1]");
                            inner.add(q * phi.ddbar_density(w) * geo.area_density(w) * r);
                        }
                    }
                    acc.add(psi_z * inner.value() * dr * dth * h * h);
                }
                acc.value()
            })
            .collect();
        let mut total = KahanSum::new();
        for r in rows {
            total.add(r);
        }
        total.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn g_tilde_endpoints_and_midpoint() {
        assert_eq!(g_tilde(0.0).unwrap(), 0.0);
        assert!((g_tilde(1.0).unwrap() - 1.0 / 24.0).abs() < 1e-16);
        // Two independent evaluation routes agree at t = 1/2.
        let series = g_tilde(0.5).unwrap();
        let integral = g_tilde_integral_oracle(0.5).unwrap();
        assert!((series - integral).abs() < 1e-12, "{series} vs {integral}");
        assert!(g_tilde(-0.1).is_err());
        assert!(g_tilde(1.1).is_err());
    }

    #[test]
    fn g_tilde_is_increasing() {
        let mut prev = -1.0;
        for k in 0..=100 {
            let v = g_tilde(k as f64 / 100.0).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn f_derivatives_match_finite_differences_of_f() {
        let f = |lam: f64| g_tilde((-lam).exp()).unwrap();
        for lam in [0.1, 0.5, 1.0, 3.0] {
            let h = 1e-5;
            let fd1 = (f(lam + h) - f(lam - h)) / (2.0 * h);
            let fd2 = (f(lam + h) - 2.0 * f(lam) + f(lam - h)) / (h * h);
            assert!((f_prime(lam) - fd1).abs() < 1e-7 * fd1.abs().max(1.0));
            assert!((f_double_prime(lam) - fd2).abs() < 1e-3 * fd2.abs());
            assert!(f_prime(lam) <= 0.0);
            assert!(f_double_prime(lam) > 0.0);
        }
    }

    #[test]
    fn q_n_basics() {
        let bp = Bipotential::new(EnsembleSpec::bargmann_fock(8, 1.0).unwrap());
        let z = c(0.3, -0.2);
        assert!((bp.q_n(z, z).unwrap() - 1.0 / 24.0).abs() < 1e-15);
        // Symmetric, and decaying like exp(-N |z-w|^2) / 4pi^2 at long range.
        let w = c(-0.8, 0.5);
        assert_eq!(bp.q_n(z, w).unwrap(), bp.q_n(w, z).unwrap());
        let far = c(1.5, 0.0);
        let q = bp.q_n(c(0.0, 0.0), far).unwrap();
        let lead = (-8.0 * far.norm_sqr()).exp() / (4.0 * PI * PI);
        assert!((q / lead - 1.0).abs() < 1e-3, "ratio {}", q / lead);
    }

    #[test]
    fn pair_log_moment_is_reproducible_and_seed_sensitive() {
        let a = pair_log_moment(0.6, 200_000, 11).unwrap();
        let b = pair_log_moment(0.6, 200_000, 11).unwrap();
        assert_eq!(a.mean, b.mean);
        let c = pair_log_moment(0.6, 200_000, 12).unwrap();
        assert!((a.mean - c.mean).abs() < 6.0 * (a.stderr + c.stderr));
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn variance_count_full_sphere_is_zero() {
        let bp = Bipotential::new(EnsembleSpec::su2(12).unwrap());
        let quad = BoundaryQuadrature::default_for(12, &Domain::full_sphere());
        let v = bp.variance_count(&Domain::full_sphere(), &quad).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn variance_count_geometry_mismatch_rejected() {
        let bp = Bipotential::new(EnsembleSpec::su2(12).unwrap());
        let d = Domain::disk(c(0.0, 0.0), 1.0, crate::geometry::GeometryModel::flat()).unwrap();
        let quad = BoundaryQuadrature::default_for(12, &d);
        assert!(matches!(bp.variance_count(&d, &quad), Err(BipotentialError::GeometryMismatch)));
    }

    #[test]
    fn variance_smooth_zero_function() {
        let bp = Bipotential::new(EnsembleSpec::bargmann_fock(16, 1.0).unwrap());
        let phi = TestFunction::zero(crate::geometry::GeometryModel::flat());
        let v = bp.variance_smooth(&phi, &TensorQuadrature::default()).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn variance_count_stable_under_mode_swap() {
        let spec = EnsembleSpec::su2(16).unwrap();
        let bp = Bipotential::new(spec);
        let d = Domain::disk(c(0.0, 0.0), 1.0, crate::geometry::GeometryModel::fubini_study())
            .unwrap();
        let mut quad = BoundaryQuadrature::default_for(16, &d);
        let offset = bp.variance_count(&d, &quad).unwrap();
        quad.mode = DiagonalHandling::LocalRefinement;
        quad.rel_tol = 1e-4;
        let aligned = bp.variance_count(&d, &quad).unwrap();
        assert!(
            (offset.value - aligned.value).abs() < 5e-3 * offset.value,
            "offset {} vs aligned {}",
            offset.value,
            aligned.value
        );
        assert!(offset.value > 0.0);
    }
}
