//! The three model Gaussian ensembles: coefficient sampling, stable section
//! evaluation, and closed-form normalized Szego kernels with their Wirtinger
//! derivatives.
//!
//! Chart conventions (unit basis weights, the ensemble-wide normalization
//! constant dropped since it never moves a zero):
//!
//! - `SU(2)`, degree `N`:  `s(z) = sum_j c_j sqrt(C(N,j)) z^j`,
//! - Bargmann-Fock at metric power `N` (series truncated for computation):
//!   `s(z) = sum_k c_k N^{k/2} z^k / sqrt(k!)`,
//! - `SU(1,1)`, `N >= 2`, on the unit disk:
//!   `s(z) = sum_n c_n sqrt(C(N+n-1,n)) z^n`,
//!
//! with i.i.d. standard complex Gaussian `c_j`. The `SU(1,1)` Szego kernel is
//! implemented as `(1 - z wbar)^{-N}`, the value forced by summing this
//! orthonormal basis.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::geometry::GeometryModel;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("invalid ensemble spec: {0}")]
    InvalidSpec(String),
    #[error("point {z} lies outside the ensemble chart")]
    OutsideChart { z: Complex64 },
    #[error("degenerate sample: all coefficients vanish")]
    DegenerateSample,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnsembleFamily {
    /// Degree-N polynomials, zeros uniform on the Fubini-Study sphere.
    Su2 { n: u32 },
    /// Gaussian entire functions at metric power N, truncated for sampling.
    BargmannFock { n: u32, truncation_degree: u32 },
    /// Hyperbolic Gaussian series on the unit disk, N >= 2.
    Su11 { n: u32, truncation_degree: u32 },
}

/// Default truncation degree for the series ensembles: the coefficient
/// variance profile at chart radius `R` is Poisson-like with mean `N R^2`,
/// so `N R^2 + 8 sqrt(N R^2) + 20` terms push truncation-induced zero
/// miscounts below ~1e-4 per trial.
pub fn default_truncation_degree(n: u32, chart_radius: f64) -> u32 {
    let m = n as f64 * chart_radius * chart_radius;
    (m + 8.0 * m.sqrt() + 20.0).ceil() as u32
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub family: EnsembleFamily,
}

impl EnsembleSpec {
    pub fn su2(n: u32) -> Result<Self, EnsembleError> {
        if n == 0 {
            return Err(EnsembleError::InvalidSpec("SU(2) requires N >= 1".into()));
        }
        Ok(Self { family: EnsembleFamily::Su2 { n } })
    }

    /// Bargmann-Fock ensemble truncated for experiments within chart radius
    /// `chart_radius`.
    pub fn bargmann_fock(n: u32, chart_radius: f64) -> Result<Self, EnsembleError> {
        if n == 0 {
            return Err(EnsembleError::InvalidSpec("Bargmann-Fock requires N >= 1".into()));
        }
        if !(chart_radius > 0.0) {
            return Err(EnsembleError::InvalidSpec("chart radius must be positive".into()));
        }
        Ok(Self {
            family: EnsembleFamily::BargmannFock {
                n,
                truncation_degree: default_truncation_degree(n, chart_radius),
            },
        })
    }

    pub fn su11(n: u32, chart_radius: f64) -> Result<Self, EnsembleError> {
        if n < 2 {
            return Err(EnsembleError::InvalidSpec("SU(1,1) requires N >= 2".into()));
        }
        if !(chart_radius > 0.0 && chart_radius < 1.0) {
            return Err(EnsembleError::InvalidSpec(
                "SU(1,1) experiments live strictly inside the unit disk".into(),
            ));
        }
        Ok(Self {
            family: EnsembleFamily::Su11 {
                n,
                truncation_degree: default_truncation_degree(n, chart_radius),
            },
        })
    }

    /// Override the truncation degree (series families). Used for the
    /// truncation-stability checks that double it.
    pub fn with_truncation_degree(mut self, degree: u32) -> Result<Self, EnsembleError> {
        match &mut self.family {
            EnsembleFamily::Su2 { .. } => Err(EnsembleError::InvalidSpec(
                "SU(2) has a fixed coefficient dimension N+1".into(),
            )),
            EnsembleFamily::BargmannFock { truncation_degree, .. }
            | EnsembleFamily::Su11 { truncation_degree, .. } => {
                if degree < 20 {
                    return Err(EnsembleError::InvalidSpec(
                        "truncation degree below the rule minimum of 20".into(),
                    ));
                }
                *truncation_degree = degree;
                Ok(self)
            }
        }
    }

    pub fn n(&self) -> u32 {
        match self.family {
            EnsembleFamily::Su2 { n }
            | EnsembleFamily::BargmannFock { n, .. }
            | EnsembleFamily::Su11 { n, .. } => n,
        }
    }

    /// Number of sampled coefficients.
    pub fn dimension(&self) -> usize {
        match self.family {
            EnsembleFamily::Su2 { n } => n as usize + 1,
            EnsembleFamily::BargmannFock { truncation_degree, .. }
            | EnsembleFamily::Su11 { truncation_degree, .. } => truncation_degree as usize + 1,
        }
    }

    /// The background metric this ensemble's zero statistics live in.
    pub fn geometry(&self) -> GeometryModel {
        match self.family {
            EnsembleFamily::Su2 { .. } => GeometryModel::fubini_study(),
            EnsembleFamily::BargmannFock { .. } => GeometryModel::flat(),
            EnsembleFamily::Su11 { .. } => GeometryModel::hyperbolic(),
        }
    }

    pub fn chart_contains(&self, z: Complex64) -> bool {
        match self.family {
            EnsembleFamily::Su11 { .. } => z.norm() < 1.0,
            _ => true,
        }
    }

    /// log of the deterministic basis weight multiplying `z^j`.
    pub fn basis_log_weight(&self, j: usize) -> f64 {
        let jf = j as f64;
        match self.family {
            EnsembleFamily::Su2 { n } => 0.5 * ln_binomial(n as f64, jf),
            EnsembleFamily::BargmannFock { n, .. } => {
                0.5 * jf * (n as f64).ln() - 0.5 * ln_gamma(jf + 1.0)
            }
            EnsembleFamily::Su11 { n, .. } => 0.5 * ln_binomial(n as f64 + jf - 1.0, jf),
        }
    }

    /// Chart rescaling radius balancing the coefficient profile; roots of the
    /// rescaled polynomial cluster around the unit circle.
    fn profile_scale(&self) -> f64 {
        match self.family {
            EnsembleFamily::Su2 { .. } | EnsembleFamily::Su11 { .. } => 1.0,
            EnsembleFamily::BargmannFock { n, truncation_degree } => {
                (truncation_degree as f64 / n as f64).sqrt()
            }
        }
    }

    /// Ratio |profile(j-1)| / |profile(j)| of consecutive coefficient scales,
    /// i.e. the radius at which the j-th basis term overtakes the previous
    /// one. Seeds the root-finder initialization.
    pub fn profile_radius(&self, j: usize) -> f64 {
        let jf = j as f64;
        match self.family {
            EnsembleFamily::Su2 { n } => (jf / (n as f64 - jf + 1.0)).sqrt(),
            EnsembleFamily::BargmannFock { n, .. } => (jf / n as f64).sqrt(),
            EnsembleFamily::Su11 { n, .. } => (jf / (n as f64 + jf - 1.0)).sqrt(),
        }
    }
}

fn ln_binomial(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

// -- sampling ---------------------------------------------------------------

/// Counter-style stream: one ChaCha key per experiment seed, one stream per
/// trial, coefficients drawn in index order. Worker scheduling can never
/// change a draw.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    let mut s = seed;
    for chunk in key.chunks_exact_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    let mut rng = ChaCha12Rng::from_seed(key);
    rng.set_stream(trial_index);
    rng
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn unit_open01(rng: &mut impl RngCore) -> f64 {
    // 53 uniform bits mapped into (0, 1]; never 0, so the log below is finite.
    (((rng.next_u64() >> 11) + 1) as f64) * (1.0 / 9_007_199_254_740_992.0)
}

/// Standard complex Gaussian: E c = 0, E c^2 = 0, E |c|^2 = 1.
#[inline]
pub fn standard_complex_gaussian(rng: &mut impl RngCore) -> Complex64 {
    let r = (-unit_open01(rng).ln()).sqrt();
    let theta = std::f64::consts::TAU * ((rng.next_u64() >> 11) as f64 / 9_007_199_254_740_992.0);
    Complex64::from_polar(r, theta)
}

/// Standard real Gaussian N(0, 1).
#[inline]
pub fn standard_real_gaussian(rng: &mut impl RngCore) -> f64 {
    let r = (-2.0 * unit_open01(rng).ln()).sqrt();
    let theta = std::f64::consts::TAU * ((rng.next_u64() >> 11) as f64 / 9_007_199_254_740_992.0);
    r * theta.cos()
}

/// One random coefficient vector. Regenerating with the same
/// `(seed, trial_index)` reproduces the coefficients bit-exactly.
#[derive(Clone, Debug)]
pub struct SectionSample {
    pub coefficients: Vec<Complex64>,
    pub ensemble: EnsembleSpec,
    pub seed: u64,
    pub trial_index: u64,
}

pub fn sample(ensemble: &EnsembleSpec, seed: u64, trial_index: u64) -> SectionSample {
    let mut rng = trial_rng(seed, trial_index);
    let coefficients = (0..ensemble.dimension())
        .map(|_| standard_complex_gaussian(&mut rng))
        .collect();
    SectionSample { coefficients, ensemble: *ensemble, seed, trial_index }
}

impl SectionSample {
    /// A sample with caller-chosen coefficients (test constructions).
    pub fn from_coefficients(
        ensemble: EnsembleSpec,
        coefficients: Vec<Complex64>,
    ) -> Result<Self, EnsembleError> {
        if coefficients.len() != ensemble.dimension() {
            return Err(EnsembleError::InvalidSpec(format!(
                "expected {} coefficients, got {}",
                ensemble.dimension(),
                coefficients.len()
            )));
        }
        Ok(Self { coefficients, ensemble, seed: 0, trial_index: 0 })
    }
}

// -- chart evaluation --------------------------------------------------------

/// The sampled section as a chart polynomial, rescaled so its coefficients
/// and evaluations stay inside f64 range for N well beyond 512.
///
/// Internally stores `q(u) = s(alpha u)`; evaluation at `|u| > 1` goes
/// through the reversed polynomial `u^d q(1/u)` for conditioning.
#[derive(Clone, Debug)]
pub struct ChartPolynomial {
    coeffs: Vec<Complex64>,
    reversed: Vec<Complex64>,
    alpha: f64,
}

impl ChartPolynomial {
    pub fn from_sample(sample: &SectionSample) -> Result<Self, EnsembleError> {
        let spec = &sample.ensemble;
        if sample.coefficients.iter().all(|c| c.norm_sqr() == 0.0) {
            return Err(EnsembleError::DegenerateSample);
        }
        let alpha = spec.profile_scale();
        let ln_alpha = alpha.ln();
        let coeffs: Vec<Complex64> = sample
            .coefficients
            .iter()
            .enumerate()
            .map(|(j, c)| c * (spec.basis_log_weight(j) + j as f64 * ln_alpha).exp())
            .collect();
        let reversed = coeffs.iter().rev().copied().collect();
        Ok(Self { coeffs, reversed, alpha })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Degree after stripping numerically vanished leading coefficients.
    pub fn effective_degree(&self) -> usize {
        let mut d = self.coeffs.len() - 1;
        while d > 0 && self.coeffs[d].norm_sqr() == 0.0 {
            d -= 1;
        }
        d
    }

    pub fn scale(&self) -> f64 {
        self.alpha
    }

    /// Scaled coefficients of q(u) = s(alpha u).
    pub(crate) fn scaled_coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Value of the section at chart point `z`, as (log-modulus, phase).
    /// An exact zero reports log-modulus -inf.
    pub fn log_polar(&self, z: Complex64) -> (f64, f64) {
        let u = z / self.alpha;
        let (v, extra_log, extra_arg) = if u.norm_sqr() <= 1.0 {
            (horner(&self.coeffs, u), 0.0, 0.0)
        } else {
            let inv = 1.0 / u;
            let d = self.degree() as f64;
            (horner(&self.reversed, inv), d * u.norm().ln(), d * u.arg())
        };
        if v.norm_sqr() == 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        (v.norm().ln() + extra_log, v.arg() + extra_arg)
    }

}

#[inline]
fn horner(coeffs: &[Complex64], u: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * u + c;
    }
    acc
}

/// Evaluate the sampled section at a chart point: `s(z) = exp(log_modulus +
/// i phase)`. Stable for N up to and beyond 512 (log-scaled basis weights).
pub fn evaluate(sample: &SectionSample, z: Complex64) -> Result<(f64, f64), EnsembleError> {
    if !sample.ensemble.chart_contains(z) {
        return Err(EnsembleError::OutsideChart { z });
    }
    let poly = ChartPolynomial::from_sample(sample)?;
    Ok(poly.log_polar(z))
}

// -- kernels ------------------------------------------------------------------

/// Wirtinger data of `Lambda = -log P_N` at a pair of chart points.
///
/// For all three model kernels `Pi_N(z,w)` is holomorphic in `z` and
/// antiholomorphic in `w`, so the doubly-antiholomorphic second derivative
/// `d2 Lambda / dzbar dwbar` vanishes identically; it is carried explicitly
/// because the variance boundary integrand is written against it. The mixed
/// derivative `d2 Lambda / dz dwbar` is the non-trivial one (`-N/2` for
/// Bargmann-Fock).
#[derive(Clone, Copy, Debug)]
pub struct LambdaDerivatives {
    pub lambda: f64,
    pub d_zbar: Complex64,
    pub d_wbar: Complex64,
    pub d2_dzbar_dwbar: Complex64,
    pub d2_dz_dwbar: Complex64,
    /// Set when z == w exactly; the second derivatives stay finite there.
    pub on_diagonal: bool,
}

/// Closed-form Szego kernel data for one ensemble.
#[derive(Clone, Copy, Debug)]
pub struct KernelEvaluator {
    pub ensemble: EnsembleSpec,
}

impl KernelEvaluator {
    pub fn new(ensemble: EnsembleSpec) -> Self {
        Self { ensemble }
    }

    fn check_chart(&self, z: Complex64) -> Result<(), EnsembleError> {
        if self.ensemble.chart_contains(z) {
            Ok(())
        } else {
            Err(EnsembleError::OutsideChart { z })
        }
    }

    /// `Lambda_N(z, w) = -log P_N(z, w) >= 0`, computed in log scale.
    pub fn lambda(&self, z: Complex64, w: Complex64) -> Result<f64, EnsembleError> {
        self.check_chart(z)?;
        self.check_chart(w)?;
        let n = self.ensemble.n() as f64;
        let lam = match self.ensemble.family {
            EnsembleFamily::Su2 { .. } => {
                let cross = (Complex64::new(1.0, 0.0) + z * w.conj()).norm_sqr();
                0.5 * n * (z.norm_sqr().ln_1p() + w.norm_sqr().ln_1p() - cross.ln())
            }
            EnsembleFamily::BargmannFock { .. } => 0.5 * n * (z - w).norm_sqr(),
            EnsembleFamily::Su11 { .. } => {
                let cross = (Complex64::new(1.0, 0.0) - z * w.conj()).norm_sqr();
                0.5 * n * (cross.ln() - (-z.norm_sqr()).ln_1p() - (-w.norm_sqr()).ln_1p())
            }
        };
        Ok(lam.max(0.0))
    }

    /// Normalized Szego kernel `P_N(z, w) = exp(-Lambda) in [0, 1]`.
    pub fn normalized_kernel(&self, z: Complex64, w: Complex64) -> Result<f64, EnsembleError> {
        Ok((-self.lambda(z, w)?).exp())
    }

    pub fn lambda_and_derivatives(
        &self,
        z: Complex64,
        w: Complex64,
    ) -> Result<LambdaDerivatives, EnsembleError> {
        let lambda = self.lambda(z, w)?;
        let n = self.ensemble.n() as f64;
        let half_n = 0.5 * n;
        let one = Complex64::new(1.0, 0.0);
        let (d_zbar, d_wbar, d2_dz_dwbar) = match self.ensemble.family {
            EnsembleFamily::Su2 { .. } => {
                let czw = one + z * w.conj();
                let cwz = one + z.conj() * w;
                (
                    half_n * (z / (1.0 + z.norm_sqr()) - w / cwz),
                    half_n * (w / (1.0 + w.norm_sqr()) - z / czw),
                    -half_n / (czw * czw),
                )
            }
            EnsembleFamily::BargmannFock { .. } => (
                half_n * (z - w),
                half_n * (w - z),
                Complex64::new(-half_n, 0.0),
            ),
            EnsembleFamily::Su11 { .. } => {
                let czw = one - z * w.conj();
                let cwz = one - z.conj() * w;
                (
                    half_n * (z / (1.0 - z.norm_sqr()) - w / cwz),
                    half_n * (w / (1.0 - w.norm_sqr()) - z / czw),
                    -half_n / (czw * czw),
                )
            }
        };
        Ok(LambdaDerivatives {
            lambda,
            d_zbar,
            d_wbar,
            d2_dzbar_dwbar: Complex64::new(0.0, 0.0),
            d2_dz_dwbar,
            on_diagonal: z == w,
        })
    }

    /// log of the diagonal Szego kernel in the chart trivialization,
    /// including the ensemble-wide constant; `(i/2pi) ddbar` of this is the
    /// expected zero density.
    pub fn log_diagonal_szego(&self, z: Complex64) -> Result<f64, EnsembleError> {
        self.check_chart(z)?;
        let n = self.ensemble.n() as f64;
        let pi = std::f64::consts::PI;
        Ok(match self.ensemble.family {
            EnsembleFamily::Su2 { .. } => ((n + 1.0) / pi).ln() + n * z.norm_sqr().ln_1p(),
            EnsembleFamily::BargmannFock { .. } => (n / pi).ln() + n * z.norm_sqr(),
            EnsembleFamily::Su11 { .. } => ((n - 1.0) / pi).ln() - n * (-z.norm_sqr()).ln_1p(),
        })
    }
}

/// Reference Szego kernel by direct orthonormal-basis summation,
/// independent of the closed forms (slow; for cross-checks and selftest).
/// Returns the chart kernel `sum_j w_j^2 (z wbar)^j` including the
/// ensemble-wide constant.
pub fn basis_kernel_oracle(ensemble: &EnsembleSpec, z: Complex64, w: Complex64) -> Complex64 {
    let x = z * w.conj();
    let pi = std::f64::consts::PI;
    let nf = ensemble.n() as f64;
    match ensemble.family {
        EnsembleFamily::Su2 { n } => {
            let mut term = Complex64::new(1.0, 0.0);
            let mut acc = term;
            for j in 0..n as usize {
                term = term * x * ((n as usize - j) as f64) / (j as f64 + 1.0);
                acc += term;
            }
            acc * ((nf + 1.0) / pi)
        }
        EnsembleFamily::BargmannFock { .. } => {
            // sum_k (N x)^k / k!, run until the tail is negligible.
            let scaled = x * nf;
            let mut term = Complex64::new(1.0, 0.0);
            let mut acc = term;
            let mut k = 1.0;
            loop {
                term = term * scaled / k;
                acc += term;
                if term.norm() <= 1e-18 * acc.norm().max(1e-300) && k > scaled.norm() {
                    break;
                }
                k += 1.0;
                assert!(k < 1e6, "Bargmann-Fock basis sum failed to converge");
            }
            acc * (nf / pi)
        }
        EnsembleFamily::Su11 { n, .. } => {
            let mut term = Complex64::new(1.0, 0.0);
            let mut acc = term;
            let mut j = 0.0;
            loop {
                term = term * x * (n as f64 + j) / (j + 1.0);
                acc += term;
                if term.norm() <= 1e-18 * acc.norm().max(1e-300) {
                    break;
                }
                j += 1.0;
                assert!(j < 1e7, "SU(1,1) basis sum failed to converge");
            }
            acc * ((nf - 1.0) / pi)
        }
    }
}

// -- run-config literal -------------------------------------------------------

/// Serde image of the ensemble literal used in run configs, e.g.
/// `{"family":"su2","N":128}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleLiteral {
    pub family: String,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_degree: Option<u32>,
}

impl EnsembleLiteral {
    pub fn build(&self) -> Result<EnsembleSpec, EnsembleError> {
        let spec = match self.family.as_str() {
            "su2" => EnsembleSpec::su2(self.n)?,
            "bf" | "bargmann_fock" => {
                let r = self.chart_radius.unwrap_or(1.0);
                EnsembleSpec::bargmann_fock(self.n, r)?
            }
            "su11" => {
                let r = self.chart_radius.unwrap_or(0.5);
                EnsembleSpec::su11(self.n, r)?
            }
            other => {
                return Err(EnsembleError::InvalidSpec(format!("unknown family {other:?}")))
            }
        };
        match self.truncation_degree {
            Some(d) => spec.with_truncation_degree(d),
            None => Ok(spec),
        }
    }

    pub fn of(spec: &EnsembleSpec) -> Self {
        match spec.family {
            EnsembleFamily::Su2 { n } => EnsembleLiteral {
                family: "su2".into(),
                n,
                chart_radius: None,
                truncation_degree: None,
            },
            EnsembleFamily::BargmannFock { n, truncation_degree } => EnsembleLiteral {
                family: "bf".into(),
                n,
                chart_radius: None,
                truncation_degree: Some(truncation_degree),
            },
            EnsembleFamily::Su11 { n, truncation_degree } => EnsembleLiteral {
                family: "su11".into(),
                n,
                chart_radius: None,
                truncation_degree: Some(truncation_degree),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn su2_coefficient_dimension() {
        assert_eq!(EnsembleSpec::su2(5).unwrap().dimension(), 6);
    }

    #[test]
    fn truncation_rule() {
        // N R^2 = 256 -> 256 + 8*16 + 20.
        assert_eq!(default_truncation_degree(1, 16.0), 404);
        assert_eq!(default_truncation_degree(64, 1.0), 64 + 64 + 20);
    }

    #[test]
    fn sampling_is_reproducible_per_trial() {
        let spec = EnsembleSpec::su2(16).unwrap();
        let a = sample(&spec, 42, 7);
        let b = sample(&spec, 42, 7);
        assert_eq!(a.coefficients, b.coefficients);
        let c = sample(&spec, 42, 8);
        assert_ne!(a.coefficients, c.coefficients);
        let d = sample(&spec, 43, 7);
        assert_ne!(a.coefficients, d.coefficients);
    }

    #[test]
    fn evaluate_su2_linear_section() {
        // N=1 basis weights sqrt(C(1,j)) = 1, so c=(0,1) is s(z) = z.
        let spec = EnsembleSpec::su2(1).unwrap();
        let s = SectionSample::from_coefficients(spec, vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let (logm, phase) = evaluate(&s, c(2.0, 0.0)).unwrap();
        assert!((logm - 2.0f64.ln()).abs() < 1e-12);
        assert!(phase.abs() < 1e-12);
        let (logm, _) = evaluate(&s, c(0.0, 0.0)).unwrap();
        assert_eq!(logm, f64::NEG_INFINITY);
    }

    #[test]
    fn evaluate_bf_constant_section() {
        let spec = EnsembleSpec::bargmann_fock(1, 1.0).unwrap();
        let mut coeffs = vec![c(0.0, 0.0); spec.dimension()];
        coeffs[0] = c(1.0, 0.0);
        let s = SectionSample::from_coefficients(spec, coeffs).unwrap();
        for z in [c(0.0, 0.0), c(0.7, -0.3), c(2.0, 1.0)] {
            let (logm, _) = evaluate(&s, z).unwrap();
            assert!(logm.abs() < 1e-12, "k=0 basis weight is 1");
        }
    }

    #[test]
    fn degenerate_sample_is_signalled() {
        let spec = EnsembleSpec::su2(2).unwrap();
        let s = SectionSample::from_coefficients(spec, vec![c(0.0, 0.0); 3]).unwrap();
        assert!(matches!(evaluate(&s, c(1.0, 0.0)), Err(EnsembleError::DegenerateSample)));
    }

    #[test]
    fn normalized_kernel_closed_forms() {
        let su2 = KernelEvaluator::new(EnsembleSpec::su2(1).unwrap());
        let bf = KernelEvaluator::new(EnsembleSpec::bargmann_fock(4, 1.0).unwrap());
        let su11 = KernelEvaluator::new(EnsembleSpec::su11(3, 0.8).unwrap());
        for k in [&su2, &bf, &su11] {
            let z = c(0.3, 0.1);
            assert!((k.normalized_kernel(z, z).unwrap() - 1.0).abs() < 1e-15);
        }
        let p = bf.normalized_kernel(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!((p - (-2.0f64).exp()).abs() < 1e-14);
        let p = su2.normalized_kernel(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!((p - 1.0 / 2.0f64.sqrt()).abs() < 1e-14);
        assert!(matches!(
            su11.normalized_kernel(c(1.0, 0.0), c(0.0, 0.0)),
            Err(EnsembleError::OutsideChart { .. })
        ));
    }

    #[test]
    fn lambda_values_and_bf_derivatives() {
        let su2 = KernelEvaluator::new(EnsembleSpec::su2(1).unwrap());
        let lam = su2.lambda(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!((lam - 0.5 * 2.0f64.ln()).abs() < 1e-14);

        let n = 16;
        let bf = KernelEvaluator::new(EnsembleSpec::bargmann_fock(n, 1.0).unwrap());
        let z = c(0.4, -0.2);
        let w = c(-0.1, 0.3);
        let d = bf.lambda_and_derivatives(z, w).unwrap();
        let nf = n as f64;
        assert!((d.lambda - 0.5 * nf * (z - w).norm_sqr()).abs() < 1e-12);
        assert!((d.d_zbar - (z - w) * (0.5 * nf)).norm() < 1e-12);
        assert!((d.d_wbar - (w - z) * (0.5 * nf)).norm() < 1e-12);
        assert!((d.d2_dz_dwbar - c(-0.5 * nf, 0.0)).norm() < 1e-12);
        assert_eq!(d.d2_dzbar_dwbar, c(0.0, 0.0));
        assert!(!d.on_diagonal);

        let diag = bf.lambda_and_derivatives(z, z).unwrap();
        assert!(diag.on_diagonal);
        assert_eq!(diag.lambda, 0.0);
        assert!(diag.d_zbar.norm() < 1e-15);
    }

    #[test]
    fn kernel_monotone_decreasing_in_n() {
        let z = c(0.2, 0.1);
        let w = c(-0.3, 0.4);
        let makers: [fn(u32) -> EnsembleSpec; 3] = [
            |n| EnsembleSpec::su2(n).unwrap(),
            |n| EnsembleSpec::bargmann_fock(n, 1.0).unwrap(),
            |n| EnsembleSpec::su11(n.max(2), 0.6).unwrap(),
        ];
        for mk in makers {
            let mut prev = f64::INFINITY;
            for n in [2, 4, 8, 16, 32] {
                let p = KernelEvaluator::new(mk(n)).normalized_kernel(z, w).unwrap();
                assert!(p < prev, "P_N must strictly decrease in N off the diagonal");
                prev = p;
            }
        }
    }

    #[test]
    fn basis_oracle_matches_closed_form_kernel() {
        // The full 100-pair sweep lives in the integration oracles; this is a
        // smoke check of the same identity at one point per family.
        let z = c(0.5, -0.2);
        let w = c(-0.3, 0.7);
        for spec in [
            EnsembleSpec::su2(9).unwrap(),
            EnsembleSpec::bargmann_fock(7, 1.0).unwrap(),
            EnsembleSpec::su11(5, 0.8).unwrap(),
        ] {
            let (z, w) = if matches!(spec.family, EnsembleFamily::Su11 { .. }) {
                (z * 0.9, w * 0.9)
            } else {
                (z, w)
            };
            let k = KernelEvaluator::new(spec);
            let p_closed = k.normalized_kernel(z, w).unwrap();
            let pzw = basis_kernel_oracle(&spec, z, w).norm();
            let pzz = basis_kernel_oracle(&spec, z, z).norm();
            let pww = basis_kernel_oracle(&spec, w, w).norm();
            let p_oracle = pzw / (pzz * pww).sqrt();
            assert!((p_closed - p_oracle).abs() < 1e-12 * p_oracle.max(1.0));
        }
    }
}
