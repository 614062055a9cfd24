//! Numerical laboratory for the zero statistics of Gaussian random
//! holomorphic sections in three explicit model ensembles:
//!
//! - `SU(2)`: degree-`N` polynomials with binomial-weighted Gaussian
//!   coefficients, zeros uniform on the Fubini-Study sphere;
//! - Bargmann-Fock: Gaussian entire functions on the plane;
//! - `SU(1,1)`: Gaussian series on the hyperbolic disk.
//!
//! The crate samples sections, locates their zeros (simultaneous-iteration
//! root finding cross-checked by the argument principle), measures counts and
//! smooth linear statistics over domains, and compares the fluctuations
//! against exact bipotential variance integrals and their large-`N`
//! asymptotics (a `sqrt(N) * Length(boundary)` law for counts, a `1/N` law for
//! smooth statistics, and asymptotic normality).
//!
//! Modules mirror the pipeline: [`geometry`] (metrics and domains),
//! [`ensembles`] (sampling and Szego kernels), [`zeros`] (root finding and
//! statistics), [`bipotential`] (exact variance quadrature), [`predictions`]
//! (asymptotic constants and kernel scaling checks), [`montecarlo`] (the
//! reproducible trial harness), and [`cli`] (run configs and artifacts).

pub mod bipotential;
pub mod cli;
pub mod ensembles;
pub mod geometry;
pub mod montecarlo;
pub mod predictions;
pub mod quad;
pub mod zeros;

pub use num_complex::Complex64;
