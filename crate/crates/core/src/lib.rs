//! Exact and Monte Carlo machinery for studying how close the value
//! distributions of Laplacian eigenfunctions on spheres and flat tori are
//! to the standard Gaussian.
//!
//! The crate is organized around three eigenfunction families (traceless
//! quadratic harmonics on `S^{n-1}`, Gegenbauer zonal combinations of odd
//! degree, and trigonometric combinations on a flat torus `(T^n, B)`),
//! together with:
//!
//! - [`exact_arith`]: arbitrary-precision rationals, double factorials and
//!   Γ at half-integer arguments, so closed-form constants carry no
//!   floating-point error;
//! - [`sphere_moments`]: exact expectations of sparse polynomials under the
//!   uniform measure on `S^{n-1}`;
//! - [`eigenfunctions`]: constructors, evaluators, gradients and exact
//!   polynomial forms for the three families;
//! - [`sampling`]: seeded, reproducible samplers for spheres, tori, tangent
//!   spheres and geodesic steps;
//! - [`stein_bounds`]: the total-variation bounds, exact where the inputs
//!   are rational and Monte Carlo otherwise;
//! - [`tv_estimation`]: empirical value distributions and their binned
//!   total-variation / Kolmogorov-Smirnov distances to `N(0,1)`;
//! - [`exchangeable_lab`]: numerical certification of the drift, diffusion
//!   and third-moment conditions for geodesic exchangeable pairs;
//! - [`identity_verifier`]: exact verification of the combinatorial
//!   identities behind the degree-l normalization constants.

pub mod eigenfunctions;
pub mod exact_arith;
pub mod exchangeable_lab;
pub mod fingerprint;
pub mod identity_verifier;
pub(crate) mod linalg;
pub mod sampling;
pub mod sphere_moments;
pub mod stats;
pub mod stein_bounds;
pub mod tv_estimation;

pub use exact_arith::Rational;
