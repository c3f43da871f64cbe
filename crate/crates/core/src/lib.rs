//! Numerical laboratory for Loewner chains with g-parametric representation
//! on the unit balls of three bounded symmetric domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`disc`] evaluates the disc functions `g`, their boundary distance
//!   `d1(g)`, the radial functional `a0(g)` and membership in `g(U)`.
//! * [`geometry`] realizes the Euclidean ball, the polydisc and the 2x2
//!   spectral ball with their norms, support functionals and samplers.
//! * [`carath`] holds holomorphic maps of the ball, second-order Taylor
//!   coefficient extraction, the shearing operator and the `M_g` certifier.
//! * [`loewner`] integrates the Loewner ODE for piecewise-constant Herglotz
//!   fields and builds parametric limits and the unbounded support map.
//! * [`extremal`] runs the coefficient-bound scans.
//! * [`reports`] is the experiment runner behind the command-line tool.

pub mod carath;
pub mod disc;
pub mod error;
pub mod extremal;
pub mod geometry;
pub mod loewner;
pub mod numeric;
pub mod reports;

pub use error::{LabError, Result};

use num_complex::Complex64;
use smallvec::SmallVec;

/// Complex scalar used throughout the crate.
pub type C = Complex64;

/// A point of `C^n`. All geometries in the lab have `n <= 4`, so points stay
/// on the stack.
pub type CVec = SmallVec<[C; 4]>;

/// Seeded generator used by every sampler. Streams are reproducible across
/// platforms.
pub type LabRng = rand_chacha::ChaCha8Rng;

/// Builds a [`LabRng`] from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> LabRng {
    use rand::SeedableRng;
    LabRng::seed_from_u64(seed)
}
