//! Null geodesics of the slowly rotating Kerr spacetime in Kerr-star coordinates.
//!
//! The crate covers the metric and its connection, constants of motion, the
//! radial and polar potentials, an adaptive geodesic integrator with event
//! detection, the family of negative-radius spherical photon orbits with
//! `Q < 0`, the elliptic integrals needed for their time increment, and a
//! classifier that sorts null geodesics by their constants of motion.

pub mod classifier;
pub mod constants;
pub mod elliptic;
pub mod error;
pub mod integrator;
pub mod kerr;
pub mod potentials;
pub mod quadrature;
pub mod selftest;
pub mod spherical;

pub use classifier::{classify, radial_extent, Branch, CaseVerdict, ReasonCode};
pub use constants::{constants_from_state, MotionConstants, RescaledConstants};
pub use error::{KerrError, Result};
pub use integrator::{integrate, EventKind, GeodesicState, IntegratorOptions, Trajectory};
pub use kerr::{BLPoint, Block, CanonicalFrame, Chart, KerrParams, KerrStarPoint, TangentVector};
pub use potentials::{radial_poly, radial_roots, PolarPotential, RadialPoly, RootReport};
pub use spherical::{ExistenceWindow, SphericalOrbit};
