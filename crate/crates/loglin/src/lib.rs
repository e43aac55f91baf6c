//! Tracking control on SE(2) through exact log-linear error dynamics.
//!
//! For vehicles whose pose evolves under mixed-invariant dynamics
//! `Xdot = X wedge(l) + wedge(r) X`, the logarithm of the tracking error
//! between vehicle and reference obeys a *linear* ODE exactly — not as a
//! small-error approximation — once the inputs are passed through a
//! state-dependent distortion matrix `U`.  This crate implements that
//! machinery for SE(2) and everything needed to turn it into runtime
//! safety certificates:
//!
//! - [`se2`]: the group, its algebra, adjoints, and the distortion
//!   matrices in closed and series form
//! - [`error_dyn`]: left/right tracking errors, exact log-space dynamics,
//!   and the dynamic-inversion control law
//! - [`sim`]: fixed-step Runge–Kutta–Munthe-Kaas integration on the group,
//!   closed-loop simulation, and Monte Carlo batches
//! - [`synth`]: Riccati/LQR gain design plus disturbance-invariant
//!   ellipsoids for the polytopic closed loop (log-barrier LMI solves with
//!   a fixed-point iteration on the distortion bound)
//! - [`trajectory`]: minimum-snap reference planning, differentially flat
//!   outputs, and interval hulls
//! - [`geom`]: convex polygons, hulls, Minkowski sums, and separating-axis
//!   intersection tests
//! - [`flowpipe`]: position-space flow pipes around a reference and
//!   obstacle safety verification
//! - [`scenario`]: scenario files (waypoints, bounds, obstacles, seeds)
//! - [`pipeline`]: scenario orchestration from gain design to safety
//!   report, shared by the `loglin` binary and the examples
//! - [`svg`]: minimal figure output for pipes, paths, and ellipsoids
//!
//! The `examples/` directory is the best entry point: each example is a
//! runnable end-to-end demonstration of one capability.

pub mod error_dyn;
pub mod flowpipe;
pub mod geom;
pub mod pipeline;
pub mod scenario;
pub mod se2;
pub mod sim;
pub mod svg;
pub mod synth;
pub mod trajectory;

pub use se2::{AlgebraVec, SE2};
