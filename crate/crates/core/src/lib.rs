//! Accelerated first-order optimization on Riemannian manifolds.
//!
//! The crate follows one idea through four layers. A family of damped
//! variational flows minimizes smooth geodesically convex (and weaker)
//! objectives at a certified rate that degrades gracefully with negative
//! curvature; a semi-implicit discretization turns the flow into an
//! implementable algorithm; a reference integrator and a Lyapunov function
//! make the continuous-time claims checkable; and a few closed-form
//! manifolds and objectives exercise all of it.
//!
//! - [`geometry`]: sphere, hyperboloid and flat space with exact
//!   exponential/log maps and parallel transport, plus the curvature
//!   constant `zeta` entering every guarantee.
//! - [`dynamics`]: the Lagrangian/Hamiltonian pair, Euler-Lagrange field,
//!   Lyapunov energy, convergence bounds, and the time-rescaling machinery
//!   relating flows of different rates.
//! - [`integrate`]: the discrete algorithm, a gradient-descent baseline, an
//!   RK4 reference integrator, and log-log rate fitting.
//! - [`problems`]: ready-made benchmark objectives with known minimizers.

pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod integrate;
pub mod problems;
pub mod verify;

pub use error::{Error, Result};
