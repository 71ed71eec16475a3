//! Finite-dimensional reduction of the slightly subcritical problem
//! `-Δu = |u|^{2*-2-ε} u` on balls.
//!
//! The crate is organised bottom-up:
//!
//! * [`bubble`]: the explicit bubble family and the dimension constants
//!   entering the reduced energy, computed by radial quadrature.
//! * [`green`]: closed-form Green, regular-part and Robin functions of a
//!   ball, their restrictions to the symmetry axis, and sampled validators
//!   for the convexity/monotonicity hypotheses.
//! * [`reduced`]: the reduced energies `Ψ_k`, the four-bubble alternating
//!   energy `Ψ̃`, the penalty `Φ`, the μ-parametrisation and the max-min
//!   bounds.
//! * [`saddle`]: location and certification of the critical point of `Ψ̃`.
//! * [`pde`]: an axisymmetric finite-volume harness that projects
//!   bubbles, assembles the approximate solution and compares its energy
//!   against the asymptotic expansion.
//! * [`cli`]: the command-line front end.

pub mod bubble;
pub mod cli;
pub mod error;
pub mod green;
pub mod pde;
pub mod quadrature;
pub mod reduced;
pub mod saddle;

pub use bubble::{compute_constants, eval_bubble, eval_bubble_gradient, BubbleParams, ConstantsTable};
pub use error::{Error, Result};
pub use green::{AxisGreen, AxisSection, BallDomain, ValidationReport};
pub use reduced::{BoundsReport, Configuration};
pub use saddle::SaddleReport;
