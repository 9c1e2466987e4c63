//! Multi-area unit commitment with frequency security and HVDC reserve sharing.
//!
//! The crate is organised around one pipeline:
//!
//! 1. [`system`] loads and validates a multi-area AC/DC system description.
//! 2. [`metrics`] computes the reduced-order frequency metrics (RoCoF, nadir,
//!    steady-state deviation) for an area given its aggregated inertia and
//!    droop, for local containment as well as unilateral/bilateral HVDC
//!    supplementary power control.
//! 3. [`dynamics`] integrates the full per-generator / per-converter block
//!    diagram in the time domain and serves as the ground-truth oracle for
//!    the closed-form metrics.
//! 4. [`nadir`] sweeps the nonlinear nadir over parameter grids and fits a
//!    certified separating hyperplane used to linearise the nadir limit.
//! 5. [`solver`] is a thin model-builder abstraction over external LP/MILP
//!    backends (HiGHS, microlp).
//! 6. [`ucp`] assembles the frequency-constrained unit-commitment MILP,
//!    recovers nodal prices from the fixed-binary LP, verifies solutions
//!    ex post against the analytic metrics and the dynamic simulator, and
//!    produces market reports.

pub mod dynamics;
pub mod metrics;
pub mod nadir;
pub mod solver;
pub mod system;
pub mod ucp;

pub use system::{load_system, save_system, validate, SystemSpec, Violation};
