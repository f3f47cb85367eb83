//! Numerical calculus of mapping groups C(M,K) for matrix Lie groups K,
//! realized on logarithmic derivatives.
//!
//! ```
//! use num_complex::Complex64;
//! use mapgroup::domain::{canonical_loop_basis, Domain};
//! use mapgroup::evolve::EvolControl;
//! use mapgroup::expr::parse_expr;
//! use mapgroup::forms::OneForm;
//! use mapgroup::group::{Field, GroupDescriptor};
//! use mapgroup::monodromy::period_vector;
//!
//! // alpha = diag(1,2) dz/z on the once-punctured plane: integer residues,
//! // so every loop period is the identity and alpha integrates globally
//! // (to f(z) = diag(z, z^2))
//! let domain = Domain::punctured_plane(
//!     vec![Complex64::new(0.0, 0.0)],
//!     Complex64::new(1.0, 0.0),
//! )?;
//! let gl2 = GroupDescriptor::gl(2, Field::Complex);
//! let alpha = OneForm::complex_expr(
//!     domain.clone(),
//!     gl2.clone(),
//!     parse_expr("[[1/z,0],[0,2/z]]", &["z"])?,
//! )?;
//! let basis = canonical_loop_basis(&domain)?;
//! let periods = period_vector(&gl2, &alpha, &basis, EvolControl::default())?;
//! assert!(periods.is_trivial(1e-6));
//! # Ok::<(), mapgroup::Error>(())
//! ```
//!
//! The building blocks are:
//!
//! * [`matrix`] - dense complex matrix kernel (exp, principal log, Ad, bracket),
//! * [`group`] - descriptors for the concrete target groups (GL, SL, abelian quotients),
//! * [`domain`] - model domains, piecewise smooth paths and fundamental-group loop bases,
//! * [`expr`] / [`forms`] - matrix-valued expressions and Lie-algebra valued 1-forms,
//! * [`evolve`] - the left evolution equation gamma' = gamma . xi (Magnus stepping),
//! * [`calculus`] - the group law on logarithmic derivatives and map reconstruction,
//! * [`monodromy`] - period homomorphisms, integrability decisions, lattice periods,
//!   component classes and Smith-normal-form discreteness reports,
//! * [`verify`] - the named desk-scale verification suites used by the CLI.

pub mod calculus;
pub mod domain;
pub mod error;
pub mod evolve;
pub mod expr;
pub mod forms;
pub mod group;
pub mod matrix;
pub mod monodromy;
pub mod quad;
pub mod snf;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::{ad_conjugate, bracket, mat_exp, mat_log_principal, Matrix, Tolerances};

/// Default equality tolerance (Frobenius) between group/algebra elements.
pub const EQ_TOL: f64 = 1e-9;
/// Identity-closeness tolerance for loop periods; looser than [`EQ_TOL`]
/// because integrator error accumulates along a loop.
pub const PERIOD_TOL: f64 = 1e-6;
/// Membership tolerance for abelian lattice periods, in generator coordinates.
pub const LATTICE_TOL: f64 = 1e-7;
