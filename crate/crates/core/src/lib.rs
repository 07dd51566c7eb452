//! Elliptic N-soliton solutions of the stationary and traveling-wave KdV
//! equation, built from the Weierstrass ζ function by Bäcklund
//! superposition.
//!
//! ```
//! use kdv_elliptic::{build, Invariants, SolitonSpec};
//!
//! let inv = Invariants::new(0.3, 0.7).unwrap();
//! let sol = build(&SolitonSpec::new(inv, &[-0.02, 0.04]).unwrap()).unwrap();
//! let u = sol.derivative(0.7).unwrap();
//! assert!((u - 3.8870529202671702767).abs() < 1e-9);
//! ```

pub mod cli;
pub mod closed_form;
pub mod error;
pub mod jacobi;
pub mod lattice;
pub mod laurent;
pub mod verify;
pub mod weierstrass;

pub use error::{Error, Result};
pub use jacobi::{h1, modulus_from_roots, sn, Modulus};
pub use lattice::{build, one_soliton, time_lift, Branch, SolitonSolution, SolitonSpec, SpectralParam};
pub use verify::{GridSpec, ResidualReport, Tolerances, Verdict};
pub use weierstrass::{roots_from_invariants, wp_family, zeta, CubicRoots, Invariants, Weierstrass};
