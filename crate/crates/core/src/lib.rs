//! Exact symplectic geometry, geometric quantization, and knot polynomials.
//!
//! The crate is organized around a small symbolic core ([`expr`]) with a
//! decidable zero test, exact linear symplectic algebra ([`symplin`]),
//! Hamiltonian mechanics ([`mech`]), matrix Lie groups ([`lie`]),
//! matrix-valued differential forms and connections ([`forms`], [`gauge`]),
//! prequantization ([`prequant`]), sigma-model energies ([`sigma`]), and
//! skein-relation knot invariants ([`knots`]).

pub mod expr;
pub mod forms;
pub mod gauge;
pub mod knots;
pub mod lie;
pub mod mech;
pub mod prequant;
pub mod scalar;
pub mod sigma;
pub mod symplin;

pub use expr::{Expr, UnaryFn};
pub use scalar::GaussQ;
