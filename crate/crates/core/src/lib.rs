//! Numerical laboratory for sharp-interface limits of an anisotropic
//! Landau–Lifshitz flow.
//!
//! The crate builds explicit spin fields `u = v(r(x, t))` from two global
//! control maps, evolves a level-set mean curvature flow to locate the
//! limiting front, and checks the identities, bounds and limits that tie
//! the two together.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the bottom of this file fix the scalar to `f64`.

pub mod error;
pub mod grid;
pub mod levelset;
pub mod reaction;
pub mod richardson;
pub mod scalar;
pub mod spin_maps;
pub mod transition;
pub mod viscosity;

pub use error::{Error, Result};
pub use scalar::Real;
pub use spin_maps::{MapKind, PhysParams, Spin};

/// Double-precision physical parameters.
pub type PhysParams64 = PhysParams<f64>;
/// Double-precision spin.
pub type Spin64 = Spin<f64>;
/// Double-precision map selector.
pub type MapKind64 = MapKind<f64>;
/// Double-precision grid description.
pub type GridSpec64 = grid::GridSpec<f64>;
/// Double-precision nodal field.
pub type ScalarField64 = grid::ScalarField<f64>;
/// Double-precision transition profile parameters.
pub type ProfileParams64 = transition::ProfileParams<f64>;
