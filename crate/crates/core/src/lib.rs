//! Singular-value distortion energies of planar maps.
//!
//! The crate evaluates `E_p(phi) = avg dist^p(d phi, SO2)` and the general
//! `E_f(phi) = avg f(s1) + f(s2)` on quadrature grids, compares them with the
//! volume bound `F^{p/2}(avg J phi)`, and builds maps that attain it: scaled
//! homotheties above volume ratio `1/4`, twist maps and radial ODE maps with
//! differential in the well `K = {s1 + s2 = 1}` below it.
//!
//! Module map:
//!
//! * [`mat2`]: closed-form 2x2 singular values, polar factor, well distances.
//! * [`bounds`]: the bound `F`, its derivative, and the sandwich estimates.
//! * [`costfn`]: cost functions `f` and the reduced problem `F_f`.
//! * [`maps`]: homotheties, twist maps, radial-profile maps, shape export.
//! * [`energy`]: quadrature grids and energy reports.
//! * [`criticality`]: discrete Piola and Euler-Lagrange residuals.
//! * [`verify`]: seeded random-matrix property suites.

// `!(x > 0.0)` guards reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod costfn;
pub mod criticality;
pub mod energy;
pub mod error;
pub mod maps;
pub mod mat2;
pub mod numeric;
pub mod verify;

pub use bounds::{sandwich_co, sandwich_k, volume_bound, volume_bound_deriv, volume_bound_pow, Sandwich};
pub use costfn::{CostFunction, FMinResult};
pub use energy::{EnergyReport, QuadratureGrid};

pub use error::{Error, Result};
pub use maps::{Homothety, PlanarMap, RadialMap, TwistMap};

pub use mat2::{Mat2, SingularPair, WellTag};
