//! Rational symplectic coordinates on the zero-momentum reduction of a
//! product of coadjoint `GL(m)` orbits.

pub mod io;
pub mod jordan;
pub mod linalg;
pub mod orbits;
pub mod reduction;
pub mod scalar;
pub mod symplectic;
