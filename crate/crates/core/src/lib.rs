// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod emden;
pub mod grid;
pub mod io;
pub mod ode;
pub mod pdesolver;
pub mod profile;
pub mod quad;
pub mod residual;
pub mod riccati;
pub mod selfsim;
