pub mod emden;
pub mod riccati;
pub mod selfsim;
pub mod solve;
pub mod sweep;
pub mod verify;
