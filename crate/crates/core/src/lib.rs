pub mod error;
pub mod gaussian;
pub mod numeric;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub mod jump_dist;
pub mod cramer;
pub mod density;
pub mod coupling;
pub mod harness;
