//! Exact algebra of meromorphic matrix loops on the punctured disc.

mod factor;
pub mod io;
mod matrix;
mod poly;
pub mod series;

pub use factor::{factorize, normalize, section_degree, LoopFactorization};
pub use matrix::{det_pole_order, multiply, LaurentMatrix};
pub use poly::{pole_order_vector, LaurentPoly};
