pub mod contour;
pub mod error;
pub mod experiment;
pub mod families;
pub mod numeric;
pub mod poly;
pub mod potential;
pub mod rootfind;
pub mod measures;
pub mod sendov;

pub use error::{LabError, Result};
pub use poly::{Polynomial, SendovInstance};
pub use rootfind::{find_roots, RootSet};
