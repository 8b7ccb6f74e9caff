//! Verification toolkit for the anomaly formulas of the equivariant
//! Ray–Singer metric: exact Clifford/Berezin algebra, Chern–Weil forms,
//! Gaussian moment asymptotics, highest-symbol transport, fixed-point
//! densities and discrete spectral models on the circle and the torus.

pub mod asymptotics;
pub mod chern_weil;
pub mod clifford;
pub mod endf;
pub mod error;
pub mod linalg;
pub mod local_index;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod spectral;
pub mod suite;
pub mod transport;

pub use clifford::{Clifford, CliffordElement, Exterior, ExteriorElement, FockOperator};
pub use endf::{Coeff, EndF};
pub use error::{Error, Result};
pub use scalar::Scalar;
