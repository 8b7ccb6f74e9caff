//! Discretized de Rham complexes with finite symmetry, equivariant torsion
//! and the metric anomaly experiments.

pub mod complex;
pub mod experiments;
pub mod models;

pub use complex::{
    equivariant_log_metric, heat_supertrace, log_torsion, theta_prime_zero, theta_prime_zero_with, zeta_theta,
    DiscreteComplex, LogDetMethod, Sparse,
};
pub use experiments::*;
pub use models::{
    Case, CircleConfig, CircleIsometry, CircleModel, Family, Fourier, Fourier2, Holonomy, TorusConfig, TorusFamily,
    TorusIsometry, TorusModel, Wave,
};
