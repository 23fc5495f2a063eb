//! Independent oracles: quadrature, exact determinant evaluation at beta = 2,
//! residuals of the master equations and the Jacobi identities.

mod hankel;
pub mod jacobi;
pub mod quadrature;
pub mod residual;

pub use hankel::hankel_joint_cumulants;
pub use jacobi::{jacobi_identity_check, JacobiReport};
pub use quadrature::{oracle_comparison, quadrature_moments, OracleReport, QuadratureMoments, Statistic};
pub use residual::{
    chazy_report, ode_residual_conductance, ode_residual_wigner, pde_residual_joint, ResidualReport,
};
