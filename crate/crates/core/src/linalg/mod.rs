//! Small dense complex linear algebra (`2 <= d <= 8`, exterior powers up to 70).

pub mod eigen;
pub mod exterior;
pub mod matrix;
pub mod product;
pub mod proj;
pub mod qr;

pub use eigen::{eigen_moduli, eigenvalues, eigenvector};
pub use exterior::{binomial, exterior_power};
pub use matrix::CMatrix;
pub use product::{Order, ScaledProduct};
pub use proj::{fubini_study_distance, ProjHyperplane, ProjPoint};
pub use qr::{qr_step, QrFrame};
