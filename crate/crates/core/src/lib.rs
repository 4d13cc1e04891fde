pub mod error;
pub mod field;
pub mod laurent;
pub mod tseries;
pub mod matrix;
pub mod special_fn;
pub mod check;
pub mod periods;
pub mod torsion;
pub mod motives;
pub mod report;

pub use error::{Error, Result};
pub use field::{Field, FieldElem, FieldParams, GaloisField};
pub use laurent::{LaurentU, EXACT};
pub use tseries::{Kind, TSeries, TailCert};
pub use matrix::{block_structure_check, rho, rho_mat, BlockMat, Matrix, ValueMat};
pub use special_fn::{beta, SpecialFnConfig, SpecialFns};
pub use check::{Residual, Status};
