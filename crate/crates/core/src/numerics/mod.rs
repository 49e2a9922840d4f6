//! Numerical building blocks shared by the physics modules.

pub mod eigen;
pub mod linalg;
pub mod quad;
pub mod roots;
pub mod special;

pub use eigen::{eig_real_dense, eig_real_dense_by, EigenPair};
pub use libm::erf;
pub use linalg::{solve_tridiagonal, Matrix, TridiagonalLu};
pub use roots::{find_root_bisect, golden_section_max, Tolerance};
pub use special::{bessel_k, struve_l, BesselOrder, StruveOrder};
