//! Holomorphic maps of the ball and the Carathéodory family `M_g`.

pub mod certify;
pub mod coeff;
pub mod holmap;
pub mod members;

pub use certify::{certify_mg, certify_mg_with, CertifyOptions, MgCertificate, Witness, DEFAULT_EPS};
pub use coeff::{mixed_pair, second_coeff, shear, CoeffEstimate, CoeffKind};
pub use holmap::{fd_jacobian, BlackBox, Expr, HolMap, MapRepr, Monomial, Polynomial, ScalarFactor};
pub use members::{canonical_coefficient, canonical_field, factor_block, random_mg_member};
