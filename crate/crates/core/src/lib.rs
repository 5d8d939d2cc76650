//! Geometry and gradient descent on the real symplectic group, the symplectic
//! Stiefel manifold and the symplectic Grassmann manifold.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod matfun;
pub mod optim;
pub mod par;
pub mod sp_grassmann;
pub mod sp_group;
pub mod sp_stiefel;

pub use error::{Error, Result};
