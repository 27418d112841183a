//! Exact counting of rigid marked tropical curves with psi-class conditions,
//! and double Hurwitz numbers computed two independent ways.

pub mod counting;
pub mod enumerate;
pub mod error;
pub mod hurwitz;
pub mod linalg;
pub mod problem;
pub mod tropical;
pub mod verify;

pub use error::{Error, Result};
