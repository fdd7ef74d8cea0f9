//! Learned indexes over sorted keys built from piecewise linear models.

pub mod baseline;
pub mod bench;
pub mod dataset;
pub mod dist_aware;
pub mod error;
pub mod hybrid;
pub mod index;
pub mod key;
pub mod pla;
pub mod tuner;

pub use error::{Error, Result};
pub use key::{Key, KeyType};
pub use index::{IndexConfig, PgmIndex, PgmModel, QueryResult, Router};
