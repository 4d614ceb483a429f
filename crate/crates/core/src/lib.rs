//! Memory-restricted streaming PCA.
//!
//! Four estimators (SPCA, Alecton, DBPCA, BPCA) share one `O(kd)` streaming
//! interface; [`harness`] runs seeded benchmark grids over synthetic or
//! bag-of-words streams and [`cli`] writes the results as CSV and SVG.

pub mod cli;
pub mod estimators;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod streams;
