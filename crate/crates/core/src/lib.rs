//! Exact and numerical machinery around the GL(n) Kuznetsov trace formula:
//! composition combinatorics, Iwasawa geometry, Gamma-function bookkeeping,
//! Mellin transforms of Whittaker functions, spectral test functions and a
//! few trace-formula pieces that fit on a desk.

pub mod combinatorics;
pub mod config;
pub mod error;
pub mod geometry;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod suite;
pub mod testfn;
pub mod trace;
pub mod whittaker;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
