//! Exact q-series, quasimodular forms, Jacobi-like forms, characteristic-class
//! kernels and the symbolic family index of the Dirac-Ramond operator.

pub mod charclass;
pub mod e8;
pub mod expr;
pub mod family;
pub mod jacobi;
pub mod json;
pub mod linalg;
pub mod modular;
pub mod render;
pub mod series;
pub mod suite;
pub mod sympoly;

pub use series::{int, rat, Coeff, Module, PowerSeries, QSeries, Rational, SeriesError, ZSeries};
