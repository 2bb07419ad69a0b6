//! Exact GIT stratifications for torus actions and binary forms.

pub mod exactgeom;
pub mod hkkn;
pub mod linalg;
pub mod lp;
pub mod p1n;
pub mod parallel;
pub mod problem_file;
pub mod rational;
pub mod refine;
pub mod report;
pub mod torusgit;

pub use rational::{InnerProduct, QVector, Rational};
