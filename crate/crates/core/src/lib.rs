//! Lipschitz reparametrization of Sobolev trajectories and numerical
//! experiments on the Lavrentiev gap for one-dimensional variational
//! problems.

pub mod energy;
pub mod error;
pub mod harness;
pub mod hypotheses;
pub mod interval;
pub mod lagrangian;
pub mod probes;
pub mod problems;
pub mod quadrature;
pub mod reparam;
pub mod trajectory;

pub use error::{Error, Result};
pub use interval::{Interval, IntervalSet};
pub use quadrature::{QuadOptions, Quadrature};
pub use trajectory::{Derivative, Target, Trajectory};
