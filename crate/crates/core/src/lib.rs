//! Exact solutions of the shifted wave equation on homogeneous trees.

pub mod energy;
pub mod error;
pub mod experiment;
pub mod function;
pub mod io;
pub mod laplacian;
pub mod scalar;
pub mod transforms;
pub mod tree;
pub mod verify;
pub mod wave;

pub use error::{Error, Result};
pub use function::{spherical_mean, HeightSequence, RadialProfile, Site, TreeFunction};
pub use scalar::{QSurd, Rational, Scalar, ScalarMode};
pub use tree::{sphere, sphere_volume, Ball, VertexAddress};
