//! Nonlocal calculus and stochastic optimization primitives.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no I/O. It provides
//!
//! * interaction-kernel density sequences ([`kernels`]),
//! * nonlocal directional derivatives by quadrature or sampling ([`ndd`]),
//! * biased nonlocal gradient descent and epsilon-subgradient checks ([`stochopt`]),
//! * Brownian sample-path derivatives and Brownian-ReLU activations ([`brownian`]),
//! * the translating-disc image articulation manifold ([`iam`]),
//! * a small MLP whose hidden layers may use Brownian ReLU ([`mlp`]).
//!
//! Randomness always comes from caller-supplied generators; [`rng::Seed`]
//! derives reproducible substreams.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod brownian;
pub mod error;
pub mod iam;
pub mod kernels;
pub mod math;
pub mod mlp;
pub mod ndd;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod stochopt;

pub use error::{Error, Result};
pub use kernels::{Family, Interval, Kernel};
pub use ndd::{
    DirectionSet, Estimator, FnField, Method, MultiIndex, NddEstimate, Quadratic, ScalarField,
};
pub use quadrature::{GaussLegendre, Quadrature};
