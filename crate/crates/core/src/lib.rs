//! Hyperparameter search for a LeNet-5 style convolutional network using
//! particle swarm optimization with a linearly decreasing inertia weight.
//!
//! * [`space`] describes the twelve searched hyperparameters and maps them
//!   to and from swarm coordinates.
//! * [`swarm`] is the optimizer itself.
//! * [`nn`] trains the candidate networks.
//! * [`data`] reads MNIST and CIFAR-10.
//! * [`bench`] holds analytic test functions for checking the optimizer.
//! * [`experiment`] ties everything together into repeatable baseline and
//!   search runs with CSV reports.

pub mod bench;
pub mod data;
pub mod experiment;
pub mod nn;
pub mod space;
pub mod swarm;
