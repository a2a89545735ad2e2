//! Reconstruction of complex-valued graph signals with kernel methods.
//!
//! Vertices carry complex feature vectors (points of `ℂ^D`). Kernels are built
//! either from distances under a Hermitian metric (Gaussian, Laplacian and
//! polynomial families) or from the fractional spectrum of a graph Laplacian
//! (diffusion, random-walk, Laplacian-regularization and bandlimited maps).
//! Signals observed on a subset of vertices are recovered with kernel ridge
//! regression, a bandlimited ridge estimator or sparse multi-kernel learning.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`linalg`] | Hermitian eigensolver, fractional unitary powers, pseudo-inverse, HPD solves |
//! | [`metrics`] | Hermitian metric tensors and the induced distances |
//! | [`kernels`] | Feature-space kernels, kernel matrices, RKHS inner products |
//! | [`graph`] | Graphs, Laplacians, fractional spectra, GFRFT, localization operators |
//! | [`spectral`] | Spectral maps and graph kernels |
//! | [`reconstruct`] | Sampling model, KRR, bandlimited ridge, NMSE |
//! | [`mkl`] | Multi-kernel learning with an ℓ1-ball constraint |
//! | [`datagen`] | Synthetic generators, CSV ingestion, distribution fits |
//!
//! Eigenvalues are always reported in **descending** order, so column `0` of
//! an eigenvector matrix belongs to the largest eigenvalue. All index sets in
//! the public API are zero-based.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod error;
pub mod graph;
pub mod kernels;
pub mod linalg;
pub mod metrics;
pub mod mkl;
pub mod reconstruct;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
pub use num_complex::Complex64;
