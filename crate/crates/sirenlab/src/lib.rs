//! Sinusoidal (SIREN-style) networks with edge-of-chaos initialization.
//!
//! The crate provides:
//! - the closed-form initialization algebra ([`init`]): pre-activation
//!   fixed points through the Lambert function, the `sigma_g = 1` curve,
//!   and samplers for the proposed, sigma_a = 1, original, and
//!   framework-default schemes;
//! - exact forward/backward evaluation of sine MLPs ([`network`]);
//! - diagnostics that verify the theory empirically ([`diagnostics`]):
//!   variance profiles, gradient scaling with depth, NTK spectra and
//!   linearized dynamics, output Fourier spectra, Fourier overlap, and
//!   end-to-end Jacobian singular values;
//! - desk-scale fitting and denoising experiments ([`experiments`]).

pub mod diagnostics;
pub mod experiments;
pub mod init;
pub mod linalg;
pub mod mathfn;
pub mod network;

pub use init::{
    c_b_on_curve, resolve_scheme, sample_network, sigma_a_closed_form,
    sigma_a_fixed_point_iterate, sigma_g, InitParams, InitScheme, ResolvedScheme,
};
pub use linalg::{DenseMatrix, Rng};
pub use network::{ForwardTrace, ParamGradient, SirenNet};
