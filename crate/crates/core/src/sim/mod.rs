//! Exact outcome distributions of Gaussian-window phase estimation, and
//! seeded sampling from them.
//!
//! The circuit is simulated in the eigenbasis: each eigenphase contributes
//! one length-2^q transform and the ancilla marginal is the overlap-weighted
//! mixture. Peaks land at z = 2^q theta (mod 2^q).

mod dist;
mod sampler;
mod spectrum;

pub use dist::{
    eigenstate_distribution, gaussian_amplitudes, gaussian_ancilla_amplitudes, ideal_distribution, ln_ideal_mass,
    mass_signed, mixed_distribution, signed_index, signed_outcome, total_variation, uniform_amplitudes, Ancilla,
    Circuit, OutcomeDistribution,
};
pub use sampler::{draw_samples, Sampler};
pub use spectrum::{eigendecompose, DenseHamiltonian, Eigensystem, SpectrumSpec, MAX_EIGENSTATES};
