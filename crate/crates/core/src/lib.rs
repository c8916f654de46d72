//! Numerical laboratory for the ground-state energy of dilute, trapped,
//! two-spin Fermi gases.
//!
//! The crate is organised bottom-up: [`numerics`] supplies quadrature,
//! root finding and profile distances; [`potentials`] describes traps;
//! [`thomas_fermi`] solves the density functionals; [`scattering`] handles
//! the zero-energy two-body problem; [`semiclassics`] and [`spectra`]
//! compare phase-space counting with quantum spectra; [`asymptotics`]
//! assembles the large-N energy expansion and its error bookkeeping.

pub mod asymptotics;
pub mod numerics;
pub mod potentials;
pub mod scattering;
pub mod semiclassics;
pub mod spectra;
pub mod thomas_fermi;
