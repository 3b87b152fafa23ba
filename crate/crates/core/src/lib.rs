//! Numerical laboratory for solitons of the supercritical generalized
//! Korteweg–de Vries equation `u_t + u_xxx + (u^p)_x = 0`.

pub mod cli;
pub mod config;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod fit;
pub mod grid;
pub mod io;
pub mod linop;
pub mod modulation;
pub mod profiles;
pub mod series;
pub mod shooting;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction};
pub use linop::{Linearization, SpectralData, SpectralTolerances};
pub use profiles::{FunctionalValues, SolitonContext};
