//! Characteristic evolution and energy-identity laboratory for the spherically
//! symmetric Maxwell-Klein-Gordon system in the gauge `A_v = 0`.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod fields;
pub mod identity_lab;
pub mod initdata;
pub mod nullgrid;
pub mod run;
pub mod sum;

pub use error::{Error, Result};
