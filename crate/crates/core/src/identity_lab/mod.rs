//! Static checks of the multiplier calculus on synthetic 3+1 fields, and
//! closure of the integrated identities on evolved spherically symmetric states.
//!
//! Synthetic fields are trigonometric polynomials with analytic jets, so the
//! only numerical derivative is the outer divergence of `J̃^X`.

pub mod checks;
pub mod current;
pub mod jet;
pub mod lifted;
pub mod multiplier;

pub use checks::{run_lab, LabBox, LabConfig, LabReport, TripleReport};
pub use current::{emt, SurfaceKind};
pub use jet::SyntheticField;
pub use lifted::{lifted_closure, LiftedClosure};
pub use multiplier::{MorawetzWeight, Triple};
