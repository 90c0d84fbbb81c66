//! Contact Hamiltonian, Lagrangian and Herglotz mechanics on the first-jet
//! bundle of the dual of a line bundle, together with the maps of the contact
//! Tulczyjew triple, Legendre transforms, and a small simulation driver.

pub mod atlas;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod integrate;
pub mod jet;
pub mod legendre;
pub mod linalg;
pub mod output;
pub mod rng;
pub mod scenario;
pub mod section;
pub mod triple;
pub mod verify;

pub use atlas::{AtiyahCoords, BundleAtlas, ChartId, ContactCoords, CoverCoords};
pub use error::{Error, Result};
pub use jet::{Jet, Scalar};
pub use section::{ScalarSection, SectionKind};
