//! Periodic capillary-gravity waves on rotational flows of finite depth.
//!
//! See the guide in `book/` for a walk through the modules.

pub mod dispersion;
pub mod error;
pub mod fields;
pub mod grid;
pub mod laminar;
pub mod ode;
pub mod quad;
pub mod roots;
pub mod sturm;
pub mod vorticity;
pub mod waves;

pub use error::{Error, Result};
pub use laminar::{LaminarFlow, Problem};
pub use vorticity::{FluidParams, VorticityModel, VorticitySpec};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/overview.md")]
mod book_overview {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/laminar.md")]
mod book_laminar {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/dispersion.md")]
mod book_dispersion {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/waves.md")]
mod book_waves {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/fields.md")]
mod book_fields {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
