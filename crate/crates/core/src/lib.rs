//! Computable L^p-type Lorentzian example spaces.
//!
//! The crate evaluates the time separation `tau^p` on the plane R^{1,1} and
//! on the flat cylinder `Cyl^p`, certifies the absence of sectional curvature
//! bounds through the scaling of parallelogram defects, builds Noldus metrics
//! on finite nets, bounds Lorentzian Gromov-Hausdorff distances, and estimates
//! Lorentzian Hausdorff dimensions from diamond coverings.

pub mod comparison;
pub mod curvature;
pub mod error;
pub mod gh;
pub mod hausdorff;
pub mod lp;
pub mod net;
pub mod noldus;
pub mod space;

pub use error::{Error, Result};
pub use lp::LorentzVector;
pub use net::FiniteNet;
pub use space::{CausalRelation, Chart, Event, Exponent, SpaceDescriptor};
