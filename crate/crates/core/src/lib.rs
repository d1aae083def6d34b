//! Synthetic training data and evaluation tools for portrait shadow
//! manipulation.
//!
//! The crate is split by stage:
//!
//! - [`imgcore`]: linear-light image buffers, color transfer, face crops, file I/O.
//! - [`maskgen`]: Perlin and silhouette shadow masks.
//! - [`shadowsynth`]: foreign-shadow compositing (color jitter, subsurface
//!   scattering blur, spatial variation, linear blend).
//! - [`olat`]: one-light-at-a-time relighting and harsh/soft pair generation.
//! - [`symmetry`]: adaptive RBF facial mirror warp.
//! - [`evalkit`]: affine output head, image metrics, homography alignment.
//!
//! Every stochastic operation takes an explicit 64-bit seed; see [`rng`].

pub mod error;
pub mod evalkit;
pub mod imgcore;
pub mod maskgen;
pub mod olat;
pub mod rng;
pub mod shadowsynth;
pub mod symmetry;
pub mod synthetic;

pub use error::{Error, Result};
pub use imgcore::{FaceCrop, ImageBuf, LandmarkSet, Plane, ShadowMask};
