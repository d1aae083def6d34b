//! One-light-at-a-time relighting: linear combination of per-light
//! captures, key-light splatting and fill placement for harsh/soft pairs.

pub mod pair;
pub mod render;
pub mod rig;
pub mod scan;
pub mod weights;

pub use pair::{make_pair, FacialPair, PairRecord, PairSampler};
pub use render::SyntheticHead;
pub use rig::{fill_direction, neighbors, LightRig};
pub use scan::OlatScan;
pub use weights::{
    harsh_weights, soft_weights, soft_weights_with, WeightVector, FILL_NEIGHBORHOOD, LIGHT_SIZES,
};
