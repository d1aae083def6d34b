//! Image buffers and shared image plumbing.
//!
//! All buffers hold linear-light samples. Continuous sampling coordinates
//! put pixel centers on integers (`sample`); landmark, correspondence and
//! warp coordinates put the center of pixel `(c, r)` at `(c + 0.5, r + 0.5)`
//! and convert with [`ImageBuf::sample_at_center_coords`].

mod buffer;
pub mod color;
mod crop;
pub mod filter;
pub mod io;
mod landmarks;

pub use buffer::{ChannelStack, ImageBuf, Plane, ShadowMask};
pub use color::{linear_to_srgb, srgb_to_linear, LUMA_REC709};
pub use crop::{resize_crop_face, FaceCrop, FACE_CROP_SIZE};
pub use landmarks::{LandmarkSet, FACE_MESH_VERTICES};
