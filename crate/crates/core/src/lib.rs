pub mod error;
pub mod raster;
pub mod rng;

pub use error::{Error, Result};
pub use raster::{Label, LabelGrid, Palette, RgbImage};
pub use rng::SeededRng;
pub mod grains;
pub mod markov;
pub mod synth;
pub mod tessellation;
pub mod wfc;
