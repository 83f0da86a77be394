//! Spectral measures and their free-probability transforms.

mod measure;
mod transform;

pub use measure::{MeasureKind, SpectralMeasure};
pub use transform::{BetaWindow, Evaluation, TransformProfile};
