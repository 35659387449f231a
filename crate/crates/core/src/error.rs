use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image dimensions {width}x{height} for {len} pixels")]
    InvalidDimensions {
        width: usize,
        height: usize,
        len: usize,
    },
    #[error("malformed image file: {0}")]
    MalformedFile(String),
    #[error("unsupported bit depth {0} (only 8-bit images are supported)")]
    UnsupportedDepth(u32),
    #[error("unsupported colour type: {0}")]
    UnsupportedColorType(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("slice depth {depth} outside [0, {max}]")]
    DepthOutOfRange { depth: i64, max: u8 },
    #[error("surface has {found} nonzero heights, at least {required} required")]
    InsufficientSupport { found: usize, required: usize },
    #[error("surface has no nonzero height")]
    DegenerateSurface,
    #[error("no depth matched a Gaussian envelope")]
    NoGaussianEnvelope,
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("threshold {0} outside [0, 255]")]
    ThresholdOutOfRange(i64),
    #[error("error budget must be finite and non-negative, got {0}")]
    InvalidBudget(f64),
    #[error("region of interest is empty")]
    EmptyMask,
    #[error("image {width}x{height} smaller than required {min}x{min}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("reference image has zero energy")]
    ZeroEnergyReference,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
