//! Paths, datasets, preprocessing, corruption and fBm generation.

mod augment;
mod corrupt;
mod dataset;
pub mod fbm;
mod path;

pub use augment::{
    basepoint, lead_lag, minmax, preprocess, preprocess_split, resample, time_augment,
    AugmentationConfig, Preprocessor,
};
pub use corrupt::{corrupt_and_impute, ChannelLossPolicy, CorruptionConfig};
pub use dataset::{
    format_dataset, hurst_dataset, load_dataset, save_dataset, save_dataset_dir, standardize,
    DatasetFormat, HurstVariant, LabeledDataset, Split, HURST_GRID,
};
pub use fbm::{generate_fbm, generate_fbm_with, FbmMethod};
pub use path::Path;
