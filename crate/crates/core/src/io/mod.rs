//! Dataset ingestion and model persistence.

mod dataset;
mod model;

pub use dataset::{load_dataset, load_for_model, DataFormat, DatasetSpec, LabelMode};
pub use model::{load_model, save_model};
