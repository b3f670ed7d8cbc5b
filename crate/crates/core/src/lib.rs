//! Word-sense disambiguation over nested-ball sense embeddings.
//!
//! Senses of a hypernym taxonomy are embedded as balls whose nesting mirrors
//! the taxonomy ([`geometry`]). An encoder maps a target word and its window
//! context to a vector ([`encoder`]); a sense is chosen by the cosine between
//! that vector and the ball centers of each candidate's hypernym
//! ([`selector`]). [`corpus`] prepares hypernym-lifted datasets and
//! [`evaluator`] scores and orchestrates experiments.

pub mod corpus;
pub mod embedding;
pub mod encoder;
pub mod error;
pub mod evaluator;
pub mod geometry;
pub mod inventory;
pub mod selector;

pub use corpus::{DatasetStats, TrainingRecord};
pub use embedding::EmbeddingTable;
pub use encoder::{EncoderParams, TrainConfig};
pub use error::{Error, Result};
pub use evaluator::{EvalReport, ExperimentSpec};
pub use geometry::{Ball, BallConfiguration, GeometryConfig, Vector, ViolationReport};
pub use inventory::{Inventory, Pos, SenseId, Taxonomy};
pub use selector::{Candidate, Prediction};
