//! Text, user and sentiment representations of online communities built
//! from raw comment dumps, and the analyses that compare them.
//!
//! The pipeline runs in stages:
//!
//! 1. [`ingest`] parses line-delimited JSON comments, selects communities and
//!    tokenizes them into per-community token streams.
//! 2. [`community_vectors`] builds tf-idf matrices over unigrams and users and
//!    reduces them to unit-norm community vectors.
//! 3. [`embeddings`] trains PPMI/SVD word embeddings for each community.
//! 4. [`sentprop`] propagates sentiment from seed words over a K-NN graph of
//!    those embeddings, yielding per-community lexicons.
//! 5. [`analysis`] compares the representations: similarity correlations,
//!    clustering agreement, misalignment detection and lexicon reports.
//!
//! [`pipeline`] wires the stages together with on-disk caches.

pub mod analysis;
pub mod community_vectors;
pub mod embeddings;
pub mod error;
pub mod ingest;
pub mod linalg;
pub mod pipeline;
pub mod sentprop;
pub mod synthetic;

pub use error::{Error, Result};
