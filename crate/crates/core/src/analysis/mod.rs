//! Comparisons between community representations.

pub mod ami;
pub mod cluster;
pub mod lexicon_report;
pub mod misalign;
pub mod similarity;
pub mod stats;

pub use ami::adjusted_mutual_information;
pub use cluster::{agglomerative_cluster, ClusterAssignment, Linkage};
pub use lexicon_report::{top_polar_words, word_profile, word_variance_ranking, WordProfile, WordVariance};
pub use misalign::{misalignment_outliers, z2_misalignment, MisalignmentMatrix, Outlier};
pub use similarity::{cosine_similarity_matrix, SimilarityMatrix};
pub use stats::{pearson, spearman, Correlation};
