#![forbid(unsafe_code)]
//! Word adjacency networks and concentric symmetry.
//!
//! The crate turns books into word adjacency networks, measures how evenly a
//! word reaches its concentric neighborhoods (backbone and merged symmetry),
//! and uses those measurements for distribution analysis and authorship
//! attribution.
//!
//! ```
//! use symnet_core::{build_wan, preprocess, symmetry_all, PreprocessConfig, SymmetryKind};
//!
//! let config = PreprocessConfig::english();
//! let tokens = preprocess("The old man saw the sea. The sea saw the old boat.", &config);
//! let net = build_wan(&tokens, false);
//! let values = symmetry_all(&net, 2, SymmetryKind::Merged).unwrap();
//! assert_eq!(values.len(), net.node_count());
//! ```

pub mod concentric;
pub mod corpus;
pub mod error;
pub mod fsutil;
pub mod netstats;
pub mod stylometry;
pub mod synthetic;
pub mod wan;

pub use concentric::{
    backbone_transform, extract_pattern, merged_transform, propagate, symmetry, symmetry_all,
    ConcentricPattern, SymmetryEngine, SymmetryKind, SymmetryValue, TransformedPattern,
    TransitionDistribution,
};
pub use corpus::{preprocess, Document, PreprocessConfig, Token};
pub use error::{Error, Result};
pub use netstats::{fit_logistic, histogram, pearson, Histogram, LogisticFit, Measurement};
pub use stylometry::{
    binomial_p_value, build_features, loocv, train_predict, BookLabel, ClassifierKind,
    ClassifierSpec, EvaluationReport, FeatureMatrix,
};
pub use wan::{build_wan, shared_vocabulary, NodeId, WordNetwork};
