//! Multi-class boosting with AdaBoost.MH.
//!
//! Base classifiers are factorized into a coefficient, a per-class vote
//! vector, and a scalar decision stump; Hamming trees stack those cuts into
//! vector-valued trees grown greedily by edge improvement. The crate covers
//! the boosting loop, the exhaustive stump learner, tree growth, loss
//! metrics, the smoothed-stopping-time validation protocol, and text formats
//! for datasets and trained models.

pub mod boost;
pub mod classifier;
pub mod data;
pub mod error;
pub mod io;
pub mod metrics;
pub mod model_selection;
pub mod stump_learner;
pub mod tree;
pub mod weights;

pub use boost::{
    adaboost_mh, adaboost_mh_with, evaluate_strong, update_weights, BaseKind, BoostConfig,
    BoostTrace, IterRecord, WeightInit,
};
pub use classifier::{BaseClassifier, FactorizedClassifier, ModelMeta, StrongClassifier, Stump};
pub use data::{one_hot_encode, DataSet};
pub use error::{Error, Result};
pub use metrics::{exp_risk, hamming_loss, one_error, EvalReport};
pub use model_selection::{
    cross_validate, select_tree_size, smoothed_error, smoothed_stopping_time, CvPlan, CvReport,
};
pub use stump_learner::{
    best_stump, classwise_edges, compute_alpha, cut_dataset, energy, optimal_votes, stump_base,
    BestStump, SortedColumns, Subset,
};
pub use tree::{subset_edge, tree_base, tree_edge, BaseLearner, HammingTree, StumpLearner, TreeBuild};
pub use weights::{init_weights, WeightMatrix, WeightScheme};
