//! Group-aware stacking: leakage-free OOF predictions per feature group,
//! top-k selection, logit meta-features and an additive meta-learner.

mod meta;
mod oof;
mod pipeline;

pub use meta::{
    build_meta_dataset, fit_meta, BinnedShape, MetaColumn, MetaDataset, MetaKind, MetaLearner,
    BACKFIT_PASSES, META_BINS, META_L2,
};
pub use oof::{
    generate_group_oof, generate_group_oof_traced, select_top_models, task_seed, OofColumn,
    OofTrace,
};
pub use pipeline::{
    meta_cv_aucs, predict_strike, train_orthodox_stacking, train_strike, train_strike_detailed,
    EvalReport, GroupReport, MetaReport, ModelReport, SelectedGroup, StrikeConfig, StrikeEnsemble,
    StrikeModel, StrikeRun,
};
