#![allow(dead_code)]

use rayon::prelude::*;
use signscreen::classifier::{FeatureRecord, ModelKind};
use signscreen::evaluation::{evaluate, EvalReport};
use signscreen::features::{extract_clip, feature_names};
use signscreen::keypoints::segment;
use signscreen::pipeline::{predict_test, train_records, PipelineConfig};
use signscreen::synth::{plan_cohort, ProfileSet};

/// Generates a cohort one recording at a time and keeps only the features.
pub fn cohort_records(cfg: &PipelineConfig, profiles: &ProfileSet) -> (Vec<String>, Vec<FeatureRecord>) {
    let members = plan_cohort(cfg.n_participants, cfg.mci_fraction, cfg.seed, profiles).unwrap();
    let ecfg = cfg.extract_config();
    let noise = cfg.noise();
    let per_member: Vec<Vec<FeatureRecord>> = members
        .par_iter()
        .map(|m| {
            let rec = m.generate(cfg.duration, cfg.fps, &noise).unwrap();
            segment(&rec, cfg.clip_len)
                .unwrap()
                .iter()
                .map(|c| extract_clip(c, &ecfg).unwrap().0)
                .collect()
        })
        .collect();
    (feature_names(&ecfg), per_member.into_iter().flatten().collect())
}

/// Split, train and evaluate in memory, exactly as the train and eval stages do.
pub fn run_model(names: &[String], records: &[FeatureRecord], cfg: &PipelineConfig, kind: ModelKind) -> EvalReport {
    let cfg = PipelineConfig { model: kind, ..cfg.clone() };
    let (model, _, split) = train_records(names, records, &cfg).unwrap();
    let preds = predict_test(&model, records, &split).unwrap();
    evaluate(&preds, &split.describe()).unwrap()
}
