//! Fairness slicing: metrics per metadata subgroup.

use std::collections::BTreeMap;

use crate::corpus::{Gender, Manifest, RecordingMeta};

use super::roc::{metrics_report, MetricsReport};
use super::{EvalError, ScoreFile};

/// Splits by gender; recordings with unknown gender are skipped.
pub fn by_gender(meta: &RecordingMeta) -> Option<String> {
    match meta.gender {
        Gender::Male => Some("male".to_string()),
        Gender::Female => Some("female".to_string()),
        Gender::Unknown => None,
    }
}

/// Splits at an age threshold; recordings without an age are skipped.
pub fn by_age_threshold(threshold: u32) -> impl Fn(&RecordingMeta) -> Option<String> {
    move |meta| {
        meta.age.map(|age| {
            if age >= threshold {
                format!("age>={threshold}")
            } else {
                format!("age<{threshold}")
            }
        })
    }
}

/// Computes a full [`MetricsReport`] per slicer group over the scored
/// recordings. Entries the slicer maps to `None` are skipped; a group whose
/// scored members are single-class is an error naming the group.
pub fn subgroup_metrics(
    scores: &ScoreFile,
    manifest: &Manifest,
    slicer: impl Fn(&RecordingMeta) -> Option<String>,
) -> Result<BTreeMap<String, MetricsReport>, EvalError> {
    let meta_by_id: BTreeMap<&str, &RecordingMeta> = manifest
        .entries
        .iter()
        .map(|e| (e.id.as_str(), e))
        .collect();

    let mut group_scores: BTreeMap<String, ScoreFile> = BTreeMap::new();
    for (id, &score) in scores.iter() {
        let meta = meta_by_id
            .get(id.as_str())
            .ok_or_else(|| EvalError::MissingLabel { id: id.clone() })?;
        if let Some(group) = slicer(meta) {
            group_scores.entry(group).or_default().insert(id, score);
        }
    }

    let labels = manifest.labels_by_id();
    let mut out = BTreeMap::new();
    for (group, sf) in group_scores {
        let report = metrics_report(&sf, &labels).map_err(|e| match e {
            EvalError::SingleClass { pos, neg } => EvalError::SingleClassGroup {
                group: group.clone(),
                pos,
                neg,
            },
            other => other,
        })?;
        out.insert(group, report);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, Split};
    use crate::rng::Rng;
    use std::path::PathBuf;

    fn entry(id: &str, label: Label, gender: Gender, age: Option<u32>) -> RecordingMeta {
        RecordingMeta {
            id: id.to_string(),
            audio_path: PathBuf::from(format!("{id}.wav")),
            label,
            gender,
            age,
            fold: None,
            split: Split::Test,
        }
    }

    #[test]
    fn identical_scores_across_groups_give_identical_auc() {
        let mut entries = Vec::new();
        let mut sf = ScoreFile::new();
        // Same score/label pattern replicated for both genders.
        let pattern = [(0.9, Label::Covid), (0.7, Label::Covid), (0.4, Label::NonCovid), (0.2, Label::NonCovid), (0.6, Label::NonCovid)];
        for (g, gender) in [("m", Gender::Male), ("f", Gender::Female)] {
            for (i, (score, label)) in pattern.iter().enumerate() {
                let id = format!("{g}{i}");
                entries.push(entry(&id, *label, gender, Some(30)));
                sf.insert(id, *score);
            }
        }
        let manifest = Manifest::new(entries);
        let groups = subgroup_metrics(&sf, &manifest, by_gender).unwrap();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups["male"].auc, groups["female"].auc);
        assert_eq!(groups["male"].n_pos, 2);
        assert_eq!(groups["male"].n_neg, 3);
    }

    #[test]
    fn single_class_group_errors_with_its_name() {
        let entries = vec![
            entry("a", Label::Covid, Gender::Male, None),
            entry("b", Label::NonCovid, Gender::Male, None),
            entry("c", Label::NonCovid, Gender::Female, None),
            entry("d", Label::NonCovid, Gender::Female, None),
        ];
        let mut sf = ScoreFile::new();
        for id in ["a", "b", "c", "d"] {
            sf.insert(id, 0.5);
        }
        let manifest = Manifest::new(entries);
        match subgroup_metrics(&sf, &manifest, by_gender) {
            Err(EvalError::SingleClassGroup { group, pos: 0, neg: 2 }) => {
                assert_eq!(group, "female")
            }
            other => panic!("expected SingleClassGroup, got {other:?}"),
        }
    }

    #[test]
    fn unknown_metadata_is_skipped() {
        let entries = vec![
            entry("a", Label::Covid, Gender::Unknown, Some(45)),
            entry("b", Label::NonCovid, Gender::Male, Some(50)),
            entry("c", Label::Covid, Gender::Male, Some(20)),
            entry("d", Label::NonCovid, Gender::Unknown, Some(30)),
        ];
        let mut sf = ScoreFile::new();
        for id in ["a", "b", "c", "d"] {
            sf.insert(id, 0.5);
        }
        let manifest = Manifest::new(entries);
        let by_g = subgroup_metrics(&sf, &manifest, by_gender).unwrap();
        assert_eq!(by_g.len(), 1, "unknown-gender entries must not form a group");
        assert_eq!(by_g["male"].n_pos + by_g["male"].n_neg, 2);

        let by_a = subgroup_metrics(&sf, &manifest, by_age_threshold(40)).unwrap();
        assert_eq!(by_a.len(), 2);
        assert_eq!((by_a["age>=40"].n_pos, by_a["age>=40"].n_neg), (1, 1));
        assert_eq!((by_a["age<40"].n_pos, by_a["age<40"].n_neg), (1, 1));
    }

    #[test]
    fn group_auc_matches_pair_counting_oracle() {
        let mut rng = Rng::new(88);
        let mut entries = Vec::new();
        let mut sf = ScoreFile::new();
        let mut per_group: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for i in 0..120 {
            let gender = if rng.below(2) == 0 {
                Gender::Male
            } else {
                Gender::Female
            };
            let label = if rng.below(4) == 0 {
                Label::Covid
            } else {
                Label::NonCovid
            };
            let score = rng.next_f64();
            let id = format!("r{i:03}");
            entries.push(entry(&id, label, gender, Some(30)));
            sf.insert(&id, score);
            let bucket = per_group
                .entry(if gender == Gender::Male { "male" } else { "female" })
                .or_default();
            if label == Label::Covid {
                bucket.0.push(score);
            } else {
                bucket.1.push(score);
            }
        }
        let manifest = Manifest::new(entries);
        let groups = subgroup_metrics(&sf, &manifest, by_gender).unwrap();
        for (name, (pos, neg)) in per_group {
            let oracle = super::super::roc::tests::mann_whitney_auc(&pos, &neg);
            let got = groups[name].auc;
            assert!(
                (got - oracle).abs() < 1e-3,
                "{name}: sweep {got} vs pairs {oracle}"
            );
        }
    }
}
