//! Event extraction over precomputed frame-to-prompt similarity matrices:
//! indoor filtering, frame labeling, representative-frame selection, and
//! event-clip segmentation.
//!
//! Everything here is pure and deterministic: identical inputs and config
//! produce identical outputs, with ties always broken toward the lowest
//! index.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{shannon_entropy, CoreError, FeatureStore, ProbMatrix};

#[derive(Debug, Error)]
pub enum SegmentError {
    #[error("invalid temperature {0}: must be > 0")]
    InvalidTemperature(f64),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid segments: {0}")]
    InvalidSegments(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Tunables for the extraction pipeline.
///
/// `indoor_labels` are label *names*; they are resolved against the sidecar
/// vocabulary when the pipeline runs. An empty list keeps every frame.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SegmenterConfig {
    /// Softmax temperature for similarity rows.
    pub tau: f64,
    /// Minimum softmax mass on indoor labels for a frame to be kept.
    pub theta_indoor: f64,
    /// Names of labels counted as indoor.
    pub indoor_labels: Vec<String>,
    /// Runs with fewer kept frames than this are absorbed into the
    /// preceding segment.
    pub min_seg_len: usize,
    /// Upstream sampling rate, frames per second.
    pub fps: f64,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self {
            tau: 0.07,
            theta_indoor: 0.5,
            indoor_labels: Vec::new(),
            min_seg_len: 2,
            fps: 0.5,
        }
    }
}

/// Per-frame labeling output: argmax labels, entropies of the full softmax
/// row, and the indoor mask. All vectors share length T.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLabeling {
    pub labels: Vec<usize>,
    pub entropies: Vec<f64>,
    pub kept: Vec<bool>,
}

impl FrameLabeling {
    pub fn empty() -> Self {
        Self {
            labels: Vec::new(),
            entropies: Vec::new(),
            kept: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// A maximal stretch of kept frames sharing one label.
///
/// `start`/`end` are original frame indices (inclusive) and are themselves
/// kept frames; dropped or absorbed frames may sit strictly inside the span.
/// `rep_frame` is the kept frame of the segment's own label with minimum
/// entropy (ties toward the earliest frame).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub label: usize,
    pub start: usize,
    pub end: usize,
    pub rep_frame: usize,
}

/// A room-to-room transition clip spanning two successive representative
/// frames (both inclusive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventClip {
    pub start_frame: usize,
    pub end_frame: usize,
    pub src_label: usize,
    pub dst_label: usize,
    pub duration_s: f64,
}

/// Softmax of each similarity row at temperature `tau`, as a validated
/// probability matrix.
///
/// Rows are shifted by their maximum before exponentiation; sums accumulate
/// in f64.
pub fn softmax_probs(
    sims: &FeatureStore,
    tau: f64,
    label_names: &[String],
) -> Result<ProbMatrix, SegmentError> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(SegmentError::InvalidTemperature(tau));
    }
    if label_names.len() != sims.dim() {
        return Err(SegmentError::Format(format!(
            "{} label names for a {}-column matrix",
            label_names.len(),
            sims.dim()
        )));
    }
    let k = sims.dim();
    let t = sims.rows();
    let mut probs = Vec::with_capacity(t * k);
    for row in 0..t {
        let logits: Vec<f64> = sims.row(row).iter().map(|&x| f64::from(x) / tau).collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        probs.extend(exps.iter().map(|&e| e / sum));
    }
    ProbMatrix::new(t, k, probs, label_names.to_vec()).map_err(SegmentError::Core)
}

/// Labels every frame from its softmax row and masks frames whose indoor
/// mass falls below `theta_indoor`.
///
/// Argmax ties break toward the lowest label index. Labels and entropies are
/// computed for all frames, kept or not.
pub fn label_frames(
    sims: &FeatureStore,
    tau: f64,
    indoor_labels: &BTreeSet<usize>,
    theta_indoor: f64,
    label_names: &[String],
) -> Result<FrameLabeling, SegmentError> {
    if indoor_labels.is_empty() {
        return Err(SegmentError::InvalidConfig(
            "indoor label set is empty".into(),
        ));
    }
    if let Some(&bad) = indoor_labels.iter().find(|&&i| i >= sims.dim()) {
        return Err(SegmentError::InvalidConfig(format!(
            "indoor label index {bad} out of range for {} labels",
            sims.dim()
        )));
    }
    let probs = softmax_probs(sims, tau, label_names)?;
    let mut labeling = FrameLabeling::empty();
    for frame in 0..probs.frames() {
        let row = probs.row(frame);
        let mut best = 0usize;
        for (idx, &p) in row.iter().enumerate() {
            if p > row[best] {
                best = idx;
            }
        }
        let indoor_mass: f64 = indoor_labels.iter().map(|&i| row[i]).sum();
        labeling.labels.push(best);
        labeling.entropies.push(shannon_entropy(row)?);
        labeling.kept.push(indoor_mass >= theta_indoor);
    }
    Ok(labeling)
}

/// Merges kept frames into same-label segments and picks each segment's
/// minimum-entropy representative frame.
///
/// Runs are maximal stretches of equal labels over the kept subsequence.
/// The first run seeds a segment regardless of length; later runs merge into
/// the current segment when labels match, are absorbed (span extension only)
/// when shorter than `min_seg_len`, and otherwise open a new segment. If the
/// leading segment still holds fewer than `min_seg_len` frames of its own
/// label once the scan finishes, it is dropped.
pub fn select_representatives(labeling: &FrameLabeling, min_seg_len: usize) -> Vec<Segment> {
    let min_seg_len = min_seg_len.max(1);

    struct Run {
        label: usize,
        frames: Vec<usize>,
    }
    let mut runs: Vec<Run> = Vec::new();
    for t in 0..labeling.len() {
        if !labeling.kept[t] {
            continue;
        }
        let label = labeling.labels[t];
        match runs.last_mut() {
            Some(run) if run.label == label => run.frames.push(t),
            _ => runs.push(Run {
                label,
                frames: vec![t],
            }),
        }
    }

    struct Build {
        label: usize,
        start: usize,
        end: usize,
        frames: Vec<usize>,
    }
    let mut segs: Vec<Build> = Vec::new();
    for run in runs {
        let (first, last) = (run.frames[0], *run.frames.last().unwrap());
        match segs.last_mut() {
            Some(top) if top.label == run.label => {
                top.end = last;
                top.frames.extend(run.frames);
            }
            Some(top) if run.frames.len() < min_seg_len => {
                // Flicker: extend the span but keep the current label.
                top.end = last;
            }
            _ => {
                segs.push(Build {
                    label: run.label,
                    start: first,
                    end: last,
                    frames: run.frames,
                });
            }
        }
    }
    if let Some(first) = segs.first() {
        if first.frames.len() < min_seg_len {
            segs.remove(0);
        }
    }

    segs.into_iter()
        .map(|b| {
            let rep = b
                .frames
                .iter()
                .copied()
                .min_by(|&a, &c| {
                    labeling.entropies[a]
                        .partial_cmp(&labeling.entropies[c])
                        .unwrap()
                        .then(a.cmp(&c))
                })
                .unwrap();
            Segment {
                label: b.label,
                start: b.start,
                end: b.end,
                rep_frame: rep,
            }
        })
        .collect()
}

/// Emits one clip per label change between successive representative frames.
pub fn extract_event_clips(
    segments: &[Segment],
    fps: f64,
) -> Result<Vec<EventClip>, SegmentError> {
    if !(fps > 0.0) || !fps.is_finite() {
        return Err(SegmentError::InvalidConfig(format!(
            "fps must be positive, got {fps}"
        )));
    }
    for s in segments {
        if s.start > s.rep_frame || s.rep_frame > s.end {
            return Err(SegmentError::InvalidSegments(format!(
                "representative frame {} outside span [{}, {}]",
                s.rep_frame, s.start, s.end
            )));
        }
    }
    for w in segments.windows(2) {
        if w[1].start <= w[0].end || w[1].rep_frame <= w[0].rep_frame {
            return Err(SegmentError::InvalidSegments(format!(
                "segments out of order near frames {} and {}",
                w[0].end, w[1].start
            )));
        }
    }
    let mut clips = Vec::new();
    for w in segments.windows(2) {
        if w[0].label != w[1].label {
            clips.push(EventClip {
                start_frame: w[0].rep_frame,
                end_frame: w[1].rep_frame,
                src_label: w[0].label,
                dst_label: w[1].label,
                duration_s: (w[1].rep_frame - w[0].rep_frame) as f64 / fps,
            });
        }
    }
    Ok(clips)
}

/// Reads the label sidecar: one label name per line, order = column order.
pub fn load_label_names(path: &Path) -> Result<Vec<String>, SegmentError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SegmentError::Format(format!("{}: {e}", path.display())))?;
    let names: Vec<String> = text
        .lines()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect();
    if names.is_empty() {
        return Err(SegmentError::Format(format!(
            "{}: no label names",
            path.display()
        )));
    }
    Ok(names)
}

/// Full pipeline over an EKGF similarity matrix and its label sidecar:
/// label, filter, merge, extract.
pub fn run_pipeline(
    sims_path: &Path,
    labels_path: &Path,
    config: &SegmenterConfig,
) -> Result<(Vec<EventClip>, FrameLabeling), SegmentError> {
    let sims = FeatureStore::load(sims_path).map_err(|e| SegmentError::Format(e.to_string()))?;
    let label_names = load_label_names(labels_path)?;
    run_pipeline_in_memory(&sims, &label_names, config)
}

/// [`run_pipeline`] over already-loaded inputs.
pub fn run_pipeline_in_memory(
    sims: &FeatureStore,
    label_names: &[String],
    config: &SegmenterConfig,
) -> Result<(Vec<EventClip>, FrameLabeling), SegmentError> {
    if sims.dim() != label_names.len() {
        return Err(SegmentError::Format(format!(
            "matrix has {} columns but sidecar lists {} labels",
            sims.dim(),
            label_names.len()
        )));
    }
    if sims.rows() == 0 {
        return Ok((Vec::new(), FrameLabeling::empty()));
    }
    let indoor = resolve_indoor_labels(&config.indoor_labels, label_names)?;
    let labeling = label_frames(sims, config.tau, &indoor, config.theta_indoor, label_names)?;
    let segments = select_representatives(&labeling, config.min_seg_len);
    let clips = extract_event_clips(&segments, config.fps)?;
    Ok((clips, labeling))
}

/// Maps configured indoor label names to column indices. An empty config
/// list means "all labels are indoor".
pub fn resolve_indoor_labels(
    configured: &[String],
    label_names: &[String],
) -> Result<BTreeSet<usize>, SegmentError> {
    if configured.is_empty() {
        return Ok((0..label_names.len()).collect());
    }
    let mut indices = BTreeSet::new();
    for name in configured {
        match label_names.iter().position(|n| n == name) {
            Some(i) => {
                indices.insert(i);
            }
            None => {
                return Err(SegmentError::InvalidConfig(format!(
                    "indoor label {name:?} is not in the vocabulary"
                )))
            }
        }
    }
    Ok(indices)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("room{i}")).collect()
    }

    fn matrix(rows: &[Vec<f32>]) -> FeatureStore {
        FeatureStore::from_rows(rows[0].len(), rows).unwrap()
    }

    fn all_indoor(k: usize) -> BTreeSet<usize> {
        (0..k).collect()
    }

    fn labeling(labels: &[usize], entropies: &[f64]) -> FrameLabeling {
        FrameLabeling {
            labels: labels.to_vec(),
            entropies: entropies.to_vec(),
            kept: vec![true; labels.len()],
        }
    }

    #[test]
    fn dominant_logit_is_certain_and_kept() {
        let sims = matrix(&[vec![10.0, 0.0, 0.0]]);
        let out = label_frames(&sims, 1.0, &all_indoor(3), 0.0, &names(3)).unwrap();
        assert_eq!(out.labels, vec![0]);
        assert!(out.entropies[0] < 0.01, "entropy {}", out.entropies[0]);
        assert!(out.kept[0]);
    }

    #[test]
    fn uniform_row_ties_break_low_and_hit_ln_k() {
        let sims = matrix(&[vec![0.0, 0.0, 0.0]]);
        let out = label_frames(&sims, 1.0, &all_indoor(3), 0.0, &names(3)).unwrap();
        assert_eq!(out.labels, vec![0]);
        assert!((out.entropies[0] - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn tau_must_be_positive() {
        let sims = matrix(&[vec![1.0, 2.0]]);
        assert!(matches!(
            label_frames(&sims, 0.0, &all_indoor(2), 0.0, &names(2)),
            Err(SegmentError::InvalidTemperature(_))
        ));
    }

    #[test]
    fn empty_indoor_set_rejected() {
        let sims = matrix(&[vec![1.0, 2.0]]);
        assert!(matches!(
            label_frames(&sims, 1.0, &BTreeSet::new(), 0.0, &names(2)),
            Err(SegmentError::InvalidConfig(_))
        ));
    }

    #[test]
    fn indoor_threshold_masks_low_mass_frames() {
        // Label 0 is indoor; second frame puts nearly all mass on label 1.
        let sims = matrix(&[vec![4.0, 0.0], vec![0.0, 4.0]]);
        let indoor: BTreeSet<usize> = [0].into_iter().collect();
        let out = label_frames(&sims, 1.0, &indoor, 0.5, &names(2)).unwrap();
        assert_eq!(out.kept, vec![true, false]);
        // Labels are still computed for masked frames.
        assert_eq!(out.labels, vec![0, 1]);
    }

    #[test]
    fn representatives_pick_min_entropy_per_run() {
        let l = labeling(&[0, 0, 1, 1], &[0.5, 0.1, 0.3, 0.2]);
        let segs = select_representatives(&l, 1);
        assert_eq!(
            segs,
            vec![
                Segment { label: 0, start: 0, end: 1, rep_frame: 1 },
                Segment { label: 1, start: 2, end: 3, rep_frame: 3 },
            ]
        );
    }

    #[test]
    fn single_run_yields_single_segment() {
        let l = labeling(&[2, 2, 2], &[0.3, 0.2, 0.4]);
        let segs = select_representatives(&l, 2);
        assert_eq!(
            segs,
            vec![Segment { label: 2, start: 0, end: 2, rep_frame: 1 }]
        );
    }

    #[test]
    fn short_flicker_run_is_absorbed() {
        // A single-frame B run between A frames collapses into one A segment.
        let l = labeling(&[0, 1, 0], &[0.2, 0.1, 0.3]);
        let segs = select_representatives(&l, 2);
        assert_eq!(
            segs,
            vec![Segment { label: 0, start: 0, end: 2, rep_frame: 0 }]
        );
    }

    #[test]
    fn short_leading_run_is_dropped() {
        let l = labeling(&[1, 0, 0, 0], &[0.1, 0.2, 0.3, 0.4]);
        let segs = select_representatives(&l, 2);
        assert_eq!(
            segs,
            vec![Segment { label: 0, start: 1, end: 3, rep_frame: 1 }]
        );
    }

    #[test]
    fn rep_ties_break_toward_earliest() {
        let l = labeling(&[0, 0, 0], &[0.2, 0.2, 0.2]);
        let segs = select_representatives(&l, 1);
        assert_eq!(segs[0].rep_frame, 0);
    }

    #[test]
    fn masked_frames_split_nothing_but_are_skipped() {
        let mut l = labeling(&[0, 0, 0, 0, 0], &[0.5, 0.4, 0.9, 0.3, 0.6]);
        l.kept[2] = false;
        let segs = select_representatives(&l, 1);
        // One segment; the masked frame cannot be the representative even
        // though it has an entropy value.
        assert_eq!(
            segs,
            vec![Segment { label: 0, start: 0, end: 4, rep_frame: 3 }]
        );
    }

    #[test]
    fn clips_span_representative_frames() {
        let segs = vec![
            Segment { label: 0, start: 0, end: 1, rep_frame: 1 },
            Segment { label: 1, start: 2, end: 3, rep_frame: 3 },
        ];
        let clips = extract_event_clips(&segs, 0.5).unwrap();
        assert_eq!(
            clips,
            vec![EventClip {
                start_frame: 1,
                end_frame: 3,
                src_label: 0,
                dst_label: 1,
                duration_s: 4.0,
            }]
        );
    }

    #[test]
    fn single_segment_yields_no_clips() {
        let segs = vec![Segment { label: 0, start: 0, end: 5, rep_frame: 2 }];
        assert!(extract_event_clips(&segs, 0.5).unwrap().is_empty());
    }

    #[test]
    fn non_monotone_segments_rejected() {
        let segs = vec![
            Segment { label: 0, start: 0, end: 3, rep_frame: 1 },
            Segment { label: 1, start: 2, end: 4, rep_frame: 3 },
        ];
        assert!(matches!(
            extract_event_clips(&segs, 0.5),
            Err(SegmentError::InvalidSegments(_))
        ));
    }

    #[test]
    fn pipeline_on_empty_matrix_is_empty() {
        let sims = FeatureStore::empty(3).unwrap();
        let cfg = SegmenterConfig::default();
        let (clips, labeling) = run_pipeline_in_memory(&sims, &names(3), &cfg).unwrap();
        assert!(clips.is_empty());
        assert!(labeling.is_empty());
    }

    #[test]
    fn pipeline_three_room_walkthrough() {
        // Ten frames walking room0 -> room1 -> room2, strong logits.
        let mut rows = Vec::new();
        for t in 0..10 {
            let label = if t < 4 {
                0
            } else if t < 7 {
                1
            } else {
                2
            };
            let mut row = vec![0.0f32; 3];
            row[label] = 8.0;
            rows.push(row);
        }
        let sims = matrix(&rows);
        let cfg = SegmenterConfig {
            tau: 1.0,
            theta_indoor: 0.0,
            ..SegmenterConfig::default()
        };
        let (clips, _) = run_pipeline_in_memory(&sims, &names(3), &cfg).unwrap();
        assert_eq!(clips.len(), 2);
        assert_eq!((clips[0].src_label, clips[0].dst_label), (0, 1));
        assert_eq!((clips[1].src_label, clips[1].dst_label), (1, 2));
        assert!(clips[0].start_frame < clips[0].end_frame);
        assert!(clips[0].end_frame <= clips[1].start_frame);
    }

    #[test]
    fn unknown_indoor_label_rejected() {
        assert!(resolve_indoor_labels(&["porch".into()], &names(2)).is_err());
        let got = resolve_indoor_labels(&["room1".into()], &names(3)).unwrap();
        assert_eq!(got.into_iter().collect::<Vec<_>>(), vec![1]);
    }
}
