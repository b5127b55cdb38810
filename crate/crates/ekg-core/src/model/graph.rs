//! The directed event graph: nodes, temporal-succession edges, features.
//!
//! Edges only connect adjacent segments of one video, so a valid graph is a
//! disjoint union of directed paths ("chains"). The invariant checker is the
//! single authority on structural validity; builders and loaders both run it.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{CoreError, EventRecord, FeatureStore};

/// A structural defect found by [`EventGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphViolation {
    DuplicateClip { video_id: String, seq_index: u32 },
    UnknownEndpoint { edge: (u64, u64) },
    EdgeRuleBroken { edge: (u64, u64), reason: String },
    MissingEdge { src: u64, dst: u64 },
    DegreeExceeded { node: u64, out_degree: usize, in_degree: usize },
    CycleDetected { node: u64 },
    DanglingFeature { node: u64, feature_row: usize, rows: usize },
    BadRecord { message: String },
}

impl std::fmt::Display for GraphViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GraphViolation::DuplicateClip { video_id, seq_index } => {
                write!(f, "duplicate clip ({video_id}, {seq_index})")
            }
            GraphViolation::UnknownEndpoint { edge } => {
                write!(f, "edge ({}, {}) references an unknown node", edge.0, edge.1)
            }
            GraphViolation::EdgeRuleBroken { edge, reason } => {
                write!(f, "edge ({}, {}) breaks the adjacency rule: {reason}", edge.0, edge.1)
            }
            GraphViolation::MissingEdge { src, dst } => {
                write!(f, "adjacent clips {src} -> {dst} lack an edge")
            }
            GraphViolation::DegreeExceeded { node, out_degree, in_degree } => {
                write!(f, "node {node} has out-degree {out_degree}, in-degree {in_degree}")
            }
            GraphViolation::CycleDetected { node } => write!(f, "cycle through node {node}"),
            GraphViolation::DanglingFeature { node, feature_row, rows } => {
                write!(f, "node {node} references feature row {feature_row} of {rows}")
            }
            GraphViolation::BadRecord { message } => f.write_str(message),
        }
    }
}

/// Directed multimodal event graph.
#[derive(Debug, Clone)]
pub struct EventGraph {
    nodes: BTreeMap<u64, EventRecord>,
    edges: BTreeSet<(u64, u64)>,
    successor: HashMap<u64, u64>,
    features: FeatureStore,
}

impl EventGraph {
    /// Assembles a graph from parts without validating.
    ///
    /// Loaders and tests use this to construct candidates; call
    /// [`EventGraph::validate`] before trusting the result.
    pub fn from_parts_unchecked(
        nodes: BTreeMap<u64, EventRecord>,
        edges: BTreeSet<(u64, u64)>,
        features: FeatureStore,
    ) -> Self {
        let successor = edges.iter().copied().collect();
        Self {
            nodes,
            edges,
            successor,
            features,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, id: u64) -> Option<&EventRecord> {
        self.nodes.get(&id)
    }

    pub fn contains(&self, id: u64) -> bool {
        self.nodes.contains_key(&id)
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = &EventRecord> {
        self.nodes.values()
    }

    /// Edges in ascending (src, dst) order.
    pub fn edges(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.edges.iter().copied()
    }

    /// The unique successor along the chain, if any.
    pub fn successor(&self, id: u64) -> Option<u64> {
        self.successor.get(&id).copied()
    }

    pub fn features(&self) -> &FeatureStore {
        &self.features
    }

    /// The visual feature row backing a node.
    pub fn node_feature(&self, id: u64) -> Option<&[f32]> {
        self.nodes.get(&id).map(|n| self.features.row(n.feature_row))
    }

    /// Runs every structural check and returns the first violation found.
    ///
    /// Checks, in order: per-record field invariants, `(video_id, seq_index)`
    /// uniqueness, the edge ⇔ adjacent-segment rule in both directions,
    /// degree bounds, acyclicity, and feature-row bounds.
    pub fn validate(&self) -> Result<(), GraphViolation> {
        let mut by_clip: BTreeMap<(&str, u32), u64> = BTreeMap::new();
        for rec in self.nodes.values() {
            rec.check().map_err(|message| GraphViolation::BadRecord { message })?;
            if by_clip
                .insert((rec.video_id.as_str(), rec.seq_index), rec.id)
                .is_some()
            {
                return Err(GraphViolation::DuplicateClip {
                    video_id: rec.video_id.clone(),
                    seq_index: rec.seq_index,
                });
            }
            if rec.feature_row >= self.features.rows() {
                return Err(GraphViolation::DanglingFeature {
                    node: rec.id,
                    feature_row: rec.feature_row,
                    rows: self.features.rows(),
                });
            }
        }
        for (id, rec) in &self.nodes {
            if *id != rec.id {
                return Err(GraphViolation::BadRecord {
                    message: format!("node keyed {id} carries id {}", rec.id),
                });
            }
        }

        // Edge => rule.
        for &(src, dst) in &self.edges {
            let (a, b) = match (self.nodes.get(&src), self.nodes.get(&dst)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(GraphViolation::UnknownEndpoint { edge: (src, dst) }),
            };
            if a.video_id != b.video_id {
                return Err(GraphViolation::EdgeRuleBroken {
                    edge: (src, dst),
                    reason: format!("videos {} and {}", a.video_id, b.video_id),
                });
            }
            if b.seq_index != a.seq_index + 1 {
                return Err(GraphViolation::EdgeRuleBroken {
                    edge: (src, dst),
                    reason: format!("seq {} -> {}", a.seq_index, b.seq_index),
                });
            }
        }

        // Rule => edge: consecutive seq indices within a video must be linked.
        for ((video, seq), &id) in &by_clip {
            if let Some(&next) = by_clip.get(&(*video, seq + 1)) {
                if !self.edges.contains(&(id, next)) {
                    return Err(GraphViolation::MissingEdge { src: id, dst: next });
                }
            }
        }

        // Degree bounds.
        let mut out_deg: HashMap<u64, usize> = HashMap::new();
        let mut in_deg: HashMap<u64, usize> = HashMap::new();
        for &(src, dst) in &self.edges {
            *out_deg.entry(src).or_default() += 1;
            *in_deg.entry(dst).or_default() += 1;
        }
        for &id in self.nodes.keys() {
            let o = out_deg.get(&id).copied().unwrap_or(0);
            let i = in_deg.get(&id).copied().unwrap_or(0);
            if o > 1 || i > 1 {
                return Err(GraphViolation::DegreeExceeded {
                    node: id,
                    out_degree: o,
                    in_degree: i,
                });
            }
        }

        // Acyclicity. With degrees ≤ 1 a cycle is a closed loop; walk each
        // chain from its head and flag any node never released.
        let mut visited: BTreeSet<u64> = BTreeSet::new();
        for &id in self.nodes.keys() {
            if in_deg.get(&id).copied().unwrap_or(0) == 0 {
                let mut cur = id;
                loop {
                    visited.insert(cur);
                    match self.successor(cur) {
                        Some(next) => cur = next,
                        None => break,
                    }
                }
            }
        }
        if let Some(&stranded) = self.nodes.keys().find(|id| !visited.contains(id)) {
            return Err(GraphViolation::CycleDetected { node: stranded });
        }
        Ok(())
    }

    /// Validates and converts the violation into a [`CoreError`].
    pub fn ensure_valid(&self) -> Result<(), CoreError> {
        self.validate().map_err(CoreError::Invariant)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EventKind;

    fn record(id: u64, video: &str, seq: u32, feature_row: usize) -> EventRecord {
        EventRecord {
            id,
            video_id: video.into(),
            seq_index: seq,
            source_room: "a".into(),
            action: "walk".into(),
            target_room: "b".into(),
            scene_context: String::new(),
            description: "walk from a to b".into(),
            kind: EventKind::Event,
            duration_s: 1.0,
            feature_row,
        }
    }

    fn store(rows: usize) -> FeatureStore {
        FeatureStore::new(2, vec![1.0; rows * 2], false).unwrap()
    }

    fn chain(n: usize) -> EventGraph {
        let nodes: BTreeMap<u64, EventRecord> = (0..n as u64)
            .map(|i| (i, record(i, "v", i as u32, i as usize)))
            .collect();
        let edges: BTreeSet<(u64, u64)> = (0..n.saturating_sub(1) as u64)
            .map(|i| (i, i + 1))
            .collect();
        EventGraph::from_parts_unchecked(nodes, edges, store(n))
    }

    #[test]
    fn valid_chain_passes() {
        assert!(chain(4).validate().is_ok());
        assert!(chain(0).validate().is_ok());
        assert!(chain(1).validate().is_ok());
    }

    #[test]
    fn out_degree_two_rejected() {
        let mut g = chain(3);
        // 0 -> 2 in addition to 0 -> 1: breaks the seq rule and the degree rule.
        g.edges.insert((0, 2));
        g.successor = g.edges.iter().copied().collect();
        assert!(g.validate().is_err());
    }

    #[test]
    fn missing_edge_between_adjacent_clips_rejected() {
        let mut g = chain(3);
        g.edges.remove(&(1, 2));
        g.successor = g.edges.iter().copied().collect();
        assert_eq!(
            g.validate(),
            Err(GraphViolation::MissingEdge { src: 1, dst: 2 })
        );
    }

    #[test]
    fn cycle_rejected() {
        // Two records that point at each other; seq rule is broken too, so
        // build seq indices that satisfy it pairwise is impossible — use the
        // explicit cycle of a two-video artifact instead.
        let mut nodes = BTreeMap::new();
        nodes.insert(0, record(0, "v", 0, 0));
        nodes.insert(1, record(1, "v", 1, 1));
        let mut edges = BTreeSet::new();
        edges.insert((0, 1));
        let mut g = EventGraph::from_parts_unchecked(nodes, edges, store(2));
        // Force a back edge that also satisfies nothing: validate must fail
        // before the cycle check via the edge rule; drop rule checks by
        // making the cycle seq-consistent is impossible, so assert any error.
        g.edges.insert((1, 0));
        g.successor = g.edges.iter().copied().collect();
        assert!(g.validate().is_err());
    }

    #[test]
    fn dangling_feature_rejected() {
        let nodes: BTreeMap<u64, EventRecord> =
            [(0u64, record(0, "v", 0, 5))].into_iter().collect();
        let g = EventGraph::from_parts_unchecked(nodes, BTreeSet::new(), store(1));
        assert!(matches!(
            g.validate(),
            Err(GraphViolation::DanglingFeature { .. })
        ));
    }

    #[test]
    fn duplicate_clip_rejected() {
        let mut nodes = BTreeMap::new();
        nodes.insert(0, record(0, "v", 0, 0));
        nodes.insert(1, record(1, "v", 0, 1));
        let g = EventGraph::from_parts_unchecked(nodes, BTreeSet::new(), store(2));
        assert!(matches!(
            g.validate(),
            Err(GraphViolation::DuplicateClip { .. })
        ));
    }
}
