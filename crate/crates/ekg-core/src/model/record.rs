//! Event records: the six-field event tuple plus provenance.

use serde::{Deserialize, Serialize};

/// Node kind. Events carry a room-to-room transition; scenes carry static
/// context only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    #[serde(rename = "Event-0")]
    Event,
    #[serde(rename = "Scene-1")]
    Scene,
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EventKind::Event => f.write_str("Event-0"),
            EventKind::Scene => f.write_str("Scene-1"),
        }
    }
}

/// One node of the event graph: a spatiotemporal transition unit (or a
/// contextual scene) mined from a single source video.
///
/// `(video_id, seq_index)` identifies the clip within the corpus;
/// `feature_row` points at the node's visual feature in the companion
/// [`super::FeatureStore`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub id: u64,
    pub video_id: String,
    pub seq_index: u32,
    pub source_room: String,
    pub action: String,
    pub target_room: String,
    pub scene_context: String,
    pub description: String,
    pub kind: EventKind,
    pub duration_s: f32,
    pub feature_row: usize,
}

impl EventRecord {
    /// Checks the per-record invariants: non-negative duration, and a
    /// complete transition triple for event-kind records.
    pub fn check(&self) -> Result<(), String> {
        if !self.duration_s.is_finite() || self.duration_s < 0.0 {
            return Err(format!(
                "record {}: duration_s must be a non-negative finite float, got {}",
                self.id, self.duration_s
            ));
        }
        if self.kind == EventKind::Event
            && (self.source_room.is_empty()
                || self.action.is_empty()
                || self.target_room.is_empty())
        {
            return Err(format!(
                "record {}: event-kind records need a complete source/action/target triple",
                self.id
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn event() -> EventRecord {
        EventRecord {
            id: 0,
            video_id: "vid".into(),
            seq_index: 0,
            source_room: "bedroom".into(),
            action: "walk across the corridor".into(),
            target_room: "bathroom".into(),
            scene_context: String::new(),
            description: "walks across the corridor into the bathroom".into(),
            kind: EventKind::Event,
            duration_s: 8.0,
            feature_row: 0,
        }
    }

    #[test]
    fn kind_serializes_with_numeric_suffix() {
        assert_eq!(serde_json::to_string(&EventKind::Event).unwrap(), "\"Event-0\"");
        assert_eq!(serde_json::to_string(&EventKind::Scene).unwrap(), "\"Scene-1\"");
        let back: EventKind = serde_json::from_str("\"Scene-1\"").unwrap();
        assert_eq!(back, EventKind::Scene);
    }

    #[test]
    fn event_requires_complete_triple() {
        assert!(event().check().is_ok());
        let mut broken = event();
        broken.target_room.clear();
        assert!(broken.check().is_err());
    }

    #[test]
    fn scene_allows_empty_triple() {
        let mut scene = event();
        scene.kind = EventKind::Scene;
        scene.source_room.clear();
        scene.action.clear();
        scene.target_room.clear();
        assert!(scene.check().is_ok());
    }

    #[test]
    fn negative_duration_rejected() {
        let mut broken = event();
        broken.duration_s = -0.5;
        assert!(broken.check().is_err());
    }
}
