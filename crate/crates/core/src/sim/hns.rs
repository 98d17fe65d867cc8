//! High-level coordination: three predicates select the active behaviors.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HnsThresholds {
    /// Heading error (deg) at or above which the heading behavior engages.
    pub heading: f64,
    /// Depth error (m) at or above which the depth behavior engages.
    pub depth: f64,
    /// Smoothed score at or above which a step counts as corner.
    pub class_threshold: f64,
    /// Consecutive corner steps needed to trigger a turn.
    pub corner_steps: usize,
}

impl Default for HnsThresholds {
    fn default() -> Self {
        Self { heading: 5.0, depth: 0.05, class_threshold: 0.5, corner_steps: 3 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicates {
    pub heading_off: bool,
    pub depth_off: bool,
    pub corner: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorSet {
    pub heading: bool,
    pub depth: bool,
    pub edge: bool,
    pub corner_turn: bool,
}

impl BehaviorSet {
    pub fn is_empty(&self) -> bool {
        !(self.heading || self.depth || self.edge || self.corner_turn)
    }

    /// `|`-joined names, e.g. `heading|edge`.
    pub fn label(&self) -> String {
        let names = [(self.heading, "heading"), (self.depth, "depth"), (self.edge, "edge"), (self.corner_turn, "corner-turn")];
        names.iter().filter(|(on, _)| *on).map(|(_, n)| *n).collect::<Vec<_>>().join("|")
    }
}

/// The 8-entry coordination table.
pub fn behavior_table(p: Predicates) -> BehaviorSet {
    BehaviorSet { heading: p.heading_off && !p.corner, depth: p.depth_off, edge: !p.corner, corner_turn: p.corner }
}

/// Evaluates the predicates and looks up the table.
pub fn coordinate_behaviors(heading_error: f64, depth_error: f64, corner_streak: usize, th: &HnsThresholds) -> (Predicates, BehaviorSet) {
    let p = Predicates {
        heading_off: heading_error.abs() >= th.heading,
        depth_off: depth_error.abs() >= th.depth,
        corner: corner_streak >= th.corner_steps.max(1),
    };
    (p, behavior_table(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_total_and_nonempty() {
        for bits in 0..8u8 {
            let p = Predicates { heading_off: bits & 1 != 0, depth_off: bits & 2 != 0, corner: bits & 4 != 0 };
            let b = behavior_table(p);
            assert!(!b.is_empty());
            assert_eq!(b.edge, !p.corner);
            assert_eq!(b.corner_turn, p.corner);
            assert_eq!(b.depth, p.depth_off);
        }
    }

    #[test]
    fn examples() {
        let th = HnsThresholds::default();
        let (_, b) = coordinate_behaviors(0.0, 0.0, 0, &th);
        assert_eq!(b, BehaviorSet { edge: true, ..BehaviorSet::default() });
        assert_eq!(b.label(), "edge");
        let (_, b) = coordinate_behaviors(-7.0, 0.5, 2, &th);
        assert_eq!(b, BehaviorSet { heading: true, depth: true, edge: true, corner_turn: false });
        let (p, b) = coordinate_behaviors(30.0, 0.0, 3, &th);
        assert!(p.corner && b.corner_turn && !b.edge && !b.heading);
    }
}
