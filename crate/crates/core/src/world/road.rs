use serde::{Deserialize, Serialize};

pub const DEFAULT_LANE_WIDTH: f64 = 3.5;

/// An acceleration lane segment that ends at `s_end`. Occupants must leave it
/// before the end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeSection {
    pub lane_index: usize,
    pub s_start: f64,
    pub s_end: f64,
}

impl MergeSection {
    pub fn contains(&self, lane_index: usize, s: f64) -> bool {
        self.lane_index == lane_index && s >= self.s_start && s <= self.s_end
    }
}

/// Straight multi-lane highway. Lane 0 is the rightmost lane; its center sits
/// at lateral position `y = 0` and `y` grows toward the left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadModel {
    pub lane_count: usize,
    pub lane_width: f64,
    pub merge_sections: Vec<MergeSection>,
}

impl RoadModel {
    pub fn new(lane_count: usize) -> Self {
        Self {
            lane_count,
            lane_width: DEFAULT_LANE_WIDTH,
            merge_sections: Vec::new(),
        }
    }

    pub fn lane_center(&self, lane_index: usize) -> f64 {
        lane_index as f64 * self.lane_width
    }

    /// Lane whose center is nearest to `y`; a point exactly between two lanes
    /// belongs to the left one. May be out of range for off-road `y`.
    pub fn nearest_lane(&self, y: f64) -> i64 {
        (y / self.lane_width + 0.5).floor() as i64
    }

    pub fn has_lane(&self, lane: i64) -> bool {
        lane >= 0 && (lane as usize) < self.lane_count
    }

    /// Lateral position bounds of the drivable area (outer lane centers).
    pub fn lateral_bounds(&self) -> (f64, f64) {
        (0.0, self.lane_center(self.lane_count - 1))
    }

    pub fn is_merge_lane(&self, lane_index: usize) -> bool {
        self.merge_sections.iter().any(|m| m.lane_index == lane_index)
    }

    pub fn merge_section_at(&self, lane_index: usize, s: f64) -> Option<&MergeSection> {
        self.merge_sections.iter().find(|m| m.contains(lane_index, s))
    }

    /// Adjacent through lane that an occupant of a merge lane has to move to.
    pub fn merge_exit_lane(&self, lane_index: usize) -> Option<usize> {
        if lane_index + 1 < self.lane_count && !self.is_merge_lane(lane_index + 1) {
            Some(lane_index + 1)
        } else if lane_index > 0 && !self.is_merge_lane(lane_index - 1) {
            Some(lane_index - 1)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_lane_rounds_half_to_left() {
        let road = RoadModel::new(3);
        assert_eq!(road.nearest_lane(0.0), 0);
        assert_eq!(road.nearest_lane(1.74), 0);
        assert_eq!(road.nearest_lane(1.75), 1);
        assert_eq!(road.nearest_lane(-1.8), -1);
        assert!(!road.has_lane(3));
    }

    #[test]
    fn merge_exit_prefers_left_neighbour() {
        let mut road = RoadModel::new(3);
        road.merge_sections.push(MergeSection {
            lane_index: 0,
            s_start: 100.0,
            s_end: 300.0,
        });
        assert_eq!(road.merge_exit_lane(0), Some(1));
        assert!(road.merge_section_at(0, 300.0).is_some());
        assert!(road.merge_section_at(0, 300.1).is_none());
        assert!(road.merge_section_at(1, 200.0).is_none());
    }
}
