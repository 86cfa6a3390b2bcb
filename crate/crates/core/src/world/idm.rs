use serde::{Deserialize, Serialize};

/// Intelligent Driver Model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdmParams {
    /// Maximum acceleration, m/s².
    pub a_max: f64,
    /// Comfortable deceleration, m/s².
    pub b: f64,
    /// Desired time headway, s.
    pub time_headway: f64,
    /// Jam distance, m.
    pub s0: f64,
    pub delta: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        Self {
            a_max: 1.5,
            b: 2.0,
            time_headway: 1.5,
            s0: 2.0,
            delta: 4.0,
        }
    }
}

/// Relation to the vehicle ahead: bumper-to-bumper gap and leader speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leader {
    pub gap: f64,
    pub v: f64,
}

impl IdmParams {
    /// Static spacing kept at speed `v` with no closing speed.
    pub fn spacing(&self, v: f64) -> f64 {
        self.s0 + v * self.time_headway
    }

    pub fn desired_gap(&self, v: f64, closing_speed: f64) -> f64 {
        let dynamic = v * self.time_headway + v * closing_speed / (2.0 * (self.a_max * self.b).sqrt());
        self.s0 + dynamic.max(0.0)
    }

    pub fn acceleration(&self, v: f64, v_des: f64, leader: Option<Leader>) -> f64 {
        let free = 1.0 - (v / v_des.max(0.1)).powf(self.delta);
        let interaction = match leader {
            Some(l) => {
                let s_star = self.desired_gap(v, v - l.v);
                let gap = l.gap.max(0.01);
                (s_star / gap).powi(2)
            }
            None => 0.0,
        };
        self.a_max * (free - interaction)
    }
}
