use serde::{Deserialize, Serialize};

use crate::algebra::LiouvilleVec;
use crate::error::{Error, Result};
use crate::protocol::ProtocolSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryLabel {
    ExactLiouville,
    ExactSpinor,
    Inertial,
    Corrected,
    Adiabatic,
}

impl TrajectoryLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrajectoryLabel::ExactLiouville => "exact-liouville",
            TrajectoryLabel::ExactSpinor => "exact-spinor",
            TrajectoryLabel::Inertial => "inertial",
            TrajectoryLabel::Corrected => "corrected",
            TrajectoryLabel::Adiabatic => "adiabatic",
        }
    }
}

impl std::fmt::Display for TrajectoryLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub sample: ProtocolSample,
    pub state: LiouvilleVec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub label: TrajectoryLabel,
    pub points: Vec<TrajectoryPoint>,
    pub initial_energy: f64,
}

impl Trajectory {
    /// Builds a trajectory, checking that it starts at t = 0 and that
    /// sample times increase strictly.
    pub fn new(label: TrajectoryLabel, points: Vec<TrajectoryPoint>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::GridMismatch("empty trajectory".into()))?;
        if first.sample.t != 0.0 {
            return Err(Error::GridMismatch(format!(
                "first sample at t={} instead of 0",
                first.sample.t
            )));
        }
        if points.windows(2).any(|w| w[1].sample.t <= w[0].sample.t) {
            return Err(Error::GridMismatch("sample times not increasing".into()));
        }
        let initial_energy = first.state.h;
        Ok(Self {
            label,
            points,
            initial_energy,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.sample.t).collect()
    }

    pub fn states(&self) -> impl Iterator<Item = &LiouvilleVec> {
        self.points.iter().map(|p| &p.state)
    }

    pub fn last(&self) -> &TrajectoryPoint {
        self.points.last().expect("trajectories are never empty")
    }
}
