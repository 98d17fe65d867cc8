//! Desk-scale tank simulator for the navigation strategy.

pub mod dataset;
pub mod hns;
pub mod mission;
pub mod tank;
pub mod vehicle;

pub use dataset::{generate_dataset, DatasetConfig};
pub use hns::{behavior_table, coordinate_behaviors, BehaviorSet, HnsThresholds, Predicates};
pub use mission::{run_mission, ContourClassifier, Direction, GroundTruth, MissionConfig, MissionLog, MissionSummary};
pub use tank::{simulate_sonar, BeamSide, SonarScan, TankGeometry, Wall, BEAM_OFFSETS};
pub use vehicle::{step_vehicle, Commands, VehicleLimits, VehicleState};
