//! Accelerated RRT* for car-like vehicles with Reeds-Shepp steering, a
//! y-bucketed nearest-neighbor index and tip-graph path optimization.

pub mod bench;
pub mod error;
pub mod geometry;
pub mod nn_index;
pub mod optimize;
pub mod planner;
pub mod reeds_shepp;

pub use bench::{
    load_scenario, make_obstacle_scenario, parse_scenario, percentile, read_csv, render_svg, run_trials, summarize,
    write_csv, ObstacleStrip, ScenarioSpec, Summary, SvgLayers, TrialRecord,
};
pub use error::{BenchError, GeometryError, IndexError, PlanError, ScenarioFileError};
pub use geometry::{
    collide_path, collide_pose, euclidean_dist, footprint, Car, CircleObstacle, Footprint, Obstacles, Pose,
    SegmentObstacle,
};
pub use nn_index::{CostMode, NNConfig, NNIndex};
pub use optimize::{
    find_tips, opt_path_dijkstra, opt_path_smart, optimize, path_cost, OptContext, OptMode, Optimized, Waypoint,
};
pub use planner::{is_near, plan, random_sample, Node, PlanResult, Planner, PlannerConfig, Scenario, Tree};
pub use reeds_shepp::{rs_distance, rs_path, rs_sample, Direction, RSPath, RSSamples, RSSegment, SegmentKind};
