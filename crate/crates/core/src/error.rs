use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("circle obstacle ({x}, {y}, r={r}) needs a finite center and r > 0")]
    InvalidCircle { x: f64, y: f64, r: f64 },
    #[error("segment obstacle ({x1}, {y1})-({x2}, {y2}) needs distinct finite endpoints")]
    InvalidSegment { x1: f64, y1: f64, x2: f64, y2: f64 },
    #[error("invalid car: {0}")]
    InvalidCar(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndexError {
    #[error("index empty")]
    Empty,
    #[error("invalid index configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid planner configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error)]
pub enum ScenarioFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {source}")]
    Invalid {
        path: String,
        #[source]
        source: PlanError,
    },
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("percentile of an empty sample")]
    EmptySample,
    #[error("percentile rank {0} outside [0, 100]")]
    BadPercentile(f64),
    #[error("number of trials must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}
