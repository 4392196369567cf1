//! Exhaustive accelerator design-space exploration: enumerate the grid,
//! simulate and cost every feasible candidate, extract Pareto fronts per
//! objective pair, and pick the knee candidate.

mod error;
mod pareto;
mod report;
mod runner;
mod space;

pub use error::Error;
pub use pareto::{knee, pareto_front};
pub use report::{render_csv, scatter_svg, write_csv, write_scatter_svgs};
pub use runner::{run_dse, DseReport, DseRow, PrecisionVerdict};
pub use space::{enumerate, Candidate, DesignSpace, ObjectivePair};

pub type Result<T> = std::result::Result<T, Error>;
