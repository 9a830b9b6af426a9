//! Constrained NSGA-II and per-player Pareto frontiers.

mod nsga2;
mod sort;
mod tennis;

pub use nsga2::{nsga2, Evaluation, Individual, Nsga2Result, Nsga2Settings, Problem};
pub use sort::{crowding_distance, dominates, dominates_min, fast_nondominated_sort, hypervolume_2d, Outcome};
pub use tennis::{
    average_of, hypervolume_reference, merge_frontiers, nsga2_optimize, player_frontier, random_audit, AuditReport,
    AverageKind, CategoryConfig, Frontier, FrontierPoint, PlayerFrontier, SeedRun, TennisProblem, EPSILON_SWEEP,
    OUTCOME_DEDUP_TOLERANCE,
};
