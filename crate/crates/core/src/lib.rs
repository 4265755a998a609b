//! Wireless sensor network lifetime simulation with cluster heads chosen by
//! trajectory clustering.
//!
//! Every node's hello packet follows a shortest path to the base station. The
//! base station clusters those paths, takes each cluster's medoid path as its
//! representative, and makes the nodes on the representative paths cluster
//! heads. Lower-ranked paths of each cluster give alternate head sets for
//! failover. The [`sim`] module drives this round by round under a first-order
//! radio model ([`energy`]) and compares it with a random-rotation baseline.
//!
//! ```
//! use fttc::{run_simulation, lifetime_summary, NetworkConfig, Protocol};
//!
//! let config = NetworkConfig { n_nodes: 20, max_rounds: 50, ..NetworkConfig::default() };
//! let metrics = run_simulation(&config, Protocol::Fttc).unwrap();
//! let summary = lifetime_summary(&metrics, config.n_nodes);
//! assert!(summary.packets_total > 0);
//! ```

pub mod cluster;
pub mod energy;
pub mod error;
pub mod net;
pub mod routing;
pub mod sim;

pub use cluster::{
    build_matrix, fault_tolerant_plans, heads_of, init_clusters, one_way, plan_for_head_count,
    point_to_traj, recluster, rep_traj, traj_dist, tune_threshold, ClusterPlan,
    DissimilarityMatrix, PlanContext, PriorityPlan, PriorityPlanList, ReclusterOutcome,
};
pub use energy::{EnergyParams, MessageBits};
pub use error::{ConfigViolation, EnergyError, SimError};
pub use net::{
    deploy, rng_from_seed, validate_config, NetworkConfig, NodeId, Position, Role, SensorNode,
    SimRng, RNG_ALGORITHM,
};
pub use routing::{all_trajectories, build_graph, shortest_path, RadioGraph, Trajectory};
pub use sim::{
    assign_members, lifetime_summary, run_simulation, EnergyLedger, FaultScript, LifetimeSummary,
    Milestone, Protocol, RoundMetrics, SimEvent, Simulation,
};
