//! Fixtures shared by the benchmarks.

use fttc::{
    all_trajectories, build_graph, build_matrix, deploy, rng_from_seed, DissimilarityMatrix,
    NetworkConfig, Trajectory,
};

/// Trajectories of a freshly deployed default field with `n` nodes.
pub fn field_trajectories(n: usize, seed: u64) -> Vec<Trajectory> {
    let config = NetworkConfig {
        n_nodes: n,
        rng_seed: seed,
        ..NetworkConfig::default()
    };
    let nodes = deploy(&config, &mut rng_from_seed(seed));
    let graph = build_graph(&nodes, config.base_station, config.comm_range);
    all_trajectories(&graph).trajectories
}

pub fn field_matrix(n: usize, seed: u64) -> (Vec<Trajectory>, DissimilarityMatrix) {
    let trajs = field_trajectories(n, seed);
    let m = build_matrix(&trajs);
    (trajs, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_cover_the_field() {
        let (trajs, m) = field_matrix(100, 1);
        assert!(trajs.len() > 90);
        assert_eq!(m.len(), trajs.len());
    }
}
